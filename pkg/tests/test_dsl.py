import random
import string

import pytest

from rtamc.casestudies import (
    LipSyncConfig,
    all_configs,
    build_lipsync,
    build_puri,
    lipsync_queries,
    puri_queries,
)
from rtamc.dsl import ParseError, parse_model, parse_queries, render_model, render_queries
from rtamc.queries import And, Compare, Not, Or, ProcessAt, EXISTS_EVENTUALLY, FORALL_ALWAYS

MINI = """
clock x, y;
int[-5,5] v = 0;
chan a;
urgent chan u;

process P {
  location l0 { init; invariant x <= 3; }
  location l1 { committed; }
  edge l0 -> l1 { guard x >= 1 and v < 3; sync a!; reset y; do v = v + 1; }
  edge l1 -> l0 { sync u?; }
}
process Q {
  location m0 { init; }
  edge m0 -> m0 { sync a?; }
  edge m0 -> m0 { sync u!; }
}

system P, Q;
"""


class TestParseModel:
    def test_mini_model_shape(self):
        net = parse_model(MINI)
        assert [p.name for p in net.processes] == ["P", "Q"]
        assert net.clocks == ("x", "y")
        assert net.variables[0].name == "v" and net.variables[0].lo == -5
        assert net.channels[1].urgent
        p = net.processes[0]
        assert p.initial == "l0"
        assert p.locations[0].invariant[0].bound == 3
        assert p.edges[0].updates[0].const == 1 and p.edges[0].updates[0].coeff == 1

    def test_puri_parses_to_expected_shape(self):
        net = parse_model(render_model(build_puri(2)))
        assert len(net.processes) == 1
        assert len(net.clocks) == 2
        assert len(net.processes[0].locations) == 4

    def test_strict_clock_guard_rejected(self):
        text = MINI.replace("guard x >= 1", "guard x < 1")
        with pytest.raises(ParseError) as err:
            parse_model(text)
        assert err.value.code == "strict-clock-guard"

    def test_invariant_lower_bound_rejected(self):
        text = MINI.replace("invariant x <= 3", "invariant x >= 2")
        with pytest.raises(ParseError) as err:
            parse_model(text)
        assert err.value.code == "invariant-upper-bound"

    def test_urgent_channel_clock_guard_rejected(self):
        text = MINI.replace("sync u?;", "guard y >= 1; sync u?;")
        with pytest.raises(ParseError) as err:
            parse_model(text)
        assert err.value.code == "urgent-clock-guard"

    def test_undeclared_identifier(self):
        text = MINI.replace("reset y;", "reset z;")
        with pytest.raises(ParseError) as err:
            parse_model(text)
        assert err.value.code == "undeclared"

    def test_error_position_is_exact(self):
        lines = MINI.strip().splitlines()
        bad = "\n".join(lines[:3] + ["chan a;  // duplicate"] + lines[3:])
        with pytest.raises(ParseError) as err:
            parse_model(bad)
        assert err.value.line == 4 and err.value.code == "duplicate"


class TestRoundTrip:
    @pytest.mark.parametrize("cfg", all_configs(), ids=lambda c: f"{c.stream}-{c.free_start}")
    def test_lipsync_variants(self, cfg):
        net = build_lipsync(cfg)
        assert parse_model(render_model(net)) == net

    def test_puri(self):
        for alpha in (2, 3):
            net = build_puri(alpha)
            assert parse_model(render_model(net)) == net

    def test_rendering_deterministic(self):
        net = build_lipsync(LipSyncConfig("anchored", True))
        assert render_model(net) == render_model(net)

    def test_mini_round_trip(self):
        net = parse_model(MINI)
        assert parse_model(render_model(net)) == net


class TestParseQueries:
    def test_paper_style_query(self):
        net = build_lipsync(LipSyncConfig())
        qs = parse_queries(
            "E<> VideoWdg.vw5 and not (SoundWdg.sw5 or VideoSynch.v07)", net
        )
        assert len(qs) == 1
        q = qs[0]
        assert q.quantifier == EXISTS_EVENTUALLY
        assert isinstance(q.body, And)
        assert isinstance(q.body.right, Not)
        assert isinstance(q.body.right.arg, Or)

    def test_forall_always(self):
        net = build_lipsync(LipSyncConfig())
        qs = parse_queries("A[] not SoundWdg.sw5", net)
        assert qs[0].quantifier == FORALL_ALWAYS

    def test_negated_clock_atom_rejected(self):
        net = build_puri(2)
        with pytest.raises(ParseError) as err:
            parse_queries("E<> not (x <= 3)", net)
        assert err.value.code == "negated-clock"

    def test_chained_comparison(self):
        qs = parse_queries("E<> 1 <= x <= 3")
        body = qs[0].body
        assert isinstance(body, And)
        assert body.left == Compare("x", ">=", 1)
        assert body.right == Compare("x", "<=", 3)

    def test_query_round_trip(self):
        qs = lipsync_queries() + puri_queries()
        text = render_queries(qs)
        net = build_lipsync(LipSyncConfig())
        reparsed = parse_queries(text)
        assert reparsed[:5] == qs[:5]

    def test_multiple_queries_in_order(self):
        text = render_queries(lipsync_queries())
        qs = parse_queries(text)
        assert len(qs) == 5


class TestFuzz:
    """The acceptance suite runs the large mutation corpus; these are smoke checks."""

    def test_single_character_corruption_points_at_the_right_line(self):
        rng = random.Random(99)
        base = render_model(build_puri(2))
        lines = base.splitlines()
        checked = 0
        for _ in range(300):
            k = rng.randrange(len(lines))
            if not lines[k].strip():
                continue
            col = rng.randrange(len(lines[k]))
            mutated = lines[k][:col] + "$" + lines[k][col + 1 :]
            text = "\n".join(lines[:k] + [mutated] + lines[k + 1 :])
            try:
                parse_model(text)
            except ParseError as err:
                if err.code == "lex":
                    assert err.line == k + 1
                    checked += 1
        assert checked > 50

    def test_random_bytes_never_crash(self):
        rng = random.Random(7)
        alphabet = string.printable + "\x00\xffé"
        for _ in range(2000):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 60)))
            try:
                parse_model(text)
            except ParseError:
                pass

    def test_truncations_never_crash(self):
        base = render_model(build_lipsync(LipSyncConfig()))
        for cut in range(0, len(base), 97):
            try:
                parse_model(base[:cut])
            except ParseError:
                pass
