import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rtamc.zones import INF, Zone

from oracles import (
    OPERATION_CHECKS,
    random_constraint,
    random_nonempty_zone,
    random_zone,
    run_operation_oracle,
)


def span(**kw):
    """Shorthand zone builder over clocks x (1) and y (2)."""
    n = kw.pop("dim", 2)
    z = Zone.universe(n)
    for key, val in kw.items():
        clock = {"x": 1, "y": 2, "z": 3}[key[0]]
        if key.endswith("_lo"):
            z = z.constrained(0, clock, -val)
        elif key.endswith("_hi"):
            z = z.constrained(clock, 0, val)
        else:
            z = z.constrained(0, clock, -val).constrained(clock, 0, val)
    return z


class TestMake:
    def test_zero_is_the_origin_point(self):
        z = Zone.zero(2)
        assert z.contains((0, 0))
        assert not z.contains((0, 1))

    def test_universe_contains_everything_nonnegative(self):
        u = Zone.universe(1)
        assert u.contains((0,)) and u.contains((17.5,))

    def test_zero_dim_zones(self):
        assert not Zone.zero(0).is_empty
        assert Zone.universe(0).contains(())


class TestCanonicalize:
    def test_triangle_tightening_adds_upper_bound(self):
        z = Zone.from_raw([[0, 0, 0], [10, 0, 2], [3, INF, 0]])
        assert z.bound(1, 0) == 5  # x <= (x-y) + y

    def test_contradiction_collapses_to_empty(self):
        z = Zone.from_raw([[0, -2, 0], [1, 0, INF], [INF, INF, 0]])  # x<=1 & x>=2
        assert z.is_empty

    def test_idempotent(self):
        rng = random.Random(7)
        for _ in range(50):
            z = random_nonempty_zone(rng, 2)
            again = Zone.from_raw(z.matrix.tolist())
            assert again == z


class TestIsEmpty:
    def test_zero_not_empty(self):
        assert not Zone.zero(2).is_empty

    def test_infeasible_interval(self):
        z = Zone.universe(1).constrained(1, 0, 1).constrained(0, 1, -2)
        assert z.is_empty


class TestContains:
    def test_diagonal(self):
        z = Zone.universe(2).constrained(1, 2, 0).constrained(2, 1, 0)
        assert z.contains((1.5, 1.5))
        assert not z.contains((1, 2))


class TestIncludes:
    def test_universe_includes_all(self):
        rng = random.Random(3)
        u = Zone.universe(2)
        for _ in range(25):
            assert u.includes(random_zone(rng, 2))

    def test_interval_ordering(self):
        le2 = span(dim=1, x_hi=2)
        le1 = span(dim=1, x_hi=1)
        assert le2.includes(le1)
        assert not le1.includes(le2)

    def test_empty_always_included(self):
        assert Zone.zero(2).includes(Zone.empty(2))


class TestIntersectConstraint:
    def test_interval_cut(self):
        z = span(dim=1, x_hi=2).constrained(0, 1, -1)  # [0,2] ∧ x>=1
        assert z.contains((1,)) and z.contains((2,)) and not z.contains((0.5,))

    def test_cut_to_empty(self):
        assert Zone.zero(2).constrained(0, 1, -1).is_empty


class TestUpDown:
    def test_up_from_origin(self):
        z = Zone.zero(2).up()
        assert z.bound(1, 2) == 0 and z.bound(2, 1) == 0
        assert z.bound(1, 0) == INF

    def test_up_from_offset_point(self):
        z = span(x=1, y=0).up()
        assert z.bound(1, 2) == 1 and z.bound(2, 1) == -1
        assert z.bound(0, 2) == 0  # y >= 0

    def test_down_shrinks_along_diagonal(self):
        z = span(x=1, y=2).down()
        assert z.contains((0, 1)) and z.contains((0.5, 1.5)) and z.contains((1, 2))
        assert not z.contains((1.5, 2.5)) and not z.contains((1, 1))

    def test_down_of_diagonal_segment(self):
        seg = Zone.universe(2).constrained(1, 2, 0).constrained(2, 1, 0)
        seg = seg.constrained(0, 1, -2).constrained(1, 0, 3)
        d = seg.down()
        assert d.contains((0, 0)) and d.contains((3, 3)) and not d.contains((3.5, 3.5))


class TestResetFree:
    def test_reset_projects(self):
        z = span(x_lo=1, x_hi=2).constrained(1, 2, 0).constrained(2, 1, 0)
        r = z.reset([1])
        assert r.contains((0, 1)) and r.contains((0, 2)) and not r.contains((0, 0.5))
        assert r.bound(1, 0) == 0

    def test_reset_all_gives_origin(self):
        rng = random.Random(11)
        for _ in range(20):
            z = random_nonempty_zone(rng, 2)
            assert z.reset([1, 2]) == Zone.zero(2)

    def test_free_is_identity_on_universe(self):
        u = Zone.universe(2)
        assert u.free(1) == u

    def test_free_forgets_one_clock(self):
        z = span(x=0, y=2).free(1)
        assert z.contains((9, 2)) and not z.contains((9, 1))


class TestExtrapolate:
    def test_lower_bound_clamped(self):
        z = span(dim=1, x_lo=5).extrapolated([0, 3])
        assert z.bound(0, 1) == -3

    def test_upper_bound_dropped(self):
        z = span(dim=1, x_hi=5).extrapolated([0, 3])
        assert z == Zone.universe(1)

    def test_result_is_superset(self):
        rng = random.Random(13)
        for _ in range(50):
            z = random_nonempty_zone(rng, 2)
            caps = [0, rng.randint(0, 4), rng.randint(0, 4)]
            assert z.extrapolated(caps).includes(z)


class TestAlgebraicProperties:
    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=60, deadline=None)
    def test_up_idempotent(self, seed):
        z = random_nonempty_zone(random.Random(seed), 2)
        assert z.up().up() == z.up()

    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=60, deadline=None)
    def test_down_idempotent(self, seed):
        z = random_nonempty_zone(random.Random(seed), 2)
        assert z.down().down() == z.down()

    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=60, deadline=None)
    def test_reset_idempotent(self, seed):
        rng = random.Random(seed)
        z = random_nonempty_zone(rng, 2)
        r = [1] if rng.random() < 0.5 else [1, 2]
        assert z.reset(r).reset(r) == z.reset(r)

    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=60, deadline=None)
    def test_constraint_order_irrelevant(self, seed):
        rng = random.Random(seed)
        z = random_nonempty_zone(rng, 2)
        c1, c2 = random_constraint(rng, 2), random_constraint(rng, 2)
        assert z.constrained(*c1).constrained(*c2) == z.constrained(*c2).constrained(*c1)

    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=40, deadline=None)
    def test_includes_partial_order(self, seed):
        rng = random.Random(seed)
        a, b, c = (random_zone(rng, 2) for _ in range(3))
        assert a.includes(a)
        if a.includes(b) and b.includes(a):
            assert a == b or (a.is_empty and b.is_empty)
        if a.includes(b) and b.includes(c):
            assert a.includes(c)

    @given(st.integers(0, 2 ** 30))
    @settings(max_examples=40, deadline=None)
    def test_up_delay_closure_pointwise(self, seed):
        rng = random.Random(seed)
        z = random_nonempty_zone(rng, 2)
        up = z.up()
        corner = (-z.bound(0, 1), -z.bound(0, 2))
        for t in (0, 0.5, 7):
            assert up.contains((corner[0] + t, corner[1] + t))


class TestMembershipOracleSmoke:
    """Small randomized runs of every operation against the lattice oracle.

    The acceptance suite repeats these with >=10^4 point checks per operation.
    """

    @pytest.mark.parametrize("op", sorted(OPERATION_CHECKS))
    def test_operation_agrees_with_oracle(self, op):
        checks = run_operation_oracle(op, cases=8, seed=1)
        assert checks > 0


def test_zone_equality_and_hash():
    a = Zone.zero(2).up()
    b = Zone.zero(2).up()
    assert a == b and hash(a) == hash(b)
    assert a != Zone.zero(2)
    assert Zone.empty(2) == Zone.empty(2)


def test_intersect_two_zones():
    a = span(dim=1, x_hi=3)
    b = span(dim=1, x_lo=2)
    assert a.intersect(b) == span(dim=1, x_lo=2, x_hi=3)
    assert a.intersect(span(dim=1, x_lo=4)).is_empty
