"""Robust reachability under infinitesimal clock drift.

A cycle of the discrete graph has a *stable zone*: the largest set of clock
valuations at its anchor from which the cycle can be traversed forwards and
backwards forever (greatest fixpoint of X -> X ∩ Post(X) ∩ Pre(X)).  Within
a stable zone arbitrarily small drift suffices to move between any two
points, so as soon as the search touches one, the whole zone is reachable
in the limit semantics and is injected as a new search root.

Cycles are discovered as back-edges of the depth-first search: a successor
whose discrete state already sits on the DFS stack closes the stack segment
into a candidate cycle.  Stable zones are memoized twice: per concrete
cycle, and by the cycle's clock-projected shape (zones never see integer
variables, so cycles differing only in variable levels share one fixpoint).
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .engine import (
    EngineError,
    PassedList,
    SearchOptions,
    SearchStats,
    Verdict,
    goals_clock_free,
    merged_caps,
)
from .model import (
    CompiledNetwork,
    DiscreteState,
    Network,
    Step,
    SymbolicState,
    compile_network,
    eval_data,
)

_MISS = object()
from .queries import CompiledPredicate, Formula
from .semantics import (
    Counters,
    NonInvertibleUpdate,
    apply_updates,
    delay_allowed,
    delay_close,
    edge_post,
    edge_pre,
    initial_state,
    successor_steps,
)
from .zones import Zone


@dataclass(frozen=True)
class Cycle:
    """A step sequence returning control and variables to the anchor."""

    anchor: DiscreteState
    steps: tuple[Step, ...]


@dataclass(frozen=True)
class StableZoneEntry:
    cycle: Cycle
    zone: Zone


def discrete_trajectory(cn: CompiledNetwork, cycle: Cycle) -> list[DiscreteState]:
    """Anchor plus the discrete state after each step (last one == anchor)."""
    out = [cycle.anchor]
    d = cycle.anchor
    for step in cycle.steps:
        new_vars = apply_updates(step.updates, d.vars, cn.var_ranges)
        if new_vars is None:
            raise EngineError("cycle replays out of variable range", code="cycle")
        control = list(d.control)
        for pi, li in step.control_patch:
            control[pi] = li
        d = DiscreteState(tuple(control), new_vars)
        out.append(d)
    if d != cycle.anchor:
        raise EngineError("cycle does not return to its anchor", code="cycle")
    return out


def cycle_post(net: Network | CompiledNetwork, x: Zone, cycle: Cycle) -> Zone:
    """Forward image along one traversal: delay-then-edge per step, ending at the anchor."""
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    z, d = x, cycle.anchor
    for step in cycle.steps:
        if z.is_empty:
            return z
        z = delay_close(cn, SymbolicState(d, z)).zone
        res = edge_post(cn, z, step, d)
        if res is None:
            return Zone.empty(cn.n_clocks)
        z, d = res
    return z


def cycle_pre(net: Network | CompiledNetwork, x: Zone, cycle: Cycle) -> Zone:
    """Backward image along one traversal; exact adjoint of cycle_post.

    Raises NonInvertibleUpdate when a step's variable updates cannot be
    inverted (such cycles are rejected by the search).
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    traj = discrete_trajectory(cn, cycle)
    z = x
    for step, d_target in zip(reversed(cycle.steps), reversed(traj[1:])):
        if z.is_empty:
            return z
        z, _ = edge_pre(cn, z, step, d_target)
    return z


def stable_zone(
    net: Network | CompiledNetwork,
    cycle: Cycle,
    max_iters: int = 4096,
    caps=None,
) -> Zone:
    """Greatest fixpoint of X -> X ∩ cycle_post(X) ∩ cycle_pre(X).

    Seeded with the invariant-constrained universe at the anchor; the result
    may be empty.  Raises EngineError when ``max_iters`` is exceeded.

    Each iterate is widened with the maximal-constant extrapolation.  This is
    required for convergence, not just speed: a clock the cycle neither tests
    nor resets must grow by the cycle duration per traversal, so without
    widening the backward constraints descend forever and the unwidened
    fixpoint is empty at every finite stage.  Widening quotients such clocks
    away exactly like the classic region construction does ("beyond the
    maximal constant"), keeping the iteration inside a finite lattice.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    if caps is None:
        caps = cn.max_constants
    caps_list = list(caps)
    w = Zone.universe(cn.n_clocks)
    for i, j, c in cn.control_cache(cycle.anchor.control).invariant_rows:
        w = w.constrained(i, j, c)
    w = w.extrapolated(caps_list)
    for _ in range(max_iters):
        if w.is_empty:
            return w
        w2 = w.intersect(cycle_post(cn, w, cycle))
        if not w2.is_empty:
            w2 = w2.intersect(cycle_pre(cn, w2, cycle))
        if not w2.is_empty:
            w2 = w2.extrapolated(caps_list)
        if w2 == w:
            return w
        w = w2
    raise EngineError(
        f"stable-zone fixpoint did not converge within {max_iters} iterations "
        f"(cycle of length {len(cycle.steps)} at anchor {cycle.anchor})",
        code="fixpoint-cap",
    )


def _cycle_shape(cn: CompiledNetwork, cycle: Cycle, traj: list[DiscreteState]):
    """Clock-projected view of a cycle: everything its stable zone depends on."""
    parts = []
    for step, d_src, d_tgt in zip(cycle.steps, traj[:-1], traj[1:]):
        parts.append(
            (
                delay_allowed(cn, d_src),
                cn.control_cache(d_src.control).invariant_rows,
                step.clock_rows,
                step.resets,
                cn.control_cache(d_tgt.control).invariant_rows,
            )
        )
    return tuple(parts)


@dataclass
class _Frame:
    state: SymbolicState
    succ: list
    idx: int = 0
    via_step: Step | None = None
    via_label: str = ""
    injected: bool = False


class _RobustSearch:
    """One robust exploration: DFS + cycle discovery + stable-zone injection."""

    def __init__(self, cn: CompiledNetwork, preds: list[CompiledPredicate], opts: SearchOptions):
        self.cn = cn
        self.preds = preds
        self.opts = opts
        self.caps = merged_caps(cn, preds)
        self.free_inactive = goals_clock_free(preds)
        self.counters = Counters()
        self.stats = SearchStats()
        self.passed = PassedList(opts.subsumption)
        self.pending: deque[tuple[str, SymbolicState, bool]] = deque()
        self.stack: list[_Frame] = []
        self.onstack: dict[DiscreteState, list[int]] = {}
        # cycles are memoized per control vector and instantiated at every
        # visited variable valuation: coverage pruning routinely cuts the DFS
        # before a loop closes again at a shifted valuation, so waiting for a
        # fresh back-edge there would miss exactly the drift-chained levels
        self.seen_cycles: set[tuple[tuple[int, ...], tuple[Step, ...]]] = set()
        self.control_cycles: dict[tuple[int, ...], list[tuple[Step, ...]]] = {}
        self.vars_at_control: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        self.instantiations: dict[tuple[int, int, tuple[int, ...]], Zone | None] = {}
        self.cycle_ids: dict[tuple[tuple[int, ...], tuple[Step, ...]], int] = {}
        self.shape_cache: dict = {}
        self.enqueued: set[tuple[DiscreteState, Zone]] = set()
        self.found = [False] * len(preds)
        self.remaining = len(preds)
        self.sat_trace: list | None = None

    def _check_goals(self, s: SymbolicState, label: str | None, injected: bool) -> None:
        for k, pred in enumerate(self.preds):
            if self.found[k]:
                continue
            if pred.satisfied(s.discrete.control, s.discrete.vars, s.zone):
                self.found[k] = True
                self.remaining -= 1
                if (
                    len(self.preds) == 1
                    and self.sat_trace is None
                    and not injected
                    and label is not None
                ):
                    path = [(fr.via_label, fr.state) for fr in self.stack[1:]]
                    path.append((label, s))
                    self.sat_trace = path
                elif len(self.preds) == 1 and self.sat_trace is None and label is None:
                    if not injected:
                        self.sat_trace = []  # the initial state satisfies the goal

    # -- stable zones --------------------------------------------------------

    def _note_cycle(self, anchor: DiscreteState, steps: tuple[Step, ...]) -> None:
        key = (anchor.control, steps)
        if key in self.seen_cycles:
            return
        self.seen_cycles.add(key)
        self.stats.cycles_found += 1
        cid = len(self.cycle_ids)
        self.cycle_ids[key] = cid
        self.control_cycles.setdefault(anchor.control, []).append(steps)
        # instantiate at every variable valuation already visited here
        for vars_ in self.vars_at_control.get(anchor.control, ()):
            d = DiscreteState(anchor.control, vars_)
            w = self._instantiate(cid, steps, d)
            if w is None or (d, w) in self.enqueued:
                continue
            for z in self.passed.zones_at(d):
                if self._triggers(z, w):
                    self._enqueue_zone(d, w)
                    break

    def _instantiate(self, cid: int, steps: tuple[Step, ...], d: DiscreteState) -> Zone | None:
        """Stable zone of a memoized cycle re-anchored at d, or None when the
        cycle cannot run from d's variable valuation."""
        key = (cid, *d)
        hit = self.instantiations.get(key, _MISS)
        if hit is not _MISS:
            return hit
        cycle = Cycle(d, steps)
        try:
            traj = discrete_trajectory(self.cn, cycle)
        except EngineError:
            self.instantiations[key] = None
            return None
        for step, d_src in zip(steps, traj[:-1]):
            if not eval_data(step.data_guards, d_src.vars):
                self.instantiations[key] = None
                return None
        shape = _cycle_shape(self.cn, cycle, traj)
        w = self.shape_cache.get(shape)
        if w is None:
            try:
                w = stable_zone(self.cn, cycle, self.opts.max_fixpoint_iters, self.caps)
            except NonInvertibleUpdate:
                self.instantiations[key] = None
                return None
            self.shape_cache[shape] = w
        else:
            self.stats.stable_zone_cache_hits += 1
        result = None if w.is_empty else w
        self.instantiations[key] = result
        return result

    @staticmethod
    def _triggers(z: Zone, w: Zone) -> bool:
        return not z.includes(w) and not z.intersect(w).is_empty

    def _enqueue_zone(self, d: DiscreteState, w: Zone) -> None:
        key = (d, w)
        if key in self.enqueued:
            return
        self.enqueued.add(key)
        self.stats.stable_zones_added += 1
        self.pending.append(("stable-zone", SymbolicState(d, w), True))

    def _check_entries(self, d: DiscreteState, z: Zone) -> None:
        cycles = self.control_cycles.get(d.control)
        if not cycles:
            return
        for steps in cycles:
            cid = self.cycle_ids[(d.control, steps)]
            w = self._instantiate(cid, steps, d)
            if w is None or (d, w) in self.enqueued:
                continue
            if self._triggers(z, w):
                self._enqueue_zone(d, w)

    # -- DFS -----------------------------------------------------------------

    def _admit(self, label: str | None, s: SymbolicState, injected: bool) -> bool:
        d, z = s.discrete, s.zone
        if self.passed.covered(d, z):
            return False
        if d not in self.passed.store:
            self.vars_at_control.setdefault(d.control, []).append(d.vars)
        self.passed.insert(d, z)
        self.stats.states_stored += 1
        self._check_goals(s, label, injected)
        self._check_entries(d, z)
        return True

    def _push(self, step: Step | None, label: str, s: SymbolicState, injected: bool) -> None:
        frame = _Frame(
            s,
            successor_steps(self.cn, s, self.counters, self.caps, self.free_inactive),
            via_step=step,
            via_label=label,
            injected=injected,
        )
        self.stack.append(frame)
        self.onstack.setdefault(s.discrete, []).append(len(self.stack) - 1)
        self.stats.states_explored += 1

    def _pop(self) -> None:
        frame = self.stack.pop()
        positions = self.onstack[frame.state.discrete]
        positions.pop()
        if not positions:
            del self.onstack[frame.state.discrete]

    def run(self) -> None:
        s0 = initial_state(self.cn)
        self.pending.append(("", s0, False))
        while self.pending or self.stack:
            if not self.remaining:
                break
            if not self.stack:
                label, s, injected = self.pending.popleft()
                s = delay_close(self.cn, s)
                if self._admit(None, s, injected):
                    self._push(None, label, s, injected)
                continue
            frame = self.stack[-1]
            if frame.idx >= len(frame.succ):
                self._pop()
                continue
            step, label, s2 = frame.succ[frame.idx]
            frame.succ[frame.idx] = None
            frame.idx += 1
            d2 = s2.discrete
            positions = self.onstack.get(d2)
            if positions:
                pos = positions[-1]
                seg_len = len(self.stack) - pos
                if seg_len > self.opts.max_cycle_len:
                    self.stats.cycles_skipped_long += 1
                else:
                    steps = tuple(fr.via_step for fr in self.stack[pos + 1 :]) + (step,)
                    self._note_cycle(d2, steps)
            if self._admit(label, s2, frame.injected):
                self._push(step, label, s2, frame.injected)


def reach_robust(
    net: Network | CompiledNetwork,
    goal: Formula,
    opts: SearchOptions | None = None,
) -> Verdict:
    """SAT iff some state is reachable for every positive drift bound.

    Standard DFS augmented with stable-zone injection; runs to the fixpoint
    of the passed list (or until the single goal is found).
    """
    opts = opts or SearchOptions()
    found, stats, trace = _run_robust(net, [goal], opts)
    status = "SAT" if found[0] else "UNSAT"
    return Verdict(status, trace if opts.trace else None, stats)


def reach_robust_multi(
    net: Network | CompiledNetwork,
    goals: list[Formula],
    opts: SearchOptions | None = None,
) -> tuple[list[bool], SearchStats]:
    """Evaluate several goals over one shared robust exploration."""
    found, stats, _ = _run_robust(net, goals, opts or SearchOptions())
    return found, stats


def _run_robust(net, goals, opts):
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    preds = [CompiledPredicate(cn, g) for g in goals]
    search = _RobustSearch(cn, preds, opts)
    t0 = time.perf_counter()
    search.run()
    search.stats.elapsed = time.perf_counter() - t0
    search.stats.range_disabled = search.counters.range_disabled
    return search.found, search.stats, search.sat_trace
