"""Standard-semantics reachability: depth-first search with subsumption.

The passed list stores, per discrete state, an antichain of zones: a new
state is skipped when an already-stored zone includes it, and stored zones
included in the new one are evicted.  Extrapolation inside ``successors``
bounds the zone lattice, so the search always terminates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._dbm_kernels import k_covered, k_equal_any, k_keep_mask
from .model import CompiledNetwork, DiscreteState, Network, SymbolicState, compile_network
from .semantics import Counters, initial_state, successor_steps
from .queries import (
    CompiledPredicate,
    Formula,
    Not,
    Query,
    QueryError,
    EXISTS_EVENTUALLY,
    FORALL_ALWAYS,
)
from .zones import Zone


class EngineError(Exception):
    """Resource caps exceeded; never a silent wrong verdict."""

    def __init__(self, message: str, code: str = "engine"):
        super().__init__(message)
        self.code = code


@dataclass
class SearchStats:
    states_stored: int = 0
    states_explored: int = 0
    stable_zones_added: int = 0
    elapsed: float = 0.0
    cycles_found: int = 0
    cycles_skipped_long: int = 0
    stable_zone_cache_hits: int = 0
    range_disabled: int = 0


@dataclass
class SearchOptions:
    trace: bool = False
    subsumption: bool = True
    max_cycle_len: int = 512
    max_fixpoint_iters: int = 4096


@dataclass
class Verdict:
    status: str  # "SAT" | "UNSAT"
    trace: list[tuple[str, SymbolicState]] | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


class _ZoneStore:
    """Zones at one discrete state, stacked for batch subsumption tests."""

    __slots__ = ("arr", "count", "zones")

    def __init__(self, z: Zone):
        m = z.matrix
        self.arr = np.empty((4,) + m.shape, dtype=np.int64)
        self.arr[0] = m
        self.count = 1
        self.zones: list[Zone] = [z]

    def covered(self, zm: np.ndarray) -> bool:
        return bool(k_covered(self.arr, self.count, zm))

    def has_equal(self, zm: np.ndarray) -> bool:
        return bool(k_equal_any(self.arr, self.count, zm))

    def insert(self, z: Zone, evict: bool) -> None:
        zm = z.matrix
        if evict:
            keep = np.empty(self.count, dtype=np.uint8)
            kept = k_keep_mask(self.arr, self.count, zm, keep)
            if kept != self.count:
                mask = keep.view(bool)
                view = self.arr[: self.count]
                self.arr[:kept] = view[mask]
                self.count = kept
                self.zones = [w for w, k in zip(self.zones, mask) if k]
        if self.count == self.arr.shape[0]:
            grown = np.empty((self.arr.shape[0] * 2,) + zm.shape, dtype=np.int64)
            grown[: self.count] = self.arr[: self.count]
            self.arr = grown
        self.arr[self.count] = zm
        self.count += 1
        self.zones.append(z)


class PassedList:
    """Visited store, per discrete state an antichain of zones (with subsumption)."""

    def __init__(self, subsumption: bool = True):
        self.subsumption = subsumption
        self.store: dict[DiscreteState, _ZoneStore] = {}

    def covered(self, d: DiscreteState, z: Zone) -> bool:
        st = self.store.get(d)
        if st is None:
            return False
        if self.subsumption:
            return st.covered(z.matrix)
        return st.has_equal(z.matrix)

    def insert(self, d: DiscreteState, z: Zone) -> None:
        st = self.store.get(d)
        if st is None:
            self.store[d] = _ZoneStore(z)
        else:
            st.insert(z, self.subsumption)

    def zones_at(self, d: DiscreteState) -> list[Zone]:
        st = self.store.get(d)
        return st.zones if st is not None else []


def merged_caps(cn: CompiledNetwork, preds: list[CompiledPredicate]) -> np.ndarray:
    caps = cn.max_constants.copy()
    for pred in preds:
        caps = np.maximum(caps, np.asarray(pred.clock_caps(), dtype=np.int64))
    return caps


def goals_clock_free(preds: list[CompiledPredicate]) -> bool:
    """True when no goal tests a clock, enabling inactive-clock reduction."""
    return all(not cl.clock_rows for pred in preds for cl in pred.clauses)


@dataclass
class _Frame:
    state: SymbolicState
    succ: list
    idx: int = 0
    via_label: str = ""


def _sat(pred: CompiledPredicate, s: SymbolicState) -> bool:
    return pred.satisfied(s.discrete.control, s.discrete.vars, s.zone)


def reach_standard(
    net: Network | CompiledNetwork,
    goal: Formula,
    opts: SearchOptions | None = None,
) -> Verdict:
    """SAT iff some standard-semantics reachable state satisfies ``goal``."""
    opts = opts or SearchOptions()
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    pred = CompiledPredicate(cn, goal)
    caps = merged_caps(cn, [pred])
    free = goals_clock_free([pred])
    counters = Counters()
    stats = SearchStats()
    t0 = time.perf_counter()

    def done(status: str, trace=None) -> Verdict:
        stats.elapsed = time.perf_counter() - t0
        stats.range_disabled = counters.range_disabled
        return Verdict(status, trace if opts.trace else None, stats)

    def expand(s):
        return [
            (label, s2) for _, label, s2 in successor_steps(cn, s, counters, caps, free)
        ]

    passed = PassedList(opts.subsumption)
    s0 = initial_state(cn)
    passed.insert(s0.discrete, s0.zone)
    stats.states_stored += 1
    if _sat(pred, s0):
        return done("SAT", [])
    stack = [_Frame(s0, expand(s0))]
    stats.states_explored += 1

    while stack:
        frame = stack[-1]
        if frame.idx >= len(frame.succ):
            stack.pop()
            continue
        label, s2 = frame.succ[frame.idx]
        frame.succ[frame.idx] = None
        frame.idx += 1
        if passed.covered(s2.discrete, s2.zone):
            continue
        passed.insert(s2.discrete, s2.zone)
        stats.states_stored += 1
        if _sat(pred, s2):
            path = [(fr.via_label, fr.state) for fr in stack[1:]]
            path.append((label, s2))
            return done("SAT", path)
        stack.append(_Frame(s2, expand(s2), via_label=label))
        stats.states_explored += 1

    return done("UNSAT")


def reach_standard_multi(
    net: Network | CompiledNetwork,
    goals: list[Formula],
    opts: SearchOptions | None = None,
) -> tuple[list[bool], SearchStats]:
    """Evaluate several goal predicates over one shared exploration.

    Runs to exhaustion unless every goal has been satisfied; verdicts are
    identical to running each goal separately (goals are per-state
    predicates and never prune the search).
    """
    opts = opts or SearchOptions()
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    preds = [CompiledPredicate(cn, g) for g in goals]
    caps = merged_caps(cn, preds)
    free = goals_clock_free(preds)
    counters = Counters()
    stats = SearchStats()
    t0 = time.perf_counter()
    found = [False] * len(preds)
    remaining = len(preds)

    def check(s: SymbolicState) -> None:
        nonlocal remaining
        for k, pred in enumerate(preds):
            if not found[k] and _sat(pred, s):
                found[k] = True
                remaining -= 1

    passed = PassedList(opts.subsumption)
    s0 = initial_state(cn)
    passed.insert(s0.discrete, s0.zone)
    stats.states_stored += 1
    check(s0)
    stack = [_Frame(s0, successor_steps(cn, s0, counters, caps, free))]
    stats.states_explored += 1
    while stack and remaining:
        frame = stack[-1]
        if frame.idx >= len(frame.succ):
            stack.pop()
            continue
        _, label, s2 = frame.succ[frame.idx]
        frame.succ[frame.idx] = None
        frame.idx += 1
        if passed.covered(s2.discrete, s2.zone):
            continue
        passed.insert(s2.discrete, s2.zone)
        stats.states_stored += 1
        check(s2)
        stack.append(_Frame(s2, successor_steps(cn, s2, counters, caps, free)))
        stats.states_explored += 1

    stats.elapsed = time.perf_counter() - t0
    stats.range_disabled = counters.range_disabled
    return found, stats


def check_query(
    net: Network | CompiledNetwork,
    q: Query,
    mode: str = "standard",
    opts: SearchOptions | None = None,
) -> Verdict:
    """Evaluate one query.  A[] is handled by duality: reach the negation.

    For A[] the returned SAT means the property holds (the negated body is
    unreachable); no trace is attached in that case.
    """
    if mode not in ("standard", "robust"):
        raise ValueError("mode must be 'standard' or 'robust'")
    opts = opts or SearchOptions()
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    if mode == "robust":
        from .robust import reach_robust as _reach
    else:
        _reach = reach_standard
    if q.quantifier == EXISTS_EVENTUALLY:
        return _reach(cn, q.body, opts)
    if q.quantifier == FORALL_ALWAYS:
        inner = _reach(cn, Not(q.body), opts)
        status = "UNSAT" if inner.sat else "SAT"
        stats = inner.stats
        return Verdict(status, None, stats)
    raise QueryError(f"unsupported quantifier {q.quantifier!r}")
