"""Symbolic and concrete semantics of a network of timed automata.

Symbolic side: delay closure, discrete successors and exact predecessors
over zones.  Concrete side: replay of drifted runs, where each delay may
advance the clocks at slightly different speeds (rate perturbation epsilon).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import (
    CompiledNetwork,
    DiscreteState,
    Network,
    ModelError,
    Step,
    SymbolicState,
    compile_network,
    eval_data,
)
from .queries import CompiledPredicate, Formula
from ._dbm_kernels import kernel_successor_matrix
from .zones import Zone, _close, _constrain, _down, _extrapolate, _free, _reset, _up


@dataclass
class Counters:
    """Diagnostic counters surfaced through engine statistics."""

    range_disabled: int = 0


class NonInvertibleUpdate(Exception):
    """An edge update cannot be inverted while computing a predecessor."""


def initial_state(net: Network | CompiledNetwork) -> SymbolicState:
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    d = cn.initial
    cache = cn.control_cache(d.control)
    m = Zone.zero(cn.n_clocks).matrix.copy()
    m.flags.writeable = True
    for i, j, c in cache.invariant_rows:
        if not _constrain(m, i, j, c):
            raise ModelError("initial-invariant", "initial invariants violated at the origin")
    z = Zone(cn.n_clocks, m)
    return delay_close(cn, SymbolicState(d, z))


def delay_allowed(net: Network | CompiledNetwork, d: DiscreteState) -> bool:
    """False iff some location is committed/urgent or an urgent sync pair is enabled."""
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    cache = cn.control_cache(d.control)
    if cache.no_delay:
        return False
    for send_guards, recv_guards in cache.urgent_pairs:
        if eval_data(send_guards, d.vars) and eval_data(recv_guards, d.vars):
            return False
    return True


def delay_close(net: Network | CompiledNetwork, s: SymbolicState) -> SymbolicState:
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    if s.closed or s.zone.is_empty:
        return s
    if not delay_allowed(cn, s.discrete):
        return SymbolicState(s.discrete, s.zone, closed=True)
    cache = cn.control_cache(s.discrete.control)
    m = s.zone.matrix.copy()
    m.flags.writeable = True
    _up(m)
    for i, j, c in cache.invariant_rows:
        if not _constrain(m, i, j, c):  # pragma: no cover - zone was within invariants
            return SymbolicState(s.discrete, Zone.empty(cn.n_clocks), closed=True)
    return SymbolicState(s.discrete, Zone(cn.n_clocks, m), closed=True)


def apply_updates(updates, vars_: tuple[int, ...], ranges) -> tuple[int, ...] | None:
    """Run an edge's update list; None when a value leaves its declared range."""
    if not updates:
        return vars_
    out = list(vars_)
    for lhs, const, coeff, rhs in updates:
        val = const + (coeff * out[rhs] if rhs >= 0 else 0)
        lo, hi = ranges[lhs]
        if not (lo <= val <= hi):
            return None
        out[lhs] = val
    return tuple(out)


def edge_post(
    net: Network | CompiledNetwork,
    zone: Zone,
    step: Step,
    d: DiscreteState,
    counters: Counters | None = None,
) -> tuple[Zone, DiscreteState] | None:
    """Successor of (d, zone) through one discrete step (no delay, no widening).

    Returns None when the step is disabled at d (data guards false, or an
    update leaves its range, which also bumps the diagnostic counter).  An
    empty zone result means the clock guards cut everything.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    if not eval_data(step.data_guards, d.vars):
        return None
    new_vars = apply_updates(step.updates, d.vars, cn.var_ranges)
    if new_vars is None:
        if counters is not None:
            counters.range_disabled += 1
        return None
    control = list(d.control)
    for pi, li in step.control_patch:
        control[pi] = li
    d2 = DiscreteState(tuple(control), new_vars)
    if zone.is_empty:
        return Zone.empty(cn.n_clocks), d2
    m = zone.matrix.copy()
    m.flags.writeable = True
    for i, j, c in step.clock_rows:
        if not _constrain(m, i, j, c):
            return Zone.empty(cn.n_clocks), d2
    if step.resets:
        _reset(m, step.resets)
    for i, j, c in cn.control_cache(d2.control).invariant_rows:
        if not _constrain(m, i, j, c):
            return Zone.empty(cn.n_clocks), d2
    return Zone(cn.n_clocks, m), d2


def successor_steps(
    net: Network | CompiledNetwork,
    s: SymbolicState,
    counters: Counters | None = None,
    maxconst=None,
    free_inactive: bool = False,
) -> list[tuple[Step, str, SymbolicState]]:
    """Enabled delay+edge successors with their steps, delay-closed and extrapolated.

    Deterministic order: process index, then edge declaration order, with
    sender/receiver pairs keyed by the sender.  When some process is
    committed only steps involving a committed location are produced.

    ``free_inactive`` forgets clocks that cannot be read before their next
    reset; sound for location/data reachability only, so engines enable it
    just for goals without clock atoms.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    caps = cn.max_constants if maxconst is None else maxconst
    sd = delay_close(cn, s)
    if sd.zone.is_empty:
        return []
    src_m = sd.zone.matrix
    vars_ = sd.discrete.vars
    control0 = sd.discrete.control
    cache = cn.control_cache(control0)
    n = cn.n_clocks
    empty_idx = _EMPTY_IDX
    out: list[tuple[Step, str, SymbolicState]] = []
    for step, (guard_arr, resets_arr) in zip(cache.steps, cache.step_arrays):
        if step.data_guards and not eval_data(step.data_guards, vars_):
            continue
        if step.updates:
            new_vars = apply_updates(step.updates, vars_, cn.var_ranges)
            if new_vars is None:
                if counters is not None:
                    counters.range_disabled += 1
                continue
        else:
            new_vars = vars_
        control = list(control0)
        for pi, li in step.control_patch:
            control[pi] = li
        d2 = DiscreteState(tuple(control), new_vars)
        cache2 = cn.control_cache(d2.control)
        do_up = not cache2.no_delay and (
            not cache2.urgent_pairs or _no_urgent_enabled(cache2, new_vars)
        )
        m = src_m.copy()
        m.flags.writeable = True
        ok = kernel_successor_matrix(
            m,
            guard_arr,
            resets_arr,
            do_up,
            cache2.inv_array,
            cache2.inactive_array if free_inactive else empty_idx,
            caps,
        )
        if not ok:
            continue
        out.append((step, step.label, SymbolicState(d2, Zone(n, m), closed=True)))
    return out


_EMPTY_IDX = np.zeros(0, dtype=np.int64)


def _no_urgent_enabled(cache, vars_) -> bool:
    for send_guards, recv_guards in cache.urgent_pairs:
        if eval_data(send_guards, vars_) and eval_data(recv_guards, vars_):
            return False
    return True


def successors(
    net: Network | CompiledNetwork,
    s: SymbolicState,
    counters: Counters | None = None,
    maxconst=None,
) -> list[tuple[str, SymbolicState]]:
    """Enabled delay+edge successors, delay-closed and extrapolated."""
    return [(label, s2) for _, label, s2 in successor_steps(net, s, counters, maxconst)]


def source_discrete(cn: CompiledNetwork, step: Step, d_target: DiscreteState) -> DiscreteState:
    """Invert a step's control patch and variable updates.

    Raises NonInvertibleUpdate unless every update is var := c0 +/- var
    (coefficient +-1 on the assigned variable itself).
    """
    control = list(d_target.control)
    for pi, ei in step.edges:
        edge = cn._edge_parts[pi][ei]
        control[pi] = edge[0]  # src location index
    vars_ = list(d_target.vars)
    for lhs, const, coeff, rhs in reversed(step.updates):
        if rhs != lhs or coeff not in (1, -1):
            raise NonInvertibleUpdate(
                "update is not invertible (needs var := c +/- var)"
            )
        vars_[lhs] = (vars_[lhs] - const) * coeff  # coeff in {1,-1} is self-inverse
    for vi, (lo, hi) in enumerate(cn.var_ranges):
        if not (lo <= vars_[vi] <= hi):
            raise NonInvertibleUpdate("inverted variable value leaves its range")
    return DiscreteState(tuple(control), tuple(vars_))


def edge_pre(
    net: Network | CompiledNetwork,
    zone: Zone,
    step: Step,
    d_target: DiscreteState,
) -> tuple[Zone, DiscreteState]:
    """Exact weakest precondition of delay-then-step, at the source discrete state.

    Returns (pre zone, source discrete state).  The pre zone collects the
    valuations from which some delay followed by the step lands in ``zone``.
    Raises NonInvertibleUpdate when the variable updates cannot be inverted.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    d_src = source_discrete(cn, step, d_target)
    if not eval_data(step.data_guards, d_src.vars):
        return Zone.empty(cn.n_clocks), d_src
    if zone.is_empty:
        return zone, d_src
    m = zone.matrix.copy()
    m.flags.writeable = True
    # pin reset clocks at zero, then free them (un-reset)
    for x in step.resets:
        if not _constrain(m, x, 0, 0):
            return Zone.empty(cn.n_clocks), d_src
    for x in step.resets:
        _free(m, x)
    ok = True
    for i, j, c in step.clock_rows:
        if not _constrain(m, i, j, c):
            ok = False
            break
    if ok:
        src_cache = cn.control_cache(d_src.control)
        for i, j, c in src_cache.invariant_rows:
            if not _constrain(m, i, j, c):
                ok = False
                break
    if not ok:
        return Zone.empty(cn.n_clocks), d_src
    if delay_allowed(cn, d_src):
        _down(m)
        for i, j, c in src_cache.invariant_rows:
            if not _constrain(m, i, j, c):
                return Zone.empty(cn.n_clocks), d_src
    return Zone(cn.n_clocks, m), d_src


def state_satisfies(net: Network | CompiledNetwork, s: SymbolicState, body: Formula) -> bool:
    """Existential satisfaction of a predicate by a symbolic state."""
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    pred = CompiledPredicate(cn, body)
    return pred.satisfied(s.discrete.control, s.discrete.vars, s.zone)


# ---------------------------------------------------------------------------
# concrete drifted runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriftStep:
    """One schedule entry: advance each clock, then optionally fire a step.

    ``advance[i]`` is how far clock i moves during this entry; all advances
    must lie within [(1-eps)*nominal, (1+eps)*nominal] for the run's eps.
    ``edge`` names the step to fire at the advanced valuation: either
    (process, src, tgt) or a (sender, receiver) pair of such triples; None
    means a pure delay.
    """

    advance: tuple[Fraction, ...]
    nominal: Fraction
    edge: tuple | None = None


@dataclass(frozen=True)
class ConcreteState:
    discrete: DiscreteState
    valuation: tuple[Fraction, ...]


@dataclass
class DriftRunResult:
    ok: bool
    trace: list[ConcreteState] = field(default_factory=list)
    failed_at: int | None = None
    reason: str | None = None  # "schedule" or "infeasible"
    detail: str = ""


def _find_step(cn: CompiledNetwork, control, edge_spec) -> Step | None:
    """Locate the Step matching an edge spec among the enabled step shapes."""
    if edge_spec and isinstance(edge_spec[0], str):
        wanted = (edge_spec,)
    else:
        wanted = tuple(edge_spec)
    refs = []
    for pname, src, tgt in wanted:
        pi = cn.proc_index[pname]
        proc = cn.net.processes[pi]
        matches = [
            ei for ei, e in enumerate(proc.edges) if e.src == src and e.tgt == tgt
        ]
        if not matches:
            return None
        refs.append((pi, matches[0]))
    refs_t = tuple(refs)
    for step in cn.control_cache(control).steps:
        if step.edges == refs_t:
            return step
    return None


def _invariant_holds(cn: CompiledNetwork, control, valuation) -> bool:
    ext = (Fraction(0), *valuation)
    for i, j, c in cn.control_cache(control).invariant_rows:
        if ext[i] - ext[j] > c:
            return False
    return True


def drifted_run(
    net: Network | CompiledNetwork,
    start_discrete: DiscreteState,
    start_valuation: Sequence[Fraction | int],
    eps: Fraction | int,
    steps: Sequence[DriftStep],
) -> DriftRunResult:
    """Replay a drifted schedule from a concrete state.

    A violated drift envelope is a schedule error; a failed guard, invariant
    or range check is an infeasibility (a legitimate negative result).  On
    success the full trace of concrete states is returned.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    d = start_discrete
    val = tuple(Fraction(v) for v in start_valuation)
    if len(val) != cn.n_clocks:
        raise ValueError("valuation has wrong dimension")
    result = DriftRunResult(ok=True, trace=[ConcreteState(d, val)])

    def fail(idx, reason, detail):
        result.ok = False
        result.failed_at = idx
        result.reason = reason
        result.detail = detail
        return result

    for idx, ds in enumerate(steps):
        t = Fraction(ds.nominal)
        if t < 0 or len(ds.advance) != cn.n_clocks:
            return fail(idx, "schedule", "malformed drift step")
        lo, hi = (1 - eps) * t, (1 + eps) * t
        for a in ds.advance:
            if not (lo <= Fraction(a) <= hi):
                return fail(idx, "schedule", f"advance {a} outside [{lo},{hi}]")
        if any(Fraction(a) > 0 for a in ds.advance):
            if not delay_allowed(cn, d):
                return fail(idx, "infeasible", "delay while committed/urgent")
        val = tuple(v + Fraction(a) for v, a in zip(val, ds.advance))
        if not _invariant_holds(cn, d.control, val):
            return fail(idx, "infeasible", "invariant violated during delay")
        if ds.edge is not None:
            step = _find_step(cn, d.control, ds.edge)
            if step is None:
                return fail(idx, "infeasible", "step not enabled at this control")
            if not eval_data(step.data_guards, d.vars):
                return fail(idx, "infeasible", "data guard false")
            ext = (Fraction(0), *val)
            for i, j, c in step.clock_rows:
                if ext[i] - ext[j] > c:
                    return fail(idx, "infeasible", f"clock guard x{i}-x{j}<={c} false")
            new_vars = apply_updates(step.updates, d.vars, cn.var_ranges)
            if new_vars is None:
                return fail(idx, "infeasible", "update leaves declared range")
            control = list(d.control)
            for pi, li in step.control_patch:
                control[pi] = li
            d = DiscreteState(tuple(control), new_vars)
            val = tuple(
                Fraction(0) if (k + 1) in step.resets else v for k, v in enumerate(val)
            )
            if not _invariant_holds(cn, d.control, val):
                return fail(idx, "infeasible", "target invariant violated")
        result.trace.append(ConcreteState(d, val))
    return result
