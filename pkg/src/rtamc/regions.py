"""Explicit region-graph oracle for cross-validating the zone engines.

A region fixes, per clock, either an integer part up to that clock's maximal
constant or "beyond it", plus the ordering (with ties and zeroes) of the
fractional parts of the bounded clocks.  The graph over (discrete state,
region) pairs with immediate-delay and edge transitions is finite and exact,
so plain graph reachability decides standard reachability, and the classic
region-based robust algorithm (add whole strongly-connected components that
the reachable set touches, and iterate) decides reachability under
vanishing clock drift.

Deliberately small-scale and independent: transitions are recomputed from
first principles here, and the closure-touch test runs its own tiny
all-pairs closure rather than the production DBM code.

Only intended for models within the size guard (few clocks, small
constants); ``build_region_graph`` refuses anything larger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .model import CompiledNetwork, DiscreteState, Network, compile_network, eval_data
from .queries import CompiledPredicate, Formula
from .semantics import apply_updates, delay_allowed

MAX_ORACLE_CLOCKS = 3
MAX_ORACLE_CONSTANT = 4
MAX_ORACLE_NODES = 400_000


class OracleScaleError(Exception):
    """Model too large for the explicit region construction."""


class Region(NamedTuple):
    ints: tuple[int | None, ...]  # per clock; None = beyond the maximal constant
    groups: tuple[tuple[int, ...], ...]  # fractional order; groups[0] = zero fraction


class Node(NamedTuple):
    discrete: DiscreteState
    region: Region


def initial_region(n: int) -> Region:
    return Region(tuple(0 for _ in range(n)), (tuple(range(1, n + 1)),))


def _enumerate_fraction_orders(clocks: tuple[int, ...]):
    """All (zero-group, ordered nonempty groups) arrangements of ``clocks``."""
    if not clocks:
        yield ((),)
        return
    # choose the zero-fraction subset, then ordered set partitions of the rest
    m = len(clocks)
    for mask in range(1 << m):
        zero = tuple(c for k, c in enumerate(clocks) if mask & (1 << k))
        rest = [c for k, c in enumerate(clocks) if not mask & (1 << k)]
        for parts in _ordered_partitions(rest):
            yield (zero,) + parts


def _ordered_partitions(items: list[int]):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for parts in _ordered_partitions(rest):
        # first joins an existing group or forms a new one at any position
        for k in range(len(parts)):
            yield parts[:k] + (tuple(sorted(parts[k] + (first,))),) + parts[k + 1 :]
        for k in range(len(parts) + 1):
            yield parts[:k] + ((first,),) + parts[k:]


def enumerate_regions(n: int, caps) -> list[Region]:
    regions: list[Region] = []

    def rec(i: int, ints: list[int | None]):
        if i > n:
            bounded = tuple(c for c in range(1, n + 1) if ints[c - 1] is not None)
            for groups in _enumerate_fraction_orders(bounded):
                regions.append(Region(tuple(ints), groups))
            return
        for v in range(int(caps[i]) + 1):
            ints.append(v)
            rec(i + 1, ints)
            ints.pop()
        ints.append(None)
        rec(i + 1, ints)
        ints.pop()

    rec(1, [])
    # deduplicate arrangements produced via different partition orders and
    # drop ill-formed ones: a clock at its maximal constant with a positive
    # fraction already lies beyond the constant
    seen = set()
    out = []
    for r in regions:
        if r in seen:
            continue
        seen.add(r)
        ok = True
        for c in range(1, n + 1):
            k = r.ints[c - 1]
            if k is not None and k == caps[c] and c not in r.groups[0]:
                ok = False
                break
        if ok:
            out.append(r)
    return out


def region_satisfies_row(region: Region, row: tuple[int, int, int]) -> bool:
    """Uniform satisfaction of a one-clock bound (x<=c as (x,0,c), x>=c as (0,x,-c))."""
    i, j, c = row
    if i and not j:  # x_i <= c
        k = region.ints[i - 1]
        if k is None:
            return False
        if i in region.groups[0]:
            return k <= c
        return k < c
    if j and not i:  # x_j >= -c
        k = region.ints[j - 1]
        if k is None:
            return True
        return k >= -c
    raise ValueError("region guards must bound a single clock")


def _delay_successor(region: Region, caps) -> Region | None:
    """The immediate time successor; None only when nothing changes (all beyond caps)."""
    ints, groups = region.ints, region.groups
    bounded = [c for c in range(1, len(ints) + 1) if ints[c - 1] is not None]
    if not bounded:
        return None  # time flows but the region is its own successor
    if groups[0]:
        # zero-fraction clocks acquire the smallest positive fraction; the
        # ones sitting at their maximal constant move beyond it instead
        new_ints = list(ints)
        moved = []
        for c in groups[0]:
            if ints[c - 1] == caps[c]:
                new_ints[c - 1] = None
            else:
                moved.append(c)
        mid = (tuple(moved),) if moved else ()
        return Region(tuple(new_ints), ((),) + mid + groups[1:])
    # the largest-fraction group wraps to the next integer
    last = groups[-1]
    new_ints = list(ints)
    new_zero = []
    for c in last:
        k = new_ints[c - 1]
        assert k is not None
        if k + 1 > caps[c]:
            new_ints[c - 1] = None
        else:
            new_ints[c - 1] = k + 1
            new_zero.append(c)
    return Region(tuple(new_ints), (tuple(sorted(new_zero)),) + groups[1:-1])


def _reset_region(region: Region, clocks: tuple[int, ...]) -> Region:
    ints = list(region.ints)
    for c in clocks:
        ints[c - 1] = 0
    new_groups = [tuple(sorted(set(region.groups[0]) | set(clocks)))]
    for g in region.groups[1:]:
        g2 = tuple(c for c in g if c not in clocks)
        if g2:
            new_groups.append(g2)
    return Region(tuple(ints), tuple(new_groups))


@dataclass
class RegionGraph:
    cn: CompiledNetwork
    caps: np.ndarray
    nodes: list[Node]
    index: dict[Node, int]
    succ: list[list[int]]
    initial: int
    counted_delay_selfloop: set[int] = field(default_factory=set)

    def node_count(self) -> int:
        return len(self.nodes)


def _all_discrete_states(cn: CompiledNetwork) -> list[DiscreteState]:
    controls: list[tuple[int, ...]] = [()]
    for p in cn.net.processes:
        controls = [c + (li,) for c in controls for li in range(len(p.locations))]
    varsets: list[tuple[int, ...]] = [()]
    for lo, hi in cn.var_ranges:
        varsets = [v + (x,) for v in varsets for x in range(lo, hi + 1)]
    return [DiscreteState(c, v) for c in controls for v in varsets]


def build_region_graph(
    net: Network | CompiledNetwork, extra_caps=None, max_nodes: int = MAX_ORACLE_NODES
) -> RegionGraph:
    """Full region graph over every discrete state (reachable or not).

    The robust algorithm needs cycles that standard exploration never
    reaches, hence the exhaustive node set.
    """
    cn = net if isinstance(net, CompiledNetwork) else compile_network(net)
    n = cn.n_clocks
    if n > MAX_ORACLE_CLOCKS:
        raise OracleScaleError(f"region oracle supports at most {MAX_ORACLE_CLOCKS} clocks")
    caps = cn.max_constants.copy()
    if extra_caps is not None:
        caps = np.maximum(caps, np.asarray(extra_caps, dtype=np.int64))
    if caps.max(initial=0) > MAX_ORACLE_CONSTANT:
        raise OracleScaleError(
            f"region oracle supports constants up to {MAX_ORACLE_CONSTANT}"
        )

    regions = enumerate_regions(n, caps)
    discretes = _all_discrete_states(cn)
    if len(regions) * len(discretes) > max_nodes:
        raise OracleScaleError("region graph would exceed the node cap")

    nodes: list[Node] = []
    index: dict[Node, int] = {}

    def region_ok(d: DiscreteState, r: Region) -> bool:
        rows = cn.control_cache(d.control).invariant_rows
        return all(region_satisfies_row(r, row) for row in rows)

    for d in discretes:
        for r in regions:
            if region_ok(d, r):
                node = Node(d, r)
                index[node] = len(nodes)
                nodes.append(node)

    succ: list[list[int]] = [[] for _ in nodes]
    delay_selfloops: set[int] = set()

    for ni, (d, r) in enumerate(nodes):
        # delay transition
        if delay_allowed(cn, d):
            nxt = _delay_successor(r, caps)
            if nxt is None:
                succ[ni].append(ni)  # unbounded region: its own time successor
                delay_selfloops.add(ni)
            elif region_ok(d, nxt):
                succ[ni].append(index[Node(d, nxt)])
        # edge transitions
        for step in cn.control_cache(d.control).steps:
            if not eval_data(step.data_guards, d.vars):
                continue
            if not all(region_satisfies_row(r, row) for row in step.clock_rows):
                continue
            new_vars = apply_updates(step.updates, d.vars, cn.var_ranges)
            if new_vars is None:
                continue
            control = list(d.control)
            for pi, li in step.control_patch:
                control[pi] = li
            d2 = DiscreteState(tuple(control), new_vars)
            r2 = _reset_region(r, step.resets)
            if region_ok(d2, r2):
                succ[ni].append(index[Node(d2, r2)])

    init = Node(cn.initial, initial_region(n))
    if init not in index:
        raise OracleScaleError("initial region violates the invariants")
    return RegionGraph(cn, caps, nodes, index, succ, index[init], delay_selfloops)


def region_reachable(rg: RegionGraph, starts=None) -> set[int]:
    """Forward closure over the region graph."""
    from collections import deque

    seen = set(starts) if starts is not None else {rg.initial}
    work = deque(seen)
    while work:
        ni = work.popleft()
        for nj in rg.succ[ni]:
            if nj not in seen:
                seen.add(nj)
                work.append(nj)
    return seen


def region_satisfies_pred(rg: RegionGraph, pred: CompiledPredicate, ni: int) -> bool:
    d, r = rg.nodes[ni]
    for cl in pred.clauses:
        ok = True
        for pi, li, positive in cl.loc_lits:
            if (d.control[pi] == li) != positive:
                ok = False
                break
        if not ok:
            continue
        if cl.data_lits and not eval_data(cl.data_lits, d.vars):
            continue
        if any(not region_satisfies_row(r, row) for row in cl.clock_rows):
            continue
        return True
    return False


def reach_standard_regions(rg: RegionGraph, goal: Formula) -> bool:
    pred = CompiledPredicate(rg.cn, goal)
    return any(region_satisfies_pred(rg, pred, ni) for ni in region_reachable(rg))


# ---------------------------------------------------------------------------
# robust algorithm on the region graph
# ---------------------------------------------------------------------------

def _closure_rows(region: Region, caps, n: int):
    """The topological closure of a region as difference constraints."""
    rows: list[tuple[int, int, float]] = []
    pos: dict[int, int] = {}
    for gi, g in enumerate(region.groups):
        for c in g:
            pos[c] = gi
    for c in range(1, n + 1):
        k = region.ints[c - 1]
        if k is None:
            rows.append((0, c, -float(caps[c])))  # x >= cap
            continue
        if pos[c] == 0:
            rows.append((c, 0, float(k)))
            rows.append((0, c, -float(k)))
        else:
            rows.append((c, 0, float(k + 1)))
            rows.append((0, c, -float(k)))
    bounded = [c for c in range(1, n + 1) if region.ints[c - 1] is not None]
    for a in bounded:
        for b in bounded:
            if a == b:
                continue
            ka, kb = region.ints[a - 1], region.ints[b - 1]
            if pos[a] <= pos[b]:  # frac(a) <= frac(b) in the closure
                rows.append((a, b, float(ka - kb)))
    return rows


def _rows_consistent(rows, n: int) -> bool:
    """Tiny independent all-pairs closure over the combined constraints."""
    size = n + 1
    inf = float("inf")
    m = [[inf] * size for _ in range(size)]
    for i in range(size):
        m[i][i] = 0.0
    for j in range(1, size):
        m[0][j] = min(m[0][j], 0.0)
    for i, j, c in rows:
        if c < m[i][j]:
            m[i][j] = c
    for k in range(size):
        for i in range(size):
            mik = m[i][k]
            if mik == inf:
                continue
            row_k = m[k]
            row_i = m[i]
            for j in range(size):
                v = mik + row_k[j]
                if v < row_i[j]:
                    row_i[j] = v
    return all(m[i][i] >= 0 for i in range(size))


def closures_touch(rg: RegionGraph, a: Region, b: Region) -> bool:
    n = rg.cn.n_clocks
    rows = _closure_rows(a, rg.caps, n) + _closure_rows(b, rg.caps, n)
    return _rows_consistent(rows, n)


def _sccs(succ: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan."""
    n = len(succ)
    indexv = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if indexv[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                indexv[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            advanced = False
            while pi < len(succ[v]):
                w = succ[v][pi]
                pi += 1
                if indexv[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on[w]:
                    low[v] = min(low[v], indexv[w])
            if advanced:
                continue
            work.pop()
            if low[v] == indexv[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return out


def robust_reach_regions(rg: RegionGraph, goal: Formula) -> bool:
    """Region-based robust reachability: grow the reachable set by whole
    strongly-connected components whose closure it touches, to a fixpoint."""
    pred = CompiledPredicate(rg.cn, goal)
    reach = region_reachable(rg)
    sccs = _sccs(rg.succ)
    nontrivial = []
    for comp in sccs:
        if len(comp) > 1 or any(v in rg.succ[v] for v in comp):
            nontrivial.append(comp)

    changed = True
    while changed:
        changed = False
        by_discrete: dict[DiscreteState, list[int]] = {}
        for ni in reach:
            by_discrete.setdefault(rg.nodes[ni].discrete, []).append(ni)
        for comp in nontrivial:
            if all(v in reach for v in comp):
                continue
            touched = False
            for v in comp:
                d, r = rg.nodes[v]
                for ri in by_discrete.get(d, ()):
                    if closures_touch(rg, r, rg.nodes[ri].region):
                        touched = True
                        break
                if touched:
                    break
            if touched:
                reach = region_reachable(rg, reach | set(comp))
                changed = True
    return any(region_satisfies_pred(rg, pred, ni) for ni in reach)
