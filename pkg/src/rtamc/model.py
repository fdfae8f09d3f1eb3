"""Domain model for networks of timed automata.

A network is a parallel composition of processes over shared clocks, bounded
integer variables and synchronisation channels.  Clock guards are non-strict
(x <= c, x >= c with natural c), invariants are upper bounds only, channels
may be urgent (their edges carry no clock guards), and locations may be
committed or urgent.

The dataclasses here are immutable and name-based; ``compile_network``
produces the index-based form the engines work on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .zones import Zone

MAX_CONSTANT = 1 << 40

DATA_LT, DATA_LE, DATA_EQ, DATA_GE, DATA_GT = range(5)
DATA_OPCODE = {"<": DATA_LT, "<=": DATA_LE, "==": DATA_EQ, ">=": DATA_GE, ">": DATA_GT}


class ModelError(Exception):
    """A structurally invalid network."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Channel:
    name: str
    urgent: bool = False


@dataclass(frozen=True)
class ClockAtom:
    """x <= c or x >= c with a natural constant."""

    clock: str
    op: Literal["<=", ">="]
    bound: int


@dataclass(frozen=True)
class DataAtom:
    var: str
    op: Literal["<", "<=", "==", ">=", ">"]
    value: int


@dataclass(frozen=True)
class Guard:
    clock_atoms: tuple[ClockAtom, ...] = ()
    data_atoms: tuple[DataAtom, ...] = ()


@dataclass(frozen=True)
class Update:
    """var := const + coeff * rhs_var (rhs_var None means a plain constant)."""

    var: str
    const: int = 0
    coeff: int = 0
    rhs_var: str | None = None


@dataclass(frozen=True)
class Sync:
    channel: str
    direction: Literal["!", "?"]


@dataclass(frozen=True)
class Location:
    name: str
    invariant: tuple[ClockAtom, ...] = ()
    committed: bool = False
    urgent: bool = False


@dataclass(frozen=True)
class Edge:
    src: str
    tgt: str
    guard: Guard = Guard()
    sync: Sync | None = None
    resets: tuple[str, ...] = ()
    updates: tuple[Update, ...] = ()


@dataclass(frozen=True)
class Process:
    name: str
    locations: tuple[Location, ...]
    edges: tuple[Edge, ...]
    initial: str


@dataclass(frozen=True)
class IntVar:
    name: str
    lo: int
    hi: int
    init: int


@dataclass(frozen=True)
class Network:
    processes: tuple[Process, ...]
    clocks: tuple[str, ...] = ()
    variables: tuple[IntVar, ...] = ()
    channels: tuple[Channel, ...] = ()


class DiscreteState(NamedTuple):
    """Control vector (location index per process) plus variable valuation."""

    control: tuple[int, ...]
    vars: tuple[int, ...]


@dataclass(frozen=True)
class SymbolicState:
    discrete: DiscreteState
    zone: Zone
    closed: bool = field(default=False, compare=False)

    def pretty(self, net: Network) -> str:
        cn = compile_network(net)
        locs = ", ".join(
            f"{p.name}.{p.locations[li].name}"
            for p, li in zip(net.processes, self.discrete.control)
        )
        vals = ", ".join(
            f"{v.name}={x}" for v, x in zip(net.variables, self.discrete.vars)
        )
        body = f"({locs}" + (f"; {vals}" if vals else "") + ")"
        return f"{body} {self.zone.pretty(cn.clock_names)}"


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _check_clock_atom(atom: ClockAtom, clocks: set[str], where: str) -> None:
    if atom.clock not in clocks:
        raise ModelError("undeclared-clock", f"{where}: unknown clock '{atom.clock}'")
    if atom.op not in ("<=", ">="):
        raise ModelError("strict-clock-guard", f"{where}: strict clock constraint unsupported")
    if atom.bound < 0:
        raise ModelError("negative-clock-constant", f"{where}: clock constants must be natural")
    if atom.bound > MAX_CONSTANT:
        raise ModelError("constant-too-large", f"{where}: constant exceeds supported range")


def validate_network(net: Network) -> None:
    """Raise ModelError on the first structural defect."""
    clocks = set(net.clocks)
    if len(clocks) != len(net.clocks):
        raise ModelError("duplicate-clock", "duplicate clock declaration")
    var_names = [v.name for v in net.variables]
    variables = set(var_names)
    if len(variables) != len(var_names):
        raise ModelError("duplicate-var", "duplicate variable declaration")
    chan_names = [c.name for c in net.channels]
    channels = {c.name: c for c in net.channels}
    if len(channels) != len(chan_names):
        raise ModelError("duplicate-chan", "duplicate channel declaration")
    if clocks & variables or clocks & set(chan_names) or variables & set(chan_names):
        raise ModelError("name-clash", "clocks, variables and channels must have distinct names")
    if not net.processes:
        raise ModelError("no-process", "network has no processes")
    seen_procs: set[str] = set()
    for v in net.variables:
        if not (v.lo <= v.init <= v.hi):
            raise ModelError("var-init-range", f"initial value of '{v.name}' outside [{v.lo},{v.hi}]")
        if max(abs(v.lo), abs(v.hi)) > MAX_CONSTANT:
            raise ModelError("constant-too-large", f"range of '{v.name}' exceeds supported magnitude")

    for proc in net.processes:
        if proc.name in seen_procs:
            raise ModelError("duplicate-process", f"duplicate process '{proc.name}'")
        seen_procs.add(proc.name)
        loc_names = [l.name for l in proc.locations]
        locs = set(loc_names)
        if len(locs) != len(loc_names):
            raise ModelError("duplicate-location", f"duplicate location in '{proc.name}'")
        if proc.initial not in locs:
            raise ModelError("undeclared-location", f"'{proc.name}': unknown initial location")
        for loc in proc.locations:
            where = f"{proc.name}.{loc.name}"
            if loc.committed and loc.urgent:
                raise ModelError("committed-and-urgent", f"{where}: both committed and urgent")
            for atom in loc.invariant:
                if atom.op != "<=":
                    raise ModelError(
                        "invariant-lower-bound", f"{where}: invariant must be an upper bound"
                    )
                _check_clock_atom(atom, clocks, where)
        for k, edge in enumerate(proc.edges):
            where = f"{proc.name}.{edge.src}->{edge.tgt}"
            if edge.src not in locs or edge.tgt not in locs:
                raise ModelError("undeclared-location", f"{where}: unknown endpoint")
            for atom in edge.guard.clock_atoms:
                _check_clock_atom(atom, clocks, where)
            for datom in edge.guard.data_atoms:
                if datom.var not in variables:
                    raise ModelError("undeclared-var", f"{where}: unknown variable '{datom.var}'")
                if datom.op not in DATA_OPCODE:
                    raise ModelError("bad-data-op", f"{where}: bad comparison '{datom.op}'")
            if edge.sync is not None:
                chan = channels.get(edge.sync.channel)
                if chan is None:
                    raise ModelError(
                        "undeclared-chan", f"{where}: unknown channel '{edge.sync.channel}'"
                    )
                if chan.urgent and edge.guard.clock_atoms:
                    raise ModelError(
                        "urgent-clock-guard",
                        f"{where}: clock guard on urgent channel '{chan.name}'",
                    )
            for r in edge.resets:
                if r not in clocks:
                    raise ModelError("undeclared-clock", f"{where}: unknown reset clock '{r}'")
            for upd in edge.updates:
                if upd.var not in variables:
                    raise ModelError("undeclared-var", f"{where}: unknown variable '{upd.var}'")
                if upd.rhs_var is not None and upd.rhs_var not in variables:
                    raise ModelError("undeclared-var", f"{where}: unknown variable '{upd.rhs_var}'")


# ---------------------------------------------------------------------------
# compiled form
# ---------------------------------------------------------------------------

Row = tuple[int, int, int]  # x_i - x_j <= c


class Step(NamedTuple):
    """One executable discrete step: an internal edge or a sender/receiver pair."""

    label: str
    edges: tuple[tuple[int, int], ...]  # (process index, edge index), sender first
    clock_rows: tuple[Row, ...]
    data_guards: tuple[tuple[int, int, int], ...]  # (var idx, opcode, constant)
    resets: tuple[int, ...]
    updates: tuple[tuple[int, int, int, int], ...]  # (lhs, const, coeff, rhs or -1)
    control_patch: tuple[tuple[int, int], ...]
    committed_src: bool


class ControlCache(NamedTuple):
    steps: tuple[Step, ...]
    invariant_rows: tuple[Row, ...]
    no_delay: bool  # some location is committed or urgent, or a guard-free urgent pair
    urgent_pairs: tuple[tuple[tuple[tuple[int, int, int], ...], tuple[tuple[int, int, int], ...]], ...]
    inactive_clocks: tuple[int, ...]  # never tested before their next reset from here
    # kernel-ready views of the same data
    step_arrays: tuple  # per step: (guard rows (k,3), reset indices)
    inv_array: "object"  # invariant rows as an (k,3) array
    inactive_array: "object"


def eval_data(guards, vars_) -> bool:
    for var, op, c in guards:
        v = vars_[var]
        if op == DATA_LT:
            if not v < c:
                return False
        elif op == DATA_LE:
            if not v <= c:
                return False
        elif op == DATA_EQ:
            if v != c:
                return False
        elif op == DATA_GE:
            if not v >= c:
                return False
        elif not v > c:
            return False
    return True


class CompiledNetwork:
    """Index-based view of a validated network, with per-control caches."""

    def __init__(self, net: Network):
        validate_network(net)
        self.net = net
        self.clock_names = net.clocks
        self.clock_index = {c: i + 1 for i, c in enumerate(net.clocks)}
        self.var_index = {v.name: i for i, v in enumerate(net.variables)}
        self.var_ranges = tuple((v.lo, v.hi) for v in net.variables)
        self.n_clocks = len(net.clocks)
        self.chan_index = {c.name: i for i, c in enumerate(net.channels)}
        self.chan_urgent = tuple(c.urgent for c in net.channels)
        self.proc_index = {p.name: i for i, p in enumerate(net.processes)}
        self.loc_index = [
            {l.name: i for i, l in enumerate(p.locations)} for p in net.processes
        ]
        self.committed = [
            tuple(l.committed for l in p.locations) for p in net.processes
        ]
        self.urgent_loc = [tuple(l.urgent for l in p.locations) for p in net.processes]
        self.initial = DiscreteState(
            tuple(self.loc_index[pi][p.initial] for pi, p in enumerate(net.processes)),
            tuple(v.init for v in net.variables),
        )
        self.invariant_rows = [
            [self._atom_rows(l.invariant) for l in p.locations] for p in net.processes
        ]
        self._edge_parts = [
            [self._compile_edge(pi, ei) for ei in range(len(p.edges))]
            for pi, p in enumerate(net.processes)
        ]
        self.max_constants = self._max_constants()
        self.clock_activity = self._clock_activity()
        self._control_cache: dict[tuple[int, ...], ControlCache] = {}

    # -- compilation helpers -------------------------------------------------

    def _atom_rows(self, atoms: tuple[ClockAtom, ...]) -> tuple[Row, ...]:
        rows = []
        for a in atoms:
            i = self.clock_index[a.clock]
            if a.op == "<=":
                rows.append((i, 0, a.bound))
            else:
                rows.append((0, i, -a.bound))
        return tuple(rows)

    def _compile_edge(self, pi: int, ei: int):
        edge = self.net.processes[pi].edges[ei]
        clock_rows = self._atom_rows(edge.guard.clock_atoms)
        data = tuple(
            (self.var_index[a.var], DATA_OPCODE[a.op], a.value)
            for a in edge.guard.data_atoms
        )
        resets = tuple(sorted(self.clock_index[r] for r in set(edge.resets)))
        updates = tuple(
            (
                self.var_index[u.var],
                u.const,
                u.coeff,
                -1 if u.rhs_var is None else self.var_index[u.rhs_var],
            )
            for u in edge.updates
        )
        src = self.loc_index[pi][edge.src]
        tgt = self.loc_index[pi][edge.tgt]
        return (src, tgt, clock_rows, data, resets, updates, edge.sync)

    def _max_constants(self):
        caps = np.zeros(self.n_clocks + 1, dtype=np.int64)
        for p in self.net.processes:
            for loc in p.locations:
                for a in loc.invariant:
                    i = self.clock_index[a.clock]
                    caps[i] = max(caps[i], a.bound)
            for e in p.edges:
                for a in e.guard.clock_atoms:
                    i = self.clock_index[a.clock]
                    caps[i] = max(caps[i], a.bound)
        return caps

    def _clock_activity(self):
        """Per process and location, the set of clocks that may still be read
        (by a guard or invariant) before being reset, within that process.

        A clock is inactive at a control vector when it is inactive in every
        process; its zone dimension can then be forgotten without changing
        any location/data reachability verdict.
        """
        net = self.net
        activity = []
        for pi, proc in enumerate(net.processes):
            nloc = len(proc.locations)
            active = [set() for _ in range(nloc)]
            for li, loc in enumerate(proc.locations):
                for a in loc.invariant:
                    active[li].add(self.clock_index[a.clock])
            changed = True
            while changed:
                changed = False
                for ei, parts in enumerate(self._edge_parts[pi]):
                    src, tgt, clock_rows, _, resets, _, _ = parts
                    gain = {i if i else j for i, j, _ in clock_rows}
                    gain |= active[tgt] - set(resets)
                    if not gain <= active[src]:
                        active[src] |= gain
                        changed = True
            activity.append([frozenset(s) for s in active])
        return activity

    # -- per-control cache -----------------------------------------------------

    def control_cache(self, control: tuple[int, ...]) -> ControlCache:
        cached = self._control_cache.get(control)
        if cached is not None:
            return cached

        net = self.net
        inv_rows: list[Row] = []
        no_delay = False
        for pi, li in enumerate(control):
            inv_rows.extend(self.invariant_rows[pi][li])
            if self.committed[pi][li] or self.urgent_loc[pi][li]:
                no_delay = True
        any_committed = any(self.committed[pi][li] for pi, li in enumerate(control))

        steps: list[Step] = []
        urgent_pairs = []
        for pi, li in enumerate(control):
            proc = net.processes[pi]
            for ei, parts in enumerate(self._edge_parts[pi]):
                src, tgt, clock_rows, data, resets, updates, sync = parts
                if src != li:
                    continue
                src_committed = self.committed[pi][li]
                if sync is None:
                    label = f"{proc.name}.{proc.edges[ei].src}->{proc.edges[ei].tgt}"
                    steps.append(
                        Step(label, ((pi, ei),), clock_rows, data, resets, updates,
                             ((pi, tgt),), src_committed)
                    )
                    continue
                if sync.direction != "!":
                    continue
                chan = sync.channel
                ci = self.chan_index[chan]
                for pj, lj in enumerate(control):
                    if pj == pi:
                        continue
                    proc_r = net.processes[pj]
                    for ej, parts_r in enumerate(self._edge_parts[pj]):
                        src_r, tgt_r, rows_r, data_r, resets_r, updates_r, sync_r = parts_r
                        if src_r != lj or sync_r is None:
                            continue
                        if sync_r.channel != chan or sync_r.direction != "?":
                            continue
                        recv_committed = self.committed[pj][lj]
                        label = (
                            f"{chan}! {proc.name}.{proc.edges[ei].src}->{proc.edges[ei].tgt}"
                            f" | {chan}? {proc_r.name}.{proc_r.edges[ej].src}->{proc_r.edges[ej].tgt}"
                        )
                        steps.append(
                            Step(
                                label,
                                ((pi, ei), (pj, ej)),
                                clock_rows + rows_r,
                                data + data_r,
                                tuple(sorted(set(resets) | set(resets_r))),
                                updates + updates_r,
                                ((pi, tgt), (pj, tgt_r)),
                                src_committed or recv_committed,
                            )
                        )
                        if self.chan_urgent[ci]:
                            urgent_pairs.append((data, data_r))

        if any_committed:
            steps = [s for s in steps if s.committed_src]

        # urgent pairs whose edges carry no data guards block delay statically
        dynamic_pairs = []
        for send_g, recv_g in urgent_pairs:
            if not send_g and not recv_g:
                no_delay = True
            else:
                dynamic_pairs.append((send_g, recv_g))

        live = set()
        for pi, li in enumerate(control):
            live |= self.clock_activity[pi][li]
        inactive = tuple(x for x in range(1, self.n_clocks + 1) if x not in live)

        def rows_arr(rows):
            return np.array(rows, dtype=np.int64).reshape(len(rows), 3)

        step_arrays = tuple(
            (rows_arr(s.clock_rows), np.array(s.resets, dtype=np.int64)) for s in steps
        )
        cache = ControlCache(
            tuple(steps),
            tuple(inv_rows),
            no_delay,
            tuple(dynamic_pairs),
            inactive,
            step_arrays,
            rows_arr(tuple(inv_rows)),
            np.array(inactive, dtype=np.int64),
        )
        self._control_cache[control] = cache
        return cache


_COMPILED: dict[int, tuple[Network, CompiledNetwork]] = {}


def compile_network(net: Network) -> CompiledNetwork:
    """Validate and compile (cached per Network object)."""
    hit = _COMPILED.get(id(net))
    if hit is not None and hit[0] is net:
        return hit[1]
    cn = CompiledNetwork(net)
    if len(_COMPILED) > 256:
        _COMPILED.clear()
    _COMPILED[id(net)] = (net, cn)
    return cn
