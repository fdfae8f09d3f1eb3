"""Reachability query ASTs and their compilation to state predicates.

Queries are E<> (exists-eventually) or A[] (forall-always) over a boolean
combination of atoms: a process being at a location, an integer-variable
comparison, or a clock comparison.  Negation is only meaningful over
location and data atoms; a clock atom under an odd number of negations
cannot be expressed with non-strict bounds and is rejected.

Evaluation is existential over the zone: the predicate holds for a symbolic
state iff some valuation in its zone satisfies it.  Compilation pushes
negations to the atoms (De Morgan) and expands to DNF; each clause is then a
discrete test plus one zone-intersection nonemptiness test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .model import CompiledNetwork, DATA_OPCODE, DATA_EQ, DATA_GE, DATA_GT, DATA_LE, DATA_LT, eval_data
from .zones import Zone, _constrain


class QueryError(Exception):
    def __init__(self, message: str, code: str = "query"):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ProcessAt:
    process: str
    location: str


@dataclass(frozen=True)
class Compare:
    """A comparison whose name is not yet resolved to a clock or variable."""

    name: str
    op: str
    value: int
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ClockCompare:
    clock: str
    op: str  # <= or >= (== is desugared during name resolution)
    bound: int


@dataclass(frozen=True)
class DataCompare:
    var: str
    op: str
    value: int


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class BoolConst:
    value: bool


Formula = Union[ProcessAt, Compare, ClockCompare, DataCompare, Not, And, Or, Implies, BoolConst]

EXISTS_EVENTUALLY = "E<>"
FORALL_ALWAYS = "A[]"


@dataclass(frozen=True)
class Query:
    quantifier: str  # EXISTS_EVENTUALLY or FORALL_ALWAYS
    body: Formula


def negate(f: Formula) -> Formula:
    return Not(f)


# ---------------------------------------------------------------------------
# NNF / fragment check
# ---------------------------------------------------------------------------

_DATA_NEG = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def resolve_names(cn: CompiledNetwork, f: Formula) -> Formula:
    """Resolve Compare atoms to clock or variable comparisons against a network."""
    if isinstance(f, Compare):
        if f.name in cn.clock_index:
            if f.op in ("<", ">"):
                raise QueryError("strict clock comparison unsupported", code="strict-clock")
            if f.op == "==":
                return And(
                    ClockCompare(f.name, ">=", f.value), ClockCompare(f.name, "<=", f.value)
                )
            if f.value < 0:
                raise QueryError("clock constants must be natural", code="negative-clock")
            return ClockCompare(f.name, f.op, f.value)
        if f.name in cn.var_index:
            return DataCompare(f.name, f.op, f.value)
        raise QueryError(f"unknown clock or variable '{f.name}'", code="unknown-name")
    if isinstance(f, ProcessAt):
        pi = cn.proc_index.get(f.process)
        if pi is None:
            raise QueryError(f"unknown process '{f.process}'", code="unknown-name")
        if f.location not in cn.loc_index[pi]:
            raise QueryError(f"unknown location '{f.process}.{f.location}'", code="unknown-name")
        return f
    if isinstance(f, Not):
        return Not(resolve_names(cn, f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(resolve_names(cn, f.left), resolve_names(cn, f.right))
    return f


def to_nnf(f: Formula, negated: bool = False) -> Formula:
    """Push negations onto atoms; raises QueryError on a negated clock atom."""
    if isinstance(f, BoolConst):
        return BoolConst(f.value ^ negated)
    if isinstance(f, ProcessAt):
        return Not(f) if negated else f
    if isinstance(f, Compare):
        raise QueryError(
            f"comparison over unresolved name '{f.name}' (no network in scope)",
            code="unresolved",
        )
    if isinstance(f, ClockCompare):
        if negated:
            raise QueryError(
                "unsupported negative clock constraint", code="negated-clock"
            )
        return f
    if isinstance(f, DataCompare):
        if not negated:
            return f
        if f.op == "==":
            return Or(DataCompare(f.var, "<", f.value), DataCompare(f.var, ">", f.value))
        return DataCompare(f.var, _DATA_NEG[f.op], f.value)
    if isinstance(f, Not):
        return to_nnf(f.arg, not negated)
    if isinstance(f, And):
        l, r = to_nnf(f.left, negated), to_nnf(f.right, negated)
        return Or(l, r) if negated else And(l, r)
    if isinstance(f, Or):
        l, r = to_nnf(f.left, negated), to_nnf(f.right, negated)
        return And(l, r) if negated else Or(l, r)
    if isinstance(f, Implies):
        return to_nnf(Or(Not(f.left), f.right), negated)
    raise QueryError(f"unsupported formula node {type(f).__name__}")


def check_fragment(f: Formula) -> None:
    """Eager fragment check (used by the parser for early errors)."""
    to_nnf(f)


# ---------------------------------------------------------------------------
# compiled predicate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Clause:
    loc_lits: tuple[tuple[int, int, bool], ...]  # (process, location, positive)
    data_lits: tuple[tuple[int, int, int], ...]  # eval_data guards
    clock_rows: tuple[tuple[int, int, int], ...]
    const_false: bool = False


class CompiledPredicate:
    """DNF of a query body over a specific network."""

    def __init__(self, cn: CompiledNetwork, body: Formula):
        self.cn = cn
        nnf = to_nnf(resolve_names(cn, body))
        self.clauses = tuple(
            c for c in (self._clause(lits) for lits in _dnf(nnf)) if c is not None
        )

    def _clause(self, lits) -> _Clause | None:
        cn = self.cn
        locs: list[tuple[int, int, bool]] = []
        datas: list[tuple[int, int, int]] = []
        rows: list[tuple[int, int, int]] = []
        for lit in lits:
            positive = True
            if isinstance(lit, Not):
                positive = False
                lit = lit.arg
            if isinstance(lit, BoolConst):
                if lit.value != positive:
                    return None  # clause is constant false
                continue
            if isinstance(lit, ProcessAt):
                pi = cn.proc_index.get(lit.process)
                if pi is None:
                    raise QueryError(f"unknown process '{lit.process}'", code="unknown-name")
                li = cn.loc_index[pi].get(lit.location)
                if li is None:
                    raise QueryError(
                        f"unknown location '{lit.process}.{lit.location}'", code="unknown-name"
                    )
                locs.append((pi, li, positive))
            elif isinstance(lit, DataCompare):
                assert positive, "negations are pushed to atoms in NNF"
                vi = cn.var_index.get(lit.var)
                if vi is None:
                    raise QueryError(f"unknown variable '{lit.var}'", code="unknown-name")
                datas.append((vi, DATA_OPCODE[lit.op], lit.value))
            elif isinstance(lit, ClockCompare):
                assert positive
                xi = cn.clock_index.get(lit.clock)
                if xi is None:
                    raise QueryError(f"unknown clock '{lit.clock}'", code="unknown-name")
                if lit.op == "<=":
                    rows.append((xi, 0, lit.bound))
                elif lit.op == ">=":
                    rows.append((0, xi, -lit.bound))
                else:
                    raise QueryError("strict clock comparison unsupported", code="strict-clock")
            else:
                raise QueryError(f"unsupported literal {type(lit).__name__}")
        return _Clause(tuple(locs), tuple(datas), tuple(rows))

    def clock_caps(self):
        """Per-clock maximal constants appearing in the predicate."""
        caps = [0] * (self.cn.n_clocks + 1)
        for cl in self.clauses:
            for i, j, c in cl.clock_rows:
                x = i if i else j
                caps[x] = max(caps[x], abs(c))
        return caps

    def satisfied(self, control, vars_, zone: Zone) -> bool:
        for cl in self.clauses:
            ok = True
            for pi, li, positive in cl.loc_lits:
                if (control[pi] == li) != positive:
                    ok = False
                    break
            if not ok:
                continue
            if cl.data_lits and not eval_data(cl.data_lits, vars_):
                continue
            if cl.clock_rows:
                if zone.is_empty:
                    continue
                m = zone.matrix.copy()
                m.flags.writeable = True
                feasible = True
                for i, j, c in cl.clock_rows:
                    if not _constrain(m, i, j, c):
                        feasible = False
                        break
                if not feasible:
                    continue
            return True
        return False


def _dnf(f: Formula) -> list[list[Formula]]:
    """Clause expansion of an NNF formula (literals are atoms or Not(atom))."""
    if isinstance(f, And):
        out = []
        for left in _dnf(f.left):
            for right in _dnf(f.right):
                out.append(left + right)
        return out
    if isinstance(f, Or):
        return _dnf(f.left) + _dnf(f.right)
    return [[f]]
