"""Textual model format (.rta) and query format (.rtq).

Keyword-based blocks, one construct per declaration::

    clock x, y;
    int[-200,60] vmins = 0;
    chan vready;
    urgent chan sok;
    process P {
      location l0 { init; invariant x<=30; committed; }
      edge l0 -> l1 { guard x>=30 and vmins > 15; sync sok?; reset x; do vmins = vmins - 1; }
    }
    system P;

Comments run from ``//`` to end of line; identifiers are ASCII.  Clock
equality ``x == c`` is desugared at parse time into ``x>=c and x<=c``;
strict comparisons on clocks are rejected, on integer variables allowed.

Queries are ``E<>`` or ``A[]`` followed by a formula over ``Proc.loc``
atoms and comparisons, combined with ``and``, ``or``, ``not``, ``=>``;
``1 <= x <= 3`` chains are accepted.  See docs/model-format.md for the
grammar in EBNF.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Channel,
    ClockAtom,
    DataAtom,
    Edge,
    Guard,
    IntVar,
    Location,
    MAX_CONSTANT,
    ModelError,
    Network,
    Process,
    Sync,
    Update,
    validate_network,
)
from .queries import (
    And,
    ClockCompare,
    Compare,
    DataCompare,
    Formula,
    Implies,
    Not,
    Or,
    ProcessAt,
    Query,
    QueryError,
    EXISTS_EVENTUALLY,
    FORALL_ALWAYS,
    resolve_names,
    to_nnf,
)


class ParseError(Exception):
    """Lexical, syntactic or semantic error with a 1-based source position."""

    def __init__(self, line: int, column: int, message: str, expected=(), code: str = "syntax"):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.expected = tuple(expected)
        self.code = code


KEYWORDS = {
    "clock", "int", "chan", "urgent", "process", "location", "edge",
    "init", "invariant", "committed", "guard", "sync", "reset", "do",
    "system", "and", "or", "not", "true", "false",
}

_MULTI = ("E<>", "A[]", "->", "==", "<=", ">=", "=>")
_SINGLE = set("{}()[],;!?.=<>+-*")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | op | keyword | eof
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        hit = None
        for op in _MULTI:
            if text.startswith(op, i):
                hit = op
                break
        if hit:
            tokens.append(Token("op", hit, line, col))
            i += len(hit)
            col += len(hit)
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j - i > 15:
                raise ParseError(line, col, "numeric literal too long", code="lex")
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() and ch.isascii() or ch == "_":
            j = i
            while j < n and (text[j].isascii() and (text[j].isalnum() or text[j] == "_")):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch in _SINGLE:
            tokens.append(Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(line, col, f"unexpected character {ch!r}", code="lex")
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        return self.peek().value == value and self.peek().kind in ("op", "keyword")

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def expect(self, value: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.value == value and tok.kind in ("op", "keyword"):
            return self.advance()
        raise ParseError(
            tok.line, tok.column,
            f"expected '{value}'{' in ' + what if what else ''}, found {tok.value!r}",
            expected=(value,),
        )

    def ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind == "ident":
            return self.advance()
        raise ParseError(
            tok.line, tok.column, f"expected {what}, found {tok.value!r}",
            expected=("identifier",),
        )

    def integer(self, what: str = "integer") -> tuple[int, Token]:
        tok = self.peek()
        neg = False
        if tok.value == "-":
            self.advance()
            neg = True
            tok = self.peek()
        if tok.kind != "int":
            raise ParseError(tok.line, tok.column, f"expected {what}", expected=("integer",))
        self.advance()
        val = int(tok.value)
        if val > MAX_CONSTANT:
            raise ParseError(tok.line, tok.column, "constant exceeds supported range", code="constant-too-large")
        return (-val if neg else val), tok


_REL_OPS = ("<=", ">=", "==", "<", ">")


class _ModelParser(_Parser):
    def __init__(self, text: str):
        super().__init__(text)
        self.clocks: list[str] = []
        self.variables: list[IntVar] = []
        self.channels: list[Channel] = []
        self.processes: list[Process] = []
        self.system: list[str] | None = None
        self.decl_positions: dict[str, Token] = {}

    # -- declarations ---------------------------------------------------------

    def parse(self) -> Network:
        while self.peek().kind != "eof":
            tok = self.peek()
            if self.accept("clock"):
                self._clock_decl()
            elif self.accept("int"):
                self._int_decl()
            elif tok.value in ("chan", "urgent"):
                self._chan_decl()
            elif self.accept("process"):
                self._process_decl()
            elif self.accept("system"):
                self._system_decl()
            else:
                raise ParseError(
                    tok.line, tok.column,
                    f"expected a declaration, found {tok.value!r}",
                    expected=("clock", "int", "chan", "urgent", "process", "system"),
                )
        return self._assemble()

    def _declare(self, name: Token, kind: str) -> None:
        if name.value in self.decl_positions:
            raise ParseError(
                name.line, name.column, f"duplicate declaration of '{name.value}'",
                code="duplicate",
            )
        self.decl_positions[name.value] = name

    def _clock_decl(self) -> None:
        while True:
            tok = self.ident("clock name")
            self._declare(tok, "clock")
            self.clocks.append(tok.value)
            if not self.accept(","):
                break
        self.expect(";", "clock declaration")

    def _int_decl(self) -> None:
        self.expect("[", "int declaration")
        lo, _ = self.integer("lower bound")
        self.expect(",", "int declaration")
        hi, htok = self.integer("upper bound")
        self.expect("]", "int declaration")
        if lo > hi:
            raise ParseError(htok.line, htok.column, "empty variable range", code="var-range")
        name = self.ident("variable name")
        self._declare(name, "var")
        self.expect("=", "int declaration")
        init, itok = self.integer("initial value")
        if not (lo <= init <= hi):
            raise ParseError(itok.line, itok.column, "initial value outside range", code="var-range")
        self.expect(";", "int declaration")
        self.variables.append(IntVar(name.value, lo, hi, init))

    def _chan_decl(self) -> None:
        urgent = self.accept("urgent")
        self.expect("chan", "channel declaration")
        while True:
            tok = self.ident("channel name")
            self._declare(tok, "chan")
            self.channels.append(Channel(tok.value, urgent))
            if not self.accept(","):
                break
        self.expect(";", "channel declaration")

    def _system_decl(self) -> None:
        if self.system is not None:
            tok = self.peek()
            raise ParseError(tok.line, tok.column, "duplicate system declaration", code="duplicate")
        self.system = []
        seen = set()
        while True:
            tok = self.ident("process name")
            if tok.value in seen:
                raise ParseError(tok.line, tok.column, f"process '{tok.value}' listed twice", code="duplicate")
            seen.add(tok.value)
            self.system.append(tok.value)
            if not self.accept(","):
                break
        self.expect(";", "system declaration")

    # -- processes --------------------------------------------------------------

    def _process_decl(self) -> None:
        name = self.ident("process name")
        if any(p.name == name.value for p in self.processes):
            raise ParseError(name.line, name.column, f"duplicate process '{name.value}'", code="duplicate")
        self.expect("{", "process")
        locations: list[Location] = []
        loc_tokens: dict[str, Token] = {}
        edges: list[tuple[Edge, Token]] = []
        initial: str | None = None
        while not self.accept("}"):
            if self.accept("location"):
                loc, is_init, tok = self._location()
                if loc.name in loc_tokens:
                    raise ParseError(tok.line, tok.column, f"duplicate location '{loc.name}'", code="duplicate")
                loc_tokens[loc.name] = tok
                locations.append(loc)
                if is_init:
                    if initial is not None:
                        raise ParseError(tok.line, tok.column, "second init location", code="init")
                    initial = loc.name
            elif self.accept("edge"):
                edges.append(self._edge())
            else:
                tok = self.peek()
                raise ParseError(
                    tok.line, tok.column,
                    f"expected 'location', 'edge' or '}}', found {tok.value!r}",
                    expected=("location", "edge", "}"),
                )
        if initial is None:
            raise ParseError(name.line, name.column, f"process '{name.value}' has no init location", code="init")
        loc_names = set(loc_tokens)
        checked_edges = []
        for edge, tok in edges:
            for endpoint in (edge.src, edge.tgt):
                if endpoint not in loc_names:
                    raise ParseError(
                        tok.line, tok.column, f"unknown location '{endpoint}'", code="undeclared"
                    )
            checked_edges.append(edge)
        self.processes.append(Process(name.value, tuple(locations), tuple(checked_edges), initial))

    def _location(self) -> tuple[Location, bool, Token]:
        name = self.ident("location name")
        self.expect("{", "location")
        is_init = committed = urgent = False
        invariant: list[ClockAtom] = []
        while not self.accept("}"):
            tok = self.peek()
            if self.accept("init"):
                is_init = True
            elif self.accept("committed"):
                committed = True
            elif self.accept("urgent"):
                urgent = True
            elif self.accept("invariant"):
                invariant.extend(self._invariant_conj())
            else:
                raise ParseError(
                    tok.line, tok.column,
                    f"expected a location property, found {tok.value!r}",
                    expected=("init", "invariant", "committed", "urgent"),
                )
            self.expect(";", "location property")
            if committed and urgent:
                raise ParseError(tok.line, tok.column, "location both committed and urgent", code="committed-urgent")
        return Location(name.value, tuple(invariant), committed, urgent), is_init, name

    def _invariant_conj(self) -> list[ClockAtom]:
        atoms = []
        while True:
            name = self.ident("clock name")
            optok = self.peek()
            if optok.value not in _REL_OPS:
                raise ParseError(optok.line, optok.column, "expected a comparison", expected=_REL_OPS)
            self.advance()
            bound, btok = self.integer("bound")
            if name.value not in self.clocks:
                raise ParseError(name.line, name.column,
                                 f"invariants may only bound clocks; '{name.value}' is not a clock",
                                 code="undeclared")
            if optok.value != "<=":
                raise ParseError(optok.line, optok.column, "invariant must be upper bound",
                                 code="invariant-upper-bound")
            if bound < 0:
                raise ParseError(btok.line, btok.column, "clock constants must be natural",
                                 code="negative-clock-constant")
            atoms.append(ClockAtom(name.value, "<=", bound))
            if not self.accept("and"):
                return atoms

    def _edge(self) -> tuple[Edge, Token]:
        src = self.ident("source location")
        self.expect("->", "edge")
        tgt = self.ident("target location")
        self.expect("{", "edge")
        guard_clock: list[ClockAtom] = []
        guard_data: list[DataAtom] = []
        sync: Sync | None = None
        resets: list[str] = []
        updates: list[Update] = []
        clock_guard_tok: Token | None = None
        while not self.accept("}"):
            tok = self.peek()
            if self.accept("guard"):
                ctok = self._guard_conj(guard_clock, guard_data)
                clock_guard_tok = clock_guard_tok or ctok
            elif self.accept("sync"):
                if sync is not None:
                    raise ParseError(tok.line, tok.column, "second sync label", code="duplicate")
                chan = self.ident("channel name")
                dtok = self.peek()
                if self.accept("!"):
                    direction = "!"
                elif self.accept("?"):
                    direction = "?"
                else:
                    raise ParseError(dtok.line, dtok.column, "expected '!' or '?'", expected=("!", "?"))
                if not any(c.name == chan.value for c in self.channels):
                    raise ParseError(chan.line, chan.column, f"unknown channel '{chan.value}'", code="undeclared")
                sync = Sync(chan.value, direction)
            elif self.accept("reset"):
                while True:
                    rtok = self.ident("clock name")
                    if rtok.value not in self.clocks:
                        raise ParseError(rtok.line, rtok.column, f"unknown clock '{rtok.value}'", code="undeclared")
                    resets.append(rtok.value)
                    if not self.accept(","):
                        break
            elif self.accept("do"):
                while True:
                    updates.append(self._update())
                    if not self.accept(","):
                        break
            else:
                raise ParseError(
                    tok.line, tok.column,
                    f"expected an edge property, found {tok.value!r}",
                    expected=("guard", "sync", "reset", "do"),
                )
            self.expect(";", "edge property")
        if sync is not None and guard_clock:
            if any(c.name == sync.channel and c.urgent for c in self.channels):
                anchor = clock_guard_tok or src
                raise ParseError(anchor.line, anchor.column,
                                 f"clock guard on urgent channel '{sync.channel}'",
                                 code="urgent-clock-guard")
        edge = Edge(
            src.value, tgt.value,
            Guard(tuple(guard_clock), tuple(guard_data)),
            sync, tuple(resets), tuple(updates),
        )
        return edge, src

    def _guard_conj(self, clock_out: list[ClockAtom], data_out: list[DataAtom]) -> Token | None:
        first_clock_tok = None
        while True:
            name = self.ident("clock or variable name")
            optok = self.peek()
            if optok.value not in _REL_OPS:
                raise ParseError(optok.line, optok.column, "expected a comparison", expected=_REL_OPS)
            self.advance()
            value, vtok = self.integer("bound")
            if name.value in self.clocks:
                if optok.value in ("<", ">"):
                    raise ParseError(optok.line, optok.column, "strict clock guard unsupported",
                                     code="strict-clock-guard")
                if value < 0:
                    raise ParseError(vtok.line, vtok.column, "clock constants must be natural",
                                     code="negative-clock-constant")
                if first_clock_tok is None:
                    first_clock_tok = name
                if optok.value == "==":
                    clock_out.append(ClockAtom(name.value, ">=", value))
                    clock_out.append(ClockAtom(name.value, "<=", value))
                else:
                    clock_out.append(ClockAtom(name.value, optok.value, value))
            elif any(v.name == name.value for v in self.variables):
                data_out.append(DataAtom(name.value, optok.value, value))
            else:
                raise ParseError(name.line, name.column,
                                 f"unknown clock or variable '{name.value}'", code="undeclared")
            if not self.accept("and"):
                return first_clock_tok

    def _update(self) -> Update:
        lhs = self.ident("variable name")
        if not any(v.name == lhs.value for v in self.variables):
            raise ParseError(lhs.line, lhs.column, f"unknown variable '{lhs.value}'", code="undeclared")
        self.expect("=", "update")
        const = 0
        coeff = 0
        rhs_var: str | None = None

        def add_var(tok: Token, k: int) -> None:
            nonlocal coeff, rhs_var
            if not any(v.name == tok.value for v in self.variables):
                raise ParseError(tok.line, tok.column, f"unknown variable '{tok.value}'", code="undeclared")
            if rhs_var is not None and rhs_var != tok.value:
                raise ParseError(tok.line, tok.column, "update must be affine in a single variable",
                                 code="update-shape")
            coeff += k
            rhs_var = tok.value

        first = True
        while True:
            sign = 1
            if self.accept("-"):
                sign = -1
            elif self.accept("+"):
                if first:
                    tok = self.peek()
                    raise ParseError(tok.line, tok.column, "unexpected '+'", code="syntax")
            tok = self.peek()
            if tok.kind == "int":
                self.advance()
                val = int(tok.value)
                if self.accept("*"):
                    add_var(self.ident("variable name"), sign * val)
                else:
                    const += sign * val
            elif tok.kind == "ident":
                self.advance()
                add_var(tok, sign)
            else:
                raise ParseError(tok.line, tok.column, "expected a term", expected=("integer", "identifier"))
            first = False
            if self.peek().value not in ("+", "-"):
                break
        return Update(lhs.value, const, coeff, rhs_var)

    # -- assembly ---------------------------------------------------------------

    def _assemble(self) -> Network:
        processes = self.processes
        if self.system is not None:
            by_name = {p.name: p for p in self.processes}
            ordered = []
            for name in self.system:
                if name not in by_name:
                    tok = self.decl_positions.get(name)
                    line = tok.line if tok else 1
                    col = tok.column if tok else 1
                    raise ParseError(line, col, f"system lists unknown process '{name}'", code="undeclared")
                ordered.append(by_name[name])
            processes = ordered
        net = Network(
            processes=tuple(processes),
            clocks=tuple(self.clocks),
            variables=tuple(self.variables),
            channels=tuple(self.channels),
        )
        try:
            validate_network(net)
        except ModelError as exc:  # backstop; parser checks should fire first
            raise ParseError(1, 1, str(exc), code=exc.code) from exc
        return net


def parse_model(text: str) -> Network:
    """Parse and validate a model; raises ParseError with a source position."""
    return _ModelParser(text).parse()


# ---------------------------------------------------------------------------
# query parsing
# ---------------------------------------------------------------------------

class _QueryParser(_Parser):
    def parse(self) -> list[Query]:
        out = []
        while self.peek().kind != "eof":
            tok = self.peek()
            if self.accept("E<>"):
                quant = EXISTS_EVENTUALLY
            elif self.accept("A[]"):
                quant = FORALL_ALWAYS
            else:
                raise ParseError(tok.line, tok.column, "expected 'E<>' or 'A[]'",
                                 expected=("E<>", "A[]"))
            out.append(Query(quant, self._implies()))
        return out

    def _implies(self) -> Formula:
        left = self._or()
        if self.accept("=>"):
            return Implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        node = self._and()
        while self.accept("or"):
            node = Or(node, self._and())
        return node

    def _and(self) -> Formula:
        node = self._unary()
        while self.accept("and"):
            node = And(node, self._unary())
        return node

    def _unary(self) -> Formula:
        tok = self.peek()
        if self.accept("not"):
            return Not(self._unary())
        if self.accept("("):
            inner = self._implies()
            self.expect(")", "formula")
            return inner
        return self._atom()

    def _atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "int" or tok.value == "-":
            low, _ = self.integer()
            optok = self.peek()
            if optok.value not in ("<=", ">=", "<", ">"):
                raise ParseError(optok.line, optok.column, "expected a comparison", expected=("<=", ">="))
            self.advance()
            name = self.ident("clock or variable name")
            flipped = {"<=": ">=", ">=": "<=", "<": ">", ">": "<"}[optok.value]
            first = Compare(name.value, flipped, low, (tok.line, tok.column))
            nxt = self.peek()
            if nxt.value in ("<=", ">=", "<", ">"):
                self.advance()
                high, _ = self.integer()
                return And(first, Compare(name.value, nxt.value, high, (nxt.line, nxt.column)))
            return first
        name = self.ident("atom")
        if self.accept("."):
            loc = self.ident("location name")
            return ProcessAt(name.value, loc.value)
        optok = self.peek()
        if optok.value in _REL_OPS:
            self.advance()
            value, _ = self.integer()
            return Compare(name.value, optok.value, value, (optok.line, optok.column))
        raise ParseError(optok.line, optok.column,
                         "expected '.' or a comparison after identifier",
                         expected=(".",) + _REL_OPS)


def parse_queries(text: str, net: Network | None = None) -> list[Query]:
    """Parse a query list; with a network, names are resolved eagerly and the
    supported fragment is enforced (negated clock atoms are rejected)."""
    queries = _QueryParser(text).parse()
    if net is not None:
        from .model import compile_network

        cn = compile_network(net)
        for q in queries:
            body = resolve_names(cn, q.body)
            try:
                to_nnf(body)
            except QueryError as exc:
                pos = _first_clock_pos(q.body)
                line, col = pos if pos else (1, 1)
                raise ParseError(line, col, str(exc), code=exc.code) from exc
    return queries


def _first_clock_pos(f: Formula):
    if isinstance(f, Compare):
        return f.pos
    for attr in ("arg", "left", "right"):
        child = getattr(f, attr, None)
        if child is not None:
            pos = _first_clock_pos(child)
            if pos:
                return pos
    return None


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _render_atom_list(atoms) -> str:
    parts = []
    for a in atoms:
        if isinstance(a, ClockAtom):
            parts.append(f"{a.clock} {a.op} {a.bound}")
        else:
            parts.append(f"{a.var} {a.op} {a.value}")
    return " and ".join(parts)


def _render_update(u: Update) -> str:
    terms = []
    if u.coeff == 1 and u.rhs_var is not None:
        terms.append(u.rhs_var)
    elif u.coeff == -1 and u.rhs_var is not None:
        terms.append(f"-{u.rhs_var}" if not terms else f"- {u.rhs_var}")
    elif u.coeff != 0 and u.rhs_var is not None:
        terms.append(f"{u.coeff} * {u.rhs_var}")
    if u.const or not terms:
        if terms and u.const >= 0:
            terms.append(f"+ {u.const}")
        elif terms:
            terms.append(f"- {-u.const}")
        else:
            terms.append(str(u.const))
    return f"{u.var} = " + " ".join(terms)


def render_model(net: Network) -> str:
    """Canonical text form; parsing it back reproduces the network exactly."""
    lines: list[str] = []
    if net.clocks:
        lines.append("clock " + ", ".join(net.clocks) + ";")
    for v in net.variables:
        lines.append(f"int[{v.lo},{v.hi}] {v.name} = {v.init};")
    for c in net.channels:
        lines.append(("urgent chan " if c.urgent else "chan ") + c.name + ";")
    if lines:
        lines.append("")
    for p in net.processes:
        lines.append(f"process {p.name} {{")
        for loc in p.locations:
            props = []
            if loc.name == p.initial:
                props.append("init;")
            if loc.invariant:
                props.append(f"invariant {_render_atom_list(loc.invariant)};")
            if loc.committed:
                props.append("committed;")
            if loc.urgent:
                props.append("urgent;")
            body = " ".join(props)
            lines.append(f"  location {loc.name} {{ {body} }}" if props else f"  location {loc.name} {{ }}")
        for e in p.edges:
            props = []
            atoms = _render_atom_list(tuple(e.guard.clock_atoms) + tuple(e.guard.data_atoms))
            if atoms:
                props.append(f"guard {atoms};")
            if e.sync is not None:
                props.append(f"sync {e.sync.channel}{e.sync.direction};")
            if e.resets:
                props.append("reset " + ", ".join(e.resets) + ";")
            if e.updates:
                props.append("do " + ", ".join(_render_update(u) for u in e.updates) + ";")
            body = " ".join(props)
            lines.append(
                f"  edge {e.src} -> {e.tgt} {{ {body} }}" if props else f"  edge {e.src} -> {e.tgt} {{ }}"
            )
        lines.append("}")
        lines.append("")
    lines.append("system " + ", ".join(p.name for p in net.processes) + ";")
    return "\n".join(lines) + "\n"


_PRECEDENCE = {Implies: 1, Or: 2, And: 3}


def _render_formula(f: Formula, parent_prec: int = 0) -> str:
    if isinstance(f, ProcessAt):
        return f"{f.process}.{f.location}"
    if isinstance(f, (Compare, ClockCompare, DataCompare)):
        name = f.name if isinstance(f, Compare) else (f.clock if isinstance(f, ClockCompare) else f.var)
        op = f.op
        value = f.value if not isinstance(f, ClockCompare) else f.bound
        return f"{name} {op} {value}"
    if isinstance(f, Not):
        inner = _render_formula(f.arg, 9)
        return f"not {inner}"
    if isinstance(f, Implies):
        left = _render_formula(f.left, 2)
        right = _render_formula(f.right, 1)
        s = f"{left} => {right}"
        return f"({s})" if parent_prec > 1 else s
    if isinstance(f, Or):
        left = _render_formula(f.left, 2)
        right = _render_formula(f.right, 3)
        s = f"{left} or {right}"
        return f"({s})" if parent_prec > 2 else s
    if isinstance(f, And):
        left = _render_formula(f.left, 3)
        right = _render_formula(f.right, 4)
        s = f"{left} and {right}"
        return f"({s})" if parent_prec > 3 else s
    raise QueryError(f"cannot render {type(f).__name__}")


def render_query(q: Query) -> str:
    return f"{q.quantifier} " + _render_formula(q.body)


def render_queries(queries) -> str:
    return "\n".join(render_query(q) for q in queries) + "\n"
