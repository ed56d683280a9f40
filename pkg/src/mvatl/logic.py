"""Formula representation for strategic-ability specifications.

State formulas cover lattice constants, atoms, boolean connectives, the
two-valued implication/equivalence, and the strategic operators ``<<A>>``
(some strategy of A enforces) and ``[[A]]`` (no strategy of A avoids).
Path formulas add the temporal layer: X, U, W and the derived F and G.

Formulas are immutable values; parsing and printing round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import FormulaSyntaxError, UnknownAgent


class StateFormula:
    """Base class for state formulas."""

    def __str__(self):
        return format_formula(self)


class PathFormula:
    """Base class for path formulas."""

    def __str__(self):
        return format_path(self)


@dataclass(frozen=True)
class Constant(StateFormula):
    name: str


@dataclass(frozen=True)
class Atom(StateFormula):
    name: str


@dataclass(frozen=True)
class And(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Or(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Implies(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Iff(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Coalition(StateFormula):
    agents: tuple[str, ...]
    path: PathFormula


@dataclass(frozen=True)
class NoAvoid(StateFormula):
    agents: tuple[str, ...]
    path: PathFormula


@dataclass(frozen=True)
class StateF(PathFormula):
    """A state formula used in path position."""
    formula: StateFormula


@dataclass(frozen=True)
class PAnd(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class POr(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Next(PathFormula):
    body: PathFormula


@dataclass(frozen=True)
class Until(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class WeakUntil(PathFormula):
    left: PathFormula
    right: PathFormula


@dataclass(frozen=True)
class Sometime(PathFormula):
    body: PathFormula


@dataclass(frozen=True)
class Always(PathFormula):
    body: PathFormula


TOP = Constant("__top__")
BOT = Constant("__bot__")


# --- parsing -----------------------------------------------------------------
#
# Grammar (ASCII):
#   coalition  <<a1,a2>>     noavoid  [[a1,a2]]      (empty agent lists allowed)
#   temporal   X g, g U g, g W g, F g, G g
#   boolean    &  |  ->  <->          constants  #name    atoms  ident
# Precedence: unary/temporal > & > | > -> (right assoc) > <->.
# The binary temporal operators bind tighter than &.

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._scan()
        self.cursor = 0

    def _scan(self):
        text = self.text
        i, n = 0, len(text)
        two_char = {"<<": "LL", ">>": "RR", "[[": "LB", "]]": "RB", "->": "IMP"}
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if text.startswith("<->", i):
                self.tokens.append(("IFF", "<->", i))
                i += 3
                continue
            pair = text[i:i + 2]
            if pair in ("<<", ">>", "[[", "]]", "->"):
                self.tokens.append((two_char[pair], pair, i))
                i += 2
                continue
            if c in "()&|,":
                kind = {"(": "LP", ")": "RP", "&": "AND", "|": "OR", ",": "COMMA"}[c]
                self.tokens.append((kind, c, i))
                i += 1
                continue
            if c == "#":
                j = i + 1
                if j >= n or text[j] not in _IDENT_START:
                    raise FormulaSyntaxError("expected constant name after '#'", i)
                while j < n and text[j] in _IDENT_CONT:
                    j += 1
                self.tokens.append(("CONST", text[i + 1:j], i))
                i = j
                continue
            if c in _IDENT_START:
                j = i
                while j < n and text[j] in _IDENT_CONT:
                    j += 1
                word = text[i:j]
                if word in ("X", "U", "W", "F", "G"):
                    self.tokens.append((word, word, i))
                else:
                    self.tokens.append(("IDENT", word, i))
                i = j
                continue
            if c.isdigit():
                j = i
                while j < n and (text[j].isdigit() or text[j] in _IDENT_CONT):
                    j += 1
                self.tokens.append(("IDENT", text[i:j], i))
                i = j
                continue
            raise FormulaSyntaxError(f"unexpected character {c!r}", i)
        self.tokens.append(("EOF", "", n))

    def peek(self):
        return self.tokens[self.cursor]

    def next(self):
        tok = self.tokens[self.cursor]
        self.cursor += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok


class _Parser:
    """Recursive-descent parser producing path formulas; the top level must
    be a state formula."""

    def __init__(self, text: str, agents: Optional[list[str]]):
        self.toks = _Tokenizer(text)
        self.agents = list(agents) if agents is not None else None

    def parse(self) -> StateFormula:
        body = self.parse_iff()
        tok = self.toks.peek()
        if tok[0] != "EOF":
            raise FormulaSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return _demote(body, 0)

    def parse_iff(self) -> PathFormula:
        left = self.parse_implies()
        while self.toks.peek()[0] == "IFF":
            pos = self.toks.next()[2]
            right = self.parse_implies()
            left = StateF(Iff(_demote(left, pos), _demote(right, pos)))
        return left

    def parse_implies(self) -> PathFormula:
        left = self.parse_or()
        if self.toks.peek()[0] == "IMP":
            pos = self.toks.next()[2]
            right = self.parse_implies()  # right-associative
            return StateF(Implies(_demote(left, pos), _demote(right, pos)))
        return left

    def parse_or(self) -> PathFormula:
        left = self.parse_and()
        while self.toks.peek()[0] == "OR":
            self.toks.next()
            right = self.parse_and()
            left = _mk_bool(POr, Or, left, right)
        return left

    def parse_and(self) -> PathFormula:
        left = self.parse_temporal()
        while self.toks.peek()[0] == "AND":
            self.toks.next()
            right = self.parse_temporal()
            left = _mk_bool(PAnd, And, left, right)
        return left

    def parse_temporal(self) -> PathFormula:
        left = self.parse_unary()
        kind = self.toks.peek()[0]
        if kind in ("U", "W"):
            self.toks.next()
            right = self.parse_temporal()  # right-associative
            return (Until if kind == "U" else WeakUntil)(left, right)
        return left

    def parse_unary(self) -> PathFormula:
        kind, value, pos = self.toks.peek()
        if kind == "X":
            self.toks.next()
            return Next(self.parse_unary())
        if kind == "F":
            self.toks.next()
            return Sometime(self.parse_unary())
        if kind == "G":
            self.toks.next()
            return Always(self.parse_unary())
        if kind == "LL":
            self.toks.next()
            agents = self.parse_agents("RR")
            return StateF(Coalition(agents, self.parse_unary()))
        if kind == "LB":
            self.toks.next()
            agents = self.parse_agents("RB")
            return StateF(NoAvoid(agents, self.parse_unary()))
        if kind == "LP":
            self.toks.next()
            body = self.parse_iff()
            self.toks.expect("RP")
            return body
        if kind == "CONST":
            self.toks.next()
            return StateF(Constant(value))
        if kind == "IDENT":
            self.toks.next()
            return StateF(Atom(value))
        raise FormulaSyntaxError(f"unexpected token {value!r}", pos)

    def parse_agents(self, closing: str) -> tuple[str, ...]:
        names = []
        if self.toks.peek()[0] != closing:
            while True:
                tok = self.toks.next()
                if tok[0] != "IDENT":
                    raise FormulaSyntaxError(
                        f"expected agent name, found {tok[1]!r}", tok[2]
                    )
                names.append(tok[1])
                if self.toks.peek()[0] == "COMMA":
                    self.toks.next()
                    continue
                break
        self.toks.expect(closing)
        if self.agents is not None:
            for name in names:
                if name not in self.agents:
                    raise UnknownAgent(
                        f"agent {name!r} not in declared universe {self.agents}"
                    )
            names.sort(key=self.agents.index)
        if len(set(names)) != len(names):
            raise FormulaSyntaxError("duplicate agent in coalition", self.toks.peek()[2])
        return tuple(names)


def _mk_bool(path_cls, state_cls, left: PathFormula, right: PathFormula) -> PathFormula:
    """Keep boolean combinations of state formulas as state formulas."""
    if isinstance(left, StateF) and isinstance(right, StateF):
        return StateF(state_cls(left.formula, right.formula))
    return path_cls(left, right)


def _demote(gamma: PathFormula, pos: int) -> StateFormula:
    if isinstance(gamma, StateF):
        return gamma.formula
    raise FormulaSyntaxError("expected a state formula, found a bare path formula", pos)


def parse(text: str, agents: Optional[list[str]] = None) -> StateFormula:
    """Parse a state formula; agent names are checked against ``agents`` if given."""
    return _Parser(text, agents).parse()


# --- printing ----------------------------------------------------------------

def format_formula(phi: StateFormula) -> str:
    if isinstance(phi, Constant):
        return f"#{phi.name}"
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, And):
        return f"({format_formula(phi.left)} & {format_formula(phi.right)})"
    if isinstance(phi, Or):
        return f"({format_formula(phi.left)} | {format_formula(phi.right)})"
    if isinstance(phi, Implies):
        return f"({format_formula(phi.left)} -> {format_formula(phi.right)})"
    if isinstance(phi, Iff):
        return f"({format_formula(phi.left)} <-> {format_formula(phi.right)})"
    if isinstance(phi, Coalition):
        return f"<<{','.join(phi.agents)}>> {format_path(phi.path)}"
    if isinstance(phi, NoAvoid):
        return f"[[{','.join(phi.agents)}]] {format_path(phi.path)}"
    raise TypeError(f"not a state formula: {phi!r}")


def format_path(gamma: PathFormula) -> str:
    if isinstance(gamma, StateF):
        return format_formula(gamma.formula)
    if isinstance(gamma, PAnd):
        return f"({format_path(gamma.left)} & {format_path(gamma.right)})"
    if isinstance(gamma, POr):
        return f"({format_path(gamma.left)} | {format_path(gamma.right)})"
    if isinstance(gamma, Next):
        return f"X {format_path(gamma.body)}"
    if isinstance(gamma, Until):
        return f"({format_path(gamma.left)} U {format_path(gamma.right)})"
    if isinstance(gamma, WeakUntil):
        return f"({format_path(gamma.left)} W {format_path(gamma.right)})"
    if isinstance(gamma, Sometime):
        return f"F {format_path(gamma.body)}"
    if isinstance(gamma, Always):
        return f"G {format_path(gamma.body)}"
    raise TypeError(f"not a path formula: {gamma!r}")


# --- derived-operator expansion ------------------------------------------------

def expand_derived(phi: StateFormula) -> StateFormula:
    """Rewrite F, G and <-> into the core language; idempotent.

    F g becomes (true U g), G g becomes (g W false) with the reserved
    top/bottom constants, and equivalences unfold into two implications.
    """
    if isinstance(phi, (Constant, Atom)):
        return phi
    if isinstance(phi, And):
        return And(expand_derived(phi.left), expand_derived(phi.right))
    if isinstance(phi, Or):
        return Or(expand_derived(phi.left), expand_derived(phi.right))
    if isinstance(phi, Implies):
        return Implies(expand_derived(phi.left), expand_derived(phi.right))
    if isinstance(phi, Iff):
        left, right = expand_derived(phi.left), expand_derived(phi.right)
        return And(Implies(left, right), Implies(right, left))
    if isinstance(phi, Coalition):
        return Coalition(phi.agents, _expand_path(phi.path))
    if isinstance(phi, NoAvoid):
        return NoAvoid(phi.agents, _expand_path(phi.path))
    raise TypeError(f"not a state formula: {phi!r}")


def _expand_path(gamma: PathFormula) -> PathFormula:
    if isinstance(gamma, StateF):
        return StateF(expand_derived(gamma.formula))
    if isinstance(gamma, PAnd):
        return PAnd(_expand_path(gamma.left), _expand_path(gamma.right))
    if isinstance(gamma, POr):
        return POr(_expand_path(gamma.left), _expand_path(gamma.right))
    if isinstance(gamma, Next):
        return Next(_expand_path(gamma.body))
    if isinstance(gamma, Until):
        return Until(_expand_path(gamma.left), _expand_path(gamma.right))
    if isinstance(gamma, WeakUntil):
        return WeakUntil(_expand_path(gamma.left), _expand_path(gamma.right))
    if isinstance(gamma, Sometime):
        return Until(StateF(TOP), _expand_path(gamma.body))
    if isinstance(gamma, Always):
        return WeakUntil(_expand_path(gamma.body), StateF(BOT))
    raise TypeError(f"not a path formula: {gamma!r}")


# --- classification -------------------------------------------------------------

@dataclass
class Classification:
    atl_fragment: bool
    implication_free: bool
    subformulas: list[StateFormula]
    first_implication: Optional[Implies]


def classify(phi: StateFormula) -> Classification:
    """Classify an expanded formula.

    ``atl_fragment`` holds iff every strategic operator directly wraps X, U
    or W over state formulas.  ``subformulas`` lists the distinct state
    subformulas in post-order (children before parents, left child first),
    and ``first_implication`` is the first implication in that order.
    """
    subformulas: list[StateFormula] = []
    seen: set[StateFormula] = set()
    state = {"atl": True, "first_imp": None}

    def visit_state(f: StateFormula):
        if isinstance(f, (And, Or, Implies, Iff)):
            visit_state(f.left)
            visit_state(f.right)
        elif isinstance(f, (Coalition, NoAvoid)):
            if not _atl_shape(f.path):
                state["atl"] = False
            visit_path(f.path)
        if f not in seen:
            seen.add(f)
            subformulas.append(f)
            if isinstance(f, Implies) and state["first_imp"] is None:
                state["first_imp"] = f

    def visit_path(g: PathFormula):
        if isinstance(g, StateF):
            visit_state(g.formula)
        elif isinstance(g, (PAnd, POr, Until, WeakUntil)):
            visit_path(g.left)
            visit_path(g.right)
        elif isinstance(g, (Next, Sometime, Always)):
            visit_path(g.body)

    visit_state(phi)
    implication_free = not any(isinstance(f, (Implies, Iff)) for f in subformulas)
    return Classification(
        atl_fragment=state["atl"],
        implication_free=implication_free,
        subformulas=subformulas,
        first_implication=state["first_imp"],
    )


def _atl_shape(gamma: PathFormula) -> bool:
    if isinstance(gamma, Next):
        return isinstance(gamma.body, StateF)
    if isinstance(gamma, (Until, WeakUntil)):
        return isinstance(gamma.left, StateF) and isinstance(gamma.right, StateF)
    if isinstance(gamma, Sometime):
        return isinstance(gamma.body, StateF)
    if isinstance(gamma, Always):
        return isinstance(gamma.body, StateF)
    return False


def substitute(phi: StateFormula, old: StateFormula, new: StateFormula) -> StateFormula:
    """Replace every occurrence of ``old`` (a state formula) by ``new``."""
    if phi == old:
        return new
    if isinstance(phi, (Constant, Atom)):
        return phi
    if isinstance(phi, (And, Or, Implies, Iff)):
        cls = type(phi)
        return cls(substitute(phi.left, old, new), substitute(phi.right, old, new))
    if isinstance(phi, (Coalition, NoAvoid)):
        cls = type(phi)
        return cls(phi.agents, _substitute_path(phi.path, old, new))
    raise TypeError(f"not a state formula: {phi!r}")


def _substitute_path(gamma: PathFormula, old: StateFormula, new: StateFormula) -> PathFormula:
    if isinstance(gamma, StateF):
        return StateF(substitute(gamma.formula, old, new))
    if isinstance(gamma, (PAnd, POr, Until, WeakUntil)):
        cls = type(gamma)
        return cls(
            _substitute_path(gamma.left, old, new),
            _substitute_path(gamma.right, old, new),
        )
    if isinstance(gamma, (Next, Sometime, Always)):
        cls = type(gamma)
        return cls(_substitute_path(gamma.body, old, new))
    raise TypeError(f"not a path formula: {gamma!r}")


def atoms_of(phi: StateFormula) -> frozenset[str]:
    return frozenset(
        f.name for f in classify(phi).subformulas if isinstance(f, Atom)
    )
