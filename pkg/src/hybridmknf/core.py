"""Shared data model for hybrid knowledge bases.

Concepts, roles, individuals and rule predicates are plain strings; the
:class:`SymbolTable` interns them to dense ids, which fixes a stable ordering
for serialization and records which predicates are DL-predicates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

TOP = "top"
BOTTOM = "bot"


class KBError(Exception):
    """Base class for errors raised while loading or compiling a KB."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class SafetyError(KBError):
    def __init__(self, message, variables=(), line=None, col=None):
        self.variables = tuple(variables)
        super().__init__(message, line, col)


class GroundingError(KBError):
    pass


# ---------------------------------------------------------------------------
# symbols


class SymbolTable:
    """Interning maps for the four name spaces of a hybrid KB."""

    KINDS = ("concept", "role", "individual", "predicate")

    def __init__(self):
        self._ids = {k: {} for k in self.KINDS}
        self._names = {k: [] for k in self.KINDS}
        self._dl = set()

    def intern(self, kind: str, name: str) -> int:
        ids = self._ids[kind]
        if name not in ids:
            ids[name] = len(self._names[kind])
            self._names[kind].append(name)
        return ids[name]

    def resolve(self, kind: str, ident: int) -> str:
        return self._names[kind][ident]

    def id(self, kind: str, name: str) -> int:
        return self._ids[kind][name]

    def __contains__(self, item):
        kind, name = item
        return name in self._ids[kind]

    def names(self, kind: str) -> list[str]:
        return list(self._names[kind])

    def mark_dl(self, predicate: str) -> None:
        self.intern("predicate", predicate)
        self._dl.add(predicate)

    def is_dl(self, predicate: str) -> bool:
        return predicate in self._dl

    @property
    def dl_predicates(self) -> frozenset[str]:
        return frozenset(self._dl)

    def order(self, kind: str, name: str):
        """Sort key: interning order first, unknown names after, by text."""
        ident = self._ids[kind].get(name)
        return (0, ident, "") if ident is not None else (1, 0, name)


# ---------------------------------------------------------------------------
# terms, atoms, rules


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[str, Var]


def is_var(t) -> bool:
    return type(t) is Var


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(str, self.args))})"

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return not any(type(a) is Var for a in self.args)

    def variables(self) -> Iterator[Var]:
        return (a for a in self.args if type(a) is Var)

    def substitute(self, theta: dict) -> Atom:
        if not theta:
            return self
        return Atom(self.pred, tuple(theta.get(a, a) if type(a) is Var else a for a in self.args))


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self):
        return str(self.atom) if self.positive else f"not {self.atom}"

    def substitute(self, theta: dict) -> Literal:
        return Literal(self.atom.substitute(theta), self.positive)


def pos(atom: Atom) -> Literal:
    return Literal(atom, True)


def neg(atom: Atom) -> Literal:
    return Literal(atom, False)


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple = ()
    tag: str | None = field(default=None, compare=False)

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."

    @property
    def positive_body(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.body if l.positive)

    @property
    def negative_body(self) -> tuple[Atom, ...]:
        return tuple(l.atom for l in self.body if not l.positive)

    def variables(self) -> list[Var]:
        seen = dict.fromkeys(self.head.variables())
        for lit in self.body:
            seen.update(dict.fromkeys(lit.atom.variables()))
        return list(seen)

    def is_ground(self) -> bool:
        return not self.variables()

    def substitute(self, theta: dict) -> Rule:
        return Rule(self.head.substitute(theta), tuple(l.substitute(theta) for l in self.body), self.tag)


# ---------------------------------------------------------------------------
# EL+ concept expressions and TBox axioms


class _Constant:
    __slots__ = ("symbol",)

    def __init__(self, symbol):
        self.symbol = symbol

    def __repr__(self):
        return self.symbol

    __str__ = __repr__

    def __reduce__(self):
        return (_constant, (self.symbol,))


def _constant(symbol):
    return Top if symbol == TOP else Bottom


Top = _Constant(TOP)
Bottom = _Constant(BOTTOM)


@dataclass(frozen=True)
class Name:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Conj:
    args: tuple

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("a conjunction needs at least two conjuncts")

    def __str__(self):
        return " and ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Exists:
    role: str
    filler: object

    def __str__(self):
        return f"exists {self.role}.{_paren(self.filler)}"


ConceptExpr = Union[_Constant, Name, Conj, Exists]


def _paren(c) -> str:
    return f"({c})" if isinstance(c, Conj) else str(c)


def _key(c):
    if c is Top:
        return (0,)
    if c is Bottom:
        return (1,)
    if isinstance(c, Name):
        return (2, c.name)
    if isinstance(c, Exists):
        return (3, c.role, _key(c.filler))
    return (4, tuple(_key(a) for a in c.args))


def conjunction(parts: Iterable) -> ConceptExpr:
    """Build a canonical conjunction: flattened, Top-free, deduplicated, sorted.

    A Bottom conjunct makes the whole conjunction Bottom.
    """
    flat = []
    for p in parts:
        if isinstance(p, Conj):
            flat.extend(p.args)
        else:
            flat.append(p)
    if any(p is Bottom for p in flat):
        return Bottom
    uniq = {_key(p): p for p in flat if p is not Top}
    if not uniq:
        return Top
    items = [uniq[k] for k in sorted(uniq)]
    return items[0] if len(items) == 1 else Conj(tuple(items))


def canonical(c) -> ConceptExpr:
    if isinstance(c, Conj):
        return conjunction(canonical(a) for a in c.args)
    if isinstance(c, Exists):
        return Exists(c.role, canonical(c.filler))
    return c


def concept_names(c) -> Iterator[str]:
    if isinstance(c, Name):
        yield c.name
    elif isinstance(c, Conj):
        for a in c.args:
            yield from concept_names(a)
    elif isinstance(c, Exists):
        yield from concept_names(c.filler)


def role_names(c) -> Iterator[str]:
    if isinstance(c, Conj):
        for a in c.args:
            yield from role_names(a)
    elif isinstance(c, Exists):
        yield c.role
        yield from role_names(c.filler)


@dataclass(frozen=True)
class GCI:
    lhs: object
    rhs: object

    def __str__(self):
        return f"{self.lhs} <= {self.rhs}."


@dataclass(frozen=True)
class RI:
    chain: tuple
    sup: str

    def __post_init__(self):
        if not self.chain:
            raise ValueError("role chain must be non-empty")

    def __str__(self):
        return f"{' o '.join(self.chain)} <= {self.sup}."


# ---------------------------------------------------------------------------
# knowledge base


@dataclass
class HybridKB:
    tbox: tuple = ()
    abox: tuple = ()
    rules: tuple = ()
    symbols: SymbolTable = field(default_factory=SymbolTable)

    def __post_init__(self):
        self.tbox = tuple(self.tbox)
        self.abox = tuple(self.abox)
        self.rules = tuple(self.rules)

    @classmethod
    def build(cls, tbox=(), abox=(), rules=()) -> HybridKB:
        """Assemble a KB from already-constructed parts, filling in symbols.

        Raises :class:`SafetyError` if a rule is not DL-safe.
        """
        kb = cls(tbox, abox, rules)
        populate_symbols(kb)
        for r in kb.rules:
            bad = unsafe_variables(r, kb.symbols.is_dl)
            if bad:
                raise SafetyError(f"rule is not DL-safe: {r} (variables {', '.join(map(str, bad))})", bad)
        return kb

    @property
    def concepts(self) -> list[str]:
        return self.symbols.names("concept")

    @property
    def roles(self) -> list[str]:
        return self.symbols.names("role")

    @property
    def individuals(self) -> list[str]:
        return self.symbols.names("individual")

    def is_dl(self, pred: str) -> bool:
        return self.symbols.is_dl(pred)

    def with_rules(self, rules) -> HybridKB:
        return HybridKB(self.tbox, self.abox, tuple(rules), self.symbols)


def populate_symbols(kb: HybridKB) -> SymbolTable:
    """Intern every name of ``kb`` and flag DL-predicates."""
    st = kb.symbols
    for ax in kb.tbox:
        if isinstance(ax, GCI):
            for side in (ax.lhs, ax.rhs):
                for n in concept_names(side):
                    st.intern("concept", n)
                    st.mark_dl(n)
                for r in role_names(side):
                    st.intern("role", r)
                    st.mark_dl(r)
        else:
            for r in (*ax.chain, ax.sup):
                st.intern("role", r)
                st.mark_dl(r)
    for a in kb.abox:
        st.intern("concept" if a.arity == 1 else "role", a.pred)
        st.mark_dl(a.pred)
        for i in a.args:
            st.intern("individual", i)
    for r in kb.rules:
        for atom in (r.head, *(l.atom for l in r.body)):
            st.intern("predicate", atom.pred)
            for t in atom.args:
                if not is_var(t):
                    st.intern("individual", t)
    return st


# ---------------------------------------------------------------------------
# grounding, known atoms, DL-safety


def unsafe_variables(rule: Rule, is_dl) -> list[Var]:
    """Variables of ``rule`` with no occurrence in a positive non-DL body atom."""
    safe = set()
    for lit in rule.body:
        if lit.positive and not is_dl(lit.atom.pred):
            safe.update(lit.atom.variables())
    return [v for v in rule.variables() if v not in safe]


def validate_dl_safety(rule: Rule, is_dl) -> tuple[bool, list[Var]]:
    bad = unsafe_variables(rule, is_dl)
    return (not bad, bad)


def ground_rule(rule: Rule, constants) -> Iterator[Rule]:
    vs = rule.variables()
    if not vs:
        yield rule
        return
    for combo in itertools.product(constants, repeat=len(vs)):
        yield rule.substitute(dict(zip(vs, combo)))


def ground_program(rules, constants, cap: int | None = None) -> list[Rule]:
    """Instantiate every rule over ``constants`` in all possible ways."""
    constants = list(constants)
    out = []
    for r in rules:
        n = len(constants) ** len(r.variables())
        if cap is not None and len(out) + n > cap:
            raise GroundingError(f"ground instantiation exceeds cap of {cap} rules")
        out.extend(ground_rule(r, constants))
    return out


def ground_instantiation(kb: HybridKB, cap: int | None = None) -> list[Rule]:
    return ground_program(kb.rules, kb.individuals, cap)


def known_atoms(ground_rules) -> frozenset[Atom]:
    """Atoms occurring in a ground program, positively or under ``not``."""
    ka = set()
    for r in ground_rules:
        if not r.is_ground():
            raise ValueError(f"known_atoms expects a ground program, got {r}")
        ka.add(r.head)
        ka.update(l.atom for l in r.body)
    return frozenset(ka)
