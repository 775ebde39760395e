"""Compilation of a hybrid KB into one doubled rule program.

Naming scheme for the extended predicate space: ``p^d`` is the doubled
(non-falsity) copy of ``p`` and ``N^p`` is the classical-negation marker
of a DL predicate ``p``.  Neither spelling can be produced by the KB parser,
so they never clash with user names.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classifier import (
    F1, F2, F3, F4, RI1, RI2, Consistency, NormalizedTBox, bridge_chains, check_ontology_consistency,
    classify, normalize, reduced_tbox,
)
from .core import BOTTOM, TOP, Atom, HybridKB, KBError, Literal, Rule, Var

X, Y, Z = Var("X"), Var("Y"), Var("Z")

TAGS = ("user-2a", "user-2b.i", "user-2b.ii", "a1", "a2", "c1", "c2", "c3", "r1", "r2", "i1", "i2", "i3")


class OntologyInconsistentError(KBError):
    exit_code = 5

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"the ontology alone is inconsistent (individual {witness})")


def dname(pred: str) -> str:
    return pred + "^d"


def nname(pred: str) -> str:
    return "N^" + pred


def is_doubled(pred: str) -> bool:
    return pred.endswith("^d")


def is_marker(pred: str) -> bool:
    return pred.startswith("N^")


def undouble(pred: str) -> str:
    return pred[:-2] if pred.endswith("^d") else pred


def double_atom(a: Atom) -> Atom:
    return Atom(dname(a.pred), a.args)


def undouble_atom(a: Atom) -> Atom:
    return Atom(undouble(a.pred), a.args)


def marker_atom(a: Atom) -> Atom:
    return Atom(nname(a.pred), a.args)


def _pos(a):
    return Literal(a, True)


def _neg(a):
    return Literal(a, False)


# ---------------------------------------------------------------------------
# rule doubling


def guard_predicates(rules, is_dl) -> frozenset[str]:
    """Non-DL predicates defined only by ground facts."""
    defined = {}
    for r in rules:
        ok = not r.body and r.head.is_ground()
        defined[r.head.pred] = defined.get(r.head.pred, True) and ok
    return frozenset(p for p, ok in defined.items() if ok and not is_dl(p))


def double_rules(rules, is_dl, skip_guards: bool = False) -> list[Rule]:
    """Each rule H <- A.., not B.. yields

    H   <- A.., not B^d..              (user-2a)
    H^d <- A^d.., not B.. [, not N^H]  (user-2b.i if H is a DL atom, else user-2b.ii)

    With ``skip_guards`` positive atoms over fact-only non-DL predicates are
    left undoubled in the second rule.
    """
    guards = guard_predicates(rules, is_dl) if skip_guards else frozenset()
    out = []
    for r in rules:
        body_a = tuple(l if l.positive else _neg(double_atom(l.atom)) for l in r.body)
        out.append(Rule(r.head, body_a, "user-2a"))
        body_b = tuple(
            (l if l.atom.pred in guards else _pos(double_atom(l.atom))) if l.positive else l
            for l in r.body
        )
        if is_dl(r.head.pred):
            out.append(Rule(double_atom(r.head), body_b + (_neg(marker_atom(r.head)),), "user-2b.i"))
        else:
            out.append(Rule(double_atom(r.head), body_b, "user-2b.ii"))
    return out


# ---------------------------------------------------------------------------
# ontology translation


def _c(concept, v):
    return Atom(concept, (v,))


def _pair(head, body, tag):
    """A translated rule and its doubled companion guarded by the marker."""
    dbody = tuple(_pos(double_atom(a)) for a in body)
    return [
        Rule(head, tuple(_pos(a) for a in body), tag),
        Rule(double_atom(head), dbody + (_neg(marker_atom(head)),), tag),
    ]


def translate_ontology(reduced, abox, individuals=()) -> list[Rule]:
    """Translate a reduced normal TBox and an ABox into doubled rules.

    A body occurrence of TOP becomes ``top(x)``; in that case facts
    ``top(a)`` (and their doubled copies) are emitted for every individual.
    """
    out = []
    for a in abox:
        tag = "a1" if a.arity == 1 else "a2"
        out.append(Rule(a, (), tag))
        out.append(Rule(double_atom(a), (_neg(marker_atom(a)),), tag))
    uses_top = False
    for ax in reduced:
        if isinstance(ax, F4):
            raise KBError(f"cannot translate {ax}: reduce the TBox first")
        if isinstance(ax, F1):
            uses_top |= ax.c == TOP
            if ax.d == BOTTOM:
                out.append(Rule(_c(nname(ax.c), X), (), "i1"))
            else:
                out += _pair(_c(ax.d, X), [_c(ax.c, X)], "c1")
        elif isinstance(ax, F2):
            uses_top |= TOP in (ax.c1, ax.c2)
            if ax.d == BOTTOM:
                out.append(Rule(_c(nname(ax.c2), X), (_pos(_c(ax.c1, X)),), "i2"))
                out.append(Rule(_c(nname(ax.c1), X), (_pos(_c(ax.c2, X)),), "i2"))
            else:
                out += _pair(_c(ax.d, X), [_c(ax.c1, X), _c(ax.c2, X)], "c2")
        elif isinstance(ax, F3):
            edge = Atom(ax.role, (X, Y))
            filler = [] if ax.c == TOP else [_c(ax.c, Y)]
            if ax.d == BOTTOM:
                if ax.c != TOP:
                    out.append(Rule(_c(nname(ax.c), Y), (_pos(edge),), "i3"))
                out.append(Rule(marker_atom(edge), tuple(_pos(a) for a in filler), "i3"))
            else:
                out += _pair(_c(ax.d, X), [edge] + filler, "c3")
        elif isinstance(ax, RI1):
            out += _pair(Atom(ax.s, (X, Y)), [Atom(ax.r, (X, Y))], "r1")
        elif isinstance(ax, RI2):
            out += _pair(Atom(ax.s, (X, Z)), [Atom(ax.r1, (X, Y)), Atom(ax.r2, (Y, Z))], "r2")
        else:
            raise TypeError(f"not a normal axiom: {ax!r}")
    if uses_top:
        for i in individuals:
            t = Atom(TOP, (i,))
            out.append(Rule(t, (), "a1"))
            out.append(Rule(double_atom(t), (_neg(marker_atom(t)),), "a1"))
    return out


# ---------------------------------------------------------------------------
# combined program


@dataclass
class DoubledProgram:
    rules: list
    constants: tuple
    dl_predicates: frozenset
    original_predicates: tuple = ()
    tbox: NormalizedTBox | None = None
    maps: object = None
    reduced: list = field(default_factory=list)
    kb: HybridKB | None = None

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def predicates(self) -> dict:
        """Original predicate -> (doubled name, marker name or None)."""
        used = {l.atom.pred for r in self.rules for l in (Literal(r.head), *r.body)}
        out = {}
        for p in self.original_predicates:
            out[p] = (dname(p), nname(p) if nname(p) in used else None)
        return out

    def by_tag(self, tag) -> list[Rule]:
        return [r for r in self.rules if r.tag == tag]

    @property
    def user_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.tag and r.tag.startswith("user")]

    @property
    def ontology_rules(self) -> list[Rule]:
        return [r for r in self.rules if not (r.tag and r.tag.startswith("user"))]


def program_constants(rules) -> tuple:
    seen = {}
    for r in rules:
        for a in (r.head, *(l.atom for l in r.body)):
            for t in a.args:
                if not isinstance(t, Var):
                    seen.setdefault(t)
    return tuple(seen)


def build_combined(kb: HybridKB, skip_guards: bool = False) -> DoubledProgram:
    """normalize -> consistency check -> bridge chains -> classify -> reduce -> translate, plus doubled rules."""
    nt = normalize(kb.tbox)
    individuals = tuple(kb.individuals)
    verdict: Consistency = check_ontology_consistency(nt, kb.abox, individuals)
    if not verdict:
        raise OntologyInconsistentError(verdict.witness)
    nt = bridge_chains(nt)
    maps = classify(nt)
    reduced = reduced_tbox(nt, maps)
    p_o = translate_ontology(reduced, kb.abox, individuals)
    dl = set(kb.symbols.dl_predicates) | set(nt.concepts) | set(nt.roles)
    dl.discard(TOP)
    p_d = double_rules(kb.rules, lambda p: p in dl, skip_guards)
    rules = p_d + p_o
    originals = list(kb.symbols.names("predicate"))
    for p in sorted((nt.concepts | nt.roles) - {TOP}):
        if p not in originals:
            originals.append(p)
    return DoubledProgram(rules, individuals, frozenset(dl), tuple(originals), nt, maps, reduced, kb)


def compile_rules(rules, is_dl=lambda p: False, constants=None) -> DoubledProgram:
    """Doubled program for a bare rule set (empty ontology)."""
    rules = list(rules)
    consts = tuple(constants) if constants is not None else program_constants(rules)
    preds = tuple(dict.fromkeys(l.atom.pred for r in rules for l in (Literal(r.head), *r.body)))
    dl = frozenset(p for p in preds if is_dl(p))
    return DoubledProgram(double_rules(rules, is_dl), consts, dl, preds)
