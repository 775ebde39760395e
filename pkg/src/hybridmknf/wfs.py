"""Bottom-up reference semantics: alternating fixpoints over ground KBs.

Entailment from the ontology is computed by saturating the positive part of
the reduced-TBox translation, seeded with the current atom set.  Saturation
never explodes: a clash only marks the atoms involved.  ``OB ⊨ ¬H`` holds
when some subset of the atom set that is consistent with the ontology becomes
inconsistent once ``H`` is added, i.e. ``H`` belongs to a minimal conflict.
For consistent atom sets this is classical entailment; unlike a "new clash"
test it stays monotone in the atom set when that set is already inconsistent.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

from .classifier import bridge_chains, check_ontology_consistency, classify, normalize, reduced_tbox
from .core import Atom, HybridKB, Rule, ground_program, known_atoms
from .transform import (
    double_atom, double_rules, is_doubled, is_marker, marker_atom, nname, translate_ontology,
    undouble, undouble_atom,
)

TRUE, UNDEFINED, FALSE = "true", "undefined", "false"


class CapExceeded(ValueError):
    pass


# ---------------------------------------------------------------------------
# positive ground programs


class PositiveProgram:
    """Ground definite rules with a counter-based least-model routine."""

    def __init__(self, rules):
        self.heads = []
        self.bodies = []
        self.watch = defaultdict(list)
        self.facts = []
        for head, body in rules:
            body = tuple(dict.fromkeys(body))
            idx = len(self.heads)
            self.heads.append(head)
            self.bodies.append(body)
            if not body:
                self.facts.append(head)
            for a in body:
                self.watch[a].append(idx)

    def least_model(self, seeds=()) -> set:
        model = set()
        missing = [len(b) for b in self.bodies]
        stack = list(seeds) + self.facts
        while stack:
            a = stack.pop()
            if a in model:
                continue
            model.add(a)
            for i in self.watch.get(a, ()):
                missing[i] -= 1
                if missing[i] == 0:
                    stack.append(self.heads[i])
        return model


# ---------------------------------------------------------------------------
# entailment


class Ontology:
    """Saturation-based entailment for an EL+ ontology (or the empty one)."""

    def __init__(self, positive=(), negative=(), vocabulary=frozenset(), consistent=True, witness=None):
        self.positive = PositiveProgram(positive)
        self.negative = PositiveProgram(negative)
        self.vocabulary = frozenset(vocabulary)
        self.consistent = consistent
        self.witness = witness
        self._cache = {}
        self._neg_cache = {}

    @classmethod
    def empty(cls) -> Ontology:
        return cls()

    @property
    def is_empty(self) -> bool:
        return not self.vocabulary and not self.positive.heads

    @classmethod
    def from_kb(cls, kb: HybridKB, constants=None) -> Ontology:
        nt = normalize(kb.tbox)
        individuals = tuple(kb.individuals) if constants is None else tuple(constants)
        verdict = check_ontology_consistency(nt, kb.abox, individuals)
        bridged = bridge_chains(nt)
        reduced = reduced_tbox(bridged, classify(bridged))
        translated = translate_ontology(reduced, kb.abox, individuals)
        pos, neg = [], []
        for r in ground_program(translated, individuals):
            if is_doubled(r.head.pred):
                continue
            body = tuple(l.atom for l in r.body)
            (neg if is_marker(r.head.pred) else pos).append((r.head, body))
        vocab = set(kb.symbols.dl_predicates) | set(nt.concepts) | set(nt.roles)
        return cls(pos, neg, vocab, verdict.consistent, verdict.witness)

    def relevant(self, atoms) -> frozenset:
        return frozenset(a for a in atoms if a.pred in self.vocabulary)

    def _state(self, atoms):
        key = self.relevant(atoms)
        hit = self._cache.get(key)
        if hit is None:
            closure = frozenset(self.positive.least_model(key))
            # i-rules have positive bodies over closure atoms
            negs = frozenset(_fire(self.negative, closure))
            clash = frozenset(a for a in closure if marker_atom(a) in negs)
            hit = (closure, clash)
            if len(self._cache) > 200_000:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def closure(self, atoms) -> frozenset:
        """Atoms derivable from the ontology and ``atoms`` (ontology vocabulary only)."""
        return self._state(atoms)[0]

    def clashes(self, atoms) -> frozenset:
        return self._state(atoms)[1]

    def is_consistent_with(self, atoms) -> bool:
        return not self.clashes(atoms)

    def entails(self, atom: Atom, atoms) -> bool:
        return atom in atoms or atom in self.closure(atoms)

    def entails_neg(self, atom: Atom, atoms) -> bool:
        if atom.pred not in self.vocabulary:
            return False
        atoms = self.relevant(atoms)
        if not self.clashes(atoms | {atom}):
            return False
        if not self.clashes(atoms):
            return True
        key = (atoms, atom)
        hit = self._neg_cache.get(key)
        if hit is None:
            hit = any(atom in env for env in self.conflicts(atoms | {atom}))
            if len(self._neg_cache) > 200_000:
                self._neg_cache.clear()
            self._neg_cache[key] = hit
        return hit

    def conflicts(self, atoms) -> list:
        """Minimal subsets of ``atoms`` that are inconsistent with the ontology.

        Computed by propagating minimal supporting environments through the
        positive program (assumption-based truth maintenance).
        """
        labels = defaultdict(list)
        work = []

        def add(a, env):
            envs = labels[a]
            if any(e <= env for e in envs):
                return
            envs[:] = [e for e in envs if not env <= e]
            envs.append(env)
            work.append((a, env))

        for a in self.relevant(atoms):
            add(a, frozenset((a,)))
        for a in self.positive.facts:
            add(a, frozenset())
        prog = self.positive
        while work:
            a, env = work.pop()
            if env not in labels[a]:
                continue
            for i in prog.watch.get(a, ()):
                others = [labels[b] for b in prog.bodies[i] if b != a]
                for combo in itertools.product(*others):
                    add(prog.heads[i], env.union(*combo))
        found = []
        neg = self.negative
        for head, body in zip(neg.heads, neg.bodies):
            target = Atom(head.pred[2:], head.args)
            if not labels.get(target):
                continue
            for combo in itertools.product(labels[target], *(labels.get(b, ()) for b in body)):
                env = frozenset().union(*combo)
                if not any(e <= env for e in found):
                    found = [e for e in found if not env <= e]
                    found.append(env)
        return found


def _fire(program: PositiveProgram, base) -> set:
    """Heads of rules whose bodies are contained in ``base`` (no chaining)."""
    out = set(program.facts)
    for head, body in zip(program.heads, program.bodies):
        if body and all(a in base for a in body):
            out.add(head)
    return out


# ---------------------------------------------------------------------------
# ground knowledge bases


@dataclass
class GroundKB:
    rules: list
    ontology: Ontology
    doubled: bool = False
    ka: frozenset = frozenset()
    ka_original: frozenset = frozenset()

    def __post_init__(self):
        if not self.ka:
            self.ka = known_atoms(self.rules)
        if not self.ka_original:
            self.ka_original = frozenset(a for a in self.ka if not _extended(a.pred)) if self.doubled else self.ka


def _extended(pred):
    return is_doubled(pred) or is_marker(pred)


def ground_kb(kb: HybridKB, cap: int | None = None) -> GroundKB:
    consts = kb.individuals
    return GroundKB(ground_program(kb.rules, consts, cap), Ontology.from_kb(kb))


def ground_doubled(kb: HybridKB, cap: int | None = None, ontology: Ontology | None = None) -> GroundKB:
    consts = kb.individuals
    original = ground_program(kb.rules, consts, cap)
    rules = double_rules(original, kb.is_dl)
    return GroundKB(rules, ontology or Ontology.from_kb(kb), True, ka_original=known_atoms(original))


def ground_plain(rules, constants=None, cap: int | None = None) -> GroundKB:
    """A rule program with the empty ontology, grounded over its constants."""
    from .transform import program_constants
    rules = list(rules)
    consts = program_constants(rules) if constants is None else tuple(constants)
    return GroundKB(ground_program(rules, consts, cap), Ontology.empty())


# ---------------------------------------------------------------------------
# transforms and operators


def mknf_transform(kb: GroundKB, S) -> list:
    """Positive residues of rules whose negated atoms all avoid S."""
    S = set(S)
    return [Rule(r.head, tuple(l for l in r.body if l.positive), r.tag)
            for r in kb.rules if not any(b in S for b in r.negative_body)]


def coherent_transform(kb: GroundKB, S) -> list:
    """Like :func:`mknf_transform`, also dropping rules whose head is classically refuted."""
    S = frozenset(S)
    out = []
    for r in kb.rules:
        if any(b in S for b in r.negative_body):
            continue
        if kb.ontology.entails_neg(r.head, S):
            continue
        out.append(Rule(r.head, tuple(l for l in r.body if l.positive), r.tag))
    return out


def _marked_original(r: Rule):
    """The original head atom if ``r`` is a marked rule, else None."""
    if not is_doubled(r.head.pred):
        return None
    mark = Atom(nname(undouble(r.head.pred)), r.head.args)
    return undouble_atom(r.head) if mark in r.negative_body else None


def coherent_transform_d(kb: GroundKB, S) -> list:
    """Doubled coherent transform: classical refutation only drops marked rules."""
    S = frozenset(S)
    orig = _originals(S)
    out = []
    for r in kb.rules:
        if any(b in S for b in r.negative_body):
            continue
        h1 = _marked_original(r)
        if h1 is not None and kb.ontology.entails_neg(h1, orig):
            continue
        out.append(Rule(r.head, tuple(l for l in r.body if l.positive), r.tag))
    return out


def _originals(S) -> frozenset:
    return frozenset(a for a in S if not _extended(a.pred))


def _doubled_as_original(S) -> frozenset:
    return frozenset(undouble_atom(a) for a in S if is_doubled(a.pred))


def d_operator(kb: GroundKB, S) -> set:
    """Atoms of KA entailed by the ontology together with S."""
    ont = kb.ontology
    if ont.is_empty:
        return set(a for a in S if a in kb.ka)
    if not kb.doubled:
        return (set(ont.closure(S)) | set(S)) & kb.ka
    orig = _originals(S)
    out = (set(ont.closure(orig)) | orig) & kb.ka_original
    dbl = _doubled_as_original(S)
    closure_d = ont.closure(dbl)
    for a in kb.ka:
        if is_doubled(a.pred) and (undouble_atom(a) in closure_d or a in S):
            out.add(a)
        elif is_marker(a.pred) and a in S:
            out.add(a)
    return out


def lfp_T(kb: GroundKB, positive_rules) -> frozenset:
    """Least fixpoint of T = R ∪ D for a positive (transformed) ground KB."""
    prog = PositiveProgram([(r.head, r.positive_body) for r in positive_rules])
    S = set()
    while True:
        S2 = prog.least_model(S)
        S2 |= d_operator(kb, S2)
        if S2 == S:
            return frozenset(S)
        S = S2


def gamma(kb: GroundKB, S) -> frozenset:
    return lfp_T(kb, mknf_transform(kb, S))


def gamma_prime(kb: GroundKB, S) -> frozenset:
    return lfp_T(kb, coherent_transform(kb, S))


def gamma_d(kb: GroundKB, S) -> frozenset:
    return lfp_T(kb, coherent_transform_d(kb, S))


# ---------------------------------------------------------------------------
# alternating fixpoints


@dataclass
class FixpointTrace:
    P: list
    N: list
    doubled: bool = False

    @property
    def P_omega(self) -> frozenset:
        return frozenset().union(*self.P)

    @property
    def N_omega(self) -> frozenset:
        out = self.N[0]
        for n in self.N[1:]:
            out = out & n
        return out

    def steps(self) -> int:
        return len(self.P) - 1


def _iterate(kb, next_p, next_n, max_steps=None) -> FixpointTrace:
    """Iterate until a (P, N) pair repeats.

    The operators are antitone, so P grows, N shrinks and the first repeated
    pair is the fixpoint.  Stopping on repeats rather than on equality with
    the previous pair also keeps the loop finite for non-antitone operators.
    """
    P, N = [frozenset()], [frozenset(kb.ka)]
    seen = {(P[0], N[0])}
    while True:
        p, n = next_p(N[-1]), next_n(P[-1])
        if (p, n) in seen:
            break
        seen.add((p, n))
        P.append(p)
        N.append(n)
        if max_steps is not None and len(P) > max_steps:
            raise RuntimeError("alternating fixpoint did not stabilise")
    return FixpointTrace(P, N, kb.doubled)


def alternating_fixpoint(kb: GroundKB) -> FixpointTrace:
    """P_{n+1} = Γ(N_n), N_{n+1} = Γ'(P_n) until both sequences repeat."""
    return _iterate(kb, lambda s: gamma(kb, s), lambda s: gamma_prime(kb, s), None)


def alternating_fixpoint_d(kb: GroundKB) -> FixpointTrace:
    """P^d_{n+1} = Γ^d(N^d_n), N^d_{n+1} = Γ^d(P^d_n)."""
    g = lambda s: gamma_d(kb, s)
    return _iterate(kb, g, g, None)


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    reason: str = ""

    def __bool__(self):
        return self.consistent


def consistency_check(kb: GroundKB, trace: FixpointTrace) -> Verdict:
    if not kb.ontology.consistent:
        return Verdict(False, f"ontology inconsistent (individual {kb.ontology.witness})")
    P, N = trace.P_omega, trace.N_omega
    for name, S in (("P", P), ("N", N)):
        lo, hi = gamma_prime(kb, S), gamma(kb, S)
        if lo < hi:
            extra = ", ".join(sorted(map(str, hi - lo)))
            return Verdict(False, f"Γ'({name}_ω) ⊂ Γ({name}_ω), difference {{{extra}}}")
    return Verdict(True, "")


# ---------------------------------------------------------------------------
# models


@dataclass
class ThreeValuedModel:
    true: frozenset = frozenset()
    undefined: frozenset = frozenset()
    false: frozenset = frozenset()
    inconsistent: frozenset = field(default_factory=frozenset)

    def value(self, atom: Atom) -> str:
        if atom in self.true:
            return TRUE
        if atom in self.undefined:
            return UNDEFINED
        return FALSE

    @property
    def universe(self) -> frozenset:
        return self.true | self.undefined | self.false

    @property
    def mknf_inconsistent(self) -> bool:
        return bool(self.inconsistent)

    def values(self) -> dict:
        return {a: self.value(a) for a in self.universe}


def extract_model(trace_d: FixpointTrace, universe) -> ThreeValuedModel:
    """Read the model of the original atoms off a doubled trace.

    A is true iff A ∈ P^d_ω and false iff A^d ∉ N^d_ω.  Atoms that satisfy
    both are reported as true and listed in ``inconsistent``.
    """
    P, N = trace_d.P_omega, trace_d.N_omega
    t, u, f, bad = set(), set(), set(), set()
    for a in universe:
        is_true = a in P
        is_false = double_atom(a) not in N
        if is_true and is_false:
            bad.add(a)
        if is_true:
            t.add(a)
        elif is_false:
            f.add(a)
        else:
            u.add(a)
    return ThreeValuedModel(frozenset(t), frozenset(u), frozenset(f), frozenset(bad))


def wf_values(trace: FixpointTrace, universe=None) -> dict:
    """Per-atom values of a non-doubled trace: true in P_ω, false outside N_ω."""
    P, N = trace.P_omega, trace.N_omega
    universe = trace.N[0] if universe is None else universe
    return {a: TRUE if a in P else FALSE if a not in N else UNDEFINED for a in universe}


def wf_model(rules, constants=None) -> ThreeValuedModel:
    """Textbook well-founded model of a (possibly non-ground) normal program."""
    kb = ground_plain(rules, constants)
    vals = wf_values(alternating_fixpoint(kb), kb.ka)
    return ThreeValuedModel(
        frozenset(a for a, v in vals.items() if v == TRUE),
        frozenset(a for a, v in vals.items() if v == UNDEFINED),
        frozenset(a for a, v in vals.items() if v == FALSE),
    )


def mknf_model(kb: HybridKB, cap: int | None = None):
    """Well-founded MKNF model via the doubled alternating fixpoint.

    Returns (model, doubled trace, verdict from the original-KB test).
    """
    gd = ground_doubled(kb, cap)
    trace_d = alternating_fixpoint_d(gd)
    model = extract_model(trace_d, gd.ka_original)
    g = GroundKB([r for r in ground_program(kb.rules, kb.individuals, cap)], gd.ontology)
    verdict = consistency_check(g, alternating_fixpoint(g))
    return model, trace_d, verdict


# ---------------------------------------------------------------------------
# unfounded sets


def dependencies(kb: GroundKB, H: Atom, cap: int = 16) -> list[tuple[frozenset, bool]]:
    """Minimal atom sets S with OB_{O',S} ⊨ H, paired with their consistency.

    For a doubled KB the ontology O' is O for original atoms and the doubled
    copy for doubled atoms; candidates are the KA atoms visible to O'.
    """
    ont = kb.ontology
    doubled_side = kb.doubled and is_doubled(H.pred)
    if doubled_side:
        target = undouble_atom(H)
        pool = [a for a in sorted(kb.ka) if is_doubled(a.pred) and undouble(a.pred) in ont.vocabulary]
        view = _doubled_as_original
    else:
        target = H
        universe = kb.ka_original if kb.doubled else kb.ka
        pool = [a for a in sorted(universe) if a.pred in ont.vocabulary]
        view = frozenset
    if H not in pool:
        pool.append(H)
    if len(pool) > cap:
        raise CapExceeded(f"{len(pool)} candidate atoms exceed the dependency cap of {cap}")

    def entails(S):
        return H in S or ont.entails(target, view(S))

    found = []
    for k in range(len(pool) + 1):
        for combo in itertools.combinations(pool, k):
            S = frozenset(combo)
            if any(m <= S for m, _ in found):
                continue
            if entails(S):
                found.append((S, ont.is_consistent_with(view(S))))
    return found


def _entails_without(kb, H, S, A) -> bool:
    ont = kb.ontology
    rest = S - {A}
    if H in rest:
        return True
    if kb.doubled and is_doubled(H.pred):
        return ont.entails(undouble_atom(H), _doubled_as_original(rest))
    return ont.entails(H, frozenset(rest))


def _refuted(kb: GroundKB, r: Rule, T) -> bool:
    if kb.doubled:
        h1 = _marked_original(r)
        return h1 is not None and kb.ontology.entails_neg(h1, _originals(T))
    return kb.ontology.entails_neg(r.head, frozenset(T))


def _founded_atoms(kb: GroundKB, T, F, U, cap, deps_cache) -> set:
    """Atoms of U violating (Ui) or (Uii) w.r.t. (T, F, U)."""
    T, UF = frozenset(T), frozenset(U) | frozenset(F)
    by_head = defaultdict(list)
    for r in kb.rules:
        by_head[r.head].append(r)
    bad = set()
    for H in U:
        for r in by_head.get(H, ()):
            if any(a in UF for a in r.positive_body):
                continue
            if any(b in T for b in r.negative_body):
                continue
            if _refuted(kb, r, T):
                continue
            bad.add(H)
            break
        if H in bad:
            continue
        if H not in deps_cache:
            deps_cache[H] = dependencies(kb, H, cap)
        for S, consistent in deps_cache[H]:
            if not consistent:
                continue
            if not any(A in UF and not _entails_without(kb, H, S, A) for A in S):
                bad.add(H)
                break
    return bad


def is_unfounded_set(kb: GroundKB, T, F, U, cap: int = 16) -> bool:
    return not _founded_atoms(kb, T, F, frozenset(U), cap, {})


def greatest_unfounded_set(kb: GroundKB, T, F, cap: int = 16, exhaustive: bool = True) -> frozenset:
    """Union of all unfounded sets w.r.t. (T, F).

    ``exhaustive`` checks every subset of KA (refused above ``cap`` atoms);
    otherwise the greatest set is found by repeatedly discarding atoms that
    violate the conditions, which gives the same result because the
    conditions are monotone in U.
    """
    universe = sorted(kb.ka)
    deps_cache = {}
    if exhaustive:
        if len(universe) > cap:
            raise CapExceeded(f"{len(universe)} known atoms exceed the unfounded-set cap of {cap}")
        out = set()
        for k in range(len(universe), 0, -1):
            for combo in itertools.combinations(universe, k):
                U = frozenset(combo)
                if U <= out:
                    continue
                if not _founded_atoms(kb, T, F, U, cap, deps_cache):
                    out |= U
        return frozenset(out)
    U = set(universe)
    while True:
        bad = _founded_atoms(kb, T, F, frozenset(U), cap, deps_cache)
        if not bad:
            return frozenset(U)
        U -= bad
