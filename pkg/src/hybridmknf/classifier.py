"""EL+ normalization and completion-rule classification.

Concepts inside normal axioms are plain strings: user or fresh concept
names, or the reserved ``TOP``/``BOTTOM`` keywords.  Individuals in an
:class:`InstanceGraph` are wrapped in :class:`Ind` so that a concept and an
individual sharing a spelling never collide.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .core import (
    BOTTOM, TOP, Atom, Bottom, Conj, Exists, GCI, Name, RI, Top, _key, canonical,
)


# ---------------------------------------------------------------------------
# normal forms


@dataclass(frozen=True)
class F1:
    """C ⊑ D"""
    c: str
    d: str

    def __str__(self):
        return f"{self.c} <= {self.d}."


@dataclass(frozen=True)
class F2:
    """C1 ⊓ C2 ⊑ D"""
    c1: str
    c2: str
    d: str

    def __str__(self):
        return f"{self.c1} and {self.c2} <= {self.d}."


@dataclass(frozen=True)
class F3:
    """∃R.C ⊑ D"""
    role: str
    c: str
    d: str

    def __str__(self):
        return f"exists {self.role}.{self.c} <= {self.d}."


@dataclass(frozen=True)
class F4:
    """C ⊑ ∃R.D"""
    c: str
    role: str
    d: str

    def __str__(self):
        return f"{self.c} <= exists {self.role}.{self.d}."


@dataclass(frozen=True)
class RI1:
    r: str
    s: str

    def __str__(self):
        return f"{self.r} <= {self.s}."


@dataclass(frozen=True)
class RI2:
    r1: str
    r2: str
    s: str

    def __str__(self):
        return f"{self.r1} o {self.r2} <= {self.s}."


NORMAL_SHAPES = (F1, F2, F3, F4, RI1, RI2)


@dataclass
class NormalizedTBox:
    axioms: list
    fresh: dict = field(default_factory=dict)   # fresh name -> originating expression
    concepts: frozenset = frozenset()           # BC_T, including TOP
    roles: frozenset = frozenset()              # R_T

    def __iter__(self):
        return iter(self.axioms)


def _is_basic(c) -> bool:
    return c is Top or isinstance(c, Name)


def _basic_name(c) -> str:
    return TOP if c is Top else c.name


class _Normalizer:
    def __init__(self, tbox):
        self.out = []
        self.seen = set()
        self.fresh = {}
        self.cache = {}
        used = set()
        for ax in tbox:
            if isinstance(ax, GCI):
                used.update(_names(ax.lhs))
                used.update(_names(ax.rhs))
            else:
                used.update(ax.chain)
                used.add(ax.sup)
        self.used = used
        self.counter = {"_N": 0, "_R": 0}

    def new_name(self, prefix):
        while True:
            self.counter[prefix] += 1
            name = f"{prefix}{self.counter[prefix]}"
            if name not in self.used:
                self.used.add(name)
                return name

    def emit(self, ax):
        if ax not in self.seen:
            self.seen.add(ax)
            self.out.append(ax)

    # a concept name equivalent enough for its position: on the left, name N
    # with expr ⊑ N; on the right, N with N ⊑ expr
    def name_for(self, expr, side):
        if _is_basic(expr):
            return _basic_name(expr)
        key = (side, _key(expr))
        if key not in self.cache:
            n = self.new_name("_N")
            self.cache[key] = n
            self.fresh[n] = expr
            if side == "lhs":
                self.gci(expr, Name(n))
            else:
                self.gci(Name(n), expr)
        return self.cache[key]

    def gci(self, lhs, rhs):
        if lhs is Bottom or rhs is Top:
            return
        if isinstance(rhs, Conj):
            if not _is_basic(lhs):
                lhs = Name(self.name_for(lhs, "lhs"))
            for part in rhs.args:
                self.gci(lhs, part)
            return
        if isinstance(rhs, Exists):
            c = self.name_for(lhs, "lhs")
            self.emit(F4(c, rhs.role, self.name_for(rhs.filler, "rhs")))
            return
        d = BOTTOM if rhs is Bottom else rhs.name
        if _is_basic(lhs):
            c = _basic_name(lhs)
            if c != d:
                self.emit(F1(c, d))
        elif isinstance(lhs, Exists):
            self.emit(F3(lhs.role, self.name_for(lhs.filler, "lhs"), d))
        else:
            parts = [self.name_for(a, "lhs") for a in lhs.args]
            acc = parts[0]
            for i, p in enumerate(parts[1:], 1):
                if i == len(parts) - 1:
                    self.emit(F2(acc, p, d))
                else:
                    n = self.new_name("_N")
                    self.fresh[n] = Conj(tuple(lhs.args[:i + 1]))
                    self.emit(F2(acc, p, n))
                    acc = n

    def ri(self, chain, sup):
        if len(chain) == 1:
            if chain[0] != sup:
                self.emit(RI1(chain[0], sup))
            return
        acc = chain[0]
        for i, r in enumerate(chain[1:], 1):
            if i == len(chain) - 1:
                self.emit(RI2(acc, r, sup))
            else:
                n = self.new_name("_R")
                self.fresh[n] = tuple(chain[:i + 1])
                self.emit(RI2(acc, r, n))
                acc = n


def _names(c):
    if isinstance(c, Name):
        yield c.name
    elif isinstance(c, Exists):
        yield c.role
        yield from _names(c.filler)
    elif isinstance(c, Conj):
        for a in c.args:
            yield from _names(a)


def normalize(tbox) -> NormalizedTBox:
    """Rewrite EL+ axioms into the six normal shapes, introducing fresh names."""
    n = _Normalizer(tbox)
    for ax in tbox:
        if isinstance(ax, GCI):
            n.gci(canonical(ax.lhs), canonical(ax.rhs))
        elif isinstance(ax, RI):
            n.ri(tuple(ax.chain), ax.sup)
        elif isinstance(ax, NORMAL_SHAPES):
            n.emit(ax)
        else:
            raise TypeError(f"not a TBox axiom: {ax!r}")
    concepts, roles = signature(n.out)
    return NormalizedTBox(n.out, n.fresh, concepts, roles)


def signature(axioms) -> tuple[frozenset, frozenset]:
    """BC_T (concept names plus TOP) and R_T of a list of normal axioms."""
    concepts, roles = {TOP}, set()
    for ax in axioms:
        if isinstance(ax, F1):
            concepts.update((ax.c, ax.d))
        elif isinstance(ax, F2):
            concepts.update((ax.c1, ax.c2, ax.d))
        elif isinstance(ax, F3):
            concepts.update((ax.c, ax.d))
            roles.add(ax.role)
        elif isinstance(ax, F4):
            concepts.update((ax.c, ax.d))
            roles.add(ax.role)
        elif isinstance(ax, RI1):
            roles.update((ax.r, ax.s))
        else:
            roles.update((ax.r1, ax.r2, ax.s))
    concepts.discard(BOTTOM)
    return frozenset(concepts), frozenset(roles)


# ---------------------------------------------------------------------------
# completion


@dataclass(frozen=True, order=True)
class Ind:
    name: str

    def __str__(self):
        return self.name


class Saturator:
    """Worklist implementation of CR1-CR7 over arbitrary nodes.

    Nodes are concept names or :class:`Ind` individuals.  New assertions can
    be added after saturation and :meth:`run` continues incrementally.
    """

    def __init__(self, axioms):
        self.f1 = defaultdict(list)
        self.f2 = defaultdict(list)
        self.f3 = defaultdict(list)
        self.f4 = defaultdict(list)
        self.ri1 = defaultdict(list)
        self.ri2_first = defaultdict(list)
        self.ri2_second = defaultdict(list)
        for ax in axioms:
            if isinstance(ax, F1):
                self.f1[ax.c].append(ax.d)
            elif isinstance(ax, F2):
                self.f2[ax.c1].append((ax.c2, ax.d))
                if ax.c2 != ax.c1:
                    self.f2[ax.c2].append((ax.c1, ax.d))
            elif isinstance(ax, F3):
                self.f3[(ax.role, ax.c)].append(ax.d)
            elif isinstance(ax, F4):
                self.f4[ax.c].append((ax.role, ax.d))
            elif isinstance(ax, RI1):
                self.ri1[ax.r].append(ax.s)
            elif isinstance(ax, RI2):
                self.ri2_first[ax.r1].append((ax.r2, ax.s))
                self.ri2_second[ax.r2].append((ax.r1, ax.s))
            else:
                raise TypeError(f"not a normal axiom: {ax!r}")
        self.S = defaultdict(set)
        self.T = defaultdict(set)
        self.succ = defaultdict(set)   # (node, role) -> successors
        self.pred = defaultdict(set)   # (node, role) -> predecessors
        self.roles_in = defaultdict(set)  # node -> roles with an incoming edge
        self.queue = deque()

    def copy(self) -> Saturator:
        other = object.__new__(Saturator)
        for k in ("f1", "f2", "f3", "f4", "ri1", "ri2_first", "ri2_second"):
            setattr(other, k, getattr(self, k))
        other.S = defaultdict(set, {k: set(v) for k, v in self.S.items()})
        other.T = defaultdict(set, {k: set(v) for k, v in self.T.items()})
        other.succ = defaultdict(set, {k: set(v) for k, v in self.succ.items()})
        other.pred = defaultdict(set, {k: set(v) for k, v in self.pred.items()})
        other.roles_in = defaultdict(set, {k: set(v) for k, v in self.roles_in.items()})
        other.queue = deque(self.queue)
        return other

    def add_node(self, node, seeds=()):
        self.queue.append(("S", node, TOP))
        if not isinstance(node, Ind):
            self.queue.append(("S", node, node))
        for c in seeds:
            self.queue.append(("S", node, c))

    def add_concept(self, node, concept):
        self.queue.append(("S", node, TOP))
        self.queue.append(("S", node, concept))

    def add_edge(self, role, a, b):
        self.queue.append(("T", role, a, b))

    def run(self) -> Saturator:
        q = self.queue
        S, T = self.S, self.T
        while q:
            item = q.popleft()
            if item[0] == "S":
                _, c, d = item
                sc = S[c]
                if d in sc:
                    continue
                sc.add(d)
                for e in self.f1.get(d, ()):
                    q.append(("S", c, e))
                for other, e in self.f2.get(d, ()):
                    if other in sc:
                        q.append(("S", c, e))
                for r, e in self.f4.get(d, ()):
                    q.append(("T", r, c, e))
                    q.append(("S", e, TOP))
                    q.append(("S", e, e))
                for r in self.roles_in.get(c, ()):
                    es = self.f3.get((r, d), ())
                    if es or d == BOTTOM:
                        for b in self.pred[(c, r)]:
                            for e in es:
                                q.append(("S", b, e))
                            if d == BOTTOM:
                                q.append(("S", b, BOTTOM))
            else:
                _, r, c, d = item
                tr = T[r]
                if (c, d) in tr:
                    continue
                tr.add((c, d))
                self.succ[(c, r)].add(d)
                self.pred[(d, r)].add(c)
                self.roles_in[d].add(r)
                for d2 in S[d]:
                    for e in self.f3.get((r, d2), ()):
                        q.append(("S", c, e))
                if BOTTOM in S[d]:
                    q.append(("S", c, BOTTOM))
                for s in self.ri1.get(r, ()):
                    q.append(("T", s, c, d))
                for r2, s in self.ri2_first.get(r, ()):
                    for e in list(self.succ.get((d, r2), ())):
                        q.append(("T", s, c, e))
                for r1, s in self.ri2_second.get(r, ()):
                    for b in list(self.pred.get((c, r1), ())):
                        q.append(("T", s, b, d))
        return self


@dataclass
class ClassificationMaps:
    S: dict
    T: dict

    def subsumers(self, c) -> frozenset:
        return frozenset(self.S[c])


def classify(nt: NormalizedTBox) -> ClassificationMaps:
    """Least fixpoint of CR1-CR7 from the seeds S(C) = {C, TOP}, T(R) = {}."""
    sat = Saturator(nt.axioms)
    for c in sorted(nt.concepts):
        sat.add_node(c)
    sat.run()
    S = {c: frozenset(sat.S[c]) for c in sorted(sat.S) if not isinstance(c, Ind)}
    T = {r: frozenset(sat.T.get(r, ())) for r in sorted(nt.roles | set(sat.T))}
    return ClassificationMaps(S, T)


def bridge_chains(nt: NormalizedTBox) -> NormalizedTBox:
    """Add entailed axioms that let the reduced TBox follow mixed role chains.

    For r1 o r2 <= s and (C, D) in T(r2), an individual with an ABox r1-edge
    to a C-instance has an s-edge to an anonymous D-node.  Dropping the
    existential axioms loses that edge, so a fresh X with
    ``exists r1.C <= X`` and ``X <= exists s.D`` is added.  Both axioms
    follow from the TBox, so the extension is conservative.  Repeats until
    no chain yields a new pair; at most one X per (s, D).
    """
    chains = [ax for ax in nt.axioms if isinstance(ax, RI2)]
    if not chains:
        return nt
    axioms = list(nt.axioms)
    seen = set(axioms)
    fresh = dict(nt.fresh)
    taken = set(nt.concepts) | set(nt.roles) | set(fresh)
    bridge = {}
    counter = 0
    while True:
        sat = Saturator(axioms)
        for c in sorted(signature(axioms)[0]):
            sat.add_node(c)
        sat.run()
        added = False
        for ch in chains:
            for c, d in sorted(sat.T.get(ch.r2, ())):
                if (ch.s, d) not in bridge:
                    while True:
                        counter += 1
                        x = f"_B{counter}"
                        if x not in taken:
                            break
                    taken.add(x)
                    bridge[(ch.s, d)] = x
                    fresh[x] = Exists(ch.s, Name(d) if d != TOP else Top)
                    axioms.append(F4(x, ch.s, d))
                    seen.add(axioms[-1])
                    added = True
                ax = F3(ch.r1, c, bridge[(ch.s, d)])
                if ax not in seen:
                    seen.add(ax)
                    axioms.append(ax)
                    added = True
        if not added:
            break
    concepts, roles = signature(axioms)
    return NormalizedTBox(axioms, fresh, concepts, roles)


def subsumes(maps: ClassificationMaps, c: str, d: str) -> bool:
    if c not in maps.S:
        raise KeyError(f"unknown concept {c!r}")
    s = maps.S[c]
    return d in s or BOTTOM in s


def complete_tbox(nt: NormalizedTBox, maps: ClassificationMaps) -> list:
    """Normal axioms plus C ⊑ D for D ∈ S(C) and C ⊑ ∃R.D for (C,D) ∈ T(R)."""
    out = list(dict.fromkeys(nt.axioms))
    seen = set(out)
    for c in sorted(maps.S):
        for d in sorted(maps.S[c]):
            ax = F1(c, d)
            if d != c and d != TOP and ax not in seen:
                seen.add(ax)
                out.append(ax)
    for r in sorted(maps.T):
        for c, d in sorted(maps.T[r]):
            ax = F4(c, r, d)
            if ax not in seen:
                seen.add(ax)
                out.append(ax)
    return out


def reduce_tbox(completed) -> list:
    """Drop every axiom of the shape C ⊑ ∃R.D."""
    return [ax for ax in completed if not isinstance(ax, F4)]


def reduced_tbox(nt: NormalizedTBox, maps: ClassificationMaps) -> list:
    """Direct reduction: drop F4 axioms and add the S-derived subsumptions."""
    out = [ax for ax in dict.fromkeys(nt.axioms) if not isinstance(ax, F4)]
    seen = set(out)
    for c in sorted(maps.S):
        for d in sorted(maps.S[c]):
            ax = F1(c, d)
            if d != c and d != TOP and ax not in seen:
                seen.add(ax)
                out.append(ax)
    return out


# ---------------------------------------------------------------------------
# instances


@dataclass
class InstanceGraph:
    S: dict
    T: dict
    individuals: tuple

    def concept_instances(self) -> frozenset[Atom]:
        """C(a) for every concept name C (not TOP/BOTTOM) with C ∈ S(a)."""
        out = set()
        for a in self.individuals:
            for c in self.S.get(Ind(a), ()):
                if c not in (TOP, BOTTOM):
                    out.add(Atom(c, (a,)))
        return frozenset(out)

    def role_instances(self) -> frozenset[Atom]:
        out = set()
        for r, pairs in self.T.items():
            for x, y in pairs:
                if isinstance(x, Ind) and isinstance(y, Ind):
                    out.add(Atom(r, (x.name, y.name)))
        return frozenset(out)

    def instances(self) -> frozenset[Atom]:
        return self.concept_instances() | self.role_instances()

    def clashing(self) -> list[str]:
        return [a for a in self.individuals if BOTTOM in self.S.get(Ind(a), ())]


def instance_saturate(nt, abox, individuals=()) -> InstanceGraph:
    """Run the completion rules with one extra node per individual.

    ``abox`` is a sequence of unary/binary atoms; ``nt`` may be a
    NormalizedTBox or any list of normal axioms.
    """
    axioms = nt.axioms if isinstance(nt, NormalizedTBox) else list(nt)
    concepts = nt.concepts if isinstance(nt, NormalizedTBox) else signature(axioms)[0]
    sat = Saturator(axioms)
    for c in sorted(concepts):
        sat.add_node(c)
    inds = list(dict.fromkeys(list(individuals) + [x for a in abox for x in a.args]))
    for a in inds:
        sat.add_node(Ind(a))
    for a in abox:
        if a.arity == 1:
            sat.add_concept(Ind(a.args[0]), a.pred)
        else:
            sat.add_edge(a.pred, Ind(a.args[0]), Ind(a.args[1]))
    sat.run()
    return InstanceGraph(dict(sat.S), dict(sat.T), tuple(inds))


@dataclass(frozen=True)
class Consistency:
    consistent: bool
    witness: str | None = None

    def __bool__(self):
        return self.consistent


def check_ontology_consistency(nt, abox, individuals=()) -> Consistency:
    g = instance_saturate(nt, abox, individuals)
    bad = g.clashing()
    return Consistency(not bad, bad[0] if bad else None)
