"""Tabled top-down evaluation under the well-founded semantics.

The engine implements variant tabling with delayed negative literals:

* every call is canonicalized (variables renamed ``?0``, ``?1``, ...) and
  owns one table; answers are ground atoms;
* a conditional answer carries one or more delay lists, each a frozenset of
  delay elements ``("+", table key, atom)`` or ``("-", atom)``;
* negative literals on incomplete tables suspend; a stuck strongly connected
  component delays them, and later simplification removes delays whose truth
  becomes known;
* completed components undergo answer completion, which discards conditional
  answers whose only support is a positive loop through other conditional
  answers.
"""

from __future__ import annotations

import bisect
import itertools
import warnings
from collections import defaultdict, deque

from .core import Atom, Literal, Rule, Var
from .transform import DoubledProgram, double_atom, program_constants

TRUE, UNDEFINED, FALSE = "true", "undefined", "false"
STRATEGIES = ("local", "batched")
DEFAULT_BUDGET = 50_000_000


class FlounderError(RuntimeError):
    """A non-ground negative literal was selected (the input was not DL-safe)."""


class BudgetExceeded(RuntimeError):
    pass


def negate(value: str) -> str:
    return {TRUE: FALSE, FALSE: TRUE}.get(value, UNDEFINED)


# ---------------------------------------------------------------------------
# terms


def _deref(t, subst):
    while type(t) is Var and t in subst:
        t = subst[t]
    return t


def _unify_args(xs, ys, subst):
    """Extend ``subst`` so that xs and ys agree; None on clash."""
    for x, y in zip(xs, ys):
        x, y = _deref(x, subst), _deref(y, subst)
        if x == y:
            continue
        if type(x) is Var:
            subst[x] = y
        elif type(y) is Var:
            subst[y] = x
        else:
            return None
    return subst


def _resolve(atom, subst):
    if not subst:
        return atom
    args = []
    for a in atom.args:
        while type(a) is Var and a in subst:
            a = subst[a]
        args.append(a)
    return Atom(atom.pred, tuple(args))


def _ground(atom) -> bool:
    for a in atom.args:
        if type(a) is Var:
            return False
    return True


def canonical(atom: Atom) -> Atom:
    """Rename the variables of ``atom`` to ``?0``, ``?1``, ... in order of occurrence."""
    names = None
    args = []
    for a in atom.args:
        if type(a) is Var:
            if names is None:
                names = {}
            v = names.get(a)
            if v is None:
                v = names[a] = Var(f"?{len(names)}")
            args.append(v)
        else:
            args.append(a)
    return atom if names is None else Atom(atom.pred, tuple(args))


def _match(call: Atom, ground: Atom, subst: dict):
    """Bind variables of ``call`` (under subst) to the ground atom's constants."""
    out = dict(subst)
    for x, c in zip(call.args, ground.args):
        x = _deref(x, out)
        if type(x) is Var:
            out[x] = c
        elif x != c:
            return None
    return out


# ---------------------------------------------------------------------------
# tables


class Answer:
    __slots__ = ("unconditional", "delays", "announced")

    def __init__(self):
        self.unconditional = False
        self.delays = set()
        self.announced = False  # consumers were told about a conditional version

    @property
    def live(self) -> bool:
        return self.unconditional or bool(self.delays)


class Table:
    __slots__ = ("key", "complete", "answers", "consumers", "waiters", "deps", "serial", "dfn")

    def __init__(self, key, serial):
        self.key = key
        self.serial = serial
        self.complete = False
        self.answers = {}
        self.consumers = []
        self.waiters = []
        self.deps = {}  # insertion-ordered, so traversal order is reproducible
        self.dfn = 0  # position on the completion stack while incomplete

    def live_answers(self):
        return [a for a, e in self.answers.items() if e.live]

    def value(self, atom) -> str:
        e = self.answers.get(atom)
        if e is None or not e.live:
            return FALSE
        return TRUE if e.unconditional else UNDEFINED


class Waiter:
    """A node suspended on the negative literal ``not atom``."""

    __slots__ = ("node", "atom", "rest", "active")

    def __init__(self, node, atom, rest):
        self.node = node
        self.atom = atom
        self.rest = rest
        self.active = True


class Node:
    __slots__ = ("table", "subst", "body", "delays")

    def __init__(self, table, subst, body, delays):
        self.table = table
        self.subst = subst
        self.body = body
        self.delays = delays


# ---------------------------------------------------------------------------
# clause store


class ClauseIndex:
    """Rules grouped by head predicate, with per-argument constant indexes."""

    def __init__(self, rules):
        self.by_pred = defaultdict(list)
        self.by_arg = defaultdict(list)   # (pred, pos, const) -> clauses
        self.var_at = defaultdict(list)   # (pred, pos) -> clauses with a variable there
        for r in rules:
            self.add(r)

    def add(self, rule: Rule):
        p = rule.head.pred
        self.by_pred[p].append(rule)
        for i, a in enumerate(rule.head.args):
            if type(a) is Var:
                self.var_at[(p, i)].append(rule)
            else:
                self.by_arg[(p, i, a)].append(rule)

    def remove_pred(self, pred):
        for r in self.by_pred.pop(pred, []):
            for i, a in enumerate(r.head.args):
                key = (pred, i) if type(a) is Var else (pred, i, a)
                bucket = (self.var_at if type(a) is Var else self.by_arg).get(key)
                if bucket and r in bucket:
                    bucket.remove(r)

    def candidates(self, call: Atom):
        p = call.pred
        best = None
        for i, a in enumerate(call.args):
            if type(a) is not Var:
                fixed = self.by_arg.get((p, i, a), ())
                free = self.var_at.get((p, i), ())
                if best is None or len(fixed) + len(free) < len(best[0]) + len(best[1]):
                    best = (fixed, free)
        if best is None:
            return self.by_pred.get(p, ())
        if not best[1]:
            return best[0]
        if not best[0]:
            return best[1]
        order = {id(r): k for k, r in enumerate(self.by_pred[p])}
        return sorted(list(best[0]) + list(best[1]), key=lambda r: order[id(r)])

    def predicates(self):
        return set(self.by_pred)


def _rename(rule: Rule, tag: int) -> Rule:
    """Prepare a rule for resolution.

    Clause variables get a private spelling so they never meet call
    variables, and the body is reordered positives first, which fixes the
    literal selection order.
    """
    body = tuple(l for l in rule.body if l.positive) + tuple(l for l in rule.body if not l.positive)
    rule = Rule(rule.head, body, rule.tag)
    vs = rule.variables()
    if not vs:
        return rule
    return rule.substitute({v: Var(f"{v.name}#{tag}") for v in vs})


# ---------------------------------------------------------------------------
# engine


class SLGEngine:
    """Evaluates goals against a fixed program, keeping one table space.

    ``strategy`` is ``local`` (depth-first, LIFO scheduling) or ``batched``
    (breadth-first, FIFO scheduling).
    """

    def __init__(self, program, constants=None, strategy: str = "local", budget: int = DEFAULT_BUDGET):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
        if isinstance(program, DoubledProgram):
            rules = list(program.rules)
            consts = program.constants if constants is None else constants
            self.doubled = True
            self.program = program
        else:
            rules = list(program)
            consts = constants
            self.doubled = False
            self.program = None
        self.rules = rules
        self.constants = tuple(program_constants(rules)) if consts is None else tuple(consts)
        extra = tuple(c for c in program_constants(rules) if c not in self.constants)
        self.constants += extra
        self.index = ClauseIndex(_rename(r, k) for k, r in enumerate(rules))
        self.strategy = strategy
        self.budget = budget
        self.steps = 0
        self.tables = {}
        self.work = deque()
        self.delay_index = defaultdict(list)
        self.events = deque()
        # completion stack: incomplete tables oldest first, cut into segments
        # that never depend on incomplete tables of lower segments
        self.stack = []
        self.seg_start = []
        self.seg_queued = []   # scheduled tasks owned by each segment
        self.seg_waiters = []  # suspended negative literals owned by each segment

    # -- scheduling --------------------------------------------------------

    @staticmethod
    def _owner(task) -> Table:
        return task[1] if task[0] == "expand" else task[1].table

    def _segment(self, dfn: int) -> int:
        starts = self.seg_start
        return len(starts) - 1 if dfn >= starts[-1] else bisect.bisect_right(starts, dfn) - 1

    def _push(self, task):
        dfn = (task[1] if task[0] == "expand" else task[1].table).dfn
        q = self.seg_queued
        q[-1 if dfn >= self.seg_start[-1] else self._segment(dfn)] += 1
        self.work.append(task)

    def _pop(self):
        task = self.work.pop() if self.strategy == "local" else self.work.popleft()
        dfn = (task[1] if task[0] == "expand" else task[1].table).dfn
        q = self.seg_queued
        q[-1 if dfn >= self.seg_start[-1] else self._segment(dfn)] -= 1
        return task

    def _tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"evaluation exceeded the step budget of {self.budget}")

    # -- tables ------------------------------------------------------------

    def _table(self, atom: Atom) -> Table:
        key = canonical(atom)
        t = self.tables.get(key)
        if t is None:
            t = Table(key, len(self.tables))
            self.tables[key] = t
            t.dfn = len(self.stack)
            self.stack.append(t)
            self.seg_start.append(t.dfn)
            self.seg_queued.append(0)
            self.seg_waiters.append([])
            self._push(("expand", t))
        return t

    def _expand(self, t: Table):
        goal = t.key
        for clause in self.index.candidates(goal):
            subst = _unify_args(clause.head.args, goal.args, {})
            if subst is None:
                continue
            self._push(("node", Node(t, subst, clause.body, frozenset())))

    # -- resolution --------------------------------------------------------

    def _process(self, node: Node):
        body = node.body
        if not body:
            self._new_answer(node.table, _resolve(node.table.key, node.subst), node.delays)
            return
        # clause bodies are stored positives first, so this is the leftmost
        # positive literal, or the leftmost negative one once none remain
        lit = body[0]
        rest = body[1:]
        atom = _resolve(lit.atom, node.subst)
        if lit.positive:
            t = self._table(atom)
            consumer = (node, atom, rest)
            if not t.complete:
                t.consumers.append(consumer)
                self._depend(node.table, t)
            for a, e in list(t.answers.items()):
                if e.unconditional:
                    self._deliver(consumer, t, a, True)
                elif e.delays:
                    self._deliver(consumer, t, a, False)
        else:
            if not _ground(atom):
                raise FlounderError(f"negative literal not {atom} selected while non-ground")
            t = self._table(atom)
            self._negative(node, atom, rest, t)

    def _depend(self, src, dst):
        if dst in src.deps:
            return
        src.deps[dst] = None
        if dst.complete:
            return
        k = self._segment(dst.dfn)
        if k < self._segment(src.dfn):
            # src now waits on an older segment: merge everything from there up
            self.seg_queued[k] = sum(self.seg_queued[k:])
            self.seg_waiters[k] = [w for ws in self.seg_waiters[k:] for w in ws]
            del self.seg_start[k + 1:], self.seg_queued[k + 1:], self.seg_waiters[k + 1:]

    def _deliver(self, consumer, t, answer, unconditional):
        node, call, rest = consumer
        subst = _match(call, answer, node.subst)
        if subst is None:
            return
        delays = node.delays if unconditional else node.delays | {("+", t.key, answer)}
        self._push(("node", Node(node.table, subst, rest, delays)))

    def _negative(self, node, atom, rest, t):
        e = t.answers.get(atom)
        if e is not None and e.unconditional:
            return
        if t.complete:
            if e is None or not e.live:
                self._push(("node", Node(node.table, node.subst, rest, node.delays)))
            else:
                self._push(("node", Node(node.table, node.subst, rest, node.delays | {("-", atom)})))
            return
        w = Waiter(node, atom, rest)
        t.waiters.append(w)
        self._depend(node.table, t)
        self.seg_waiters[self._segment(node.table.dfn)].append(w)

    # -- answers and simplification ---------------------------------------

    def _status(self, elem):
        if elem[0] == "-":
            t = self.tables.get(elem[1])
            if t is None:
                return None
            e = t.answers.get(elem[1])
            if e is not None and e.unconditional:
                return False
            if t.complete and (e is None or not e.live):
                return True
            return None
        t = self.tables[elem[1]]
        e = t.answers.get(elem[2])
        if e is not None and e.unconditional:
            return True
        if t.complete and (e is None or not e.live):
            return False
        return None

    def _new_answer(self, t: Table, atom: Atom, delays):
        if not _ground(atom):
            for g in self._groundings(atom):
                self._new_answer(t, g, delays)
            return
        kept = []
        for d in delays:
            s = self._status(d)
            if s is False:
                return
            if s is None:
                kept.append(d)
        e = t.answers.get(atom)
        if e is None:
            e = t.answers[atom] = Answer()
        if e.unconditional:
            return
        if not kept:
            self._make_unconditional(t, atom, e)
        else:
            dl = frozenset(kept)
            if dl in e.delays:
                return
            e.delays.add(dl)
            for d in dl:
                self.delay_index[d].append((t, atom, dl))
            if not e.announced:
                e.announced = True
                for c in list(t.consumers):
                    self._deliver(c, t, atom, False)
        self._propagate()

    def _groundings(self, atom):
        vs = list(dict.fromkeys(atom.variables()))
        for combo in itertools.product(self.constants, repeat=len(vs)):
            yield atom.substitute(dict(zip(vs, combo)))

    def _make_unconditional(self, t, atom, e):
        e.unconditional = True
        e.delays.clear()
        for c in list(t.consumers):
            self._deliver(c, t, atom, True)
        self.events.append((("+", t.key, atom), True))
        if t.key == atom:
            for w in t.waiters:
                w.active = False
            t.waiters.clear()
            self.events.append((("-", atom), False))

    def _dead(self, t, atom):
        """An answer of a complete table lost its last delay list."""
        self.events.append((("+", t.key, atom), False))
        if t.key == atom:
            self.events.append((("-", atom), True))

    def _propagate(self):
        while self.events:
            elem, truth = self.events.popleft()
            entries = self.delay_index.pop(elem, ())
            for t, atom, dl in entries:
                e = t.answers[atom]
                if dl not in e.delays:
                    continue
                e.delays.discard(dl)
                if truth:
                    rest = dl - {elem}
                    if not rest:
                        self._make_unconditional(t, atom, e)
                    elif rest not in e.delays:
                        e.delays.add(rest)
                        for d in rest:
                            self.delay_index[d].append((t, atom, rest))
                elif not e.live and t.complete:
                    self._dead(t, atom)

    # -- completion --------------------------------------------------------

    def _settle_top(self):
        """The top segment has no queued work, so it has derived all it can.

        Its suspended negative literals (all on tables inside the segment) are
        delayed; if there are none, the whole segment is completed.
        """
        waiting = [w for w in self.seg_waiters[-1] if w.active]
        self.seg_waiters[-1] = []
        if waiting:
            for w in waiting:
                w.active = False
                node = w.node
                self._push(("node", Node(node.table, node.subst, w.rest, node.delays | {("-", w.atom)})))
            return
        start = self.seg_start.pop()
        self.seg_queued.pop()
        self.seg_waiters.pop()
        seg = self.stack[start:]
        del self.stack[start:]
        self._complete(seg)

    def _complete(self, comp):
        for t in comp:
            t.complete = True
            t.consumers = []
        for t in comp:
            for atom, e in t.answers.items():
                if not e.live and e.announced:
                    self._dead(t, atom)
            if t.key.is_ground() and not t.answers.get(t.key, Answer()).live:
                self.events.append((("-", t.key), True))
        self._propagate()
        self._answer_completion(comp)
        for t in comp:
            waiters, t.waiters = t.waiters, []
            for w in waiters:
                if w.active:
                    w.active = False
                    self._push(("resume", w.node, w.atom, w.rest, t))

    def _answer_completion(self, comp):
        """Drop conditional answers of a just-completed component whose positive
        delays can only be justified through each other.

        Tables outside the component are complete and already answer-completed,
        so a positive delay on them counts as support whenever its answer is live.
        """
        members = {t.key for t in comp}
        while True:
            cond = [(t, a, e) for t in comp for a, e in t.answers.items() if e.delays and not e.unconditional]
            if not cond:
                return
            supported = set()
            changed = True
            while changed:
                changed = False
                for t, a, e in cond:
                    if (t.key, a) in supported:
                        continue
                    for dl in e.delays:
                        ok = True
                        for d in dl:
                            if d[0] != "+" or (d[1], d[2]) in supported:
                                continue
                            de = self.tables[d[1]].answers.get(d[2])
                            if de is None or not (de.unconditional or (d[1] not in members and de.delays)):
                                ok = False
                                break
                        if ok:
                            supported.add((t.key, a))
                            changed = True
                            break
            removed = False
            for t, a, e in cond:
                if (t.key, a) not in supported:
                    e.delays.clear()
                    self._dead(t, a)
                    removed = True
            self._propagate()
            if not removed:
                return

    # -- driver --------------------------------------------------------------

    def _drain(self):
        queued = self.seg_queued
        while True:
            while self.work:
                self._tick()
                task = self._pop()
                kind = task[0]
                if kind == "node":
                    self._process(task[1])
                elif kind == "expand":
                    self._expand(task[1])
                else:
                    _, node, atom, rest, t = task
                    self._negative(node, atom, rest, t)
                # eager completion as soon as the top segment runs out of work
                while queued and not queued[-1]:
                    self._settle_top()
            if not self.stack:
                return
            self._settle_top()

    def _run(self):
        self._drain()

    def evaluate(self, goal: Atom) -> Table:
        t = self._table(goal)
        self._run()
        return t

    # -- queries -------------------------------------------------------------

    def value(self, atom: Atom) -> str:
        if not atom.is_ground():
            raise ValueError(f"value() needs a ground atom, got {atom}")
        return self.evaluate(atom).value(atom)

    def known_predicate(self, pred: str) -> bool:
        return pred in self.index.by_pred

    def query_literal(self, literal) -> str:
        """Truth value of a ground literal over original predicates.

        In a doubled program ``not A`` is answered through ``A^d``.
        """
        if isinstance(literal, Atom):
            literal = Literal(literal, True)
        atom = literal.atom
        if not self.known_predicate(atom.pred):
            warnings.warn(f"unknown predicate {atom.pred!r}; it has no answers", stacklevel=2)
        if literal.positive:
            return self.value(atom)
        probe = double_atom(atom) if self.doubled else atom
        return negate(self.value(probe))

    def answer_query(self, query: Rule) -> list[tuple[dict, str]]:
        """All substitutions for the query head with value true or undefined, sorted."""
        body = query.body
        if self.doubled:
            body = tuple(l if l.positive else Literal(double_atom(l.atom), False) for l in body)
        pred = query.head.pred
        for l in body:
            if not self.known_predicate(l.atom.pred):
                warnings.warn(f"unknown predicate {l.atom.pred!r}; it has no answers", stacklevel=2)
        k = 0
        while f"{pred}#{k}" in self.index.by_pred:
            k += 1
        pred = f"{pred}#{k}"
        head = Atom(pred, query.head.args)
        self.index.add(_rename(Rule(head, body), -1 - k))
        try:
            goal = Atom(pred, tuple(Var(f"?{i}") for i in range(head.arity)))
            t = self.evaluate(goal)
            out = []
            for a in sorted(t.live_answers(), key=str):
                sub = {v: c for v, c in zip(query.head.args, a.args)}
                out.append((sub, t.value(a)))
            return out
        finally:
            self.index.remove_pred(pred)

    def probe(self, atom: Atom) -> bool:
        """True iff ``atom`` is true while its doubled copy is false."""
        return self.value(atom) == TRUE and self.value(double_atom(atom)) == FALSE

    def export(self) -> str:
        lines = []
        for key in sorted(self.tables, key=str):
            t = self.tables[key]
            lines.append(f"table {key} {'complete' if t.complete else 'incomplete'}")
            for a in sorted(t.answers, key=str):
                e = t.answers[a]
                if e.unconditional:
                    lines.append(f"  answer {a} true")
                elif e.delays:
                    dls = sorted(
                        "{" + ", ".join(sorted(_fmt_delay(d) for d in dl)) + "}" for dl in e.delays
                    )
                    lines.append(f"  answer {a} undefined delays={' | '.join(dls)}")
            for d in sorted(t.deps, key=lambda x: str(x.key)):
                lines.append(f"  depends {d.key}")
        return "\n".join(lines) + ("\n" if lines else "")

    def answer_table(self) -> dict:
        """Ground atom -> value for every ground table in the forest."""
        out = {}
        for key, t in self.tables.items():
            if key.is_ground():
                out[key] = t.value(key)
            for a in t.live_answers():
                out.setdefault(a, t.value(a))
        return out


def _fmt_delay(d) -> str:
    return f"not {d[1]}" if d[0] == "-" else str(d[2])


# ---------------------------------------------------------------------------
# functional front end


def evaluate(program, goal: Atom, strategy: str = "local", **kw) -> SLGEngine:
    eng = SLGEngine(program, strategy=strategy, **kw)
    eng.evaluate(goal)
    return eng


def query_literal(program, literal, strategy: str = "local") -> str:
    return SLGEngine(program, strategy=strategy).query_literal(literal)


def answer_query(program, query: Rule, strategy: str = "local") -> list[tuple[dict, str]]:
    return SLGEngine(program, strategy=strategy).answer_query(query)


def inconsistency_probe(program, atom: Atom, strategy: str = "local") -> bool:
    return SLGEngine(program, strategy=strategy).probe(atom)


def export_forest(engine: SLGEngine) -> str:
    return engine.export()
