"""Surface syntax for hybrid knowledge bases, queries and compiled programs.

A KB file has three sections, each optional::

    %tbox
    C <= D.                      # GCI
    C and E <= bot.              # disjointness
    A <= not B.                  # sugar for A and B <= bot
    exists r.C <= D.
    r o s <= t.                  # role chain
    %abox
    C(b).  r(a,b).
    %rules
    p(X) :- not D(X), o(X).
    o(a).

Variables in rules start with an upper-case letter or ``_``; every other
argument is an individual.  Whether a predicate is a DL-predicate depends
only on whether it occurs in the ``%tbox`` or ``%abox`` section.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass

from .core import (
    BOTTOM, TOP, Atom, Bottom, Conj, Exists, GCI, HybridKB, KBError, Literal, Name, RI, Rule,
    SafetyError, Top, Var, canonical, conjunction, populate_symbols, unsafe_variables,
)


class ParseError(KBError):
    exit_code = 2


class UnsupportedConstructorError(KBError):
    exit_code = 3


QUERY_PRED = "?query"

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>\#[^\n]*) |
    (?P<section>%[A-Za-z]+) |
    (?P<op>:-|<=|\?-|[(),.]) |
    (?P<ident>(?:N\^)?[A-Za-z0-9_][A-Za-z0-9_]*(?:\^d)?)
    """,
    re.VERBOSE,
)

_ALC_ONLY = {"or", "forall", "some", "only"}
_CONCEPT_KEYWORDS = {"and", "exists", "not", "o", TOP, BOTTOM} | _ALC_ONLY


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


def _is_variable(name: str) -> bool:
    return name[0].isupper() or name[0] == "_"


class _Parser:
    def __init__(self, text, compiled=False):
        self.toks = tokenize(text)
        self.i = 0
        self.compiled = compiled

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        raise cls(msg, tok.line, tok.col)

    def ident(self, what="identifier") -> Token:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        if "^" in t.text and not self.compiled:
            self.error(f"reserved name {t.text!r}")
        return self.advance()

    # -- TBox ----------------------------------------------------------------

    def concept(self):
        parts = [self.conj_item()]
        while self.at("and"):
            self.advance()
            parts.append(self.conj_item())
        if self.at("or"):
            self.error("unsupported constructor 'or' (not in EL+)", cls=UnsupportedConstructorError)
        if len(parts) == 1:
            return parts[0]
        for p, tok in parts:
            if p is Bottom:
                self.error("'bot' may only appear as a whole side of an axiom", tok)
        return conjunction(p for p, _ in parts), parts[0][1]

    def conj_item(self):
        t = self.tok
        if t.kind == "ident" and t.text in _ALC_ONLY:
            self.error(f"unsupported constructor {t.text!r} (not in EL+)", cls=UnsupportedConstructorError)
        if self.at("not"):
            self.error("unsupported constructor: negation inside a concept", cls=UnsupportedConstructorError)
        if self.at("("):
            self.advance()
            c, _ = self.concept()
            self.expect(")")
            return c, t
        if self.at(TOP):
            self.advance()
            return Top, t
        if self.at(BOTTOM):
            self.advance()
            return Bottom, t
        if self.at("exists"):
            self.advance()
            role = self.ident("role name")
            self.expect(".")
            filler, ftok = self.conj_item()
            if filler is Bottom:
                self.error("'bot' may only appear as a whole side of an axiom", ftok)
            return Exists(role.text, filler), t
        name = self.ident("concept name")
        if name.text in _CONCEPT_KEYWORDS:
            self.error(f"unexpected keyword {name.text!r}", name)
        return Name(name.text), t

    def tbox_statement(self):
        start = self.tok
        # role chain r o s <= t
        if (self.tok.kind == "ident" and self.toks[self.i + 1].text == "o"
                and self.tok.text not in _CONCEPT_KEYWORDS):
            chain = [self.ident("role name").text]
            while self.at("o"):
                self.advance()
                chain.append(self.ident("role name").text)
            self.expect("<=")
            sup = self.ident("role name").text
            self.expect(".")
            return ("ri", tuple(chain), sup, start)
        lhs, _ = self.concept()
        self.expect("<=")
        if self.at("not"):
            self.advance()
            rhs, rtok = self.conj_item() if not self.at("(") else self.concept()
            if rhs is Bottom or rhs is Top:
                self.error("negated 'top'/'bot' is not supported", rtok, UnsupportedConstructorError)
            self.expect(".")
            # A <= not B  ~>  A and B <= bot
            return ("gci", conjunction([lhs, rhs]), Bottom, start)
        rhs, _ = self.concept()
        if self.at("not"):
            self.error("unsupported constructor: negation inside a concept", cls=UnsupportedConstructorError)
        self.expect(".")
        return ("gci", lhs, rhs, start)

    # -- atoms and rules -----------------------------------------------------

    def term(self):
        t = self.ident("term")
        if "^" in t.text:
            self.error("reserved name used as a term", t)
        return Var(t.text) if _is_variable(t.text) else t.text

    def atom(self) -> tuple[Atom, Token]:
        t = self.ident("predicate")
        if t.text in ("not", TOP, BOTTOM):
            self.error(f"unexpected keyword {t.text!r}", t)
        args = []
        if self.at("("):
            self.advance()
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
            self.expect(")")
        return Atom(t.text, tuple(args)), t

    def literal(self) -> Literal:
        if self.at("not"):
            self.advance()
            a, _ = self.atom()
            return Literal(a, False)
        a, _ = self.atom()
        return Literal(a, True)

    def rule(self) -> tuple[Rule, Token]:
        head, t = self.atom()
        body = []
        if self.at(":-"):
            self.advance()
            body.append(self.literal())
            while self.at(","):
                self.advance()
                body.append(self.literal())
        self.expect(".")
        return Rule(head, tuple(body)), t

    def abox_statement(self):
        a, t = self.atom()
        self.expect(".")
        if a.arity not in (1, 2):
            self.error("ABox assertions must be unary or binary", t)
        if any(isinstance(x, Var) for x in a.args):
            self.error("variables are not allowed in ABox assertions", t)
        if a.pred in _CONCEPT_KEYWORDS:
            self.error(f"unexpected keyword {a.pred!r}", t)
        return a, t


# ---------------------------------------------------------------------------
# public entry points


def parse_kb(text: str) -> HybridKB:
    """Parse KB text; raises ParseError, UnsupportedConstructorError or SafetyError."""
    p = _Parser(text)
    section = None
    raw_tbox, abox, rules = [], [], []
    while p.tok.kind != "eof":
        t = p.tok
        if t.kind == "section":
            section = t.text[1:].lower()
            if section not in ("tbox", "abox", "rules"):
                p.error(f"unknown section {t.text!r}")
            p.advance()
            continue
        if section is None:
            p.error("statement outside of a %tbox/%abox/%rules section")
        if section == "tbox":
            raw_tbox.append(p.tbox_statement())
        elif section == "abox":
            abox.append(p.abox_statement())
        else:
            rules.append(p.rule())
    return _assemble(raw_tbox, abox, rules)


def _assemble(raw_tbox, abox, rules) -> HybridKB:
    roles = set()
    for kind, *rest in raw_tbox:
        if kind == "ri":
            chain, sup, _ = rest
            roles.update(chain)
            roles.add(sup)
        else:
            for side in rest[:2]:
                roles.update(_roles_of(side))
    roles.update(a.pred for a, _ in abox if a.arity == 2)
    binary = roles | {l.atom.pred for r, _ in rules for l in (Literal(r.head), *r.body) if l.atom.arity == 2}
    known_concepts = {a.pred for a, _ in abox if a.arity == 1}
    known_concepts.update(l.atom.pred for r, _ in rules for l in (Literal(r.head), *r.body) if l.atom.arity == 1)
    ambiguous = []
    for kind, *rest in raw_tbox:
        if kind == "gci":
            lhs, rhs, _ = rest
            if isinstance(lhs, Name) and isinstance(rhs, Name):
                ambiguous.append({lhs.name, rhs.name})
            else:
                for side in (lhs, rhs):
                    known_concepts.update(_concepts_of(side))
    # A <= B between bare names is a role inclusion when linked (possibly through
    # other such axioms) to a known role; otherwise it is a concept inclusion.
    changed = True
    while changed:
        changed = False
        for names in ambiguous:
            if names & binary and not names <= binary and not names & known_concepts:
                binary.update(names)
                changed = True

    tbox = []
    for kind, *rest in raw_tbox:
        if kind == "ri":
            chain, sup, _ = rest
            tbox.append(RI(chain, sup))
            continue
        lhs, rhs, tok = rest
        if isinstance(lhs, Name) and isinstance(rhs, Name):
            names = {lhs.name, rhs.name}
            if names & binary:
                if not names <= binary:
                    raise KBError(f"{lhs} <= {rhs}: mixes a role with a concept", tok.line, tok.col)
                roles.update(names)
                tbox.append(RI((lhs.name,), rhs.name))
                continue
        if lhs is Bottom or rhs is Top:
            continue
        tbox.append(GCI(canonical(lhs), canonical(rhs)))

    concepts = set()
    for ax in tbox:
        if isinstance(ax, GCI):
            for side in (ax.lhs, ax.rhs):
                concepts.update(_concepts_of(side))
    concepts.update(a.pred for a, _ in abox if a.arity == 1)
    clash = concepts & roles
    if clash:
        raise KBError(f"names used both as concept and role: {', '.join(sorted(clash))}")

    kb = HybridKB(tuple(tbox), tuple(a for a, _ in abox), tuple(r for r, _ in rules))
    populate_symbols(kb)
    for r, tok in rules:
        for atom in (r.head, *(l.atom for l in r.body)):
            want = 1 if atom.pred in concepts else 2 if atom.pred in roles else None
            if want is not None and atom.arity != want:
                raise KBError(f"DL-predicate {atom.pred} used with arity {atom.arity}", tok.line, tok.col)
        bad = unsafe_variables(r, kb.symbols.is_dl)
        if bad:
            raise SafetyError(
                f"rule is not DL-safe, variables {', '.join(map(str, bad))} occur in no positive non-DL atom",
                bad, tok.line, tok.col)
    return kb


def _roles_of(c):
    if isinstance(c, Exists):
        yield c.role
        yield from _roles_of(c.filler)
    elif isinstance(c, Conj):
        for a in c.args:
            yield from _roles_of(a)


def _concepts_of(c):
    if isinstance(c, Name):
        yield c.name
    elif isinstance(c, Exists):
        yield from _concepts_of(c.filler)
    elif isinstance(c, Conj):
        for a in c.args:
            yield from _concepts_of(a)


def parse_program(text: str) -> list[Rule]:
    """Parse bare rule text, including compiled names such as ``E^d`` and ``N^E``.

    ``#tag:`` comments written by :func:`serialize` are not needed to re-parse.
    """
    p = _Parser(text, compiled=True)
    rules = []
    while p.tok.kind != "eof":
        if p.tok.kind == "section":
            if p.tok.text.lower() != "%rules":
                p.error("only a %rules section is allowed here")
            p.advance()
            continue
        rules.append(p.rule()[0])
    return rules


def parse_query(text: str, kb: HybridKB | None = None) -> Rule:
    """Parse a conjunctive query into a rule ``?query(X...) :- body``.

    With a KB, the query is checked for DL-safety and unknown predicates
    produce a warning (they are treated as non-DL and always false).
    """
    p = _Parser(text, compiled=kb is None)
    if p.at("?-"):
        p.advance()
    body = [p.literal()]
    while p.at(","):
        p.advance()
        body.append(p.literal())
    if p.at("."):
        p.advance()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after query")
    variables = list(dict.fromkeys(v for l in body for v in l.atom.variables()))
    q = Rule(Atom(QUERY_PRED, tuple(variables)), tuple(body))
    if kb is not None:
        known = set(kb.symbols.names("predicate"))
        for l in body:
            if l.atom.pred not in known:
                warnings.warn(f"unknown predicate {l.atom.pred!r} in query; it has no answers", stacklevel=2)
        bad = unsafe_variables(q, kb.symbols.is_dl)
        if bad:
            raise SafetyError(
                f"query is not DL-safe, variables {', '.join(map(str, bad))} occur in no positive non-DL atom",
                bad)
    return q


def parse_atom(text: str) -> Atom:
    p = _Parser(text, compiled=True)
    a, _ = p.atom()
    if p.at("."):
        p.advance()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after atom")
    return a


# ---------------------------------------------------------------------------
# serialization

_PLAIN = re.compile(r'[^\s"=]+')
_FIELD = re.compile(r'(\w+)=("(?:[^"\\]|\\.)*"|\S+)')


def _q(value) -> str:
    text = str(value)
    return text if _PLAIN.fullmatch(text) else json.dumps(text, ensure_ascii=False)


def record(kind: str, **fields) -> str:
    """One structured line: ``kind key=value ...`` with a stable field order."""
    return " ".join([kind] + [f"{k}={_q(v)}" for k, v in fields.items()])


def read_records(text: str) -> list[tuple[str, dict]]:
    """Inverse of :func:`record` for every non-empty line of ``text``."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        fields = {}
        for k, v in _FIELD.findall(rest):
            fields[k] = json.loads(v) if v.startswith('"') else v
        out.append((kind, fields))
    return out


def _atom_key(a: Atom):
    return (a.pred, tuple(map(str, a.args)))


def _rules_text(rules, tags) -> list[str]:
    out = []
    for r in rules:
        line = str(r)
        if tags and r.tag:
            line += f"  #tag: {r.tag}"
        out.append(line)
    return out


def serialize(obj, fmt: str = "text", tags: bool = False) -> str:
    """Render a program, KB, model, classification or normal TBox.

    ``text`` output is the surface syntax (programs and KBs re-parse to the
    same object); ``structured`` output is line-oriented ``key=value``
    records readable with :func:`read_records`.
    """
    from .classifier import NORMAL_SHAPES, ClassificationMaps
    from .transform import DoubledProgram

    if fmt not in ("text", "structured"):
        raise ValueError(f"unknown format {fmt!r}")
    structured = fmt == "structured"
    lines: list[str] = []

    if isinstance(obj, DoubledProgram) or (isinstance(obj, (list, tuple)) and all(isinstance(r, Rule) for r in obj)):
        rules = list(obj)
        if structured:
            for i, r in enumerate(rules):
                lines.append(record("rule", index=i, tag=r.tag or "-", text=str(r)))
        else:
            lines = _rules_text(rules, tags or isinstance(obj, DoubledProgram))
    elif isinstance(obj, HybridKB):
        if structured:
            for ax in obj.tbox:
                lines.append(record("axiom", text=str(ax)))
            for a in obj.abox:
                lines.append(record("assertion", text=f"{a}."))
            for r in obj.rules:
                lines.append(record("rule", text=str(r)))
        else:
            lines = ["%tbox", *map(str, obj.tbox), "%abox", *(f"{a}." for a in obj.abox),
                     "%rules", *map(str, obj.rules)]
    elif isinstance(obj, ClassificationMaps):
        for c in sorted(obj.S):
            subs = sorted(obj.S[c])
            lines.append(record("S", concept=c, subsumers=",".join(subs)) if structured
                         else f"S({c}) = {{{', '.join(subs)}}}")
        for r in sorted(obj.T):
            pairs = sorted(obj.T[r])
            if structured:
                lines.append(record("T", role=r, pairs=",".join(f"{c}:{d}" for c, d in pairs)))
            else:
                lines.append(f"T({r}) = {{{', '.join(f'({c},{d})' for c, d in pairs)}}}")
    elif hasattr(obj, "true") and hasattr(obj, "undefined") and hasattr(obj, "false"):
        bad = getattr(obj, "inconsistent", frozenset())
        for name in ("true", "undefined", "false"):
            atoms = sorted(getattr(obj, name), key=_atom_key)
            if structured:
                for a in atoms:
                    fields = {"atom": str(a), "value": name}
                    if a in bad:
                        fields["inconsistent"] = "yes"
                    lines.append(record("value", **fields))
            else:
                lines.append(f"{name}:")
                lines += [f"  {a}" + ("  # inconsistent" if a in bad else "") for a in atoms]
    elif isinstance(obj, (list, tuple)) and all(isinstance(a, NORMAL_SHAPES) for a in obj):
        if structured:
            lines = [record("axiom", shape=type(a).__name__, text=str(a)) for a in obj]
        else:
            lines = ["%tbox", *map(str, obj)]
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(lines) + ("\n" if lines else "")
