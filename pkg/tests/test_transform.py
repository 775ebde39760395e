import re

import pytest
from hypothesis import given, settings, strategies as st

from hybridmknf.classifier import F1, F2, F3, F4, RI1, RI2, classify, normalize, reduced_tbox
from hybridmknf.core import BOTTOM, Atom
from hybridmknf.parser import parse_kb, parse_program, serialize
from hybridmknf.transform import (
    OntologyInconsistentError, build_combined, compile_rules, dname, double_rules, is_doubled, is_marker,
    nname, translate_ontology,
)

from kbgen import random_kb_text
from kbs import EX62, EX_PREL1

EX_PREL1_DOUBLED = """
p(X) :- not D^d(X), o(X).
p^d(X) :- not D(X), o^d(X).
E(X) :- not E^d(X), o(X).
E^d(X) :- not E(X), o^d(X), not N^E(X).
o(a).
o^d(a).
o(b).
o^d(b).
"""


def test_doubling_ex_prel1():
    kb = parse_kb(EX_PREL1)
    assert double_rules(kb.rules, kb.is_dl) == parse_program(EX_PREL1_DOUBLED)


def test_doubling_tags_and_markers():
    kb = parse_kb(EX_PREL1)
    out = double_rules(kb.rules, kb.is_dl)
    assert [r.tag for r in out] == ["user-2a", "user-2b.ii", "user-2a", "user-2b.i"] + ["user-2a", "user-2b.ii"] * 2
    marked = [r for r in out if any(is_marker(a.pred) for a in r.negative_body)]
    assert [str(r.head) for r in marked] == ["E^d(X)"]


def test_doubling_fact_and_positive_rule():
    assert double_rules(parse_program("o(a)."), lambda p: False) == parse_program("o(a). o^d(a).")
    got = double_rules(parse_program("h(a) :- b(a)."), lambda p: False)
    assert got == parse_program("h(a) :- b(a). h^d(a) :- b^d(a).")


def test_doubling_guard_skip_flag():
    kb = parse_kb(EX_PREL1)
    out = double_rules(kb.rules, kb.is_dl, skip_guards=True)
    assert str(out[1]) == "p^d(X) :- not D(X), o(X)."


def test_translate_ex_prel1():
    kb = parse_kb(EX_PREL1)
    nt = normalize(kb.tbox)
    got = translate_ontology(reduced_tbox(nt, classify(nt)), kb.abox, kb.individuals)
    want = parse_program("""
        C(b). C^d(b) :- not N^C(b).
        D(X) :- C(X). D^d(X) :- C^d(X), not N^D(X).
        N^E(X) :- C(X). N^C(X) :- E(X).
    """)
    assert got == want
    assert [r.tag for r in got] == ["a1", "a1", "c1", "c1", "i2", "i2"]


def test_translate_empty_and_rejects_f4():
    assert translate_ontology([], []) == []
    with pytest.raises(Exception):
        translate_ontology([F4("C", "R", "D")], [])


def test_translate_schemas():
    red = [F2("A", "B", "C"), F3("r", "A", "B"), RI1("r", "s"), RI2("r", "s", "t"),
           F1("A", BOTTOM), F3("r", "B", BOTTOM)]
    rules = translate_ontology(red, [Atom("r", ("a", "b"))])
    text = serialize(rules)
    for line in [
        "r(a,b).", "r^d(a,b) :- not N^r(a,b).",
        "C(X) :- A(X), B(X).", "C^d(X) :- A^d(X), B^d(X), not N^C(X).",
        "B(X) :- r(X,Y), A(Y).", "B^d(X) :- r^d(X,Y), A^d(Y), not N^B(X).",
        "s(X,Y) :- r(X,Y).", "s^d(X,Y) :- r^d(X,Y), not N^s(X,Y).",
        "t(X,Z) :- r(X,Y), s(Y,Z).", "t^d(X,Z) :- r^d(X,Y), s^d(Y,Z), not N^t(X,Z).",
        "N^A(X).", "N^B(Y) :- r(X,Y).", "N^r(X,Y) :- B(Y).",
    ]:
        assert line in text.splitlines(), line


def test_build_combined_rejects_inconsistent_ontology():
    with pytest.raises(OntologyInconsistentError) as e:
        build_combined(parse_kb("%tbox\nC <= bot.\n%abox\nC(a).\n"))
    assert e.value.exit_code == 5


def test_build_combined_ex_prel1_is_union():
    kb = parse_kb(EX_PREL1)
    prog = build_combined(kb)
    assert prog.user_rules == parse_program(EX_PREL1_DOUBLED)
    assert len(prog.ontology_rules) == 6
    assert prog.predicates()["E"] == ("E^d", "N^E")
    assert prog.predicates()["p"] == ("p^d", None)


def test_build_combined_empty_ontology():
    kb = parse_kb("%rules\np(a) :- not q(a).\n")
    prog = build_combined(kb)
    assert prog.rules == double_rules(kb.rules, kb.is_dl)


def test_compile_rules_bare_program():
    prog = compile_rules(parse_program("p(a) :- not q(a)."))
    assert len(prog) == 2 and prog.constants == ("a",)


# one schema per tag; compiled names are written as in the text syntax
SCHEMAS = {
    "a1": [r"\w+\(\w+\)\.", r"\w+\^d\(\w+\) :- not N\^\w+\(\w+\)\."],
    "a2": [r"\w+\(\w+,\w+\)\.", r"\w+\^d\(\w+,\w+\) :- not N\^\w+\(\w+,\w+\)\."],
    "c1": [r"\w+\(X\) :- \w+\(X\)\.", r"\w+\^d\(X\) :- \w+\^d\(X\), not N\^\w+\(X\)\."],
    "c2": [r"\w+\(X\) :- \w+\(X\), \w+\(X\)\.", r"\w+\^d\(X\) :- \w+\^d\(X\), \w+\^d\(X\), not N\^\w+\(X\)\."],
    "c3": [r"\w+\(X\) :- \w+\(X,Y\)(, \w+\(Y\))?\.",
           r"\w+\^d\(X\) :- \w+\^d\(X,Y\)(, \w+\^d\(Y\))?, not N\^\w+\(X\)\."],
    "r1": [r"\w+\(X,Y\) :- \w+\(X,Y\)\.", r"\w+\^d\(X,Y\) :- \w+\^d\(X,Y\), not N\^\w+\(X,Y\)\."],
    "r2": [r"\w+\(X,Z\) :- \w+\(X,Y\), \w+\(Y,Z\)\.",
           r"\w+\^d\(X,Z\) :- \w+\^d\(X,Y\), \w+\^d\(Y,Z\), not N\^\w+\(X,Z\)\."],
    "i1": [r"N\^\w+\(X\)\."],
    "i2": [r"N\^\w+\(X\) :- \w+\(X\)\."],
    "i3": [r"N\^\w+\(Y\) :- \w+\(X,Y\)\.", r"N\^\w+\(X,Y\)( :- \w+\(Y\))?\."],
}


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_translation_schema_conformance(seed):
    kb = parse_kb(random_kb_text(seed, rules=False))
    try:
        prog = build_combined(kb)
    except OntologyInconsistentError:
        return
    for r in prog.ontology_rules:
        text = str(r)
        assert any(re.fullmatch(p, text) for p in SCHEMAS[r.tag]), (r.tag, text)
        if r.tag.startswith("i"):
            assert not is_doubled(r.head.pred)
        assert not (is_marker(r.head.pred) and r.head.pred.endswith("^d"))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_doubling_size_and_markers(seed):
    kb = parse_kb(random_kb_text(seed))
    out = double_rules(kb.rules, kb.is_dl)
    assert len(out) == 2 * len(kb.rules)
    markers = sum(1 for r in out for a in r.negative_body if is_marker(a.pred))
    assert markers == sum(1 for r in kb.rules if kb.is_dl(r.head.pred))
    for r in out:
        if any(is_marker(a.pred) for a in r.negative_body):
            assert r.tag == "user-2b.i"


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_translation_size_linear(seed):
    kb = parse_kb(random_kb_text(seed, rules=False))
    try:
        prog = build_combined(kb)
    except OntologyInconsistentError:
        return
    rules = prog.ontology_rules
    top_facts = 2 * len(kb.individuals)
    assert len([r for r in rules if r.tag in ("a1", "a2")]) <= 2 * len(kb.abox) + top_facts
    assert len([r for r in rules if r.tag[0] in "cr"]) <= 2 * len(prog.reduced)
    bottoms = sum(1 for ax in prog.reduced if getattr(ax, "d", None) == BOTTOM)
    assert len([r for r in rules if r.tag[0] == "i"]) <= 2 * bottoms


def test_names():
    assert dname("E") == "E^d" and nname("E") == "N^E"
    assert is_doubled("E^d") and is_marker("N^E") and not is_doubled("E")


def test_ex62_program_shape():
    prog = build_combined(parse_kb(EX62))
    text = serialize(prog.ontology_rules).splitlines()
    assert "D(X) :- R(X,Y), C(Y)." in text
    assert not any(r.tag == "i1" for r in prog.rules)
