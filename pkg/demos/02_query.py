"""Ask three-valued queries top-down with tabled resolution.

Run from the repository root: python3 demos/02_query.py
"""

from pathlib import Path

from hybridmknf import SLGEngine, build_combined, export_forest, inconsistency_probe, parse_atom, parse_kb, parse_query

KB_DIR = Path(__file__).parent / "kb"

# G(a) needs D(a), which only follows through the role edge R(a,b) and C(b)
kb = parse_kb((KB_DIR / "ex62.kb").read_text())
prog = build_combined(kb)
engine = SLGEngine(prog)
for goal in ("G(a)", "G(b)"):
    print(goal, "=", engine.query_literal(parse_atom(goal)))

# open queries return one answer per binding, each with its own truth value
print(engine.answer_query(parse_query("G(X), o(X)", kb)))

# the table space is reused across goals; export shows what was evaluated
print(export_forest(engine).splitlines()[:6])

# Q and R are disjoint but both asserted.  R(a) is true and its doubled
# copy false, which flags an MKNF-inconsistency; p(a) stays undefined
# because the clash does not spread to it.
kb = parse_kb((KB_DIR / "double2.kb").read_text())
prog = build_combined(kb)
engine = SLGEngine(prog)
for goal in ("Q(a)", "R(a)", "R^d(a)", "p(a)"):
    print(goal, "=", engine.value(parse_atom(goal)))
print("probe R(a):", inconsistency_probe(prog, parse_atom("R(a)")))

# both scheduling strategies reach the same answers
batched = SLGEngine(prog, strategy="batched")
print(all(batched.value(parse_atom(g)) == engine.value(parse_atom(g)) for g in ("Q(a)", "R(a)", "p(a)")))
