"""Compile a hybrid KB into one doubled rule program.

Walks the small running example through each stage: normal form,
classification, the reduced TBox, its rule translation and the doubled
user rules.  Run from the repository root: python3 demos/01_compile.py
"""

from pathlib import Path

from hybridmknf import build_combined, classify, double_rules, normalize, parse_kb, reduced_tbox, serialize

KB_DIR = Path(__file__).parent / "kb"

kb = parse_kb((KB_DIR / "ex_prel1.kb").read_text())

# the TBox is already in normal form, so normalization only collects names
nt = normalize(kb.tbox)
print("normal form:", ", ".join(map(str, nt.axioms)))

# saturation: S(C) lists the subsumers of C, T(R) the pairs (C, D) with C <= exists R.D
maps = classify(nt)
for c in sorted(nt.concepts):
    print(f"S({c}) = {{{', '.join(sorted(maps.S[c]))}}}")

# the reduced TBox keeps every axiom except existentials on the right
print("reduced:", ", ".join(map(str, reduced_tbox(nt, maps))))

# each user rule becomes two: one for truth, one (with ^d) for non-falsity.
# Only the rule whose head is a DL predicate gets the N^ marker.
print()
print("doubled user rules:")
print(serialize(double_rules(kb.rules, kb.is_dl)))

# the whole KB as one program; tags name the translation schema behind each rule
prog = build_combined(kb)
print("ontology rules:")
print(serialize(prog.ontology_rules, tags=True))
