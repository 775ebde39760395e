"""Compute well-founded MKNF models bottom-up and test consistency.

Run from the repository root: python3 demos/03_fixpoint.py
"""

from pathlib import Path

from hybridmknf import (
    alternating_fixpoint, alternating_fixpoint_d, consistency_check, greatest_unfounded_set, ground_doubled,
    ground_kb, mknf_model, parse_kb,
)

KB_DIR = Path(__file__).parent / "kb"


def show(atoms):
    return "{" + ", ".join(sorted(map(str, atoms))) + "}"


# the alternating fixpoint: P collects what is true, N what is still possible
g = ground_kb(parse_kb((KB_DIR / "ex_prel1.kb").read_text()))
trace = alternating_fixpoint(g)
for i, (p, n) in enumerate(zip(trace.P, trace.N)):
    print(f"P_{i} = {show(p)}")
    print(f"N_{i} = KA minus {show(g.ka - n)}")

# read literally, E(b) becomes true although the ontology refutes it,
# so the consistency test rejects this KB
print(consistency_check(g, trace))

# two small KBs that are inconsistent for different reasons
for name in ("k1.kb", "k2.kb"):
    g = ground_kb(parse_kb((KB_DIR / name).read_text()))
    print(name, consistency_check(g, alternating_fixpoint(g)))

# the doubled computation gives the model directly and keeps going on
# inconsistent input, listing atoms that are both true and false
model, trace_d, verdict = mknf_model(parse_kb((KB_DIR / "ex62.kb").read_text()))
print("true:", show(model.true))
print("undefined:", show(model.undefined))
print("consistent:", bool(verdict))

# each N-step removes exactly the greatest unfounded set of the previous step
gd = ground_doubled(parse_kb((KB_DIR / "double2.kb").read_text()))
trace_d = alternating_fixpoint_d(gd)
for i in range(len(trace_d.N) - 1):
    U = greatest_unfounded_set(gd, trace_d.P[i], gd.ka - trace_d.N[i])
    print(f"U_{i} = {show(U)}", U == gd.ka - trace_d.N[i + 1])
