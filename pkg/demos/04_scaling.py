"""Time the full pipeline as the ABox grows.

Builds a synthetic KB (20 concepts, 4 roles, 50 axioms, a few rules),
compiles it and answers 100 ground queries.  Doubling the ABox should
roughly double the time.  Run from the repository root:
python3 demos/04_scaling.py [largest ABox size]
"""

import random
import sys
import time

from hybridmknf import Atom, SLGEngine, build_combined, parse_kb


def synthetic(n_abox, seed=0):
    rng = random.Random(seed)
    concepts = [f"C{i}" for i in range(20)]
    roles = [f"r{i}" for i in range(4)]
    n_ind = max(1, n_abox // 4)
    shapes = ["{a} <= {b}.", "{a} and {b} <= {c}.", "exists {r}.{a} <= {b}.", "{a} <= exists {r}.{b}."]
    tbox = []
    for i in range(50):
        a, b, c = rng.sample(concepts, 3)
        tbox.append(shapes[i % 4].format(a=a, b=b, c=c, r=rng.choice(roles)))
    abox = []
    for _ in range(n_abox):
        if rng.random() < 0.6:
            abox.append(f"{rng.choice(concepts)}(i{rng.randrange(n_ind)}).")
        else:
            abox.append(f"{rng.choice(roles)}(i{rng.randrange(n_ind)},i{rng.randrange(n_ind)}).")
    rules = ["p(X) :- C0(X), not C1(X), o(X).", "q(X) :- p(X), not q2(X), o(X).", "q2(X) :- C3(X), not q(X), o(X)."]
    rules += [f"o(i{i})." for i in range(n_ind)]
    return "\n".join(["%tbox", *tbox, "%abox", *abox, "%rules", *rules]) + "\n", n_ind


largest = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
n = 500
while n <= largest:
    text, n_ind = synthetic(n)
    start = time.perf_counter()
    engine = SLGEngine(build_combined(parse_kb(text)))
    rng = random.Random(1)
    preds = [f"C{i}" for i in range(20)] + ["p", "q"]
    values = [engine.query_literal(Atom(rng.choice(preds), (f"i{rng.randrange(n_ind)}",))) for _ in range(100)]
    took = time.perf_counter() - start
    print(f"{n:6d} assertions  {took:6.2f}s  {engine.steps} steps  {values.count('true')} true answers")
    n *= 2
