"""Random hybrid KB generator shared by the property and acceptance tests."""

from __future__ import annotations

import random

CONCEPTS = ["A", "B", "C", "D", "E", "F"]
ROLES = ["r", "s", "t"]
INDIVIDUALS = ["a", "b", "c", "d"]
RULE_PREDS = ["p", "q", "u"]


def random_concept(rng, concepts, roles, depth=0):
    k = rng.random()
    if depth < 2 and k < 0.2:
        return f"exists {rng.choice(roles)}.({random_concept(rng, concepts, roles, depth + 1)})"
    if depth < 2 and k < 0.35:
        return f"{random_concept(rng, concepts, roles, depth + 1)} and {rng.choice(concepts)}"
    if k < 0.4:
        return "top"
    return rng.choice(concepts)


def random_tbox(rng, n_concepts=6, n_roles=3, n_axioms=8, bottom=0.1, chains=True, chain_rate=0.07):
    concepts = CONCEPTS[:n_concepts]
    roles = ROLES[:n_roles]
    lines = []
    for _ in range(n_axioms):
        k = rng.random()
        if k < 0.1 and n_roles > 1:
            r, s = rng.sample(roles, 2)
            lines.append(f"{r} <= {s}.")
        elif chains and k < 0.1 + chain_rate:
            lines.append(f"{rng.choice(roles)} o {rng.choice(roles)} <= {rng.choice(roles)}.")
        else:
            lhs = random_concept(rng, concepts, roles)
            rhs = "bot" if rng.random() < bottom else random_concept(rng, concepts, roles)
            if lhs == "top" and rhs == "bot":
                rhs = rng.choice(concepts)
            lines.append(f"{lhs} <= {rhs}.")
    return lines


def random_rules(rng, n_concepts=6, n_roles=3, n_inds=4, n_rules=10, ground=False, dl=True):
    """Rules over concept/role atoms and non-DL predicates, kept DL-safe by o/1 guards."""
    concepts = CONCEPTS[:n_concepts] if dl else []
    roles = ROLES[:n_roles] if dl else []
    inds = INDIVIDUALS[:n_inds]
    unary = concepts + RULE_PREDS

    def atom(var_ok):
        if roles and rng.random() < 0.15:
            args = [rng.choice(["X", "Y"]) if var_ok and rng.random() < 0.6 else rng.choice(inds) for _ in range(2)]
            return f"{rng.choice(roles)}({args[0]},{args[1]})"
        arg = "X" if var_ok and rng.random() < 0.6 else rng.choice(inds)
        return f"{rng.choice(unary)}({arg})"

    lines = []
    for _ in range(rng.randint(1, n_rules)):
        var_ok = not ground
        head = atom(var_ok)
        body = [atom(var_ok) for _ in range(rng.randint(0, 3))]
        lits = [b if rng.random() < 0.5 else f"not {b}" for b in body]
        vars_ = sorted({v for v in ("X", "Y") if f"({v}" in head + "".join(lits) or f",{v}" in head + "".join(lits)})
        lits += [f"o({v})" for v in vars_]
        lines.append(f"{head} :- {', '.join(lits)}." if lits else f"{head}.")
    lines += [f"o({i})." for i in inds]
    return lines


def random_abox(rng, n_concepts=6, n_roles=3, n_inds=4, n_facts=5, role_rate=0.3):
    concepts = CONCEPTS[:n_concepts]
    roles = ROLES[:n_roles]
    inds = INDIVIDUALS[:n_inds]
    out = []
    for _ in range(n_facts):
        if roles and rng.random() < role_rate:
            out.append(f"{rng.choice(roles)}({rng.choice(inds)},{rng.choice(inds)}).")
        else:
            out.append(f"{rng.choice(concepts)}({rng.choice(inds)}).")
    return out


def random_kb_text(seed, tbox=True, abox=True, rules=True, **kw):
    rng = random.Random(seed)
    parts = []
    if tbox:
        parts += ["%tbox"] + random_tbox(rng, n_axioms=rng.randint(0, 6))
    if abox:
        parts += ["%abox"] + random_abox(rng, n_facts=rng.randint(0, 5))
    if rules:
        parts += ["%rules"] + random_rules(rng, **kw)
    return "\n".join(parts) + "\n"


def random_ontology_text(seed, n_concepts=3, n_roles=2, chain_rate=0.3, role_rate=0.5):
    """TBox plus ABox only, dense in role chains, existentials and ABox edges."""
    rng = random.Random(seed)
    lines = ["%tbox"] + random_tbox(rng, n_concepts, n_roles, n_axioms=rng.randint(2, 9), bottom=0.05,
                                    chain_rate=chain_rate)
    lines += ["%abox"] + random_abox(rng, n_concepts, n_roles, n_facts=rng.randint(1, 7), role_rate=role_rate)
    return "\n".join(lines) + "\n"


def perf_kb(n_abox, n_axioms=50, seed=0):
    """Synthetic KB with ``n_abox`` assertions over 20 concepts and 4 roles.

    Returns (text, number of individuals).  The axioms cycle through the
    normal shapes; the rules add a negative loop between q and q2.
    """
    rng = random.Random(seed)
    concepts = [f"C{i}" for i in range(20)]
    roles = [f"r{i}" for i in range(4)]
    n_ind = max(1, n_abox // 4)
    tbox = []
    for i in range(n_axioms):
        a, b, c = rng.sample(concepts, 3)
        r = rng.choice(roles)
        tbox.append([f"{a} <= {b}.", f"{a} and {b} <= {c}.", f"exists {r}.{a} <= {b}.",
                     f"{a} <= exists {r}.{b}.", f"{a} <= {b}."][i % 5])
    abox = []
    for _ in range(n_abox):
        if rng.random() < 0.6:
            abox.append(f"{rng.choice(concepts)}(i{rng.randrange(n_ind)}).")
        else:
            abox.append(f"{rng.choice(roles)}(i{rng.randrange(n_ind)},i{rng.randrange(n_ind)}).")
    rules = ["p(X) :- C0(X), not C1(X), o(X).", "q(X) :- p(X), not q2(X), o(X).", "q2(X) :- C3(X), not q(X), o(X)."]
    rules += [f"o(i{i})." for i in range(n_ind)]
    text = "%tbox\n" + "\n".join(tbox) + "\n%abox\n" + "\n".join(abox) + "\n%rules\n" + "\n".join(rules) + "\n"
    return text, n_ind


def random_tiny_kb_text(seed):
    """Ground KB over one individual, small enough for brute-force unfounded sets."""
    rng = random.Random(seed)
    tbox = rng.choice(["", "A <= B.", "A and B <= bot.", "A <= bot.", "B <= A."])
    preds = ["A", "B", "p", "q"]
    lines = []
    for _ in range(rng.randint(1, 4)):
        head = rng.choice(preds)
        body = [("not " if rng.random() < 0.5 else "") + rng.choice(preds) + "(a)" for _ in range(rng.randint(0, 2))]
        lines.append(f"{head}(a) :- {', '.join(body)}." if body else f"{head}(a).")
    return "%tbox\n" + tbox + "\n%rules\n" + "\n".join(lines) + "\n"
