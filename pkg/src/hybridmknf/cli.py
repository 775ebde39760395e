"""Command-line front end: ``hybridmknf <command> KB [args]``.

Exit codes: 0 ok/true, 1 query false, 2 parse error, 3 safety or
constructor error, 4 undefined, 5 ontology inconsistent, 6 MKNF-inconsistency.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from .classifier import bridge_chains, check_ontology_consistency, classify, normalize, reduced_tbox
from .core import KBError, ground_program
from .parser import parse_atom, parse_kb, parse_query, record, serialize
from .slg import DEFAULT_BUDGET, FALSE, STRATEGIES, TRUE, UNDEFINED, SLGEngine
from .transform import OntologyInconsistentError, build_combined, double_atom
from .wfs import (
    GroundKB, Ontology, alternating_fixpoint, consistency_check, greatest_unfounded_set, ground_doubled,
    mknf_model,
)

OK, FALSE_EXIT, PARSE_ERROR, SAFETY_ERROR, UNDEFINED_EXIT, ONTOLOGY_INCONSISTENT, MKNF_INCONSISTENT = 0, 1, 2, 3, 4, 5, 6
VALUE_EXIT = {TRUE: OK, FALSE: FALSE_EXIT, UNDEFINED: UNDEFINED_EXIT}


class Session:
    """Loaded KB plus lazily built compiled program and SLG engine."""

    def __init__(self, kb, args, out):
        self.kb = kb
        self.args = args
        self.out = out
        self.strategy = args.strategy
        self.trace = False
        self._program = None
        self._engine = None

    @property
    def structured(self):
        return self.args.format == "structured"

    def emit(self, line=""):
        print(line, file=self.out)

    def program(self):
        if self._program is None:
            self._program = build_combined(self.kb, skip_guards=getattr(self.args, "skip_guards", False))
        return self._program

    def engine(self):
        if self._engine is None or self._engine.strategy != self.strategy:
            self._engine = SLGEngine(self.program(), strategy=self.strategy, budget=self.args.budget)
        return self._engine

    def query(self, text: str) -> int:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            q = parse_query(text, self.kb)
            eng = self.engine()
            answers = eng.answer_query(q)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if not q.head.args:
            value = answers[0][1] if answers else FALSE
            self.emit(record("answer", value=value) if self.structured else value)
            code = VALUE_EXIT[value]
        else:
            for sub, value in answers:
                if self.structured:
                    self.emit(record("answer", **{str(k): v for k, v in sub.items()}, value=value))
                else:
                    binding = ", ".join(f"{k}={v}" for k, v in sub.items())
                    self.emit(f"{binding}: {value}")
            if not answers and not self.structured:
                self.emit("no answers")
            values = {v for _, v in answers}
            code = OK if TRUE in values else UNDEFINED_EXIT if values else FALSE_EXIT
        if self.trace:
            self.emit(eng.export().rstrip("\n"))
        return code

    def probe(self, text: str) -> int:
        atom = parse_atom(text)
        eng = self.engine()
        flagged = eng.probe(atom)
        value, dvalue = eng.value(atom), eng.value(double_atom(atom))
        if self.structured:
            self.emit(record("probe", atom=atom, value=value, doubled=dvalue, flagged="yes" if flagged else "no"))
        else:
            self.emit(f"{atom}: {value}, {double_atom(atom)}: {dvalue}"
                      + (" -> MKNF-inconsistency flagged" if flagged else " -> not flagged"))
        return MKNF_INCONSISTENT if flagged else OK


# ---------------------------------------------------------------------------
# commands


def cmd_classify(s: Session) -> int:
    nt = normalize(s.kb.tbox)
    s.emit(serialize(classify(nt), s.args.format).rstrip("\n"))
    return OK


def cmd_reduce(s: Session) -> int:
    nt = bridge_chains(normalize(s.kb.tbox))
    s.emit(serialize(reduced_tbox(nt, classify(nt)), s.args.format).rstrip("\n"))
    return OK


def cmd_translate(s: Session) -> int:
    s.emit(serialize(s.program(), s.args.format, tags=True).rstrip("\n"))
    return OK


def _ontology_check(s: Session):
    kb = s.kb
    verdict = check_ontology_consistency(normalize(kb.tbox), kb.abox, kb.individuals)
    if not verdict:
        raise OntologyInconsistentError(verdict.witness)


def _verdict_line(s: Session, verdict) -> None:
    if s.structured:
        s.emit(record("verdict", consistent="yes" if verdict else "no", reason=verdict.reason or "-"))
    else:
        s.emit("consistent" if verdict else f"MKNF-inconsistent: {verdict.reason}")


def _trace_lines(s: Session, trace, label):
    for i, (p, n) in enumerate(zip(trace.P, trace.N)):
        P = ", ".join(sorted(map(str, p)))
        N = ", ".join(sorted(map(str, n)))
        if s.structured:
            s.emit(record("step", trace=label, index=i, P=P, N=N))
        else:
            s.emit(f"{label} P_{i} = {{{P}}}")
            s.emit(f"{label} N_{i} = {{{N}}}")


def cmd_model(s: Session) -> int:
    _ontology_check(s)
    model, trace_d, verdict = mknf_model(s.kb, s.args.cap)
    s.emit(serialize(model, s.args.format).rstrip("\n"))
    if s.args.trace:
        _trace_lines(s, trace_d, "doubled")
    if s.args.unfounded:
        gd = ground_doubled(s.kb, s.args.cap)
        for i, (p, n) in enumerate(zip(trace_d.P, trace_d.N)):
            gus = greatest_unfounded_set(gd, p, gd.ka - n, cap=s.args.ufs_cap, exhaustive=False)
            U = ", ".join(sorted(map(str, gus)))
            s.emit(record("unfounded", index=i, U=U) if s.structured else f"U_{i} = {{{U}}}")
    _verdict_line(s, verdict)
    return OK if verdict else MKNF_INCONSISTENT


def cmd_check(s: Session) -> int:
    _ontology_check(s)
    kb = s.kb
    g = GroundKB(ground_program(kb.rules, kb.individuals, s.args.cap), Ontology.from_kb(kb))
    trace = alternating_fixpoint(g)
    verdict = consistency_check(g, trace)
    if s.args.trace:
        _trace_lines(s, trace, "original")
    _verdict_line(s, verdict)
    return OK if verdict else MKNF_INCONSISTENT


def cmd_query(s: Session) -> int:
    code = s.query(s.args.query)
    if s.args.probe:
        q = parse_query(s.args.query, s.kb)
        flagged = False
        for l in q.body:
            if l.positive and l.atom.is_ground():
                flagged |= s.probe(str(l.atom)) == MKNF_INCONSISTENT
        if flagged:
            return MKNF_INCONSISTENT
    return code


REPL_HELP = """commands:
  <query>              evaluate a conjunctive query, e.g. p(X), o(X)
  :probe A             check whether A is true while A^d is false
  :trace on|off        dump the SLG forest after each query
  :strategy NAME       switch to local or batched scheduling
  :quit                leave"""


def cmd_repl(s: Session) -> int:
    interactive = sys.stdin.isatty()
    last = OK
    while True:
        if interactive:
            print("?- ", end="", file=s.out, flush=True)
        line = sys.stdin.readline()
        if not line:
            return last
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if line in (":quit", ":q", ":exit"):
                return last
            if line == ":help":
                s.emit(REPL_HELP)
            elif line.startswith(":probe"):
                last = s.probe(line[len(":probe"):].strip())
            elif line.startswith(":trace"):
                arg = line[len(":trace"):].strip()
                if arg not in ("on", "off"):
                    raise KBError("usage: :trace on|off")
                s.trace = arg == "on"
            elif line.startswith(":strategy"):
                arg = line[len(":strategy"):].strip()
                if arg not in STRATEGIES:
                    raise KBError(f"unknown strategy {arg!r}")
                s.strategy = arg
            elif line.startswith(":"):
                raise KBError(f"unknown command {line.split()[0]}; try :help")
            else:
                last = s.query(line)
        except KBError as e:
            print(f"error: {e}", file=sys.stderr)
            last = e.exit_code


COMMANDS = {
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "translate": cmd_translate,
    "model": cmd_model,
    "check": cmd_check,
    "query": cmd_query,
    "repl": cmd_repl,
}


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("kb", help="knowledge base file (- for standard input)")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--strategy", choices=STRATEGIES, default="local",
                        help="SLG scheduling strategy (default: local)")
    common.add_argument("--cap", type=_positive, default=None,
                        help="maximum number of ground rule instances (default: unlimited)")
    common.add_argument("--ufs-cap", type=_positive, default=16,
                        help="maximum atoms for brute-force unfounded-set search (default: 16)")
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help=f"SLG step budget (default: {DEFAULT_BUDGET})")
    common.add_argument("--skip-guards", action="store_true",
                        help="keep fact-only non-DL predicates undoubled in doubled rule bodies")

    ap = argparse.ArgumentParser(prog="hybridmknf", description="Well-founded reasoning for hybrid EL+ knowledge bases.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="print the S and T maps")
    sub.add_parser("reduce", parents=[common], help="print the reduced TBox")
    sub.add_parser("translate", parents=[common], help="print the compiled doubled program")
    m = sub.add_parser("model", parents=[common], help="bottom-up well-founded MKNF model")
    m.add_argument("--trace", action="store_true", help="dump the doubled fixpoint trace")
    m.add_argument("--unfounded", action="store_true", help="print the greatest unfounded set per step")
    c = sub.add_parser("check", parents=[common], help="consistency test on the original KB")
    c.add_argument("--trace", action="store_true", help="dump the fixpoint trace")
    q = sub.add_parser("query", parents=[common], help="answer one query top-down")
    q.add_argument("query")
    q.add_argument("--probe", action="store_true", help="also probe ground positive atoms for inconsistency")
    sub.add_parser("repl", parents=[common], help="interactive query loop")
    return ap


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        text = _read(args.kb)
    except OSError as e:
        print(f"error: cannot read {args.kb}: {e.strerror}", file=sys.stderr)
        return PARSE_ERROR
    try:
        kb = parse_kb(text)
        return COMMANDS[args.command](Session(kb, args, out))
    except KBError as e:
        print(f"error: {args.kb}:{e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
