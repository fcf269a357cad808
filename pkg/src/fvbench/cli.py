"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
errors, unknown names, vocabulary mismatches and exceeded bounds.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fvbench.corpus import standard_corpus
from fvbench.enumeration import BoundError
from fvbench.fv import (
    SmoothnessFailure, check_representative_independence, check_smoothness, synthesize_fv_table, theorem44_suite,
    validate_fv_table,
)
from fvbench.hankel import build_MA, periodicity_bound_check, rank_profile, truncation_stats
from fvbench.io import format_structure, read_op
from fvbench.logic.parser import FormulaSyntaxError, parse_sentence
from fvbench.logic.syntax import Fragment, to_text
from fvbench.logic.types import TypeBoundError
from fvbench.properties import UltimatelyPeriodic, ExplicitFinite, parse_property, parse_setspec
from fvbench.reproduce import SUITES, run_suite
from fvbench.structures import GRAPHS, Vocabulary, VocabularyError
from fvbench.transduction import SchemeError, UnknownOperation, enumerate_sumlike, lookup


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    property: str | None = None
    op: str | None = None
    op_file: str | None = None
    fragment: str | None = None
    q: int | None = None
    moduli: list[int] = field(default_factory=list)
    schedule: list[int] = field(default_factory=list)
    max_size: int | None = None
    no_empty: bool = False
    family: list[str] = field(default_factory=list)
    full_upto: int | None = None
    seed: int = 0
    emit: str = "csv"
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        data = json.loads(text)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValueError(f"bad experiment config: {exc}") from None


def _ints(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(x) for x in text.split(",") if x.strip()]


def _config(args: argparse.Namespace) -> ExperimentConfig:
    extra = {k: v for k, v in vars(args).items()
             if k in ("set", "start", "sentence", "formula_file", "suite", "source", "target", "extra_property")
             and v is not None}
    return ExperimentConfig(
        command=args.command,
        property=getattr(args, "property", None),
        op=getattr(args, "op", None),
        op_file=getattr(args, "op_file", None),
        fragment=getattr(args, "fragment", None),
        q=getattr(args, "q", None),
        moduli=_ints(args.moduli),
        schedule=_ints(args.schedule),
        max_size=args.max_size,
        no_empty=args.no_empty,
        family=[f for f in (getattr(args, "family", None) or "").split(",") if f],
        full_upto=getattr(args, "full_upto", None),
        seed=args.seed,
        emit=args.emit,
        out=args.out,
        extra=extra,
    )


def _op(cfg: ExperimentConfig):
    if cfg.op_file:
        return read_op(cfg.op_file)
    if not cfg.op:
        raise UsageError("one of --op or --op-file is required")
    return lookup(cfg.op)


def _schedule(cfg: ExperimentConfig, default: list[int]) -> list[int]:
    sched = cfg.schedule or default
    if cfg.max_size is not None:
        sched = [n for n in sched if n <= cfg.max_size]
    if not sched:
        raise UsageError("empty schedule")
    if any(a >= b for a, b in zip(sched, sched[1:])):
        raise UsageError("schedule must be strictly increasing")
    return sched


def _csv(header: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- commands -----------------------------------------------------------------

def cmd_rank(cfg: ExperimentConfig) -> tuple[str, int]:
    op = _op(cfg)
    if not cfg.property:
        raise UsageError("--property is required")
    p = parse_property(cfg.property, op.target)
    if p.vocabulary != op.target:
        raise VocabularyError(f"{op.name} produces {op.target.describe()}, property is over {p.vocabulary.describe()}")
    sched = _schedule(cfg, [2, 3, 4])
    prof = rank_profile(p, op, sched, family=cfg.family, full_upto=cfg.full_upto, include_empty=not cfg.no_empty)
    last = prof.truncations[-1]
    if cfg.emit == "matrix":
        return last.matrix.to_text() + "\n", 0
    if cfg.emit == "json":
        classes = [[last.labels[i].code.hex() for i in members] for members in last.matrix.row_classes()]
        doc = {"property": p.name, "op": op.name, "verdict": prof.verdict(),
               "entries": [{"n": n, "rank": r, "index": i} for n, r, i in prof.entries],
               "classes": classes}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", 0
    rows = [[n, r, i, int(k > 0 and prof.ranks[k - 1] == r)] for k, (n, r, i) in enumerate(prof.entries)]
    return _csv(["n", "rank", "index", "stabilized"], rows), 0


def cmd_index(cfg: ExperimentConfig) -> tuple[str, int]:
    return cmd_rank(cfg)


def cmd_ma(cfg: ExperimentConfig) -> tuple[str, int]:
    spec = cfg.extra.get("set")
    if not spec:
        raise UsageError("--set is required")
    a = parse_setspec(spec)
    start = cfg.extra.get("start", 0)
    sched = _schedule(cfg, [8, 16, 32])
    if isinstance(a, ExplicitFinite):
        a = a.as_periodic()
    rows = []
    code = 0
    for n in sched:
        m = build_MA(a, n, start)
        rank, index = truncation_stats(m, f"M_A {a.name}")
        bound = ""
        if isinstance(a, UltimatelyPeriodic):
            ok = periodicity_bound_check(a, n)
            bound = int(ok)
            code |= 0 if ok else 1
        rows.append([n, rank, index, bound])
    if cfg.emit == "matrix":
        return build_MA(a, sched[-1], start).to_text() + "\n", code
    if cfg.emit == "json":
        doc = {"set": a.name, "entries": [dict(zip(["n", "rank", "index", "bound_ok"], r)) for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", code
    return _csv(["n", "rank", "index", "bound_ok"], rows), code


def _fragment(cfg: ExperimentConfig, default: str = "FOL") -> Fragment:
    try:
        return Fragment((cfg.fragment or default).upper())
    except ValueError:
        raise UsageError(f"unknown fragment {cfg.fragment!r}") from None


def cmd_smooth(cfg: ExperimentConfig) -> tuple[str, int]:
    op = _op(cfg)
    frag = _fragment(cfg)
    q = 2 if cfg.q is None else cfg.q
    n = cfg.max_size or 4
    mods = cfg.moduli or ([2] if frag.has_counting else [])
    r = check_smoothness(frag, q, mods, op, n, include_empty=not cfg.no_empty)
    lines = [f"op: {op.name}", f"fragment: {frag.value}", f"q: {q}",
             f"moduli: {','.join(map(str, sorted(r.moduli)))}", f"n: {n}", f"pairs: {r.pairs}",
             f"verdict: {'pass' if r.passed else 'fail'}"]
    if r.witness:
        for label, s in zip(("A1", "A2", "B1", "B2"), r.witness):
            lines.append(f"# {label}")
            lines.append(format_structure(s).rstrip())
    if cfg.emit == "json":
        doc = {"op": op.name, "fragment": frag.value, "q": q, "moduli": sorted(r.moduli), "n": n,
               "passed": r.passed, "witness": [format_structure(s) for s in r.witness] if r.witness else None}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", 0 if r.passed else 1
    return "\n".join(lines) + "\n", 0 if r.passed else 1


def _sentence(cfg: ExperimentConfig, vocabulary: Vocabulary):
    if cfg.extra.get("formula_file"):
        return parse_sentence(Path(cfg.extra["formula_file"]).read_text(), vocabulary)
    if cfg.extra.get("sentence"):
        return parse_sentence(cfg.extra["sentence"], vocabulary)
    raise UsageError("one of --sentence or --formula-file is required")


def cmd_fv_table(cfg: ExperimentConfig) -> tuple[str, int]:
    op = _op(cfg)
    phi = _sentence(cfg, op.target)
    n = cfg.max_size or 4
    frag = _fragment(cfg) if cfg.fragment else None
    try:
        t = synthesize_fv_table(phi, op, n, frag, cfg.q, cfg.moduli, include_empty=not cfg.no_empty)
    except SmoothnessFailure as exc:
        out = [f"refused: {exc}"]
        for label, s in zip(("A1", "A2", "B1", "B2"), exc.report.witness):
            out.append(f"# {label}")
            out.append(format_structure(s).rstrip())
        return "\n".join(out) + "\n", 1
    ok, counter = validate_fv_table(t, n, include_empty=not cfg.no_empty)
    independent = check_representative_independence(t, seed=cfg.seed)
    table = _csv(["type_a", "type_b", "bit"], t.rows())
    types = _csv(["type", "size", "representative"],
                 [[i, len(reps), reps[0].code.hex()] for i, reps in enumerate(t.representatives)])
    if cfg.out:
        Path(cfg.out).with_suffix(".types.csv").write_text(types)
        body = table
    else:
        body = table + "\n" + types
    head = (f"# sentence: {to_text(phi)}\n# fragment: {t.fragment.value} q={t.q} k={t.k}\n"
            f"# validated: {ok}\n# representative independence (seed {cfg.seed}): {independent}\n")
    if counter:
        head += f"# counterexample sizes: {counter[0].size}, {counter[1].size}\n"
    if t.associative is False:
        head += "# note: the operation is not associative on triples of size <= 3\n"
    return head + body, 0 if ok and independent else 1


def cmd_thm44(cfg: ExperimentConfig) -> tuple[str, int]:
    op = _op(cfg)
    frag = _fragment(cfg, "MSOL")
    q = 3 if cfg.q is None else cfg.q
    n = cfg.max_size or 4
    extra = [parse_property(x, op.target) for x in cfg.extra.get("extra_property", [])]
    sched = cfg.schedule or None
    r = theorem44_suite(op, frag, q, n, standard_corpus(op.target), extra, sched, cfg.moduli,
                        include_empty=not cfg.no_empty)

    def col(v):
        return "n/a" if v is None else ("pass" if v else "fail")

    rows = [[row.name, col(row.fv_tables), col(row.smooth),
             "stable" if row.rank_stable else "growing", "stable" if row.index_stable else "growing",
             " ".join(map(str, row.profile.ranks)), "ok" if row.consistent else "MISMATCH"]
            for row in r.rows]
    text = _csv(["sentence", "fv_tables", "smooth", "rank", "index", "ranks", "agreement"], rows)
    return text + f"# suite: {'pass' if r.passed else 'fail'}\n", 0 if r.passed else 1


def cmd_enumerate_ops(cfg: ExperimentConfig) -> tuple[str, int]:
    source = Vocabulary.parse(cfg.extra["source"]) if cfg.extra.get("source") else GRAPHS
    target = Vocabulary.parse(cfg.extra["target"]) if cfg.extra.get("target") else GRAPHS
    ops = enumerate_sumlike(source, target)
    rows = []
    for op in ops:
        s = op.scheme
        rels = "; ".join(f"{name}({','.join(v)}): {to_text(f)}" for name, v, f in s.relations)
        rows.append([op.name, to_text(s.domain), rels])
    if cfg.emit == "json":
        return json.dumps([dict(zip(["name", "domain", "relations"], r)) for r in rows], indent=2) + "\n", 0
    return _csv(["name", "domain", "relations"], rows) + f"# {len(ops)} operations\n", 0


def cmd_reproduce(cfg: ExperimentConfig) -> tuple[str, int]:
    suite = cfg.extra.get("suite")
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; known: {', '.join(SUITES)}")
    checks = run_suite(suite)
    rows = [[c.name, "pass" if c.passed else "FAIL", c.detail] for c in checks]
    ok = all(c.passed for c in checks)
    return _csv(["check", "result", "detail"], rows), 0 if ok else 1


COMMANDS = {
    "rank": cmd_rank,
    "index": cmd_index,
    "ma": cmd_ma,
    "smooth": cmd_smooth,
    "fv-table": cmd_fv_table,
    "thm44": cmd_thm44,
    "enumerate-ops": cmd_enumerate_ops,
    "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schedule", help="comma-separated increasing sizes")
    common.add_argument("--max-size", type=int, help="size bound (caps the schedule)")
    common.add_argument("--no-empty", action="store_true", help="leave out the empty structure")
    common.add_argument("--moduli", help="comma-separated moduli for counting quantifiers")
    common.add_argument("--emit", choices=["csv", "json", "matrix"], default="csv")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for representative re-sampling")
    common.add_argument("--save-config", help="also write the experiment config as JSON here")

    def op_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--op", help="built-in operation name")
        g.add_argument("--op-file", help="operation file")

    parser = argparse.ArgumentParser(prog="fvbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("rank", "index"):
        p = sub.add_parser(name, parents=[common], help="rank and index along a schedule")
        p.add_argument("--property", required=True, help="cliques:A, cocliques:A, paths:A, formula:FILE, sentence:TEXT")
        op_args(p)
        p.add_argument("--family", help="label families, e.g. cliques,paths")
        p.add_argument("--full-upto", type=int, help="all structures up to this size join the labels")
    p = sub.add_parser("ma", parents=[common], help="ranks of the arithmetic matrices i+j in A")
    p.add_argument("--set", required=True, help="squares, pow2, evens, finite:a|b, periodic:t,p,r|..,prefix")
    p.add_argument("--start", type=int, default=0)
    p = sub.add_parser("smooth", parents=[common], help="smoothness check")
    op_args(p)
    p.add_argument("--fragment", default="FOL")
    p.add_argument("--q", type=int)
    p = sub.add_parser("fv-table", parents=[common], help="synthesize and validate a reduction table")
    op_args(p)
    p.add_argument("--sentence")
    p.add_argument("--formula-file")
    p.add_argument("--fragment")
    p.add_argument("--q", type=int)
    p = sub.add_parser("thm44", parents=[common], help="four-way agreement over the sentence corpus")
    op_args(p)
    p.add_argument("--fragment", default="MSOL")
    p.add_argument("--q", type=int)
    p.add_argument("--extra-property", action="append", help="a property to include in the rank columns only")
    p = sub.add_parser("enumerate-ops", parents=[common], help="list all sum-like operations")
    p.add_argument("--source", help="vocabulary, e.g. 'relations=E:2; flags=simple'")
    p.add_argument("--target")
    p = sub.add_parser("reproduce", parents=[common], help="run a reproduction suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p = sub.add_parser("run", help="re-run a saved experiment config")
    p.add_argument("config", help="JSON file written by --save-config")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_json(Path(args.config).read_text())
            if cfg.command not in COMMANDS:
                raise UsageError(f"config names an unknown command {cfg.command!r}")
        else:
            cfg = _config(args)
            if args.save_config:
                Path(args.save_config).write_text(cfg.to_json() + "\n")
        text, code = COMMANDS[cfg.command](cfg)
    except (UsageError, UnknownOperation, VocabularyError, BoundError, TypeBoundError, SchemeError,
            FormulaSyntaxError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"fvbench: error: {msg}", file=sys.stderr)
        return 2
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
