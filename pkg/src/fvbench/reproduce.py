"""Desk-scale reproduction suites: rank behaviour of the classic graph
families, the arithmetic matrices M_A, and reduction tables for sum-like
operations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from fvbench.corpus import standard_corpus
from fvbench.fv import check_smoothness, synthesize_fv_table, validate_fv_table
from fvbench.hankel import build_MA, build_truncation_grid, build_truncations, periodicity_bound_check, profile_from_truncation, rank_profile
from fvbench.properties import (
    EVENS, ODDS, ExplicitFinite, PowersOfTwo, Squares, UltimatelyPeriodic, cliques, cocliques, paths,
)
from fvbench.structures import GRAPHS
from fvbench.transduction import enumerate_sumlike, lookup


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def clique_ranks() -> Check:
    sets = [EVENS, Squares(), ExplicitFinite({2, 3, 5})]
    ts = build_truncations([cliques(a) for a in sets], lookup("disjoint-union"), 8,
                           family=["cliques"], full_upto=6)
    profs = [profile_from_truncation(t, [4, 6, 8]) for t in ts]
    ok = all(p.ranks == [2, 2, 2] for p in profs)
    return Check("cliques under disjoint union: rank 2", ok, "; ".join(f"{p.property_name} {p.ranks}" for p in profs))


def coclique_ranks() -> Check:
    p = rank_profile(cocliques(Squares()), lookup("disjoint-union"), [4, 8, 12, 16], family=["edgeless"], full_upto=4)
    return Check("edgeless graphs of square size: rank grows", p.strictly_increasing, f"ranks {p.ranks}")


def sumlike_path_ranks() -> Check:
    bad = []
    ops = enumerate_sumlike(GRAPHS, GRAPHS)
    grid = build_truncation_grid([paths(Squares()), paths(PowersOfTwo())], ops, 8,
                                 family=["paths", "copaths"], full_upto=6)
    for op, ts in zip(ops, grid):
        for t in ts:
            p = profile_from_truncation(t, [6, 8])
            if not p.stabilized:
                bad.append(f"{op.name}/{t.property_name} {p.ranks}")
    return Check("paths under every sum-like op: rank equal at 6 and 8", not bad,
                 f"{len(ops)} ops" + (": " + ", ".join(bad) if bad else ""))


def bridge_path_ranks() -> Check:
    a = Squares()
    p = rank_profile(paths(a), lookup("bridge-union"), [6, 10, 14], family=["labeled-paths"])
    ma = [len(build_MA(a, n, start=1).row_classes()) for n in (6, 10, 14)]
    ok = p.strictly_increasing and p.indices == ma
    return Check("square paths under bridge union: rank grows, rows match M_A", ok,
                 f"ranks {p.ranks}, index {p.indices}, M_A index {ma}")


def ksum_clique_ranks() -> Check:
    p = rank_profile(cliques(Squares()), lookup("k-sum"), [4, 5, 6, 7, 8], family=["labeled-cliques"], full_upto=6)
    r = p.ranks
    ok = r[2] == r[3] == r[4]
    return Check("square cliques under 1-sum: rank stable from n=6", ok, f"ranks {r}")


PERIODIC_SETS = [
    EVENS,
    ODDS,
    UltimatelyPeriodic(3, 2, {0}, {1}),
    ExplicitFinite({2, 3, 5}).as_periodic(),
    UltimatelyPeriodic(1, 3, {0, 2}, {0}),
]


def periodic_sets() -> Check:
    out = []
    ok = True
    for a in PERIODIC_SETS:
        bound = a.threshold + a.period
        n = 2 * bound + 4
        r, r2 = build_MA(a, n).rank(), build_MA(a, n + 8).rank()
        good = r <= bound and r == r2 and periodicity_bound_check(a, n)
        ok &= good
        out.append(f"{a.name}: {r}<={bound}")
    return Check("ultimately periodic: bounded, stable rank", ok, "; ".join(out))


def growing_sets() -> Check:
    out = []
    ok = True
    for a in (Squares(), PowersOfTwo()):
        r = [build_MA(a, n).rank() for n in (8, 16, 32)]
        ok &= r[0] < r[1] < r[2]
        out.append(f"{a.name} {r}")
    return Check("squares and powers of two: rank grows", ok, "; ".join(out))


def fv_smoothness() -> Check:
    failures = []
    for opname in ("disjoint-union", "complement-union"):
        op = lookup(opname)
        for frag, qs, mods in (("FOL", (1, 2, 3), ()), ("MSOL", (1, 2), ()),
                               ("CFOL", (1, 2, 3), (2,)), ("CMSOL", (1, 2, 3), (2,))):
            for q in qs:
                if not check_smoothness(frag, q, mods, op, 4).passed:
                    failures.append(f"{opname}/{frag}/{q}")
    return Check("sum-like ops are smooth", not failures, ", ".join(failures) or "all pass")


def fv_tables() -> Check:
    failures = []
    for opname in ("disjoint-union", "complement-union"):
        op = lookup(opname)
        for name, phi in standard_corpus():
            t = synthesize_fv_table(phi, op, 4)
            if not validate_fv_table(t)[0]:
                failures.append(f"{opname}/{name}")
    return Check("reduction tables validate", not failures, ", ".join(failures) or "all validate")


SUITES: dict[str, list[Callable[[], Check]]] = {
    "thm31": [clique_ranks, coclique_ranks, sumlike_path_ranks, bridge_path_ranks, ksum_clique_ranks],
    "lemma31": [periodic_sets, growing_sets],
    "fv-examples": [fv_smoothness, fv_tables],
}


def run_suite(name: str) -> list[Check]:
    return [check() for check in SUITES[name]]
