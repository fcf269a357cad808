"""Acceptance criteria 1-11, one recorded pass/fail line each.

Lines are printed by the terminal summary hook in conftest. Each check
records its line before asserting, so failures are reported too.
"""

from __future__ import annotations

import time
from contextlib import contextmanager

from oracles import nx_disjoint_union, nx_hankel, nx_is_clique, nx_k_sum, span_rank, to_nx
from fvbench.corpus import standard_corpus
from fvbench.enumeration import enumerate_structures
from fvbench.fv import (
    check_smoothness, class_definability_check, corrupt, synthesize_fv_table, validate_fv_table,
)
from fvbench.hankel import (
    AUDIT, build_MA, build_truncation_grid, build_truncations, hankel_labels,
    periodicity_bound_check, profile_from_truncation, rank_profile, truncation_stats,
)
from fvbench.logic import evaluate
from fvbench.properties import (
    EVENS, ExplicitFinite, PowersOfTwo, Property, Squares, cliques, cocliques, formula_property,
    iso_closure_check, paths,
)
from fvbench.reproduce import PERIODIC_SETS
from fvbench.structures import GRAPHS, LABELED_GRAPHS
from fvbench.transduction import builtin_ops, enumerate_sumlike, lookup, transduce, translate

UNION = lookup("disjoint-union")
CO_UNION = lookup("complement-union")
CORPUS = standard_corpus()

# frozen from the elimination oracle (see test_frozen_values_match_the_oracle)
CLIQUE_RANK = 2
CLIQUE_RANK_NO_EMPTY = 0
COCLIQUE_SQUARE_RANKS = [5, 9, 13, 17]
KSUM_CLIQUE_RANKS = [2, 2, 2, 2, 2]

RESULTS: list[str] = []


@contextmanager
def criterion(number: int, name: str, budget: float | None):
    """Time the block; the block sets ``box["ok"]`` and ``box["detail"]``."""
    box = {"ok": False, "detail": ""}
    start = time.perf_counter()
    try:
        yield box
    finally:
        elapsed = time.perf_counter() - start
        in_time = budget is None or elapsed < budget
        verdict = "PASS" if box["ok"] and in_time else "FAIL"
        limit = "" if budget is None else f" (budget {budget:g} s)"
        RESULTS.append(f"criterion {number:2d} {verdict}  {name}: {box['detail']}  [{elapsed:.1f} s{limit}]")
        box["in_time"] = in_time


def _check(box):
    assert box["ok"], box["detail"]
    assert box["in_time"], "over the runtime budget"


def test_frozen_values_match_the_oracle():
    def is_clique(g):
        return g.number_of_nodes() > 0 and nx_is_clique(g) and g.number_of_nodes() in EVENS
    for n in (4, 6):
        labels = [to_nx(s) for s in hankel_labels(GRAPHS, n)]
        assert span_rank([sum(v << j for j, v in enumerate(r)) for r in nx_hankel(labels, nx_disjoint_union,
                                                                                 is_clique)]) == CLIQUE_RANK
        labels = [to_nx(s) for s in hankel_labels(GRAPHS, n, include_empty=False)]
        assert span_rank([sum(v << j for j, v in enumerate(r)) for r in nx_hankel(labels, nx_disjoint_union,
                                                                                 is_clique)]) == CLIQUE_RANK_NO_EMPTY

    def is_coclique(g):
        return g.number_of_nodes() in Squares() and g.number_of_nodes() > 0 and g.number_of_edges() == 0
    for n, expected in zip((4, 8, 12, 16), COCLIQUE_SQUARE_RANKS):
        labels = [to_nx(s) for s in hankel_labels(GRAPHS, n, family=["edgeless"], full_upto=4)]
        rows = nx_hankel(labels, nx_disjoint_union, is_coclique)
        assert span_rank([sum(v << j for j, v in enumerate(r)) for r in rows]) == expected

    def is_square_clique(g):
        return nx_is_clique(g) and g.number_of_nodes() in Squares()
    for n, expected in zip((4, 5), KSUM_CLIQUE_RANKS):
        labels = hankel_labels(LABELED_GRAPHS, n, include_empty=False)
        rows = [[int(is_square_clique(nx_k_sum(to_nx(a), a.constants[0], to_nx(b), b.constants[0]))) for b in labels]
                for a in labels]
        assert span_rank([sum(v << j for j, v in enumerate(r)) for r in rows]) == expected


def test_criterion_1_clique_ranks_are_constant():
    with criterion(1, "C_A under disjoint union has rank 2 at n=4,6,8", 5) as box:
        sets = [EVENS, Squares(), ExplicitFinite({2, 3, 5})]
        ts = build_truncations([cliques(a) for a in sets], UNION, 8, family=["cliques"], full_upto=6)
        ranks = [profile_from_truncation(t, [4, 6, 8]).ranks for t in ts]
        bare = [profile_from_truncation(t.without_empty(), [4, 6, 8]).ranks for t in ts]
        box["ok"] = all(r == [CLIQUE_RANK] * 3 for r in ranks) and all(r == [CLIQUE_RANK_NO_EMPTY] * 3 for r in bare)
        box["detail"] = f"ranks {ranks}, without the empty graph {bare}"
    _check(box)


def test_criterion_2_coclique_squares_rank_grows():
    with criterion(2, "co-cliques of square size: rank strictly increasing", 30) as box:
        p = rank_profile(cocliques(Squares()), UNION, [4, 8, 12, 16], family=["edgeless"], full_upto=4)
        box["ok"] = p.ranks == COCLIQUE_SQUARE_RANKS and p.strictly_increasing
        box["detail"] = f"ranks {p.ranks}"
    _check(box)


def test_criterion_3_paths_stabilize_under_every_sumlike_op():
    with criterion(3, "paths under every sum-like op: rank at 6 equals rank at 8", 120) as box:
        ops = enumerate_sumlike(GRAPHS, GRAPHS)
        grid = build_truncation_grid([paths(Squares()), paths(PowersOfTwo())], ops, 8,
                                     family=["paths", "copaths"], full_upto=6)
        bad = [f"{t.op_name}/{t.property_name} {p.ranks}" for ts in grid for t in ts
               for p in [profile_from_truncation(t, [6, 8])] if not p.stabilized]
        box["ok"] = len(ops) == 41 and not bad
        box["detail"] = f"{len(ops)} ops x 2 sets, {len(bad)} unstable" + (f": {bad}" if bad else "")
    _check(box)


def test_criterion_4_bridge_paths_track_the_arithmetic_matrix():
    with criterion(4, "square paths under bridge union: rank grows, row counts match M_A", 60) as box:
        p = rank_profile(paths(Squares()), lookup("bridge-union"), [6, 10, 14], family=["labeled-paths"])
        ma = [truncation_stats(build_MA(Squares(), n, start=1), f"M_A squares from 1, n={n}")[1] for n in (6, 10, 14)]
        box["ok"] = p.strictly_increasing and p.indices == ma
        box["detail"] = f"ranks {p.ranks}, distinct rows {p.indices}, M_A distinct rows {ma}"
    _check(box)


def test_criterion_5_ksum_cliques_stabilize():
    with criterion(5, "square cliques under 1-sum: rank stable by n=6", 30) as box:
        p = rank_profile(cliques(Squares()), lookup("k-sum"), [4, 5, 6, 7, 8], family=["labeled-cliques"],
                         full_upto=6)
        box["ok"] = p.ranks == KSUM_CLIQUE_RANKS and p.ranks[2] == p.ranks[3] == p.ranks[4]
        box["detail"] = f"ranks {p.ranks} at n=4..8"
    _check(box)


def test_criterion_6_arithmetic_matrices():
    with criterion(6, "M_A: bounded for periodic sets, growing for squares and pow2", 5) as box:
        out, ok = [], len(PERIODIC_SETS) == 5
        for a in PERIODIC_SETS:
            bound = a.threshold + a.period
            n = 2 * bound + 4
            r = truncation_stats(build_MA(a, n), f"M_A {a.name}")[0]
            r2 = truncation_stats(build_MA(a, n + 8), f"M_A {a.name}")[0]
            ok &= r <= bound and r == r2 and periodicity_bound_check(a, n)
            out.append(f"{a.name} {r}<={bound}")
        for a in (Squares(), PowersOfTwo()):
            r = [truncation_stats(build_MA(a, n), f"M_A {a.name}")[0] for n in (8, 16, 32)]
            ok &= r[0] < r[1] < r[2]
            out.append(f"{a.name} {r}")
        box["ok"] = ok
        box["detail"] = "; ".join(out)
    _check(box)


def test_criterion_8_smoothness_and_tables():
    with criterion(8, "sum-like ops are smooth and reduction tables validate", 300) as box:
        failures, checked = [], 0
        for op in (UNION, CO_UNION):
            for frag, qs, mods in (("FOL", (1, 2, 3), ()), ("MSOL", (1, 2), ()),
                                   ("CFOL", (1, 2, 3), (2,)), ("CMSOL", (1, 2, 3), (2,))):
                for q in qs:
                    checked += 1
                    if not check_smoothness(frag, q, mods, op, 4).passed:
                        failures.append(f"{op.name}/{frag}/q{q}")
            for name, phi in CORPUS:
                checked += 1
                if not validate_fv_table(synthesize_fv_table(phi, op, 4))[0]:
                    failures.append(f"{op.name}/{name}")
        box["ok"] = not failures and len(CORPUS) == 6
        box["detail"] = f"{checked} checks, failures: {failures or 'none'}"
    _check(box)


def test_criterion_9_row_classes_are_definable():
    with criterion(9, "row classes are unions of type blocks under disjoint union", 60) as box:
        bad = [name for name, phi in CORPUS
               for p in [formula_property(phi, name=name)]
               if not class_definability_check(p, UNION, p.fragment, p.rank, 4)]
        box["ok"] = not bad
        box["detail"] = f"{len(CORPUS)} sentences, failures: {bad or 'none'}"
    _check(box)


def test_criterion_10_fundamental_property():
    with criterion(10, "translation commutes with transduction on all structures <= 4", 60) as box:
        bad, count, schemes = [], 0, 0
        for op in builtin_ops():
            if op.scheme.k != 1:
                continue
            schemes += 1
            structs = enumerate_structures(op.scheme.source, 4)
            for name, f in standard_corpus(op.scheme.target):
                g = translate(op.scheme, f)
                for s in structs:
                    count += 1
                    if evaluate(g, s) != evaluate(f, transduce(op.scheme, s, check=False)):
                        bad.append((op.name, name, s))
        box["ok"] = schemes == 5 and not bad
        box["detail"] = f"{schemes} scalar schemes, {count} evaluations, {len(bad)} mismatches"
    _check(box)


def test_criterion_11_negative_controls():
    with criterion(11, "corrupted table and label-dependent predicate are rejected", 5) as box:
        t = synthesize_fv_table(dict(CORPUS)["edge-existence"], UNION, 3)
        table_caught = validate_fv_table(t)[0] and not validate_fv_table(corrupt(t, (1, 1)))[0]
        raw = Property("vertex-0-isolated", GRAPHS,
                       lambda s: s.size > 0 and not any(a == 0 for a, _ in s.relations[0]))
        iso_caught = not iso_closure_check(raw)[0]
        box["ok"] = table_caught and iso_caught
        box["detail"] = f"corrupted table rejected: {table_caught}, raw predicate rejected: {iso_caught}"
    _check(box)


def test_criterion_7_rank_index_inequality_everywhere():
    # runs last in this file, so it sees every truncation computed above
    with criterion(7, "rank <= distinct rows <= 2^rank on every audited truncation", None) as box:
        bad = [entry for entry in AUDIT if not entry[2] <= entry[3] <= 2 ** entry[2]]
        box["ok"] = len(AUDIT) > 0 and not bad
        box["detail"] = f"{len(AUDIT)} truncations audited, {len(bad)} violations"
    _check(box)
