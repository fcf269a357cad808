from __future__ import annotations

import os
import sys
from itertools import combinations

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from fvbench.logic.syntax import (  # noqa: E402
    And, Bottom, Count, Eq, Exists, ExistsSet, Forall, ForallSet, Iff, Implies, In, Not, Or, Rel, Top, Var,
)
from fvbench.structures import GRAPHS, LABELED_GRAPHS, Structure  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, min_size: int = 0, max_size: int = 5):
    n = draw(st.integers(min_size, max_size))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = {p for p, c in zip(pairs, chosen) if c}
    edges |= {(b, a) for a, b in edges}
    return Structure(GRAPHS, n, (frozenset(edges),))


@st.composite
def labeled_graphs(draw, max_size: int = 4):
    g = draw(graphs(min_size=1, max_size=max_size))
    a = draw(st.integers(0, g.size - 1))
    return Structure(LABELED_GRAPHS, g.size, g.relations, (a,))


@st.composite
def permuted(draw, s: Structure):
    perm = draw(st.permutations(list(range(s.size))))
    return s.relabel(perm)


POINT_VARS = ("x", "y", "z")
SET_VARS = ("X", "Y")


def formulas(depth: int = 3, sets: bool = True, counting: bool = True, bound=()):
    """Graph formulas whose free variables are among ``bound``."""
    pts = [v for v in bound if v in POINT_VARS]
    sts = [v for v in bound if v in SET_VARS]
    atoms = [st.just(Top()), st.just(Bottom())]
    if pts:
        atoms.append(st.tuples(st.sampled_from(pts), st.sampled_from(pts)).map(lambda p: Rel("E", (Var(p[0]), Var(p[1])))))
        atoms.append(st.tuples(st.sampled_from(pts), st.sampled_from(pts)).map(lambda p: Eq(Var(p[0]), Var(p[1]))))
        if sts:
            atoms.append(st.tuples(st.sampled_from(pts), st.sampled_from(sts)).map(lambda p: In(Var(p[0]), p[1])))
    options = list(atoms)
    if depth > 0:
        sub = lambda b=bound: formulas(depth - 1, sets, counting, b)
        options.append(sub().map(Not))
        options.append(st.tuples(sub(), sub(), st.sampled_from([And, Or, Implies, Iff])).map(lambda t: t[2](t[0], t[1])))
        for v in POINT_VARS:
            nb = tuple(sorted(set(bound) | {v}))
            options.append(st.tuples(st.sampled_from([Exists, Forall]), formulas(depth - 1, sets, counting, nb))
                           .map(lambda t, v=v: t[0](v, t[1])))
            if counting:
                options.append(st.tuples(st.sampled_from([(0, 2), (1, 2)]), formulas(depth - 2, sets, counting, nb)
                                         if depth >= 2 else formulas(0, sets, counting, nb))
                               .map(lambda t, v=v: Count(t[0][0], t[0][1], v, t[1])))
        if sets:
            for v in SET_VARS:
                nb = tuple(sorted(set(bound) | {v}))
                options.append(st.tuples(st.sampled_from([ExistsSet, ForallSet]), formulas(depth - 1, sets, counting, nb))
                               .map(lambda t, v=v: t[0](v, t[1])))
    return st.one_of(options)


def sentences(depth: int = 3, sets: bool = True, counting: bool = True):
    return formulas(depth, sets, counting, ())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(lines, key=lambda l: int(l.split()[1])):
        terminalreporter.write_line(line)
