"""Slow, obviously-correct reference implementations used by the tests.

None of these share code with the package beyond the Structure container.
"""

from __future__ import annotations

from itertools import combinations, permutations, product

import networkx as nx

from fvbench.structures import GRAPHS, Structure


# --- isomorphism -----------------------------------------------------------------

def brute_isomorphic(a: Structure, b: Structure) -> bool:
    if a.vocabulary != b.vocabulary or a.size != b.size:
        return False
    for perm in permutations(range(a.size)):
        if tuple(perm[c] for c in a.constants) != b.constants:
            continue
        if all(frozenset(tuple(perm[x] for x in t) for t in ra) == rb for ra, rb in zip(a.relations, b.relations)):
            return True
    return False


def to_nx(g: Structure) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.size))
    h.add_edges_from((a, b) for a, b in g.relations[0] if a < b)
    return h


def from_nx(h: nx.Graph) -> Structure:
    h = nx.convert_node_labels_to_integers(h)
    edges = {(a, b) for a, b in h.edges()} | {(b, a) for a, b in h.edges()}
    return Structure(GRAPHS, h.number_of_nodes(), (frozenset(edges),))


def atlas_counts(max_n: int = 7) -> list[int]:
    """Number of graphs on exactly n vertices, from networkx's graph atlas."""
    counts = [0] * (max_n + 1)
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() <= max_n:
            counts[g.number_of_nodes()] += 1
    return counts


def brute_labeled_graph_count(n: int) -> int:
    """Graphs on n vertices with one marked vertex, up to isomorphism."""
    pairs = list(combinations(range(n), 2))
    seen = set()
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        for mark in range(n):
            best = None
            for perm in permutations(range(n)):
                key = (perm[mark], tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edges)))
                if best is None or key < best:
                    best = key
            seen.add(best)
    return len(seen)


# --- types by definition, no shortcuts ------------------------------------------

def naive_type(s: Structure, q: int, sets: bool, moduli=(), named=(), set_masks=()):
    """Rank-q type straight from the recursive definition.

    Atomic part: all relations among named points (and constants), equalities,
    and memberships of named points in named sets.
    """
    v = s.vocabulary
    pts = tuple(s.constants) + tuple(named)
    atoms = []
    for (name, arity), ts in zip(v.relations, s.relations):
        for idx in product(range(len(pts)), repeat=arity):
            atoms.append(tuple(pts[i] for i in idx) in ts)
    for i, j in combinations(range(len(pts)), 2):
        atoms.append(pts[i] == pts[j])
    for y in set_masks:
        for p in pts:
            atoms.append(bool(y >> p & 1))
    base = tuple(atoms)
    if q == 0:
        return base
    points = frozenset(naive_type(s, q - 1, sets, moduli, named + (a,), set_masks) for a in range(s.size))
    set_part = None
    if sets:
        set_part = frozenset(naive_type(s, q - 1, sets, moduli, named, set_masks + (y,))
                             for y in range(1 << s.size))
    counts = []
    for m in sorted(moduli):
        if m > q:
            continue
        tally = {}
        for a in range(s.size):
            t = naive_type(s, q - m, sets, moduli, named + (a,), set_masks)
            tally[t] = tally.get(t, 0) + 1
        counts.append((m, frozenset((t, c % m) for t, c in tally.items())))
    return (base, points, set_part, tuple(counts))


def partition(items, key) -> set[frozenset]:
    blocks = {}
    for i, x in enumerate(items):
        blocks.setdefault(key(x), set()).add(i)
    return {frozenset(b) for b in blocks.values()}


# --- Ehrenfeucht-Fraisse games ----------------------------------------------------

def _partial_iso(a: Structure, b: Structure, xs, ys, xsets, ysets) -> bool:
    xs = tuple(a.constants) + tuple(xs)
    ys = tuple(b.constants) + tuple(ys)
    for i, j in product(range(len(xs)), repeat=2):
        if (xs[i] == xs[j]) != (ys[i] == ys[j]):
            return False
    for ra, rb, (_, arity) in zip(a.relations, b.relations, a.vocabulary.relations):
        for idx in product(range(len(xs)), repeat=arity):
            if (tuple(xs[i] for i in idx) in ra) != (tuple(ys[i] for i in idx) in rb):
                return False
    for X, Y in zip(xsets, ysets):
        for x, y in zip(xs, ys):
            if bool(X >> x & 1) != bool(Y >> y & 1):
                return False
    return True


def duplicator_wins(a: Structure, b: Structure, q: int, sets: bool = False, xs=(), ys=(), xsets=(), ysets=()) -> bool:
    """Duplicator survives q rounds (point moves, plus set moves when ``sets``)."""
    if not _partial_iso(a, b, xs, ys, xsets, ysets):
        return False
    if q == 0:
        return True
    for x in range(a.size):
        if not any(duplicator_wins(a, b, q - 1, sets, xs + (x,), ys + (y,), xsets, ysets) for y in range(b.size)):
            return False
    for y in range(b.size):
        if not any(duplicator_wins(a, b, q - 1, sets, xs + (x,), ys + (y,), xsets, ysets) for x in range(a.size)):
            return False
    if sets:
        for X in range(1 << a.size):
            if not any(duplicator_wins(a, b, q - 1, sets, xs, ys, xsets + (X,), ysets + (Y,))
                       for Y in range(1 << b.size)):
                return False
        for Y in range(1 << b.size):
            if not any(duplicator_wins(a, b, q - 1, sets, xs, ys, xsets + (X,), ysets + (Y,))
                       for X in range(1 << a.size)):
                return False
    return True


# --- linear algebra ---------------------------------------------------------------

def span_rank(rows: list[int]) -> int:
    """Rank over GF(2) as log2 of the size of the row span."""
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def ma_lists(member, n: int, start: int = 0) -> list[list[int]]:
    return [[int(member(i + j)) for j in range(start, n + 1)] for i in range(start, n + 1)]


# --- operations and Hankel matrices on networkx graphs ------------------------------

def nx_disjoint_union(g: nx.Graph, h: nx.Graph) -> nx.Graph:
    return nx.disjoint_union(g, h)


def nx_complement_union(g: nx.Graph, h: nx.Graph) -> nx.Graph:
    return nx.complement(nx.disjoint_union(g, h))


def nx_is_clique(g: nx.Graph) -> bool:
    n = g.number_of_nodes()
    return n >= 1 and g.number_of_edges() == n * (n - 1) // 2


def nx_is_path(g: nx.Graph) -> bool:
    n = g.number_of_nodes()
    return n >= 1 and nx.is_connected(g) and g.number_of_edges() == n - 1 and max(d for _, d in g.degree()) <= 2


def nx_hankel(labels: list[nx.Graph], op, pred) -> list[list[int]]:
    return [[int(pred(op(a, b))) for b in labels] for a in labels]


def sumlike_oracle_count(max_size: int = 3) -> int:
    """Distinct scalar quantifier-free operations on simple graphs.

    A candidate keeps the left part, the right part, both or neither, and
    decides each pair x != y from (side x, side y, edge) symmetrically: the
    five orbits are LL-non-edge, LL-edge, RR-non-edge, RR-edge, cross.
    """
    graphs = [g for g in nx.graph_atlas_g() if g.number_of_nodes() <= max_size]
    signatures = []
    for keep_left, keep_right in product((False, True), repeat=2):
        for rule in range(32):
            sig = []
            for g in graphs:
                for h in graphs:
                    sig.append(_apply_rule(g, h, keep_left, keep_right, rule))
            signatures.append(sig)
    distinct = []
    for sig in signatures:
        if not any(all(nx.is_isomorphic(x, y) for x, y in zip(sig, other)) for other in distinct):
            distinct.append(sig)
    return len(distinct)


def _apply_rule(g, h, keep_left, keep_right, rule) -> nx.Graph:
    u = nx.disjoint_union(g, h)
    ng = g.number_of_nodes()
    nodes = [x for x in u.nodes() if (x < ng and keep_left) or (x >= ng and keep_right)]
    out = nx.Graph()
    out.add_nodes_from(nodes)
    for x, y in combinations(nodes, 2):
        lx, ly = x < ng, y < ng
        e = u.has_edge(x, y)
        if lx and ly:
            orbit = 1 if e else 0
        elif not lx and not ly:
            orbit = 3 if e else 2
        else:
            orbit = 4
        if rule >> orbit & 1:
            out.add_edge(x, y)
    return out


def nx_k_sum(g: nx.Graph, ga, h: nx.Graph, hb) -> nx.Graph:
    """Glue h onto g by identifying vertex hb of h with vertex ga of g."""
    rename = {v: ("h", v) for v in h.nodes()}
    rename[hb] = ("g", ga)
    out = nx.relabel_nodes(g, {v: ("g", v) for v in g.nodes()})
    out.add_nodes_from(rename.values())
    out.add_edges_from((rename[u], rename[v]) for u, v in h.edges())
    return out
