"""Canonical labeling of finite structures.

Individualization-refinement search: colour refinement to an equitable
ordered partition, branch on the first non-singleton cell, keep the
lexicographically least leaf certificate. Subtrees rooted at twins (two
elements whose transposition is an automorphism) are isomorphic, so only
one twin per class is tried; that keeps K_n and E_n linear.
"""

from __future__ import annotations

import struct
from itertools import combinations

from fvbench.structures import Structure, check_same_vocabulary


def _incidence(s: Structure) -> list[list[tuple[int, tuple[int, ...]]]]:
    inc: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(s.size)]
    for ri, ts in enumerate(s.relations):
        for t in ts:
            for x in set(t):
                inc[x].append((ri, t))
    return inc


def _refine(cells: list[list[int]], inc) -> list[list[int]]:
    """Split cells until equitable; subcells ordered by an invariant signature."""
    while True:
        color = {}
        for ci, cell in enumerate(cells):
            for v in cell:
                color[v] = ci
        out: list[list[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            sigs: dict[tuple, list[int]] = {}
            for v in cell:
                sig = tuple(sorted((ri, tuple(-1 if x == v else color[x] for x in t)) for ri, t in inc[v]))
                sigs.setdefault(sig, []).append(v)
            if len(sigs) > 1:
                changed = True
                for sig in sorted(sigs):
                    out.append(sigs[sig])
            else:
                out.append(cell)
        cells = out
        if not changed:
            return cells


def twin_classes(s: Structure) -> list[list[int]]:
    """Classes of the relation "swapping u and v is an automorphism".

    The relation is an equivalence: (u w) = (u v)(v w)(u v).
    """
    n = s.size
    named = set(s.constants)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    inc = _incidence(s)
    for u, v in combinations(range(n), 2):
        if u in named or v in named or find(u) == find(v):
            continue
        if len(inc[u]) != len(inc[v]):
            continue
        ok = True
        for ri, t in inc[u]:
            swapped = tuple(v if x == u else u if x == v else x for x in t)
            if swapped not in s.relations[ri]:
                ok = False
                break
        if ok:
            parent[find(v)] = find(u)
    classes: dict[int, list[int]] = {}
    for x in range(n):
        classes.setdefault(find(x), []).append(x)
    return sorted(classes.values())


def _certificate(s: Structure, order: list[int]) -> tuple:
    pos = [0] * s.size
    for i, v in enumerate(order):
        pos[v] = i
    rels = tuple(tuple(sorted(tuple(pos[x] for x in t) for t in ts)) for ts in s.relations)
    return rels, tuple(pos[c] for c in s.constants), pos


def canonical_labeling(s: Structure) -> tuple[tuple, list[int]]:
    """Return (certificate, perm) where ``s.relabel(perm)`` is the canonical form."""
    n = s.size
    if n == 0:
        return ((tuple(() for _ in s.relations), ()), [])
    inc = _incidence(s)
    twin_of = [0] * n
    for ci, cls in enumerate(twin_classes(s)):
        for x in cls:
            twin_of[x] = ci
    key = {v: tuple(i for i, c in enumerate(s.constants) if c == v) for v in range(n)}
    # named elements first, in constant order; unnamed last
    groups: dict[tuple, list[int]] = {}
    for v in range(n):
        groups.setdefault(key[v], []).append(v)
    cells = [groups[k] for k in sorted(groups, key=lambda k: (k == (), k))]

    best: list = [None, None]

    def search(cells):
        cells = _refine(cells, inc)
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            order = [c[0] for c in cells]
            rels, consts, pos = _certificate(s, order)
            cert = (rels, consts)
            if best[0] is None or cert < best[0]:
                best[0] = cert
                best[1] = pos
            return
        cell = cells[target]
        tried = set()
        for v in cell:
            if twin_of[v] in tried:
                continue
            tried.add(twin_of[v])
            rest = [x for x in cell if x != v]
            search(cells[:target] + [[v], rest] + cells[target + 1:])

    search(cells)
    return best[0], best[1]


def _encode(n: int, cert: tuple) -> bytes:
    rels, consts = cert
    out = [struct.pack(">H", n)]
    for ts in rels:
        out.append(struct.pack(">H", len(ts)))
        for t in ts:
            out.append(struct.pack(f">{len(t)}H", *t))
    out.append(struct.pack(f">{len(consts)}H", *consts))
    return b"".join(out)


def canonical_code(s: Structure) -> bytes:
    """Byte string equal for two structures (same vocabulary) iff they are isomorphic."""
    cert, _ = canonical_labeling(s)
    return _encode(s.size, cert)


def canonical_form(s: Structure) -> Structure:
    _, perm = canonical_labeling(s)
    return s.relabel(perm) if s.size else s


def is_isomorphic(a: Structure, b: Structure) -> bool:
    check_same_vocabulary(a, b)
    if a.size != b.size or [len(r) for r in a.relations] != [len(r) for r in b.relations]:
        return False
    return a.code == b.code
