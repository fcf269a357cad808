"""Enumeration of finite structures, optionally up to isomorphism.

Iso-class representatives of size n are produced by adding one element to
each representative of size n-1 in every possible way and deduplicating
by canonical code. Constants are assigned afterwards, on top of the
constant-free reduct.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from fvbench.structures import Structure, Vocabulary

DEFAULT_BOUND = 6


class BoundError(ValueError):
    pass


def size_bound(v: Vocabulary) -> int:
    """Largest size enumerated without an explicit override."""
    if v.max_arity <= 2:
        return DEFAULT_BOUND
    return 3


def _new_atoms(v: Vocabulary, n: int) -> list[tuple[int, tuple[int, ...]]]:
    """Atoms over [n] that mention the newest element n-1, modulo simple-graph symmetry."""
    new = n - 1
    atoms = []
    for ri, (_, arity) in enumerate(v.relations):
        for t in product(range(n), repeat=arity):
            if new not in t:
                continue
            if v.simple and arity == 2:
                a, b = t
                if a == b or a != new:
                    continue  # (new, b) stands for both orientations
            atoms.append((ri, t))
    return atoms


def _extensions(s: Structure, v: Vocabulary):
    n = s.size + 1
    atoms = _new_atoms(v, n)
    for mask in range(1 << len(atoms)):
        rels = [set(r) for r in s.relations]
        for i, (ri, t) in enumerate(atoms):
            if mask >> i & 1:
                rels[ri].add(t)
                if v.simple and len(t) == 2:
                    rels[ri].add((t[1], t[0]))
        yield Structure(v, n, tuple(frozenset(r) for r in rels), (), _checked=False)


@lru_cache(maxsize=None)
def _reps_exact(v: Vocabulary, n: int) -> tuple[Structure, ...]:
    """Constant-free iso-class representatives of size exactly n."""
    if n == 0:
        return (Structure(v, 0, tuple(frozenset() for _ in v.relations)),)
    seen: dict[bytes, Structure] = {}
    for s in _reps_exact(v, n - 1):
        for t in _extensions(s, v):
            seen.setdefault(t.code, t)
    return tuple(seen[c] for c in sorted(seen))


@lru_cache(maxsize=None)
def _reps_with_constants(v: Vocabulary, n: int) -> tuple[Structure, ...]:
    base = v.without_constants()
    seen: dict[bytes, Structure] = {}
    for s in _reps_exact(base, n):
        for consts in product(range(n), repeat=len(v.constants)):
            t = Structure(v, n, s.relations, consts, _checked=False)
            seen.setdefault(t.code, t)
    return tuple(seen[c] for c in sorted(seen))


def _labeled_exact(v: Vocabulary, n: int):
    atoms = []
    for ri, (_, arity) in enumerate(v.relations):
        for t in product(range(n), repeat=arity):
            if v.simple and arity == 2 and not t[0] < t[1]:
                continue
            atoms.append((ri, t))
    for mask in range(1 << len(atoms)):
        rels = [set() for _ in v.relations]
        for i, (ri, t) in enumerate(atoms):
            if mask >> i & 1:
                rels[ri].add(t)
                if v.simple and len(t) == 2:
                    rels[ri].add((t[1], t[0]))
        for consts in product(range(n), repeat=len(v.constants)):
            yield Structure(v, n, tuple(frozenset(r) for r in rels), consts, _checked=False)


def enumerate_structures(v: Vocabulary, max_size: int, up_to_iso: bool = True,
                         include_empty: bool = True, bound: int | None = None) -> list[Structure]:
    """All structures of size 0..max_size, sorted by (size, canonical code).

    The empty structure is listed only for constant-free vocabularies and
    only when ``include_empty``.
    """
    limit = size_bound(v) if bound is None else bound
    if max_size > limit:
        raise BoundError(f"max_size {max_size} exceeds the enumeration bound {limit}")
    out: list[Structure] = []
    for n in range(max_size + 1):
        if n == 0 and (v.constants or not include_empty):
            continue
        if up_to_iso:
            reps = _reps_with_constants(v, n) if v.constants else _reps_exact(v, n)
            out.extend(reps)
        else:
            out.extend(sorted(_labeled_exact(v, n), key=lambda s: s.sort_key))
    return out

