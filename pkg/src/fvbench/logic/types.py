"""Quantifier-rank types (semantic Hintikka classes).

A type of rank q of an expansion (S, a_1..a_k, X_1..X_l) is built from
  * its atomic diagram,
  * the rank q-1 types of all one-point extensions,
  * for MSOL/CMSOL, the rank q-1 types of all one-set extensions,
  * for CFOL/CMSOL and each modulus m <= q, the map from rank q-m types
    of one-point extensions to their number of realizers mod m.
Two structures get equal types iff they satisfy the same sentences of
that fragment with rank <= q (rank charging m for D[k,m]).

All values are interned to ints in one global table, so type equality is
int equality. Three exact shortcuts keep the recursion small:
  * every element carries a "colour", the interned atomic facts relating
    it to the named points and sets; at rank 1 the types of point
    extensions are just the set of colours and the set part is a
    function of the atomic diagram, so it is left out;
  * at rank 2 the rank 1 types of set extensions depend only on which
    colour classes meet the set and which miss it, so sets are never
    enumerated there;
  * twins (elements whose transposition is an automorphism fixing all
    named data) give isomorphic extensions, so one representative per
    twin class is expanded, weighted by class size when counting.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from fvbench.canon import twin_classes
from fvbench.logic.syntax import Fragment
from fvbench.structures import Structure

_TABLE: dict = {}
_LOCK = threading.Lock()


def intern(key) -> int:
    v = _TABLE.get(key)
    if v is None:
        with _LOCK:
            v = _TABLE.setdefault(key, len(_TABLE))
    return v


class TypeBoundError(ValueError):
    pass


SET_SIZE_BOUND = 10
POINT_SIZE_BOUND = 40


@dataclass(frozen=True)
class QType:
    fragment: Fragment
    q: int
    moduli: frozenset
    value: int

    def __repr__(self):
        mods = ",".join(map(str, sorted(self.moduli)))
        return f"QType({self.fragment.value}, q={self.q}, M={{{mods}}}, #{self.value})"


class _Engine:
    def __init__(self, s: Structure, fragment: Fragment, moduli: frozenset):
        self.s = s
        self.n = s.size
        self.sets = fragment.has_sets
        self.moduli = sorted(moduli) if fragment.has_counting else []
        self.memo: dict = {}
        v = s.vocabulary
        self.binary = []
        self.higher = []
        base = []
        for (name, arity), ts in zip(v.relations, s.relations):
            if arity == 2:
                out = [0] * self.n
                inn = [0] * self.n
                for a, b in ts:
                    out[a] |= 1 << b
                    inn[b] |= 1 << a
                self.binary.append((out, inn))
            elif arity > 2:
                self.higher.append((arity, ts))
        for c in range(self.n):
            base.append(tuple((c,) * arity in ts for (_, arity), ts in zip(v.relations, s.relations)))
        self.twins = twin_classes(s)
        colors = tuple(intern(("base", base[c])) for c in range(self.n))
        node = ((), (), colors, intern(("root",)))
        for c in s.constants:
            node = self.add_point(node, c)
        self.root = node

    # -- expansions ---------------------------------------------------------
    def facts(self, c: int, a: int, named: tuple) -> tuple:
        bits = [c == a]
        for out, inn in self.binary:
            bits.append(out[c] >> a & 1)
            bits.append(inn[c] >> a & 1)
        if self.higher:
            pool = named + (a, c)
            ia, ic = len(pool) - 2, len(pool) - 1
            for arity, ts in self.higher:
                for pattern in product(range(len(pool)), repeat=arity):
                    if ia in pattern and ic in pattern:
                        bits.append(tuple(pool[i] for i in pattern) in ts)
        return tuple(bits)

    def add_point(self, node, a: int):
        named, sets, colors, t0 = node
        t0 = intern(("pt", t0, colors[a]))
        colors = tuple(intern(("c", colors[c], self.facts(c, a, named))) for c in range(self.n))
        return (named + (a,), sets, colors, t0)

    def add_set(self, node, y: int):
        named, sets, colors, t0 = node
        t0 = intern(("set", t0, tuple(y >> p & 1 for p in named)))
        colors = tuple(intern(("s", colors[c], y >> c & 1)) for c in range(self.n))
        return (named, sets + (y,), colors, t0)

    def classes(self, node) -> list[list[int]]:
        colors = node[2]
        out = []
        for cls in self.twins:
            split: dict[int, list[int]] = {}
            for c in cls:
                split.setdefault(colors[c], []).append(c)
            out.extend(split.values())
        return out

    # -- types --------------------------------------------------------------
    def type_of(self, node, q: int) -> int:
        key = (node[0], node[1], q)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        val = self._compute(node, q)
        self.memo[key] = val
        return val

    def _compute(self, node, q: int) -> int:
        named, sets, colors, t0 = node
        if q == 0:
            return t0
        if q == 1:
            return intern(("T1", t0, frozenset(colors)))
        classes = self.classes(node)
        reps = [(cls[0], len(cls)) for cls in classes]
        children = {a: self.add_point(node, a) for a, _ in reps}
        points = frozenset(self.type_of(children[a], q - 1) for a, _ in reps)
        set_part = None
        if self.sets:
            if q == 2:
                set_part = self._rank1_set_types(node)
            else:
                set_part = frozenset(self.type_of(self.add_set(node, y), q - 1)
                                     for y in _set_reps(classes))
        counts = []
        for m in self.moduli:
            if m > q:
                break
            tally: dict[int, int] = {}
            for a, size in reps:
                t = self.type_of(children[a], q - m)
                tally[t] = tally.get(t, 0) + size
            counts.append((m, frozenset((t, c % m) for t, c in tally.items() if c % m)))
        return intern(("T", q, t0, points, set_part, tuple(counts)))

    def _rank1_set_types(self, node) -> frozenset:
        named, _, colors, t0 = node
        by_color: dict[int, int] = {}
        for col in colors:
            by_color[col] = by_color.get(col, 0) + 1
        keys = sorted(by_color)
        options = []
        for col in keys:
            opts = [(0,), (1,)]
            if by_color[col] > 1:
                opts.append((0, 1))
            options.append(opts)
        out = set()
        for choice in product(*options):
            member = dict(zip(keys, choice))
            pattern = tuple(member[colors[p]][0] for p in named)
            t0y = intern(("set", t0, pattern))
            cols = frozenset(intern(("s", col, bit)) for col, bits in member.items() for bit in bits)
            out.add(intern(("T1", t0y, cols)))
        return frozenset(out)


def _set_reps(classes: list[list[int]]) -> Iterable[int]:
    """One subset per orbit under permutations inside each class."""
    prefix_masks = []
    for cls in classes:
        masks = [0]
        m = 0
        for c in cls:
            m |= 1 << c
            masks.append(m)
        prefix_masks.append(masks)
    for combo in product(*prefix_masks):
        y = 0
        for m in combo:
            y |= m
        yield y


_CACHE: dict = {}


def _norm_moduli(fragment: Fragment, moduli) -> frozenset:
    moduli = frozenset(int(m) for m in (moduli or ()))
    if fragment.has_counting and not moduli:
        raise ValueError(f"{fragment.value} types need a nonempty moduli set")
    if not fragment.has_counting and moduli:
        raise ValueError(f"{fragment.value} has no counting quantifiers; moduli must be empty")
    if any(m < 2 for m in moduli):
        raise ValueError("moduli must be >= 2")
    return moduli


def qtype(s: Structure, fragment: Fragment | str, q: int, moduli: Iterable[int] = ()) -> QType:
    """Rank-q type of ``s`` in ``fragment`` (memoized on the iso class)."""
    fragment = Fragment(fragment)
    moduli = _norm_moduli(fragment, moduli)
    if q < 0:
        raise ValueError("rank must be non-negative")
    limit = SET_SIZE_BOUND if fragment.has_sets else POINT_SIZE_BOUND
    if s.size > limit:
        raise TypeBoundError(f"structure of size {s.size} exceeds the {fragment.value} type bound {limit}")
    key = (s.vocabulary, s.code, fragment, q, moduli)
    hit = _CACHE.get(key)
    if hit is None:
        engine = _Engine(s, fragment, moduli)
        hit = QType(fragment, q, moduli, engine.type_of(engine.root, q))
        _CACHE[key] = hit
    return hit


def type_partition(structs: Iterable[Structure], fragment: Fragment | str, q: int,
                   moduli: Iterable[int] = ()) -> list[list[Structure]]:
    """Group structures by type; blocks keep input order, ordered by first member."""
    blocks: dict[QType, list[Structure]] = {}
    for s in structs:
        blocks.setdefault(qtype(s, fragment, q, moduli), []).append(s)
    return list(blocks.values())
