"""Truncated Hankel matrices over GF(2).

Rows and columns of a truncation at n are labeled by structures sorted by
(size, canonical code). The labels are every structure up to size
``full_upto`` (up to isomorphism) together with the members of some named
families up to size n. Without families the truncation is complete up to n.
A truncation at a smaller n is always a leading principal submatrix of the
one at a larger n, which is how profiles are computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from fvbench.enumeration import enumerate_structures
from fvbench.properties import Property, SetSpec, UltimatelyPeriodic
from fvbench.structures import (
    GRAPHS, LABELED_GRAPHS, Structure, Vocabulary, VocabularyError, clique, complement, edgeless,
    labeled_clique, labeled_path, path,
)
from fvbench.transduction import BinaryOp, apply_op, tagged_union, transduce


# --- bit matrices ---------------------------------------------------------------

def gf2_rank(rows: Iterable[int] | "BitMatrix" | "HankelTruncation") -> int:
    """Rank over GF(2) of rows packed as int bitmasks (bit j = column j)."""
    if isinstance(rows, HankelTruncation):
        rows = rows.matrix.rows
    elif isinstance(rows, BitMatrix):
        rows = rows.rows
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            pivot = basis.get(h)
            if pivot is None:
                basis[h] = r
                break
            r ^= pivot
    return len(basis)


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    ncols: int

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> BitMatrix:
        ncols = len(lists[0]) if lists else 0
        rows = []
        for row in lists:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            rows.append(sum(1 << j for j, bit in enumerate(row) if bit))
        return cls(tuple(rows), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        return self.rows[i] >> j & 1

    def to_lists(self) -> list[list[int]]:
        return [[r >> j & 1 for j in range(self.ncols)] for r in self.rows]

    def to_text(self) -> str:
        return "\n".join("".join(str(r >> j & 1) for j in range(self.ncols)) for r in self.rows)

    def rank(self) -> int:
        return gf2_rank(self.rows)

    def row_classes(self) -> list[list[int]]:
        """Indices grouped by equal rows, in order of first occurrence."""
        groups: dict[int, list[int]] = {}
        for i, r in enumerate(self.rows):
            groups.setdefault(r, []).append(i)
        return list(groups.values())

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and all(
            self.entry(i, j) == self.entry(j, i) for i in range(self.nrows) for j in range(i))

    def leading(self, k: int) -> BitMatrix:
        mask = (1 << k) - 1
        return BitMatrix(tuple(r & mask for r in self.rows[:k]), k)


# --- truncations ----------------------------------------------------------------

FAMILIES: dict[str, tuple[Vocabulary, Callable[[int], Structure]]] = {
    "cliques": (GRAPHS, clique),
    "edgeless": (GRAPHS, edgeless),
    "paths": (GRAPHS, path),
    "copaths": (GRAPHS, lambda m: complement(path(m))),
    "labeled-paths": (LABELED_GRAPHS, labeled_path),
    "labeled-cliques": (LABELED_GRAPHS, labeled_clique),
}


def hankel_labels(vocabulary: Vocabulary, n: int, family: Sequence[str] = (), full_upto: int | None = None,
                  include_empty: bool = True) -> list[Structure]:
    if full_upto is None:
        full_upto = 0 if family else n
    full_upto = min(full_upto, n)
    labels = {}
    if full_upto > 0 or include_empty:
        for s in enumerate_structures(vocabulary, full_upto, include_empty=include_empty):
            labels[s.code] = s
    for name in family:
        try:
            fam_vocab, make = FAMILIES[name]
        except KeyError:
            raise ValueError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}") from None
        if fam_vocab != vocabulary:
            raise VocabularyError(f"family {name} is over {fam_vocab.describe()}, not {vocabulary.describe()}")
        for m in range(1, n + 1):
            s = make(m)
            labels.setdefault(s.code, s)
    return sorted(labels.values(), key=lambda s: s.sort_key)


@dataclass(frozen=True)
class HankelTruncation:
    property_name: str
    op_name: str
    n: int
    labels: tuple[Structure, ...]
    matrix: BitMatrix
    family: tuple[str, ...] = ()
    full_upto: int | None = None

    def entry(self, i: int, j: int) -> int:
        return self.matrix.entry(i, j)

    def restrict(self, n: int) -> HankelTruncation:
        """The truncation at a smaller n (a leading principal submatrix)."""
        if n > self.n:
            raise ValueError("can only restrict to a smaller n")
        k = sum(1 for s in self.labels if s.size <= n)
        full = None if self.full_upto is None else min(self.full_upto, n)
        return HankelTruncation(self.property_name, self.op_name, n, self.labels[:k],
                                self.matrix.leading(k), self.family, full)

    def without_empty(self) -> HankelTruncation:
        """Drop the empty label's row and column (it is always label 0)."""
        if not self.labels or self.labels[0].size > 0:
            return self
        m = self.matrix
        rows = tuple(r >> 1 for r in m.rows[1:])
        return HankelTruncation(self.property_name, self.op_name, self.n, self.labels[1:],
                                BitMatrix(rows, m.ncols - 1), self.family, self.full_upto)


def _check_compatible(props: Sequence[Property], op: BinaryOp) -> None:
    for p in props:
        if p.vocabulary != op.target:
            raise VocabularyError(f"property {p.name} is over {p.vocabulary.describe()} "
                                  f"but {op.name} produces {op.target.describe()}")


def build_truncations(props: Sequence[Property], op: BinaryOp, n: int, family: Sequence[str] = (),
                      full_upto: int | None = None, include_empty: bool = True) -> list[HankelTruncation]:
    """One truncation per property; every product is computed once."""
    return build_truncation_grid(props, [op], n, family, full_upto, include_empty)[0]


def build_truncation_grid(props: Sequence[Property], ops: Sequence[BinaryOp], n: int, family: Sequence[str] = (),
                          full_upto: int | None = None, include_empty: bool = True) -> list[list[HankelTruncation]]:
    """Truncations for every (operation, property) pair over one source vocabulary.

    Sum-like operations share the tagged union of each label pair, so it
    is built once per pair instead of once per operation.
    """
    if not ops:
        return []
    source = ops[0].source
    if any(op.source != source for op in ops):
        raise VocabularyError("operations in one grid must share a source vocabulary")
    for op in ops:
        _check_compatible(props, op)
    if full_upto is None and not family:
        full_upto = n
    labels = hankel_labels(source, n, family, full_upto, include_empty)
    if any(op.base == "ksum" for op in ops):
        labels = [s for s in labels if s.size > 0]
    # operations are validated on small operands once, then trusted in the loop
    for op in ops:
        for a in labels[:8]:
            for b in labels[:8]:
                apply_op(op, a, b)
    order = sorted(range(len(ops)), key=lambda o: ops[o].base != "union")
    shared = [ops[o].scheme for o in order if ops[o].base == "union"]
    other = [ops[o] for o in order if ops[o].base != "union"]
    preds = [p.predicate for p in props]
    rows = [[[0] * len(labels) for _ in props] for _ in order]
    for i, a in enumerate(labels):
        bits = [[0] * len(props) for _ in order]
        for j, b in enumerate(labels):
            products = []
            if shared:
                base = tagged_union(a, b)
                products += [transduce(t, base, check=False) for t in shared]
            products += [apply_op(op, a, b, check=False) for op in other]
            for o, c in enumerate(products):
                for k, pred in enumerate(preds):
                    if pred(c):
                        bits[o][k] |= 1 << j
        for o in range(len(order)):
            for k in range(len(props)):
                rows[o][k][i] = bits[o][k]
    full = None if full_upto is None else min(full_upto, n)
    built = {o: [HankelTruncation(p.name, ops[o].name, n, tuple(labels), BitMatrix(tuple(r), len(labels)),
                                  tuple(family), full) for p, r in zip(props, rs)]
             for o, rs in zip(order, rows)}
    return [built[o] for o in range(len(ops))]


def build_truncation(p: Property, op: BinaryOp, n: int, family: Sequence[str] = (), full_upto: int | None = None,
                     include_empty: bool = True) -> HankelTruncation:
    """Entry (A, B) is 1 iff op(A, B) has property p."""
    return build_truncations([p], op, n, family, full_upto, include_empty)[0]


# --- rank and index ---------------------------------------------------------------

# every (name, n, rank, index) computed through truncation_stats, for auditing
AUDIT: list[tuple[str, int, int, int]] = []


class RankIndexViolation(AssertionError):
    pass


def row_index(m: HankelTruncation | BitMatrix) -> tuple[int, list[list[int]]]:
    """Number of distinct rows and the label classes of equal rows."""
    mat = m.matrix if isinstance(m, HankelTruncation) else m
    classes = mat.row_classes()
    return len(classes), classes


def truncation_stats(m: HankelTruncation | BitMatrix, name: str = "") -> tuple[int, int]:
    """(rank, index), checking rank <= index <= 2**rank."""
    mat = m.matrix if isinstance(m, HankelTruncation) else m
    rank = mat.rank()
    index = len(mat.row_classes()) if mat.nrows else 0
    if mat.nrows and not rank <= index <= 2 ** rank:
        raise RankIndexViolation(f"{name}: rank {rank}, index {index}")
    if isinstance(m, HankelTruncation):
        name = name or f"{m.property_name}/{m.op_name}"
    AUDIT.append((name, getattr(m, "n", mat.nrows), rank, index))
    return rank, index


@dataclass(frozen=True)
class RankProfile:
    property_name: str
    op_name: str
    entries: tuple[tuple[int, int, int], ...]  # (n, rank, index)
    truncations: tuple[HankelTruncation, ...] = field(default=(), repr=False, compare=False)

    @property
    def ranks(self) -> list[int]:
        return [r for _, r, _ in self.entries]

    @property
    def indices(self) -> list[int]:
        return [i for _, _, i in self.entries]

    @property
    def stabilized(self) -> bool:
        return len(self.entries) >= 2 and self.ranks[-1] == self.ranks[-2]

    @property
    def index_stabilized(self) -> bool:
        return len(self.entries) >= 2 and self.indices[-1] == self.indices[-2]

    @property
    def strictly_increasing(self) -> bool:
        r = self.ranks
        return all(x < y for x, y in zip(r, r[1:]))

    @property
    def monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.ranks, self.ranks[1:])) and \
            all(a <= b for a, b in zip(self.indices, self.indices[1:]))

    def verdict(self) -> str:
        if self.stabilized:
            n, r, _ = self.entries[-1]
            return f"stabilized at {r} by n={self.entries[-2][0]}"
        return "growing"


def profile_from_truncation(t: HankelTruncation, schedule: Sequence[int]) -> RankProfile:
    schedule = list(schedule)
    if any(a >= b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if schedule and schedule[-1] > t.n:
        raise ValueError("schedule exceeds the truncation")
    entries = []
    truncs = []
    for n in schedule:
        sub = t.restrict(n) if n < t.n else t
        rank, index = truncation_stats(sub)
        entries.append((n, rank, index))
        truncs.append(sub)
    return RankProfile(t.property_name, t.op_name, tuple(entries), tuple(truncs))


def rank_profile(p: Property, op: BinaryOp, schedule: Sequence[int], family: Sequence[str] = (),
                 full_upto: int | None = None, include_empty: bool = True) -> RankProfile:
    """Rank and index along an increasing schedule of truncation sizes."""
    schedule = list(schedule)
    if not schedule:
        raise ValueError("empty schedule")
    if any(a >= b for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if full_upto is None and not family:
        # complete truncations: the largest one contains every smaller one
        full_upto = schedule[-1]
    t = build_truncation(p, op, schedule[-1], family, full_upto, include_empty)
    return profile_from_truncation(t, schedule)


# --- arithmetic matrices --------------------------------------------------------

def build_MA(a: SetSpec, n: int, start: int = 0) -> BitMatrix:
    """Rows and columns indexed start..n, entry 1 iff i + j is in a."""
    if n < start:
        raise ValueError("n must be at least start")
    idx = range(start, n + 1)
    rows = tuple(sum(1 << c for c, j in enumerate(idx) if i + j in a) for i in idx)
    return BitMatrix(rows, len(idx))


def periodicity_bound_check(a: UltimatelyPeriodic, n: int) -> bool:
    """rank(M_A up to n) <= t + p, and equal to the rank at 2(t+p) once n >= 2(t+p).

    Every row with index >= t repeats one of the rows t..t+p-1, and likewise
    for columns, so the leading (t+p) block already carries the full rank.
    """
    bound = a.threshold + a.period
    rank = build_MA(a, n).rank()
    if rank > bound:
        return False
    if n >= 2 * bound:
        return rank == build_MA(a, 2 * bound).rank()
    return True
