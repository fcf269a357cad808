"""Smoothness, reduction tables and their checks.

The reduction sequence of a sentence is represented semantically: the
realized rank-q types of operands stand in for the reducing sentences,
and the Boolean function is a table over pairs of types.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from fvbench.enumeration import enumerate_structures
from fvbench.hankel import RankProfile, build_truncation, rank_profile, truncation_stats
from fvbench.logic.semantics import evaluate
from fvbench.logic.syntax import Formula, Fragment, fragment as fragment_of, moduli as moduli_of, qrank
from fvbench.logic.types import QType, qtype
from fvbench.properties import Property, formula_property
from fvbench.structures import Structure
from fvbench.transduction import BinaryOp, apply_op


class SmoothnessFailure(RuntimeError):
    def __init__(self, report: "SmoothnessReport"):
        self.report = report
        super().__init__(f"{report.op_name} is not {report.fragment.value}-smooth at q={report.q} "
                         f"within size {report.n}")


class PreconditionError(ValueError):
    pass


def operands(op: BinaryOp, n: int, include_empty: bool = True) -> list[Structure]:
    structs = enumerate_structures(op.source, n, include_empty=include_empty)
    if op.base == "ksum":
        structs = [s for s in structs if s.size > 0]
    return structs


def _moduli_for(fragment: Fragment, moduli: Iterable[int]) -> frozenset:
    moduli = frozenset(moduli or ())
    if fragment.has_counting and not moduli:
        raise ValueError(f"{fragment.value} needs a nonempty moduli set")
    return moduli if fragment.has_counting else frozenset()


# --- smoothness ------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessReport:
    fragment: Fragment
    q: int
    moduli: frozenset
    op_name: str
    n: int
    passed: bool
    witness: tuple[Structure, Structure, Structure, Structure] | None = None
    pairs: int = 0

    def verify_witness(self, op: BinaryOp) -> bool:
        """Recompute the witness types from scratch."""
        if self.witness is None:
            return False
        a1, a2, b1, b2 = self.witness
        t = lambda s: qtype(s, self.fragment, self.q, self.moduli)
        return t(a1) == t(a2) and t(b1) == t(b2) and t(apply_op(op, a1, b1)) != t(apply_op(op, a2, b2))


def check_smoothness(fragment: Fragment | str, q: int, moduli: Iterable[int], op: BinaryOp, n: int,
                     include_empty: bool = True) -> SmoothnessReport:
    """Do type-equal operand pairs (all structures <= n) give type-equal results?"""
    fragment = Fragment(fragment)
    moduli = _moduli_for(fragment, moduli)
    structs = operands(op, n, include_empty)
    types = [qtype(s, fragment, q, moduli) for s in structs]
    seen: dict[tuple[QType, QType], tuple[Structure, Structure, QType]] = {}
    pairs = 0
    for a, ta in zip(structs, types):
        for b, tb in zip(structs, types):
            pairs += 1
            tc = qtype(apply_op(op, a, b), fragment, q, moduli)
            prev = seen.get((ta, tb))
            if prev is None:
                seen[(ta, tb)] = (a, b, tc)
            elif prev[2] != tc:
                return SmoothnessReport(fragment, q, moduli, op.name, n, False, (prev[0], a, prev[1], b), pairs)
    return SmoothnessReport(fragment, q, moduli, op.name, n, True, None, pairs)


def check_associativity(op: BinaryOp, max_size: int = 3):
    """(a op b) op c isomorphic to a op (b op c) on all triples <= max_size.

    Returns None when the operation cannot be iterated (source != target),
    else (passed, witness triple or None).
    """
    if op.source != op.target:
        return None
    structs = operands(op, max_size)
    for a in structs:
        for b in structs:
            ab = apply_op(op, a, b)
            for c in structs:
                if apply_op(op, ab, c).code != apply_op(op, a, apply_op(op, b, c)).code:
                    return False, (a, b, c)
    return True, None


# --- reduction tables --------------------------------------------------------------

@dataclass(frozen=True)
class FVTable:
    sentence: Formula
    fragment: Fragment
    q: int
    moduli: frozenset
    op: BinaryOp
    n: int
    types: tuple[QType, ...]
    representatives: tuple[tuple[Structure, ...], ...]  # all realizers <= n, label order
    product: dict = field(compare=False)  # (i, j) -> QType of rep_i op rep_j
    table: dict = field(compare=False)  # (i, j) -> bool
    associative: bool | None = None

    @property
    def k(self) -> int:
        return len(self.types)

    def type_index(self, s: Structure) -> int | None:
        t = qtype(s, self.fragment, self.q, self.moduli)
        try:
            return self.types.index(t)
        except ValueError:
            return None

    def lookup(self, a: Structure, b: Structure) -> bool | None:
        i, j = self.type_index(a), self.type_index(b)
        if i is None or j is None:
            return None
        return self.table[(i, j)]

    def rows(self) -> list[tuple[int, int, int]]:
        return [(i, j, int(self.table[(i, j)])) for i in range(self.k) for j in range(self.k)]


def synthesize_fv_table(phi: Formula, op: BinaryOp, n: int, fragment: Fragment | str | None = None,
                        q: int | None = None, moduli: Iterable[int] = (), include_empty: bool = True) -> FVTable:
    """Tabulate truth of phi on op(A, B) as a function of the types of A and B.

    Refuses with SmoothnessFailure unless op is smooth at (fragment, q)
    on all operands of size <= n.
    """
    fragment = Fragment(fragment) if fragment is not None else fragment_of(phi)
    if not fragment.includes(fragment_of(phi)):
        raise PreconditionError(f"sentence is in {fragment_of(phi).value}, not {fragment.value}")
    q = qrank(phi) if q is None else q
    if q < qrank(phi):
        raise PreconditionError(f"rank {q} is below the sentence's rank {qrank(phi)}")
    moduli = _moduli_for(fragment, frozenset(moduli) | moduli_of(phi))
    report = check_smoothness(fragment, q, moduli, op, n, include_empty)
    if not report.passed:
        raise SmoothnessFailure(report)
    assoc = None
    if op.name != "disjoint-union":
        res = check_associativity(op)
        assoc = None if res is None else res[0]
    blocks: dict[QType, list[Structure]] = {}
    for s in operands(op, n, include_empty):
        blocks.setdefault(qtype(s, fragment, q, moduli), []).append(s)
    types = tuple(blocks)
    reps = tuple(tuple(blocks[t]) for t in types)
    product, table = {}, {}
    for i, ra in enumerate(reps):
        for j, rb in enumerate(reps):
            c = apply_op(op, ra[0], rb[0])
            product[(i, j)] = qtype(c, fragment, q, moduli)
            table[(i, j)] = evaluate(phi, c)
    return FVTable(phi, fragment, q, moduli, op, n, types, reps, product, table, assoc)


def validate_fv_table(t: FVTable, n: int | None = None, include_empty: bool = True):
    """Check phi(A op B) == table[type A, type B] for all pairs <= n.

    Returns (True, None) or (False, (A, B)) for the first counterexample.
    """
    n = t.n if n is None else n
    structs = operands(t.op, n, include_empty)
    idx = [t.type_index(s) for s in structs]
    for a, i in zip(structs, idx):
        for b, j in zip(structs, idx):
            if i is None or j is None:
                return False, (a, b)
            if evaluate(t.sentence, apply_op(t.op, a, b)) != t.table[(i, j)]:
                return False, (a, b)
    return True, None


def check_representative_independence(t: FVTable, samples: int = 3, seed: int = 0) -> bool:
    """Resample representatives per type; product type and table bit must not change."""
    rng = random.Random(seed)
    for (i, j), bit in t.table.items():
        for _ in range(samples):
            a = rng.choice(t.representatives[i])
            b = rng.choice(t.representatives[j])
            c = apply_op(t.op, a, b)
            if qtype(c, t.fragment, t.q, t.moduli) != t.product[(i, j)] or evaluate(t.sentence, c) != bit:
                return False
    return True


def corrupt(t: FVTable, key: tuple[int, int] = (0, 0)) -> FVTable:
    """A copy with one table bit flipped (negative control)."""
    table = dict(t.table)
    table[key] = not table[key]
    return replace(t, table=table)


# --- definability checks -----------------------------------------------------------

def class_definability_check(p: Property, op: BinaryOp, fragment: Fragment | str, q: int, n: int,
                             moduli: Iterable[int] = (), include_empty: bool = True) -> bool:
    """Every class of equal Hankel rows must be a union of type blocks."""
    if p.formula is None:
        raise PreconditionError(f"{p.name} is not defined by a formula")
    fragment = Fragment(fragment)
    if not fragment.includes(p.fragment) or p.rank > q:
        raise PreconditionError(f"{p.name} needs {p.fragment.value} rank {p.rank}")
    moduli = _moduli_for(fragment, frozenset(moduli) | p.moduli)
    t = build_truncation(p, op, n, include_empty=include_empty)
    truncation_stats(t)
    row_of = {}
    for cls_id, members in enumerate(t.matrix.row_classes()):
        for i in members:
            row_of[i] = cls_id
    block_row: dict[QType, int] = {}
    for i, s in enumerate(t.labels):
        ty = qtype(s, fragment, q, moduli)
        if block_row.setdefault(ty, row_of[i]) != row_of[i]:
            return False
    return True


@dataclass
class SuiteRow:
    name: str
    definable: bool
    fv_tables: bool | None
    smooth: bool | None
    rank_stable: bool
    index_stable: bool
    profile: RankProfile | None = None

    @property
    def consistent(self) -> bool:
        if not self.definable:
            return True
        return len({self.fv_tables, self.smooth, self.rank_stable, self.index_stable}) == 1


@dataclass
class SuiteReport:
    op_name: str
    fragment: Fragment
    q: int
    n: int
    schedule: tuple[int, ...]
    rows: list[SuiteRow]

    @property
    def passed(self) -> bool:
        return all(r.consistent for r in self.rows)


def theorem44_suite(op: BinaryOp, fragment: Fragment | str, q: int, n: int,
                    corpus: Sequence[tuple[str, Formula]], extra: Sequence[Property] = (),
                    schedule: Sequence[int] | None = None, moduli: Iterable[int] = (),
                    include_empty: bool = True) -> SuiteReport:
    """Per sentence: (a) its table validates, (b) op is smooth, (c) rank and (d) index stabilize.

    Sentences outside (fragment, q) and the ``extra`` properties get no
    entry in columns (a) and (b).
    """
    fragment = Fragment(fragment)
    schedule = tuple(schedule or (max(n - 2, 0), n - 1, n))
    base_moduli = frozenset(moduli)
    smooth_cache: dict[frozenset, bool] = {}
    rows = []
    for name, phi in corpus:
        p = formula_property(phi, op.target, name)
        prof = rank_profile(p, op, schedule, include_empty=include_empty)
        inside = fragment.includes(fragment_of(phi)) and qrank(phi) <= q
        fv_ok = smooth = None
        if inside:
            mods = base_moduli | moduli_of(phi)
            if fragment.has_counting and not mods:
                mods = frozenset({2})
            mods = _moduli_for(fragment, mods)
            if mods not in smooth_cache:
                smooth_cache[mods] = check_smoothness(fragment, q, mods, op, n, include_empty).passed
            smooth = smooth_cache[mods]
            try:
                table = synthesize_fv_table(phi, op, n, fragment, q, mods, include_empty)
                fv_ok = validate_fv_table(table, n, include_empty)[0]
            except SmoothnessFailure:
                fv_ok = False
        rows.append(SuiteRow(name, inside, fv_ok, smooth, prof.stabilized, prof.index_stabilized, prof))
    for p in extra:
        prof = rank_profile(p, op, schedule, include_empty=include_empty)
        rows.append(SuiteRow(p.name, False, None, None, prof.stabilized, prof.index_stabilized, prof))
    return SuiteReport(op.name, fragment, q, n, schedule, rows)


@dataclass(frozen=True)
class Evidence:
    property_name: str
    op_name: str
    profile: RankProfile
    found: bool

    @property
    def message(self) -> str:
        if self.found:
            return ("rank grows strictly across the schedule: inconsistent with definability in any "
                    "nice logic having the FV-property for this op within tested sizes")
        return "no evidence: " + self.profile.verdict()


def nondefinability_evidence(p: Property, op: BinaryOp, schedule: Sequence[int], **truncation) -> Evidence:
    prof = rank_profile(p, op, schedule, **truncation)
    return Evidence(p.name, op.name, prof, len(prof.entries) >= 2 and prof.strictly_increasing)
