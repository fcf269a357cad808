"""Properties of finite structures as membership predicates.

The graph families take an integer set A: cliques K_n, edgeless graphs
E_n and paths P_n for n in A. Only nonempty members are included, so the
empty graph belongs to none of them.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Callable, Iterable

from fvbench.enumeration import enumerate_structures
from fvbench.logic.parser import parse_sentence
from fvbench.logic.semantics import compile_formula, context
from fvbench.logic.syntax import (
    Formula, Fragment, constants_of, fragment, free_vars, moduli, qrank, relations_of, to_text,
)
from fvbench.structures import GRAPHS, Structure, Vocabulary, VocabularyError, degrees, is_connected


# --- integer sets -------------------------------------------------------------

class SetSpec:
    name = "set"

    def __contains__(self, n: int) -> bool:
        raise NotImplementedError

    def members(self, upto: int) -> list[int]:
        return [n for n in range(upto + 1) if n in self]

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class UltimatelyPeriodic(SetSpec):
    """Equal to ``prefix`` below ``threshold``; n >= threshold is in iff n mod period is a residue."""

    threshold: int
    period: int
    residues: frozenset = frozenset()
    prefix: frozenset = frozenset()

    def __post_init__(self):
        if self.threshold < 0 or self.period < 1:
            raise ValueError("need threshold >= 0 and period >= 1")
        object.__setattr__(self, "residues", frozenset(self.residues))
        object.__setattr__(self, "prefix", frozenset(self.prefix))
        if any(not 0 <= r < self.period for r in self.residues):
            raise ValueError("residues must lie in [0, period)")
        if any(not 0 <= x < self.threshold for x in self.prefix):
            raise ValueError("prefix elements must lie in [0, threshold)")

    def __contains__(self, n: int) -> bool:
        if n < self.threshold:
            return n in self.prefix
        return n % self.period in self.residues

    @property
    def name(self) -> str:
        res = "|".join(map(str, sorted(self.residues)))
        pre = "|".join(map(str, sorted(self.prefix)))
        return f"periodic:{self.threshold},{self.period},{res},{pre}"


class Squares(SetSpec):
    name = "squares"

    def __contains__(self, n: int) -> bool:
        return n >= 0 and math.isqrt(n) ** 2 == n

    def __eq__(self, other):
        return type(other) is Squares

    def __hash__(self):
        return hash("squares")


class PowersOfTwo(SetSpec):
    name = "pow2"

    def __contains__(self, n: int) -> bool:
        return n >= 1 and n & (n - 1) == 0

    def __eq__(self, other):
        return type(other) is PowersOfTwo

    def __hash__(self):
        return hash("pow2")


@dataclass(frozen=True, repr=False)
class ExplicitFinite(SetSpec):
    elements: frozenset

    def __post_init__(self):
        object.__setattr__(self, "elements", frozenset(int(x) for x in self.elements))
        if any(x < 0 for x in self.elements):
            raise ValueError("elements must be natural numbers")

    def __contains__(self, n: int) -> bool:
        return n in self.elements

    @property
    def name(self) -> str:
        return "finite:" + "|".join(map(str, sorted(self.elements)))

    def as_periodic(self) -> UltimatelyPeriodic:
        t = max(self.elements, default=-1) + 1
        return UltimatelyPeriodic(t, 1, frozenset(), self.elements)


EVENS = UltimatelyPeriodic(0, 2, frozenset({0}))
ODDS = UltimatelyPeriodic(0, 2, frozenset({1}))
NATURALS = UltimatelyPeriodic(0, 1, frozenset({0}))
EMPTY_SET = UltimatelyPeriodic(0, 1, frozenset())


def _int_list(text: str) -> frozenset:
    return frozenset(int(x) for x in text.split("|") if x.strip())


def parse_setspec(text: str) -> SetSpec:
    """``squares``, ``pow2``, ``evens``, ``odds``, ``all``, ``none``,
    ``finite:a|b|..`` or ``periodic:t,p,r0|r1,prefix0|prefix1``."""
    text = text.strip()
    named = {"squares": Squares(), "pow2": PowersOfTwo(), "evens": EVENS, "odds": ODDS,
             "all": NATURALS, "none": EMPTY_SET}
    if text in named:
        return named[text]
    kind, _, rest = text.partition(":")
    try:
        if kind == "finite":
            return ExplicitFinite(_int_list(rest))
        if kind == "periodic":
            parts = rest.split(",")
            if not 2 <= len(parts) <= 4:
                raise ValueError("expected periodic:t,p,residues[,prefix]")
            parts += [""] * (4 - len(parts))
            return UltimatelyPeriodic(int(parts[0]), int(parts[1]), _int_list(parts[2]), _int_list(parts[3]))
    except ValueError as exc:
        raise ValueError(f"bad set specifier {text!r}: {exc}") from None
    raise ValueError(f"unknown set specifier {text!r}")


def set_member(a: SetSpec, n: int) -> bool:
    return n in a


# --- properties ---------------------------------------------------------------

@dataclass(frozen=True)
class Property:
    name: str
    vocabulary: Vocabulary
    predicate: Callable[[Structure], bool] = field(compare=False, repr=False)
    formula: Formula | None = None

    @property
    def fragment(self) -> Fragment | None:
        return None if self.formula is None else fragment(self.formula)

    @property
    def rank(self) -> int | None:
        return None if self.formula is None else qrank(self.formula)

    @property
    def moduli(self) -> frozenset:
        return frozenset() if self.formula is None else moduli(self.formula)

    def __call__(self, s: Structure) -> bool:
        return member(self, s)


def member(p: Property, s: Structure) -> bool:
    if s.vocabulary != p.vocabulary:
        raise VocabularyError(f"property {p.name} is over {p.vocabulary.describe()}")
    return p.predicate(s)


def _n_edges(s: Structure) -> int:
    return len(s.relations[0]) // 2


def is_clique(s: Structure) -> bool:
    return s.size >= 1 and _n_edges(s) == s.size * (s.size - 1) // 2


def is_edgeless(s: Structure) -> bool:
    return s.size >= 1 and not s.relations[0]


def is_path(s: Structure) -> bool:
    n = s.size
    return n >= 1 and _n_edges(s) == n - 1 and max(degrees(s)) <= 2 and is_connected(s)


def cliques(a: SetSpec) -> Property:
    return Property(f"cliques:{a.name}", GRAPHS, lambda s: is_clique(s) and s.size in a)


def cocliques(a: SetSpec) -> Property:
    return Property(f"cocliques:{a.name}", GRAPHS, lambda s: is_edgeless(s) and s.size in a)


def paths(a: SetSpec) -> Property:
    return Property(f"paths:{a.name}", GRAPHS, lambda s: is_path(s) and s.size in a)


def zero_property(v: Vocabulary = GRAPHS) -> Property:
    return Property("zero", v, lambda s: False)


def formula_property(f: Formula, vocabulary: Vocabulary = GRAPHS, name: str | None = None) -> Property:
    """Models of a sentence; membership is evaluation."""
    if free_vars(f):
        raise ValueError(f"not a sentence, free variables: {', '.join(sorted(free_vars(f)))}")
    fn = compile_formula(f)

    def pred(s: Structure) -> bool:
        return fn(context(s), {})

    for rname, arity in relations_of(f):
        if not vocabulary.has_relation(rname) or vocabulary.arity(rname) != arity:
            raise VocabularyError(f"relation {rname}/{arity} is not in {vocabulary.describe()}")
    if constants_of(f) - set(vocabulary.constants):
        raise VocabularyError(f"unknown constants {sorted(constants_of(f) - set(vocabulary.constants))}")
    return Property(name or f"formula:{to_text(f)}", vocabulary, pred, f)


def parse_property(text: str, vocabulary: Vocabulary = GRAPHS) -> Property:
    """``cliques:A``, ``cocliques:A``, ``paths:A``, ``formula:<file>``, ``sentence:<text>`` or ``zero``."""
    kind, _, rest = text.partition(":")
    if kind == "cliques":
        return cliques(parse_setspec(rest))
    if kind == "cocliques":
        return cocliques(parse_setspec(rest))
    if kind == "paths":
        return paths(parse_setspec(rest))
    if kind == "formula":
        body = Path(rest).read_text()
        return formula_property(parse_sentence(body, vocabulary), vocabulary, name=f"formula:{Path(rest).name}")
    if kind == "sentence":
        return formula_property(parse_sentence(rest, vocabulary), vocabulary)
    if text == "zero":
        return zero_property(vocabulary)
    raise ValueError(f"unknown property specifier {text!r}")


def iso_closure_check(p: Property, max_size: int = 4, samples: int = 24, seed: int = 0):
    """Membership must not change under relabeling.

    Tries every permutation for structures of size <= 4 and ``samples``
    random ones beyond. Returns (True, None) or (False, (s, relabeled s)).
    """
    rng = random.Random(seed)
    for s in enumerate_structures(p.vocabulary, max_size):
        # start from a non-canonical labeling too, so label-dependent predicates show up
        n = s.size
        if n <= 4:
            perms: Iterable = permutations(range(n))
        else:
            perms = [tuple(rng.sample(range(n), n)) for _ in range(samples)]
        base = member(p, s)
        for perm in perms:
            t = s.relabel(perm)
            if member(p, t) != base:
                return False, (s, t)
    return True, None
