"""Finite relational vocabularies and structures.

Elements of a structure of size ``n`` are the integers ``0 .. n-1``; the
text file format in :mod:`fvbench.io` uses 1-based indices instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class VocabularyError(ValueError):
    pass


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Relation symbols with arities plus constant symbols.

    ``simple`` makes every binary relation symmetric and irreflexive
    (simple graphs); it is enforced when structures are built.
    """

    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()
    simple: bool = False

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple((str(n), int(a)) for n, a in self.relations))
        object.__setattr__(self, "constants", tuple(str(c) for c in self.constants))
        names = [n for n, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise VocabularyError(f"duplicate symbol names in {names}")
        for name, arity in self.relations:
            if arity < 1:
                raise VocabularyError(f"relation {name} has non-positive arity {arity}")

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise VocabularyError(f"unknown relation {name!r}")

    def has_relation(self, name: str) -> bool:
        return any(n == name for n, _ in self.relations)

    def relation_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.relations):
            if n == name:
                return i
        raise VocabularyError(f"unknown relation {name!r}")

    def length(self) -> int:
        """Sum of (arity + 1) over all symbols; constants count as arity 0."""
        return sum(a + 1 for _, a in self.relations) + len(self.constants)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.relations), default=0)

    def with_relation(self, name: str, arity: int) -> Vocabulary:
        return Vocabulary(self.relations + ((name, arity),), self.constants, self.simple)

    def without_constants(self) -> Vocabulary:
        return Vocabulary(self.relations, (), self.simple)

    def with_constants(self, constants: Iterable[str]) -> Vocabulary:
        return Vocabulary(self.relations, tuple(constants), self.simple)

    def primed(self) -> Vocabulary:
        """Vocabulary of a disjoint union: each constant c gets a copy c'."""
        return Vocabulary(self.relations, self.constants + tuple(c + "'" for c in self.constants), self.simple)

    def describe(self) -> str:
        rels = ",".join(f"{n}:{a}" for n, a in self.relations)
        parts = [f"relations={rels}"]
        if self.constants:
            parts.append("constants=" + ",".join(self.constants))
        if self.simple:
            parts.append("flags=simple")
        return "; ".join(parts)

    @classmethod
    def parse(cls, text: str) -> Vocabulary:
        """Inverse of :meth:`describe`."""
        rels: list[tuple[str, int]] = []
        consts: list[str] = []
        simple = False
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            key, _, value = part.partition("=")
            key = key.strip()
            items = [v.strip() for v in value.split(",") if v.strip()]
            if key == "relations":
                for item in items:
                    name, _, ar = item.partition(":")
                    rels.append((name.strip(), int(ar)))
            elif key == "constants":
                consts.extend(items)
            elif key == "flags":
                for flag in items:
                    if flag != "simple":
                        raise VocabularyError(f"unknown vocabulary flag {flag!r}")
                    simple = True
            else:
                raise VocabularyError(f"unknown vocabulary field {key!r}")
        return cls(tuple(rels), tuple(consts), simple)


GRAPHS = Vocabulary((("E", 2),), (), simple=True)
LABELED_GRAPHS = Vocabulary((("E", 2),), ("a",), simple=True)


@dataclass(frozen=True)
class Structure:
    vocabulary: Vocabulary
    size: int
    relations: tuple[frozenset, ...]
    constants: tuple[int, ...] = ()
    _checked: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if not self._checked:
            return
        v = self.vocabulary
        n = self.size
        if n < 0:
            raise StructureError("negative size")
        if len(self.relations) != len(v.relations):
            raise StructureError("relation count does not match vocabulary")
        rels = []
        for (name, arity), tuples in zip(v.relations, self.relations):
            ts = frozenset(tuple(int(x) for x in t) for t in tuples)
            for t in ts:
                if len(t) != arity:
                    raise StructureError(f"{name}: tuple {t} has wrong arity")
                if any(x < 0 or x >= n for x in t):
                    raise StructureError(f"{name}: tuple {t} leaves the universe of size {n}")
            if v.simple and arity == 2:
                for a, b in ts:
                    if a == b:
                        raise StructureError(f"{name}: loop at {a} in a simple vocabulary")
                    if (b, a) not in ts:
                        raise StructureError(f"{name}: ({a},{b}) without its reverse in a simple vocabulary")
            rels.append(ts)
        object.__setattr__(self, "relations", tuple(rels))
        if len(self.constants) != len(v.constants):
            raise StructureError("constant count does not match vocabulary")
        if v.constants and n == 0:
            raise StructureError("the empty structure has no room for constants")
        for c, x in zip(v.constants, self.constants):
            if not 0 <= x < n:
                raise StructureError(f"constant {c} interpreted outside the universe")
        object.__setattr__(self, "constants", tuple(int(x) for x in self.constants))

    @classmethod
    def build(cls, vocabulary: Vocabulary, size: int, relations: Mapping[str, Iterable] | None = None,
              constants: Mapping[str, int] | None = None, symmetrize: bool = False) -> Structure:
        """Keyword-friendly constructor; missing relations are empty."""
        relations = dict(relations or {})
        constants = dict(constants or {})
        unknown = set(relations) - set(vocabulary.relation_names)
        if unknown:
            raise StructureError(f"relations not in vocabulary: {sorted(unknown)}")
        rels = []
        for name, arity in vocabulary.relations:
            ts = {tuple(t) if not isinstance(t, int) else (t,) for t in relations.get(name, ())}
            if symmetrize and arity == 2:
                ts |= {(b, a) for a, b in ts}
            rels.append(frozenset(ts))
        missing = set(vocabulary.constants) - set(constants)
        if missing:
            raise StructureError(f"uninterpreted constants: {sorted(missing)}")
        return cls(vocabulary, size, tuple(rels), tuple(constants[c] for c in vocabulary.constants))

    def rel(self, name: str) -> frozenset:
        return self.relations[self.vocabulary.relation_index(name)]

    def const(self, name: str) -> int:
        return self.constants[self.vocabulary.constants.index(name)]

    @cached_property
    def code(self) -> bytes:
        from fvbench.canon import canonical_code
        return canonical_code(self)

    @property
    def sort_key(self) -> tuple[int, bytes]:
        return (self.size, self.code)

    def relabel(self, perm: Iterable[int]) -> Structure:
        """Image of this structure under the bijection ``i -> perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.size)):
            raise StructureError("not a permutation of the universe")
        rels = tuple(frozenset(tuple(perm[x] for x in t) for t in ts) for ts in self.relations)
        return Structure(self.vocabulary, self.size, rels, tuple(perm[c] for c in self.constants), _checked=False)

    def reduct(self, vocabulary: Vocabulary) -> Structure:
        """Forget symbols not in ``vocabulary`` (which must be a sub-vocabulary)."""
        rels = []
        for name, arity in vocabulary.relations:
            if self.vocabulary.arity(name) != arity:
                raise VocabularyError(f"arity mismatch for {name}")
            rels.append(self.rel(name))
        consts = tuple(self.const(c) for c in vocabulary.constants)
        return Structure(vocabulary, self.size, tuple(rels), consts)

    def expand(self, vocabulary: Vocabulary, relations: Mapping[str, Iterable] | None = None,
               constants: Mapping[str, int] | None = None) -> Structure:
        """Add interpretations for the symbols of ``vocabulary`` missing here."""
        relations = dict(relations or {})
        constants = dict(constants or {})
        rel_map = {name: self.rel(name) for name in self.vocabulary.relation_names}
        rel_map.update(relations)
        const_map = {c: self.const(c) for c in self.vocabulary.constants}
        const_map.update(constants)
        return Structure.build(vocabulary, self.size, rel_map, const_map)

    def edges(self, name: str = "E") -> list[tuple[int, int]]:
        return sorted((a, b) for a, b in self.rel(name) if a < b)

    def __repr__(self):
        parts = [f"n={self.size}"]
        for (name, arity), ts in zip(self.vocabulary.relations, self.relations):
            if self.vocabulary.simple and arity == 2:
                parts.append(f"{name}={sorted(t for t in ts if t[0] < t[1])}")
            else:
                parts.append(f"{name}={sorted(ts)}")
        for c, x in zip(self.vocabulary.constants, self.constants):
            parts.append(f"{c}={x}")
        return "Structure(" + ", ".join(parts) + ")"


def check_same_vocabulary(a: Structure, b: Structure) -> Vocabulary:
    if a.vocabulary != b.vocabulary:
        raise VocabularyError("operands are over different vocabularies")
    return a.vocabulary


def disjoint_union(a: Structure, b: Structure) -> Structure:
    """Disjoint union; b's elements are shifted by |a|.

    With constants the result is over the primed vocabulary: c names a's
    element and c' names b's.
    """
    v = check_same_vocabulary(a, b)
    shift = a.size
    rels = tuple(ra | frozenset(tuple(x + shift for x in t) for t in rb)
                 for ra, rb in zip(a.relations, b.relations))
    if not v.constants:
        return Structure(v, a.size + b.size, rels, (), _checked=False)
    consts = a.constants + tuple(x + shift for x in b.constants)
    return Structure(v.primed(), a.size + b.size, rels, consts, _checked=False)


def k_sum(a: Structure, b: Structure) -> Structure:
    """Disjoint union followed by identifying each constant of a with its twin in b."""
    v = check_same_vocabulary(a, b)
    k = len(v.constants)
    if k == 0:
        raise VocabularyError("k-sum needs at least one constant")
    if a.size == 0 or b.size == 0:
        raise StructureError("k-sum of an empty structure")
    # b's element y goes to a's constant if y is named, else to a fresh index.
    target: dict[int, int] = {}
    for cb, ca in zip(b.constants, a.constants):
        if cb in target and target[cb] != ca:
            # b names one element twice but a does not: identification merges a's elements too
            raise StructureError("k-sum with inconsistent constant identifications")
        target[cb] = ca
    if len(set(target.values())) != len(target):
        raise StructureError("k-sum with inconsistent constant identifications")
    nxt = a.size
    for y in range(b.size):
        if y not in target:
            target[y] = nxt
            nxt += 1
    rels = []
    for (name, arity), ra, rb in zip(v.relations, a.relations, b.relations):
        rels.append(ra | frozenset(tuple(target[x] for x in t) for t in rb))
    return Structure(v, nxt, tuple(rels), a.constants, _checked=False)


# --- graph helpers ---------------------------------------------------------

def graph(n: int, edges: Iterable[tuple[int, int]] = (), vocabulary: Vocabulary = GRAPHS,
          constants: Mapping[str, int] | None = None) -> Structure:
    return Structure.build(vocabulary, n, {"E": edges}, constants, symmetrize=True)


def clique(n: int) -> Structure:
    return graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def edgeless(n: int) -> Structure:
    return graph(n)


def path(n: int) -> Structure:
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Structure:
    if n < 3:
        raise StructureError("cycles need at least 3 vertices")
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def complement(g: Structure) -> Structure:
    """Loopless complement of a simple graph."""
    n = g.size
    e = g.rel("E")
    return graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in e], g.vocabulary,
                 dict(zip(g.vocabulary.constants, g.constants)))


def labeled_path(n: int) -> Structure:
    """Path on n >= 1 vertices whose label ``a`` sits at an end."""
    if n < 1:
        raise StructureError("labeled paths need at least one vertex")
    return graph(n, [(i, i + 1) for i in range(n - 1)], LABELED_GRAPHS, {"a": 0})


def labeled_clique(n: int) -> Structure:
    if n < 1:
        raise StructureError("labeled cliques need at least one vertex")
    return graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)], LABELED_GRAPHS, {"a": 0})


def degrees(g: Structure, name: str = "E") -> list[int]:
    deg = [0] * g.size
    for a, _ in g.rel(name):
        deg[a] += 1
    return deg


def is_connected(g: Structure, name: str = "E") -> bool:
    """Undirected connectivity of a binary relation; the empty graph counts as connected."""
    n = g.size
    if n <= 1:
        return True
    adj = [set() for _ in range(n)]
    for a, b in g.rel(name):
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n
