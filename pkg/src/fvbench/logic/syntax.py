"""Formula AST for FOL, MSOL and their modular-counting extensions.

Variables starting with an uppercase letter are monadic set variables;
lowercase identifiers are first-order variables unless the vocabulary
declares them as constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union


class Fragment(str, Enum):
    FOL = "FOL"
    MSOL = "MSOL"
    CFOL = "CFOL"
    CMSOL = "CMSOL"

    @property
    def has_sets(self) -> bool:
        return self in (Fragment.MSOL, Fragment.CMSOL)

    @property
    def has_counting(self) -> bool:
        return self in (Fragment.CFOL, Fragment.CMSOL)

    @classmethod
    def join(cls, sets: bool, counting: bool) -> Fragment:
        if sets:
            return cls.CMSOL if counting else cls.MSOL
        return cls.CFOL if counting else cls.FOL

    def includes(self, other: Fragment) -> bool:
        return (self.has_sets or not other.has_sets) and (self.has_counting or not other.has_counting)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class In:
    elem: Term
    set_var: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsSet:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ForallSet:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Count:
    """D[k,m] x. body: the number of witnesses is k modulo m."""

    k: int
    m: int
    var: str
    body: "Formula"

    def __post_init__(self):
        if self.m < 2 or not 0 <= self.k < self.m:
            raise ValueError(f"counting quantifier needs 0 <= k < m and m >= 2, got D[{self.k},{self.m}]")


Formula = Union[Top, Bottom, Rel, Eq, In, Not, And, Or, Implies, Iff,
                Exists, Forall, ExistsSet, ForallSet, Count]

ATOMS = (Top, Bottom, Rel, Eq, In)
BINARY = (And, Or, Implies, Iff)
POINT_QUANTIFIERS = (Exists, Forall)
SET_QUANTIFIERS = (ExistsSet, ForallSet)


def is_set_var(name: str) -> bool:
    return name[:1].isupper()


def conj(*fs: Formula) -> Formula:
    fs = [f for f in fs if not isinstance(f, Top)]
    if not fs:
        return Top()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    fs = [f for f in fs if not isinstance(f, Bottom)]
    if not fs:
        return Bottom()
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


# --- measurements -----------------------------------------------------------

def qrank(f: Formula, variant: int = 2) -> int:
    """Quantifier rank; variant 1 charges 1 for D[k,m], variant 2 charges m."""
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return qrank(f.body, variant)
    if isinstance(f, BINARY):
        return max(qrank(f.left, variant), qrank(f.right, variant))
    if isinstance(f, Count):
        return (f.m if variant == 2 else 1) + qrank(f.body, variant)
    return 1 + qrank(f.body, variant)


def fragment(f: Formula) -> Fragment:
    sets = counting = False
    for node in walk(f):
        if isinstance(node, (ExistsSet, ForallSet, In)):
            sets = True
        elif isinstance(node, Count):
            counting = True
    return Fragment.join(sets, counting)


def moduli(f: Formula) -> frozenset[int]:
    return frozenset(node.m for node in walk(f) if isinstance(node, Count))


def walk(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from walk(f.body)
    elif isinstance(f, BINARY):
        yield from walk(f.left)
        yield from walk(f.right)
    elif not isinstance(f, ATOMS):
        yield from walk(f.body)


def _term_vars(t: Term) -> set[str]:
    return {t.name} if isinstance(t, Var) else set()


def free_vars(f: Formula) -> frozenset[str]:
    """Free first-order and set variables."""
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, Rel):
        out: set[str] = set()
        for t in f.args:
            out |= _term_vars(t)
        return frozenset(out)
    if isinstance(f, Eq):
        return frozenset(_term_vars(f.left) | _term_vars(f.right))
    if isinstance(f, In):
        return frozenset(_term_vars(f.elem) | {f.set_var})
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def is_quantifier_free(f: Formula) -> bool:
    return qrank(f, 1) == 0


def constants_of(f: Formula) -> frozenset[str]:
    out = set()
    for node in walk(f):
        if isinstance(node, Rel):
            out |= {t.name for t in node.args if isinstance(t, Const)}
        elif isinstance(node, Eq):
            out |= {t.name for t in (node.left, node.right) if isinstance(t, Const)}
        elif isinstance(node, In) and isinstance(node.elem, Const):
            out.add(node.elem.name)
    return frozenset(out)


def relations_of(f: Formula) -> frozenset[tuple[str, int]]:
    return frozenset((n.name, len(n.args)) for n in walk(f) if isinstance(n, Rel))


# --- substitution -----------------------------------------------------------

def substitute(f: Formula, mapping: dict[str, Term]) -> Formula:
    """Simultaneously replace free first-order variables by terms.

    Bound variables that would capture a substituted variable are renamed.
    """
    if not mapping:
        return f
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Rel):
        return Rel(f.name, tuple(_sub_term(t, mapping) for t in f.args))
    if isinstance(f, Eq):
        return Eq(_sub_term(f.left, mapping), _sub_term(f.right, mapping))
    if isinstance(f, In):
        return In(_sub_term(f.elem, mapping), f.set_var)
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, BINARY):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != f.var}
    incoming = set()
    for t in inner.values():
        incoming |= _term_vars(t)
    var, body = f.var, f.body
    if var in incoming:
        taken = incoming | free_vars(body) | set(inner)
        fresh = _fresh(var, taken)
        body = substitute(body, {var: Var(fresh)})
        var = fresh
    body = substitute(body, inner)
    if isinstance(f, Count):
        return Count(f.k, f.m, var, body)
    return type(f)(var, body)


def _sub_term(t: Term, mapping: dict[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def _fresh(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


# --- printing ---------------------------------------------------------------

def to_text(f: Formula) -> str:
    """Render in the parser's grammar; re-parsing yields an equal AST."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Rel):
        return f"{f.name}({','.join(str(t) for t in f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, In):
        return f"{f.elem} in {f.set_var}"
    if isinstance(f, Not):
        return f"~{_wrap(f.body)}"
    if isinstance(f, BINARY):
        op = {And: "&", Or: "|", Implies: "->", Iff: "<->"}[type(f)]
        return f"({to_text(f.left)} {op} {to_text(f.right)})"
    if isinstance(f, Count):
        return f"(D[{f.k},{f.m}] {f.var}. {to_text(f.body)})"
    kw = {Exists: "exists", Forall: "forall", ExistsSet: "existsS", ForallSet: "forallS"}[type(f)]
    return f"({kw} {f.var}. {to_text(f.body)})"


def _wrap(f: Formula) -> str:
    text = to_text(f)
    if isinstance(f, (Eq, In)):
        return f"({text})"
    return text
