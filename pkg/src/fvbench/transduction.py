"""Quantifier-free translation schemes and the binary operations built from them.

A sum-like operation is a scalar scheme applied to the tagged disjoint
union: the union over the primed vocabulary plus a unary relation
``side`` holding exactly the left operand's elements. Product-like
operations use k-vectorized schemes over the same base; connection-like
operations use a scalar scheme over the k-sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from fvbench.enumeration import enumerate_structures
from fvbench.logic.parser import parse
from fvbench.logic.syntax import (
    And, Bottom, Const, Count, Eq, Exists, ExistsSet, Forall, ForallSet, Formula, Iff, Implies,
    In, Not, Or, Rel, Top, Var, conj, constants_of, disj, free_vars, is_quantifier_free,
    relations_of, substitute,
)
from fvbench.structures import (
    GRAPHS, LABELED_GRAPHS, Structure, Vocabulary, VocabularyError, check_same_vocabulary,
    disjoint_union, k_sum,
)

SIDE = "side"


class SchemeError(ValueError):
    pass


class UnknownOperation(KeyError):
    pass


@lru_cache(maxsize=None)
def union_vocabulary(v: Vocabulary) -> Vocabulary:
    if v.has_relation(SIDE):
        raise VocabularyError(f"the relation name {SIDE!r} is reserved for operand tagging")
    return v.primed().with_relation(SIDE, 1) if v.constants else v.with_relation(SIDE, 1)


def tagged_union(a: Structure, b: Structure) -> Structure:
    u = disjoint_union(a, b)
    rels = u.relations + (frozenset((x,) for x in range(a.size)),)
    return Structure(union_vocabulary(a.vocabulary), u.size, rels, u.constants, _checked=False)


# --- code generation for quantifier-free formulas ---------------------------

def _py_expr(f: Formula, names: dict[str, str], rel_index: dict[str, int], const_index: dict[str, int]) -> str:
    def term(t):
        if isinstance(t, Var):
            return names[t.name]
        return f"C[{const_index[t.name]}]"

    if isinstance(f, Top):
        return "True"
    if isinstance(f, Bottom):
        return "False"
    if isinstance(f, Rel):
        args = ", ".join(term(t) for t in f.args)
        if len(f.args) == 1:
            args += ","
        return f"(({args}) in R[{rel_index[f.name]}])"
    if isinstance(f, Eq):
        return f"({term(f.left)} == {term(f.right)})"
    if isinstance(f, Not):
        return f"(not {_py_expr(f.body, names, rel_index, const_index)})"
    if isinstance(f, (And, Or, Implies, Iff)):
        l = _py_expr(f.left, names, rel_index, const_index)
        r = _py_expr(f.right, names, rel_index, const_index)
        if isinstance(f, And):
            return f"({l} and {r})"
        if isinstance(f, Or):
            return f"({l} or {r})"
        if isinstance(f, Implies):
            return f"((not {l}) or {r})"
        return f"({l} == {r})"
    raise SchemeError(f"not quantifier-free: {f!r}")


class _NoBits(Exception):
    pass


# (row index, row bits) -> pair tuples, shared by all compiled schemes
_ROW_PAIRS: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}


def _bit_expr(f: Formula, names: dict[str, str], rel_index: dict[str, int], const_index: dict[str, int],
              pre: dict[str, list[str]]) -> str:
    """Row bitset for a binary QF formula: bit y of the value at row x.

    ``names`` maps the two variables to "x" and "y". Tables the row
    expression needs are added to ``pre`` as setup lines.
    """

    def kind(t):
        if isinstance(t, Var):
            return names[t.name]
        return f"C[{const_index[t.name]}]"

    def table(name, lines):
        pre.setdefault(name, lines)
        return name

    def rec(g):
        if isinstance(g, Top):
            return "FULL"
        if isinstance(g, Bottom):
            return "0"
        if isinstance(g, Not):
            return f"(FULL ^ {rec(g.body)})"
        if isinstance(g, (And, Or, Implies, Iff)):
            l, r = rec(g.left), rec(g.right)
            if isinstance(g, And):
                return f"({l} & {r})"
            if isinstance(g, Or):
                return f"({l} | {r})"
            if isinstance(g, Implies):
                return f"((FULL ^ {l}) | {r})"
            return f"(FULL ^ ({l} ^ {r}))"
        if isinstance(g, Eq):
            s, t = sorted((kind(g.left), kind(g.right)), key=lambda k: (k != "x", k != "y", k))
            if s == t:
                return "FULL"
            if (s, t) == ("x", "y"):
                return "(1 << x)"
            if s == "y":
                return f"(1 << {t})"
            return f"(FULL if {s} == {t} else 0)"
        if isinstance(g, Rel):
            i = rel_index[g.name]
            ks = [kind(t) for t in g.args]
            if "y" not in ks:
                args = ", ".join(ks) + ("," if len(ks) == 1 else "")
                if ks == ["x"] or ks == ["x", "x"]:
                    tup = "v, " * len(ks)
                    return table(f"U{i}_{len(ks)}", [f"[FULL if ({tup}) in R[{i}] else 0 for v in range(n)]"]) + "[x]"
                return f"(FULL if ({args}) in R[{i}] else 0)"
            if len(ks) != 2:
                if ks == ["y"]:
                    return table(f"M{i}", [f"sum(1 << v for (v,) in R[{i}])"])
                raise _NoBits
            a, b = ks
            if (a, b) == ("x", "y"):
                return table(f"A{i}", ["[0] * n", f"for a, b in R[{i}]:", f"    A{i}[a] |= 1 << b"]) + "[x]"
            if (a, b) == ("y", "x"):
                return table(f"T{i}", ["[0] * n", f"for a, b in R[{i}]:", f"    T{i}[b] |= 1 << a"]) + "[x]"
            if (a, b) == ("y", "y"):
                return table(f"L{i}", [f"sum(1 << a for a, b in R[{i}] if a == b)"])
            if a == "y":
                return table(f"H{len(pre)}", [f"sum(1 << p for p, q in R[{i}] if q == {b})"])
            return table(f"H{len(pre)}", [f"sum(1 << q for p, q in R[{i}] if p == {a})"])
        raise _NoBits

    return rec(f)


@dataclass(frozen=True)
class TranslationScheme:
    """(domain; phi_1..phi_m) with explicit variable lists.

    ``domain_vars`` has k variables; each relation formula has k*arity
    variables, grouped per target coordinate.
    """

    source: Vocabulary
    target: Vocabulary
    domain_vars: tuple[str, ...]
    domain: Formula
    relations: tuple[tuple[str, tuple[str, ...], Formula], ...]
    _run: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        k = len(self.domain_vars)
        if k < 1:
            raise SchemeError("a scheme needs at least one domain variable")
        names = [name for name, _, _ in self.relations]
        if sorted(names) != sorted(self.target.relation_names) or len(set(names)) != len(names):
            raise SchemeError("exactly one formula per target relation is required")
        for c in self.target.constants:
            if c not in self.source.constants:
                raise SchemeError(f"target constant {c!r} must be copied from the source")
        if self.target.constants and k != 1:
            raise SchemeError("constants are only supported by scalar schemes")
        self._check(self.domain, self.domain_vars, "domain")
        for name, vars_, f in self.relations:
            if len(vars_) != k * self.target.arity(name):
                raise SchemeError(f"{name} needs {k * self.target.arity(name)} variables, got {len(vars_)}")
            self._check(f, vars_, name)
        object.__setattr__(self, "_run", self._compile())

    @property
    def k(self) -> int:
        return len(self.domain_vars)

    def formula(self, name: str) -> tuple[tuple[str, ...], Formula]:
        for n, vars_, f in self.relations:
            if n == name:
                return vars_, f
        raise SchemeError(f"no formula for {name!r}")

    def _check(self, f: Formula, vars_: Sequence[str], label: str) -> None:
        if len(set(vars_)) != len(vars_):
            raise SchemeError(f"{label}: repeated variable")
        if not is_quantifier_free(f):
            raise SchemeError(f"{label}: formula is not quantifier-free")
        extra = free_vars(f) - set(vars_)
        if extra:
            raise SchemeError(f"{label}: free variables {sorted(extra)} not declared")
        for rname, arity in relations_of(f):
            if not self.source.has_relation(rname) or self.source.arity(rname) != arity:
                raise SchemeError(f"{label}: {rname}/{arity} is not a source relation")
        if constants_of(f) - set(self.source.constants):
            raise SchemeError(f"{label}: unknown constants {sorted(constants_of(f) - set(self.source.constants))}")

    def _bit_lines(self, vars_, f, rel_index, const_index) -> list[str]:
        # one big-int expression per row instead of one test per pair
        pre: dict[str, list[str]] = {}
        expr = _bit_expr(f, {vars_[0]: "x", vars_[1]: "y"}, rel_index, const_index, pre)
        lines = ["    FULL = (1 << n) - 1"]
        for name, setup in pre.items():
            lines.append(f"    {name} = {setup[0]}")
            lines += ["    " + l for l in setup[1:]]
        lines += [
            "    rel = []",
            "    if len(dom) == n:",
            "        for x in range(n):",
            f"            row = {expr} & FULL",
            "            key = (x, row)",
            "            pairs = ROWS.get(key)",
            "            if pairs is None:",
            "                if len(ROWS) > 1 << 18:",
            "                    ROWS.clear()",
            "                pairs = ROWS[key] = tuple((x, y) for y in range(row.bit_length()) if row >> y & 1)",
            "            rel += pairs",
            "    else:",
            "        dmask = sum(1 << v for v in dom)",
            "        pos = {v: i for i, v in enumerate(dom)}",
            "        for p0, x in enumerate(dom):",
            f"            row = {expr} & dmask",
            "            while row:",
            "                low = row & -row",
            "                rel.append((p0, pos[low.bit_length() - 1]))",
            "                row ^= low",
            "    out.append(frozenset(rel))",
        ]
        return lines

    def _compile(self, pairwise: bool = False) -> Callable:
        k = self.k
        rel_index = {name: i for i, name in enumerate(self.source.relation_names)}
        const_index = {c: i for i, c in enumerate(self.source.constants)}
        lines = ["def _run(n, R, C):"]
        dnames = {v: f"d{i}" for i, v in enumerate(self.domain_vars)}
        dexpr = _py_expr(self.domain, dnames, rel_index, const_index)
        if k == 1:
            lines.append(f"    dom = [d0 for d0 in range(n) if {dexpr}]")
        else:
            unpack = ", ".join(f"d{i}" for i in range(k))
            lines.append(f"    dom = [({unpack},) for ({unpack},) in product(range(n), repeat={k}) if {dexpr}]")
        lines.append("    out = []")
        for name in self.target.relation_names:
            vars_, f = self.formula(name)
            arity = self.target.arity(name)
            if k == 1 and arity == 2 and not pairwise:
                try:
                    lines += self._bit_lines(vars_, f, rel_index, const_index)
                    continue
                except _NoBits:
                    pass
            names = {}
            loops = []
            for j in range(arity):
                coords = [f"v{j}_{i}" for i in range(k)]
                for i in range(k):
                    names[vars_[j * k + i]] = coords[i]
                target = coords[0] if k == 1 else "(" + ", ".join(coords) + ",)"
                loops.append(f"for p{j}, {target} in enumerate(dom)")
            expr = _py_expr(f, names, rel_index, const_index)
            tup = ", ".join(f"p{j}" for j in range(arity)) + ("," if arity == 1 else "")
            lines.append(f"    out.append(frozenset(({tup}) {' '.join(loops)} if {expr}))")
        lines.append("    return dom, out")
        src = "\n".join(lines)
        ns = {"product": product, "ROWS": _ROW_PAIRS}
        exec(compile(src, "<scheme>", "exec"), ns)
        return ns["_run"]

    def __call__(self, s: Structure) -> Structure:
        return transduce(self, s)


def transduce(t: TranslationScheme, s: Structure, check: bool = True) -> Structure:
    """Universe: tuples satisfying the domain formula, in lexicographic order.

    ``check=False`` skips validating the output (symmetry and irreflexivity
    for simple targets); hot loops use it once an operation is trusted.
    """
    if s.vocabulary != t.source:
        raise VocabularyError("structure is not over the scheme's source vocabulary")
    dom, rels = t._run(s.size, s.relations, s.constants)
    consts = []
    for c in t.target.constants:
        x = s.const(c)
        try:
            consts.append(dom.index(x))
        except ValueError:
            raise SchemeError(f"constant {c} falls outside the transduced universe") from None
    return Structure(t.target, len(dom), tuple(rels), tuple(consts), _checked=check)


def translate(t: TranslationScheme, f: Formula) -> Formula:
    """T#(f): substitute target atoms by their defining source formulas."""
    if t.k != 1:
        raise SchemeError("translation of vectorized schemes is not supported")
    missing = constants_of(f) - set(t.target.constants)
    if missing:
        raise SchemeError(f"constants {sorted(missing)} are not in the target vocabulary")
    dvar = t.domain_vars[0]

    def dom(x: str) -> Formula:
        return substitute(t.domain, {dvar: Var(x)})

    def tr(g: Formula) -> Formula:
        if isinstance(g, Rel):
            if not t.target.has_relation(g.name) or t.target.arity(g.name) != len(g.args):
                raise SchemeError(f"{g.name}/{len(g.args)} is not a target relation")
            vars_, body = t.formula(g.name)
            return substitute(body, dict(zip(vars_, g.args)))
        if isinstance(g, (Top, Bottom, Eq, In)):
            return g
        if isinstance(g, Not):
            return Not(tr(g.body))
        if isinstance(g, (And, Or, Implies, Iff)):
            return type(g)(tr(g.left), tr(g.right))
        if isinstance(g, Exists):
            return Exists(g.var, conj(dom(g.var), tr(g.body)))
        if isinstance(g, Forall):
            d = dom(g.var)
            return Forall(g.var, tr(g.body) if isinstance(d, Top) else Implies(d, tr(g.body)))
        if isinstance(g, Count):
            return Count(g.k, g.m, g.var, conj(dom(g.var), tr(g.body)))
        if isinstance(g, (ExistsSet, ForallSet)):
            # membership is only ever tested on domain elements, so no relativization
            return type(g)(g.var, tr(g.body))
        raise TypeError(f"not a formula: {g!r}")

    # bound variables of f must not collide with the scheme's own variable names
    return tr(f)


def scheme_from_text(source: Vocabulary, target: Vocabulary, domain: str,
                     relations: dict[str, str], domain_vars: Sequence[str] | None = None,
                     relation_vars: dict[str, Sequence[str]] | None = None, k: int = 1) -> TranslationScheme:
    """Build a scheme from formula strings, defaulting variable names to x, y, z, ... (x1.., y1.. when k > 1)."""
    relation_vars = dict(relation_vars or {})
    letters = "xyzuvw"
    if domain_vars is None:
        domain_vars = ("x",) if k == 1 else tuple(f"x{i + 1}" for i in range(k))
    rels = []
    for name in target.relation_names:
        arity = target.arity(name)
        vars_ = relation_vars.get(name)
        if vars_ is None:
            if k == 1:
                vars_ = tuple(letters[j] for j in range(arity))
            else:
                vars_ = tuple(f"{letters[j]}{i + 1}" for j in range(arity) for i in range(k))
        if name not in relations:
            raise SchemeError(f"missing formula for target relation {name!r}")
        rels.append((name, tuple(vars_), parse(relations[name], source, free=vars_)))
    return TranslationScheme(source, target, tuple(domain_vars), parse(domain, source, free=domain_vars), tuple(rels))


# --- binary operations -------------------------------------------------------

SUM_LIKE = "sum-like"
PRODUCT_LIKE = "product-like"
CONNECTION_LIKE = "connection-like"


@dataclass(frozen=True)
class BinaryOp:
    name: str
    source: Vocabulary
    target: Vocabulary
    base: str  # "union" or "ksum"
    scheme: TranslationScheme

    def __post_init__(self):
        if self.base == "union":
            expected = union_vocabulary(self.source)
        elif self.base == "ksum":
            if not self.source.constants:
                raise SchemeError("k-sum based operations need constants")
            expected = self.source
        else:
            raise SchemeError(f"unknown base {self.base!r}")
        if self.scheme.source != expected:
            raise SchemeError(f"{self.name}: scheme must be over {expected.describe()}")
        if self.scheme.target != self.target:
            raise SchemeError(f"{self.name}: scheme target differs from the operation's target")
        if self.base == "ksum" and self.scheme.k != 1:
            raise SchemeError("connection-like operations use scalar schemes")

    @property
    def kind(self) -> str:
        if self.base == "ksum":
            return CONNECTION_LIKE
        return SUM_LIKE if self.scheme.k == 1 else PRODUCT_LIKE

    def __call__(self, a: Structure, b: Structure) -> Structure:
        return apply_op(self, a, b)


def apply_op(op: BinaryOp, a: Structure, b: Structure, check: bool = True) -> Structure:
    v = check_same_vocabulary(a, b)
    if v != op.source:
        raise VocabularyError(f"{op.name} expects {op.source.describe()}")
    base = tagged_union(a, b) if op.base == "union" else k_sum(a, b)
    return transduce(op.scheme, base, check)


def make_op(name: str, source: Vocabulary, target: Vocabulary, domain: str, relations: dict[str, str],
            base: str = "union", k: int = 1) -> BinaryOp:
    base_vocab = union_vocabulary(source) if base == "union" else source
    return BinaryOp(name, source, target, base, scheme_from_text(base_vocab, target, domain, relations, k=k))


def _builtins() -> dict[str, BinaryOp]:
    ops = [
        make_op("disjoint-union", GRAPHS, GRAPHS, "true", {"E": "E(x,y)"}),
        make_op("complement-union", GRAPHS, GRAPHS, "true", {"E": "~E(x,y) & ~x = y"}),
        make_op("bridge-union", LABELED_GRAPHS, GRAPHS, "true",
                {"E": "E(x,y) | (x = a & y = a') | (x = a' & y = a)"}),
        make_op("labeled-union", LABELED_GRAPHS, GRAPHS, "true", {"E": "E(x,y)"}),
        make_op("k-sum", LABELED_GRAPHS, GRAPHS, "true", {"E": "E(x,y)"}, base="ksum"),
        make_op("cartesian-product", GRAPHS, GRAPHS, "side(x1) & ~side(x2)",
                {"E": "(E(x1,y1) & x2 = y2) | (x1 = y1 & E(x2,y2))"}, k=2),
        make_op("tensor-product", GRAPHS, GRAPHS, "side(x1) & ~side(x2)",
                {"E": "E(x1,y1) & E(x2,y2)"}, k=2),
    ]
    return {op.name: op for op in ops}


_REGISTRY = _builtins()


def builtin_ops() -> list[BinaryOp]:
    return list(_REGISTRY.values())


def lookup(name: str) -> BinaryOp:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownOperation(f"unknown operation {name!r}; known: {', '.join(_REGISTRY)}") from None


# --- enumeration of all sum-like operations ---------------------------------

MAX_CANDIDATES = 1 << 14


def _atoms(vocab: Vocabulary, vars_: Sequence[str]) -> list[Formula]:
    terms = [Var(v) for v in vars_] + [Const(c) for c in vocab.constants]
    atoms: list[Formula] = []
    for name, arity in vocab.relations:
        for args in product(terms, repeat=arity):
            atoms.append(Rel(name, args))
    for i, s in enumerate(terms):
        for t in terms[i + 1:]:
            atoms.append(Eq(s, t))
    return atoms


def _valuations(atoms: list[Formula], vars_: Sequence[str], probes: list[Structure]) -> list[tuple[bool, ...]]:
    from fvbench.logic.semantics import compile_formula, context

    fns = [compile_formula(a) for a in atoms]
    seen = set()
    for s in probes:
        ctx = context(s)
        for values in product(range(s.size), repeat=len(vars_)):
            env = dict(zip(vars_, values))
            seen.add(tuple(fn(ctx, env) for fn in fns))
    return sorted(seen)


def _truth_table_formula(atoms: list[Formula], vals: list[tuple[bool, ...]], chosen: Iterable[int]) -> Formula:
    chosen = list(chosen)
    if not chosen:
        return Bottom()
    if len(chosen) == len(vals):
        return Top()
    # atoms constant over every realizable valuation carry no information
    live = [i for i in range(len(atoms)) if len({v[i] for v in vals}) > 1]
    terms = []
    for c in chosen:
        lits = [atoms[i] if vals[c][i] else Not(atoms[i]) for i in live]
        terms.append(conj(*lits))
    return disj(*terms)


def _swap_map(atoms: list[Formula], vals: list[tuple[bool, ...]], x: str, y: str) -> list[int]:
    ren = {x: Var(y), y: Var(x)}
    index = {}
    for i, a in enumerate(atoms):
        index[_atom_key(a)] = i
    perm = [index[_atom_key(substitute(a, ren))] for a in atoms]
    lookup_val = {v: j for j, v in enumerate(vals)}
    return [lookup_val[tuple(v[perm[i]] for i in range(len(atoms)))] for v in vals]


def _atom_key(a: Formula):
    if isinstance(a, Eq):
        return ("=",) + tuple(sorted((type(t).__name__, t.name) for t in (a.left, a.right)))
    return ("R", a.name, tuple((type(t).__name__, t.name) for t in a.args))


def enumerate_sumlike(sigma: Vocabulary, tau: Vocabulary, probe_size: int = 3) -> list[BinaryOp]:
    """All scalar quantifier-free operations Str(sigma)^2 -> Str(tau), up to semantic equality.

    Formulas are truth tables over the realizable atomic valuations;
    two operations are identified when they agree up to isomorphism on
    every operand pair of size <= ``probe_size``.
    """
    if any(arity > 2 for v in (sigma, tau) for _, arity in v.relations):
        raise SchemeError("atom basis too large: enumeration needs relations of arity <= 2")
    base = union_vocabulary(sigma)
    operands = enumerate_structures(sigma, probe_size)
    probes = [tagged_union(a, b) for a in operands for b in operands]
    dom_atoms = _atoms(base, ["x"])
    dom_vals = _valuations(dom_atoms, ["x"], probes)
    per_rel = []
    total = 1 << len(dom_vals)
    for name, arity in tau.relations:
        vars_ = [("x", "y", "z", "u", "v", "w")[j] for j in range(arity)]
        atoms = _atoms(base, vars_)
        vals = _valuations(atoms, vars_, probes)
        if tau.simple and arity == 2:
            eq = atoms.index(Eq(Var("x"), Var("y")))
            swap = _swap_map(atoms, vals, "x", "y")
            orbits = []
            done = set()
            for j, v in enumerate(vals):
                if v[eq] or j in done:
                    continue
                orbit = sorted({j, swap[j]})
                done.update(orbit)
                orbits.append(orbit)
        else:
            orbits = [[j] for j in range(len(vals))]
        per_rel.append((name, vars_, atoms, vals, orbits))
        total *= 1 << len(orbits)
        if total > MAX_CANDIDATES:
            raise SchemeError(f"atom basis too large: more than {MAX_CANDIDATES} candidate operations")
    ops: list[BinaryOp] = []
    seen: set[tuple] = set()
    rel_choices = [range(1 << len(orbits)) for _, _, _, _, orbits in per_rel]
    for dmask in range(1 << len(dom_vals)):
        domain = _truth_table_formula(dom_atoms, dom_vals, [j for j in range(len(dom_vals)) if dmask >> j & 1])
        for masks in product(*rel_choices):
            rels = []
            for (name, vars_, atoms, vals, orbits), mask in zip(per_rel, masks):
                chosen = [j for o, orbit in enumerate(orbits) if mask >> o & 1 for j in orbit]
                rels.append((name, tuple(vars_), _truth_table_formula(atoms, vals, sorted(chosen))))
            label = f"sumlike-d{dmask}-" + "-".join(f"{n}{m}" for (n, *_), m in zip(per_rel, masks))
            try:
                scheme = TranslationScheme(base, tau, ("x",), domain, tuple(rels))
                op = BinaryOp(label, sigma, tau, "union", scheme)
                sig = tuple(apply_op(op, a, b).code for a in operands for b in operands)
            except SchemeError:
                continue  # e.g. a target constant outside the domain
            if sig in seen:
                continue
            seen.add(sig)
            ops.append(op)
    return ops


def same_operation(op1: BinaryOp, op2: BinaryOp, max_size: int = 3) -> bool:
    """Agreement up to isomorphism on all operand pairs of size <= max_size."""
    if op1.source != op2.source or op1.target != op2.target:
        return False
    operands = enumerate_structures(op1.source, max_size)
    return all(apply_op(op1, a, b).code == apply_op(op2, a, b).code for a in operands for b in operands)
