"""Brute-force model checking.

Formulas are compiled once into nested closures; set variables hold int
bitmasks over the universe and range over all subsets in order of
increasing size.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Any, Callable, Mapping

from fvbench.logic.syntax import (
    And, Bottom, Count, Eq, Exists, ExistsSet, Forall, ForallSet, Formula, Iff,
    Implies, In, Not, Or, Rel, Top, Var, constants_of, free_vars, is_set_var, relations_of,
)
from fvbench.structures import Structure, VocabularyError


class EvaluationError(ValueError):
    pass


@lru_cache(maxsize=None)
def subsets_by_size(n: int) -> tuple[int, ...]:
    return tuple(sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m)))


def _term(t) -> Callable:
    if isinstance(t, Var):
        name = t.name
        return lambda ctx, env: env[name]
    name = t.name
    return lambda ctx, env: ctx[2][name]


@lru_cache(maxsize=4096)
def compile_formula(f: Formula) -> Callable[[tuple, dict], bool]:
    """Closure ``fn(ctx, env)`` with ``ctx = (n, relations_by_name, constants_by_name)``."""
    if isinstance(f, Top):
        return lambda ctx, env: True
    if isinstance(f, Bottom):
        return lambda ctx, env: False
    if isinstance(f, Rel):
        name = f.name
        terms = [_term(t) for t in f.args]
        if len(terms) == 2:
            t0, t1 = terms
            return lambda ctx, env: (t0(ctx, env), t1(ctx, env)) in ctx[1][name]
        return lambda ctx, env: tuple(t(ctx, env) for t in terms) in ctx[1][name]
    if isinstance(f, Eq):
        l, r = _term(f.left), _term(f.right)
        return lambda ctx, env: l(ctx, env) == r(ctx, env)
    if isinstance(f, In):
        e, sv = _term(f.elem), f.set_var
        return lambda ctx, env: bool(env[sv] >> e(ctx, env) & 1)
    if isinstance(f, Not):
        b = compile_formula(f.body)
        return lambda ctx, env: not b(ctx, env)
    if isinstance(f, And):
        l, r = compile_formula(f.left), compile_formula(f.right)
        return lambda ctx, env: l(ctx, env) and r(ctx, env)
    if isinstance(f, Or):
        l, r = compile_formula(f.left), compile_formula(f.right)
        return lambda ctx, env: l(ctx, env) or r(ctx, env)
    if isinstance(f, Implies):
        l, r = compile_formula(f.left), compile_formula(f.right)
        return lambda ctx, env: (not l(ctx, env)) or r(ctx, env)
    if isinstance(f, Iff):
        l, r = compile_formula(f.left), compile_formula(f.right)
        return lambda ctx, env: l(ctx, env) == r(ctx, env)
    body = compile_formula(f.body)
    var = f.var
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)

        def point_quant(ctx, env):
            old = env.get(var, _MISSING)
            try:
                for a in range(ctx[0]):
                    env[var] = a
                    if body(ctx, env) == want:
                        return want
                return not want
            finally:
                _restore(env, var, old)
        return point_quant
    if isinstance(f, (ExistsSet, ForallSet)):
        want = isinstance(f, ExistsSet)

        def set_quant(ctx, env):
            old = env.get(var, _MISSING)
            try:
                for mask in subsets_by_size(ctx[0]):
                    env[var] = mask
                    if body(ctx, env) == want:
                        return want
                return not want
            finally:
                _restore(env, var, old)
        return set_quant
    if isinstance(f, Count):
        k, m = f.k, f.m

        def count_quant(ctx, env):
            old = env.get(var, _MISSING)
            try:
                c = 0
                for a in range(ctx[0]):
                    env[var] = a
                    if body(ctx, env):
                        c += 1
                return c % m == k
            finally:
                _restore(env, var, old)
        return count_quant
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


def _restore(env, var, old):
    if old is _MISSING:
        env.pop(var, None)
    else:
        env[var] = old


def context(s: Structure) -> tuple:
    v = s.vocabulary
    return (s.size, dict(zip(v.relation_names, s.relations)), dict(zip(v.constants, s.constants)))


def check_vocabulary(f: Formula, s: Structure) -> None:
    v = s.vocabulary
    for name, arity in relations_of(f):
        if not v.has_relation(name) or v.arity(name) != arity:
            raise VocabularyError(f"relation {name}/{arity} is not in the structure's vocabulary")
    missing = constants_of(f) - set(v.constants)
    if missing:
        raise VocabularyError(f"constants {sorted(missing)} are not in the structure's vocabulary")


def _to_mask(value: Any) -> int:
    if isinstance(value, int):
        return value
    mask = 0
    for x in value:
        mask |= 1 << x
    return mask


def evaluate(f: Formula, s: Structure, assignment: Mapping[str, Any] | None = None) -> bool:
    """Tarskian satisfaction ``s |= f[assignment]``.

    First-order variables map to elements, set variables to a bitmask or
    an iterable of elements.
    """
    check_vocabulary(f, s)
    assignment = dict(assignment or {})
    missing = free_vars(f) - set(assignment)
    if missing:
        raise EvaluationError(f"unassigned free variable(s): {', '.join(sorted(missing))}")
    env = {}
    for name, value in assignment.items():
        if is_set_var(name):
            env[name] = _to_mask(value)
        else:
            if not 0 <= value < s.size:
                raise EvaluationError(f"{name} is assigned {value}, outside the universe")
            env[name] = value
    return compile_formula(f)(context(s), env)

