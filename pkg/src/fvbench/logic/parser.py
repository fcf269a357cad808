"""Recursive-descent parser for the formula grammar.

    exists x. phi      forall x. phi        first-order quantifiers
    existsS X. phi     forallS X. phi       set quantifiers (also exists X.)
    D[k,m] x. phi                           modular counting
    ~ & | -> <->                            by increasing looseness
    R(x,y)  x = y  x != y  x in X  true  false
"""

from __future__ import annotations

import re
from typing import Iterable

from fvbench.logic.syntax import (
    And, Bottom, Const, Count, Eq, Exists, ExistsSet, Forall, ForallSet, Formula, Iff,
    Implies, In, Not, Or, Rel, Term, Top, Var, free_vars, is_set_var,
)
from fvbench.structures import Vocabulary


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} at position {pos}")


_TOKEN = re.compile(r"\s*(?:(<->|->|!=|[()\[\],.=~&|])|([A-Za-z_][A-Za-z0-9_']*)|(\d+))")
_QUANTS = {"exists", "forall", "existsS", "forallS"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("op", m.group(1), start))
        elif m.group(2):
            out.append(("id", m.group(2), start))
        else:
            out.append(("num", m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, vocabulary: Vocabulary | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.vocab = vocabulary

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value or kind not in ("op", "id"):
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Formula:
        f = self.iff()
        kind, val, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected {val!r}", pos)
        return f

    def iff(self) -> Formula:
        f = self.implies()
        while self.peek()[1] == "<->":
            self.next()
            f = Iff(f, self.implies())
        return f

    def implies(self) -> Formula:
        f = self.disjunction()
        if self.peek()[1] == "->":
            self.next()
            return Implies(f, self.implies())
        return f

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek()[1] == "|":
            self.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~" and kind == "op":
            self.next()
            return Not(self.unary())
        if kind == "id" and val in _QUANTS:
            return self.quantifier()
        if kind == "id" and val == "D" and self.peek(1)[1] == "[":
            return self.counting()
        return self.atom()

    def bound_var(self) -> tuple[str, int]:
        kind, val, pos = self.next()
        if kind != "id":
            raise FormulaSyntaxError("expected a variable", pos)
        if self.vocab is not None and val in self.vocab.constants:
            raise FormulaSyntaxError(f"cannot quantify the constant {val!r}", pos)
        return val, pos

    def quantifier(self) -> Formula:
        _, kw, _ = self.next()
        var, pos = self.bound_var()
        self.expect(".")
        body = self.iff()
        if kw in ("existsS", "forallS") and not is_set_var(var):
            raise FormulaSyntaxError(f"set quantifier over first-order variable {var!r}", pos)
        if is_set_var(var):
            return ExistsSet(var, body) if kw.startswith("exists") else ForallSet(var, body)
        return Exists(var, body) if kw == "exists" else Forall(var, body)

    def counting(self) -> Formula:
        self.next()
        self.expect("[")
        k = self.number()
        self.expect(",")
        m = self.number()
        self.expect("]")
        var, pos = self.bound_var()
        if is_set_var(var):
            raise FormulaSyntaxError(f"counting quantifier over set variable {var!r}", pos)
        self.expect(".")
        body = self.iff()
        try:
            return Count(k, m, var, body)
        except ValueError as exc:
            raise FormulaSyntaxError(str(exc), pos) from None

    def number(self) -> int:
        kind, val, pos = self.next()
        if kind != "num":
            raise FormulaSyntaxError("expected a number", pos)
        return int(val)

    def term(self) -> Term:
        kind, val, pos = self.next()
        if kind != "id" or val in _QUANTS or val in ("in", "true", "false"):
            raise FormulaSyntaxError(f"expected a term, found {val or 'end of input'!r}", pos)
        if self.vocab is not None and val in self.vocab.constants:
            return Const(val)
        if is_set_var(val):
            raise FormulaSyntaxError(f"set variable {val!r} used as an element", pos)
        return Var(val)

    def atom(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "op" and val == "(":
            self.next()
            f = self.iff()
            self.expect(")")
            return f
        if kind == "id" and val == "true":
            self.next()
            return Top()
        if kind == "id" and val == "false":
            self.next()
            return Bottom()
        if kind == "id" and self.peek(1)[1] == "(":
            self.next()
            self.next()
            args = [self.term()]
            while self.peek()[1] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            if self.vocab is not None:
                if not self.vocab.has_relation(val):
                    raise FormulaSyntaxError(f"unknown relation {val!r}", pos)
                if self.vocab.arity(val) != len(args):
                    raise FormulaSyntaxError(f"{val} has arity {self.vocab.arity(val)}, got {len(args)}", pos)
            return Rel(val, tuple(args))
        left = self.term()
        kind, op, opos = self.next()
        if op == "=":
            return Eq(left, self.term())
        if op == "!=":
            return Not(Eq(left, self.term()))
        if op == "in":
            kind, sv, spos = self.next()
            if kind != "id" or not is_set_var(sv):
                raise FormulaSyntaxError(f"membership needs a set variable, found {sv!r}", spos)
            return In(left, sv)
        raise FormulaSyntaxError(f"expected '=', '!=' or 'in' after a term, found {op or 'end of input'!r}", opos)


def parse(text: str, vocabulary: Vocabulary | None = None, free: Iterable[str] | None = None) -> Formula:
    """Parse a formula; with ``free`` given, any other free variable is an error."""
    f = _Parser(text, vocabulary).parse()
    if free is not None:
        extra = sorted(free_vars(f) - set(free))
        if extra:
            raise FormulaSyntaxError(f"unbound variable(s): {', '.join(extra)}")
    return f


def parse_sentence(text: str, vocabulary: Vocabulary | None = None) -> Formula:
    return parse(text, vocabulary, free=())
