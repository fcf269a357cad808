"""Text formats for structures and operations.

Structure file (elements are numbered from 1; simple binary relations list
each edge once):

    relations: E:2
    constants: a
    flags: simple
    size: 3
    E: 1 2; 2 3
    a: 1

Operation file (one key per line, formulas in the logic grammar; lines
starting with # are comments):

    name: my-op
    base: union
    k: 1
    source: relations=E:2; flags=simple
    target: relations=E:2; flags=simple
    domain(x): true
    E(x,y): ~E(x,y) & ~x = y

Variable lists in parentheses are optional; the defaults are x, y, ... for
scalar schemes and x1..xk, y1..yk, ... for vectorized ones.
"""

from __future__ import annotations

import re
from pathlib import Path

from fvbench.structures import Structure, StructureError, Vocabulary
from fvbench.transduction import BinaryOp, SchemeError, scheme_from_text, union_vocabulary


def _fields(text: str) -> list[tuple[str, str]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: value'")
        out.append((key.strip(), value.strip()))
    return out


def format_structure(s: Structure) -> str:
    v = s.vocabulary
    lines = ["relations: " + ",".join(f"{n}:{a}" for n, a in v.relations)]
    if v.constants:
        lines.append("constants: " + ",".join(v.constants))
    if v.simple:
        lines.append("flags: simple")
    lines.append(f"size: {s.size}")
    for (name, arity), ts in zip(v.relations, s.relations):
        if v.simple and arity == 2:
            ts = [t for t in ts if t[0] < t[1]]
        body = "; ".join(" ".join(str(x + 1) for x in t) for t in sorted(ts))
        lines.append(f"{name}: {body}".rstrip())
    for c, x in zip(v.constants, s.constants):
        lines.append(f"{c}: {x + 1}")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> Structure:
    fields = _fields(text)
    head = {k: v for k, v in fields if k in ("relations", "constants", "flags", "size")}
    if "size" not in head:
        raise StructureError("missing 'size' field")
    parts = [f"relations={head.get('relations', '')}"]
    if head.get("constants"):
        parts.append(f"constants={head['constants']}")
    if head.get("flags"):
        parts.append(f"flags={head['flags']}")
    v = Vocabulary.parse("; ".join(parts))
    n = int(head["size"])
    rels: dict[str, list] = {name: [] for name in v.relation_names}
    consts: dict[str, int] = {}
    for key, value in fields:
        if key in head:
            continue
        if v.has_relation(key):
            for chunk in value.split(";"):
                if chunk.strip():
                    rels[key].append(tuple(int(x) - 1 for x in chunk.split()))
        elif key in v.constants:
            consts[key] = int(value) - 1
        else:
            raise StructureError(f"unknown field {key!r}")
    return Structure.build(v, n, rels, consts, symmetrize=v.simple)


def read_structure(path: str | Path) -> Structure:
    return parse_structure(Path(path).read_text())


def write_structure(s: Structure, path: str | Path) -> None:
    Path(path).write_text(format_structure(s))


_FORMULA_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)(?:\(([^)]*)\))?$")


def parse_op(text: str) -> BinaryOp:
    fields = _fields(text)
    meta = {}
    formulas: dict[str, tuple[list[str] | None, str]] = {}
    for key, value in fields:
        if key in ("name", "base", "k", "source", "target"):
            meta[key] = value
            continue
        m = _FORMULA_KEY.match(key)
        if not m:
            raise SchemeError(f"bad key {key!r}")
        vars_ = [v.strip() for v in m.group(2).split(",")] if m.group(2) is not None else None
        formulas[m.group(1)] = (vars_, value)
    for req in ("source", "target", "domain"):
        if req not in meta and req not in formulas:
            raise SchemeError(f"missing {req!r}")
    name = meta.get("name", "custom")
    base = meta.get("base", "union")
    k = int(meta.get("k", "1"))
    source = Vocabulary.parse(meta["source"])
    target = Vocabulary.parse(meta["target"])
    base_vocab = union_vocabulary(source) if base == "union" else source
    domain_vars, domain = formulas.pop("domain")
    rel_vars = {n: v for n, (v, _) in formulas.items() if v is not None}
    rels = {n: f for n, (_, f) in formulas.items()}
    scheme = scheme_from_text(base_vocab, target, domain, rels, domain_vars, rel_vars, k=k)
    return BinaryOp(name, source, target, base, scheme)


def read_op(path: str | Path) -> BinaryOp:
    return parse_op(Path(path).read_text())
