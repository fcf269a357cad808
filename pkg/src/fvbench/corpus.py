"""A small corpus of graph sentences used by the FV checks and the CLI."""

from __future__ import annotations

from fvbench.logic.parser import parse_sentence
from fvbench.logic.syntax import Formula
from fvbench.structures import GRAPHS, Vocabulary

SENTENCES: dict[str, str] = {
    "edge-existence": "exists x. exists y. E(x,y)",
    "connectivity": "forallS X. ((exists x. x in X) & (exists x. ~ x in X)) -> "
                    "exists x. exists y. (x in X & ~ y in X & E(x,y))",
    "even-cardinality": "D[0,2] x. x = x",
    "isolated-vertex": "exists x. forall y. ~E(x,y)",
    "dominating-vertex": "exists x. forall y. (x = y | E(x,y))",
    "2-colorability": "existsS X. forall x. forall y. E(x,y) -> ((x in X -> ~ y in X) & (~ x in X -> y in X))",
}


def standard_corpus(vocabulary: Vocabulary = GRAPHS) -> list[tuple[str, Formula]]:
    return [(name, parse_sentence(text, vocabulary)) for name, text in SENTENCES.items()]
