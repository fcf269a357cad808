from fvbench.logic.parser import FormulaSyntaxError, parse, parse_sentence
from fvbench.logic.semantics import EvaluationError, evaluate
from fvbench.logic.syntax import Fragment, fragment, free_vars, moduli, qrank, to_text
from fvbench.logic.types import QType, qtype, type_partition

__all__ = [
    "EvaluationError", "Fragment", "FormulaSyntaxError", "QType", "evaluate", "fragment",
    "free_vars", "moduli", "parse", "parse_sentence", "qrank", "qtype", "to_text", "type_partition",
]
