"""The rule language: syntax trees, parser, static checks and evaluation."""

from .ast import AnalyticRule, free_variables
from .checks import check_coherence
from .errors import CoherenceError, FOEError, KindError, OpenFormulaError, ParseError
from .parser import load_rule, parse_formula, parse_rule
from .printer import to_text
from .semantics import apply_rule, check_well_defined, eliminate_quantifiers, eval_by_elimination, eval_formula

__all__ = [
    "AnalyticRule", "CoherenceError", "FOEError", "KindError", "OpenFormulaError", "ParseError",
    "apply_rule", "check_coherence", "check_well_defined", "eliminate_quantifiers", "eval_by_elimination",
    "eval_formula", "free_variables", "load_rule", "parse_formula", "parse_rule", "to_text",
]
