"""Interpretation of formulas and rules over trace prefixes.

Two independent routes decide ``prefix |= formula``:

* :func:`eval_formula` walks the tree with a variable valuation and
  enumerates ``1..|trace|`` at each quantifier, stopping at the first
  witness or counterexample;
* :func:`eval_by_elimination` first expands every quantifier into a finite
  disjunction/conjunction (:func:`eliminate_quantifiers`) and evaluates the
  resulting ground formula.

Undefined values (``None``) propagate through ``+`` and ``-``. Comparisons
are total: ``x == None`` holds only when ``x`` is ``None``, and ordering
comparisons with an undefined operand are false.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Optional

from ..events import AttrValue, EventLog, TracePrefix, is_numeric
from . import ast as A
from .errors import EvaluationError, OpenFormulaError

Valuation = Mapping[str, int]
_EMPTY: Valuation = {}


def eval_index(idx: A.IndexExpr, pfx: TracePrefix, nu: Valuation = _EMPTY) -> int:
    if isinstance(idx, A.Var):
        try:
            return nu[idx.name]
        except KeyError:
            raise EvaluationError(f"unbound index variable {idx.name!r}") from None
    if isinstance(idx, A.PosInt):
        return idx.value
    if isinstance(idx, A.Curr):
        return pfx.k
    if isinstance(idx, A.Last):
        return len(pfx.trace)
    if isinstance(idx, A.IAdd):
        return eval_index(idx.left, pfx, nu) + eval_index(idx.right, pfx, nu)
    if isinstance(idx, A.ISub):
        return eval_index(idx.left, pfx, nu) - eval_index(idx.right, pfx, nu)
    raise TypeError(f"not an index expression: {idx!r}")


def eval_expr(expr, pfx: TracePrefix, nu: Valuation = _EMPTY, stats: Optional[Counter] = None) -> AttrValue:
    if isinstance(expr, A.Accessor):
        i = eval_index(expr.index, pfx, nu)
        events = pfx.trace.events
        if 1 <= i <= len(events):
            return events[i - 1].attributes.get(expr.name)
        return None
    if isinstance(expr, A.NumLit):
        return expr.value
    if isinstance(expr, (A.StrLit, A.BoolLit)):
        return expr.value
    if isinstance(expr, A.IndexAsNum):
        return eval_index(expr.index, pfx, nu)
    if isinstance(expr, (A.Add, A.Sub)):
        left = eval_expr(expr.left, pfx, nu, stats)
        right = eval_expr(expr.right, pfx, nu, stats)
        if left is None or right is None:
            return None
        if not (is_numeric(left) and is_numeric(right)):
            if stats is not None:
                stats["non-numeric arithmetic operand"] += 1
            return None
        return float(left) + float(right) if isinstance(expr, A.Add) else float(left) - float(right)
    if isinstance(expr, A.UndefinedTarget):
        return None
    raise TypeError(f"not an expression: {expr!r}")


def _same_kind(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool)
    if is_numeric(a):
        return is_numeric(b)
    return isinstance(a, str) and isinstance(b, str)


def compare(left: AttrValue, op: str, right: AttrValue, stats: Optional[Counter] = None) -> bool:
    if op in ("==", "!="):
        if left is None or right is None:
            equal = left is None and right is None
        elif _same_kind(left, right):
            equal = left == right
        else:
            if stats is not None:
                stats["cross-kind equality"] += 1
            equal = False
        return equal if op == "==" else not equal
    if left is None or right is None:
        return False
    if not (is_numeric(left) and is_numeric(right)):
        if stats is not None:
            stats["non-numeric ordering operand"] += 1
        return False
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    return left >= right


def _holds(f: A.Formula, pfx: TracePrefix, nu: dict, stats) -> bool:
    if isinstance(f, A.Atom):
        return compare(eval_expr(f.left, pfx, nu, stats), f.op, eval_expr(f.right, pfx, nu, stats), stats)
    if isinstance(f, A.TrueF):
        return True
    if isinstance(f, A.FalseF):
        return False
    if isinstance(f, A.Not):
        return not _holds(f.body, pfx, nu, stats)
    if isinstance(f, A.And):
        return _holds(f.left, pfx, nu, stats) and _holds(f.right, pfx, nu, stats)
    if isinstance(f, A.Or):
        return _holds(f.left, pfx, nu, stats) or _holds(f.right, pfx, nu, stats)
    if isinstance(f, A.Implies):
        return (not _holds(f.left, pfx, nu, stats)) or _holds(f.right, pfx, nu, stats)
    if isinstance(f, A.Quantifier):
        n = len(pfx.trace)
        outer = nu.get(f.var)
        try:
            if isinstance(f, A.Exists):
                for c in range(1, n + 1):
                    nu[f.var] = c
                    if _holds(f.body, pfx, nu, stats):
                        return True
                return False
            for c in range(1, n + 1):
                nu[f.var] = c
                if not _holds(f.body, pfx, nu, stats):
                    return False
            return True
        finally:
            if outer is None:
                nu.pop(f.var, None)
            else:
                nu[f.var] = outer
    raise TypeError(f"not a formula: {f!r}")


def holds(f: A.Formula, pfx: TracePrefix, nu: Valuation = _EMPTY, stats: Optional[Counter] = None) -> bool:
    """Truth of a possibly open formula under valuation ``nu``."""
    return _holds(f, pfx, dict(nu), stats)


def eval_formula(f: A.Formula, pfx: TracePrefix, stats: Optional[Counter] = None) -> bool:
    """``pfx |= f`` for a closed formula; quantifiers range over the whole trace."""
    free = A.free_variables(f)
    if free:
        raise OpenFormulaError(free)
    return _holds(f, pfx, {}, stats)


# -- quantifier elimination ---------------------------------------------------


def _subst_index(idx, var: str, c: int):
    if isinstance(idx, A.Var):
        return A.PosInt(c) if idx.name == var else idx
    if isinstance(idx, (A.IAdd, A.ISub)):
        return type(idx)(_subst_index(idx.left, var, c), _subst_index(idx.right, var, c))
    return idx


def _subst_expr(expr, var: str, c: int):
    if isinstance(expr, A.IndexAsNum):
        return A.IndexAsNum(_subst_index(expr.index, var, c))
    if isinstance(expr, A.Accessor):
        return A.Accessor(_subst_index(expr.index, var, c), expr.name, expr.kind)
    if isinstance(expr, (A.Add, A.Sub)):
        return type(expr)(_subst_expr(expr.left, var, c), _subst_expr(expr.right, var, c))
    return expr


def substitute(f: A.Formula, var: str, c: int) -> A.Formula:
    """``f[var -> c]``: replace free occurrences of ``var`` with the index ``c``."""
    if isinstance(f, A.Atom):
        return A.Atom(_subst_expr(f.left, var, c), f.op, _subst_expr(f.right, var, c))
    if isinstance(f, A.Not):
        return A.Not(substitute(f.body, var, c))
    if isinstance(f, (A.And, A.Or, A.Implies)):
        return type(f)(substitute(f.left, var, c), substitute(f.right, var, c))
    if isinstance(f, A.Quantifier):
        if f.var == var:
            return f
        return type(f)(f.var, substitute(f.body, var, c))
    return f


def eliminate_quantifiers(f: A.Formula, trace_len: int) -> A.Formula:
    """Expand every quantifier over ``1..trace_len``, innermost first.

    ``exists i. p`` becomes ``p[i->1] or ... or p[i->n]`` and ``forall``
    the matching conjunction. The result is quantifier-free.
    """
    if trace_len < 1:
        raise ValueError("trace length must be positive")
    if isinstance(f, A.Not):
        return A.Not(eliminate_quantifiers(f.body, trace_len))
    if isinstance(f, (A.And, A.Or, A.Implies)):
        return type(f)(eliminate_quantifiers(f.left, trace_len), eliminate_quantifiers(f.right, trace_len))
    if isinstance(f, A.Quantifier):
        body = eliminate_quantifiers(f.body, trace_len)
        parts = [substitute(body, f.var, c) for c in range(1, trace_len + 1)]
        join = A.Or if isinstance(f, A.Exists) else A.And
        return reduce(join, parts)
    return f


def eval_ground(f: A.Formula, pfx: TracePrefix, stats: Optional[Counter] = None) -> bool:
    """Evaluate a quantifier-free, variable-free formula without short-circuiting."""
    if isinstance(f, A.Atom):
        return compare(eval_expr(f.left, pfx, _EMPTY, stats), f.op, eval_expr(f.right, pfx, _EMPTY, stats), stats)
    if isinstance(f, A.TrueF):
        return True
    if isinstance(f, A.FalseF):
        return False
    if isinstance(f, A.Not):
        return not eval_ground(f.body, pfx, stats)
    if isinstance(f, (A.And, A.Or, A.Implies)):
        left = eval_ground(f.left, pfx, stats)
        right = eval_ground(f.right, pfx, stats)
        if isinstance(f, A.And):
            return left and right
        if isinstance(f, A.Or):
            return left or right
        return (not left) or right
    raise EvaluationError(f"formula still contains a quantifier: {f!r}")


def eval_by_elimination(f: A.Formula, pfx: TracePrefix, stats: Optional[Counter] = None) -> bool:
    free = A.free_variables(f)
    if free:
        raise OpenFormulaError(free)
    return eval_ground(eliminate_quantifiers(f, len(pfx.trace)), pfx, stats)


# -- rules --------------------------------------------------------------------


def apply_rule(rule: A.AnalyticRule, pfx: TracePrefix, stats: Optional[Counter] = None) -> AttrValue:
    """Target of the first satisfied condition, else the default target."""
    for cond, target in rule.pairs:
        if _holds(cond, pfx, {}, stats):
            return eval_expr(target, pfx, _EMPTY, stats)
    return eval_expr(rule.default, pfx, _EMPTY, stats)


def prefix_lengths(n: int, k_min: int = 2, k_max: int = -1) -> range:
    """Prefix lengths for a trace of length ``n``.

    ``k_max <= 0`` counts back from ``n`` (``-1`` means ``n - 1``).
    """
    upper = n + k_max if k_max <= 0 else min(k_max, n)
    return range(max(1, k_min), upper + 1)


@dataclass(frozen=True)
class Violation:
    trace_id: str
    k: int
    conditions: tuple[int, ...]
    values: tuple


@dataclass
class WellDefinednessReport:
    violations: list[Violation] = field(default_factory=list)
    prefixes_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "prefixes_checked": self.prefixes_checked,
            "violations": [
                {"trace": v.trace_id, "k": v.k, "conditions": list(v.conditions), "values": list(v.values)}
                for v in self.violations
            ],
        }


def _values_equal(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return _same_kind(a, b) and a == b


def check_well_defined(
    rule: A.AnalyticRule, event_log: EventLog, k_min: int = 2, k_max: int = -1
) -> WellDefinednessReport:
    """Find every prefix whose satisfied conditions disagree on the target value.

    Condition numbers in the report are 1-based.
    """
    report = WellDefinednessReport()
    for trace in event_log:
        for k in prefix_lengths(len(trace), k_min, k_max):
            pfx = TracePrefix(trace, k)
            report.prefixes_checked += 1
            hits = [j for j, (cond, _) in enumerate(rule.pairs, start=1) if _holds(cond, pfx, {}, None)]
            if len(hits) < 2:
                continue
            values = [eval_expr(rule.pairs[j - 1][1], pfx) for j in hits]
            if any(not _values_equal(values[0], v) for v in values[1:]):
                report.violations.append(Violation(trace.id, k, tuple(hits), tuple(values)))
    return report


def label_prefixes(rule: A.AnalyticRule, event_log: EventLog, k_min: int = 2, k_max: int = -1) -> Iterable:
    """Yield ``(trace, k, target)`` for every prefix in range."""
    for trace in event_log:
        for k in prefix_lengths(len(trace), k_min, k_max):
            yield trace, k, apply_rule(rule, TracePrefix(trace, k))
