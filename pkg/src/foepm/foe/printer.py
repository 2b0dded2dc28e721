"""Pretty-printer producing text that parses back to the same tree."""

from __future__ import annotations

import math
import re

from . import ast as A

_BARE_ATTR = re.compile(r"[A-Za-z0-9_:]+\Z")

# binding strength of formula operators
_IMPLIES, _OR, _AND, _UNARY = 1, 2, 3, 4


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def _number(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot print non-finite number {x}")
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def index_text(idx: A.IndexExpr) -> str:
    if isinstance(idx, A.Var):
        return idx.name
    if isinstance(idx, A.PosInt):
        return str(idx.value)
    if isinstance(idx, A.Curr):
        return "curr"
    if isinstance(idx, A.Last):
        return "last"
    op = "+" if isinstance(idx, A.IAdd) else "-"
    right = index_text(idx.right)
    if isinstance(idx.right, (A.IAdd, A.ISub)):
        right = f"({right})"
    return f"{index_text(idx.left)} {op} {right}"


def expr_text(expr) -> str:
    if isinstance(expr, A.NumLit):
        return _number(expr.value)
    if isinstance(expr, A.StrLit):
        return _quote(expr.value)
    if isinstance(expr, A.BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, A.UndefinedTarget):
        return "undefined"
    if isinstance(expr, A.IndexAsNum):
        inner = index_text(expr.index)
        return f"({inner})" if isinstance(expr.index, (A.IAdd, A.ISub)) else inner
    if isinstance(expr, A.Accessor):
        name = expr.name if _BARE_ATTR.match(expr.name) else _quote(expr.name)
        return f"e[{index_text(expr.index)}].{name}"
    op = "+" if isinstance(expr, A.Add) else "-"
    right = expr_text(expr.right)
    if isinstance(expr.right, (A.Add, A.Sub)):
        right = f"({right})"
    return f"{expr_text(expr.left)} {op} {right}"


def formula_text(f: A.Formula, ctx: int = 0) -> str:
    if isinstance(f, A.Atom):
        return f"{expr_text(f.left)} {f.op} {expr_text(f.right)}"
    if isinstance(f, A.TrueF):
        return "true"
    if isinstance(f, A.FalseF):
        return "false"
    if isinstance(f, A.Not):
        return f"not {formula_text(f.body, _UNARY)}"
    if isinstance(f, A.Quantifier):
        word = "forall" if isinstance(f, A.Forall) else "exists"
        s = f"{word} {f.var} . {formula_text(f.body, 0)}"
        return f"({s})" if ctx > _IMPLIES else s
    if isinstance(f, A.Implies):
        s = f"{formula_text(f.left, _OR)} -> {formula_text(f.right, _IMPLIES)}"
        return f"({s})" if ctx > _IMPLIES else s
    if isinstance(f, A.Or):
        s = f"{formula_text(f.left, _OR)} or {formula_text(f.right, _AND)}"
        return f"({s})" if ctx > _OR else s
    if isinstance(f, A.And):
        s = f"{formula_text(f.left, _AND)} and {formula_text(f.right, _UNARY)}"
        return f"({s})" if ctx > _AND else s
    raise TypeError(f"not a formula: {f!r}")


def rule_text(rule: A.AnalyticRule) -> str:
    items = [f"{formula_text(c)} => {expr_text(t)}" for c, t in rule.pairs]
    items.append(expr_text(rule.default))
    return "< " + ",\n  ".join(items) + " >"


def to_text(node) -> str:
    if isinstance(node, A.AnalyticRule):
        return rule_text(node)
    if isinstance(node, (A.Atom, A.TrueF, A.FalseF, A.Not, A.And, A.Or, A.Implies, A.Forall, A.Exists)):
        return formula_text(node)
    if isinstance(node, (A.Var, A.PosInt, A.Curr, A.Last, A.IAdd, A.ISub)):
        return index_text(node)
    return expr_text(node)
