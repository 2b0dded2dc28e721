"""Static checks: attribute-kind inference, kind checking, closedness, coherence."""

from __future__ import annotations

from typing import Iterable, Sequence

from . import ast as A
from .errors import CoherenceError, FOEError, KindError, OpenFormulaError
from .printer import to_text

ALWAYS_NUMERIC = frozenset({"time:timestamp"})


class _Kinds:
    """Union-find over attribute names carrying the kinds each class is forced to."""

    def __init__(self):
        self.parent: dict[str, str] = {}
        self.forced: dict[str, dict[str, str]] = {}

    def find(self, name: str) -> str:
        self.parent.setdefault(name, name)
        while self.parent[name] != name:
            self.parent[name] = self.parent[self.parent[name]]
            name = self.parent[name]
        return name

    def force(self, name: str, kind: str, why: str) -> None:
        self.forced.setdefault(self.find(name), {}).setdefault(kind, why)

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            merged = self.forced.setdefault(ra, {})
            for kind, why in self.forced.pop(rb, {}).items():
                merged.setdefault(kind, why)

    def resolve(self, numeric_defaults: set[str]) -> dict[str, str]:
        members: dict[str, list[str]] = {}
        for name in list(self.parent):
            members.setdefault(self.find(name), []).append(name)
        out = {}
        for root, names in members.items():
            forced = self.forced.get(root, {})
            if len(forced) > 1:
                raise KindError(
                    f"attribute(s) {', '.join(sorted(names))} used both as numeric ({forced[A.NUMERIC]}) "
                    f"and as non-numeric ({forced[A.NON_NUMERIC]})"
                )
            if forced:
                kind = next(iter(forced))
            elif numeric_defaults & set(names):
                kind = A.NUMERIC
            else:
                kind = A.NON_NUMERIC
            for name in names:
                out[name] = kind
        return out


def _literal_kind(expr) -> str | None:
    if isinstance(expr, (A.NumLit, A.IndexAsNum, A.Add, A.Sub)):
        return A.NUMERIC
    if isinstance(expr, (A.StrLit, A.BoolLit)):
        return A.NON_NUMERIC
    return None


def _collect_expr(expr, kinds: _Kinds, numeric_context: str | None) -> None:
    if isinstance(expr, A.Accessor):
        kinds.find(expr.name)
        if expr.name in ALWAYS_NUMERIC:
            kinds.force(expr.name, A.NUMERIC, f"{expr.name} is a timestamp")
        if numeric_context:
            kinds.force(expr.name, A.NUMERIC, numeric_context)
    elif isinstance(expr, (A.Add, A.Sub)):
        why = "operand of + or -"
        _collect_expr(expr.left, kinds, why)
        _collect_expr(expr.right, kinds, why)


def _collect_formula(f, kinds: _Kinds) -> None:
    if isinstance(f, A.Atom):
        ordering = f.op in A.ORDERING
        ctx = f"operand of {f.op}" if ordering else None
        _collect_expr(f.left, kinds, ctx)
        _collect_expr(f.right, kinds, ctx)
        if not ordering:
            lk, rk = _literal_kind(f.left), _literal_kind(f.right)
            la, ra = isinstance(f.left, A.Accessor), isinstance(f.right, A.Accessor)
            if la and ra:
                kinds.union(f.left.name, f.right.name)
            elif la and rk:
                kinds.force(f.left.name, rk, f"compared with a {rk} value")
            elif ra and lk:
                kinds.force(f.right.name, lk, f"compared with a {lk} value")
    elif isinstance(f, (A.Not, A.Forall, A.Exists)):
        _collect_formula(f.body, kinds)
    elif isinstance(f, (A.And, A.Or, A.Implies)):
        _collect_formula(f.left, kinds)
        _collect_formula(f.right, kinds)


def _annotate_expr(expr, kinds: dict[str, str]):
    if isinstance(expr, A.Accessor):
        return A.Accessor(expr.index, expr.name, kinds[expr.name])
    if isinstance(expr, (A.Add, A.Sub)):
        return type(expr)(_annotate_expr(expr.left, kinds), _annotate_expr(expr.right, kinds))
    return expr


def _annotate_formula(f, kinds: dict[str, str]):
    if isinstance(f, A.Atom):
        return A.Atom(_annotate_expr(f.left, kinds), f.op, _annotate_expr(f.right, kinds))
    if isinstance(f, A.Not):
        return A.Not(_annotate_formula(f.body, kinds))
    if isinstance(f, A.Quantifier):
        return type(f)(f.var, _annotate_formula(f.body, kinds))
    if isinstance(f, (A.And, A.Or, A.Implies)):
        return type(f)(_annotate_formula(f.left, kinds), _annotate_formula(f.right, kinds))
    return f


def expr_kind(expr) -> str | None:
    """Kind of an annotated expression (``None`` for the undefined target)."""
    if isinstance(expr, A.Accessor):
        return expr.kind
    if isinstance(expr, A.UndefinedTarget):
        return None
    return _literal_kind(expr)


def _check_expr(expr) -> None:
    if isinstance(expr, (A.Add, A.Sub)):
        for side in (expr.left, expr.right):
            _check_expr(side)
            if expr_kind(side) != A.NUMERIC:
                raise KindError(f"non-numeric operand {to_text(side)} in arithmetic")


def _check_formula(f) -> None:
    if isinstance(f, A.Atom):
        _check_expr(f.left)
        _check_expr(f.right)
        lk, rk = expr_kind(f.left), expr_kind(f.right)
        if f.op in A.ORDERING and (lk != A.NUMERIC or rk != A.NUMERIC):
            raise KindError(f"ordering comparison on non-numeric value in {to_text(f)}")
        if lk != rk:
            raise KindError(f"comparison of {lk} with {rk} value in {to_text(f)}")
    elif isinstance(f, (A.Not, A.Forall, A.Exists)):
        _check_formula(f.body)
    elif isinstance(f, (A.And, A.Or, A.Implies)):
        _check_formula(f.left)
        _check_formula(f.right)


def annotate_kinds(
    formulas: Sequence[A.Formula],
    targets: Sequence[A.Target],
    numeric_attributes: Iterable[str] = (),
) -> tuple[list[A.Formula], list[A.Target]]:
    """Infer one kind per attribute name across all formulas and targets.

    Timestamps and attributes used under ``+``, ``-`` or an ordering
    comparison are numeric; equality against a literal takes the literal's
    kind; equality between two accessors ties their attributes together.
    Attributes left undecided default to non-numeric unless listed in
    ``numeric_attributes``. Raises :class:`KindError` on conflicting usage
    or ill-kinded expressions.
    """
    kinds = _Kinds()
    for f in formulas:
        _collect_formula(f, kinds)
    for t in targets:
        _collect_expr(t, kinds, None)
    resolved = kinds.resolve(set(numeric_attributes))
    formulas = [_annotate_formula(f, resolved) for f in formulas]
    targets = [_annotate_expr(t, resolved) for t in targets]
    for f in formulas:
        _check_formula(f)
    for t in targets:
        _check_expr(t)
    return formulas, targets


def check_coherence(rule: A.AnalyticRule) -> str:
    """The single kind shared by all targets of ``rule``."""
    return _coherent_kind(rule.targets)


def _coherent_kind(targets: Sequence[A.Target]) -> str:
    numeric = [to_text(t) for t in targets if expr_kind(t) == A.NUMERIC]
    non_numeric = [to_text(t) for t in targets if expr_kind(t) == A.NON_NUMERIC]
    if numeric and non_numeric:
        raise CoherenceError(numeric, non_numeric)
    return A.NUMERIC if numeric else A.NON_NUMERIC


def check_rule(conditions: Sequence[A.Formula], targets: Sequence[A.Target]) -> A.AnalyticRule:
    """Assemble a rule after checking closedness, target variables and coherence."""
    for cond in conditions:
        free = A.free_variables(cond)
        if free:
            raise OpenFormulaError(free)
    for t in targets:
        used = A.expr_vars(t)
        if used:
            raise FOEError(f"target expressions may not use index variables: {', '.join(sorted(used))}")
    kind = _coherent_kind(targets)
    *bodies, default = targets
    return A.AnalyticRule(tuple(zip(conditions, bodies)), default, kind)
