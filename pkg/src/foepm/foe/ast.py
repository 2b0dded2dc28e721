"""Syntax trees for index expressions, value expressions, formulas and rules.

Nodes are frozen dataclasses, so structural equality and hashing come for
free and trees can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

NUMERIC = "numeric"
NON_NUMERIC = "nonNumeric"


# -- index expressions --------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PosInt:
    value: int

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"index literal must be positive, got {self.value}")


@dataclass(frozen=True)
class Curr:
    pass


@dataclass(frozen=True)
class Last:
    pass


@dataclass(frozen=True)
class IAdd:
    left: "IndexExpr"
    right: "IndexExpr"


@dataclass(frozen=True)
class ISub:
    left: "IndexExpr"
    right: "IndexExpr"


IndexExpr = Union[Var, PosInt, Curr, Last, IAdd, ISub]


# -- value expressions --------------------------------------------------------


@dataclass(frozen=True)
class NumLit:
    value: float


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class IndexAsNum:
    index: IndexExpr


@dataclass(frozen=True)
class Accessor:
    """``e[index].name``; ``kind`` is filled in by kind inference."""

    index: IndexExpr
    name: str
    kind: Optional[str] = None


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UndefinedTarget:
    """The ``undefined`` target of a rule."""


Expr = Union[NumLit, StrLit, BoolLit, IndexAsNum, Accessor, Add, Sub]
Target = Union[Expr, UndefinedTarget]


# -- formulas -----------------------------------------------------------------

COMPARISONS = ("==", "!=", "<", ">", "<=", ">=")
ORDERING = ("<", ">", "<=", ">=")


@dataclass(frozen=True)
class Atom:
    left: Expr
    op: str
    right: Expr

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, TrueF, FalseF, Not, And, Or, Implies, Forall, Exists]
Quantifier = (Forall, Exists)


@dataclass(frozen=True)
class AnalyticRule:
    """Ordered ``condition => target`` pairs plus a default target."""

    pairs: tuple[tuple[Formula, Target], ...]
    default: Target
    kind: str

    @property
    def targets(self) -> tuple[Target, ...]:
        return tuple(t for _, t in self.pairs) + (self.default,)

    @property
    def conditions(self) -> tuple[Formula, ...]:
        return tuple(c for c, _ in self.pairs)


# -- generic traversal --------------------------------------------------------


def index_children(idx: IndexExpr) -> tuple:
    if isinstance(idx, (IAdd, ISub)):
        return (idx.left, idx.right)
    return ()


def iter_accessors(node) -> Iterator[Accessor]:
    """All accessors inside an expression, formula or rule target."""
    if isinstance(node, Accessor):
        yield node
    elif isinstance(node, (Add, Sub, And, Or, Implies, Atom)):
        yield from iter_accessors(node.left)
        yield from iter_accessors(node.right)
    elif isinstance(node, (Not, Forall, Exists)):
        yield from iter_accessors(node.body)


def index_vars(idx: IndexExpr) -> set[str]:
    if isinstance(idx, Var):
        return {idx.name}
    out: set[str] = set()
    for child in index_children(idx):
        out |= index_vars(child)
    return out


def expr_vars(expr) -> set[str]:
    if isinstance(expr, IndexAsNum):
        return index_vars(expr.index)
    if isinstance(expr, Accessor):
        return index_vars(expr.index)
    if isinstance(expr, (Add, Sub)):
        return expr_vars(expr.left) | expr_vars(expr.right)
    return set()


def free_variables(formula: Formula) -> set[str]:
    """Index variables occurring free in ``formula``."""
    if isinstance(formula, Atom):
        return expr_vars(formula.left) | expr_vars(formula.right)
    if isinstance(formula, (TrueF, FalseF)):
        return set()
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, (And, Or, Implies)):
        return free_variables(formula.left) | free_variables(formula.right)
    if isinstance(formula, Quantifier):
        return free_variables(formula.body) - {formula.var}
    raise TypeError(f"not a formula: {formula!r}")


def bound_variables(formula: Formula) -> list[str]:
    """Binder names in pre-order, with repetitions."""
    if isinstance(formula, Quantifier):
        return [formula.var, *bound_variables(formula.body)]
    if isinstance(formula, Not):
        return bound_variables(formula.body)
    if isinstance(formula, (And, Or, Implies)):
        return bound_variables(formula.left) + bound_variables(formula.right)
    return []


def quantifier_depth(formula: Formula) -> int:
    if isinstance(formula, Quantifier):
        return 1 + quantifier_depth(formula.body)
    if isinstance(formula, Not):
        return quantifier_depth(formula.body)
    if isinstance(formula, (And, Or, Implies)):
        return max(quantifier_depth(formula.left), quantifier_depth(formula.right))
    return 0


def count_atoms(formula: Formula) -> int:
    if isinstance(formula, Atom):
        return 1
    if isinstance(formula, (TrueF, FalseF)):
        return 0
    if isinstance(formula, (Not, Forall, Exists)):
        return count_atoms(formula.body)
    return count_atoms(formula.left) + count_atoms(formula.right)
