"""Tokenizer and recursive-descent parser for formulas and analytic rules.

Grammar (``#`` starts a line comment; ASCII or Unicode operator spellings)::

    rule      ::= "<" item ("," item)* ">"          last item is the default
    item      ::= formula "=>" target | target
    target    ::= expr | "undefined"
    formula   ::= disj ("->" formula)?               right associative
    disj      ::= conj ("or" conj)*
    conj      ::= unary ("and" unary)*
    unary     ::= "not" unary
                | ("forall" | "exists") VAR "." formula
                | "(" formula ")" (("==" | "!=") "(" formula ")")?
                | "true" | "false"
                | expr CMP expr
    CMP       ::= "==" | "=" | "!=" | "<" | ">" | "<=" | ">="
    expr      ::= term (("+" | "-") term)*
    term      ::= NUMBER | STRING | "true" | "false" | "-" term | "(" expr ")"
                | "e" "[" index "]" "." ATTR | "curr" | "last" | VAR
    index     ::= iterm (("+" | "-") iterm)*
    iterm     ::= POSINT | "curr" | "last" | VAR | "(" index ")"
    ATTR      ::= [A-Za-z0-9_:]+ | STRING

Numbers may contain ``_`` separators (``10_800_000``). Quantified
variables are renamed apart after parsing, and attribute kinds are
inferred from usage (see :mod:`foepm.foe.checks`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from . import ast as A
from .checks import annotate_kinds, check_rule
from .errors import ParseError


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, STR, IDENT, ATTR, OP, EOF
    value: object
    pos: int


KEYWORDS = {"forall", "exists", "and", "or", "not", "true", "false", "curr", "last", "undefined"}

_UNICODE = {
    "∀": ("IDENT", "forall"), "∃": ("IDENT", "exists"), "∧": ("IDENT", "and"),
    "∨": ("IDENT", "or"), "¬": ("IDENT", "not"), "⊥": ("IDENT", "undefined"),
    "→": ("OP", "->"), "⟹": ("OP", "=>"), "⇒": ("OP", "=>"), "≤": ("OP", "<="),
    "≥": ("OP", ">="), "≠": ("OP", "!="), "⟨": ("OP", "<"), "⟩": ("OP", ">"),
}
_OPERATORS = ["=>", "->", "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "(", ")", "[", "]", ".", ","]
_NUM_RE = re.compile(r"\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ATTR_RE = re.compile(r"[A-Za-z0-9_:]+")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


def _read_string(text: str, i: int) -> tuple[str, int]:
    start = i
    i += 1
    out = []
    while i < len(text):
        c = text[i]
        if c == '"':
            return "".join(out), i + 1
        if c == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _ESCAPES:
                raise ParseError("bad escape in string literal", text, i)
            out.append(_ESCAPES[text[i + 1]])
            i += 2
            continue
        if c == "\n":
            break
        out.append(c)
        i += 1
    raise ParseError("unterminated string literal", text, start)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _UNICODE:
            kind, value = _UNICODE[c]
            tokens.append(Token(kind, value, i))
            i += 1
            continue
        if c == '"':
            s, j = _read_string(text, i)
            tokens.append(Token("STR", s, i))
            i = j
            continue
        if c.isdigit():
            m = _NUM_RE.match(text, i)
            raw = m.group(0)
            if raw.endswith("_") or "__" in raw:
                raise ParseError(f"malformed number {raw!r}", text, i)
            tokens.append(Token("NUM", raw.replace("_", ""), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token("IDENT", m.group(0), i))
            i = m.end()
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                break
        else:
            raise ParseError(f"unexpected character {c!r}", text, i)
        tokens.append(Token("OP", op, i))
        i += len(op)
        if op == "." and len(tokens) >= 2 and tokens[-2].kind == "OP" and tokens[-2].value == "]":
            # attribute name after an accessor
            while i < n and text[i] in " \t":
                i += 1
            if i < n and text[i] == '"':
                s, j = _read_string(text, i)
                tokens.append(Token("ATTR", s, i))
                i = j
            else:
                m = _ATTR_RE.match(text, i)
                if not m:
                    raise ParseError("expected attribute name after '].'", text, i)
                tokens.append(Token("ATTR", m.group(0), i))
                i = m.end()
    tokens.append(Token("EOF", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.furthest: ParseError | None = None

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, value=None) -> bool:
        t = self.tok
        if t.kind != kind:
            return False
        return value is None or t.value == value

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.value in ops

    def at_kw(self, *words: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.value in words

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.value)
        err = ParseError(f"{message}, found {found}", self.text, tok.pos)
        if self.furthest is None or err.offset >= self.furthest.offset:
            self.furthest = err
        return err

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise self.error(f"expected {op!r}")
        return self.advance()

    def attempt(self, fn: Callable):
        """Run ``fn``; on failure rewind and return None."""
        saved = self.pos
        try:
            return fn()
        except ParseError as err:
            if self.furthest is None or err.offset >= self.furthest.offset:
                self.furthest = err
            self.pos = saved
            return None

    # -- formulas

    def formula(self) -> A.Formula:
        left = self.disjunction()
        if self.at_op("->"):
            self.advance()
            return A.Implies(left, self.formula())
        return left

    def disjunction(self) -> A.Formula:
        left = self.conjunction()
        while self.at_kw("or"):
            self.advance()
            left = A.Or(left, self.conjunction())
        return left

    def conjunction(self) -> A.Formula:
        left = self.unary()
        while self.at_kw("and"):
            self.advance()
            left = A.And(left, self.unary())
        return left

    def unary(self) -> A.Formula:
        if self.at_kw("not"):
            self.advance()
            return A.Not(self.unary())
        if self.at_kw("forall", "exists"):
            word = self.advance().value
            if not self.at("IDENT") or self.tok.value in KEYWORDS or self.tok.value == "e":
                raise self.error("expected a variable name after quantifier")
            var = self.advance().value
            self.expect_op(".")
            body = self.formula()
            return A.Forall(var, body) if word == "forall" else A.Exists(var, body)
        if self.at_op("("):
            grouped = self.attempt(self.paren_formula)
            if grouped is not None:
                if self.at_op("==", "!=", "="):
                    op = self.advance().value
                    other = self.paren_formula()
                    same = A.And(A.Implies(grouped, other), A.Implies(other, grouped))
                    return A.Not(same) if op == "!=" else same
                return grouped
            return self.atom()
        if self.at_kw("true", "false") and not (self.peek().kind == "OP" and self.peek().value in CMP_OPS + ("=", "+", "-")):
            return A.TrueF() if self.advance().value == "true" else A.FalseF()
        return self.atom()

    def paren_formula(self) -> A.Formula:
        self.expect_op("(")
        f = self.formula()
        self.expect_op(")")
        if self.at_op("+", "-", "<", ">", "<=", ">="):
            raise self.error("parenthesized formula used as a value")
        return f

    def atom(self) -> A.Atom:
        left = self.expr()
        if not self.at_op(*CMP_OPS, "="):
            raise self.error("expected a comparison operator")
        op = self.advance().value
        if op == "=":
            op = "=="
        right = self.expr()
        return A.Atom(left, op, right)

    # -- value expressions

    def expr(self) -> A.Expr:
        left = self.term()
        while self.at_op("+", "-"):
            op = self.advance().value
            right = self.term()
            left = A.Add(left, right) if op == "+" else A.Sub(left, right)
        return left

    def term(self) -> A.Expr:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return A.NumLit(float(t.value))
        if t.kind == "STR":
            self.advance()
            return A.StrLit(t.value)
        if self.at_op("-"):
            self.advance()
            inner = self.term()
            if isinstance(inner, A.NumLit):
                return A.NumLit(-inner.value)
            return A.Sub(A.NumLit(0.0), inner)
        if self.at_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        if t.kind == "IDENT":
            word = t.value
            if word in ("true", "false"):
                self.advance()
                return A.BoolLit(word == "true")
            if word == "curr":
                self.advance()
                return A.IndexAsNum(A.Curr())
            if word == "last":
                self.advance()
                return A.IndexAsNum(A.Last())
            if word == "e" and self.peek().kind == "OP" and self.peek().value == "[":
                return self.accessor()
            if word not in KEYWORDS:
                self.advance()
                return A.IndexAsNum(A.Var(word))
        raise self.error("expected an expression")

    def accessor(self) -> A.Accessor:
        self.advance()  # e
        self.expect_op("[")
        idx = self.index()
        self.expect_op("]")
        self.expect_op(".")
        if not self.at("ATTR"):
            raise self.error("expected an attribute name")
        return A.Accessor(idx, self.advance().value)

    def index(self) -> A.IndexExpr:
        left = self.index_term()
        while self.at_op("+", "-"):
            op = self.advance().value
            right = self.index_term()
            left = A.IAdd(left, right) if op == "+" else A.ISub(left, right)
        return left

    def index_term(self) -> A.IndexExpr:
        t = self.tok
        if t.kind == "NUM":
            if not t.value.isdigit() or int(t.value) < 1:
                raise self.error("index literals must be positive integers")
            self.advance()
            return A.PosInt(int(t.value))
        if self.at_op("("):
            self.advance()
            idx = self.index()
            self.expect_op(")")
            return idx
        if t.kind == "IDENT":
            if t.value == "curr":
                self.advance()
                return A.Curr()
            if t.value == "last":
                self.advance()
                return A.Last()
            if t.value not in KEYWORDS:
                self.advance()
                return A.Var(t.value)
        raise self.error("expected an index expression")

    # -- rules

    def target(self) -> A.Target:
        if self.at_kw("undefined"):
            self.advance()
            return A.UndefinedTarget()
        return self.expr()

    def conditional(self):
        cond = self.formula()
        self.expect_op("=>")
        return cond, self.target()

    def rule_items(self) -> list:
        self.expect_op("<")
        items = []
        while True:
            pair = self.attempt(self.conditional)
            if pair is None:
                item = self.attempt(self.target)
                if item is None or not self.at_op(",", ">"):
                    raise self.furthest or self.error("expected a rule item")
            else:
                item = pair
            items.append(item)
            if self.at_op(","):
                self.advance()
                continue
            self.expect_op(">")
            break
        return items

    def finish(self):
        if not self.at("EOF"):
            raise self.error("unexpected trailing input")


def _fresh(base: str, used: set[str]) -> str:
    n = 1
    while f"{base}_{n}" in used:
        n += 1
    name = f"{base}_{n}"
    used.add(name)
    return name


def standardize_apart(formula: A.Formula) -> A.Formula:
    """Rename binders so none repeats and none shadows a free variable."""
    free = A.free_variables(formula)
    used = set(free) | set(A.bound_variables(formula))
    taken: set[str] = set()

    def idx(node, env):
        if isinstance(node, A.Var):
            return A.Var(env.get(node.name, node.name))
        if isinstance(node, A.IAdd):
            return A.IAdd(idx(node.left, env), idx(node.right, env))
        if isinstance(node, A.ISub):
            return A.ISub(idx(node.left, env), idx(node.right, env))
        return node

    def expr(node, env):
        if isinstance(node, A.IndexAsNum):
            return A.IndexAsNum(idx(node.index, env))
        if isinstance(node, A.Accessor):
            return A.Accessor(idx(node.index, env), node.name, node.kind)
        if isinstance(node, A.Add):
            return A.Add(expr(node.left, env), expr(node.right, env))
        if isinstance(node, A.Sub):
            return A.Sub(expr(node.left, env), expr(node.right, env))
        return node

    def walk(node, env):
        if isinstance(node, A.Atom):
            return A.Atom(expr(node.left, env), node.op, expr(node.right, env))
        if isinstance(node, A.Not):
            return A.Not(walk(node.body, env))
        if isinstance(node, (A.And, A.Or, A.Implies)):
            return type(node)(walk(node.left, env), walk(node.right, env))
        if isinstance(node, A.Quantifier):
            name = node.var
            if name in taken or name in free:
                name = _fresh(node.var, used)
            taken.add(name)
            return type(node)(name, walk(node.body, {**env, node.var: name}))
        return node

    return walk(formula, {})


def parse_formula(text: str, numeric_attributes: Iterable[str] = ()) -> A.Formula:
    """Parse a formula, rename its variables apart and infer attribute kinds."""
    p = _Parser(text)
    f = p.formula()
    p.finish()
    f = standardize_apart(f)
    (f,), _ = annotate_kinds([f], [], numeric_attributes)
    return f


def parse_expr(text: str) -> A.Expr:
    p = _Parser(text)
    e = p.expr()
    p.finish()
    return e


def parse_rule(text: str, numeric_attributes: Iterable[str] = ()) -> A.AnalyticRule:
    """Parse ``< cond => target, ..., default >`` and run all static checks.

    ``numeric_attributes`` names attributes to treat as numeric when their
    usage does not decide it (a bare accessor used only as a target).
    """
    p = _Parser(text)
    items = p.rule_items()
    p.finish()
    *pairs, default = items
    if isinstance(default, tuple):
        raise ParseError("the last rule item must be a default target", text, p.tokens[-2].pos)
    for item in pairs:
        if not isinstance(item, tuple):
            raise ParseError("only the last rule item may be a bare target", text, p.tokens[0].pos)
    conditions = [standardize_apart(c) for c, _ in pairs]
    targets = [t for _, t in pairs] + [default]
    conditions, targets = annotate_kinds(conditions, targets, numeric_attributes)
    return check_rule(conditions, targets)


def load_rule(path: str, numeric_attributes: Iterable[str] = ()) -> A.AnalyticRule:
    with open(path, encoding="utf-8") as fh:
        return parse_rule(fh.read(), numeric_attributes)
