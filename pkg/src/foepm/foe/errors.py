"""Exceptions raised by the rule language."""


class FOEError(Exception):
    """Base class for rule-language errors."""


class ParseError(FOEError):
    def __init__(self, message: str, text: str = "", offset: int = 0):
        self.message = message
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"line {self.line}, column {self.column}: {message}")


class OpenFormulaError(FOEError):
    def __init__(self, variables):
        self.variables = sorted(variables)
        super().__init__(f"open formula: unbound variable(s) {', '.join(self.variables)}")


class KindError(FOEError):
    """Numeric/non-numeric misuse of an expression or attribute."""


class CoherenceError(FOEError):
    def __init__(self, numeric, non_numeric):
        self.numeric = numeric
        self.non_numeric = non_numeric
        super().__init__(
            "rule mixes numeric targets (" + "; ".join(numeric) + ") with non-numeric targets ("
            + "; ".join(non_numeric) + ")"
        )


class EvaluationError(FOEError):
    pass
