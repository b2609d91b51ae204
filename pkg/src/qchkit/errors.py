"""Exception hierarchy shared by every qchkit module."""


class QCHError(Exception):
    """Base class for all qchkit errors."""


class ZeroVector(QCHError, ValueError):
    pass


class DegenerateMetric(QCHError, ValueError):
    pass


class IncompatiblePair(QCHError, ValueError):
    """Metric and 2-form do not define a complex structure (J^2 != -Id)."""


class SingularWedgeMap(QCHError, ValueError):
    pass


class DomainError(QCHError, ValueError):
    """Expression evaluated outside its domain (log/sqrt of non-positive, x/0, ...)."""


class ExprSyntaxError(QCHError, SyntaxError):
    """Malformed expression; ``offset`` is the 0-based byte offset of the problem."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        super().__init__(f"{message} at offset {offset}")
        self.msg = message
        self.text = text
        self.offset = offset

    def __str__(self) -> str:  # SyntaxError would print only ``msg``
        return str(self.args[0])


class UnknownIdentifier(QCHError, NameError):
    def __init__(self, name: str, offset: int = 0):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ChartError(QCHError, ValueError):
    """Chart file is structurally invalid (bad shapes, asymmetric metric, ...)."""


class UnknownFixture(QCHError, KeyError):
    pass


class BadParameter(QCHError, ValueError):
    pass
