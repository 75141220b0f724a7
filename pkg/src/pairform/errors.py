"""Exception hierarchy shared by all pairform modules."""


class PairformError(Exception):
    """Base class for every error raised by pairform."""


class ParameterError(PairformError, ValueError):
    """Invalid parameters passed to a constructor or generator."""


class UnsupportedSchemeError(PairformError, ValueError):
    pass


class DegenerateSimplexError(PairformError, ValueError):
    def __init__(self, message, simplex_index=None):
        super().__init__(message)
        self.simplex_index = simplex_index


class MeshValidationError(PairformError, ValueError):
    """A triangulation violates the manifold or orientation invariants."""

    def __init__(self, message, face=None):
        super().__init__(message)
        self.face = face


class MeshFormatError(PairformError, ValueError):
    """Malformed mesh file; carries the offending line and/or field."""

    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        prefix = f"[{', '.join(loc)}] " if loc else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class DomainError(PairformError, ValueError):
    """Evaluation requested outside the (local) domain of a cochain."""


class LocalityError(DomainError):
    def __init__(self, message, simplex_index=None):
        super().__init__(message)
        self.simplex_index = simplex_index


class SymmetryError(PairformError, AssertionError):
    """A cochain does not have the symmetry its tag declares."""


class PreconditionError(PairformError, ValueError):
    pass


class JetMismatchError(PreconditionError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EvaluationError(PairformError, ValueError):
    """A user-supplied map or function could not be evaluated."""


class ResolutionError(PairformError, ValueError):
    pass


class ParseError(PairformError, ValueError):
    """Syntax error in an expression, with byte offset and expected tokens."""

    def __init__(self, message, offset, expected=()):
        exp = ", ".join(sorted(expected))
        detail = f" (expected one of: {exp})" if exp else ""
        super().__init__(f"{message} at byte {offset}{detail}")
        self.offset = offset
        self.expected = frozenset(expected)


class UnboundVariableError(PairformError, KeyError):
    def __str__(self):
        return f"unbound variable {self.args[0]!r}"
