"""Exception types shared across the package."""


class InvalidParameters(ValueError):
    """Generator arguments that cannot produce a valid instance."""


class GenerationFailure(RuntimeError):
    """A randomized generator ran out of retries."""


class InvariantViolation(ValueError):
    """A value breaks one of the structural invariants of its type."""


class ParseError(ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class UnorientedEdge(ValueError):
    pass


class IncompleteOrientation(ValueError):
    pass


class UnassignedCustomer(ValueError):
    pass


class TooLarge(ValueError):
    """Brute-force enumeration budget exceeded."""


class NotAMatching(ValueError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class InconsistentOutput(ValueError):
    """Node-centered token output that does not describe a set of paths."""


class ProgramBug(RuntimeError):
    """A node program broke the engine contract (e.g. double-consumed an edge)."""


class RoundBudgetExceeded(RuntimeError):
    """A proven round bound was exceeded; always indicates an implementation bug."""


class LevelOutOfRange(ValueError):
    """Instance has more levels than the algorithm supports."""
