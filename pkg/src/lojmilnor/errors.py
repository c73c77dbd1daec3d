class LojError(Exception):
    """Base class for all errors raised by lojmilnor."""


class InputError(LojError, ValueError):
    """Malformed input: wrong dimensions, non-finite entries, bad parameters."""


class PreconditionError(LojError):
    """An operation was called outside its documented domain."""


class DegenerateMapError(LojError):
    """Every sample of a region was excluded (d_x G = 0 everywhere sampled)."""


class InsufficientDataError(LojError):
    """Too few usable samples to produce an estimate.

    ``operation`` names the routine that gave up, so front ends can report it.
    """

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation
