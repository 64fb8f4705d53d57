"""Exception hierarchy shared by every module.

Input problems raise subclasses of :class:`InputError` (a ``ValueError``).
Search outcomes that are not bugs are reported through
:class:`ProvenInfeasible` (the search space was exhausted) and
:class:`BudgetExhausted` (we gave up), which the CLI maps to exit codes.
"""


class GirthforgeError(Exception):
    """Base class."""


class InputError(GirthforgeError, ValueError):
    pass


class VertexOutOfRange(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class SelfLoop(InputError):
    pass


class NotAClique(InputError):
    pass


class InvalidPacking(InputError):
    pass


class SearchFailure(GirthforgeError):
    """A constructive step failed; ``stats`` holds whatever was measured."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


class BudgetExhausted(SearchFailure):
    pass


class ProvenInfeasible(SearchFailure):
    pass


class ConfigurationOverflow(SearchFailure):
    """Enumeration stopped after ``count`` items (the cap)."""

    def __init__(self, message, count, partial=None):
        super().__init__(message, {"count": count})
        self.count = count
        self.partial = partial if partial is not None else []


class Infeasible(GirthforgeError):
    """No fractional decomposition; ``certificate`` maps edges to dual values."""

    def __init__(self, message, certificate=None, stats=None):
        super().__init__(message)
        self.certificate = certificate
        self.stats = dict(stats or {})
