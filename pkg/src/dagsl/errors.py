"""Exception hierarchy.

Every error raised on bad user input derives from :class:`DagslError`, which
the command line maps to exit code 1.  Anything else is treated as internal.
"""


class DagslError(Exception):
    """Base class for all user-facing errors."""


# graph structure

class DagError(DagslError):
    pass


class CycleError(DagError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


class UnknownNodeError(DagError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DuplicateEdgeError(DagError):
    pass


class MissingTypeError(DagError):
    pass


class EmptyInterventionError(DagError):
    pass


# tabular data

class DataError(DagslError):
    pass


class ParseError(DataError):
    pass


class MissingValueError(DataError):
    pass


class RaggedRowError(DataError):
    pass


class UnknownColumnError(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ColumnMissingError(UnknownColumnError):
    pass


class CategoryOutOfRangeError(DataError):
    pass


class TypeViolationError(DataError):
    pass


# estimation

class NonFiniteError(DagslError, ValueError):
    pass


class ShapeMismatchError(DagslError, ValueError):
    pass


class DegenerateDataError(DagslError, ValueError):
    pass


class TooFewRowsError(DagslError, ValueError):
    pass


class NotFittedError(DagslError):
    pass


class InterventionTypeError(DagslError, ValueError):
    pass


class ConfigError(DagslError, ValueError):
    pass


class BootstrapError(DagslError):
    pass


class LengthMismatchError(DagslError, ValueError):
    pass


class MissingTruthColumnError(DataError):
    pass
