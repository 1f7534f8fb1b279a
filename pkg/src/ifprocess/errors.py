"""Exception hierarchy shared by all modules."""


class IFProcessError(Exception):
    """Base class for every error raised by this package."""


class OutOfRange(IFProcessError, ValueError):
    pass


class DuplicateVertex(IFProcessError, ValueError):
    pass


class MismatchedGroundSet(IFProcessError, ValueError):
    pass


class TooManyEdges(IFProcessError, ValueError):
    pass


class InfeasibleQuery(IFProcessError, ValueError):
    pass


class NoOpenEdge(IFProcessError, RuntimeError):
    pass


class InstanceTooLarge(IFProcessError, ValueError):
    pass


class IncompleteState(IFProcessError, ValueError):
    pass


class NotAnExtension(IFProcessError, ValueError):
    pass


class InvalidConfig(IFProcessError, ValueError):
    pass


class SNotDegreeTwoPlus(IFProcessError, ValueError):
    pass


class SContainsLowDegreeVertex(IFProcessError, ValueError):
    pass


class MOutOfRange(IFProcessError, ValueError):
    pass


class EmptyStableFamily(IFProcessError, ValueError):
    pass


class TooManyHighDegreeVertices(IFProcessError, ValueError):
    pass


class NoResolvedTraces(IFProcessError, ValueError):
    pass


class TooLarge(IFProcessError, ValueError):
    pass


class EmptyList(IFProcessError, ValueError):
    pass


class TCapExceeded(IFProcessError, RuntimeError):
    pass


class NotMaximal(IFProcessError, ValueError):
    pass


class DegenerateRegime(IFProcessError, ValueError):
    pass


class ParseError(InvalidConfig):
    pass


class UnknownKey(InvalidConfig):
    pass


class OutputUnwritable(IFProcessError, OSError):
    pass
