"""Exception hierarchy shared by every module.

Input problems derive from ``ValueError`` and map to exit code 1; defects
that can only come from a bug or an exhausted cap derive from
``RuntimeError`` and map to exit code 3.
"""


class DivisorToolkitError(Exception):
    exit_code = 1


class InputError(DivisorToolkitError, ValueError):
    exit_code = 1


class InternalDefect(DivisorToolkitError, RuntimeError):
    exit_code = 3


# Graph validation
class LoopEdge(InputError):
    def __init__(self, edge_id: str):
        super().__init__(
            f"Edge {edge_id!r} is a loop; enable loop subdivision to insert a midpoint vertex"
        )
        self.edge_id = edge_id


class Disconnected(InputError):
    pass


class NonpositiveLength(InputError):
    pass


class DuplicateId(InputError):
    pass


class NoEdges(InputError):
    pass


class UnknownReference(InputError):
    pass


class NonpositiveFactor(InputError):
    pass


class InvalidParameter(InputError):
    pass


class WorkspaceParseError(InputError):
    def __init__(self, message: str, path: str = '', line: int = 0):
        location = []
        if line:
            location.append(f"line {line}")
        if path:
            location.append(f"at {path}")
        suffix = f" ({', '.join(location)})" if location else ''
        super().__init__(f"{message}{suffix}")
        self.path = path
        self.line = line


# Divisors and reduction
class NotEffective(InputError):
    pass


class NotBoundary(InputError):
    pass


class UnsafeEpsilon(InputError):
    pass


class NotConnected(InputError):
    pass


class NotSaturated(InputError):
    pass


class EmptySystem(InputError):
    pass


# Rank
class InvalidVertexSet(InputError):
    pass


class EmptySet(InputError):
    pass


class NotUnitGraph(InputError):
    pass


class NotVertexSupported(InputError):
    pass


# Rank-determining sets
class EmptyRegion(InputError):
    pass


class InvalidWitness(InputError):
    pass


class NotRds(InputError):
    pass


class NotSpanningTree(InputError):
    pass


# Defects
class IterationCapExceeded(InternalDefect):
    pass


class SearchCapExceeded(InternalDefect):
    pass


class InternalGeometry(InternalDefect):
    pass
