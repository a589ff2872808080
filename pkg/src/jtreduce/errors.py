"""Exception hierarchy shared by all jtreduce modules."""


class JTReduceError(Exception):
    """Base class for all errors raised by jtreduce."""


class DomainError(JTReduceError, ValueError):
    """Variables or nodes that do not belong to the operand's domain."""


class DomainConflictError(DomainError):
    """A shared variable has different cardinalities in two potentials."""


class PotentialDivisionError(JTReduceError, ZeroDivisionError):
    """Division of a positive cell by zero (signals an inconsistent tree)."""


class DegeneratePotentialError(JTReduceError, ValueError):
    """A potential with zero total mass where a distribution was required."""


class InfiniteDivergenceError(JTReduceError, ValueError):
    """KL divergence is infinite: positive mass where the reference is zero."""


class GraphError(JTReduceError, ValueError):
    """Invalid chain graph (directed cycle, self-loop, conflicting links)."""


class PreconditionError(JTReduceError, ValueError):
    """An operation was called on input violating its precondition."""


class StructureError(JTReduceError, ValueError):
    """A clique collection admits no junction tree."""


class CoverError(JTReduceError, ValueError):
    """A component potential fits in no clique of the junction tree."""


class InconsistencyError(JTReduceError, ValueError):
    """Propagation met an all-zero clique."""


class UnsupportedQueryError(JTReduceError, ValueError):
    """A query over variables that no single clique contains."""


class StaleCandidateError(JTReduceError, ValueError):
    """A removal candidate no longer matches the junction tree."""


class CombinationError(JTReduceError, ValueError):
    """Graph union could not be repaired into a chain graph."""


class FactorizationError(JTReduceError, ValueError):
    """A joint belief does not factorize according to the supplied graph."""


class ComponentTooLargeError(JTReduceError, MemoryError):
    """A chain component's conditional table is too large to materialize."""


class CompileInfeasibleError(JTReduceError, MemoryError):
    """Exact compilation would exceed the configured size limit."""


class NetworkParseError(JTReduceError, ValueError):
    """Syntax or validation failure in a network file.

    Attributes:
        line: 1-based line number, or None when not attributable.
        column: 1-based column number, or None.
    """

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
