"""Exception hierarchy shared by every module of the package."""


class InvlimError(Exception):
    """Base class for all errors raised by invlim."""


class InputError(InvlimError):
    """Malformed or inconsistent input (maps to CLI exit code 2)."""


class BadNumber(InputError, ValueError):
    """A value that is not an exact rational."""


class FloatRefused(BadNumber, TypeError):
    pass


class GraphError(InputError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class Disconnected(GraphError):
    pass


class NonpositiveLength(GraphError):
    pass


class MapError(InputError):
    """A map description violates continuity, monotonicity or path rules."""


class ConstantLap(MapError):
    pass


class FoldOnBranchVertex(MapError):
    pass


class UndeterminedError(InvlimError):
    """A bounded search ran out of budget (maps to CLI exit code 3)."""


class CapExceeded(UndeterminedError):
    def __init__(self, cap, what="orbit"):
        super().__init__(f"{what} did not repeat within {cap} iterates")
        self.cap = cap


class NotEventuallyPeriodic(UndeterminedError):
    def __init__(self, cap):
        super().__init__(f"partition closure did not stabilise within {cap} rounds")
        self.cap = cap


class NotMarkovOnCells(InvlimError):
    pass


class ChainError(InvlimError):
    pass


class NotRefinementOfMarkovChain(ChainError):
    pass


class PatternMismatch(ChainError):
    pass


class NotPatternEquivalent(ChainError):
    pass


class PatternDivergence(ChainError):
    def __init__(self, round_, detail=""):
        super().__init__(f"pattern functions diverged at round {round_}: {detail}")
        self.round = round_


class AssumptionMissing(InvlimError):
    pass


class InvalidItinerary(InputError):
    pass


class HypothesisFailed(UndeterminedError):
    pass


class NotExceptional(InvlimError):
    pass


class DifferentGraphs(InputError):
    pass


class InternalContradiction(InvlimError):
    """Raised when two independent verdicts of the pipeline disagree."""
