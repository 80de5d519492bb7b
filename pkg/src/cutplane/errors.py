"""Exception types shared across the package."""


class CutplaneError(Exception):
    pass


class Infeasible(CutplaneError):
    """An LP or QP subproblem has an empty feasible set."""


class SolverFailure(CutplaneError):
    """A subproblem solver hit its pivot cap or failed its optimality check."""


class MaxBisections(CutplaneError):
    pass


class ZeroSubgradient(CutplaneError):
    pass


class MissingContext(CutplaneError):
    pass


class EmptyLevelSet(CutplaneError):
    pass


class InvalidConfig(CutplaneError):
    """Rejected method/code combination or malformed configuration."""
