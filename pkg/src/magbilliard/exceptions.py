"""Exception hierarchy shared by all modules."""


class MagBilliardError(Exception):
    """Base class for errors raised by this package."""


class NotAdmissible(MagBilliardError):
    """The field magnitude is not below the minimal boundary curvature."""

    def __init__(self, margin, message=None):
        self.margin = margin
        super().__init__(message or f"min curvature - beta = {margin:.6g} <= 0")


class SolverError(MagBilliardError):
    """A numerical solver failed to produce a contract-satisfying answer."""


class NoIntersection(SolverError):
    pass


class TangencyUnresolved(SolverError):
    pass


class AmbiguousImpact(SolverError):
    """A Larmor circle has several exit crossings and no departure point to pick one."""


class RankDeficient(SolverError):
    pass


class SingularPoint(MagBilliardError):
    """Gradient degenerated where a regular point was required."""

    def __init__(self, message, point=None, points=None):
        self.point = point
        self.points = points
        super().__init__(message)


class MaxPointsExceeded(MagBilliardError):
    def __init__(self, message, points=None):
        self.points = points
        super().__init__(message)


class DegreeTooLow(MagBilliardError, ValueError):
    pass


class DegenerateBand(MagBilliardError):
    """Curvature is numerically constant, so the singular band is a single point."""

    def __init__(self, rho):
        self.rho = rho
        super().__init__(f"curvature is constant; band collapses to rho={rho:.12g}")


class PoleAtEqualCurvature(MagBilliardError, ZeroDivisionError):
    pass


class CircleOutsideDomain(MagBilliardError, ValueError):
    pass
