"""Exception types shared across the package."""


class CfpError(Exception):
    """Base class for all library errors."""


class PointAtOrigin(CfpError):
    """A configuration point coincides with the target point.

    The problem is trivially solved; ``certificate`` holds a
    (simplex, weights) pair witnessing the solution.
    """

    def __init__(self, colour, point, certificate):
        self.colour = colour        # 1-based colour index
        self.point = point          # 1-based point index within the colour
        self.certificate = certificate
        super().__init__(
            f"point {point} of colour {colour} coincides with the target point"
        )


class NotInHull(CfpError):
    """The origin is not in the convex hull of the given points.

    ``witness`` is the minimum-norm point of the hull; the hyperplane
    normal to it separates the origin from the points.
    """

    def __init__(self, witness, distance):
        self.witness = witness
        self.distance = distance
        super().__init__(f"origin outside hull (distance {distance:.3e})")


class ParseError(CfpError):
    """Malformed configuration text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QpFailure(CfpError):
    """The minimum-norm-point iteration hit its step cap without optimality."""


class DegenerateSimplex(CfpError):
    """Simplex vertices are affinely dependent; no facet system exists."""


class NoEntry(CfpError):
    """The ray from the origin never meets the simplex."""


class DivisionDegenerate(CfpError):
    """All facet normals are numerically orthogonal to the ray direction."""


class NoCandidate(CfpError):
    """No separating facet admits an improving replacement point."""


class DegenerateCombination(CfpError):
    """Antipodal convex combination collapsed to (numerical) zero."""


class CoreLost(CfpError):
    """Perturbed instance lost the origin from its core and retries failed."""


class CountMismatch(CfpError):
    """Generator could not hit its target solution count within the retry cap."""


class ZeroSolutions(CfpError):
    """A depth report shows no containing simplex (numerical failure upstream)."""
