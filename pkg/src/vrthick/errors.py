"""Exception types raised across the package."""


class VRTError(Exception):
    """Base class for all package errors."""


# metric spaces
class NonUnitSphericalPoint(VRTError):
    pass


class EmptySubset(VRTError):
    pass


class TooLargeForExactGH(VRTError):
    pass


# transport
class InvalidMeasure(VRTError):
    pass


class SupportMismatch(VRTError):
    pass


class TooLargeForBrute(VRTError):
    pass


# complexes / persistence
class SizeGuard(VRTError):
    pass


# thickenings
class NotInThickening(VRTError):
    pass


class SimplexNotPreserved(VRTError):
    pass


class UnionNotASimplex(VRTError):
    pass


class IsolatedPoint(VRTError):
    pass


class NotCloudBacked(VRTError):
    """Operation needs new points but the space is a bare distance matrix."""


# sphere geometry
class NotOrthogonal(VRTError):
    pass


class AntipodalPoint(VRTError):
    pass


class SupportTooSpread(VRTError):
    pass


class NoConvergence(VRTError):
    pass


class ZeroVector(VRTError):
    pass


class DegenerateProjection(VRTError):
    pass


class StepLeftThickening(VRTError):
    pass


class UnsupportedDimension(VRTError):
    pass
