"""Exception hierarchy shared by all modules."""


class SurfaceError(Exception):
    """Base class for every error raised by invsurf."""


# grid calculus
class GridTooSmall(SurfaceError):
    pass


class TooFewSamples(SurfaceError):
    pass


class OutOfDomain(SurfaceError):
    pass


class GridMismatch(SurfaceError):
    pass


# invariant geometry
class StrongRegularityViolation(SurfaceError):
    pass


class OrientationViolation(SurfaceError):
    pass


class VanishingCurvature(SurfaceError):
    pass


# frame integration
class BadInitialFrame(SurfaceError):
    pass


class AdmissibilityFailure(SurfaceError):
    def __init__(self, condition, report=None):
        super().__init__(f"Bonnet admissibility failed: condition {condition}")
        self.condition = condition
        self.report = report


class DegenerateAlignment(SurfaceError):
    pass


# natural equations
class PairDomainViolation(SurfaceError):
    pass


class DomainViolation(SurfaceError):
    pass


class ZeroGradient(SurfaceError):
    pass


class NoConvergence(SurfaceError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"Newton iteration did not converge after {iterations} steps "
            f"(last residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class LineSearchFailure(SurfaceError):
    pass


class CFLViolation(SurfaceError):
    pass


class BlowUp(SurfaceError):
    pass


# reparametrization
class NonMonotone(SurfaceError):
    pass


class InvalidBasePoint(SurfaceError):
    pass


# class Gamma / canal surfaces
class DegenerateCurve(SurfaceError):
    pass


class SmoothnessViolation(SurfaceError):
    pass


class CharacteristicDegenerate(SurfaceError):
    pass


# fixtures / analysis
class DegenerateImmersion(SurfaceError):
    pass


# configuration and io
class ConfigError(SurfaceError):
    pass


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class EmptyMesh(SurfaceError):
    pass


class FormatError(SurfaceError):
    pass
