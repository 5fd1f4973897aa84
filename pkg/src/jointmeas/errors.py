"""Exception hierarchy used across the package."""


class JointMeasError(ValueError):
    """Base class for all package errors."""


class InvalidDirectionError(JointMeasError):
    """A direction vector is not unit-norm within tolerance."""


class InvalidStateError(JointMeasError):
    """A state vector lies outside the Bloch ball, or is not pure when required."""


class DomainError(JointMeasError):
    """A scalar argument lies outside its admissible range."""


class InfeasibleError(JointMeasError):
    """No joint measurement with the requested parameters exists."""


class SynthesisError(JointMeasError):
    """Measurement directions cannot be built from the given sharpnesses."""


class DegenerateDesignError(SynthesisError):
    """One of the two projective directions is undefined (0/0)."""


class InvalidDesignError(SynthesisError):
    """A JointDesign violates its invariants."""


class UndefinedEstimateError(JointMeasError):
    """An estimate was requested from zero counts."""


class IllConditionedRatioError(JointMeasError):
    """A ratio estimate has a denominator too close to zero to be trusted."""
