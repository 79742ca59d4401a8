"""Exception taxonomy.

Every failure mode raised by the library derives from ``EpicosmoError``;
the CLI maps scenario/schema problems to exit code 1 and anything raised
while a computation is running to exit code 2.
"""


class EpicosmoError(Exception):
    """Base class for all library errors."""


# --- numerics ---------------------------------------------------------------

class NumericsError(EpicosmoError):
    """Base class for failures of the shared numerical primitives."""


class EmptySpan(NumericsError):
    """Integration or quadrature interval has zero width."""


class NonFiniteInitialCondition(NumericsError):
    """Initial state, derivative, or right-hand side is not finite."""


class StepSizeUnderflow(NumericsError):
    """Step fell below the floor without meeting the error tolerance."""


class NonConvergent(NumericsError):
    """Adaptive quadrature hit its subdivision limit."""


class NoSignChange(NumericsError):
    """Root bracket does not straddle a sign change."""


class TooFewSamples(NumericsError):
    """Finite differencing needs at least three samples."""


# --- info_measures ----------------------------------------------------------

class NotNormalized(EpicosmoError):
    """Density mass deviates from one beyond the allowed tolerance."""


class DegenerateSupport(EpicosmoError):
    """Fewer than three strictly positive interior density samples."""


class NonFiniteIntegrand(EpicosmoError):
    """Information integrand is non-finite after zero-cell clipping."""

    def __init__(self, message, bad_cells=()):
        super().__init__(message)
        self.bad_cells = tuple(bad_cells)


class BiasedEstimator(EpicosmoError):
    """Estimator bias exceeds three Monte Carlo standard errors."""


# --- epi --------------------------------------------------------------------

class NonPositiveDensity(EpicosmoError):
    """Density value must be strictly positive."""


class ComplexRegion(EpicosmoError):
    """c - gamma0*f <= 0: the general solution turns complex."""


class InvalidParameters(EpicosmoError):
    """Parameter tuple outside the domain of the requested operation."""


class NegativeBase(EpicosmoError):
    """Closed-form base is negative for the chosen branch."""


class WrongRegime(EpicosmoError):
    """Operation only defined in the bounded-with-maximum regime."""


# --- linearize --------------------------------------------------------------

class AlphaZero(EpicosmoError):
    """q = 1/2 makes alpha vanish and degenerates the nonlocal map."""


class SignChange(EpicosmoError):
    """Log-derivative crosses zero: the nonlocal variable folds."""

    def __init__(self, message, crossings=()):
        super().__init__(message)
        self.crossings = tuple(crossings)


class ComplexRoots(EpicosmoError):
    """Characteristic discriminant is negative."""


class DegenerateModes(EpicosmoError):
    """The two modal decay rates coincide."""


class ZeroCrossing(EpicosmoError):
    """Linear-image variable reaches zero: the inverse map degenerates."""


# --- cosmo ------------------------------------------------------------------

class ZeroExpansionRate(EpicosmoError):
    """Expansion rate must be strictly positive."""


class ForbiddenRegion(EpicosmoError):
    """Friedmann constraint right-hand side is negative."""


class ZeroGdot(EpicosmoError):
    """Semiconformal factor derivative must be nonzero."""


class ZeroC(EpicosmoError):
    """The tau rescaling requires a nonzero constant c."""


class NonPositiveGddot(EpicosmoError):
    """Metric function e^f needs a strictly positive second derivative."""


class NonPositivePotential(EpicosmoError):
    """Scalar-field potential must be strictly positive."""


class UnphysicalGamma0(EpicosmoError):
    """Singularity classification requires gamma0 < 0."""
