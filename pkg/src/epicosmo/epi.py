"""The nonextensive information-extremization variational problem.

Extremalizing the generalized Fisher functional I_q subject only to the
normalization constraint (Lagrange multiplier gamma0) yields the
nonlinear second-order equation

    -2 fddot + (2 - q) fdot^2 / f - gamma0 f^(2-q) = 0,

with first integral  f^(q-2) fdot^2 + gamma0 f = c  and implicit general
solution  x - x0 = +/- int f^(q/2-1) / sqrt(c - gamma0 f) df.  The c = 0
branch closes to  f = [ +/- (q-1)/2 sqrt(-gamma0) (x - x0) ]^(2/(q-1)),
which is non-normalizable on the full line and is reinterpreted
downstream as a cosmological scale factor.

This module provides the right-hand side, the first integral and its
drift diagnostic, the implicit solution (with the square-root turning
point handled by substitution), the closed form with analytic
derivatives, the (c, gamma0) regime classification, and a numerical
solver built on :mod:`epicosmo.numerics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import (
    ComplexRegion,
    InvalidParameters,
    NegativeBase,
    NonPositiveDensity,
    WrongRegime,
)
from .numerics import Trajectory, find_root, finite_diff, integrate_ivp, oriented_quadrature

__all__ = [
    "EpiParams",
    "RegimeClass",
    "euler_lagrange_rhs",
    "euler_lagrange_residual",
    "residual_series",
    "first_integral",
    "first_integral_drift",
    "implicit_solution_x_of_f",
    "invert_implicit_solution",
    "closed_form_c0",
    "closed_form_c0_with_derivatives",
    "classify_regime",
    "maximum_diagnostics",
    "MaximumDiagnostics",
    "solve_epi_numeric",
]


@dataclass(frozen=True)
class EpiParams:
    """Parameters of the variational problem and its solution family.

    q is the nonextensivity index, gamma0 the normalization multiplier,
    c and x0 the integration constants of the first integral and the
    implicit solution, branch the sign choice of the general solution.
    """

    q: float
    gamma0: float
    c: float = 0.0
    x0: float = 0.0
    branch: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.q) and math.isfinite(self.gamma0)):
            raise InvalidParameters("q and gamma0 must be finite")
        if self.branch not in (1, -1):
            raise InvalidParameters(f"branch must be +1 or -1, got {self.branch}")

    def with_c(self, c: float) -> "EpiParams":
        return replace(self, c=c)


class RegimeClass(Enum):
    """Qualitative behaviour of the solution family by signs of (c, gamma0)."""

    BOUNDED_WITH_MAXIMUM = "bounded_with_maximum"
    UNBOUNDED_NEGATIVE_LOWER_LIMIT = "unbounded_negative_lower_limit"
    REJECTED_NEGATIVE_DENSITY = "rejected_negative_density"
    UNBOUNDED_POSITIVE_LOWER_LIMIT = "unbounded_positive_lower_limit"
    SPECIAL_C0 = "special_c0"


def _require_positive(f) -> None:
    if np.any(np.asarray(f) <= 0.0):
        raise NonPositiveDensity("density must be strictly positive")


def euler_lagrange_rhs(f, fdot, p: EpiParams):
    """fddot solved from the variational equation; vectorizes over samples."""
    _require_positive(f)
    f = np.asarray(f, dtype=float)
    fdot = np.asarray(fdot, dtype=float)
    out = 0.5 * (2.0 - p.q) * fdot * fdot / f - 0.5 * p.gamma0 * f ** (2.0 - p.q)
    return float(out) if out.ndim == 0 else out


def euler_lagrange_residual(f, fdot, fddot, p: EpiParams):
    """Residual of -2 fddot + (2-q) fdot^2/f - gamma0 f^(2-q) (zero on solutions)."""
    _require_positive(f)
    f = np.asarray(f, dtype=float)
    fdot = np.asarray(fdot, dtype=float)
    fddot = np.asarray(fddot, dtype=float)
    out = -2.0 * fddot + (2.0 - p.q) * fdot * fdot / f - p.gamma0 * f ** (2.0 - p.q)
    return float(out) if out.ndim == 0 else out


def residual_series(traj: Trajectory, p: EpiParams) -> np.ndarray:
    """Pointwise variational residual along a trajectory, fddot by finite differences."""
    fddot = finite_diff(traj.independent, traj.derivative)
    return np.asarray(euler_lagrange_residual(traj.state, traj.derivative, fddot, p))


def first_integral(f, fdot, p: EpiParams):
    """f^(q-2) fdot^2 + gamma0 f; constant (= c) along exact solutions."""
    _require_positive(f)
    f = np.asarray(f, dtype=float)
    fdot = np.asarray(fdot, dtype=float)
    out = f ** (p.q - 2.0) * fdot * fdot + p.gamma0 * f
    return float(out) if out.ndim == 0 else out


def first_integral_drift(traj: Trajectory, p: EpiParams) -> float:
    """Max |first_integral - first_integral[0]| over the trajectory samples."""
    values = np.asarray(first_integral(traj.state, traj.derivative, p))
    return float(np.max(np.abs(values - values[0])))


def classify_regime(c: float, gamma0: float) -> RegimeClass:
    """Total sign classification of the (c, gamma0) plane.

    The special c = 0 family is its own class.  The gamma0 = 0 edge is
    classified by the sign of c alone: c > 0 leaves f free above a
    positive lower limit, c < 0 admits no real solution.
    """
    if c == 0.0:
        return RegimeClass.SPECIAL_C0
    if gamma0 == 0.0:
        return (RegimeClass.UNBOUNDED_POSITIVE_LOWER_LIMIT if c > 0.0
                else RegimeClass.REJECTED_NEGATIVE_DENSITY)
    if c > 0.0:
        return (RegimeClass.BOUNDED_WITH_MAXIMUM if gamma0 > 0.0
                else RegimeClass.UNBOUNDED_NEGATIVE_LOWER_LIMIT)
    return (RegimeClass.REJECTED_NEGATIVE_DENSITY if gamma0 > 0.0
            else RegimeClass.UNBOUNDED_POSITIVE_LOWER_LIMIT)


@dataclass(frozen=True)
class MaximumDiagnostics:
    f_max: float
    fddot_at_max: float


def maximum_diagnostics(p: EpiParams) -> MaximumDiagnostics:
    """Location and curvature of the density maximum in the bounded regime.

    Only defined for c > 0, gamma0 > 0, where f peaks at f = c/gamma0
    with fddot = -(gamma0/2) (gamma0/c)^(q-2) < 0.
    """
    if not (p.c > 0.0 and p.gamma0 > 0.0):
        raise WrongRegime(f"maximum requires c > 0 and gamma0 > 0, got ({p.c}, {p.gamma0})")
    f_max = p.c / p.gamma0
    fddot = -0.5 * p.gamma0 * (p.gamma0 / p.c) ** (p.q - 2.0)
    return MaximumDiagnostics(f_max, fddot)


def _default_f_ref(p: EpiParams) -> float:
    # Only shifts x0, which is an arbitrary constant anyway.
    if p.gamma0 > 0.0:
        return 1e-6 * (p.c / p.gamma0)
    return 1e-6


def implicit_solution_x_of_f(p: EpiParams, f: float, f_ref: Optional[float] = None,
                             tol: float = 1e-10) -> float:
    """Abscissa of the implicit general solution at density value f.

    Evaluates x0 + branch * int_{f_ref}^{f} f'^(q/2-1) / sqrt(c - gamma0 f') df'.
    Requires c - gamma0 f > 0 (``ComplexRegion`` otherwise).  For
    gamma0 != 0 the substitution u = sqrt(c - gamma0 f') removes the
    square-root singularity at the turning point f = c/gamma0, so the
    map stays accurate through the density maximum.
    """
    if f <= 0.0:
        raise NonPositiveDensity(f"f={f} must be positive")
    if p.c - p.gamma0 * f <= 0.0:
        raise ComplexRegion(f"c - gamma0*f = {p.c - p.gamma0 * f:g} <= 0: no real solution")
    if f_ref is None:
        f_ref = _default_f_ref(p)
    if f_ref <= 0.0 or p.c - p.gamma0 * f_ref <= 0.0:
        raise InvalidParameters(f"reference density {f_ref} outside the real region")

    half_exp = 0.5 * p.q - 1.0
    if p.gamma0 == 0.0:
        # integrand f^(q/2-1)/sqrt(c), elementary apart from f -> 0
        root_c = math.sqrt(p.c)
        integral = oriented_quadrature(lambda v: v ** half_exp / root_c, f_ref, f, tol)
    else:
        # u = sqrt(c - gamma0 f'):  df' = -2u/gamma0 du, integrand -> -(2/gamma0) f'^(q/2-1)
        u_f = math.sqrt(p.c - p.gamma0 * f)
        u_ref = math.sqrt(p.c - p.gamma0 * f_ref)

        def integrand(u):
            return ((p.c - u * u) / p.gamma0) ** half_exp

        integral = (2.0 / p.gamma0) * oriented_quadrature(integrand, u_f, u_ref, tol)
    return p.x0 + p.branch * integral


def invert_implicit_solution(p: EpiParams, x: float, f_lo: float, f_hi: float,
                             f_ref: Optional[float] = None, tol: float = 1e-12) -> float:
    """Density value f(x) obtained by root-bracketing the implicit solution."""
    return find_root(lambda f: implicit_solution_x_of_f(p, f, f_ref) - x, f_lo, f_hi, tol)


def implicit_profile(p: EpiParams, f_values, f_ref: Optional[float] = None,
                     tol: float = 1e-10) -> np.ndarray:
    """Abscissae x(f) for a monotone grid of density values.

    Evaluates the implicit solution incrementally (one short quadrature
    per grid cell), which is far cheaper than independent evaluations
    when profiling a whole solution branch.
    """
    f_values = np.asarray(f_values, dtype=float)
    if f_values.size < 2 or np.any(np.diff(f_values) <= 0.0) and np.any(np.diff(f_values) >= 0.0):
        if not (np.all(np.diff(f_values) > 0.0) or np.all(np.diff(f_values) < 0.0)):
            raise InvalidParameters("f_values must be strictly monotone")
    xs = np.empty_like(f_values)
    xs[0] = implicit_solution_x_of_f(p, float(f_values[0]), f_ref, tol)
    for i in range(1, f_values.size):
        step = implicit_solution_x_of_f(p, float(f_values[i]), f_ref=float(f_values[i - 1]),
                                        tol=tol) - p.x0
        xs[i] = xs[i - 1] + step
    return xs


def _c0_base_factor(p: EpiParams) -> float:
    if p.q == 1.0 or p.gamma0 >= 0.0:
        raise InvalidParameters("closed form needs q != 1 and gamma0 < 0")
    return p.branch * 0.5 * (p.q - 1.0) * math.sqrt(-p.gamma0)


def closed_form_c0(p: EpiParams, x) -> float | np.ndarray:
    """The c = 0 closed-form solution f(x) = base^(2/(q-1)).

    base = branch * (q-1)/2 * sqrt(-gamma0) * (x - x0) must be positive
    for the chosen branch (``NegativeBase`` otherwise).  At base = 0 the
    solution vanishes for q > 1 and diverges for q < 1; it cannot be
    normalized on the whole line.
    """
    k = _c0_base_factor(p)
    x = np.asarray(x, dtype=float)
    base = k * (x - p.x0)
    if np.any(base < 0.0):
        raise NegativeBase("closed-form base negative; flip branch or restrict x")
    exponent = 2.0 / (p.q - 1.0)
    with np.errstate(divide="ignore"):
        out = base ** exponent
    return float(out) if out.ndim == 0 else out


def closed_form_c0_with_derivatives(p: EpiParams, x):
    """(f, fdot, fddot) of the closed form, differentiated analytically."""
    k = _c0_base_factor(p)
    x = np.asarray(x, dtype=float)
    base = k * (x - p.x0)
    if np.any(base <= 0.0):
        raise NegativeBase("analytic derivatives need base > 0")
    e = 2.0 / (p.q - 1.0)
    f = base ** e
    fdot = e * k * base ** (e - 1.0)
    fddot = e * (e - 1.0) * k * k * base ** (e - 2.0)
    if f.ndim == 0:
        return float(f), float(fdot), float(fddot)
    return f, fdot, fddot


def solve_epi_numeric(p: EpiParams, f0: float, fdot0: float, span, tol: float = 1e-9,
                      *, max_step: Optional[float] = None, t_out=None,
                      f_floor: Optional[float] = None, ceiling: float = 1e12,
                      label: str = "f") -> Trajectory:
    """Numerical solution of the variational equation from (f0, fdot0).

    Stops early (``termination="event"``) if f falls to ``f_floor``
    (default 1e-9 * f0): bounded-regime solutions reach f = 0 at finite x
    where the equation is singular.  Conservation of the first integral
    along the result is checked with :func:`first_integral_drift`.
    """
    if f0 <= 0.0:
        raise NonPositiveDensity(f"f0={f0} must be positive")
    floor = 1e-9 * f0 if f_floor is None else f_floor

    def rhs(f, fdot):
        return euler_lagrange_rhs(f, fdot, p)

    return integrate_ivp(
        rhs, f0, fdot0, span, rel_tol=tol, abs_tol=tol * 1e-2,
        max_step=max_step, ceiling=ceiling, t_out=t_out,
        stop_when=lambda _x, f, _fd: f <= floor, label=label,
    )
