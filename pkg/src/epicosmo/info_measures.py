"""Information functionals on sampled densities.

Shannon entropy, the nonextensive generalization S_q, Fisher information
for translation families I = int (f')^2/f dx, its nonextensive variant
I_q = int f^(q-2) (f')^2 dx, and a Monte Carlo estimation experiment that
exercises the information/mean-square-error product bound I * e^2 >= 1.

Densities live on uniform grids; integrals use trapezoid weights and
derivatives come from second-order finite differences.  Cells with
density below ``ZERO_DENSITY_CUTOFF`` are excluded from the singular
integrands (f'^2/f and f^(q-2)), and the number of excluded cells is
available from :func:`clipped_cells`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BiasedEstimator,
    DegenerateSupport,
    NonFiniteIntegrand,
    NotNormalized,
)
from .numerics import finite_diff

__all__ = [
    "GridDensity",
    "EstimationExperiment",
    "GaussianLocationFamily",
    "CramerRaoReport",
    "shannon_entropy",
    "tsallis_entropy",
    "fisher_information",
    "fisher_information_q",
    "cramer_rao_experiment",
    "clipped_cells",
]

ZERO_DENSITY_CUTOFF = 1e-30
NORMALIZATION_TOL = 1e-6
UNIFORMITY_TOL = 1e-12


@dataclass(frozen=True)
class GridDensity:
    """A sampled probability density f(x) on a uniform grid."""

    xs: np.ndarray
    fs: np.ndarray
    cell_width: float

    def __post_init__(self):
        object.__setattr__(self, "xs", np.asarray(self.xs, dtype=float))
        object.__setattr__(self, "fs", np.asarray(self.fs, dtype=float))
        if self.xs.size != self.fs.size:
            raise ValueError("xs and fs lengths differ")
        if self.xs.size < 2:
            raise ValueError("need at least two grid points")
        if np.any(self.fs < 0.0):
            raise ValueError("density samples must be nonnegative")
        gaps = np.diff(self.xs)
        if np.max(np.abs(gaps - self.cell_width)) >= UNIFORMITY_TOL * self.cell_width:
            raise ValueError("grid is not uniform to the required tolerance")

    @classmethod
    def from_samples(cls, xs, fs) -> "GridDensity":
        xs = np.asarray(xs, dtype=float)
        width = (xs[-1] - xs[0]) / (xs.size - 1)
        return cls(xs, fs, float(width))

    @classmethod
    def gaussian(cls, mean: float = 0.0, sigma: float = 1.0, half_width: float = 8.0,
                 points: int = 4001) -> "GridDensity":
        xs = np.linspace(mean - half_width * sigma, mean + half_width * sigma, points)
        fs = np.exp(-0.5 * ((xs - mean) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
        return cls.from_samples(xs, fs)

    @classmethod
    def uniform(cls, lo: float, hi: float, points: int = 1001) -> "GridDensity":
        xs = np.linspace(lo, hi, points)
        return cls.from_samples(xs, np.full(points, 1.0 / (hi - lo)))

    def integral(self, values) -> float:
        """Trapezoid integral of ``values`` over the grid."""
        return float(np.trapezoid(np.asarray(values, dtype=float), dx=self.cell_width))

    @property
    def mass(self) -> float:
        return self.integral(self.fs)

    @property
    def is_normalized(self) -> bool:
        return abs(self.mass - 1.0) < NORMALIZATION_TOL

    def normalized(self) -> "GridDensity":
        return GridDensity(self.xs, self.fs / self.mass, self.cell_width)

    def shifted(self, offset: float) -> "GridDensity":
        """The same density as a translation-family member at a new location."""
        return GridDensity(self.xs + offset, self.fs, self.cell_width)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "f"])
            for x, f in zip(self.xs, self.fs):
                writer.writerow([f"{x:.17g}", f"{f:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "GridDensity":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip().lower() for c in rows[0][:2]] != ["x", "f"]:
            raise ValueError(f"{path}: expected a two-column CSV with header 'x,f'")
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:]], dtype=float)
        return cls.from_samples(data[:, 0], data[:, 1])


def _require_normalized(d: GridDensity) -> None:
    if not d.is_normalized:
        raise NotNormalized(f"density mass {d.mass:.8g} deviates from 1 beyond {NORMALIZATION_TOL:g}")


def clipped_cells(d: GridDensity) -> int:
    """Number of cells excluded from singular integrands (f below cutoff)."""
    return int(np.count_nonzero(d.fs < ZERO_DENSITY_CUTOFF))


def shannon_entropy(d: GridDensity) -> float:
    """-int f ln f dx with the 0*ln(0) = 0 convention."""
    _require_normalized(d)
    fs = d.fs
    term = np.zeros_like(fs)
    mask = fs >= ZERO_DENSITY_CUTOFF
    term[mask] = -fs[mask] * np.log(fs[mask])
    return d.integral(term)


def tsallis_entropy(d: GridDensity, q: float) -> float:
    """Nonextensive entropy S_q = int f (1 - f^(q-1))/(q-1) dx.

    Reduces to Shannon entropy in the q -> 1 limit; the exact q = 1 call
    delegates to :func:`shannon_entropy`.
    """
    _require_normalized(d)
    if q == 1.0:
        return shannon_entropy(d)
    fs = d.fs
    term = np.zeros_like(fs)
    mask = fs >= ZERO_DENSITY_CUTOFF
    # f*(1 - f^(q-1)) written as f - f^q; safe for q < 0 on masked cells
    term[mask] = (fs[mask] - fs[mask] ** q) / (q - 1.0)
    return d.integral(term)


def _generalized_fisher(d: GridDensity, q: float) -> float:
    _require_normalized(d)
    fs = d.fs
    mask = fs >= ZERO_DENSITY_CUTOFF
    if int(np.count_nonzero(mask[1:-1])) < 3:
        raise DegenerateSupport("fewer than 3 strictly positive interior samples")
    fprime = finite_diff(d.xs, fs)
    term = np.zeros_like(fs)
    if q == 1.0:
        term[mask] = fprime[mask] ** 2 / fs[mask]
    else:
        term[mask] = fs[mask] ** (q - 2.0) * fprime[mask] ** 2
    if not np.all(np.isfinite(term)):
        bad = np.flatnonzero(~np.isfinite(term))
        raise NonFiniteIntegrand(
            f"information integrand non-finite at {bad.size} cells (first: {bad[:5].tolist()})",
            bad_cells=bad.tolist(),
        )
    return d.integral(term)


def fisher_information(d: GridDensity) -> float:
    """Translation-family Fisher information int (f')^2 / f dx."""
    return _generalized_fisher(d, 1.0)


def fisher_information_q(d: GridDensity, q: float) -> float:
    """Nonextensive Fisher information int f^(q-2) (f')^2 dx.

    Identical (bit-for-bit) to :func:`fisher_information` at q = 1.
    """
    return _generalized_fisher(d, q)


@dataclass(frozen=True)
class EstimationExperiment:
    """Monte Carlo protocol for the information/error product."""

    true_location: float
    sample_count: int
    estimator: Callable[[np.ndarray], float]
    replications: int
    rng_seed: int

    def __post_init__(self):
        if self.sample_count < 1 or self.replications < 1:
            raise ValueError("sample_count and replications must be >= 1")


@dataclass(frozen=True)
class GaussianLocationFamily:
    """Location family of normal densities with fixed scale sigma."""

    sigma: float = 1.0

    def sample(self, rng: np.random.Generator, location: float, shape) -> np.ndarray:
        return rng.normal(location, self.sigma, size=shape)

    def grid_density(self, location: float = 0.0, half_width: float = 8.0,
                     points: int = 4001) -> GridDensity:
        return GridDensity.gaussian(location, self.sigma, half_width, points)


@dataclass(frozen=True)
class CramerRaoReport:
    """Outcome of one estimation experiment.

    ``fisher_total`` is the information carried by the full sample
    (per-observation information times sample_count); ``product`` is
    fisher_total * mse and should sit at or above 1.
    """

    fisher_per_sample: float
    fisher_total: float
    mse: float
    mse_stderr: float
    product: float
    bias: float
    bias_stderr: float
    violates_bound: bool


def cramer_rao_experiment(family, exp: EstimationExperiment) -> CramerRaoReport:
    """Run the Monte Carlo information/error experiment.

    Draws ``replications`` samples of size ``sample_count`` at the true
    location, applies the estimator, and reports the mean-square error
    together with the sample information.  The estimator must be unbiased:
    |mean - true| < 3 * stderr is checked, not assumed.
    """
    rng = np.random.default_rng(exp.rng_seed)
    draws = family.sample(rng, exp.true_location, (exp.replications, exp.sample_count))
    estimates = np.apply_along_axis(exp.estimator, 1, draws)
    errors = estimates - exp.true_location

    bias = float(np.mean(errors))
    bias_stderr = float(np.std(errors, ddof=1) / math.sqrt(exp.replications))
    if abs(bias) >= 3.0 * bias_stderr:
        raise BiasedEstimator(
            f"estimator bias {bias:.4g} exceeds 3 stderr ({bias_stderr:.4g}) "
            f"at location {exp.true_location}"
        )

    sq = errors ** 2
    mse = float(np.mean(sq))
    mse_stderr = float(np.std(sq, ddof=1) / math.sqrt(exp.replications))
    info_1 = fisher_information(family.grid_density(exp.true_location))
    info_n = info_1 * exp.sample_count
    product = info_n * mse
    violates = product < 1.0 - 5.0 * (mse_stderr / mse)
    return CramerRaoReport(info_1, info_n, mse, mse_stderr, product, bias, bias_stderr, violates)
