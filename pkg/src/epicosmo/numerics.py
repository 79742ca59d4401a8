"""Shared numerical primitives.

Adaptive initial-value-problem integration (embedded Dormand-Prince 5(4)
pair with PI step control), adaptive Gauss-Kronrod quadrature, Brent root
finding, and second-order finite differencing on arbitrary strictly
increasing grids.  Everything downstream - the variational solver, the
nonlocal linearization chain and the cosmological reductions - runs on
these four primitives.

Second-order scalar equations are integrated as first-order systems of
dimension two; the public ``integrate_ivp`` right-hand-side contract takes
``(y, ydot)`` and returns ``yddot``.  Solutions of the equations treated
here routinely diverge at finite values of the independent variable, so
the integrator truncates gracefully at a configurable state ceiling
instead of failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    EmptySpan,
    NoSignChange,
    NonConvergent,
    NonFiniteInitialCondition,
    StepSizeUnderflow,
    TooFewSamples,
)

__all__ = [
    "Trajectory",
    "integrate_system",
    "integrate_ivp",
    "quadrature",
    "find_root",
    "finite_diff",
    "cumulative_trapezoid",
]

DEFAULT_CEILING = 1e12
STEP_FLOOR_FRACTION = 1e-14


@dataclass(frozen=True)
class Trajectory:
    """An ordered sequence of (independent, state, derivative) samples.

    The independent variable is strictly increasing; ``state`` and
    ``derivative`` have the same length (>= 2).  ``blew_up`` marks runs
    truncated at the state ceiling; ``termination`` records how the run
    ended (``"completed"``, ``"blow_up"``, or ``"event"``).
    """

    independent: np.ndarray
    state: np.ndarray
    derivative: np.ndarray
    label: str = ""
    blew_up: bool = False
    termination: str = "completed"

    def __post_init__(self):
        object.__setattr__(self, "independent", np.asarray(self.independent, dtype=float))
        object.__setattr__(self, "state", np.asarray(self.state, dtype=float))
        object.__setattr__(self, "derivative", np.asarray(self.derivative, dtype=float))
        n = self.independent.size
        if n < 2:
            raise ValueError("a trajectory needs at least two samples")
        if self.state.size != n or self.derivative.size != n:
            raise ValueError("independent/state/derivative lengths differ")
        if not np.all(np.diff(self.independent) > 0.0):
            raise ValueError("independent variable must be strictly increasing")

    def __len__(self):
        return self.independent.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.independent[0]), float(self.independent[-1])

    def with_label(self, label: str) -> "Trajectory":
        return replace(self, label=label)

    def slice(self, lo: int, hi: int) -> "Trajectory":
        return replace(
            self,
            independent=self.independent[lo:hi],
            state=self.state[lo:hi],
            derivative=self.derivative[lo:hi],
        )

    def sample(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Cubic-Hermite evaluation of (state, derivative) at ``xs``.

        State values interpolate with O(h^4) error between stored nodes;
        the returned derivative is the analytic derivative of the Hermite
        cubic (one order less accurate).  ``xs`` must lie inside the span.
        """
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        lo, hi = self.span
        if np.any(xs < lo - 1e-12) or np.any(xs > hi + 1e-12):
            raise ValueError("sample points outside the trajectory span")
        xs = np.clip(xs, lo, hi)
        idx = np.clip(np.searchsorted(self.independent, xs, side="right") - 1, 0, len(self) - 2)
        x0 = self.independent[idx]
        h = self.independent[idx + 1] - x0
        t = (xs - x0) / h
        y0, y1 = self.state[idx], self.state[idx + 1]
        d0, d1 = self.derivative[idx] * h, self.derivative[idx + 1] * h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        val = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
        dh00 = 6 * t * (t - 1)
        dh10 = (1 - t) * (1 - 3 * t)
        dh01 = -dh00
        dh11 = t * (3 * t - 2)
        der = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h
        return val, der


# Dormand-Prince 5(4) tableau.  The fifth-order solution propagates; the
# difference against the embedded fourth-order solution estimates the
# local error.  FSAL: the last stage is the first stage of the next step.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# PI controller constants (order-5 propagation).
_PI_ALPHA = 0.17
_PI_BETA = 0.04
_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0

# Per-step control is run this much tighter than the caller's budget so the
# accumulated global error stays within the requested tolerances on spans
# of order ten units.  Costs ~ margin^(1/5) extra steps.
_TOL_MARGIN = 100.0
_REL_FLOOR = 4e-15


@dataclass
class SystemResult:
    """Raw output of ``integrate_system``."""

    ts: np.ndarray
    ys: np.ndarray  # shape (n_samples, dim)
    derivs: np.ndarray  # rhs evaluated at each sample
    blew_up: bool = False
    termination: str = "completed"


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _initial_step(rhs, t0, y0, f0, direction, rel_tol, abs_tol, span_width):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span_width)
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(rhs(t0 + direction * h0, y1), dtype=float)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span_width)


def integrate_system(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    span: tuple[float, float],
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    *,
    max_step: Optional[float] = None,
    ceiling: float = DEFAULT_CEILING,
    t_out: Optional[Sequence[float]] = None,
    stop_when: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> SystemResult:
    """Integrate a first-order system dy/dt = rhs(t, y) adaptively.

    Parameters
    ----------
    rhs : callable
        Right-hand side; receives (t, y) and returns dy/dt as a vector.
    y0 : sequence of float
        Initial state.
    span : (t0, t1)
        Integration interval; t1 < t0 integrates backwards.
    rel_tol, abs_tol : float
        Per-step local error tolerances (both > 0).
    max_step : float, optional
        Upper bound on the step magnitude; also controls output density
        when ``t_out`` is not given.
    ceiling : float
        Truncate (with ``blew_up=True``) once any |y_i| exceeds this.
    t_out : sequence of float, optional
        If given, samples are emitted at exactly these abscissae (must be
        monotone in the integration direction and inside the span) via
        cubic-Hermite dense output instead of at the accepted steps.
    stop_when : callable, optional
        Predicate on (t, y); integration stops after the first accepted
        step whose endpoint satisfies it (``termination="event"``).

    Raises
    ------
    EmptySpan, NonFiniteInitialCondition, StepSizeUnderflow
    """
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise EmptySpan(f"integration span [{t0}, {t1}] is empty")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not np.all(np.isfinite(y0)):
        raise NonFiniteInitialCondition(f"initial state {y0} is not finite")
    f0 = np.atleast_1d(np.asarray(rhs(t0, y0), dtype=float))
    if not np.all(np.isfinite(f0)):
        raise NonFiniteInitialCondition("right-hand side is not finite at the initial state")
    rel_tol = max(rel_tol / _TOL_MARGIN, _REL_FLOOR)
    abs_tol = abs_tol / _TOL_MARGIN

    direction = 1.0 if t1 > t0 else -1.0
    span_width = abs(t1 - t0)
    h_floor = STEP_FLOOR_FRACTION * span_width
    h_cap = span_width if max_step is None else min(abs(max_step), span_width)

    want_out = t_out is not None
    if want_out:
        t_out = np.asarray(t_out, dtype=float)
        if t_out.size == 0:
            raise ValueError("t_out is empty")
        if np.any(direction * np.diff(t_out) <= 0):
            raise ValueError("t_out must be strictly monotone in the integration direction")
        if direction * (t_out[0] - t0) < -1e-12 or direction * (t1 - t_out[-1]) < -1e-12:
            raise ValueError("t_out must lie inside the span")

    ts = [t0]
    ys = [y0.copy()]
    fs = [f0.copy()]
    out_ts: list[float] = []
    out_ys: list[np.ndarray] = []
    out_fs: list[np.ndarray] = []
    out_idx = 0
    if want_out and abs(t_out[0] - t0) <= 1e-12 * max(1.0, abs(t0)):
        out_ts.append(t0)
        out_ys.append(y0.copy())
        out_fs.append(f0.copy())
        out_idx = 1

    h = min(_initial_step(rhs, t0, y0, f0, direction, rel_tol, abs_tol, span_width), h_cap)
    t, y, f = t0, y0, f0
    err_prev = 1.0
    blew_up = False
    termination = "completed"
    k = np.empty((7, y0.size), dtype=float)

    while direction * (t1 - t) > 1e-14 * span_width:
        h = min(h, abs(t1 - t))
        if h < h_floor:
            raise StepSizeUnderflow(
                f"step {h:.3e} below floor {h_floor:.3e} at t={t:.6g} without meeting tolerance"
            )
        hd = direction * h
        k[0] = f
        finite = True
        for i in range(1, 7):
            yi = y + hd * np.dot(np.asarray(_DP_A[i]), k[:i])
            ki = np.asarray(rhs(t + _DP_C[i] * hd, yi), dtype=float)
            if not np.all(np.isfinite(ki)):
                finite = False
                break
            k[i] = ki
        if not finite:
            h *= 0.5
            continue
        y_new = y + hd * np.dot(np.asarray(_DP_A[6]), k[:6])  # 5th-order solution
        f_new = k[6]  # FSAL: already the rhs at (t+hd, y_new)
        err_vec = hd * (_DP_E @ k)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if err > 1.0 or not np.all(np.isfinite(y_new)):
            factor = max(_FAC_MIN, _SAFETY * err ** (-_PI_ALPHA)) if math.isfinite(err) else _FAC_MIN
            h *= min(1.0, factor)
            continue

        t_new = t + hd
        if want_out:
            while out_idx < t_out.size and direction * (t_out[out_idx] - t_new) <= 1e-12 * max(1.0, abs(t_new)):
                tau = t_out[out_idx]
                if abs(tau - t_new) <= 1e-14 * max(1.0, abs(t_new)):
                    out_ts.append(t_new)
                    out_ys.append(y_new.copy())
                    out_fs.append(f_new.copy())
                else:
                    yv = _hermite(t, y, k[0], t_new, y_new, f_new, tau)
                    out_ts.append(float(tau))
                    out_ys.append(np.asarray(yv, dtype=float))
                    out_fs.append(np.asarray(rhs(tau, yv), dtype=float))
                out_idx += 1
        ts.append(t_new)
        ys.append(y_new.copy())
        fs.append(f_new.copy())
        t, y, f = t_new, y_new, f_new

        if np.max(np.abs(y)) > ceiling:
            blew_up = True
            termination = "blow_up"
            break
        if stop_when is not None and stop_when(t, y):
            termination = "event"
            break

        factor = _SAFETY * err ** (-_PI_ALPHA) * err_prev ** _PI_BETA if err > 0 else _FAC_MAX
        h = min(h * min(_FAC_MAX, max(_FAC_MIN, factor)), h_cap)
        err_prev = max(err, 1e-4)

    if want_out:
        result_t = np.asarray(out_ts)
        result_y = np.asarray(out_ys)
        result_f = np.asarray(out_fs)
        if result_t.size < 2:  # early truncation before the second output point
            result_t = np.asarray(ts)
            result_y = np.asarray(ys)
            result_f = np.asarray(fs)
    else:
        result_t = np.asarray(ts)
        result_y = np.asarray(ys)
        result_f = np.asarray(fs)
    return SystemResult(result_t, result_y, result_f, blew_up, termination)


def integrate_ivp(
    rhs: Callable[[float, float], float],
    y0: float,
    ydot0: float,
    span: tuple[float, float],
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    *,
    max_step: Optional[float] = None,
    ceiling: float = DEFAULT_CEILING,
    t_out: Optional[Sequence[float]] = None,
    stop_when: Optional[Callable[[float, float, float], bool]] = None,
    label: str = "",
) -> Trajectory:
    """Integrate the second-order scalar equation yddot = rhs(y, ydot).

    The equation is autonomous: ``rhs`` receives ``(y, ydot)`` only.  The
    run truncates with ``blew_up=True`` once |y| or |ydot| exceeds
    ``ceiling`` (solutions here frequently diverge at finite abscissae),
    and with ``termination="event"`` if ``stop_when(x, y, ydot)`` fires.

    Returns a :class:`Trajectory` with y as state and ydot as derivative.
    Samples land on the accepted steps, or on ``t_out`` when given.
    """
    if not (np.isfinite(y0) and np.isfinite(ydot0)):
        raise NonFiniteInitialCondition(f"initial condition ({y0}, {ydot0}) is not finite")

    def system(_t, s):
        return np.array([s[1], rhs(s[0], s[1])], dtype=float)

    wrapped_stop = None
    if stop_when is not None:
        def wrapped_stop(t, s, _f=stop_when):
            return _f(t, s[0], s[1])

    res = integrate_system(
        system,
        [y0, ydot0],
        span,
        rel_tol,
        abs_tol,
        max_step=max_step,
        ceiling=ceiling,
        t_out=t_out,
        stop_when=wrapped_stop,
    )
    ts, states, derivs = res.ts, res.ys[:, 0], res.ys[:, 1]
    if ts[-1] < ts[0]:  # backward run: store with increasing abscissae
        ts, states, derivs = ts[::-1], states[::-1], derivs[::-1]
    return Trajectory(ts, states, derivs, label=label, blew_up=res.blew_up,
                      termination=res.termination)


# --- quadrature --------------------------------------------------------------

# 15-point Kronrod extension of the 7-point Gauss rule (nodes on [-1, 1]).
_GK_NODES = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_GK_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])


def _gk15(fn, a, b):
    """Return (Kronrod value, |Kronrod - Gauss| error estimate) on [a, b]."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fk = 0.0
    fg = 0.0
    for i, x in enumerate(_GK_NODES[:-1]):
        lo = fn(center - half * x)
        hi = fn(center + half * x)
        fk += _GK_WEIGHTS[i] * (lo + hi)
        if i % 2 == 1:
            fg += _G7_WEIGHTS[i // 2] * (lo + hi)
    mid = fn(center)
    fk += _GK_WEIGHTS[-1] * mid
    fg += _G7_WEIGHTS[-1] * mid
    return half * fk, abs(half * (fk - fg))


def quadrature(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-9,
               max_intervals: int = 4096) -> float:
    """Adaptive Gauss-Kronrod integral of ``fn`` over [a, b].

    Interior-node rules never evaluate the endpoints, so integrable
    endpoint singularities (e.g. x^{-1/2} at 0) are handled by repeated
    subdivision toward the endpoint.  Convergence target:
    |result - true| <= tol * max(1, |result|).

    Raises ``NonConvergent`` if the subdivision budget is exhausted.
    """
    if not a < b:
        raise EmptySpan(f"quadrature interval [{a}, {b}] is empty or reversed")
    if tol <= 0:
        raise ValueError("tol must be positive")
    val, err = _gk15(fn, a, b)
    pieces = [(err if math.isfinite(err) else math.inf, a, b, val)]
    total = val
    total_err = err
    while total_err > tol * max(1.0, abs(total)):
        if len(pieces) >= max_intervals:
            raise NonConvergent(
                f"quadrature did not reach tol={tol:g} after {max_intervals} subdivisions "
                f"(error estimate {total_err:.3e})"
            )
        worst = max(range(len(pieces)), key=lambda i: pieces[i][0])
        perr, pa, pb, pval = pieces.pop(worst)
        pm = 0.5 * (pa + pb)
        lval, lerr = _gk15(fn, pa, pm)
        rval, rerr = _gk15(fn, pm, pb)
        pieces.append((lerr if math.isfinite(lerr) else math.inf, pa, pm, lval))
        pieces.append((rerr if math.isfinite(rerr) else math.inf, pm, pb, rval))
        total = math.fsum(p[3] for p in pieces)
        total_err = math.fsum(p[0] for p in pieces)
        if not math.isfinite(total):
            raise NonConvergent("integrand is not integrable on the interval (non-finite sum)")
    return total


def oriented_quadrature(fn, a, b, tol=1e-9):
    """``quadrature`` with signed orientation: swaps bounds when a > b."""
    if a == b:
        return 0.0
    if a < b:
        return quadrature(fn, a, b, tol)
    return -quadrature(fn, b, a, tol)


# --- root finding ------------------------------------------------------------

def find_root(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
              max_iter: int = 200) -> float:
    """Brent root of ``fn`` on the bracket [lo, hi].

    Requires fn(lo)*fn(hi) <= 0 (raises ``NoSignChange`` otherwise).
    Returns r once the bracket width falls below ``tol`` (plus machine
    slack) or fn(r) hits zero exactly.
    """
    a, b = float(lo), float(hi)
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise NoSignChange(f"fn({a})={fa:g} and fn({b})={fb:g} have the same sign")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol_act = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= tol_act or fb == 0.0:
            return b
        if abs(e) < tol_act or abs(fa) <= abs(fb):
            d = e = m  # bisection
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * m * q - abs(tol_act * q), abs(e * q)):
                e, d = d, p / q  # accept interpolation
            else:
                d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol_act else math.copysign(tol_act, m)
        fb = fn(b)
    return b


# --- finite differencing ------------------------------------------------------

def finite_diff(xs, ys) -> np.ndarray:
    """Second-order derivative estimates on a strictly increasing grid.

    Differentiates the local quadratic through three neighbouring samples:
    centered in the interior, one-sided at the two boundaries.  Exact for
    quadratics on any grid.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise TooFewSamples(f"need >= 3 samples, got {xs.size}")
    if not np.all(np.diff(xs) > 0.0):
        raise ValueError("abscissae must be strictly increasing")

    def lagrange_deriv(xa, xb, xc, ya, yb, yc, xe):
        wa = (2 * xe - xb - xc) / ((xa - xb) * (xa - xc))
        wb = (2 * xe - xa - xc) / ((xb - xa) * (xb - xc))
        wc = (2 * xe - xa - xb) / ((xc - xa) * (xc - xb))
        return wa * ya + wb * yb + wc * yc

    out = np.empty_like(ys)
    out[1:-1] = lagrange_deriv(xs[:-2], xs[1:-1], xs[2:], ys[:-2], ys[1:-1], ys[2:], xs[1:-1])
    out[0] = lagrange_deriv(xs[0], xs[1], xs[2], ys[0], ys[1], ys[2], xs[0])
    out[-1] = lagrange_deriv(xs[-3], xs[-2], xs[-1], ys[-3], ys[-2], ys[-1], xs[-1])
    return out


def cumulative_trapezoid(xs, ys, initial: float = 0.0) -> np.ndarray:
    """Cumulative trapezoid integral of ``ys`` over ``xs``, starting at ``initial``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    steps = 0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)
    return np.concatenate([[initial], initial + np.cumsum(steps)])
