"""Deterministic numerical kernels used by every other module.

Root finding and quadrature delegate to scipy behind fixed contracts;
the ODE driver is a Dormand-Prince 5(4) embedded pair with dense output,
which keeps per-step overhead low for the small systems integrated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate as _quadpack
from scipy import optimize as _sp_optimize

from .errors import DegenerateInput, DomainError, NoBracket, NoConvergence, StepUnderflow

__all__ = [
    "ToleranceSpec",
    "FitResult",
    "Trajectory",
    "DEFAULT_TOL",
    "root_find_bracketed",
    "integrate_adaptive",
    "ode_solve",
    "fit_power_law",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ToleranceSpec:
    """Relative/absolute tolerance pair plus an iteration budget."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be positive")
        if self.abs_tol < 0.0:
            raise DomainError("abs_tol must be non-negative")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")


DEFAULT_TOL = ToleranceSpec()


@dataclass(frozen=True)
class FitResult:
    """Log-log regression output: fitted exponent, offset, and residual size."""

    slope: float
    intercept: float
    residual_rms: float


def root_find_bracketed(fn, lo: float, hi: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Find a root of ``fn`` inside the bracket [lo, hi].

    Brent's method (inverse-quadratic/secant with bisection fallback).
    ``fn(lo)`` and ``fn(hi)`` must not have the same strict sign.

    Raises
    ------
    NoBracket
        If fn(lo) * fn(hi) > 0.
    NoConvergence
        If the iteration budget is exhausted.
    """
    if not lo < hi:
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoBracket(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    try:
        root, res = _sp_optimize.brentq(
            fn,
            lo,
            hi,
            xtol=max(tol.abs_tol, 1e-300),
            rtol=max(tol.rel_tol, 4 * _EPS),
            maxiter=tol.max_iterations,
            full_output=True,
            disp=False,
        )
    except ValueError as exc:  # scipy re-checks the bracket
        raise NoBracket(str(exc)) from exc
    if not res.converged:
        raise NoConvergence(f"root finder exhausted {tol.max_iterations} iterations")
    return float(root)


def _power_substitution(fn, a: float, b: float, exponent: float, at_left: bool):
    """Map an endpoint singularity fn ~ (y - edge)^exponent to a smooth integrand.

    Substitutes y = edge +/- t^m with m chosen so the new integrand vanishes
    at least linearly at t = 0.
    """
    if exponent <= -1.0:
        raise DomainError(f"endpoint exponent {exponent} is not integrable")
    m = max(2, int(np.ceil(2.0 / (1.0 + exponent))))
    span = b - a
    if at_left:
        def g(t):
            return fn(a + t**m) * m * t ** (m - 1)
    else:
        def g(t):
            return fn(b - t**m) * m * t ** (m - 1)
    return g, 0.0, span ** (1.0 / m)


def _quad(fn, a, b, tol):
    out = _quadpack.quad(
        fn,
        a,
        b,
        epsabs=tol.abs_tol,
        epsrel=tol.rel_tol,
        limit=max(200, tol.max_iterations),
        full_output=1,
    )
    if len(out) > 3:
        raise NoConvergence(f"quadrature on [{a}, {b}]: {out[3]}")
    return out[0]


def integrate_adaptive(
    fn,
    a: float,
    b: float,
    tol: ToleranceSpec = DEFAULT_TOL,
    *,
    left_exponent: float | None = None,
    right_exponent: float | None = None,
) -> float:
    """Adaptive quadrature of ``fn`` on (a, b); b may be ``inf``.

    Integrable algebraic endpoint singularities fn ~ (y-a)^p or (b-y)^p
    are handled by declaring the exponent hint; the routine then applies a
    power substitution before delegating to the adaptive rule.
    """
    if not a < b:
        raise DomainError(f"empty integration range [{a}, {b}]")
    if right_exponent is not None and np.isinf(b):
        raise DomainError("right endpoint hint requires a finite endpoint")
    if left_exponent is not None and right_exponent is not None:
        mid = 0.5 * (a + b)
        return integrate_adaptive(fn, a, mid, tol, left_exponent=left_exponent) + integrate_adaptive(
            fn, mid, b, tol, right_exponent=right_exponent
        )
    if left_exponent is not None:
        if np.isinf(b):
            cut = a + 1.0
            return integrate_adaptive(fn, a, cut, tol, left_exponent=left_exponent) + _quad(fn, cut, b, tol)
        g, t0, t1 = _power_substitution(fn, a, b, left_exponent, at_left=True)
        return _quad(g, t0, t1, tol)
    if right_exponent is not None:
        g, t0, t1 = _power_substitution(fn, a, b, right_exponent, at_left=False)
        return _quad(g, t0, t1, tol)
    return _quad(fn, a, b, tol)


# Dormand-Prince 5(4) tableau, error weights, and the quartic dense-output
# interpolant coefficients.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@dataclass(frozen=True)
class Trajectory:
    """Sampled ODE solution with a piecewise-quartic continuous extension."""

    xs: np.ndarray
    ys: np.ndarray
    _lefts: np.ndarray
    _steps: np.ndarray
    _ylefts: np.ndarray
    _dense: np.ndarray
    nfev: int

    def __call__(self, x):
        return self.sample(x)

    def sample(self, x):
        """Evaluate the dense interpolant at scalar or array abscissae."""
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = sorted((self.xs[0], self.xs[-1]))
        if np.any(pts < lo - 1e-12 * max(1.0, abs(lo))) or np.any(pts > hi + 1e-12 * max(1.0, abs(hi))):
            raise DomainError("dense evaluation outside the integrated span")
        # In the flipped coordinate (-x for backward runs) segment lefts ascend.
        sign = 1.0 if self._steps[0] > 0 else -1.0
        idx = np.searchsorted(sign * self._lefts, sign * pts, side="right") - 1
        idx = np.clip(idx, 0, len(self._lefts) - 1)
        out = np.empty((pts.size, self.ys.shape[1]))
        for i, (p, k) in enumerate(zip(pts, idx)):
            h = self._steps[k]
            theta = min(max((p - self._lefts[k]) / h, 0.0), 1.0)
            tv = np.array([theta, theta**2, theta**3, theta**4])
            out[i] = self._ylefts[k] + h * (self._dense[k] @ tv)
        return out[0] if np.isscalar(x) or np.asarray(x).ndim == 0 else out

    @property
    def final(self) -> np.ndarray:
        return self.ys[-1]


def _initial_step(rhs, x0, y0, f0, direction, span, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span)
    y1 = y0 + h0 * direction * f0
    f1 = np.asarray(rhs(x0 + h0 * direction, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def ode_solve(
    rhs,
    x0: float,
    x1: float,
    y0,
    tol: ToleranceSpec = DEFAULT_TOL,
    *,
    max_steps: int = 500_000,
) -> Trajectory:
    """Integrate y' = rhs(x, y) from x0 to x1 (either direction).

    Explicit Dormand-Prince 5(4) embedded pair with PI-free standard step
    control and a quartic dense output on every accepted step.

    Raises
    ------
    StepUnderflow
        If error control forces the step below machine resolution
        (a stiffness or singularity indicator for this solver class).
    NoConvergence
        If ``max_steps`` accepted steps do not reach ``x1``.
    """
    if x0 == x1:
        raise DomainError("empty integration span")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1:
        raise DomainError("state must be one-dimensional")
    direction = 1.0 if x1 > x0 else -1.0
    span = abs(x1 - x0)
    rtol, atol = tol.rel_tol, tol.abs_tol
    nfev = 0

    def f(x, yy):
        nonlocal nfev
        nfev += 1
        return np.asarray(rhs(x, yy), dtype=float)

    x = x0
    k1 = f(x, y)
    h_floor = 32 * _EPS * max(1.0, abs(x0), abs(x1))
    h = max(_initial_step(rhs, x0, y, k1, direction, span, rtol, atol), h_floor)
    nfev += 1

    xs = [x0]
    ys = [y.copy()]
    lefts, steps, ylefts, dense = [], [], [], []
    K = np.empty((7, y.size))

    accepted = 0
    while (x1 - x) * direction > 0:
        h = min(h, abs(x1 - x))
        hd = h * direction
        K[0] = k1
        for i, arow in enumerate(_A[:-1]):
            K[i + 1] = f(x + _C[i + 1] * hd, y + hd * (arow @ K[: i + 1]))
        y_new = y + hd * (_A[5] @ K[:6])
        K[6] = f(x + hd, y_new)
        err_vec = hd * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / scale) ** 2))
        if err <= 1.0:
            lefts.append(x)
            steps.append(hd)
            ylefts.append(y.copy())
            dense.append(K.T @ _P)
            x += hd
            y = y_new
            k1 = K[6].copy()  # K is reused; a view would be clobbered on rejected attempts
            xs.append(x)
            ys.append(y.copy())
            accepted += 1
            if accepted > max_steps:
                raise NoConvergence(f"step budget {max_steps} exhausted at x={x}")
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err**-0.2)
            h *= max(0.2, factor)
        else:
            h *= max(0.2, 0.9 * err**-0.2)
            if h < 16 * _EPS * max(1.0, abs(x)):
                raise StepUnderflow(f"step size underflow at x={x} (h={h})")

    return Trajectory(
        xs=np.asarray(xs),
        ys=np.asarray(ys),
        _lefts=np.asarray(lefts),
        _steps=np.asarray(steps),
        _ylefts=np.asarray(ylefts),
        _dense=np.asarray(dense),
        nfev=nfev,
    )


def fit_power_law(samples) -> FitResult:
    """Least-squares line through (ln x, ln y); the slope is the exponent.

    Raises DegenerateInput for fewer than 3 samples, non-positive data, or
    zero spread in the abscissae.
    """
    pts = list(samples)
    if len(pts) < 3:
        raise DegenerateInput("need at least 3 samples")
    xv = np.array([p[0] for p in pts], dtype=float)
    yv = np.array([p[1] for p in pts], dtype=float)
    if np.any(xv <= 0.0) or np.any(yv <= 0.0):
        raise DegenerateInput("power-law fit requires strictly positive samples")
    lx, ly = np.log(xv), np.log(yv)
    if np.ptp(lx) == 0.0:
        raise DegenerateInput("all abscissae are equal")
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - design @ coef
    return FitResult(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )
