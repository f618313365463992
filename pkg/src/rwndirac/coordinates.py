"""Tortoise-coordinate map on the static interior of a black-hole spacetime.

The map x(r) solves f^2(r) dx/dr = 1 with x(0) = 0 and sends (0, r_star)
monotonically onto (0, inf).  Closed forms:

subextremal (rho = r_+/r_-, lengths in units of r_-):
    x = r + rho^2/(rho-1) * ln(1 - r/rho) - 1/(rho-1) * ln(1 - r)
extremal (lengths in units of r_0, u = 1 - r):
    x = 1/u + 2 ln u - u

Both expressions cancel to third order at small r, so a power series in r
is used below r = 1/2; near the inner boundary the logarithm of the gap
s = 1 - r is isolated, and the numerical inverse runs in the logit
variable m = ln(r/s), which is well conditioned at both endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NoConvergence
from .numerics import DEFAULT_TOL, FitResult, ToleranceSpec, fit_power_law, root_find_bracketed
from .spacetime import Sector, Spacetime

__all__ = [
    "Rescale",
    "CoordinateMap",
    "TailConstants",
    "ExponentChecks",
    "x_of_r",
    "r_of_x",
    "inner_gap_of_x",
    "logit_of_x",
    "tail_constants",
    "verify_exponents",
]

_SERIES_SPLIT = 0.5


class Rescale(Enum):
    """Unit convention of a map: raw Compton units, or lengths / r_star."""

    NONE = "none"
    BY_INNER_RADIUS = "by_inner_radius"


@dataclass(frozen=True)
class CoordinateMap:
    """Tortoise map of one black-hole spacetime in a fixed unit convention."""

    spacetime: Spacetime
    rescale: Rescale = Rescale.BY_INNER_RADIUS

    def __post_init__(self) -> None:
        self.spacetime.require_black_hole()

    @property
    def r_star(self) -> float:
        """Inner boundary radius expressed in map units."""
        return 1.0 if self.rescale is Rescale.BY_INNER_RADIUS else self.spacetime.r_star

    @property
    def _unit(self) -> float:
        # length of one map unit in Compton units
        return self.spacetime.r_star if self.rescale is Rescale.BY_INNER_RADIUS else 1.0

    @property
    def _rho(self) -> float | None:
        return self.spacetime.horizon_ratio


def _expit(m: float) -> float:
    if m >= 0.0:
        return 1.0 / (1.0 + math.exp(-m))
    e = math.exp(m)
    return e / (1.0 + e)


def _log_expit(m: float) -> float:
    """ln(expit(m)), stable for large |m|."""
    if m >= 0.0:
        return -math.log1p(math.exp(-m))
    return m - math.log1p(math.exp(m))


def _x_series(rho: float | None, rhat: float) -> float:
    """Power series for x(r) on r < 1/2 (map units of r_star).

    Subextremal coefficients (1 - rho^(2-n)) / (n (rho - 1)); the
    rho -> 1 limit (n-2)/n is the extremal case.  All terms positive, so
    no cancellation.
    """
    total = 0.0
    term_pow = rhat * rhat * rhat
    n = 3
    while True:
        if rho is None:
            coef = (n - 2) / n
        else:
            coef = (1.0 - rho ** (2 - n)) / (n * (rho - 1.0))
        term = coef * term_pow
        total += term
        if term < 1e-18 * total or n > 500:
            return total
        term_pow *= rhat
        n += 1


def _x_from_gap(rho: float | None, m: float) -> float:
    """Closed form for x with the gap logarithm isolated; m = logit(r)."""
    rhat = _expit(m)
    log_s = _log_expit(-m)
    if rho is None:
        s = _expit(-m)
        return 1.0 / s + 2.0 * log_s - s
    return rhat + rho**2 / (rho - 1.0) * math.log1p(-rhat / rho) - log_s / (rho - 1.0)


def _x_hat_of_m(st: Spacetime, m: float) -> float:
    rho = st.horizon_ratio
    rhat = _expit(m)
    if rhat < _SERIES_SPLIT:
        return _x_series(rho, rhat)
    return _x_from_gap(rho, m)


def _dxhat_dm(st: Spacetime, m: float) -> float:
    """dx/dm = r s / f^2; closed forms avoid the gap entirely."""
    rhat = _expit(m)
    rho = st.horizon_ratio
    if rho is None:
        return rhat**3 / _expit(-m)
    return rhat**3 / (rho - rhat)


def _m_bracket_guess(st: Spacetime, xhat: float) -> float:
    """Initial logit estimate from the cubic (small x) or tail (large x) law."""
    rho = st.horizon_ratio
    if rho is None:
        r_small = (3.0 * xhat) ** (1.0 / 3.0)
        if r_small < 0.4:
            return math.log(r_small / (1.0 - r_small))
        if xhat > 4.0:
            u = 1.0 / xhat
            for _ in range(3):
                u = 1.0 / (xhat - 2.0 * math.log(u) + u)
            return math.log((1.0 - u) / u)
        return 0.0
    r_small = (3.0 * rho * xhat) ** (1.0 / 3.0)
    if r_small < 0.4:
        return math.log(r_small / (1.0 - r_small))
    kappa_hat = rho - 1.0
    c_hat = 1.0 + rho**2 / kappa_hat * math.log1p(-1.0 / rho)
    log_s = kappa_hat * (c_hat - xhat)
    if log_s < math.log(0.1):
        return -log_s
    return 0.0


def _m_of_xhat(st: Spacetime, xhat: float, tol: ToleranceSpec) -> float:
    m0 = _m_bracket_guess(st, xhat)
    lo, hi = m0 - 1.0, m0 + 1.0
    flo = _x_hat_of_m(st, lo) - xhat
    fhi = _x_hat_of_m(st, hi) - xhat
    width = 1.0
    for _ in range(200):
        if flo <= 0.0 <= fhi:
            break
        width *= 2.0
        if flo > 0.0:
            lo -= width
            flo = _x_hat_of_m(st, lo) - xhat
        if fhi < 0.0:
            hi += width
            fhi = _x_hat_of_m(st, hi) - xhat
        if abs(lo) > 1e6 or abs(hi) > 1e6:
            raise NoConvergence(f"cannot bracket tortoise inverse at x={xhat}")
    else:
        raise NoConvergence(f"cannot bracket tortoise inverse at x={xhat}")
    m = root_find_bracketed(lambda mm: _x_hat_of_m(st, mm) - xhat, lo, hi,
                            ToleranceSpec(1e-12, 1e-12, tol.max_iterations))
    # Newton polish with the exact derivative: quadratic cleanup of the
    # bracket tolerance down to machine resolution.
    for _ in range(2):
        step = (_x_hat_of_m(st, m) - xhat) / _dxhat_dm(st, m)
        if not math.isfinite(step):
            break
        m -= max(min(step, 0.5), -0.5)
    return m


def _to_hat(cmap: CoordinateMap, r: float) -> float:
    return r / cmap.r_star


def x_of_r(cmap: CoordinateMap, r: float) -> float:
    """Tortoise coordinate of area radius r, both in map units.

    Raises DomainError outside the open interval (0, r_star).
    """
    rhat = _to_hat(cmap, r)
    if not 0.0 < rhat < 1.0:
        raise DomainError(f"radius {r} outside the static interior (0, {cmap.r_star})")
    st = cmap.spacetime
    if rhat < _SERIES_SPLIT:
        xhat = _x_series(st.horizon_ratio, rhat)
    else:
        s = 1.0 - rhat  # exact for rhat in [1/2, 1)
        xhat = _x_from_gap(st.horizon_ratio, math.log(rhat / s))
    return xhat * cmap.r_star


def logit_of_x(cmap: CoordinateMap, x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Solve x(r) = x for the logit m = ln(r / (r_star - r)) in map units.

    The logit carries full relative precision at both endpoints and is the
    representation used by the tail-accurate helpers below.
    """
    if not x > 0.0:
        raise DomainError("tortoise coordinate must be positive")
    return _m_of_xhat(cmap.spacetime, x / cmap.r_star, tol)


def r_of_x(cmap: CoordinateMap, x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Area radius at tortoise coordinate x (numerical inverse of x_of_r)."""
    return _expit(logit_of_x(cmap, x, tol)) * cmap.r_star


def inner_gap_of_x(cmap: CoordinateMap, x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Distance r_star - r(x) in map units, accurate in relative terms even
    deep in the tail where r(x) itself rounds to r_star."""
    return _expit(-logit_of_x(cmap, x, tol)) * cmap.r_star


@dataclass(frozen=True)
class TailConstants:
    """Asymptotics of the gap r_star - r(x) as x -> inf, in map units.

    Subextremal: gap ~ prefactor * exp(-decay_rate * x).
    Extremal: gap ~ inverse_coefficient / x (decay fields are None).
    """

    decay_rate: float | None
    prefactor: float | None
    inverse_coefficient: float | None


def tail_constants(cmap: CoordinateMap) -> TailConstants:
    """Exact tail constants obtained by isolating the gap logarithm in the
    closed form of x(r)."""
    st = cmap.spacetime
    if st.sector is Sector.EXTREMAL:
        return TailConstants(None, None, cmap.r_star**2)
    rho = st.horizon_ratio
    kappa_hat = rho - 1.0
    c_hat = 1.0 + rho**2 / kappa_hat * math.log1p(-1.0 / rho)
    return TailConstants(
        decay_rate=kappa_hat / cmap.r_star,
        prefactor=cmap.r_star * math.exp(kappa_hat * c_hat),
        inverse_coefficient=None,
    )


@dataclass(frozen=True)
class ExponentChecks:
    """Fitted asymptotic exponents of the map (small-x power, tail law)."""

    small_x: FitResult
    tail: FitResult


def verify_exponents(cmap: CoordinateMap) -> ExponentChecks:
    """Fit the r ~ x^(1/3) law at small x and the tail law of the gap.

    Subextremal tails are fitted on ln(gap) against x (expected slope
    -kappa); extremal tails on ln(gap) against ln(x) (expected slope -1).
    """
    ru = cmap.r_star
    xs_small = np.logspace(-12, -8, 25) * ru
    small = fit_power_law([(x, r_of_x(cmap, x)) for x in xs_small])
    if cmap.spacetime.sector is Sector.SUBEXTREMAL:
        xs_tail = np.linspace(2.0, 4.0, 25) * ru
        # feeding exp(x/ru) as abscissa turns the log-log fit into a semilog
        # fit of ln(gap) against x/ru; dividing by ru restores map units
        samples = [(math.exp(x / ru), inner_gap_of_x(cmap, x)) for x in xs_tail]
        fit = fit_power_law(samples)
        tail = FitResult(fit.slope / ru, fit.intercept, fit.residual_rms)
    else:
        xs_tail = np.logspace(4, 6, 25) * ru
        tail = fit_power_law([(x, inner_gap_of_x(cmap, x)) for x in xs_tail])
    return ExponentChecks(small_x=small, tail=tail)
