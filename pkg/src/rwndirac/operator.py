"""Radial Dirac operator in the tortoise coordinate: coefficient functions,
potential matrix, first-order system, phase integrals, boundary form, and
the change-of-variables norm identity.

After the map x(r) the per-partial-wave operator acts on two-component
functions g = (g1, g2) of x in (0, inf) as

    [ a(x) - b(x)          kc(x) - fa*d(x) - d/dx ]
    [ kc(x) - fa*d(x) + d/dx      -a(x) - b(x)    ]

with a = f(r(x)), b = Z*alpha/r(x), c = f/r, d = (Z*alpha^2/4pi) f/r^2 and
k the nonzero integer partial-wave index.  The eigenvalue system
(operator - lambda) g = 0 in first-order form is trace-free, so Wronskians
of solution pairs are conserved.

Units: with a map rescaled by r_star, b and c are multiplied by r_star,
d keeps one explicit 1/r_star (it is an inverse length squared), a = f is
scale invariant, and spectral parameters appear as lambda * r_star.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coordinates import CoordinateMap, Rescale, logit_of_x, r_of_x, x_of_r
from .errors import DomainError
from .numerics import DEFAULT_TOL, ToleranceSpec, integrate_adaptive
from .spacetime import Sector, Spacetime

__all__ = [
    "RadialMode",
    "CoefficientSample",
    "SpinorState",
    "PhaseIntegrals",
    "coefficients",
    "potential_matrix",
    "ode_rhs",
    "rhs_matrix",
    "phase",
    "boundary_form",
    "norm_equivalence_check",
]


@dataclass(frozen=True)
class RadialMode:
    """One partial-wave problem: spacetime, index k, anomalous-moment
    amplitude fa, and (optionally) the boundary angle theta selecting a
    self-adjoint extension when the inner endpoint is in the limit-circle
    case."""

    spacetime: Spacetime
    k: int
    fa: float = 0.0
    theta: float | None = None

    def __post_init__(self) -> None:
        self.spacetime.require_black_hole()
        if int(self.k) != self.k or self.k == 0:
            raise DomainError("partial-wave index k must be a nonzero integer")
        if self.fa < 0.0:
            raise DomainError("anomalous amplitude fa must be non-negative")
        if self.theta is not None and not 0.0 <= self.theta < math.pi:
            raise DomainError("boundary angle theta must lie in [0, pi)")


@dataclass(frozen=True)
class CoefficientSample:
    """Operator coefficients at one tortoise coordinate (map units)."""

    x: float
    a: float
    b: float
    c: float
    d: float


@dataclass(frozen=True)
class SpinorState:
    """Two-component radial amplitude at a point."""

    g1: complex
    g2: complex

    def __post_init__(self) -> None:
        if not (cmath.isfinite(complex(self.g1)) and cmath.isfinite(complex(self.g2))):
            raise DomainError("spinor components must be finite")


@lru_cache(maxsize=64)
def _cached_map(st: Spacetime, rescaled: bool) -> CoordinateMap:
    return CoordinateMap(st, Rescale.BY_INNER_RADIUS if rescaled else Rescale.NONE)


class Field:
    """Pointwise coefficient evaluator for one mode and unit convention.

    ``variant`` selects the operator:
      * "full"   - the physical coefficients;
      * "frozen" - a and b replaced by their x -> inf limits (0 and
        Z*alpha/r_star) with the off-diagonal kept, the comparison
        operator used by the essential-spectrum probe;
      * "free"   - constant-coefficient operator (a = c = d = 0,
        b = Z*alpha/r_star), exactly solvable.
    """

    def __init__(self, mode: RadialMode, rescaled: bool = True, variant: str = "full"):
        if variant not in ("full", "frozen", "free"):
            raise DomainError(f"unknown coefficient variant {variant!r}")
        self.mode = mode
        self.rescaled = rescaled
        self.variant = variant
        st = mode.spacetime
        self.map = _cached_map(st, rescaled)
        self.rho = st.horizon_ratio  # None in the extremal sector
        self.r_star = self.map.r_star
        self.z_alpha = st.nucleus.Z * st.constants.alpha_s
        self.b_limit = self.z_alpha / self.r_star
        # anomalous coupling scale; carries 1/r_star (Compton) explicitly
        self.d_scale = st.nucleus.Z * st.constants.alpha_s**2 / (4.0 * math.pi)
        if rescaled:
            self.d_scale /= st.r_star

    def lapse(self, rhat: float, s: float) -> float:
        if self.rho is None:
            return s / rhat
        return math.sqrt((self.rho - rhat) * s) / rhat

    def dm_dx(self, rhat: float, s: float) -> float:
        """Logit evolution dm/dx in units of the map's x."""
        if self.rho is None:
            out = s / rhat**3
        else:
            out = (self.rho - rhat) / rhat**3
        return out * (1.0 if self.rescaled else 1.0 / self.map.spacetime.r_star)

    def abcd(self, rhat: float, s: float) -> tuple[float, float, float, float]:
        """Coefficients (a, b, c, d) in map units from the split radius."""
        r_map = rhat * self.r_star
        if self.variant == "free":
            return 0.0, self.b_limit, 0.0, 0.0
        f = self.lapse(rhat, s)
        c = f / r_map
        d = self.d_scale * f / (rhat * rhat)
        if self.variant == "frozen":
            return 0.0, self.b_limit, c, d
        return f, self.z_alpha / r_map, c, d

    def at_x(self, x: float) -> tuple[float, float]:
        """Split radius (rhat, s) at tortoise coordinate x (map units)."""
        if not x > 0.0:
            raise DomainError("tortoise coordinate must be positive")
        m = logit_of_x(self.map, x)
        e = math.exp(-abs(m))
        if m >= 0.0:
            return 1.0 / (1.0 + e), e / (1.0 + e)
        return e / (1.0 + e), 1.0 / (1.0 + e)


def coefficients(mode: RadialMode, x: float, *, rescaled: bool = True) -> CoefficientSample:
    """Evaluate (a, b, c, d) at tortoise coordinate x > 0 in map units."""
    fld = Field(mode, rescaled)
    rhat, s = fld.at_x(x)
    a, b, c, d = fld.abcd(rhat, s)
    return CoefficientSample(x=x, a=a, b=b, c=c, d=d)


def potential_matrix(mode: RadialMode, x: float, *, rescaled: bool = True) -> np.ndarray:
    """Symmetric potential part [[a-b, kc-fa*d], [kc-fa*d, -a-b]].

    Converges to -Z*alpha/r_star times the identity as x -> inf.
    """
    smp = coefficients(mode, x, rescaled=rescaled)
    off = mode.k * smp.c - mode.fa * smp.d
    return np.array([[smp.a - smp.b, off], [off, -smp.a - smp.b]])


def rhs_matrix(mode: RadialMode, lam: complex, x: float, *, rescaled: bool = True) -> np.ndarray:
    """Trace-free coefficient matrix M(x) of the first-order system g' = M g
    equivalent to (operator - lambda) g = 0."""
    smp = coefficients(mode, x, rescaled=rescaled)
    kt = mode.k * smp.c - mode.fa * smp.d
    return np.array([[-kt, lam + smp.a + smp.b], [smp.a - smp.b - lam, kt]], dtype=complex)


def ode_rhs(mode: RadialMode, lam: complex, x: float, g: SpinorState, *, rescaled: bool = True) -> SpinorState:
    """Derivative of the radial spinor under (operator - lambda) g = 0:

        g1' = -(kc - fa d) g1 + (lambda + a + b) g2
        g2' = (a - b - lambda) g1 + (kc - fa d) g2
    """
    m = rhs_matrix(mode, lam, x, rescaled=rescaled)
    return SpinorState(
        g1=m[0, 0] * g.g1 + m[0, 1] * g.g2,
        g2=m[1, 0] * g.g1 + m[1, 1] * g.g2,
    )


def boundary_form(g: SpinorState, h: SpinorState) -> complex:
    """Sesquilinear boundary form g2(0) conj(h1(0)) - g1(0) conj(h2(0)).

    Its vanishing on pairs of boundary data characterizes the symmetric
    extensions; data obeying g1 sin(theta) + g2 cos(theta) = 0 with a
    common real angle always annihilate it.
    """
    return complex(g.g2) * complex(h.g1).conjugate() - complex(g.g1) * complex(h.g2).conjugate()


# -- phase integrals ---------------------------------------------------------


def _nu_of_rhat(fld: Field, rhat: float, tol: ToleranceSpec) -> float:
    """nu = k * integral of c dx = k * integral dr / (r f).

    The log-differential dr/r makes nu independent of the unit convention.
    """

    def integrand(rr: float) -> float:
        return 1.0 / (rr * fld.lapse(rr, 1.0 - rr))

    if rhat <= 0.9:
        val = integrate_adaptive(integrand, 0.0, rhat, tol)
    else:
        hint = -0.5 if (fld.rho is not None and rhat > 1.0 - 1e-4) else None
        val = integrate_adaptive(integrand, 0.0, 0.9, tol) + integrate_adaptive(
            integrand, 0.9, rhat, tol, right_exponent=hint
        )
    return fld.mode.k * val


def _anomalous_phase_piece(fld: Field, r_lo: float, r_hi: float, tol: ToleranceSpec) -> float:
    """Integral of fa * d dx (dimensionless, unit independent)."""
    if fld.mode.fa == 0.0 or r_hi <= r_lo:
        return 0.0

    def integrand(rr: float) -> float:
        return 1.0 / (rr * rr * fld.lapse(rr, 1.0 - rr))

    hint = -0.5 if (fld.rho is not None and r_hi > 1.0 - 1e-4) else None
    val = integrate_adaptive(integrand, r_lo, r_hi, tol, right_exponent=hint)
    st = fld.mode.spacetime
    coupling = st.nucleus.Z * st.constants.alpha_s**2 / (4.0 * math.pi * st.r_star)
    return fld.mode.fa * coupling * val


def _eta_closed(fld: Field, rhat: float, rhat_a: float) -> float:
    """Antiderivative of (-b + Z*alpha/r_star) dx between two radii
    (dimensionless, unit independent).

    Subextremal: Z*alpha [ (r - r_A) + rho ln((rho - r)/(rho - r_A)) ];
    extremal:    Z*alpha [ (r - r_A) + ln(s/s_A) ]   (radii in r_star units).
    """
    za = fld.mode.spacetime.nucleus.Z * fld.mode.spacetime.constants.alpha_s
    if fld.rho is None:
        return za * ((rhat - rhat_a) + math.log((1.0 - rhat) / (1.0 - rhat_a)))
    return za * ((rhat - rhat_a) + fld.rho * math.log((fld.rho - rhat) / (fld.rho - rhat_a)))


def phase(
    mode: RadialMode,
    which: str,
    x: float,
    A: float | None = None,
    *,
    rescaled: bool = True,
    tol: ToleranceSpec = DEFAULT_TOL,
) -> float:
    """Evaluate one of the three phase integrals at x (map units).

    nu(x)  = integral_0^x k c dy  (vanishes like x^(1/3) at 0 when fa = 0)
    xi(x)  = -integral over [x_ref, min(x, x_ref + 1)] of (k c - fa d) dy,
             constant beyond one unit past the reference point; x_ref is 0
             for fa = 0 and 1 otherwise (d is not integrable at 0)
    eta(x) = integral_A^x (-b + Z*alpha/r_star) dy, A defaulting to 1
    """
    fld = Field(mode, rescaled)
    unit = 1.0 if rescaled else mode.spacetime.r_star
    if which == "nu":
        if x == 0.0:
            return 0.0
        rhat, _ = fld.at_x(x)
        return _nu_of_rhat(fld, rhat, tol)
    if which == "xi":
        base = (0.0 if mode.fa == 0.0 else unit) if A is None else A
        top = min(x, base + unit)
        if top <= base:
            return 0.0
        r_hi, _ = fld.at_x(top)
        if base == 0.0:
            nu_part = _nu_of_rhat(fld, r_hi, tol)
            r_lo = 0.0
        else:
            r_lo, _ = fld.at_x(base)
            nu_part = _nu_of_rhat(fld, r_hi, tol) - _nu_of_rhat(fld, r_lo, tol)
        return -(nu_part - _anomalous_phase_piece(fld, r_lo, r_hi, tol))
    if which == "eta":
        a_ref = unit if A is None else A
        rhat, _ = fld.at_x(x)
        rhat_a, _ = fld.at_x(a_ref)
        return _eta_closed(fld, rhat, rhat_a)
    raise DomainError(f"unknown phase integral {which!r}")


@dataclass(frozen=True)
class PhaseIntegrals:
    """Bundle of the three phase integrals of one mode, plus the bounded
    diagonal transport matrix diag(exp(-xi), exp(xi))."""

    mode: RadialMode
    rescaled: bool = True

    def nu(self, x: float) -> float:
        return phase(self.mode, "nu", x, rescaled=self.rescaled)

    def xi(self, x: float) -> float:
        return phase(self.mode, "xi", x, rescaled=self.rescaled)

    def eta(self, x: float, A: float | None = None) -> float:
        return phase(self.mode, "eta", x, A, rescaled=self.rescaled)

    def s_matrix(self, x: float) -> np.ndarray:
        xi = self.xi(x)
        return np.diag([math.exp(-xi), math.exp(xi)])


def norm_equivalence_check(
    st: Spacetime,
    sample,
    *,
    rescaled: bool = True,
    support: tuple[float, float] | None = None,
    tol: ToleranceSpec = DEFAULT_TOL,
) -> tuple[float, float]:
    """Evaluate the weighted radial norm and the tortoise-coordinate norm of
    a two-component sample function and return both.

    ``sample(r) -> (g1, g2)`` must be square integrable against the weight
    1/f^2 dr on (0, r_star); the two quadratures

        I_r = int (|g1|^2 + |g2|^2) / f^2 dr,   I_x = int |g(r(x))|^2 dx

    are equal by the change of variables, which is the identity between the
    weighted radial inner product and the flat tortoise one.
    """
    st.require_black_hole()
    cmap = _cached_map(st, rescaled)
    ru = cmap.r_star
    lo, hi = support if support is not None else (1e-8 * ru, (1.0 - 1e-10) * ru)
    if not 0.0 < lo < hi < ru:
        raise DomainError("support must satisfy 0 < lo < hi < r_star")
    rho = st.horizon_ratio

    def weight(r: float) -> float:
        rhat = r / ru
        s = 1.0 - rhat
        f2 = (s / rhat) ** 2 if rho is None else (rho - rhat) * s / rhat**2
        return 1.0 / f2

    def dens(r: float) -> float:
        g1, g2 = sample(r)
        return abs(g1) ** 2 + abs(g2) ** 2

    i_r = integrate_adaptive(lambda r: dens(r) * weight(r), lo, hi, tol)
    x_lo, x_hi = x_of_r(cmap, lo), x_of_r(cmap, hi)
    i_x = integrate_adaptive(lambda x: dens(r_of_x(cmap, x)), x_lo, x_hi, tol)
    return i_r, i_x
