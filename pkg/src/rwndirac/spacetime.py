"""Dimensionless model of the static, spherically symmetric charged spacetime
of a point nucleus: physical constants, lapse function, horizon radii, and
parameter-sector classification.

All lengths are measured in multiples of the electron reduced Compton wave
length and all energies in multiples of the electron rest energy.  In these
units the squared lapse reads

    f^2(r) = 1 - 2*mu/r + (Z*e)^2 * G m_e^2/(hbar c)^2-combination / r^2,

with mu = G M m_e / (hbar c) the mass scale of the nucleus.  Two distinct
positive roots r_- < r_+ mark the subextremal black-hole sector, a double
root r_0 the extremal one, and no real root the naked-singularity sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

__all__ = [
    "ConstantsLedger",
    "Nucleus",
    "Sector",
    "Spacetime",
    "build_spacetime",
    "classify_sector",
    "f_squared",
    "hyper_heavy",
    "extremal_mass_number",
    "EXTREMALITY_TOL",
]

# Discriminant window inside which a configuration counts as extremal;
# double precision cannot resolve A^2-level cancellation any finer.
EXTREMALITY_TOL = 1e-12


@dataclass(frozen=True)
class ConstantsLedger:
    """Dimensionless physical constants every formula consumes.

    Attributes
    ----------
    alpha_s : float
        Sommerfeld's fine structure constant e^2/(hbar c).
    eps_g : float
        Gravitational coupling of two electrons, G m_e^2/(hbar c).
    mass_ratio : float
        Proton-to-electron mass ratio m_p/m_e.

    The proton couplings are derived products so that
    eps_pe = mass_ratio * eps_g and eps_pp = mass_ratio * eps_pe hold
    exactly, keeping downstream identities sharp at machine precision.
    """

    alpha_s: float = 1.0 / 137.036
    eps_g: float = 1.79e-45
    mass_ratio: float = 1836.0

    def __post_init__(self) -> None:
        if min(self.alpha_s, self.eps_g, self.mass_ratio) <= 0.0:
            raise DomainError("all ledger constants must be positive")

    @property
    def eps_pe(self) -> float:
        """G m_p m_e / (hbar c)."""
        return self.mass_ratio * self.eps_g

    @property
    def eps_pp(self) -> float:
        """G m_p^2 / (hbar c)."""
        return self.mass_ratio * self.eps_pe


@dataclass(frozen=True)
class Nucleus:
    """Point nucleus carrying Z elementary charges and mass A proton masses."""

    Z: int
    A: float

    def __post_init__(self) -> None:
        if int(self.Z) != self.Z or self.Z < 1:
            raise DomainError("Z must be a positive integer")
        if not self.A >= 1.0:
            raise DomainError("mass number A must be >= 1")


class Sector(Enum):
    NAKED = "naked"
    SUBEXTREMAL = "subextremal"
    EXTREMAL = "extremal"


@dataclass(frozen=True)
class Spacetime:
    """One (Z, A) configuration with its derived geometric scales.

    Horizon radii are present only in the black-hole sectors; ``kappa``
    (the tail decay rate of the tortoise map, (r_+ - r_-)/r_-^2) only in
    the subextremal one.  ``r_star`` is the inner static boundary: r_-
    for subextremal, r_0 for extremal configurations.
    """

    nucleus: Nucleus
    constants: ConstantsLedger
    mu: float
    sector: Sector
    r_minus: float | None = None
    r_plus: float | None = None
    q: float | None = None
    kappa: float | None = None
    r_star: float | None = None

    @property
    def r0(self) -> float | None:
        """Double horizon radius (extremal sector only)."""
        return self.r_star if self.sector is Sector.EXTREMAL else None

    @property
    def horizon_ratio(self) -> float | None:
        """r_+ / r_- in the subextremal sector."""
        if self.sector is Sector.SUBEXTREMAL:
            return self.r_plus / self.r_minus
        return None

    def require_black_hole(self) -> None:
        if self.sector is Sector.NAKED:
            raise DomainError("operation requires a black-hole sector spacetime")


def _discriminant(nucleus: Nucleus, constants: ConstantsLedger) -> float:
    """1 - Z^2 e^2 / (G M^2) in dimensionless couplings; sign decides the sector."""
    return 1.0 - (nucleus.Z**2 * constants.alpha_s) / (nucleus.A**2 * constants.eps_pp)


def classify_sector(nucleus: Nucleus, constants: ConstantsLedger = ConstantsLedger()) -> Sector:
    """Decide naked / subextremal / extremal from the horizon discriminant."""
    disc = _discriminant(nucleus, constants)
    if abs(disc) < EXTREMALITY_TOL:
        return Sector.EXTREMAL
    return Sector.SUBEXTREMAL if disc > 0.0 else Sector.NAKED


def build_spacetime(nucleus: Nucleus, constants: ConstantsLedger = ConstantsLedger()) -> Spacetime:
    """Assemble the spacetime record for one nucleus.

    Horizons come from the closed form r_+- = mu (1 +- sqrt(disc)); the
    geometric mean q = sqrt(r_+ r_-) equals Z sqrt(alpha_s eps_g)
    identically, which makes q (and everything built on it) Z-cancelling.
    """
    mu = nucleus.A * constants.eps_pe
    sector = classify_sector(nucleus, constants)
    if sector is Sector.NAKED:
        return Spacetime(nucleus=nucleus, constants=constants, mu=mu, sector=sector)
    if sector is Sector.EXTREMAL:
        return Spacetime(
            nucleus=nucleus,
            constants=constants,
            mu=mu,
            sector=sector,
            r_minus=mu,
            r_plus=mu,
            q=mu,
            kappa=None,
            r_star=mu,
        )
    sq = math.sqrt(_discriminant(nucleus, constants))
    r_minus = mu * (1.0 - sq)
    r_plus = mu * (1.0 + sq)
    return Spacetime(
        nucleus=nucleus,
        constants=constants,
        mu=mu,
        sector=sector,
        r_minus=r_minus,
        r_plus=r_plus,
        q=math.sqrt(r_plus * r_minus),
        kappa=(r_plus - r_minus) / r_minus**2,
        r_star=r_minus,
    )


def f_squared(st: Spacetime, r: float) -> float:
    """Squared lapse 1 - 2 mu/r + Z^2 alpha_s eps_g / r^2 at area radius r > 0.

    Valid in every sector (the quadratic form needs no horizons); in
    black-hole sectors it agrees with (r - r_+)(r - r_-)/r^2.
    """
    if not r > 0.0:
        raise DomainError("area radius must be positive")
    zq2 = st.nucleus.Z**2 * st.constants.alpha_s * st.constants.eps_g
    return 1.0 - 2.0 * st.mu / r + zq2 / r**2


def hyper_heavy(nucleus: Nucleus, constants: ConstantsLedger = ConstantsLedger()) -> bool:
    """Whether gravity beats electrostatics for an electron test charge,
    i.e. G M m_e > Z e^2 (strict)."""
    return nucleus.A * constants.eps_pe > nucleus.Z * constants.alpha_s


def extremal_mass_number(Z: int, constants: ConstantsLedger = ConstantsLedger()) -> float:
    """Mass number at which the configuration with charge Z becomes extremal."""
    if Z < 1:
        raise DomainError("Z must be a positive integer")
    return Z * math.sqrt(constants.alpha_s / constants.eps_pp)
