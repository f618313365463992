"""Radial Dirac operators on the static interior of charged black-hole
spacetimes: coordinates, operator coefficients, and spectral probes."""

from .coordinates import CoordinateMap, Rescale, inner_gap_of_x, r_of_x, tail_constants, verify_exponents, x_of_r
from .numerics import DEFAULT_TOL, FitResult, ToleranceSpec, fit_power_law, integrate_adaptive, ode_solve, root_find_bracketed
from .spacetime import (
    ConstantsLedger,
    Nucleus,
    Sector,
    Spacetime,
    build_spacetime,
    classify_sector,
    extremal_mass_number,
    f_squared,
    hyper_heavy,
)

__version__ = "0.1.0"
