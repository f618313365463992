import math

import numpy as np
import pytest

from rwndirac.coordinates import (
    CoordinateMap,
    Rescale,
    inner_gap_of_x,
    r_of_x,
    tail_constants,
    verify_exponents,
    x_of_r,
)
from rwndirac.errors import DomainError
from rwndirac.numerics import integrate_adaptive
from rwndirac.spacetime import Nucleus, build_spacetime


def quadrature_x(cmap, r):
    """Independent oracle: x(r) = integral of dr'/f^2 from 0 to r."""
    rho = cmap.spacetime.horizon_ratio

    def inv_f2(rr):
        if rho is None:
            return (rr / (1.0 - rr)) ** 2
        return rr**2 / ((rho - rr) * (1.0 - rr))

    return integrate_adaptive(inv_f2, 0.0, r / cmap.r_star, left_exponent=2.0) * cmap.r_star


class TestForwardMap:
    def test_vanishes_at_origin(self, sub_map):
        assert x_of_r(sub_map, 1e-9) < 1e-24

    def test_against_quadrature(self, sub_map):
        for r in (0.1, 0.3, 0.5, 0.8, 0.95):
            assert x_of_r(sub_map, r) == pytest.approx(quadrature_x(sub_map, r), rel=1e-11)

    def test_extremal_half_radius(self, ext_map):
        # closed form: x(r0/2) = r0 (2 + 2 ln(1/2) - 1/2)
        expected = 2.0 + 2.0 * math.log(0.5) - 0.5
        assert x_of_r(ext_map, 0.5) == pytest.approx(expected, rel=1e-14)
        assert x_of_r(ext_map, 0.5) == pytest.approx(quadrature_x(ext_map, 0.5), rel=1e-11)

    def test_series_closed_form_seam(self, sub_map, ext_map):
        for cmap in (sub_map, ext_map):
            below, above = x_of_r(cmap, 0.5 - 1e-12), x_of_r(cmap, 0.5 + 1e-12)
            assert above > below
            assert above - below < 1e-10 * above

    def test_domain(self, sub_map):
        for bad in (0.0, 1.0, 1.5, -0.2):
            with pytest.raises(DomainError):
                x_of_r(sub_map, bad)


class TestInverseMap:
    def test_small_x_series(self, sub_map):
        # oracle: r ~ (3 r_+ r_- x)^(1/3) from dx/dr = r^2/(r_+ r_-) near 0
        rho = sub_map.spacetime.horizon_ratio
        for x in (1e-12, 1e-10, 1e-8):
            assert r_of_x(sub_map, x) == pytest.approx((3.0 * rho * x) ** (1.0 / 3.0), rel=1e-3)

    def test_midpoint(self, sub_map):
        x_half = x_of_r(sub_map, 0.5)
        assert r_of_x(sub_map, x_half) == pytest.approx(0.5, abs=1e-9)

    def test_round_trip_grid(self, sub_map, ext_map):
        for cmap, x_hi in ((sub_map, 0.97), (ext_map, 1e3)):
            for x in np.geomspace(1e-12, x_hi, 120):
                rt = x_of_r(cmap, r_of_x(cmap, x))
                assert abs(rt - x) <= 1e-12 * max(1.0, x)

    def test_r_direction_round_trip(self, sub_map):
        for r in np.linspace(0.01, 0.999999, 50):
            assert r_of_x(sub_map, x_of_r(sub_map, r)) == pytest.approx(r, rel=1e-12)

    def test_deep_tail_gap(self, sub_map):
        # gap accuracy beyond float resolution of r itself
        kappa = sub_map.spacetime.horizon_ratio - 1.0
        tc = tail_constants(sub_map)
        for x in (3.0, 5.0, 8.0):
            gap = inner_gap_of_x(sub_map, x)
            assert gap == pytest.approx(tc.prefactor * math.exp(-kappa * x), rel=1e-8)

    def test_domain(self, sub_map):
        with pytest.raises(DomainError):
            r_of_x(sub_map, 0.0)


class TestMapProperties:
    def test_strict_monotonicity(self, sub_map):
        rng = np.random.default_rng(5)
        for _ in range(50):
            r1, r2 = sorted(rng.uniform(1e-6, 1.0 - 1e-9, size=2))
            if r1 == r2:
                continue
            assert x_of_r(sub_map, r2) > x_of_r(sub_map, r1)

    def test_derivative_identity(self, sub_map):
        # numerically differentiated dx/dr equals 1/f^2
        rho = sub_map.spacetime.horizon_ratio
        for r in np.linspace(0.05, 0.95, 19):
            h = 3e-6 * r
            deriv = (x_of_r(sub_map, r + h) - x_of_r(sub_map, r - h)) / (2.0 * h)
            inv_f2 = r**2 / ((rho - r) * (1.0 - r))
            assert deriv == pytest.approx(inv_f2, rel=1e-8)

    def test_rescaling_covariance(self, sub_map, ledger):
        # doubling Z and A leaves rho, hence the rescaled map, unchanged
        st2 = build_spacetime(Nucleus(Z=2, A=4.0e18), ledger)
        map2 = CoordinateMap(st2, Rescale.BY_INNER_RADIUS)
        assert st2.horizon_ratio == sub_map.spacetime.horizon_ratio
        for r in np.linspace(0.05, 0.999, 40):
            a, b = x_of_r(sub_map, r), x_of_r(map2, r)
            assert abs(a - b) <= 1e-14 * max(1.0, abs(a))

    def test_raw_units_consistency(self, sub_map, sub_map_raw):
        r_star = sub_map_raw.spacetime.r_star
        for rhat in (0.2, 0.5, 0.9):
            raw = x_of_r(sub_map_raw, rhat * r_star)
            assert raw == pytest.approx(x_of_r(sub_map, rhat) * r_star, rel=1e-13)

    def test_naked_rejected(self, ledger):
        st = build_spacetime(Nucleus(Z=1, A=1.0), ledger)
        with pytest.raises(DomainError):
            CoordinateMap(st)


class TestTailConstants:
    def test_subextremal_rate(self, sub_map):
        tc = tail_constants(sub_map)
        rho = sub_map.spacetime.horizon_ratio
        assert tc.decay_rate == pytest.approx(rho - 1.0, rel=1e-14)
        assert tc.decay_rate == pytest.approx(10.140026351409887, rel=1e-10)
        assert tc.inverse_coefficient is None

    def test_subextremal_raw_rate(self, sub_map_raw, sub):
        tc = tail_constants(sub_map_raw)
        assert tc.decay_rate == pytest.approx(sub.kappa, rel=1e-12)

    def test_fitted_decay_rate(self, sub_map):
        checks = verify_exponents(sub_map)
        kappa = sub_map.spacetime.horizon_ratio - 1.0
        assert checks.tail.slope == pytest.approx(-kappa, rel=1e-6)

    def test_extremal_inverse_law(self, ext_map):
        tc = tail_constants(ext_map)
        assert tc.inverse_coefficient == 1.0 and tc.decay_rate is None
        vals = [x * inner_gap_of_x(ext_map, x) for x in (1e4, 1e5, 1e6)]
        # trend toward the limit, within 0.1% from 1e5 on
        assert abs(vals[1] - 1.0) < 1e-3 and abs(vals[2] - 1.0) < 1e-3
        assert abs(vals[2] - 1.0) < abs(vals[1] - 1.0) < abs(vals[0] - 1.0)

    def test_extremal_raw_coefficient(self, extremal):
        cmap = CoordinateMap(extremal, Rescale.NONE)
        assert tail_constants(cmap).inverse_coefficient == pytest.approx(extremal.r0**2, rel=1e-14)


class TestVerifyExponents:
    def test_small_x_cube_root(self, sub_map, ext_map):
        for cmap in (sub_map, ext_map):
            checks = verify_exponents(cmap)
            assert abs(checks.small_x.slope - 1.0 / 3.0) < 1e-3

    def test_extremal_tail_slope(self, ext_map):
        checks = verify_exponents(ext_map)
        assert abs(checks.tail.slope - (-1.0)) < 1e-3
