import math

import numpy as np
import pytest

from rwndirac.errors import DomainError
from rwndirac.spacetime import (
    ConstantsLedger,
    Nucleus,
    Sector,
    build_spacetime,
    classify_sector,
    extremal_mass_number,
    f_squared,
    hyper_heavy,
)


class TestConstantsLedger:
    def test_derived_products_exact(self, ledger):
        assert ledger.eps_pe == ledger.mass_ratio * ledger.eps_g
        assert ledger.eps_pp == ledger.mass_ratio * ledger.eps_pe

    def test_defaults(self, ledger):
        assert abs(ledger.alpha_s - 1.0 / 137.036) == 0.0
        assert ledger.eps_g == 1.79e-45
        assert ledger.mass_ratio == 1836.0

    def test_positivity(self):
        with pytest.raises(DomainError):
            ConstantsLedger(alpha_s=-1.0)


class TestNucleus:
    def test_validation(self):
        with pytest.raises(DomainError):
            Nucleus(Z=0, A=1.0)
        with pytest.raises(DomainError):
            Nucleus(Z=1, A=0.5)


class TestSectors:
    def test_hydrogen_naked(self, ledger):
        assert classify_sector(Nucleus(Z=1, A=1.0), ledger) is Sector.NAKED

    def test_uranium_naked(self, ledger):
        assert classify_sector(Nucleus(Z=92, A=238.0), ledger) is Sector.NAKED

    def test_extremal_round_trip(self, ledger):
        a_star = extremal_mass_number(1, ledger)
        assert classify_sector(Nucleus(Z=1, A=a_star), ledger) is Sector.EXTREMAL

    def test_heavy_subextremal(self, ledger):
        assert classify_sector(Nucleus(Z=1, A=1e40), ledger) is Sector.SUBEXTREMAL

    def test_reference_subextremal(self, sub):
        assert sub.sector is Sector.SUBEXTREMAL


class TestExtremalMassNumber:
    def test_value(self, ledger):
        # closed form with ledger defaults
        assert abs(extremal_mass_number(1, ledger) - 1.099726e18) < 1e13

    def test_linear_in_z(self, ledger):
        assert extremal_mass_number(10, ledger) == pytest.approx(10.0 * extremal_mass_number(1, ledger), rel=1e-15)


class TestBuildSpacetime:
    def test_reference_horizons(self, sub):
        # oracle: direct evaluation of r_+- = mu (1 +- sqrt(1 - Z^2 e^2/GM^2))
        assert sub.r_minus == pytest.approx(1.0828444370282039e-24, rel=1e-12)
        assert sub.r_plus == pytest.approx(1.2062915562971796e-23, rel=1e-12)
        assert sub.horizon_ratio == pytest.approx(11.140026351409887, rel=1e-12)
        assert sub.r_star == sub.r_minus
        assert sub.kappa > 0.0

    def test_extremal_scales(self, extremal, ledger):
        assert extremal.sector is Sector.EXTREMAL
        assert extremal.r0 == pytest.approx(3.614175011216938e-24, rel=1e-10)
        # r0 and q coincide at extremality
        assert extremal.r0 == pytest.approx(extremal.q, rel=1e-12)

    def test_mu_identity(self, sub, ledger):
        assert sub.mu == pytest.approx(2.0e18 * ledger.eps_pe, rel=1e-15)

    def test_q_identities(self, sub, ledger):
        assert sub.q**2 == pytest.approx(sub.r_plus * sub.r_minus, rel=1e-12)
        assert sub.q == pytest.approx(sub.nucleus.Z * math.sqrt(ledger.alpha_s * ledger.eps_g), rel=1e-12)

    def test_naked_has_no_horizons(self, ledger):
        st = build_spacetime(Nucleus(Z=1, A=1.0), ledger)
        assert st.sector is Sector.NAKED
        assert st.r_minus is None and st.q is None and st.r_star is None
        with pytest.raises(DomainError):
            st.require_black_hole()


class TestLapse:
    def test_extremal_double_root(self, extremal):
        assert abs(f_squared(extremal, extremal.r0)) < 1e-12

    def test_asymptotic_flatness(self, sub):
        assert f_squared(sub, 1e6) == pytest.approx(1.0, abs=1e-12)

    def test_interior_value(self, sub):
        # oracle: factored form at r_-/2 gives 2 rho - 1
        got = f_squared(sub, sub.r_minus / 2.0)
        assert got == pytest.approx(2.0 * sub.horizon_ratio - 1.0, abs=0.01)

    def test_domain(self, sub):
        with pytest.raises(DomainError):
            f_squared(sub, 0.0)

    def test_factored_identity(self, sub):
        rm, rp = sub.r_minus, sub.r_plus
        for r in np.geomspace(rm * 1e-6, rm * (1.0 - 1e-6), 60):
            quadratic = f_squared(sub, r)
            factored = (r - rp) * (r - rm) / r**2
            assert abs(quadratic - factored) <= 1e-12 * max(1.0, abs(quadratic))


class TestHyperHeavy:
    def test_ordinary_nucleus(self, ledger):
        assert not hyper_heavy(Nucleus(Z=1, A=1.0), ledger)

    def test_heavy(self, ledger):
        assert hyper_heavy(Nucleus(Z=1, A=1e40), ledger)
        # ratio ~ 4.5 above threshold
        assert 1e40 * ledger.eps_pe / ledger.alpha_s == pytest.approx(4.5, abs=0.1)

    def test_boundary_strict(self, ledger):
        a_boundary = ledger.alpha_s / ledger.eps_pe
        assert not hyper_heavy(Nucleus(Z=1, A=a_boundary), ledger)

    def test_hyper_heavy_implies_black_hole(self, ledger):
        rng = np.random.default_rng(3)
        for _ in range(200):
            z = int(rng.integers(1, 120))
            a = float(z * 10.0 ** rng.uniform(0.0, 40.0))
            if hyper_heavy(Nucleus(Z=z, A=a), ledger):
                assert classify_sector(Nucleus(Z=z, A=a), ledger) in (
                    Sector.SUBEXTREMAL,
                    Sector.EXTREMAL,
                )
