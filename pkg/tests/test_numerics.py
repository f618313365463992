import math

import numpy as np
import pytest

from rwndirac.errors import DegenerateInput, DomainError, Error, NoBracket, NoConvergence
from rwndirac.numerics import (
    DEFAULT_TOL,
    ToleranceSpec,
    fit_power_law,
    integrate_adaptive,
    ode_solve,
    root_find_bracketed,
)


class TestToleranceSpec:
    def test_defaults(self):
        tol = ToleranceSpec()
        assert tol.rel_tol == 1e-10 and tol.abs_tol == 1e-14 and tol.max_iterations == 200

    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"abs_tol": -1.0}, {"max_iterations": 0}])
    def test_validation(self, kw):
        with pytest.raises(DomainError):
            ToleranceSpec(**kw)


class TestRootFind:
    def test_sqrt2(self):
        root = root_find_bracketed(lambda x: x * x - 2.0, 1.0, 2.0)
        assert abs(root - math.sqrt(2.0)) < 1e-12

    def test_odd_function(self):
        assert abs(root_find_bracketed(lambda x: x, -1.0, 1.0)) < 1e-12

    def test_tortoise_inverse(self, sub_map):
        # forward closed form supplies the offset; root recovers the radius
        from rwndirac.coordinates import x_of_r

        target = x_of_r(sub_map, 0.5)
        root = root_find_bracketed(lambda r: x_of_r(sub_map, r) - target, 0.01, 0.99)
        assert abs(root - 0.5) < 1e-10

    def test_root_inside_bracket(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            shift = rng.uniform(-0.8, 0.8)
            root = root_find_bracketed(lambda x: math.tanh(x - shift), -1.0, 1.0)
            assert -1.0 <= root <= 1.0

    def test_no_bracket(self):
        with pytest.raises(NoBracket):
            root_find_bracketed(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_no_convergence(self):
        tol = ToleranceSpec(rel_tol=1e-15, abs_tol=1e-300, max_iterations=2)
        with pytest.raises(NoConvergence):
            root_find_bracketed(lambda x: math.expm1(x) - 0.31234, -40.0, 40.0, tol)


class TestIntegrate:
    def test_polynomial(self):
        assert abs(integrate_adaptive(lambda x: x * x, 0.0, 1.0) - 1.0 / 3.0) < 1e-13

    def test_algebraic_singularity(self):
        val = integrate_adaptive(lambda x: x ** (-2.0 / 3.0), 0.0, 1.0, left_exponent=-2.0 / 3.0)
        assert abs(val - 3.0) < 1e-12

    def test_half_line(self):
        val = integrate_adaptive(lambda x: math.exp(-x), 0.0, math.inf)
        assert abs(val - 1.0) < 1e-12

    def test_additivity(self):
        f = lambda x: math.sin(3.0 * x) + x * x
        tol = ToleranceSpec(rel_tol=1e-11, abs_tol=1e-13)
        whole = integrate_adaptive(f, 0.0, 2.0, tol)
        for c in (0.3, 1.0, 1.7):
            split = integrate_adaptive(f, 0.0, c, tol) + integrate_adaptive(f, c, 2.0, tol)
            assert abs(whole - split) <= 2e-11

    def test_non_integrable_hint_rejected(self):
        with pytest.raises(DomainError):
            integrate_adaptive(lambda x: 1.0 / x, 0.0, 1.0, left_exponent=-1.0)


class TestOdeSolve:
    def test_exponential(self):
        traj = ode_solve(lambda x, y: [y[0]], 0.0, 1.0, [1.0])
        assert abs(traj.final[0] - math.e) < 1e-9

    def test_constant(self):
        traj = ode_solve(lambda x, y: [0.0, 0.0], 0.0, 5.0, [1.0, 2.0])
        assert traj.final[0] == 1.0 and traj.final[1] == 2.0

    def test_backward(self):
        traj = ode_solve(lambda x, y: [y[0]], 1.0, 0.0, [math.e])
        assert abs(traj.final[0] - 1.0) < 1e-9

    def test_dense_output(self):
        traj = ode_solve(lambda x, y: [y[0]], 0.0, 2.0, [1.0])
        xs = np.linspace(0.0, 2.0, 31)
        vals = traj.sample(xs)[:, 0]
        assert np.max(np.abs(vals - np.exp(xs))) < 1e-8

    def test_rotation_norm_preserved(self):
        # zero-trace antisymmetric system: the amplitude is conserved
        traj = ode_solve(lambda x, y: [0.3 * y[1], -0.3 * y[0]], 0.0, 50.0, [1.0, 0.0])
        assert abs(math.hypot(*traj.final) - 1.0) < 1e-8

    def test_wronskian_trace_free(self):
        # generic trace-free linear system: Wronskian of two solutions constant
        def rhs(x, y):
            p = 0.4 * math.sin(x)
            q = 1.1 + 0.2 * math.cos(2.0 * x)
            r = 0.7 * math.cos(x)
            return [p * y[0] + q * y[1], r * y[0] - p * y[1]]

        t1 = ode_solve(rhs, 0.0, 10.0, [1.0, 0.0])
        t2 = ode_solve(rhs, 0.0, 10.0, [0.0, 1.0])
        xs = np.linspace(0.0, 10.0, 40)
        a = t1.sample(xs)
        b = t2.sample(xs)
        w = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        assert np.max(np.abs(w - w[0])) <= 10 * DEFAULT_TOL.rel_tol * abs(w[0])

    def test_blowup_detected(self):
        with pytest.raises(Error):
            ode_solve(lambda x, y: [y[0] ** 2], 0.0, 2.0, [1.0])


class TestFitPowerLaw:
    def test_exact_cbrt(self):
        xs = [1e-6, 1e-4, 1e-2]
        fit = fit_power_law([(x, x ** (1.0 / 3.0)) for x in xs])
        assert abs(fit.slope - 1.0 / 3.0) < 1e-12
        assert fit.residual_rms < 1e-12

    def test_constant(self):
        fit = fit_power_law([(x, 5.0) for x in (0.1, 1.0, 10.0)])
        assert abs(fit.slope) < 1e-12

    def test_exact_recovery_random(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            p = rng.uniform(-3.0, 3.0)
            c = rng.uniform(0.5, 2.0)
            xs = np.geomspace(1e-4, 1e2, 12)
            fit = fit_power_law([(x, c * x**p) for x in xs])
            assert abs(fit.slope - p) < 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            fit_power_law([(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)])
        with pytest.raises(DegenerateInput):
            fit_power_law([(1.0, 2.0), (2.0, 3.0)])
        with pytest.raises(DegenerateInput):
            fit_power_law([(1.0, 2.0), (2.0, -3.0), (3.0, 1.0)])
