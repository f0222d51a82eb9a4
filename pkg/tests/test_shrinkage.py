import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from aggwave.errors import LevelError, ParameterError, ShapeError
from aggwave.shrinkage import (
    QuadratureSpec,
    ShrinkageParams,
    elicit_p,
    estimate_sigma,
    level_params,
    logistic_density,
    shrink,
    shrink_vector,
)

from oracles import mc_shrink, riemann_shrink


class TestLogisticDensity:
    def test_at_zero(self):
        assert logistic_density(0.0, 5.0) == pytest.approx(0.05, abs=1e-15)

    @pytest.mark.parametrize("theta", [0.3, 2.0, 17.5, 400.0])
    def test_symmetry(self, theta):
        assert logistic_density(theta, 2.5) == logistic_density(-theta, 2.5)

    def test_large_argument_matches_mpmath(self):
        val = logistic_density(700.0, 1.0)
        ref = mpmath.exp(-700) / (1 + mpmath.exp(-700)) ** 2
        assert np.isfinite(val) and val > 0
        assert val == pytest.approx(float(ref), rel=1e-12)

    def test_integrates_to_one(self):
        assert integrate.quad(logistic_density, -np.inf, np.inf, args=(3.0,))[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_bad_tau(self, tau):
        with pytest.raises(ParameterError):
            logistic_density(1.0, tau)


class TestParams:
    @pytest.mark.parametrize(
        "p,tau,sigma", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, 0), (0.5, 1, -2)]
    )
    def test_invalid(self, p, tau, sigma):
        with pytest.raises(ParameterError):
            ShrinkageParams(p, tau, sigma)

    def test_quadrature_minimum(self):
        with pytest.raises(ParameterError):
            QuadratureSpec(8)

    def test_quadrature_weights_normalised(self):
        u, logw = QuadratureSpec().nodes()
        w = np.exp(logw)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.dot(w, u**2) == pytest.approx(1.0, abs=1e-12)


class TestShrink:
    @pytest.mark.parametrize("prm", [ShrinkageParams(0.9, 5, 1), ShrinkageParams(0.3, 0.5, 2.0), ShrinkageParams(0, 1, 1)])
    def test_zero_maps_to_zero(self, prm):
        assert shrink(0.0, prm) == 0.0

    @pytest.mark.parametrize("d", [0.5, 1, 3, 10])
    def test_antisymmetric(self, d):
        prm = ShrinkageParams(0.9, 5, 1)
        assert abs(shrink(-d, prm) + shrink(d, prm)) < 1e-10

    def test_d3_against_monte_carlo(self):
        prm = ShrinkageParams(0.9, 5, 1)
        val = shrink(3.0, prm)
        assert 0 < val < 3
        assert abs(val - mc_shrink(3.0, 0.9, 5, 1)) < 1e-3

    @pytest.mark.parametrize("tau", [0.05, 0.2, 0.5, 1, 5, 50])
    @pytest.mark.parametrize("d", [-7.0, -1.5, 0.4, 2.0, 6.0, 12.0])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_against_riemann_sum(self, d, tau, sigma):
        # covers both the Hermite path and the narrow-slab trapezoid path
        prm = ShrinkageParams(0.9, tau, sigma)
        assert shrink(d, prm) == pytest.approx(riemann_shrink(d, 0.9, tau, sigma), abs=1e-8)

    def test_pure_logistic_limit(self):
        assert shrink(2.0, ShrinkageParams(0.0, 1.0, 1.0)) == pytest.approx(
            riemann_shrink(2.0, 0.0, 1.0, 1.0), abs=1e-8
        )

    def test_point_mass_limit(self):
        assert shrink(25.0, ShrinkageParams(1.0, 5, 1)) == 0.0

    @pytest.mark.parametrize("d", [40.0, 300.0, 700.0, -700.0])
    def test_extreme_coefficients(self, d):
        val = shrink(d, ShrinkageParams(0.9, 5, 1))
        assert np.isfinite(val)
        assert abs(val) <= abs(d)
        assert val / d > 0.95

    def test_bound_and_antisymmetry_grid(self):
        d = np.linspace(-50, 50, 201)
        for p in (0.5, 0.9, 0.99):
            for tau in (1, 5, 10):
                for sigma in (0.5, 1, 2):
                    prm = ShrinkageParams(p, tau, sigma)
                    pos = shrink_vector(d, prm)
                    neg = shrink_vector(-d, prm)
                    assert np.all(np.abs(pos) <= np.abs(d))
                    assert np.all(pos * d >= 0)
                    assert np.abs(pos + neg).max() < 1e-10

    @pytest.mark.parametrize("d", [0.5, 2.0, 4.0, 9.0])
    def test_monotone_in_p(self, d):
        ps = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99]
        vals = [shrink(d, ShrinkageParams(p, 5, 1)) for p in ps]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_larger_tau_shrinks_moderate_coefficient(self):
        assert shrink(2.0, ShrinkageParams(0.9, 50, 1)) < shrink(2.0, ShrinkageParams(0.9, 0.5, 1))

    def test_approaches_identity(self):
        assert shrink(30.0, ShrinkageParams(0.9, 5, 1)) / 30.0 > 0.95


@settings(max_examples=60, deadline=None)
@given(
    d=st.floats(-60, 60),
    p=st.floats(0.0, 0.999),
    tau=st.floats(0.2, 60),
    sigma=st.floats(0.1, 5),
)
def test_shrinkage_property(d, p, tau, sigma):
    prm = ShrinkageParams(p, tau, sigma)
    v = shrink(d, prm)
    assert abs(v) <= abs(d) + 1e-12
    assert v == 0 or math.copysign(1, v) == math.copysign(1, d)
    assert abs(shrink(-d, prm) + v) < 1e-10


class TestShrinkVector:
    def test_zeros(self):
        assert not shrink_vector(np.zeros(10), ShrinkageParams(0.9, 5, 1)).any()

    def test_pair(self):
        prm = ShrinkageParams(0.9, 5, 1)
        out = shrink_vector([3.0, -3.0], prm)
        np.testing.assert_allclose(out, [shrink(3.0, prm), -shrink(3.0, prm)], atol=1e-15)

    def test_per_level_matches_scalar_loop(self, rng):
        J0, J = 2, 6
        levels = np.array([-1] * 4 + [j for j in range(J0, J) for _ in range(2**j)])
        d = rng.normal(scale=3, size=levels.size)
        params = level_params(J0, J, tau=5.0, sigma=1.2)
        out = shrink_vector(d, params, levels=levels)
        expect = [v if lev < 0 else shrink(v, params[lev]) for v, lev in zip(d, levels)]
        np.testing.assert_allclose(out, expect, rtol=0, atol=1e-14)
        np.testing.assert_array_equal(out[:4], d[:4])

    def test_matrix_rows_by_level(self, rng):
        levels = np.array([-1, -1, 1, 1, 2, 2, 2, 2])
        D = rng.normal(size=(8, 3))
        prm = ShrinkageParams(0.8, 2, 1)
        out = shrink_vector(D, prm, levels=levels)
        np.testing.assert_array_equal(out[:2], D[:2])
        np.testing.assert_allclose(out[2:], shrink_vector(D[2:], prm), atol=1e-15)

    def test_level_map_mismatch(self):
        with pytest.raises(ShapeError):
            shrink_vector(np.ones(4), ShrinkageParams(0.9, 5, 1), levels=[1, 1, 2])

    def test_missing_level(self):
        with pytest.raises(ShapeError):
            shrink_vector(np.ones(2), {1: ShrinkageParams(0.9, 5, 1)}, levels=[1, 2])

    def test_per_level_without_map(self):
        with pytest.raises(ShapeError):
            shrink_vector(np.ones(2), {1: ShrinkageParams(0.9, 5, 1)})


class TestSigma:
    def test_unit(self):
        assert estimate_sigma([0.6745, -0.6745, 0.6745, -0.6745]) == pytest.approx(1.0, abs=1e-15)

    def test_zeros(self):
        assert estimate_sigma(np.zeros(8)) == 0.0

    def test_even_length_median(self):
        assert estimate_sigma([0.1, -0.3, 0.5, -0.7]) == pytest.approx(0.4 / 0.6745, abs=1e-15)
        assert estimate_sigma([0.1, -0.3, 0.5, -0.7]) == pytest.approx(0.59303, abs=1e-5)

    def test_odd_length(self):
        assert estimate_sigma([3.0, -1.0, 2.0]) == 2.0 / 0.6745

    def test_empty(self):
        with pytest.raises(ShapeError):
            estimate_sigma([])

    def test_gaussian_noise(self, rng):
        assert estimate_sigma(rng.normal(scale=2.0, size=200000)) == pytest.approx(2.0, rel=0.01)


class TestElicit:
    @pytest.mark.parametrize("offset,expected", [(0, 0.0), (1, 0.75), (2, 8 / 9), (3, 15 / 16)])
    def test_values(self, offset, expected):
        assert elicit_p(3 + offset, 3) == expected

    def test_below_primary(self):
        with pytest.raises(LevelError):
            elicit_p(2, 3)

    def test_level_params(self):
        prm = level_params(3, 6, tau=5.0, sigma=0.7)
        assert sorted(prm) == [3, 4, 5]
        assert prm[3].p == 0.0 and prm[4].p == 0.75
        fixed = level_params(3, 6, tau=5.0, sigma=0.7, p=0.9)
        assert {v.p for v in fixed.values()} == {0.9}
