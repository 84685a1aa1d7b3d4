"""Heat-semigroup estimators, the running integral, and Mittag-Leffler."""

import math

import numpy as np
import pytest
from scipy.special import erfi

from nscert import fields as fld
from nscert.quadrature import adaptive_simpson, integrate_sqrt_kernel
from nscert.semigroup import check_convolution_bound, mittag_leffler


def test_mu_minus_branch_continuity_exact(estimator):
    left = math.exp(2 * 0.25) / math.sqrt(2 * math.e * 0.25)
    assert left == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert estimator.mu_minus(0.25) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert estimator.mu_minus(0.25 + 1e-12) == math.sqrt(2.0)


def test_u_minus_tail_value(estimator):
    assert estimator.u_minus(1.0) == pytest.approx(math.sqrt(2.0) * math.exp(-1.0), rel=1e-15)
    with pytest.raises(ValueError):
        estimator.mu_minus(0.0)


def test_running_integral_against_erfi_oracle(estimator):
    # U(t) on the singular branch equals int_0^t e^s/sqrt(s) ds / sqrt(2),
    # and the integral has the independent closed form sqrt(pi) erfi(sqrt(t))
    for t in (0.01, 0.1, 0.25):
        want = math.sqrt(math.pi) * erfi(math.sqrt(t)) / math.sqrt(2.0)
        assert estimator.U(t) == pytest.approx(want, rel=1e-12)


def test_running_integral_window_and_monotonicity(estimator):
    assert estimator.U(0.0) == 0.0
    assert 1.872 < estimator.U_inf < 1.873
    grid = np.linspace(0.0, 12.0, 400)
    vals = [estimator.U(float(t)) for t in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= estimator.U_inf
    assert estimator.U(80.0) == pytest.approx(estimator.U_inf, abs=1e-12)


def test_running_integral_dominates_quadrature(estimator):
    # U need only dominate the true integral of u_minus (it is an estimator,
    # not the integral itself; the head branch is looser by up to sqrt(e))
    for t in (0.1, 0.5, 2.0):
        direct = integrate_sqrt_kernel(estimator.u_minus, 0.0, min(t, 0.25), tol=1e-12)
        if t > 0.25:
            direct += adaptive_simpson(estimator.u_minus, 0.25, t, tol=1e-12)
        assert direct <= estimator.U(t) + 1e-10
        assert estimator.U(t) <= math.sqrt(math.e) * direct * (1 + 1e-9)
    # beyond the breakpoint the increment is the exact integral
    for t in (0.5, 2.0):
        tail = adaptive_simpson(estimator.u_minus, 0.25, t, tol=1e-12)
        assert estimator.U(t) - estimator.U(0.25) == pytest.approx(tail, rel=1e-10)


def test_u_inverse_round_trip(estimator):
    for t in (0.01, 0.2, 0.25, 0.7, 1.51, 4.0):
        assert estimator.U_inverse(estimator.U(t)) == pytest.approx(t, abs=1e-10)
    assert math.isinf(estimator.U_inverse(estimator.U_inf + 1.0))


def test_semigroup_mode_wise_bounds(estimator):
    rng_seeds = range(50)
    for seed in rng_seeds:
        f = fld.random_solenoidal_field(seed, 3, 1, 2, 0.5 + 0.1 * (seed % 4))
        for t in (0.01, 0.1, 1.0):
            heat = fld.FourierField(
                3,
                {
                    k: c * math.exp(-t * sum(x * x for x in k))
                    for k, c in f._half.items()
                },
            )
            assert fld.sobolev_norm(heat, 2) <= estimator.u_minus(t) * fld.sobolev_norm(f, 1) * (1 + 1e-12)
            assert fld.sobolev_norm(heat, 1) <= estimator.u(t) * fld.sobolev_norm(f, 1) * (1 + 1e-12)
            assert fld.sobolev_norm(heat, 4) <= estimator.u_minus(t) * fld.sobolev_norm(f, 3) * (1 + 1e-12)


def test_convolution_sup_report():
    rep = check_convolution_bound()
    assert rep.sup <= math.sqrt(2.0) + 1e-6
    assert math.sqrt(2.0) - rep.sup <= 1e-3
    assert rep.approaches_from_below
    assert rep.head_bound <= 0.6
    assert rep.early_max <= 1.0 / math.sqrt(2.0)
    assert rep.limit == math.sqrt(2.0)


def test_mittag_leffler_exponential_identity():
    for z in (0.0, 1.0, 2.0):
        assert mittag_leffler(1.0, z) == pytest.approx(math.exp(z), rel=1e-12)


def test_mittag_leffler_at_zero_and_lower_bound():
    for sigma in (0.3, 0.5, 1.0, 2.0):
        assert mittag_leffler(sigma, 0.0) == 1.0
        assert mittag_leffler(sigma, 0.7) >= 1.0


def test_mittag_leffler_integral_equation():
    # G(t) = E_{1/2}(sqrt(t)) solves G(t) = 1 + Gamma(1/2)^{-1} int_0^t G(s) (t-s)^{-1/2} ds
    G = lambda s: mittag_leffler(0.5, math.sqrt(max(s, 0.0)))
    for t in (0.5, 1.0):
        integral = adaptive_simpson(lambda r: 2.0 * G(t - r * r), 0.0, math.sqrt(t), tol=1e-10)
        rhs = 1.0 + integral / math.gamma(0.5)
        assert G(t) == pytest.approx(rhs, abs=1e-6)


def test_mittag_leffler_domain():
    with pytest.raises(ValueError):
        mittag_leffler(-1.0, 1.0)
    with pytest.raises(ValueError):
        mittag_leffler(0.5, -0.1)


def test_estimator_constants(estimator):
    assert estimator.B == 1.0
    assert estimator.sigma == 0.5
    assert estimator.N == math.sqrt(2.0)
    assert estimator.theta == 0.25
    assert estimator.A == math.sqrt(2.0)
