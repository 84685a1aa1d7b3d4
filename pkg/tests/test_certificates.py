"""Analytic certificate constructors and their self-verification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nscert import certificates as cert
from nscert.certificates import ForcingEnvelope, Refusal
from nscert.rounding import ceil_sig, floor_sig


# -- shape functions ---------------------------------------------------------------


def test_tube_gain_endpoints():
    assert cert.tube_gain(0.0) == 1.0
    assert cert.tube_gain(1.0) == 2.0
    assert cert.flow_tube_gain(0.0) == 1.0
    assert cert.flow_tube_gain(1.0) == 4.0


@given(st.floats(min_value=0.0, max_value=1.0))
def test_tube_gain_matches_naive_formula(z):
    g = cert.tube_gain(z)
    assert 1.0 <= g <= 2.0
    # the naive formulas cancel catastrophically near 0; compare where they
    # still carry enough digits of their own
    if z > 1e-4:
        naive = (1.0 - math.sqrt(1.0 - z)) / (z / 2.0)
        assert g == pytest.approx(naive, rel=1e-10)
    fg = cert.flow_tube_gain(z)
    assert 1.0 <= fg <= 4.0
    if z > 1e-2:
        naive = (1.0 - z / 2.0 - math.sqrt(1.0 - z)) / (z * z / 8.0)
        assert fg == pytest.approx(naive, rel=1e-8)


def test_shape_monotonicity_on_grid():
    zs = np.linspace(0.0, 1.0, 101)
    g = [cert.tube_gain(float(z)) for z in zs]
    fg = [cert.flow_tube_gain(float(z)) for z in zs]
    assert all(b >= a for a, b in zip(g, g[1:]))
    assert all(b >= a for a, b in zip(fg, fg[1:]))


def test_smallest_root_mu_zero_branch():
    for delta in (0.0, 0.3, 5.0):
        assert cert.smallest_tube_root(0.0, delta, 0.7) == 0.7


def test_smallest_root_monotonicity_on_grid():
    mus = np.linspace(0.0, 0.5, 10)
    deltas = np.linspace(0.0, 0.4, 10)
    epss = np.linspace(0.0, 0.3, 10)

    def inside(mu, de, ep):
        return 2 * mu * de + 2 * math.sqrt(mu * ep) <= 1.0

    for de in deltas:
        for ep in epss:
            vals = [cert.smallest_tube_root(m, de, ep) for m in mus if inside(m, de, ep)]
            assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))
    for mu in mus:
        for ep in epss:
            vals = [cert.smallest_tube_root(mu, d, ep) for d in deltas if inside(mu, d, ep)]
            assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        cert.smallest_tube_root(1.0, 1.0, 1.0)


def test_root_solves_quadratic():
    mu, de, ep = 0.25, 0.3, 0.2
    r = cert.smallest_tube_root(mu, de, ep)
    assert mu * r * r - (1 - 2 * mu * de) * r + ep == pytest.approx(0.0, abs=1e-12)


# -- directed rounding ----------------------------------------------------------------


@given(st.floats(min_value=1e-6, max_value=1e6), st.integers(min_value=1, max_value=5))
@settings(max_examples=200)
def test_directed_rounding_brackets(x, digits):
    up = ceil_sig(x, digits)
    dn = floor_sig(x, digits)
    assert dn <= x <= up
    assert up - dn <= 10.0 ** (math.floor(math.log10(x)) - digits + 2)


def test_rounding_paper_conventions():
    assert ceil_sig(0.160212, 3) == pytest.approx(0.161)
    assert ceil_sig(2.302221, 3) == pytest.approx(2.31)
    assert ceil_sig(0.198343, 2) == pytest.approx(0.20)
    assert ceil_sig(0.0662043, 2) == pytest.approx(0.067)
    assert floor_sig(1.993103, 3) == pytest.approx(1.99)
    assert floor_sig(0.667690, 3) == pytest.approx(0.667)
    assert ceil_sig(1.872119, 3) == pytest.approx(1.88)


# -- zero-approximation certificates ---------------------------------------------------


def test_zero_certificate_trivial(estimator):
    c = cert.zero_solution_certificate(0.0, ForcingEnvelope.exponential_bound(0.0), 0.2, estimator)
    assert c.tube(0.0) == 0.0 and c.tube(3.0) == 0.0


def test_zero_certificate_finite_threshold_implication(estimator, k2):
    # published sufficient condition: datum + 1.88 * envelope < 0.667
    K = k2.value
    mult = ceil_sig(estimator.U_inf, 3)
    bound = floor_sig(1.0 / (4.0 * K * estimator.U_inf), 3)
    assert mult == pytest.approx(1.88) and bound == pytest.approx(0.667)
    for norm, xi in [(0.15, 0.025), (0.6, 0.03), (0.0, 0.35)]:
        if norm + mult * xi < bound:
            c = cert.zero_solution_certificate(norm, ForcingEnvelope.constant_bound(xi), K, estimator, math.inf)
            assert math.isinf(c.horizon)
            assert all(p.satisfied for p in c.premises)


def test_zero_certificate_level4_threshold(estimator, k4):
    bound = floor_sig(1.0 / (4.0 * k4.value * estimator.U_inf), 3)
    assert bound == pytest.approx(1.99)


def test_zero_certificate_exponential_threshold(estimator, k2):
    K = k2.value
    limit = 1.0 / (4.0 * math.sqrt(2.0) * K)
    assert limit == pytest.approx(0.88388, abs=1e-5)
    ok = cert.zero_solution_certificate(limit - 1e-9, ForcingEnvelope.exponential_bound(0.0), K, estimator)
    assert math.isinf(ok.horizon)
    with pytest.raises(Refusal) as exc:
        cert.zero_solution_certificate(limit + 1e-6, ForcingEnvelope.exponential_bound(0.0), K, estimator)
    assert exc.value.premise.lhs > 1.0


def test_exponential_weaker_than_finite_limit(estimator, k2):
    # zero-forcing global existence: the exponential-mode datum bound is the
    # less restrictive one because N < U(inf)
    K = k2.value
    assert 1.0 / (4.0 * math.sqrt(2.0) * K) > 1.0 / (4.0 * K * estimator.U_inf)
    assert math.sqrt(2.0) < estimator.U_inf


def test_zero_certificate_residual(estimator, k2):
    c = cert.zero_solution_certificate(
        0.15, ForcingEnvelope.constant_bound(0.025), k2.value, estimator, math.inf
    )
    assert cert.verify_certificate_residual(c) >= -1e-8
    ce = cert.zero_solution_certificate(0.5, ForcingEnvelope.exponential_bound(0.0), k2.value, estimator)
    assert cert.verify_certificate_residual(ce) >= -1e-8


# -- monotone certificate ----------------------------------------------------------------


def test_monotone_reduces_to_zero_solution_formula(estimator, k2):
    K = k2.value
    eps = 0.2
    mc = cert.monotone_certificate(lambda t: eps, lambda t: 0.0, K, estimator, math.inf)
    for t in (0.0, 0.5, 3.0, 40.0):
        want = eps * cert.tube_gain(min(4.0 * K * estimator.U(t) * eps, 1.0))
        assert mc.tube(t) == pytest.approx(want, rel=1e-12)


def test_monotone_certificate_nondecreasing_and_verified(estimator, k2):
    K = k2.value
    mc = cert.monotone_certificate(
        lambda t: 0.15 + 0.02 * estimator.U(t),
        lambda t: 0.1 * (1 - math.exp(-t)),
        K,
        estimator,
        math.inf,
    )
    ts = np.linspace(0.0, 20.0, 200)
    vals = [mc.tube(float(t)) for t in ts]
    assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))
    assert mc.tube(0.0) == pytest.approx(0.15)
    assert cert.verify_certificate_residual(mc) >= -1e-8


def test_monotone_refusal_carries_lhs(estimator, k2):
    with pytest.raises(Refusal) as exc:
        cert.monotone_certificate(lambda t: 3.0, lambda t: 1.0, k2.value, estimator, math.inf)
    assert exc.value.premise.lhs > 1.0
    assert "monotone" in exc.value.premise.name


# -- exponential / linear-flow certificates ------------------------------------------------


def test_exponential_certificate_identities(estimator, k2):
    K, N = k2.value, estimator.N
    assert cert.exponential_certificate(0.0, 0.3, K, estimator).data["R"] == 0.0
    E = 0.1
    c = cert.exponential_certificate(E, 0.0, K, estimator)
    assert c.data["R"] == pytest.approx(E * cert.tube_gain(4 * K * N * E), rel=1e-12)
    rng = np.random.default_rng(7)
    for _ in range(50):
        E = float(rng.uniform(0, 0.2))
        D = float(rng.uniform(0, 0.5))
        if 2 * math.sqrt(K * N * E) + 2 * K * N * D > 1.0:
            continue
        R = cert.exponential_certificate(E, D, K, estimator).data["R"]
        assert K * N * R * R - (1 - 2 * K * N * D) * R + E == pytest.approx(0.0, abs=1e-12)


def test_linear_flow_certificate(estimator, k2):
    K, N = k2.value, estimator.N
    z = cert.linear_flow_certificate(0.0, ForcingEnvelope.exponential_bound(0.0), K, estimator)
    assert z.tube(0.0) == 0.0
    # equality case of the premise: amplitude is 4 K N F^2
    F_eq = 1.0 / (4.0 * K * N)
    c = cert.linear_flow_certificate(F_eq, ForcingEnvelope.exponential_bound(0.0), K, estimator)
    assert c.data["R"] == pytest.approx(4.0 * K * N * F_eq ** 2, rel=1e-12)
    # composition identity with the generic exponential certificate
    F = 0.3 + N * 0.05
    lf = cert.linear_flow_certificate(0.3, ForcingEnvelope.exponential_bound(0.05), K, estimator)
    comp = cert.exponential_certificate(K * N * F * F, F, K, estimator)
    assert lf.data["R"] == pytest.approx(comp.data["R"], rel=1e-12)
    assert cert.verify_certificate_residual(lf) >= -1e-8


# -- local existence -------------------------------------------------------------------


def test_local_existence_exact_solution(estimator):
    c = cert.local_existence_certificate(lambda t: 0.0, lambda r, t: 0.0, estimator)
    assert c.horizon == 50.0  # the search budget stands in for infinity
    assert c.tube(1.0) > 0.0


def test_local_existence_unit_datum(estimator, k2):
    K = k2.value
    f0 = 1.0
    E_fun = lambda t: f0 * min(1.0, t) + K * f0 * f0 * estimator.U(t)
    c = cert.local_existence_certificate(E_fun, cert.quadratic_growth(K, lambda t: f0), estimator)
    assert c.horizon > 0.0
    assert cert.verify_certificate_residual(c) >= -1e-8


def test_local_existence_monotone_in_datum(estimator, k2):
    K = k2.value
    horizons = []
    for scale in (1.0, 0.1):
        f0 = scale
        E_fun = lambda t, f0=f0: f0 * min(1.0, t) + K * f0 * f0 * estimator.U(t)
        c = cert.local_existence_certificate(E_fun, cert.quadratic_growth(K, lambda t, f0=f0: f0), estimator)
        horizons.append(c.horizon)
    assert horizons[1] >= horizons[0]


# -- Galerkin error certificate -----------------------------------------------------------


def test_galerkin_refusal_names_inequality(estimator, k2, k4):
    with pytest.raises(Refusal) as exc:
        cert.galerkin_error_certificate(
            0.2, 2.0,
            ForcingEnvelope.exponential_bound(0.0), ForcingEnvelope.exponential_bound(0.0),
            2, 4, k2.value, k4.value, resolution=1.5, estimator=estimator,
        )
    assert exc.value.premise.name == "galerkin-resolution"
    assert exc.value.premise.lhs > 1.0


def test_galerkin_premise_monotonicity(estimator, k2, k4):
    # scaling the datum up never converts a refusal into an acceptance
    admitted = []
    for s in (1.0, 1.2, 1.4, 2.0, 4.0):
        try:
            cert.galerkin_error_certificate(
                0.2 * s, 2.0 * s,
                ForcingEnvelope.exponential_bound(0.0), ForcingEnvelope.exponential_bound(0.0),
                2, 4, k2.value, k4.value, estimator=estimator,
            )
            admitted.append(True)
        except Refusal:
            admitted.append(False)
    assert admitted == sorted(admitted, reverse=True)


def test_galerkin_tube_and_residual(estimator, k2, k4):
    gc = cert.galerkin_error_certificate(
        0.2, 2.0,
        ForcingEnvelope.exponential_bound(0.0), ForcingEnvelope.exponential_bound(0.0),
        2, 4, k2.value, k4.value, resolution=math.sqrt(10.0), estimator=estimator,
    )
    assert gc.tube(0.0) <= gc.coefficient_bound / 10.0
    assert gc.tube(1.0) == pytest.approx(gc.tube(0.0) * math.exp(-1.0), rel=1e-12)
    assert cert.verify_certificate_residual(gc.base) >= -1e-8


def test_galerkin_finite_mode_tube_nondecreasing(estimator, k2, k4):
    gc = cert.galerkin_error_certificate(
        0.15, 1.5,
        ForcingEnvelope.constant_bound(0.025), ForcingEnvelope.constant_bound(0.25),
        2, 4, k2.value, k4.value, resolution=4.0, estimator=estimator, horizon=math.inf,
    )
    ts = np.linspace(0.0, 30.0, 200)
    vals = [gc.tube(float(t)) for t in ts]
    assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))
    assert cert.verify_certificate_residual(gc.base) >= -1e-8


def test_max_admissible_horizon_binding_level(estimator, k2, k4):
    T = cert.max_admissible_horizon(
        [0.20, 2.00],
        [ForcingEnvelope.constant_bound(0.025), ForcingEnvelope.constant_bound(0.25)],
        [k2.value, k4.value],
        estimator,
    )
    assert T == pytest.approx(1.514, abs=2e-3)
    # the level-4 premise binds exactly at T
    F4 = 2.0 + 0.25 * estimator.U(T)
    assert 4.0 * k4.value * estimator.U(T) * F4 == pytest.approx(1.0, abs=1e-9)
    T_easy = cert.max_admissible_horizon(
        [0.15, 1.50],
        [ForcingEnvelope.constant_bound(0.025), ForcingEnvelope.constant_bound(0.25)],
        [k2.value, k4.value],
        estimator,
    )
    assert math.isinf(T_easy)
