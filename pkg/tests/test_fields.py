"""Spectral-core: norms, projections, the advection map, frames, IO."""

import io
import math

import numpy as np
import pytest

from nscert import fields as fld
from nscert.fields import FourierField, GalerkinSet, ForcingModel


def brute_force_advect(v: FourierField, w: FourierField) -> dict:
    """Independent double-loop convolution oracle, dict arithmetic only."""
    d = v.dim
    out: dict = {}
    c = (2.0 * math.pi) ** (-d / 2.0)
    for h, vh in v.modes():
        for ell, wl in w.modes():
            k = tuple(a + b for a, b in zip(h, ell))
            val = 1j * c * complex(np.dot(vh, np.asarray(ell, dtype=float))) * wl
            out[k] = out.get(k, np.zeros(d, dtype=complex)) + val
    return {k: v for k, v in out.items() if np.max(np.abs(v)) > 0}


def test_norm_zero_field():
    assert fld.sobolev_norm(FourierField.zero(3), 2) == 0.0


def test_norm_single_pair_closed_form():
    # modes +-k with |k|^2 = 1 and coefficient magnitude c: norm = sqrt(2 * 2^n) * c
    c = np.array([0.0, 0.3, 0.4j])
    f = FourierField(3, {(1, 0, 0): c})
    mag = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    for n in (0, 1, 2, 4):
        assert fld.sobolev_norm(f, n) == pytest.approx(math.sqrt(2.0 * 2.0 ** n) * mag, rel=1e-14)


def test_norm_monotonicity_random_field():
    f = fld.random_solenoidal_field(21, 3, 0, 2, 1.0)
    # brute-force comparison of the weighted sums
    n2 = math.sqrt(sum((1 + sum(x * x for x in k)) ** 2 * float(np.sum(np.abs(c) ** 2))
                       for k, c in f.modes()))
    assert fld.sobolev_norm(f, 2) == pytest.approx(n2, rel=1e-13)
    assert fld.sobolev_norm(f, 2) >= fld.sobolev_norm(f, 0)
    for n, n_prime in [(4, 2), (2, 0), (1, 0.5)]:
        assert fld.sobolev_norm(f, n) >= fld.sobolev_norm(f, n_prime)


def test_reality_synthesised_on_read():
    c = np.array([1.0 + 2.0j, -0.5j, 0.25])
    f = FourierField(3, {(1, 2, -1): c})
    assert np.allclose(f.coeff((-1, -2, 1)), c.conj())
    assert f.n_stored == 1


def test_construction_hermitizes_inconsistent_pairs():
    k = (1, 0, 0)
    mk = (-1, 0, 0)
    a = np.array([0.0, 1.0 + 1.0j, 0.0])
    b = np.array([0.0, 2.0 - 0.0j, 0.0])  # inconsistent with conj(a)
    f = FourierField(3, {k: a, mk: b})
    assert np.allclose(f.coeff(k), 0.5 * (a + b.conj()))
    assert np.allclose(f.coeff(mk), f.coeff(k).conj())


def test_mean_mode_forced_real():
    f = FourierField(2, {(0, 0): np.array([1.0 + 1.0j, 2.0])})
    assert np.allclose(f.coeff((0, 0)), [1.0, 2.0])


def test_mean_and_divergence_zero_field():
    mean, defect = fld.mean_and_divergence(FourierField.zero(3))
    assert np.allclose(mean, 0.0) and defect == 0.0


def test_gradient_mode_divergence_defect():
    k = (2, 1, 0)
    p = 0.7 - 0.2j
    f = FourierField(3, {k: 1j * np.asarray(k, dtype=float) * p})
    _, defect = fld.mean_and_divergence(f)
    k2 = sum(x * x for x in k)
    assert defect == pytest.approx(k2 * abs(p), rel=1e-14)


def test_leray_fixes_divergence_free():
    f = fld.random_solenoidal_field(3, 3, 2, 2, 0.4)
    g = fld.leray_project(f)
    assert fld.sobolev_norm(g - f, 2) <= 1e-14


def test_leray_annihilates_gradients():
    k = (1, -1, 2)
    f = FourierField(3, {k: 1j * np.asarray(k, dtype=float) * (0.3 + 0.1j)})
    assert fld.sobolev_norm(fld.leray_project(f), 2) <= 1e-15 * fld.sobolev_norm(f, 2)


def test_leray_idempotent_and_contracting():
    rng = np.random.default_rng(5)
    for trial in range(100):
        modes = {}
        for _ in range(6):
            k = tuple(int(x) for x in rng.integers(-3, 4, size=3))
            if not any(k):
                continue
            modes[k] = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        f = FourierField(3, modes)
        p1 = fld.leray_project(f)
        p2 = fld.leray_project(p1)
        for k, c in p1.modes():
            assert np.max(np.abs(p2.coeff(k) - c)) <= 1e-14
        for n in (0, 2, 4):
            assert fld.sobolev_norm(p1, n) <= fld.sobolev_norm(f, n) * (1 + 1e-14)


def test_advect_zero_w():
    v = fld.random_solenoidal_field(1, 3, 2, 1, 1.0)
    assert fld.advect(v, FourierField.zero(3)).is_zero


def test_advect_two_pair_hand_expansion():
    a, b = (1, 0, 0), (0, 1, 0)
    va = np.array([0.0, 1.0, 0.5j])
    wb = np.array([0.3j, 0.0, 1.0])
    v = FourierField(3, {a: va})
    w = FourierField(3, {b: wb})
    out = fld.advect(v, w)
    support = out.support()
    expect = {(1, 1, 0), (-1, -1, 0), (1, -1, 0), (-1, 1, 0)}
    assert support == expect
    # hand-expanded term at k = a + b: i (2pi)^{-3/2} (v_a . b) w_b
    c = (2.0 * math.pi) ** (-1.5)
    hand = 1j * c * complex(np.dot(va, np.asarray(b, float))) * wb
    assert np.allclose(out.coeff((1, 1, 0)), hand, atol=1e-15)
    # and at k = a - b: i c (v_a . (-b)) w_{-b}
    hand2 = 1j * c * complex(np.dot(va, -np.asarray(b, float))) * wb.conj()
    assert np.allclose(out.coeff((1, -1, 0)), hand2, atol=1e-15)


def test_advect_matches_brute_force_oracle():
    v = fld.random_solenoidal_field(7, 3, 2, 2, 1.3)   # 2-box: 124 modes > 50? restrict
    v = v.restrict(GalerkinSet.from_box(3, 1))
    w = fld.random_solenoidal_field(8, 3, 2, 2, 0.9).restrict(GalerkinSet.from_box(3, 1))
    assert len(list(v.modes())) <= 50 and len(list(w.modes())) <= 50
    got = fld.advect(v, w)
    want = brute_force_advect(v, w)
    assert got.support() == set(want)
    for k, c in want.items():
        assert np.max(np.abs(got.coeff(k) - c)) <= 1e-12


def test_advect_support_restriction():
    v = fld.random_solenoidal_field(9, 3, 2, 2, 1.0)
    G = GalerkinSet.from_box(3, 2)
    full = fld.advect(v, v)
    cut = fld.advect(v, v, support=G)
    assert cut.support() <= G.members
    for k in cut.support():
        assert np.allclose(cut.coeff(k), full.coeff(k))


def test_advection_orthogonality_and_zero_mean():
    for seed in range(10):
        v = fld.random_solenoidal_field(seed, 3, 2, 2, 1.0)
        adv = fld.advect(v, v)
        ip = sum(complex(np.vdot(v.coeff(k), adv.coeff(k))) for k, _ in v.modes())
        assert abs(ip.real) <= 1e-10 and abs(ip.imag) <= 1e-10
        w = fld.random_solenoidal_field(seed + 100, 3, 2, 2, 0.7)
        assert np.max(np.abs(fld.advect(v, w).coeff((0, 0, 0)))) <= 1e-14


def test_bilinear_estimate_random_pairs(k2, k4):
    rng_seeds = range(100)
    for const in (k2, k4):
        n = const.n
        for seed in rng_seeds:
            v = fld.random_solenoidal_field(seed, 3, n, 2, 0.5 + (seed % 5) * 0.3)
            w = fld.random_solenoidal_field(seed + 1000, 3, n, 2, 0.2 + (seed % 7) * 0.2)
            lhs = fld.sobolev_norm(fld.advect(v, w), n - 1)
            rhs = const.value * fld.sobolev_norm(v, n) * fld.sobolev_norm(w, n)
            assert lhs <= rhs


def test_nonlinearity_trivial_cases():
    z = FourierField.zero(3)
    assert fld.nonlinearity(z, 0.0, None).is_zero
    xi_field = fld.random_solenoidal_field(4, 3, 1, 1, 0.3)
    forcing = ForcingModel.constant(xi_field)
    out = fld.nonlinearity(z, 0.5, forcing)
    assert fld.sobolev_norm(out - xi_field, 1) <= 1e-14


def test_nonlinearity_never_produces_mean_mode():
    f = fld.random_solenoidal_field(17, 3, 2, 2, 0.8)
    out = fld.nonlinearity(f, 0.0, None)
    assert not out.has_mean_mode
    assert np.max(np.abs(out.coeff((0, 0, 0)))) == 0.0


def test_forcing_horizon_is_hard():
    forcing = ForcingModel(3, lambda t: FourierField.zero(3), horizon=1.0)
    forcing(1.0)
    with pytest.raises(ValueError, match="horizon"):
        forcing(1.5)


def test_galerkin_projection_and_truncation(k2):
    G = GalerkinSet.from_box(3, 2)
    v = fld.random_solenoidal_field(5, 3, 4, 4, 2.0)
    pv = fld.galerkin_project(v, G)
    assert pv.support() <= G.members
    inside = fld.random_solenoidal_field(6, 3, 2, 2, 1.0)
    assert fld.sobolev_norm(fld.galerkin_project(inside, G) - inside, 2) == 0.0
    res, factor = fld.galerkin_resolution(G, 4, 2)
    tail = v - pv
    assert fld.sobolev_norm(tail, 2) <= fld.sobolev_norm(v, 4) * factor * (1 + 1e-12)


def test_resolution_brute_force():
    G = GalerkinSet.from_box(3, 2)
    best = None
    for kx in range(-4, 5):
        for ky in range(-4, 5):
            for kz in range(-4, 5):
                k = (kx, ky, kz)
                if not any(k) or k in G.members:
                    continue
                q = 1 + kx * kx + ky * ky + kz * kz
                best = q if best is None else min(best, q)
    assert G.resolution == pytest.approx(math.sqrt(best), rel=1e-15)
    assert G.resolution == pytest.approx(math.sqrt(10.0), rel=1e-15)


def test_resolution_empty_set_and_truncation_factor():
    empty = GalerkinSet(3, frozenset())
    assert empty.resolution == pytest.approx(math.sqrt(2.0))
    assert fld.galerkin_project(fld.random_solenoidal_field(2, 3, 2, 1, 1.0), empty).is_zero
    # the published admissibility example: |G| = 2.76 at p - n = 2
    assert 1.0 / 2.76 ** 2 == pytest.approx(0.1313, abs=5e-5)
    with pytest.raises(ValueError):
        fld.galerkin_resolution(GalerkinSet.from_box(3, 1), p=2, n=4)


def test_galerkin_set_validation():
    with pytest.raises(ValueError, match="zero"):
        GalerkinSet(3, frozenset({(0, 0, 0), (1, 0, 0), (-1, 0, 0)}))
    with pytest.raises(ValueError, match="symmetric"):
        GalerkinSet(3, frozenset({(1, 0, 0)}))


def test_frame_reduction_closed_forms():
    d = 3
    m0 = np.array([0.1, -0.2, 0.05])
    base = fld.random_solenoidal_field(11, d, 2, 2, 0.3)
    v0 = base + FourierField(d, {(0,) * d: (2 * math.pi) ** (d / 2.0) * m0})
    eta_mean = np.array([0.02, 0.0, -0.01])
    eta = ForcingModel.constant(
        fld.random_solenoidal_field(12, d, 1, 1, 0.05)
        + FourierField(d, {(0,) * d: (2 * math.pi) ** (d / 2.0) * eta_mean})
    )
    f0, xi, frame = fld.reduce_to_zero_mean(v0, eta)
    assert not f0.has_mean_mode
    assert fld.sobolev_norm(f0 - base, 2) <= 1e-14
    assert np.allclose(frame.m0, m0)
    t = 0.7
    assert np.allclose(frame.mean_path(t), m0 + eta_mean * t, atol=1e-9)
    assert np.allclose(frame.shift_path(t), m0 * t + eta_mean * t * t / 2, atol=1e-9)
    assert np.allclose(frame.shift_path(0.0), 0.0)
    # phase factors are unimodular
    for s in (0.0, 0.4, 1.3):
        assert fld.sobolev_norm(xi(s), 1) == pytest.approx(
            fld.sobolev_norm(eta(0.0).drop_mean(), 1), rel=1e-12
        )


def test_frame_trivial_identity():
    v0 = fld.random_solenoidal_field(13, 3, 2, 2, 0.4)
    f0, xi, frame = fld.reduce_to_zero_mean(v0, ForcingModel.zero(3))
    assert fld.sobolev_norm(f0 - v0, 2) == 0.0
    assert np.allclose(frame.shift_path(2.0), 0.0)
    back = fld.reconstruct_frame(lambda t: f0, frame, 1.0)
    assert fld.sobolev_norm(back - v0, 2) <= 1e-14


def test_frame_round_trip():
    d = 3
    m0 = np.array([0.3, 0.0, -0.1])
    base = fld.random_solenoidal_field(14, d, 2, 2, 0.25)
    v0 = base + FourierField(d, {(0,) * d: (2 * math.pi) ** (d / 2.0) * m0})
    eta = ForcingModel.constant(
        FourierField(d, {(0,) * d: (2 * math.pi) ** (d / 2.0) * np.array([0.0, 0.05, 0.0])})
    )
    f0, xi, frame = fld.reduce_to_zero_mean(v0, eta)
    t = 0.9
    nu = fld.reconstruct_frame(lambda s: f0, frame, t)
    # undo by hand: remove mean, re-apply the forward phase
    undone = fld.phase_shift(nu.drop_mean(), frame.shift_path(t))
    assert fld.sobolev_norm(undone - f0, 2) <= 1e-12
    assert np.allclose(nu.mean(), frame.mean_path(t), atol=1e-12)
    assert fld.sobolev_norm(nu.drop_mean(), 2) == pytest.approx(fld.sobolev_norm(f0, 2), rel=1e-14)


def test_random_solenoidal_contract():
    f = fld.random_solenoidal_field(42, 3, 2, 2, 0.15)
    assert fld.sobolev_norm(f, 2) == pytest.approx(0.15, rel=1e-12)
    again = fld.random_solenoidal_field(42, 3, 2, 2, 0.15)
    assert fld.sobolev_norm(f - again, 2) == 0.0
    _, defect = fld.mean_and_divergence(f)
    assert defect <= 1e-12
    with pytest.raises(ValueError):
        fld.random_solenoidal_field(1, 3, 2, 1, 1.0, shell=(50, 60))


def test_serialization_round_trip():
    f = fld.random_solenoidal_field(23, 3, 2, 3, 0.8)
    buf = io.StringIO()
    fld.write_field(f, buf)
    buf.seek(0)
    g = fld.read_field(buf)
    assert fld.sobolev_norm(f - g, 2) == 0.0
    assert buf.getvalue().splitlines()[0].startswith("# nscert-field d=3")


def test_serialization_rejects_bad_input():
    with pytest.raises(ValueError, match="header"):
        fld.read_field(io.StringIO("nonsense\n"))
    bad = io.StringIO("# nscert-field d=3 zero_mean=1 div_free=1\n1 0 0 1.0\n")
    with pytest.raises(ValueError, match="line 2"):
        fld.read_field(bad)


def test_dimension_mismatch_raises():
    v = fld.random_solenoidal_field(2, 3, 2, 1, 1.0)
    w = fld.random_solenoidal_field(2, 2, 2, 1, 1.0)
    with pytest.raises(ValueError, match="dimension"):
        fld.advect(v, w)
