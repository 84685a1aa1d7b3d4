"""Analytic certificate constructors for the quadratic control inequality.

A certificate packages an existence horizon T together with an evaluable
tube radius R(t) such that the exact solution of the Volterra problem stays
within R(t) of the approximate solution on [0, T).  Every constructor first
checks its admissibility premise; on violation it raises :class:`Refusal`
carrying the offending inequality and its numeric left-hand side, so a
failed certification is an auditable value, never a silent clamp.

Reported numbers follow a conservative convention: coefficients that make a
premise harder are rounded up at three significant digits, admissibility
thresholds on data are rounded down.  Exact values are always kept
alongside the reported ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .quadrature import adaptive_simpson, integrate_sqrt_kernel
from .rounding import ceil_sig, floor_sig
from .semigroup import SemigroupEstimator, navier_stokes_estimator

REPORT_DIGITS = 3


# -- shape functions -------------------------------------------------------------


def tube_gain(z: float) -> float:
    """(1 - sqrt(1-z)) / (z/2) on [0, 1], increasing from 1 to 2.

    Evaluated as 2 / (1 + sqrt(1-z)), which is the same function without
    the cancellation at small z.
    """
    if z < 0.0 or z > 1.0:
        raise ValueError(f"tube gain needs z in [0, 1], got {z}")
    return 2.0 / (1.0 + math.sqrt(1.0 - z))


def flow_tube_gain(z: float) -> float:
    """(1 - z/2 - sqrt(1-z)) / (z^2/8) on [0, 1], increasing from 1 to 4."""
    if z < 0.0 or z > 1.0:
        raise ValueError(f"flow tube gain needs z in [0, 1], got {z}")
    g = tube_gain(z)
    return g * g


def smallest_tube_root(mu: float, delta: float, eps: float) -> float:
    """Smallest nonnegative root of mu r^2 - (1 - 2 mu delta) r + eps = 0.

    Domain: mu, delta, eps >= 0 with 2 mu delta + 2 sqrt(mu eps) <= 1; the
    mu = 0 limit is eps.  Written in the cancellation-free form
    2 eps / (b + sqrt(b^2 - 4 mu eps)), b = 1 - 2 mu delta.
    """
    if min(mu, delta, eps) < 0.0:
        raise ValueError("arguments must be nonnegative")
    if 2.0 * mu * delta + 2.0 * math.sqrt(mu * eps) > 1.0 + 1e-14:
        raise ValueError("outside the admissible domain 2 mu delta + 2 sqrt(mu eps) <= 1")
    b = 1.0 - 2.0 * mu * delta
    disc = b * b - 4.0 * mu * eps
    if disc < 0.0:
        disc = 0.0
    denom = b + math.sqrt(disc)
    if denom == 0.0:
        return 0.0
    return 2.0 * eps / denom


# -- premises, certificates, refusals ---------------------------------------------


@dataclass(frozen=True)
class Premise:
    name: str
    lhs: float
    bound: float = 1.0

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.bound

    @property
    def lhs_reported(self) -> float:
        return ceil_sig(self.lhs, REPORT_DIGITS)


class Refusal(Exception):
    """A certificate constructor declining: premise violated, with evidence."""

    def __init__(self, premise: Premise, context: str = ""):
        self.premise = premise
        self.context = context
        super().__init__(
            f"premise {premise.name} violated: lhs = {premise.lhs:.6g} > {premise.bound:.6g}"
            + (f" ({context})" if context else "")
        )


@dataclass(frozen=True)
class ForcingEnvelope:
    """Scalar bound on the forcing norm one rung below the working space.

    ``constant`` mode carries a nondecreasing bound t -> Xi(t); the
    ``exponential`` mode carries J with ||xi(t)|| <= J exp(-2 B t).
    """

    mode: str  # "constant" or "exponential"
    xi: Callable[[float], float] | None = None
    J: float = 0.0

    @classmethod
    def none(cls) -> "ForcingEnvelope":
        return cls("constant", xi=lambda t: 0.0, J=0.0)

    @classmethod
    def constant_bound(cls, xi) -> "ForcingEnvelope":
        if callable(xi):
            return cls("constant", xi=xi)
        value = float(xi)
        if value < 0:
            raise ValueError("forcing envelope must be nonnegative")
        return cls("constant", xi=lambda t: value)

    @classmethod
    def exponential_bound(cls, J: float) -> "ForcingEnvelope":
        if J < 0:
            raise ValueError("forcing envelope must be nonnegative")
        return cls("exponential", J=float(J))


@dataclass(frozen=True)
class Certificate:
    """Existence horizon plus an evaluable tube radius around the approximation."""

    kind: str
    horizon: float
    tube: Callable[[float], float]
    premises: tuple[Premise, ...]
    estimator: SemigroupEstimator
    K: float
    # estimator functions of the underlying control inequality, kept for audit
    error_bound: Callable[[float], float] = lambda t: 0.0
    approx_bound: Callable[[float], float] = lambda t: 0.0
    data: dict = field(default_factory=dict)

    def tube_samples(self, ts: Sequence[float]) -> list[tuple[float, float]]:
        return [(float(t), float(self.tube(float(t)))) for t in ts]

    @property
    def exponential(self) -> bool:
        return self.data.get("mode") == "exponential"


def _require(premises: Sequence[Premise], context: str) -> None:
    for p in premises:
        if not p.satisfied:
            raise Refusal(p, context)


def _sample_times(horizon: float, count: int) -> list[float]:
    cap = min(horizon, 40.0) if math.isinf(horizon) else horizon
    return [cap * (i + 1) / (count + 1) for i in range(count)]


# -- generic residual check --------------------------------------------------------


def verify_certificate_residual(
    cert: Certificate,
    n_times: int = 20,
    quad_tol: float = 1e-10,
) -> float:
    """Worst signed slack of the control inequality along the tube.

    Substitutes the certificate's own tube into
    E(t) + K int_0^t u_minus(t-s) (2 D(s) R(s) + R(s)^2) ds <= R(t)
    and integrates with the singular factor removed exactly (split at the
    estimator breakpoint).  Nonnegative slack at every sampled time means
    the certificate is self-consistent.
    """
    est = cert.estimator
    worst = math.inf
    for t in _sample_times(cert.horizon, n_times):
        def integrand(x: float) -> float:
            # x = t - s
            s = t - x
            r = cert.tube(s)
            return est.u_minus(x) * (2.0 * cert.approx_bound(s) * r + r * r)

        split = min(est.theta, t)
        integral = integrate_sqrt_kernel(integrand, 0.0, split, tol=quad_tol)
        if t > split:
            integral += adaptive_simpson(integrand, split, t, tol=quad_tol)
        slack = cert.tube(t) - (cert.error_bound(t) + cert.K * integral)
        worst = min(worst, slack)
    return worst


# -- certificate constructors -------------------------------------------------------


def local_existence_certificate(
    error_bound: Callable[[float], float],
    growth: Callable[[float, float], float],
    estimator: SemigroupEstimator | None = None,
    horizon_cap: float = 50.0,
    n_candidates: int = 64,
    r_max: float | None = None,
    quad_tol: float = 1e-8,
) -> Certificate:
    """Constant-radius tube via a direct (R, T) search.

    ``growth(r, t)`` must be nondecreasing in r.  For each candidate radius
    the largest time T with  E(t) + int_0^t u_minus(t-s) growth(R, s) ds <= R
    on [0, T) is found by bisection on a monotone upper envelope of the
    left-hand side; the pair with the largest T wins (ties: smaller R).
    """
    est = estimator or navier_stokes_estimator()
    if error_bound(0.0) > 1e-12:
        raise ValueError("the error bound must vanish at t = 0 for local existence")

    if r_max is None:
        r_max = max(1.0, 10.0 * (error_bound(1.0) + 1.0))
    candidates = [r_max * (10.0 ** (-6.0 * (1.0 - i / (n_candidates - 1)))) for i in range(n_candidates)]

    def lhs(R: float, t: float) -> float:
        if t == 0.0:
            return error_bound(0.0)

        def integrand(x: float) -> float:
            return est.u_minus(x) * growth(R, t - x)

        split = min(est.theta, t)
        val = integrate_sqrt_kernel(integrand, 0.0, split, tol=quad_tol)
        if t > split:
            val += adaptive_simpson(integrand, split, t, tol=quad_tol)
        return error_bound(t) + val

    best: tuple[float, float] | None = None  # (T, R)
    for R in candidates:
        if lhs(R, min(1e-6, horizon_cap)) > R:
            continue
        lo, hi = 0.0, horizon_cap
        if lhs(R, horizon_cap) <= R:
            T = horizon_cap
        else:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if lhs(R, mid) <= R:
                    lo = mid
                else:
                    hi = mid
            T = lo
        if T > 0.0 and (best is None or T > best[0] + 1e-12):
            best = (T, R)
    if best is None:
        raise Refusal(
            Premise("local-existence-search", math.inf, 1.0),
            "no admissible (R, T) pair within the search budget",
        )
    T, R = best
    return Certificate(
        kind="local-existence",
        horizon=T,
        tube=lambda t: R,
        premises=(Premise("search-feasible", 0.0, 1.0),),
        estimator=est,
        K=0.0,
        error_bound=error_bound,
        approx_bound=lambda t: 0.0,
        data={"radius": R, "mode": "finite", "search_candidates": n_candidates},
    )


def quadratic_growth(K: float, approx_bound: Callable[[float], float]) -> Callable[[float, float], float]:
    """The growth estimator 2 K D(t) r + K r^2 of the quadratic nonlinearity."""
    return lambda r, t: 2.0 * K * approx_bound(t) * r + K * r * r


def monotone_certificate(
    error_bound: Callable[[float], float],
    approx_bound: Callable[[float], float],
    K: float,
    estimator: SemigroupEstimator | None = None,
    horizon: float = math.inf,
) -> Certificate:
    """Nondecreasing tube R(t) for nondecreasing error and approximation bounds.

    Premise: 2 sqrt(K U(T) E(T)) + 2 K U(T) D(T) <= 1.  The tube is the
    smallest root of the frozen-coefficient quadratic at each time.
    """
    est = estimator or navier_stokes_estimator()
    UT, ET, DT = est.U(horizon), error_bound(horizon), approx_bound(horizon)
    premise = Premise("monotone-admissibility", 2.0 * math.sqrt(K * UT * ET) + 2.0 * K * UT * DT)
    _require([premise], "monotone certificate")

    def tube(t: float) -> float:
        return smallest_tube_root(K * est.U(t), approx_bound(t), error_bound(t))

    return Certificate(
        kind="monotone",
        horizon=horizon,
        tube=tube,
        premises=(premise,),
        estimator=est,
        K=K,
        error_bound=error_bound,
        approx_bound=approx_bound,
        data={"mode": "finite"},
    )


def _finite_error_envelope(datum_norm: float, forcing: ForcingEnvelope, est: SemigroupEstimator):
    """t -> ||f0|| + Xi(t) U(t), the zero-approximation integral error bound."""
    if forcing.mode != "constant":
        raise ValueError("finite-horizon certificates need a constant-mode envelope")

    def F(t: float) -> float:
        return datum_norm + forcing.xi(t) * est.U(t)

    return F


def zero_solution_certificate(
    datum_norm: float,
    forcing: ForcingEnvelope,
    K: float,
    estimator: SemigroupEstimator | None = None,
    horizon: float = math.inf,
) -> Certificate:
    """Existence certificate with the zero field as approximate solution.

    Finite-horizon mode (constant envelope): premise 4 K U(T) F(T) <= 1 with
    F(t) = ||f0|| + Xi(t) U(t); tube F(t) * gain(4 K U(t) F(t)).
    Exponential mode: premise 4 K N F <= 1 with F = ||f0|| + N J; tube
    F * gain(4 K N F) * exp(-B t) on [0, inf).
    """
    est = estimator or navier_stokes_estimator()
    if datum_norm < 0:
        raise ValueError("datum norm must be nonnegative")
    if forcing.mode == "exponential":
        F = datum_norm + est.N * forcing.J
        premise = Premise("zero-solution-exponential", 4.0 * K * est.N * F)
        _require([premise], "zero approximate solution, exponential decay")
        R = F * tube_gain(min(premise.lhs, 1.0))
        return Certificate(
            kind="zero-solution",
            horizon=math.inf,
            tube=lambda t: R * math.exp(-est.B * t),
            premises=(premise,),
            estimator=est,
            K=K,
            error_bound=lambda t: F * math.exp(-est.B * t),
            approx_bound=lambda t: 0.0,
            data={
                "mode": "exponential",
                "F": F,
                "R": R,
                "datum_threshold_exact": 1.0 / (4.0 * K * est.N),
                "datum_threshold_reported": floor_sig(1.0 / ceil_sig(4.0 * K * est.N, REPORT_DIGITS), REPORT_DIGITS),
            },
        )

    Ffun = _finite_error_envelope(datum_norm, forcing, est)
    UT = est.U(horizon)
    premise = Premise("zero-solution-finite", 4.0 * K * UT * Ffun(horizon))
    _require([premise], "zero approximate solution, finite horizon")

    def tube(t: float) -> float:
        return Ffun(t) * tube_gain(min(4.0 * K * est.U(t) * Ffun(t), 1.0))

    return Certificate(
        kind="zero-solution",
        horizon=horizon,
        tube=tube,
        premises=(premise,),
        estimator=est,
        K=K,
        error_bound=Ffun,
        approx_bound=lambda t: 0.0,
        data={"mode": "finite", "F_at_horizon": Ffun(horizon)},
    )


def exponential_certificate(
    E: float,
    D: float,
    K: float,
    estimator: SemigroupEstimator | None = None,
) -> Certificate:
    """Constant-coefficient exponential-decay certificate.

    For integral error <= E e^{-Bt} and approximation norm <= D e^{-Bt},
    premise 2 sqrt(K N E) + 2 K N D <= 1 gives the tube R e^{-Bt} with R
    the smallest root of K N R^2 - (1 - 2 K N D) R + E = 0.
    """
    est = estimator or navier_stokes_estimator()
    premise = Premise("exponential-admissibility", 2.0 * math.sqrt(K * est.N * E) + 2.0 * K * est.N * D)
    _require([premise], "exponential-decay certificate")
    R = smallest_tube_root(K * est.N, D, E)
    return Certificate(
        kind="exponential",
        horizon=math.inf,
        tube=lambda t: R * math.exp(-est.B * t),
        premises=(premise,),
        estimator=est,
        K=K,
        error_bound=lambda t: E * math.exp(-est.B * t),
        approx_bound=lambda t: D * math.exp(-est.B * t),
        data={"mode": "exponential", "R": R, "E": E, "D": D},
    )


def linear_flow_certificate(
    datum_norm: float,
    forcing: ForcingEnvelope,
    K: float,
    estimator: SemigroupEstimator | None = None,
) -> Certificate:
    """Distance tube around the flow of the linear equation.

    With F = ||f0|| + N J and premise 4 K N F <= 1, the exact solution stays
    within K N F^2 * flow_gain(4 K N F) * exp(-B t) of the linear-flow
    approximation.  Equivalent to the exponential certificate with
    E = K N F^2 and D = F.
    """
    est = estimator or navier_stokes_estimator()
    if forcing.mode != "exponential":
        raise ValueError("the linear-flow certificate needs an exponential envelope")
    F = datum_norm + est.N * forcing.J
    premise = Premise("linear-flow-admissibility", 4.0 * K * est.N * F)
    _require([premise], "linear-flow approximate solution")
    R = K * est.N * F * F * flow_tube_gain(min(premise.lhs, 1.0))
    return Certificate(
        kind="linear-flow",
        horizon=math.inf,
        tube=lambda t: R * math.exp(-est.B * t),
        premises=(premise,),
        estimator=est,
        K=K,
        error_bound=lambda t: K * est.N * F * F * math.exp(-est.B * t),
        approx_bound=lambda t: F * math.exp(-est.B * t),
        data={"mode": "exponential", "R": R, "F": F},
    )


# -- Galerkin error certificates -----------------------------------------------------


def _finite_level(datum_norm: float, xi, K: float, est: SemigroupEstimator):
    """Per-level bounds entering the finite-horizon Galerkin certificate."""

    def F(t: float) -> float:
        return datum_norm + xi(t) * est.U(t)

    def z(t: float) -> float:
        return 4.0 * K * est.U(t) * F(t)

    def D(t: float) -> float:
        return F(t) * tube_gain(min(z(t), 1.0))

    def Y(t: float) -> float:
        zz = min(z(t), 1.0)
        g = tube_gain(zz)
        return F(t) * (1.0 + K * est.U(t) * F(t) * g * g)

    return F, z, D, Y


@dataclass(frozen=True)
class GalerkinCertificate:
    """Certified distance between the exact solution and a Galerkin run.

    ``tube(t)`` already includes the 1/|G|^(p-n) factor when a resolution is
    given; ``coefficient_bound`` is the resolution-independent numerator
    bound, so tube(t) <= coefficient_bound / |G|^(p-n) everywhere.
    """

    base: Certificate
    n: float
    p: float
    resolution: float | None
    premise_shift: float  # coefficient b in  b + c/|G|^(p-n) <= 1
    premise_decay: float  # coefficient c
    min_resolution_exact: float
    min_resolution_reported: float
    coefficient_bound: float
    coefficient_bound_reported: float

    @property
    def premises(self) -> tuple[Premise, ...]:
        return self.base.premises

    @property
    def horizon(self) -> float:
        return self.base.horizon

    def tube(self, t: float) -> float:
        return self.base.tube(t)

    @property
    def premise_shift_reported(self) -> float:
        return ceil_sig(self.premise_shift, REPORT_DIGITS)

    @property
    def premise_decay_reported(self) -> float:
        return ceil_sig(self.premise_decay, REPORT_DIGITS)


def galerkin_error_certificate(
    datum_norm_n: float,
    datum_norm_p: float,
    forcing_n: ForcingEnvelope,
    forcing_p: ForcingEnvelope,
    n: float,
    p: float,
    K_n: float,
    K_p: float,
    resolution: float | None = None,
    estimator: SemigroupEstimator | None = None,
    horizon: float = math.inf,
) -> GalerkinCertificate:
    """Certificate for ||exact - Galerkin||_n, finite or exponential mode.

    The mode is read off the envelopes: constant envelopes give the
    finite-horizon certificate (tube nondecreasing up to the 1/|G|^(p-n)
    factor), exponential envelopes the globally decaying one.  The premise
    has the form  b + c / |G|^((p-n)/ exponent...) -- concretely
    b + c * |G|^(-(p-n)/2 * 2): both coefficients are returned so the
    admissibility threshold on |G| is explicit.

    With ``resolution=None`` only the thresholds and the rough bound are
    produced and the tube is left at the minimal admissible resolution.
    """
    est = estimator or navier_stokes_estimator()
    if n > p:
        raise ValueError("need n <= p")
    if forcing_n.mode != forcing_p.mode:
        raise ValueError("forcing envelopes at the two levels must share a mode")
    exponential = forcing_n.mode == "exponential"
    gap = p - n

    if exponential:
        F_n = datum_norm_n + est.N * forcing_n.J
        F_p = datum_norm_p + est.N * forcing_p.J
        prem_n = Premise("exp-level-n", 4.0 * math.sqrt(2.0) * K_n * F_n)
        prem_p = Premise("exp-level-p", 4.0 * math.sqrt(2.0) * K_p * F_p)
        _require([prem_n, prem_p], "Galerkin certificate, exponential mode")
        D_n = F_n * tube_gain(min(prem_n.lhs, 1.0))
        gp = tube_gain(min(prem_p.lhs, 1.0))
        Y_p = F_p * (1.0 + math.sqrt(2.0) * K_p * F_p * gp * gp)
        b = 2.0 * math.sqrt(2.0) * K_n * D_n
        c = 2.0 * 2.0 ** 0.25 * math.sqrt(K_n * Y_p)
        denom = 1.0 - b
        horizon_out = math.inf
    else:
        if math.isinf(horizon):
            UT = est.U(math.inf)
        else:
            UT = est.U(horizon)
        xi_n = forcing_n.xi
        xi_p = forcing_p.xi
        F_n_fun, z_n, D_n_fun, _ = _finite_level(datum_norm_n, xi_n, K_n, est)
        F_p_fun, z_p, _, Y_p_fun = _finite_level(datum_norm_p, xi_p, K_p, est)
        prem_n = Premise("finite-level-n", z_n(horizon))
        prem_p = Premise("finite-level-p", z_p(horizon))
        _require([prem_n, prem_p], "Galerkin certificate, finite horizon")
        D_nT = D_n_fun(horizon)
        Y_pT = Y_p_fun(horizon)
        b = 2.0 * K_n * UT * D_nT
        c = 2.0 * math.sqrt(K_n * UT * Y_pT)
        denom = 1.0 - b
        horizon_out = horizon

    if denom <= 0.0:
        raise Refusal(Premise("galerkin-shift", b), "shift coefficient b reaches 1")

    # premise: b + c / |G|^((p-n)) ... the c term scales like |G|^(-gap/2) squared
    min_res_exact = (c / denom) ** (2.0 / gap) if gap > 0 else math.inf
    b_rep = ceil_sig(b, REPORT_DIGITS)
    c_rep = ceil_sig(c, REPORT_DIGITS)
    min_res_reported = (
        ceil_sig((c_rep / (1.0 - b_rep)) ** (2.0 / gap), REPORT_DIGITS) if gap > 0 else math.inf
    )

    if resolution is not None:
        premise_res = Premise("galerkin-resolution", b + c / math.sqrt(resolution ** gap))
        _require([prem_n, prem_p, premise_res], "Galerkin certificate")
        res_used = resolution
    else:
        premise_res = Premise("galerkin-resolution", 1.0)
        res_used = min_res_exact

    if exponential:
        def numerator(t: float) -> float:
            arg = 4.0 * math.sqrt(2.0) * K_n * Y_p / (denom * denom * res_used ** gap)
            return Y_p / denom * tube_gain(min(arg, 1.0))

        rough = 2.0 * Y_p / denom

        def tube(t: float) -> float:
            return numerator(t) * math.exp(-est.B * t) / res_used ** gap

        err_bound = lambda t: Y_p / res_used ** gap * math.exp(-est.B * t)
        approx_bound = lambda t: D_n * math.exp(-est.B * t)
    else:
        def numerator(t: float) -> float:
            dd = 1.0 - 2.0 * K_n * est.U(t) * D_n_fun(t)
            arg = 4.0 * K_n * est.U(t) * Y_p_fun(t) / (dd * dd * res_used ** gap)
            return Y_p_fun(t) / dd * tube_gain(min(arg, 1.0))

        rough = 2.0 * Y_pT / denom

        def tube(t: float) -> float:
            return numerator(t) / res_used ** gap

        err_bound = lambda t: Y_p_fun(t) / res_used ** gap
        approx_bound = D_n_fun

    base = Certificate(
        kind="galerkin-error",
        horizon=horizon_out,
        tube=tube,
        premises=(prem_n, prem_p, premise_res),
        estimator=est,
        K=K_n,
        error_bound=err_bound,
        approx_bound=approx_bound,
        data={
            "mode": "exponential" if exponential else "finite",
            "resolution": res_used,
            "gap": gap,
        },
    )
    return GalerkinCertificate(
        base=base,
        n=n,
        p=p,
        resolution=resolution,
        premise_shift=b,
        premise_decay=c,
        min_resolution_exact=min_res_exact,
        min_resolution_reported=min_res_reported,
        coefficient_bound=rough,
        coefficient_bound_reported=ceil_sig(rough, REPORT_DIGITS),
    )


def max_admissible_horizon(
    datum_norms: Sequence[float],
    envelopes: Sequence[ForcingEnvelope],
    constants: Sequence[float],
    estimator: SemigroupEstimator | None = None,
) -> float:
    """Largest T with 4 K U(T) (||f0|| + Xi(T) U(T)) <= 1 at every level.

    For constant envelopes the premise is a quadratic in U, so the bound is
    inverted in closed form through the running-integral inverse.  Returns
    inf when even the limit premise holds.
    """
    est = estimator or navier_stokes_estimator()
    best = math.inf
    for norm, env, K in zip(datum_norms, envelopes, constants):
        if env.mode != "constant":
            raise ValueError("horizon search applies to constant envelopes")
        xi0 = env.xi(0.0)
        if 4.0 * K * est.U_inf * (norm + xi0 * est.U_inf) <= 1.0:
            continue
        # 4 K U (norm + xi U) = 1  =>  4 K xi U^2 + 4 K norm U - 1 = 0
        if xi0 == 0.0:
            U_star = 1.0 / (4.0 * K * norm)
        else:
            a = 4.0 * K * xi0
            bq = 4.0 * K * norm
            U_star = (-bq + math.sqrt(bq * bq + 4.0 * a)) / (2.0 * a)
        t_star = est.U_inverse(U_star)
        best = min(best, t_star)
    return best
