"""Certified brackets for lattice sums and the advection bilinear constants.

The continuity estimate ||v . grad w||_{n-1} <= K ||v||_n ||w||_n holds for
any K with K^2 an upper bound for the supremum over wavevectors k of the
kernel

    kernel_n(k) = (1+|k|^2)^(n-1) (2 pi)^(-d) *
                  sum_h |k-h|^2 / [(1+|h|^2)^n (1+|k-h|^2)^n].

Each kernel value and the limiting lattice sum

    sigma_n = (2 pi)^(-d) sum_h (1+|h|^2)^(-n)

are enclosed in rigorous lower/upper brackets: the lower end is a finite
partial sum, the upper end adds a closed-form tail bound.  The final
constant is the round-up, at two significant digits, of the square root of
the larger of the boxed supremum and the sigma bracket; rounding down would
invalidate every certificate built on top of it.

The supremum over all of Z^d is taken as max(observed box sup, sigma upper
end).  That the sup is not exceeded outside the searched box is numerical
evidence, not a theorem; every emitted result records this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .fields import WaveVector
from .rounding import ceil_sig

Lattice = str  # "nonzero" (mean-free fields) or "full"

SUP_EVIDENCE_NOTE = (
    "sup over k taken as max(box sup, limit bracket); equality of the sup "
    "with the large-k limit is numerical evidence, not proved"
)


@dataclass(frozen=True)
class Bracket:
    """A certified enclosure lo <= value <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bracket ends must be finite")
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError(f"invalid bracket [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Bracket") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


@dataclass(frozen=True)
class CutoffPolicy:
    """Cutoff choices controlling the finite parts of the lattice sums.

    ``cutoff_of_k`` gives the per-k truncation radius; it must be at least
    2 sqrt(d) everywhere and grow linearly, alpha |k| <= cutoff <= beta |k|
    for |k| >= chi with alpha > 1.  ``radial`` declares that the cutoff
    depends on k only through |k|, which makes the kernel invariant under
    coordinate permutations and sign flips and lets the box scan visit one
    representative per symmetry orbit.
    """

    name: str
    lambda_sigma: float
    cutoff_of_k: Callable[[np.ndarray], float]
    search_box: int
    alpha: float
    beta: float
    chi: float
    radial: bool = True
    sigma_tail: str = "closed-form"  # or "integral"

    def validate(self, d: int) -> None:
        floor = 2.0 * math.sqrt(d)
        if self.lambda_sigma < floor:
            raise ValueError(f"lambda_sigma must be >= 2 sqrt(d) = {floor:.3f}")
        if self.alpha <= 1.0:
            raise ValueError("cutoff growth slope alpha must exceed 1")


def default_policy(n: float, d: int, search_box: int | None = None, lambda_sigma: float | None = None) -> CutoffPolicy:
    """Cutoff policy used when the caller does not supply one.

    The (n, d) = (2, 3) and (4, 3) policies are the ones the reference
    constants were produced with; other pairs get cutoff max(2 sqrt(d), 3|k|).
    """
    if d == 3 and n == 2:
        box = 10 if search_box is None else search_box
        return CutoffPolicy(
            name="n2d3",
            lambda_sigma=250.0 if lambda_sigma is None else lambda_sigma,
            cutoff_of_k=lambda k: 24.0 if _norm(k) < 4.0 else 6.0 * _norm(k),
            search_box=box,
            alpha=6.0,
            beta=6.0,
            chi=4.0,
        )
    if d == 3 and n == 4:
        box = 6 if search_box is None else search_box
        return CutoffPolicy(
            name="n4d3",
            lambda_sigma=250.0 if lambda_sigma is None else lambda_sigma,
            cutoff_of_k=lambda k: 10.0 if _norm(k) < 10.0 / 3.0 else 3.0 * _norm(k),
            search_box=box,
            alpha=3.0,
            beta=3.0,
            chi=10.0 / 3.0,
        )
    floor = 2.0 * math.sqrt(d)
    box = 6 if search_box is None else search_box
    return CutoffPolicy(
        name=f"generic-n{n}-d{d}",
        lambda_sigma=250.0 if lambda_sigma is None else lambda_sigma,
        cutoff_of_k=lambda k: max(floor, 3.0 * _norm(k)),
        search_box=box,
        alpha=3.0,
        beta=3.0,
        chi=floor / 3.0,
    )


def reduced_policy(n: float, d: int) -> CutoffPolicy:
    """Fast policy: lambda = 60 with the sharper integral tail, small box."""
    base = default_policy(n, d)
    return CutoffPolicy(
        name=base.name + "-reduced",
        lambda_sigma=60.0,
        cutoff_of_k=base.cutoff_of_k,
        search_box=min(base.search_box, 4),
        alpha=base.alpha,
        beta=base.beta,
        chi=base.chi,
        radial=base.radial,
        sigma_tail="integral",
    )


def _norm(k) -> float:
    a = np.asarray(k, dtype=float)
    return float(math.sqrt(float(a @ a)))


def _tail_prefactor(d: int) -> float:
    # (2 pi)^(-d) * 2 pi^(d/2) / Gamma(d/2)
    return 2.0 ** (1 - d) * math.pi ** (-d / 2.0) / math.gamma(d / 2.0)


def _closed_form_tail(n: float, d: int, lam: float) -> float:
    """Tail bound sum_{|h| >= lam} (2 pi)^(-d) (1+|h|^2)^(-n), lam >= 2 sqrt(d)."""
    num = (1.0 + d) ** n
    den = 2.0 ** (d - 1) * math.pi ** (d / 2.0) * math.gamma(d / 2.0) * (2.0 * n - d) * (
        lam - math.sqrt(d)
    ) ** (2.0 * n - d)
    return num / den


def _integral_tail(n: float, d: int, lam: float) -> float:
    """Sharper rigorous tail: the annulus-comparison integral, unweakened.

    Bounds the same tail by C_d * int_{lam - 2 sqrt(d)}^inf (t+sqrt(d))^(d-1)
    (1+t^2)^(-n) dt.  The quadrature error estimate is inflated and added so
    the returned number stays an upper bound.
    """
    lo = lam - 2.0 * math.sqrt(d)
    sd = math.sqrt(d)
    val, err = quad(lambda t: (t + sd) ** (d - 1) * (1.0 + t * t) ** (-n), lo, np.inf, epsabs=1e-14, epsrel=1e-12)
    return _tail_prefactor(d) * (val + 10.0 * abs(err))


@lru_cache(maxsize=16)
def _radial_counts(d: int, r2max: int) -> np.ndarray:
    """counts[q] = number of lattice points h in Z^d with |h|^2 = q <= r2max."""
    r = math.isqrt(r2max)
    counts = np.zeros(r2max + 1, dtype=np.int64)
    counts[0] = 1
    for x in range(1, r + 1):
        counts[x * x] += 2
    out = counts
    for _ in range(d - 1):
        nxt = np.zeros(r2max + 1, dtype=np.int64)
        nxt += out  # x = 0 shift
        for x in range(1, r + 1):
            s = x * x
            if s > r2max:
                break
            nxt[s:] += 2 * out[: r2max + 1 - s]
        out = nxt
    return out


def sigma_partial_sum(n: float, d: int, lattice: Lattice, lam: float) -> float:
    """(2 pi)^(-d) sum over |h| < lam of (1+|h|^2)^(-n), in increasing |h|^2.

    Radial shells are counted exactly and the shell contributions are added
    with compensated summation, so the partial sum carries no accumulation
    error worth tracking.
    """
    q_max = math.ceil(lam * lam) - 1
    while (q_max + 1) < lam * lam - 1e-9:
        q_max += 1
    counts = _radial_counts(d, q_max)
    q0 = 1 if lattice == "nonzero" else 0
    terms = []
    for q in range(q0, q_max + 1):
        c = int(counts[q])
        if c:
            terms.append(c * (1.0 + q) ** (-n))
    return (2.0 * math.pi) ** (-d) * math.fsum(terms)


def sigma_bracket(
    n: float,
    d: int,
    lattice: Lattice = "nonzero",
    lam: float = 250.0,
    tail: str = "closed-form",
) -> Bracket:
    """Certified enclosure of sigma_n = (2 pi)^(-d) sum_h (1+|h|^2)^(-n).

    The lower end is the partial sum over |h| < lam; the upper end adds the
    tail bound.  ``tail="closed-form"`` uses the standard closed-form bound,
    ``tail="integral"`` the sharper annulus-integral bound (both rigorous).
    """
    if lattice not in ("nonzero", "full"):
        raise ValueError(f"unknown lattice {lattice!r}")
    if n <= d / 2:
        raise ValueError(f"sigma_{n} diverges for n <= d/2 = {d / 2}")
    if lam < 2.0 * math.sqrt(d):
        raise ValueError(f"cutoff lambda must be >= 2 sqrt(d) = {2 * math.sqrt(d):.4f}")
    lo = sigma_partial_sum(n, d, lattice, lam)
    if tail == "closed-form":
        delta = _closed_form_tail(n, d, lam)
    elif tail == "integral":
        delta = min(_closed_form_tail(n, d, lam), _integral_tail(n, d, lam))
    else:
        raise ValueError(f"unknown tail mode {tail!r}")
    return Bracket(lo, lo + delta)


@lru_cache(maxsize=8)
def _sorted_ball(d: int, radius_ceil: int, lattice: Lattice):
    """Lattice points with |h| < radius_ceil + 1, sorted by |h|^2."""
    r = radius_ceil
    axes = np.arange(-r, r + 1, dtype=np.int32)
    grids = np.meshgrid(*([axes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    hh = np.sum(pts.astype(np.int64) ** 2, axis=1)
    keep = hh <= r * r
    if lattice == "nonzero":
        keep &= hh > 0
    pts, hh = pts[keep], hh[keep]
    order = np.argsort(hh, kind="stable")
    pts = pts[order].astype(np.float64)
    hh = hh[order].astype(np.float64)
    return pts, hh


def _pow_neg(base: np.ndarray, n: float) -> np.ndarray:
    if n == int(n) and 1 <= int(n) <= 8:
        acc = base
        for _ in range(int(n) - 1):
            acc = acc * base
        return 1.0 / acc
    return base ** (-n)


def _small_lambda(k: np.ndarray, cutoff: float) -> float:
    """The prefactor lambda(k) entering the kernel tail bound."""
    kk = float(np.dot(k, k))
    nk = math.sqrt(kk)
    if cutoff < nk:
        return 1.0 + kk
    return (1.0 + kk) / (1.0 + (cutoff - nk) ** 2)


def kernel_tail(k, n: float, d: int, cutoff: float) -> float:
    lam_k = _small_lambda(np.asarray(k, dtype=float), cutoff)
    num = (1.0 + d) ** n * lam_k ** (n - 1.0)
    den = 2.0 ** (d - 1) * math.pi ** (d / 2.0) * math.gamma(d / 2.0) * (2.0 * n - d) * (
        cutoff - math.sqrt(d)
    ) ** (2.0 * n - d)
    return num / den


def kernel_partial_sum(
    k,
    n: float,
    d: int,
    lattice: Lattice,
    cutoff: float,
    ball: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> float:
    """Truncated kernel sum over |h| < cutoff (exact arithmetic per term).

    ``ball`` optionally supplies preloaded (points, |h|^2, (1+|h|^2)^-n)
    arrays sorted by |h|^2 and covering at least the cutoff, so a box scan
    materialises the lattice ball only once.
    """
    kv = np.asarray(k, dtype=float)
    if ball is None:
        pts, hh = _sorted_ball(d, math.ceil(cutoff), lattice)
        power_h = _pow_neg(1.0 + hh, n)
    else:
        pts, hh, power_h = ball
        if hh.size and hh[-1] < cutoff * cutoff - 1.0:
            raise ValueError("preloaded ball smaller than the requested cutoff")
    idx = int(np.searchsorted(hh, cutoff * cutoff, side="left"))
    pts, hh, power_h = pts[:idx], hh[:idx], power_h[:idx]
    kk = float(kv @ kv)
    kh2 = kk - 2.0 * (pts @ kv) + hh
    base = 1.0 + kh2
    total = float(np.sum(kh2 * power_h * _pow_neg(base, n)))
    return (1.0 + kk) ** (n - 1.0) / (2.0 * math.pi) ** d * total


def kernel_bracket(
    k,
    n: float,
    d: int,
    lattice: Lattice = "nonzero",
    cutoff: float | Callable[[np.ndarray], float] | None = None,
    ball=None,
) -> Bracket:
    """Certified enclosure of kernel_n(k).

    ``cutoff`` may be a number, a callable of k, or None (default policy).
    """
    if n <= d / 2:
        raise ValueError(f"kernel sum diverges for n <= d/2 = {d / 2}")
    kv = np.asarray(k, dtype=float)
    if cutoff is None:
        cut = default_policy(n, d).cutoff_of_k(kv)
    elif callable(cutoff):
        cut = float(cutoff(kv))
    else:
        cut = float(cutoff)
    if cut < 2.0 * math.sqrt(d):
        raise ValueError(f"cutoff {cut} below the admissible floor 2 sqrt(d)")
    lo = kernel_partial_sum(kv, n, d, lattice, cut, ball=ball)
    return Bracket(lo, lo + kernel_tail(kv, n, d, cut))


def _box_representatives(d: int, radius: int, radial: bool) -> list[WaveVector]:
    """Nonzero box points; one per signed-permutation orbit when radial."""
    from itertools import combinations_with_replacement, product

    if radial:
        reps = [
            k
            for k in combinations_with_replacement(range(radius + 1), d)
            if any(k)
        ]
        return [tuple(k) for k in reps]
    return [k for k in product(range(-radius, radius + 1), repeat=d) if any(k)]


@dataclass(frozen=True)
class BilinearConstant:
    """A certified advection constant with its full audit trail."""

    n: float
    d: int
    lattice: Lattice
    value: float
    sup_bracket: Bracket
    sup_argmax: WaveVector
    sigma: Bracket
    policy: CutoffPolicy
    evidence_note: str = SUP_EVIDENCE_NOTE
    box_points_scanned: int = 0

    def __post_init__(self):
        if self.value < math.sqrt(max(self.sup_bracket.hi, self.sigma.hi)) - 1e-12:
            raise ValueError("constant below its own certified evidence")


def bilinear_constant(
    n: float,
    d: int,
    lattice: Lattice = "nonzero",
    policy: CutoffPolicy | None = None,
) -> BilinearConstant:
    """Compute a certified constant for ||v . grad w||_{n-1} <= K ||v||_n ||w||_n."""
    if n <= d / 2:
        raise ValueError(f"need n > d/2, got n={n}, d={d}")
    pol = policy or default_policy(n, d)
    pol.validate(d)
    reps = _box_representatives(d, pol.search_box, pol.radial)
    if not reps:
        raise ValueError("empty search box")
    max_cut = max(float(pol.cutoff_of_k(np.asarray(k, dtype=float))) for k in reps)
    pts, hh = _sorted_ball(d, math.ceil(max_cut), lattice)
    ball = (pts, hh, _pow_neg(1.0 + hh, n))
    sup_lo = 0.0
    sup_hi = 0.0
    argmax: WaveVector = reps[0]
    for k in reps:
        br = kernel_bracket(k, n, d, lattice, pol.cutoff_of_k, ball=ball)
        if br.hi > sup_hi:
            sup_hi = br.hi
            argmax = k
        sup_lo = max(sup_lo, br.lo)
    sigma = sigma_bracket(n, d, lattice, pol.lambda_sigma, tail=pol.sigma_tail)
    value = ceil_sig(math.sqrt(max(sup_hi, sigma.hi)), 2)
    n_scanned = len(reps) if not pol.radial else (2 * pol.search_box + 1) ** d - 1
    return BilinearConstant(
        n=n,
        d=d,
        lattice=lattice,
        value=value,
        sup_bracket=Bracket(sup_lo, sup_hi),
        sup_argmax=argmax,
        sigma=sigma,
        policy=pol,
        box_points_scanned=n_scanned,
    )


@lru_cache(maxsize=32)
def cached_constant(n: float, d: int, lattice: Lattice = "nonzero") -> BilinearConstant:
    """Process-wide cache for the default-policy constants."""
    return bilinear_constant(n, d, lattice)
