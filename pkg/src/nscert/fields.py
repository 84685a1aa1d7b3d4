"""Fourier-side representation of real vector fields on the d-torus.

A field is a finite collection of complex d-vector coefficients indexed by
integer wavevectors.  Only one representative of each ``{k, -k}`` pair is
stored physically; the coefficient at ``-k`` is synthesised as the complex
conjugate on read, so the reality constraint ``c(-k) == conj(c(k))`` holds
by construction.  The zero wavevector (the mean mode) may be stored and is
forced real.

All operations are pure: fields are immutable values, functions return new
fields.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TextIO

import numpy as np

from .quadrature import adaptive_simpson

WaveVector = tuple[int, ...]

# Relative tolerance for calling a field divergence free; double precision
# sums over <= 1e4 modes keep roughly 12 reliable digits.
DIV_TOLERANCE = 1e-10
ROUNDTRIP_TOLERANCE = 1e-12


def _as_wavevector(k: Iterable[int]) -> WaveVector:
    kk = tuple(int(x) for x in k)
    return kk


def pair_representative(k: WaveVector) -> tuple[WaveVector, bool]:
    """Canonical representative of ``{k, -k}``.

    Returns ``(rep, conjugated)`` where ``conjugated`` is True when the
    stored coefficient must be conjugated to give the coefficient at ``k``.
    """
    neg = tuple(-x for x in k)
    if k >= neg:
        return k, False
    return neg, True


class FourierField:
    """Immutable spectral vector field on the d-torus."""

    __slots__ = ("dim", "_half", "__dict__")

    def __init__(self, dim: int, modes: Mapping[WaveVector, np.ndarray] | None = None):
        if dim < 2:
            raise ValueError(f"dimension must be >= 2, got {dim}")
        self.dim = int(dim)
        half: dict[WaveVector, np.ndarray] = {}
        if modes:
            acc: dict[WaveVector, list[np.ndarray]] = {}
            for k, c in modes.items():
                kk = _as_wavevector(k)
                if len(kk) != dim:
                    raise ValueError(f"wavevector {kk} has wrong dimension (expected {dim})")
                cv = np.asarray(c, dtype=complex).reshape(dim)
                rep, conj = pair_representative(kk)
                acc.setdefault(rep, []).append(cv.conj() if conj else cv)
            for rep, parts in acc.items():
                cv = sum(parts) / len(parts)
                if rep == (0,) * dim:
                    cv = cv.real.astype(complex)
                if np.any(cv != 0):
                    half[rep] = cv
        object.__setattr__(self, "_half", half)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "FourierField":
        return cls(dim, {})

    @classmethod
    def from_modes(cls, dim: int, modes: Mapping[WaveVector, Sequence[complex]]) -> "FourierField":
        return cls(dim, modes)

    # -- basic queries ---------------------------------------------------------

    def coeff(self, k: Iterable[int]) -> np.ndarray:
        kk = _as_wavevector(k)
        rep, conj = pair_representative(kk)
        c = self._half.get(rep)
        if c is None:
            return np.zeros(self.dim, dtype=complex)
        return c.conj() if conj else c

    @property
    def n_stored(self) -> int:
        return len(self._half)

    @property
    def is_zero(self) -> bool:
        return not self._half

    @property
    def has_mean_mode(self) -> bool:
        return (0,) * self.dim in self._half

    def representatives(self) -> Iterator[tuple[WaveVector, np.ndarray]]:
        for k in sorted(self._half):
            yield k, self._half[k]

    def modes(self) -> Iterator[tuple[WaveVector, np.ndarray]]:
        """Iterate over the full symmetric mode set, conjugates included."""
        zero = (0,) * self.dim
        for k in sorted(self._half):
            c = self._half[k]
            yield k, c
            if k != zero:
                yield tuple(-x for x in k), c.conj()

    def support(self) -> frozenset[WaveVector]:
        return frozenset(k for k, _ in self.modes())

    @cached_property
    def _full_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(M, d)`` integer wavevectors and complex coefficients."""
        zero = (0,) * self.dim
        ks: list[WaveVector] = []
        cs: list[np.ndarray] = []
        for k in sorted(self._half):
            c = self._half[k]
            ks.append(k)
            cs.append(c)
            if k != zero:
                ks.append(tuple(-x for x in k))
                cs.append(c.conj())
        if not ks:
            return np.zeros((0, self.dim), dtype=np.int64), np.zeros((0, self.dim), dtype=complex)
        return np.asarray(ks, dtype=np.int64), np.asarray(cs, dtype=complex)

    @property
    def wavevectors(self) -> np.ndarray:
        return self._full_arrays[0]

    @property
    def coefficients(self) -> np.ndarray:
        return self._full_arrays[1]

    # -- algebra ---------------------------------------------------------------

    def _combine(self, other: "FourierField", sign: float) -> "FourierField":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out: dict[WaveVector, np.ndarray] = dict(self._half)
        for k, c in other._half.items():
            if k in out:
                out[k] = out[k] + sign * c
            else:
                out[k] = sign * c
        return FourierField(self.dim, out)

    def __add__(self, other: "FourierField") -> "FourierField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return self._combine(other, -1.0)

    def scale(self, a: float) -> "FourierField":
        """Multiply by a real scalar (complex scalars would break reality)."""
        return FourierField(self.dim, {k: a * c for k, c in self._half.items()})

    def __neg__(self) -> "FourierField":
        return self.scale(-1.0)

    def drop_mean(self) -> "FourierField":
        zero = (0,) * self.dim
        if zero not in self._half:
            return self
        return FourierField(self.dim, {k: c for k, c in self._half.items() if k != zero})

    def mean(self) -> np.ndarray:
        """Mean value of the field, ``(2 pi)^(-d/2)`` times the zero coefficient."""
        c0 = self.coeff((0,) * self.dim)
        return ((2.0 * math.pi) ** (-self.dim / 2.0) * c0).real

    def restrict(self, kept: "GalerkinSet | frozenset[WaveVector] | set[WaveVector]") -> "FourierField":
        members = kept.members if isinstance(kept, GalerkinSet) else frozenset(kept)
        out = {}
        zero = (0,) * self.dim
        for k, c in self._half.items():
            if k in members or (k != zero and tuple(-x for x in k) in members):
                out[k] = c
        return FourierField(self.dim, out)

    def sobolev_norm(self, n: float) -> float:
        return sobolev_norm(self, n)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"FourierField(d={self.dim}, stored={self.n_stored})"


@dataclass(frozen=True)
class GalerkinSet:
    """Finite symmetric set of retained wavevectors, zero excluded."""

    dim: int
    members: frozenset[WaveVector]

    def __post_init__(self):
        zero = (0,) * self.dim
        if zero in self.members:
            raise ValueError("the zero wavevector cannot belong to a Galerkin set")
        for k in self.members:
            if len(k) != self.dim:
                raise ValueError(f"wavevector {k} has wrong dimension")
            if tuple(-x for x in k) not in self.members:
                raise ValueError(f"set is not symmetric: missing {tuple(-x for x in k)}")

    @classmethod
    def from_box(cls, dim: int, radius: int) -> "GalerkinSet":
        """All nonzero wavevectors with sup-norm at most ``radius``."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        rng = range(-radius, radius + 1)
        members = set()
        from itertools import product

        for k in product(rng, repeat=dim):
            if any(k):
                members.add(k)
        return cls(dim, frozenset(members))

    @classmethod
    def from_members(cls, dim: int, members: Iterable[Iterable[int]]) -> "GalerkinSet":
        return cls(dim, frozenset(_as_wavevector(k) for k in members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, k) -> bool:
        return _as_wavevector(k) in self.members

    def sorted_members(self) -> list[WaveVector]:
        return sorted(self.members)

    @cached_property
    def resolution(self) -> float:
        """inf over excluded nonzero k of sqrt(1 + |k|^2).

        The infimum over the complement of an empty set is attained at the
        nearest nonzero lattice point, |k|^2 = 1.
        """
        if not self.members:
            return math.sqrt(2.0)
        radius = max(max(abs(x) for x in k) for k in self.members)
        best = None
        from itertools import product

        scan = range(-(radius + 1), radius + 2)
        for k in product(scan, repeat=self.dim):
            if not any(k) or k in self.members:
                continue
            q = 1 + sum(x * x for x in k)
            if best is None or q < best:
                best = q
        # every k outside the scanned box has |k|^2 >= (radius+1)^2, which the
        # boundary shell already realises, so the scan is exhaustive
        return math.sqrt(best)


@dataclass(frozen=True)
class ForcingModel:
    """Time-dependent spectral forcing with a declared validity horizon."""

    dim: int
    evaluate: Callable[[float], FourierField]
    horizon: float = math.inf
    label: str = "forcing"

    def __call__(self, t: float) -> FourierField:
        if t < 0.0 or t > self.horizon:
            raise ValueError(
                f"{self.label} evaluated at t={t}, outside its declared horizon [0, {self.horizon}]"
            )
        return self.evaluate(t)

    @classmethod
    def zero(cls, dim: int) -> "ForcingModel":
        z = FourierField.zero(dim)
        return cls(dim, lambda t: z, math.inf, "zero forcing")

    @classmethod
    def constant(cls, f: FourierField) -> "ForcingModel":
        return cls(f.dim, lambda t: f, math.inf, "constant forcing")

    @classmethod
    def exponential(cls, f: FourierField, rate: float = 2.0) -> "ForcingModel":
        return cls(f.dim, lambda t: f.scale(math.exp(-rate * t)), math.inf, "exponential forcing")


@dataclass(frozen=True)
class FrameReduction:
    """Moving-frame data removing the mean velocity.

    ``mean_path(t)`` is the mean velocity m(t); ``shift_path(t)`` is its
    running integral h(t), so h(0) = 0 and m(0) = m0.
    """

    m0: np.ndarray
    mean_path: Callable[[float], np.ndarray]
    shift_path: Callable[[float], np.ndarray]

    @classmethod
    def trivial(cls, dim: int) -> "FrameReduction":
        z = np.zeros(dim)
        return cls(z, lambda t: z, lambda t: z)


# -- norms and structural checks ----------------------------------------------


def sobolev_norm(f: FourierField, n: float) -> float:
    """Weighted l2 norm sqrt(sum_k (1+|k|^2)^n |f_k|^2) over stored modes."""
    ks, cs = f._full_arrays
    if ks.shape[0] == 0:
        return 0.0
    kk = np.sum(ks * ks, axis=1).astype(float)
    w = (1.0 + kk) ** n
    return float(math.sqrt(np.sum(w * np.sum(np.abs(cs) ** 2, axis=1))))


def mean_and_divergence(f: FourierField) -> tuple[np.ndarray, float]:
    """Mean velocity and the worst per-mode divergence defect max_k |k . f_k|."""
    ks, cs = f._full_arrays
    if ks.shape[0] == 0:
        return np.zeros(f.dim), 0.0
    defect = float(np.max(np.abs(np.sum(ks * cs, axis=1))))
    return f.mean(), defect


def is_divergence_free(f: FourierField, rel_tol: float = DIV_TOLERANCE) -> bool:
    ks, cs = f._full_arrays
    if ks.shape[0] == 0:
        return True
    _, defect = mean_and_divergence(f)
    scale = float(np.max(np.sqrt(np.sum(ks * ks, axis=1)) * np.max(np.abs(cs), axis=1).clip(min=0)))
    return defect <= rel_tol * max(scale, 1e-300)


def leray_project(f: FourierField) -> FourierField:
    """Mode-wise orthogonal projection onto the plane perpendicular to k.

    Annihilates gradient fields, fixes divergence-free ones, and is the
    identity on the mean mode.
    """
    out: dict[WaveVector, np.ndarray] = {}
    zero = (0,) * f.dim
    for k, c in f._half.items():
        if k == zero:
            out[k] = c
            continue
        kv = np.asarray(k, dtype=float)
        k2 = float(kv @ kv)
        out[k] = c - (kv @ c) / k2 * kv
    return FourierField(f.dim, out)


# -- the advection bilinear map -------------------------------------------------


def _support_filter(dim: int, support) -> Callable[[np.ndarray], np.ndarray] | None:
    """Row mask builder for an optional output-support restriction."""
    if support is None:
        return None
    if isinstance(support, int):
        r = support

        def box_mask(ks: np.ndarray) -> np.ndarray:
            inside = np.all(np.abs(ks) <= r, axis=1)
            return inside & np.any(ks != 0, axis=1)

        return box_mask
    members = support.members if isinstance(support, GalerkinSet) else frozenset(support)

    def set_mask(ks: np.ndarray) -> np.ndarray:
        return np.fromiter((tuple(row) in members for row in ks), dtype=bool, count=ks.shape[0])

    return set_mask


def advect(v: FourierField, w: FourierField, support=None) -> FourierField:
    """The advection field (v . grad) w computed by exact convolution.

    The sum runs over the full Minkowski sum of the two finite supports, so
    no aliasing policy is involved.  Passing ``support`` (a GalerkinSet, a
    box radius, or a set of wavevectors) restricts the output modes after
    the exact convolution.
    """
    if v.dim != w.dim:
        raise ValueError(f"dimension mismatch: {v.dim} vs {w.dim}")
    d = v.dim
    kv, cv = v._full_arrays
    kw, cw = w._full_arrays
    if kv.shape[0] == 0 or kw.shape[0] == 0:
        return FourierField.zero(d)

    nv, nw = kv.shape[0], kw.shape[0]
    A = np.repeat(np.arange(nv), nw)
    B = np.tile(np.arange(nw), nv)
    out_k = kv[A] + kw[B]
    mask_fn = _support_filter(d, support)
    if mask_fn is not None:
        keep = mask_fn(out_k)
        if not np.any(keep):
            return FourierField.zero(d)
        A, B, out_k = A[keep], B[keep], out_k[keep]

    # (v . grad w)_k = i (2 pi)^(-d/2) sum_h [v_h . (k - h)] w_{k-h}
    dots = np.einsum("pd,pd->p", cv[A], kw[B].astype(float))
    vals = (1j * (2.0 * math.pi) ** (-d / 2.0)) * dots[:, None] * cw[B]

    uniq, inv = np.unique(out_k, axis=0, return_inverse=True)
    coeffs = np.zeros((uniq.shape[0], d), dtype=complex)
    for j in range(d):
        coeffs[:, j] = np.bincount(inv, weights=vals[:, j].real, minlength=uniq.shape[0])
        coeffs[:, j] += 1j * np.bincount(inv, weights=vals[:, j].imag, minlength=uniq.shape[0])
    return FourierField(d, {tuple(int(x) for x in uniq[i]): coeffs[i] for i in range(uniq.shape[0])})


def nonlinearity(f: FourierField, t: float, forcing: ForcingModel | None, support=None) -> FourierField:
    """-Leray(f . grad f) + forcing(t), optionally restricted to ``support``.

    For divergence-free f the mean mode of (f . grad f) vanishes identically,
    so the result stays zero-mean.
    """
    # the mean of (f . grad f) vanishes identically for solenoidal f; dropping
    # it here keeps the roundoff of stored coefficients out of the mean mode
    quad = -leray_project(advect(f, f, support=support)).drop_mean()
    if forcing is None:
        return quad
    xi = forcing(t)
    if support is not None:
        xi = xi.restrict(support if not isinstance(support, int) else _box_set(f.dim, support))
    return quad + xi


def _box_set(dim: int, radius: int) -> frozenset[WaveVector]:
    return GalerkinSet.from_box(dim, radius).members


# -- Galerkin truncation ---------------------------------------------------------


def galerkin_project(f: FourierField, G: GalerkinSet) -> FourierField:
    """Drop all modes outside the retained set."""
    if f.dim != G.dim:
        raise ValueError("dimension mismatch")
    return f.drop_mean().restrict(G)


def galerkin_resolution(G: GalerkinSet, p: float, n: float) -> tuple[float, float]:
    """Resolution |G| and the truncation factor 1 / |G|^(p-n).

    The factor bounds ||(1-P_G) v||_n by ||v||_p / |G|^(p-n) for n <= p.
    """
    if n > p:
        raise ValueError(f"need n <= p, got n={n} > p={p}")
    res = G.resolution
    return res, res ** (-(p - n))


# -- zero-mean frame reduction ----------------------------------------------------


def phase_shift(f: FourierField, h: np.ndarray) -> FourierField:
    """Multiply mode k by exp(i k . h); the spectral image of x -> x + h."""
    hv = np.asarray(h, dtype=float)
    out = {}
    for k, c in f._half.items():
        out[k] = c * cmath.exp(1j * float(np.dot(k, hv)))
    return FourierField(f.dim, out)


def reduce_to_zero_mean(
    v0: FourierField,
    eta: ForcingModel,
    quad_tol: float = 1e-10,
) -> tuple[FourierField, ForcingModel, FrameReduction]:
    """Change to the moving frame in which the mean velocity vanishes.

    Returns the zero-mean datum, the frame-shifted forcing (whose mode-k
    coefficient picks up the phase exp(i k . h(t))), and the frame data.
    The mean path integrates the forcing mean; the shift path integrates
    the mean path, both by adaptive Simpson quadrature.
    """
    d = v0.dim
    m0 = v0.mean()
    f0 = v0.drop_mean()

    def mean_of_eta(t: float) -> np.ndarray:
        return eta(t).mean()

    def mean_path(t: float) -> np.ndarray:
        comps = [
            adaptive_simpson(lambda s, j=j: float(mean_of_eta(s)[j]), 0.0, t, tol=quad_tol)
            for j in range(d)
        ]
        return m0 + np.asarray(comps)

    def shift_path(t: float) -> np.ndarray:
        comps = [
            adaptive_simpson(lambda s, j=j: float(mean_path(s)[j]), 0.0, t, tol=quad_tol)
            for j in range(d)
        ]
        return np.asarray(comps)

    frame = FrameReduction(m0=m0, mean_path=mean_path, shift_path=shift_path)

    def shifted(t: float) -> FourierField:
        return phase_shift(eta(t).drop_mean(), frame.shift_path(t))

    xi = ForcingModel(d, shifted, eta.horizon, "frame-reduced forcing")
    return f0, xi, frame


def reconstruct_frame(phi: Callable[[float], FourierField], frame: FrameReduction, t: float) -> FourierField:
    """Undo the frame reduction at time t: restore phases and the mean mode."""
    state = phi(t) if callable(phi) else phi
    h = frame.shift_path(t)
    out = phase_shift(state, -np.asarray(h))
    m = frame.mean_path(t)
    d = out.dim
    modes = {k: c for k, c in out._half.items()}
    c0 = (2.0 * math.pi) ** (d / 2.0) * np.asarray(m, dtype=complex)
    if np.any(c0 != 0):
        modes[(0,) * d] = c0
    return FourierField(d, modes)


# -- synthetic data ---------------------------------------------------------------


def random_solenoidal_field(
    seed: int,
    d: int,
    n: float,
    box_radius: int,
    target_norm: float,
    shell: tuple[int, int] | None = None,
) -> FourierField:
    """Deterministic random zero-mean divergence-free field with a given norm.

    Draws Gaussian coefficients on the box, Leray-projects, and rescales so
    that the Sobolev-n norm equals ``target_norm``.  ``shell`` optionally
    keeps only modes with shell[0] <= |k|^2 <= shell[1].
    """
    if target_norm < 0:
        raise ValueError("target_norm must be nonnegative")
    rng = np.random.default_rng(seed)
    box = GalerkinSet.from_box(d, box_radius)
    modes = {}
    for k in box.sorted_members():
        rep, conj = pair_representative(k)
        if rep != k:
            continue
        if shell is not None:
            q = sum(x * x for x in k)
            if not (shell[0] <= q <= shell[1]):
                continue
        c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        modes[k] = c
    f = leray_project(FourierField(d, modes))
    nrm = sobolev_norm(f, n)
    if nrm == 0.0:
        raise ValueError("box too small to host a nonzero solenoidal mode")
    if target_norm == 0.0:
        return FourierField.zero(d)
    return f.scale(target_norm / nrm)


# -- plain-text serialization ------------------------------------------------------


def write_field(f: FourierField, out: TextIO) -> None:
    """One record per stored mode: k1 .. kd  re1 im1 .. red imd."""
    zero_mean = 0 if f.has_mean_mode else 1
    _, defect = mean_and_divergence(f)
    div_free = 1 if is_divergence_free(f) else 0
    out.write(f"# nscert-field d={f.dim} zero_mean={zero_mean} div_free={div_free}\n")
    for k, c in f.representatives():
        cols = [str(x) for x in k]
        for j in range(f.dim):
            cols.append(repr(float(c[j].real)))
            cols.append(repr(float(c[j].imag)))
        out.write(" ".join(cols) + "\n")


def read_field(inp: TextIO) -> FourierField:
    header = inp.readline().strip()
    if not header.startswith("# nscert-field"):
        raise ValueError("missing field header line")
    fields = dict(part.split("=") for part in header.split()[2:])
    d = int(fields["d"])
    modes: dict[WaveVector, np.ndarray] = {}
    for lineno, line in enumerate(inp, start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split()
        if len(cols) != 3 * d:
            raise ValueError(f"line {lineno}: expected {3 * d} columns, got {len(cols)}")
        k = tuple(int(x) for x in cols[:d])
        c = np.array(
            [float(cols[d + 2 * j]) + 1j * float(cols[d + 2 * j + 1]) for j in range(d)],
            dtype=complex,
        )
        modes[k] = c
    return FourierField(d, modes)
