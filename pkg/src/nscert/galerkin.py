"""Finite-dimensional Galerkin dynamics and the fixed-point oracle.

The retained-mode system is diagonal in its linear part, so the integrator
uses the exact per-mode heat factor and treats only the projected
nonlinearity explicitly (integrating-factor RK4 with step doubling for the
error estimate).  This removes the stiffness of the Laplacian entirely.

The Picard oracle applies the Volterra integral operator repeatedly on a
shared fine time grid; the integral against the per-mode exponential kernel
is taken exactly over a piecewise-quadratic interpolant of the
nonlinearity, so the only discretisation error is the interpolation error
of the shared grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .fields import ForcingModel, FourierField, GalerkinSet


class IntegratorError(RuntimeError):
    def __init__(self, message: str, time_reached: float):
        super().__init__(f"{message} (integration reached t = {time_reached:.6g})")
        self.time_reached = time_reached


@dataclass(frozen=True)
class GalerkinSystem:
    """Retained-mode dynamics: d/dt phi = Laplacian phi + P_G(nonlinearity)."""

    G: GalerkinSet
    n: float
    p: float
    datum: FourierField
    forcing: ForcingModel | None = None
    quadratic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "datum", self.datum.drop_mean().restrict(self.G))

    @property
    def dim(self) -> int:
        return self.G.dim


class _Engine:
    """Vectorised evaluation kernel for one retained-mode set."""

    def __init__(self, system: GalerkinSystem):
        self.system = system
        d = system.dim
        self.modes: list = system.G.sorted_members()
        self.index = {k: i for i, k in enumerate(self.modes)}
        if self.modes:
            self.kvec = np.asarray(self.modes, dtype=np.int64)
        else:
            self.kvec = np.zeros((0, d), dtype=np.int64)
        self.kvec_f = self.kvec.astype(float)
        self.kk = np.sum(self.kvec_f * self.kvec_f, axis=1)
        self.d = d
        self.norm_const = (2.0 * math.pi) ** (-d / 2.0)
        self._build_plan()
        self._zero_forcing = system.forcing is None

    def _build_plan(self):
        M = len(self.modes)
        if M == 0:
            self.pair_a = np.zeros(0, dtype=np.int64)
            self.pair_b = np.zeros(0, dtype=np.int64)
            self.pair_out = np.zeros(0, dtype=np.int64)
            return
        A = np.repeat(np.arange(M), M)
        B = np.tile(np.arange(M), M)
        sums = self.kvec[A] + self.kvec[B]
        out = np.fromiter(
            (self.index.get(tuple(int(x) for x in row), -1) for row in sums),
            dtype=np.int64,
            count=sums.shape[0],
        )
        keep = out >= 0
        self.pair_a = A[keep]
        self.pair_b = B[keep]
        self.pair_out = out[keep]

    # -- conversions -----------------------------------------------------------

    def field_to_array(self, f: FourierField) -> np.ndarray:
        y = np.zeros((len(self.modes), self.d), dtype=complex)
        for k, c in f.modes():
            i = self.index.get(k)
            if i is not None:
                y[i] = c
        return y

    def array_to_field(self, y: np.ndarray) -> FourierField:
        return FourierField(self.d, {k: y[i] for i, k in enumerate(self.modes)})

    def norm(self, y: np.ndarray, n: float) -> float:
        if y.shape[0] == 0:
            return 0.0
        w = (1.0 + self.kk) ** n
        return float(math.sqrt(np.sum(w * np.sum(np.abs(y) ** 2, axis=1))))

    def div_defect(self, y: np.ndarray) -> float:
        if y.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(np.sum(self.kvec_f * y, axis=1))))

    # -- dynamics ----------------------------------------------------------------

    def _leray(self, c: np.ndarray) -> np.ndarray:
        if c.shape[0] == 0:
            return c
        kc = np.sum(self.kvec_f * c, axis=1)
        return c - (kc / self.kk)[:, None] * self.kvec_f

    def convolution(self, y: np.ndarray) -> np.ndarray:
        """Projected self-advection ( y . grad y ) restricted to the mode set."""
        M = len(self.modes)
        out = np.zeros((M, self.d), dtype=complex)
        if self.pair_a.size == 0:
            return out
        dots = np.einsum("pd,pd->p", y[self.pair_a], self.kvec_f[self.pair_b])
        vals = (1j * self.norm_const) * dots[:, None] * y[self.pair_b]
        for j in range(self.d):
            out[:, j] = np.bincount(self.pair_out, weights=vals[:, j].real, minlength=M)
            out[:, j] += 1j * np.bincount(self.pair_out, weights=vals[:, j].imag, minlength=M)
        return out

    def forcing_array(self, t: float) -> np.ndarray | None:
        if self._zero_forcing:
            return None
        return self.field_to_array(self.system.forcing(t))

    def nonlinear(self, y: np.ndarray, t: float) -> np.ndarray:
        if self.system.quadratic:
            out = -self._leray(self.convolution(y))
        else:
            out = np.zeros_like(y)
        xi = self.forcing_array(t)
        if xi is not None:
            out = out + xi
        return out

    def full_rhs(self, y: np.ndarray, t: float) -> np.ndarray:
        return -self.kk[:, None] * y + self.nonlinear(y, t)


def rhs(system: GalerkinSystem, state: FourierField, t: float) -> FourierField:
    """Right-hand side of the retained-mode system at one state."""
    eng = _Engine(system)
    return eng.array_to_field(eng.full_rhs(eng.field_to_array(state), t))


@dataclass
class Trajectory:
    """Accepted integrator nodes with cubic-Hermite dense evaluation."""

    system: GalerkinSystem
    times: np.ndarray
    states: list
    derivs: list
    engine: _Engine = field(repr=False, default=None)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def _locate(self, t: float) -> int:
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ValueError(f"t={t} outside the trajectory domain [0, {self.t_end}]")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), len(self.times) - 2)

    def array_at(self, t: float) -> np.ndarray:
        self._locate(t)
        if t <= self.times[0]:
            return self.states[0]
        if t >= self.times[-1]:
            return self.states[-1]
        i = self._locate(t)
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        y0, y1 = self.states[i], self.states[i + 1]
        f0, f1 = self.derivs[i], self.derivs[i + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def field_at(self, t: float) -> FourierField:
        return self.engine.array_to_field(self.array_at(t))

    def __call__(self, t: float) -> FourierField:
        return self.field_at(t)

    def norm_at(self, t: float, n: float) -> float:
        return self.engine.norm(self.array_at(t), n)

    def div_defect_at(self, t: float) -> float:
        return self.engine.div_defect(self.array_at(t))

    def node_norms(self, n: float) -> np.ndarray:
        return np.asarray([self.engine.norm(y, n) for y in self.states])


def _if_rk4_step(eng: _Engine, y: np.ndarray, t: float, h: float) -> np.ndarray:
    """One integrating-factor RK4 step; exponentials only ever decay."""
    e_full = np.exp(-h * eng.kk)[:, None]
    e_half = np.exp(-0.5 * h * eng.kk)[:, None]
    k1 = eng.nonlinear(y, t)
    k2 = eng.nonlinear(e_half * (y + 0.5 * h * k1), t + 0.5 * h)
    k3 = eng.nonlinear(e_half * y + 0.5 * h * k2, t + 0.5 * h)
    k4 = eng.nonlinear(e_full * y + h * e_half * k3, t + h)
    return e_full * y + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def integrate(
    system: GalerkinSystem,
    horizon: float,
    rtol: float = 1e-8,
    atol: float = 1e-12,
    h_initial: float = 1e-3,
    h_min: float = 1e-12,
    max_step: float | None = None,
) -> Trajectory:
    """Adaptive trajectory on [0, horizon] at the requested tolerance.

    Error control is by step doubling: one full step is compared against two
    half steps (classical Richardson estimate for a 4th-order one-step
    method); the half-step result is kept.  ``max_step`` caps the step size;
    diagnostics that differentiate the dense output need it, because the
    cubic Hermite interpolant between widely spaced nodes is less accurate
    than the nodes themselves.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    eng = _Engine(system)
    y = eng.field_to_array(system.datum)
    t = 0.0
    times = [0.0]
    states = [y]
    derivs = [eng.full_rhs(y, 0.0)]
    h = min(h_initial, horizon)
    if max_step is not None:
        h = min(h, max_step)
    while t < horizon - 1e-14:
        h = min(h, horizon - t)
        if max_step is not None:
            h = min(h, max_step)
        if h < h_min:
            raise IntegratorError("step size underflow", t)
        y_big = _if_rk4_step(eng, y, t, h)
        y_mid = _if_rk4_step(eng, y, t, 0.5 * h)
        y_two = _if_rk4_step(eng, y_mid, t + 0.5 * h, 0.5 * h)
        scale = atol + rtol * max(eng.norm(y, 0), eng.norm(y_two, 0), 1e-300)
        err = eng.norm(y_two - y_big, 0) / 15.0
        if err <= scale:
            t += h
            y = y_two
            times.append(t)
            states.append(y)
            derivs.append(eng.full_rhs(y, t))
            grow = 0.9 * (scale / max(err, 1e-300)) ** 0.2
            h *= min(5.0, max(1.0, grow))
        else:
            h *= max(0.2, 0.9 * (scale / err) ** 0.2)
    return Trajectory(system, np.asarray(times), states, derivs, engine=eng)


# -- Picard oracle ---------------------------------------------------------------


def _exp_moments(lam: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments int_0^delta exp(-lam (delta - s)) s^r ds for r = 0, 1, 2.

    Downward recurrence cancels catastrophically for small lam*delta, so a
    truncated series takes over there.
    """
    x = lam * delta
    small = x <= 0.5
    M0 = np.empty_like(lam)
    M1 = np.empty_like(lam)
    M2 = np.empty_like(lam)
    big = ~small
    if np.any(big):
        lb = lam[big]
        M0[big] = (1.0 - np.exp(-x[big])) / lb
        M1[big] = (delta - M0[big]) / lb
        M2[big] = (delta * delta - 2.0 * M1[big]) / lb
    if np.any(small):
        xs = x[small]
        for r, M in ((0, M0), (1, M1), (2, M2)):
            acc = np.zeros_like(xs)
            term = np.ones_like(xs) / math.factorial(r + 1)
            acc += term
            power = np.ones_like(xs)
            for m in range(1, 16):
                power = power * (-xs)
                acc += power / math.factorial(m + r + 1)
            M[small] = delta ** (r + 1) * math.factorial(r) * acc
    return M0, M1, M2


def _cell_weights(lam: np.ndarray, h: float, delta: float) -> tuple[np.ndarray, ...]:
    """Kernel-exact weights for the quadratic through nodes {0, h, 2h} on [0, delta]."""
    M0, M1, M2 = _exp_moments(lam, delta)
    W0 = (M2 - 3.0 * h * M1 + 2.0 * h * h * M0) / (2.0 * h * h)
    W1 = (2.0 * h * M1 - M2) / (h * h)
    W2 = (M2 - h * M1) / (2.0 * h * h)
    return W0, W1, W2


@dataclass
class PicardIterate:
    """One iterate of the Volterra operator, tabulated on the shared grid."""

    times: np.ndarray
    values: np.ndarray  # (n_nodes, M, d) complex
    engine: _Engine

    def node_norms(self, n: float) -> np.ndarray:
        return np.asarray([self.engine.norm(y, n) for y in self.values])

    def sup_diff(self, other: "PicardIterate", n: float) -> float:
        return float(max(self.engine.norm(a - b, n) for a, b in zip(self.values, other.values)))

    def field_at_node(self, j: int) -> FourierField:
        return self.engine.array_to_field(self.values[j])


def picard_iterate(
    system: GalerkinSystem,
    phi_ap,
    iterations: int,
    t_max: float,
    n_cells: int = 128,
) -> list[PicardIterate]:
    """Iterates of the Volterra operator starting from ``phi_ap``.

    ``phi_ap`` may be None (the zero approximation), a Trajectory, or a
    callable t -> FourierField.  The working space is the retained-mode set
    of ``system``; nodes are shared by all modes.  Returns the list
    [phi_0, phi_1, ..., phi_iterations].
    """
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    if iterations > 8:
        raise ValueError("iteration budget capped at 8 (cost grows with the convolution support)")
    eng = _Engine(system)
    n_nodes = 2 * n_cells + 1
    h = t_max / (n_nodes - 1)
    times = np.linspace(0.0, t_max, n_nodes)
    M = len(eng.modes)

    def sample(source) -> np.ndarray:
        vals = np.zeros((n_nodes, M, eng.d), dtype=complex)
        if source is None:
            return vals
        for j, t in enumerate(times):
            if isinstance(source, Trajectory):
                vals[j] = eng.field_to_array(source.field_at(float(t)))
            else:
                vals[j] = eng.field_to_array(source(float(t)))
        return vals

    f0 = eng.field_to_array(system.datum)
    iterates = [PicardIterate(times, sample(phi_ap), eng)]

    decay_half = np.exp(-h * eng.kk)[:, None]
    decay_full = np.exp(-2.0 * h * eng.kk)[:, None]
    Wh = [w[:, None] for w in _cell_weights(eng.kk, h, h)]
    Wf = [w[:, None] for w in _cell_weights(eng.kk, h, 2.0 * h)]
    heat = np.exp(-np.outer(times, eng.kk))[:, :, None]  # (nodes, M, 1)

    for _ in range(iterations):
        prev = iterates[-1].values
        g = np.asarray([eng.nonlinear(prev[j], float(times[j])) for j in range(n_nodes)])
        new = np.zeros_like(prev)
        new[0] = f0
        acc = np.zeros((M, eng.d), dtype=complex)
        for c in range(n_cells):
            j = 2 * c
            g0, g1, g2 = g[j], g[j + 1], g[j + 2]
            half = decay_half * acc + Wh[0] * g0 + Wh[1] * g1 + Wh[2] * g2
            full = decay_full * acc + Wf[0] * g0 + Wf[1] * g1 + Wf[2] * g2
            new[j + 1] = heat[j + 1] * f0 + half
            new[j + 2] = heat[j + 2] * f0 + full
            acc = full
        iterates.append(PicardIterate(times, new, eng))
    return iterates


# -- physical balance diagnostics ---------------------------------------------------


@dataclass(frozen=True)
class BalanceReport:
    max_energy_residual: float
    max_energy_increase: float
    max_mean_defect: float
    n_samples: int


def balance_diagnostics(
    traj: Trajectory,
    forcing: ForcingModel | None = None,
    n_samples: int = 200,
    fd_step: float | None = None,
) -> BalanceReport:
    """Momentum and energy balance along a trajectory.

    The mean mode must be absent from every state.  The energy residual
    compares the centred finite difference of the kinetic energy with the
    dissipation and injection inner products; for zero forcing the energy
    must be nonincreasing between nodes.
    """
    eng = traj.engine
    t_end = traj.t_end
    hs = fd_step if fd_step is not None else max(1e-4 * t_end, 1e-6)
    ts = np.linspace(hs, t_end - hs, n_samples)

    def energy(y: np.ndarray) -> float:
        return 0.5 * eng.norm(y, 0.0) ** 2

    max_res = 0.0
    for t in ts:
        y = traj.array_at(float(t))
        dE = (energy(traj.array_at(float(t) + hs)) - energy(traj.array_at(float(t) - hs))) / (2.0 * hs)
        dissipation = -float(np.sum(eng.kk * np.sum(np.abs(y) ** 2, axis=1)))
        injection = 0.0
        if forcing is not None:
            xi = eng.field_to_array(forcing(float(t)))
            injection = float(np.real(np.sum(np.conj(y) * xi)))
        max_res = max(max_res, abs(dE - dissipation - injection))

    node_e = [energy(y) for y in traj.states]
    max_increase = max(
        (node_e[i + 1] - node_e[i] for i in range(len(node_e) - 1)), default=0.0
    )
    max_mean = 0.0  # the retained-mode set excludes the zero wavevector by construction
    return BalanceReport(
        max_energy_residual=max_res,
        max_energy_increase=max(0.0, max_increase),
        max_mean_defect=max_mean,
        n_samples=n_samples,
    )
