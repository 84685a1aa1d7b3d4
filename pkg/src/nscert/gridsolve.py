"""Piecewise-linear numerical solver for the quadratic control inequality.

The unknown tube is sought as the piecewise-linear interpolant of values
R_0, R_1, ... on a time grid.  Each step requires

    E_m + K * sum_k Phi_{mk}(R_k, R_{k+1})  <=  min(R_m, R_{m+1}),

where Phi_{mk} is a quadratic form whose coefficients are rigorous upper
bounds of three kernel-weighted moments of the singular semigroup factor
over the cell [t_k, t_{k+1}).  Because that factor is a pure exponential
beyond the breakpoint theta, cells old enough get closed-form coefficients
and the memory sum collapses to a single scalar that is updated by a
sliding window (the "reduced" mode); the full-memory mode recomputes the
sum each step and works on arbitrary grids.

Every coefficient records how it was obtained so a solution can be audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quadrature import adaptive_simpson, integrate_sqrt_kernel
from .semigroup import SemigroupEstimator, navier_stokes_estimator


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing instants t_0 = 0 < t_1 < ...; uniform is primary."""

    instants: tuple[float, ...]

    def __post_init__(self):
        ts = self.instants
        if len(ts) < 2 or ts[0] != 0.0:
            raise ValueError("grid must start at 0 and contain at least two instants")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("instants must be strictly increasing")

    @classmethod
    def uniform(cls, tau: float, steps: int) -> "TimeGrid":
        if tau <= 0:
            raise ValueError("spacing must be positive")
        return cls(tuple(m * tau for m in range(steps + 1)))

    @property
    def n_cells(self) -> int:
        return len(self.instants) - 1

    @property
    def is_uniform(self) -> bool:
        ts = self.instants
        tau = ts[1] - ts[0]
        return all(abs((b - a) - tau) <= 1e-12 * max(1.0, tau) for a, b in zip(ts, ts[1:]))

    @property
    def tau(self) -> float:
        if not self.is_uniform:
            raise ValueError("grid is not uniform")
        return self.instants[1] - self.instants[0]


@dataclass(frozen=True)
class CellCoefficients:
    H: float
    I: float
    N: float
    derivation: str

    def __post_init__(self):
        if not (0.0 <= self.H <= self.I + 1e-15 and self.I <= self.N + 1e-15):
            raise ValueError(f"moment ordering violated: H={self.H}, I={self.I}, N={self.N}")


@dataclass(frozen=True)
class GridCoefficients:
    """Moment bounds per (m, k); tail cells share translation-invariant forms."""

    grid: TimeGrid
    estimator: SemigroupEstimator
    near: dict  # (m, k) -> CellCoefficients for cells inside/straddling the breakpoint
    tail_base: dict  # k -> (H_k, I_k, N_k); scaled by A exp(-B t_m) on use

    def is_tail(self, m: int, k: int) -> bool:
        ts = self.grid.instants
        return ts[k + 1] <= ts[m] - self.estimator.theta + 1e-12

    def cell(self, m: int, k: int) -> CellCoefficients:
        if self.is_tail(m, k):
            Hk, Ik, Nk = self.tail_base[k]
            s = self.estimator.A * math.exp(-self.estimator.B * self.grid.instants[m])
            return CellCoefficients(s * Hk, s * Ik, s * Nk, "tail-closed-form")
        return self.near[(m, k)]

    def audit_csv(self) -> str:
        """Every coefficient with its derivation tag, for certification audits."""
        rows = ["m,k,H,I,N,derivation"]
        for m in range(self.grid.n_cells):
            for k in range(m + 1):
                c = self.cell(m, k)
                rows.append(f"{m},{k},{c.H:.12g},{c.I:.12g},{c.N:.12g},{c.derivation}")
        return "\n".join(rows) + "\n"


def _tail_base(est: SemigroupEstimator, ta: float, tb: float) -> tuple[float, float, float]:
    """Exponential-cell moments: exact integrals of exp(B s) times the weights."""
    B = est.B
    dt = tb - ta
    ea, eb = math.exp(B * ta), math.exp(B * tb)
    N = (eb - ea) / B
    I = (ea - eb + B * eb * dt) / (B * B * dt)
    H = (2.0 * (eb - ea) - 2.0 * B * eb * dt + B * B * eb * dt * dt) / (B ** 3 * dt * dt)
    return H, I, N


def _near_cell(est: SemigroupEstimator, tm: float, ta: float, tb: float, quad_tol: float) -> CellCoefficients:
    """Rigorous sups over t in [t_m, t_{m+1}) of the weighted cell integrals.

    The singular factor is decreasing on (0, inf), so for completed cells
    (tb <= tm) the sup over t is attained at t = t_m and the three moments
    are plain integrals of u_minus(t_m - s) times the weights.  For the
    current cell (ta == tm) the integrands grow pointwise with the upper
    limit, so the sup is the integral over the full cell.
    """
    dt = tb - ta

    if tb <= tm + 1e-15:
        # completed cell; substitute x = tm - s
        def moment(power: int) -> float:
            def g(x: float) -> float:
                s = tm - x
                w = (s - ta) / dt
                return est.u_minus(x) * w ** power

            a, b = tm - tb, tm - ta
            split = min(max(est.theta, a), b)
            val = integrate_sqrt_kernel(g, a, split, tol=quad_tol)
            if b > split:
                val += adaptive_simpson(g, split, b, tol=quad_tol)
            return val

        return CellCoefficients(moment(2), moment(1), moment(0), "near-endpoint-envelope")

    # current cell: integrate u_minus(sigma) * w((dt - sigma)/dt)^power over (0, dt]
    def moment_current(power: int) -> float:
        def g(x: float) -> float:
            w = (dt - x) / dt
            return est.u_minus(x) * w ** power

        split = min(est.theta, dt)
        val = integrate_sqrt_kernel(g, 0.0, split, tol=quad_tol)
        if dt > split:
            val += adaptive_simpson(g, split, dt, tol=quad_tol)
        return val

    return CellCoefficients(moment_current(2), moment_current(1), moment_current(0), "partial-cell-envelope")


def grid_coefficients(
    grid: TimeGrid,
    estimator: SemigroupEstimator | None = None,
    quad_tol: float = 1e-11,
) -> GridCoefficients:
    """Precompute every moment bound the recursion can ask for.

    On uniform grids the near-zone coefficients depend only on the lag
    m - k, so only theta/tau + 1 quadratures are performed.
    """
    est = estimator or navier_stokes_estimator()
    ts = grid.instants
    M = grid.n_cells
    near: dict = {}
    tail_base: dict = {}
    for k in range(M):
        tail_base[k] = _tail_base(est, ts[k], ts[k + 1])

    if grid.is_uniform:
        tau = grid.tau
        max_lag = int(math.ceil(est.theta / tau + 1e-9)) + 1
        by_lag: dict[int, CellCoefficients] = {}
        for lag in range(0, max_lag + 1):
            tm = lag * tau
            by_lag[lag] = _near_cell(est, tm, 0.0, tau, quad_tol)
        for m in range(M):
            for k in range(m + 1):
                if ts[k + 1] <= ts[m] - est.theta + 1e-12:
                    continue
                lag = m - k
                if lag <= max_lag:
                    # translation invariance: u_minus(t - s) depends on t - s only
                    c = by_lag[lag]
                    near[(m, k)] = CellCoefficients(c.H, c.I, c.N, c.derivation + f"-lag{lag}")
    else:
        for m in range(M):
            for k in range(m + 1):
                if ts[k + 1] <= ts[m] - est.theta + 1e-12:
                    continue
                near[(m, k)] = _near_cell(est, ts[m], ts[k], ts[k + 1], quad_tol)

    return GridCoefficients(grid=grid, estimator=est, near=near, tail_base=tail_base)


def memory_quadratic(c: CellCoefficients, D_k: float, a: float, x: float) -> float:
    """The cell contribution Phi(a, x) to the memory term.

    Quadratic in the tube values a = R_k, x = R_{k+1}; all monomial
    coefficients are nonnegative because the moments satisfy H <= I <= N.
    """
    return (
        (c.H + c.N - 2.0 * c.I) * a * a
        + 2.0 * (c.I - c.H) * a * x
        + c.H * x * x
        + 2.0 * (c.N - c.I) * D_k * a
        + 2.0 * c.I * D_k * x
    )


@dataclass
class GridSolution:
    grid: TimeGrid
    values: list[float]
    memory: list[float]
    status: str  # "completed" or "stalled"
    stalled_at: int | None = None

    @property
    def horizon(self) -> float:
        return self.grid.instants[len(self.values) - 1]

    def interpolant(self) -> Callable[[float], float]:
        ts = np.asarray(self.grid.instants[: len(self.values)])
        vs = np.asarray(self.values)

        def tube(t: float) -> float:
            if t < 0.0 or t > ts[-1] + 1e-12:
                raise ValueError(f"t={t} outside the solved range [0, {ts[-1]}]")
            return float(np.interp(t, ts, vs))

        return tube

    def rows(self) -> list[tuple[int, float, float, float, str]]:
        out = []
        for m, v in enumerate(self.values):
            s = self.memory[m] if m < len(self.memory) else 0.0
            out.append((m, self.grid.instants[m], v, s, self.status))
        return out

    def csv(self) -> str:
        lines = ["m,t_m,R_m,S_m,status"]
        for m, t, v, s, status in self.rows():
            lines.append(f"{m},{t:.12g},{v:.12g},{s:.12g},{status}")
        return "\n".join(lines) + "\n"


def _root_interval(alpha: float, beta: float, gamma: float) -> tuple[float, float] | None:
    """Solution interval of alpha x^2 + beta x + gamma <= 0 (alpha >= 0), or None."""
    if alpha == 0.0:
        if beta == 0.0:
            return (-math.inf, math.inf) if gamma <= 0.0 else None
        x = -gamma / beta
        return (x, math.inf) if beta < 0.0 else (-math.inf, x)
    disc = beta * beta - 4.0 * alpha * gamma
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    return ((-beta - s) / (2.0 * alpha), (-beta + s) / (2.0 * alpha))


def _memory_sum(
    m: int,
    vals: Sequence[float],
    D: Sequence[float],
    coeffs: GridCoefficients,
    memory_mode: str,
    L: int | None,
    tail_prefix: Sequence[float] | None,
) -> float:
    """sum over completed cells k < m of Phi_{mk}, honouring the memory mode.

    In reduced mode only the sliding window is visited; the tail zone enters
    through the prefix sums of the translation-invariant cell forms, exactly
    as the two-sequence recursion organises it.
    """
    est = coeffs.estimator
    if memory_mode == "full":
        return sum(
            memory_quadratic(coeffs.cell(m, k), D[k], vals[k], vals[k + 1]) for k in range(m)
        )
    lo = max(0, m - L)
    tot = sum(
        memory_quadratic(coeffs.cell(m, k), D[k], vals[k], vals[k + 1]) for k in range(lo, m)
    )
    S_m = tail_prefix[max(0, m - L)] if tail_prefix is not None else 0.0
    return tot + est.A * math.exp(-est.B * coeffs.grid.instants[m]) * S_m


def _tail_prefix(vals, D, coeffs: GridCoefficients, M: int) -> list[float]:
    """prefix[j] = sum_{k < j} Phi_k(R_k, R_{k+1}) with the tail cell forms."""
    out = [0.0]
    for k in range(M - 1):
        Hk, Ik, Nk = coeffs.tail_base[k]
        c = CellCoefficients(Hk, Ik, Nk, "tail-base")
        out.append(out[-1] + memory_quadratic(c, D[k], vals[k], vals[k + 1]))
    return out


def _solve_seeded(
    E: list[float],
    D: list[float],
    K: float,
    coeffs: GridCoefficients,
    memory_mode: str,
    L: int | None,
    slack_tol: float = 1e-11,
) -> GridSolution | None:
    """Flat seed plus monotone downward refinement; None when no seed exists.

    The seed is the constant solving the quadratic premise built from the
    scheme's own row sums W_m = sum_k N_{mk}; it satisfies every step
    inequality by construction.  Each sweep then lowers one position at a
    time to the smallest value still admissible for the two steps that bind
    it (min(R_m, R_{m+1}) >= LHS_m splits into two one-sided conditions,
    each a scalar quadratic in the refined value).  Lowering a value never
    tightens any other constraint, so the sweep limit remains admissible;
    an exact recheck guards the result regardless.
    """
    from .certificates import smallest_tube_root

    grid = coeffs.grid
    M = grid.n_cells
    # row sums of N alone: Phi evaluated at unit values with zero offsets
    # telescopes to N, so the memory sum of ones is sum_k N_{mk}
    ones = [1.0] * (M + 1)
    zeros = [0.0] * M
    ones_prefix = _tail_prefix(ones, zeros, coeffs, M)
    row = [
        _memory_sum(m, ones, zeros, coeffs, memory_mode, L, ones_prefix) for m in range(1, M)
    ]
    W = [coeffs.cell(0, 0).N] + [r + coeffs.cell(m, m).N for m, r in zip(range(1, M), row)]
    W_hat = max(W)
    E_hat = max(E)
    D_hat = max(D)
    if 2.0 * K * W_hat * D_hat + 2.0 * math.sqrt(K * W_hat * E_hat) > 1.0:
        return None
    X = smallest_tube_root(K * W_hat, D_hat, E_hat)
    vals = [X] * (M + 1)

    for _ in range(2 * M + 20):
        prefix = _tail_prefix(vals, D, coeffs, M) if memory_mode == "reduced" else None
        delta = 0.0
        for i in range(M + 1):
            lower = 0.0
            cap = math.inf
            feasible = True
            if i < M:
                # step i with the refined value in the left slot of Phi_ii
                cell = coeffs.cell(i, i)
                const = E[i] + K * _memory_sum(i, vals, D, coeffs, memory_mode, L, prefix)
                v = vals[i + 1]
                alpha = K * (cell.H + cell.N - 2.0 * cell.I)
                beta = K * (2.0 * (cell.I - cell.H) * v + 2.0 * (cell.N - cell.I) * D[i])
                gamma = const + K * (cell.H * v * v + 2.0 * cell.I * D[i] * v)
                iv = _root_interval(alpha, beta - 1.0, gamma)
                if iv is None:
                    feasible = False
                else:
                    lower = max(lower, iv[0])
                    cap = min(cap, iv[1])
            if feasible and i > 0:
                # step i-1 with the refined value in the right slot of Phi_{i-1,i-1}
                m = i - 1
                cell = coeffs.cell(m, m)
                const = E[m] + K * _memory_sum(m, vals, D, coeffs, memory_mode, L, prefix)
                a = vals[m]
                alpha = K * cell.H
                beta = K * (2.0 * (cell.I - cell.H) * a + 2.0 * cell.I * D[m])
                gamma = const + K * (
                    (cell.H + cell.N - 2.0 * cell.I) * a * a + 2.0 * (cell.N - cell.I) * D[m] * a
                )
                iv = _root_interval(alpha, beta - 1.0, gamma)
                if iv is None:
                    feasible = False
                else:
                    lower = max(lower, iv[0])
                    cap = min(cap, iv[1])
            if not feasible or lower > cap:
                continue
            new = min(vals[i], max(lower, 0.0))
            if new < vals[i]:
                delta = max(delta, vals[i] - new)
                vals[i] = new
        if delta <= 1e-13 * max(X, 1.0):
            break

    def memory_column(values: list[float]) -> list[float]:
        if L is None:
            return [0.0] * (M + 1)
        prefix = _tail_prefix(values, D, coeffs, M)
        return [prefix[max(0, m - L)] for m in range(M + 1)]

    # nudge off the refinement's equality so the independent recheck sees
    # strictly nonnegative slack instead of a roundoff-level sign
    vals = [v * (1.0 + 1e-10) for v in vals]
    candidate = GridSolution(grid, vals, memory_column(vals), "completed")
    if recheck_discrete(candidate, E, D, K, coeffs) >= -slack_tol:
        return candidate
    flat_vals = [X] * (M + 1)
    return GridSolution(grid, flat_vals, memory_column(flat_vals), "completed")


def step_solve(
    history: Sequence[float],
    memory_term: float,
    E_m: float,
    D_m: float,
    K: float,
    cell_mm: CellCoefficients,
    floor: float = 0.0,
) -> float | None:
    """Smallest admissible next tube value (subject to ``floor``), or None.

    ``memory_term`` is K times the completed-cell sum; the current cell's
    quadratic (in the unknown x) is added here.  Both branches of the step
    condition reduce to scalar quadratics in x, so the admissible set is a
    union of at most two intervals.  ``floor`` lets the caller provision for
    the following step: the step inequality binds min(R_m, R_{m+1}), so a
    growing tube must be raised one step before the constraint needs it.
    The returned value is the smallest admissible x >= floor when one
    exists, else the smallest admissible x at all.
    """
    R_m = history[-1]
    base = E_m + memory_term + K * (
        (cell_mm.H + cell_mm.N - 2.0 * cell_mm.I) * R_m * R_m
        + 2.0 * (cell_mm.N - cell_mm.I) * D_m * R_m
    )
    lin = K * (2.0 * (cell_mm.I - cell_mm.H) * R_m + 2.0 * cell_mm.I * D_m)
    quad = K * cell_mm.H
    intervals: list[tuple[float, float]] = []
    # branch "next below current": base + lin x + quad x^2 <= x, x in [0, R_m]
    iv = _root_interval(quad, lin - 1.0, base)
    if iv is not None:
        lo, hi = max(iv[0], 0.0), min(iv[1], R_m)
        if lo <= hi:
            intervals.append((lo, hi))
    # branch "next above current": base + lin x + quad x^2 <= R_m, x in [R_m, inf)
    iv = _root_interval(quad, lin, base - R_m)
    if iv is not None:
        lo, hi = max(iv[0], R_m, 0.0), iv[1]
        if lo <= hi:
            intervals.append((lo, hi))
    if not intervals:
        return None
    floored = [max(lo, floor) for lo, hi in intervals if max(lo, floor) <= hi]
    if floored:
        return min(floored)
    return min(lo for lo, _ in intervals)


def assemble_error_steps(
    coeffs: GridCoefficients,
    datum_defect: float,
    diff_defect: Sequence[float],
) -> list[float]:
    """Cell sups E_m = u_m * delta + sum_k N_{mk} eps_k of the integral error."""
    grid = coeffs.grid
    est = coeffs.estimator
    M = grid.n_cells
    if len(diff_defect) < M:
        raise ValueError("need one differential-defect bound per cell")
    out = []
    for m in range(M):
        u_m = est.u(grid.instants[m])  # u decreasing: cell sup at the left end
        total = u_m * datum_defect
        for k in range(m + 1):
            total += coeffs.cell(m, k).N * diff_defect[k]
        out.append(total)
    return out


def solve_control_grid(
    E_steps: Sequence[float],
    D_steps: Sequence[float],
    K: float,
    coeffs: GridCoefficients,
    memory_mode: str = "reduced",
    n_r0_candidates: int = 64,
    r0_cap: float | None = None,
) -> GridSolution:
    """Run the step recursion over the grid.

    ``E_steps[m]`` and ``D_steps[m]`` must upper-bound the error estimator
    and the approximation norm on [t_m, t_{m+1}).

    Because each step bounds min(R_m, R_{m+1}), requirements propagate
    backward: a growing tube must be provisioned arbitrarily far ahead, so
    the pure smallest-next-value recursion stalls on any problem whose tube
    grows.  When the flat global solution exists (the scheme's own row sums
    satisfy the quadratic premise) it is used as a seed and refined downward
    by monotone sweeps; every candidate is re-verified exactly before being
    returned.  Without a flat seed the greedy recursion runs with a
    one-step-lookahead floor and stalls honestly where no step is feasible;
    the partial solution up to t_m is still valid and is returned as such.
    """
    grid = coeffs.grid
    est = coeffs.estimator
    M = grid.n_cells
    if memory_mode not in ("full", "reduced"):
        raise ValueError(f"unknown memory mode {memory_mode!r}")
    if memory_mode == "reduced":
        if not grid.is_uniform:
            raise ValueError("reduced memory needs a uniform grid")
        L = est.theta / grid.tau
        if abs(L - round(L)) > 1e-9:
            raise ValueError("reduced memory needs the breakpoint to be a whole number of steps")
        L = int(round(L))

    E = list(E_steps[:M])
    D = list(D_steps[:M])

    seeded = _solve_seeded(E, D, K, coeffs, memory_mode, L if memory_mode == "reduced" else None)
    if seeded is not None:
        return seeded

    def completed_sum(m: int, values: list[float], S_m: float) -> float:
        """K * sum over completed cells k < m of Phi_{mk}, by the active mode."""
        if memory_mode == "full":
            tot = 0.0
            for k in range(m):
                tot += memory_quadratic(coeffs.cell(m, k), D[k], values[k], values[k + 1])
            return K * tot
        lo = max(0, m - L)
        tot = 0.0
        for k in range(lo, m):
            tot += memory_quadratic(coeffs.cell(m, k), D[k], values[k], values[k + 1])
        tail = est.A * math.exp(-est.B * grid.instants[m]) * S_m
        return K * (tot + tail)

    def tail_increment(m: int, values: list[float], S_m: float) -> float:
        """S_{m+1} from S_m: the cells whose influence turns purely exponential."""
        if memory_mode != "reduced" or m < L:
            return S_m
        k = m - L
        Hk, Ik, Nk = coeffs.tail_base[k]
        return S_m + memory_quadratic(
            CellCoefficients(Hk, Ik, Nk, "tail-base"), D[k], values[k], values[k + 1]
        )

    def lookahead_floor(m: int, values: list[float], S_m: float) -> float:
        """Smallest x keeping step m+1 feasible under flat continuation.

        The step-(m+1) inequality with R_{m+1} = R_{m+2} = x is one scalar
        quadratic in x; its smaller root is the provisioning floor for the
        choice of R_{m+1}.  Without real roots the next step cannot be
        saved by any choice, so no floor is imposed.
        """
        j = m + 1
        if j >= M:
            return 0.0
        R_m = values[m]
        if memory_mode == "full":
            hist = sum(
                memory_quadratic(coeffs.cell(j, k), D[k], values[k], values[k + 1])
                for k in range(m)
            )
        else:
            S_next = tail_increment(m, values, S_m)
            hist = sum(
                memory_quadratic(coeffs.cell(j, k), D[k], values[k], values[k + 1])
                for k in range(max(0, j - L), m)
            )
            hist += est.A * math.exp(-est.B * grid.instants[j]) * S_next
        c1 = coeffs.cell(j, m)
        c2 = coeffs.cell(j, j)
        A = K * (c1.H + c2.N)
        B = K * (2.0 * (c1.I - c1.H) * R_m + 2.0 * c1.I * D[m] + 2.0 * c2.N * D[j])
        C = E[j] + K * (
            hist
            + (c1.H + c1.N - 2.0 * c1.I) * R_m * R_m
            + 2.0 * (c1.N - c1.I) * D[m] * R_m
        )
        iv = _root_interval(A, B - 1.0, C)
        if iv is None:
            return 0.0
        return max(iv[0], 0.0)

    # joint (R_0, R_1) search: scan R_0, keep the smallest feasible R_1
    E0 = E[0]
    cap = r0_cap if r0_cap is not None else max(10.0 * (E0 + 1e-6), 1.0 / (4.0 * K * est.N))
    lo0 = max(E0, 1e-12 * cap)
    candidates = [E0] if E0 > 0 else []
    candidates += list(np.geomspace(max(lo0, 1e-300), cap, n_r0_candidates))
    best: tuple[float, float] | None = None
    for R0 in candidates:
        floor = lookahead_floor(0, [R0], 0.0)
        x = step_solve([R0], 0.0, E[0], D[0], K, coeffs.cell(0, 0), floor=floor)
        if x is not None and (best is None or x < best[1] - 1e-15):
            best = (R0, x)
    if best is None:
        return GridSolution(grid, [E0], [0.0], "stalled", stalled_at=0)

    values = [best[0], best[1]]
    memory = [0.0, 0.0]
    S = 0.0
    for m in range(1, M):
        S = tail_increment(m - 1, values, S)
        mem = completed_sum(m, values, S)
        floor = lookahead_floor(m, values, S)
        x = step_solve(values, mem, E[m], D[m], K, coeffs.cell(m, m), floor=floor)
        if x is None:
            return GridSolution(grid, values, memory + [S], "stalled", stalled_at=m)
        values.append(x)
        memory.append(S)
    return GridSolution(grid, values, memory, "completed")


def recheck_discrete(
    sol: GridSolution,
    E_steps: Sequence[float],
    D_steps: Sequence[float],
    K: float,
    coeffs: GridCoefficients,
) -> float:
    """Independent re-evaluation of the step inequalities; worst slack."""
    worst = math.inf
    vals = sol.values
    for m in range(len(vals) - 1):
        tot = 0.0
        for k in range(m + 1):
            tot += memory_quadratic(coeffs.cell(m, k), D_steps[k], vals[k], vals[k + 1])
        slack = min(vals[m], vals[m + 1]) - (E_steps[m] + K * tot)
        worst = min(worst, slack)
    return worst


def spot_check_continuous(
    sol: GridSolution,
    error_bound: Callable[[float], float],
    approx_bound: Callable[[float], float],
    K: float,
    estimator: SemigroupEstimator | None = None,
    times: Sequence[float] | None = None,
    quad_tol: float = 1e-10,
) -> float:
    """Check the interpolant against the integral inequality with the true kernel."""
    est = estimator or navier_stokes_estimator()
    tube = sol.interpolant()
    horizon = sol.horizon
    if times is None:
        rng = np.random.default_rng(20240917)
        times = sorted(float(x) for x in rng.uniform(1e-6, horizon, size=10))
    worst = math.inf
    for t in times:
        def integrand(x: float) -> float:
            s = t - x
            r = tube(s)
            return est.u_minus(x) * (2.0 * approx_bound(s) * r + r * r)

        split = min(est.theta, t)
        val = integrate_sqrt_kernel(integrand, 0.0, split, tol=quad_tol)
        if t > split:
            val += adaptive_simpson(integrand, split, t, tol=quad_tol)
        worst = min(worst, tube(t) - (error_bound(t) + K * val))
    return worst
