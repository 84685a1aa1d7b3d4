"""Orchestration: scenario parsing, certification chains, Galerkin runs.

This module is the seam between the numerical core and the service/CLI
surface: everything here consumes plain data (dicts, file paths) and
returns JSON-ready dicts, so the HTTP layer stays a thin veneer.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import certificates as cert
from . import constants as consts
from . import fields as fld
from . import galerkin as gal
from . import gridsolve as grd
from .rounding import ceil_sig, floor_sig
from .semigroup import check_convolution_bound, navier_stokes_estimator


class ScenarioError(ValueError):
    """Malformed scenario document, with a field-level diagnostic."""


@dataclass(frozen=True)
class Scenario:
    d: int
    n: float
    p: float
    mode: str  # "finite" or "exponential"
    horizon: float | str  # number, "infinity" or "max"
    datum_norm_n: float
    datum_norm_p: float
    datum_seed: int | None
    datum_file: str | None
    forcing_kind: str  # "none", "constant", "exponential"
    forcing_level_n: float
    forcing_level_p: float
    g_box_radius: int | None
    g_members: tuple | None
    allow_custom_constants: bool = False
    custom_constants: tuple | None = None  # (K_n, K_p)

    @property
    def envelope_n(self) -> cert.ForcingEnvelope:
        return self._envelope(self.forcing_level_n)

    @property
    def envelope_p(self) -> cert.ForcingEnvelope:
        return self._envelope(self.forcing_level_p)

    def _envelope(self, level: float) -> cert.ForcingEnvelope:
        if self.forcing_kind == "none":
            if self.mode == "exponential":
                return cert.ForcingEnvelope.exponential_bound(0.0)
            return cert.ForcingEnvelope.none()
        if self.forcing_kind == "constant":
            return cert.ForcingEnvelope.constant_bound(level)
        return cert.ForcingEnvelope.exponential_bound(level)


def _field_err(name: str, msg: str) -> ScenarioError:
    return ScenarioError(f"scenario field {name!r}: {msg}")


def parse_scenario(doc: dict) -> Scenario:
    """Validate a scenario document; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        d = int(doc.get("d", 3))
        n = float(doc.get("n", 2))
        p = float(doc.get("p", n))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"d/n/p must be numbers: {exc}") from None
    if d < 2:
        raise _field_err("d", "dimension must be >= 2")
    if n <= d / 2:
        raise _field_err("n", f"need n > d/2 = {d / 2}")
    if p < n:
        raise _field_err("p", "need p >= n")

    mode = doc.get("mode", "finite")
    if mode not in ("finite", "exponential"):
        raise _field_err("mode", "must be 'finite' or 'exponential'")

    horizon = doc.get("horizon", "infinity")
    if isinstance(horizon, str):
        if horizon not in ("infinity", "max"):
            raise _field_err("horizon", "must be a number, 'infinity' or 'max'")
    else:
        try:
            horizon = float(horizon)
        except (TypeError, ValueError):
            raise _field_err("horizon", "must be a number, 'infinity' or 'max'") from None
        if horizon <= 0:
            raise _field_err("horizon", "must be positive")

    datum = doc.get("datum")
    if not isinstance(datum, dict):
        raise _field_err("datum", "must be an object")
    datum_file = datum.get("file")
    if datum_file is not None:
        with open(datum_file, "r", encoding="utf-8") as fh:
            f = fld.read_field(fh)
        norm_n, norm_p = fld.sobolev_norm(f, n), fld.sobolev_norm(f, p)
        seed = None
    else:
        missing = [k for k in ("norm_n", "norm_p") if k not in datum]
        if missing:
            raise _field_err("datum", f"missing keys {missing} (or provide 'file')")
        norm_n, norm_p = float(datum["norm_n"]), float(datum["norm_p"])
        seed = int(datum.get("seed", 0))
    if norm_n < 0 or norm_p < 0:
        raise _field_err("datum", "norms must be nonnegative")
    if norm_p < norm_n - 1e-12:
        raise _field_err("datum", "norm_p must be >= norm_n (norm monotonicity)")

    forcing = doc.get("forcing", {"kind": "none"})
    if not isinstance(forcing, dict):
        raise _field_err("forcing", "must be an object")
    kind = forcing.get("kind", "none")
    if kind not in ("none", "constant", "exponential"):
        raise _field_err("forcing.kind", "must be 'none', 'constant' or 'exponential'")
    lvl_n = float(forcing.get("level_n", 0.0))
    lvl_p = float(forcing.get("level_p", 0.0))
    if lvl_n < 0 or lvl_p < 0:
        raise _field_err("forcing", "envelope levels must be nonnegative")
    if kind == "constant" and mode == "exponential":
        raise _field_err("mode", "exponential certificates need an exponential (or zero) forcing envelope")
    if kind == "exponential" and mode == "finite":
        raise _field_err("mode", "finite-horizon certificates use constant envelopes; wrap J as a constant bound instead")

    g = doc.get("galerkin")
    g_radius = None
    g_members = None
    if g is not None:
        if not isinstance(g, dict):
            raise _field_err("galerkin", "must be an object")
        if "box_radius" in g:
            g_radius = int(g["box_radius"])
            if g_radius < 1:
                raise _field_err("galerkin.box_radius", "must be >= 1")
        elif "members" in g:
            g_members = tuple(tuple(int(x) for x in k) for k in g["members"])
        else:
            raise _field_err("galerkin", "needs 'box_radius' or 'members'")

    custom = doc.get("constants")
    allow = bool(doc.get("allow_custom_constants", False))
    custom_pair = None
    if custom is not None:
        if not allow:
            raise _field_err(
                "constants",
                "hand-entered constants are rejected unless allow_custom_constants is true",
            )
        custom_pair = (float(custom["K_n"]), float(custom["K_p"]))

    return Scenario(
        d=d,
        n=n,
        p=p,
        mode=mode,
        horizon=horizon,
        datum_norm_n=norm_n,
        datum_norm_p=norm_p,
        datum_seed=seed,
        datum_file=datum_file,
        forcing_kind=kind,
        forcing_level_n=lvl_n,
        forcing_level_p=lvl_p,
        g_box_radius=g_radius,
        g_members=g_members,
        allow_custom_constants=allow,
        custom_constants=custom_pair,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(doc)


def paper_scenarios() -> dict[int, Scenario]:
    """The three reference certification scenarios (d=3, n=2, p=4)."""
    s1 = parse_scenario(
        {
            "d": 3, "n": 2, "p": 4, "mode": "finite", "horizon": "infinity",
            "datum": {"norm_n": 0.15, "norm_p": 1.50},
            "forcing": {"kind": "constant", "level_n": 0.025, "level_p": 0.25},
        }
    )
    s2 = parse_scenario(
        {
            "d": 3, "n": 2, "p": 4, "mode": "finite", "horizon": "infinity",
            "datum": {"norm_n": 0.20, "norm_p": 2.00},
            "forcing": {"kind": "constant", "level_n": 0.025, "level_p": 0.25},
        }
    )
    s3 = parse_scenario(
        {
            "d": 3, "n": 2, "p": 4, "mode": "exponential", "horizon": "infinity",
            "datum": {"norm_n": 0.20, "norm_p": 2.00},
            "forcing": {"kind": "none"},
        }
    )
    return {1: s1, 2: s2, 3: s3}


# -- constants ----------------------------------------------------------------------


def _constant_record(bc: consts.BilinearConstant) -> dict:
    return {
        "n": bc.n,
        "d": bc.d,
        "lattice": bc.lattice,
        "K": bc.value,
        "sup_box_lo": bc.sup_bracket.lo,
        "sup_box_hi": bc.sup_bracket.hi,
        "sup_argmax": list(bc.sup_argmax),
        "sigma_lo": bc.sigma.lo,
        "sigma_hi": bc.sigma.hi,
        "policy": bc.policy.name,
        "lambda_sigma": bc.policy.lambda_sigma,
        "search_box": bc.policy.search_box,
        "box_points_scanned": bc.box_points_scanned,
        "evidence_note": bc.evidence_note,
    }


def constants_table(
    ns: Sequence[float],
    d: int,
    lattice: str = "nonzero",
    reduced: bool = False,
    search_box: int | None = None,
    lambda_sigma: float | None = None,
) -> dict:
    rows = []
    t0 = time.monotonic()
    for n in ns:
        if reduced:
            pol = consts.reduced_policy(n, d)
        else:
            pol = consts.default_policy(n, d, search_box=search_box, lambda_sigma=lambda_sigma)
        bc = consts.bilinear_constant(n, d, lattice, pol)
        rows.append(_constant_record(bc))
    return {"rows": rows, "elapsed_seconds": time.monotonic() - t0, "reduced": reduced}


def constants_csv(table: dict) -> str:
    out = ["n d lattice K_n sup_box_lo sup_box_hi sigma_lo sigma_hi"]
    for r in table["rows"]:
        out.append(
            f"{r['n']:g} {r['d']} {r['lattice']} {r['K']:.6g} "
            f"{r['sup_box_lo']:.6g} {r['sup_box_hi']:.6g} {r['sigma_lo']:.6g} {r['sigma_hi']:.6g}"
        )
    return "\n".join(out) + "\n"


def _resolve_constants(scn: Scenario) -> tuple[float, float, list[dict]]:
    if scn.custom_constants is not None:
        K_n, K_p = scn.custom_constants
        prov = [{"n": scn.n, "K": K_n, "source": "user override"},
                {"n": scn.p, "K": K_p, "source": "user override"}]
        return K_n, K_p, prov
    bc_n = consts.cached_constant(scn.n, scn.d)
    prov = [_constant_record(bc_n)]
    if scn.p == scn.n:
        return bc_n.value, bc_n.value, prov
    bc_p = consts.cached_constant(scn.p, scn.d)
    prov.append(_constant_record(bc_p))
    return bc_n.value, bc_p.value, prov


# -- certification chain --------------------------------------------------------------


def _premise_dict(p: cert.Premise) -> dict:
    return {"name": p.name, "lhs": p.lhs, "lhs_reported": p.lhs_reported, "bound": p.bound,
            "satisfied": p.satisfied}


def _tube_samples(tube, horizon: float, count: int = 20) -> list[list[float]]:
    cap = min(horizon, 10.0) if math.isinf(horizon) else horizon
    ts = [cap * i / count for i in range(count + 1)]
    return [[t, float(tube(t))] for t in ts]


def _level_thresholds(K: float, est) -> dict:
    """Data-size bounds for global existence at one Sobolev level."""
    u_inf = est.U_inf
    coef_exp = 4.0 * math.sqrt(2.0) * K
    return {
        "finite_xi_multiplier_reported": ceil_sig(u_inf, 3),
        "finite_datum_bound_exact": 1.0 / (4.0 * K * u_inf),
        "finite_datum_bound_reported": floor_sig(1.0 / (4.0 * K * u_inf), 3),
        "exp_F_bound_exact": 1.0 / coef_exp,
        "exp_F_bound_reported": floor_sig(1.0 / ceil_sig(coef_exp, 3), 3),
    }


def certify_scenario(scn: Scenario, grid_fallback: bool = True) -> dict:
    """Run the certificate chain and assemble an auditable report.

    Finite mode: existence at the requested (or maximal admissible) horizon
    via the zero approximation, then the Galerkin error certificate.
    Exponential mode: global zero-approximation and linear-flow
    certificates, then the exponential Galerkin certificate.  On refusal of
    the datum-level certificate the piecewise-linear grid solver is tried as
    a fallback and a partial-horizon tube is reported.
    """
    est = navier_stokes_estimator()
    K_n, K_p, provenance = _resolve_constants(scn)
    refusals: list[dict] = []
    out: dict = {
        "scenario": scn.__dict__ | {"g_members": None},
        "constants": provenance,
        "estimator": {"U_inf": est.U_inf, "N": est.N, "B": est.B, "sigma": est.sigma},
        "levels": {
            "n": {"index": scn.n, "K": K_n, **_level_thresholds(K_n, est)},
            "p": {"index": scn.p, "K": K_p, **_level_thresholds(K_p, est)},
        },
        "refusals": refusals,
    }

    resolution = None
    if scn.g_box_radius is not None:
        G = fld.GalerkinSet.from_box(scn.d, scn.g_box_radius)
        resolution = G.resolution
    elif scn.g_members is not None:
        G = fld.GalerkinSet.from_members(scn.d, scn.g_members)
        resolution = G.resolution
    if resolution is not None:
        out["galerkin_set_resolution"] = resolution

    if scn.mode == "finite":
        horizon = math.inf if scn.horizon in ("infinity", "max") else float(scn.horizon)
        horizon_exact = horizon
        if scn.horizon in ("infinity", "max"):
            t_star = cert.max_admissible_horizon(
                [scn.datum_norm_n, scn.datum_norm_p],
                [scn.envelope_n, scn.envelope_p],
                [K_n, K_p],
                est,
            )
            if not math.isinf(t_star):
                horizon_exact = t_star
                horizon = floor_sig(t_star, 3)
        out["horizon_exact"] = horizon_exact
        out["horizon"] = horizon

        try:
            zc = cert.zero_solution_certificate(scn.datum_norm_n, scn.envelope_n, K_n, est, horizon)
            out["datum_certificate"] = {
                "kind": zc.kind,
                "mode": "finite",
                "horizon": horizon,
                "premises": [_premise_dict(p) for p in zc.premises],
                "tube_samples": _tube_samples(zc.tube, horizon),
            }
        except cert.Refusal as r:
            refusals.append(_premise_dict(r.premise) | {"context": r.context})
            zc = None

        try:
            gc = cert.galerkin_error_certificate(
                scn.datum_norm_n, scn.datum_norm_p, scn.envelope_n, scn.envelope_p,
                scn.n, scn.p, K_n, K_p, resolution=resolution, estimator=est, horizon=horizon,
            )
            out["galerkin_certificate"] = _galerkin_dict(gc, include_tube=resolution is not None)
        except cert.Refusal as r:
            refusals.append(_premise_dict(r.premise) | {"context": r.context})
            gc = None
    else:
        out["horizon"] = math.inf
        out["horizon_exact"] = math.inf
        try:
            zc = cert.zero_solution_certificate(scn.datum_norm_n, scn.envelope_n, K_n, est)
            out["datum_certificate"] = {
                "kind": zc.kind,
                "mode": "exponential",
                "horizon": math.inf,
                "premises": [_premise_dict(p) for p in zc.premises],
                "decay_amplitude": zc.data["R"],
                "tube_samples": _tube_samples(zc.tube, math.inf),
            }
        except cert.Refusal as r:
            refusals.append(_premise_dict(r.premise) | {"context": r.context})
            zc = None
        try:
            lf = cert.linear_flow_certificate(scn.datum_norm_n, scn.envelope_n, K_n, est)
            out["linear_flow_certificate"] = {
                "kind": lf.kind,
                "premises": [_premise_dict(p) for p in lf.premises],
                "decay_amplitude": lf.data["R"],
            }
        except cert.Refusal as r:
            refusals.append(_premise_dict(r.premise) | {"context": r.context})
        try:
            gc = cert.galerkin_error_certificate(
                scn.datum_norm_n, scn.datum_norm_p, scn.envelope_n, scn.envelope_p,
                scn.n, scn.p, K_n, K_p, resolution=resolution, estimator=est,
            )
            out["galerkin_certificate"] = _galerkin_dict(gc, include_tube=resolution is not None)
        except cert.Refusal as r:
            refusals.append(_premise_dict(r.premise) | {"context": r.context})
            gc = None

    if zc is None and grid_fallback:
        out["grid_fallback"] = _grid_fallback(scn, K_n, est)

    wanted_galerkin = resolution is not None
    certified = (zc is not None) and (gc is not None if wanted_galerkin else True)
    out["status"] = "certified" if certified else "refused"
    return out


def _galerkin_dict(gc: cert.GalerkinCertificate, include_tube: bool) -> dict:
    d = {
        "mode": gc.base.data["mode"],
        "horizon": gc.horizon,
        "premises": [_premise_dict(p) for p in gc.premises],
        "premise_shift_exact": gc.premise_shift,
        "premise_shift_reported": gc.premise_shift_reported,
        "premise_decay_exact": gc.premise_decay,
        "premise_decay_reported": gc.premise_decay_reported,
        "min_resolution_exact": gc.min_resolution_exact,
        "min_resolution_reported": gc.min_resolution_reported,
        "rough_coefficient_exact": gc.coefficient_bound,
        "rough_coefficient_reported": gc.coefficient_bound_reported,
        "resolution": gc.resolution,
    }
    if include_tube:
        d["tube_samples"] = _tube_samples(gc.tube, gc.horizon)
    return d


def _grid_fallback(scn: Scenario, K_n: float, est) -> dict:
    """Piecewise-linear tube for the zero approximation when analytics refuse."""
    tau, steps = 0.05, 120
    grid = grd.TimeGrid.uniform(tau, steps)
    coeffs = grd.grid_coefficients(grid, est)
    if scn.mode == "exponential":
        F = scn.datum_norm_n + est.N * scn.envelope_n.J
        E_steps = [F * math.exp(-est.B * grid.instants[m]) for m in range(steps)]
    else:
        env = scn.envelope_n
        E_steps = [scn.datum_norm_n + env.xi(grid.instants[m + 1]) * est.U(grid.instants[m + 1])
                   for m in range(steps)]
    D_steps = [0.0] * steps
    sol = grd.solve_control_grid(E_steps, D_steps, K_n, coeffs, memory_mode="reduced")
    return {
        "status": sol.status,
        "certified_until": sol.horizon,
        "stalled_at": sol.stalled_at,
        "tau": tau,
        "values": sol.values,
    }


def render_certificate_report(result: dict) -> str:
    """Plain-text certificate block: premises, constants, horizon, tube."""
    buf = io.StringIO()
    scn = result["scenario"]
    buf.write("certificate report\n")
    buf.write("==================\n")
    buf.write(f"status: {result['status']}\n")
    buf.write(f"dimension d={scn['d']}, levels n={scn['n']}, p={scn['p']}, mode={scn['mode']}\n")
    hz = result["horizon"]
    buf.write(f"horizon: {'infinity' if math.isinf(hz) else f'{hz:g}'}\n")
    buf.write("constants:\n")
    for c in result["constants"]:
        if "sigma_lo" in c:
            buf.write(
                f"  K_{c['n']:g} = {c['K']:g}   box sup in [{c['sup_box_lo']:.6g}, {c['sup_box_hi']:.6g}],"
                f" limit sum in [{c['sigma_lo']:.6g}, {c['sigma_hi']:.6g}]  ({c['evidence_note']})\n"
            )
        else:
            buf.write(f"  K_{c['n']:g} = {c['K']:g}   ({c['source']})\n")
    for name in ("datum_certificate", "linear_flow_certificate"):
        if name in result:
            c = result[name]
            buf.write(f"{name.replace('_', ' ')}: {c['kind']}\n")
            for p in c["premises"]:
                buf.write(
                    f"  premise {p['name']}: lhs = {p['lhs']:.6g} (reported {p['lhs_reported']:g}) <= {p['bound']:g}\n"
                )
    if "galerkin_certificate" in result:
        g = result["galerkin_certificate"]
        buf.write("galerkin error certificate:\n")
        half_gap = (scn["p"] - scn["n"]) / 2
        dec = "/|G|" if half_gap == 1 else f"/|G|^{half_gap:g}"
        buf.write(
            f"  premise: {g['premise_shift_reported']:g} + {g['premise_decay_reported']:g}"
            f"{dec} <= 1\n"
        )
        buf.write(f"  admissible for |G| >= {g['min_resolution_reported']:g}"
                  f" (exact {g['min_resolution_exact']:.6g})\n")
        decay = " * exp(-t)" if g["mode"] == "exponential" else ""
        buf.write(
            f"  tube <= {g['rough_coefficient_reported']:g}{decay} / |G|^{scn['p'] - scn['n']:g}\n"
        )
        if g.get("resolution"):
            buf.write(f"  retained-set resolution |G| = {g['resolution']:.6g}\n")
    for r in result["refusals"]:
        buf.write(f"refused: {r['name']} lhs = {r['lhs']:.6g} > {r['bound']:g} ({r.get('context', '')})\n")
    if "grid_fallback" in result:
        gfd = result["grid_fallback"]
        buf.write(
            f"grid fallback: {gfd['status']}, certified until t = {gfd['certified_until']:g}\n"
        )
    return buf.getvalue()


def certificate_csv(result: dict) -> str:
    """Machine-readable tube curve: t, tube(t)."""
    rows = ["t,tube"]
    cert_block = result.get("galerkin_certificate") or result.get("datum_certificate")
    if cert_block and "tube_samples" in cert_block:
        for t, v in cert_block["tube_samples"]:
            rows.append(f"{t:.12g},{v:.12g}")
    return "\n".join(rows) + "\n"


# -- run: trajectories and containment -------------------------------------------------


def synthesize_datum(
    seed: int, d: int, n: float, p: float, norm_n: float, norm_p: float, box_radius: int
) -> fld.FourierField:
    """Deterministic solenoidal datum hitting both Sobolev norms exactly.

    Two spectrally disjoint random solenoidal blocks are mixed; on disjoint
    supports the squared norms add, so the mixing weights solve a 2x2
    linear system.  Raises when the requested norm pair is unreachable in
    the box.
    """
    if norm_n == 0 and norm_p == 0:
        return fld.FourierField.zero(d)
    q_max = d * box_radius * box_radius
    low = fld.random_solenoidal_field(seed, d, n, 1, 1.0, shell=(1, 2))
    high = fld.random_solenoidal_field(seed + 1, d, n, box_radius, 1.0, shell=(q_max, q_max))
    a_n, a_p = 1.0, fld.sobolev_norm(low, p) ** 2
    b_n, b_p = 1.0, fld.sobolev_norm(high, p) ** 2
    det = a_n * b_p - a_p * b_n
    s1 = (norm_n ** 2 * b_p - norm_p ** 2 * b_n) / det
    s2 = (norm_p ** 2 * a_n - norm_n ** 2 * a_p) / det
    if s1 < -1e-12 or s2 < -1e-12:
        lo_ratio = math.sqrt(a_p / a_n)
        hi_ratio = math.sqrt(b_p / b_n)
        raise ScenarioError(
            f"norm pair (norm_n={norm_n}, norm_p={norm_p}) unreachable in box radius {box_radius}: "
            f"the ratio norm_p/norm_n must lie in [{lo_ratio:.3g}, {hi_ratio:.3g}]"
        )
    out = low.scale(math.sqrt(max(s1, 0.0))) + high.scale(math.sqrt(max(s2, 0.0)))
    return out


def _scenario_forcing(scn: Scenario, box_radius: int) -> fld.ForcingModel | None:
    if scn.forcing_kind == "none" or (scn.forcing_level_n == 0 and scn.forcing_level_p == 0):
        return None
    base = synthesize_datum(
        (scn.datum_seed or 0) + 1000, scn.d, scn.n - 1, scn.p - 1,
        scn.forcing_level_n, scn.forcing_level_p, box_radius,
    )
    if scn.forcing_kind == "exponential":
        return fld.ForcingModel.exponential(base, rate=2.0)
    return fld.ForcingModel.constant(base)


def run_scenario(
    scn: Scenario,
    g_radius: int,
    ref_radius: int | None = None,
    horizon: float | None = None,
    rtol: float = 1e-8,
    n_samples: int = 20,
    force: bool = False,
    dump_times: Sequence[float] | None = None,
) -> dict:
    """Integrate the retained-mode system, optionally against a finer reference.

    Emits norm curves, the certified tube at the run's resolution, and the
    containment margins: strict (tube alone) and triangle (tube plus the
    reference's own tube, the observable proxy for the exact solution).
    """
    certify = certify_scenario(scn, grid_fallback=False)
    if certify["status"] != "certified" and not force:
        return {"status": "refused", "certify": certify}

    est = navier_stokes_estimator()
    K_n, K_p, _ = _resolve_constants(scn)
    if scn.datum_file is not None:
        with open(scn.datum_file, "r", encoding="utf-8") as fh:
            datum = fld.read_field(fh)
    else:
        datum = synthesize_datum(
            scn.datum_seed or 0, scn.d, scn.n, scn.p, scn.datum_norm_n, scn.datum_norm_p, g_radius
        )
    forcing = _scenario_forcing(scn, g_radius)

    if horizon is None:
        hz = certify["horizon"]
        horizon = 3.0 if math.isinf(hz) else 0.95 * hz

    def one_run(radius: int) -> tuple[gal.Trajectory, float]:
        G = fld.GalerkinSet.from_box(scn.d, radius)
        system = gal.GalerkinSystem(G=G, n=scn.n, p=scn.p, datum=datum, forcing=forcing)
        return gal.integrate(system, horizon, rtol=rtol), G.resolution

    traj, res_g = one_run(g_radius)
    ts = np.linspace(0.0, horizon, n_samples + 1)

    def tube_for(resolution: float):
        gc = cert.galerkin_error_certificate(
            scn.datum_norm_n, scn.datum_norm_p, scn.envelope_n, scn.envelope_p,
            scn.n, scn.p, K_n, K_p, resolution=resolution, estimator=est,
            horizon=math.inf if scn.mode == "exponential" else certify["horizon"],
        )
        return gc

    out: dict = {
        "status": "ok",
        "certify": certify,
        "horizon_run": horizon,
        "g_resolution": res_g,
        "trajectory_csv": trajectory_csv(traj, scn.n, scn.p, ts),
        "final_norms": {"n": traj.norm_at(horizon, scn.n), "p": traj.norm_at(horizon, scn.p)},
    }
    try:
        gc = tube_for(res_g)
        out["tube_csv"] = "\n".join(
            ["t,tube"] + [f"{t:.12g},{gc.tube(float(t)):.12g}" for t in ts]
        ) + "\n"
    except cert.Refusal as r:
        gc = None
        out["tube_refusal"] = {"name": r.premise.name, "lhs": r.premise.lhs}

    if forcing is None:
        report = gal.balance_diagnostics(traj, None)
        out["energy"] = {
            "max_energy_increase": report.max_energy_increase,
            "max_energy_residual": report.max_energy_residual,
        }

    if dump_times:
        out["field_dumps"] = {
            f"{t:g}": dump_field_text(traj.field_at(float(t))) for t in dump_times
        }

    if ref_radius is not None:
        traj_ref, res_ref = one_run(ref_radius)
        diffs = []
        for t in ts:
            diff = traj_ref.field_at(float(t)) - traj.field_at(float(t))
            diffs.append(fld.sobolev_norm(diff, scn.n))
        out["reference_resolution"] = res_ref
        rows = ["t,diff,tube,tube_ref"]
        strict_margin = math.inf
        triangle_margin = math.inf
        gc_ref = tube_for(res_ref) if gc is not None else None
        for t, dv in zip(ts, diffs):
            tv = gc.tube(float(t)) if gc is not None else math.nan
            tr = gc_ref.tube(float(t)) if gc_ref is not None else math.nan
            rows.append(f"{t:.12g},{dv:.12g},{tv:.12g},{tr:.12g}")
            if gc is not None:
                strict_margin = min(strict_margin, tv - dv)
                triangle_margin = min(triangle_margin, tv + tr - dv)
        out["containment_csv"] = "\n".join(rows) + "\n"
        if gc is not None:
            out["containment_margin_strict"] = strict_margin
            out["containment_margin_triangle"] = triangle_margin
    return out


def trajectory_csv(traj: gal.Trajectory, n: float, p: float, ts) -> str:
    rows = ["t,norm_0,norm_n,norm_p,div_defect"]
    for t in ts:
        t = float(t)
        rows.append(
            f"{t:.12g},{traj.norm_at(t, 0):.12g},{traj.norm_at(t, n):.12g},"
            f"{traj.norm_at(t, p):.12g},{traj.div_defect_at(t):.6g}"
        )
    return "\n".join(rows) + "\n"


def dump_field_text(f: fld.FourierField) -> str:
    buf = io.StringIO()
    fld.write_field(f, buf)
    return buf.getvalue()


# -- reproduction of the reference table ----------------------------------------------


def _golden(name: str, expected, actual, tol) -> dict:
    if isinstance(expected, (tuple, list)):
        ok = expected[0] <= actual <= expected[1]
        exp_repr = f"[{expected[0]:g}, {expected[1]:g}]"
    else:
        ok = abs(actual - expected) <= tol
        exp_repr = f"{expected:g} +- {tol:g}"
    return {"name": name, "expected": exp_repr, "actual": actual, "pass": bool(ok)}


def reproduce_paper() -> dict:
    """Recompute every published reference number and compare."""
    rows: list[dict] = []
    est = navier_stokes_estimator()

    bc2 = consts.cached_constant(2.0, 3)
    bc4 = consts.cached_constant(4.0, 3)
    rows.append(_golden("K_2", 0.20, bc2.value, 1e-12))
    rows.append(_golden("K_4", 0.067, bc4.value, 1e-12))
    sig = consts.sigma_bracket(2.0, 3, "nonzero", 250.0)
    rows.append(_golden("sigma_2 lower (lambda=250)", (0.03607, 0.03934), sig.lo, 0.0))
    rows.append(_golden("sigma_2 upper (lambda=250)", (0.03607, 0.03934), sig.hi, 0.0))
    k4corner = consts.kernel_bracket((3, 0, 0), 4.0, 3, "nonzero",
                                     consts.default_policy(4.0, 3).cutoff_of_k)
    rows.append(_golden("kernel_4(3,0,0) upper", (0.004382, 0.004383), k4corner.hi, 0.0))

    rows.append(_golden("U(inf)", (1.872, 1.873), est.U_inf, 0.0))
    conv = check_convolution_bound()
    rows.append(_golden("convolution sup", math.sqrt(2.0), conv.sup, 1e-3))
    rows.append(_golden("convolution head bound C", (0.0, 0.6), conv.head_bound, 0.0))

    scns = paper_scenarios()
    r1 = certify_scenario(scns[1], grid_fallback=False)
    g1 = r1["galerkin_certificate"]
    rows.append(_golden("scenario 1 premise shift", 0.161, g1["premise_shift_reported"], 0.005))
    rows.append(_golden("scenario 1 premise decay", 2.31, g1["premise_decay_reported"], 0.005))
    rows.append(_golden("scenario 1 min resolution", 2.76, g1["min_resolution_reported"], 0.01))
    rows.append(_golden("scenario 1 rough tube", 8.71, g1["rough_coefficient_reported"], 0.05))

    r2 = certify_scenario(scns[2], grid_fallback=False)
    g2 = r2["galerkin_certificate"]
    rows.append(_golden("scenario 2 horizon", 1.51, r2["horizon"], 0.01))
    rows.append(_golden("scenario 2 premise shift", 0.163, g2["premise_shift_reported"], 0.005))
    rows.append(_golden("scenario 2 premise decay", 2.41, g2["premise_decay_reported"], 0.005))
    rows.append(_golden("scenario 2 min resolution", 2.88, g2["min_resolution_reported"], 0.01))
    rows.append(_golden("scenario 2 rough tube", 11.1, g2["rough_coefficient_reported"], 0.1))

    r3 = certify_scenario(scns[3], grid_fallback=False)
    g3 = r3["galerkin_certificate"]
    rows.append(_golden("scenario 3 premise shift", 0.121, g3["premise_shift_reported"], 0.005))
    rows.append(_golden("scenario 3 premise decay", 1.75, g3["premise_decay_reported"], 0.005))
    rows.append(_golden("scenario 3 min resolution", 2.00, g3["min_resolution_reported"], 0.01))
    rows.append(_golden("scenario 3 rough tube", 6.10, g3["rough_coefficient_reported"], 0.05))
    lev2 = r3["levels"]["n"]
    lev4 = r3["levels"]["p"]
    rows.append(_golden("global datum bound F_2", 0.877, lev2["exp_F_bound_reported"], 5e-4))
    rows.append(_golden("global datum bound F_4", 2.63, lev4["exp_F_bound_reported"], 5e-3))

    return {"rows": rows, "all_pass": all(r["pass"] for r in rows)}


def reproduce_table_text(rep: dict) -> str:
    lines = [f"{'golden':38s} {'expected':>22s} {'actual':>14s}  verdict"]
    for r in rep["rows"]:
        lines.append(
            f"{r['name']:38s} {r['expected']:>22s} {r['actual']:>14.6g}  {'PASS' if r['pass'] else 'FAIL'}"
        )
    lines.append(f"overall: {'PASS' if rep['all_pass'] else 'FAIL'}")
    return "\n".join(lines) + "\n"
