"""FastAPI application wrapping the certification core.

The expensive shared state (certified bilinear constants) is cached for
the lifetime of the process, so a long-running service answers repeated
certification requests cheaply.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import workflows as wf
from ..certificates import Refusal
from .schemas import (
    CertifyRequest,
    CertifyResponse,
    ConstantsRequest,
    ConstantsResponse,
    ReproduceResponse,
    RunRequest,
    RunResponse,
)

app = FastAPI(
    title="nscert",
    description="Certified spectral Galerkin solutions of the incompressible "
    "Navier-Stokes equations on the torus",
    version="0.1.0",
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/constants", response_model=ConstantsResponse)
def constants(req: ConstantsRequest) -> ConstantsResponse:
    for n in req.n_list:
        if n <= req.d / 2:
            raise HTTPException(status_code=422, detail=f"need n > d/2, got n={n}, d={req.d}")
    table = wf.constants_table(
        req.n_list,
        req.d,
        lattice=req.lattice,
        reduced=req.reduced,
        search_box=req.search_box,
        lambda_sigma=req.lambda_sigma,
    )
    return ConstantsResponse(**table, csv=wf.constants_csv(table))


def _sanitize(obj):
    """JSON cannot carry inf; encode it as the string 'infinity'."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "infinity" if obj > 0 else "-infinity"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


@app.post("/certify", response_model=CertifyResponse)
def certify(req: CertifyRequest) -> CertifyResponse:
    try:
        scn = wf.parse_scenario(req.scenario.as_document())
        result = wf.certify_scenario(scn, grid_fallback=req.grid_fallback)
    except wf.ScenarioError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    horizon = result["horizon"]
    return CertifyResponse(
        status=result["status"],
        horizon=1e308 if math.isinf(horizon) else horizon,
        report=wf.render_certificate_report(result),
        csv=wf.certificate_csv(result),
        details=_sanitize(result),
    )


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    try:
        scn = wf.parse_scenario(req.scenario.as_document())
        result = wf.run_scenario(
            scn,
            g_radius=req.g_radius,
            ref_radius=req.ref_radius,
            horizon=req.horizon,
            rtol=req.rtol,
            n_samples=req.n_samples,
            force=req.force,
            dump_times=req.dump_times,
        )
    except wf.ScenarioError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except Refusal as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    return RunResponse(status=result["status"], details=_sanitize(result))


@app.post("/reproduce-paper", response_model=ReproduceResponse)
def reproduce() -> ReproduceResponse:
    rep = wf.reproduce_paper()
    rows = [
        {"name": r["name"], "expected": r["expected"], "actual": r["actual"], "pass": r["pass"]}
        for r in rep["rows"]
    ]
    return ReproduceResponse(rows=rows, all_pass=rep["all_pass"], table=wf.reproduce_table_text(rep))
