"""Pydantic request/response models for the certification service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ConstantsRequest(BaseModel):
    d: int = 3
    n_list: list[float] = Field(default_factory=lambda: [2.0, 4.0])
    lattice: str = "nonzero"
    reduced: bool = False
    search_box: Optional[int] = None
    lambda_sigma: Optional[float] = None


class ConstantRow(BaseModel):
    n: float
    d: int
    lattice: str
    K: float
    sup_box_lo: float
    sup_box_hi: float
    sup_argmax: list[int]
    sigma_lo: float
    sigma_hi: float
    policy: str
    lambda_sigma: float
    search_box: int
    box_points_scanned: int
    evidence_note: str


class ConstantsResponse(BaseModel):
    rows: list[ConstantRow]
    elapsed_seconds: float
    reduced: bool
    csv: str


class DatumSpec(BaseModel):
    norm_n: Optional[float] = None
    norm_p: Optional[float] = None
    seed: int = 0
    file: Optional[str] = None


class ForcingSpec(BaseModel):
    kind: str = "none"
    level_n: float = 0.0
    level_p: float = 0.0


class GalerkinSpec(BaseModel):
    box_radius: Optional[int] = None
    members: Optional[list[list[int]]] = None


class ScenarioModel(BaseModel):
    d: int = 3
    n: float = 2.0
    p: float = 4.0
    mode: str = "finite"
    horizon: float | str = "infinity"
    datum: DatumSpec
    forcing: ForcingSpec = Field(default_factory=ForcingSpec)
    galerkin: Optional[GalerkinSpec] = None
    allow_custom_constants: bool = False
    constants: Optional[dict[str, float]] = None

    def as_document(self) -> dict:
        doc: dict[str, Any] = {
            "d": self.d,
            "n": self.n,
            "p": self.p,
            "mode": self.mode,
            "horizon": self.horizon,
            "datum": {k: v for k, v in self.datum.model_dump().items() if v is not None},
            "forcing": self.forcing.model_dump(),
            "allow_custom_constants": self.allow_custom_constants,
        }
        if self.galerkin is not None:
            doc["galerkin"] = {k: v for k, v in self.galerkin.model_dump().items() if v is not None}
        if self.constants is not None:
            doc["constants"] = self.constants
        return doc


class CertifyRequest(BaseModel):
    scenario: ScenarioModel
    grid_fallback: bool = True


class CertifyResponse(BaseModel):
    status: str
    horizon: float
    report: str
    csv: str
    details: dict


class RunRequest(BaseModel):
    scenario: ScenarioModel
    g_radius: int
    ref_radius: Optional[int] = None
    horizon: Optional[float] = None
    rtol: float = 1e-8
    n_samples: int = 20
    force: bool = False
    dump_times: Optional[list[float]] = None


class RunResponse(BaseModel):
    status: str
    details: dict


class GoldenRow(BaseModel):
    name: str
    expected: str
    actual: float
    passed: bool = Field(alias="pass")

    model_config = {"populate_by_name": True}


class ReproduceResponse(BaseModel):
    rows: list[GoldenRow]
    all_pass: bool
    table: str
