"""HTTP service exposing the certification pipeline.

Thin JSON wrapper over the core API: models arrive inline in the same
document shape the file loader accepts, and responses carry the same report
dictionaries the CLI writes to disk.  Run with `srgstab serve` (requires
uvicorn) or mount `app` in any ASGI server.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .cpl import CplParams
from .criteria import (
    SrgOptions,
    certify_linear,
    certify_with_cpl,
    compare_criteria,
    critical_scr,
)
from .lti import EvaluationError, FrequencyGrid
from .modelio import ModelFormatError, cscr_to_dict, model_from_dict, report_to_dict

app = FastAPI(title="srgstab", version=__version__)


class GridSpec(BaseModel):
    f_min_hz: float = 1e-2
    f_max_hz: float = 1e3
    n_points: int = Field(default=400, ge=2)
    spacing: Literal["log", "linear"] = "log"
    include_hz: tuple[float, ...] = (50.0,)

    def build(self) -> FrequencyGrid:
        import numpy as np
        return FrequencyGrid.from_hz(
            self.f_min_hz, self.f_max_hz, self.n_points, self.spacing,
            include=tuple(2 * np.pi * f for f in self.include_hz))


class SrgOptionsSpec(BaseModel):
    n_support: int = Field(default=512, ge=8)
    refine_tol: Optional[float] = None
    tau_points: int = Field(default=64, ge=2)

    def build(self) -> SrgOptions:
        return SrgOptions(n_support=self.n_support, refine_tol=self.refine_tol,
                          tau_points=self.tau_points)


class CplSpec(BaseModel):
    p_c: float = Field(ge=0)
    q_c: float = Field(ge=0)
    v_min: float = Field(gt=0)

    def build(self) -> CplParams:
        return CplParams(p_c=self.p_c, q_c=self.q_c, v_min=self.v_min)


class CertifyRequest(BaseModel):
    converter: dict
    grid_model: dict
    grid: GridSpec = GridSpec()
    options: SrgOptionsSpec = SrgOptionsSpec()


class CertifyCplRequest(CertifyRequest):
    cpl: CplSpec
    ripple_rho: float = 0.05


class CscrRequest(BaseModel):
    converter: dict
    grid: GridSpec = GridSpec()
    options: SrgOptionsSpec = SrgOptionsSpec()


class CertifyResponse(BaseModel):
    verdict: str
    report: dict


class CscrResponse(BaseModel):
    cscr: Optional[float]
    no_constraint: bool
    result: dict


class CompareResponse(BaseModel):
    verdict: str
    table: str
    criteria: list[dict]
    report: dict


def _model(doc: dict, name: str):
    try:
        return model_from_dict(doc, context=name)
    except ModelFormatError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _run(fn):
    try:
        return fn()
    except (ValueError, EvaluationError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/certify", response_model=CertifyResponse)
def certify(req: CertifyRequest) -> CertifyResponse:
    Yc = _model(req.converter, "converter")
    Yg = _model(req.grid_model, "grid_model")
    report = _run(lambda: certify_linear(Yc, Yg, req.grid.build(),
                                         req.options.build()))
    return CertifyResponse(verdict=report.verdict, report=report_to_dict(report))


@app.post("/certify-cpl", response_model=CertifyResponse)
def certify_cpl(req: CertifyCplRequest) -> CertifyResponse:
    Yc = _model(req.converter, "converter")
    y_l = _model(req.grid_model, "grid_model")
    report = _run(lambda: certify_with_cpl(Yc, y_l, req.cpl.build(),
                                           req.grid.build(), req.options.build(),
                                           ripple_rho=req.ripple_rho))
    return CertifyResponse(verdict=report.verdict, report=report_to_dict(report))


@app.post("/cscr", response_model=CscrResponse)
def cscr(req: CscrRequest) -> CscrResponse:
    Yc = _model(req.converter, "converter")
    result = _run(lambda: critical_scr(Yc, req.grid.build(), req.options.build()))
    return CscrResponse(cscr=None if result.no_constraint else result.cscr,
                        no_constraint=result.no_constraint,
                        result=cscr_to_dict(result))


@app.post("/compare", response_model=CompareResponse)
def compare(req: CertifyRequest) -> CompareResponse:
    Yc = _model(req.converter, "converter")
    Yg = _model(req.grid_model, "grid_model")
    table = _run(lambda: compare_criteria(Yc, Yg, req.grid.build(),
                                          req.options.build()))
    criteria = [
        {"criterion": r.criterion, "verdict": r.verdict,
         "failing_bands_hz": [list(b) for b in r.failing_bands_hz],
         "inapplicable_bands_hz": [list(b) for b in r.inapplicable_bands_hz],
         "note": r.note}
        for r in table.rows
    ]
    return CompareResponse(verdict=table.report.verdict, table=table.as_text(),
                           criteria=criteria, report=report_to_dict(table.report))
