"""FastAPI application wrapping the core solver package.

Error mapping: malformed input raises ConfigError -> 400, parameter points
where a construction is undefined raise PhysicsError -> 422 with
``detail.kind = "physics"``.  Clients (including the bundled CLI) key
their exit codes off that distinction.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigError, PhysicsError, UnsupportedBranchError
from ..model import derive_rates
from ..scenarios import execute, label_token
from ..solver import rapidities_closed_form
from ..steady import classify_ness, steady_current, steady_occupation
from ..topology import topology_report
from .models import (HealthResponse, RapidityResponse, RunModel, RunResponse,
                     SpecModel, SteadyResponse, TopologyResponse)

app = FastAPI(
    title="lskin",
    version=__version__,
    description=("Spectra, steady states, dynamics and topology diagnostics "
                 "of a bond-dissipative SSH chain"),
)


def _physics_422(exc: PhysicsError) -> HTTPException:
    return HTTPException(status_code=422,
                         detail={"kind": "physics", "message": str(exc)})


def _config_400(exc: ConfigError) -> HTTPException:
    return HTTPException(status_code=400,
                         detail={"kind": "config", "message": str(exc)})


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/run", response_model=RunResponse)
def run(body: RunModel) -> RunResponse:
    try:
        result = execute(body.to_request())
    except ConfigError as exc:
        raise _config_400(exc) from exc
    except PhysicsError as exc:
        raise _physics_422(exc) from exc
    return RunResponse(columns=result.columns, rows=result.rows,
                       warnings=result.warnings)


@app.post("/rapidities", response_model=RapidityResponse)
def rapidities(body: SpecModel) -> RapidityResponse:
    try:
        ms = rapidities_closed_form(body.to_spec())
    except ConfigError as exc:
        raise _config_400(exc) from exc
    return RapidityResponse(labels=[label_token(l) for l in ms.labels],
                            re_beta=[float(b.real) for b in ms.betas],
                            im_beta=[float(b.imag) for b in ms.betas])


@app.post("/topology", response_model=TopologyResponse)
def topology_endpoint(body: SpecModel) -> TopologyResponse:
    try:
        rep = topology_report(body.to_spec())
    except ConfigError as exc:
        raise _config_400(exc) from exc
    except PhysicsError as exc:
        raise _physics_422(exc) from exc
    return TopologyResponse(nu=rep.nu, topological=rep.topological,
                            abs_rR=abs(rep.rR), abs_rL=abs(rep.rL),
                            abs_r2=abs(rep.r2), xi=rep.xi,
                            ep_distances=list(rep.ep_distances))


@app.post("/steady", response_model=SteadyResponse)
def steady_endpoint(body: SpecModel) -> SteadyResponse:
    spec = body.to_spec()
    try:
        rates = derive_rates(spec)
        ness = classify_ness(spec)
        n_ss = steady_occupation(rates)
    except ConfigError as exc:
        raise _config_400(exc) from exc
    except PhysicsError as exc:
        raise _physics_422(exc) from exc
    try:
        j = steady_current(spec)
    except (UnsupportedBranchError, ConfigError):
        j = None
    return SteadyResponse(n_ss=n_ss, ness_kind=ness.kind,
                          ness_modes=[label_token(m) for m in ness.modes],
                          oscillation=ness.frequency,
                          j_ss=j if j is None or math.isfinite(j) else None,
                          solvable=rates.solvable)
