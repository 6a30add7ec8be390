"""Pydantic request/response schemas of the compute service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from ..errors import ConfigError
from ..model import ChainSpec
from ..scenarios import RunRequest, SweepAxis, TimeGrid, parse_init


class SpecModel(BaseModel):
    t1: float
    t2: float
    gl1: float = 0.0
    gg1: float = 0.0
    gl2: float = 0.0
    gg2: float = 0.0
    gl0: float = 0.0
    gg0: float = 0.0
    boundary: Literal["pbc", "obc"] = "obc"
    n_cells: int = Field(default=2, ge=2)

    def to_spec(self) -> ChainSpec:
        return ChainSpec(**self.model_dump())


class SweepModel(BaseModel):
    param: str
    start: float
    stop: float
    step: float

    def to_axis(self) -> SweepAxis:
        return SweepAxis(self.param, self.start, self.stop, self.step)


class TimesModel(BaseModel):
    start: float
    stop: float
    count: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"

    def to_grid(self) -> TimeGrid:
        return TimeGrid(self.start, self.stop, self.count, self.spacing)


class RunModel(BaseModel):
    scenario: Literal["spectrum", "gap", "topology", "steady",
                      "evolve", "lifetime", "sweep"]
    spec: SpecModel
    sweep: Optional[SweepModel] = None
    times: Optional[TimesModel] = None
    init: str = "filled"
    lifetime_l: int = Field(default=3, ge=1)
    lifetime_n_start: int = Field(default=8, ge=2)
    lifetime_n_stop: int = Field(default=16, ge=2)
    winding_grid: int = Field(default=500, ge=100)
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("init")
    @classmethod
    def _init_parseable(cls, v: str) -> str:
        parse_init(v)  # raises ConfigError on malformed tokens
        return v

    def to_request(self) -> RunRequest:
        return RunRequest(
            scenario=self.scenario,
            spec=self.spec.to_spec(),
            sweep=self.sweep.to_axis() if self.sweep else None,
            times=self.times.to_grid() if self.times else None,
            init=parse_init(self.init),
            lifetime_l=self.lifetime_l,
            lifetime_n_start=self.lifetime_n_start,
            lifetime_n_stop=self.lifetime_n_stop,
            winding_grid=self.winding_grid,
            workers=self.workers,
        )


class RunResponse(BaseModel):
    columns: list[str]
    rows: list[list]
    warnings: list[str] = []


class RapidityResponse(BaseModel):
    labels: list[str]
    re_beta: list[float]
    im_beta: list[float]


class TopologyResponse(BaseModel):
    nu: int
    topological: Optional[bool]
    abs_rR: float
    abs_rL: float
    abs_r2: float
    xi: float
    ep_distances: list[float]


class SteadyResponse(BaseModel):
    n_ss: float
    ness_kind: str
    ness_modes: list[str]
    oscillation: float
    j_ss: Optional[float]
    solvable: bool


class HealthResponse(BaseModel):
    status: str
    version: str
