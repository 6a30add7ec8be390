"""Scenario execution: one parsed run request in, CSV-ready rows out.

Every scenario returns ``(columns, rows, warnings)`` with plain scalars in
the rows (floats, ints, strings), so the service can ship them as JSON and
the CLI can serialize them byte-identically.  Sweep points are dispatched
to a thread pool (LAPACK releases the GIL) but rows are always emitted in
sweep order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, steady, topology
from .errors import ConfigError, PhysicsError, UnsupportedBranchError
from .model import (ChainSpec, FullyFilled, InitialState, OBC, Occupations,
                    PBC, SingleParticle, derive_rates, site_count)
from .solver import ModeLabel, rapidities_closed_form

SCENARIOS = ("spectrum", "gap", "topology", "steady", "evolve", "lifetime", "sweep")

SWEEPABLE = ("t1", "t2", "gl1", "gg1", "gl2", "gg2", "gl0", "gg0", "n_cells")


@dataclass(frozen=True)
class SweepAxis:
    param: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        if self.param not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.param!r}; one of {SWEEPABLE}")
        if self.step <= 0:
            raise ConfigError("sweep step must be positive")
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        if count < 1:
            raise ConfigError("empty sweep range")
        return [self.start + k * self.step for k in range(count)]


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.count < 1:
            raise ConfigError("times_count must be >= 1")
        if self.stop < self.start:
            raise ConfigError("times must be increasing")
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, self.count)
        if self.spacing == "log":
            if self.start <= 0:
                raise ConfigError("log spacing requires times_start > 0")
            return np.geomspace(self.start, self.stop, self.count)
        raise ConfigError(f"unknown spacing {self.spacing!r}")


@dataclass(frozen=True)
class RunRequest:
    scenario: str
    spec: ChainSpec
    sweep: SweepAxis | None = None
    times: TimeGrid | None = None
    init: InitialState = field(default_factory=FullyFilled)
    lifetime_l: int = 3
    lifetime_n_start: int = 8
    lifetime_n_stop: int = 16
    winding_grid: int = 500
    workers: int | None = None


@dataclass(frozen=True)
class RunResult:
    columns: list[str]
    rows: list[list]
    warnings: list[str]


def parse_init(token: str, n: int | None = None) -> InitialState:
    token = token.strip()
    if token in ("filled", "full"):
        return FullyFilled()
    if token.startswith("single:"):
        return SingleParticle(site=int(token.split(":", 1)[1]))
    if token.startswith("occ:"):
        vals = [float(v) for v in token.split(":", 1)[1].split(",") if v.strip()]
        return Occupations(tuple(vals))
    raise ConfigError(f"unknown initial state {token!r}")


def worker_count(requested: int | None) -> int:
    if requested is not None and requested >= 1:
        return requested
    env = os.environ.get("LSKIN_WORKERS", "")
    if env.strip():
        try:
            k = int(env)
        except ValueError as exc:
            raise ConfigError(f"LSKIN_WORKERS={env!r} is not an integer") from exc
        if k >= 1:
            return k
    return 1


def _sweep_specs(req: RunRequest) -> tuple[list[float], list[ChainSpec]]:
    if req.sweep is None:
        return [math.nan], [req.spec]
    vals = req.sweep.values()
    if req.sweep.param == "n_cells":
        specs = [req.spec.replace(n_cells=int(round(v))) for v in vals]
    else:
        specs = [req.spec.replace(**{req.sweep.param: v}) for v in vals]
    return vals, specs


def _map_points(req: RunRequest, fn, values, specs):
    k = worker_count(req.workers)
    if k == 1 or len(specs) <= 1:
        return [fn(v, s) for v, s in zip(values, specs)]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, values, specs))


def _axis_column(req: RunRequest) -> list[str]:
    return [req.sweep.param] if req.sweep is not None else []


def _axis_cell(req: RunRequest, value: float) -> list:
    return [value] if req.sweep is not None else []


def label_token(label: ModeLabel) -> str:
    """CSV-safe mode label: 'zero' or '<sign>@<q>'."""
    if label.band == 0:
        return "zero"
    return ("+" if label.band > 0 else "-") + f"@{label.q:.10g}"


def run_spectrum(req: RunRequest) -> RunResult:
    def point(value, spec):
        ms = rapidities_closed_form(spec)
        return [(_axis_cell(req, value)
                 + [spec.boundary, label_token(lab), float(b.real), float(b.imag)])
                for lab, b in zip(ms.labels, ms.betas)]

    values, specs = _sweep_specs(req)
    rows = [row for chunk in _map_points(req, point, values, specs) for row in chunk]
    return RunResult(columns=_axis_column(req) + ["boundary", "mode_label", "re_beta", "im_beta"],
                     rows=rows, warnings=[])


def run_gap(req: RunRequest) -> RunResult:
    warnings: list[str] = []

    def point(value, spec):
        rep = topology.gap_closed_form(spec)
        return _axis_cell(req, value) + [
            rep.delta_obc,
            rep.delta_pbc if rep.delta_pbc is not None else math.nan,
            rep.delta_numeric,
            rep.tc if rep.tc is not None else math.nan,
        ]

    values, specs = _sweep_specs(req)
    if derive_rates(req.spec).g2 != 0.0:
        warnings.append("g2 != 0: no closed-form PBC gap branch; delta_pbc is NaN")
    rows = _map_points(req, point, values, specs)
    return RunResult(columns=_axis_column(req) + ["delta_obc", "delta_pbc", "delta_numeric", "tc"],
                     rows=rows, warnings=warnings)


def run_topology(req: RunRequest) -> RunResult:
    def point(value, spec):
        rep = topology.topology_report(spec, req.winding_grid)
        topo = {True: "true", False: "false", None: "indeterminate"}[rep.topological]
        warn = None
        if rep.topological is None:
            where = f"{req.sweep.param}={value:g}" if req.sweep else "this spec"
            warn = f"{where}: regime indeterminate (phase boundary)"
        row = _axis_cell(req, value) + [
            rep.nu, topo, abs(rep.rR), abs(rep.rL), abs(rep.r2), rep.xi,
            min(rep.ep_distances),
        ]
        return row, warn

    values, specs = _sweep_specs(req)
    results = _map_points(req, point, values, specs)
    rows = [row for row, _ in results]
    warnings = [w for _, w in results if w is not None]
    return RunResult(columns=_axis_column(req) + [
        "nu", "topological", "abs_rR", "abs_rL", "abs_r2", "xi", "ep_distance"],
        rows=rows, warnings=warnings)


def run_steady(req: RunRequest) -> RunResult:
    def point(value, spec):
        rates = derive_rates(spec)
        ness = steady.classify_ness(spec)
        try:
            j = steady.steady_current(spec)
        except (UnsupportedBranchError, ConfigError):
            j = math.nan
        modes = ";".join(label_token(m) for m in ness.modes)
        return _axis_cell(req, value) + [
            steady.steady_occupation(rates), ness.kind, modes,
            ness.frequency, j, "true" if rates.solvable else "false",
        ]

    values, specs = _sweep_specs(req)
    rows = _map_points(req, point, values, specs)
    return RunResult(columns=_axis_column(req) + [
        "n_ss", "ness_kind", "ness_modes", "oscillation", "j_ss", "solvable"],
        rows=rows, warnings=[])


def run_evolve(req: RunRequest) -> RunResult:
    if req.times is None:
        raise ConfigError("evolve requires a times grid")
    times = req.times.values()
    traj = dynamics.simulate(req.spec, req.init, times)
    n = site_count(req.spec)
    columns = ["t", "j_c"] + [f"n_{j}" for j in range(1, n + 1)] + ["deltaP"]
    rows = []
    for k, t in enumerate(times):
        rows.append([float(t), float(traj.current[k])]
                    + [float(x) for x in traj.occupations[k]]
                    + [float(traj.polarization[k])])
    return RunResult(columns=columns, rows=rows, warnings=[])


def run_lifetime(req: RunRequest) -> RunResult:
    ns = list(range(req.lifetime_n_start, req.lifetime_n_stop + 1))
    fit = dynamics.lifetime_scan(req.spec.replace(boundary=OBC), ns,
                                 req.lifetime_l, req.init)
    rows = []
    for N, tau in zip(fit.n_cells, fit.taus):
        rows.append([N, 2 * N - 1, tau, fit.slope, fit.intercept,
                     fit.r_squared, fit.delta_eff, fit.xi_fit])
    return RunResult(columns=["n_cells", "L", "tau", "slope", "intercept",
                              "r_squared", "delta_eff", "xi_fit"],
                     rows=rows, warnings=[])


def run_sweep(req: RunRequest) -> RunResult:
    """Per-point summary bundle: gap, winding, skin and steady data."""
    if req.sweep is None:
        raise ConfigError("the sweep scenario requires a sweep axis")

    def point(value, spec):
        gap = topology.gap_closed_form(spec)
        try:
            nu = topology.winding_number(spec, req.winding_grid)
        except PhysicsError:
            nu = 0
        sk = topology.skin_parameter(spec)
        rates = derive_rates(spec)
        ness = steady.classify_ness(spec)
        try:
            j = steady.steady_current(spec)
        except (UnsupportedBranchError, ConfigError):
            j = math.nan
        return _axis_cell(req, value) + [
            gap.delta_numeric, nu, abs(sk.r2), sk.xi,
            steady.steady_occupation(rates), ness.kind, j,
        ]

    values, specs = _sweep_specs(req)
    rows = _map_points(req, point, values, specs)
    return RunResult(columns=_axis_column(req) + [
        "delta_numeric", "nu", "abs_r2", "xi", "n_ss", "ness_kind", "j_ss"],
        rows=rows, warnings=[])


_RUNNERS = {
    "spectrum": run_spectrum,
    "gap": run_gap,
    "topology": run_topology,
    "steady": run_steady,
    "evolve": run_evolve,
    "lifetime": run_lifetime,
    "sweep": run_sweep,
}


def execute(req: RunRequest) -> RunResult:
    if req.scenario not in _RUNNERS:
        raise ConfigError(f"unknown scenario {req.scenario!r}; one of {SCENARIOS}")
    return _RUNNERS[req.scenario](req)
