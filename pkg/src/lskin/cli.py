"""Thin-client command line: parse a config file, call the compute
service, write CSV (and optionally SVG) deterministically.

By default the service runs in-process over an ASGI transport, so no
server needs to be started; ``--server URL`` points the same client at a
remote instance, and ``lskin serve`` starts one.

Exit codes: 0 success, 1 unusable configuration, 2 physics refusal
(exceptional point, defective basis, closed gap); physics warnings go to
stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import httpx

from .errors import ConfigError
from .scenarios import SCENARIOS

_SPEC_KEYS = ("t1", "t2", "gl1", "gg1", "gl2", "gg2", "gl0", "gg0")


def parse_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment."""
    entries: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                entries[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not entries:
        raise ConfigError(f"{path}: empty configuration")
    return entries


def _get_float(cfg: dict, key: str, default: float | None = None) -> float | None:
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key} = {cfg[key]!r} is not a number") from exc


def _get_int(cfg: dict, key: str, default: int | None = None) -> int | None:
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key} = {cfg[key]!r} is not an integer") from exc


def build_request_body(cfg: dict[str, str], scenario: str,
                       workers: int | None) -> dict:
    spec = {k: _get_float(cfg, k, 0.0) for k in _SPEC_KEYS}
    if "t1" not in cfg or "t2" not in cfg:
        raise ConfigError("config must set t1 and t2")
    spec["boundary"] = cfg.get("boundary", "obc").lower()
    spec["n_cells"] = _get_int(cfg, "n_cells", 2)
    body: dict = {"scenario": scenario, "spec": spec}

    if "sweep_param" in cfg:
        body["sweep"] = {
            "param": cfg["sweep_param"],
            "start": _get_float(cfg, "sweep_start"),
            "stop": _get_float(cfg, "sweep_stop"),
            "step": _get_float(cfg, "sweep_step"),
        }
        if None in body["sweep"].values():
            raise ConfigError("sweep requires sweep_start, sweep_stop, sweep_step")
    if "times_start" in cfg or scenario == "evolve":
        times = {
            "start": _get_float(cfg, "times_start"),
            "stop": _get_float(cfg, "times_stop"),
            "count": _get_int(cfg, "times_count"),
            "spacing": cfg.get("times_spacing", "linear"),
        }
        if None in times.values():
            raise ConfigError("evolve requires times_start, times_stop, times_count")
        body["times"] = times
    body["init"] = cfg.get("init", "filled")
    for key in ("lifetime_l", "lifetime_n_start", "lifetime_n_stop", "winding_grid"):
        if key in cfg:
            body[key] = _get_int(cfg, key)
    if workers is not None:
        body["workers"] = workers
    elif "workers" in cfg:
        body["workers"] = _get_int(cfg, "workers")
    return body


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, int):
        return str(value)
    return str(value)


def write_csv(path: str, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("# schema=1\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def post_run(server: str | None, body: dict) -> httpx.Response:
    """POST /run against a remote server or the in-process ASGI app."""
    if server:
        with httpx.Client(base_url=server, timeout=3600.0) as client:
            return client.post("/run", json=body)

    import asyncio

    from .service import app

    async def _call() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://lskin.local",
                                     timeout=None) as client:
            return await client.post("/run", json=body)

    return asyncio.run(_call())


def run_scenario(args) -> int:
    cfg = parse_config(args.config)
    scenario = args.scenario or cfg.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    body = build_request_body(cfg, scenario, args.workers)
    resp = post_run(args.server, body)
    if resp.status_code != 200:
        detail = resp.json().get("detail", resp.text)
        kind = detail.get("kind") if isinstance(detail, dict) else None
        message = detail.get("message") if isinstance(detail, dict) else detail
        print(f"error: {message}", file=sys.stderr)
        return 2 if kind == "physics" else 1
    payload = resp.json()
    for warning in payload.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{scenario}.csv")
    write_csv(csv_path, payload["columns"], payload["rows"])
    print(csv_path)
    if args.svg:
        from .svg import default_plot, render_svg
        plot = default_plot(scenario, payload["columns"],
                            log_times=cfg.get("times_spacing", "") == "log")
        if plot is None:
            print("warning: no default figure for this scenario/config",
                  file=sys.stderr)
        else:
            svg_path = os.path.join(args.out, f"{scenario}.svg")
            render_svg(csv_path, plot, svg_path)
            print(svg_path)
    return 0


def serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lskin",
        description="Dissipative-SSH chain solver: spectra, steady states, "
                    "dynamics and topology diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--svg", action="store_true", help="also render an SVG figure")
        p.add_argument("--workers", type=int, default=None,
                       help="sweep worker count (falls back to LSKIN_WORKERS)")
        p.add_argument("--server", default=None,
                       help="remote service URL (default: in-process)")
        p.set_defaults(func=run_scenario, scenario=name)
    p = sub.add_parser("serve", help="start the compute service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.set_defaults(func=serve, scenario=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
