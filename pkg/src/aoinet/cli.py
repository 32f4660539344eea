"""Command line front end: engine reports, simulation runs, sweeps, optimizers.

Artifacts are machine-readable: sweeps emit CSV with the fixed schema
(param,engine,source,aoi,ci_half_width,error) and floats at 12 significant
digits, so identical spec + seed reproduces identical bytes.
"""
from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytic import (
    aoi_hetero_n2,
    aoi_hetero_n3,
    aoi_lcfs_homogeneous,
    aoi_multi_source_n2,
    aoi_multi_source_n3,
)
from .builders import (
    build_heterogeneous_single_source,
    build_multi_source_homogeneous,
    build_single_source_homogeneous,
)
from .model import (
    ConfigError,
    HomogeneityClass,
    NetworkConfig,
    QueueDiscipline,
    classify,
    load_config,
)
from .optimize import grid_minimize, optimal_hetero_split_n2, optimal_weighted_split
from .shs import solve_age
from .sim import SimParams, replicate

_SWEEP_PARAMETERS = (
    "servers",
    "per-server-arrival",
    "total-arrival",
    "tracked-source-rate",
    "mu1-share",
)
_ENGINE_NAMES = ("analytic", "shs", "sim")
_RECIPES = ("fig4", "fig5", "fig6")
CSV_HEADER = "param,engine,source,aoi,ci_half_width,error"


class EngineError(RuntimeError):
    """No engine of the requested kind applies to this config."""


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def closed_form_aoi(config: NetworkConfig, source: int) -> float:
    """Route to the closed form for this config class, for one source."""
    if config.discipline is not QueueDiscipline.LCFS_S:
        raise EngineError(
            f"no closed form for discipline '{config.discipline.value}'; use simulate"
        )
    cls = classify(config)
    n = config.servers
    if cls is HomogeneityClass.HOMOGENEOUS_SINGLE_SOURCE:
        return aoi_lcfs_homogeneous(n, config.arrival_rates[0][0], config.service_rates[0])
    if cls is HomogeneityClass.HOMOGENEOUS_MULTI_SOURCE:
        lam_total = sum(row[0] for row in config.arrival_rates)
        mu = config.service_rates[0]
        if n == 2:
            return aoi_multi_source_n2(config.arrival_rates[source][0], lam_total, mu)
        if n == 3:
            return aoi_multi_source_n3(config.arrival_rates[source][0], lam_total, mu)
        raise EngineError(f"no closed form for {n} shared servers; use the shs engine")
    if cls is HomogeneityClass.HETEROGENEOUS_SINGLE_SOURCE:
        row = config.arrival_rates[0]
        if n == 2:
            return aoi_hetero_n2(row[0], row[1], *config.service_rates)
        if n == 3:
            return aoi_hetero_n3(row, config.service_rates)
        raise EngineError(f"no closed form for {n} distinct servers; use the shs engine")
    raise EngineError("no closed form for multi-source networks with distinct servers")


def chain_aoi(config: NetworkConfig, source: int) -> float:
    """Build and solve the exact chain model for this config class, for one source."""
    if config.discipline is not QueueDiscipline.LCFS_S:
        raise EngineError(
            f"no chain model for discipline '{config.discipline.value}'; use simulate"
        )
    cls = classify(config)
    n = config.servers
    if cls is HomogeneityClass.HOMOGENEOUS_SINGLE_SOURCE:
        model = build_single_source_homogeneous(
            n, config.arrival_rates[0][0], config.service_rates[0]
        )
    elif cls is HomogeneityClass.HOMOGENEOUS_MULTI_SOURCE:
        model = build_multi_source_homogeneous(
            n,
            config.sources,
            source,
            [row[0] for row in config.arrival_rates],
            config.service_rates[0],
        )
    elif cls is HomogeneityClass.HETEROGENEOUS_SINGLE_SOURCE:
        model = build_heterogeneous_single_source(
            config.arrival_rates[0], config.service_rates
        )
    else:
        raise EngineError("no chain model for multi-source networks with distinct servers")
    return solve_age(model).aoi


@dataclass
class SweepRow:
    param: float
    engine: str
    source: int
    aoi: float | None
    ci_half_width: float | None
    error: str = ""


@dataclass
class SweepSpec:
    """A declarative sweep: one parameter, one grid, one or more engines."""

    config: NetworkConfig
    parameter: str
    grid: tuple[float, ...]
    engines: tuple[str, ...]
    disciplines: tuple[QueueDiscipline, ...]
    horizon: float = 1e5
    warmup: float | None = None
    seed: int = 0
    batches: int = 32
    replications: int = 1


@dataclass
class SweepResult:
    rows: list[SweepRow]
    seed: int
    horizon: float
    timestamp: str
    version: str


def load_sweep_spec(text: str) -> SweepSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"parse error at line {e.lineno} column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(doc, dict) or "config" not in doc or "sweep" not in doc:
        raise ConfigError("sweep spec must be an object with 'config' and 'sweep'")
    config = load_config(json.dumps(doc["config"]))
    sw = doc["sweep"]
    if not isinstance(sw, dict):
        raise ConfigError("'sweep' must be an object")
    parameter = sw.get("parameter")
    if parameter not in _SWEEP_PARAMETERS:
        raise ConfigError(
            f"sweep parameter must be one of {', '.join(_SWEEP_PARAMETERS)}"
        )
    grid = sw.get("grid")
    if (
        not isinstance(grid, list)
        or not grid
        or not all(isinstance(v, (int, float)) for v in grid)
    ):
        raise ConfigError("sweep grid must be a non-empty list of numbers")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep grid must be strictly increasing")
    engines = sw.get("engines")
    if (
        not isinstance(engines, list)
        or not engines
        or any(e not in _ENGINE_NAMES for e in engines)
    ):
        raise ConfigError(f"sweep engines must be drawn from {', '.join(_ENGINE_NAMES)}")
    raw_disc = sw.get("disciplines", [config.discipline.value])
    try:
        disciplines = tuple(QueueDiscipline(d) for d in raw_disc)
    except ValueError:
        raise ConfigError("unknown discipline in sweep 'disciplines'") from None
    spec = SweepSpec(
        config=config,
        parameter=parameter,
        grid=tuple(float(v) for v in grid),
        engines=tuple(engines),
        disciplines=disciplines,
        horizon=float(sw.get("horizon", 1e5)),
        warmup=None if sw.get("warmup") is None else float(sw["warmup"]),
        seed=int(sw.get("seed", 0)),
        batches=int(sw.get("batches", 32)),
        replications=int(sw.get("replications", 1)),
    )
    if parameter == "servers" and any(v != int(v) or v < 1 for v in spec.grid):
        raise ConfigError("servers grid values must be positive integers")
    return spec


def apply_parameter(config: NetworkConfig, parameter: str, value: float) -> NetworkConfig:
    """Materialize one grid point as a concrete config."""
    n = config.servers
    if parameter == "servers":
        cls = classify(config)
        if cls not in (
            HomogeneityClass.HOMOGENEOUS_SINGLE_SOURCE,
            HomogeneityClass.HOMOGENEOUS_MULTI_SOURCE,
        ):
            raise EngineError(
                "the servers sweep holds per-source totals fixed and needs an "
                "exchangeable-server base config"
            )
        k = int(value)
        rows = [[config.source_total(i) / k] * k for i in range(config.sources)]
        return NetworkConfig(
            config.sources, k, rows, [config.service_rates[0]] * k, config.discipline
        )
    if parameter == "per-server-arrival":
        if config.sources != 1:
            raise EngineError("per-server-arrival sweeps need a single-source config")
        if value <= 0:
            raise EngineError("per-server-arrival values must be > 0")
        return replace(config, arrival_rates=((value,) * n,))
    if parameter == "total-arrival":
        if config.sources != 1:
            raise EngineError("total-arrival sweeps need a single-source config")
        if value <= 0:
            raise EngineError("total-arrival values must be > 0")
        return replace(config, arrival_rates=((value / n,) * n,))
    if parameter == "tracked-source-rate":
        if classify(config) is not HomogeneityClass.HOMOGENEOUS_MULTI_SOURCE:
            raise EngineError(
                "tracked-source-rate sweeps need an exchangeable-server multi-source config"
            )
        if value <= 0:
            raise EngineError("tracked-source-rate values must be > 0")
        rows = [(value,) * n] + [config.arrival_rates[i] for i in range(1, config.sources)]
        return replace(config, arrival_rates=tuple(rows))
    if parameter == "mu1-share":
        if config.servers != 2:
            raise EngineError("mu1-share sweeps need a two-server config")
        total = sum(config.service_rates)
        if not (0 < value < total):
            raise EngineError(
                f"mu1-share values must lie strictly between 0 and {total:g}"
            )
        return replace(config, service_rates=(value, total - value))
    raise EngineError(f"unknown sweep parameter '{parameter}'")


def _max_workers(points: int) -> int:
    cap = os.cpu_count() or 1
    env = os.environ.get("AOI_THREADS")
    if env is not None:
        cap = max(1, int(env))
    return max(1, min(points, cap))


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every grid point with every engine; rows stay in grid order."""

    def point_rows(value: float) -> list[SweepRow]:
        rows: list[SweepRow] = []
        try:
            cfg = apply_parameter(spec.config, spec.parameter, value)
        except (ValueError, RuntimeError) as e:
            for engine in spec.engines:
                labels = (
                    [f"sim:{d.value}" for d in spec.disciplines]
                    if engine == "sim"
                    else [engine]
                )
                rows.extend(
                    SweepRow(value, label, 0, None, None, str(e)) for label in labels
                )
            return rows
        for engine in spec.engines:
            if engine in ("analytic", "shs"):
                fn = closed_form_aoi if engine == "analytic" else chain_aoi
                for i in range(cfg.sources):
                    try:
                        rows.append(SweepRow(value, engine, i, fn(cfg, i), None))
                    except (ValueError, RuntimeError) as e:
                        rows.append(SweepRow(value, engine, i, None, None, str(e)))
            else:
                for disc in spec.disciplines:
                    label = f"sim:{disc.value}"
                    try:
                        result = replicate(
                            SimParams(
                                config=replace(cfg, discipline=disc),
                                horizon=spec.horizon,
                                seed=spec.seed,
                                warmup=spec.warmup,
                                batches=spec.batches,
                            ),
                            spec.replications,
                        )
                        rows.extend(
                            SweepRow(value, label, i, result.aoi[i], result.ci_half_width[i])
                            for i in range(cfg.sources)
                        )
                    except (ValueError, RuntimeError) as e:
                        rows.extend(
                            SweepRow(value, label, i, None, None, str(e))
                            for i in range(cfg.sources)
                        )
        return rows

    with ThreadPoolExecutor(max_workers=_max_workers(len(spec.grid))) as ex:
        per_point = list(ex.map(point_rows, spec.grid))
    return SweepResult(
        rows=[row for rows in per_point for row in rows],
        seed=spec.seed,
        horizon=spec.horizon,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        version=__version__,
    )


def sweep_csv(result: SweepResult) -> str:
    lines = [CSV_HEADER]
    for r in result.rows:
        lines.append(
            ",".join(
                (
                    _fmt(r.param),
                    r.engine,
                    str(r.source),
                    "" if r.aoi is None else _fmt(r.aoi),
                    "" if r.ci_half_width is None else _fmt(r.ci_half_width),
                    r.error.replace(",", ";"),
                )
            )
        )
    return "\n".join(lines) + "\n"


def sweep_json(result: SweepResult) -> str:
    doc = {
        "metadata": {
            "seed": result.seed,
            "horizon": result.horizon,
            "timestamp": result.timestamp,
            "version": result.version,
        },
        "rows": [
            {
                "param": r.param,
                "engine": r.engine,
                "source": r.source,
                "aoi": r.aoi,
                "ci_half_width": r.ci_half_width,
                "error": r.error,
            }
            for r in result.rows
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _read_spec_text(name: str) -> str:
    if name in _RECIPES:
        return (
            importlib.resources.files("aoinet.recipes")
            .joinpath(f"{name}.json")
            .read_text(encoding="utf-8")
        )
    return Path(name).read_text(encoding="utf-8")


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_analytic(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config).read_text(encoding="utf-8"))
    entries = []
    values = {}
    for i in range(config.sources):
        entry: dict[str, object] = {"source": i}
        for name, fn in (("analytic", closed_form_aoi), ("shs", chain_aoi)):
            try:
                entry[name] = fn(config, i)
                values.setdefault(i, {})[name] = entry[name]
            except (ValueError, RuntimeError) as e:
                entry[f"{name}_error"] = str(e)
        entries.append(entry)
    if not values:
        sys.stderr.write("aoinet: error: no analytic engine applies: "
                         f"{entries[0].get('analytic_error', '')}\n")
        return 2
    disagreements = [
        abs(v["analytic"] - v["shs"]) / max(abs(v["analytic"]), abs(v["shs"]))
        for v in values.values()
        if "analytic" in v and "shs" in v
    ]
    worst = max(disagreements) if disagreements else None
    if args.format == "json":
        doc = {"sources": entries, "max_rel_disagreement": worst}
        _write_out(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        lines = []
        for entry in entries:
            parts = [f"source {entry['source']}:"]
            for name in ("analytic", "shs"):
                if name in entry:
                    parts.append(f"{name}={_fmt(entry[name])}")
                else:
                    parts.append(f"{name}=error({entry[f'{name}_error']})")
            lines.append(" ".join(parts))
        lines.append(
            "max relative disagreement: "
            + ("n/a" if worst is None else f"{worst:.3e}")
        )
        _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config).read_text(encoding="utf-8"))
    params = SimParams(
        config=config,
        horizon=args.horizon,
        seed=args.seed,
        warmup=args.warmup,
        batches=args.batches,
    )
    result = replicate(params, args.replications)
    if args.format == "json":
        doc = {
            "aoi": list(result.aoi),
            "ci_half_width": list(result.ci_half_width),
            "deliveries": result.deliveries,
            "useful_deliveries": result.useful_deliveries,
            "discarded_stale": result.discarded_stale,
            "seed": result.seed,
            "horizon": result.horizon,
            "warmup": result.warmup,
            "replications": result.replications,
        }
        _write_out(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        lines = [
            f"source {i}: aoi={_fmt(a)} ci_half_width={_fmt(c)}"
            for i, (a, c) in enumerate(zip(result.aoi, result.ci_half_width))
        ]
        lines.append(
            f"deliveries={result.deliveries} useful={result.useful_deliveries} "
            f"stale={result.discarded_stale}"
        )
        _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep_spec(_read_spec_text(args.spec))
    if args.seed is not None:
        spec.seed = args.seed
    if args.horizon is not None:
        spec.horizon = args.horizon
    result = run_sweep(spec)
    text = sweep_json(result) if args.format == "json" else sweep_csv(result)
    _write_out(text, args.out)
    return 0 if all(not r.error for r in result.rows) else 1


def _optimize_report(split, delta: float | None, fmt: str, out: str | None) -> None:
    if fmt == "json":
        doc = {
            "rates": list(split.rates),
            "objective": split.objective,
            "boundary": split.boundary,
            "grid_delta": delta,
        }
        _write_out(json.dumps(doc, indent=2) + "\n", out)
    else:
        lines = [
            "rates: " + " ".join(_fmt(r) for r in split.rates),
            f"objective: {_fmt(split.objective)}",
            f"boundary: {'yes' if split.boundary else 'no'}",
            "grid check delta: "
            + ("skipped (needs 2 rates)" if delta is None else f"{delta:.3e}"),
        ]
        _write_out("\n".join(lines) + "\n", out)


def cmd_optimize(args: argparse.Namespace) -> int:
    if args.spec is not None:
        doc = json.loads(_read_spec_text(args.spec))
        opt = doc.get("optimize") if isinstance(doc, dict) else None
        if not isinstance(opt, dict) or opt.get("kind") != "hetero-n2":
            raise ConfigError("optimize spec must contain {'optimize': {'kind': 'hetero-n2', ...}}")
        lam = float(opt["total_arrival"])
        mu_total = float(opt["service_total"])
        grid = opt.get("mu1_grid")
        if not isinstance(grid, list) or not grid:
            raise ConfigError("optimize spec needs a non-empty mu1_grid")
        if any(not (0 < v < mu_total) for v in grid):
            raise ConfigError("mu1_grid values must lie strictly between 0 and service_total")
        lines = ["mu1,lambda1,lambda2,objective,boundary,grid_delta"]
        for mu1 in grid:
            mu2 = mu_total - mu1
            split = optimal_hetero_split_n2(lam, mu1, mu2)
            gx, _ = grid_minimize(
                lambda l1: aoi_hetero_n2(l1, lam - l1, mu1, mu2), 0.0, lam, tol=1e-9 * lam
            )
            lines.append(
                ",".join(
                    (
                        _fmt(mu1),
                        _fmt(split.rates[0]),
                        _fmt(split.rates[1]),
                        _fmt(split.objective),
                        "true" if split.boundary else "false",
                        _fmt(abs(split.rates[0] - gx)),
                    )
                )
            )
        _write_out("\n".join(lines) + "\n", args.out)
        return 0

    if args.kind == "weighted":
        if args.weights is None or args.total is None or args.mu is None:
            raise ConfigError("weighted optimize needs --weights, --total and --mu")
        weights = [float(w) for w in args.weights.split(",")]
        split = optimal_weighted_split(weights, args.total, args.mu)
        delta = None
        if len(weights) == 2:
            lam = args.total
            eps = 1e-9 * lam

            def objective(l1: float) -> float:
                return weights[0] * aoi_multi_source_n2(l1, lam, args.mu) + weights[
                    1
                ] * aoi_multi_source_n2(lam - l1, lam, args.mu)

            gx, _ = grid_minimize(objective, eps, lam - eps, tol=1e-9 * lam)
            delta = abs(split.rates[0] - gx)
        _optimize_report(split, delta, args.format, args.out)
        return 0

    if args.kind == "hetero-n2":
        if args.total is None or args.mu1 is None or args.mu2 is None:
            raise ConfigError("hetero-n2 optimize needs --total, --mu1 and --mu2")
        split = optimal_hetero_split_n2(args.total, args.mu1, args.mu2)
        lam = args.total
        gx, _ = grid_minimize(
            lambda l1: aoi_hetero_n2(l1, lam - l1, args.mu1, args.mu2),
            0.0,
            lam,
            tol=1e-9 * lam,
        )
        _optimize_report(split, abs(split.rates[0] - gx), args.format, args.out)
        return 0

    raise ConfigError("optimize needs --spec or --kind")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aoinet",
        description="Average age of information for multi-source multi-server update networks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="closed-form and chain engine values for a config")
    pa.add_argument("--config", required=True, help="network config JSON file")
    pa.add_argument("--format", choices=("text", "json"), default="text")
    pa.add_argument("--out", help="write output here instead of stdout")
    pa.set_defaults(fn=cmd_analytic)

    ps = sub.add_parser("simulate", help="simulate a config and report per-source age")
    ps.add_argument("--config", required=True, help="network config JSON file")
    ps.add_argument("--horizon", type=float, default=1e5)
    ps.add_argument("--warmup", type=float, default=None, help="default: 1%% of horizon")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--batches", type=int, default=32)
    ps.add_argument("--replications", type=int, default=1)
    ps.add_argument("--format", choices=("text", "json"), default="text")
    ps.add_argument("--out")
    ps.set_defaults(fn=cmd_simulate)

    pw = sub.add_parser("sweep", help="evaluate engines across a parameter grid")
    pw.add_argument(
        "--spec",
        required=True,
        help=f"sweep spec JSON file, or a built-in recipe name ({', '.join(_RECIPES)})",
    )
    pw.add_argument("--seed", type=int, default=None, help="override the spec seed")
    pw.add_argument("--horizon", type=float, default=None, help="override the spec horizon")
    pw.add_argument("--format", choices=("csv", "json"), default="csv")
    pw.add_argument("--out")
    pw.set_defaults(fn=cmd_sweep)

    po = sub.add_parser("optimize", help="closed-form rate splits with a grid cross-check")
    po.add_argument("--spec", default=None, help="optimizer sweep spec (e.g. fig5)")
    po.add_argument("--kind", choices=("weighted", "hetero-n2"), default=None)
    po.add_argument("--weights", help="comma-separated weights (weighted kind)")
    po.add_argument("--total", type=float, help="total arrival rate to split")
    po.add_argument("--mu", type=float, help="per-server service rate (weighted kind)")
    po.add_argument("--mu1", type=float, help="first service rate (hetero-n2 kind)")
    po.add_argument("--mu2", type=float, help="second service rate (hetero-n2 kind)")
    po.add_argument("--format", choices=("text", "json"), default="text")
    po.add_argument("--out")
    po.set_defaults(fn=cmd_optimize)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as e:
        sys.stderr.write(f"aoinet: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
