"""Command-line entry point.

Commands: ``gen-configs`` (sample a configuration pool), ``solve`` (one
worker on one instance), ``portfolio`` (N workers from a run manifest),
``simulate`` (portfolio simulation over recorded traces), and ``repro``
(desk-scale end-to-end preset: pool, per-config traces, ranking, and the
portfolio-size sweep, all under the simulated clock).

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible or empty
result.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import configspace, instances, metrics, orchestrator, simulator
from .alns import STATUS_OK, build_trace, run_worker
from .clock import SimulatedClock
from .configspace import DEFAULT_CONFIG, PoolExhausted
from .model import MipModel
from .mps import parse_mps
from .orchestrator import AllWorkersInfeasible, PortfolioPlan
from .subsolver import get_backend

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_EMPTY = 4

_MANIFEST_KEYS = {
    "instance",
    "pool",
    "configs",
    "n",
    "threads_per_worker",
    "core_cap",
    "wall_seconds",
    "master_seed",
    "reference_objective",
    "clock",
    "node_seconds",
    "backend",
}

CORE_CAP_ENV = "PARLNS_CORE_CAP"


def default_core_cap() -> int:
    """Detected core count, overridable through the environment."""
    override = os.environ.get(CORE_CAP_ENV)
    if override is not None:
        try:
            cap = int(override)
        except ValueError:
            raise DataError(f"{CORE_CAP_ENV} must be an integer, got {override!r}") from None
        if cap < 1:
            raise DataError(f"{CORE_CAP_ENV} must be >= 1")
        return cap
    return os.cpu_count() or 1


class DataError(Exception):
    """Invalid input files or manifest contents."""


def _load_instance(path: str) -> MipModel:
    text = Path(path).read_text()
    return parse_mps(text)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_gen_configs(args) -> int:
    pool = configspace.generate_pool(args.size, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    configspace.write_pool(pool, out)
    print(f"wrote {len(pool)} configurations to {out}")
    return EXIT_OK


def _resolve_config(args):
    if args.pool is None:
        if args.config_id not in (None, "default"):
            raise DataError("--config-id needs --pool (only 'default' is built in)")
        return DEFAULT_CONFIG
    pool = configspace.read_pool(args.pool)
    if args.config_id is None:
        return pool[0]
    for config in pool:
        if config.id == args.config_id:
            return config
    raise DataError(f"config id {args.config_id!r} not in {args.pool}")


def cmd_solve(args) -> int:
    model = _load_instance(args.instance)
    config = _resolve_config(args)
    clock = SimulatedClock(args.node_seconds) if args.clock == "simulated" else None
    reference = (
        model.to_internal_objective(args.reference) if args.reference is not None else None
    )
    result = run_worker(
        model, config, args.seconds, args.seed, clock, reference_objective=reference
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics.write_trace_csv(result.trace, out_dir / "trace.csv")
    summary = {
        "instance": args.instance,
        "config_id": config.id,
        "seed": args.seed,
        "wall_seconds": args.seconds,
        "status": result.status,
        "objective": (
            model.to_external_objective(result.best.objective) if result.best else None
        ),
        "final_gap": result.trace.final_gap(),
        "iterations": result.iterations,
        "skipped": result.skipped,
        "pulls": list(result.pulls),
        "outcomes": list(result.outcome_counts),
    }
    _write_json(out_dir / "summary.json", summary)
    if result.status != STATUS_OK:
        print("no feasible solution found", file=sys.stderr)
        return EXIT_EMPTY
    print(f"objective {summary['objective']} gap {summary['final_gap']:.6f}")
    return EXIT_OK


def _read_manifest(path: str) -> dict:
    try:
        manifest = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise DataError("manifest must be a JSON object")
    unknown = set(manifest) - _MANIFEST_KEYS
    if unknown:
        raise DataError(f"unknown manifest keys: {sorted(unknown)}")
    for key in ("instance", "wall_seconds"):
        if key not in manifest:
            raise DataError(f"manifest misses required key {key!r}")
    if ("pool" in manifest) == ("configs" in manifest):
        raise DataError("manifest needs exactly one of 'pool' or 'configs'")
    return manifest


def cmd_portfolio(args) -> int:
    manifest = _read_manifest(args.manifest)
    model = _load_instance(manifest["instance"])
    if "pool" in manifest:
        pool = configspace.read_pool(manifest["pool"])
    else:
        pool = [configspace.config_from_dict(entry) for entry in manifest["configs"]]
    n = manifest.get("n", len(pool))
    if not 1 <= n <= len(pool):
        raise DataError(f"n={n} outside [1, {len(pool)}]")
    plan = PortfolioPlan(
        configs=tuple(pool[:n]),
        threads_per_worker=manifest.get("threads_per_worker", 1),
        core_cap=manifest.get("core_cap", default_core_cap()),
        wall_seconds=manifest["wall_seconds"],
        master_seed=manifest.get("master_seed", 0),
    )
    clock_mode = manifest.get("clock", orchestrator.WALL)
    result = orchestrator.run_portfolio(
        model,
        plan,
        manifest.get("reference_objective"),
        clock_mode=clock_mode,
        node_seconds=manifest.get("node_seconds", 0.001),
        backend=get_backend(manifest.get("backend", "reference")),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for config in plan.configs:
        worker = result.workers[config.id]
        metrics.write_trace_csv(worker.trace, out_dir / f"{config.id}.csv")
    metrics.write_trace_csv(result.aggregate, out_dir / "aggregate.csv")
    summary = {
        "best_config_id": result.best_config_id,
        "final_gap": result.aggregate.final_gap(),
        "reference_objective": (
            model.to_external_objective(result.reference_objective)
            if result.reference_objective is not None
            else None
        ),
        "workers": {
            config.id: {
                "status": result.workers[config.id].status,
                "final_gap": result.workers[config.id].trace.final_gap(),
                "iterations": result.workers[config.id].iterations,
            }
            for config in plan.configs
        },
    }
    _write_json(out_dir / "summary.json", summary)
    print(
        f"aggregate final gap {summary['final_gap']:.6f} "
        f"(best config {result.best_config_id})"
    )
    return EXIT_OK


def cmd_simulate(args, parser) -> int:
    db = simulator.load_trace_db(args.traces, horizon=args.horizon)
    if args.n > len(db.config_ids):
        parser.error(f"--n {args.n} exceeds pool size {len(db.config_ids)}")
    t1 = args.t1
    if t1 is None:
        t1 = min(db.horizon(instance) for instance in db.instance_ids)
    window = (args.t0, t1)
    out = Path(args.out)
    if args.exhaustive:
        report = simulator.exhaustive(db, args.n, window)
        payload = {
            "mode": "exhaustive",
            "n": report.n,
            "window": list(report.window),
            "subsets": len(report.ranking),
            "final_gap": {
                "mean": report.expected_final_gap,
                "variance": report.variance_final_gap,
            },
            "primal_integral": {"mean": report.expected_primal_integral},
            "best": {
                "config_ids": list(report.best.config_ids),
                "final_gap": report.best.final_gap,
                "primal_integral": report.best.primal_integral,
            },
            "ranking": [
                {
                    "config_ids": list(r.config_ids),
                    "final_gap": r.final_gap,
                    "primal_integral": r.primal_integral,
                }
                for r in report.ranking
            ],
        }
        _write_json(out, payload)
        print(f"enumerated {len(report.ranking)} subsets; wrote {out}")
        return EXIT_OK
    report = simulator.simulate(
        db, args.n, args.runs, args.seed, window, stratified=args.stratified
    )
    _write_json(out, {"mode": "simulate", **report.to_dict()})
    if args.per_run is not None:
        per_run = Path(args.per_run)
        per_run.parent.mkdir(parents=True, exist_ok=True)
        with open(per_run, "w") as fh:
            fh.write("config_ids,final_gap,primal_integral\n")
            for record in report.records:
                ids = "|".join(record.config_ids)
                fh.write(f"{ids},{record.final_gap!r},{record.primal_integral!r}\n")
    print(
        f"n={args.n} runs={args.runs}: final gap "
        f"{report.mean_final_gap:.6f} +/- {report.std_final_gap:.6f}"
    )
    return EXIT_OK


def _repro_instances(seed: int):
    return [
        instances.knapsack(40, seed=seed, name="knapsack"),
        instances.set_cover(30, 40, seed=seed, name="setcover"),
        instances.independent_set(32, 0.1, seed=seed, name="indepset"),
    ]


def cmd_repro(args) -> int:
    """Scaled-down end-to-end methodology run under the simulated clock."""
    scale = args.scale
    pool_size = args.pool_size or max(6, round(180 / scale))
    runs = args.runs or max(20, round(1000 / scale))
    wall = args.wall or max(2.0, 3600.0 / scale / 60.0)
    out_dir = Path(args.out_dir)
    trace_dir = out_dir / "traces"
    pool = configspace.generate_pool(pool_size, args.seed)
    configspace.write_pool(pool, _ensure_parent(out_dir / "pool.json"))
    models = _repro_instances(args.seed)

    raw: dict[str, dict[str, object]] = {c.id: {} for c in pool}
    for model in models:
        for config in pool:
            clock = SimulatedClock(args.node_seconds)
            seed = orchestrator.worker_seed(args.seed, f"{config.id}:{model.name}")
            raw[config.id][model.name] = run_worker(model, config, wall, seed, clock)
    for model in models:
        finals = [
            raw[c.id][model.name].best.objective
            for c in pool
            if raw[c.id][model.name].status == STATUS_OK
        ]
        if not finals:
            print(f"every worker failed on {model.name}", file=sys.stderr)
            return EXIT_EMPTY
        reference = min(finals)
        for config in pool:
            worker = raw[config.id][model.name]
            if worker.status != STATUS_OK:
                continue
            trace = build_trace(model, worker.raw_points, reference, wall)
            path = trace_dir / config.id / f"{model.name}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            metrics.write_trace_csv(trace, path)

    db = simulator.load_trace_db(trace_dir, horizon=wall)
    window = (wall / 10.0, wall)  # warmup mirrors the minute-6-of-60 convention
    ranking = simulator.rank_configs(db, window)
    _write_json(out_dir / "ranking.json", {"window": list(window), "ranking": ranking})

    grid = [n for n in (2, 4, 8, 16, 32, 64, 128) if n <= len(db.config_ids)]
    rows = []
    for n in grid:
        report = simulator.simulate(db, n, runs, args.seed, window)
        rows.append(
            {
                "n": n,
                "pg_mean": report.mean_final_gap,
                "pg_std": report.std_final_gap,
                "pg_best": report.best.final_gap,
                "pg_worst": report.worst.final_gap,
                "pi_mean": report.mean_primal_integral,
                "pi_std": report.std_primal_integral,
                "pi_pm_mean": metrics.pi_percent_minutes(report.mean_primal_integral),
            }
        )
    with open(out_dir / "portfolio_sweep.csv", "w") as fh:
        fh.write("n,pg_mean,pg_std,pg_best,pg_worst,pi_mean,pi_std,pi_percent_minutes\n")
        for row in rows:
            fh.write(
                f"{row['n']},{row['pg_mean']!r},{row['pg_std']!r},{row['pg_best']!r},"
                f"{row['pg_worst']!r},{row['pi_mean']!r},{row['pi_std']!r},"
                f"{row['pi_pm_mean']!r}\n"
            )
    plans = {}
    for threads in (4, 8, 16):
        take = min(180 // threads, len(ranking))
        plans[str(threads)] = ranking[:take]
    _write_json(out_dir / "reduced_pools.json", plans)
    print(f"repro artifacts in {out_dir} (pool {pool_size}, runs {runs}, wall {wall}s)")
    return EXIT_OK


def _ensure_parent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parlns")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-configs", help="sample a configuration pool")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="run one worker on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--seconds", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool")
    p.add_argument("--config-id")
    p.add_argument("--reference", type=float)
    p.add_argument("--clock", choices=["wall", "simulated"], default="wall")
    p.add_argument("--node-seconds", type=float, default=0.001)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("portfolio", help="run a portfolio from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("simulate", help="portfolio simulation over a trace db")
    p.add_argument("--traces", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--per-run")

    p = sub.add_parser("repro", help="desk-scale methodology reproduction")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scale", type=int, default=30)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--node-seconds", type=float, default=0.002)
    p.add_argument("--pool-size", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--wall", type=float)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    sub_parser = parser  # for parser.error in handlers

    if args.command == "gen-configs":
        if args.size < 1:
            parser.error("--size must be >= 1")
        if args.size > configspace.POOL_SIZE_CAP:
            parser.error(f"--size exceeds the sanity cap of {configspace.POOL_SIZE_CAP}")
    if args.command == "solve" and args.seconds <= 0:
        parser.error("--seconds must be positive")
    if args.command == "simulate":
        if args.runs < 1:
            parser.error("--runs must be >= 1")
        if args.n < 1:
            parser.error("--n must be >= 1")

    try:
        if args.command == "gen-configs":
            return cmd_gen_configs(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "portfolio":
            return cmd_portfolio(args)
        if args.command == "simulate":
            return cmd_simulate(args, sub_parser)
        if args.command == "repro":
            return cmd_repro(args)
        parser.error(f"unknown command {args.command!r}")
    except (
        DataError,
        ValueError,  # covers parse, config, plan, window, and simulator errors
        PoolExhausted,
        FileNotFoundError,
        NotADirectoryError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AllWorkersInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
