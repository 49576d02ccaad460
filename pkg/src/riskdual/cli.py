"""Command-line client.

Verbs: ``solve``, ``oracle``, ``sweep``, ``axioms``, ``serve``.  By default
each verb runs in-process through the shared runner; pass ``--server URL`` to
delegate to a running service instead (the CLI then only parses arguments,
ships the config and renders the returned rows).

Exit codes: 0 success, 1 configuration or usage error, 2 dual divergence
(the instance is infeasible).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import runner
from .bundled import BUNDLED_CONFIGS
from .configio import load_setup
from .errors import ConfigError, DualDivergence, RiskDualError


def _read_config(path: str) -> str:
    if path in BUNDLED_CONFIGS:
        return BUNDLED_CONFIGS[path]
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _out_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _print_config_error(path: str, exc: ConfigError) -> None:
    where = path
    if exc.line is not None:
        where = f"{path}:{exc.line}:{exc.col}"
    print(f"config error: {where}: {exc.message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskdual",
        description="Risk-constrained policy selection: dual solver, oracles, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="directory for CSV outputs")
        p.add_argument("--server", default=None, help="base URL of a running service")

    p_solve = sub.add_parser("solve", help="lower a config and run dual ascent")
    p_solve.add_argument("config", help="config path or bundled name (t1, vanishing-gap, ...)")
    p_solve.add_argument("--level", type=int, default=None, help="refinement level for density bases")
    p_solve.add_argument("--step0", type=float, default=None)
    p_solve.add_argument("--iters", type=int, default=None)
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.add_argument("--anchor-cap", type=int, default=None)
    common(p_solve)

    p_oracle = sub.add_parser("oracle", help="brute-force primal/dual reference values")
    p_oracle.add_argument("config")
    p_oracle.add_argument("--level", type=int, default=None)
    common(p_oracle)

    p_sweep = sub.add_parser("sweep", help="duality gap across refinement levels")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--levels", default=None, help="comma-separated levels (default: [sweep])")
    p_sweep.add_argument("--dual-only", action="store_true", help="skip the primal enumeration")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel workers across levels")
    common(p_sweep)

    p_ax = sub.add_parser("axioms", help="risk-functional axiom sweep")
    p_ax.add_argument("--spec", action="append", default=None, help="risk spec (repeatable)")
    p_ax.add_argument("--trials", type=int, default=1000)
    p_ax.add_argument("--seed", type=int, default=0)
    common(p_ax)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "axioms":
            return _cmd_axioms(args)
        return _cmd_serve(args)
    except ConfigError as exc:
        _print_config_error(getattr(args, "config", "<config>"), exc)
        return 1
    except DualDivergence as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RiskDualError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:  # pragma: no cover - entry point shim
    sys.exit(main())


def run_solve(config_path: str, out_dir: str = ".", **flags) -> int:
    """Programmatic equivalent of ``riskdual solve``; returns the exit code."""
    argv = ["solve", config_path, "--out", out_dir]
    for key, value in flags.items():
        if value is not None:
            argv += [f"--{key.replace('_', '-')}", str(value)]
    return main(argv)


def run_sweep(config_path: str, levels=None, out_dir: str = ".", **flags) -> int:
    """Programmatic equivalent of ``riskdual sweep``; returns the exit code."""
    argv = ["sweep", config_path, "--out", out_dir]
    if levels:
        argv += ["--levels", ",".join(str(n) for n in levels)]
    for key, value in flags.items():
        if isinstance(value, bool):
            if value:
                argv.append(f"--{key.replace('_', '-')}")
        elif value is not None:
            argv += [f"--{key.replace('_', '-')}", str(value)]
    return main(argv)


def _cmd_solve(args) -> int:
    text = _read_config(args.config)
    if args.server:
        return _remote_solve(args, text)
    setup = load_setup(text)
    outcome = runner.solve(
        setup,
        level=args.level,
        step0=args.step0,
        iters=args.iters,
        seed=args.seed,
        anchor_cap=args.anchor_cap,
    )
    runner.write_dual_csv(_out_path(args.out, "dual.csv"), outcome)
    if outcome.slater_flag != "ok":
        print(f"warning: strict feasibility check {outcome.slater_flag}", file=sys.stderr)
    _print_solve_summary(outcome.summary())
    return 2 if outcome.report.diverged else 0


def _print_solve_summary(summary: dict) -> None:
    phat = "none" if summary["phat"] is None else runner.fmt(summary["phat"])
    gap = "none" if summary["gap"] is None else runner.fmt(summary["gap"])
    print(
        f"Dstar={runner.fmt(summary['dstar'])} Phat={phat} gap={gap} "
        f"slater={summary['slater']}"
        + (" diverged" if summary["diverged"] else "")
    )


def _cmd_oracle(args) -> int:
    text = _read_config(args.config)
    if args.server:
        return _remote_oracle(args, text)
    setup = load_setup(text)
    outcome = runner.oracle(setup, level=args.level)
    runner.write_oracle_csv(_out_path(args.out, "oracle.csv"), outcome)
    argmin = "" if outcome.argmin is None else ",".join(str(v) for v in outcome.argmin)
    print(
        f"Pstar={runner.fmt(outcome.pstar) or 'none'} argmin=({argmin}) "
        f"Dstar_grid={runner.fmt(outcome.dstar_grid) or 'none'} "
        f"mixed={runner.fmt(outcome.mixed) or 'none'}"
    )
    for note in outcome.notes:
        print(f"note: {note}")
    return 0


def _parse_levels(text: str | None) -> tuple[int, ...] | None:
    if not text:
        return None
    return tuple(int(v.strip()) for v in text.split(",") if v.strip())


def _cmd_sweep(args) -> int:
    text = _read_config(args.config)
    if args.server:
        return _remote_sweep(args, text)
    rows = runner.sweep(
        text, levels=_parse_levels(args.levels), dual_only=args.dual_only, jobs=args.jobs
    )
    runner.write_sweep_csv(_out_path(args.out, "sweep.csv"), rows)
    for row in rows:
        print(
            f"n={row.n} Pstar={runner.fmt(row.pstar) or 'none'} "
            f"Dstar={runner.fmt(row.dstar) or 'none'} mixed={runner.fmt(row.mixed) or 'none'} "
            f"rel_gap={runner.fmt(row.rel_gap) or 'none'}"
            + (f" [{row.note}]" if row.note else "")
        )
    return 0


def _cmd_axioms(args) -> int:
    if args.server:
        return _remote_axioms(args)
    rows = runner.axioms(
        specs=tuple(args.spec) if args.spec else None, trials=args.trials, seed=args.seed
    )
    runner.write_axioms_csv(_out_path(args.out, "axioms.csv"), rows)
    for row in rows:
        worst = max(
            v for v in (row["convexity"], row["homogeneity"], row["monotonicity"], row["translation"])
            if v is not None
        )
        print(f"{row['spec']}: coherent={row['coherent']} worst_violation={worst:.3g}")
    return 0


def _cmd_serve(args) -> int:  # pragma: no cover - needs a live socket
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# --- thin HTTP client ---------------------------------------------------------------

def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    response = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if response.status_code == 422:
        detail = response.json().get("detail")
        if isinstance(detail, dict) and "message" in detail:
            raise ConfigError(detail["message"], detail.get("line"), detail.get("col"))
        raise ConfigError(str(detail))
    if response.status_code != 200:
        raise RiskDualError(f"server returned {response.status_code}: {response.text}")
    return response.json()


def _remote_solve(args, text: str) -> int:
    payload = {
        "config": text,
        "level": args.level,
        "step0": args.step0,
        "iters": args.iters,
        "seed": args.seed,
        "anchor_cap": args.anchor_cap,
        "include_trajectory": True,
    }
    data = _post(args.server, "/solve", payload)
    trajectory = data.get("trajectory") or []
    m = len(trajectory[0]["lam"]) if trajectory else 0
    rows = []
    for item in trajectory:
        row = {"iter": item["iter"], "q": item["q"], "best_feasible": item["best_feasible"],
               "gap": item["gap"]}
        for i, v in enumerate(item["lam"], start=1):
            row[f"lambda_{i}"] = v
        rows.append(row)
    header = ["iter"] + [f"lambda_{i}" for i in range(1, m + 1)] + ["q", "best_feasible", "gap"]
    import csv

    with open(_out_path(args.out, "dual.csv"), "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(row["iter"])] + [runner.fmt(row.get(h)) for h in header[1:]])
    _print_solve_summary(
        {
            "dstar": data["dstar"],
            "phat": data["phat"],
            "gap": data["gap"],
            "slater": data["slater"]["flag"],
            "diverged": data["diverged"],
        }
    )
    return 2 if data["diverged"] else 0


def _remote_oracle(args, text: str) -> int:
    data = _post(args.server, "/oracle", {"config": text, "level": args.level})
    argmin = "" if data["argmin"] is None else ",".join(str(v) for v in data["argmin"])
    print(
        f"Pstar={runner.fmt(data['pstar']) or 'none'} argmin=({argmin}) "
        f"Dstar_grid={runner.fmt(data['dstar_grid']) or 'none'} "
        f"mixed={runner.fmt(data['mixed']) or 'none'}"
    )
    return 0


def _remote_sweep(args, text: str) -> int:
    levels = _parse_levels(args.levels)
    data = _post(
        args.server,
        "/sweep",
        {"config": text, "levels": list(levels) if levels else None, "dual_only": args.dual_only},
    )
    rows = [
        runner.SweepRow(
            n=item["n"],
            pstar=item["pstar"],
            dstar=item["dstar"],
            mixed=item["mixed"],
            rel_gap=item["rel_gap"],
            pstar_source=item["pstar_source"],
            note=item["note"],
        )
        for item in data["rows"]
    ]
    runner.write_sweep_csv(_out_path(args.out, "sweep.csv"), rows)
    for row in rows:
        print(
            f"n={row.n} Pstar={runner.fmt(row.pstar) or 'none'} "
            f"Dstar={runner.fmt(row.dstar) or 'none'} rel_gap={runner.fmt(row.rel_gap) or 'none'}"
        )
    return 0


def _remote_axioms(args) -> int:
    data = _post(
        args.server,
        "/axioms",
        {"specs": args.spec, "trials": args.trials, "seed": args.seed},
    )
    rows = data["rows"]
    runner.write_axioms_csv(_out_path(args.out, "axioms.csv"), rows)
    for row in rows:
        print(f"{row['spec']}: coherent={row['coherent']}")
    return 0
