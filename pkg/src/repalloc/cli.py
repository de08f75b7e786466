"""Command line entry point: ``repalloc run|optimize|dynamics|compare``.

Exit codes: 0 success, 2 non-convergence, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fairness, simulator
from .dynamics import IntegrationError, run_to_limit
from .game import NotAllocationGameError, golden_game, load_game, repercussion_transform, uniform_profile
from .learning import POLICY_NAMES
from .simulator import ConfigError, ScenarioConfig
from .wireless import golden_allocations, golden_topology, load_topology

EXIT_OK, EXIT_NOCONV, EXIT_INVALID = 0, 2, 3


class InputError(Exception):
    pass


def parse_set(items) -> dict:
    """``key=value`` pairs; values are parsed as JSON when possible."""
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise InputError(f"--set expects key=value, got {item!r}")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def build_config(args) -> ScenarioConfig:
    data = ScenarioConfig.load(args.config).to_dict() if args.config else {}
    data.update(parse_set(args.set))
    if args.seed is not None:
        data["seed"] = args.seed
    return ScenarioConfig.from_dict(data)


def parse_start(text: str, action_sets) -> list[np.ndarray]:
    """``"0.5;0.2,0.3"``: one row per player separated by ';'; entries may be fractions like 1/3.

    A row may omit its last entry, which is then filled so the row sums to 1.
    """
    rows = [r for r in text.split(";")]
    if len(rows) != len(action_sets):
        raise InputError(f"--start needs {len(action_sets)} rows, got {len(rows)}")
    q = []
    for row, acts in zip(rows, action_sets):
        try:
            vals = [float(Fraction(v.strip())) for v in row.split(",") if v.strip()]
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad number in --start row {row!r}") from None
        if len(vals) == len(acts) - 1:
            vals.append(1.0 - sum(vals))
        if len(vals) != len(acts):
            raise InputError(f"row {row!r} needs {len(acts)} (or {len(acts) - 1}) entries")
        q.append(np.array(vals))
    return q


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1, default=str)
    sys.stdout.write("\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    cfg = build_config(args)
    m = simulator.run_scenario(cfg)
    report = {"config": cfg.to_dict(), "summary": m.summary()}
    if args.csv or args.plot:
        out = _out_dir(args)
        if args.csv:
            m.to_csv(out / f"run_seed{cfg.seed}.csv")
        if args.plot:
            from .plots import plot_throughput

            plot_throughput({cfg.policy: m.throughput}, out / f"run_seed{cfg.seed}.png",
                            warmup=m.warmup)
    _emit(report)
    if not cfg.dynamic and not m.converged:
        print(f"no convergence within {cfg.max_iters} iterations", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _topology(ref: str):
    path = Path(ref)
    if path.suffix == ".json":
        return load_topology(path)
    return golden_topology(ref)


def cmd_optimize(args) -> int:
    top = _topology(args.topology)
    if args.method == "exhaustive":
        res = fairness.exhaustive_optimum(top, args.alpha, args.limit)
    elif args.method == "local":
        res = fairness.local_search(top, args.alpha, args.starts, args.seed)
    else:
        res = fairness.optimize(top, args.alpha, args.limit, args.starts, args.seed)
    text = res.report(top)
    if args.check:
        known = golden_allocations() if Path(args.topology).suffix != ".json" else {}
        alloc = known.get(args.check)
        if alloc is None:
            try:
                alloc = [int(v) for v in args.check.split(",")]
            except ValueError:
                raise InputError(f"--check expects a named allocation or comma-separated indices") from None
        ok, move = fairness.local_opt_check(top, alloc, args.alpha)
        val = fairness.objective(top, alloc, args.alpha)
        text += f"check {args.check}: objective {val:.6f}, locally optimal: {'yes' if ok else 'no'}"
        text += "\n" if ok else f", improving switch user {move[0]} -> choice {move[1]} (+{move[2]:.6f})\n"
    sys.stdout.write(text)
    if args.csv:
        out = _out_dir(args)
        with open(out / "optimize.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["user", "choice", "cell", "throughput"])
            for n, (a, u) in enumerate(zip(res.allocation, res.throughputs)):
                w.writerow([n, a, top.choice_sets[n][a], f"{u:.6f}"])
    return EXIT_OK


def cmd_dynamics(args) -> int:
    path = Path(args.game)
    game = load_game(path) if path.suffix == ".json" else golden_game(args.game)
    if not args.raw:
        game = repercussion_transform(game)
    q0 = parse_start(args.start, game.action_sets) if args.start else uniform_profile(game)
    tr, lim = run_to_limit(game, q0, step=args.step, max_horizon=args.horizon)
    report = {
        "limit": lim.kind,
        "profile": list(lim.profile) if lim.profile else None,
        "support": lim.support or None,
        "time": float(tr.times[-1]),
        "final": [row.round(6).tolist() for row in tr.final],
        "potential_start": float(tr.potential_series[0]),
        "potential_end": float(tr.potential_series[-1]),
        "potential_monotone": tr.potential_monotone(1e-6),
    }
    if args.csv or args.plot:
        out = _out_dir(args)
        if args.csv:
            tr.to_csv(out / "trajectory.csv")
        if args.plot:
            from .plots import plot_trajectory

            plot_trajectory(tr, out / "trajectory.png", title=path.stem)
    _emit(report)
    return EXIT_NOCONV if lim.kind == "undecided" else EXIT_OK


def _metric(cfg: ScenarioConfig, m) -> float:
    return m.mean_throughput() if cfg.dynamic else m.final_throughput


def cmd_compare(args) -> int:
    cfg = build_config(args)
    seeds = range(cfg.seed, cfg.seed + args.seeds)
    rows = []
    series = {}
    if args.mode == "policies":
        names = args.policies or list(simulator.POLICIES)
        bad = set(names) - set(simulator.POLICIES)
        if bad:
            raise InputError(f"unknown policies {sorted(bad)}")
        for s in seeds:
            runs = simulator.compare_policies(cfg.replace(seed=s), names)
            for p, m in runs.items():
                rows.append({"seed": s, "variant": p, "throughput": _metric(cfg, m), "converged": m.converged,
                             "iterations": m.iterations, "handovers": m.mean_handovers()})
                series.setdefault(p, m.throughput)
    elif args.mode == "steps":
        names = args.policies or list(POLICY_NAMES)
        for s in seeds:
            for p in names:
                m = simulator.run_scenario(cfg.replace(seed=s, step=p))
                rows.append({"seed": s, "variant": p, "throughput": _metric(cfg, m), "converged": m.converged,
                             "iterations": m.iterations, "handovers": m.mean_handovers()})
                series.setdefault(p, m.throughput)
    else:
        for s in seeds:
            res = simulator.mice_policy_compare(cfg.replace(seed=s))
            for p, m in zip(("all_learn", "mice_wifi"), res["runs"]):
                rows.append({"seed": s, "variant": p, "throughput": m.mean_throughput(), "converged": m.converged,
                             "iterations": m.iterations, "handovers": m.mean_handovers()})
                series.setdefault(p, m.throughput)
        names = ["all_learn", "mice_wifi"]

    table = {}
    for p in names:
        sub = [r for r in rows if r["variant"] == p]
        mu, half = simulator.mean_ci([r["throughput"] for r in sub])
        table[p] = {"throughput": round(mu, 4), "ci95": None if np.isnan(half) else round(half, 4),
                    "converged": sum(r["converged"] for r in sub),
                    "iterations": round(float(np.mean([r["iterations"] for r in sub])), 2),
                    "handovers": round(float(np.mean([r["handovers"] for r in sub])), 3)}
    ref = names[0]
    by_seed = {(r["seed"], r["variant"]): r["throughput"] for r in rows}
    wins = {p: sum(by_seed[(s, ref)] >= by_seed[(s, p)] - 1e-9 for s in seeds) / len(seeds)
            for p in names[1:]}
    report = {"mode": args.mode, "seeds": len(seeds), "reference": ref, "variants": table,
              f"{ref}_at_least_as_good": wins}
    if args.csv or args.plot:
        out = _out_dir(args)
        if args.csv:
            with open(out / f"compare_{args.mode}.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                for r in rows:
                    w.writerow({**r, "throughput": f"{r['throughput']:.6f}",
                                "handovers": f"{r['handovers']:.4f}"})
        if args.plot:
            from .plots import plot_throughput

            plot_throughput(series, out / f"compare_{args.mode}.png", title=f"seed {cfg.seed}",
                            warmup=cfg.warmup if cfg.dynamic else 0)
    _emit(report)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario config (JSON)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field; repeatable")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--csv", action="store_true", help="write CSV files")
    p.add_argument("--plot", action="store_true", help="write PNG plots (needs matplotlib)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repalloc", description="Repercussion-utility cell allocation toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    _scenario_flags(p)
    _output_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("optimize", help="alpha-fair optimum of a topology")
    p.add_argument("--topology", default="fairness", help="shipped topology name or JSON file")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--method", choices=("auto", "exhaustive", "local"), default="auto")
    p.add_argument("--limit", type=int, default=fairness.ENUM_LIMIT, help="enumeration limit")
    p.add_argument("--starts", type=int, default=100, help="local-search restarts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", metavar="ALLOC", help="certify an allocation: a shipped name or comma-separated indices")
    _output_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("dynamics", help="integrate the replicator dynamics of a game")
    p.add_argument("--game", default="two_by_three", help="shipped game name or JSON file")
    p.add_argument("--raw", action="store_true", help="use the game's payoffs as given (no transform)")
    p.add_argument("--start", help="initial strategies, e.g. '0.5;0.2,0.3' (default uniform)")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--horizon", type=float, default=500.0)
    _output_flags(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("compare", help="sweep seeds over policies, step schedules or traffic variants")
    _scenario_flags(p)
    p.add_argument("--mode", choices=("policies", "steps", "mice"), default="policies")
    p.add_argument("--seeds", type=int, default=10, help="number of consecutive seeds")
    p.add_argument("--policies", nargs="+", help="subset of policies (or step schedules with --mode steps)")
    _output_flags(p)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, NotAllocationGameError, fairness.SearchSpaceTooLarge) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, KeyError, ValueError, json.JSONDecodeError, IntegrationError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
