"""Command-line entry point: ``seedfolio <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
import warnings
from pathlib import Path

from . import __version__
from .gpp import EXTERNAL, EngineFailure, GppSpec, ProtocolError
from .harness import (
    ConfigError,
    ExperimentConfig,
    MatrixBuildError,
    build_matrix_stats,
    cross_evaluate,
    play_matrix,
    generalization_experiment,
    online_experiment,
    simulate_matchup,
    write_manifest,
    write_text,
)
from .matrix_game import InvalidInput, exploitability, read_matrix_csv, solve_approx, solve_exact, write_matrix_csv
from .portfolio import build_best_arm, build_best_half, build_nash, build_uniform

EXIT_CONFIG = 2
EXIT_ENGINE = 3

log = logging.getLogger("seedfolio")


def _manifest_for_file(out: Path, kind: str, args: dict, master_seed: int) -> None:
    import hashlib

    manifest = {
        "tool": "seedfolio",
        "version": __version__,
        "command": kind,
        "arguments": args,
        "master_seed": master_seed,
        "outputs": {out.name: hashlib.sha256(out.read_bytes()).hexdigest()},
    }
    write_text(out.with_name(out.name + ".manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_build_matrix(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cfg = ExperimentConfig(
            game=args.game,
            sims=args.sims,
            black_seeds=args.seeds_black,
            white_seeds=args.seeds_white,
            repeats=args.repeats,
            k_grid=[],
            master_seed=args.seed,
        )
        if args.black_command or args.white_command:
            blacks = _externalize(cfg.black_specs(), args.black_command, args.timeout)
            whites = _externalize(cfg.white_specs(), args.white_command, args.timeout)
            build = play_matrix(blacks, whites, cfg.game, cfg.repeats, cfg.labels(), args.jobs)
        else:
            build = build_matrix_stats(cfg, jobs=args.jobs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = Path(args.out)
    write_matrix_csv(build.matrix, out)
    if build.repeats > 1:
        write_matrix_csv(
            type(build.matrix)(build.stderr, build.matrix.row_labels, build.matrix.col_labels),
            out.with_name(out.stem + ".stderr.csv"),
        )
    extra = {"repeats_used": build.repeats, "black_command": args.black_command, "white_command": args.white_command}
    _manifest_for_file(out, "build-matrix", {**cfg.to_dict(), **extra}, args.seed)
    print(f"wrote {build.matrix.n_rows}x{build.matrix.n_cols} matrix to {out}")
    return 0


def _externalize(specs, command, timeout):
    if not command:
        return specs
    argv = tuple(shlex.split(command))
    return [GppSpec(s.engine, s.seed, EXTERNAL, external_command=argv, timeout=timeout) for s in specs]


def solve_bundle(m, method: str, iterations: int, seed: int) -> dict:
    exact = solve_exact(m)
    if method == "lp":
        eq = exact
    else:
        eq = solve_approx(m, iterations, seed=seed)
    nash = build_nash(m)
    if method != "lp":
        from .portfolio import PortfolioPolicy

        nash = PortfolioPolicy(
            "nash",
            eq.row_strategy,
            eq.col_strategy,
            m.digest(),
            m.row_labels,
            m.col_labels,
            {"value": eq.value, "residual": eq.residual, "method": eq.method},
        )
    policies = {
        "nash": nash,
        "best-arm": build_best_arm(m),
        "best-half": build_best_half(m),
        "uniform": build_uniform(m.n_rows, m.n_cols, m.row_labels, m.col_labels),
    }
    bundle = {
        "method": eq.method,
        "value": exact.value,
        "residual": eq.residual,
        "equilibrium": eq.to_dict(m),
        "source_matrix_digest": m.digest(),
        "policies": {},
    }
    for name, pol in policies.items():
        e1, e2, mean = exploitability(m, pol.black_strategy, pol.white_strategy, exact.value)
        d = pol.to_dict()
        d["source_matrix_digest"] = m.digest()
        d["exploitability"] = {"black": e1, "white": e2, "mean": mean}
        bundle["policies"][name] = d
    return bundle


def cmd_solve(args) -> int:
    m = read_matrix_csv(args.matrix)
    bundle = solve_bundle(m, args.method, int(args.iterations), args.seed)
    out = Path(args.out)
    write_text(out, json.dumps(bundle, indent=2) + "\n")
    _manifest_for_file(
        out,
        "solve",
        {"matrix": str(args.matrix), "matrix_digest": m.digest(), "method": args.method, "iterations": int(args.iterations)},
        args.seed,
    )
    print(f"value {bundle['value']:.6f} residual {bundle['residual']:.3g} ({bundle['method']}) -> {out}")
    return 0


def _load_matrix(cfg: ExperimentConfig, out_dir: Path, jobs):
    if cfg.matrix:
        return read_matrix_csv(cfg.matrix)
    m = build_matrix_stats(cfg, jobs=jobs).matrix
    write_matrix_csv(m, out_dir / "matrix.csv")
    return m


def run_suite(cfg: ExperimentConfig, suite: str, out_dir: Path, jobs=None, opponent=None) -> dict:
    """Run one suite; write its CSVs, summary and manifest. Returns the summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    m = _load_matrix(cfg, out_dir, jobs)
    outputs = set()
    if suite == "cross-eval":
        report = cross_evaluate(m)
        report.config_digest = cfg.digest()
        lines = ["matchup,reported_for,analytic,mc_mean,mc_stderr,z"]
        mc = []
        for idx, mu in enumerate(report.matchups):
            mean, se = simulate_matchup(m, mu, cfg.mc_games, seed=cfg.master_seed * 1000 + idx)
            z = 0.0 if se == 0 else (mean - mu.win_rate) / se
            mc.append({"name": mu.name, "mc_mean": mean, "mc_stderr": se, "z": z})
            lines.append(f"{mu.name},{mu.reported_for},{mu.win_rate!r},{mean!r},{se!r},{z!r}")
        write_text(out_dir / "cross_eval.csv", report.to_csv())
        write_text(out_dir / "cross_eval_mc.csv", "\n".join(lines) + "\n")
        summary = {"suite": suite, **report.to_dict(), "monte_carlo": mc, "mc_games": cfg.mc_games}
        outputs = {"cross_eval.csv", "cross_eval_mc.csv"}
        worst = max(abs(x["z"]) for x in mc)
        print(f"cross-eval: V={report.value:.4f} matchups={len(mc)} max|z| vs {cfg.mc_games} MC games = {worst:.2f}")
    elif suite == "generalization":
        ks = [k for k in cfg.k_grid if k < min(m.shape)]
        rep = generalization_experiment(m, ks, cfg.replications, seed=cfg.master_seed)
        write_text(out_dir / "generalization.csv", rep.to_csv())
        summary = {
            "suite": suite,
            "k_grid": ks,
            "replications": cfg.replications,
            "results": [dict(zip(("K", "policy", "opponent", "role", "mean", "stderr"), r)) for r in rep.rows],
        }
        outputs = {"generalization.csv"}
        for k in ks:
            vs_u = " ".join(f"{p}={rep.lookup(k, p, 'uniform')[0]:.3f}" for p in ("nash", "best-arm", "best-half", "uniform"))
            vs_x = " ".join(f"{p}={rep.lookup(k, p, 'exploiter')[0]:.3f}" for p in ("nash", "best-arm", "best-half", "uniform"))
            print(f"generalization K={k}: win vs held-out uniform {vs_u} | loss vs exploiter {vs_x}")
    elif suite == "online":
        opp = opponent or cfg.opponent
        curve = online_experiment(m, opp, cfg.online_iterations, cfg.online_replications, cfg.role, seed=cfg.master_seed)
        name = f"online_{cfg.role}_{opp.replace(':', '')}.csv"
        write_text(out_dir / name, curve.to_csv())
        summary = {
            "suite": suite,
            "opponent": opp,
            "role": cfg.role,
            "iterations": [int(x) for x in curve.iterations],
            "losing_rate_mean": [float(x) for x in curve.losing_rate_mean],
            "expected_win_rate": [float(x) for x in curve.expected_win_rate],
            "replications": curve.replications,
        }
        outputs = {name}
        print(
            f"online ({cfg.role} vs {opp}): cumulative losing rate {curve.losing_rate_mean[-1]:.4f} "
            f"at {int(curve.iterations[-1])} games, final expected win rate {curve.expected_win_rate[-1]:.4f}"
        )
    else:
        raise ConfigError(f"unknown suite {suite!r}")
    summary["matrix_digest"] = m.digest()
    summary_name = f"summary_{suite}.json"
    write_text(out_dir / summary_name, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs.add(summary_name)
    write_manifest(out_dir, cfg, outputs, {"suite": suite, "matrix_digest": m.digest()}, name=f"manifest_{suite}.json")
    return summary


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    out_dir = Path(args.out_dir or cfg.output_dir)
    run_suite(cfg, args.suite, out_dir, jobs=args.jobs, opponent=args.opponent)
    return 0


def _positive_int(text):
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seedfolio", description=__doc__)
    ap.add_argument("--version", action="version", version=f"seedfolio {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-matrix", help="play every seed pairing and write the payoff matrix CSV")
    b.add_argument("--game", required=True, help="hex5, connect4, connect4-7x6-4, ...")
    b.add_argument("--seeds-black", required=True, help="e.g. 1..16")
    b.add_argument("--seeds-white", required=True, help="e.g. 1..16")
    b.add_argument("--sims", type=_positive_int, default=300)
    b.add_argument("--repeats", type=_positive_int, default=1)
    b.add_argument("--out", required=True)
    b.add_argument("--jobs", type=_positive_int, default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--black-command", default=None, help="external engine command line for the Black options")
    b.add_argument("--white-command", default=None, help="external engine command line for the White options")
    b.add_argument("--timeout", type=float, default=60.0, help="seconds per external reply")
    b.set_defaults(func=cmd_build_matrix)

    s = sub.add_parser("solve", help="equilibrium and offline portfolios for a matrix CSV")
    s.add_argument("--matrix", required=True)
    s.add_argument("--method", choices=("lp", "exp3"), default="lp")
    s.add_argument("--iterations", type=_positive_int, default=100_000)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a canned experiment suite from a JSON config")
    e.add_argument("--config", required=True)
    e.add_argument("--suite", required=True, choices=("generalization", "online", "cross-eval"))
    e.add_argument("--opponent", default=None, help="nash, uniform or pure:<index> (online suite)")
    e.add_argument("--out-dir", default=None)
    e.add_argument("--jobs", type=_positive_int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (EngineFailure, ProtocolError, MatrixBuildError) as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", "") or getattr(exc, "failures", "")
        if diag:
            print(diag, file=sys.stderr)
        return EXIT_ENGINE
    except (InvalidInput, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
