"""Time the compiled kernels against the pure-numpy/CPython fallback.

Each backend runs in its own interpreter (the backend is fixed at import
time by SEEDFOLIO_DISABLE_JIT). JIT timings exclude the first, compiling call.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

CASES = ("uct_connect4_300", "uct_hex5_300", "ucbt_batch", "exp3_20x20", "matrix_4x4_connect4")


def _cases():
    import numpy as np

    from seedfolio.bandit import learning_curve
    from seedfolio.gpp import GppSpec, get_engine, mcts_choose_move
    from seedfolio.harness import ExperimentConfig, build_matrix
    from seedfolio.matrix_game import solve_approx

    c4, hex5 = get_engine("connect4"), get_engine("hex5")
    probs = np.random.default_rng(0).random((100, 16))
    game = np.random.default_rng(1).random((20, 20))
    cfg = ExperimentConfig(game="connect4", sims=300, black_seeds="1..4", white_seeds="1..4", k_grid=[1])
    return {
        "uct_connect4_300": lambda: mcts_choose_move(c4, c4.initial_state(), GppSpec(c4.name, 1), 0),
        "uct_hex5_300": lambda: mcts_choose_move(hex5, hex5.initial_state(), GppSpec(hex5.name, 1), 0),
        "ucbt_batch": lambda: learning_curve(probs, 1 << 12, 100, seed=0),
        "exp3_20x20": lambda: solve_approx(game, 10_000),
        "matrix_4x4_connect4": lambda: build_matrix(cfg, jobs=1),
    }


def worker(repeat: int) -> None:
    from seedfolio._jit import USE_NUMBA

    results = {"numba": USE_NUMBA}
    for name, fn in _cases().items():
        fn()  # warm-up (compiles under numba)
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        results[name] = best
    print(json.dumps(results))


def run_backend(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("SEEDFOLIO_DISABLE_JIT", None)
    if disable:
        env["SEEDFOLIO_DISABLE_JIT"] = "1"
    res = subprocess.run(
        [sys.executable, __file__, "--worker", "--repeat", str(repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(res.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write the timings here")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        worker(args.repeat)
        return 0
    jit = run_backend(False, args.repeat)
    plain = run_backend(True, args.repeat)
    print(f"{'kernel':<22}{'numba s':>10}{'fallback s':>12}{'speedup':>9}")
    for name in CASES:
        print(f"{name:<22}{jit[name]:>10.4f}{plain[name]:>12.4f}{plain[name] / jit[name]:>8.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"numba": jit, "fallback": plain}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
