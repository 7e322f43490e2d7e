"""Reference external engine speaking the line protocol.

Plays the lowest legal move (``--policy first``) or its own seeded MCTS
(``--policy mcts``). ``--garbage-after N`` and ``--exit-after N`` make it
misbehave after N move replies, for adapter tests; ``--illegal`` always
answers with an occupied or out-of-range move.

    python -m seedfolio.gpp.echo_engine [--policy first|mcts] [--sims N]
"""
import argparse
import sys

from .agents import GppSpec, mcts_choose_move
from .engines import get_engine


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="echo_engine")
    ap.add_argument("--policy", choices=("first", "mcts"), default="first")
    ap.add_argument("--sims", type=int, default=50)
    ap.add_argument("--garbage-after", type=int, default=-1)
    ap.add_argument("--exit-after", type=int, default=-1)
    ap.add_argument("--illegal", action="store_true")
    args = ap.parse_args(argv)

    engine = state = spec = None
    replies = 0
    for raw in sys.stdin:
        tokens = raw.split()
        if not tokens:
            continue
        cmd = tokens[0]
        if cmd == "init":
            engine = get_engine(tokens[1])
            state = engine.initial_state()
            spec = GppSpec(engine=tokens[1], seed=int(tokens[3]), simulations_per_move=args.sims)
            print("ok", flush=True)
        elif cmd == "opponent":
            if tokens[1] != "none":
                state = engine.apply(state, engine.parse_move(tokens[1]))
            if replies == args.exit_after:
                return 3
            if replies == args.garbage_after:
                print("banana split", flush=True)
                replies += 1
                continue
            if args.illegal:
                print("move 99,99" if engine.is_hex else "move 99", flush=True)
                continue
            if args.policy == "mcts":
                mv = mcts_choose_move(engine, state, spec, state.ply)
            else:
                mv = engine.legal_moves(state)[0]
            state = engine.apply(state, mv)
            print(f"move {engine.format_move(mv)}", flush=True)
            replies += 1
        elif cmd == "result":
            print("ok", flush=True)
            return 0
        else:
            print(f"? unknown command {cmd}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
