"""Play full games between two GPP specs and record them."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from ..matrix_game import InvalidInput
from .agents import EXTERNAL, GppSpec, mcts_choose_move
from .engines import BLACK_SCORE, ONGOING, GameEngine, get_engine
from .external import EngineFailure, ProtocolError, external_handshake


@dataclass
class GameRecord:
    engine: str
    black: str
    white: str
    moves: list
    black_score: float
    forfeit: str | None = None
    nonce: int = 0
    # wall-clock stats are not part of the canonical record
    durations: dict = field(default_factory=dict, compare=False)

    @property
    def white_score(self) -> float:
        return 1.0 - self.black_score

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "black": self.black,
            "white": self.white,
            "moves": list(self.moves),
            "black_score": self.black_score,
            "forfeit": self.forfeit,
            "nonce": self.nonce,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def replay(record: GameRecord) -> float:
    """Re-run the move list; return Black's score. Raises on an illegal move.

    A forfeited record ends with the offending token, which must be illegal.
    """
    engine = get_engine(record.engine)
    state = engine.initial_state()
    moves = record.moves[:-1] if record.forfeit is not None else record.moves
    for token in moves:
        state = engine.apply(state, engine.parse_move(token))
    if record.forfeit is not None:
        offender = "black" if state.to_move == 1 else "white"
        if not record.moves or offender != record.forfeit:
            raise InvalidInput("forfeit flag does not match the side to move")
        try:
            legal = engine.is_legal(state, engine.parse_move(record.moves[-1]))
        except InvalidInput:
            legal = False
        if legal:
            raise InvalidInput("forfeited on a legal move")
        return 0.0 if record.forfeit == "black" else 1.0
    if state.status == ONGOING:
        raise InvalidInput("record ends before the game does")
    return BLACK_SCORE[state.status]


def play_game(engine: GameEngine, black: GppSpec, white: GppSpec, nonce: int = 0) -> GameRecord:
    """Alternate moves until the game ends.

    ``nonce`` distinguishes repeated games of the same pairing; deterministic
    specs ignore it. An illegal move from an external agent forfeits the game.
    """
    if black.engine != engine.name or white.engine != engine.name:
        raise InvalidInput("both specs must reference the engine being played")
    specs = {1: black, 2: white}
    sessions = {}
    record = GameRecord(engine.name, black.digest(), white.digest(), [], 0.0, nonce=nonce)
    state = engine.initial_state()
    last = None
    per_move = []
    try:
        for player, role in ((1, "black"), (2, "white")):
            if specs[player].agent_kind == EXTERNAL:
                sessions[player] = external_handshake(specs[player], role)
        while state.status == ONGOING:
            player = state.to_move
            spec = specs[player]
            t0 = time.perf_counter()
            if spec.agent_kind == EXTERNAL:
                token = sessions[player].ask_move(last)
                try:
                    move = engine.parse_move(token)
                    legal = engine.is_legal(state, move)
                except InvalidInput:
                    legal = False
                if not legal:
                    record.moves.append(token)
                    record.forfeit = "black" if player == 1 else "white"
                    record.black_score = 0.0 if player == 1 else 1.0
                    break
            else:
                move = mcts_choose_move(engine, state, spec, state.ply, nonce)
            per_move.append(time.perf_counter() - t0)
            state = engine.apply(state, move)
            last = engine.format_move(move)
            record.moves.append(last)
        if record.forfeit is None:
            record.black_score = BLACK_SCORE[state.status]
        for player, session in sessions.items():
            score = record.black_score if player == 1 else record.white_score
            session.result(score)
    except (EngineFailure, ProtocolError) as exc:
        exc.record = record
        raise
    finally:
        for session in sessions.values():
            session.close()
    record.durations = {
        "total_s": sum(per_move),
        "max_move_s": max(per_move, default=0.0),
        "moves": len(per_move),
    }
    return record
