from .agents import EXTERNAL, MCTS, GppSpec, mcts_choose_move
from .engines import BLACK_WINS, DRAW, ONGOING, WHITE_WINS, GameEngine, GameState, get_engine
from .external import EngineFailure, ExternalSession, ProtocolError, external_handshake
from .play import GameRecord, play_game, replay

__all__ = [
    "BLACK_WINS",
    "DRAW",
    "EXTERNAL",
    "EngineFailure",
    "ExternalSession",
    "GameEngine",
    "GameRecord",
    "GameState",
    "GppSpec",
    "MCTS",
    "ONGOING",
    "ProtocolError",
    "WHITE_WINS",
    "external_handshake",
    "get_engine",
    "mcts_choose_move",
    "play_game",
    "replay",
]
