"""Seeded game-playing programs."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

from ..kernels.mcts import uct_search
from ..kernels.rng import make_key
from ..matrix_game import InvalidInput
from .engines import ONGOING, GameEngine, GameState

MCTS = "mcts-builtin"
EXTERNAL = "external-process"
UCT_C = math.sqrt(2.0)


@dataclass(frozen=True)
class GppSpec:
    """One portfolio option.

    A deterministic spec is a pure function of ``seed``. A ``stochastic``
    spec also keys its randomness on the per-game nonce, so repeated games
    between the same pair differ (the variants setting).
    """

    engine: str
    seed: int = 0
    agent_kind: str = MCTS
    simulations_per_move: int = 300
    exploration: float = UCT_C
    stochastic: bool = False
    external_command: tuple = ()
    timeout: float = 60.0

    def __post_init__(self):
        if self.agent_kind not in (MCTS, EXTERNAL):
            raise InvalidInput(f"unknown agent kind {self.agent_kind!r}")
        if self.seed < 0:
            raise InvalidInput("seeds must be non-negative")
        if self.agent_kind == MCTS and self.simulations_per_move < 1:
            raise InvalidInput("simulations_per_move must be >= 1")
        if self.agent_kind == EXTERNAL and not self.external_command:
            raise InvalidInput("external agent needs a command")
        object.__setattr__(self, "external_command", tuple(self.external_command))

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def mcts_choose_move(engine: GameEngine, state: GameState, spec: GppSpec, move_index: int, nonce: int = 0) -> int:
    """Vanilla UCT move for ``state``; randomness keyed by (seed, move_index, nonce)."""
    if state.status != ONGOING:
        raise InvalidInput("cannot choose a move in a finished game")
    key = make_key(spec.seed, move_index, nonce if spec.stochastic else 0)
    move, _ = uct_search(
        state.array(),
        engine.params,
        state.to_move,
        spec.simulations_per_move,
        spec.exploration,
        key,
    )
    return int(move)
