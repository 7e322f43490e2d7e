"""Python-level game engines over the compiled board kernels."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..kernels import games as _g
from ..matrix_game import InvalidInput

ONGOING = "ongoing"
BLACK_WINS = "black-wins"
WHITE_WINS = "white-wins"
DRAW = "draw"
_STATUS = {_g.ONGOING: ONGOING, _g.BLACK_WINS: BLACK_WINS, _g.WHITE_WINS: WHITE_WINS, _g.DRAW: DRAW}
BLACK_SCORE = {BLACK_WINS: 1.0, WHITE_WINS: 0.0, DRAW: 0.5}


@dataclass(frozen=True)
class GameState:
    board: bytes
    to_move: int = 1
    ply: int = 0
    status: str = ONGOING

    def array(self) -> np.ndarray:
        return np.frombuffer(self.board, dtype=np.int8).copy()


class GameEngine:
    """A two-player board game. Black (1) moves first, White is 2."""

    def __init__(self, name: str, game_id: int, width: int, height: int, connect: int = 0):
        self.name = name
        self.params = np.array([game_id, width, height, connect], dtype=np.int64)
        self.width = width
        self.height = height
        self.connect = connect

    def __repr__(self):
        return f"GameEngine({self.name!r})"

    @property
    def is_hex(self) -> bool:
        return self.params[0] == _g.HEX

    def initial_state(self) -> GameState:
        return GameState(bytes(self.width * self.height))

    def legal_moves(self, state: GameState) -> list:
        if state.status != ONGOING:
            return []
        out = np.empty(_g.max_moves(self.params), dtype=np.int64)
        n = _g.legal_moves(state.array(), self.params, out)
        return [int(x) for x in out[:n]]

    def is_legal(self, state: GameState, move: int) -> bool:
        return state.status == ONGOING and bool(_g.is_legal(state.array(), self.params, int(move)))

    def apply(self, state: GameState, move: int) -> GameState:
        if not self.is_legal(state, move):
            raise InvalidInput(f"illegal move {self.format_move(move)} at ply {state.ply}")
        board = state.array()
        cell = _g.place(board, self.params, int(move), state.to_move)
        st = _g.status_after(board, self.params, cell, state.to_move)
        return GameState(board.tobytes(), 3 - state.to_move, state.ply + 1, _STATUS[int(st)])

    def terminal(self, state: GameState) -> str:
        return state.status

    def format_move(self, move: int) -> str:
        if self.is_hex:
            return f"{move // self.width},{move % self.width}"
        return str(move)

    def parse_move(self, token: str) -> int:
        try:
            if self.is_hex:
                r, c = (int(x) for x in token.split(","))
                if not (0 <= r < self.height and 0 <= c < self.width):
                    raise ValueError(token)
                return r * self.width + c
            return int(token)
        except ValueError as exc:
            raise InvalidInput(f"bad move token {token!r} for {self.name}") from exc


_CONNECT = re.compile(r"^(?:connect4|c4)(?:-(\d+)x(\d+)(?:-(\d+))?)?$")
_HEX = re.compile(r"^hex(\d+)$")


def get_engine(name: str) -> GameEngine:
    """``hexN``, ``connect4`` (5x4, four in a row) or ``connect4-WxH[-K]``."""
    m = _HEX.match(name)
    if m:
        size = int(m.group(1))
        if not 2 <= size <= 19:
            raise InvalidInput(f"hex size must be in 2..19, got {size}")
        return GameEngine(name, _g.HEX, size, size)
    m = _CONNECT.match(name)
    if m:
        w = int(m.group(1) or 5)
        h = int(m.group(2) or 4)
        k = int(m.group(3) or 4)
        if not (1 <= w <= 16 and 1 <= h <= 16 and 2 <= k <= max(w, h)):
            raise InvalidInput(f"bad connect-four shape in {name!r}")
        return GameEngine(name, _g.CONNECT, w, h, k)
    raise InvalidInput(f"unknown game {name!r}; try hex5, connect4, connect4-7x6-4")
