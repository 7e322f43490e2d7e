"""UCBT portfolio: pick one option per game, learn from win/loss.

The score of arm ``i`` at iteration ``t`` is::

    min(1, r_i/n_i + (1/100) sqrt(C log(4 t^rho) / n_i) + (16/100) log(4 t^rho) / n_i)

with ``C = 2``, ``rho = 2.1``, natural log, and score 1 for unplayed arms.
Arms tied on score are ordered by empirical mean (an unplayed arm's mean is
``+inf``), then by fewest plays, then by lowest index.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .kernels import ucbt as _k
from .matrix_game import InvalidInput

EXPLORATION_CONSTANT = 2.0
EXPLORATION_EXPONENT = 2.1


@dataclass(frozen=True, eq=False)
class UcbtState:
    wins: np.ndarray
    plays: np.ndarray
    t: int = 1
    exploration_constant: float = EXPLORATION_CONSTANT
    exploration_exponent: float = EXPLORATION_EXPONENT

    def __post_init__(self):
        wins = np.array(self.wins, dtype=np.int64)
        plays = np.array(self.plays, dtype=np.int64)
        if wins.ndim != 1 or wins.shape != plays.shape or wins.size < 1:
            raise InvalidInput("wins and plays must be equal-length non-empty vectors")
        if np.any(wins < 0) or np.any(wins > plays):
            raise InvalidInput("need 0 <= wins[i] <= plays[i]")
        if self.t < 1 or int(plays.sum()) != self.t - 1:
            raise InvalidInput("t must equal total plays + 1")
        wins.setflags(write=False)
        plays.setflags(write=False)
        object.__setattr__(self, "wins", wins)
        object.__setattr__(self, "plays", plays)

    @classmethod
    def fresh(cls, arm_count: int, **kwargs) -> "UcbtState":
        if arm_count < 1:
            raise InvalidInput("need at least one arm")
        return cls(np.zeros(arm_count, np.int64), np.zeros(arm_count, np.int64), 1, **kwargs)

    @property
    def arm_count(self) -> int:
        return self.wins.size


def ucbt_score(state: UcbtState, i: int) -> float:
    if not 0 <= i < state.arm_count:
        raise InvalidInput(f"arm {i} out of range for {state.arm_count} arms")
    return float(
        _k.score(
            int(state.wins[i]),
            int(state.plays[i]),
            state.t,
            state.exploration_constant,
            state.exploration_exponent,
        )
    )


def select_arm(state: UcbtState) -> int:
    return int(
        _k.select(state.wins, state.plays, state.t, state.exploration_constant, state.exploration_exponent)
    )


def update(state: UcbtState, i: int, won: bool) -> UcbtState:
    if not 0 <= i < state.arm_count:
        raise InvalidInput(f"arm {i} out of range for {state.arm_count} arms")
    wins = state.wins.copy()
    plays = state.plays.copy()
    plays[i] += 1
    if won:
        wins[i] += 1
    return replace(state, wins=wins, plays=plays, t=state.t + 1)


def checkpoints(games: int) -> np.ndarray:
    """Powers of two up to ``games``, plus ``games`` itself."""
    pts = [1 << e for e in range(games.bit_length()) if (1 << e) <= games]
    if pts[-1] != games:
        pts.append(games)
    return np.array(pts, dtype=np.int64)


@dataclass
class OnlineRun:
    state: UcbtState
    iterations: np.ndarray
    losing_rate: np.ndarray
    arms: list = field(default_factory=list)


def run_online(state: UcbtState, opponent, games: int, rng_seed: int = 0) -> OnlineRun:
    """Play ``games`` rounds of select / observe / update.

    ``opponent`` is either a vector of per-arm win probabilities (run in the
    compiled batch kernel) or a callable ``(arm, game_index, rng) -> bool``
    where ``rng`` is a ``numpy.random.Generator`` seeded from ``rng_seed``.
    ``losing_rate`` is the cumulative fraction of games lost, sampled at
    ``iterations`` (powers of two and the last game).
    """
    if games < 1:
        raise InvalidInput("games must be >= 1")
    cps = checkpoints(games)
    if not callable(opponent):
        probs = np.asarray(opponent, dtype=np.float64)
        if probs.shape != (state.arm_count,):
            raise InvalidInput("win-probability vector must have one entry per arm")
        if state.t != 1:
            return run_online(state, _bernoulli(probs), games, rng_seed)
        cum, _, _, wins, plays = _k.run_batch(
            probs[None, :],
            games,
            rng_seed,
            state.exploration_constant,
            state.exploration_exponent,
            cps,
        )
        final = replace(state, wins=wins[0], plays=plays[0], t=games + 1)
        return OnlineRun(final, cps, cum[0])
    rng = np.random.default_rng(rng_seed)
    losses = 0
    curve = []
    arms = []
    cp = 0
    for g in range(1, games + 1):
        arm = select_arm(state)
        won = bool(opponent(arm, g, rng))
        state = update(state, arm, won)
        arms.append(arm)
        losses += not won
        if g == cps[cp]:
            curve.append(losses / g)
            cp += 1
    return OnlineRun(state, cps, np.array(curve), arms)


def _bernoulli(probs: np.ndarray) -> Callable:
    def oracle(arm, game_index, rng):
        return rng.random() < probs[arm]

    return oracle


@dataclass
class LearningCurve:
    iterations: np.ndarray
    losing_rate_mean: np.ndarray
    losing_rate_stddev: np.ndarray
    replications: int
    instant_losing_rate_mean: np.ndarray
    instant_losing_rate_stddev: np.ndarray
    expected_win_rate: np.ndarray
    final_plays: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            [
                "iteration",
                "losing_rate_mean",
                "losing_rate_stddev",
                "replications",
                "instant_losing_rate_mean",
                "instant_losing_rate_stddev",
                "expected_win_rate",
            ]
        )
        for row in zip(
            self.iterations,
            self.losing_rate_mean,
            self.losing_rate_stddev,
            self.instant_losing_rate_mean,
            self.instant_losing_rate_stddev,
            self.expected_win_rate,
        ):
            it, lm, ls, im, is_, ew = row
            w.writerow([int(it), repr(float(lm)), repr(float(ls)), self.replications, repr(float(im)), repr(float(is_)), repr(float(ew))])
        return buf.getvalue()


def learning_curve(win_probs, games: int, replications: int, seed: int = 0) -> LearningCurve:
    """Average many independent UCBT runs.

    ``win_probs`` is one per-arm vector shared by all replications, or a
    ``(replications, arms)`` array giving each run its own opponent.
    ``expected_win_rate`` averages the win probability of the arm actually
    chosen at each checkpoint, which removes the coin-flip noise.
    """
    probs = np.asarray(win_probs, dtype=np.float64)
    if probs.ndim == 1:
        probs = np.broadcast_to(probs, (replications, probs.size))
    if probs.shape[0] != replications:
        raise InvalidInput("need one win-probability row per replication")
    cps = checkpoints(games)
    return curve_from_batch(cps, _k.run_batch(probs, games, seed, checkpoints=cps))


def curve_from_batch(cps: np.ndarray, batch: tuple) -> LearningCurve:
    cum, inst, chosen, _, plays = batch
    return LearningCurve(
        iterations=cps,
        losing_rate_mean=cum.mean(axis=0),
        losing_rate_stddev=cum.std(axis=0),
        replications=cum.shape[0],
        instant_losing_rate_mean=inst.mean(axis=0),
        instant_losing_rate_stddev=inst.std(axis=0),
        expected_win_rate=chosen.mean(axis=0),
        final_plays=plays,
    )
