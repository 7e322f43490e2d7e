"""Offline portfolio policies built from a payoff matrix."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matrix_game import TIE_TOL, InvalidInput, MixedStrategy, PayoffMatrix, as_matrix, solve_exact

KINDS = ("nash", "best-arm", "best-half", "uniform", "exploiter")


@dataclass(frozen=True)
class PortfolioPolicy:
    kind: str
    black_strategy: MixedStrategy
    white_strategy: MixedStrategy
    source_matrix_digest: str = ""
    row_labels: tuple = ()
    col_labels: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown policy kind {self.kind!r}")

    def strategy(self, role: str) -> MixedStrategy:
        if role == "black":
            return self.black_strategy
        if role == "white":
            return self.white_strategy
        raise InvalidInput(f"role must be 'black' or 'white', got {role!r}")

    def to_dict(self) -> dict:
        rows = self.row_labels or tuple(str(i) for i in range(len(self.black_strategy)))
        cols = self.col_labels or tuple(str(j) for j in range(len(self.white_strategy)))
        return {
            "kind": self.kind,
            "black_strategy": self.black_strategy.as_dict(rows),
            "white_strategy": self.white_strategy.as_dict(cols),
            "source_matrix_digest": self.source_matrix_digest,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PortfolioPolicy":
        black = d["black_strategy"]
        white = d["white_strategy"]
        return cls(
            kind=d["kind"],
            black_strategy=MixedStrategy(list(black.values())),
            white_strategy=MixedStrategy(list(white.values())),
            source_matrix_digest=d.get("source_matrix_digest", ""),
            row_labels=tuple(black),
            col_labels=tuple(white),
            metadata=dict(d.get("metadata", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def write_policy(policy: PortfolioPolicy, path) -> None:
    Path(path).write_text(policy.to_json(), encoding="utf-8", newline="\n")


def read_policy(path) -> PortfolioPolicy:
    return PortfolioPolicy.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _policy(kind, m: PayoffMatrix, black, white, **metadata) -> PortfolioPolicy:
    return PortfolioPolicy(
        kind=kind,
        black_strategy=black,
        white_strategy=white,
        source_matrix_digest=m.digest(),
        row_labels=m.row_labels,
        col_labels=m.col_labels,
        metadata=metadata,
    )


def build_nash(m) -> PortfolioPolicy:
    m = as_matrix(m)
    eq = solve_exact(m)
    return _policy(
        "nash",
        m,
        eq.row_strategy,
        eq.col_strategy,
        value=eq.value,
        residual=eq.residual,
        black_support=len(eq.row_strategy.support),
        white_support=len(eq.col_strategy.support),
    )


def best_arm_indices(entries: np.ndarray) -> tuple:
    """``(I, J)``: the row with the largest sum and the column with the smallest."""
    # M holds Black's win rate, so White's best arm minimizes its column sum
    return int(np.argmax(entries.sum(axis=1))), int(np.argmin(entries.sum(axis=0)))


def build_best_arm(m) -> PortfolioPolicy:
    m = as_matrix(m)
    i, j = best_arm_indices(m.entries)
    return _policy(
        "best-arm",
        m,
        MixedStrategy.pure(m.n_rows, i),
        MixedStrategy.pure(m.n_cols, j),
        black_arm=m.row_labels[i],
        white_arm=m.col_labels[j],
    )


def top_half(scores: np.ndarray, largest: bool) -> np.ndarray:
    """Indices of the best ``ceil(n/2)`` scores, lowest index first on ties."""
    k = math.ceil(scores.size / 2)
    key = -scores if largest else scores
    order = np.lexsort((np.arange(scores.size), key))
    return np.sort(order[:k])


def build_best_half(m) -> PortfolioPolicy:
    m = as_matrix(m)
    rows = top_half(m.entries.sum(axis=1), largest=True)
    cols = top_half(m.entries.sum(axis=0), largest=False)
    black = np.zeros(m.n_rows)
    black[rows] = 1.0 / rows.size
    white = np.zeros(m.n_cols)
    white[cols] = 1.0 / cols.size
    return _policy(
        "best-half",
        m,
        MixedStrategy(black),
        MixedStrategy(white),
        black_support=[m.row_labels[i] for i in rows],
        white_support=[m.col_labels[j] for j in cols],
    )


def build_uniform(k: int, k_prime: int, row_labels=(), col_labels=()) -> PortfolioPolicy:
    if k < 1 or k_prime < 1:
        raise InvalidInput("uniform portfolio needs k, k' >= 1")
    return PortfolioPolicy(
        kind="uniform",
        black_strategy=MixedStrategy.uniform(k),
        white_strategy=MixedStrategy.uniform(k_prime),
        row_labels=tuple(row_labels),
        col_labels=tuple(col_labels),
    )


def build_exploiter(m_holdout, opponent, opponent_role: str) -> tuple:
    """Held-out option with the highest expected win rate against ``opponent``.

    With ``opponent_role="row"`` the opponent plays Black over the rows and the
    exploiter picks a column, scoring ``1 - M``; with ``"col"`` it is the other
    way round. Returns ``(index, expected win rate)``, ties to the lowest index.
    """
    m = as_matrix(m_holdout)
    if opponent_role == "row":
        q = opponent.probs if isinstance(opponent, MixedStrategy) else MixedStrategy(opponent).probs
        if q.size != m.n_rows:
            raise InvalidInput(f"opponent has {q.size} options, matrix has {m.n_rows} rows")
        gains = 1.0 - q @ m.entries
    elif opponent_role == "col":
        q = opponent.probs if isinstance(opponent, MixedStrategy) else MixedStrategy(opponent).probs
        if q.size != m.n_cols:
            raise InvalidInput(f"opponent has {q.size} options, matrix has {m.n_cols} columns")
        gains = m.entries @ q
    else:
        raise InvalidInput(f"opponent_role must be 'row' or 'col', got {opponent_role!r}")
    # rounding noise must not beat the lowest-index tie-break
    best = int(np.flatnonzero(gains >= gains.max() - TIE_TOL)[0])
    return best, float(gains[best])


def sample_option(policy: PortfolioPolicy, role: str, rng_seed: int) -> int:
    """Draw one option index for a game by inverse-CDF sampling."""
    probs = policy.strategy(role).probs
    u = np.random.default_rng(rng_seed).random()
    return inverse_cdf(probs, u)


def inverse_cdf(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, u, side="right"))
    if i >= probs.size:
        # rounding left cdf[-1] just under u
        i = int(np.flatnonzero(probs > 0.0)[-1])
    return i
