"""Finite 1-sum matrix games: representation, solving, best responses.

The row player (Black) receives ``M[i, j]`` and the column player (White)
receives ``1 - M[i, j]``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .kernels.exp3 import exp3_selfplay
from .kernels.rng import make_key

EXACT_TOL = 1e-8
NORM_DRIFT = 1e-9
TIE_TOL = 1e-12

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class InvalidInput(ValueError):
    """Raised for malformed matrices, strategies, or arguments."""


class SolverDefect(RuntimeError):
    """The LP backend failed on an input that is valid by construction."""


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    entries: np.ndarray
    row_labels: tuple
    col_labels: tuple

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise InvalidInput(f"payoff matrix must be 2-D and non-empty, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or m.min() < 0.0 or m.max() > 1.0:
            raise InvalidInput("payoff entries must lie in [0, 1]")
        rows = tuple(str(x) for x in self.row_labels)
        cols = tuple(str(x) for x in self.col_labels)
        if len(rows) != m.shape[0] or len(cols) != m.shape[1]:
            raise InvalidInput("label count does not match matrix shape")
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise InvalidInput("labels must be unique within each axis")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @classmethod
    def from_array(cls, entries, row_labels=None, col_labels=None) -> "PayoffMatrix":
        m = np.asarray(entries, dtype=np.float64)
        if m.ndim != 2:
            raise InvalidInput(f"payoff matrix must be 2-D, got {m.ndim}-D")
        if row_labels is None:
            row_labels = [f"r{i}" for i in range(m.shape[0])]
        if col_labels is None:
            col_labels = [f"c{j}" for j in range(m.shape[1])]
        return cls(m, tuple(row_labels), tuple(col_labels))

    @property
    def shape(self):
        return self.entries.shape

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "PayoffMatrix":
        rows = list(rows)
        cols = list(cols)
        return PayoffMatrix(
            self.entries[np.ix_(rows, cols)],
            tuple(self.row_labels[i] for i in rows),
            tuple(self.col_labels[j] for j in cols),
        )

    def dual(self) -> "PayoffMatrix":
        """The same game seen from White: ``1 - M^T``, axes swapped."""
        return PayoffMatrix(1.0 - self.entries.T, self.col_labels, self.row_labels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.col_labels))
        for label, row in zip(self.row_labels, self.entries):
            w.writerow([label] + [format_entry(x) for x in row])
        return buf.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode("utf-8")).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, PayoffMatrix):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.entries, other.entries)
        )

    __hash__ = None


def format_entry(x: float) -> str:
    """Shortest round-trip decimal, padded to at least 9 significant digits."""
    x = float(x)
    s = repr(x)
    digits = s.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
    if len(digits) >= 9:
        return s
    return format(x, "#.9g")


def as_matrix(m) -> PayoffMatrix:
    if isinstance(m, PayoffMatrix):
        return m
    return PayoffMatrix.from_array(m)


def read_matrix_csv(path) -> PayoffMatrix:
    text = Path(path).read_text(encoding="utf-8")
    return parse_matrix_csv(text)


def parse_matrix_csv(text: str) -> PayoffMatrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2:
        raise InvalidInput("matrix CSV needs a header and at least one row")
    header = rows[0]
    if header[0] != "":
        raise InvalidInput("matrix CSV header must start with an empty cell")
    cols = header[1:]
    labels = []
    values = []
    for r in rows[1:]:
        if len(r) != len(header):
            raise InvalidInput(f"row {r[0]!r} has {len(r) - 1} entries, expected {len(cols)}")
        labels.append(r[0])
        try:
            values.append([float(x) for x in r[1:]])
        except ValueError as exc:
            raise InvalidInput(f"non-numeric entry in row {r[0]!r}") from exc
    return PayoffMatrix(np.array(values, dtype=np.float64).reshape(len(labels), len(cols)), tuple(labels), tuple(cols))


def write_matrix_csv(m: PayoffMatrix, path) -> None:
    Path(path).write_text(m.to_csv(), encoding="utf-8", newline="\n")


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).ravel()
        if p.size == 0 or not np.all(np.isfinite(p)):
            raise InvalidInput("strategy must be a non-empty finite vector")
        if p.min() < -NORM_DRIFT:
            raise InvalidInput("strategy has negative probabilities")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > 1e-12:
            if abs(total - 1.0) > NORM_DRIFT:
                raise InvalidInput(f"strategy sums to {total!r}, not 1")
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights) -> "MixedStrategy":
        """Clip tiny negatives and renormalize solver output."""
        w = np.clip(np.asarray(weights, dtype=np.float64), 0.0, None)
        total = w.sum()
        if total <= 0.0:
            raise InvalidInput("cannot normalize an all-zero weight vector")
        return cls(w / total)

    @classmethod
    def pure(cls, n: int, index: int) -> "MixedStrategy":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, n: int) -> "MixedStrategy":
        if n < 1:
            raise InvalidInput("uniform strategy needs at least one option")
        return cls(np.full(n, 1.0 / n))

    @property
    def support(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.probs > 0.0))

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    __hash__ = None

    def as_dict(self, labels) -> dict:
        return {str(label): float(x) for label, x in zip(labels, self.probs)}


def _probs(s, n: int, what: str) -> np.ndarray:
    p = s.probs if isinstance(s, MixedStrategy) else MixedStrategy(s).probs
    if p.size != n:
        raise InvalidInput(f"{what} has length {p.size}, expected {n}")
    return p


@dataclass(frozen=True)
class Equilibrium:
    row_strategy: MixedStrategy
    col_strategy: MixedStrategy
    value: float
    residual: float
    method: str

    def to_dict(self, m: PayoffMatrix) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "residual": self.residual,
            "row_strategy": self.row_strategy.as_dict(m.row_labels),
            "col_strategy": self.col_strategy.as_dict(m.col_labels),
        }

    def to_json(self, m: PayoffMatrix) -> str:
        return json.dumps(self.to_dict(m), indent=2) + "\n"


def best_response_row(m, q) -> tuple:
    """Row maximizing ``M q``; ties go to the lowest index."""
    m = as_matrix(m)
    payoff = m.entries @ _probs(q, m.n_cols, "column strategy")
    i = int(np.flatnonzero(payoff >= payoff.max() - TIE_TOL)[0])
    return i, float(payoff[i])


def best_response_col(m, p) -> tuple:
    """Column minimizing ``p^T M``; ties go to the lowest index."""
    m = as_matrix(m)
    payoff = _probs(p, m.n_rows, "row strategy") @ m.entries
    j = int(np.flatnonzero(payoff <= payoff.min() + TIE_TOL)[0])
    return j, float(payoff[j])


def exploitability(m, p, q, v: float) -> tuple:
    """``(exploit_1(p), exploit_2(q), mean)`` against game value ``v``."""
    _, worst_for_p = best_response_col(m, p)
    _, best_vs_q = best_response_row(m, q)
    e1 = max(0.0, v - worst_for_p)
    e2 = max(0.0, best_vs_q - v)
    return e1, e2, 0.5 * (e1 + e2)


def _saddle_residual(m: PayoffMatrix, p: np.ndarray, q: np.ndarray) -> tuple:
    v = float(p @ m.entries @ q)
    e1 = v - float((p @ m.entries).min())
    e2 = float((m.entries @ q).max()) - v
    return v, max(0.0, e1, e2)


def _maximin(a: np.ndarray) -> np.ndarray:
    """Maximin strategy for the row player of ``a``: max v s.t. a^T x >= v."""
    k, kp = a.shape
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-a.T, np.ones((kp, 1))])
    a_eq = np.ones((1, k + 1))
    a_eq[0, -1] = 0.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(kp),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0.0, None)] * k + [(None, None)],
        method="highs-ds",
        options=_HIGHS_OPTIONS,
    )
    if res.status != 0:
        raise SolverDefect(f"LP solver failed on a valid game: {res.message}")
    return res.x[:k]


def solve_exact(m) -> Equilibrium:
    """Equilibrium by the pair of dual LPs (HiGHS dual simplex)."""
    m = as_matrix(m)
    a = m.entries
    if a.min() == a.max():
        p = MixedStrategy.uniform(m.n_rows)
        q = MixedStrategy.uniform(m.n_cols)
        return Equilibrium(p, q, float(a[0, 0]), 0.0, "exact-lp")
    p = MixedStrategy.normalized(_maximin(a))
    # the column player's minimax is the row player's maximin of 1 - M^T
    q = MixedStrategy.normalized(_maximin(1.0 - a.T))
    v, residual = _saddle_residual(m, p.probs, q.probs)
    if residual > EXACT_TOL:
        raise SolverDefect(f"LP equilibrium residual {residual:.3g} exceeds {EXACT_TOL}")
    return Equilibrium(p, q, v, residual, "exact-lp")


def solve_approx(m, iterations: int = 100_000, learning_rate="anytime", seed: int = 0) -> Equilibrium:
    """Approximate equilibrium from two EXP3 learners in self-play.

    ``learning_rate`` is ``"anytime"`` (``sqrt(log k / (k t))`` per player),
    ``"anytime*<c>"`` for that schedule times ``c``, or a positive float used
    as a constant rate. The residual is the larger
    saddle-point violation of the averaged strategies, measured exactly.
    """
    m = as_matrix(m)
    iterations = int(iterations)
    if iterations < 1:
        raise InvalidInput("iterations must be >= 1")
    scale, constant = 1.0, 0.0
    if isinstance(learning_rate, str):
        if learning_rate.startswith("anytime*"):
            scale = float(learning_rate.split("*", 1)[1])
        elif learning_rate != "anytime":
            raise InvalidInput(f"unknown learning-rate schedule {learning_rate!r}")
    else:
        constant = float(learning_rate)
        if constant <= 0.0:
            raise InvalidInput("constant learning rate must be positive")
    key = make_key(int(seed), iterations, 3)
    avg_p, avg_q = exp3_selfplay(np.ascontiguousarray(m.entries), iterations, scale, constant, key)
    p = MixedStrategy.normalized(avg_p)
    q = MixedStrategy.normalized(avg_q)
    v, residual = _saddle_residual(m, p.probs, q.probs)
    return Equilibrium(p, q, v, residual, "exp3-approx")
