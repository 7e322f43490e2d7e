"""Batched UCBT runs against stationary Bernoulli opponents."""
import math

import numpy as np

from .._jit import USE_NUMBA, njit
from .rng import draw_uniform, draw_uniform_array, make_key

LOG4 = math.log(4.0)


@njit
def score(r, n, t, c, rho):
    if n == 0:
        return 1.0
    lg = LOG4 + rho * math.log(t)
    s = r / n + 0.01 * math.sqrt(c * lg / n) + 0.16 * lg / n
    if s > 1.0:
        return 1.0
    return s


@njit
def select(wins, plays, t, c, rho):
    """Highest score; ties by highest mean (unplayed first), fewest plays, lowest index."""
    best = 0
    best_s = -1.0
    best_mean = -1.0
    best_n = 0
    for i in range(wins.shape[0]):
        n = plays[i]
        s = score(wins[i], n, t, c, rho)
        mean = math.inf if n == 0 else wins[i] / n
        if s > best_s or (s == best_s and (mean > best_mean or (mean == best_mean and n < best_n))):
            best = i
            best_s = s
            best_mean = mean
            best_n = n
    return best


@njit
def _run_batch(probs, games, seed, c, rho, checkpoints):
    reps, k = probs.shape
    n_cp = checkpoints.shape[0]
    cum_loss = np.zeros((reps, n_cp))
    instant_loss = np.zeros((reps, n_cp))
    chosen_prob = np.zeros((reps, n_cp))
    final_wins = np.zeros((reps, k), dtype=np.int64)
    final_plays = np.zeros((reps, k), dtype=np.int64)
    for rep in range(reps):
        key = make_key(seed, rep, 11)
        wins = np.zeros(k, dtype=np.int64)
        plays = np.zeros(k, dtype=np.int64)
        losses = 0
        cp = 0
        for t in range(1, games + 1):
            arm = select(wins, plays, t, c, rho)
            won = draw_uniform(key, t) < probs[rep, arm]
            plays[arm] += 1
            if won:
                wins[arm] += 1
            else:
                losses += 1
            if cp < n_cp and t == checkpoints[cp]:
                cum_loss[rep, cp] = losses / t
                instant_loss[rep, cp] = 0.0 if won else 1.0
                chosen_prob[rep, cp] = probs[rep, arm]
                cp += 1
        final_wins[rep] = wins
        final_plays[rep] = plays
    return cum_loss, instant_loss, chosen_prob, final_wins, final_plays


def _run_batch_numpy(probs, games, seed, c, rho, checkpoints):
    """Vectorized over replications; same draws and tie-breaks as the kernel."""
    reps, k = probs.shape
    n_cp = checkpoints.shape[0]
    cum_loss = np.zeros((reps, n_cp))
    instant_loss = np.zeros((reps, n_cp))
    chosen_prob = np.zeros((reps, n_cp))
    keys = np.array([make_key(seed, rep, 11) for rep in range(reps)], dtype=np.int64)
    wins = np.zeros((reps, k), dtype=np.int64)
    plays = np.zeros((reps, k), dtype=np.int64)
    losses = np.zeros(reps, dtype=np.int64)
    rows = np.arange(reps)
    cp = 0
    for t in range(1, games + 1):
        lg = LOG4 + rho * math.log(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = wins / plays + 0.01 * np.sqrt(c * lg / plays) + 0.16 * lg / plays
            mean = np.where(plays == 0, np.inf, wins / plays)
        s = np.where(plays == 0, 1.0, np.minimum(s, 1.0))
        tied = s == s.max(axis=1, keepdims=True)
        m = np.where(tied, mean, -1.0)
        tied &= m == m.max(axis=1, keepdims=True)
        n = np.where(tied, plays, np.iinfo(np.int64).max)
        tied &= n == n.min(axis=1, keepdims=True)
        arm = tied.argmax(axis=1)
        p = probs[rows, arm]
        won = draw_uniform_array(keys, t) < p
        plays[rows, arm] += 1
        wins[rows, arm] += won
        losses += ~won
        if cp < n_cp and t == checkpoints[cp]:
            cum_loss[:, cp] = losses / t
            instant_loss[:, cp] = np.where(won, 0.0, 1.0)
            chosen_prob[:, cp] = p
            cp += 1
    return cum_loss, instant_loss, chosen_prob, wins, plays


def run_batch(probs, games, seed, c=2.0, rho=2.1, checkpoints=None):
    """UCBT against per-replication arm win probabilities ``probs[rep, arm]``.

    Returns ``(cum_loss, instant_loss, chosen_prob, wins, plays)``; the first
    three are sampled at ``checkpoints`` (1-based game indices, ascending).
    """
    probs = np.ascontiguousarray(np.atleast_2d(probs), dtype=np.float64)
    if checkpoints is None:
        checkpoints = np.array([games], dtype=np.int64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    fn = _run_batch if USE_NUMBA else _run_batch_numpy
    return fn(probs, int(games), int(seed), float(c), float(rho), checkpoints)

