"""EXP3 self-play on a 1-sum matrix game."""
import math

import numpy as np

from .._jit import njit
from .rng import draw_uniform


@njit
def _weights(cum_loss, eta, out):
    lo = cum_loss[0]
    for i in range(1, cum_loss.shape[0]):
        if cum_loss[i] < lo:
            lo = cum_loss[i]
    total = 0.0
    for i in range(cum_loss.shape[0]):
        out[i] = math.exp(-eta * (cum_loss[i] - lo))
        total += out[i]
    for i in range(cum_loss.shape[0]):
        out[i] /= total


@njit
def _sample(probs, u):
    acc = 0.0
    last = probs.shape[0] - 1
    for i in range(last):
        acc += probs[i]
        if u < acc:
            return i
    return last


@njit
def exp3_selfplay(m, iterations, scale, constant_eta, key):
    """Two importance-weighted EXP3 learners playing ``m`` against each other.

    The row player's loss is ``1 - m[i, j]``, the column player's is
    ``m[i, j]``. With ``constant_eta <= 0`` the rate at step ``t`` is
    ``scale * sqrt(log(k) / (k * t))`` for each player's own ``k``.
    Returns the time-averaged mixed strategies.
    """
    k_row, k_col = m.shape
    cum_row = np.zeros(k_row)
    cum_col = np.zeros(k_col)
    p = np.empty(k_row)
    q = np.empty(k_col)
    avg_p = np.zeros(k_row)
    avg_q = np.zeros(k_col)
    c_row = math.log(k_row) / k_row
    c_col = math.log(k_col) / k_col
    counter = 0
    for t in range(1, iterations + 1):
        if constant_eta > 0.0:
            eta_row = constant_eta
            eta_col = constant_eta
        else:
            eta_row = scale * math.sqrt(c_row / t)
            eta_col = scale * math.sqrt(c_col / t)
        _weights(cum_row, eta_row, p)
        _weights(cum_col, eta_col, q)
        for i in range(k_row):
            avg_p[i] += p[i]
        for j in range(k_col):
            avg_q[j] += q[j]
        i = _sample(p, draw_uniform(key, counter))
        j = _sample(q, draw_uniform(key, counter + 1))
        counter += 2
        x = m[i, j]
        cum_row[i] += (1.0 - x) / p[i]
        cum_col[j] += x / q[j]
    return avg_p / iterations, avg_q / iterations
