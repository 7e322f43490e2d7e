"""Vanilla UCT over the built-in games."""
import math

import numpy as np

from .._jit import njit
from .games import ONGOING, DRAW, legal_moves, max_moves, place, rollout, status_after
from .rng import draw_below


@njit
def uct_search(board, params, to_move, n_sims, c_explore, key):
    """Run ``n_sims`` UCT iterations from ``board``; return the chosen move.

    Each iteration selects with UCB1, expands one untried move (picked at
    random), rolls out uniformly, and backs up the result. The root child
    with the most visits wins, ties going to the lowest move.
    Root visit counts are left in the second return value, indexed by move.
    """
    width = max_moves(params)
    cap = n_sims + 1
    parent = np.full(cap, -1, dtype=np.int64)
    move = np.full(cap, -1, dtype=np.int64)
    mover = np.zeros(cap, dtype=np.int64)
    first_child = np.full(cap, -1, dtype=np.int64)
    sibling = np.full(cap, -1, dtype=np.int64)
    visits = np.zeros(cap, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)
    status = np.zeros(cap, dtype=np.int64)
    untried = np.empty((cap, width), dtype=np.int64)
    n_untried = np.zeros(cap, dtype=np.int64)

    mover[0] = 3 - to_move
    n_untried[0] = legal_moves(board, params, untried[0])
    n_nodes = 1
    counter = 0
    work = board.copy()

    for _ in range(n_sims):
        work[:] = board
        node = 0
        player = to_move
        while n_untried[node] == 0 and status[node] == ONGOING:
            log_n = math.log(visits[node])
            best = -1
            best_score = -1.0
            child = first_child[node]
            while child != -1:
                score = value[child] / visits[child] + c_explore * math.sqrt(log_n / visits[child])
                if score > best_score:
                    best_score = score
                    best = child
                child = sibling[child]
            place(work, params, move[best], player)
            player = 3 - player
            node = best

        if status[node] == ONGOING and n_untried[node] > 0:
            k = n_untried[node]
            j = draw_below(key, counter, k)
            counter += 1
            mv = untried[node, j]
            untried[node, j] = untried[node, k - 1]
            n_untried[node] = k - 1
            cell = place(work, params, mv, player)
            child = n_nodes
            n_nodes += 1
            parent[child] = node
            move[child] = mv
            mover[child] = player
            status[child] = status_after(work, params, cell, player)
            if status[child] == ONGOING:
                n_untried[child] = legal_moves(work, params, untried[child])
            sibling[child] = first_child[node]
            first_child[node] = child
            player = 3 - player
            node = child

        if status[node] != ONGOING:
            result = status[node]
        else:
            result, counter = rollout(work, params, player, key, counter)

        while node != -1:
            visits[node] += 1
            if result == DRAW:
                value[node] += 0.5
            elif result == mover[node]:
                value[node] += 1.0
            node = parent[node]

    root_visits = np.zeros(width, dtype=np.int64)
    best_move = -1
    best_visits = -1
    child = first_child[0]
    while child != -1:
        root_visits[move[child]] = visits[child]
        child = sibling[child]
    for mv in range(width):
        if root_visits[mv] > best_visits:
            best_visits = root_visits[mv]
            best_move = mv
    if best_visits == 0:
        # n_sims == 0: nothing was expanded
        best_move = untried[0, 0]
    return best_move, root_visits
