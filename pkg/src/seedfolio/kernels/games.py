"""Board rules for the built-in games, in flat int8 arrays.

``params`` is an int64 vector ``(game_id, width, height, connect)``. Cells are
indexed ``row * width + col``. Stone values: 0 empty, 1 black, 2 white.
Status codes: 0 ongoing, 1 black wins, 2 white wins, 3 draw.

Connect-Four rows count from the bottom; a move is a column index.
Hex is ``width x height`` (square in practice); a move is a cell index.
Black links row 0 to the last row, White links column 0 to the last column.
"""
import numpy as np

from .._jit import njit
from .rng import draw_below

CONNECT = 0
HEX = 1

ONGOING = 0
BLACK_WINS = 1
WHITE_WINS = 2
DRAW = 3


@njit
def max_moves(params):
    if params[0] == CONNECT:
        return params[1]
    return params[1] * params[2]


@njit
def legal_moves(board, params, out):
    """Write legal moves into ``out`` in ascending order; return their count."""
    w = params[1]
    h = params[2]
    n = 0
    if params[0] == CONNECT:
        top = (h - 1) * w
        for c in range(w):
            if board[top + c] == 0:
                out[n] = c
                n += 1
    else:
        for i in range(w * h):
            if board[i] == 0:
                out[n] = i
                n += 1
    return n


@njit
def is_legal(board, params, move):
    w = params[1]
    h = params[2]
    if params[0] == CONNECT:
        if move < 0 or move >= w:
            return False
        return board[(h - 1) * w + move] == 0
    if move < 0 or move >= w * h:
        return False
    return board[move] == 0


@njit
def place(board, params, move, player):
    """Put ``player``'s stone for ``move``; return the cell it landed on."""
    if params[0] == CONNECT:
        w = params[1]
        for r in range(params[2]):
            cell = r * w + move
            if board[cell] == 0:
                board[cell] = player
                return cell
        return -1
    board[move] = player
    return move


@njit
def _count_dir(board, w, h, r, c, dr, dc, player):
    n = 0
    r += dr
    c += dc
    while 0 <= r < h and 0 <= c < w and board[r * w + c] == player:
        n += 1
        r += dr
        c += dc
    return n


@njit
def _connect_status(board, params, cell, player):
    w = params[1]
    h = params[2]
    k = params[3]
    r = cell // w
    c = cell % w
    if 1 + _count_dir(board, w, h, r, c, 0, 1, player) + _count_dir(board, w, h, r, c, 0, -1, player) >= k:
        return player
    if 1 + _count_dir(board, w, h, r, c, 1, 0, player) + _count_dir(board, w, h, r, c, -1, 0, player) >= k:
        return player
    if 1 + _count_dir(board, w, h, r, c, 1, 1, player) + _count_dir(board, w, h, r, c, -1, -1, player) >= k:
        return player
    if 1 + _count_dir(board, w, h, r, c, 1, -1, player) + _count_dir(board, w, h, r, c, -1, 1, player) >= k:
        return player
    top = (h - 1) * w
    for col in range(w):
        if board[top + col] == 0:
            return ONGOING
    return DRAW


@njit
def _hex_links(board, w, h, start, player):
    """Whether the group containing ``start`` touches both of ``player``'s edges."""
    n = w * h
    seen = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 1
    stack[0] = start
    seen[start] = True
    lo = False
    hi = False
    while top > 0:
        top -= 1
        cell = stack[top]
        r = cell // w
        c = cell % w
        if player == 1:
            if r == 0:
                lo = True
            if r == h - 1:
                hi = True
        else:
            if c == 0:
                lo = True
            if c == w - 1:
                hi = True
        if lo and hi:
            return True
        for d in range(6):
            if d == 0:
                rr, cc = r - 1, c
            elif d == 1:
                rr, cc = r - 1, c + 1
            elif d == 2:
                rr, cc = r, c - 1
            elif d == 3:
                rr, cc = r, c + 1
            elif d == 4:
                rr, cc = r + 1, c - 1
            else:
                rr, cc = r + 1, c
            if 0 <= rr < h and 0 <= cc < w:
                nb = rr * w + cc
                if not seen[nb] and board[nb] == player:
                    seen[nb] = True
                    stack[top] = nb
                    top += 1
    return False


@njit
def status_after(board, params, cell, player):
    """Game status right after ``player`` occupied ``cell``."""
    if params[0] == CONNECT:
        return _connect_status(board, params, cell, player)
    if _hex_links(board, params[1], params[2], cell, player):
        return player
    return ONGOING


@njit
def board_status(board, params):
    """Status of an arbitrary position (full scan)."""
    w = params[1]
    h = params[2]
    if params[0] == CONNECT:
        for cell in range(w * h):
            p = board[cell]
            if p != 0:
                st = _connect_status(board, params, cell, p)
                if st == p:
                    return st
        top = (h - 1) * w
        for c in range(w):
            if board[top + c] == 0:
                return ONGOING
        return DRAW
    for c in range(w):
        if board[c] == 1 and _hex_links(board, w, h, c, 1):
            return BLACK_WINS
    for r in range(h):
        if board[r * w] == 2 and _hex_links(board, w, h, r * w, 2):
            return WHITE_WINS
    return ONGOING


@njit
def rollout(board, params, player, key, counter):
    """Uniform random playout from an ongoing position; mutates ``board``.

    Returns ``(status, counter)``.
    """
    w = params[1]
    h = params[2]
    if params[0] == HEX:
        # a full Hex board always has exactly one winner, and it is the
        # same player who would have connected first
        n = w * h
        empty = np.empty(n, dtype=np.int64)
        m = 0
        for i in range(n):
            if board[i] == 0:
                empty[m] = i
                m += 1
        for i in range(m - 1, 0, -1):
            j = draw_below(key, counter, i + 1)
            counter += 1
            t = empty[i]
            empty[i] = empty[j]
            empty[j] = t
        p = player
        for i in range(m):
            board[empty[i]] = p
            p = 3 - p
        for c in range(w):
            if board[c] == 1 and _hex_links(board, w, h, c, 1):
                return BLACK_WINS, counter
        return WHITE_WINS, counter
    moves = np.empty(w, dtype=np.int64)
    p = player
    while True:
        n = legal_moves(board, params, moves)
        j = draw_below(key, counter, n)
        counter += 1
        cell = place(board, params, moves[j], p)
        st = _connect_status(board, params, cell, p)
        if st != ONGOING:
            return st, counter
        p = 3 - p
