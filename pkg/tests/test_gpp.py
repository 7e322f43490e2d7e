import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seedfolio.gpp import (
    BLACK_WINS,
    DRAW,
    EXTERNAL,
    ONGOING,
    WHITE_WINS,
    EngineFailure,
    GameRecord,
    GppSpec,
    ProtocolError,
    get_engine,
    mcts_choose_move,
    play_game,
    replay,
)
from seedfolio.matrix_game import InvalidInput

ECHO = (sys.executable, "-m", "seedfolio.gpp.echo_engine")


def play_moves(engine, moves):
    state = engine.initial_state()
    for mv in moves:
        state = engine.apply(state, mv)
    return state


def winning_moves(engine, state):
    """Exhaustive 1-ply search."""
    target = BLACK_WINS if state.to_move == 1 else WHITE_WINS
    return [mv for mv in engine.legal_moves(state) if engine.apply(state, mv).status == target]


# -- engines ---------------------------------------------------------------------


def test_engine_names():
    c4 = get_engine("connect4")
    assert (c4.width, c4.height, c4.connect) == (5, 4, 4)
    assert get_engine("connect4-7x6-4").width == 7
    assert get_engine("c4-5x4-3").connect == 3
    assert get_engine("hex5").is_hex
    for bad in ("chess", "hex1", "connect4-5x4-9"):
        with pytest.raises(InvalidInput):
            get_engine(bad)


def test_connect_four_rules():
    e = get_engine("connect4")
    assert e.legal_moves(e.initial_state()) == [0, 1, 2, 3, 4]
    s = play_moves(e, [0, 0, 0, 0])
    assert not e.is_legal(s, 0)  # column full
    s = play_moves(e, [0, 4, 1, 4, 2, 4, 3])
    assert s.status == BLACK_WINS
    assert e.legal_moves(s) == []
    with pytest.raises(InvalidInput):
        e.apply(s, 1)
    # vertical win for White
    assert play_moves(e, [0, 4, 1, 4, 2, 4, 0, 4]).status == WHITE_WINS


def test_connect_four_diagonal():
    e = get_engine("connect4")
    s = play_moves(e, [0, 1, 1, 2, 4, 2, 2, 3, 4, 3, 3, 4])
    assert s.status == ONGOING
    assert e.apply(s, 3).status == BLACK_WINS


def test_connect_four_draw():
    e = get_engine("c4-2x2-2")
    s = play_moves(e, [0, 0])
    assert s.status == ONGOING
    e3 = get_engine("connect4-3x2-3")
    s = play_moves(e3, [0, 1, 2, 0, 1, 2])
    assert s.status == DRAW


def test_hex_rules():
    e = get_engine("hex3")
    assert len(e.legal_moves(e.initial_state())) == 9
    # Black connects top to bottom down column 0; White wastes moves on the right
    s = play_moves(e, [0, 2, 3, 5])
    s = e.apply(s, 6)
    assert s.status == BLACK_WINS
    assert e.parse_move("1,2") == 5
    assert e.format_move(5) == "1,2"
    with pytest.raises(InvalidInput):
        e.parse_move("3,0")
    with pytest.raises(InvalidInput):
        e.parse_move("x")


def test_hex_white_connects_left_right():
    e = get_engine("hex3")
    s = play_moves(e, [0, 3, 1, 4, 8])
    s = e.apply(s, 5)
    assert s.status == WHITE_WINS


@given(st.integers(2, 7), st.integers(0, 2**31))
def test_full_hex_board_has_one_winner(size, seed):
    e = get_engine(f"hex{size}")
    gen = np.random.default_rng(seed)
    state = e.initial_state()
    while state.status == ONGOING:
        state = e.apply(state, int(gen.choice(e.legal_moves(state))))
    assert state.status in (BLACK_WINS, WHITE_WINS)


@given(st.sampled_from(["connect4", "hex4", "connect4-4x4-3"]), st.integers(0, 2**31))
def test_legal_moves_nonempty_iff_ongoing(name, seed):
    e = get_engine(name)
    gen = np.random.default_rng(seed)
    state = e.initial_state()
    while True:
        moves = e.legal_moves(state)
        assert bool(moves) == (state.status == ONGOING)
        if not moves:
            break
        mv = int(gen.choice(moves))
        nxt = e.apply(state, mv)
        assert nxt == e.apply(state, mv)  # apply is pure
        state = nxt


# -- MCTS agent ------------------------------------------------------------------


def test_single_legal_move():
    e = get_engine("connect4-2x3-3")
    s = play_moves(e, [0, 0, 0])  # column 0 is full
    assert e.legal_moves(s) == [1]
    assert mcts_choose_move(e, s, GppSpec(e.name, 1, simulations_per_move=10), s.ply) == 1


def test_finished_game_rejected():
    e = get_engine("connect4")
    s = play_moves(e, [0, 4, 1, 4, 2, 4, 3])
    with pytest.raises(InvalidInput):
        mcts_choose_move(e, s, GppSpec(e.name, 1), s.ply)


def test_winning_move_in_one():
    e = get_engine("connect4")
    s = play_moves(e, [0, 0, 1, 1, 2, 2])
    assert winning_moves(e, s) == [3]
    hits = sum(mcts_choose_move(e, s, GppSpec(e.name, seed), s.ply) == 3 for seed in range(100))
    assert hits >= 99


def test_winning_move_random_positions():
    e = get_engine("connect4")
    gen = np.random.default_rng(11)
    found = 0
    while found < 10:
        state = e.initial_state()
        for _ in range(int(gen.integers(4, 14))):
            if state.status != ONGOING:
                break
            state = e.apply(state, int(gen.choice(e.legal_moves(state))))
        if state.status != ONGOING:
            continue
        wins = winning_moves(e, state)
        if not wins:
            continue
        found += 1
        hits = sum(mcts_choose_move(e, state, GppSpec(e.name, seed), state.ply) in wins for seed in range(100))
        assert hits >= 99


def test_mcts_deterministic_and_seed_sensitive():
    e = get_engine("hex5")
    s = e.initial_state()
    moves = [mcts_choose_move(e, s, GppSpec(e.name, seed, simulations_per_move=40), 0) for seed in range(30)]
    assert moves == [mcts_choose_move(e, s, GppSpec(e.name, seed, simulations_per_move=40), 0) for seed in range(30)]
    assert len(set(moves)) > 1


def test_seed_determinism_across_processes():
    e = get_engine("connect4")
    gen = np.random.default_rng(5)
    cases = []
    for _ in range(20):
        moves = []
        state = e.initial_state()
        for _ in range(int(gen.integers(0, 8))):
            mv = int(gen.choice(e.legal_moves(state)))
            nxt = e.apply(state, mv)
            if nxt.status != ONGOING:
                break
            moves.append(mv)
            state = nxt
        cases.append((int(gen.integers(0, 10**6)), moves))
    local = [mcts_choose_move(e, play_moves(e, mv), GppSpec(e.name, seed), len(mv)) for seed, mv in cases]
    script = (
        "import json, sys\n"
        "from seedfolio.gpp import GppSpec, get_engine, mcts_choose_move\n"
        "e = get_engine('connect4')\n"
        "out = []\n"
        "for seed, moves in json.loads(sys.argv[1]):\n"
        "    s = e.initial_state()\n"
        "    for m in moves:\n"
        "        s = e.apply(s, m)\n"
        "    out.append(mcts_choose_move(e, s, GppSpec(e.name, seed), len(moves)))\n"
        "print(json.dumps(out))\n"
    )
    res = subprocess.run([sys.executable, "-c", script, json.dumps(cases)], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout) == local


def test_stochastic_spec_uses_nonce():
    e = get_engine("hex5")
    s = e.initial_state()
    spec = GppSpec(e.name, 3, simulations_per_move=30, stochastic=True)
    det = GppSpec(e.name, 3, simulations_per_move=30)
    assert {mcts_choose_move(e, s, det, 0, nonce) for nonce in range(20)} == {mcts_choose_move(e, s, det, 0)}
    assert len({mcts_choose_move(e, s, spec, 0, nonce) for nonce in range(20)}) > 1


def test_spec_validation():
    with pytest.raises(InvalidInput):
        GppSpec("hex5", -1)
    with pytest.raises(InvalidInput):
        GppSpec("hex5", 1, simulations_per_move=0)
    with pytest.raises(InvalidInput):
        GppSpec("hex5", 1, agent_kind=EXTERNAL)
    with pytest.raises(InvalidInput):
        GppSpec("hex5", 1, agent_kind="oracle")
    assert GppSpec("hex5", 1).digest() != GppSpec("hex5", 2).digest()


# -- play_game -------------------------------------------------------------------


def test_hex_seed7_record_is_reproducible():
    e = get_engine("hex5")
    a = play_game(e, GppSpec(e.name, 7), GppSpec(e.name, 7))
    b = play_game(e, GppSpec(e.name, 7), GppSpec(e.name, 7))
    assert a == b
    assert a.to_json() == b.to_json()
    assert a.black_score in (0.0, 1.0)


def test_records_replay_and_sum_to_one():
    for name in ("hex4", "connect4"):
        e = get_engine(name)
        for bs in range(4):
            for ws in range(4):
                rec = play_game(e, GppSpec(name, bs, simulations_per_move=60), GppSpec(name, ws, simulations_per_move=60))
                assert replay(rec) == rec.black_score
                assert rec.black_score + rec.white_score == 1.0
                assert rec.black_score in (0.0, 0.5, 1.0)
                if e.is_hex:
                    assert rec.black_score != 0.5
                assert rec.durations["moves"] == len(rec.moves)


def test_replay_rejects_tampered_record():
    e = get_engine("connect4")
    rec = play_game(e, GppSpec(e.name, 1, simulations_per_move=30), GppSpec(e.name, 2, simulations_per_move=30))
    bad = GameRecord(rec.engine, rec.black, rec.white, rec.moves[:-1], rec.black_score)
    with pytest.raises(InvalidInput):
        replay(bad)
    worse = GameRecord(rec.engine, rec.black, rec.white, ["9"] + rec.moves, rec.black_score)
    with pytest.raises(InvalidInput):
        replay(worse)


def test_mismatched_engine_rejected():
    e = get_engine("hex5")
    with pytest.raises(InvalidInput):
        play_game(e, GppSpec("hex4", 1), GppSpec("hex5", 1))


# -- external adapter ------------------------------------------------------------


def external(engine, *flags, seed=1, timeout=20.0):
    return GppSpec(engine, seed, agent_kind=EXTERNAL, external_command=ECHO + flags, timeout=timeout)


def test_echo_engine_completes_a_game():
    e = get_engine("connect4")
    rec = play_game(e, external(e.name), GppSpec(e.name, 3, simulations_per_move=50))
    assert rec.forfeit is None
    assert replay(rec) == rec.black_score
    rec2 = play_game(e, GppSpec(e.name, 3, simulations_per_move=50), external(e.name, "--policy", "mcts"))
    assert replay(rec2) == rec2.black_score


def test_echo_engine_hex_tokens():
    e = get_engine("hex4")
    rec = play_game(e, GppSpec(e.name, 2, simulations_per_move=30), external(e.name))
    assert all("," in mv for mv in rec.moves)
    assert replay(rec) == rec.black_score


def test_garbage_is_protocol_error():
    e = get_engine("connect4")
    with pytest.raises(ProtocolError) as info:
        play_game(e, external(e.name, "--garbage-after", "1"), GppSpec(e.name, 1, simulations_per_move=20))
    assert info.value.line == "banana split"
    assert len(info.value.record.moves) == 2


def test_exit_mid_game_is_engine_failure():
    e = get_engine("connect4")
    with pytest.raises(EngineFailure) as info:
        play_game(e, GppSpec(e.name, 1, simulations_per_move=20), external(e.name, "--exit-after", "2"))
    assert "exit code: 3" in info.value.diagnostics
    assert info.value.record is not None
    assert len(info.value.record.moves) == 5


def test_illegal_move_forfeits():
    e = get_engine("connect4")
    rec = play_game(e, GppSpec(e.name, 1, simulations_per_move=20), external(e.name, "--illegal"))
    assert rec.forfeit == "white"
    assert rec.black_score == 1.0
    assert rec.moves[-1] == "99"
    assert replay(rec) == 1.0
    flipped = GameRecord(rec.engine, rec.black, rec.white, rec.moves, 0.0, forfeit="black")
    with pytest.raises(InvalidInput):
        replay(flipped)


def test_timeout_is_engine_failure():
    sleeper = GppSpec(
        "connect4",
        1,
        agent_kind=EXTERNAL,
        external_command=(sys.executable, "-c", "import time; time.sleep(30)"),
        timeout=0.5,
    )
    e = get_engine("connect4")
    with pytest.raises(EngineFailure, match="no reply"):
        play_game(e, sleeper, GppSpec(e.name, 1))


def test_missing_binary_is_engine_failure():
    spec = GppSpec("connect4", 1, agent_kind=EXTERNAL, external_command=("/nonexistent/engine",))
    e = get_engine("connect4")
    with pytest.raises(EngineFailure):
        play_game(e, spec, GppSpec(e.name, 1))
