import math

import pytest

from bell_lab.bellgame import (INPUT_PAIRS, PERFECT_SCRIPT, PROGRAM_IDS,
                               QUANTUM_POINT_PROB, ContextualProgramStrategy,
                               FixedProgramStrategy, GameResult,
                               QuantumStrategy, RandomProgramStrategy, Round,
                               ScriptedStrategy, counterfactual_table,
                               is_point, play_game, play_round, program_output)
from bell_lab.core import RngStream


def rng(seed=0):
    return RngStream(seed).generator()


# ---------------------------------------------------------------------------
# programs and the counterfactual table

def test_program_outputs():
    assert [program_output(1, x) for x in (0, 1)] == [0, 0]
    assert [program_output(2, x) for x in (0, 1)] == [1, 1]
    assert [program_output(3, x) for x in (0, 1)] == [0, 1]
    assert [program_output(4, x) for x in (0, 1)] == [1, 0]
    with pytest.raises(ValueError):
        program_output(5, 0)
    with pytest.raises(ValueError):
        program_output(1, 2)


def test_is_point_rule():
    assert is_point(0, 0, 0, 0)       # sum even, product 0
    assert not is_point(0, 0, 0, 1)
    assert is_point(1, 1, 0, 1)       # sum odd, product 1
    assert not is_point(1, 1, 1, 1)


def test_counterfactual_table_scores():
    table = counterfactual_table()
    assert len(table) == 16
    assert {(r.i, r.j) for r in table} == {(i, j) for i in PROGRAM_IDS
                                           for j in PROGRAM_IDS}
    scores = [r.score for r in table]
    # no committed program pair wins all four input pairs
    assert max(scores) == 3
    assert set(scores) == {1, 3}
    assert scores.count(3) == 8
    assert sum(scores) == 32
    for row in table:
        assert row.score == sum(is_point(x, y, *row.answers[(x, y)])
                                for x, y in INPUT_PAIRS)


def test_perfect_script_rows_win_their_own_round():
    table = {(r.i, r.j): r for r in counterfactual_table()}
    assert {(x, y) for _, _, x, y in PERFECT_SCRIPT} == set(INPUT_PAIRS)
    for i, j, x, y in PERFECT_SCRIPT:
        row = table[(i, j)]
        assert is_point(x, y, *row.answers[(x, y)])
        assert row.score == 3  # still loses one of its counterfactual rounds


# ---------------------------------------------------------------------------
# strategies

def test_fixed_strategy_replays_the_table():
    table = {(r.i, r.j): r for r in counterfactual_table()}
    strat = FixedProgramStrategy(2, 3)
    for x, y in INPUT_PAIRS:
        r = play_round(strat, x, y, rng())
        assert (r.a, r.b) == table[(2, 3)].answers[(x, y)]
    with pytest.raises(ValueError):
        FixedProgramStrategy(0, 1)


def test_fixed_strategy_average_tracks_its_score():
    res = play_game(FixedProgramStrategy(1, 1), 4000, rng(1))
    assert res.avg_score == pytest.approx(3.0, abs=0.15)


def test_scripted_strategy_cycles_and_scores_perfectly():
    res = play_game(ScriptedStrategy(PERFECT_SCRIPT), 8, rng(2), keep_log=True)
    assert res.points == 8
    assert res.avg_score == 4.0
    assert [(r.x, r.y) for r in res.log[:4]] == list(
        (x, y) for _, _, x, y in PERFECT_SCRIPT)
    with pytest.raises(ValueError):
        ScriptedStrategy(())


def test_random_strategy_averages_two():
    res = play_game(RandomProgramStrategy(), 20_000, rng(3))
    assert res.avg_score == pytest.approx(2.0, abs=0.06)


def test_contextual_strategy_wobble():
    with pytest.raises(ValueError):
        ContextualProgramStrategy(wobble=1.5)
    frozen = ContextualProgramStrategy(wobble=0.0)
    for _ in range(50):  # zero wobble: both sides decode the same program
        r = play_round(frozen, 0, 1, rng(4))
        assert r.i == r.j
    res = play_game(ContextualProgramStrategy(0.25), 5000, rng(5))
    assert res.avg_score <= 3.0 + 0.15  # shared randomness cannot beat programs


def test_quantum_strategy_point_rate():
    res = play_game(QuantumStrategy(), 20_000, rng(6), keep_log=True)
    assert res.avg_score == pytest.approx(4 * QUANTUM_POINT_PROB, abs=0.05)
    assert res.avg_score == pytest.approx(2 + math.sqrt(2), abs=0.05)
    # answers stay uniform on side A
    mean_a = sum(r.a for r in res.log) / len(res.log)
    assert mean_a == pytest.approx(0.5, abs=0.02)


# ---------------------------------------------------------------------------
# game bookkeeping

def test_play_round_validates_inputs():
    with pytest.raises(ValueError):
        play_round(RandomProgramStrategy(), 2, 0, rng())


def test_round_point_property():
    assert Round(0, 0, 1, 1, 0, 0).point
    assert not Round(1, 1, 1, 1, 0, 0).point


def test_game_result_bookkeeping():
    res = play_game(RandomProgramStrategy(), 200, rng(7), keep_log=True)
    assert res.rounds_played == 200
    assert len(res.log) == 200
    assert res.points == sum(r.point for r in res.log)
    assert all(r.x in (0, 1) and r.y in (0, 1) for r in res.log)
    with pytest.raises(ValueError):
        GameResult(0, 0).avg_score
    with pytest.raises(ValueError):
        play_game(RandomProgramStrategy(), -1, rng())


def test_game_deterministic_under_stream():
    r1 = play_game(QuantumStrategy(), 500, rng(8))
    r2 = play_game(QuantumStrategy(), 500, rng(8))
    assert r1.points == r2.points
