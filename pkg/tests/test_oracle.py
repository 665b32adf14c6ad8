import pytest
from gmpy2 import mpq

from lexsg import LimitExceeded, SolverConfig, solve_lex
from lexsg.casegen import FuzzSpec, gen_random
from lexsg.game import Distribution
from lexsg.oracle import MarkovChain, brute_force_lex, mc_reach_exact, simulate


def chain(*rows):
    return MarkovChain(tuple(Distribution(tuple(row)) for row in rows))


def test_mc_reach_gamblers_walk():
    # 0 <-> absorbing at 1 (lose) and 2 (win), fair steps
    mc = chain(
        [(1, mpq(1, 2)), (2, mpq(1, 2))],
        [(1, mpq(1))],
        [(2, mpq(1))],
    )
    values = mc_reach_exact(mc, {2: mpq(1)})
    assert values == (mpq(1, 2), mpq(0), mpq(1))


def test_mc_reach_handles_transient_loop():
    # state 0 loops with prob 1/2, otherwise moves to the target
    mc = chain(
        [(0, mpq(1, 2)), (1, mpq(1, 2))],
        [(1, mpq(1))],
    )
    values = mc_reach_exact(mc, {1: mpq(1)})
    assert values[0] == mpq(1)


def test_mc_reach_weighted_boundary():
    mc = chain(
        [(1, mpq(1, 2)), (2, mpq(1, 2))],
        [(1, mpq(1))],
        [(2, mpq(1))],
    )
    values = mc_reach_exact(mc, {1: mpq(1, 3), 2: mpq(1)})
    assert values[0] == mpq(1, 2) * mpq(1, 3) + mpq(1, 2)


def test_oracle_matches_solver_on_figures(fig1, fig3, exact_cfg):
    for game, objective in (fig1, fig3):
        report = solve_lex(game, objective, exact_cfg)
        reference = brute_force_lex(game, objective)
        for s in game.states():
            assert tuple(report.values[s]) == tuple(reference[s])


def test_oracle_pair_limit(fig1):
    game, objective = fig1
    with pytest.raises(LimitExceeded):
        brute_force_lex(game, objective, limits=1)


def test_oracle_matches_solver_on_random_game(exact_cfg):
    game, objective = gen_random(FuzzSpec(num_states=5, num_objectives=2, seed=7))
    report = solve_lex(game, objective, exact_cfg)
    reference = brute_force_lex(game, objective)
    for s in game.states():
        assert tuple(report.values[s]) == tuple(reference[s])


def test_simulation_tracks_values(fig1, exact_cfg):
    game, objective = fig1
    report = solve_lex(game, objective, exact_cfg)
    # play the solved strategy against the dual solve's Min behavior
    dual = solve_lex(game.swap_owners(), objective.dual(), exact_cfg)
    freqs = simulate(
        game,
        objective,
        report.strategy,
        dual.strategy,
        episodes=4000,
        horizon=200,
        seed=11,
    )
    expected = report.values[game.initial]
    assert abs(freqs[0] - float(expected[0])) < 0.05
    assert abs(freqs[1] - float(expected[1])) < 0.05
