from gmpy2 import mpq

from lexsg import (
    Distribution,
    MDStrategy,
    ObjectiveKind,
    Owner,
    QuantifiedObjective,
    SolverConfig,
    StochasticGame,
    almost_sure_reach_under,
    locally_optimal_filter,
    solve_reach,
    solve_safe,
)
from lexsg.game import self_loop
from lexsg.rationals import ONE
from lexsg.single import ValueAssignment, positive_states

R = ObjectiveKind.REACH
S = ObjectiveKind.SAFE


def coin_choice_game():
    # Max picks a fair coin or a biased one; heads is the target.
    return StochasticGame(
        names=["pick", "heads", "tails"],
        owners=[Owner.MAX, Owner.MAX, Owner.MAX],
        actions=[
            [
                ("fair", Distribution(((1, mpq(1, 2)), (2, mpq(1, 2))))),
                ("biased", Distribution(((1, mpq(1, 4)), (2, mpq(3, 4))))),
            ],
            [("self", self_loop(1))],
            [("self", self_loop(2))],
        ],
    )


def reach_q(targets):
    return QuantifiedObjective(R, {t: ONE for t in targets})


def safe_q(targets):
    return QuantifiedObjective(S, {t: ONE for t in targets})


def test_reach_exact_picks_better_coin():
    game = coin_choice_game()
    res = solve_reach(game, reach_q({1}), SolverConfig(mode="exact"))
    assert res.values[0] == mpq(1, 2)
    assert res.sigma.choice[0] == "fair"


def test_reach_vi_close_to_exact():
    game = coin_choice_game()
    res = solve_reach(game, reach_q({1}), SolverConfig(mode="vi"))
    assert abs(res.values[0] - 0.5) < 1e-6


def test_min_owner_picks_worse_coin():
    game = coin_choice_game()
    flipped = game.swap_owners()
    res = solve_reach(flipped, reach_q({1}), SolverConfig(mode="exact"))
    assert res.values[0] == mpq(1, 4)


def test_safe_complements_swapped_reach(fig1):
    game, objective = fig1
    cfg = SolverConfig(mode="exact")
    for _, target in objective.entries:
        vs = solve_safe(game, safe_q(target), cfg).values
        vr = solve_reach(game.swap_owners(), reach_q(target), cfg).values
        for s in game.states():
            assert vs[s] + vr[s] == ONE


def test_quantified_weights_respected():
    game = coin_choice_game()
    q = QuantifiedObjective(R, {1: mpq(1, 3), 2: mpq(1)})
    res = solve_reach(game, q, SolverConfig(mode="exact"))
    # fair: 1/2*1/3 + 1/2*1 = 2/3; biased: 1/4*1/3 + 3/4*1 = 5/6
    assert res.values[0] == mpq(5, 6)
    assert res.sigma.choice[0] == "biased"


def test_positive_states_is_qualitative(fig1):
    game, _ = fig1
    pos = positive_states(game, reach_q({game.index("s"), game.index("t")}))
    names = {game.names[s] for s in pos}
    assert names == {"p", "q", "r", "s", "t"}


def test_locally_optimal_filter_drops_suboptimal():
    game = coin_choice_game()
    cfg = SolverConfig(mode="exact")
    res = solve_reach(game, reach_q({1}), cfg)
    assignment = ValueAssignment(res.values.values, "exact")
    keep = locally_optimal_filter(game, assignment, cfg)
    assert keep[0] == ["fair"]


def test_almost_sure_reach_under():
    game = coin_choice_game()
    sigma = MDStrategy(Owner.MAX, {0: "fair", 1: "self", 2: "self"})
    assert almost_sure_reach_under(game, sigma, {1, 2})
    assert not almost_sure_reach_under(game, sigma, {1})


def test_vi_zero_states_are_exactly_zero():
    game = coin_choice_game()
    res = solve_reach(game, reach_q({1}), SolverConfig(mode="vi"))
    assert res.values[2] == 0.0
