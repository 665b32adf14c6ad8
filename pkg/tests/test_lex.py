import pytest
from gmpy2 import mpq

from lexsg import (
    FormatError,
    ModelError,
    ObjectiveKind,
    SolverConfig,
    decide,
    determinacy_check,
    evaluate_strategy,
    export_strategy,
    final_set,
    parse_strategy,
    quantify,
    solve_lex,
)
from lexsg.lex import build_product
from lexsg.objectives import stage_of_state

R = ObjectiveKind.REACH
S = ObjectiveKind.SAFE


def by_name(game, values):
    return {game.names[s]: tuple(values[s]) for s in game.states()}


FIG1_EXPECTED = {
    "p": (mpq(1, 2), mpq(1, 4)),
    "q": (mpq(1, 2), mpq(1, 4)),
    "r": (mpq(1, 2), mpq(1, 4)),
    "s": (mpq(1), mpq(1)),
    "t": (mpq(1), mpq(0)),
    "u": (mpq(0), mpq(0)),
    "v": (mpq(0), mpq(1, 2)),
    "w": (mpq(0), mpq(1)),
}


def test_fig1_exact_values(fig1, exact_cfg):
    game, objective = fig1
    report = solve_lex(game, objective, exact_cfg)
    assert by_name(game, report.values) == FIG1_EXPECTED


def test_fig1_vi_values(fig1, vi_cfg):
    game, objective = fig1
    report = solve_lex(game, objective, vi_cfg)
    for name, expected in FIG1_EXPECTED.items():
        got = report.values[game.index(name)]
        assert max(abs(a - float(b)) for a, b in zip(got, expected)) < 1e-6


def test_fig1_absorbing_fast_path(fig1, exact_cfg):
    game, objective = fig1
    stats = solve_lex(game, objective, exact_cfg).stats
    assert stats.stages_explored == 1
    assert stats.primary_calls == 2
    assert stats.qro_calls <= 2


def test_fig1_restriction(fig1, exact_cfg):
    game, objective = fig1
    report = solve_lex(game, objective, exact_cfg)
    restricted = report.certificates[0].restricted
    kept = {game.names[s]: set(restricted.labels(s)) for s in game.states() if len(game.labels(s)) > 1}
    assert kept == {"p": {"toq"}, "r": {"toq", "tv"}}


def test_fig1_final_set_and_qro(fig1, exact_cfg):
    game, objective = fig1
    report = solve_lex(game, objective, exact_cfg)
    trace = report.certificates[0].traces[1]
    assert trace.kind is S
    names = lambda states: {game.names[s] for s in states}
    assert names(trace.final_report.zero_sets[0]) == {"u", "v", "w"}
    assert names(trace.final_report.final) == {"s", "t", "u", "v", "w"}
    weights = {game.names[s]: w for s, w in trace.qro_weights.items()}
    assert weights == {"s": 1, "t": 0, "u": 0, "v": mpq(1, 2), "w": 1}


def test_fig1_dual_min_stalling_guard(fig1, exact_cfg):
    # Swapping owners and flipping reach<->safe must complement the values.
    # The second component exposes a Min-side stalling loop that a naive
    # sequential solve misses: the dual value at p/q/r is (1/2, 3/4).
    game, objective = fig1
    dual = solve_lex(game.swap_owners(), objective.dual(), exact_cfg)
    for name in ("p", "q", "r"):
        assert tuple(dual.values[game.index(name)]) == (mpq(1, 2), mpq(3, 4))


@pytest.mark.parametrize("mode,bound", [("exact", 0), ("vi", 2e-6)])
def test_determinacy_on_figures(fig1, fig3, mode, bound):
    cfg = SolverConfig(mode=mode)
    for game, objective in (fig1, fig3):
        _, _, deviation = determinacy_check(game, objective, cfg)
        assert deviation <= bound


def test_fig3_memory_strategy(fig3, exact_cfg):
    game, objective = fig3
    report = solve_lex(game, objective, exact_cfg)
    p = game.index("p")
    assert tuple(report.values[p]) == (mpq(1), mpq(1))
    assert report.stats.stages_explored == 3
    # visiting r (objective 2) flips the choice at p
    assert report.strategy.table[0].choice[p] != report.strategy.table[2].choice[p]


def test_fig3_evaluate_strategy_reproduces_values(fig3, exact_cfg):
    game, objective = fig3
    report = solve_lex(game, objective, exact_cfg)
    achieved = evaluate_strategy(game, objective, report.strategy, exact_cfg)
    for s in game.states():
        assert tuple(achieved[s]) == tuple(report.values[s])


def test_fig3_memoryless_strategy_is_worse(fig3, exact_cfg):
    game, objective = fig3
    report = solve_lex(game, objective, exact_cfg)
    # force the stage-{2} behavior everywhere: always head toward q
    from lexsg import MDStrategy, Owner, StagedStrategy

    always = StagedStrategy(
        objective, {key: report.strategy.table[2] for key in report.strategy.table}
    )
    achieved = evaluate_strategy(game, objective, always, exact_cfg)
    assert tuple(achieved[game.index("p")]) == (mpq(1), mpq(0))


def test_strategy_export_roundtrip(fig3, exact_cfg):
    game, objective = fig3
    report = solve_lex(game, objective, exact_cfg)
    text = export_strategy(game, objective, report)
    strategy, claimed = parse_strategy(game, objective, text)
    achieved = evaluate_strategy(game, objective, strategy, exact_cfg)
    for s, claim in claimed.items():
        assert tuple(achieved[s]) == claim


def test_parse_strategy_rejects_bad_input(fig3):
    game, objective = fig3
    with pytest.raises(FormatError):
        parse_strategy(game, objective, "stage none zzz top\n")
    with pytest.raises(FormatError):
        parse_strategy(game, objective, "stage none p nope\n")
    with pytest.raises(FormatError):
        parse_strategy(game, objective, "value p 1 1\n")  # no stage lines
    with pytest.raises(FormatError):
        parse_strategy(game, objective, "stage 9 p toq\n")


def test_decide(fig1, exact_cfg, vi_cfg):
    game, objective = fig1
    r = game.index("r")
    assert decide(game, objective, r, (mpq(1, 2), mpq(1, 4)), exact_cfg)
    assert not decide(game, objective, r, (mpq(1, 2), mpq(1, 3)), exact_cfg)
    assert decide(game, objective, r, (0.5, 0.25), vi_cfg)
    assert not decide(game, objective, r, (0.6, 0.0), vi_cfg)
    with pytest.raises(ModelError):
        decide(game, objective, r, (mpq(1, 2),), exact_cfg)


def test_final_set_no_reach_prefix_is_everything(fig1):
    game, _ = fig1
    report = final_set(game, [])
    assert report.final == frozenset(game.states())
    assert report.reach_prefix == ()


def test_build_product_tracks_visited_targets(fig3):
    game, objective = fig3
    product, lifted, index = build_product(game, objective)
    # entering q from stage none lands in a node with bit 1 set
    q = game.index("q")
    assert (q, stage_of_state(objective, q)) in index
    assert len(lifted) == len(objective)
    assert product.num_states >= game.num_states


def test_stage_bound_generic(fig3, exact_cfg):
    game, objective = fig3
    stats = solve_lex(game, objective, exact_cfg).stats
    assert stats.stages_explored <= 2 ** len(objective) - 1
