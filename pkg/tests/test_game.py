import pytest
from gmpy2 import mpq

from lexsg import (
    Distribution,
    FormatError,
    ModelError,
    Owner,
    StochasticGame,
    parse_game,
    serialize_game,
)
from lexsg.game import self_loop


def tiny_game():
    return StochasticGame(
        names=["a", "b", "sink"],
        owners=[Owner.MAX, Owner.MIN, Owner.MAX],
        actions=[
            [("go", Distribution(((1, mpq(1, 2)), (2, mpq(1, 2))))), ("stay", self_loop(0))],
            [("back", Distribution(((0, mpq(1)),)))],
            [("self", self_loop(2))],
        ],
        initial=0,
    )


def test_distribution_must_sum_to_one():
    with pytest.raises(ModelError):
        Distribution(((0, mpq(1, 2)),))


def test_distribution_rejects_duplicates_and_nonpositive():
    with pytest.raises(ModelError):
        Distribution(((0, mpq(1, 2)), (0, mpq(1, 2))))
    with pytest.raises(ModelError):
        Distribution(((0, mpq(0)), (1, mpq(1))))


def test_game_basic_accessors():
    game = tiny_game()
    assert game.num_states == 3
    assert list(game.states()) == [0, 1, 2]
    assert game.owner(0) is Owner.MAX
    assert game.labels(0) == ("go", "stay")
    assert game.index("b") == 1
    assert 2 in game.sinks()
    assert 0 not in game.sinks()
    assert set(game.max_states()) == {0, 2}


def test_unknown_state_name_raises():
    with pytest.raises(ModelError):
        tiny_game().index("zzz")


def test_duplicate_names_rejected():
    with pytest.raises(ModelError):
        StochasticGame(["a", "a"], [Owner.MAX, Owner.MAX], [[("self", self_loop(0))], [("self", self_loop(1))]])


def test_swap_owners_is_involutive():
    game = tiny_game()
    swapped = game.swap_owners()
    assert swapped.owner(0) is Owner.MIN
    back = swapped.swap_owners()
    assert serialize_game(back) == serialize_game(game)


def test_make_absorbing_replaces_actions():
    game = tiny_game()
    cut = game.make_absorbing({0})
    assert cut.labels(0) == ("self",)
    assert 0 in cut.sinks()
    # untouched states keep their actions
    assert cut.labels(1) == ("back",)


def test_roundtrip_with_objective():
    text = serialize_game(*parse_game(serialize_game(tiny_game())))
    assert text == serialize_game(tiny_game())


def test_parse_rejects_bad_header():
    with pytest.raises(FormatError):
        parse_game("nonsense\n")


def test_parse_rejects_unknown_state_in_action():
    text = "sg 1\nstate a max\nact a go b:1\n"
    with pytest.raises(FormatError):
        parse_game(text)


def test_parse_rejects_bad_probability_sum():
    text = "sg 1\nstate a max\nstate b max\nact a go b:1/2\n"
    with pytest.raises(FormatError):
        parse_game(text)


def test_objective_lines_roundtrip(fig1):
    game, objective = fig1
    text = serialize_game(game, objective)
    game2, objective2 = parse_game(text)
    assert objective2 == objective
    assert serialize_game(game2, objective2) == text


def test_fig1_shape(fig1):
    game, objective = fig1
    assert game.num_states == 8
    assert game.initial == game.index("p")
    assert len(objective) == 2
