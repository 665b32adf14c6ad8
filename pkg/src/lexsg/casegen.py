"""Parameterized game generators.

Two grid-world families (a rescue hallway and an observer-evasion grid), a
small absorbing dice race, and a seeded random-game fuzzer. All generators
are pure functions of their spec, so equal specs yield identical games.
"""

import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from .errors import ModelError
from .game import Distribution, Owner, StochasticGame, self_loop
from .objectives import LexObjective, ObjectiveKind
from .rationals import ONE


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    slip: object = mpq(1, 10)
    damage: object = mpq(1, 100)
    search: object = mpq(1, 10)
    seed: int = 0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ModelError("grid dimensions must be at least 2x2")
        for prob in (self.slip, self.damage, self.search):
            if not 0 <= prob <= 1:
                raise ModelError(f"probability {prob} outside [0,1]")


@dataclass(frozen=True)
class FuzzSpec:
    num_states: int = 6
    max_actions: int = 3
    max_branching: int = 3
    num_objectives: int = 2
    seed: int = 0

    def __post_init__(self):
        if min(self.num_states, self.max_actions, self.max_branching) < 1:
            raise ModelError("fuzz spec fields must be positive")
        if not 1 <= self.num_objectives <= 3:
            raise ModelError("num_objectives must be in 1..3 for oracle use")


class _Builder:
    """Accumulates named states and actions, then builds a StochasticGame."""

    def __init__(self):
        self.names = []
        self.owners = []
        self.actions = []
        self.index = {}

    def state(self, name, owner):
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
            self.owners.append(owner)
            self.actions.append([])
        return self.index[name]

    def act(self, state, label, support):
        merged = {}
        for succ, prob in support:
            merged[succ] = merged.get(succ, 0) + prob
        self.actions[state].append(
            (label, Distribution(tuple(sorted(merged.items()))))
        )

    def build(self, initial=None):
        for s, acts in enumerate(self.actions):
            if not acts:
                acts.append(("self", self_loop(s)))
        return StochasticGame(self.names, self.owners, self.actions, initial)


# -- hallway rescue --------------------------------------------------------
#
# A robot (Max) walks a w*h grid to reach a human who shuffles (Min) between
# the two rightmost cells of the top row. Every robot move damages the robot
# with probability `damage` and slips (stays in place) with probability
# `slip`. Saving the human beats staying undamaged, lexicographically.


def gen_hallway(spec: GridSpec):
    w, h = spec.width, spec.height
    human_cells = ((w - 2, h - 1), (w - 1, h - 1))
    b = _Builder()
    saved = b.state("saved", Owner.MAX)
    damaged = b.state("damaged", Owner.MAX)

    def robot(pos, hc):
        return b.state(f"r{pos[0]}_{pos[1]}h{hc}", Owner.MAX)

    def human(pos, hc):
        return b.state(f"w{pos[0]}_{pos[1]}h{hc}", Owner.MIN)

    def neighbors(pos):
        x, y = pos
        steps = (("e", (x + 1, y)), ("w", (x - 1, y)), ("n", (x, y + 1)), ("s", (x, y - 1)))
        return [
            (lab, (nx, ny))
            for lab, (nx, ny) in steps
            if 0 <= nx < w and 0 <= ny < h
        ]

    move_ok = ONE - spec.slip - spec.damage
    for x in range(w):
        for y in range(h):
            for hc in (0, 1):
                pos = (x, y)
                if pos == human_cells[hc]:
                    continue  # robot and human colliding is the saved sink
                src = robot(pos, hc)
                for lab, npos in neighbors(pos):
                    landing = saved if npos == human_cells[hc] else human(npos, hc)
                    support = [(landing, move_ok), (damaged, spec.damage)]
                    if spec.slip:
                        support.append((human(pos, hc), spec.slip))
                    b.act(src, lab, support)
    for x in range(w):
        for y in range(h):
            for hc in (0, 1):
                pos = (x, y)
                if pos == human_cells[hc]:
                    continue
                src = human(pos, hc)
                b.act(src, "stay", [(robot(pos, hc), ONE)])
                other = 1 - hc
                landing = saved if pos == human_cells[other] else robot(pos, other)
                b.act(src, "move", [(landing, ONE)])
    game = b.build(initial=b.index[f"r0_0h0"])
    objective = LexObjective(
        (
            (ObjectiveKind.REACH, frozenset({saved})),
            (ObjectiveKind.SAFE, frozenset({damaged})),
        )
    )
    return game, objective


# -- observer evasion ------------------------------------------------------
#
# An intruder (Max) sneaks from the bottom-left corner to the top-right exit,
# ideally via the item in the middle, moving only east or north. An observer
# patrols the two rightmost cells of the top row: adversarially (Min) while
# the intruder is within Chebyshev distance 1, uniformly at random otherwise.
# Being caught (same cell, or detection with probability `search` when
# adjacent) outranks exiting, which outranks the item.


def gen_avoid(spec: GridSpec):
    w, h = spec.width, spec.height
    exit_cell = (w - 1, h - 1)
    item_cell = (w // 2, h // 2)
    b = _Builder()
    caught = b.state("caught", Owner.MAX)

    def intruder(pos, ox):
        return b.state(f"i{pos[0]}_{pos[1]}o{ox}", Owner.MAX)

    def observer(pos, ox):
        return b.state(f"v{pos[0]}_{pos[1]}o{ox}", Owner.MIN)

    def near(pos, ox):
        return max(abs(pos[0] - ox), abs(pos[1] - (h - 1))) <= 1

    def after_observer(pos, ox):
        """Distribution entries after the observer lands on column ox."""
        if pos == (ox, h - 1):
            return [(caught, ONE)]
        if near(pos, ox) and spec.search:
            return [
                (caught, spec.search),
                (intruder(pos, ox), ONE - spec.search),
            ]
        return [(intruder(pos, ox), ONE)]

    patrol = (w - 2, w - 1)
    for x in range(w):
        for y in range(h):
            for ox in patrol:
                pos = (x, y)
                if pos == (ox, h - 1):
                    continue  # collision states collapse into the caught sink
                src = intruder(pos, ox)
                moves = []
                if x + 1 < w:
                    moves.append(("e", (x + 1, y)))
                if y + 1 < h:
                    moves.append(("n", (x, y + 1)))
                if not moves:
                    continue  # corner: implicit self-loop, nothing left to do
                for lab, npos in moves:
                    if npos == (ox, h - 1):
                        b.act(src, lab, [(caught, ONE)])
                    else:
                        b.act(src, lab, [(observer(npos, ox), ONE)])
                vsrc = observer(pos, ox)
                steps = sorted({max(patrol[0], ox - 1), min(patrol[1], ox + 1)})
                if near(pos, ox):
                    for nox in steps:
                        b.act(vsrc, f"g{nox}", after_observer(pos, nox))
                else:
                    share = mpq(1, len(steps))
                    b.act(
                        vsrc,
                        "wander",
                        [
                            entry
                            for nox in steps
                            for entry in [
                                (t, p * share) for t, p in after_observer(pos, nox)
                            ]
                        ],
                    )
    game = b.build(initial=b.index[f"i0_0o{w - 1}"])

    def cells(pred):
        return frozenset(
            s for s, name in enumerate(game.names) if name[0] in "iv" and pred(name)
        )

    def at(cell):
        return lambda name: name.split("o")[0][1:] == f"{cell[0]}_{cell[1]}"

    objective = LexObjective(
        (
            (ObjectiveKind.SAFE, frozenset({caught})),
            (ObjectiveKind.REACH, cells(at(exit_cell))),
            (ObjectiveKind.REACH, cells(at(item_cell))),
        )
    )
    return game, objective


# -- dice race (absorbing) -------------------------------------------------


def gen_dice(rounds=2):
    """Alternating dice race: each round Max then Min commits a safe die
    (always 1) or a risky die (0 or 2, fair). Higher total wins. Both
    targets are sinks, so the solver should use a single stage."""
    b = _Builder()
    win = b.state("win", Owner.MAX)
    draw = b.state("draw", Owner.MAX)
    lose = b.state("lose", Owner.MAX)

    def outcome(diff):
        return win if diff > 0 else draw if diff == 0 else lose

    def node(rnd, turn, diff):
        if rnd == rounds:
            return outcome(diff)
        owner = Owner.MAX if turn == 0 else Owner.MIN
        return b.state(f"t{rnd}_{turn}d{diff:+d}", owner)

    half = mpq(1, 2)
    for rnd in range(rounds - 1, -1, -1):
        for turn in (1, 0):
            span = 2 * rounds
            for diff in range(-span, span + 1):
                sign = 1 if turn == 0 else -1
                nrnd, nturn = (rnd + 1, 0) if turn == 1 else (rnd, 1)
                src = node(rnd, turn, diff)
                if src in (win, draw, lose):
                    continue
                b.act(src, "safe", [(node(nrnd, nturn, diff + sign), ONE)])
                b.act(
                    src,
                    "risky",
                    [
                        (node(nrnd, nturn, diff), half),
                        (node(nrnd, nturn, diff + 2 * sign), half),
                    ],
                )
    game = b.build(initial=b.index["t0_0d+0"])
    objective = LexObjective(
        (
            (ObjectiveKind.REACH, frozenset({win})),
            (ObjectiveKind.REACH, frozenset({draw})),
        )
    )
    return game, objective


# -- random fuzzing --------------------------------------------------------


def _random_distribution(rng, targets):
    denominator = rng.randint(1, 8)
    cuts = sorted(rng.randint(0, denominator) for _ in range(len(targets) - 1))
    parts = []
    prev = 0
    for cut in list(cuts) + [denominator]:
        parts.append(cut - prev)
        prev = cut
    support = {}
    for target, part in zip(targets, parts):
        if part:
            support[target] = support.get(target, 0) + mpq(part, denominator)
    if not support:
        support[targets[0]] = ONE
    return Distribution(tuple(sorted(support.items())))


def gen_random(spec: FuzzSpec):
    rng = random.Random(spec.seed)
    n = spec.num_states
    owners = [rng.choice((Owner.MAX, Owner.MIN)) for _ in range(n)]
    actions = []
    for s in range(n):
        acts = []
        for a in range(rng.randint(1, spec.max_actions)):
            k = rng.randint(1, spec.max_branching)
            targets = [rng.randrange(n) for _ in range(k)]
            acts.append((f"a{a}", _random_distribution(rng, targets)))
        actions.append(acts)
    entries = []
    for _ in range(spec.num_objectives):
        kind = rng.choice((ObjectiveKind.REACH, ObjectiveKind.SAFE))
        size = rng.randint(1, max(1, n // 2))
        target = frozenset(rng.randrange(n) for _ in range(size))
        entries.append((kind, target))
    objective = LexObjective(tuple(entries))
    cut = objective.target_union() if rng.random() < 0.5 else frozenset()
    if 0 in cut:
        cut = frozenset()  # an absorbing initial state would strand the rest
    # keep every state reachable from state 0 despite the absorbed targets
    for s in range(1, n):
        feeder = rng.choice([j for j in range(s) if j not in cut])
        label, dist = actions[feeder][0]
        if s not in dist.successors():
            # spread uniformly over the old support plus s; the denominator
            # stays at most max_branching + 1
            targets = sorted(set(dist.successors()) | {s})
            share = mpq(1, len(targets))
            actions[feeder][0] = (
                label,
                Distribution(tuple((t, share) for t in targets)),
            )
    names = [f"s{i}" for i in range(n)]
    game = StochasticGame(names, owners, actions, initial=0)
    if cut:
        game = game.make_absorbing(cut)
    return game, objective
