"""Explicit-state two-player stochastic game model and the .sg text format.

States carry dense integer indices plus unique names. All probabilities are
exact rationals; distributions must sum to exactly 1. Games are immutable
after construction, so structural transforms return new games.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import FormatError, ModelError
from .objectives import LexObjective, ObjectiveKind
from .rationals import ONE, format_rational, parse_rational

SELF_LOOP_LABEL = "self"


class Owner(Enum):
    MAX = "max"
    MIN = "min"

    def opponent(self):
        return Owner.MIN if self is Owner.MAX else Owner.MAX


@dataclass(frozen=True)
class Distribution:
    """Probability distribution over successor state indices."""

    support: tuple  # tuple of (state index, rational probability)

    def __post_init__(self):
        seen = set()
        total = 0
        for state, prob in self.support:
            if state in seen:
                raise ModelError(f"duplicate successor {state} in distribution")
            seen.add(state)
            if prob <= 0:
                raise ModelError(f"non-positive probability {prob} for successor {state}")
            total += prob
        if total != ONE:
            raise ModelError(f"probability sum != 1 (got {total})")

    def successors(self):
        return tuple(state for state, _ in self.support)

    def __getitem__(self, state):
        for s, prob in self.support:
            if s == state:
                return prob
        return 0


def self_loop(state: int) -> Distribution:
    return Distribution(((state, ONE),))


class StochasticGame:
    """Turn-based stochastic game with per-state owners and labeled actions."""

    def __init__(self, names, owners, actions, initial=None):
        self.names = tuple(names)
        self.owners = tuple(owners)
        # actions[s] is a nonempty ordered tuple of (label, Distribution)
        self.actions = tuple(tuple(acts) for acts in actions)
        self.initial = initial
        self._name_to_index = {}
        self._sinks = None
        self._validate()

    def _validate(self):
        if not self.names:
            raise ModelError("game must have at least one state")
        if not len(self.names) == len(self.owners) == len(self.actions):
            raise ModelError("states, owners, and action table sizes disagree")
        for i, name in enumerate(self.names):
            if not name or any(c.isspace() for c in name):
                raise ModelError(f"invalid state name {name!r}")
            if name in self._name_to_index:
                raise ModelError(f"duplicate state name {name!r}")
            self._name_to_index[name] = i
        n = len(self.names)
        for s, acts in enumerate(self.actions):
            if not acts:
                raise ModelError(f"state {self.names[s]} has no actions")
            labels = set()
            for label, dist in acts:
                if label in labels:
                    raise ModelError(
                        f"duplicate action label {label!r} at state {self.names[s]}"
                    )
                labels.add(label)
                for succ in dist.successors():
                    if not 0 <= succ < n:
                        raise ModelError(f"unknown successor index {succ}")
        if self.initial is not None and not 0 <= self.initial < n:
            raise ModelError(f"invalid initial state index {self.initial}")

    # -- basic queries ----------------------------------------------------

    @property
    def num_states(self):
        return len(self.names)

    def states(self):
        return range(len(self.names))

    def index(self, name):
        try:
            return self._name_to_index[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def indices(self, names):
        return frozenset(self.index(name) for name in names)

    def owner(self, state):
        return self.owners[state]

    def labels(self, state):
        return tuple(label for label, _ in self.actions[state])

    def distribution(self, state, label):
        for lab, dist in self.actions[state]:
            if lab == label:
                return dist
        raise ModelError(f"state {self.names[state]} has no action {label!r}")

    def max_states(self):
        return [s for s in self.states() if self.owners[s] is Owner.MAX]

    def min_states(self):
        return [s for s in self.states() if self.owners[s] is Owner.MIN]

    def average_action_count(self):
        return sum(len(acts) for acts in self.actions) / self.num_states

    def sinks(self):
        """States whose every action is a guaranteed self-loop."""
        if self._sinks is None:
            self._sinks = frozenset(
                s
                for s in self.states()
                if all(dist.support == ((s, ONE),) for _, dist in self.actions[s])
            )
        return self._sinks

    def structurally_equal(self, other):
        return (
            self.names == other.names
            and self.owners == other.owners
            and self.actions == other.actions
            and self.initial == other.initial
        )

    # -- transforms -------------------------------------------------------

    def restrict(self, action_filter):
        """Subgame keeping only the filtered action labels per state.

        `action_filter` maps state index -> collection of labels to keep;
        states absent from the filter keep all their actions.
        """
        new_actions = []
        for s, acts in enumerate(self.actions):
            if s in action_filter:
                keep = set(action_filter[s])
                unknown = keep - set(self.labels(s))
                if unknown:
                    raise ModelError(
                        f"filter names unknown actions {sorted(unknown)} at {self.names[s]}"
                    )
                kept = tuple(entry for entry in acts if entry[0] in keep)
                if not kept:
                    raise ModelError(
                        f"filter empties the action set of state {self.names[s]}"
                    )
                new_actions.append(kept)
            else:
                new_actions.append(acts)
        return StochasticGame(self.names, self.owners, new_actions, self.initial)

    def make_absorbing(self, cut):
        """Replace the actions of every state in `cut` by one self-loop."""
        new_actions = []
        for s, acts in enumerate(self.actions):
            if s in cut:
                new_actions.append(((SELF_LOOP_LABEL, self_loop(s)),))
            else:
                new_actions.append(acts)
        return StochasticGame(self.names, self.owners, new_actions, self.initial)

    def swap_owners(self):
        return StochasticGame(
            self.names,
            tuple(owner.opponent() for owner in self.owners),
            self.actions,
            self.initial,
        )


# -- .sg text format -----------------------------------------------------


def parse_game(text):
    """Parse .sg text into (StochasticGame, LexObjective or None).

    States with no `act` line receive one implicit self-loop labeled 'self'.
    """
    names, owners = [], []
    name_to_index = {}
    act_lines = []  # (line_no, state name, label, [(succ name, prob text)])
    obj_lines = []  # (line_no, kind, [state names])
    initial_name = None
    initial_line = None
    header_seen = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        keyword, args = fields[0], fields[1:]
        if not header_seen:
            if keyword != "sg" or args != ["1"]:
                raise FormatError("expected header 'sg 1'", line_no)
            header_seen = True
            continue
        if keyword == "state":
            if len(args) != 2 or args[1] not in ("max", "min"):
                raise FormatError("expected 'state <name> <max|min>'", line_no)
            name = args[0]
            if name in name_to_index:
                raise FormatError(f"duplicate state {name!r}", line_no)
            name_to_index[name] = len(names)
            names.append(name)
            owners.append(Owner.MAX if args[1] == "max" else Owner.MIN)
        elif keyword == "act":
            if len(args) < 3:
                raise FormatError("expected 'act <state> <label> <succ>:<prob> ...'", line_no)
            entries = []
            for part in args[2:]:
                if ":" not in part:
                    raise FormatError(f"expected '<succ>:<prob>', got {part!r}", line_no)
                succ, prob = part.rsplit(":", 1)
                entries.append((succ, prob))
            act_lines.append((line_no, args[0], args[1], entries))
        elif keyword == "obj":
            if len(args) < 2 or args[0] not in ("reach", "safe"):
                raise FormatError("expected 'obj <reach|safe> <state> ...'", line_no)
            kind = ObjectiveKind.REACH if args[0] == "reach" else ObjectiveKind.SAFE
            obj_lines.append((line_no, kind, args[1:]))
        elif keyword == "init":
            if len(args) != 1:
                raise FormatError("expected 'init <state>'", line_no)
            initial_name, initial_line = args[0], line_no
        else:
            raise FormatError(f"unknown keyword {keyword!r}", line_no)

    if not header_seen:
        raise FormatError("missing 'sg 1' header", 1)
    if not names:
        raise FormatError("game declares no states", 1)

    actions = [[] for _ in names]
    for line_no, state_name, label, entries in act_lines:
        if state_name not in name_to_index:
            raise FormatError(f"unknown state {state_name!r}", line_no)
        state = name_to_index[state_name]
        support = []
        for succ_name, prob_text in entries:
            if succ_name not in name_to_index:
                raise FormatError(f"unknown state {succ_name!r}", line_no)
            try:
                prob = parse_rational(prob_text)
            except ValueError as exc:
                raise FormatError(str(exc), line_no) from None
            support.append((name_to_index[succ_name], prob))
        try:
            dist = Distribution(tuple(support))
        except ModelError as exc:
            raise FormatError(str(exc), line_no) from None
        if label in (lab for lab, _ in actions[state]):
            raise FormatError(f"duplicate action {label!r} at state {state_name}", line_no)
        actions[state].append((label, dist))

    for s, acts in enumerate(actions):
        if not acts:
            acts.append((SELF_LOOP_LABEL, self_loop(s)))

    initial = None
    if initial_name is not None:
        if initial_name not in name_to_index:
            raise FormatError(f"unknown state {initial_name!r}", initial_line)
        initial = name_to_index[initial_name]

    game = StochasticGame(names, owners, actions, initial)

    objective = None
    if obj_lines:
        entries = []
        for line_no, kind, state_names in obj_lines:
            target = set()
            for name in state_names:
                if name not in name_to_index:
                    raise FormatError(f"unknown state {name!r}", line_no)
                target.add(name_to_index[name])
            entries.append((kind, frozenset(target)))
        objective = LexObjective(tuple(entries))

    return game, objective


def serialize_game(game, objective=None):
    """Render a game (and optional objective) as .sg text."""
    lines = ["sg 1"]
    for s in game.states():
        lines.append(f"state {game.names[s]} {game.owners[s].value}")
    sinks = game.sinks()
    for s in game.states():
        if s in sinks and game.actions[s] == ((SELF_LOOP_LABEL, self_loop(s)),):
            continue  # implicit self-loop on round-trip
        for label, dist in game.actions[s]:
            parts = " ".join(
                f"{game.names[succ]}:{format_rational(prob)}" for succ, prob in dist.support
            )
            lines.append(f"act {game.names[s]} {label} {parts}")
    if objective is not None:
        for kind, target in objective.entries:
            members = " ".join(sorted(game.names[s] for s in target))
            lines.append(f"obj {kind.value} {members}".rstrip())
    if game.initial is not None:
        lines.append(f"init {game.names[game.initial]}")
    return "\n".join(lines) + "\n"
