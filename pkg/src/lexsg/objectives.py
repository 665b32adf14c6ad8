"""Lexicographic objective vectors, quantified objectives, and stage keys.

States are referred to by their dense integer index. A stage key is a bitmask
over objective positions (bit i set = objective i+1 removed because its target
has already been visited).
"""

from dataclasses import dataclass
from enum import Enum

from .errors import ModelError
from .rationals import ONE, ZERO

MAX_OBJECTIVES = 16


class ObjectiveKind(Enum):
    REACH = "reach"
    SAFE = "safe"

    def flipped(self):
        return ObjectiveKind.SAFE if self is ObjectiveKind.REACH else ObjectiveKind.REACH


@dataclass(frozen=True)
class LexObjective:
    """Ordered vector of (kind, target set) pairs; index 0 is most important."""

    entries: tuple  # tuple of (ObjectiveKind, frozenset[int])

    def __post_init__(self):
        if not self.entries:
            raise ModelError("objective vector must not be empty")
        if len(self.entries) > MAX_OBJECTIVES:
            raise ModelError(
                f"at most {MAX_OBJECTIVES} objectives supported, got {len(self.entries)}"
            )
        object.__setattr__(
            self,
            "entries",
            tuple((kind, frozenset(target)) for kind, target in self.entries),
        )

    def __len__(self):
        return len(self.entries)

    def kinds(self):
        return tuple(kind for kind, _ in self.entries)

    def targets(self):
        return tuple(target for _, target in self.entries)

    def target_union(self):
        union = set()
        for _, target in self.entries:
            union |= target
        return frozenset(union)

    def dual(self):
        """Reach<->Safe flipped objective, used with owner-swapped games."""
        return LexObjective(tuple((kind.flipped(), target) for kind, target in self.entries))

    def truncated(self, length):
        return LexObjective(self.entries[:length])


@dataclass(frozen=True)
class QuantifiedObjective:
    """Reach/Safe objective whose target states carry weights in [0, 1]."""

    kind: ObjectiveKind
    weights: dict  # state index -> rational weight

    def __post_init__(self):
        if not self.weights:
            raise ModelError("quantified objective needs a nonempty domain")
        for state, weight in self.weights.items():
            if not ZERO <= weight <= ONE:
                raise ModelError(f"weight of state {state} outside [0,1]: {weight}")

    @property
    def domain(self):
        return frozenset(self.weights)

    def positive_states(self):
        return frozenset(s for s, w in self.weights.items() if w > 0)


@dataclass(frozen=True)
class QuantifiedLexObjective:
    """Vector of quantified objectives sharing one common domain."""

    entries: tuple  # tuple of QuantifiedObjective

    def __post_init__(self):
        if not self.entries:
            raise ModelError("objective vector must not be empty")
        domain = self.entries[0].domain
        for entry in self.entries[1:]:
            if entry.domain != domain:
                raise ModelError("quantified objectives must share a common domain")

    def __len__(self):
        return len(self.entries)

    @property
    def domain(self):
        return self.entries[0].domain


def quantify(objective: LexObjective) -> QuantifiedLexObjective:
    """Boolean objectives as the quantified special case (weight 1 on targets).

    The common domain is the union of all targets, so this is only
    value-preserving when that union is absorbing.
    """
    domain = objective.target_union()
    if not domain:
        raise ModelError("cannot quantify an objective with all-empty targets")
    entries = []
    for kind, target in objective.entries:
        weights = {s: (ONE if s in target else ZERO) for s in domain}
        entries.append(QuantifiedObjective(kind, weights))
    return QuantifiedLexObjective(tuple(entries))


def lex_compare(x, y):
    """Lexicographic comparison; returns -1, 0, or 1."""
    if len(x) != len(y):
        raise ModelError(f"lex_compare length mismatch: {len(x)} vs {len(y)}")
    for a, b in zip(x, y):
        if a < b:
            return -1
        if a > b:
            return 1
    return 0


def is_absorbing(objective: LexObjective, game) -> bool:
    """True iff every target set consists of sink states only."""
    sinks = game.sinks()
    return all(target <= sinks for _, target in objective.entries)


def stage_of_state(objective: LexObjective, state: int) -> int:
    """Bitmask of objective positions whose target contains the state."""
    key = 0
    for i, (_, target) in enumerate(objective.entries):
        if state in target:
            key |= 1 << i
    return key


def full_stage(n: int) -> int:
    return (1 << n) - 1


def stage_objective(objective: LexObjective, key: int) -> LexObjective:
    """Residual objective with the positions in `key` removed."""
    n = len(objective)
    if key == full_stage(n):
        raise ModelError("the all-removed stage has no residual objective")
    entries = tuple(
        entry for i, entry in enumerate(objective.entries) if not key & (1 << i)
    )
    return LexObjective(entries)


def stage_positions(n: int, key: int):
    """Original objective positions that survive in stage `key`, in order."""
    return tuple(i for i in range(n) if not key & (1 << i))


def format_stage(key: int) -> str:
    """Render a stage key as '1,3' (1-based positions) or 'none'."""
    if key == 0:
        return "none"
    return ",".join(str(i + 1) for i in range(key.bit_length()) if key & (1 << i))


def parse_stage(text: str) -> int:
    if text == "none":
        return 0
    key = 0
    for part in text.split(","):
        pos = int(part)
        if pos < 1:
            raise ValueError(f"invalid stage index {pos}")
        key |= 1 << (pos - 1)
    return key
