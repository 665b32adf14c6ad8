"""Lexicographic solving.

The absorbing solver handles quantified objective vectors whose common domain
is absorbing, peeling objectives off in priority order and restricting the
game to locally optimal actions after each one. Interleaved safety objectives
are rerouted through a quantified reachability objective over the final set.

The general solver reduces arbitrary objectives to the absorbing case by
recursing over stages (subsets of already-visited targets) and feeding the
stage values back as boundary weights.
"""

from dataclasses import dataclass, field

from .errors import FormatError, ModelError
from .game import Owner, StochasticGame
from .objectives import (
    LexObjective,
    ObjectiveKind,
    QuantifiedLexObjective,
    QuantifiedObjective,
    format_stage,
    full_stage,
    is_absorbing,
    lex_compare,
    parse_stage,
    quantify,
    stage_objective,
    stage_of_state,
    stage_positions,
)
from .rationals import ONE, ZERO, format_value, parse_rational
from .single import (
    MDStrategy,
    SolverConfig,
    ValueAssignment,
    locally_optimal_filter,
    positive_states,
    solve_reach,
    solve_safe,
)


@dataclass
class LexValueAssignment:
    vectors: tuple  # per-state tuple of component values
    mode: str

    def __getitem__(self, state):
        return self.vectors[state]

    def __len__(self):
        return len(self.vectors)


@dataclass
class StagedStrategy:
    """Deterministic Max strategy whose memory is the set of visited targets."""

    objective: LexObjective  # None for a pure absorbing solve (single stage)
    table: dict  # stage key -> MDStrategy

    def action_for(self, game, state, memory):
        """Action at `state` when the memory (post entry-update) is `memory`."""
        if self.objective is not None and memory == full_stage(len(self.objective)):
            return game.labels(state)[0]
        if memory not in self.table:
            raise ModelError(f"strategy has no entry for stage {memory}")
        strategy = self.table[memory]
        if state not in strategy.choice:
            raise ModelError(f"strategy has no choice at state {game.names[state]}")
        return strategy.choice[state]


@dataclass
class FinalSetReport:
    reach_prefix: tuple  # 0-based positions of reach-kind prefix objectives
    zero_sets: dict  # position -> frozenset of states with component value 0
    final: frozenset


@dataclass
class ObjectiveTrace:
    kind: ObjectiveKind
    final_report: FinalSetReport = None  # safety objectives only
    qro_weights: dict = None  # safety objectives only


@dataclass
class AbsorbingSolve:
    vectors: tuple  # per-state value tuples
    sigma: MDStrategy
    traces: tuple
    restricted: StochasticGame  # game restricted to all locally optimal actions
    final_report: FinalSetReport  # final set over all objectives
    action_averages: tuple  # avg action count after each restriction


@dataclass
class SolveStats:
    stages_explored: int = 0
    primary_calls: int = 0
    qro_calls: int = 0
    iterations: int = 0
    stage_action_averages: dict = field(default_factory=dict)

    @property
    def solver_calls(self):
        return self.primary_calls + self.qro_calls


@dataclass
class SolveReport:
    values: LexValueAssignment
    strategy: StagedStrategy
    stats: SolveStats
    certificates: dict  # stage key -> AbsorbingSolve for non-simple stages


# -- final set -------------------------------------------------------------


def final_set(game, prefix, kind=ObjectiveKind.REACH) -> FinalSetReport:
    """Final set of a quantified objective prefix on the current subgame.

    Zero sets are computed qualitatively; with the game already restricted to
    prefix-optimal actions they coincide with zero-ness of the lex-value.
    With `kind` set to SAFE this is the final set of the opponent, who reaches
    the safe-kind targets: pass the owner-swapped game in that case.
    """
    reach_prefix = tuple(
        k for k, entry in enumerate(prefix) if entry.kind is kind
    )
    zero_sets = {}
    for k in reach_prefix:
        as_reach = QuantifiedObjective(ObjectiveKind.REACH, dict(prefix[k].weights))
        zero_sets[k] = frozenset(game.states()) - positive_states(game, as_reach)
    if not reach_prefix:
        final = frozenset(game.states())
    else:
        common = None
        for k in reach_prefix:
            common = zero_sets[k] if common is None else common & zero_sets[k]
        final = frozenset(prefix[0].domain | common)
    return FinalSetReport(reach_prefix, zero_sets, final)


# -- absorbing solver (Algorithm: sequential restriction) ------------------


def _clamp_unit(value, exact):
    if exact:
        return value
    return min(1.0, max(0.0, value))


def _solve_absorbing(game, qobj: QuantifiedLexObjective, cfg, stats) -> AbsorbingSolve:
    sinks = game.sinks()
    if not qobj.domain <= sinks:
        raise ModelError("absorbing solver requires an absorbing common domain")
    current = game
    n = len(qobj)
    components = []
    traces = []
    averages = []
    sigma_choice = {s: game.labels(s)[0] for s in game.max_states()}
    solved_prefix = []

    for q_i in qobj.entries:
        if q_i.kind is ObjectiveKind.REACH:
            res = solve_reach(current, q_i, cfg)
            stats.primary_calls += 1
            stats.iterations += res.iterations
            values = res.values
            max_choice = dict(res.sigma.choice)
            trace = ObjectiveTrace(q_i.kind)
            # Min may hold a locally optimal loop that stalls forever, which
            # illegally sacrifices an earlier safe-kind objective (a reach
            # obligation from Min's point of view). Mirror the safety/QRO
            # construction on the owner-swapped game to rule that out.
            swapped = current.swap_owners()
            min_report = final_set(swapped, solved_prefix, ObjectiveKind.SAFE)
            if min_report.reach_prefix and min_report.final < frozenset(
                current.states()
            ):
                exact = cfg.exact
                one = ONE if exact else 1.0
                weights = {
                    s: _clamp_unit(one - values[s], exact) for s in min_report.final
                }
                qro = QuantifiedObjective(ObjectiveKind.REACH, weights)
                qro_res = solve_reach(swapped, qro, cfg)
                stats.qro_calls += 1
                stats.iterations += qro_res.iterations
                values = ValueAssignment(
                    tuple(one - v for v in qro_res.values.values), cfg.mode
                )
                max_choice = dict(qro_res.tau.choice)
            for s in current.max_states():
                if values[s] > 0:
                    sigma_choice[s] = max_choice[s]
        else:
            safe_res = solve_safe(current, q_i, cfg)
            stats.primary_calls += 1
            stats.iterations += safe_res.iterations
            report = final_set(current, solved_prefix)
            exact = cfg.exact
            weights = {
                s: _clamp_unit(safe_res.values[s], exact) for s in report.final
            }
            qro = QuantifiedObjective(ObjectiveKind.REACH, weights)
            qro_res = solve_reach(current, qro, cfg)
            stats.qro_calls += 1
            stats.iterations += qro_res.iterations
            values = qro_res.values
            trace = ObjectiveTrace(q_i.kind, report, weights)
            for s in current.max_states():
                if s in report.final:
                    sigma_choice[s] = safe_res.sigma.choice[s]
                else:
                    sigma_choice[s] = qro_res.sigma.choice[s]
        action_filter = locally_optimal_filter(current, values, cfg)
        current = current.restrict(action_filter)
        averages.append(current.average_action_count())
        components.append(values)
        traces.append(trace)
        solved_prefix.append(q_i)

    vectors = tuple(
        tuple(components[i][s] for i in range(n)) for s in game.states()
    )
    sigma = MDStrategy(Owner.MAX, sigma_choice)
    closing_report = final_set(current, solved_prefix)
    return AbsorbingSolve(
        vectors, sigma, tuple(traces), current, closing_report, tuple(averages)
    )


def solve_absorbing(game, qobj: QuantifiedLexObjective, cfg) -> SolveReport:
    """Solve a quantified lex-objective whose common domain is absorbing."""
    stats = SolveStats()
    solve = _solve_absorbing(game, qobj, cfg, stats)
    stats.stages_explored = 1
    stats.stage_action_averages[0] = solve.action_averages
    values = LexValueAssignment(solve.vectors, cfg.mode)
    strategy = StagedStrategy(None, {0: solve.sigma})
    return SolveReport(values, strategy, stats, {0: solve})


# -- boolean single-objective entry ---------------------------------------


def _solve_single_boolean(game, kind, target, cfg, stats):
    """Single boolean reach/safe objective, handling empty targets."""
    stats.primary_calls += 1
    if not target:
        if cfg.exact:
            value = ZERO if kind is ObjectiveKind.REACH else ONE
        else:
            value = 0.0 if kind is ObjectiveKind.REACH else 1.0
        values = ValueAssignment(tuple(value for _ in game.states()), cfg.mode)
        sigma = MDStrategy(Owner.MAX, {s: game.labels(s)[0] for s in game.max_states()})
        return values, sigma
    weight_one = ONE if cfg.exact else 1.0
    q = QuantifiedObjective(kind, {t: weight_one for t in target})
    if kind is ObjectiveKind.REACH:
        res = solve_reach(game, q, cfg)
    else:
        res = solve_safe(game, q, cfg)
    stats.iterations += res.iterations
    return res.values, res.sigma


# -- general solver (stage recursion) --------------------------------------


def solve_lex(game, objective: LexObjective, cfg: SolverConfig) -> SolveReport:
    """Lex-values and a staged deterministic optimal strategy for Max."""
    for _, target in objective.entries:
        for s in target:
            if not 0 <= s < game.num_states:
                raise ModelError(f"objective target index {s} out of range")
    n = len(objective)
    if is_absorbing(objective, game) and objective.target_union():
        # Targets are sinks, so residual stage values equal the boolean
        # weights and a single absorbing solve suffices.
        report = solve_absorbing(game, quantify(objective), cfg)
        report.strategy.objective = objective
        return report
    stats = SolveStats()
    memo = {}  # stage key -> (per-state value tuples, MDStrategy)
    certificates = {}

    def solve_stage(key):
        if key in memo:
            return
        stage_obj = stage_objective(objective, key)
        positions = stage_positions(n, key)
        if len(stage_obj) == 1:
            values, sigma = _solve_single_boolean(
                game, *stage_obj.entries[0], cfg, stats
            )
            memo[key] = (tuple((v,) for v in values.values), sigma)
            stats.stages_explored += 1
            stats.stage_action_averages[key] = ()
            return
        union = stage_obj.target_union()
        if not union:
            # every remaining target is empty: components are constant
            vector = tuple(
                (ZERO if cfg.exact else 0.0)
                if objective.entries[i][0] is ObjectiveKind.REACH
                else (ONE if cfg.exact else 1.0)
                for i in positions
            )
            sigma = MDStrategy(
                Owner.MAX, {s: game.labels(s)[0] for s in game.max_states()}
            )
            memo[key] = (tuple(vector for _ in game.states()), sigma)
            stats.stages_explored += 1
            stats.stage_action_averages[key] = ()
            return
        for s in union:
            key2 = key | stage_of_state(objective, s)
            if key2 != full_stage(n):
                solve_stage(key2)
        entries = []
        for i in positions:
            kind, target = objective.entries[i]
            weights = {}
            for s in union:
                if s in target:
                    weights[s] = ONE if cfg.exact else 1.0
                    continue
                key2 = key | stage_of_state(objective, s)
                sub_vectors, _ = memo[key2]
                offset = stage_positions(n, key2).index(i)
                val = sub_vectors[s][offset]
                if kind is ObjectiveKind.SAFE:
                    val = (ONE - val) if cfg.exact else (1.0 - val)
                weights[s] = _clamp_unit(val, cfg.exact)
            entries.append(QuantifiedObjective(kind, weights))
        absorbed = game.make_absorbing(union)
        solve = _solve_absorbing(absorbed, QuantifiedLexObjective(tuple(entries)), cfg, stats)
        # the stage switches on entering a target, so choices at absorbed
        # states are irrelevant; keep them valid in the original game
        choice = dict(solve.sigma.choice)
        for s in union:
            if s in choice:
                choice[s] = game.labels(s)[0]
        memo[key] = (solve.vectors, MDStrategy(Owner.MAX, choice))
        certificates[key] = solve
        stats.stages_explored += 1
        stats.stage_action_averages[key] = solve.action_averages

    solve_stage(0)
    vectors, _ = memo[0]
    values = LexValueAssignment(vectors, cfg.mode)
    strategy = StagedStrategy(objective, {key: sigma for key, (_, sigma) in memo.items()})
    return SolveReport(values, strategy, stats, certificates)


# -- strategy evaluation ---------------------------------------------------


def build_product(game, objective: LexObjective, strategy: StagedStrategy = None):
    """Product of the game with the visited-targets memory.

    Returns (product game, lifted objective, node index map). Nodes are
    (state, memory) pairs with the memory updated on entry; fully-updated
    memories are absorbing since every component is decided there. When a
    staged `strategy` is given, Max's choices are fixed by it.
    """
    n = len(objective)
    full = full_stage(n)
    nodes = []
    index = {}

    def node(state, memory):
        pair = (state, memory)
        if pair not in index:
            index[pair] = len(nodes)
            nodes.append(pair)
        return index[pair]

    pending = []
    for s in game.states():
        pending.append(node(s, stage_of_state(objective, s)))
    actions = {}
    seen = set()
    while pending:
        i = pending.pop()
        if i in seen:
            continue
        seen.add(i)
        s, memory = nodes[i]
        if memory == full:
            actions[i] = None  # absorbing
            continue
        if game.owner(s) is Owner.MAX and strategy is not None:
            if len(game.labels(s)) == 1:
                labels = [game.labels(s)[0]]  # no choice; skip the table
            else:
                labels = [strategy.action_for(game, s, memory)]
        else:
            labels = list(game.labels(s))
        entry = []
        for label in labels:
            support = []
            for succ, prob in game.distribution(s, label).support:
                j = node(succ, memory | stage_of_state(objective, succ))
                pending.append(j)
                support.append((j, prob))
            merged = {}
            for j, prob in support:
                merged[j] = merged.get(j, ZERO) + prob
            entry.append((label, tuple(sorted(merged.items()))))
        actions[i] = entry

    from .game import Distribution, self_loop  # local import to avoid cycle noise

    names = [f"{game.names[s]}@{memory}" for s, memory in nodes]
    owners = [game.owners[s] for s, _ in nodes]
    table = []
    for i in range(len(nodes)):
        if actions[i] is None:
            table.append((("self", self_loop(i)),))
        else:
            table.append(
                tuple((label, Distribution(support)) for label, support in actions[i])
            )
    product = StochasticGame(names, owners, table)
    lifted_entries = []
    for i in range(n):
        kind = objective.entries[i][0]
        target = frozenset(
            j for j, (_, memory) in enumerate(nodes) if memory & (1 << i)
        )
        lifted_entries.append((kind, target))
    lifted = LexObjective(tuple(lifted_entries))
    return product, lifted, index


def evaluate_strategy(game, objective, strategy: StagedStrategy, cfg) -> LexValueAssignment:
    """Value vector guaranteed by a fixed staged Max strategy at every state.

    Fixing Max in the product leaves a Min-controlled game; solving it yields
    the worst-case vector against every Min behavior.
    """
    product, lifted, index = build_product(game, objective, strategy)
    report = solve_lex(product, lifted, cfg)
    vectors = tuple(
        report.values[index[(s, stage_of_state(objective, s))]] for s in game.states()
    )
    return LexValueAssignment(vectors, cfg.mode)


# -- decision query and determinacy ----------------------------------------

DECISION_GRID = 10**6


def _rounded(vector):
    return tuple(round(float(v) * DECISION_GRID) / DECISION_GRID for v in vector)


def decide(game, objective, state, threshold, cfg) -> bool:
    """Does the lex-value at `state` dominate the threshold vector?

    In value-iteration mode both sides are rounded to a 1e-6 grid first so
    that ties are not decided by iteration noise.
    """
    if len(threshold) != len(objective):
        raise ModelError(
            f"threshold has {len(threshold)} components, objective has {len(objective)}"
        )
    report = solve_lex(game, objective, cfg)
    value = report.values[state]
    if cfg.exact:
        return lex_compare(value, tuple(threshold)) >= 0
    return lex_compare(_rounded(value), _rounded(threshold)) >= 0


# -- strategy text format --------------------------------------------------


def export_strategy(game, objective, report: SolveReport) -> str:
    """Render a solve result as strategy text.

    One `stage <stage> <state> <action>` line per Max state and solved stage,
    then one `value <state> <v1> ...` line per state with the claimed values.
    """
    lines = []
    for key in sorted(report.strategy.table):
        strategy = report.strategy.table[key]
        stage = format_stage(key)
        for s in game.max_states():
            lines.append(f"stage {stage} {game.names[s]} {strategy.choice[s]}")
    for s in game.states():
        rendered = " ".join(format_value(v) for v in report.values[s])
        lines.append(f"value {game.names[s]} {rendered}")
    return "\n".join(lines) + "\n"


def parse_strategy(game, objective, text):
    """Parse strategy text into (StagedStrategy, claimed values dict).

    The claimed values map state index -> tuple of rationals; a missing value
    section yields an empty dict.
    """
    table = {}
    values = {}
    n = len(objective)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        keyword, args = fields[0], fields[1:]
        if keyword == "stage":
            if len(args) != 3:
                raise FormatError("expected 'stage <stage> <state> <action>'", line_no)
            stage_text, state_name, label = args
            try:
                key = parse_stage(stage_text)
            except ValueError as exc:
                raise FormatError(str(exc), line_no) from None
            if key >= full_stage(n) + 1:
                raise FormatError(f"stage {stage_text!r} out of range", line_no)
            state = _named_state(game, state_name, line_no)
            if game.owner(state) is not Owner.MAX:
                raise FormatError(f"state {state_name!r} is not a Max state", line_no)
            if label not in game.labels(state):
                raise FormatError(
                    f"state {state_name!r} has no action {label!r}", line_no
                )
            table.setdefault(key, {})[state] = label
        elif keyword == "value":
            if len(args) != 1 + n:
                raise FormatError(
                    f"expected 'value <state>' followed by {n} components", line_no
                )
            state = _named_state(game, args[0], line_no)
            try:
                values[state] = tuple(parse_rational(part) for part in args[1:])
            except ValueError as exc:
                raise FormatError(str(exc), line_no) from None
        else:
            raise FormatError(f"unknown keyword {keyword!r}", line_no)
    if not table:
        raise FormatError("strategy text contains no stage lines", 1)
    strategy = StagedStrategy(
        objective,
        {key: MDStrategy(Owner.MAX, choice) for key, choice in table.items()},
    )
    return strategy, values


def _named_state(game, name, line_no):
    try:
        return game.index(name)
    except ModelError:
        raise FormatError(f"unknown state {name!r}", line_no) from None


def determinacy_check(game, objective, cfg):
    """Solve the game and its dual; report both values and the deviation
    from the complement identity v_i(s) + dual_i(s) = 1."""
    primal = solve_lex(game, objective, cfg)
    dual = solve_lex(game.swap_owners(), objective.dual(), cfg)
    deviation = ZERO if cfg.exact else 0.0
    for s in game.states():
        for v, w in zip(primal.values[s], dual.values[s]):
            gap = abs(v + w - (ONE if cfg.exact else 1.0))
            deviation = max(deviation, gap)
    return primal.values, dual.values, deviation
