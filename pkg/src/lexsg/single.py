"""Single-objective solving on (quantified) reachability and safety.

Two modes share one contract:
  * vi    -- value iteration from below on floats, with a qualitative
             zero-clamp so zero-ness is graph-determined, never a float test.
  * exact -- strategy iteration for Max with exact rational arithmetic; Min
             best responses via policy iteration with qualitative
             precomputation, each evaluation an exact linear solve.

Quantified objectives fix the states of their domain as absorbing boundary
values; a boolean target is the weight-1 special case.
"""

from dataclasses import dataclass

import networkx as nx

from .errors import ModelError, SolverError
from .game import Distribution, Owner, StochasticGame, self_loop
from .objectives import ObjectiveKind, QuantifiedObjective
from .rationals import ONE, ZERO


@dataclass
class SolverConfig:
    mode: str = "vi"
    vi_epsilon: float = 1e-8
    action_epsilon: float = 1e-6
    max_iterations: int = 10**7

    def __post_init__(self):
        if self.mode not in ("vi", "exact"):
            raise ModelError(f"unknown mode {self.mode!r}")
        if not 0 < self.vi_epsilon < self.action_epsilon < 1:
            raise ModelError("need 0 < vi_epsilon < action_epsilon < 1")
        if self.max_iterations < 1:
            raise ModelError("max_iterations must be positive")

    @property
    def exact(self):
        return self.mode == "exact"


@dataclass
class ValueAssignment:
    values: tuple  # per-state scalar, floats (vi) or rationals (exact)
    mode: str

    def __getitem__(self, state):
        return self.values[state]

    def __len__(self):
        return len(self.values)


@dataclass
class MDStrategy:
    """Memoryless deterministic strategy, defined on one player's states."""

    player: Owner
    choice: dict  # state index -> action label

    def validate(self, game):
        for s in game.states():
            if game.owner(s) is self.player:
                if s not in self.choice:
                    raise ModelError(f"strategy undefined at state {game.names[s]}")
                if self.choice[s] not in game.labels(s):
                    raise ModelError(
                        f"strategy picks unknown action {self.choice[s]!r} "
                        f"at {game.names[s]}"
                    )


@dataclass
class SingleResult:
    values: ValueAssignment
    sigma: MDStrategy  # Max strategy
    tau: MDStrategy  # Min strategy
    iterations: int = 0


# -- qualitative analysis -------------------------------------------------


def positive_states(game, target_weights: QuantifiedObjective, fixed=None):
    """States from which Max forces positive probability of the reach QRO.

    Least fixpoint over the graph only: start from the positive-weight
    targets, add Max states with some action into the set and Min states
    whose every action enters it. Domain states are boundaries and are never
    expanded through. `fixed` optionally pins single action labels at states
    (used for induced MDPs).
    """
    if target_weights.kind is not ObjectiveKind.REACH:
        raise ModelError("positive_states expects a reachability objective")
    domain = target_weights.domain
    current = set(target_weights.positive_states())
    frontier = True
    while frontier:
        frontier = False
        for s in game.states():
            if s in current or s in domain:
                continue
            if fixed is not None and s in fixed:
                acts = [(fixed[s], game.distribution(s, fixed[s]))]
            else:
                acts = game.actions[s]
            hits = [any(succ in current for succ in dist.successors()) for _, dist in acts]
            if game.owner(s) is Owner.MAX or (fixed is not None and s in fixed):
                joined = any(hits)
            else:
                joined = all(hits)
            if joined:
                current.add(s)
                frontier = True
    return frozenset(current)


# -- exact Markov-chain evaluation ---------------------------------------


def _mc_states_reaching(game, fixed, positive_targets, domain):
    """States with a positive-probability path to `positive_targets` where
    domain states act as absorbing boundaries."""
    incoming = {s: [] for s in game.states()}
    for s in game.states():
        if s in domain:
            continue
        dist = game.distribution(s, fixed[s])
        for succ in dist.successors():
            incoming[succ].append(s)
    reached = set(positive_targets)
    stack = list(reached)
    while stack:
        t = stack.pop()
        for s in incoming[t]:
            if s not in reached:
                reached.add(s)
                stack.append(s)
    return reached


def solve_linear_system(matrix, rhs):
    """Solve matrix * x = rhs exactly by Gaussian elimination with rationals."""
    n = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise SolverError("singular linear system in Markov-chain evaluation")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [entry / inv for entry in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def evaluate_mc(game, q: QuantifiedObjective, fixed):
    """Exact reach-QRO values of the MC obtained by fixing one action per
    non-domain state. Returns a list of rationals."""
    domain = q.domain
    pos = _mc_states_reaching(game, fixed, q.positive_states(), domain)
    unknowns = [s for s in game.states() if s not in domain and s in pos]
    index = {s: i for i, s in enumerate(unknowns)}
    matrix = [[ZERO] * len(unknowns) for _ in unknowns]
    rhs = [ZERO] * len(unknowns)
    for s in unknowns:
        i = index[s]
        matrix[i][i] += ONE
        for succ, prob in game.distribution(s, fixed[s]).support:
            if succ in domain:
                rhs[i] += prob * q.weights[succ]
            elif succ in index:
                matrix[i][index[succ]] -= prob
    solution = solve_linear_system(matrix, rhs)
    values = [ZERO] * game.num_states
    for t in domain:
        values[t] = q.weights[t]
    for s, i in index.items():
        values[s] = solution[i]
    return values


# -- value iteration ------------------------------------------------------


def _vi_reach(game, q: QuantifiedObjective, cfg):
    domain = q.domain
    pos = positive_states(game, q)
    v = [0.0] * game.num_states
    for t in domain:
        v[t] = float(q.weights[t])
    iterations = 0
    while True:
        iterations += 1
        if iterations > cfg.max_iterations:
            raise SolverError(f"value iteration exceeded {cfg.max_iterations} iterations")
        delta = 0.0
        new = list(v)
        for s in game.states():
            if s in domain:
                continue
            best = None
            for _, dist in game.actions[s]:
                val = sum(float(prob) * v[succ] for succ, prob in dist.support)
                if best is None:
                    best = val
                elif game.owner(s) is Owner.MAX:
                    best = max(best, val)
                else:
                    best = min(best, val)
            new[s] = best
            delta = max(delta, abs(best - v[s]))
        v = new
        if delta < cfg.vi_epsilon:
            break
    for s in game.states():
        if s not in pos and s not in domain:
            v[s] = 0.0  # zero-ness is decided by the graph, not the floats
    return v, iterations


def _greedy_strategies(game, q, values, eps=0.0, exact=False):
    """Per-owner action choice extracted from a value vector.

    Min takes the plain greedy minimizer: stalling never hurts the player
    avoiding the target. A greedy maximizer, however, can cycle forever on a
    value plateau without ever approaching the target, so Max states are
    ranked outward from the domain and each picks a near-optimal action that
    moves toward it with positive probability.
    """
    domain = q.domain
    optimal = {}
    for s in game.states():
        if exact:
            scored = [
                (label, sum(prob * values[succ] for succ, prob in dist.support))
                for label, dist in game.actions[s]
            ]
        else:
            scored = [
                (label, sum(float(prob) * values[succ] for succ, prob in dist.support))
                for label, dist in game.actions[s]
            ]
        best = (max if game.owner(s) is Owner.MAX else min)(v for _, v in scored)
        optimal[s] = [label for label, v in scored if abs(v - best) <= eps]
    tau = {
        s: game.labels(s)[0] if s in domain else optimal[s][0]
        for s in game.min_states()
    }
    sigma = {}
    ranked = set(domain)
    changed = True
    while changed:
        changed = False
        for s in game.states():
            if s in ranked:
                continue
            if game.owner(s) is Owner.MAX:
                for label in optimal[s]:
                    if any(
                        t in ranked for t in game.distribution(s, label).successors()
                    ):
                        sigma[s] = label
                        ranked.add(s)
                        changed = True
                        break
            elif all(
                any(t in ranked for t in game.distribution(s, label).successors())
                for label in optimal[s]
            ):
                ranked.add(s)
                changed = True
    for s in game.max_states():
        if s in domain:
            sigma[s] = game.labels(s)[0]
        elif s not in sigma:
            sigma[s] = optimal[s][0]  # value-zero region: any optimal action
    return MDStrategy(Owner.MAX, sigma), MDStrategy(Owner.MIN, tau)


# -- exact strategy iteration ---------------------------------------------


def _zero_trap_choice(game, q, fixed_sigma, zero_set):
    """For each Min state in the qualitative zero set, pick the lowest-index
    action whose every successor stays in the set."""
    choice = {}
    for s in zero_set:
        if game.owner(s) is not Owner.MIN or s in q.domain:
            continue
        for label, dist in game.actions[s]:
            if all(succ in zero_set for succ in dist.successors()):
                choice[s] = label
                break
        else:
            raise SolverError("inconsistent qualitative zero set")
    return choice


def _best_response_min(game, q, sigma, cfg, counter):
    """Exact Min best response against fixed sigma, by policy iteration.

    States where Min can force probability 0 are pinned to a trapping action
    first; on the remainder the minimal fixpoint is unique, so strict
    improvement converges.
    """
    domain = q.domain
    pos = positive_states(game, q, fixed=sigma.choice)
    zero = frozenset(game.states()) - pos - domain
    trap = _zero_trap_choice(game, q, sigma.choice, zero | {t for t in domain if q.weights[t] == 0})
    tau_choice = {}
    for s in game.min_states():
        if s in trap:
            tau_choice[s] = trap[s]
        else:
            tau_choice[s] = game.labels(s)[0]
    while True:
        counter["iterations"] += 1
        if counter["iterations"] > cfg.max_iterations:
            raise SolverError("strategy iteration exceeded the iteration budget")
        fixed = dict(sigma.choice)
        fixed.update(tau_choice)
        values = evaluate_mc(game, q, fixed)
        improved = False
        for s in game.min_states():
            if s in domain or s in trap:
                continue
            best_label, best_val = tau_choice[s], values[s]
            for label, dist in game.actions[s]:
                val = sum(prob * values[succ] for succ, prob in dist.support)
                if val < best_val:
                    best_label, best_val = label, val
            if best_label != tau_choice[s] and best_val < values[s]:
                tau_choice[s] = best_label
                improved = True
        if not improved:
            return MDStrategy(Owner.MIN, tau_choice), values


def _exact_reach(game, q: QuantifiedObjective, cfg):
    domain = q.domain
    sigma_choice = {s: game.labels(s)[0] for s in game.max_states()}
    counter = {"iterations": 0}
    while True:
        sigma = MDStrategy(Owner.MAX, sigma_choice)
        tau, values = _best_response_min(game, q, sigma, cfg, counter)
        improved = False
        for s in game.max_states():
            if s in domain:
                continue
            best_label, best_val = sigma_choice[s], values[s]
            for label, dist in game.actions[s]:
                val = sum(prob * values[succ] for succ, prob in dist.support)
                if val > best_val:
                    best_label, best_val = label, val
            if best_label != sigma_choice[s] and best_val > values[s]:
                sigma_choice[s] = best_label
                improved = True
        if not improved:
            # terminal point: achieved values form a Bellman fixpoint, hence
            # they equal the least fixpoint, i.e. the game value. Re-extract
            # sigma so that even on zero-weight plateaus it still drives the
            # play into the domain wherever that is forceable.
            refined, _ = _greedy_strategies(game, q, values, exact=True)
            return values, refined, tau, counter["iterations"]


# -- public single-objective API ------------------------------------------


def solve_reach(game, q: QuantifiedObjective, cfg: SolverConfig) -> SingleResult:
    """Value and optimal strategies of the quantified reachability objective."""
    if q.kind is not ObjectiveKind.REACH:
        raise ModelError("solve_reach expects a reachability objective")
    if cfg.exact:
        values, sigma, tau, iterations = _exact_reach(game, q, cfg)
        assignment = ValueAssignment(tuple(values), "exact")
        return SingleResult(assignment, sigma, tau, iterations)
    values, iterations = _vi_reach(game, q, cfg)
    sigma, tau = _greedy_strategies(game, q, values, cfg.action_epsilon)
    return SingleResult(ValueAssignment(tuple(values), "vi"), sigma, tau, iterations)


def solve_safe(game, q: QuantifiedObjective, cfg: SolverConfig) -> SingleResult:
    """Safety via the complement: 1 - reach value on the owner-swapped game."""
    if q.kind is not ObjectiveKind.SAFE:
        raise ModelError("solve_safe expects a safety objective")
    swapped = game.swap_owners()
    reach_q = QuantifiedObjective(ObjectiveKind.REACH, dict(q.weights))
    result = solve_reach(swapped, reach_q, cfg)
    if cfg.exact:
        values = tuple(ONE - v for v in result.values.values)
    else:
        values = tuple(1.0 - v for v in result.values.values)
    # the swapped game's Min strategy lives on the original Max states
    sigma = MDStrategy(Owner.MAX, dict(result.tau.choice))
    tau = MDStrategy(Owner.MIN, dict(result.sigma.choice))
    return SingleResult(ValueAssignment(values, result.values.mode), sigma, tau, result.iterations)


def action_values(game, assignment: ValueAssignment):
    """One-step expected value of every (state, action) pair."""
    exact = assignment.mode == "exact"
    out = {}
    for s in game.states():
        for label, dist in game.actions[s]:
            if exact:
                out[(s, label)] = sum(prob * assignment[succ] for succ, prob in dist.support)
            else:
                out[(s, label)] = sum(
                    float(prob) * assignment[succ] for succ, prob in dist.support
                )
    return out


def locally_optimal_filter(game, assignment: ValueAssignment, cfg: SolverConfig):
    """Keep actions attaining the per-state optimum of the one-step value.

    Exact mode keeps the exact argmax/argmin; VI mode keeps everything within
    action_epsilon of the optimum so VI error cannot starve a state.
    """
    vals = action_values(game, assignment)
    action_filter = {}
    for s in game.states():
        per_action = [(label, vals[(s, label)]) for label in game.labels(s)]
        values_only = [v for _, v in per_action]
        best = max(values_only) if game.owner(s) is Owner.MAX else min(values_only)
        if assignment.mode == "exact":
            keep = [label for label, v in per_action if v == best]
        else:
            keep = [label for label, v in per_action if abs(v - best) <= cfg.action_epsilon]
        action_filter[s] = keep
    return action_filter


# -- qualitative certificate ----------------------------------------------


def almost_sure_reach_under(game, sigma: MDStrategy, target):
    """True iff fixing sigma forces Reach(target) with probability 1 from
    every state, against every Min behavior. Graph-only decision."""
    sigma.validate(game)
    target = frozenset(target)
    allowed = {}
    avoid = [s for s in game.states() if s not in target]
    for s in avoid:
        if game.owner(s) is Owner.MAX:
            labels = [sigma.choice[s]]
        else:
            labels = list(game.labels(s))
        allowed[s] = labels

    # largest sub-MDP of the avoid region closed under all successors
    closed = dict(allowed)
    region = set(avoid)
    changed = True
    while changed:
        changed = False
        for s in list(region):
            keep = [
                label
                for label in closed[s]
                if all(succ in region for succ in game.distribution(s, label).successors())
            ]
            if keep != closed[s]:
                closed[s] = keep
                changed = True
            if not keep:
                region.discard(s)
                changed = True

    # end components of the closed sub-MDP: any state inside one lets Min
    # stay out of the target forever with positive probability
    core = _ec_states(game, region, closed)
    if not core:
        return True
    # positive probability of *reaching* such a component while avoiding target
    graph = nx.DiGraph()
    graph.add_nodes_from(avoid)
    for s in avoid:
        for label in allowed[s]:
            for succ in game.distribution(s, label).successors():
                if succ in graph:
                    graph.add_edge(s, succ)
    reachable_core = set(core)
    reversed_graph = graph.reverse(copy=False)
    for c in core:
        reachable_core.update(nx.descendants(reversed_graph, c))
    return not reachable_core


def _ec_states(game, region, allowed):
    """States of `region` lying in an end component of the given sub-MDP."""
    region = set(region)
    allowed = {s: list(allowed[s]) for s in region}
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(region)
        for s in region:
            for label in allowed[s]:
                for succ in game.distribution(s, label).successors():
                    graph.add_edge(s, succ)
        component_of = {}
        for comp in nx.strongly_connected_components(graph):
            for s in comp:
                component_of[s] = id(comp)
        changed = False
        for s in list(region):
            keep = [
                label
                for label in allowed[s]
                if all(
                    component_of.get(succ) == component_of[s]
                    for succ in game.distribution(s, label).successors()
                )
            ]
            if keep != allowed[s]:
                allowed[s] = keep
                changed = True
            if not keep:
                region.discard(s)
                del allowed[s]
                changed = True
        if not changed:
            break
    # at the fixpoint every surviving state keeps an action whose successors
    # all stay in its own strongly connected component, i.e. an end component
    return set(region)


# -- QRO gadget (differential-testing transform) --------------------------


def build_qro_gadget(game: StochasticGame, q: QuantifiedObjective):
    """Reduce a reach QRO to a plain boolean target on an enlarged game.

    Every domain state t becomes a sink, transitions into t are redirected to
    a fresh entry state that moves to t with the weight of t and to a fresh
    bottom sink otherwise. Returns (game, target index set).
    """
    domain = sorted(q.domain)
    names = list(game.names)
    owners = list(game.owners)
    entry_index = {}
    for t in domain:
        entry_index[t] = len(names)
        names.append(game.names[t] + "__in")
        owners.append(Owner.MAX)
    bot = len(names)
    names.append("__bot")
    owners.append(Owner.MAX)

    actions = []
    for s in game.states():
        if s in q.domain:
            actions.append((("self", self_loop(s)),))
            continue
        redirected = []
        for label, dist in game.actions[s]:
            support = tuple(
                (entry_index.get(succ, succ), prob) for succ, prob in dist.support
            )
            redirected.append((label, Distribution(support)))
        actions.append(tuple(redirected))
    for t in domain:
        weight = q.weights[t]
        if weight == 0:
            support = ((bot, ONE),)
        elif weight == 1:
            support = ((t, ONE),)
        else:
            support = ((t, weight), (bot, ONE - weight))
        actions.append((("enter", Distribution(support)),))
    actions.append((("self", self_loop(bot)),))
    gadget = StochasticGame(names, owners, actions, game.initial)
    return gadget, frozenset(q.domain)
