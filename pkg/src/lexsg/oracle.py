"""Ground truth for small instances.

The brute-force oracle realizes the value definition directly: it enumerates
deterministic strategies with visited-targets memory for both players on the
game-memory product, evaluates every induced Markov chain exactly, and takes
the lexicographic infimum over the opponent followed by the supremum. It is
deliberately independent from the solver's algorithmic machinery.
"""

import random
from dataclasses import dataclass

from .errors import LimitExceeded
from .game import Distribution, Owner
from .lex import LexValueAssignment, build_product
from .objectives import ObjectiveKind, lex_compare, stage_of_state
from .rationals import ONE, ZERO

DEFAULT_PAIR_LIMIT = 2_000_000


@dataclass
class MarkovChain:
    """Finite Markov chain: one implicit action per state."""

    transition: tuple  # per-state Distribution

    @property
    def num_states(self):
        return len(self.transition)

    def states(self):
        return range(len(self.transition))


def mc_reach_exact(mc: MarkovChain, q) -> tuple:
    """Exact first-hit probabilities of a quantified reach objective.

    States that cannot reach a positive-weight domain state get exactly 0;
    the rest is a nonsingular linear system solved by rational elimination.
    """
    weights = dict(q.weights) if hasattr(q, "weights") else dict(q)
    domain = set(weights)
    positive = {s for s, w in weights.items() if w > 0}
    # backward reachability to positive boundary states, not entering domain
    can_reach = set(positive)
    changed = True
    while changed:
        changed = False
        for s in mc.states():
            if s in can_reach or s in domain:
                continue
            if any(t in can_reach for t in mc.transition[s].successors()):
                can_reach.add(s)
                changed = True
    values = {}
    for s in mc.states():
        if s in domain:
            values[s] = weights[s]
        elif s not in can_reach:
            values[s] = ZERO
    unknown = [s for s in mc.states() if s not in values]
    if unknown:
        index = {s: i for i, s in enumerate(unknown)}
        n = len(unknown)
        matrix = [[ZERO] * n + [ZERO] for _ in range(n)]
        for s in unknown:
            i = index[s]
            matrix[i][i] = ONE
            for t, prob in mc.transition[s].support:
                if t in index:
                    matrix[i][index[t]] -= prob
                else:
                    matrix[i][n] += prob * values[t]
        solution = _solve_rows(matrix)
        for s in unknown:
            values[s] = solution[index[s]]
    return tuple(values[s] for s in mc.states())


def _solve_rows(matrix):
    """Gaussian elimination over rationals on an augmented square matrix."""
    n = len(matrix)
    for col in range(n):
        pivot = next(r for r in range(col, n) if matrix[r][col] != 0)
        matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
        inv = 1 / matrix[col][col]
        matrix[col] = [x * inv for x in matrix[col]]
        for r in range(n):
            if r != col and matrix[r][col] != 0:
                factor = matrix[r][col]
                matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[col])]
    return [matrix[r][n] for r in range(n)]


# -- exhaustive strategy enumeration ---------------------------------------


def _enumerate_choices(product, owner, start, fixed):
    """All deterministic choices for `owner` on its decision states reachable
    from `start`, given the other player's (possibly partial) `fixed` choices.

    Reachability is computed against every behavior of the unfixed opponent,
    so the yielded maps cover every state the play can actually visit.
    """

    def reachable_gap(choice):
        seen = set()
        stack = [start]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            labels = product.labels(i)
            if product.owner(i) is owner and len(labels) > 1:
                if i not in choice:
                    return i
                labels = (choice[i],)
            elif i in fixed:
                labels = (fixed[i],)
            for label in labels:
                stack.extend(product.distribution(i, label).successors())
        return None

    def rec(choice):
        gap = reachable_gap(choice)
        if gap is None:
            yield dict(choice)
            return
        for label in product.labels(gap):
            choice[gap] = label
            yield from rec(choice)
            del choice[gap]

    yield from rec({})


def _induced_chain(product, start, sigma, tau):
    """Markov chain induced by fixed choices, restricted to the states
    reachable from `start` (unreachable states cannot affect its value).

    Returns the chain, the product-to-chain index map, and the frozenset of
    reached (node, action) choices, which identifies the chain uniquely.
    Unreached decision states fall back to their first action.
    """

    def pick(i):
        if i in sigma:
            return sigma[i]
        if i in tau:
            return tau[i]
        return product.labels(i)[0]

    order = []
    index = {}
    stack = [start]
    while stack:
        i = stack.pop()
        if i in index:
            continue
        index[i] = len(order)
        order.append(i)
        stack.extend(product.distribution(i, pick(i)).successors())
    rows = []
    for i in order:
        dist = product.distribution(i, pick(i))
        rows.append(Distribution(tuple((index[t], p) for t, p in dist.support)))
    reached = frozenset((i, pick(i)) for i in order)
    return MarkovChain(tuple(rows)), index, reached


def brute_force_lex(game, objective, limits=None) -> LexValueAssignment:
    """Per-state lex-values straight from the sup-inf definition."""
    limit = DEFAULT_PAIR_LIMIT if limits is None else limits
    product, lifted, index = build_product(game, objective)
    pairs = 0
    value_cache = {}

    def vector_at(sigma, tau, start):
        nonlocal pairs
        chain, chain_index, reached = _induced_chain(product, start, sigma, tau)
        # distinct strategy pairs often induce the same play; key the cache
        # on the actually-reached choices so each chain is solved once
        key = (start, reached)
        if key not in value_cache:
            pairs += 1
            if pairs > limit:
                raise LimitExceeded(
                    f"oracle strategy-pair limit of {limit} exceeded"
                )
            vector = []
            for kind, target in lifted.entries:
                hit = {chain_index[t]: ONE for t in target if t in chain_index}
                if hit:
                    reach = mc_reach_exact(chain, hit)[chain_index[start]]
                else:
                    reach = ZERO
                vector.append(reach if kind is ObjectiveKind.REACH else ONE - reach)
            value_cache[key] = tuple(vector)
        return value_cache[key]

    vectors = []
    for s in game.states():
        start = index[(s, stage_of_state(objective, s))]
        best = None
        for sigma in _enumerate_choices(product, Owner.MAX, start, {}):
            worst = None
            for tau in _enumerate_choices(product, Owner.MIN, start, sigma):
                vec = vector_at(sigma, tau, start)
                if worst is None or lex_compare(vec, worst) < 0:
                    worst = vec
            if best is None or lex_compare(worst, best) > 0:
                best = worst
        vectors.append(best)
    return LexValueAssignment(tuple(vectors), "exact")


# -- sampling --------------------------------------------------------------


def simulate(game, objective, sigma, tau, episodes, horizon, seed, start=None):
    """Empirical objective frequencies under two staged strategies.

    Returns one float per objective; reach objectives count target visits
    within the horizon, safety objectives their complement.
    """
    rng = random.Random(seed)
    if start is None:
        start = game.initial if game.initial is not None else 0
    n = len(objective)
    hits = [0] * n
    for _ in range(episodes):
        state = start
        memory = stage_of_state(objective, state)
        for _ in range(horizon):
            if memory == (1 << n) - 1:
                break
            labels = game.labels(state)
            if len(labels) == 1:
                label = labels[0]
            elif game.owner(state) is Owner.MAX:
                label = sigma.action_for(game, state, memory)
            else:
                label = tau.action_for(game, state, memory)
            support = game.distribution(state, label).support
            roll = rng.random()
            acc = 0.0
            state = support[-1][0]
            for succ, prob in support:
                acc += float(prob)
                if roll < acc:
                    state = succ
                    break
            memory |= stage_of_state(objective, state)
        for i in range(n):
            if memory & (1 << i):
                hits[i] += 1
    freqs = []
    for i, (kind, _) in enumerate(objective.entries):
        frac = hits[i] / episodes
        freqs.append(frac if kind is ObjectiveKind.REACH else 1.0 - frac)
    return tuple(freqs)
