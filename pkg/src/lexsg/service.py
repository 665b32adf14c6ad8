"""Service layer: typed request/response models over the solver API.

The FastAPI application exposes the same operations over HTTP that the CLI
uses in-process, always exchanging games and strategies as .sg / strategy
text. All numeric payloads are strings: exact rationals in exact mode,
9-significant-digit decimals in value-iteration mode.
"""

import time

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .casegen import FuzzSpec, GridSpec, gen_avoid, gen_dice, gen_hallway, gen_random
from .errors import LexsgError, LimitExceeded, ModelError
from .game import parse_game, serialize_game
from .lex import (
    decide,
    determinacy_check,
    evaluate_strategy,
    export_strategy,
    parse_strategy,
    solve_lex,
)
from .objectives import lex_compare
from .oracle import brute_force_lex
from .rationals import format_value, parse_rational
from .single import SolverConfig


class SolverOptions(BaseModel):
    mode: str = "vi"
    epsilon: float = Field(default=1e-8, gt=0)
    action_epsilon: float = Field(default=1e-6, gt=0)

    def config(self):
        return SolverConfig(
            mode=self.mode,
            vi_epsilon=self.epsilon,
            action_epsilon=self.action_epsilon,
        )


class SolveRequest(SolverOptions):
    game: str
    want_strategy: bool = False


class SolveResponse(BaseModel):
    mode: str
    values: dict  # state name -> list of component strings
    stages: str  # "explored/total"
    stages_explored: int
    solver_calls: int
    iterations: int
    action_average: float
    wall_time: float
    strategy: str | None = None


class DecideRequest(SolverOptions):
    game: str
    state: str
    threshold: str  # comma-separated rationals/decimals


class DecideResponse(BaseModel):
    state: str
    threshold: list
    value: list
    result: bool


class CheckRequest(SolverOptions):
    game: str
    strategy: str
    tolerance: float = Field(default=1e-6, ge=0)


class CheckResponse(BaseModel):
    achieved: dict
    claimed: dict
    failures: list
    passed: bool


class GenRequest(BaseModel):
    kind: str
    width: int = 4
    height: int = 4
    slip: str = "1/10"
    damage: str = "1/100"
    search: str = "1/10"
    rounds: int = 2
    num_states: int = 6
    max_actions: int = 3
    max_branching: int = 3
    num_objectives: int = 2
    seed: int = 0


class GenResponse(BaseModel):
    kind: str
    game: str


class OracleRequest(SolverOptions):
    game: str
    pair_limit: int | None = None


class OracleResponse(BaseModel):
    solver: dict
    oracle: dict
    discrepancy: str
    wall_time: float


def _load(text):
    game, objective = parse_game(text)
    if objective is None:
        raise ModelError("the game text has no obj lines")
    return game, objective


def _value_table(game, values):
    return {
        game.names[s]: [format_value(v) for v in values[s]] for s in game.states()
    }


def run_solve(req: SolveRequest) -> SolveResponse:
    game, objective = _load(req.game)
    cfg = req.config()
    started = time.perf_counter()
    report = solve_lex(game, objective, cfg)
    elapsed = time.perf_counter() - started
    stats = report.stats
    flat = [c for avgs in stats.stage_action_averages.values() for c in avgs]
    total = 2 ** len(objective) - 1
    return SolveResponse(
        mode=cfg.mode,
        values=_value_table(game, report.values),
        stages=f"{stats.stages_explored}/{total}",
        stages_explored=stats.stages_explored,
        solver_calls=stats.solver_calls,
        iterations=stats.iterations,
        action_average=round(sum(flat) / len(flat), 4) if flat else 0.0,
        wall_time=elapsed,
        strategy=export_strategy(game, objective, report) if req.want_strategy else None,
    )


def run_decide(req: DecideRequest) -> DecideResponse:
    game, objective = _load(req.game)
    state = game.index(req.state)
    threshold = tuple(parse_rational(part) for part in req.threshold.split(","))
    if len(threshold) != len(objective):
        raise ModelError(
            f"threshold has {len(threshold)} components, objective has {len(objective)}"
        )
    cfg = req.config()
    result = decide(game, objective, state, threshold, cfg)
    values = solve_lex(game, objective, cfg).values[state]
    return DecideResponse(
        state=req.state,
        threshold=[format_value(t) for t in threshold],
        value=[format_value(v) for v in values],
        result=result,
    )


def _dominates(achieved, claimed, tolerance):
    for a, c in zip(achieved, claimed):
        if abs(a - c) <= tolerance:
            continue
        return a > c
    return True


def run_check(req: CheckRequest) -> CheckResponse:
    game, objective = _load(req.game)
    cfg = req.config()
    strategy, claimed = parse_strategy(game, objective, req.strategy)
    achieved = evaluate_strategy(game, objective, strategy, cfg)
    failures = []
    for s, claim in sorted(claimed.items()):
        got = achieved[s]
        if not _dominates(got, claim, req.tolerance):
            failures.append(game.names[s])
    return CheckResponse(
        achieved=_value_table(game, achieved),
        claimed={
            game.names[s]: [format_value(v) for v in claim]
            for s, claim in sorted(claimed.items())
        },
        failures=failures,
        passed=not failures,
    )


def run_gen(req: GenRequest) -> GenResponse:
    if req.kind in ("hallway", "avoid"):
        spec = GridSpec(
            width=req.width,
            height=req.height,
            slip=parse_rational(req.slip),
            damage=parse_rational(req.damage),
            search=parse_rational(req.search),
            seed=req.seed,
        )
        game, objective = (gen_hallway if req.kind == "hallway" else gen_avoid)(spec)
    elif req.kind == "dice":
        game, objective = gen_dice(req.rounds)
    elif req.kind == "random":
        game, objective = gen_random(
            FuzzSpec(
                num_states=req.num_states,
                max_actions=req.max_actions,
                max_branching=req.max_branching,
                num_objectives=req.num_objectives,
                seed=req.seed,
            )
        )
    else:
        raise ModelError(f"unknown generator kind {req.kind!r}")
    return GenResponse(kind=req.kind, game=serialize_game(game, objective))


def run_oracle(req: OracleRequest) -> OracleResponse:
    game, objective = _load(req.game)
    cfg = req.config()
    started = time.perf_counter()
    report = solve_lex(game, objective, cfg)
    reference = brute_force_lex(game, objective, limits=req.pair_limit)
    discrepancy = 0 if cfg.exact else 0.0
    for s in game.states():
        for v, w in zip(report.values[s], reference[s]):
            gap = abs(v - w) if cfg.exact else abs(float(v) - float(w))
            discrepancy = max(discrepancy, gap)
    return OracleResponse(
        solver=_value_table(game, report.values),
        oracle=_value_table(game, reference),
        discrepancy=format_value(discrepancy),
        wall_time=time.perf_counter() - started,
    )


app = FastAPI(title="lexsg", version="0.1.0")


def _route(handler, request):
    try:
        return handler(request)
    except LimitExceeded as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except LexsgError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest):
    return _route(run_solve, request)


@app.post("/decide", response_model=DecideResponse)
def decide_endpoint(request: DecideRequest):
    return _route(run_decide, request)


@app.post("/check", response_model=CheckResponse)
def check_endpoint(request: CheckRequest):
    return _route(run_check, request)


@app.post("/gen", response_model=GenResponse)
def gen_endpoint(request: GenRequest):
    return _route(run_gen, request)


@app.post("/oracle", response_model=OracleResponse)
def oracle_endpoint(request: OracleRequest):
    return _route(run_oracle, request)
