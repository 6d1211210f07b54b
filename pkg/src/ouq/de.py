"""Differential-evolution global minimizer (Best1Exp) with strict bounds.

The engine supports a pluggable parameter-constraint function applied to
every trial before cost evaluation, and solver-independent termination
rules evaluated on the best-cost history.  Runs are fully deterministic
given the seed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConstraintViolation, DimensionMismatch, InfeasibleConstrain


class Strategy(str, enum.Enum):
    # Standard Best1Exp: per-coordinate exponential crossover into the target.
    BEST1EXP_STANDARD = "best1exp_standard"
    # Whole-vector variant: mutate every coordinate at once or return best as-is.
    BEST1EXP_PAPER_SNIPPET = "best1exp_paper_snippet"


@dataclass(frozen=True)
class DESettings:
    npop: int = 40
    cross_probability: float = 0.9
    scaling_factor: float = 0.9
    strategy: Strategy = Strategy.BEST1EXP_STANDARD
    seed: int = 0
    max_generations: int = 1000

    def __post_init__(self):
        if self.npop < 4:
            raise ValueError("npop must be >= 4 (best + two candidates + target)")
        if not 0.0 <= self.cross_probability <= 1.0:
            raise ValueError("cross_probability must lie in [0, 1]")
        if self.scaling_factor <= 0.0:
            raise ValueError("scaling_factor must be positive")
        if self.max_generations < 1:
            raise ValueError("max_generations must be positive")


@dataclass(frozen=True)
class ChangeOverGeneration:
    """Stop when the best cost moved at most `tolerance` over `generations` generations."""

    tolerance: float = 1e-4
    generations: int = 10

    name = "change_over_generation"

    def __post_init__(self):
        if self.tolerance <= 0.0 or self.generations < 1:
            raise ValueError("need tolerance > 0 and generations >= 1")


@dataclass(frozen=True)
class ValueBelow:
    """Stop once the best cost is at or below `tolerance` (value to reach)."""

    tolerance: float

    name = "value_below"

    def __post_init__(self):
        if self.tolerance < 0.0:
            raise ValueError("tolerance must be nonnegative")


@dataclass(frozen=True)
class MaxGenerations:
    """Stop after `limit` generations."""

    limit: int

    name = "max_generations"

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be positive")


TerminationRule = ChangeOverGeneration | ValueBelow | MaxGenerations


def termination_met(rule: TerminationRule, history: Sequence[float]) -> bool:
    """Evaluate a termination rule on the best-cost history.

    The history carries one entry per completed generation, preceded by the
    initial-population best.
    """
    if len(history) == 0:
        raise ValueError("history must be nonempty")
    if isinstance(rule, ChangeOverGeneration):
        if len(history) <= rule.generations:
            return False
        return abs(history[-1] - history[-1 - rule.generations]) <= rule.tolerance
    if isinstance(rule, ValueBelow):
        return history[-1] <= rule.tolerance
    if isinstance(rule, MaxGenerations):
        return len(history) - 1 >= rule.limit
    raise TypeError(f"unknown termination rule: {rule!r}")


@dataclass(frozen=True)
class Bounds:
    """Componentwise box constraints, lower <= upper per parameter."""

    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_pairs(cls, pairs) -> "Bounds":
        lo = np.asarray([p[0] for p in pairs], dtype=float)
        hi = np.asarray([p[1] for p in pairs], dtype=float)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("need lower <= upper componentwise")
        return cls(lo, hi)

    def __len__(self) -> int:
        return self.lower.size

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass
class GenerationRecord:
    generation: int
    best_cost: float
    best_params: np.ndarray


@dataclass
class SolveReport:
    opt_params: np.ndarray
    opt_cost: float
    generations_run: int
    evaluations: int
    trace: list[GenerationRecord]
    terminated_by: str


def mutate_best1exp(
    best: np.ndarray,
    c1: np.ndarray,
    c2: np.ndarray,
    target: np.ndarray,
    settings: DESettings,
    rng: np.random.Generator,
) -> np.ndarray:
    """Build one Best1Exp trial vector from the current best and two candidates.

    Standard strategy: starting at a random coordinate, copy
    best + F*(c1 - c2) into consecutive (cyclic) coordinates of the target
    while successive uniform draws stay below the cross probability; at
    least one coordinate is always mutated.  Snippet strategy: with
    probability (1 - CR) return best unchanged, otherwise mutate the whole
    vector at once.
    """
    d = best.size
    if not (c1.size == d and c2.size == d and target.size == d):
        raise DimensionMismatch(
            f"vector lengths differ: {best.size}, {c1.size}, {c2.size}, {target.size}"
        )
    f = settings.scaling_factor
    if settings.strategy is Strategy.BEST1EXP_PAPER_SNIPPET:
        if rng.random() >= settings.cross_probability:
            return best.copy()
        return best + f * (c1 - c2)

    trial = target.copy()
    i = int(rng.integers(d))
    mutated = 0
    while True:
        trial[i] = best[i] + f * (c1[i] - c2[i])
        mutated += 1
        i = (i + 1) % d
        if mutated >= d or rng.random() >= settings.cross_probability:
            break
    return trial


def de_solve(
    cost: Callable[[np.ndarray], float],
    bounds: Bounds,
    settings: DESettings,
    constrain: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    termination: Optional[TerminationRule] = None,
    *,
    constrain_ctx: Optional[Callable[[np.ndarray, int, int], np.ndarray]] = None,
    initial: Optional[np.ndarray] = None,
    bounds_mode: str = "clip",
    infeasible_cost: Optional[float] = None,
    trace_hook: Optional[Callable[[int, float, np.ndarray], None]] = None,
) -> SolveReport:
    """Minimize `cost` over the box with differential evolution.

    Every trial is clipped to the box, passed through the constraint
    function, re-clipped, then evaluated; a trial replaces its population
    slot only on strict improvement, so the best-cost history is monotone
    non-increasing.  Replacements are committed after the whole generation
    is built against the generation-start population, which makes
    concurrent and sequential evaluation equivalent.

    `constrain_ctx` is the context-aware form `f(params, generation, slot)`
    used when per-trial derived seeds are needed; plain `constrain` ignores
    context.  Trials whose constraint raises ConstraintViolation receive
    `infeasible_cost` when that is set; otherwise they are discarded, and
    a generation in which every trial is discarded raises
    InfeasibleConstrain.
    """
    if constrain is not None and constrain_ctx is not None:
        raise ValueError("pass either constrain or constrain_ctx, not both")
    if bounds_mode not in ("clip", "reject"):
        raise ValueError("bounds_mode must be 'clip' or 'reject'")
    if constrain is not None:
        _constrain = lambda v, g, s: constrain(v)
    elif constrain_ctx is not None:
        _constrain = constrain_ctx
    else:
        _constrain = lambda v, g, s: v

    d = len(bounds)
    rng = np.random.default_rng(settings.seed)
    evaluations = 0

    def prepare_and_eval(vec, gen, slot):
        """Returns (params, cost, feasible)."""
        nonlocal evaluations
        vec = bounds.clip(vec)
        try:
            vec = np.asarray(_constrain(vec, gen, slot), dtype=float)
        except ConstraintViolation:
            bad = math.inf if infeasible_cost is None else infeasible_cost
            return vec, bad, False
        vec = bounds.clip(vec)
        evaluations += 1
        return vec, float(cost(vec)), True

    pop = rng.uniform(bounds.lower, bounds.upper, size=(settings.npop, d))
    if initial is not None:
        pop[0] = np.asarray(initial, dtype=float)
    costs = np.empty(settings.npop)
    any_feasible = False
    for i in range(settings.npop):
        pop[i], costs[i], ok = prepare_and_eval(pop[i], 0, i)
        any_feasible = any_feasible or ok
    if not any_feasible and infeasible_cost is None:
        raise InfeasibleConstrain("constrain rejected the entire initial population")

    best_idx = int(np.argmin(costs))
    history = [float(costs[best_idx])]
    trace: list[GenerationRecord] = []
    terminated_by = "max_generations"
    generations_run = 0

    if termination is not None and termination_met(termination, history):
        return SolveReport(
            opt_params=pop[best_idx].copy(),
            opt_cost=float(costs[best_idx]),
            generations_run=0,
            evaluations=evaluations,
            trace=trace,
            terminated_by=termination.name,
        )

    slots = np.arange(settings.npop)
    for gen in range(1, settings.max_generations + 1):
        base = pop.copy()
        base_costs = costs.copy()
        best_vec = base[best_idx].copy()

        trials = []
        n_rejected = 0
        for slot in range(settings.npop):
            others = slots[slots != slot]
            c1, c2 = rng.choice(others, size=2, replace=False)
            trial = mutate_best1exp(
                best_vec, base[c1], base[c2], base[slot], settings, rng
            )
            if bounds_mode == "reject" and not bounds.contains(trial):
                # Infinite-potential-well reading: out-of-box trials are
                # discarded without evaluation.
                trials.append((trial, math.inf, True))
                continue
            vec, c, ok = prepare_and_eval(trial, gen, slot)
            if not ok:
                n_rejected += 1
            trials.append((vec, c, ok))

        if n_rejected == settings.npop and infeasible_cost is None:
            raise InfeasibleConstrain(
                f"constrain rejected all {settings.npop} trials at generation {gen}"
            )

        for slot, (vec, c, ok) in enumerate(trials):
            if c < base_costs[slot]:
                pop[slot] = vec
                costs[slot] = c

        best_idx = int(np.argmin(costs))
        best_cost = float(costs[best_idx])
        history.append(best_cost)
        generations_run = gen
        trace.append(GenerationRecord(gen, best_cost, pop[best_idx].copy()))
        if trace_hook is not None:
            trace_hook(gen, best_cost, pop[best_idx].copy())
        if termination is not None and termination_met(termination, history):
            terminated_by = termination.name
            break

    return SolveReport(
        opt_params=pop[best_idx].copy(),
        opt_cost=float(costs[best_idx]),
        generations_run=generations_run,
        evaluations=evaluations,
        trace=trace,
        terminated_by=terminated_by,
    )
