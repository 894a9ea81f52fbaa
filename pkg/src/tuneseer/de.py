"""Differential evolution engine: current-to-pbest/1/bin with an external
archive and randomised greediness.

The donor for target x_i is

    v_i = x_i + F (x_pbest - x_i) + F (x_r1 - x_r2)

with x_pbest drawn uniformly from the top max(2, ceil(q_i * pop)) members by
fitness (q_i ~ U[2/pop, 0.2] per target), r1 from the population (r1 != i),
and r2 from population plus archive (r2 not in {i, r1}).  Binomial crossover
with one forced donor coordinate builds the trial; a trial at most as bad as
its target replaces it, and replaced parents enter the archive (random
eviction beyond capacity = population size).  Out-of-bounds trial coordinates
are reset to the midpoint between the violated bound and the parent
coordinate.

The fixed-parameter optimizer and the adaptive baseline share the generation
kernel ``evolve``; they differ only in how per-individual (CR, F) pairs are
sampled each generation.  Per generation, draws are consumed in a fixed
order: (CR, F) sampler, greediness q, pbest indices, r1, r2, forced
coordinate, crossover mask, archive evictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ContractError
from .sampling import ControlParams, substream

__all__ = [
    "ControlParams",
    "RunConfig",
    "RunTrace",
    "GenerationStats",
    "evolve",
    "optimize",
    "init_population",
]

Q_GREEDY_MAX = 0.2


@dataclass(frozen=True)
class RunConfig:
    """budget: max objective evaluations the optimizer may spend; seed:
    stream for all of the run's randomness."""

    budget: int
    seed: int


@dataclass
class RunTrace:
    """Per-generation progress of one run.

    ``generations`` holds (gen_index, cumulative_evals, best_value) rows;
    cumulative counts come from the instance's evaluation counter, so charges
    made before the run (e.g. feature sampling) are included.
    """

    generations: list[tuple[int, int, float]] = field(default_factory=list)
    best_solution: Optional[np.ndarray] = None
    final_population: Optional[np.ndarray] = None
    final_values: Optional[np.ndarray] = None

    @property
    def best_value(self) -> float:
        return self.generations[-1][2]

    @property
    def evals_used(self) -> int:
        return self.generations[-1][1]

    def csv_rows(self):
        """Rows (gen, evals, best) for serialization."""
        return [(g, n, f) for g, n, f in self.generations]


@dataclass(frozen=True)
class GenerationStats:
    """Passed to the kernel observer after each generation's selection."""

    gen: int
    cr: np.ndarray
    f: np.ndarray
    improved: np.ndarray  # trial <= target (replacement happened)
    successes: np.ndarray  # trial < target (strict improvement)
    deltas: np.ndarray  # target value - trial value, per individual


def init_population(instance, pop_size: int, rng: np.random.Generator):
    """Uniform population over the instance domain; evaluates all members
    (charges pop_size evaluations).  Returns (points, values)."""
    if pop_size < 5:
        raise ContractError(f"population size must be >= 5, got {pop_size}")
    dom = instance.domain
    points = rng.uniform(dom.lower, dom.upper, size=(pop_size, instance.dimension))
    return points, instance.evaluate_batch(points)


def _pick_r1(rng, pop_size, own):
    draws = rng.integers(0, pop_size - 1, size=pop_size)
    return draws + (draws >= own)


def _pick_r2(rng, total, own, r1):
    draws = rng.integers(0, total - 2, size=own.size)
    lo = np.minimum(own, r1)
    hi = np.maximum(own, r1)
    r2 = draws + (draws >= lo)
    r2 += r2 >= hi
    return r2


def evolve(
    instance,
    pop_size: int,
    budget: int,
    rng: np.random.Generator,
    sample_cr_f: Callable[[np.random.Generator], tuple[np.ndarray, np.ndarray]],
    observer: Optional[Callable[[GenerationStats], None]] = None,
) -> RunTrace:
    """Run the generation kernel until the next generation would exceed
    ``budget`` optimizer-owned evaluations.

    ``sample_cr_f(rng)`` returns this generation's per-individual crossover
    probabilities and weights.  ``observer`` (if given) sees the selection
    outcome of every generation.
    """
    if budget < pop_size:
        raise ContractError(
            f"budget {budget} cannot fit one generation of size {pop_size}"
        )
    dom = instance.domain
    lower, upper = dom.lower, dom.upper
    dim = instance.dimension

    pop, fvals = init_population(instance, pop_size, rng)
    used = pop_size
    archive: list[np.ndarray] = []
    trace = RunTrace()
    gen = 1
    trace.generations.append((gen, instance.eval_counter, float(fvals.min())))

    q_lo = 2.0 / pop_size
    q_hi = max(q_lo, Q_GREEDY_MAX)
    idx = np.arange(pop_size)

    while used + pop_size <= budget:
        gen += 1
        cr, f = sample_cr_f(rng)

        order = np.argsort(fvals, kind="stable")
        q = rng.uniform(q_lo, q_hi, size=pop_size)
        pool = np.maximum(2, np.ceil(q * pop_size).astype(int))
        pbest = order[rng.integers(0, pool)]
        r1 = _pick_r1(rng, pop_size, idx)
        combined = np.vstack([pop] + archive) if archive else pop
        r2 = _pick_r2(rng, combined.shape[0], idx, r1)

        fw = f[:, None]
        donors = pop + fw * (pop[pbest] - pop) + fw * (pop[r1] - combined[r2])

        jrand = rng.integers(0, dim, size=pop_size)
        mask = rng.random((pop_size, dim)) < cr[:, None]
        mask[idx, jrand] = True
        trials = np.where(mask, donors, pop)
        trials = np.where(trials < lower, 0.5 * (lower + pop), trials)
        trials = np.where(trials > upper, 0.5 * (upper + pop), trials)

        tvals = instance.evaluate_batch(trials)
        used += pop_size

        improved = tvals <= fvals
        successes = tvals < fvals
        deltas = fvals - tvals

        for i in np.nonzero(improved)[0]:
            archive.append(pop[i].copy())
            if len(archive) > pop_size:
                archive.pop(int(rng.integers(0, len(archive))))

        pop[improved] = trials[improved]
        fvals[improved] = tvals[improved]
        trace.generations.append((gen, instance.eval_counter, float(fvals.min())))

        if observer is not None:
            observer(
                GenerationStats(
                    gen=gen,
                    cr=cr,
                    f=f,
                    improved=improved,
                    successes=successes,
                    deltas=deltas,
                )
            )

    best = int(np.argmin(fvals))
    trace.best_solution = pop[best].copy()
    trace.final_population = pop
    trace.final_values = fvals
    return trace


def optimize(instance, params: ControlParams, cfg: RunConfig) -> RunTrace:
    """Fixed-parameter DE run; deterministic given (instance, params, seed)."""
    params.validate()
    if cfg.budget < params.p3:
        raise ContractError(
            f"budget {cfg.budget} is below one generation of p3={params.p3}"
        )
    rng = substream(cfg.seed, "de")
    cr = np.full(params.p3, params.p1)
    f = np.full(params.p3, params.p2)

    def fixed_params(_rng):
        return cr, f

    return evolve(instance, params.p3, cfg.budget, rng, fixed_params)
