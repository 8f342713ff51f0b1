"""Many-task differential evolution with reward-adaptive transfer.

Every generation each task either runs one DE/rand/1/bin step with
per-individual random control parameters, or (with the migration
probability) crosses its population with a peer task chosen from a
probability table built from transfer rewards and inter-population
similarity. Offspring are scored exclusively through the surrogate; the
incumbent best of each task is evaluated once with the true objective at
the very end. Generation 1 spends its evaluation budget on the initial
population itself, so the call count is exactly
``tasks * generations * pop_size``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SurrogateFailure
from .problems.suites import TaskSpec
from .surrogate.base import CountingSurrogate, Surrogate

REWARD_FLOOR = 1e-3


@dataclass(frozen=True)
class MaTdeConfig:
    migration_prob: float = 0.3  # chance a generation transfers instead of DE
    archive_prob: float = 0.2  # per-individual archive insertion chance
    shrink: float = 0.8  # reward divisor/multiplier on success/failure
    pop_size: int = 50
    generations: int = 100
    archive_capacity: int = 300
    f_range: tuple[float, float] = (0.1, 1.0)
    cr_range: tuple[float, float] = (0.1, 0.9)
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.migration_prob <= 1.0 and 0.0 <= self.archive_prob <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.pop_size < 4:
            raise ValueError("DE/rand/1 needs a population of at least 4")
        if self.generations < 1:
            raise ValueError("need at least one generation")


@dataclass
class TaskState:
    task: TaskSpec
    population: np.ndarray  # (pop, dim)
    fitness: np.ndarray  # pseudo-fitness, +inf until first evaluation
    archive: list = field(default_factory=list)
    best_x: np.ndarray | None = None
    best_y: float = np.inf
    rng: np.random.Generator = None


@dataclass
class TaskResult:
    task_id: str
    best_x: np.ndarray
    best_pseudo_y: float
    true_y_of_best: float
    trace: list  # (generation, best_pseudo_y, cumulative surrogate calls)
    archive: list = field(default_factory=list)  # (x, pseudo_y) store


def reflect_into_bounds(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Mirror out-of-box components back inside, repeating until contained."""
    out = x.copy()
    span = hi - lo
    for _ in range(64):
        below = out < lo
        above = out > hi
        if not (below.any() or above.any()):
            return out
        out = np.where(below, 2 * lo - out, out)
        out = np.where(above, 2 * hi - out, out)
    return np.clip(out, lo, hi)  # pathological overshoot


def de_step(
    population: np.ndarray,
    f_range: tuple[float, float],
    cr_range: tuple[float, float],
    bounds: tuple[float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    """One DE/rand/1/bin generation of trial vectors.

    Per individual, in draw order: F, CR, the three distinct partners,
    the forced crossover gene, then the crossover mask.
    """
    pop, dim = population.shape
    lo, hi = bounds
    offspring = np.empty_like(population)
    for i in range(pop):
        f = rng.uniform(*f_range)
        cr = rng.uniform(*cr_range)
        candidates = [j for j in range(pop) if j != i]
        r1, r2, r3 = rng.choice(candidates, size=3, replace=False)
        mutant = population[r1] + f * (population[r2] - population[r3])
        j_rand = rng.integers(dim)
        mask = rng.random(dim) < cr
        mask[j_rand] = True
        trial = np.where(mask, mutant, population[i])
        offspring[i] = reflect_into_bounds(trial, lo, hi)
    return offspring


def transfer_crossover(
    population: np.ndarray,
    donor_pop: np.ndarray,
    bounds: tuple[float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform crossover of each individual with a random donor individual.

    Donor tasks may live in a different dimensionality; only the first
    ``min(d_self, d_donor)`` coordinates can be exchanged.
    """
    pop, dim = population.shape
    shared = min(dim, donor_pop.shape[1])
    lo, hi = bounds
    offspring = population.copy()
    for i in range(pop):
        donor = donor_pop[rng.integers(len(donor_pop))]
        j_rand = rng.integers(shared)
        mask = rng.random(shared) < 0.5
        mask[j_rand] = True
        offspring[i, :shared] = np.where(mask, donor[:shared], population[i, :shared])
        offspring[i] = reflect_into_bounds(offspring[i], lo, hi)
    return offspring


def _diag_gaussian(pop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = pop.mean(axis=0)
    sigma = np.maximum(pop.std(axis=0), 1e-9)
    return mu, sigma


def _sym_kl(pop_a: np.ndarray, pop_b: np.ndarray) -> float:
    """Symmetrized KL of diagonal Gaussian fits over shared coordinates."""
    shared = min(pop_a.shape[1], pop_b.shape[1])
    mu0, s0 = _diag_gaussian(pop_a[:, :shared])
    mu1, s1 = _diag_gaussian(pop_b[:, :shared])

    def kl(m0, v0, m1, v1):
        return float(
            (np.log(v1 / v0) + (v0**2 + (m0 - m1) ** 2) / (2 * v1**2) - 0.5).sum()
        )

    return 0.5 * (kl(mu0, s0, mu1, s1) + kl(mu1, s1, mu0, s0))


def _softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max())
    return e / e.sum()


def select_transfer_task(
    index: int,
    states: list[TaskState],
    rewards: np.ndarray,
    rng: np.random.Generator,
) -> int:
    """Peer choice: softmax of rewards times softmax of population similarity."""
    peers = [j for j in range(len(states)) if j != index]
    if not peers:
        raise ValueError("transfer needs at least two tasks")
    reward_part = _softmax(np.array([rewards[index, j] for j in peers]))
    sims = np.array(
        [-_sym_kl(states[index].population, states[j].population) for j in peers]
    )
    sim_part = _softmax(sims)
    probs = reward_part * sim_part
    probs = probs / probs.sum()
    return int(peers[rng.choice(len(peers), p=probs)])


def _evaluate(surrogate: Surrogate, state: TaskState, xs: np.ndarray) -> np.ndarray:
    try:
        preds = surrogate.predict_batch(state.task.metadata, xs)
    except Exception as err:
        raise SurrogateFailure(f"{state.task.task_id}: {err}") from err
    return np.array([p.y for p in preds], dtype=float)


def _select(state: TaskState, offspring: np.ndarray, off_fit: np.ndarray) -> bool:
    """One-to-one greedy selection; returns True when the best improved."""
    better = off_fit <= state.fitness
    state.population[better] = offspring[better]
    state.fitness[better] = off_fit[better]
    gen_best = int(np.argmin(state.fitness))
    if state.fitness[gen_best] < state.best_y:
        state.best_y = float(state.fitness[gen_best])
        state.best_x = state.population[gen_best].copy()
        return True
    return False


def matde_run(
    tasks: list[TaskSpec],
    surrogate: Surrogate,
    cfg: MaTdeConfig,
    true_final_eval: bool = True,
) -> list[TaskResult]:
    """Run the many-task loop; one TaskResult per task, in task order."""
    counting = CountingSurrogate(surrogate)
    n_tasks = len(tasks)
    seed_seq = np.random.SeedSequence(cfg.seed)
    task_rngs = [np.random.default_rng(s) for s in seed_seq.spawn(n_tasks)]

    states: list[TaskState] = []
    for task, rng in zip(tasks, task_rngs):
        lo, hi = task.bounds
        pop = rng.uniform(lo, hi, size=(cfg.pop_size, task.dim))
        states.append(
            TaskState(
                task=task,
                population=pop,
                fitness=np.full(cfg.pop_size, np.inf),
                rng=rng,
            )
        )
    rewards = np.full((n_tasks, n_tasks), REWARD_FLOOR)
    traces: list[list] = [[] for _ in range(n_tasks)]

    for gen in range(1, cfg.generations + 1):
        for t, state in enumerate(states):
            rng = state.rng
            if gen == 1:
                # Generation 1 charges the initial population to the budget.
                fit = _evaluate(counting, state, state.population)
                state.fitness = fit
                improved = _select(state, state.population, fit)
            elif n_tasks < 2 or rng.random() > cfg.migration_prob:
                offspring = de_step(
                    state.population, cfg.f_range, cfg.cr_range, state.task.bounds, rng
                )
                off_fit = _evaluate(counting, state, offspring)
                _select(state, offspring, off_fit)
            else:
                donor = select_transfer_task(t, states, rewards, rng)
                offspring = transfer_crossover(
                    state.population, states[donor].population, state.task.bounds, rng
                )
                off_fit = _evaluate(counting, state, offspring)
                if _select(state, offspring, off_fit):
                    rewards[t, donor] /= cfg.shrink
                else:
                    rewards[t, donor] *= cfg.shrink

            for i in range(cfg.pop_size):
                if rng.random() < cfg.archive_prob:
                    entry = (state.population[i].copy(), float(state.fitness[i]))
                    if len(state.archive) < cfg.archive_capacity:
                        state.archive.append(entry)
                    else:
                        state.archive[rng.integers(cfg.archive_capacity)] = entry
            traces[t].append((gen, state.best_y, counting.calls))

    results = []
    for state, trace in zip(states, traces):
        true_y = float(state.task.evaluate(state.best_x)) if true_final_eval else np.nan
        results.append(
            TaskResult(
                task_id=state.task.task_id,
                best_x=state.best_x,
                best_pseudo_y=state.best_y,
                true_y_of_best=true_y,
                trace=trace,
                archive=state.archive,
            )
        )
    return results
