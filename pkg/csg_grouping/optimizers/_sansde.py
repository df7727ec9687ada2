from dataclasses import dataclass, field

import numpy as _np

from csg_grouping._constants import (
    STAGE_OPTIMIZATION,
    DEFAULT_POPULATION_SIZE,
    DEFAULT_LEARNING_PERIOD,
    DEFAULT_CRM_PERIOD
)


@dataclass
class SansdeConfig:
    """
    Differential evolution settings. Strategy and scale-factor
    probabilities are re-learned every `learning_period` generations;
    the crossover mean every `crm_period` generations.
    """

    population_size: int = DEFAULT_POPULATION_SIZE
    learning_period: int = DEFAULT_LEARNING_PERIOD
    crm_period: int = DEFAULT_CRM_PERIOD
    initial_strategy_probability: float = 0.5
    initial_f_probability: float = 0.5
    initial_crm: float = 0.5
    f_mean: float = 0.5
    f_std: float = 0.3
    cr_std: float = 0.1

    def validate(self):
        if self.population_size < 4:
            raise ValueError(
                f"population_size must be at least 4; {self.population_size} provided"
            )
        elif self.learning_period < 1 or self.crm_period < 1:
            raise ValueError("learning_period and crm_period must be positive")
        elif not (0 <= self.initial_strategy_probability <= 1 and 0 <= self.initial_f_probability <= 1):
            raise ValueError("Initial probabilities must be in [0, 1]")
        return True


def reflect(values, lower, upper):
    """
    Fold values back into [lower, upper] by repeated mirroring at the bounds

    :param values: Array with the bounds broadcast over its last axis
    :type values: np.ndarray
    :return: Array of the same shape inside the box
    :rtype: np.ndarray
    """

    width = upper - lower
    folded = _np.mod(values - lower, 2 * width)
    folded = _np.where(folded > width, 2 * width - folded, folded)
    return lower + folded


def _adapted_probability(success_1, failure_1, success_2, failure_2, previous):
    denominator = success_2 * (success_1 + failure_1) + success_1 * (success_2 + failure_2)

    if denominator == 0:
        return previous

    return success_1 * (success_2 + failure_2) / denominator


@dataclass
class Subcomponent:
    """
    One evolving sub-population over `indices`. Fitnesses are full
    objective values with the other coordinates taken from a context
    vector whose own value is `context_fitness`.
    """

    indices: _np.ndarray
    population: _np.ndarray = field(repr=False)
    fitnesses: _np.ndarray = field(repr=False)
    lower: _np.ndarray = field(repr=False)
    upper: _np.ndarray = field(repr=False)
    p: float = 0.5
    fp: float = 0.5
    crm: float = 0.5
    strategy_success: _np.ndarray = field(default_factory=lambda: _np.zeros(2, dtype=int))
    strategy_failure: _np.ndarray = field(default_factory=lambda: _np.zeros(2, dtype=int))
    f_success: _np.ndarray = field(default_factory=lambda: _np.zeros(2, dtype=int))
    f_failure: _np.ndarray = field(default_factory=lambda: _np.zeros(2, dtype=int))
    cr_memory: list = field(default_factory=list, repr=False)
    cr_weights: list = field(default_factory=list, repr=False)
    generation: int = 0
    accepted: int = 0
    best_trial: _np.ndarray = field(default=None, repr=False)
    best_trial_fitness: float = _np.inf
    context_fitness: float = None

    @property
    def size(self):
        return self.indices.size

    def rebase(self, context_fitness):
        """
        Shift the stored fitnesses by the change in context fitness since
        the last call. Exact when the objective is additively separable
        between this subcomponent and the other variables.

        :param context_fitness: Objective value of the current context
        :type context_fitness: float
        """

        if self.context_fitness is not None:
            self.fitnesses = self.fitnesses + (context_fitness - self.context_fitness)

        self.context_fitness = float(context_fitness)

    @classmethod
    def initialize(cls, problem, indices, context, rng, config=None):
        """
        Uniform random population in the sub-box, evaluated against `context`

        :param problem: Problem being optimized
        :type problem: ObjectiveProblem
        :param indices: Variables of this subcomponent
        :type indices: list(int)
        :param context: Full n-vector for the other variables
        :type context: np.ndarray
        :param rng: Random generator
        :type rng: np.random.Generator
        :param config: Settings, defaults to SansdeConfig()
        :type config: SansdeConfig, optional
        :return: Initialized subcomponent; its best_trial is the best
            initial individual placed in the context
        :rtype: Subcomponent
        """

        config = SansdeConfig() if config is None else config
        config.validate()

        indices = _np.asarray(sorted(int(i) for i in indices), dtype=int)

        if indices.size == 0:
            raise ValueError("A subcomponent needs at least one variable")

        lower = problem.lower_bounds[indices].copy()
        upper = problem.upper_bounds[indices].copy()

        population = lower + (upper - lower) * rng.random((config.population_size, indices.size))

        full = _np.tile(context, (config.population_size, 1))
        full[:, indices] = population
        fitnesses = problem.evaluate_many(full, STAGE_OPTIMIZATION)

        best = int(_np.argmin(fitnesses))

        return cls(
            indices=indices,
            population=population,
            fitnesses=fitnesses,
            lower=lower,
            upper=upper,
            p=config.initial_strategy_probability,
            fp=config.initial_f_probability,
            crm=config.initial_crm,
            best_trial=full[best].copy(),
            best_trial_fitness=float(fitnesses[best])
        )


def sansde_generation(problem, sub, context, rng, config=None):
    """
    One generation of self-adaptive differential evolution with
    neighbourhood search on a subcomponent.

    Each individual uses rand/1 with probability `sub.p` and
    current-to-best/1 otherwise. Its scale factor is Gaussian with
    probability `sub.fp` and Cauchy otherwise; its crossover rate is
    Gaussian around `sub.crm`. Out-of-box components are reflected and
    trials replace their parents only when strictly better.

    :param problem: Problem being optimized
    :type problem: ObjectiveProblem
    :param sub: Subcomponent to evolve, updated in place
    :type sub: Subcomponent
    :param context: Full n-vector for the other variables
    :type context: np.ndarray
    :param rng: Random generator
    :type rng: np.random.Generator
    :param config: Settings, defaults to SansdeConfig()
    :type config: SansdeConfig, optional
    :return: The updated subcomponent. best_trial holds the best trial
        of this generation in full coordinates.
    :rtype: Subcomponent
    """

    config = SansdeConfig() if config is None else config

    X = sub.population
    pop, k = X.shape

    if pop < 4:
        raise ValueError(f"Population must have at least 4 individuals; {pop} provided")

    best = X[int(_np.argmin(sub.fitnesses))]

    use_rand1 = rng.random(pop) < sub.p
    use_gauss = rng.random(pop) < sub.fp

    F = _np.where(
        use_gauss,
        rng.normal(config.f_mean, config.f_std, pop),
        rng.standard_cauchy(pop)
    )[:, None]
    CR = _np.clip(rng.normal(sub.crm, config.cr_std, pop), 0, 1)

    # Three distinct partners per individual, none equal to itself
    order = rng.random((pop, pop))
    _np.fill_diagonal(order, 2.0)
    r1, r2, r3 = _np.argsort(order, axis=1)[:, :3].T

    rand1 = X[r1] + F * (X[r2] - X[r3])
    current_to_best = X + F * (best - X) + F * (X[r1] - X[r2])

    mutants = reflect(
        _np.where(use_rand1[:, None], rand1, current_to_best),
        sub.lower,
        sub.upper
    )

    cross = rng.random((pop, k)) < CR[:, None]
    cross[_np.arange(pop), rng.integers(0, k, pop)] = True
    trials = _np.where(cross, mutants, X)

    full = _np.tile(context, (pop, 1))
    full[:, sub.indices] = trials
    trial_fitnesses = problem.evaluate_many(full, STAGE_OPTIMIZATION)

    improved = trial_fitnesses < sub.fitnesses

    strategy = _np.where(use_rand1, 0, 1)
    f_kind = _np.where(use_gauss, 0, 1)

    for s in (0, 1):
        sub.strategy_success[s] += int(_np.sum(improved & (strategy == s)))
        sub.strategy_failure[s] += int(_np.sum(~improved & (strategy == s)))
        sub.f_success[s] += int(_np.sum(improved & (f_kind == s)))
        sub.f_failure[s] += int(_np.sum(~improved & (f_kind == s)))

    sub.cr_memory.extend(CR[improved].tolist())
    sub.cr_weights.extend((sub.fitnesses[improved] - trial_fitnesses[improved]).tolist())

    X[improved] = trials[improved]
    sub.fitnesses[improved] = trial_fitnesses[improved]

    best_trial = int(_np.argmin(trial_fitnesses))
    sub.best_trial = full[best_trial].copy()
    sub.best_trial_fitness = float(trial_fitnesses[best_trial])

    sub.generation += 1
    sub.accepted += int(_np.sum(improved))

    if sub.generation % config.crm_period == 0 and len(sub.cr_memory) > 0:
        weights = _np.asarray(sub.cr_weights)
        if _np.sum(weights) > 0:
            sub.crm = float(_np.sum(weights * _np.asarray(sub.cr_memory)) / _np.sum(weights))
        sub.cr_memory.clear()
        sub.cr_weights.clear()

    if sub.generation % config.learning_period == 0:
        sub.p = _adapted_probability(
            sub.strategy_success[0], sub.strategy_failure[0],
            sub.strategy_success[1], sub.strategy_failure[1],
            sub.p
        )
        sub.fp = _adapted_probability(
            sub.f_success[0], sub.f_failure[0],
            sub.f_success[1], sub.f_failure[1],
            sub.fp
        )
        sub.strategy_success[:] = 0
        sub.strategy_failure[:] = 0
        sub.f_success[:] = 0
        sub.f_failure[:] = 0

    return sub
