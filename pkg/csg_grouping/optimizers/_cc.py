from dataclasses import dataclass, field

import numpy as _np
import pandas as pd

from csg_grouping._constants import STAGE_OPTIMIZATION, DEFAULT_SUBCOMPONENT_CAP
from csg_grouping._problem import BudgetExhaustedError
from csg_grouping._debug import debug_print
from csg_grouping.optimizers._sansde import SansdeConfig, Subcomponent, sansde_generation


@dataclass
class CcState:
    """
    Result of a cooperative co-evolution run. `trace` holds
    (evaluations used, best fitness) pairs; `checkpoints` maps each
    requested evaluation count to the best fitness reached by then.
    """

    context: _np.ndarray
    best_fitness: float
    trace: list = field(default_factory=list)
    checkpoints: dict = field(default_factory=dict)
    generations: int = 0
    cycles: int = 0

    def trace_frame(self):
        return pd.DataFrame(self.trace, columns=["fe_count", "best_fitness"])


def _chunks(values, cap):
    return [values[k:k + cap] for k in range(0, len(values), cap)]


def partition_separables(grouping, cap=DEFAULT_SUBCOMPONENT_CAP):
    """
    Subcomponents for a grouping: each separable class cut into chunks of
    at most `cap` variables, then every non-separable group as it is

    :param grouping: Grouping to optimize with
    :type grouping: GroupingResult
    :param cap: Largest chunk of separable variables, defaults to 50
    :type cap: int
    :return: Variable index lists
    :rtype: list(list(int))
    """

    if cap < 1:
        raise ValueError(f"cap must be at least 1; {cap} provided")

    subcomponents = []

    for members in (grouping.s1, grouping.s2, grouping.s3):
        subcomponents.extend(_chunks(sorted(members), cap))

    subcomponents.extend(list(g) for g in grouping.nonseparable_groups)

    return subcomponents


def random_subcomponents(dimension, sizes, seed=None):
    """
    Random partition of 0..dimension-1 into subcomponents of the given sizes

    :param dimension: Number of variables
    :type dimension: int
    :param sizes: Subcomponent sizes, summing to `dimension`
    :type sizes: list(int)
    :param seed: Seed for the shuffle
    :type seed: int, optional
    :return: Sorted variable index lists
    :rtype: list(list(int))
    """

    sizes = [int(s) for s in sizes]

    if sum(sizes) != dimension or any(s < 1 for s in sizes):
        raise ValueError(
            f"sizes must be positive and sum to {dimension}; {sizes} provided"
        )

    order = _np.random.default_rng(seed).permutation(dimension)
    bounds = _np.cumsum([0] + sizes)

    return [sorted(order[bounds[k]:bounds[k + 1]].tolist()) for k in range(len(sizes))]


class CooperativeCoevolution:
    """
    Round-robin cooperative co-evolution. Every cycle runs one SaNSDE
    generation per subcomponent against the shared context vector;
    a generation whose best trial beats the context replaces it.
    Before each generation the stored fitnesses of the subcomponent are
    shifted by the change in context fitness since its last turn.

    Iterating over the object runs one cycle per step. The run ends when
    another generation would take the ledger total past `budget`.

    :param problem: Problem to minimize; its ledger counts every evaluation
    :type problem: ObjectiveProblem
    :param subcomponents: Variable index lists
    :type subcomponents: list(list(int))
    :param budget: Ledger total at which the run stops
    :type budget: int
    :param seed: Seed for numpy.random.default_rng
    :type seed: int, optional
    :param config: Differential evolution settings
    :type config: SansdeConfig, optional
    :param checkpoints: Ledger totals at which to record the best fitness
    :type checkpoints: list(int), optional
    """

    state = None
    subs = None

    def __init__(self, problem, subcomponents, budget, seed=None, config=None, checkpoints=()):

        self.problem = problem
        self.config = SansdeConfig() if config is None else config
        self.config.validate()

        subcomponents = [sorted(int(i) for i in s) for s in subcomponents]

        if len(subcomponents) == 0:
            raise ValueError("At least one subcomponent is needed")

        seen = set()
        for s in subcomponents:
            if len(s) == 0:
                raise ValueError("Subcomponents must not be empty")
            elif s[0] < 0 or s[-1] >= problem.dimension:
                raise ValueError(f"Subcomponent {s} has indices outside 0..{problem.dimension - 1}")
            elif seen & set(s):
                raise ValueError(f"Subcomponents overlap on {sorted(seen & set(s))}")
            seen.update(s)

        self.subcomponents = subcomponents
        self.budget = int(budget)
        self.checkpoints = sorted(int(c) for c in checkpoints)
        self.rng = _np.random.default_rng(seed)
        self.finished = False

    def __enter__(self):
        return self

    def __exit__(self, exception_type, exception_value, traceback):
        self.subs = None

    @property
    def initialization_cost(self):
        return 1 + self.config.population_size * len(self.subcomponents)

    @property
    def used(self):
        return self.problem.ledger.total

    def _record_checkpoints(self):
        for cp in self.checkpoints:
            if cp not in self.state.checkpoints and self.used >= cp:
                self.state.checkpoints[cp] = self.state.best_fitness
                self.state.trace.append((self.used, self.state.best_fitness))

    def _write_back(self, sub):
        if sub.best_trial_fitness < self.state.best_fitness:
            self.state.context = sub.best_trial.copy()
            self.state.best_fitness = sub.best_trial_fitness
            self.state.trace.append((self.used, self.state.best_fitness))

        sub.context_fitness = self.state.best_fitness

    def initialize(self):
        """
        Evaluate the midpoint context and every initial population

        :raises ValueError: If the budget cannot cover initialization
        """

        if self.used + self.initialization_cost > self.budget:
            raise ValueError(
                f"Budget {self.budget} cannot cover initialization: {self.used} already "
                f"used plus {self.initialization_cost} needed"
            )

        context = self.problem.midpoint
        best = self.problem.evaluate(context, STAGE_OPTIMIZATION)
        self.state = CcState(context=context, best_fitness=best, trace=[(self.used, best)])

        self.subs = []
        for indices in self.subcomponents:
            sub = Subcomponent.initialize(
                self.problem,
                indices,
                self.state.context,
                self.rng,
                self.config
            )
            self.subs.append(sub)
            self._write_back(sub)

        self._record_checkpoints()

        debug_print(
            f"CC: {len(self.subs)} subcomponent(s) initialized; best {self.state.best_fitness:.6e}"
        )

    def __iter__(self):
        if self.state is None:
            self.initialize()
        return self

    def __next__(self):

        if self.finished:
            raise StopIteration

        pop = self.config.population_size

        for sub in self.subs:

            if self.used + pop > self.budget:
                self.finished = True
                break

            sub.rebase(self.state.best_fitness)

            try:
                sansde_generation(self.problem, sub, self.state.context, self.rng, self.config)
            except BudgetExhaustedError:
                self.finished = True
                break

            self.state.generations += 1
            self._write_back(sub)
            self._record_checkpoints()

        else:
            self.state.cycles += 1
            return self.state

        raise StopIteration

    def solve(self):
        """
        Run cycles until the budget is spent

        :return: Final state
        :rtype: CcState
        """

        for _ in self:
            pass

        # Checkpoints past the stopping point get the final value
        for cp in self.checkpoints:
            self.state.checkpoints.setdefault(cp, self.state.best_fitness)

        if self.state.trace[-1][0] != self.used:
            self.state.trace.append((self.used, self.state.best_fitness))

        debug_print(
            f"CC: {self.state.cycles} cycle(s), {self.state.generations} generation(s), "
            f"best {self.state.best_fitness:.6e} after {self.used} evaluations"
        )

        return self.state


def cc_optimize(problem, subcomponents, budget, seed=None, config=None, checkpoints=()):
    """
    Cooperative co-evolution wrapper

    :param problem: Problem to minimize
    :type problem: ObjectiveProblem
    :param subcomponents: Variable index lists, e.g. from partition_separables
    :type subcomponents: list(list(int))
    :param budget: Ledger total at which the run stops
    :type budget: int
    :param seed: Seed, defaults to None
    :type seed: int, optional
    :return: Final state
    :rtype: CcState
    """

    with CooperativeCoevolution(
        problem,
        subcomponents,
        budget,
        seed=seed,
        config=config,
        checkpoints=checkpoints
    ) as cc:
        return cc.solve()
