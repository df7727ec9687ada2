import unittest

import numpy as np
import pandas as pd

from csg_grouping import (
    FeLedger,
    GroupingResult,
    SansdeConfig,
    build_bms,
    csg_decompose,
    partition_separables,
    random_subcomponents,
    cc_optimize
)
from csg_grouping.optimizers import CooperativeCoevolution
from csg_grouping.tests.test_problem import make_problem
from csg_grouping.tests.test_sansde import shifted_sphere

SEED = 17


class TestPartition(unittest.TestCase):

    def test_chunks_and_groups(self):
        grouping = GroupingResult(list(range(120)), [], [120, 121], [[122, 123]])
        parts = partition_separables(grouping, cap=50)

        self.assertEqual([len(p) for p in parts], [50, 50, 20, 2, 2])
        self.assertEqual(parts[0], list(range(50)))
        self.assertEqual(parts[-1], [122, 123])
        self.assertEqual(sorted(v for p in parts for v in p), list(range(124)))

    def test_classes_kept_apart(self):
        grouping = GroupingResult([0, 1], [2], [3], [])
        self.assertEqual(partition_separables(grouping), [[0, 1], [2], [3]])

    def test_bad_cap(self):
        with self.assertRaises(ValueError):
            partition_separables(GroupingResult([0]), cap=0)

    def test_random_subcomponents(self):
        parts = random_subcomponents(10, [3, 3, 4], seed=SEED)

        self.assertEqual([len(p) for p in parts], [3, 3, 4])
        self.assertEqual(sorted(v for p in parts for v in p), list(range(10)))
        self.assertEqual(parts, random_subcomponents(10, [3, 3, 4], seed=SEED))

        with self.assertRaises(ValueError):
            random_subcomponents(10, [3, 3])

        with self.assertRaises(ValueError):
            random_subcomponents(3, [3, 0])


class TestCooperativeCoevolution(unittest.TestCase):

    config = SansdeConfig(population_size=20)

    def test_sphere(self):
        problem = make_problem(shifted_sphere, n=20)
        state = cc_optimize(problem, [list(range(20))], 20000, seed=SEED)

        self.assertLess(state.best_fitness, 1e-2)
        self.assertLessEqual(problem.ledger.total, 20000)
        np.testing.assert_array_almost_equal(
            shifted_sphere(state.context),
            state.best_fitness
        )

    def test_evaluation_count(self):
        problem = make_problem(shifted_sphere, n=10)
        state = cc_optimize(problem, [[0, 1, 2], [3, 4, 5, 6], [7, 8, 9]], 1000, seed=SEED, config=self.config)

        self.assertEqual(problem.ledger.optimization, 1 + 20 * (3 + state.generations))
        self.assertGreater(problem.ledger.total + 20, 1000)
        self.assertLessEqual(problem.ledger.total, 1000)

    def test_trace(self):
        problem = make_problem(shifted_sphere, n=10)
        state = cc_optimize(problem, [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]], 3000, seed=SEED, config=self.config)

        frame = state.trace_frame()

        self.assertEqual(list(frame.columns), ["fe_count", "best_fitness"])
        self.assertTrue(frame["fe_count"].is_monotonic_increasing)
        self.assertTrue(np.all(np.diff(frame["best_fitness"].to_numpy()) <= 0))
        self.assertEqual(frame["fe_count"].iloc[-1], problem.ledger.total)
        self.assertEqual(frame["best_fitness"].iloc[-1], state.best_fitness)

    def test_checkpoints(self):
        problem = make_problem(shifted_sphere, n=10)
        checkpoints = [500, 1500, 2500, 5000]
        state = cc_optimize(
            problem,
            [list(range(10))],
            3000,
            seed=SEED,
            config=self.config,
            checkpoints=checkpoints
        )

        self.assertEqual(sorted(state.checkpoints), checkpoints)
        values = [state.checkpoints[c] for c in checkpoints]

        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))
        self.assertEqual(values[-1], state.best_fitness)

    def test_deterministic(self):
        results = []

        for _ in range(2):
            problem = make_problem(shifted_sphere, n=6)
            state = cc_optimize(problem, [[0, 1, 2], [3, 4, 5]], 2000, seed=SEED, config=self.config)
            results.append((state.best_fitness, state.context.tolist()))

        self.assertEqual(results[0], results[1])

    def test_decomposition_shares_budget(self):
        problem = make_problem(shifted_sphere, n=10, ledger=FeLedger(budget=2000))
        grouping, _ = csg_decompose(problem)
        used = problem.ledger.total

        cc_optimize(problem, partition_separables(grouping), 2000, seed=SEED, config=self.config)

        self.assertEqual(used, 22)
        self.assertEqual(problem.ledger.additive_stage, 22)
        self.assertLessEqual(problem.ledger.total, 2000)

    def test_budget_too_small(self):
        problem = make_problem(shifted_sphere, n=10)

        with self.assertRaises(ValueError):
            cc_optimize(problem, [list(range(10))], 15, config=self.config)

    def test_bad_subcomponents(self):
        problem = make_problem(n=4)

        for subcomponents in ([], [[0, 1], []], [[0, 1], [1, 2]], [[0, 4]]):
            with self.assertRaises(ValueError, msg=str(subcomponents)):
                CooperativeCoevolution(problem, subcomponents, 1000)

    def test_iterates_cycles(self):
        problem = make_problem(shifted_sphere, n=4)
        cc = CooperativeCoevolution(problem, [[0, 1], [2, 3]], 10000, seed=SEED, config=self.config)

        with cc:
            for k, state in enumerate(cc, start=1):
                self.assertEqual(state.cycles, k)
                if k == 3:
                    break

        self.assertEqual(problem.ledger.optimization, 1 + 20 * 2 + 20 * 2 * 3)

    def test_parent_fitnesses_follow_context(self):
        problem = make_problem(shifted_sphere, n=9)
        cc = CooperativeCoevolution(problem, [[0, 1, 2], [3, 4, 5], [6, 7, 8]], 10000, seed=SEED, config=self.config)

        with cc:
            for k, state in enumerate(cc, start=1):
                if k == 4:
                    break

            used = problem.ledger.total

            for sub in cc.subs:
                sub.rebase(state.best_fitness)
                full = np.tile(state.context, (len(sub.population), 1))
                full[:, sub.indices] = sub.population

                np.testing.assert_array_almost_equal(sub.fitnesses, shifted_sphere(full))

            self.assertEqual(problem.ledger.total, used)

    def test_bms_pipeline(self):
        instance = build_bms(2, 100, SEED)
        problem = instance.problem.with_ledger(FeLedger(budget=30000))

        grouping, _ = csg_decompose(problem)
        start = problem.objective(problem.midpoint)
        state = cc_optimize(problem, partition_separables(grouping), 30000, seed=SEED)

        self.assertEqual(grouping, instance.ground_truth)
        self.assertLess(state.best_fitness, start)
        self.assertGreaterEqual(state.best_fitness, instance.minimum_value)


class TestGroupingMatters(unittest.TestCase):

    budget = 200000
    seeds = range(10)

    def test_csg_not_worse_than_random(self):
        instance = build_bms(4, 100, SEED)
        finals = {"csg": [], "random": []}

        for seed in self.seeds:
            problem = instance.problem.with_ledger(FeLedger(budget=self.budget))
            grouping, _ = csg_decompose(problem)
            subcomponents = partition_separables(grouping)
            state = cc_optimize(problem, subcomponents, self.budget, seed=seed)

            self.assertTrue(state.trace_frame()["best_fitness"].is_monotonic_decreasing)
            finals["csg"].append(state.best_fitness)

            sizes = [len(s) for s in subcomponents]
            problem = instance.problem.with_ledger(FeLedger(budget=self.budget))
            state = cc_optimize(
                problem,
                random_subcomponents(100, sizes, seed),
                self.budget,
                seed=seed
            )

            self.assertTrue(state.trace_frame()["best_fitness"].is_monotonic_decreasing)
            finals["random"].append(state.best_fitness)

        medians = pd.DataFrame(finals).median()
        self.assertLessEqual(medians["csg"], medians["random"])


if __name__ == "__main__":
    unittest.main()
