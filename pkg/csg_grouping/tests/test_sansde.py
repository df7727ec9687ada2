import unittest

import numpy as np
import numpy.testing as npt

from csg_grouping import SansdeConfig, sansde_generation
from csg_grouping.optimizers import Subcomponent, reflect
from csg_grouping.tests.test_problem import make_problem

SEED = 31


def shifted_sphere(x):
    x = np.asarray(x, dtype=float)
    return np.sum((x - 1.0) ** 2, axis=-1)


def new_sub(problem, indices, rng, config=None):
    context = problem.midpoint
    return Subcomponent.initialize(problem, indices, context, rng, config), context


class TestReflect(unittest.TestCase):

    def test_inside_unchanged(self):
        values = np.array([-4.0, 0.0, 3.5, 5.0])
        npt.assert_array_almost_equal(reflect(values, -5.0, 5.0), values)

    def test_mirrors(self):
        npt.assert_array_almost_equal(reflect(np.array([6.0, -7.0]), -5.0, 5.0), [4.0, -3.0])
        npt.assert_array_almost_equal(reflect(np.array([16.0, 27.0]), -5.0, 5.0), [-4.0, 3.0])

    def test_always_in_box(self):
        rng = np.random.default_rng(SEED)
        lower = np.array([-5.0, 0.0, 2.0])
        upper = np.array([5.0, 1.0, 2.5])
        values = rng.standard_cauchy((1000, 3)) * 100

        folded = reflect(values, lower, upper)

        self.assertTrue(np.all(folded >= lower - 1e-12))
        self.assertTrue(np.all(folded <= upper + 1e-12))


class TestSubcomponent(unittest.TestCase):

    def test_initialize(self):
        problem = make_problem(shifted_sphere, n=6)
        rng = np.random.default_rng(SEED)
        config = SansdeConfig(population_size=10)

        sub, context = new_sub(problem, [4, 1], rng, config)

        npt.assert_array_equal(sub.indices, [1, 4])
        self.assertEqual(sub.population.shape, (10, 2))
        self.assertEqual(problem.ledger.optimization, 10)
        self.assertTrue(np.all(sub.population >= -5) and np.all(sub.population <= 5))

        npt.assert_array_equal(np.delete(sub.best_trial, [1, 4]), np.delete(context, [1, 4]))
        self.assertEqual(sub.best_trial_fitness, sub.fitnesses.min())

    def test_bad_population(self):
        problem = make_problem(n=3)

        with self.assertRaises(ValueError):
            SansdeConfig(population_size=3).validate()

        with self.assertRaises(ValueError):
            Subcomponent.initialize(problem, [], problem.midpoint, np.random.default_rng(SEED))

    def test_first_rebase_only_records(self):
        problem = make_problem(shifted_sphere, n=4)
        sub, _ = new_sub(problem, [0, 1], np.random.default_rng(SEED))
        before = sub.fitnesses.copy()

        sub.rebase(7.5)

        npt.assert_array_equal(sub.fitnesses, before)
        self.assertEqual(sub.context_fitness, 7.5)

    def test_rebase_follows_context(self):
        problem = make_problem(shifted_sphere, n=6)
        sub, context = new_sub(problem, [1, 4], np.random.default_rng(SEED))
        sub.rebase(shifted_sphere(context))

        moved = context.copy()
        moved[[0, 2, 3, 5]] = [1.0, -2.0, 0.5, 4.0]
        sub.rebase(shifted_sphere(moved))

        full = np.tile(moved, (len(sub.population), 1))
        full[:, sub.indices] = sub.population

        npt.assert_array_almost_equal(sub.fitnesses, shifted_sphere(full))
        self.assertEqual(sub.context_fitness, shifted_sphere(moved))


class TestGeneration(unittest.TestCase):

    def setUp(self):
        self.problem = make_problem(shifted_sphere, n=8)
        self.rng = np.random.default_rng(SEED)
        self.config = SansdeConfig(population_size=12, learning_period=50, crm_period=25)
        self.sub, self.context = new_sub(self.problem, [0, 2, 5], self.rng, self.config)

    def test_parents_only_improve(self):
        before = self.sub.fitnesses.copy()

        for _ in range(5):
            sansde_generation(self.problem, self.sub, self.context, self.rng, self.config)

        self.assertTrue(np.all(self.sub.fitnesses <= before))

    def test_context_untouched(self):
        context = self.context.copy()
        sansde_generation(self.problem, self.sub, self.context, self.rng, self.config)

        npt.assert_array_equal(self.context, context)

    def test_population_in_box(self):
        for _ in range(10):
            sansde_generation(self.problem, self.sub, self.context, self.rng, self.config)

        self.assertTrue(np.all(self.sub.population >= -5) and np.all(self.sub.population <= 5))

    def test_counters(self):
        for _ in range(3):
            sansde_generation(self.problem, self.sub, self.context, self.rng, self.config)

        self.assertEqual(self.sub.generation, 3)
        self.assertEqual(int(self.sub.strategy_success.sum()), self.sub.accepted)
        self.assertEqual(int(self.sub.f_success.sum()), self.sub.accepted)
        self.assertEqual(
            int(self.sub.strategy_success.sum() + self.sub.strategy_failure.sum()),
            3 * 12
        )
        self.assertEqual(self.problem.ledger.optimization, 12 * 4)

    def test_fitnesses_match_population(self):
        for _ in range(4):
            sansde_generation(self.problem, self.sub, self.context, self.rng, self.config)

        full = np.tile(self.context, (12, 1))
        full[:, self.sub.indices] = self.sub.population

        npt.assert_array_almost_equal(shifted_sphere(full), self.sub.fitnesses)

    def test_learning_resets_counters(self):
        config = SansdeConfig(population_size=12, learning_period=2, crm_period=2)

        for _ in range(2):
            sansde_generation(self.problem, self.sub, self.context, self.rng, config)

        self.assertEqual(int(self.sub.strategy_success.sum()), 0)
        self.assertEqual(int(self.sub.strategy_failure.sum()), 0)
        self.assertGreaterEqual(self.sub.p, 0.0)
        self.assertLessEqual(self.sub.p, 1.0)
        self.assertGreaterEqual(self.sub.crm, 0.0)
        self.assertLessEqual(self.sub.crm, 1.0)

    def test_deterministic(self):
        problem = make_problem(shifted_sphere, n=8)
        runs = []

        for _ in range(2):
            rng = np.random.default_rng(SEED)
            sub, context = new_sub(problem, [0, 2, 5], rng, self.config)
            for _ in range(3):
                sansde_generation(problem, sub, context, rng, self.config)
            runs.append(sub.population.copy())

        npt.assert_array_equal(runs[0], runs[1])


if __name__ == "__main__":
    unittest.main()
