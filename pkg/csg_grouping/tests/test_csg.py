import unittest

import numpy as np
import numpy.testing as npt

from csg_grouping import (
    ObjectiveProblem,
    GroupingResult,
    NonFiniteObjectiveError,
    CsgConfig,
    ContextArchive,
    csg_decompose,
    additive_check,
    msvd,
    gsvd,
    nvg,
    rgd,
    detection_fe_model,
    fig1_example
)
from csg_grouping.decomposers import gamma, eps1_threshold
from csg_grouping._constants import (
    STAGE_ADDITIVE,
    CLASS_ADDITIVE,
    CLASS_MULTIPLICATIVE,
    CLASS_COMPOSITE,
    CLASS_NONSEPARABLE
)
from csg_grouping.tests.test_problem import sphere, make_problem

SEED = 2024


def midpoint_archive(problem):
    return ContextArchive.from_bounds(problem)


def corners(problem, i):
    f_ll = problem.evaluate(problem.lower_bounds.copy(), STAGE_ADDITIVE)
    f_uu = problem.evaluate(problem.upper_bounds.copy(), STAGE_ADDITIVE)
    return additive_check(problem, i, f_ll, f_uu)


def random_mixed_problem(rng):
    """
    Small objective built from additive, product, square-root and coupled
    terms over a random partition of the variables
    """

    n = int(rng.integers(2, 9))
    order = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(3, n - 1), replace=False))
    parts = [p for p in np.split(order, cuts) if len(p) > 0]
    kinds = rng.choice(["additive", "product", "root", "coupled"], size=len(parts))
    centers = rng.uniform(-2, 2, n)
    low = rng.uniform(-6, -3, n)
    high = rng.uniform(3, 6, n)

    def objective(x):
        z = x - centers
        value = 0.0
        for part, kind in zip(parts, kinds):
            zp = z[part]
            if kind == "additive":
                value += np.sum(zp ** 2)
            elif kind == "product":
                value += np.prod(1.0 + zp ** 2)
            elif kind == "root":
                value += np.sqrt(1.0 + np.sum(zp ** 2))
            else:
                value += np.sum(np.diff(np.concatenate([[0.0], zp])) ** 2) + np.sum(zp ** 2)
        return float(value)

    return ObjectiveProblem(objective, low, high)


class TestThresholds(unittest.TestCase):

    def test_gamma(self):
        u = 2.0 ** -53
        npt.assert_almost_equal(gamma(3) / u, 3.0)
        self.assertGreater(gamma(4), gamma(3))

        with self.assertRaises(ValueError):
            gamma(2.0 ** 53)

    def test_eps1_scales_with_values(self):
        small = eps1_threshold([1.0, 1.0, 1.0, 1.0], 100)
        large = eps1_threshold([10.0, -10.0, 10.0, 10.0], 100)

        npt.assert_almost_equal(large / small, 10.0)
        npt.assert_almost_equal(small, gamma(12) * 4)


class TestConfig(unittest.TestCase):

    def test_defaults_valid(self):
        self.assertTrue(CsgConfig().validate(make_problem()))

    def test_invalid(self):
        problem = make_problem()

        for overrides in (
            {"alpha": 0.0},
            {"alpha": 1.5},
            {"halving_factor": 1.0},
            {"eps_gss": 20.0},
            {"eps_gss": 1e-3},
            {"eps_gss": -1.0},
            {"eps1_policy": "loose"},
            {"eps2_policy": -1.0}
        ):
            with self.assertRaises(ValueError, msg=str(overrides)):
                CsgConfig.from_dict(overrides).validate(problem)

    def test_precision_must_be_below_first_step(self):
        problem = make_problem()

        with self.assertRaisesRegex(ValueError, "must be below the initial"):
            CsgConfig(alpha=0.01, gss_precision=0.01).validate(problem)

        self.assertTrue(CsgConfig(alpha=0.01, gss_precision=0.009).validate(problem))

    def test_unknown_key(self):
        with self.assertRaises(ValueError):
            CsgConfig.from_dict({"precision": 1e-6})

    def test_vectors(self):
        problem = ObjectiveProblem(sphere, [0.0, -2.0], [1.0, 2.0])
        config = CsgConfig()

        npt.assert_array_almost_equal(config.eps_vector(problem), [1e-8, 4e-8])
        npt.assert_array_almost_equal(config.delta0_vector(problem), [1e-5, 4e-5])
        npt.assert_array_equal(CsgConfig(eps_gss=1e-9).eps_vector(problem), [1e-9, 1e-9])


class TestAdditiveAndMsvd(unittest.TestCase):

    def test_sum_is_additive(self):
        problem = ObjectiveProblem(lambda x: float(x[0] + x[1]), [1.0, 1.0], [2.0, 2.0])
        check = corners(problem, 0)

        self.assertEqual(check.beta1, 0.0)
        self.assertTrue(check.additive)
        self.assertEqual(problem.ledger.additive_stage, 4)

    def test_product(self):
        problem = ObjectiveProblem(lambda x: float(x[0] * x[1]), [1.0, 1.0], [2.0, 2.0])
        check = corners(problem, 0)

        self.assertEqual(check.beta1, 1.0)
        self.assertFalse(check.additive)

        mult = msvd(problem, 0, check)

        self.assertEqual(mult.beta2, 0.0)
        self.assertTrue(mult.multiplicative)
        self.assertEqual(problem.ledger.msvd_stage, 4)

    def test_coupled_square_is_neither(self):
        problem = ObjectiveProblem(
            lambda x: float((x[0] - x[1]) ** 2),
            [-5.0, -5.0],
            [5.0, 5.0]
        )
        check = corners(problem, 0)

        self.assertFalse(check.additive)
        self.assertFalse(msvd(problem, 0, check).multiplicative)

    def test_fixed_thresholds(self):
        problem = ObjectiveProblem(lambda x: float(x[0] * x[1]), [1.0, 1.0], [2.0, 2.0])
        f_ll = problem.evaluate(problem.lower_bounds.copy(), STAGE_ADDITIVE)
        f_uu = problem.evaluate(problem.upper_bounds.copy(), STAGE_ADDITIVE)

        check = additive_check(problem, 0, f_ll, f_uu, CsgConfig(eps1_policy=2.0))
        self.assertEqual(check.eps1, 2.0)
        self.assertTrue(check.additive)

    def test_degenerate_difference(self):
        problem = ObjectiveProblem(lambda x: float(x[1] ** 2), [0.0, -1.0], [1.0, 2.0])
        check = corners(problem, 0)
        mult = msvd(problem, 0, check)

        self.assertTrue(mult.degenerate)
        self.assertFalse(mult.multiplicative)

    def test_non_finite_in_box(self):
        problem = ObjectiveProblem(
            lambda x: np.nan if x[0] == 0.5 else float(x[0] * x[1]),
            [0.0, 1.0],
            [1.0, 2.0]
        )
        check = corners(problem, 0)

        with self.assertRaises(NonFiniteObjectiveError):
            msvd(problem, 0, check)


class TestGsvd(unittest.TestCase):

    def test_cone_is_separable(self):
        problem = make_problem(lambda x: float(np.sqrt(x[0] ** 2 + x[1] ** 2)), n=2)
        archive = midpoint_archive(problem)

        self.assertEqual(gsvd(problem, [0, 1], archive, 1e-4), [0, 1])
        self.assertGreaterEqual(problem.ledger.gsvd_stage, 6)

    def test_coupled_is_not(self):
        problem = make_problem(lambda x: float((x[0] - x[1]) ** 2), n=2)
        archive = midpoint_archive(problem)

        self.assertEqual(gsvd(problem, [0, 1], archive, 1e-4), [])

    def test_empty(self):
        problem = make_problem(n=2)
        self.assertEqual(gsvd(problem, [], midpoint_archive(problem), 1e-4), [])
        self.assertEqual(problem.ledger.total, 0)

    def test_minimum_at_lower_bound(self):
        # x0 sits at its lower bound; moving x1 up pushes the minimum further down
        problem = ObjectiveProblem(
            lambda x: float((x[0] + x[1] - 3.0) ** 2),
            [0.0, 0.0],
            [5.0, 5.0]
        )
        archive = midpoint_archive(problem)
        archive.c_arc[0] = [0.0, 4.0]
        archive.c_arc[1] = [4.0, 0.0]

        self.assertEqual(gsvd(problem, [0, 1], archive, 1e-4), [])

    def test_monotone_wrapper_at_bound_is_separable(self):
        problem = ObjectiveProblem(
            lambda x: float(np.sqrt(x[0] + x[1])),
            [0.5, 0.5],
            [5.0, 5.0]
        )
        archive = midpoint_archive(problem)
        archive.c_arc[0, 0] = 0.5
        archive.c_arc[1, 1] = 0.5

        self.assertEqual(gsvd(problem, [0, 1], archive, 1e-4), [0, 1])

    def test_rounding_noise_is_not_a_shift(self):
        # a drop of a few ulps at 1e8 is inside the rounding band of f(x)
        def objective(x):
            noise = 4e-8 if x[0] != 0.0 else 0.0
            return float(1e8 + x[0] ** 2 + x[1] ** 2 - noise)

        problem = make_problem(objective, n=2)
        archive = midpoint_archive(problem)
        x = archive.row(0)
        x[1] = problem.upper_bounds[1]

        self.assertLess(objective(x + [1e-4, 0.0]), objective(x))
        self.assertGreater(eps1_threshold((1e8, 1e8), 2), 4e-8)
        self.assertEqual(gsvd(problem, [0, 1], archive, 1e-4), [0, 1])


class TestRgdNvg(unittest.TestCase):

    def test_rgd_single_group(self):
        problem = make_problem(lambda x: float((x[0] - x[1]) ** 2), n=2)
        archive = midpoint_archive(problem)
        groups = [[0]]

        hits = rgd(problem, 1, groups, archive, 1e-4)

        self.assertEqual(hits, [[0]])
        self.assertIs(hits[0], groups[0])
        self.assertGreater(problem.ledger.nvg_stage, 0)

    def test_rgd_independent(self):
        problem = make_problem(n=2)
        self.assertEqual(rgd(problem, 1, [[0]], midpoint_archive(problem), 1e-4), [])

    def test_rgd_needs_groups(self):
        problem = make_problem(n=2)
        with self.assertRaises(ValueError):
            rgd(problem, 1, [], midpoint_archive(problem), 1e-4)

    def test_rgd_matches_single_group_tests(self):
        rng = np.random.default_rng(SEED)

        for _ in range(200):
            n_groups = int(rng.integers(1, 7))
            sizes = rng.integers(1, 3, n_groups)
            n = int(sizes.sum()) + 1
            v = n - 1
            groups = np.split(np.arange(n - 1), np.cumsum(sizes)[:-1])
            groups = [g.tolist() for g in groups]

            linked = rng.random(n_groups) < 0.4
            weights = np.zeros(n)
            for g, is_linked in zip(groups, linked):
                if is_linked:
                    members = rng.choice(g, size=int(rng.integers(1, len(g) + 1)), replace=False)
                    weights[members] = rng.uniform(0.5, 2.0, len(members))

            def objective(x, weights=weights, v=v):
                others = np.delete(x, v)
                return float((x[v] - weights @ x) ** 2 + others @ others)

            problem = make_problem(objective, n=n)
            archive = midpoint_archive(problem)

            hits = rgd(problem, v, groups, archive, 1e-4)
            expected = [g for g, is_linked in zip(groups, linked) if is_linked]
            one_by_one = [g for g in groups if rgd(problem, v, [g], archive, 1e-4)]

            self.assertEqual(hits, expected)
            self.assertEqual(hits, one_by_one)

    def test_nvg_two_pairs(self):
        problem = make_problem(
            lambda x: float((x[0] - x[1]) ** 2 + (x[2] - x[3]) ** 2),
            n=4
        )
        groups = nvg(problem, [0, 1, 2, 3], midpoint_archive(problem), 1e-4)

        self.assertEqual(groups, [[0, 1], [2, 3]])

    def test_nvg_schwefel(self):
        problem = make_problem(lambda x: float(np.sum(np.cumsum(x) ** 2)), n=4)
        groups = nvg(problem, [0, 1, 2, 3], midpoint_archive(problem), 1e-4)

        self.assertEqual(groups, [[0, 1, 2, 3]])

    def test_nvg_merges(self):
        # x2 links the groups {0} and {1}
        problem = make_problem(
            lambda x: float((x[2] - x[0]) ** 2 + (x[2] - x[1]) ** 2),
            n=3
        )
        groups = nvg(problem, [0, 1, 2], midpoint_archive(problem), 1e-4)

        self.assertEqual(groups, [[0, 1, 2]])

    def test_nvg_trivial(self):
        problem = make_problem(n=3)

        self.assertEqual(nvg(problem, [], midpoint_archive(problem), 1e-4), [])
        self.assertEqual(nvg(problem, [2], midpoint_archive(problem), 1e-4), [[2]])
        self.assertEqual(problem.ledger.total, 0)


class TestCsgDecompose(unittest.TestCase):

    def test_fig1(self):
        problem, truth = fig1_example()
        trace = []
        result, ledger = csg_decompose(problem, trace=trace)

        self.assertEqual(result, truth)
        self.assertIs(ledger, problem.ledger)
        self.assertEqual(ledger.additive_stage, 2 * 7 + 2)
        self.assertEqual(ledger.msvd_stage, 4 * 6)

        classes = {r["variable"]: r["cls"] for r in trace}
        self.assertEqual(classes[0], CLASS_ADDITIVE)
        self.assertEqual(classes[1], CLASS_MULTIPLICATIVE)
        self.assertEqual(classes[2], CLASS_MULTIPLICATIVE)
        self.assertEqual(classes[3], CLASS_COMPOSITE)
        self.assertEqual(classes[4], CLASS_COMPOSITE)
        self.assertEqual(classes[5], CLASS_NONSEPARABLE)
        self.assertEqual(classes[6], CLASS_NONSEPARABLE)
        self.assertEqual([r["variable"] for r in trace], list(reversed(range(7))))

    def test_fig1_shrinking_gsvd(self):
        # The last member of a group checked has no partner left to move
        problem, _ = fig1_example()
        result, _ = csg_decompose(problem, CsgConfig(gsvd_shrinking=True))

        self.assertEqual(result.s3, [3, 4, 5])
        self.assertEqual(result.nonseparable_groups, [[6]])

    def test_fig1_seeded_nvg(self):
        problem, truth = fig1_example()
        result, _ = csg_decompose(problem, CsgConfig(nvg_seed=SEED))

        self.assertEqual(result, truth)

    def test_sum_of_squares(self):
        problem = make_problem(n=10)
        result, ledger = csg_decompose(problem)

        self.assertEqual(result.s1, list(range(10)))
        self.assertEqual(ledger.total, 22)
        self.assertEqual(ledger.gss_stage, 0)

    def test_product(self):
        problem = ObjectiveProblem(lambda x: float(np.prod(1.0 + x ** 2)), [-3.0] * 5, [4.0] * 5)
        result, ledger = csg_decompose(problem)

        self.assertEqual(result.s2, list(range(5)))
        self.assertEqual(ledger.msvd_stage, 20)
        self.assertEqual(ledger.gss_stage, 0)

    def test_cone_needs_asymmetric_box(self):
        problem = ObjectiveProblem(
            lambda x: float(np.sqrt(np.sum(x ** 2))),
            [-3.0] * 4,
            [5.0] * 4
        )
        result, ledger = csg_decompose(problem)

        self.assertEqual(result.s3, [0, 1, 2, 3])
        self.assertGreaterEqual(ledger.gsvd_stage, 12)

    def test_non_finite(self):
        problem = make_problem(lambda x: np.nan, n=3)

        with self.assertRaises(NonFiniteObjectiveError):
            csg_decompose(problem)

    def test_invalid_config(self):
        with self.assertRaises(ValueError):
            csg_decompose(make_problem(n=3), CsgConfig(alpha=2.0))

    def test_partition_on_random_problems(self):
        rng = np.random.default_rng(SEED)

        for _ in range(1000):
            problem = random_mixed_problem(rng)
            result, _ = csg_decompose(problem)

            self.assertIsInstance(result, GroupingResult)
            self.assertTrue(result.validate(problem.dimension))

    def test_deterministic(self):
        rng = np.random.default_rng(SEED + 1)

        for _ in range(20):
            problem = random_mixed_problem(rng)
            a, ledger_a = csg_decompose(problem.with_ledger())
            b, ledger_b = csg_decompose(problem.with_ledger())

            self.assertEqual(a, b)
            self.assertEqual(ledger_a.to_dict(), ledger_b.to_dict())


class TestFeModel(unittest.TestCase):

    def test_full_scale_f1(self):
        model = detection_fe_model(1000, 500, 500)

        self.assertEqual(model["additive_stage"], 2002)
        self.assertEqual(model["msvd_stage"], 2000)
        self.assertEqual(model["gss_stage"], 0)
        self.assertEqual(model["gsvd_stage"], 0)

    def test_searched_variables(self):
        model = detection_fe_model(100, 25, 25, gss_evaluations=10)

        self.assertEqual(model["msvd_stage"], 300)
        self.assertEqual(model["gss_stage"], 500)
        self.assertEqual(model["gsvd_stage"], 150)

        self.assertEqual(detection_fe_model(10, 0, 0)["gss_stage"], 410)

    def test_bad_counts(self):
        with self.assertRaises(ValueError):
            detection_fe_model(10, 6, 5)


if __name__ == "__main__":
    unittest.main()
