import math
from itertools import combinations

import numpy as np
from django.test import SimpleTestCase

from spinlab.exact import (
    FunctionTable,
    block_variance_sum,
    enumerate_states,
    expected_block_variance,
    local_variance_sum,
    marginal,
    tv_distance,
    var_s,
    var_s_tau,
    variance,
    variance_decomposition_check,
)
from spinlab.exceptions import CapExceededError, InfeasibleError, UsageError
from spinlab.graphs import components, generate
from spinlab.levels import down_operator, level_distribution, up_operator
from spinlab.systems import NO_PINNING, Pinning, coloring_system, hardcore_system

from .helpers import cycle, empty, k2, path, single


def indicator(space, v, spin=1):
    return FunctionTable.from_callable(space, lambda row: float(row[v] == spin))


class EnumerationTests(SimpleTestCase):
    def test_k2_states_in_lex_order(self):
        space = enumerate_states(hardcore_system(k2(), 1.0))
        self.assertEqual(space.states.tolist(), [[0, 0], [0, 1], [1, 0]])
        self.assertAlmostEqual(space.z, 3.0)
        np.testing.assert_allclose(space.probabilities, [1 / 3] * 3)

    def test_partition_functions(self):
        self.assertAlmostEqual(enumerate_states(hardcore_system(path(3), 1.0)).z, 5.0)
        self.assertAlmostEqual(enumerate_states(hardcore_system(cycle(4), 1.0)).z, 7.0)
        self.assertAlmostEqual(enumerate_states(hardcore_system(cycle(5), 1.0)).z, 11.0)
        self.assertAlmostEqual(enumerate_states(hardcore_system(cycle(6), 1.0)).z, 18.0)
        self.assertAlmostEqual(enumerate_states(hardcore_system(single(), 2.0)).z, 3.0)
        triangle = enumerate_states(coloring_system(cycle(3), 3))
        self.assertEqual(triangle.size, 6)
        self.assertAlmostEqual(triangle.log_z, math.log(6))

    def test_probabilities_normalized(self):
        space = enumerate_states(hardcore_system(generate("grid", {"rows": 3, "cols": 3}), 0.7))
        self.assertAlmostEqual(space.probabilities.sum(), 1.0)
        np.testing.assert_allclose(space.marginals().sum(axis=1), 1.0)

    def test_index_of(self):
        space = enumerate_states(hardcore_system(k2(), 1.0))
        self.assertEqual(space.index_of((1, 0)), 2)
        with self.assertRaises(InfeasibleError):
            space.index_of((1, 1))

    def test_cap(self):
        with self.assertRaises(CapExceededError):
            enumerate_states(coloring_system(empty(10), 3), cap=100)

    def test_no_feasible_state(self):
        with self.assertRaises(InfeasibleError):
            enumerate_states(coloring_system(cycle(3), 2))

    def test_pinned_enumeration_matches_conditioning(self):
        system = hardcore_system(cycle(5), 1.3)
        pinning = Pinning(((0, 0), (2, 1)))
        pinned = enumerate_states(system, pinning)
        conditioned = enumerate_states(system).condition(pinning)
        np.testing.assert_array_equal(pinned.states, conditioned.states)
        np.testing.assert_allclose(pinned.probabilities, conditioned.probabilities)


class MarginalTests(SimpleTestCase):
    def test_values(self):
        self.assertAlmostEqual(marginal(hardcore_system(k2(), 1.0), NO_PINNING, 0, 1), 1 / 3)
        self.assertAlmostEqual(marginal(hardcore_system(single(), 2.0), NO_PINNING, 0, 1), 2 / 3)
        self.assertAlmostEqual(marginal(hardcore_system(cycle(5), 1.0), NO_PINNING, 0, 1), 3 / 11)

    def test_occupied_neighbour_blocks_vertex(self):
        system = hardcore_system(k2(), 1.0)
        self.assertEqual(marginal(system, Pinning(((1, 1),)), 0, 1), 0.0)
        self.assertAlmostEqual(marginal(system, Pinning(((1, 0),)), 0, 1), 0.5)

    def test_pinned_vertex_rejected(self):
        with self.assertRaises(UsageError):
            marginal(hardcore_system(k2(), 1.0), Pinning(((0, 0),)), 0, 1)

    def test_infeasible_pinning(self):
        with self.assertRaises(InfeasibleError):
            marginal(coloring_system(path(3), 2), Pinning(((0, 0), (2, 1))), 1, 0)


class VarianceTests(SimpleTestCase):
    def setUp(self):
        self.space = enumerate_states(hardcore_system(k2(), 1.0))
        self.f = indicator(self.space, 0)

    def test_var_s_tau(self):
        self.assertAlmostEqual(var_s_tau(self.f, {0}, Pinning(((1, 0),))), 0.25)
        self.assertAlmostEqual(var_s_tau(self.f, {0}, Pinning(((1, 1),))), 0.0)
        with self.assertRaises(UsageError):
            var_s_tau(self.f, {0}, NO_PINNING)

    def test_var_s(self):
        self.assertAlmostEqual(var_s(self.f, {0}), 1 / 6)
        self.assertAlmostEqual(var_s(self.f, {0, 1}), variance(self.f))
        self.assertAlmostEqual(variance(self.f), 2 / 9)

    def test_constant_function_has_no_variance(self):
        f = FunctionTable.constant(self.space, 4.0)
        self.assertAlmostEqual(variance(f), 0.0)
        self.assertAlmostEqual(var_s(f, {1}), 0.0)

    def test_table_shape_checked(self):
        with self.assertRaises(UsageError):
            FunctionTable(self.space, np.zeros(4))

    def test_total_variance_dominates_block_variance(self):
        rng = np.random.default_rng(11)
        space = enumerate_states(hardcore_system(cycle(5), 1.0))
        for _ in range(20):
            f = FunctionTable.random(space, rng)
            size = int(rng.integers(1, 6))
            S = rng.choice(5, size=size, replace=False).tolist()
            self.assertLessEqual(var_s(f, S), variance(f) + 1e-12)

    def test_block_variance_factorizes_over_components(self):
        rng = np.random.default_rng(5)
        g = path(5)
        space = enumerate_states(hardcore_system(g, 1.0))
        for _ in range(30):
            f = FunctionTable.random(space, rng)
            S = sorted(rng.choice(5, size=int(rng.integers(1, 5)), replace=False).tolist())
            row = space.states[rng.choice(space.size, p=space.probabilities)]
            tau = Pinning(tuple((v, int(row[v])) for v in range(5) if v not in S))
            lhs = var_s_tau(f, S, tau)
            rhs = block_variance_sum(f, components(g, S), tau)
            self.assertLessEqual(lhs, rhs + 1e-10)

    def test_single_vertex_blocks(self):
        rng = np.random.default_rng(2)
        space = enumerate_states(hardcore_system(path(4), 1.0))
        f = FunctionTable.random(space, rng)
        self.assertAlmostEqual(
            local_variance_sum(f, [0, 2]),
            expected_block_variance(f, [0]) + expected_block_variance(f, [2]),
        )
        with self.assertRaises(UsageError):
            expected_block_variance(f, [0], Pinning(((0, 0),)))


class DecompositionTests(SimpleTestCase):
    def test_identity_on_k2(self):
        space = enumerate_states(hardcore_system(k2(), 1.0))
        rng = np.random.default_rng(0)
        for _ in range(10):
            f = FunctionTable.random(space, rng)
            self.assertLess(variance_decomposition_check(f, 1), 1e-10)
            self.assertLess(variance_decomposition_check(f, 2), 1e-10)

    def test_identity_on_small_instances(self):
        rng = np.random.default_rng(1)
        for system in (
            hardcore_system(path(3), 1.0),
            hardcore_system(cycle(4), 0.5),
            coloring_system(path(3), 3),
        ):
            space = enumerate_states(system)
            for ell in range(1, system.n + 1):
                f = FunctionTable.random(space, rng)
                self.assertLess(variance_decomposition_check(f, ell), 1e-10)

    def test_occupation_count_on_path(self):
        space = enumerate_states(hardcore_system(path(3), 1.0))
        f = FunctionTable.from_callable(space, lambda row: float(row.sum()))
        self.assertLess(variance_decomposition_check(f, 2), 1e-10)

    def test_constant_function(self):
        space = enumerate_states(hardcore_system(path(3), 1.0))
        self.assertLess(variance_decomposition_check(FunctionTable.constant(space), 1), 1e-12)

    def test_bad_level(self):
        space = enumerate_states(hardcore_system(k2(), 1.0))
        with self.assertRaises(UsageError):
            variance_decomposition_check(FunctionTable.constant(space), 0)


class LevelTests(SimpleTestCase):
    def setUp(self):
        self.space = enumerate_states(hardcore_system(k2(), 1.0))

    def test_level_one_masses(self):
        level = level_distribution(self.space, 1)
        self.assertEqual(level.subsets, (((0, 0),), ((0, 1),), ((1, 0),), ((1, 1),)))
        np.testing.assert_allclose(level.masses, [1 / 3, 1 / 6, 1 / 3, 1 / 6])

    def test_top_level_is_the_gibbs_law(self):
        level = level_distribution(self.space, 2)
        np.testing.assert_allclose(level.masses, self.space.probabilities)
        values = np.array([3.0, -1.0, 2.0])
        np.testing.assert_allclose(level.up(values), values)

    def test_level_zero(self):
        level = level_distribution(self.space, 0)
        self.assertEqual(level.subsets, ((),))
        values = np.array([3.0, 0.0, 6.0])
        np.testing.assert_allclose(level.up(values), [3.0])

    def test_operators_are_stochastic(self):
        space = enumerate_states(hardcore_system(path(3), 1.0))
        for r, s in combinations(range(4), 2):
            lower, upper = level_distribution(space, r), level_distribution(space, s)
            np.testing.assert_allclose(down_operator(lower, upper).sum(axis=1), 1.0)
            np.testing.assert_allclose(up_operator(lower, upper).sum(axis=1), 1.0)

    def test_level_cap(self):
        with self.assertRaises(CapExceededError):
            level_distribution(enumerate_states(hardcore_system(path(6), 1.0)), 3, cap=50)


class TVDistanceTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(tv_distance([1, 0], [0, 1]), 1.0)
        self.assertEqual(tv_distance([0.5, 0.5], [0.5, 0.5]), 0.0)
        self.assertAlmostEqual(tv_distance([0.5, 0.5, 0], [0.25, 0.25, 0.5]), 0.5)
        with self.assertRaises(UsageError):
            tv_distance([1.0], [0.5, 0.5])
