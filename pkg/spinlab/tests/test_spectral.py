import math

import numpy as np
from django.test import SimpleTestCase

from spinlab.bounds import alo_gap_bound, kappa_rs, matching_si_constants, mixing_relations
from spinlab.exact import FunctionTable, enumerate_states, local_variance_sum, var_s_tau
from spinlab.exceptions import CapExceededError, UsageError
from spinlab.graphs import max_degree
from spinlab.spectral import (
    IMAGINARY_TOLERANCE,
    down_up_matrix,
    fit_constants,
    glauber_matrix,
    glauber_spectrum,
    influence_matrix,
    local_spectral_profile,
    local_walk_second_eigenvalue,
    mixing_time,
    reversibility_residual,
    si_profile,
    spectral_gap,
    tensorization_constant,
    tv_decay,
    variance_contraction_check,
)
from spinlab.systems import Pinning, coloring_system, hardcore_system, monomer_dimer_system

from .helpers import cycle, empty, k2, path, single, star

K2_KERNEL = [[0.5, 0.25, 0.25], [0.25, 0.75, 0.0], [0.25, 0.0, 0.75]]


def small_suite():
    for g in (path(3), path(4), cycle(4), cycle(5), star(3)):
        for lam in (0.3, 1.0, 2.0):
            yield hardcore_system(g, lam)
    yield coloring_system(path(3), 4)
    yield coloring_system(cycle(4), 4)


class GlauberKernelTests(SimpleTestCase):
    def test_k2_kernel(self):
        np.testing.assert_allclose(glauber_matrix(hardcore_system(k2(), 1.0)), K2_KERNEL, atol=1e-12)

    def test_k2_spectrum(self):
        report = glauber_spectrum(hardcore_system(k2(), 1.0))
        np.testing.assert_allclose(report.eigenvalues, [1.0, 0.75, 0.25], atol=1e-12)
        self.assertAlmostEqual(report.gap, 0.25)
        self.assertAlmostEqual(report.relaxation_time, 4.0)
        self.assertFalse(report.reducible)

    def test_single_vertex(self):
        np.testing.assert_allclose(glauber_matrix(hardcore_system(single(), 1.0)), [[0.5, 0.5], [0.5, 0.5]])
        self.assertAlmostEqual(glauber_spectrum(hardcore_system(single(), 1.0)).gap, 1.0)

    def test_product_measure_gap(self):
        self.assertAlmostEqual(glauber_spectrum(hardcore_system(empty(2), 1.0)).gap, 0.5)
        self.assertAlmostEqual(glauber_spectrum(hardcore_system(empty(3), 1.0)).gap, 1 / 3)

    def test_kernels_are_stochastic_and_reversible(self):
        for system in small_suite():
            space = enumerate_states(system)
            P = glauber_matrix(system)
            np.testing.assert_allclose(P.sum(axis=1), 1.0)
            self.assertLess(reversibility_residual(P, space.probabilities), 1e-12)
            np.testing.assert_allclose(space.probabilities @ P, space.probabilities, atol=1e-12)

    def test_pinned_kernel(self):
        system = hardcore_system(path(3), 1.0)
        P = glauber_matrix(system, Pinning(((1, 0),)))
        self.assertEqual(P.shape, (4, 4))
        self.assertAlmostEqual(glauber_spectrum(system, Pinning(((1, 0),))).gap, 0.5)

    def test_two_colourings_of_an_edge_are_frozen(self):
        report = glauber_spectrum(coloring_system(k2(), 2))
        self.assertTrue(report.reducible)
        self.assertEqual(report.diagnosis["communicating_classes"], 2)
        self.assertTrue(math.isinf(tensorization_constant(coloring_system(k2(), 2)).constant))

    def test_matrix_cap(self):
        with self.settings(SPINLAB={"MATRIX_CAP": 10}):
            with self.assertRaises(CapExceededError):
                glauber_matrix(hardcore_system(path(6), 1.0))

    def test_spectral_gap_shape_check(self):
        with self.assertRaises(UsageError):
            spectral_gap(np.eye(2), np.array([1.0]))


class InfluenceTests(SimpleTestCase):
    def test_k2_blocks(self):
        psi = influence_matrix(hardcore_system(k2(), 1.0))
        self.assertEqual(psi.index, [(0, 0), (0, 1), (1, 0), (1, 1)])
        np.testing.assert_allclose(psi.entries[:2, :2], 0.0)
        np.testing.assert_allclose(psi.entries[:2, 2:], [[-1 / 6, 1 / 6], [1 / 3, -1 / 3]], atol=1e-12)
        self.assertAlmostEqual(psi.lambda_max(), 0.5)

    def test_rows_sum_to_zero_per_target_vertex(self):
        system = hardcore_system(cycle(5), 1.7)
        psi = influence_matrix(system, Pinning(((0, 0),)))
        targets = np.array([v for v, _ in psi.index])
        for v in set(targets.tolist()):
            np.testing.assert_allclose(psi.entries[:, targets == v].sum(axis=1), 0.0, atol=1e-12)

    def test_product_measure_has_no_influence(self):
        psi = influence_matrix(hardcore_system(empty(3), 2.0))
        np.testing.assert_allclose(psi.entries, 0.0, atol=1e-12)

    def test_zero_marginal_pairs_are_dropped(self):
        psi = influence_matrix(hardcore_system(path(4), 1.0), Pinning(((0, 1),)))
        self.assertNotIn((1, 1), psi.index)

    def test_pinning_size_limit(self):
        with self.assertRaises(UsageError):
            influence_matrix(hardcore_system(path(3), 1.0), Pinning(((0, 0), (1, 0))))


class SpectralIndependenceTests(SimpleTestCase):
    def test_k2_profile(self):
        profile = si_profile(hardcore_system(k2(), 1.0))
        self.assertEqual(len(profile.etas), 1)
        self.assertAlmostEqual(profile.etas[0], 0.5)
        self.assertAlmostEqual(profile.fitted_C, 0.5)
        self.assertAlmostEqual(profile.fitted_eta, 0.5)
        self.assertEqual(profile.mode, "exhaustive")

    def test_hardcore_profile_is_bounded(self):
        lam = 0.5
        profile = si_profile(hardcore_system(cycle(4), lam))
        for k, eta in enumerate(profile.etas):
            self.assertLessEqual(eta, lam / (1 + lam) * (4 - k - 1) + 1e-9)

    def test_sampled_mode_is_a_lower_estimate(self):
        system = hardcore_system(cycle(5), 1.0)
        exhaustive = si_profile(system, "exhaustive")
        sampled = si_profile(system, "sampled", samples=40, seed=1)
        self.assertEqual(sampled.mode, "sampled")
        for full, seen in zip(exhaustive.etas, sampled.etas):
            if not math.isnan(seen):
                self.assertLessEqual(seen, full + 1e-12)

    def test_influence_spectra_are_real(self):
        for system in small_suite():
            profile = si_profile(system)
            self.assertLessEqual(profile.max_imaginary, IMAGINARY_TOLERANCE)
            self.assertEqual(profile.to_dict()["max_imaginary"], profile.max_imaginary)

    def test_matching_profile_respects_the_degree_bound(self):
        for g in (path(5), cycle(5), cycle(6), star(4)):
            system, _ = monomer_dimer_system(g, 1.0)
            bound = matching_si_constants(max_degree(g))["C"]
            for eta in si_profile(system, "exhaustive").etas:
                self.assertLessEqual(eta, bound + 1e-9, g)

    def test_fit_constants(self):
        self.assertEqual(fit_constants([0.6, 0.2], 3), (0.6, 0.3))
        self.assertEqual(fit_constants([-0.1, math.nan], 3), (0.0, 0.0))

    def test_alo_bound_never_exceeds_the_gap(self):
        for system in small_suite():
            gap = glauber_spectrum(system).gap
            profile = si_profile(system)
            self.assertGreaterEqual(gap, alo_gap_bound(profile.etas) - 1e-9, system)

    def test_local_walk(self):
        self.assertAlmostEqual(local_walk_second_eigenvalue(hardcore_system(k2(), 1.0)), 0.5)
        self.assertLess(abs(local_walk_second_eigenvalue(hardcore_system(empty(3), 1.0))), 1e-10)

    def test_local_profile_on_k2(self):
        profile = local_spectral_profile(hardcore_system(k2(), 1.0))
        self.assertAlmostEqual(profile.zetas[0], 0.5)
        self.assertAlmostEqual(profile.scaled_etas[0], 0.5)
        self.assertEqual(profile.flagged, 0)


class DownUpKernelTests(SimpleTestCase):
    def test_top_walk_is_glauber(self):
        for system in (hardcore_system(k2(), 1.0), hardcore_system(path(3), 0.8), coloring_system(path(3), 3)):
            kernel = down_up_matrix(system, system.n, system.n - 1)
            np.testing.assert_allclose(kernel.kernel, glauber_matrix(system), atol=1e-12)

    def test_identity_and_full_refresh(self):
        system = hardcore_system(path(3), 1.0)
        self.assertAlmostEqual(down_up_matrix(system, 2, 2).spectrum.gap, 0.0)
        self.assertAlmostEqual(down_up_matrix(system, 3, 0).spectrum.gap, 1.0)

    def test_product_measure(self):
        kernel = down_up_matrix(hardcore_system(empty(2), 1.0), 2, 1)
        self.assertAlmostEqual(kernel.spectrum.gap, 0.5)

    def test_contraction_rate_on_k2_is_exact(self):
        system = hardcore_system(k2(), 1.0)
        profile = si_profile(system)
        kappa = kappa_rs(2, 1, 2, profile.fitted_C, profile.fitted_eta)
        self.assertAlmostEqual(kappa, 0.25)
        self.assertAlmostEqual(down_up_matrix(system, 2, 1).spectrum.gap, kappa)

    def test_kappa_lower_bounds_small_walks(self):
        for system in (hardcore_system(k2(), 1.0), hardcore_system(path(3), 1.0), hardcore_system(empty(3), 1.0)):
            profile = si_profile(system)
            n = system.n
            for s in range(1, n + 1):
                for r in range(s):
                    gap = down_up_matrix(system, s, r).spectrum.gap
                    kappa = kappa_rs(n, r, s, profile.fitted_C, profile.fitted_eta)
                    self.assertGreaterEqual(gap, kappa - 1e-9, (system, s, r))

    def test_variance_contraction(self):
        system = hardcore_system(k2(), 1.0)
        rng = np.random.default_rng(4)
        for _ in range(20):
            f = rng.standard_normal(3)
            self.assertLessEqual(variance_contraction_check(system, 2, 1, f), 0.75 + 1e-9)

    def test_level_vertex_limit(self):
        with self.assertRaises(CapExceededError):
            down_up_matrix(hardcore_system(path(7), 1.0), 7, 6)


class TensorizationTests(SimpleTestCase):
    def test_k2(self):
        report = tensorization_constant(hardcore_system(k2(), 1.0), trials=50)
        self.assertAlmostEqual(report.constant, 2.0)
        self.assertLess(abs(report.searched - 2.0), 0.02)

    def test_product_measure_tensorizes_exactly(self):
        report = tensorization_constant(hardcore_system(empty(3), 1.0), trials=50)
        self.assertAlmostEqual(report.constant, 1.0)
        self.assertLess(abs(report.searched - 1.0), 0.01)

    def test_search_approaches_the_constant(self):
        for system in (hardcore_system(path(3), 1.0), hardcore_system(cycle(4), 1.0)):
            report = tensorization_constant(system, trials=100, seed=3)
            self.assertLessEqual(report.searched, report.constant * (1 + 1e-9))
            self.assertGreaterEqual(report.searched, report.constant * 0.99)


class TotalVariationTests(SimpleTestCase):
    def setUp(self):
        self.P = np.array(K2_KERNEL)
        self.mu = np.full(3, 1 / 3)

    def test_decay_from_each_start(self):
        decay = tv_decay(self.P, self.mu, 20)
        self.assertEqual(len(decay.tv), 21)
        self.assertAlmostEqual(decay.tv[0], 2 / 3)
        self.assertTrue(all(b <= a + 1e-15 for a, b in zip(decay.tv, decay.tv[1:])))

    def test_mixing_time_is_consistent_with_decay(self):
        t = mixing_time(self.P, self.mu, 0.01)
        decay = tv_decay(self.P, self.mu, t)
        self.assertLessEqual(decay.tv[t], 0.01)
        self.assertGreater(decay.tv[t - 1], 0.01)
        # (tau_rel - 1) log(1 / (2 eps)) with tau_rel = 4
        self.assertGreaterEqual(t, 3 * math.log(50))

    def test_never_mixing_chain(self):
        self.assertIsNone(mixing_time(np.eye(2), np.array([0.5, 0.5]), 0.1, max_steps=50))

    def test_single_start_mixes(self):
        space = enumerate_states(hardcore_system(path(3), 1.0))
        P = glauber_matrix(hardcore_system(path(3), 1.0))
        self.assertIsNotNone(mixing_time(P, space.probabilities, 0.5, start=0, max_steps=1000))
        with self.assertRaises(UsageError):
            tv_decay(P, space.probabilities, 3, start=99)


class LocalFactorizationTests(SimpleTestCase):
    def test_block_variance_is_bounded_by_single_site_variances(self):
        rng = np.random.default_rng(17)
        for system in (
            hardcore_system(path(4), 0.3),
            hardcore_system(cycle(5), 0.3),
            hardcore_system(star(3), 1.0),
        ):
            space = enumerate_states(system)
            profile = si_profile(system, "exhaustive")
            C, eta = profile.fitted_C, profile.fitted_eta
            self.assertLess(eta, 1.0)
            for _ in range(200):
                U = [v for v in range(system.n) if rng.random() < 0.6] or [int(rng.integers(system.n))]
                row = space.states[rng.choice(space.size, p=space.probabilities)]
                tau = Pinning(tuple((v, int(row[v])) for v in range(system.n) if v not in U))
                f = FunctionTable.random(space, rng)
                factor = len(U) ** (2 * C) / (1 - eta) ** (1 + 2 * C)
                self.assertLessEqual(
                    var_s_tau(f, U, tau),
                    factor * local_variance_sum(f, U, tau) + 1e-9,
                    (system, U, tau),
                )


class MixingRelationTests(SimpleTestCase):
    def test_relaxation_time_brackets_the_mixing_time(self):
        eps = 0.01
        for system in small_suite():
            space = enumerate_states(system)
            P = glauber_matrix(system)
            tau_rel = glauber_spectrum(system).relaxation_time
            relations = mixing_relations(tau_rel, eps, min_mu=float(space.probabilities.min()))
            t = math.ceil(relations.worst_bound)
            self.assertLessEqual(tv_decay(P, space.probabilities, t).tv[t], eps + 1e-12, system)
            self.assertGreaterEqual(mixing_time(P, space.probabilities, eps), relations.lower_bound - 1e-9, system)
