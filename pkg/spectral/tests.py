import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate
from scipy.special import erfc

from ensembles.classes import CLASS_LABELS
from ensembles.montecarlo import run_estimator
from ensembles.sampling import EnsembleSpec, sample_h
from superrmt.errors import UnsupportedClassError, UsageError
from .density import dos_estimate, semicircle_density, spectral_symmetry_residual
from .generating import (
    SourceMatrix,
    classc_limit_closed_form,
    ratio_kernel,
    resolvent_from_z,
    scaled_sources,
    z_gen_mc,
    z_gen_quadrature,
)


class SemicircleTest(SimpleTestCase):
    def test_values(self):
        self.assertAlmostEqual(semicircle_density(0.0, 10, 2.0), 10 / (2 * math.pi))
        self.assertEqual(semicircle_density(4.0, 10, 2.0), 0.0)
        self.assertEqual(semicircle_density(-4.0, 10, 2.0), 0.0)
        self.assertEqual(semicircle_density(7.0, 10, 2.0), 0.0)
        self.assertAlmostEqual(semicircle_density(1.0, 5, 1.0), 5 / math.pi * math.sqrt(3) / 2)

    def test_vectorized(self):
        rho = semicircle_density(np.array([-1.0, 0.0, 1.0]), 3, 1.0)
        self.assertEqual(rho.shape, (3,))
        self.assertAlmostEqual(rho[0], rho[2])

    def test_normalized_to_level_count(self):
        value, _ = integrate.quad(lambda e: semicircle_density(e, 7, 1.5), -3.0, 3.0)
        self.assertAlmostEqual(value, 7.0, places=6)


class DensityOfStatesTest(SimpleTestCase):
    def test_class_a_follows_semicircle(self):
        spec = EnsembleSpec("A", 40, seed=3)
        hist = dos_estimate(spec, 400, bins=30, energy_range=(-2.5, 2.5))
        self.assertAlmostEqual(hist.total(), 40.0, places=8)
        deviation = hist.deviation_from(lambda e: semicircle_density(e, 40, 1.0), window=1.5)
        self.assertLess(deviation, 0.08)
        self.assertEqual(hist.spec["seed"], 3)
        self.assertEqual(len(hist.rows()), 30)

    def test_class_c_symmetric(self):
        spec = EnsembleSpec("C", 3, seed=4)
        hist = dos_estimate(spec, 200, bins=20, energy_range=(-3.0, 3.0))
        mirrored = hist.density[::-1]
        bound = 3 * np.hypot(hist.stderr, hist.stderr[::-1]) + 1e-12
        self.assertTrue(np.all(np.abs(hist.density - mirrored) <= bound))

    def test_too_few_samples(self):
        with self.assertRaises(UsageError):
            dos_estimate(EnsembleSpec("A", 2), 10)

    def test_symmetry_residual(self):
        self.assertEqual(spectral_symmetry_residual([-2.0, -0.5, 0.5, 2.0]), 0.0)
        self.assertAlmostEqual(spectral_symmetry_residual([-1.0, 0.0, 2.0]), 1.0)


class SourceMatrixTest(SimpleTestCase):
    def test_real_alpha_rejected(self):
        with self.assertRaises(UsageError):
            SourceMatrix([0.5], [0.1]).validate("A")

    def test_particle_hole_half_plane(self):
        SourceMatrix([-1j], [0.2]).validate("C")
        with self.assertRaises(UsageError):
            SourceMatrix([1j], [0.2]).validate("C")

    def test_wigner_dyson_ordering(self):
        src = SourceMatrix([-1j, 1j], [0, 0]).validate("A")
        self.assertEqual((src.n_advanced, src.n_retarded), (1, 1))
        with self.assertRaises(UsageError):
            SourceMatrix([1j, -1j], [0, 0]).validate("A")

    def test_length_mismatch(self):
        with self.assertRaises(UsageError):
            SourceMatrix([-1j], [0, 1])

    def test_omega_layout(self):
        src = SourceMatrix([-1j], [0.5])
        np.testing.assert_array_equal(np.diag(src.omega("C")), [-1j, 1j, 0.5, -0.5])
        np.testing.assert_array_equal(np.diag(src.omega("A")), [-1j, 0.5])
        self.assertEqual(src.omega("DIII").shape, (8, 8))


class GeneratingFunctionTest(SimpleTestCase):
    def test_equal_sources_give_one(self):
        for label in CLASS_LABELS:
            src = SourceMatrix([-0.7j], [-0.7j])
            estimate, stderr = z_gen_mc(EnsembleSpec(label, 2, seed=1), src, 20)
            self.assertEqual(estimate, 1, label)
            self.assertEqual(stderr, 0.0, label)

    def test_class_c_sign_reversal(self):
        spec = EnsembleSpec("C", 3)
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = sample_h(spec, rng)
            left = ratio_kernel([0.3 - 0.4j], [0.2], h)
            right = ratio_kernel([-0.3 + 0.4j], [-0.2], h)
            self.assertAlmostEqual(left, right, places=10)

    def test_class_a_breaks_sign_reversal(self):
        spec = EnsembleSpec("A", 3)
        h = sample_h(spec, np.random.default_rng(6))
        left = ratio_kernel([0.3 - 0.4j], [0.2], h)
        right = ratio_kernel([-0.3 + 0.4j], [-0.2], h)
        self.assertGreater(abs(left - right), 1e-6)

    def test_quadrature_equal_sources(self):
        for label in ("A", "C"):
            value = z_gen_quadrature(EnsembleSpec(label, 1, v=1.3), SourceMatrix([0.2 - 1j], [0.2 - 1j]))
            self.assertAlmostEqual(value, 1, places=10)

    def test_quadrature_class_a_golden(self):
        value = z_gen_quadrature(EnsembleSpec("A", 1), SourceMatrix([-1j], [0]))
        expected = 1 - math.sqrt(math.pi / 2) * math.exp(0.5) * erfc(1 / math.sqrt(2))
        self.assertAlmostEqual(value, expected, places=8)

    def test_quadrature_class_c_golden(self):
        value = z_gen_quadrature(EnsembleSpec("C", 1), SourceMatrix([-1j], [0]))
        expected = 2 * math.sqrt(math.pi) * math.e * erfc(1) - 1
        self.assertAlmostEqual(value, expected, places=8)

    def test_quadrature_guards(self):
        with self.assertRaises(UsageError):
            z_gen_quadrature(EnsembleSpec("A", 2), SourceMatrix([-1j], [0]))
        with self.assertRaises(UnsupportedClassError):
            z_gen_quadrature(EnsembleSpec("D", 1), SourceMatrix([-1j], [0]))

    def test_monte_carlo_matches_quadrature(self):
        spec = EnsembleSpec("C", 1)
        src = SourceMatrix([0.2 - 0.8j], [0.5])
        exact = z_gen_quadrature(spec, src)
        estimate, stderr = z_gen_mc(spec, src, 4000, rng=21)
        self.assertLessEqual(abs(estimate.real - exact.real), 4 * stderr)
        self.assertLessEqual(abs(estimate.imag - exact.imag), 4 * stderr)

    def test_sign_reversal_in_mean(self):
        spec = EnsembleSpec("C", 2)
        plain = run_estimator(spec, lambda h: ratio_kernel([-0.5j], [0.3], h), 300, rng=8)
        flipped = run_estimator(spec, lambda h: ratio_kernel([0.5j], [-0.3], h), 300, rng=8)
        self.assertAlmostEqual(plain.mean(), flipped.mean(), places=10)

    def test_resolvent(self):
        spec = EnsembleSpec("A", 1)
        z = 0.3 - 0.5j
        weight = lambda h: math.exp(-h * h / 2) / math.sqrt(2 * math.pi)
        re, _ = integrate.quad(lambda h: weight(h) * (1 / (h - z)).real, -np.inf, np.inf)
        im, _ = integrate.quad(lambda h: weight(h) * (1 / (h - z)).imag, -np.inf, np.inf)
        self.assertLess(abs(resolvent_from_z(spec, z) - complex(re, im)), 1e-6)


class LargeNLimitTest(SimpleTestCase):
    def test_equal_sources(self):
        for x in (0.0, 0.37, -1.2):
            self.assertAlmostEqual(classc_limit_closed_form(x - 0.1j, x - 0.1j), 1, places=12)

    def test_matches_two_term_form(self):
        a, b = -0.3j, 0.25
        two_term = ((a + b) * np.exp(-2j * np.pi * (a - b)) - (a - b) * np.exp(-2j * np.pi * (a + b))) / (2 * b)
        self.assertAlmostEqual(classc_limit_closed_form(a, b), complex(two_term), places=12)

    def test_even_in_beta(self):
        self.assertAlmostEqual(classc_limit_closed_form(-0.3j, 0.4), classc_limit_closed_form(-0.3j, -0.4),
                               places=12)

    def test_regular_at_zero_beta(self):
        self.assertAlmostEqual(classc_limit_closed_form(-0.3j, 0.0), classc_limit_closed_form(-0.3j, 1e-9),
                               places=7)

    def test_level_density(self):
        x, step = 0.3, 1e-5
        derivative = (classc_limit_closed_form(x + step, x) - classc_limit_closed_form(x - step, x)) / (2 * step)
        rho = -derivative.imag / math.pi
        self.assertAlmostEqual(rho, 2 * (1 - math.sin(4 * math.pi * x) / (4 * math.pi * x)), places=6)

    def test_scaled_sources(self):
        src = scaled_sources(EnsembleSpec("C", 4, v=2.0), SourceMatrix([-1j], [0.5]))
        self.assertAlmostEqual(src.alphas[0], -1j * math.pi / 2)
        self.assertAlmostEqual(src.betas[0], math.pi / 4)
