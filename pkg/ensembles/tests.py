import tempfile
from fractions import Fraction
from functools import partial
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from superrmt.errors import UnsupportedClassError, UsageError
from .classes import CLASS_LABELS, PARTICLE_HOLE_CLASSES, get_class
from .montecarlo import run_estimator
from .sampling import (
    EnsembleSpec,
    eigenvalues,
    export_matrices_csv,
    moment_kernel,
    sample_h,
    second_moment_exact,
    second_moment_mc,
    symmetry_residual,
)
from .structure import (
    I_SIGMA_Y,
    ONE_2,
    SIGMA_X,
    SIGMA_Z,
    class_structure,
    kron,
    normalizer_algebra,
    normalizer_dims,
    tangent_dimension,
)


def random_complex(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


class SymmetryClassTest(SimpleTestCase):
    def test_lookup(self):
        self.assertEqual(get_class("c").label, "C")
        self.assertIs(get_class(get_class("DIII")), get_class("DIII"))
        with self.assertRaises(UsageError):
            get_class("E7")

    def test_saddle_count(self):
        for label in CLASS_LABELS:
            expected = 2 if label in ("D", "DIII") else 1
            self.assertEqual(get_class(label).saddle_count, expected, label)

    def test_c_exponent(self):
        self.assertEqual(get_class("A").c_exponent, 1)
        self.assertEqual(get_class("C").c_exponent, Fraction(1, 2))
        self.assertEqual(get_class("CI").c_exponent, Fraction(1, 4))

    def test_rss_rows(self):
        self.assertEqual(get_class("C").rss, "DIII|CI")
        self.assertEqual(get_class("D").cartan_label, "BD")
        self.assertEqual(get_class("CI").rss_spaces, ("Osp(m|2n)", "D", "C"))
        self.assertEqual(get_class("AIII").rss_row, ("AIII", "chiral GUE", "A|A", "m = n"))


class ClassStructureTest(SimpleTestCase):
    def test_class_c_gamma(self):
        s = class_structure("C", 3, 1)
        np.testing.assert_array_equal(s.gamma[:2, :2], SIGMA_X)
        np.testing.assert_array_equal(s.gamma[2:, 2:], I_SIGMA_Y)
        np.testing.assert_array_equal(s.constraint("C").matrix, kron(I_SIGMA_Y, np.eye(3)))

    def test_consistency_identities(self):
        for label in CLASS_LABELS:
            for n in (1, 2):
                s = class_structure(label, 2, n)
                for name, value in s.consistency_residuals().items():
                    self.assertLess(value, 1e-12, f"{label} n={n}: {name}")

    def test_class_ci_gamma_tau(self):
        s = class_structure("CI", 1, 1)
        g, t = s.gamma, s.tau
        np.testing.assert_allclose(g @ g, s.sigma, atol=1e-14)
        np.testing.assert_allclose(t @ t, s.sigma, atol=1e-14)
        np.testing.assert_allclose(g @ t + t @ g, 0, atol=1e-14)

    def test_constraint_dimension_matches_tangent_space(self):
        for label in CLASS_LABELS:
            for N in (1, 2):
                s = class_structure(label, N)
                self.assertEqual(s.constraint_dimension(), tangent_dimension(label, N), f"{label} N={N}")

    def test_tangent_dimension_examples(self):
        self.assertEqual(tangent_dimension("C", 3), 21)
        self.assertEqual(tangent_dimension("D", 3), 15)

    def test_chiral_requires_p_equal_q(self):
        with self.assertRaises(UnsupportedClassError):
            class_structure("AIII", 2, p=2, q=3)
        with self.assertRaises(UsageError):
            class_structure("C", 2, p=2, q=2)
        class_structure("BDI", 2, p=2, q=2)

    def test_normalizer_dims(self):
        self.assertEqual(normalizer_dims("C", 1), (4, 4))
        self.assertEqual(normalizer_dims("A", 1), (2, 2))
        self.assertEqual(normalizer_dims("CI", 1), (8, 8))

    def test_normalizer_matches_named_algebra(self):
        for label in CLASS_LABELS:
            name, expected = normalizer_algebra(label, 1)
            self.assertEqual(normalizer_dims(label, 1), expected, f"{label}: {name}")
        self.assertEqual(normalizer_dims("C", 2), normalizer_algebra("C", 2)[1])


class SamplingTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(20240611)

    def test_class_c_block_form(self):
        h = sample_h(EnsembleSpec("C", 1), self.rng)
        self.assertAlmostEqual(h[0, 0].imag, 0, places=14)
        self.assertAlmostEqual(h[1, 1], -h[0, 0], places=14)
        self.assertAlmostEqual(h[1, 0], np.conj(h[0, 1]), places=14)

    def test_every_class_satisfies_its_constraints(self):
        for label in CLASS_LABELS:
            for N in (1, 3):
                spec = EnsembleSpec(label, N, v=1.3)
                h = sample_h(spec, self.rng)
                self.assertEqual(h.shape, (spec.dimension, spec.dimension))
                self.assertLessEqual(symmetry_residual(spec, h), 1e-12, f"{label} N={N}")

    def test_generic_hermitian_violates_class_c(self):
        spec = EnsembleSpec("C", 2)
        x = random_complex(self.rng, 4)
        self.assertGreater(symmetry_residual(spec, x + x.conj().T), 1e-3)
        with self.assertRaises(UsageError):
            symmetry_residual(spec, np.eye(3))

    def test_aiii_block_form(self):
        spec = EnsembleSpec("AIII", 3)
        h = sample_h(spec, self.rng)
        np.testing.assert_allclose(h[:3, :3], 0, atol=1e-15)
        np.testing.assert_allclose(h[3:, 3:], 0, atol=1e-15)
        self.assertLessEqual(symmetry_residual(spec, h), 1e-12)

    def test_same_seed_same_matrix(self):
        spec = EnsembleSpec("DIII", 2, seed=5)
        a = sample_h(spec, spec.rng())
        b = sample_h(spec, spec.rng())
        np.testing.assert_array_equal(a, b)

    def test_spectral_symmetry(self):
        for label in sorted(PARTICLE_HOLE_CLASSES):
            ev = eigenvalues(sample_h(EnsembleSpec(label, 3), self.rng))
            self.assertLessEqual(np.max(np.abs(ev + ev[::-1])), 1e-10, label)
        ev = eigenvalues(sample_h(EnsembleSpec("A", 6), self.rng))
        self.assertGreater(np.max(np.abs(ev + ev[::-1])), 1e-3)

    def test_two_by_two_eigenvalues(self):
        a, b = 0.4, 0.3 - 1.2j
        ev = eigenvalues(np.array([[a, b], [np.conj(b), -a]]))
        r = np.sqrt(a * a + abs(b) ** 2)
        np.testing.assert_allclose(ev, [-r, r], atol=1e-14)
        np.testing.assert_array_equal(eigenvalues(np.zeros((3, 3))), np.zeros(3))
        with self.assertRaises(UsageError):
            eigenvalues(np.array([[0, 1], [0, 0]]))

    def test_exact_moment_class_c(self):
        spec = EnsembleSpec("C", 2, v=0.7)
        a, b = random_complex(self.rng, 4), random_complex(self.rng, 4)
        cc = kron(I_SIGMA_Y, np.eye(2))
        printed = spec.v**2 / (2 * spec.N) * np.trace(a @ b - a @ cc @ b.T @ np.linalg.inv(cc))
        self.assertAlmostEqual(second_moment_exact(spec, a, b), printed, places=12)
        self.assertEqual(second_moment_exact(spec, np.zeros((4, 4)), b), 0)

    def test_exact_moment_printed_laws(self):
        a, b = random_complex(self.rng, 2), random_complex(self.rng, 2)
        spec = EnsembleSpec("AI", 2)
        printed = 1 / 4 * np.trace(a @ b + a @ b.T)
        self.assertAlmostEqual(second_moment_exact(spec, a, b), printed, places=12)

        spec = EnsembleSpec("A", 1, v=2.0)
        self.assertAlmostEqual(second_moment_exact(spec, np.eye(1), np.eye(1)), 4.0)

        N = 1
        a, b = random_complex(self.rng, 4), random_complex(self.rng, 4)
        pp = kron(SIGMA_Z, ONE_2, np.eye(N))
        tt = kron(ONE_2, I_SIGMA_Y, np.eye(N))
        printed = 1 / (4 * N) * np.trace(
            (a - pp @ a @ np.linalg.inv(pp)) @ (b - tt @ b.T @ np.linalg.inv(tt))
        )
        self.assertAlmostEqual(second_moment_exact(EnsembleSpec("CII", N), a, b), printed, places=12)

        cc = kron(SIGMA_X, ONE_2, np.eye(N))
        ct = cc @ tt
        printed = 1 / (4 * N) * np.trace(
            a @ b
            - a @ cc @ b.T @ np.linalg.inv(cc)
            + a @ tt @ b.T @ np.linalg.inv(tt)
            - a @ ct @ b @ np.linalg.inv(ct)
        )
        self.assertAlmostEqual(second_moment_exact(EnsembleSpec("DIII", N), a, b), printed, places=12)

    def test_monte_carlo_moment_matches_exact(self):
        spec = EnsembleSpec("C", 2)
        a, b = random_complex(self.rng, 4), random_complex(self.rng, 4)
        estimate, stderr = second_moment_mc(spec, a, b, 4000, 11)
        exact = second_moment_exact(spec, a, b)
        self.assertLessEqual(abs(estimate.real - exact.real), 5 * stderr)
        self.assertLessEqual(abs(estimate.imag - exact.imag), 5 * stderr)

        e11 = np.zeros((2, 2))
        e11[0, 0] = 1
        spec = EnsembleSpec("AI", 2)
        estimate, stderr = second_moment_mc(spec, e11, e11, 4000, 12)
        self.assertLessEqual(abs(estimate - second_moment_exact(spec, e11, e11)), 5 * stderr)

    def test_monte_carlo_moment_all_classes(self):
        for label in CLASS_LABELS:
            for N in (2, 4):
                spec = EnsembleSpec(label, N)
                d = spec.dimension
                for k in range(3):
                    a, b = random_complex(self.rng, d), random_complex(self.rng, d)
                    estimate, stderr = second_moment_mc(spec, a, b, 2000, 100 * N + k)
                    exact = second_moment_exact(spec, a, b)
                    self.assertLessEqual(abs(estimate - exact), 5 * stderr, f"{label} N={N} pair {k}")

    def test_traceless_class_c(self):
        spec = EnsembleSpec("C", 3)
        one = np.eye(6)
        estimate, _ = second_moment_mc(spec, one, one, 200, 3)
        self.assertLess(abs(estimate), 1e-20)
        with self.assertRaises(UsageError):
            second_moment_mc(spec, one, one, 1, 3)

    def test_spec_config_round_trip(self):
        spec = EnsembleSpec("BDI", 3, v=0.5, seed=9)
        self.assertEqual(EnsembleSpec.from_config(spec.to_config()), spec)
        with self.assertRaises(UsageError):
            EnsembleSpec.from_config("cls = C\nv = 1\n")
        with self.assertRaises(UsageError):
            EnsembleSpec.from_config("cls = C\nN = 2\ncolour = red\n")

    def test_export_csv(self):
        spec = EnsembleSpec("C", 1, seed=1)
        matrices = [sample_h(spec, self.rng) for _ in range(3)]
        with tempfile.TemporaryDirectory() as tmp:
            path = export_matrices_csv(matrices, Path(tmp) / "out" / "h.csv")
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "sample,row,re_0,im_0,re_1,im_1")
        self.assertEqual(len(lines), 1 + 3 * 2)
        self.assertEqual(float(lines[1].split(",")[2]), matrices[0][0, 0].real)


class MonteCarloTest(SimpleTestCase):
    def test_independent_of_worker_count(self):
        spec = EnsembleSpec("D", 2)
        a = np.diag([1.0, 2.0, -1.0, 0.5])
        kernel = partial(moment_kernel, a, a)
        serial = run_estimator(spec, kernel, 250, 77, chunk_size=60)
        parallel = run_estimator(spec, kernel, 250, 77, chunk_size=60, workers=2)
        np.testing.assert_array_equal(serial.values, parallel.values)
        self.assertEqual(serial.mean(), parallel.mean())
        self.assertEqual(serial.nsamples, 250)

    def test_equal_kernel_has_zero_variance(self):
        spec = EnsembleSpec("A", 3)
        result = run_estimator(spec, lambda h: 1.0, 20, 1)
        self.assertEqual(result.mean(), 1)
        self.assertEqual(result.stderr(), 0)
