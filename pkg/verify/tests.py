import cmath
import json
from fractions import Fraction
from unittest import mock

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from ensembles.classes import CLASS_LABELS
from ensembles.sampling import EnsembleSpec, sample_h
from ensembles.structure import class_structure
from spectral.generating import SourceMatrix, z_gen_quadrature
from superrmt.errors import DivergenceError, UnsupportedClassError, UsageError
from .domain import DomainGenerators, domain_exponent, domain_probe, random_generators, schafer_wegner_embed
from . import gaussian as gaussian_module
from .gaussian import bosonic_gaussian, fermionic_gaussian, gaussian_identity_check, hs_step_check
from .qintegral import (
    classc_grassmann_constants,
    classc_n1_closed_form,
    classc_point_integrand,
    classc_point_integrand_direct,
    large_n_convergence,
    q_integral_check,
)
from .reports import ReportList, VerificationReport, dump_reports, report_schema
from .saddle import algebra_residual, rss_table, rss_table_json, saddle_action, saddle_info
from .suite import SNAPSHOT, Job, _execute, build_jobs, covariance_check, structure_audit


class ReportTest(SimpleTestCase):
    def test_compare(self):
        ok = VerificationReport.compare("x", 1.0 + 1e-9, 1.0)
        self.assertTrue(ok.passed)
        bad = VerificationReport.compare("x", 1.1, 1.0)
        self.assertFalse(bad.passed)
        self.assertAlmostEqual(bad.rel_deviation, 0.1)
        self.assertIn("FAIL", bad.summary_line())

    def test_failure(self):
        report = VerificationReport.failure("y", UsageError("bad input"))
        self.assertFalse(report.passed)
        self.assertTrue(report.hard_failure)
        self.assertIsNone(report.lhs)
        self.assertIn("UsageError", report.message)

    def test_json_round_trip(self):
        reports = [
            VerificationReport.compare("a", 1 + 2j, 1 + 2j, method={"n": 1}, rows=[{"k": 0}]),
            VerificationReport.failure("b", DivergenceError("boom")),
        ]
        again = ReportList.validate_json(dump_reports(reports))
        self.assertEqual(again, reports)

    def test_schema(self):
        schema = report_schema()
        self.assertEqual(schema["$id"], settings.SUPERRMT_RESULTS_SCHEMA)
        self.assertEqual(schema["type"], "array")


class FermionicGaussianTest(SimpleTestCase):
    def test_determinant(self):
        m = np.array([[2.0, 1.0], [0.5, 3.0]])
        self.assertAlmostEqual(fermionic_gaussian(m), 5.5, places=12)

    def test_scalar(self):
        self.assertAlmostEqual(fermionic_gaussian(np.array([[0.3 + 0.2j]])), 0.3 + 0.2j, places=14)


class BosonicGaussianTest(SimpleTestCase):
    def test_positive_scalar(self):
        self.assertAlmostEqual(bosonic_gaussian(np.array([[2.0]])), 0.5, places=9)

    def test_rotated_scalar(self):
        k = np.array([[1.0 + 0.5j]])
        self.assertAlmostEqual(bosonic_gaussian(k), 1.0 / (1.0 + 0.5j), places=9)

    def test_divergent(self):
        with self.assertRaises(DivergenceError):
            bosonic_gaussian(np.array([[-1.0]]))


class GaussianIdentityTest(SimpleTestCase):
    def test_class_c_golden(self):
        report = gaussian_identity_check(Fraction(1, 2), np.diag([1.0, -1.0]), SourceMatrix([-1j], [2.0]))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.rhs_value, -1.5, places=12)
        self.assertLess(report.method["branch_residual"], 1e-12)

    def test_string_exponent(self):
        report = gaussian_identity_check("1/2", np.diag([1.0, -1.0]), SourceMatrix([-1j], [2.0]))
        self.assertEqual(report.method["c"], "1/2")

    def test_class_a_golden(self):
        report = gaussian_identity_check(1, np.array([[0.7]]), SourceMatrix([-1j], [0.3]))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.rhs_value, 0.4 / (0.7 + 1j), places=12)

    def test_retarded_source(self):
        report = gaussian_identity_check(1, np.array([[0.7]]), SourceMatrix([0.5 + 0.8j], [0.3]))
        self.assertTrue(report.passed)

    def test_equal_sources(self):
        a = np.array([[0.4, 0.2j], [-0.2j, -1.1]])
        report = gaussian_identity_check(1, a, SourceMatrix([0.3 - 0.8j], [0.3 - 0.8j]))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.lhs_value, 1.0, places=8)

    def test_sampled_hamiltonians(self):
        rng = np.random.default_rng(11)
        for c, cls in ((1, "A"), (Fraction(1, 2), "C")):
            a = sample_h(EnsembleSpec(cls, 2), rng)
            report = gaussian_identity_check(c, a, SourceMatrix([0.2 - 0.9j], [0.4 + 0.1j]))
            self.assertTrue(report.passed, report.summary_line())

    def test_class_c_dense(self):
        a = np.array([[0.3, 0.5 - 0.2j], [0.5 + 0.2j, -0.3]])
        report = gaussian_identity_check(Fraction(1, 2), a, SourceMatrix([-1j], [0.5]))
        self.assertTrue(report.passed, report.summary_line())
        # levels +-x with x^2 = 0.38
        self.assertAlmostEqual(report.rhs_value, 0.13 / 1.38, places=12)
        self.assertAlmostEqual(report.lhs_value, 0.13 / 1.38, places=6)

    def test_fixed_branch_is_not_principal(self):
        report = gaussian_identity_check(Fraction(1, 2), np.diag([1.0, -1.0]), SourceMatrix([-1j], [2.0]))
        sdet = complex(*report.method["sdet"])
        self.assertAlmostEqual(cmath.sqrt(1 / sdet), 1.5, places=9)
        self.assertAlmostEqual(report.lhs_value, -1.5, places=6)

    def test_constrained_field(self):
        a = sample_h(EnsembleSpec("C", 2), np.random.default_rng(4))
        report = gaussian_identity_check(Fraction(1, 2), a, SourceMatrix([0.3 - 0.6j], [-0.2 + 0.1j]))
        self.assertTrue(report.passed, report.summary_line())
        self.assertEqual(report.method["grassmann_generators"], 8)
        self.assertLess(report.method["constraint_residual"], 1e-12)
        self.assertLess(report.rows[0]["reality_residual"], 1e-12)

    def test_branch_mismatch_fails(self):
        real_rhs = gaussian_module._rhs

        def off_root(c, a, src):
            rhs, sdet = real_rhs(c, a, src)
            return rhs, 1.5 * sdet

        with mock.patch("verify.gaussian._rhs", off_root):
            report = gaussian_identity_check(Fraction(1, 2), np.diag([1.0, -1.0]), SourceMatrix([-1j], [2.0]))
        self.assertFalse(report.passed)
        self.assertGreater(report.method["branch_residual"], 0.4)
        self.assertIn("branch residual", report.message)

    def test_two_sources(self):
        src = SourceMatrix([-0.7j, -1.2j], [0.1, -0.3])
        report = gaussian_identity_check(Fraction(1, 2), np.diag([0.8, -0.8]), src)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.rows), 2)

    def test_errors(self):
        with self.assertRaises(UsageError):
            gaussian_identity_check(2, np.array([[0.7]]), SourceMatrix([-1j], [0.3]))
        with self.assertRaises(DivergenceError):
            gaussian_identity_check(1, np.array([[0.7]]), SourceMatrix([0.5], [0.3]))
        with self.assertRaises(UsageError):
            gaussian_identity_check(Fraction(1, 2), np.diag([1.0, 2.0]), SourceMatrix([-1j], [0.3]))
        with self.assertRaises(UsageError):
            gaussian_identity_check(Fraction(1, 2), np.diag([1.0, -1.0]), SourceMatrix([1j], [0.3]))
        with self.assertRaises(UsageError):
            gaussian_identity_check(1, np.array([[0.0, 1.0], [0.0, 0.0]]), SourceMatrix([-1j], [0.3]))


class HubbardStratonovichTest(SimpleTestCase):
    def test_vanishing_field(self):
        report = hs_step_check(0.0, symbolic_fermions=False)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.lhs_value, 1.0, places=14)

    def test_bosonic_field(self):
        z, v = 0.8 + 0.3j, 0.7
        report = hs_step_check(z, v=v, symbolic_fermions=False)
        self.assertTrue(report.passed, report.summary_line())
        expected = np.exp(-v * v * abs(z) ** 4 / 2)
        self.assertAlmostEqual(report.rows[0]["lhs"][0], expected, places=12)

    def test_symbolic_fermions(self):
        report = hs_step_check(0.8 + 0.3j)
        self.assertTrue(report.passed, report.summary_line())
        self.assertEqual(len(report.rows), 4)

    def test_only_n_one(self):
        with self.assertRaises(UsageError):
            hs_step_check(N=2)


class DomainTest(SimpleTestCase):
    def setUp(self):
        self.structure = class_structure("A", 1, 2, n_advanced=1)

    def test_origin(self):
        zero = np.zeros((2, 2))
        z = schafer_wegner_embed(2.0, zero, zero, self.structure)
        np.testing.assert_allclose(z, 2.0 * DomainGenerators(self.structure).beta)

    def test_bad_input(self):
        zero = np.zeros((2, 2))
        with self.assertRaises(UsageError):
            schafer_wegner_embed(0.0, zero, zero, self.structure)
        with self.assertRaises(UsageError):
            schafer_wegner_embed(1.0, np.eye(2), zero, self.structure)
        with self.assertRaises(UsageError):
            schafer_wegner_embed(1.0, np.zeros((3, 3)), zero, self.structure)

    def test_random_generators(self):
        gens = DomainGenerators(self.structure)
        x, y = random_generators(self.structure, np.random.default_rng(2))
        self.assertLess(gens.compact_residual(x), 1e-12)
        self.assertLess(gens.noncompact_residual(y), 1e-12)
        self.assertGreater(np.linalg.norm(y), 0.0)

    def test_exponent_sign(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x, y = random_generators(self.structure, rng)
            z = schafer_wegner_embed(1.5, x, y, self.structure)
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            self.assertLessEqual(domain_exponent(z, psi, self.structure).real, 1e-12)

    def test_probes(self):
        report = domain_probe("A", 2, 1, samples=60, rng=1)
        self.assertTrue(report.passed)
        self.assertEqual(report.identity, "domain[A,n=2]")
        self.assertGreater(report.rows[0]["min_pairwise_distance"], 0.0)
        self.assertTrue(domain_probe("C", 1, samples=20, rng=1).passed)

    def test_probe_needs_samples(self):
        with self.assertRaises(UsageError):
            domain_probe("A", samples=1)


class ClassCIntegrandTest(SimpleTestCase):
    def test_grassmann_constants(self):
        tau2, kappa, delta = classc_grassmann_constants()
        self.assertAlmostEqual(tau2, -8.0)
        self.assertAlmostEqual(delta, -6.0)
        self.assertTrue(all(abs(k) < 1e-14 for row in kappa for k in row))

    def test_closed_form_matches_engine(self):
        points = [
            (0.3 + 1.0j, (0.2, -0.4, 0.7), -1j, 0.3, 1.0),
            (-0.5 + 0.6j, (1.1, 0.3, -0.2), 0.4 - 0.8j, -0.2 + 0.1j, 0.8),
        ]
        for q, a, alpha, beta, v in points:
            fast = classc_point_integrand(q, a, alpha, beta, v)
            direct = classc_point_integrand_direct(q, a, alpha, beta, v)
            self.assertLess(abs(fast - direct), 1e-10 * max(1.0, abs(direct)))

    def test_n1_closed_form(self):
        self.assertAlmostEqual(classc_n1_closed_form(-0.7j, -0.7j), 1.0, places=14)
        for alpha, beta, v in ((-1j, 0.3, 1.0), (-0.4 - 0.9j, 0.2, 0.7)):
            exact = z_gen_quadrature(EnsembleSpec("C", 1, v), SourceMatrix([alpha], [beta]))
            self.assertAlmostEqual(classc_n1_closed_form(alpha, beta, v), exact, places=7)
        with self.assertRaises(UsageError):
            classc_n1_closed_form(1j, 0.0)


class QIntegralTest(SimpleTestCase):
    def test_class_a(self):
        for alpha, beta in ((-1j, 0.0), (0.4 + 0.8j, -0.2)):
            report = q_integral_check("A", SourceMatrix([alpha], [beta]))
            self.assertTrue(report.passed, report.summary_line())
            self.assertLess(report.rows[0]["abs_deviation"], 1e-8)

    def test_class_c(self):
        report = q_integral_check("C", SourceMatrix([-1j], [0.3]))
        self.assertTrue(report.passed, report.summary_line())
        self.assertEqual(report.identity, "q_integral[C,b=1]")

    def test_equal_sources(self):
        report = q_integral_check("C", SourceMatrix([-1j], [-1j]))
        self.assertAlmostEqual(report.rhs_value, 1.0, places=8)

    def test_domain_scale(self):
        src = SourceMatrix([0.2 - 0.7j], [0.5])
        values = [q_integral_check("C", src, b=b).rhs_value for b in (0.5, 1.0, 2.0)]
        self.assertLess(max(abs(x - values[1]) for x in values), 1e-5)

    def test_scope(self):
        with self.assertRaises(UnsupportedClassError):
            q_integral_check("D", SourceMatrix([-1j], [0.0]))
        with self.assertRaises(UnsupportedClassError):
            q_integral_check("C", SourceMatrix([-1j], [0.0]), N=2)
        with self.assertRaises(UsageError):
            q_integral_check("C", SourceMatrix([-1j], [0.0]), b=-1.0)
        with self.assertRaises(UsageError):
            q_integral_check("C", SourceMatrix([1j], [0.0]))


class LargeNTest(SimpleTestCase):
    def test_equal_sources(self):
        report = large_n_convergence(-0.3j, -0.3j, [2, 3, 4], 50, rng=5)
        self.assertTrue(report.passed, report.summary_line())
        for row in report.rows[:3]:
            self.assertEqual(row["z"], (1.0, 0.0))
            self.assertEqual(row["stderr"], 0.0)

    def test_report_shape(self):
        report = large_n_convergence(-0.3j, 0.25, [2, 4, 8], 200, rng=7)
        self.assertEqual([row["N"] for row in report.rows[:3]], [2, 4, 8])
        self.assertIn("saddle_action_Q0", report.rows[3])
        self.assertEqual(report.method["seed"], 7)
        again = large_n_convergence(-0.3j, 0.25, [2, 4, 8], 200, rng=7)
        self.assertEqual(again.rows, report.rows)

    def test_bad_input(self):
        with self.assertRaises(UsageError):
            large_n_convergence(-0.3j, 0.25, [2, 4], 10, rng=1)
        with self.assertRaises(UsageError):
            large_n_convergence(-0.3j, 0.25, [4, 2, 8], 10, rng=1)
        with self.assertRaises(UsageError):
            large_n_convergence(0.3j, 0.25, [2, 4, 8], 10, rng=1)


class SaddleTest(SimpleTestCase):
    def test_saddle_equation(self):
        for label in CLASS_LABELS:
            for n in (1, 2):
                residuals = saddle_info(label, n).residuals()
                self.assertTrue(all(r == 0.0 for r in residuals.values()), (label, n, residuals))

    def test_scaled_saddle(self):
        self.assertLess(max(saddle_info("DIII", 2, v=0.7).residuals().values()), 1e-14)

    def test_second_orbit(self):
        for label in ("D", "DIII"):
            data = saddle_info(label, 2)
            self.assertEqual(data.saddle_count, 2)
            self.assertIsNotNone(data.q1)
            self.assertFalse(np.allclose(data.q0, data.q1))
        self.assertIsNone(saddle_info("A").q1)
        self.assertIsNone(saddle_info("C").q1)

    def test_class_d_algebra(self):
        data = saddle_info("D", 2)
        self.assertLess(algebra_residual("D", data.q0, 2), 1e-12)
        self.assertLess(algebra_residual("D", data.q1, 2), 1e-12)

    def test_names(self):
        data = saddle_info("C")
        self.assertEqual(data.coset, "Osp(2n|2n)/Gl(n|n)")
        self.assertEqual(data.boson_base, "SO*(2n)/U(n)")
        self.assertEqual(data.fermion_base, "Sp(n)/U(n)")
        self.assertEqual(data.as_record()["cls"], "C")

    def test_action_vanishes_at_saddle(self):
        for label in ("A", "C", "AIII"):
            data = saddle_info(label)
            self.assertAlmostEqual(saddle_action(data.q0, data.grading, data.v), 0.0, places=12)

    def test_bad_input(self):
        with self.assertRaises(UsageError):
            saddle_info("C", 0)
        with self.assertRaises(UsageError):
            saddle_info("Q")

    def test_rss_snapshot(self):
        self.assertEqual(SNAPSHOT.read_text(encoding="utf-8"), rss_table_json())
        table = rss_table()
        self.assertEqual([row["rmt"] for row in table], list(CLASS_LABELS))
        self.assertEqual(json.loads(rss_table_json()), table)


class SuiteTest(SimpleTestCase):
    def test_core_jobs(self):
        jobs = build_jobs("core", seed=3)
        identities = [job.identity for job in jobs]
        self.assertEqual(len(identities), len(set(identities)))
        self.assertIn("structure_audit", identities)
        self.assertEqual(identities, [job.identity for job in build_jobs("core", seed=3)])

    def test_full_covariance_jobs(self):
        identities = [job.identity for job in build_jobs("full", seed=3)]
        for label in CLASS_LABELS:
            for N in (2, 4):
                self.assertIn(f"covariance[{label},N={N}]", identities)

    def test_covariance_pairs(self):
        report = covariance_check("AIII", 2, 2000, 5)
        self.assertTrue(report.passed, report.summary_line())
        self.assertEqual(len(report.rows), 3)
        worst = max(row["standard_errors"] for row in report.rows)
        self.assertLessEqual(worst, 5.0)
        self.assertAlmostEqual(report.abs_deviation, worst * report.abs_tol / 5.0, places=9)

    def test_unknown_suite(self):
        with self.assertRaises(UsageError):
            build_jobs("nightly")

    def test_failures_become_reports(self):
        job = Job("q_integral[D]", q_integral_check, {"cls": "D", "src": SourceMatrix([-1j], [0.0])})
        report = _execute(job)
        self.assertTrue(report.hard_failure)
        self.assertFalse(report.passed)
        self.assertEqual(report.identity, "q_integral[D]")

    def test_structure_audit(self):
        report = structure_audit()
        self.assertTrue(report.passed, [row for row in report.rows if not row["ok"]])
