import math

import numpy as np
from django.test import SimpleTestCase

from spectral.generating import classc_limit_closed_form
from superalg.grassmann import GeneratorPool, g_exp, g_pow
from superalg.supermatrix import SuperMatrix, s_exp, s_mul
from superrmt.errors import DivergenceError, UsageError
from .classc import (
    cayley_q,
    cayley_radius2,
    classc_measure,
    classc_superspace_result,
    classc_superspace_z,
    source_traces,
    to_chart_frame,
)
from .gl11 import gl11_exp, gl11_integral
from .jfactor import TangentSpace, ad_squared, j_factor
from .measure import BerezinChart, BerezinMeasure, Cell, berezin_integrate
from .supersphere import (
    _embed_north,
    chart_consistency_residual,
    supersphere_measure,
    supersphere_volume,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def square_plus_one(point):
    return (1 + point.x0) * (1 + point.x0)


def mixed(point):
    return point.x0 * point.x0 + point.xs[0] * 0.3 + point.xi[0] * point.xi[1] * 0.5


class FlatMeasureTest(SimpleTestCase):
    def test_top_form(self):
        # one chart, q = 2, f = xi1 xi2 g(x): D(xi)(xi1 xi2) = -1
        chart = BerezinChart(
            "flat", 1, 2,
            density=lambda x, xis: xis[0].pool.one(),
            embed=lambda x, xis: (x, xis),
            cell=Cell(math.inf),
        )
        measure = BerezinMeasure("flat", (chart,))
        result = berezin_integrate(measure, lambda args: args[1][0] * args[1][1] * math.exp(-args[0][0] ** 2))
        self.assertAlmostEqual(result.value, -math.sqrt(math.pi), places=8)

    def test_duplicate_chart_names(self):
        chart = BerezinChart("a", 1, 2, lambda x, xis: 1, lambda x, xis: x)
        with self.assertRaises(UsageError):
            BerezinMeasure("twice", (chart, chart))


class SupersphereTest(SimpleTestCase):
    def test_volumes(self):
        self.assertAlmostEqual(supersphere_volume(2), 4 * math.pi, places=8)
        self.assertAlmostEqual(supersphere_volume(1), 0, places=8)
        self.assertAlmostEqual(supersphere_volume(3), 2 * math.pi**2, places=7)
        self.assertAlmostEqual(supersphere_volume(3, single_chart=True), 2 * math.pi**2, places=7)

    def test_volume_independent_of_cut(self):
        for p in (1, 2, 3):
            reference = supersphere_volume(p, 1.0)
            for cut in (0.3, 2.5):
                self.assertAlmostEqual(supersphere_volume(p, cut), reference, places=7, msg=f"p={p} cut={cut}")

    def test_cell_breakdown_p2(self):
        result = berezin_integrate(supersphere_measure(2, 1.0), lambda point: 1.0, radial=True)
        self.assertAlmostEqual(result.cells["cell:north"], 0, places=12)
        self.assertAlmostEqual(result.cells["face:north|south"], 4 * math.pi, places=10)

    def test_non_radial_integrand(self):
        values = [berezin_integrate(supersphere_measure(2, cut), mixed).value for cut in (0.5, 2.0)]
        self.assertAlmostEqual(values[0], 2 * math.pi, places=6)
        self.assertAlmostEqual(values[1], 2 * math.pi, places=6)

    def test_circle_cut_independence(self):
        odd = lambda point: point.xs[0] + point.x0 * 2
        values = [berezin_integrate(supersphere_measure(1, cut), odd).value for cut in (0.5, 2.0)]
        self.assertAlmostEqual(values[0], values[1], places=7)

    def test_gauge_choice(self):
        north = berezin_integrate(supersphere_measure(2, 0.8, gauge="north"), square_plus_one, radial=True)
        south = berezin_integrate(supersphere_measure(2, 0.8, gauge="south"), square_plus_one, radial=True)
        self.assertAlmostEqual(north.value, south.value, places=10)
        self.assertAlmostEqual(north.value, 8 * math.pi, places=7)

    def test_single_chart_matches_atlas(self):
        f = lambda point: point.x0 * point.x0
        single = berezin_integrate(supersphere_measure(3, single_chart=True), f, radial=True).value
        atlas = berezin_integrate(supersphere_measure(3, 0.7), f, radial=True).value
        self.assertAlmostEqual(single, atlas, places=7)

    def test_chart_consistency(self):
        rng = np.random.default_rng(17)
        for p in (1, 2, 3):
            points = []
            for _ in range(100):
                direction = rng.standard_normal(p)
                points.append(direction / np.linalg.norm(direction) * rng.uniform(0.3, 3.0))
            self.assertLess(chart_consistency_residual(p, points), 1e-10, f"p={p}")

    def test_embedding_on_sphere(self):
        pool = GeneratorPool(2, "xi")
        point = _embed_north(np.array([0.4, -1.1]), pool.generators("xi"))
        self.assertTrue(point.constraint().close_to(1, atol=1e-12))

    def test_bad_arguments(self):
        with self.assertRaises(UsageError):
            supersphere_measure(0)
        with self.assertRaises(UsageError):
            supersphere_measure(2, single_chart=True)
        with self.assertRaises(UsageError):
            supersphere_measure(2, cut=0.0)
        with self.assertRaises(UsageError):
            supersphere_measure(2, gauge="east")


class Gl11Test(SimpleTestCase):
    def test_exp_matches_series(self):
        pool = GeneratorPool(2, "zeta")
        z1, z2 = pool.generators("zeta")
        for a, d in ((0.3 + 0.1j, -0.4j), (0.2, 0.2 + 1e-4)):
            m = SuperMatrix.from_blocks(pool, [[a]], [[z1]], [[z2]], [[d]])
            self.assertTrue(gl11_exp(a, d, z1, z2).close_to(s_exp(m), atol=1e-12))

    def test_constant(self):
        self.assertAlmostEqual(gl11_integral(lambda g: 1.0).value, 1, places=8)
        self.assertAlmostEqual(gl11_integral(lambda g: 2.5).value, 2.5, places=8)

    def test_decaying_function_of_a(self):
        result = gl11_integral(lambda g: g_exp(-g[0, 0]))
        self.assertAlmostEqual(result.value, 1, places=6)

    def test_translation_invariance(self):
        profiles = (
            lambda a: g_exp(-a),
            lambda a: g_pow(1 + a, -2),
            lambda a: g_exp(-(a * a)),
        )
        for phi in profiles:
            def left(g, phi=phi):
                shift = SuperMatrix.from_array(g.pool, np.diag([2.5, 0.7]), (1, 1))
                return phi(s_mul(shift, g)[0, 0])

            plain = gl11_integral(lambda g, phi=phi: phi(g[0, 0])).value
            moved = gl11_integral(left).value
            self.assertLess(abs(plain - moved), 1e-6)

    def test_right_translation(self):
        def right(g):
            shift = SuperMatrix.from_array(g.pool, np.diag([0.4, 3.0]), (1, 1))
            return g_exp(-s_mul(g, shift)[0, 0])

        self.assertAlmostEqual(gl11_integral(right).value, 1, places=6)

    def test_growing_integrand_diverges(self):
        with self.assertRaises(DivergenceError):
            gl11_integral(lambda g: g[0, 0] * g[0, 0], cutoff=10.0)


def _embed(block, rows, cols):
    out = np.zeros((4, 4), dtype=complex)
    out[rows, cols] = block
    return out


BB, FF, BF = (slice(0, 2), slice(0, 2)), (slice(2, 4), slice(2, 4)), (slice(0, 2), slice(2, 4))


def matched_pair_space():
    return TangentSpace(
        (_embed(SIGMA_Z, *BB), _embed(SIGMA_X, *BB)),
        (_embed(SIGMA_Z, *BF), _embed(SIGMA_X, *BF)),
    )


class JFactorTest(SimpleTestCase):
    def test_zero(self):
        space = TangentSpace((SIGMA_Z, SIGMA_X))
        self.assertEqual(j_factor(np.zeros((2, 2)), space).body, 1)

    def test_rank_one(self):
        space = TangentSpace((SIGMA_Z, SIGMA_X))
        self.assertAlmostEqual(j_factor(SIGMA_X / 2, space).body, math.sinh(1), places=12)

    def test_eigenvalue_formula(self):
        z = np.diag([1.0, 0.3, -0.5])
        basis = []
        for i, j in ((0, 1), (0, 2), (1, 2)):
            b = np.zeros((3, 3))
            b[i, j] = b[j, i] = 1
            basis.append(b)
        expected = 1.0
        for d in (0.7, 1.5, 0.8):
            expected *= math.sinh(d) / d
        self.assertAlmostEqual(j_factor(z, TangentSpace(tuple(basis))).body, expected, places=12)

    def test_matched_pair(self):
        z = _embed(SIGMA_X / 2, *BB) + _embed(SIGMA_X / 2, *FF)
        self.assertAlmostEqual(j_factor(z, matched_pair_space()).body, 1, places=12)

    def test_nilpotent_shift(self):
        # Z = (1/2 + theta1 theta2) sigma_x: J = sinh(2f) / 2f expanded around f = 1/2
        pool = GeneratorPool(2, "theta")
        t1, t2 = pool.generators("theta")
        f = t1 * t2 + 0.5
        z = SuperMatrix.from_rows(pool, [[0, f], [f, 0]], (2, 0))
        j = j_factor(z, TangentSpace((SIGMA_Z, SIGMA_X)))
        self.assertIs(j.pool, pool)
        self.assertAlmostEqual(j.body, math.sinh(1), places=12)
        self.assertAlmostEqual(j.coefficient(0b11), 2 / math.e, places=12)

    def test_nilpotent_matched_pair(self):
        pool = GeneratorPool(2, "theta")
        t1, t2 = pool.generators("theta")
        f = t1 * t2 + 0.5
        zero = pool.zero()
        z = SuperMatrix.from_blocks(pool, [[zero, f], [f, zero]], [[zero, zero], [zero, zero]],
                                    [[zero, zero], [zero, zero]], [[zero, f], [f, zero]])
        self.assertTrue(j_factor(z, matched_pair_space()).close_to(1, atol=1e-12))

    def test_ad_squared_grading(self):
        pool = GeneratorPool(2, "theta")
        t1, t2 = pool.generators("theta")
        f = t1 * t2 + 0.5
        z = SuperMatrix.from_rows(pool, [[0, f], [f, 0]], (2, 0))
        ad2 = ad_squared(z, TangentSpace((SIGMA_Z, SIGMA_X)))
        self.assertEqual(ad2.rows, (2, 0))
        # 4 f^2 = 1 + 4 theta1 theta2
        self.assertTrue(ad2[0, 0].close_to(t1 * t2 * 4 + 1, atol=1e-12))

    def test_not_closed(self):
        with self.assertRaises(UsageError):
            j_factor(SIGMA_X / 2, TangentSpace((SIGMA_Z + SIGMA_X,)))

    def test_shape_mismatch(self):
        with self.assertRaises(UsageError):
            j_factor(np.zeros((3, 3)), TangentSpace((SIGMA_Z, SIGMA_X)))


class ClassCSuperspaceTest(SimpleTestCase):
    def test_cayley_traces(self):
        pool = GeneratorPool()
        pool.allocate("eta", 2)
        u, w = source_traces(cayley_q(0.7, pool.generators("eta")))
        self.assertAlmostEqual(u.body, 1)
        self.assertAlmostEqual(u.coefficient(0b11), -2 / 1.49)
        self.assertAlmostEqual(w.body, 0.51 / 1.49)

    def test_chart_transition(self):
        pool = GeneratorPool(2, "eta")
        etas = pool.generators("eta")
        for x in (0.4, 1.0, np.array([0.3, -1.2])):
            q = cayley_q(x, etas)
            r2 = float(np.dot(x, x))
            self.assertTrue(cayley_radius2(q).close_to(r2, atol=1e-12))
            # y = -1/x carries no nilpotent part
            self.assertTrue(cayley_radius2(to_chart_frame(q, "south")).close_to(1 / r2, atol=1e-12))

    def test_two_cells(self):
        result = classc_superspace_result(-0.3j, 0.25)
        self.assertEqual(set(result.cells), {"cell:north", "cell:south", "face:north|south"})
        self.assertAlmostEqual(result.cells["face:north|south"], 0, places=12)
        self.assertAlmostEqual(sum(result.cells.values()), result.value, places=12)

    def test_cut_independence(self):
        reference = classc_superspace_z(-0.3j, 0.25)
        for cut in (0.5, 2.0):
            self.assertAlmostEqual(classc_superspace_z(-0.3j, 0.25, cut=cut), reference, places=8, msg=f"cut={cut}")

    def test_equal_sources(self):
        for a in (0.3 - 0.2j, -0.7j):
            self.assertAlmostEqual(classc_superspace_z(a, a), 1, places=8)

    def test_closed_form(self):
        for a, b in ((-0.3j, 0.25), (0.1 - 0.5j, -0.4)):
            self.assertAlmostEqual(classc_superspace_z(a, b), classc_limit_closed_form(a, b), places=8)

    def test_antipodal_chart(self):
        north = classc_superspace_z(-0.3j, 0.25)
        south = classc_superspace_z(-0.3j, 0.25, pole="south", cut=0.7)
        self.assertLess(abs(north - south), 1e-6)

    def test_holomorphic_in_beta(self):
        a, b, h = -0.3j, 0.25, 1e-4
        along_real = (classc_superspace_z(a, b + h) - classc_superspace_z(a, b - h)) / (2 * h)
        along_imag = (classc_superspace_z(a, b + 1j * h) - classc_superspace_z(a, b - 1j * h)) / (2j * h)
        self.assertLess(abs(along_real - along_imag), 1e-4)

    def test_guards(self):
        with self.assertRaises(UsageError):
            classc_superspace_z(0.3j, 0.1)
        with self.assertRaises(UsageError):
            classc_superspace_z(-0.3j, 0.1, pole="west")
        with self.assertRaises(UsageError):
            classc_measure(0.0)
