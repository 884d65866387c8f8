import cmath
import math

import numpy as np
from django.test import SimpleTestCase

from superrmt.errors import PoolError, SingularityError, UsageError
from .grassmann import (
    GeneratorPool,
    GrassmannElement,
    berezin_top,
    g_derive,
    g_derive_right,
    g_exp,
    g_inv,
    g_log,
    g_mul,
    g_pow,
)
from .supermatrix import (
    SuperMatrix,
    s_det,
    s_exp,
    s_inv,
    s_mul,
    s_trace,
    s_transpose,
    superparity,
)


def random_element(pool, rng, parity, scale=0.5):
    terms = {}
    for mask in range(1 << pool.size):
        if mask.bit_count() % 2 == parity:
            terms[mask] = complex(*(scale * rng.standard_normal(2)))
    return GrassmannElement(pool, terms)


def random_supermatrix(pool, rng, grading, scale=0.5):
    rows = []
    parities = [0] * grading[0] + [1] * grading[1]
    for pi in parities:
        rows.append([random_element(pool, rng, pi ^ pj, scale) for pj in parities])
    return SuperMatrix.from_rows(pool, rows, grading)


class GrassmannProductTest(SimpleTestCase):
    def setUp(self):
        self.pool = GeneratorPool(4)
        self.x = self.pool.generators()

    def test_anticommutation(self):
        x1, x2 = self.x[0], self.x[1]
        self.assertEqual((x1 * x2).terms, {0b11: 1})
        self.assertEqual((x2 * x1).terms, {0b11: -1})
        self.assertTrue((x1 * x1).is_zero())

    def test_distributivity(self):
        x1, x2 = self.x[0], self.x[1]
        product = (1 + x1) * (1 + x2)
        self.assertEqual(product.terms, {0: 1, 0b01: 1, 0b10: 1, 0b11: 1})

    def test_quartic_monomial(self):
        x1, x2, x3, x4 = self.x
        product = g_mul(2 * x1 * x2, 3 * x3 * x4)
        self.assertEqual(product.terms, {0b1111: 6})
        # ξ3ξ4 · ξ1ξ2 needs an even number of swaps
        self.assertEqual(g_mul(x3 * x4, x1 * x2).terms, {0b1111: 1})
        self.assertEqual(g_mul(x2 * x4, x1 * x3).terms, {0b1111: -1})

    def test_graded_commutativity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pa, pb = rng.integers(0, 2, size=2)
            a = random_element(self.pool, rng, pa)
            b = random_element(self.pool, rng, pb)
            sign = -1 if pa and pb else 1
            self.assertTrue(g_mul(a, b).close_to(g_mul(b, a) * sign, atol=1e-12))

    def test_associativity(self):
        rng = np.random.default_rng(12)
        a, b, c = (random_element(self.pool, rng, p) for p in (0, 1, 1))
        self.assertTrue(((a * b) * c).close_to(a * (b * c), atol=1e-12))

    def test_canonical_form_drops_zeros(self):
        x1 = self.x[0]
        self.assertTrue((x1 - x1).is_zero())
        self.assertEqual(GrassmannElement(self.pool, {0: 0, 1: 2}).terms, {1: 2})

    def test_parity_query(self):
        x1, x2 = self.x[0], self.x[1]
        self.assertTrue((1 + x1 * x2).is_even)
        self.assertTrue(x1.is_odd)
        self.assertEqual((1 + x1).parity, -1)

    def test_pools_do_not_mix(self):
        other = GeneratorPool(2)
        with self.assertRaises(PoolError):
            self.x[0] * other.generator(0)
        with self.assertRaises(PoolError):
            self.pool.generator(7)

    def test_pool_blocks_are_disjoint(self):
        pool = GeneratorPool()
        coords = pool.allocate("xi", 2)
        params = pool.allocate("lambda", 2)
        self.assertEqual(list(coords), [0, 1])
        self.assertEqual(list(params), [2, 3])
        with self.assertRaises(PoolError):
            pool.allocate("xi", 1)

    def test_render_is_sorted(self):
        x1, x2 = self.x[0], self.x[1]
        self.assertEqual((x2 * x1 + 3).render(), "+3 -1*x0x1")


class GrassmannDerivativeTest(SimpleTestCase):
    def setUp(self):
        self.pool = GeneratorPool(4)
        self.x = self.pool.generators()

    def test_derivative_examples(self):
        x1, x2, x3 = self.x[0], self.x[1], self.x[2]
        self.assertEqual(g_derive(x1, 0).terms, {0: 1})
        self.assertEqual(g_derive(x2 * x1, 0).terms, {0b10: -1})
        self.assertTrue(g_derive(1 + x1 * x2, 2).is_zero())
        self.assertEqual(g_derive_right(x2 * x1, 0).terms, {0b10: 1})

    def test_nilpotency(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = random_element(self.pool, rng, int(rng.integers(0, 2)))
            for k in range(4):
                self.assertTrue(g_derive(g_derive(a, k), k).is_zero())

    def test_berezin_top_sign(self):
        x = self.x
        self.assertEqual(berezin_top(x[0] * x[1], [0, 1]).terms, {0: -1})
        self.assertEqual(berezin_top(x[0] * x[1] * x[2] * x[3]).terms, {0: 1})
        self.assertTrue(berezin_top(x[0], [0, 1]).is_zero())


class GrassmannFunctionTest(SimpleTestCase):
    def setUp(self):
        self.pool = GeneratorPool(4)
        self.x = self.pool.generators()

    def test_exp_of_zero_and_nilpotent(self):
        x1, x2 = self.x[0], self.x[1]
        self.assertEqual(g_exp(self.pool.zero()).terms, {0: 1})
        value = g_exp(0.7 + x1 * x2)
        self.assertTrue(value.close_to((1 + x1 * x2) * math.exp(0.7)))

    def test_log_series(self):
        x1, x2, x3, x4 = self.x
        value = g_log(1 + 2 * x1 * x2 + x3 * x4)
        expected = 2 * x1 * x2 + x3 * x4 - 2 * x1 * x2 * x3 * x4
        self.assertTrue(value.close_to(expected, atol=1e-14))

    def test_log_inverts_exp(self):
        rng = np.random.default_rng(5)
        a = random_element(self.pool, rng, 0, scale=0.3)
        self.assertTrue(g_log(g_exp(a)).close_to(a, atol=1e-12))

    def test_log_of_zero_body(self):
        with self.assertRaises(SingularityError):
            g_log(self.x[0] * self.x[1])

    def test_exp_rejects_odd(self):
        with self.assertRaises(UsageError):
            g_exp(self.x[0])

    def test_pow_and_inverse(self):
        rng = np.random.default_rng(6)
        a = 2.0 + random_element(self.pool, rng, 0, scale=0.3).soul()
        self.assertTrue((g_pow(a, 0.5) * g_pow(a, 0.5)).close_to(a, atol=1e-12))
        self.assertTrue((a * g_inv(a)).close_to(1.0, atol=1e-12))
        self.assertTrue(g_pow(a, -1).close_to(g_inv(a), atol=1e-12))


class SuperMatrixTest(SimpleTestCase):
    def setUp(self):
        self.pool = GeneratorPool(2)
        self.rng = np.random.default_rng(21)

    def test_constructor_checks_parity(self):
        x1 = self.pool.generator(0)
        with self.assertRaises(UsageError):
            SuperMatrix.from_rows(self.pool, [[x1, 0], [0, 1]], (1, 1))
        SuperMatrix.from_rows(self.pool, [[1, x1], [x1, 1]], (1, 1))

    def test_identity_product(self):
        a = random_supermatrix(self.pool, self.rng, (1, 1))
        eye = SuperMatrix.identity(self.pool, (1, 1))
        self.assertTrue(s_mul(a, eye).close_to(a, atol=0))

    def test_product_matches_expansion(self):
        a = random_supermatrix(self.pool, self.rng, (1, 1))
        b = random_supermatrix(self.pool, self.rng, (1, 1))
        ab = s_mul(a, b)
        for i in range(2):
            for j in range(2):
                expected = a[i, 0] * b[0, j] + a[i, 1] * b[1, j]
                self.assertTrue(ab[i, j].close_to(expected, atol=1e-14))

    def test_supertranspose_laws(self):
        pool = GeneratorPool(4)
        for _ in range(5):
            a = random_supermatrix(pool, self.rng, (2, 2))
            b = random_supermatrix(pool, self.rng, (2, 2))
            lhs = s_transpose(s_mul(a, b))
            rhs = s_mul(s_transpose(b), s_transpose(a))
            self.assertTrue(lhs.close_to(rhs, atol=1e-12))
            sigma = superparity(pool, (2, 2))
            self.assertTrue(s_transpose(s_transpose(a)).close_to(sigma @ a @ sigma, atol=0))
        sigma = superparity(self.pool, (1, 1))
        self.assertTrue(s_transpose(sigma).close_to(sigma, atol=0))

    def test_supertrace_examples(self):
        eye = SuperMatrix.identity(self.pool, (2, 2))
        self.assertTrue(s_trace(eye).is_zero())
        d = SuperMatrix.from_array(self.pool, np.diag([2.0, 3.0]), (1, 1))
        self.assertEqual(s_trace(d).terms, {0: -1})

    def test_supertrace_cyclic(self):
        for _ in range(10):
            a = random_supermatrix(self.pool, self.rng, (1, 1))
            b = random_supermatrix(self.pool, self.rng, (1, 1))
            self.assertTrue(s_trace(a @ b).close_to(s_trace(b @ a), atol=1e-12))

    def test_trace_identity_for_rectangular_psi(self):
        # psi: W -> V with V = C^2 (purely even), W = C^{1|1}
        pool = GeneratorPool(4)
        xi = pool.generators()
        psi = SuperMatrix.from_rows(pool, [[0.3, xi[0]], [-1.1, xi[1]]], (2, 0), (1, 1))
        psi_t = SuperMatrix.from_rows(pool, [[0.7, 0.2j], [xi[2], xi[3]]], (1, 1), (2, 0))
        for k in (1, 2):
            v_side = psi @ psi_t
            w_side = psi_t @ psi
            if k == 2:
                v_side, w_side = v_side @ v_side, w_side @ w_side
            self.assertTrue(s_trace(v_side).close_to(s_trace(w_side), atol=1e-12))

    def test_superdeterminant_examples(self):
        eye = SuperMatrix.identity(self.pool, (1, 1))
        self.assertTrue(s_det(eye).close_to(1.0, atol=0))
        d = SuperMatrix.from_array(self.pool, np.diag([6.0, 3.0]), (1, 1))
        self.assertTrue(s_det(d).close_to(2.0))

    def test_superdeterminant_singular_block(self):
        d = SuperMatrix.from_array(self.pool, np.diag([1.0, 0.0]), (1, 1))
        with self.assertRaises(SingularityError):
            s_det(d)

    def test_superdeterminant_multiplicative(self):
        for _ in range(100):
            a = random_supermatrix(self.pool, self.rng, (1, 1))
            b = random_supermatrix(self.pool, self.rng, (1, 1))
            a = a + SuperMatrix.identity(self.pool, (1, 1)).scale(2.0)
            b = b + SuperMatrix.identity(self.pool, (1, 1)).scale(2.0)
            self.assertTrue(s_det(a @ b).close_to(s_det(a) * s_det(b), atol=1e-9))

    def test_sdet_of_exp_is_exp_of_str(self):
        for _ in range(100):
            m = random_supermatrix(self.pool, self.rng, (1, 1))
            self.assertTrue(s_det(s_exp(m)).close_to(g_exp(s_trace(m)), atol=1e-9))
        pool = GeneratorPool(4)
        for _ in range(3):
            m = random_supermatrix(pool, self.rng, (2, 2), scale=0.3)
            self.assertTrue(s_det(s_exp(m)).close_to(g_exp(s_trace(m)), atol=1e-9))

    def test_inverse(self):
        pool = GeneratorPool(4)
        eye = SuperMatrix.identity(pool, (2, 2))
        for _ in range(5):
            a = random_supermatrix(pool, self.rng, (2, 2)) + eye.scale(2.0)
            self.assertTrue((a @ s_inv(a)).close_to(eye, atol=1e-10))

    def test_exp_of_numeric_matches_scipy(self):
        from scipy.linalg import expm

        body = np.array([[0.4, 0.0], [0.0, -1.3j]])
        m = SuperMatrix.from_array(self.pool, body, (1, 1))
        self.assertTrue(np.allclose(s_exp(m).body(), expm(body), atol=1e-13))
        self.assertAlmostEqual(abs(s_det(s_exp(m)).body - cmath.exp(0.4 + 1.3j)), 0.0, places=12)
