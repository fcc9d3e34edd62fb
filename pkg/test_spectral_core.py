import math
import unittest

import numpy as np

from core.data_contracts import GridError, UndefinedWidthError
from core.spectral_core import (
    BracketField,
    SGrid,
    SGridFunction,
    ThetaSeries,
    analyticity_width,
    decompose_leading,
    diff_s,
    diff_theta,
    j_norm,
    kondratev_norm,
    make_grid,
    theta_nodes,
    theta_transform,
    x_sigma_norm,
)


class TestThetaSeries(unittest.TestCase):
    def test_cos_sin_evaluation(self):
        series = ThetaSeries.from_cos_sin([1.0, 0.5], [0.0, 0.25])
        theta = np.array([0.0, 0.7, 2.0])
        expected = 1.0 + 0.5 * np.cos(theta) + 0.25 * np.sin(theta)
        np.testing.assert_allclose(series.evaluate(theta), expected, atol=1e-14)
        self.assertEqual(series.K, 3)

    def test_transform_recovers_cosine(self):
        K = 4
        series = theta_transform(np.cos(theta_nodes(K)), K)
        self.assertAlmostEqual(abs(series.mode(1) - 0.5), 0.0, places=14)
        self.assertAlmostEqual(abs(series.mode(-1) - 0.5), 0.0, places=14)
        self.assertAlmostEqual(abs(series.mode(0)), 0.0, places=14)
        self.assertEqual(series.mode(9), 0j)

    def test_transform_rejects_bad_sample_counts(self):
        with self.assertRaises(GridError):
            theta_transform(np.ones(8))
        with self.assertRaises(GridError):
            theta_transform(np.ones(5))
        with self.assertRaises(GridError):
            theta_transform(np.ones(9), K=5)

    def test_samples_match_direct_evaluation(self):
        series = ThetaSeries.from_cos_sin([0.2, 0.0, 0.3], [0.0, 0.1], K=5)
        np.testing.assert_allclose(series.samples(), series.evaluate(theta_nodes(5)), atol=1e-14)

    def test_diff_theta(self):
        series = ThetaSeries.from_cos_sin([0.0, 1.0], K=4)
        theta = np.linspace(0.0, 2.0 * np.pi, 7)
        np.testing.assert_allclose(np.real(diff_theta(series, 1).evaluate(theta)), -np.sin(theta), atol=1e-14)
        np.testing.assert_allclose(np.real(diff_theta(series, 2).evaluate(theta)), -np.cos(theta), atol=1e-14)
        with self.assertRaises(GridError):
            diff_theta(series, -1)

    def test_resize_keeps_low_modes(self):
        series = ThetaSeries.from_cos_sin([1.0, 0.5], K=3).resized(6)
        self.assertEqual(series.K, 6)
        self.assertAlmostEqual(abs(series.mode(1) - 0.25), 0.0, places=15)


class TestSGrid(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16)

    def test_nodes_are_increasing_and_closed(self):
        s = self.grid.nodes
        self.assertEqual(s[0], 0.0)
        self.assertEqual(s[-1], 1.0)
        self.assertTrue(np.all(np.diff(s) > 0))

    def test_derivative_of_polynomial(self):
        s = self.grid.nodes
        np.testing.assert_allclose(self.grid.derivative(s**3), 3.0 * s**2, atol=1e-11)
        np.testing.assert_allclose(self.grid.derivative(np.full(16, 2.5)), np.zeros(16), atol=0.0)

    def test_euler_operator(self):
        s = self.grid.nodes
        np.testing.assert_allclose(self.grid.euler(s**4), 2.0 * s**4, atol=1e-11)

    def test_weights_integrate_polynomials(self):
        s = self.grid.nodes
        self.assertAlmostEqual(float(np.sum(self.grid.weights)), 1.0, places=14)
        self.assertAlmostEqual(float(self.grid.weights @ s**5), 1.0 / 6.0, places=14)

    def test_evaluate_interpolates(self):
        s = self.grid.nodes
        self.assertAlmostEqual(float(self.grid.evaluate(s**2, 0.3)), 0.09, places=12)

    def test_diff_s(self):
        s = self.grid.nodes
        f = SGridFunction(s**3, self.grid)
        np.testing.assert_allclose(diff_s(f, 2).values, 6.0 * s, atol=1e-9)
        with self.assertRaises(GridError):
            diff_s(f, 3)

    def test_too_few_nodes(self):
        with self.assertRaises(GridError):
            SGrid(2)
        with self.assertRaises(GridError):
            SGridFunction(np.ones(5), self.grid)


class TestBracketField(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16)

    def test_shape_is_checked(self):
        with self.assertRaises(GridError):
            BracketField(0.5, np.zeros((4, 16)), self.grid)
        with self.assertRaises(GridError):
            BracketField(0.5, np.zeros((5, 12)), self.grid)

    def test_reference_field(self):
        a = BracketField.reference(4, self.grid)
        np.testing.assert_allclose(a.values()[0], self.grid.nodes, atol=1e-15)
        self.assertEqual(a.trace().mode(0), 1.0)

    def test_combining_fields_needs_matching_lambda(self):
        a = BracketField.reference(4, self.grid)
        with self.assertRaises(GridError):
            a + a.shift(0.5)
        np.testing.assert_allclose((a - a).h, 0.0)

    def test_decompose_leading(self):
        s = self.grid.nodes
        h = np.zeros((9, 16), dtype=complex)
        h[4] = 2.0 + s**2
        h[5] = 1j * s
        v, w = decompose_leading(BracketField(0.0, h, self.grid))
        self.assertEqual(v.mode(0), 2.0)
        self.assertEqual(v.mode(1), 0.0)
        np.testing.assert_allclose(w.h[4], s**2, atol=1e-15)
        np.testing.assert_allclose(w.h[:, 0], 0.0)

    def test_real_part_projects_out_imaginary_values(self):
        h = np.zeros((9, 16), dtype=complex)
        h[4] = 1.0
        h[5] = 0.5j
        real = BracketField(0.5, h, self.grid).real_part()
        self.assertAlmostEqual(float(np.max(np.abs(real.physical().imag))), 0.0, places=14)


class TestNorms(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16)

    def test_kondratev_norm_of_reference(self):
        a = BracketField.reference(3, self.grid)
        # int_0^1 2 s^3 ds = 1/2 per unit mode
        self.assertAlmostEqual(kondratev_norm(a, 0.0, 0), math.sqrt(math.pi), places=12)
        # the Euler term adds (1/2)^2 * 1/2
        self.assertAlmostEqual(kondratev_norm(a, 0.0, 1), math.sqrt(1.25 * math.pi), places=12)

    def test_kondratev_norm_diverges_at_origin(self):
        w = BracketField.reference(3, self.grid).shift(-0.5)
        self.assertEqual(kondratev_norm(w, 0.75, 0), float("inf"))

    def test_kondratev_norm_order_is_bounded(self):
        with self.assertRaises(GridError):
            kondratev_norm(BracketField.reference(3, self.grid), 0.0, 5)

    def test_x_sigma_norm(self):
        series = ThetaSeries.from_cos_sin([3.0], K=3)
        self.assertAlmostEqual(x_sigma_norm(series, 0.0, 0), 3.0, places=14)
        cosine = ThetaSeries.from_cos_sin([0.0, 1.0], K=3)
        self.assertAlmostEqual(x_sigma_norm(cosine, 0.5, 1), math.sqrt(math.e), places=13)
        with self.assertRaises(GridError):
            x_sigma_norm(series, -0.1, 0)

    def test_j_norm_of_reference_is_its_leading_term(self):
        a = BracketField.reference(4, self.grid)
        self.assertAlmostEqual(j_norm(a, 0.75, 4, 0.2), 1.0, places=13)


class TestAnalyticityWidth(unittest.TestCase):
    def _series(self, amplitude):
        K = 40
        k = np.arange(-K, K + 1)
        return ThetaSeries(amplitude(np.abs(k)))

    def test_exponential_decay(self):
        estimate = analyticity_width(self._series(lambda k: np.exp(-0.7 * k)))
        self.assertAlmostEqual(estimate.width, 0.7, delta=0.02)

    def test_algebraic_prefactor(self):
        estimate = analyticity_width(self._series(lambda k: (1.0 + k) ** 2 * np.exp(-0.3 * k)))
        self.assertAlmostEqual(estimate.width, 0.3, delta=0.05)
        self.assertAlmostEqual(estimate.beta, -2.0, delta=1e-6)

    def test_too_few_significant_modes(self):
        with self.assertRaises(UndefinedWidthError):
            analyticity_width(ThetaSeries.constant(1.0, 20))


if __name__ == "__main__":
    unittest.main()
