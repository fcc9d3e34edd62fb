import math
import unittest

import numpy as np

from core.data_contracts import ConfigError, FlowLineFamily, PropertyReport
from core.diagnostics import SUITES, get_suites
from core.diagnostics.checks import (
    branch_bounds,
    check_cokernel,
    check_hardy,
    check_inverse_branches,
    check_linear_isomorphism,
    cokernel_moments,
    hardy_ratio,
    random_perturbation,
    random_raw_linear_data,
    strip_margin_report,
)
from core.field_ops import disk_boundary, translated_disk_boundary
from core.solver import reference_family
from core.spectral_core import BracketField, ThetaSeries, make_grid
from managers.config_manager import SolveConfig
from utils.constants import BOUNDARY_RELATION_TOL, LINEAR_K, LINEAR_N, LINEAR_TRIALS, ROUNDTRIP_TOL


class TestHardy(unittest.TestCase):
    def test_known_ratios(self):
        # the average of a constant is the constant below alpha = 1/2
        self.assertAlmostEqual(hardy_ratio(0.0, [1.0]), 1.0, places=12)
        # y^{-1/4} int_y^1 x^{-3/4} dx = 4 (y^{-1/4} - 1)
        self.assertAlmostEqual(hardy_ratio(0.75, [1.0]), 4.0 / math.sqrt(3.0), places=10)

    def test_critical_exponent(self):
        with self.assertRaises(ConfigError):
            hardy_ratio(0.5, [1.0])
        with self.assertRaises(ConfigError):
            check_hardy(0.5, 3)

    def test_random_functions_respect_the_bound(self):
        for alpha in (-1.0, 0.25, 1.0):
            report = check_hardy(alpha, trials=5, seed=3)
            self.assertTrue(report.passed, report.to_dict())
            self.assertEqual(report.bound, 1.0 / abs(0.5 - alpha))


class TestCokernel(unittest.TestCase):
    def test_unperturbed_moments_vanish(self):
        plus, minus = cokernel_moments(ThetaSeries.constant(1.0, 16))
        self.assertLess(abs(plus), 1e-13)
        self.assertLess(abs(minus), 1e-13)

    def test_perturbation_amplitude(self):
        rng = np.random.default_rng(1)
        series = random_perturbation(rng, 16, 4, 0.1)
        phi = np.linspace(0.0, 2.0 * np.pi, 16 * 33, endpoint=False)
        self.assertAlmostEqual(float(np.max(np.abs(series.evaluate(phi)))), 0.1, places=12)
        self.assertEqual(series.mode(0), 0.0)

    def test_random_moments_vanish(self):
        report = check_cokernel(trials=3, amplitude=0.1, seed=11)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.name, "cokernel")


class TestLinearIsomorphism(unittest.TestCase):
    def test_round_trips_hold(self):
        cfg = SolveConfig(K=8, N=16)
        report = check_linear_isomorphism(trials=3, cfg=cfg, seed=5)
        self.assertEqual(report.details["roundtrip_failures"], 0)
        self.assertLess(report.details["max_roundtrip"], 1e-8)
        self.assertLess(report.details["max_boundary_relation"], 1e-10)
        self.assertTrue(math.isfinite(report.worst_ratio))
        self.assertGreater(report.worst_ratio, 0.0)

    def test_full_size_round_trips(self):
        cfg = SolveConfig(K=LINEAR_K, N=LINEAR_N)
        report = check_linear_isomorphism(trials=LINEAR_TRIALS, cfg=cfg, seed=5)
        self.assertEqual(report.samples, 200)
        self.assertEqual(report.details["roundtrip_failures"], 0)
        self.assertLess(report.details["max_roundtrip"], ROUNDTRIP_TOL)
        self.assertLess(report.details["max_boundary_relation"], BOUNDARY_RELATION_TOL)
        self.assertLess(report.details["max_resonance"], 1e-7)

    def test_raw_data_round_trips_through_the_resonance_defect(self):
        cfg = SolveConfig(K=LINEAR_K, N=LINEAR_N)
        report = check_linear_isomorphism(trials=LINEAR_TRIALS, cfg=cfg, seed=5, raw=True)
        self.assertEqual(report.details["roundtrip_failures"], 0)
        self.assertLess(report.details["max_roundtrip"], ROUNDTRIP_TOL)
        self.assertLess(report.details["max_boundary_relation"], BOUNDARY_RELATION_TOL)
        self.assertGreater(report.details["max_resonance"], 1e-6)

    def test_raw_data_keeps_the_cokernel_clear(self):
        data = random_raw_linear_data(np.random.default_rng(2), 8, 16)
        np.testing.assert_array_equal(data.f.h[[6, 10], 0], 0.0)
        self.assertGreater(float(np.max(np.abs(data.f.h[:, 0]))), 0.0)


class TestInverseBranches(unittest.TestCase):
    def test_branch_bounds(self):
        plus, minus = branch_bounds(0, 0.75)
        self.assertAlmostEqual(plus, 0.8, places=15)
        self.assertAlmostEqual(minus, 0.8, places=15)
        plus, minus = branch_bounds(4, 0.75)
        self.assertAlmostEqual(plus, 2.0 / 6.5, places=15)
        self.assertAlmostEqual(minus, 4.0 / 3.0, places=15)

    def test_measured_ratios_stay_below_bounds(self):
        report = check_inverse_branches(trials=1, gamma=0.75, K=6, N=24, seed=2)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(len(report.details["plus_worst_by_k"]), 7)


class TestStripMargin(unittest.TestCase):
    def test_reference_flow_passes(self):
        sol = reference_family(16, make_grid(16))
        report = strip_margin_report(sol, disk_boundary(1.0), SolveConfig(K=16, N=16))
        self.assertTrue(report.passed)
        self.assertEqual(report.worst_ratio, 0.0)

    def test_slow_trace_decay_is_flagged(self):
        K = 40
        grid = make_grid(16)
        h = np.zeros((2 * K + 1, grid.N), dtype=complex)
        h[K] = 1.0
        k = np.arange(1, K + 1)
        h[K + k] = h[K - k] = (0.02 * np.exp(-0.1 * k))[:, None]
        sol = FlowLineFamily(1.0, (0.0, 0.0), BracketField(0.5, h, grid))
        report = strip_margin_report(sol, translated_disk_boundary(0.1), SolveConfig(K=K, N=16, sigma=0.2))
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.details["trace_width"], 0.1, delta=0.01)


class TestSuites(unittest.TestCase):
    def test_registry(self):
        self.assertEqual(len(get_suites("all")), len(SUITES))
        self.assertEqual([s.name() for s in get_suites("hardy")], ["hardy"])
        self.assertIsNone(get_suites("nope"))

    def test_cokernel_suite_runs(self):
        reports = get_suites("cokernel")[0].run(SolveConfig(), seed=4, trials=2)
        self.assertEqual(len(reports), 1)
        self.assertIsInstance(reports[0], PropertyReport)
        self.assertEqual(reports[0].samples, 2)

    def test_report_dict_uses_pass_key(self):
        report = PropertyReport(name="x", seed=1, samples=1, worst_ratio=2.0, bound=1.0)
        self.assertFalse(report.to_dict()["pass"])


if __name__ == "__main__":
    unittest.main()
