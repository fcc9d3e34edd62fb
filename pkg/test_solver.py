import math
import unittest

import numpy as np

from core.data_contracts import (
    ConfigError,
    ConvergenceError,
    FlowLineFamily,
    GridError,
    IncompatibilityRangeError,
    MonotonicityError,
)
from core.field_ops import BoundaryCurve, disk_boundary, translated_disk_boundary
from core.solver import (
    compatibilize,
    continuation_solve,
    effective_tolerance,
    flow_line,
    manufactured_radial,
    newton_solve,
    reconstruct_stream,
    reference_family,
    residual,
    roundoff_floor,
    stream_grid,
    vorticity_on_grid,
)
from core.spectral_core import BracketField, SGridFunction, ThetaSeries, make_grid
from core.stepping import get_step_method
from core.stepping.base import StepContext
from managers.config_manager import SolveConfig
from utils.constants import (
    DEFAULT_TOL_RESIDUAL,
    JACOBIAN_FD,
    JACOBIAN_FROZEN,
    OUTSIDE_SENTINEL,
)


class TestResidual(unittest.TestCase):
    def setUp(self):
        self.cfg = SolveConfig(K=8, N=16)
        self.grid = make_grid(16)
        self.F = vorticity_on_grid(4.0, self.grid)

    def test_reference_solves_the_unit_disk(self):
        res = residual(self.F, disk_boundary(1.0), reference_family(8, self.grid), self.cfg)
        self.assertLess(res.measure, 1e-12)
        self.assertLess(res.cokernel_magnitude, 1e-12)

    def test_boundary_residual_of_scaled_disk(self):
        res = residual(self.F, disk_boundary(2.0), reference_family(8, self.grid), self.cfg)
        self.assertAlmostEqual(res.boundary_sup, 3.0, places=12)
        self.assertLess(res.interior_sup, 1e-12)

    def test_uniformly_stretched_family(self):
        a = BracketField.reference(8, self.grid) * 1.01
        res = residual(self.F, disk_boundary(1.01), FlowLineFamily(1.0, (0.0, 0.0), a), self.cfg)
        expected = 4.0 / 1.01**2 - 4.0
        self.assertAlmostEqual(expected, -0.0788, delta=1e-4)
        np.testing.assert_allclose(res.interior.physical().real, expected, atol=1e-12)
        self.assertAlmostEqual(res.interior_sup, abs(expected), places=12)
        self.assertLess(res.boundary_sup, 1e-12)

    def test_vorticity_profile_forms(self):
        self.assertEqual(self.F.values.shape, (16,))
        profile = vorticity_on_grid(lambda psi: 4.0 + 0.1 * psi, self.grid)
        np.testing.assert_allclose(profile.values, 4.0 + 0.1 * self.grid.nodes**2)
        with self.assertRaises(GridError):
            vorticity_on_grid(SGridFunction(np.ones(20), make_grid(20)), self.grid)


class TestNewton(unittest.TestCase):
    def setUp(self):
        self.cfg = SolveConfig(K=8, N=16)
        self.grid = make_grid(16)
        self.F = vorticity_on_grid(4.0, self.grid)

    def test_scaled_disk(self):
        report = newton_solve(self.F, disk_boundary(2.0), self.cfg)
        self.assertTrue(report.converged)
        self.assertAlmostEqual(report.solution.R, 2.0, places=9)
        self.assertLess(math.hypot(*report.solution.p), 1e-9)
        deviation = report.solution.a.h - BracketField.reference(8, self.grid).h
        self.assertLess(float(np.max(np.abs(deviation))), 1e-9)
        self.assertEqual(len(report.residual_history), report.iterations + 1)
        self.assertEqual(len(report.contraction_ratios), report.iterations)

    def test_reference_needs_no_iterations(self):
        report = newton_solve(self.F, disk_boundary(1.0), self.cfg)
        self.assertEqual(report.iterations, 0)
        self.assertEqual(report.solution.R, 1.0)

    def test_translated_disk(self):
        cfg = SolveConfig(K=16, N=24)
        F = vorticity_on_grid(4.0, make_grid(24))
        report = newton_solve(F, translated_disk_boundary(0.1, K=16), cfg)
        self.assertTrue(report.converged)
        self.assertAlmostEqual(report.solution.R, 1.0, delta=1e-8)
        self.assertAlmostEqual(report.solution.p[0], 0.1, delta=1e-8)
        self.assertAlmostEqual(report.solution.p[1], 0.0, delta=1e-8)

    def test_rigid_disk_keeps_stagnation_point(self):
        F = vorticity_on_grid(lambda psi: 4.0 + 0.1 * psi, self.grid)
        report = newton_solve(F, disk_boundary(1.0), self.cfg)
        self.assertTrue(report.converged)
        self.assertLess(report.p_norm, 1e-9)

    def test_manufactured_radial_solution(self):
        profile = SGridFunction(1.0 + 0.05 * self.grid.nodes**2, self.grid)
        F, b_value, a = manufactured_radial(profile, K=8)
        self.assertAlmostEqual(b_value, 1.05, places=14)
        report = newton_solve(F, disk_boundary(b_value), self.cfg.replace(tol_residual=1e-10))
        self.assertAlmostEqual(report.solution.R, 1.0, delta=1e-8)
        self.assertLess(float(np.max(np.abs(report.solution.a.h - a.h))), 1e-8)

    def test_manufactured_profile_checks(self):
        s = self.grid.nodes
        with self.assertRaises(GridError):
            manufactured_radial(SGridFunction(2.0 + s**2, self.grid))
        with self.assertRaises(MonotonicityError):
            manufactured_radial(SGridFunction(1.0 - 1.5 * s**2, self.grid))

    def test_iteration_limit_raises_with_partial_report(self):
        cfg = SolveConfig(K=16, N=24, max_iter=1)
        F = vorticity_on_grid(4.0, make_grid(24))
        with self.assertRaises(ConvergenceError) as ctx:
            newton_solve(F, translated_disk_boundary(0.1, K=16), cfg)
        self.assertIsNotNone(ctx.exception.report)
        self.assertFalse(ctx.exception.report.converged)
        self.assertEqual(ctx.exception.report.iterations, 1)

    def test_input_checks(self):
        with self.assertRaises(ConfigError):
            newton_solve(self.F, disk_boundary(1.0, tau=0.1), self.cfg)
        with self.assertRaises(GridError):
            newton_solve(vorticity_on_grid(4.0, make_grid(20)), disk_boundary(1.0), self.cfg)


class TestStepAcceptance(unittest.TestCase):
    def test_fourfold_boundary_takes_full_steps(self):
        cfg = SolveConfig(K=16, N=24)
        F = vorticity_on_grid(4.0, make_grid(24))
        b = BoundaryCurve(ThetaSeries.from_cos_sin([1.0, 0.0, 0.0, 0.0, 0.02], K=16))
        report = newton_solve(F, b, cfg)
        self.assertTrue(report.converged)
        self.assertAlmostEqual(report.solution.R, 0.99930067, delta=1e-6)
        self.assertLess(max(report.residual_history[-1][:2]), report.tolerance)

    def test_first_full_step_needs_no_halving(self):
        cfg = SolveConfig(K=16, N=24, max_halvings=0, max_iter=3)
        F = vorticity_on_grid(4.0, make_grid(24))
        b = BoundaryCurve(ThetaSeries.from_cos_sin([1.0, 0.0, 0.0, 0.0, 0.02], K=16))
        with self.assertRaises(ConvergenceError) as ctx:
            newton_solve(F, b, cfg)
        self.assertGreaterEqual(ctx.exception.report.iterations, 1)


class TestRoundoffTolerance(unittest.TestCase):
    def test_floor_grows_with_resolution(self):
        self.assertLess(roundoff_floor(16), 1e-10)
        self.assertGreater(roundoff_floor(48), DEFAULT_TOL_RESIDUAL)
        self.assertEqual(roundoff_floor(48, 2.0), 2.0 * roundoff_floor(48))

    def test_larger_tolerance_is_kept(self):
        state = reference_family(8, make_grid(48))
        self.assertEqual(effective_tolerance(SolveConfig(N=48, tol_residual=1e-6), state), 1e-6)
        self.assertEqual(effective_tolerance(SolveConfig(N=48), state), roundoff_floor(48))

    def test_default_numerics_converge_off_the_exact_family(self):
        cfg = SolveConfig()
        F = vorticity_on_grid(4.0, make_grid(cfg.N))
        b = BoundaryCurve(ThetaSeries.from_cos_sin([1.0, 0.0, 0.03], K=cfg.K))
        report = continuation_solve(F, b, cfg)
        self.assertTrue(report.converged)
        self.assertGreaterEqual(report.tolerance, cfg.tol_residual)
        self.assertLess(max(report.residual_history[-1][:2]), report.tolerance)

    def test_default_numerics_pin_the_rigid_disk(self):
        cfg = SolveConfig()
        F = vorticity_on_grid(lambda psi: 4.0 + 0.1 * psi, make_grid(cfg.N))
        report = newton_solve(F, disk_boundary(1.0), cfg)
        self.assertTrue(report.converged)
        self.assertLess(report.p_norm, 1e-9)


class TestSteps(unittest.TestCase):
    def setUp(self):
        self.cfg = SolveConfig(K=8, N=16)
        self.grid = make_grid(16)
        self.F = vorticity_on_grid(4.0, self.grid)
        self.b = disk_boundary(2.0)

    def test_registry(self):
        self.assertEqual(get_step_method(JACOBIAN_FROZEN).name(), JACOBIAN_FROZEN)
        self.assertEqual(get_step_method(JACOBIAN_FD).name(), JACOBIAN_FD)
        self.assertIsNone(get_step_method("secant"))

    def test_frozen_and_finite_difference_steps_agree(self):
        state = reference_family(8, self.grid)
        context = StepContext(config=self.cfg, evaluate=lambda x: residual(self.F, self.b, x, self.cfg))
        res = context.evaluate(state)
        frozen = get_step_method(JACOBIAN_FROZEN).compute(state, res, context)
        fd = get_step_method(JACOBIAN_FD).compute(state, res, context)
        self.assertAlmostEqual(frozen.dR, -1.5, places=12)
        self.assertAlmostEqual(fd.dR, -1.5, delta=1e-5)
        self.assertLess(float(np.max(np.abs(fd.dh))), 1e-4)


class TestContinuation(unittest.TestCase):
    def test_steps_reach_the_same_solution(self):
        cfg = SolveConfig(K=16, N=24)
        F = vorticity_on_grid(4.0, make_grid(24))
        b = translated_disk_boundary(0.1, K=16)
        direct = newton_solve(F, b, cfg)
        stepped = continuation_solve(F, b, cfg.replace(continuation_steps=4))
        self.assertEqual([entry["t"] for entry in stepped.continuation], [0.25, 0.5, 0.75, 1.0])
        self.assertAlmostEqual(stepped.solution.p[0], direct.solution.p[0], delta=1e-8)
        self.assertAlmostEqual(stepped.solution.R, direct.solution.R, delta=1e-8)


class TestSpectralConvergence(unittest.TestCase):
    def test_translated_disk_error_decays_with_K(self):
        # the exact family is the rigid rotation about (eps, 0); truncating b at K is the only error
        floor = 1e-8
        for eps in (0.1, 0.3):
            with self.subTest(eps=eps):
                errors = []
                for K in (8, 16, 32):
                    cfg = SolveConfig(K=K, N=48, continuation_steps=3)
                    report = continuation_solve(vorticity_on_grid(4.0, make_grid(48)), translated_disk_boundary(eps, K=K), cfg)
                    self.assertTrue(report.converged)
                    sol = report.solution
                    deviation = np.max(np.abs(sol.a.h - BracketField.reference(K, sol.a.grid).h))
                    errors.append(max(abs(sol.R - 1.0), abs(sol.p[0] - eps), abs(sol.p[1]), float(deviation)))
                for coarse, fine in zip(errors, errors[1:]):
                    self.assertLessEqual(fine, max(0.2 * coarse, floor))
                self.assertLess(errors[-1], floor)


class TestCompatibilize(unittest.TestCase):
    def setUp(self):
        self.cfg = SolveConfig(K=8, N=16)
        self.grid = make_grid(16)

    def test_scaled_disk_scale(self):
        c, report = compatibilize(vorticity_on_grid(4.0, self.grid), disk_boundary(2.0), self.cfg)
        self.assertAlmostEqual(c, 0.5, delta=1e-6)
        self.assertAlmostEqual(report.solution.R, 1.0, delta=1e-6)

    def test_manufactured_pair_is_compatible(self):
        profile = SGridFunction(1.0 + 0.05 * self.grid.nodes**2, self.grid)
        F, b_value, _ = manufactured_radial(profile, K=8)
        c, _ = compatibilize(F, disk_boundary(b_value), self.cfg)
        self.assertAlmostEqual(c, 1.0, delta=1e-8)

    def test_scale_out_of_range(self):
        with self.assertRaises(IncompatibilityRangeError):
            compatibilize(vorticity_on_grid(4.0, self.grid), disk_boundary(8.0), self.cfg)


class TestStreamFunction(unittest.TestCase):
    def setUp(self):
        self.grid = make_grid(16)

    def test_rigid_rotation(self):
        sol = reference_family(8, self.grid)
        x = np.array([0.0, 0.3, -0.5, 0.6])
        y = np.array([0.0, 0.4, 0.1, -0.7])
        psi, outside = reconstruct_stream(sol, x, y)
        np.testing.assert_allclose(psi, x**2 + y**2, atol=1e-10)
        self.assertFalse(outside.any())

    def test_points_outside_carry_the_sentinel(self):
        sol = reference_family(8, self.grid)
        psi, outside = reconstruct_stream(sol, np.array([2.0]), np.array([0.0]))
        self.assertTrue(outside[0])
        self.assertEqual(psi[0], OUTSIDE_SENTINEL)

    def test_translated_centre(self):
        sol = FlowLineFamily(1.0, (0.1, 0.0), BracketField.reference(8, self.grid))
        psi, _ = reconstruct_stream(sol, np.array([0.0]), np.array([0.0]))
        self.assertAlmostEqual(float(psi[0]), 0.01, delta=1e-10)

    def test_stream_grid_shape(self):
        xs, ys, psi, outside = stream_grid(reference_family(8, self.grid), 5, 3)
        self.assertEqual(psi.shape, (3, 5))
        self.assertEqual(xs[0], -1.0)
        self.assertEqual(ys[-1], 1.0)
        self.assertTrue(outside[0, 0])
        self.assertAlmostEqual(float(psi[1, 2]), 0.0, places=12)
        with self.assertRaises(GridError):
            stream_grid(reference_family(8, self.grid), 1, 3)

    def test_reference_on_square_grid(self):
        xs, ys, psi, outside = stream_grid(reference_family(16, self.grid), 64, 64)
        X, Y = np.meshgrid(xs, ys)
        inside = ~outside
        self.assertGreater(int(inside.sum()), 2500)
        np.testing.assert_allclose(psi[inside], (X**2 + Y**2)[inside], atol=1e-10)

    def test_translated_family_on_square_grid(self):
        sol = FlowLineFamily(1.0, (0.1, 0.0), BracketField.reference(16, self.grid))
        xs, ys, psi, outside = stream_grid(sol, 64, 64)
        X, Y = np.meshgrid(xs, ys)
        expected = (X - 0.1) ** 2 + Y**2
        np.testing.assert_allclose(psi[~outside], expected[~outside], atol=1e-8)

    def test_solved_translated_disk_stream(self):
        cfg = SolveConfig(K=16, N=24)
        report = newton_solve(vorticity_on_grid(4.0, make_grid(24)), translated_disk_boundary(0.1, K=16), cfg)
        xs, ys, psi, outside = stream_grid(report.solution, 64, 64)
        X, Y = np.meshgrid(xs, ys)
        expected = (X - 0.1) ** 2 + Y**2
        np.testing.assert_allclose(psi[~outside], expected[~outside], atol=1e-7)

    def test_flow_line_radius(self):
        theta, x, y = flow_line(reference_family(8, self.grid), 0.25)
        self.assertEqual(theta.size, 17)
        np.testing.assert_allclose(np.hypot(x, y), 0.5, atol=1e-12)
        with self.assertRaises(GridError):
            flow_line(reference_family(8, self.grid), 1.5)


if __name__ == "__main__":
    unittest.main()
