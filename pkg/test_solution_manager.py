import json
import os
import tempfile
import unittest

import numpy as np

from core.data_contracts import DataLoadError, FlowLineFamily, SolveReport
from core.spectral_core import BracketField, make_grid
from managers.config_manager import SolveConfig
from managers.solution_manager import SolutionManager, solution_document


class TestSolutionManager(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "out", "solution.json")
        self.cfg = SolveConfig(K=8, N=16)
        grid = make_grid(16)
        h = BracketField.reference(8, grid).h
        h[9] = 0.1 / 3.0 * grid.nodes
        h[7] = np.conj(h[9])
        self.solution = FlowLineFamily(1.0 / 3.0, (0.1, -0.2), BracketField(0.5, h, grid))
        self.report = SolveReport(
            solution=self.solution,
            iterations=2,
            converged=True,
            residual_history=[(1.0, 0.5, 0.0), (1e-3, 1e-4, 0.0), (1e-11, 1e-12, 0.0)],
            contraction_ratios=[1e-3, 1e-8],
            analyticity_width_of_trace=float("inf"),
            message="Converged in 2 iterations",
        )

    def tearDown(self):
        self.tmp.cleanup()

    def test_document_contents(self):
        doc = solution_document(self.report, self.cfg)
        self.assertEqual(doc["grid"]["K"], 8)
        self.assertEqual(len(doc["grid"]["theta_nodes"]), 17)
        self.assertEqual(doc["residual"]["interior"], 1e-11)
        np.testing.assert_array_equal(doc["leading"]["k"], np.arange(-8, 9))

    def test_reload_is_bit_exact(self):
        SolutionManager(self.path).save(self.report, self.cfg, {"vorticity": {"type": "constant", "value": 4.0}})
        record = SolutionManager(self.path).load()
        self.assertEqual(record.solution.R, 1.0 / 3.0)
        self.assertEqual(record.solution.p, (0.1, -0.2))
        self.assertTrue(np.array_equal(record.solution.a.h, self.solution.a.h))
        self.assertEqual(record.numerics, self.cfg)
        self.assertEqual(record.analyticity_width_of_trace, float("inf"))
        self.assertEqual(record.residual["boundary"], 1e-12)
        self.assertEqual(record.problem["vorticity"]["value"], 4.0)

    def test_saving_twice_gives_identical_bytes(self):
        second = os.path.join(self.tmp.name, "again.json")
        SolutionManager(self.path).save(self.report, self.cfg)
        SolutionManager(second).save(self.report, self.cfg)
        with open(self.path, "rb") as a, open(second, "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_shape_mismatch(self):
        SolutionManager(self.path).save(self.report, self.cfg)
        with open(self.path, "r", encoding="utf-8") as f:
            data = json.load(f)
        data["grid"]["N"] = 12
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        with self.assertRaises(DataLoadError):
            SolutionManager(self.path).load()

    def test_missing_key_and_missing_file(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump({"format_version": 1, "R": 1.0}, f)
        with self.assertRaises(DataLoadError):
            SolutionManager(self.path).load()
        with self.assertRaises(DataLoadError):
            SolutionManager(os.path.join(self.tmp.name, "none.json")).load()


if __name__ == "__main__":
    unittest.main()
