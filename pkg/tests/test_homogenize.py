import json

import numpy as np
import pytest

from fftherm.fft_solver import PhaseConductivities
from fftherm.homogenize import (
    HomogenizedTensor,
    NonConvergedError,
    anisotropy_index,
    homogenized_tensor,
    isotropic_estimate,
    result_record,
    save_result,
)
from fftherm.microstructure import rsa_generate
from fftherm.voxelgrid import INCLUSION, PhaseGrid, voxelize

PAPER = PhaseConductivities(1.0, 0.2, 400.0)


@pytest.fixture(scope="module")
def two_phase_result():
    """One N=32 random-spheres solve shared by the diagnostics tests."""
    pack = rsa_generate(6, 0.3, seed=21)
    grid = voxelize(pack, 0.0, 32)
    phases = PhaseConductivities(1.0, 0.2, 1.0)
    return homogenized_tensor(grid, phases, acc=1e-6), grid, phases


class TestIsotropicEstimate:
    def test_identity_scaled(self):
        assert isotropic_estimate(4.0 * np.eye(3)) == pytest.approx(4.0)

    def test_laminate_diagonal(self):
        tensor = np.diag([1.0 / 3.0, 0.6, 0.6])
        assert isotropic_estimate(tensor) == pytest.approx(0.51111111111111111, rel=1e-14)

    def test_symmetrization_invariant(self):
        rng = np.random.default_rng(3)
        t = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        assert isotropic_estimate(t) == pytest.approx(isotropic_estimate(0.5 * (t + t.T)))


def test_anisotropy_index_of_diagonal_is_zero():
    assert anisotropy_index(np.diag([1.0, 2.0, 3.0])) == 0.0


class TestHomogenizedTensor:
    def test_homogeneous_grid(self):
        grid = PhaseGrid(np.zeros((16, 16, 16), np.uint8), layer=0.0, seed=0, n_sp=0, f_sp=0.0)
        res = homogenized_tensor(grid, PhaseConductivities(2.5, 1.0, 1.0), acc=1e-10)
        assert np.abs(res.tensor - 2.5 * np.eye(3)).max() < 1e-10
        assert res.isotropic_estimate == pytest.approx(2.5)
        assert all(rep.iterations <= 2 for rep in res.reports)

    def test_laminate_tensor(self):
        labels = np.zeros((16, 16, 16), np.uint8)
        labels[8:, :, :] = INCLUSION
        grid = PhaseGrid(labels=labels, layer=0.0, seed=0, n_sp=0, f_sp=0.5)
        res = homogenized_tensor(grid, PAPER, acc=1e-8)
        assert res.tensor[0, 0] == pytest.approx(1.0 / 3.0, rel=1e-6)
        assert res.tensor[1, 1] == pytest.approx(0.6, rel=1e-6)
        assert res.tensor[2, 2] == pytest.approx(0.6, rel=1e-6)
        off = np.abs(res.tensor - np.diag(np.diag(res.tensor))).max()
        assert off < 1e-8

    def test_phase_bounds_contain_estimate(self, two_phase_result):
        res, _, phases = two_phase_result
        assert min(phases.values) <= res.isotropic_estimate <= max(phases.values)

    def test_near_symmetry(self, two_phase_result):
        res, _, _ = two_phase_result
        defect = np.abs(res.tensor - res.tensor.T).max()
        assert defect / res.isotropic_estimate < 1e-3

    def test_columns_are_mean_fluxes(self, two_phase_result):
        res, _, _ = two_phase_result
        assert isinstance(res, HomogenizedTensor)
        assert len(res.reports) == 3
        assert all(rep.converged for rep in res.reports)

    def test_non_convergence_carries_reports(self):
        labels = np.zeros((16, 16, 16), np.uint8)
        labels[8:, :, :] = INCLUSION
        grid = PhaseGrid(labels=labels, layer=0.0, seed=0, n_sp=0, f_sp=0.5)
        with pytest.raises(NonConvergedError) as exc_info:
            homogenized_tensor(grid, PAPER, acc=1e-12, max_iter=3)
        err = exc_info.value
        assert err.loading == 0
        assert len(err.reports) == 1
        assert not err.reports[0].converged

    def test_unknown_scheme(self):
        grid = PhaseGrid(np.zeros((8, 8, 8), np.uint8), layer=0.0, seed=0, n_sp=0, f_sp=0.0)
        with pytest.raises(ValueError):
            homogenized_tensor(grid, PAPER, scheme="anderson")


class TestResultRecord:
    def test_record_and_save(self, two_phase_result, tmp_path):
        res, grid, phases = two_phase_result
        record = result_record(res, grid, phases)
        assert np.allclose(record["tensor"], res.tensor)
        assert record["provenance"]["resolution"] == 32
        assert record["provenance"]["phases"]["k_inclusion"] == 0.2
        assert len(record["loadings"]) == 3
        assert {"iterations", "eps_comp", "eps_eq", "converged", "scheme", "wall_time"} <= set(
            record["loadings"][0]
        )
        path = save_result(res, grid, phases, tmp_path / "result.json")
        parsed = json.loads(path.read_text())
        assert parsed["isotropic_estimate"] == pytest.approx(res.isotropic_estimate)
