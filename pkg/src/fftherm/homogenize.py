"""Assembly of the homogenized conductivity tensor from canonical loadings.

Scalar conduction needs exactly three unit temperature-gradient loadings
e1, e2, e3; column j of the tensor is minus the volume-averaged flux under
loading e_j.  The three solves are independent and share the immutable grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fft_solver import (
    DEFAULT_ACC,
    DEFAULT_MAX_ITER,
    PhaseConductivities,
    SolveReport,
    accelerated_solve,
    basic_solve,
)
from .voxelgrid import PhaseGrid

__all__ = [
    "HomogenizedTensor",
    "NonConvergedError",
    "homogenized_tensor",
    "isotropic_estimate",
    "anisotropy_index",
    "result_record",
    "save_result",
]

_SCHEMES = {"accelerated": accelerated_solve, "basic": basic_solve}


class NonConvergedError(RuntimeError):
    """A loading failed to converge; carries the reports gathered so far."""

    def __init__(self, loading: int, reports: list[SolveReport]):
        self.loading = loading
        self.reports = reports
        rep = reports[-1]
        super().__init__(
            f"loading e{loading + 1} not converged after {rep.iterations} iterations "
            f"(eps_comp={rep.eps_comp:.3e}, eps_eq={rep.eps_eq:.3e})"
        )


def isotropic_estimate(tensor) -> float:
    """Mean of the diagonal elements of a 3x3 conductivity tensor."""
    t = np.asarray(tensor, dtype=float)
    return float((t[0, 0] + t[1, 1] + t[2, 2]) / 3.0)


def anisotropy_index(tensor) -> float:
    """Largest |off-diagonal| relative to the isotropic estimate."""
    t = np.asarray(tensor, dtype=float)
    off = np.abs(t - np.diag(np.diag(t))).max()
    return float(off / isotropic_estimate(t))


@dataclass(frozen=True)
class HomogenizedTensor:
    """3x3 effective conductivity with isotropy diagnostics.

    ``tensor[:, j]`` is -<flux> under unit loading e_j.  ``isotropic_estimate``
    is the mean diagonal, ``anisotropy_index`` the largest off-diagonal
    magnitude relative to it (reported, not asserted: the microstructures are
    only statistically isotropic).
    """

    tensor: np.ndarray
    reports: tuple[SolveReport, ...]
    isotropic_estimate: float
    anisotropy_index: float


def homogenized_tensor(
    grid: PhaseGrid,
    phases: PhaseConductivities,
    acc: float = DEFAULT_ACC,
    scheme: str = "accelerated",
    max_iter: int = DEFAULT_MAX_ITER,
) -> HomogenizedTensor:
    """Solve the three unit loadings and assemble the effective tensor.

    <flux> is taken as the arithmetic voxel mean of the converged flux field
    in real space.  Raises :class:`NonConvergedError` (with the partial
    reports) as soon as one loading fails.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {sorted(_SCHEMES)}")
    solve = _SCHEMES[scheme]
    tensor = np.zeros((3, 3))
    reports: list[SolveReport] = []
    for j in range(3):
        loading = np.zeros(3)
        loading[j] = 1.0
        _, flux, report = solve(grid, phases, loading, acc=acc, max_iter=max_iter)
        reports.append(report)
        if not report.converged:
            raise NonConvergedError(loading=j, reports=reports)
        tensor[:, j] = -flux.mean(axis=(1, 2, 3))
    return HomogenizedTensor(
        tensor=tensor,
        reports=tuple(reports),
        isotropic_estimate=isotropic_estimate(tensor),
        anisotropy_index=anisotropy_index(tensor),
    )


def result_record(result: HomogenizedTensor, grid: PhaseGrid, phases: PhaseConductivities) -> dict:
    """JSON-ready record of a homogenization run (tensor + provenance)."""
    return {
        "tensor": result.tensor.tolist(),
        "isotropic_estimate": result.isotropic_estimate,
        "anisotropy_index": result.anisotropy_index,
        "loadings": [
            {
                "iterations": rep.iterations,
                "eps_comp": rep.eps_comp,
                "eps_eq": rep.eps_eq,
                "converged": rep.converged,
                "scheme": rep.scheme,
                "wall_time": rep.wall_time,
            }
            for rep in result.reports
        ],
        "provenance": {
            "seed": grid.seed,
            "resolution": grid.resolution,
            "n_sp": grid.n_sp,
            "layer": grid.layer,
            "f_sp": grid.f_sp,
            "phases": {
                "k_matrix": phases.k_matrix,
                "k_inclusion": phases.k_inclusion,
                "k_coating": phases.k_coating,
            },
        },
    }


def save_result(result: HomogenizedTensor, grid: PhaseGrid, phases: PhaseConductivities, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(result_record(result, grid, phases), indent=2, sort_keys=True) + "\n")
    return path
