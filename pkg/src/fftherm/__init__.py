"""Effective thermal conductivity of coated-sphere composites.

Pipeline: generate a periodic packing of equal spheres (RSA), rasterize it
with a conductive coating shell onto a voxel grid, solve the periodic
conduction problem spectrally under three unit gradient loadings and read
off the homogenized 3x3 conductivity tensor.  A sweep harness reproduces
the (resolution, sphere count, layer) protocol with seeded samples.
"""

from .microstructure import (
    RsaSaturationError,
    SpherePack,
    load_pack,
    periodic_distance,
    radius_from_fraction,
    rsa_generate,
    save_pack,
)
from .voxelgrid import (
    COATING,
    INCLUSION,
    MATRIX,
    PhaseGrid,
    coating_fraction,
    coating_voxel_thickness,
    load_grid,
    phase_volume_fractions,
    save_grid,
    save_slice,
    voxelize,
)
from .fft_solver import (
    PhaseConductivities,
    SolveReport,
    accelerated_solve,
    basic_solve,
    divergence_residual,
    green_apply,
    reference_conductivity,
)
from .homogenize import (
    HomogenizedTensor,
    NonConvergedError,
    anisotropy_index,
    homogenized_tensor,
    isotropic_estimate,
)
from .oracles import BoundPair, hs_bounds, laminate_effective, three_phase_bracket
from .sweep import (
    SweepPlan,
    derive_seed,
    desk_plan,
    emit_csv,
    paper_plan,
    plateau_detect,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "COATING",
    "INCLUSION",
    "MATRIX",
    "BoundPair",
    "HomogenizedTensor",
    "NonConvergedError",
    "PhaseConductivities",
    "PhaseGrid",
    "RsaSaturationError",
    "SolveReport",
    "SpherePack",
    "SweepPlan",
    "accelerated_solve",
    "anisotropy_index",
    "basic_solve",
    "coating_fraction",
    "coating_voxel_thickness",
    "derive_seed",
    "desk_plan",
    "divergence_residual",
    "emit_csv",
    "green_apply",
    "homogenized_tensor",
    "hs_bounds",
    "isotropic_estimate",
    "laminate_effective",
    "load_grid",
    "load_pack",
    "paper_plan",
    "periodic_distance",
    "phase_volume_fractions",
    "plateau_detect",
    "radius_from_fraction",
    "reference_conductivity",
    "rsa_generate",
    "run_sweep",
    "save_grid",
    "save_pack",
    "save_slice",
    "three_phase_bracket",
    "voxelize",
]
