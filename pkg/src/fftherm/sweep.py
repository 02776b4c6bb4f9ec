"""Parameter-sweep harness over (resolution, sphere count, layer) cells.

Each cell runs ``samples_per_cell`` seeded samples (generate packing,
voxelize, homogenize) and reports the per-sample isotropic estimates with
their mean and sample standard deviation.  Sample seeds are derived from the
plan's base seed and the cell coordinates with a splitmix64 mix, so cells
are independent, reorderable and reproducible regardless of the execution
order or level of parallelism.

Per-sample failures (RSA saturation, non-convergence) are recorded in the
cell result instead of aborting the sweep; a cell still reports aggregates
when at least 70% of its samples succeeded.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .fft_solver import DEFAULT_ACC, DEFAULT_MAX_ITER, PhaseConductivities
from .homogenize import NonConvergedError, homogenized_tensor
from .microstructure import DEFAULT_MAX_ATTEMPTS, RsaSaturationError, rsa_generate
from .voxelgrid import (
    coating_fraction,
    coating_voxel_thickness,
    phase_volume_fractions,
    voxelize,
)

__all__ = [
    "SweepPlan",
    "SampleResult",
    "SweepCellResult",
    "paper_plan",
    "desk_plan",
    "derive_seed",
    "run_sweep",
    "plateau_detect",
    "emit_csv",
    "read_csv_aggregates",
    "CSV_COLUMNS",
    "CONFIG_KEYS",
    "parse_config",
    "plan_from_mapping",
]

_MASK64 = (1 << 64) - 1

# minimum fraction of successful samples for a cell to report aggregates
_AGGREGATE_MIN_OK = 0.7

CSV_COLUMNS = (
    "N",
    "n_sp",
    "layer",
    "sample",
    "seed",
    "k_iso",
    "aniso_index",
    "iterations_max",
    "eps_eq",
    "coating_frac_empirical",
    "coating_frac_analytic",
    "coating_voxels",
    "status",
)

PAPER_PHASES = PhaseConductivities(k_matrix=1.0, k_inclusion=0.2, k_coating=400.0)

PAPER_LAYERS = (0.02, 0.04, 0.06, 0.08, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class SweepPlan:
    """Full description of a sweep; every axis is overridable."""

    resolutions: tuple[int, ...]
    sphere_counts: tuple[int, ...]
    layers: tuple[float, ...]
    samples_per_cell: int
    f_sp: float
    phases: PhaseConductivities
    acc: float
    base_seed: int
    max_iter: int = DEFAULT_MAX_ITER
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        if not (self.resolutions and self.sphere_counts and self.layers):
            raise ValueError("resolutions, sphere_counts and layers must be non-empty")
        if self.samples_per_cell < 1:
            raise ValueError("samples_per_cell must be at least 1")

    def cells(self):
        for n in self.resolutions:
            for n_sp in self.sphere_counts:
                for layer in self.layers:
                    yield n, n_sp, layer


def paper_plan(base_seed: int = 2016, acc: float = DEFAULT_ACC) -> SweepPlan:
    """The published protocol: N in {64,128,256}, 30..100 spheres, 10 samples."""
    return SweepPlan(
        resolutions=(64, 128, 256),
        sphere_counts=tuple(range(30, 101, 10)),
        layers=PAPER_LAYERS,
        samples_per_cell=10,
        f_sp=0.3,
        phases=PAPER_PHASES,
        acc=acc,
        base_seed=base_seed,
    )


def desk_plan(base_seed: int = 2016, acc: float = DEFAULT_ACC) -> SweepPlan:
    """CI-sized preset: resolution capped at 128, 3 samples per cell."""
    return replace(
        paper_plan(base_seed=base_seed, acc=acc),
        resolutions=(64, 128),
        samples_per_cell=3,
    )


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, resolution: int, n_sp: int, layer: float, sample: int) -> int:
    """Per-sample 64-bit seed from the cell coordinates.

    Folds (resolution, n_sp, round(1000*layer), sample) into the base seed
    with successive splitmix64 steps.
    """
    h = base_seed & _MASK64
    for value in (resolution, n_sp, round(1000.0 * layer), sample):
        h = _splitmix64(h ^ (value & _MASK64))
    return h


@dataclass(frozen=True)
class SampleResult:
    sample: int
    seed: int
    status: str
    k_iso: float | None = None
    aniso_index: float | None = None
    iterations_max: int | None = None
    eps_eq: float | None = None
    coating_frac_empirical: float | None = None
    coating_frac_analytic: float | None = None
    coating_voxels: float | None = None


@dataclass(frozen=True)
class SweepCellResult:
    resolution: int
    n_sp: int
    layer: float
    samples: tuple[SampleResult, ...]
    mean: float | None
    std: float | None

    @property
    def n_ok(self) -> int:
        return sum(1 for s in self.samples if s.status == "ok")


def _run_sample(args) -> SampleResult:
    """One (cell, sample) job; module-level so process pools can pickle it."""
    resolution, n_sp, layer, sample, plan = args
    seed = derive_seed(plan.base_seed, resolution, n_sp, layer, sample)
    analytic = coating_fraction(layer, plan.f_sp)
    voxels = coating_voxel_thickness(layer, resolution, n_sp, plan.f_sp)
    base = dict(
        sample=sample,
        seed=seed,
        coating_frac_analytic=analytic,
        coating_voxels=voxels,
    )
    try:
        pack = rsa_generate(n_sp, plan.f_sp, seed, max_attempts=plan.max_attempts)
    except RsaSaturationError:
        return SampleResult(status="rsa_saturated", **base)
    grid = voxelize(pack, layer, resolution)
    base["coating_frac_empirical"] = phase_volume_fractions(grid)[2]
    try:
        result = homogenized_tensor(grid, plan.phases, acc=plan.acc, max_iter=plan.max_iter)
    except NonConvergedError:
        return SampleResult(status="not_converged", **base)
    return SampleResult(
        status="ok",
        k_iso=result.isotropic_estimate,
        aniso_index=result.anisotropy_index,
        iterations_max=max(rep.iterations for rep in result.reports),
        eps_eq=max(rep.eps_eq for rep in result.reports),
        **base,
    )


def _aggregate(resolution, n_sp, layer, samples) -> SweepCellResult:
    ok = [s.k_iso for s in samples if s.status == "ok"]
    n_total = len(samples)
    mean = std = None
    if ok and len(ok) >= max(1, math.ceil(_AGGREGATE_MIN_OK * n_total)):
        mean = sum(ok) / len(ok)
        std = 0.0
        if len(ok) > 1:
            std = math.sqrt(sum((v - mean) ** 2 for v in ok) / (len(ok) - 1))
    return SweepCellResult(
        resolution=resolution,
        n_sp=n_sp,
        layer=layer,
        samples=tuple(samples),
        mean=mean,
        std=std,
    )


def run_sweep(plan: SweepPlan, parallelism: int = 1) -> list[SweepCellResult]:
    """Execute every (cell, sample) job and aggregate per cell.

    Jobs are distributed over ``parallelism`` worker processes; results are
    a pure function of the plan, not of scheduling.
    """
    jobs = [
        (n, n_sp, layer, sample, plan)
        for n, n_sp, layer in plan.cells()
        for sample in range(plan.samples_per_cell)
    ]
    if parallelism <= 1:
        outcomes = [_run_sample(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_run_sample, jobs, chunksize=1))

    results = []
    per_cell = plan.samples_per_cell
    for idx, (n, n_sp, layer) in enumerate(plan.cells()):
        chunk = outcomes[idx * per_cell : (idx + 1) * per_cell]
        results.append(_aggregate(n, n_sp, layer, chunk))
    return results


def plateau_detect(layers, estimates, threshold: float = 0.02) -> float | None:
    """Smallest layer beyond which relative increments stay below ``threshold``.

    ``layers`` must be strictly increasing with at least 4 points.  Returns
    the series point at the onset of stagnation: every successive change
    after it stays below the threshold in magnitude (the step *into* the
    onset point may still be large).  The first point never qualifies (a
    constant series reports the first interior layer); returns None if the
    series never settles.
    """
    layers = list(layers)
    values = [float(v) for v in estimates]
    if len(layers) != len(values):
        raise ValueError("layers and estimates must have equal length")
    if len(layers) < 4:
        raise ValueError("plateau detection needs at least 4 points")
    if any(b <= a for a, b in zip(layers, layers[1:])):
        raise ValueError("layers must be strictly increasing")
    increments = [
        abs(values[i] - values[i - 1]) / abs(values[i - 1]) for i in range(1, len(values))
    ]
    first_quiet = len(increments)
    for i in range(len(increments) - 1, -1, -1):
        if increments[i] >= threshold:
            break
        first_quiet = i
    if first_quiet == len(increments):
        return None
    return layers[max(first_quiet, 1)]


# ------------------------------------------------------------------- CSV

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(results, path) -> Path:
    """Write one row per (cell, sample) plus mean/std aggregate rows.

    Floats are written with shortest round-trip precision, so identical
    results produce byte-identical files.  Aggregate rows carry the success
    count in the status column (``ok=<n_ok>/<n_total>``); their mean/std
    entries are over successful samples only and empty when fewer than 70%
    succeeded.
    """
    lines = [",".join(CSV_COLUMNS)]
    for cell in results:
        prefix = [str(cell.resolution), str(cell.n_sp), repr(float(cell.layer))]
        for s in cell.samples:
            lines.append(
                ",".join(
                    prefix
                    + [
                        str(s.sample),
                        str(s.seed),
                        _fmt(s.k_iso),
                        _fmt(s.aniso_index),
                        _fmt(s.iterations_max),
                        _fmt(s.eps_eq),
                        _fmt(s.coating_frac_empirical),
                        _fmt(s.coating_frac_analytic),
                        _fmt(s.coating_voxels),
                        s.status,
                    ]
                )
            )
        ok = [s for s in cell.samples if s.status == "ok"]
        status = f"ok={len(ok)}/{len(cell.samples)}"
        for kind in ("mean", "std"):
            agg = _column_aggregates(ok, kind) if cell.mean is not None else {}
            lines.append(
                ",".join(
                    prefix
                    + [
                        kind,
                        "",
                        _fmt(cell.mean if kind == "mean" else cell.std),
                        _fmt(agg.get("aniso_index")),
                        _fmt(agg.get("iterations_max")),
                        _fmt(agg.get("eps_eq")),
                        _fmt(agg.get("coating_frac_empirical")),
                        _fmt(cell.samples[0].coating_frac_analytic),
                        _fmt(cell.samples[0].coating_voxels),
                        status,
                    ]
                )
            )
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _column_aggregates(ok_samples, kind: str) -> dict:
    out = {}
    for name in ("aniso_index", "iterations_max", "eps_eq", "coating_frac_empirical"):
        vals = [float(getattr(s, name)) for s in ok_samples if getattr(s, name) is not None]
        if not vals:
            continue
        mean = sum(vals) / len(vals)
        if kind == "mean":
            out[name] = mean
        else:
            out[name] = (
                math.sqrt(sum((v - mean) ** 2 for v in vals) / (len(vals) - 1))
                if len(vals) > 1
                else 0.0
            )
    return out


def read_csv_aggregates(path) -> dict:
    """Parse aggregate rows back: {(N, n_sp, layer): {"mean": .., "std": ..}}."""
    out: dict = {}
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header in {path}")
    for line in lines[1:]:
        cells = line.split(",")
        row = dict(zip(CSV_COLUMNS, cells))
        if row["sample"] in ("mean", "std"):
            key = (int(row["N"]), int(row["n_sp"]), float(row["layer"]))
            slot = out.setdefault(key, {})
            slot[row["sample"]] = float(row["k_iso"]) if row["k_iso"] else None
    return out


# ---------------------------------------------------------------- config

CONFIG_KEYS = (
    "resolutions",
    "sphere_counts",
    "layers",
    "samples_per_cell",
    "f_sp",
    "k_matrix",
    "k_inclusion",
    "k_coating",
    "acc",
    "base_seed",
    "max_iter",
    "max_attempts",
)


def parse_config(path) -> dict:
    """Read a flat `key = value` config file ('#' starts a comment)."""
    mapping = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r} (known: {', '.join(CONFIG_KEYS)})")
        mapping[key] = value
    return mapping


def plan_from_mapping(mapping: dict, base: SweepPlan | None = None) -> SweepPlan:
    """Build a plan from string key/values, starting from ``base`` (desk preset)."""
    plan = base if base is not None else desk_plan()
    ints = lambda text: tuple(int(tok) for tok in str(text).replace(",", " ").split())
    floats = lambda text: tuple(float(tok) for tok in str(text).replace(",", " ").split())
    kwargs = {}
    if "resolutions" in mapping:
        kwargs["resolutions"] = ints(mapping["resolutions"])
    if "sphere_counts" in mapping:
        kwargs["sphere_counts"] = ints(mapping["sphere_counts"])
    if "layers" in mapping:
        kwargs["layers"] = floats(mapping["layers"])
    if "samples_per_cell" in mapping:
        kwargs["samples_per_cell"] = int(mapping["samples_per_cell"])
    if "f_sp" in mapping:
        kwargs["f_sp"] = float(mapping["f_sp"])
    if "acc" in mapping:
        kwargs["acc"] = float(mapping["acc"])
    if "base_seed" in mapping:
        kwargs["base_seed"] = int(mapping["base_seed"])
    if "max_iter" in mapping:
        kwargs["max_iter"] = int(mapping["max_iter"])
    if "max_attempts" in mapping:
        kwargs["max_attempts"] = int(mapping["max_attempts"])
    phase_kwargs = {
        name: float(mapping[name])
        for name in ("k_matrix", "k_inclusion", "k_coating")
        if name in mapping
    }
    if phase_kwargs:
        current = plan.phases
        kwargs["phases"] = PhaseConductivities(
            k_matrix=phase_kwargs.get("k_matrix", current.k_matrix),
            k_inclusion=phase_kwargs.get("k_inclusion", current.k_inclusion),
            k_coating=phase_kwargs.get("k_coating", current.k_coating),
        )
    return replace(plan, **kwargs)
