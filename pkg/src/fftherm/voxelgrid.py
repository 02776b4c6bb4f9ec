"""Rasterization of coated-sphere packings onto periodic voxel grids.

Every sphere of radius r is split into an inclusion core of radius
(1 - layer)*r and a coating shell out to r, where ``layer`` is the coating
width as a fraction of the sphere radius.  A voxel takes the label of the
region its *center* falls in, judged by periodic distance to the nearest
sphere center; there is no partial-volume weighting, one material per voxel.

Grid files are stored as one byte per voxel (the phase id) in x-fastest
order with a JSON sidecar for the metadata.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .microstructure import SpherePack, radius_from_fraction

__all__ = [
    "MATRIX",
    "INCLUSION",
    "COATING",
    "PhaseGrid",
    "voxelize",
    "coating_fraction",
    "coating_voxel_thickness",
    "phase_volume_fractions",
    "save_grid",
    "load_grid",
    "save_slice",
]

MATRIX = 0
INCLUSION = 1
COATING = 2

# grayscale used for slice images, indexed by phase id
_SLICE_GRAY = np.array([0, 128, 255], dtype=np.uint8)


@dataclass(frozen=True)
class PhaseGrid:
    """N^3 periodic grid of phase labels {0=matrix, 1=inclusion, 2=coating}.

    ``labels`` is indexed [ix, iy, iz]; voxel (i, j, k) is the cube centered
    at ((i+1/2)/N, (j+1/2)/N, (k+1/2)/N).  The grid is immutable after
    construction and safe to share between concurrent solves.
    """

    labels: np.ndarray
    layer: float
    seed: int
    n_sp: int
    f_sp: float

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.uint8)
        if lab.ndim != 3 or len(set(lab.shape)) != 1:
            raise ValueError(f"labels must be a cubic 3-d array, got {lab.shape}")
        if lab.size and lab.max() > COATING:
            raise ValueError("labels must be in {0=matrix, 1=inclusion, 2=coating}")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def resolution(self) -> int:
        return self.labels.shape[0]

    @property
    def provenance(self) -> dict:
        return {"seed": self.seed, "n_sp": self.n_sp, "f_sp": self.f_sp}


def _axis_window(center: float, radius: float, n: int):
    """Voxel indices and center offsets covering [center-radius, center+radius].

    Returns (indices mod n, deltas) where deltas are minimum-image distances
    from the voxel centers to ``center`` along the axis.  Falls back to the
    whole axis when the window would wrap onto itself.
    """
    # one-voxel margin guards against rounding at |delta| == radius
    lo = math.floor((center - radius) * n - 0.5) - 1
    hi = math.ceil((center + radius) * n - 0.5) + 1
    if hi - lo + 1 >= n:
        idx = np.arange(n)
        delta = np.mod((idx + 0.5) / n - center + 0.5, 1.0) - 0.5
        return idx, delta
    idx = np.arange(lo, hi + 1)
    delta = (idx + 0.5) / n - center
    return np.mod(idx, n), delta


def voxelize(pack: SpherePack, layer: float, resolution: int) -> PhaseGrid:
    """Rasterize a packing with coating parameter ``layer`` onto an N^3 grid.

    Voxel centers at distance d from the nearest sphere center become
    inclusion for d <= (1-layer)*r, coating for (1-layer)*r < d <= r and
    matrix otherwise.  ``layer`` = 0 produces no coating voxels, ``layer`` = 1
    no inclusion voxels.
    """
    if not 0.0 <= layer <= 1.0:
        raise ValueError(f"layer must be in [0, 1], got {layer}")
    n = int(resolution)
    if n < 8:
        raise ValueError(f"resolution must be at least 8, got {resolution}")
    r = pack.radius

    # squared periodic distance to the nearest sphere center, computed only
    # inside each sphere's bounding window (exact: windows cover every voxel
    # that can be within r of a center)
    d2 = np.full((n, n, n), np.inf)
    for c in pack.centers:
        ix, dx = _axis_window(c[0], r, n)
        iy, dy = _axis_window(c[1], r, n)
        iz, dz = _axis_window(c[2], r, n)
        local = (
            dx[:, None, None] ** 2
            + dy[None, :, None] ** 2
            + dz[None, None, :] ** 2
        )
        sel = np.ix_(ix, iy, iz)
        d2[sel] = np.minimum(d2[sel], local)

    labels = np.zeros((n, n, n), dtype=np.uint8)
    labels[d2 <= r * r] = COATING
    if layer < 1.0:
        r_in = (1.0 - layer) * r
        labels[d2 <= r_in * r_in] = INCLUSION
    return PhaseGrid(labels=labels, layer=layer, seed=pack.seed, n_sp=pack.n_sp, f_sp=pack.f_sp)


def coating_fraction(layer: float, f_sp: float) -> float:
    """Analytic coating volume fraction (1 - (1-layer)^3) * f_sp."""
    if not 0.0 <= layer <= 1.0:
        raise ValueError(f"layer must be in [0, 1], got {layer}")
    return (1.0 - (1.0 - layer) ** 3) * f_sp


def coating_voxel_thickness(layer: float, resolution: int, n_sp: int, f_sp: float) -> float:
    """Coating width expressed in voxels: layer * N * r(n_sp, f_sp).

    Deliberately not rounded; values below 1 flag shells too thin for the
    grid to capture reliably.
    """
    return layer * resolution * radius_from_fraction(n_sp, f_sp)


def phase_volume_fractions(grid: PhaseGrid) -> tuple[float, float, float]:
    """Voxel-count fractions (matrix, inclusion, coating)."""
    counts = np.bincount(grid.labels.ravel(), minlength=3)
    total = grid.labels.size
    return tuple(counts[i] / total for i in (MATRIX, INCLUSION, COATING))


# ---------------------------------------------------------------- file I/O

def save_grid(grid: PhaseGrid, stem) -> tuple[Path, Path]:
    """Write ``<stem>.phases.raw`` + ``<stem>.phases.json``.

    The raw file holds one byte per voxel (byte value == phase id) with the
    x index varying fastest; the sidecar carries resolution, layer and the
    generation provenance.
    """
    stem = Path(stem)
    raw_path = stem.with_name(stem.name + ".phases.raw")
    json_path = stem.with_name(stem.name + ".phases.json")
    raw_path.write_bytes(grid.labels.tobytes(order="F"))
    meta = {
        "resolution": grid.resolution,
        "layer": grid.layer,
        "provenance": grid.provenance,
        "order": "x-fastest",
        "phases": {"matrix": MATRIX, "inclusion": INCLUSION, "coating": COATING},
    }
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return raw_path, json_path


def load_grid(stem) -> PhaseGrid:
    """Read a grid written by :func:`save_grid` (pass the same stem)."""
    stem = Path(stem)
    raw_path = stem.with_name(stem.name + ".phases.raw")
    json_path = stem.with_name(stem.name + ".phases.json")
    meta = json.loads(json_path.read_text())
    n = int(meta["resolution"])
    buf = np.frombuffer(raw_path.read_bytes(), dtype=np.uint8)
    if buf.size != n**3:
        raise ValueError(f"{raw_path}: expected {n**3} bytes, got {buf.size}")
    labels = buf.reshape((n, n, n), order="F")
    prov = meta.get("provenance", {})
    return PhaseGrid(
        labels=labels,
        layer=float(meta["layer"]),
        seed=int(prov.get("seed", 0)),
        n_sp=int(prov.get("n_sp", 0)),
        f_sp=float(prov.get("f_sp", 0.0)),
    )


def save_slice(grid: PhaseGrid, path, axis: int = 2, index: int | None = None) -> Path:
    """Export one grid section as a grayscale image (.pgm or .png).

    Phase ids {0, 1, 2} map to gray levels {0, 128, 255}. ``index`` defaults
    to the middle section normal to ``axis``.
    """
    path = Path(path)
    n = grid.resolution
    if index is None:
        index = n // 2
    plane = np.take(grid.labels, index, axis=axis)
    img = _SLICE_GRAY[plane]
    if path.suffix.lower() == ".pgm":
        with open(path, "wb") as fh:
            fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
            fh.write(img.tobytes())
    elif path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(img, mode="L").save(path)
    else:
        raise ValueError(f"unsupported slice format: {path.suffix} (use .pgm or .png)")
    return path
