"""Periodic packings of equal non-overlapping spheres in the unit cube.

Packings are produced by random sequential adsorption (RSA) on the unit
torus [0,1)^3: candidate centers are drawn uniformly and accepted iff they
keep a periodic center-to-center distance of at least one diameter to every
sphere placed before them.  Accepted spheres are never moved.

The sphere radius is always derived from the requested total volume
fraction, never the other way around, so ``n_sp * (4/3)*pi*r**3 == f_sp``
holds to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAX_FRACTION",
    "SpherePack",
    "RsaSaturationError",
    "radius_from_fraction",
    "periodic_distance",
    "rsa_generate",
    "save_pack",
    "load_pack",
]

# RSA cannot reach the jamming density of equal spheres (~0.382); the cap
# keeps requests inside the regime where plain rejection sampling terminates.
MAX_FRACTION = 0.4

DEFAULT_MAX_ATTEMPTS = 1_000_000


class RsaSaturationError(RuntimeError):
    """Raised when the attempt budget runs out before all spheres are placed."""

    def __init__(self, placed: int, requested: int, attempts: int):
        self.placed = placed
        self.requested = requested
        self.attempts = attempts
        super().__init__(
            f"RSA saturated after {attempts} attempts: "
            f"placed {placed} of {requested} spheres"
        )


@dataclass(frozen=True)
class SpherePack:
    """Equal-radius periodic sphere packing ("vector form" of the geometry).

    centers : (n_sp, 3) array of sphere centers in [0,1)^3
    radius  : common sphere radius as a fraction of the cube edge
    f_sp    : total sphere volume fraction the radius was derived from
    seed    : RNG seed the packing was generated with
    """

    centers: np.ndarray
    radius: float
    f_sp: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "centers", np.atleast_2d(np.asarray(self.centers, dtype=float)))
        if self.centers.ndim != 2 or self.centers.shape[1] != 3:
            raise ValueError(f"centers must be (n, 3), got {self.centers.shape}")

    @property
    def n_sp(self) -> int:
        return self.centers.shape[0]

    def min_periodic_gap(self) -> float:
        """Smallest periodic center-to-center distance (inf for one sphere)."""
        n = self.n_sp
        if n < 2:
            return math.inf
        best = math.inf
        for i in range(n - 1):
            d = _periodic_distances(self.centers[i], self.centers[i + 1 :])
            best = min(best, float(d.min()))
        return best


def radius_from_fraction(n_sp: int, f_sp: float) -> float:
    """Radius of ``n_sp`` equal spheres filling fraction ``f_sp`` of the cube.

    Inverts n_sp * (4/3)*pi*r**3 = f_sp.  The fraction counts the whole
    sphere, i.e. inclusion plus any coating carved inside it later.
    """
    if n_sp < 1 or int(n_sp) != n_sp:
        raise ValueError(f"n_sp must be a positive integer, got {n_sp}")
    if not 0.0 < f_sp <= MAX_FRACTION:
        raise ValueError(f"f_sp must be in (0, {MAX_FRACTION}], got {f_sp}")
    return (3.0 * f_sp / (4.0 * math.pi * n_sp)) ** (1.0 / 3.0)


def periodic_distance(a, b) -> float:
    """Euclidean distance between two points of [0,1)^3 on the unit torus.

    Uses the minimum-image convention per axis; each coordinate delta is
    therefore at most 0.5.
    """
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    d = np.minimum(d, 1.0 - d)
    return float(np.sqrt(np.sum(d * d)))


def _periodic_distances(point: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Periodic distances from one point to each row of ``others``."""
    d = np.abs(others - point)
    d = np.minimum(d, 1.0 - d)
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def rsa_generate(
    n_sp: int,
    f_sp: float,
    seed: int,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SpherePack:
    """Place ``n_sp`` equal spheres at fraction ``f_sp`` by sequential adsorption.

    Candidates are drawn uniformly in [0,1)^3 from ``default_rng(seed)`` and
    accepted iff their periodic distance to every accepted center is at least
    two radii; the result is deterministic for a fixed seed.

    Raises
    ------
    RsaSaturationError
        If ``max_attempts`` candidates are exhausted first.  The exception
        carries the number of spheres placed so far.
    """
    radius = radius_from_fraction(n_sp, f_sp)
    if max_attempts < n_sp:
        raise ValueError("max_attempts must be at least n_sp")
    rng = np.random.default_rng(seed)
    centers = np.empty((n_sp, 3), dtype=float)
    placed = 0
    min_dist = 2.0 * radius
    for attempt in range(max_attempts):
        candidate = rng.random(3)
        if placed == 0 or _periodic_distances(candidate, centers[:placed]).min() >= min_dist:
            centers[placed] = candidate
            placed += 1
            if placed == n_sp:
                return SpherePack(centers=centers, radius=radius, f_sp=f_sp, seed=seed)
    raise RsaSaturationError(placed=placed, requested=n_sp, attempts=max_attempts)


def save_pack(pack: SpherePack, path) -> None:
    """Write a packing as a sphere-list text file.

    One `x y z r` line per sphere, preceded by a `#` header carrying
    n_sp, f_sp and the seed.  Values are written with full round-trip
    precision.
    """
    lines = [f"# n_sp={pack.n_sp} f_sp={float(pack.f_sp)!r} seed={pack.seed}"]
    radius = float(pack.radius)
    for c in pack.centers:
        lines.append(f"{float(c[0])!r} {float(c[1])!r} {float(c[2])!r} {radius!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_pack(path) -> SpherePack:
    """Read a sphere-list text file written by :func:`save_pack`."""
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        key, val = tok.split("=", 1)
                        header[key] = val
                continue
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"no sphere rows in {path}")
    arr = np.asarray(rows, dtype=float)
    if arr.shape[1] != 4:
        raise ValueError("sphere rows must be 'x y z r'")
    radii = arr[:, 3]
    if not np.all(radii == radii[0]):
        raise ValueError("packing must have a single common radius")
    try:
        n_sp = int(header["n_sp"])
        f_sp = float(header["f_sp"])
        seed = int(header["seed"])
    except KeyError as exc:
        raise ValueError(f"missing header field {exc} in {path}") from exc
    if n_sp != len(rows):
        raise ValueError(f"header says n_sp={n_sp} but file has {len(rows)} rows")
    return SpherePack(centers=arr[:, :3], radius=float(radii[0]), f_sp=f_sp, seed=seed)
