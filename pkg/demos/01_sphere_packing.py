"""Generate periodic sphere packings and inspect their geometry.

Walks through the first pipeline stage: random sequential adsorption of
equal spheres on the unit torus, the radius/volume-fraction relation, and
the sphere-list text format.
"""

import math
import tempfile
from pathlib import Path

import numpy as np

from fftherm import (
    RsaSaturationError,
    load_pack,
    periodic_distance,
    radius_from_fraction,
    rsa_generate,
    save_pack,
)

# The radius is always derived from the target volume fraction: asking for
# n spheres at fraction f fixes r = (3 f / (4 pi n))^(1/3).
print("radius for 30 spheres at 30%:", radius_from_fraction(30, 0.3))
print("radius for 100 spheres at 30%:", radius_from_fraction(100, 0.3))

# Generate a packing.  Same seed -> same packing, bit for bit.
pack = rsa_generate(n_sp=50, f_sp=0.3, seed=2024)
print(f"\nplaced {pack.n_sp} spheres of radius {pack.radius:.5f}")
print(f"volume check: n*(4/3)*pi*r^3 = {pack.n_sp * 4 / 3 * math.pi * pack.radius**3:.15f}")

# Non-overlap on the torus: minimum periodic gap is at least one diameter.
gap = pack.min_periodic_gap()
print(f"min periodic center distance = {gap:.5f} (diameter = {2 * pack.radius:.5f})")

# Distances use the minimum-image convention, so near-face spheres interact
# across the boundary:
a, b = (0.02, 0.5, 0.5), (0.98, 0.5, 0.5)
print(f"periodic distance {a} <-> {b} = {periodic_distance(a, b):.3f}")

# The packing round-trips through the plain-text "vector form".
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "pack.txt"
    save_pack(pack, path)
    print("\nfirst lines of the sphere list file:")
    for line in path.read_text().splitlines()[:4]:
        print("   ", line)
    reloaded = load_pack(path)
    print("round trip exact:", np.array_equal(reloaded.centers, pack.centers))

# RSA saturates when the attempt budget runs out; the error reports progress.
try:
    rsa_generate(n_sp=200, f_sp=0.4, seed=1, max_attempts=2000)
except RsaSaturationError as exc:
    print(f"\nexpected saturation: {exc}")
