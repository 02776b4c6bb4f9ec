"""Closed-form references the solver is validated against.

Exact two-phase laminate conductivities and the classical two-phase
Hashin-Shtrikman bounds in 3D.  Three-phase grids are bracketed
conservatively by collapsing inclusion and coating onto the extreme
conductivities at their combined fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "BoundPair",
    "laminate_effective",
    "hs_bounds",
    "three_phase_bracket",
]


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _check_positive(**named):
    for name, k in named.items():
        if k <= 0.0:
            raise ValueError(f"{name} must be positive, got {k}")


def laminate_effective(k_a: float, k_b: float, fraction_a: float) -> tuple[float, float]:
    """Exact conductivity of a two-phase laminate: (normal, transverse).

    Normal to the layers the phases act in series (harmonic mean), along the
    layers in parallel (arithmetic mean).
    """
    _check_positive(k_a=k_a, k_b=k_b)
    if not 0.0 <= fraction_a <= 1.0:
        raise ValueError(f"fraction_a must be in [0, 1], got {fraction_a}")
    f_b = 1.0 - fraction_a
    normal = 1.0 / (fraction_a / k_a + f_b / k_b)
    transverse = fraction_a * k_a + f_b * k_b
    return normal, transverse


def _hs_low(k_lo: float, k_hi: float, f_hi: float) -> float:
    """HS bound with the worse conductor as matrix phase (3D)."""
    if k_lo == k_hi:
        return k_lo
    return k_lo + f_hi / (1.0 / (k_hi - k_lo) + (1.0 - f_hi) / (3.0 * k_lo))


def hs_bounds(k_a: float, k_b: float, fraction_a: float) -> BoundPair:
    """Hashin-Shtrikman bounds for an isotropic two-phase composite in 3D.

    The lower bound treats the worse-conducting phase as the matrix, the
    upper bound the better-conducting one.  Both bounds lie between the
    harmonic and arithmetic means of :func:`laminate_effective`.
    """
    _check_positive(k_a=k_a, k_b=k_b)
    if not 0.0 <= fraction_a <= 1.0:
        raise ValueError(f"fraction_a must be in [0, 1], got {fraction_a}")
    if k_a <= k_b:
        k_lo, f_lo, k_hi, f_hi = k_a, fraction_a, k_b, 1.0 - fraction_a
    else:
        k_lo, f_lo, k_hi, f_hi = k_b, 1.0 - fraction_a, k_a, fraction_a
    lower = _hs_low(k_lo, k_hi, f_hi)
    # mirror formula around the better conductor
    if k_lo == k_hi:
        upper = k_hi
    else:
        upper = k_hi + f_lo / (1.0 / (k_lo - k_hi) + f_hi / (3.0 * k_hi))
    return BoundPair(lower=lower, upper=upper)


def three_phase_bracket(
    k_matrix: float,
    k_inclusion: float,
    k_coating: float,
    sphere_fraction: float,
) -> BoundPair:
    """Conservative bracket for a matrix + coated-spheres composite.

    Replaces inclusion and coating by their combined fraction at the worst
    (resp. best) conductivity of the three phases; the true effective value
    of any microstructure with those fractions lies inside by pointwise
    monotonicity of the conduction problem.
    """
    _check_positive(k_matrix=k_matrix, k_inclusion=k_inclusion, k_coating=k_coating)
    k_min = min(k_matrix, k_inclusion, k_coating)
    k_max = max(k_matrix, k_inclusion, k_coating)
    lower = hs_bounds(k_min, k_matrix, sphere_fraction).lower
    upper = hs_bounds(k_max, k_matrix, sphere_fraction).upper
    return BoundPair(lower=lower, upper=upper)
