"""Gaussian trajectory deviations and the closed-form robust compensation.

A UAV that tries to fly the nominal serpentine drifts: per-slot position
errors in x (cross-track) and z (altitude) shift the footprint edges on the
ground and can open gaps between adjacent swaths.  Shifting the whole plan
down-range and up in altitude by fixed amounts restores a target per-edge
no-gap probability; the shifts have closed forms in the deviation statistics
and are the same for every slot because the statistics are stationary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf as _erf

from .model import DerivedConstants


@dataclass(frozen=True)
class DeviationModel:
    """Per-slot Gaussian position error: N(offset, sigma^2) in x and z."""

    offset_x_m: float = 0.0
    offset_z_m: float = 0.0
    sigma_m: float = 0.0
    reliability: float = 0.5   # target per-edge no-gap probability

    def __post_init__(self) -> None:
        if self.sigma_m < 0.0:
            raise ValueError("sigma_m must be nonnegative")
        if not 0.0 <= self.reliability < 1.0:
            raise ValueError("reliability must lie in [0, 1); 1 needs infinite margin")


def zero_deviation() -> DeviationModel:
    """The non-robust limit: no drift, no compensation."""
    return DeviationModel(0.0, 0.0, 0.0, 0.5)


@dataclass(frozen=True)
class Compensation:
    """Slot-invariant trajectory adjustment.

    near_edge_shift_m (<= 0) and far_edge_shift_m (>= 0) are the designed
    margins of the two footprint edges; x_shift_m and alt_shift_m are the
    position offsets realizing them.  Adjacent compensated swaths overlap by
    ``overlap_m`` instead of exactly touching.
    """

    near_edge_shift_m: float
    far_edge_shift_m: float
    x_shift_m: float
    alt_shift_m: float

    def __post_init__(self) -> None:
        if self.near_edge_shift_m > 1e-12 or self.far_edge_shift_m < -1e-12:
            raise ValueError("edge margins must satisfy near <= 0 <= far")
        if self.alt_shift_m < -1e-12:
            raise ValueError("altitude shift must be nonnegative")

    @property
    def overlap_m(self) -> float:
        return self.far_edge_shift_m - self.near_edge_shift_m

    @property
    def is_zero(self) -> bool:
        return self.overlap_m == 0.0


def no_compensation() -> Compensation:
    return Compensation(0.0, 0.0, 0.0, 0.0)


def erfinv(y, max_iter: int = 54):
    """Inverse error function by bracketing bisection on the forward erf.

    Accepts scalars or arrays with |y| < 1; accuracy ~7e-16 absolute after
    the default 54 halvings of the bracket [-6.5, 6.5] (target 1e-12).
    """
    arr = np.asarray(y, dtype=float)
    if not np.all(np.abs(arr) < 1.0):   # also rejects NaN
        raise ValueError("erfinv argument must satisfy |y| < 1")
    lo = np.full(arr.shape, -6.5)
    hi = np.full(arr.shape, 6.5)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = _erf(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if arr.ndim == 0 else out


def footprint_errors(dx_m, dz_m, c: DerivedConstants):
    """Ground shift of the (near, far) footprint edges for a position error.

    A pure cross-track error translates the footprint rigidly; an altitude
    error moves the far edge more than the near edge (it also widens the
    swath).
    """
    dx = np.asarray(dx_m, dtype=float)
    dz = np.asarray(dz_m, dtype=float)
    return dx + c.slope_near * dz, dx + c.slope_far * dz


def compensation(dev: DeviationModel, c: DerivedConstants) -> Compensation:
    """Closed-form compensation hitting the target per-edge reliability.

    Each edge error is Gaussian with mean o_x + slope*o_z and standard
    deviation sigma*sqrt(1+slope^2); the margin is the corresponding
    one-sided quantile, floored at zero (a favorable drift needs no margin).
    """
    if dev.sigma_m == 0.0:
        quantile = 0.0
    elif dev.reliability == 0.0:
        quantile = -math.inf   # no reliability asked: floors clip both margins to 0
    else:
        quantile = erfinv(2.0 * dev.reliability - 1.0) * dev.sigma_m * math.sqrt(2.0)
    c1, c2 = c.slope_near, c.slope_far
    near = -max(0.0, quantile * math.hypot(1.0, c1)
                + dev.offset_x_m + c1 * dev.offset_z_m)
    far = max(0.0, quantile * math.hypot(1.0, c2)
              - dev.offset_x_m - c2 * dev.offset_z_m)
    alt = (far - near) / (c2 - c1)
    return Compensation(
        near_edge_shift_m=near,
        far_edge_shift_m=far,
        x_shift_m=near - c1 * alt,
        alt_shift_m=alt,
    )


def robust_trajectory(nominal_xyz, comp: Compensation):
    """Apply the slot-invariant compensation to a nominal trajectory."""
    x, y, z = nominal_xyz
    return (np.asarray(x, dtype=float) + comp.x_shift_m,
            np.asarray(y, dtype=float).copy(),
            np.asarray(z, dtype=float) + comp.alt_shift_m)
