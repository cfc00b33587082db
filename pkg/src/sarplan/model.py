"""Physical model: geometry, link budget, energy, trajectory, validation.

Pure functions of the immutable parameter records in :mod:`sarplan.params`.
All evaluators accept scalars or numpy arrays where that makes sense and are
safe to call from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .params import CommParams, EnergyParams, MissionParams, Params, RadarParams

SPEED_OF_LIGHT_MPS = 2.998e8


# ----------------------------------------------------------------------
# Derived constants
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DerivedConstants:
    """Constants computed once per mission and threaded everywhere.

    slope_near / slope_far
        Ground offset of the near/far footprint edge per meter of altitude
        (tangents of the beam-edge angles); swath width is their difference
        times altitude.
    slant_spread
        Per-meter-of-altitude growth of the slant echo window,
        (cos th1 - cos th2) / (cos th1 * cos th2) for beam-edge angles
        th1 < th2.
    rate_ratio_base
        2**(raw sensor rate at zero altitude / link bandwidth): the link-SNR
        factor demanded by the altitude-independent share of the sensor
        data rate.
    rate_ratio_base_sync
        Same, with the fixed side-stream rate folded in.  This is the base
        actually used by the power-form link constraint; see
        :func:`com_power_for_altitude`.
    rate_ratio_growth
        Exponent growth per meter of altitude of the required link-SNR
        factor: 2 * slant_spread * Br * PRF / (c * Bc).
    """

    slope_near: float
    slope_far: float
    slant_spread: float
    rate_ratio_base: float
    rate_ratio_base_sync: float
    rate_ratio_growth: float
    slot_spacing_m: float
    slot_duration_s: float

    @property
    def swath_slope(self) -> float:
        """Swath width per meter of altitude."""
        return self.slope_far - self.slope_near


def derive_constants(radar: RadarParams, comm: CommParams,
                     mission: MissionParams) -> DerivedConstants:
    """Evaluate the per-mission constants from the raw parameters.

    Rejects geometries where the lower beam edge reaches the horizontal
    (tangent singularity) or the upper edge reaches nadir-complement 90 deg.
    When an itemized link budget is attached to ``radar``, its aggregate is
    cross-checked against ``beta_w_inv_m3`` (1e-6 relative).
    """
    th1 = math.radians(radar.depression_angle_deg - radar.beamwidth_deg / 2.0)
    th2 = math.radians(radar.depression_angle_deg + radar.beamwidth_deg / 2.0)
    if th1 <= 0.0:
        raise ValueError("near beam edge at or below horizontal; reduce beamwidth")
    if th2 >= math.pi / 2.0:
        raise ValueError("far beam edge at or beyond vertical; reduce depression or beamwidth")

    slant_spread = (math.cos(th1) - math.cos(th2)) / (math.cos(th1) * math.cos(th2))
    base_exp = radar.bandwidth_hz * radar.pulse_duration_s * radar.prf_hz / comm.bandwidth_hz
    sync_exp = comm.sync_rate_bps / comm.bandwidth_hz
    growth = (2.0 * slant_spread * radar.bandwidth_hz * radar.prf_hz
              / (SPEED_OF_LIGHT_MPS * comm.bandwidth_hz))

    if radar.link_budget is not None:
        lb = radar.link_budget
        wavelength = SPEED_OF_LIGHT_MPS / radar.center_frequency_hz
        implied = (lb.antenna_gain_tx * lb.antenna_gain_rx * wavelength ** 3
                   * lb.backscatter * SPEED_OF_LIGHT_MPS
                   * radar.pulse_duration_s * radar.prf_hz
                   * math.sin(math.radians(radar.depression_angle_deg)) ** 2
                   / ((4.0 * math.pi) ** 4 * lb.boltzmann_jk * lb.noise_temp_k
                      * lb.noise_figure * radar.bandwidth_hz * lb.losses
                      * mission.velocity_mps * radar.snr_min_linear))
        if abs(implied - radar.beta_w_inv_m3) > 1e-6 * radar.beta_w_inv_m3:
            raise ValueError(
                f"itemized link budget implies sensing aggregate {implied:.6g}, "
                f"config says {radar.beta_w_inv_m3:.6g}")

    return DerivedConstants(
        slope_near=math.tan(th1),
        slope_far=math.tan(th2),
        slant_spread=slant_spread,
        rate_ratio_base=2.0 ** base_exp,
        rate_ratio_base_sync=2.0 ** (base_exp + sync_exp),
        rate_ratio_growth=growth,
        slot_spacing_m=mission.slot_spacing_m,
        slot_duration_s=mission.slot_duration_s,
    )


# ----------------------------------------------------------------------
# Propulsion and battery
# ----------------------------------------------------------------------

def propulsion_power(e: EnergyParams, v_mps: float) -> float:
    """Rotary-wing propulsion power at forward speed v (W).

    Three terms: blade profile (grows with v^2), induced (decays with v),
    and fuselage parasite (grows with v^3).  ``v_mps`` >= 0.
    """
    if v_mps < 0.0:
        raise ValueError("speed must be nonnegative")
    v2 = v_mps * v_mps
    hover_v2 = e.uav_weight_n / (2.0 * e.air_density_kgm3 * e.rotor_disc_area_m2)
    blade = e.blade_power_w * (1.0 + 3.0 * v2 / e.tip_speed_mps ** 2)
    induced = e.induced_power_w * math.sqrt(
        math.sqrt(1.0 + v2 * v2 / (4.0 * hover_v2 * hover_v2)) - v2 / (2.0 * hover_v2))
    parasite = (0.5 * e.fuselage_drag_ratio * e.air_density_kgm3
                * e.rotor_solidity * e.rotor_disc_area_m2 * v_mps ** 3)
    return blade + induced + parasite


class BatteryTrace(NamedTuple):
    """Battery levels (J) before the mission and after each slot."""

    levels: np.ndarray
    first_negative: Optional[int]

    @property
    def ok(self) -> bool:
        return self.first_negative is None


def battery_trace(p_sar_w: Sequence[float], p_com_w: Sequence[float],
                  e: EnergyParams, c: DerivedConstants) -> BatteryTrace:
    """Run the per-slot battery recursion.

    For K slots of payload powers, returns K+1 levels: the initial charge
    followed by the level after each slot's draw (payload + cruise
    propulsion).  Negative levels are flagged, never clamped, so search
    loops can prune on them.
    """
    p_sar = np.asarray(p_sar_w, dtype=float)
    p_com = np.asarray(p_com_w, dtype=float)
    if p_sar.shape != p_com.shape:
        raise ValueError("power sequences must have identical length")
    draws = c.slot_duration_s * (p_sar + p_com + e.cruise_power_w)
    levels = np.concatenate(([e.battery_j], e.battery_j - np.cumsum(draws)))
    negative = np.flatnonzero(levels < 0.0)
    first = int(negative[0]) if negative.size else None
    return BatteryTrace(levels=levels, first_negative=first)


# ----------------------------------------------------------------------
# Sensing geometry and rates
# ----------------------------------------------------------------------

def swath_width(z_m, c: DerivedConstants):
    """Ground-range extent of the beam footprint at altitude z."""
    return c.swath_slope * np.asarray(z_m, dtype=float)


def sar_data_rate(z_m, radar: RadarParams, c: DerivedConstants):
    """Raw sensor output rate (bit/s) at altitude z.

    The echo window grows linearly with altitude through the slant spread,
    so the rate is affine in z with intercept Br * pulse * PRF.
    """
    z = np.asarray(z_m, dtype=float)
    window = 2.0 * z * c.slant_spread / SPEED_OF_LIGHT_MPS + radar.pulse_duration_s
    return radar.bandwidth_hz * window * radar.prf_hz


def radar_snr_ok(p_sar_w, z_r_m, radar: RadarParams) -> bool:
    """Sensing SNR requirement: z^3 within the power-scaled aggregate.

    A 1e-12 relative grace keeps boundary points (p_sar set exactly from z)
    from flickering under float rounding.
    """
    lhs = np.asarray(z_r_m, dtype=float) ** 3
    rhs = radar.beta_w_inv_m3 * np.asarray(p_sar_w, dtype=float)
    return bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-30))


def max_sensing_altitude(radar: RadarParams) -> float:
    """Highest compensated altitude with SNR attainable at full radar power."""
    return (radar.beta_w_inv_m3 * radar.sar_power_max_w) ** (1.0 / 3.0)


# ----------------------------------------------------------------------
# Backhaul link
# ----------------------------------------------------------------------

def gs_distance(xyz, comm: CommParams):
    """Euclidean UAV-GS distance; xyz is (3,) or (3, K)."""
    p = np.asarray(xyz, dtype=float)
    g = np.asarray(comm.gs_position_m, dtype=float)
    if p.ndim == 1:
        return float(np.linalg.norm(p - g))
    return np.linalg.norm(p - g[:, None], axis=0)


def link_rate(p_com_w, uav_xyz, comm: CommParams):
    """Backhaul throughput (bit/s) at transmit power p_com from position xyz."""
    d2 = np.sum((np.asarray(uav_xyz, dtype=float).reshape(3, -1)
                 - np.asarray(comm.gs_position_m, dtype=float)[:, None]) ** 2, axis=0)
    if np.any(d2 <= 0.0):
        raise ValueError("UAV at the ground-station position: singular path loss")
    rate = comm.bandwidth_hz * np.log2(
        1.0 + np.asarray(p_com_w, dtype=float) * comm.gamma_linear / d2)
    return float(rate[0]) if rate.size == 1 and np.ndim(p_com_w) == 0 else rate


def com_power_for_rate(rate_bps, distance_m, comm: CommParams):
    """Minimal transmit power sustaining ``rate_bps`` at the given distance."""
    snr = 2.0 ** (np.asarray(rate_bps, dtype=float) / comm.bandwidth_hz) - 1.0
    return snr * np.asarray(distance_m, dtype=float) ** 2 / comm.gamma_linear


def required_link_snr(z_r_m, c: DerivedConstants):
    """Link SNR needed to carry the sensor stream plus the side stream.

    Closed form of 2**((sensor rate + sync rate)/Bc) - 1 at compensated
    altitude z, evaluated with expm1 (the ratio sits just above 1, so the
    naive form loses ~4 digits to cancellation).
    """
    z = np.asarray(z_r_m, dtype=float)
    bits = math.log2(c.rate_ratio_base_sync) + c.rate_ratio_growth * z
    return np.expm1(math.log(2.0) * bits)


def com_power_for_altitude(z_r_m, distance_m, c: DerivedConstants, comm: CommParams):
    """Minimal transmit power for real-time backhaul at altitude z, distance d."""
    return (required_link_snr(z_r_m, c) * np.asarray(distance_m, dtype=float) ** 2
            / comm.gamma_linear)


def realtime_constraint_ok(p_com_w, uav_xyz_r, comm: CommParams,
                           radar: RadarParams, c: DerivedConstants) -> bool:
    """True when the link carries sensor + side stream from the given position.

    Compared with 1e-9 relative grace so a power set exactly by the
    inversion formula passes while a 1e-6 deficit fails.
    """
    z_r = np.asarray(uav_xyz_r, dtype=float).reshape(3, -1)[2]
    need = sar_data_rate(z_r, radar, c) + comm.sync_rate_bps
    have = link_rate(p_com_w, uav_xyz_r, comm)
    return bool(np.all(np.asarray(have) >= need * (1.0 - 1e-9)))


# ----------------------------------------------------------------------
# Trajectory construction
# ----------------------------------------------------------------------

def y_positions(n_scans: int, mission: MissionParams) -> np.ndarray:
    """Serpentine along-track coordinates for n_scans * M slots.

    Starts at y=0, advances by the slot spacing, and reverses direction at
    every scan boundary (lawnmower pattern).
    """
    if n_scans < 1:
        raise ValueError("need at least one scan")
    m = mission.slots_per_scan
    ds = mission.slot_spacing_m
    steps = np.tile(np.repeat([1.0, -1.0], m), (n_scans + 1) // 2 + 1)[:n_scans * m - 1]
    return np.concatenate(([0.0], np.cumsum(steps * ds)))


def scan_of_slot(n_scans: int, m: int) -> np.ndarray:
    """Scan index (0-based) of each slot."""
    return np.repeat(np.arange(n_scans), m)


def scan_x_positions(z_scan, c: DerivedConstants) -> np.ndarray:
    """Cross-track offset of each scan from its per-scan altitude.

    The first scan is placed so its near footprint edge sits at x=0; each
    later scan starts where the previous scan's far edge ended, so nominal
    swaths tile the ground with no gap and no overlap.
    """
    z = np.asarray(z_scan, dtype=float)
    x = np.empty_like(z)
    x[0] = -c.slope_near * z[0]
    for i in range(1, z.size):
        x[i] = x[i - 1] + c.slope_far * z[i - 1] - c.slope_near * z[i]
    return x


def build_nominal_trajectory(z_scan, c: DerivedConstants,
                             mission: MissionParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-slot (x, y, z) for the serpentine trajectory with per-scan altitudes."""
    z = np.atleast_1d(np.asarray(z_scan, dtype=float))
    if z.size < 1:
        raise ValueError("need at least one scan altitude")
    if np.any(z <= 0.0) or np.any(z > mission.z_max_m):
        raise ValueError("scan altitudes must lie in (0, z_max]")
    idx = scan_of_slot(z.size, mission.slots_per_scan)
    x = scan_x_positions(z, c)[idx]
    return x, y_positions(z.size, mission), z[idx]


# ----------------------------------------------------------------------
# Plan container, coverage, validation
# ----------------------------------------------------------------------

@dataclass(eq=False)
class Plan:
    """A fully-specified mission: positions, payload powers, battery levels.

    ``nominal_xyz`` is the commanded serpentine trajectory; ``compensated_xyz``
    is the same trajectory after the robust deviation compensation (equal to
    nominal when no compensation is applied).  All arrays have one entry per
    slot; ``battery_j`` holds the level at the *start* of each slot.
    """

    n_scans: int
    nominal_xyz: tuple[np.ndarray, np.ndarray, np.ndarray]
    compensated_xyz: tuple[np.ndarray, np.ndarray, np.ndarray]
    p_sar_w: np.ndarray
    p_com_w: np.ndarray
    battery_j: np.ndarray

    @property
    def n_slots(self) -> int:
        return self.nominal_xyz[0].size

    @property
    def slots_per_scan(self) -> int:
        return self.n_slots // self.n_scans

    @property
    def z_r(self) -> np.ndarray:
        return self.compensated_xyz[2]

    def scan_values(self, per_slot: np.ndarray) -> np.ndarray:
        """First-slot value of each scan (for within-scan-constant arrays)."""
        return per_slot[:: self.slots_per_scan]


def coverage(plan: Plan, c: DerivedConstants) -> float:
    """Ground area covered: slot spacing times swath width, summed over slots.

    Uses the compensated altitude, since that is what the radar actually
    illuminates when the robust trajectory is flown.
    """
    return float(c.slot_spacing_m * np.sum(swath_width(plan.z_r, c)))


def coverage_of_altitudes(z_r_scan, mission: MissionParams, c: DerivedConstants) -> float:
    """Closed-form coverage for per-scan compensated altitudes."""
    return float(mission.aoi_length_m * c.swath_slope
                 * np.sum(np.asarray(z_r_scan, dtype=float)))


@dataclass(frozen=True)
class ValidationReport:
    """Normalized constraint residuals of a plan; all ~0 for a feasible plan."""

    residuals: dict[str, float]
    tolerance: float = 1e-6

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tolerance

    def worst(self) -> str:
        return max(self.residuals, key=self.residuals.get)


def _excess(lhs, rhs, scale=1.0):
    """Normalized one-sided violation max(0, lhs-rhs) / max(1, scale)."""
    return float(np.max(np.maximum(0.0, np.asarray(lhs) - np.asarray(rhs)))
                 / max(1.0, scale))


def validate_plan(plan: Plan, p: Params, c: DerivedConstants) -> ValidationReport:
    """Check a plan against every original mission constraint.

    Residuals are normalized (violation over max(1, constraint scale)) so a
    single tolerance applies across units.  This is the independent gate all
    returned plans must pass; it never looks at any convexified surrogate.
    """
    x, y, z = plan.nominal_xyz
    xr, yr, zr = plan.compensated_xyz
    m = plan.slots_per_scan
    z_scan = plan.scan_values(z)

    # Rebuild the serpentine directly (no envelope checks here: an
    # out-of-envelope plan must yield residuals, not an exception).
    bx = scan_x_positions(z_scan, c)[scan_of_slot(plan.n_scans, m)]
    by = y_positions(plan.n_scans, p.mission)
    bz = np.repeat(z_scan, m)
    res: dict[str, float] = {}
    res["trajectory_x"] = float(np.max(np.abs(x - bx)))
    res["trajectory_y"] = float(np.max(np.abs(y - by)))
    res["trajectory_z"] = float(np.max(np.abs(z - bz)))
    res["compensation_y"] = float(np.max(np.abs(yr - y)))

    # Within-scan constancy of radar power (slot 0 of each scan as reference).
    p_sar_scan = plan.scan_values(plan.p_sar_w)
    res["sar_power_constancy"] = float(
        np.max(np.abs(plan.p_sar_w - np.repeat(p_sar_scan, m))))

    res["altitude_box_low"] = _excess(p.mission.z_min_m, zr)
    res["altitude_box_high"] = _excess(zr, p.mission.z_max_m)

    res["sensing_snr"] = _excess(zr ** 3, p.radar.beta_w_inv_m3 * plan.p_sar_w,
                                 scale=float(np.max(p.radar.beta_w_inv_m3 * plan.p_sar_w)))

    need = sar_data_rate(zr, p.radar, c) + p.comm.sync_rate_bps
    have = link_rate(plan.p_com_w, np.vstack((xr, yr, zr)), p.comm)
    res["realtime_rate"] = _excess(need, have, scale=float(np.max(need)))

    res["power_box_sar"] = _excess(plan.p_sar_w, p.radar.sar_power_max_w,
                                   scale=p.radar.sar_power_max_w)
    res["power_box_com"] = _excess(plan.p_com_w, p.comm.com_power_max_w,
                                   scale=p.comm.com_power_max_w)
    res["power_nonneg"] = _excess(0.0, np.minimum(plan.p_sar_w, plan.p_com_w))

    trace = battery_trace(plan.p_sar_w, plan.p_com_w, p.energy, c)
    # Levels at the start of each slot must match and stay nonnegative; the
    # post-mission level is unconstrained (the last slot's draw is spent on
    # the way out).
    res["battery_recursion"] = float(
        np.max(np.abs(plan.battery_j - trace.levels[:plan.n_slots]))
        / max(1.0, p.energy.battery_j))
    res["battery_nonneg"] = _excess(0.0, plan.battery_j, scale=p.energy.battery_j)

    return ValidationReport(residuals=res)
