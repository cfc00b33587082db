"""Parameter records for the radar coverage planner.

Everything below the config layer works in SI units: meters, seconds, watts,
joules, bit/s, and linear (not dB) ratios.  The CLI converts published units
(dBm, dBW, dB, Wh, GHz, ...) on ingest; see :mod:`sarplan.config`.

The ``default_*`` constructors return the reference mission used throughout
the tests and demos: a small rotary-wing UAV imaging a 60 m strip with a
side-looking radar at 45 degrees depression and backhauling raw samples to a
ground station at the strip's edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class LinkBudget:
    """Optional itemized radar link budget.

    The planner only needs the aggregate sensitivity constant carried by
    ``RadarParams.beta_w_inv_m3``; when the individual terms are known they
    can be supplied here and are cross-checked against beta on derivation.
    """

    antenna_gain_tx: float
    antenna_gain_rx: float
    backscatter: float
    noise_temp_k: float
    noise_figure: float
    losses: float
    boltzmann_jk: float = 1.380649e-23


@dataclass(frozen=True)
class RadarParams:
    """Side-looking radar: geometry, waveform, and sensing requirement."""

    depression_angle_deg: float = 45.0
    beamwidth_deg: float = 30.0
    pulse_duration_s: float = 1e-6
    prf_hz: float = 100.0
    bandwidth_hz: float = 100e6
    center_frequency_hz: float = 2e9
    snr_min_linear: float = 100.0          # 20 dB
    sar_power_max_w: float = 39.81071705534972  # 46 dBm
    beta_w_inv_m3: float = 1e4             # sensing SNR aggregate: SNR ok iff z^3 <= beta * p_sar
    link_budget: Optional[LinkBudget] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.depression_angle_deg < 90.0:
            raise ValueError("depression angle must lie in (0, 90) degrees")
        if not 0.0 < self.beamwidth_deg < 2.0 * self.depression_angle_deg:
            raise ValueError("beamwidth must be positive and below twice the depression angle")
        for name in ("pulse_duration_s", "prf_hz", "bandwidth_hz",
                     "center_frequency_hz", "snr_min_linear",
                     "sar_power_max_w", "beta_w_inv_m3"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class CommParams:
    """Backhaul link to the ground station."""

    bandwidth_hz: float = 100e6
    gamma_linear: float = 100.0            # reference channel power gain over noise at 1 m, 20 dB
    com_power_max_w: float = 10.0          # 40 dBm
    sync_rate_bps: float = 1000.0          # fixed side-stream (sync/telemetry) rate
    gs_position_m: tuple[float, float, float] = (0.0, 0.0, 5.0)

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0.0 or self.gamma_linear <= 0.0:
            raise ValueError("bandwidth and channel gain must be strictly positive")
        if self.com_power_max_w <= 0.0:
            raise ValueError("com_power_max_w must be strictly positive")
        if self.sync_rate_bps < 0.0:
            raise ValueError("sync_rate_bps must be nonnegative")
        if len(self.gs_position_m) != 3:
            raise ValueError("gs_position_m must have exactly three coordinates")


@dataclass(frozen=True)
class EnergyParams:
    """Battery and rotary-wing propulsion model.

    ``cruise_power_w`` is the tabulated propulsion draw at mission speed and
    is what every energy/battery computation uses.  The full rotor model
    (:func:`sarplan.model.propulsion_power`) reproduces it from the remaining
    fields and serves as a consistency check.
    """

    battery_j: float = 69984.0             # 19.44 Wh
    cruise_power_w: float = 450.0
    blade_power_w: float = 79.86
    induced_power_w: float = 420.6
    tip_speed_mps: float = 120.0
    fuselage_drag_ratio: float = 0.6
    air_density_kgm3: float = 1.225
    rotor_solidity: float = 0.05
    rotor_disc_area_m2: float = 0.503
    uav_weight_n: float = 56.5

    def __post_init__(self) -> None:
        for name in ("battery_j", "cruise_power_w", "blade_power_w",
                     "induced_power_w", "tip_speed_mps", "fuselage_drag_ratio",
                     "air_density_kgm3", "rotor_solidity",
                     "rotor_disc_area_m2", "uav_weight_n"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class MissionParams:
    """Area of interest and flight envelope."""

    aoi_length_m: float = 60.0
    slots_per_scan: int = 100
    velocity_mps: float = 5.0
    z_min_m: float = 2.0
    z_max_m: float = 100.0

    def __post_init__(self) -> None:
        if self.aoi_length_m <= 0.0:
            raise ValueError("aoi_length_m must be strictly positive")
        if int(self.slots_per_scan) != self.slots_per_scan or self.slots_per_scan < 2:
            raise ValueError("slots_per_scan must be an integer >= 2")
        if self.velocity_mps <= 0.0:
            raise ValueError("velocity_mps must be strictly positive")
        if not 0.0 < self.z_min_m < self.z_max_m:
            raise ValueError("need 0 < z_min_m < z_max_m")

    @property
    def slot_spacing_m(self) -> float:
        """Along-track distance flown per slot (azimuth row pitch)."""
        return self.aoi_length_m / self.slots_per_scan

    @property
    def slot_duration_s(self) -> float:
        return self.slot_spacing_m / self.velocity_mps


@dataclass(frozen=True)
class Params:
    """Bundle of all four parameter records, passed around as one object."""

    radar: RadarParams = field(default_factory=RadarParams)
    comm: CommParams = field(default_factory=CommParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    mission: MissionParams = field(default_factory=MissionParams)


def default_params() -> Params:
    """The reference mission (all dataclass defaults)."""
    return Params()
