"""Monte-Carlo validation of plans under per-slot Gaussian trajectory drift.

A planned serpentine is flown many times with independent position errors in
x (cross-track), z (altitude), and y (along-track, sampled but irrelevant to
coverage).  Each realization moves every footprint edge on the ground; where
the near edge of one scan's actual swath falls beyond the far edge of the
previous scan's, the strip between them is never illuminated.  This module
measures those holes (missed area), the empirical frequency of the per-edge
no-gap events the robust compensation is designed to guarantee, and simple
per-run statistics.

Randomness is counter-based: run k draws from a Philox stream keyed by
(master seed, k), so results are independent of chunking or evaluation
order, and any single run can be replayed in isolation.  Normal variates
come from the inverse-CDF transform through the bisection ``erfinv`` shared
with :mod:`sarplan.robust`, keeping streams reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import DerivedConstants, Plan
from .robust import Compensation, DeviationModel, erfinv

# Largest double strictly below 1: clamping 2u-1 here keeps erfinv finite
# even if a uniform draw lands exactly on 0.
_UNIT_OPEN = float(np.nextafter(1.0, 0.0))


# ----------------------------------------------------------------------
# Random streams and trajectory sampling
# ----------------------------------------------------------------------

def trajectory_rng(seed: int, run_index: int) -> np.random.Generator:
    """The dedicated random stream of one Monte-Carlo run.

    Counter-based (Philox) and keyed by (master seed, run index), so
    replaying run k never requires generating runs 0..k-1 first.
    """
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in 64 unsigned bits")
    if run_index < 0:
        raise ValueError("run index must be nonnegative")
    key = np.array([seed, run_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _gaussian_from_uniform(u: np.ndarray, mean: float, sigma: float) -> np.ndarray:
    """Inverse-CDF normal transform of uniform draws in [0, 1)."""
    y = np.clip(2.0 * u - 1.0, -_UNIT_OPEN, _UNIT_OPEN)
    return mean + sigma * math.sqrt(2.0) * erfinv(y)


def sample_actual_trajectory(plan: Plan, dev: DeviationModel,
                             rng: np.random.Generator):
    """One flown realization of a plan: per-slot (x, y, z) with drift.

    Deviations are independent across slots and axes: x and z drift with
    the model's offsets and sigma, y with zero offset.  Exactly one
    ``rng.random((3, n_slots))`` block is consumed (rows in x, z, y
    order), so a given stream always yields the same trajectory.
    """
    x_r, y_r, z_r = plan.compensated_xyz
    u = rng.random((3, plan.n_slots))
    dx = _gaussian_from_uniform(u[0], dev.offset_x_m, dev.sigma_m)
    dz = _gaussian_from_uniform(u[1], dev.offset_z_m, dev.sigma_m)
    dy = _gaussian_from_uniform(u[2], 0.0, dev.sigma_m)
    return x_r + dx, y_r + dy, z_r + dz


# ----------------------------------------------------------------------
# Footprints and missed area
# ----------------------------------------------------------------------

def footprint_edges(x_m, z_m, c: DerivedConstants):
    """Ground positions (near, far) of the swath edges at (x, z).

    Rejects altitudes at or below ground, where the footprint is
    undefined; batch drivers must exclude such runs before calling.
    """
    x = np.asarray(x_m, dtype=float)
    z = np.asarray(z_m, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("footprint undefined at or below ground (z <= 0)")
    return x + c.slope_near * z, x + c.slope_far * z


def boundary_pair_slots(n_scans: int, slots_per_scan: int):
    """Cross-boundary slot pairing for gap accounting.

    For the boundary between scans b and b+1, the s-th pair joins slot
    (b+1)*M-1-s of scan b with slot (b+1)*M+s of scan b+1: the serpentine
    reverses at the boundary, so slots equidistant from the turn are the
    geometrically adjacent ones (their along-track rows differ by one slot
    spacing, the turn advance).  Every slot of both scans appears in
    exactly one pair, giving M pairs per boundary.

    Returns (left, right) index arrays of shape (n_scans-1, M).
    """
    m = slots_per_scan
    s = np.arange(m)
    turn = m * np.arange(1, n_scans)[:, None]
    return turn - 1 - s, turn + s


def missed_area(actual_xyz, plan: Plan, c: DerivedConstants) -> float:
    """Ground area left uncovered by one flown realization (m^2).

    For every cross-boundary slot pair, any positive excess of the later
    scan's near edge over the earlier scan's far edge is a hole of that
    width times the slot spacing; holes are summed over pairs and
    boundaries.  Single-scan plans have no boundaries and miss nothing.
    """
    x_a = np.asarray(actual_xyz[0], dtype=float)
    z_a = np.asarray(actual_xyz[2], dtype=float)
    if x_a.shape != (plan.n_slots,) or z_a.shape != (plan.n_slots,):
        raise ValueError("actual trajectory length does not match the plan")
    near, far = footprint_edges(x_a, z_a, c)
    left, right = boundary_pair_slots(plan.n_scans, plan.slots_per_scan)
    gaps = np.maximum(0.0, near[right] - far[left])
    return float(c.slot_spacing_m * gaps.reshape(-1).sum())


# ----------------------------------------------------------------------
# Reliability of the compensated edges
# ----------------------------------------------------------------------

class EdgeFrequencies(NamedTuple):
    """Empirical per-edge no-gap frequencies (near, far)."""

    near: float
    far: float


def reliability_estimate(actual_batch, plan: Plan, comp: Compensation,
                         c: DerivedConstants) -> EdgeFrequencies:
    """Empirical frequency of the two no-gap events over a batch of runs.

    The near event is a compensated near edge at or inside its nominal
    position (edge error + designed margin <= 0); the far event is the
    mirror image.  Frequencies are pooled over all slots and runs of
    ``actual_batch``, an array of shape (runs, 3, n_slots) as produced by
    stacking :func:`sample_actual_trajectory` outputs.  At least 100 runs
    are required for the estimate to mean anything.
    """
    batch = np.asarray(actual_batch, dtype=float)
    if batch.ndim != 3 or batch.shape[1:] != (3, plan.n_slots):
        raise ValueError("batch must have shape (runs, 3, n_slots)")
    if batch.shape[0] < 100:
        raise ValueError("need at least 100 runs for a frequency estimate")
    x_r, _, z_r = plan.compensated_xyz
    dx = batch[:, 0] - x_r
    dz = batch[:, 2] - z_r
    near = np.mean(dx + c.slope_near * dz + comp.near_edge_shift_m <= 0.0)
    far = np.mean(dx + c.slope_far * dz + comp.far_edge_shift_m >= 0.0)
    return EdgeFrequencies(near=float(near), far=float(far))


# ----------------------------------------------------------------------
# Batch runner
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings: repetition count, master seed, drift model.

    ``chunk_runs`` only batches the linear algebra; results are identical
    for any value because every run owns its keyed stream.
    """

    runs: int
    seed: int
    dev: DeviationModel
    chunk_runs: int = 512

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("need at least one run")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.chunk_runs < 1:
            raise ValueError("chunk size must be positive")


@dataclass(frozen=True)
class SimResult:
    """Per-run Monte-Carlo outcomes plus aggregate views.

    Arrays cover the completed runs only; runs whose drift drove the UAV
    to or below the ground are dropped and counted in ``excluded_runs``.
    ``run_ids`` holds the stream indices of the completed runs so any row
    can be replayed bit-exactly.
    """

    run_ids: np.ndarray
    excluded_runs: int
    missed_m2: np.ndarray            # total missed area per run
    boundary_missed_m2: np.ndarray   # (runs, n_scans-1) per-boundary split
    near_edge_freq: np.ndarray       # per-run no-gap frequency, near edge
    far_edge_freq: np.ndarray        # per-run no-gap frequency, far edge

    def __post_init__(self) -> None:
        k = self.run_ids.size
        if (self.missed_m2.shape != (k,) or self.near_edge_freq.shape != (k,)
                or self.far_edge_freq.shape != (k,)
                or self.boundary_missed_m2.shape[0] != k):
            raise ValueError("per-run arrays disagree on the run count")
        if self.excluded_runs < 0:
            raise ValueError("excluded-run count cannot be negative")
        if np.any(self.missed_m2 < 0.0) or np.any(self.boundary_missed_m2 < 0.0):
            raise ValueError("missed area cannot be negative")
        for freq in (self.near_edge_freq, self.far_edge_freq):
            if np.any(freq < 0.0) or np.any(freq > 1.0):
                raise ValueError("frequencies must lie in [0, 1]")

    @property
    def runs_completed(self) -> int:
        return int(self.run_ids.size)

    @property
    def mean_missed_m2(self) -> float:
        return float(np.mean(self.missed_m2)) if self.runs_completed else math.nan

    @property
    def std_missed_m2(self) -> float:
        if self.runs_completed < 2:
            return 0.0 if self.runs_completed else math.nan
        return float(np.std(self.missed_m2, ddof=1))

    @property
    def boundary_mean_m2(self) -> np.ndarray:
        if not self.runs_completed:
            return np.full(self.boundary_missed_m2.shape[1], math.nan)
        return self.boundary_missed_m2.mean(axis=0)

    @property
    def boundary_std_m2(self) -> np.ndarray:
        if self.runs_completed < 2:
            return np.full(self.boundary_missed_m2.shape[1], math.nan)
        return self.boundary_missed_m2.std(axis=0, ddof=1)

    @property
    def near_edge_frequency(self) -> float:
        return float(np.mean(self.near_edge_freq)) if self.runs_completed else math.nan

    @property
    def far_edge_frequency(self) -> float:
        return float(np.mean(self.far_edge_freq)) if self.runs_completed else math.nan


def run_simulation(plan: Plan, comp: Compensation, cfg: SimConfig,
                   c: DerivedConstants) -> SimResult:
    """Fly a plan ``cfg.runs`` times and collect missed-area statistics.

    ``comp`` must be the compensation the plan was built with; it enters
    only the per-edge event margins (the flown positions already contain
    it through ``plan.compensated_xyz``).  Runs are processed in chunks
    but each draws from its own keyed stream, so the result is invariant
    to ``chunk_runs`` and bit-identical to replaying any single run with
    :func:`sample_actual_trajectory` + :func:`missed_area`.
    """
    n = plan.n_slots
    x_r, _, z_r = plan.compensated_xyz
    left, right = boundary_pair_slots(plan.n_scans, plan.slots_per_scan)

    ids, missed, per_boundary, near_fr, far_fr = [], [], [], [], []
    excluded = 0
    for start in range(0, cfg.runs, cfg.chunk_runs):
        chunk = np.arange(start, min(start + cfg.chunk_runs, cfg.runs))
        u = np.stack([trajectory_rng(cfg.seed, int(k)).random((3, n))
                      for k in chunk])
        dx = _gaussian_from_uniform(u[:, 0], cfg.dev.offset_x_m, cfg.dev.sigma_m)
        dz = _gaussian_from_uniform(u[:, 1], cfg.dev.offset_z_m, cfg.dev.sigma_m)
        z_a = z_r + dz
        ok = np.all(z_a > 0.0, axis=1)
        excluded += int(chunk.size - np.count_nonzero(ok))
        if not np.any(ok):
            continue
        dx, dz, z_a = dx[ok], dz[ok], z_a[ok]
        near, far = footprint_edges(x_r + dx, z_a, c)
        gaps = np.maximum(0.0, near[:, right] - far[:, left])
        ids.append(chunk[ok])
        missed.append(c.slot_spacing_m * gaps.reshape(gaps.shape[0], -1).sum(axis=1))
        per_boundary.append(c.slot_spacing_m * gaps.sum(axis=2))
        near_fr.append(np.mean(
            dx + c.slope_near * dz + comp.near_edge_shift_m <= 0.0, axis=1))
        far_fr.append(np.mean(
            dx + c.slope_far * dz + comp.far_edge_shift_m >= 0.0, axis=1))

    n_boundaries = plan.n_scans - 1
    if not ids:
        return SimResult(
            run_ids=np.zeros(0, dtype=int), excluded_runs=excluded,
            missed_m2=np.zeros(0), boundary_missed_m2=np.zeros((0, n_boundaries)),
            near_edge_freq=np.zeros(0), far_edge_freq=np.zeros(0))
    return SimResult(
        run_ids=np.concatenate(ids),
        excluded_runs=excluded,
        missed_m2=np.concatenate(missed),
        boundary_missed_m2=np.vstack(per_boundary),
        near_edge_freq=np.concatenate(near_fr),
        far_edge_freq=np.concatenate(far_fr),
    )
