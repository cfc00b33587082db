"""Tests for the Monte-Carlo drift simulator.

Oracle values for the missed-area checks come from the truncated-Gaussian
expectation: the gap at one cross-boundary slot pair is Normal with mean
(c2-c1)*(-o_z) - overlap and standard deviation sigma*sqrt(2+c1^2+c2^2),
and E[max(G,0)] = mu*Phi(mu/s) + s*phi(mu/s).  With the reference drift
(o_x=1, o_z=-1, sigma=0.3) that gives, per scan boundary (60 m of azimuth):
70.1062065788 m^2 uncompensated and 0.1776041235 m^2 with the r=0.95
compensation (gap mean shifted by the designed overlap 2.7114067251 m).
"""

import dataclasses
import math

import numpy as np
import pytest

from sarplan.model import (
    Plan,
    battery_trace,
    build_nominal_trajectory,
    derive_constants,
    y_positions,
)
from sarplan.params import MissionParams, default_params
from sarplan.robust import (
    DeviationModel,
    compensation,
    no_compensation,
    robust_trajectory,
    zero_deviation,
)
from sarplan.sim import (
    EdgeFrequencies,
    SimConfig,
    SimResult,
    boundary_pair_slots,
    footprint_edges,
    missed_area,
    reliability_estimate,
    run_simulation,
    sample_actual_trajectory,
    trajectory_rng,
)

REF_DEV = DeviationModel(offset_x_m=1.0, offset_z_m=-1.0, sigma_m=0.3,
                         reliability=0.95)

# Frozen truncated-Gaussian oracle values (module docstring).
NONROBUST_BOUNDARY_M2 = 70.1062065788
ROBUST_BOUNDARY_M2 = 0.1776041235


def geometry_plan(z_scan, comp, params, consts):
    """A plan with the given altitudes and zero payload draw.

    The simulator only reads geometry, so powers can be zero and the
    battery trace is the idle one.
    """
    z = np.asarray(z_scan, dtype=float)
    nominal = build_nominal_trajectory(z, consts, params.mission)
    compensated = robust_trajectory(nominal, comp)
    n = nominal[0].size
    zeros = np.zeros(n)
    levels = battery_trace(zeros, zeros, params.energy, consts).levels[:n]
    return Plan(n_scans=z.size, nominal_xyz=nominal,
                compensated_xyz=compensated, p_sar_w=zeros, p_com_w=zeros,
                battery_j=levels)


def mission_setup(slots_per_scan, n_scans, z, comp=None, aoi_m=None):
    """(params, consts, plan) for a mission resized to the given slot grid."""
    mission = MissionParams(aoi_length_m=aoi_m if aoi_m is not None else 60.0,
                            slots_per_scan=slots_per_scan)
    p = dataclasses.replace(default_params(), mission=mission)
    c = derive_constants(p.radar, p.comm, p.mission)
    plan = geometry_plan(np.full(n_scans, float(z)),
                         comp if comp is not None else no_compensation(), p, c)
    return p, c, plan


def stacked_batch(plan, dev, seed, runs):
    """(runs, 3, n_slots) array of sampled actual trajectories."""
    return np.stack([np.vstack(sample_actual_trajectory(
        plan, dev, trajectory_rng(seed, k))) for k in range(runs)])


# ----------------------------------------------------------------------
# Keyed random streams
# ----------------------------------------------------------------------

def test_trajectory_rng_streams_are_keyed():
    a = trajectory_rng(42, 7).random(5)
    b = trajectory_rng(42, 7).random(5)
    other = trajectory_rng(42, 8).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, other)


def test_trajectory_rng_rejects_bad_keys():
    with pytest.raises(ValueError):
        trajectory_rng(-1, 0)
    with pytest.raises(ValueError):
        trajectory_rng(2 ** 64, 0)
    with pytest.raises(ValueError):
        trajectory_rng(0, -1)


# ----------------------------------------------------------------------
# Trajectory sampling
# ----------------------------------------------------------------------

def test_sample_zero_deviation_returns_plan(params, consts):
    _, _, plan = mission_setup(10, 2, 20.0, aoi_m=12.0)
    x, y, z = sample_actual_trajectory(plan, zero_deviation(),
                                       trajectory_rng(3, 0))
    assert np.array_equal(x, plan.compensated_xyz[0])
    assert np.array_equal(y, plan.compensated_xyz[1])
    assert np.array_equal(z, plan.compensated_xyz[2])


def test_sample_replay_is_bit_identical():
    _, _, plan = mission_setup(10, 3, 15.0, aoi_m=12.0)
    first = sample_actual_trajectory(plan, REF_DEV, trajectory_rng(9, 4))
    again = sample_actual_trajectory(plan, REF_DEV, trajectory_rng(9, 4))
    for a, b in zip(first, again):
        assert np.array_equal(a, b)


def test_sample_means_match_offsets_over_million_slots():
    # Law of large numbers: 100 runs x 1e4 slots; 3-sigma band 3*s/sqrt(1e6).
    _, c, plan = mission_setup(10000, 1, 50.0)
    dx, dz, dy = [], [], []
    for k in range(100):
        x, y, z = sample_actual_trajectory(plan, REF_DEV, trajectory_rng(17, k))
        dx.append(x - plan.compensated_xyz[0])
        dy.append(y - plan.compensated_xyz[1])
        dz.append(z - plan.compensated_xyz[2])
    band = 3.0 * REF_DEV.sigma_m / math.sqrt(1e6)
    assert abs(np.mean(dx) - REF_DEV.offset_x_m) < band
    assert abs(np.mean(dz) - REF_DEV.offset_z_m) < band
    assert abs(np.mean(dy)) < band
    assert abs(np.std(dx) - REF_DEV.sigma_m) < 0.01


# ----------------------------------------------------------------------
# Footprint edges
# ----------------------------------------------------------------------

def test_footprint_edges_reference_values(consts):
    near, far = footprint_edges(0.0, 1.0, consts)
    np.testing.assert_allclose(near, 0.577350, atol=5e-7)
    np.testing.assert_allclose(far, 1.732051, atol=5e-7)


def test_footprint_edges_translation_and_widening(consts, rng):
    x = rng.uniform(-50.0, 50.0, 200)
    z = rng.uniform(1.0, 90.0, 200)
    near, far = footprint_edges(x, z, consts)
    near_t, far_t = footprint_edges(x + 1.0, z, consts)
    np.testing.assert_allclose(near_t - near, 1.0, rtol=1e-12)
    np.testing.assert_allclose(far_t - far, 1.0, rtol=1e-12)
    near_w, far_w = footprint_edges(x, z + 1.0, consts)
    np.testing.assert_allclose((far_w - near_w) - (far - near), 1.154701,
                               atol=1e-6)


def test_footprint_edges_reject_underground(consts):
    with pytest.raises(ValueError):
        footprint_edges(0.0, 0.0, consts)
    with pytest.raises(ValueError):
        footprint_edges(np.zeros(3), np.array([5.0, -0.1, 2.0]), consts)


# ----------------------------------------------------------------------
# Boundary pairing and missed area
# ----------------------------------------------------------------------

def test_boundary_pairs_cover_both_scans_once():
    left, right = boundary_pair_slots(3, 4)
    assert left.shape == right.shape == (2, 4)
    np.testing.assert_array_equal(left, [[3, 2, 1, 0], [7, 6, 5, 4]])
    np.testing.assert_array_equal(right, [[4, 5, 6, 7], [8, 9, 10, 11]])


def test_boundary_pairs_are_one_row_apart():
    # Paired slots sit one slot spacing apart along track (the turn advance).
    mission = MissionParams(aoi_length_m=12.0, slots_per_scan=10)
    y = y_positions(4, mission)
    left, right = boundary_pair_slots(4, 10)
    np.testing.assert_allclose(np.abs(y[right] - y[left]),
                               mission.slot_spacing_m, atol=1e-12)


def test_missed_area_zero_for_exact_flight(params, consts):
    plan = geometry_plan(np.full(4, 70.0), no_compensation(), params, consts)
    assert missed_area(plan.compensated_xyz, plan, consts) <= 1e-9


def test_missed_area_planted_gaps():
    _, c, plan = mission_setup(10, 2, 20.0, aoi_m=12.0)
    ds = 1.2
    m = plan.slots_per_scan

    def fly(bump_x):
        x, y, z = (a.copy() for a in plan.compensated_xyz)
        for slot, dx in bump_x:
            x[slot] += dx
        return x, y, z

    # Right slot of a pair pushed outward opens a gap of exactly that width.
    assert missed_area(fly([(m + 1, 2.0)]), plan, c) == pytest.approx(ds * 2.0)
    # Pushed inward it only deepens the overlap.
    assert missed_area(fly([(m + 1, -2.0)]), plan, c) == pytest.approx(0.0, abs=1e-9)
    # Left slot pulled inward opens the same gap from the other side.
    assert missed_area(fly([(m - 2, -1.5)]), plan, c) == pytest.approx(ds * 1.5)
    # The partner slot (mirror index around the turn) cancels the gap...
    assert missed_area(fly([(m + 1, 2.0), (m - 2, 9.0)]), plan, c) == \
        pytest.approx(0.0, abs=1e-9)
    # ...while a non-partner slot does not.
    assert missed_area(fly([(m + 1, 2.0), (m - 1, 9.0)]), plan, c) == \
        pytest.approx(ds * 2.0)


def test_missed_area_altitude_bump():
    _, c, plan = mission_setup(10, 2, 20.0, aoi_m=12.0)
    x, y, z = (a.copy() for a in plan.compensated_xyz)
    z[plan.slots_per_scan + 3] += 1.0   # near edge advances by c1
    assert missed_area((x, y, z), plan, c) == pytest.approx(1.2 * c.slope_near)


def test_missed_area_rejects_length_mismatch(params, consts):
    plan = geometry_plan(np.full(2, 50.0), no_compensation(), params, consts)
    with pytest.raises(ValueError):
        missed_area((np.zeros(3), np.zeros(3), np.ones(3)), plan, consts)


def test_single_scan_plan_never_misses(params, consts):
    plan = geometry_plan([60.0], no_compensation(), params, consts)
    actual = sample_actual_trajectory(plan, REF_DEV, trajectory_rng(1, 0))
    assert missed_area(actual, plan, consts) == 0.0


# ----------------------------------------------------------------------
# Batch runner: determinism and exclusion
# ----------------------------------------------------------------------

def test_run_simulation_matches_isolated_replays():
    _, c, plan = mission_setup(10, 3, 15.0, aoi_m=12.0)
    cfg = SimConfig(runs=40, seed=123, dev=REF_DEV, chunk_runs=7)
    result = run_simulation(plan, no_compensation(), cfg, c)
    assert result.excluded_runs == 0
    assert result.runs_completed == 40
    for row, k in enumerate(result.run_ids):
        actual = sample_actual_trajectory(plan, REF_DEV,
                                          trajectory_rng(123, int(k)))
        assert result.missed_m2[row] == missed_area(actual, plan, c)


def test_run_simulation_invariant_to_chunking():
    _, c, plan = mission_setup(10, 2, 15.0, aoi_m=12.0)
    cfg = {"runs": 33, "seed": 5, "dev": REF_DEV}
    small = run_simulation(plan, no_compensation(),
                           SimConfig(chunk_runs=4, **cfg), c)
    big = run_simulation(plan, no_compensation(),
                         SimConfig(chunk_runs=512, **cfg), c)
    assert np.array_equal(small.run_ids, big.run_ids)
    assert np.array_equal(small.missed_m2, big.missed_m2)
    assert np.array_equal(small.boundary_missed_m2, big.boundary_missed_m2)
    assert np.array_equal(small.near_edge_freq, big.near_edge_freq)
    assert small.excluded_runs == big.excluded_runs


def test_run_simulation_counts_ground_strikes():
    _, c, plan = mission_setup(10, 2, 1.0, aoi_m=12.0)
    dev = DeviationModel(offset_x_m=0.0, offset_z_m=0.0, sigma_m=0.45,
                         reliability=0.95)
    cfg = SimConfig(runs=300, seed=11, dev=dev)
    result = run_simulation(plan, no_compensation(), cfg, c)
    assert 0 < result.excluded_runs < 300
    assert result.runs_completed == 300 - result.excluded_runs
    # Recount by replaying every stream in isolation.
    struck = [k for k in range(300)
              if np.any(sample_actual_trajectory(
                  plan, dev, trajectory_rng(11, k))[2] <= 0.0)]
    assert result.excluded_runs == len(struck)
    assert not np.intersect1d(result.run_ids, struck).size
    assert np.min(result.missed_m2) >= 0.0


def test_run_simulation_all_runs_excluded():
    _, c, plan = mission_setup(10, 2, 0.05, aoi_m=12.0)
    dev = DeviationModel(sigma_m=1.0)
    result = run_simulation(plan, no_compensation(),
                            SimConfig(runs=120, seed=2, dev=dev), c)
    assert result.excluded_runs == 120
    assert result.runs_completed == 0
    assert math.isnan(result.mean_missed_m2)
    assert math.isnan(result.near_edge_frequency)


# ----------------------------------------------------------------------
# Missed-area statistics against the truncated-Gaussian oracle
# ----------------------------------------------------------------------

def test_uncompensated_missed_area_matches_oracle():
    _, c, plan = mission_setup(100, 4, 70.0)
    cfg = SimConfig(runs=1000, seed=20260823, dev=REF_DEV)
    result = run_simulation(plan, no_compensation(), cfg, c)
    assert result.excluded_runs == 0
    # Per-boundary means are N-independent and match the analytic value
    # (standard error 0.13 m^2 at 1000 runs; the 3% band is ~16 sigma).
    np.testing.assert_allclose(result.boundary_mean_m2,
                               NONROBUST_BOUNDARY_M2, rtol=0.03)
    assert result.mean_missed_m2 == pytest.approx(3 * NONROBUST_BOUNDARY_M2,
                                                  rel=0.03)
    assert result.std_missed_m2 > 0.0


def test_uncompensated_missed_area_affine_in_boundaries():
    _, c, plan2 = mission_setup(100, 2, 70.0)
    cfg = SimConfig(runs=600, seed=31, dev=REF_DEV)
    two_scans = run_simulation(plan2, no_compensation(), cfg, c)
    assert two_scans.mean_missed_m2 == pytest.approx(NONROBUST_BOUNDARY_M2,
                                                     rel=0.03)


def test_robust_missed_area_matches_shifted_oracle():
    _, c0, _ = mission_setup(100, 1, 70.0)
    comp = compensation(REF_DEV, c0)
    _, c, plan = mission_setup(100, 3, 70.0, comp=comp)
    cfg = SimConfig(runs=4000, seed=7, dev=REF_DEV)
    result = run_simulation(plan, comp, cfg, c)
    assert result.excluded_runs == 0
    # Standard error ~1.9% of the mean at 4000 runs; 10% is ~5 sigma.
    np.testing.assert_allclose(result.boundary_mean_m2, ROBUST_BOUNDARY_M2,
                               rtol=0.10)
    assert np.all(result.boundary_mean_m2 < 0.5)
    # Designed per-edge reliability shows up as the empirical frequency
    # (1.2e6 slot events; 0.005 is ~20 sigma).
    assert result.near_edge_frequency == pytest.approx(0.95, abs=0.005)
    assert result.far_edge_frequency == pytest.approx(0.95, abs=0.005)


# ----------------------------------------------------------------------
# Reliability estimation
# ----------------------------------------------------------------------

def test_reliability_estimate_hits_design_target():
    _, c, _ = mission_setup(100, 1, 60.0)
    comp = compensation(REF_DEV, c)
    _, _, plan = mission_setup(100, 1, 60.0, comp=comp)
    batch = stacked_batch(plan, REF_DEV, seed=5, runs=1000)
    est = reliability_estimate(batch, plan, comp, c)
    # 1e5 slot events: 3-sigma band is +/-0.0021 around 0.95.
    assert est.near == pytest.approx(0.95, abs=0.0021)
    assert est.far == pytest.approx(0.95, abs=0.0021)
    # The batch runner pools the same events.
    result = run_simulation(plan, comp,
                            SimConfig(runs=1000, seed=5, dev=REF_DEV), c)
    assert result.near_edge_frequency == pytest.approx(est.near, abs=1e-12)
    assert result.far_edge_frequency == pytest.approx(est.far, abs=1e-12)


def test_reliability_half_target_needs_no_margin():
    dev = DeviationModel(offset_x_m=0.0, offset_z_m=0.0, sigma_m=0.3,
                         reliability=0.5)
    _, c, plan = mission_setup(100, 1, 60.0)
    comp = compensation(dev, c)
    assert comp.is_zero
    est = reliability_estimate(stacked_batch(plan, dev, seed=13, runs=1000),
                               plan, comp, c)
    assert est.near == pytest.approx(0.5, abs=0.006)
    assert est.far == pytest.approx(0.5, abs=0.006)


def test_reliability_certain_when_nothing_drifts():
    _, c, plan = mission_setup(10, 1, 60.0, aoi_m=12.0)
    batch = stacked_batch(plan, zero_deviation(), seed=1, runs=100)
    est = reliability_estimate(batch, plan, no_compensation(), c)
    assert est == EdgeFrequencies(near=1.0, far=1.0)


def test_reliability_estimate_validates_input(params, consts):
    plan = geometry_plan([60.0], no_compensation(), params, consts)
    good = stacked_batch(plan, REF_DEV, seed=3, runs=100)
    with pytest.raises(ValueError):
        reliability_estimate(good[:99], plan, no_compensation(), consts)
    with pytest.raises(ValueError):
        reliability_estimate(good[:, :2, :], plan, no_compensation(), consts)


# ----------------------------------------------------------------------
# Container validation
# ----------------------------------------------------------------------

def test_sim_config_rejects_bad_settings():
    with pytest.raises(ValueError):
        SimConfig(runs=0, seed=1, dev=REF_DEV)
    with pytest.raises(ValueError):
        SimConfig(runs=10, seed=-1, dev=REF_DEV)
    with pytest.raises(ValueError):
        SimConfig(runs=10, seed=2 ** 64, dev=REF_DEV)
    with pytest.raises(ValueError):
        SimConfig(runs=10, seed=1, dev=REF_DEV, chunk_runs=0)


def test_sim_result_enforces_invariants():
    ids = np.arange(3)
    ok = dict(run_ids=ids, excluded_runs=0, missed_m2=np.ones(3),
              boundary_missed_m2=np.ones((3, 2)),
              near_edge_freq=np.full(3, 0.5), far_edge_freq=np.full(3, 0.5))
    SimResult(**ok)   # sanity: the healthy version constructs
    with pytest.raises(ValueError):
        SimResult(**{**ok, "missed_m2": np.array([1.0, -0.1, 1.0])})
    with pytest.raises(ValueError):
        SimResult(**{**ok, "near_edge_freq": np.array([0.5, 1.2, 0.5])})
    with pytest.raises(ValueError):
        SimResult(**{**ok, "missed_m2": np.ones(2)})
    with pytest.raises(ValueError):
        SimResult(**{**ok, "excluded_runs": -1})
