"""Measure what drift compensation buys, in square meters.

Two missions fly the same three-scan geometry with swath edges designed
to meet at 70 m equivalent altitude.  The first takes the nominal
trajectory at face value; the second pre-shifts every waypoint so the
swath edges still line up after a biased, jittery autopilot has had its
say.  A Monte-Carlo drift simulation then counts the ground area that
falls between adjacent swaths in each case.

The punchline is roughly two orders of magnitude: about 70 m^2 missed
per seam without compensation versus well under half a square meter with
it, at the cost of flying a couple of meters higher.

Run it from the repository root:

    python3 demos/robustness_monte_carlo.py [--runs 2000] [--out demos/out]
"""

from __future__ import annotations

import argparse
import os

import numpy as np

from sarplan import (
    DeviationModel,
    SimConfig,
    compensation,
    default_params,
    derive_constants,
    no_compensation,
    run_simulation,
)
from sarplan.model import Plan, battery_trace, build_nominal_trajectory
from sarplan.robust import robust_trajectory

DEV = DeviationModel(offset_x_m=1.0, offset_z_m=-1.0, sigma_m=0.3,
                     reliability=0.95)
N_SCANS = 3
SEAM_ALTITUDE_M = 70.0


def geometry_plan(z_scan, comp, params, consts) -> Plan:
    """A plan carrying geometry only; the simulator ignores power."""
    z = np.asarray(z_scan, dtype=float)
    nominal = build_nominal_trajectory(z, consts, params.mission)
    compensated = robust_trajectory(nominal, comp)
    n = nominal[0].size
    zeros = np.zeros(n)
    levels = battery_trace(zeros, zeros, params.energy, consts).levels[:n]
    return Plan(n_scans=z.size, nominal_xyz=nominal,
                compensated_xyz=compensated, p_sar_w=zeros, p_com_w=zeros,
                battery_j=levels)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=2000,
                    help="Monte-Carlo repetitions per scheme")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="demos/out")
    args = ap.parse_args(argv)

    params = default_params()
    consts = derive_constants(params.radar, params.comm, params.mission)
    comp = compensation(DEV, consts)

    # Plain flight: aim the seams at 70 m and hope.  Compensated flight:
    # climb by the altitude shift so the *drifted* swath seams sit at 70 m
    # with the designed per-edge reliability.
    plain_plan = geometry_plan([SEAM_ALTITUDE_M] * N_SCANS,
                               no_compensation(), params, consts)
    robust_plan = geometry_plan([SEAM_ALTITUDE_M - comp.alt_shift_m] * N_SCANS,
                                comp, params, consts)
    print(f"compensation: +{comp.alt_shift_m:.3f} m altitude, "
          f"{comp.x_shift_m:+.3f} m across track; "
          f"{args.runs} runs per scheme, seed {args.seed}\n")

    results = {}
    for label, plan, cmp_ in (("plain", plain_plan, no_compensation()),
                              ("compensated", robust_plan, comp)):
        sim = run_simulation(plan, cmp_,
                             SimConfig(runs=args.runs, seed=args.seed,
                                       dev=DEV), consts)
        results[label] = sim
        per_seam = ", ".join(f"{b:.4f}" for b in sim.boundary_mean_m2)
        print(f"{label:>12}: mean missed {sim.mean_missed_m2:9.4f} m^2 "
              f"(std {sim.std_missed_m2:.4f}) over "
              f"{sim.runs_completed} runs")
        print(f"{'':>12}  per seam: [{per_seam}] m^2; edge hold "
              f"frequencies near {sim.near_edge_frequency:.4f} / "
              f"far {sim.far_edge_frequency:.4f}")

    ratio = (results["plain"].mean_missed_m2
             / max(results["compensated"].mean_missed_m2, 1e-12))
    print(f"\ncompensation shrinks the missed area {ratio:,.0f}-fold")

    # ------------------------------------------------------------------
    # Distribution view: per-run missed area, log-scaled
    # ------------------------------------------------------------------
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return 0

    os.makedirs(args.out, exist_ok=True)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, label, color in ((ax1, "plain", "tab:red"),
                             (ax2, "compensated", "tab:green")):
        vals = results[label].missed_m2
        ax.hist(vals, bins=40, color=color, alpha=0.8)
        ax.set_title(f"{label}: mean {np.mean(vals):.3f} m^2")
        ax.set_xlabel("missed area per run (m^2)")
    ax1.set_ylabel("runs")
    fig.suptitle("Monte-Carlo missed area, identical drift draws")
    path = os.path.join(args.out, "robustness_monte_carlo.png")
    fig.savefig(path, dpi=130, bbox_inches="tight")
    print(f"figure written to {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
