"""Convex per-iteration program for the trajectory/power planner.

The original mission problem couples altitude, cross-track position, and the
two payload powers through a product of a link-SNR term and a squared
UAV-GS distance.  Around an expansion point that product splits into
difference-of-convex pieces: squared sums go into slack epigraphs, the
convex negatives are replaced by their first-order (global) underestimates,
and the sensing-SNR cubic becomes a rotated-cone pair.  This module builds
that convex program in a solver-neutral intermediate representation (IR)
and binds it to a conic solver.

Variables exploit within-scan constancy: altitude z, cross-track x, radar
power, the SNR cone slack, and the link-term epigraph live per scan; com
power, battery level, and the two quadratic slacks live per slot.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import cvxpy as cp
import numpy as np

from .model import DerivedConstants, y_positions, scan_of_slot
from .params import Params
from .robust import Compensation

SCHEMES = ("proposed", "bench1", "bench2", "bench3")

_LN2 = math.log(2.0)


# ----------------------------------------------------------------------
# Variable layout
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class VariableLayout:
    """Per-scan / per-slot variable bookkeeping."""

    n_scans: int
    slots_per_scan: int

    def __post_init__(self) -> None:
        if self.n_scans < 1:
            raise ValueError("need at least one scan")
        if self.slots_per_scan < 2:
            raise ValueError("need at least two slots per scan")

    @property
    def n_slots(self) -> int:
        return self.n_scans * self.slots_per_scan

    @property
    def counts(self) -> dict[str, int]:
        n, nm = self.n_scans, self.n_slots
        return {"z": n, "x": n, "p_sar": n, "cone_slack": n, "link_epigraph": n,
                "p_com": nm, "q": nm, "t": nm, "o": nm}

    @property
    def total_variables(self) -> int:
        return sum(self.counts.values())

    @property
    def slot_scan(self) -> np.ndarray:
        return scan_of_slot(self.n_scans, self.slots_per_scan)


def exploit_per_scan_structure(n_scans: int, slots_per_scan: int) -> VariableLayout:
    """Layout with z/x/p_sar once per scan; p_com and battery per slot.

    Within-scan constancy of position and radar power lets 5*N*M raw
    variables collapse to 3*N + 2*N*M plus slacks.
    """
    return VariableLayout(n_scans=n_scans, slots_per_scan=slots_per_scan)


def expand_to_slots(layout: VariableLayout, per_scan: np.ndarray) -> np.ndarray:
    """Per-scan values replicated across their slots."""
    return np.repeat(np.asarray(per_scan, dtype=float), layout.slots_per_scan)


# ----------------------------------------------------------------------
# Expansion point and the building-block functions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionPoint:
    """Per-scan nominal (z, x) the underestimates are expanded around."""

    z: np.ndarray
    x: np.ndarray

    def __post_init__(self) -> None:
        if self.z.shape != self.x.shape or self.z.ndim != 1:
            raise ValueError("expansion point needs matching 1-d z and x")
        if not (np.all(np.isfinite(self.z)) and np.all(np.isfinite(self.x))):
            raise ValueError("expansion point must be finite")


def h_functions(z_r_m, x_r_m, gs, c: DerivedConstants):
    """The three factors of the link-demand product at compensated position.

    h1 is the required link SNR (exponential in altitude), h2/h3 the squared
    vertical/cross-track distance components to the ground station.
    """
    z_r = np.asarray(z_r_m, dtype=float)
    x_r = np.asarray(x_r_m, dtype=float)
    gx, _, gz = gs
    h1 = c.rate_ratio_base_sync * np.exp2(c.rate_ratio_growth * z_r) - 1.0
    return h1, (z_r - gz) ** 2, (x_r - gx) ** 2


def h1_derivative(z_r_m, c: DerivedConstants):
    """d h1 / d z at compensated altitude."""
    z_r = np.asarray(z_r_m, dtype=float)
    return (_LN2 * c.rate_ratio_growth * c.rate_ratio_base_sync
            * np.exp2(c.rate_ratio_growth * z_r))


@dataclass(frozen=True)
class TaylorForms:
    """First-order global underestimates of f_i = h_i^2 / 2 around a point.

    f1 and f2 are linear in nominal z, f3 in nominal x: value(v) = icept +
    slope*v.  Convexity of the f_i makes each form a global underestimate
    with equality at the expansion point.
    """

    f1_slope: np.ndarray
    f1_icept: np.ndarray
    f2_slope: np.ndarray
    f2_icept: np.ndarray
    f3_slope: np.ndarray
    f3_icept: np.ndarray

    def f1(self, z_nom):
        return self.f1_icept + self.f1_slope * np.asarray(z_nom, dtype=float)

    def f2(self, z_nom):
        return self.f2_icept + self.f2_slope * np.asarray(z_nom, dtype=float)

    def f3(self, x_nom):
        return self.f3_icept + self.f3_slope * np.asarray(x_nom, dtype=float)


def taylor_underestimates(point: ExpansionPoint, comp: Compensation, gs,
                          c: DerivedConstants) -> TaylorForms:
    """Expand the three convex f_i around the given per-scan point."""
    z_r = point.z + comp.alt_shift_m
    x_r = point.x + comp.x_shift_m
    h1, h2, h3 = h_functions(z_r, x_r, gs, c)
    gx, _, gz = gs

    f1_slope = h1 * h1_derivative(z_r, c)            # d(h1^2/2)/dz
    f2_slope = 2.0 * (z_r - gz) ** 3                 # d(h2^2/2)/dz
    f3_slope = 2.0 * (x_r - gx) ** 3                 # d(h3^2/2)/dx
    return TaylorForms(
        f1_slope=f1_slope, f1_icept=0.5 * h1 ** 2 - f1_slope * point.z,
        f2_slope=f2_slope, f2_icept=0.5 * h2 ** 2 - f2_slope * point.z,
        f3_slope=f3_slope, f3_icept=0.5 * h3 ** 2 - f3_slope * point.x,
    )


@dataclass(frozen=True)
class SnrConeCheck:
    """Residuals of the rotated-cone pair standing in for the SNR cubic."""

    first: np.ndarray    # psi - (z_r)^2            >= 0 when feasible
    second: np.ndarray   # beta*p_sar*z_r - psi^2   >= 0 when feasible

    def feasible(self, tol: float = 1e-9) -> np.ndarray:
        return (self.first >= -tol) & (self.second >= -tol)


def snr_cone_blocks(z_r_m, p_sar_w, psi, beta: float) -> SnrConeCheck:
    """Evaluate the cone pair psi >= z_r^2, beta*p_sar*z_r >= psi^2.

    With psi tight at z_r^2 the pair is exactly the cubic sensing
    constraint z_r^3 <= beta*p_sar (for z_r > 0).
    """
    z_r = np.asarray(z_r_m, dtype=float)
    psi = np.asarray(psi, dtype=float)
    p = np.asarray(p_sar_w, dtype=float)
    return SnrConeCheck(first=psi - z_r ** 2, second=beta * p * z_r - psi ** 2)


# ----------------------------------------------------------------------
# The IR
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConicSubproblem:
    """Numeric IR of one convex planning subproblem.

    Every original constraint maps to exactly one block family:

    ==================  =========================================  ======
    block               content                                    rows
    ==================  =========================================  ======
    trajectory_eq       serpentine cross-track recursion           N
    battery_eq          charge init + per-slot recursion           N*M
    box                 z, p_sar, p_com bounds; q, psi >= 0        --
    snr_cone            rotated pair per scan                      N
    link_epigraph       h1 above its affine chord overestimate     N
    link_demand (c8)    slack quadratics vs underestimates         N*M
    slack_near (c8a)    h1 + h2 <= t                               N*M
    slack_far  (c8b)    h1 + h3 <= o                               N*M
    scheme_tie          optional equal-power rows                  --
    ==================  =========================================  ======

    The exponent spans only ~1e-5 across the altitude box, so the lowering
    replaces the exponential cone by its chord over the box: a convex-side
    overestimate within 2e-10 of exp (see ``chord_coefficients``), turning
    the program into a plain SOCP that interior-point solvers handle
    reliably.  The restriction direction keeps every majorization property.
    The epigraph variable carries h1 itself (~1e-4) rather than the raw
    exponential (~1): composing ``link_base*exp(.) - 1`` inside the solver
    would pair a near-unity variable with the large balance factor and lose
    most of the row's precision to cancellation (see
    ``h1_chord_coefficients``).
    """

    layout: VariableLayout
    coverage_weight: float           # objective coefficient per unit of summed z
    objective_shift_m2: float        # constant from the altitude compensation
    slope_near: float
    slope_far: float
    alt_shift: float
    x_shift: float
    z_lower: float
    z_upper: float
    sar_power_max: float
    com_power_max: float
    beta: float
    gamma: float
    link_base: float                 # required-SNR base factor (dimensionless)
    exp_coef: float                  # natural-log exponent per meter of nominal z
    exp_shift: float                 # exponent offset from the altitude compensation
    gs: tuple[float, float, float]
    y_sq: np.ndarray                 # (NM,) squared along-track GS offset per slot
    forms: TaylorForms
    balance: float                   # factor pairing c*h1 with h2/c, h3/c in the split
    q_start: float
    slot_dt: float
    cruise_power: float
    tie_com: bool
    tie_sar: bool
    expansion: ExpansionPoint

    def block_counts(self) -> dict[str, int]:
        n, nm = self.layout.n_scans, self.layout.n_slots
        counts = {"trajectory_eq": n, "battery_eq": nm, "snr_cone": n,
                  "link_epigraph": n, "link_demand": nm, "slack_near": nm,
                  "slack_far": nm}
        counts["scheme_tie"] = (nm - 1 if self.tie_com else 0) + \
                               (n - 1 if self.tie_sar else 0)
        return counts

    def h1_of(self, z_nom) -> np.ndarray:
        """Required link SNR at nominal per-scan altitude (compensation applied)."""
        z = np.asarray(z_nom, dtype=float)
        return self.link_base * np.exp(self.exp_coef * z + self.exp_shift) - 1.0


def chord_coefficients(sub: ConicSubproblem) -> tuple[float, float]:
    """Intercept and slope of the chord of exp(u) over the altitude box.

    Returns (icept, slope) with  icept + slope*z >= exp(exp_coef*z +
    exp_shift)  for every z in [z_lower, z_upper]; convexity of exp makes
    the chord an overestimate, and the gap is at most (u_hi - u_lo)^2 / 8 *
    exp(u_hi), around 2e-10 for a 100 m box.
    """
    u_lo = sub.exp_coef * sub.z_lower + sub.exp_shift
    u_hi = sub.exp_coef * sub.z_upper + sub.exp_shift
    if u_hi - u_lo < 1e-12:
        return math.exp(u_hi), 0.0
    slope_u = (math.exp(u_hi) - math.exp(u_lo)) / (u_hi - u_lo)
    icept_u = math.exp(u_lo) - slope_u * u_lo
    # compose with u = exp_coef*z + exp_shift
    return icept_u + slope_u * sub.exp_shift, slope_u * sub.exp_coef


def h1_chord_coefficients(sub: ConicSubproblem) -> tuple[float, float]:
    """Affine overestimate of h1 itself: icept + slope*z >= h1(z) on the box.

    Folding ``link_base*(.) - 1`` into the chord here, in one double-precision
    subtraction, keeps the near-cancelling product out of the conic program.
    Lowered rows then see an epigraph variable at h1's own 1e-4 scale; the
    raw form (a ~1-sized exponential times the 1e4-sized balance factor,
    minus the same product at the constant) left interior-point backends too
    little row precision and made them stall on distant-ground-station
    instances.
    """
    icept, slope = chord_coefficients(sub)
    return sub.link_base * icept - 1.0, sub.link_base * slope


def true_link_demand(sub: ConicSubproblem, z_nom, x_nom) -> np.ndarray:
    """Exact per-slot link demand h1*d^2 (in units of gamma*p_com)."""
    idx = sub.layout.slot_scan
    z = np.asarray(z_nom, dtype=float)
    x = np.asarray(x_nom, dtype=float)
    gx, _, gz = sub.gs
    h1 = sub.h1_of(z)
    d2 = (z + sub.alt_shift - gz) ** 2 + (x + sub.x_shift - gx) ** 2
    return (h1 * d2)[idx] + sub.y_sq * h1[idx]


def surrogate_link_demand(sub: ConicSubproblem, z_nom, x_nom) -> np.ndarray:
    """Per-slot convexified link demand with the quadratic slacks tight.

    The subproblem admits com power p at a slot iff this value is at most
    gamma*p there.  Majorizes ``true_link_demand`` everywhere and matches it
    at the expansion point.
    """
    idx = sub.layout.slot_scan
    k = sub.balance
    z = np.asarray(z_nom, dtype=float)
    x = np.asarray(x_nom, dtype=float)
    gx, _, gz = sub.gs
    h1 = sub.h1_of(z)
    h2 = (z + sub.alt_shift - gz) ** 2
    h3 = (x + sub.x_shift - gx) ** 2
    t = k * h1 + h2 / k
    o = k * h1 + h3 / k
    f = sub.forms
    under = 2.0 * k ** 2 * f.f1(z) + f.f2(z) / k ** 2 + f.f3(x) / k ** 2
    return (0.5 * t ** 2 + 0.5 * o ** 2 - under)[idx] + sub.y_sq * h1[idx]


def assemble(params: Params, n_scans: int, point: ExpansionPoint,
             comp: Compensation, c: DerivedConstants,
             scheme: str = "proposed") -> ConicSubproblem:
    """Build the IR for one SCA iteration around ``point``.

    ``scheme`` selects the benchmark variant: "bench2" ties com power across
    all slots, "bench3" ties radar power across scans; "proposed" and
    "bench1" add no ties (bench1 differs only by the zero compensation its
    caller passes in).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    mission, radar, comm = params.mission, params.radar, params.comm
    layout = exploit_per_scan_structure(n_scans, mission.slots_per_scan)
    if point.z.size != n_scans:
        raise ValueError(f"expansion point has {point.z.size} scans, IR needs {n_scans}")

    z_lo = max(mission.z_min_m - comp.alt_shift_m, 1e-9)  # nominal altitude stays flyable
    z_hi = mission.z_max_m - comp.alt_shift_m
    if not np.all((point.z >= z_lo - 1e-9) & (point.z <= z_hi + 1e-9)):
        raise ValueError("expansion point outside the altitude box")

    y = y_positions(n_scans, mission)
    gs = tuple(float(v) for v in comm.gs_position_m)
    forms = taylor_underestimates(point, comp, gs, c)

    # The raw split pairs h1 (~1e-4) with squared distances (~1e3+): the
    # squared-sum and underestimate terms then cancel across ~7 orders of
    # magnitude, beyond conic-solver accuracy.  Splitting the balanced pair
    # (balance*h1, h2/balance) is the same tight majorant family with all
    # terms near unity.
    h1e, h2e, h3e = h_functions(point.z + comp.alt_shift_m,
                                point.x + comp.x_shift_m, gs, c)
    y_sq = (y - gs[1]) ** 2
    spread = float(np.max(h2e + h3e)) + float(np.max(y_sq))
    balance = math.sqrt(max(spread, 1.0) / max(float(np.max(h1e)), 1e-12))
    balance = min(max(balance, 1.0), 1e7)

    return ConicSubproblem(
        layout=layout,
        coverage_weight=mission.aoi_length_m * c.swath_slope,
        objective_shift_m2=mission.aoi_length_m * c.swath_slope
                           * n_scans * comp.alt_shift_m,
        slope_near=c.slope_near,
        slope_far=c.slope_far,
        alt_shift=comp.alt_shift_m,
        x_shift=comp.x_shift_m,
        z_lower=z_lo,
        z_upper=z_hi,
        sar_power_max=radar.sar_power_max_w,
        com_power_max=comm.com_power_max_w,
        beta=radar.beta_w_inv_m3,
        gamma=comm.gamma_linear,
        link_base=c.rate_ratio_base_sync,
        exp_coef=_LN2 * c.rate_ratio_growth,
        exp_shift=_LN2 * c.rate_ratio_growth * comp.alt_shift_m,
        gs=gs,
        y_sq=y_sq,
        forms=forms,
        balance=balance,
        q_start=params.energy.battery_j,
        slot_dt=c.slot_duration_s,
        cruise_power=params.energy.cruise_power_w,
        tie_com=(scheme == "bench2"),
        tie_sar=(scheme == "bench3"),
        expansion=point,
    )


# ----------------------------------------------------------------------
# Solver binding
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SolveOutcome:
    """Result of one conic solve; arrays populated only when optimal."""

    status: str                      # optimal | infeasible | failure
    objective_m2: Optional[float]
    z: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    p_sar: Optional[np.ndarray] = None
    p_com: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    o: Optional[np.ndarray] = None
    cone_slack: Optional[np.ndarray] = None
    link_epigraph: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _status_of(problem: cp.Problem) -> str:
    s = problem.status
    if s in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return "optimal"
    if s in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return "infeasible"
    return "failure"


# Noise floor of a *certified* solve on these rows is ~1e-4 absolute (the
# balance factor inflates row norms, and active power caps sit right on the
# boundary); the pathological reduced-accuracy points this filter exists for
# violate by ~1e-1.  The threshold splits the two regimes; exact feasibility
# is restored later by the repair step, not here.
_REDUCED_ACCURACY_RTOL = 1e-3


def serpentine_x(sub: ConicSubproblem, z_nom: np.ndarray) -> np.ndarray:
    """Cross-track scan positions implied by the per-scan altitudes."""
    z = np.asarray(z_nom, dtype=float)
    x = np.empty_like(z)
    x[0] = -sub.slope_near * z[0]
    for i in range(1, z.size):
        x[i] = x[i - 1] + sub.slope_far * z[i - 1] - sub.slope_near * z[i]
    return x


def point_within_guarantees(sub: ConicSubproblem, z: np.ndarray,
                            x: np.ndarray, p_sar: np.ndarray,
                            p_com: np.ndarray) -> bool:
    """Check a solver point against the IR's own inequalities.

    A backend that stops on insufficient progress labels its last iterate
    "almost" optimal; on badly conditioned instances that point can break
    the lowered constraints by order one (observed: a com-power cap
    overshoot near 10% with a distant ground station).  The repair step
    leans on the surrogate guarantees, so a reduced-accuracy point is used
    only after it passes this check.  The battery recursion is deliberately
    not examined: repair replays it exactly and backs the altitude off when
    small solver drift overdraws it.
    """
    rt = _REDUCED_ACCURACY_RTOL
    span = max(1.0, sub.z_upper - sub.z_lower)
    if np.any(z < sub.z_lower - rt * span) or np.any(z > sub.z_upper + rt * span):
        return False
    if np.any(p_sar < -rt) or \
            np.any(p_sar > sub.sar_power_max * (1.0 + rt) + rt):
        return False
    if np.any(p_com < -rt) or \
            np.any(p_com > sub.com_power_max * (1.0 + rt) + rt):
        return False
    x_chk = serpentine_x(sub, z)
    if np.any(np.abs(x - x_chk) > rt * np.maximum(1.0, np.abs(x_chk))):
        return False
    z_r = z + sub.alt_shift
    if np.any(z_r ** 3 > sub.beta * p_sar * (1.0 + rt) + rt):
        return False
    cap = sub.gamma * sub.com_power_max
    return bool(np.all(surrogate_link_demand(sub, z, x_chk)
                       <= cap * (1.0 + rt) + rt))


def solve(sub: ConicSubproblem, max_iter: int = 500) -> SolveOutcome:
    """Lower the IR to a conic program and solve it.

    Deterministic for identical IR (interior-point backend, fixed
    canonicalization order).  Non-convergence maps to status "failure".
    """
    lay = sub.layout
    n, nm = lay.n_scans, lay.n_slots
    idx = lay.slot_scan

    z = cp.Variable(n, name="z")
    x = cp.Variable(n, name="x")
    p_sar = cp.Variable(n, name="p_sar")
    psi = cp.Variable(n, name="psi")
    h1v = cp.Variable(n, name="h1")
    p_com = cp.Variable(nm, name="p_com")
    q = cp.Variable(nm, name="q")
    t = cp.Variable(nm, name="t")
    o = cp.Variable(nm, name="o")

    z_r = z + sub.alt_shift
    cons = [
        z >= sub.z_lower, z <= sub.z_upper,
        p_sar >= 0, p_sar <= sub.sar_power_max,
        p_com >= 0, p_com <= sub.com_power_max,
        q >= 0, psi >= 0,
    ]

    # serpentine cross-track recursion
    cons.append(x[0] == -sub.slope_near * z[0])
    if n > 1:
        cons.append(x[1:] == x[:-1] + sub.slope_far * z[:-1] - sub.slope_near * z[1:])

    # battery: init + per-slot recursion (the final slot's draw is spent
    # after the last constrained level, matching the original formulation)
    cons.append(q[0] == sub.q_start)
    draws = sub.slot_dt * (p_com[:-1] + p_sar[idx[:-1]] + sub.cruise_power)
    cons.append(q[1:] == q[:-1] - draws)

    # sensing SNR as the rotated-cone pair
    cons.append(psi >= cp.square(z_r))
    for i in range(n):
        cons.append(cp.quad_over_lin(psi[i], z[i] + sub.alt_shift) <= sub.beta * p_sar[i])

    # epigraph of the exponential link term via its chord overestimate,
    # expressed directly at h1's scale (see h1_chord_coefficients)
    hb_icept, hb_slope = h1_chord_coefficients(sub)
    cons.append(h1v >= hb_icept + hb_slope * z)

    # balanced slack definitions (h2/h3 quadratics are convex in z/x)
    k = sub.balance
    gx, _, gz = sub.gs
    h2_quad = cp.square(z + (sub.alt_shift - gz))
    h3_quad = cp.square(x + (sub.x_shift - gx))
    cons.append((k * h1v + h2_quad / k)[idx] <= t)
    cons.append((k * h1v + h3_quad / k)[idx] <= o)

    # link demand with the (balanced) global underestimates
    f = sub.forms
    u_slope = 2.0 * k ** 2 * f.f1_slope + f.f2_slope / k ** 2
    u_icept = 2.0 * k ** 2 * f.f1_icept + f.f2_icept / k ** 2
    under = (u_icept + cp.multiply(u_slope, z))[idx] \
        + (f.f3_icept + cp.multiply(f.f3_slope, x))[idx] / k ** 2
    cons.append(0.5 * cp.square(t) + 0.5 * cp.square(o)
                + cp.multiply(sub.y_sq, h1v[idx]) - under
                <= sub.gamma * p_com)

    if sub.tie_com and nm > 1:
        cons.append(p_com[1:] == p_com[0])
    if sub.tie_sar and n > 1:
        cons.append(p_sar[1:] == p_sar[0])

    objective = cp.Maximize(sub.coverage_weight * cp.sum(z))
    problem = cp.Problem(objective, cons)
    try:
        with warnings.catch_warnings():
            # "inaccurate" statuses are mapped explicitly below; the library
            # warning would only spam batch runs
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, max_iter=max_iter)
    except (cp.error.SolverError, ValueError, ArithmeticError):
        return SolveOutcome(status="failure", objective_m2=None)

    status = _status_of(problem)
    if status != "optimal":
        return SolveOutcome(status=status, objective_m2=None)
    z_val = np.asarray(z.value, dtype=float)
    x_val = np.asarray(x.value, dtype=float)
    p_sar_val = np.asarray(p_sar.value, dtype=float)
    p_com_val = np.asarray(p_com.value, dtype=float)
    if problem.status == cp.OPTIMAL_INACCURATE and \
            not point_within_guarantees(sub, z_val, x_val, p_sar_val, p_com_val):
        return SolveOutcome(status="failure", objective_m2=None)
    return SolveOutcome(
        status="optimal",
        objective_m2=float(sub.coverage_weight * z_val.sum()
                           + sub.objective_shift_m2),
        z=z_val,
        x=x_val,
        p_sar=p_sar_val,
        p_com=p_com_val,
        q=np.asarray(q.value, dtype=float),
        t=np.asarray(t.value, dtype=float),
        o=np.asarray(o.value, dtype=float),
        cone_slack=np.asarray(psi.value, dtype=float),
        link_epigraph=np.asarray(h1v.value, dtype=float),
    )


# ----------------------------------------------------------------------
# Canonical text dump
# ----------------------------------------------------------------------

def dump(sub: ConicSubproblem) -> str:
    """Canonical one-constraint-per-line rendering for external cross-checks."""
    lay = sub.layout
    n, nm = lay.n_scans, lay.n_slots
    idx = lay.slot_scan
    f = sub.forms
    lines = [
        f"# conic subproblem: scans={n} slots={nm} variables={lay.total_variables}"
        f" balance={sub.balance!r}",
        f"obj: maximize {sub.coverage_weight!r}*sum(z) + {sub.objective_shift_m2!r}",
        f"box: {sub.z_lower!r} <= z[i] <= {sub.z_upper!r}; 0 <= p_sar[i] <= "
        f"{sub.sar_power_max!r}; 0 <= p_com[k] <= {sub.com_power_max!r}; "
        f"q[k] >= 0; psi[i] >= 0",
    ]
    lines.append(f"eq[traj,0]: x[0] + {sub.slope_near!r}*z[0] == 0")
    for i in range(1, n):
        lines.append(f"eq[traj,{i}]: x[{i}] - x[{i-1}] - {sub.slope_far!r}*z[{i-1}]"
                     f" + {sub.slope_near!r}*z[{i}] == 0")
    lines.append(f"eq[batt,0]: q[0] == {sub.q_start!r}")
    for k in range(1, nm):
        j = idx[k - 1]
        lines.append(f"eq[batt,{k}]: q[{k}] == q[{k-1}] - {sub.slot_dt!r}*"
                     f"(p_com[{k-1}] + p_sar[{j}] + {sub.cruise_power!r})")
    for i in range(n):
        lines.append(f"cone[snr,{i}]: psi[{i}] >= (z[{i}] + {sub.alt_shift!r})^2"
                     f" and psi[{i}]^2 <= {sub.beta!r}*p_sar[{i}]*(z[{i}] + {sub.alt_shift!r})")
    hb_icept, hb_slope = h1_chord_coefficients(sub)
    for i in range(n):
        lines.append(f"exp[link,{i}]: h1[{i}] >= {hb_icept!r} + {hb_slope!r}*z[{i}]"
                     f"   (chord of {sub.link_base!r}*exp({sub.exp_coef!r}*z"
                     f" + {sub.exp_shift!r}) - 1)")
    gx, _, gz = sub.gs
    bal = sub.balance
    for k in range(nm):
        i = idx[k]
        u_sl = 2.0 * bal ** 2 * f.f1_slope[i] + f.f2_slope[i] / bal ** 2
        u_ic = 2.0 * bal ** 2 * f.f1_icept[i] + f.f2_icept[i] / bal ** 2
        lines.append(
            f"c8[{k}]: 0.5*t[{k}]^2 + 0.5*o[{k}]^2 + {sub.y_sq[k]!r}*"
            f"h1[{i}] - ({u_ic!r} + {u_sl!r}*z[{i}])"
            f" - ({f.f3_icept[i] / bal ** 2!r} + {f.f3_slope[i] / bal ** 2!r}*x[{i}])"
            f" <= {sub.gamma!r}*p_com[{k}]")
    for k in range(nm):
        i = idx[k]
        lines.append(f"c8a[{k}]: {bal!r}*h1[{i}] + (z[{i}] + "
                     f"{sub.alt_shift - gz!r})^2/{bal!r} <= t[{k}]")
    for k in range(nm):
        i = idx[k]
        lines.append(f"c8b[{k}]: {bal!r}*h1[{i}] + (x[{i}] + "
                     f"{sub.x_shift - gx!r})^2/{bal!r} <= o[{k}]")
    if sub.tie_com:
        for k in range(1, nm):
            lines.append(f"tie[p_com,{k}]: p_com[{k}] == p_com[0]")
    if sub.tie_sar:
        for i in range(1, n):
            lines.append(f"tie[p_sar,{i}]: p_sar[{i}] == p_sar[0]")
    return "\n".join(lines) + "\n"
