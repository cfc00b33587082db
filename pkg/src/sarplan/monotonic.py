"""Global upper bound on mission coverage via monotonic optimization.

The convex program in :mod:`sarplan.subproblem` climbs to a stationary point
of the nonconvex mission problem; this module brackets the true optimum from
above so that stationary point can be certified.  Three reductions make the
bound tractable:

* per-scan aggregation: position and radar power are already constant within
  a scan, the along-track offset to the ground station is replaced by each
  scan's most favorable slot, and the battery is checked after each of the
  first N-1 scans instead of after each slot -- every step only enlarges the
  feasible set, so the optimum can only go up;
* monotone split: the real-time link constraint becomes f(z) - g(z, p) <= 0
  with f and g coordinate-wise nondecreasing, which an auxiliary slack t
  turns into one downward-closed and one upward-closed inequality;
* polyblock outer approximation: the downward-closed region is covered by a
  shrinking union of boxes whose corner values upper-bound the coverage;
  corners are projected onto the region's boundary by bisection along the
  ray to the origin and replaced by one child per reduced coordinate.

Everything here is closed-form numpy; no solver is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .model import DerivedConstants, Plan, y_positions
from .params import MissionParams, Params
from .robust import Compensation

_LN2 = math.log(2.0)

# Relative slack for the closed-form membership tests.  Large enough to
# absorb roundoff in the prefix sums, small enough that a 1e-6 constraint
# deficit still fails.
_FEAS_SLACK = 1e-9


# ----------------------------------------------------------------------
# Per-scan reduction
# ----------------------------------------------------------------------

def per_scan_y(gs_y: float, mission: MissionParams, n_scans: int) -> np.ndarray:
    """Most favorable along-track coordinate of each scan.

    Returns, per scan, the slot y minimizing the squared offset to the
    ground station: the grid clamp of ``gs_y`` to the scan's y range.  Using
    it for every slot of the scan can only shrink the UAV-GS distance, so
    constraints built from it relax the slot-resolved originals.

    Args:
        gs_y: along-track coordinate of the ground station in meters.
        mission: area-of-interest geometry (slot grid).
        n_scans: number of scans.

    Returns:
        Array of shape (n_scans,).
    """
    m = mission.slots_per_scan
    y = y_positions(n_scans, mission).reshape(n_scans, m)
    best = np.argmin((y - gs_y) ** 2, axis=1)
    return y[np.arange(n_scans), best]


@dataclass(frozen=True)
class BoundProblem:
    """Per-scan monotone relaxation of the mission problem.

    Variables live in the box [0, v_max] of R^{3N}: per-scan nominal
    altitude (z block), link slack (t block), and com power (p block).
    ``f_cap`` / ``f_floor`` are the extremes of the monotone function f over
    the box -- its value at the all-``z_upper`` corner and at the origin --
    and the t block of ``v_max`` spans their difference.
    """

    n_scans: int
    slots_per_scan: int
    aoi_length_m: float
    slope_near: float
    swath_slope: float               # far-edge slope minus near-edge slope
    alt_shift_m: float               # compensation offsets: compensated
    x_shift_m: float                 #   position is nominal + shift
    gs: tuple[float, float, float]
    y_bar: np.ndarray                # (N,) most favorable along-track offset
    link_base: float                 # required-SNR base factor
    rate_growth: float               # required-SNR exponent growth per meter
    gamma: float
    beta: float
    sar_power_max: float
    com_power_max: float
    z_upper: float                   # nominal altitude box top (z_max - shift)
    z_min: float                     # minimum compensated altitude (lives in H)
    slot_dt: float
    cruise_power: float
    q_start: float
    c_const: np.ndarray              # (N,) constant squared-distance part
    f_cap: np.ndarray                # (N,) f at the all-z_upper corner
    f_floor: np.ndarray              # (N,) f at the origin

    def __post_init__(self) -> None:
        v = self.v_max
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("bound box must have finite, strictly positive "
                             "extent in every coordinate")
        if np.any(self.y_bar < -1e-9) or np.any(self.y_bar > self.aoi_length_m + 1e-9):
            raise ValueError("per-scan y must lie inside the area of interest")

    @property
    def dim(self) -> int:
        return 3 * self.n_scans

    @property
    def coverage_weight(self) -> float:
        """Covered area per scan per meter of compensated altitude."""
        return self.aoi_length_m * self.swath_slope

    @property
    def v_max(self) -> np.ndarray:
        n = self.n_scans
        v = np.empty(3 * n)
        v[:n] = self.z_upper
        v[n:2 * n] = self.f_cap - self.f_floor
        v[2 * n:] = self.com_power_max
        return v

    def split(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Views of the z / t / p blocks of a vertex."""
        n = self.n_scans
        v = np.asarray(v, dtype=float)
        return v[:n], v[n:2 * n], v[2 * n:]

    def coverage_of(self, v: np.ndarray) -> float:
        """Covered area at a vertex (depends on the z block only)."""
        z = np.asarray(v, dtype=float)[:self.n_scans]
        return self.coverage_weight * float(np.sum(z + self.alt_shift_m))

    def link_excess(self, z_scan) -> np.ndarray:
        """Required link SNR at compensated altitude (the monotone factor)."""
        z = np.asarray(z_scan, dtype=float)
        bits = math.log2(self.link_base) + self.rate_growth * (z + self.alt_shift_m)
        return np.expm1(_LN2 * bits)


def build_bound_problem(params: Params, comp: Compensation,
                        c: DerivedConstants, n_scans: int) -> BoundProblem:
    """Assemble the per-scan relaxation for a given scan count.

    The constant squared-distance term bakes in both compensation offsets
    and the per-scan along-track clamp; ``f_cap`` / ``f_floor`` are
    evaluated here once so the slack box and the split constraints agree by
    construction.

    Args:
        params: full parameter bundle.
        comp: robust compensation offsets (zero offsets for the nominal
            problem).
        c: derived mission constants.
        n_scans: number of scans N >= 1.

    Returns:
        A frozen :class:`BoundProblem`.
    """
    if n_scans < 1:
        raise ValueError("need at least one scan")
    mission, radar, comm = params.mission, params.radar, params.comm
    gx, gy, gz = (float(v) for v in comm.gs_position_m)
    if gz < 0.0:
        raise ValueError("ground station below ground level breaks the "
                         "monotone split")
    if comp.x_shift_m > 1e-12 or comp.alt_shift_m < -1e-12:
        raise ValueError("compensation must shift cross-track left and "
                         "altitude up")
    z_upper = mission.z_max_m - comp.alt_shift_m
    if z_upper <= 0.0:
        raise ValueError("compensation altitude shift leaves no flyable band")
    y_bar = per_scan_y(gy, mission, n_scans)
    c_const = ((gx - comp.x_shift_m) ** 2 + (gz - comp.alt_shift_m) ** 2
               + (y_bar - gy) ** 2)
    problem = BoundProblem(
        n_scans=n_scans,
        slots_per_scan=mission.slots_per_scan,
        aoi_length_m=mission.aoi_length_m,
        slope_near=c.slope_near,
        swath_slope=c.swath_slope,
        alt_shift_m=comp.alt_shift_m,
        x_shift_m=comp.x_shift_m,
        gs=(gx, gy, gz),
        y_bar=y_bar,
        link_base=c.rate_ratio_base_sync,
        rate_growth=c.rate_ratio_growth,
        gamma=comm.gamma_linear,
        beta=radar.beta_w_inv_m3,
        sar_power_max=radar.sar_power_max_w,
        com_power_max=comm.com_power_max_w,
        z_upper=z_upper,
        z_min=mission.z_min_m,
        slot_dt=mission.slot_duration_s,
        cruise_power=params.energy.cruise_power_w,
        q_start=params.energy.battery_j,
        c_const=c_const,
        # placeholders so the box validates; replaced right below
        f_cap=np.ones(n_scans),
        f_floor=np.zeros(n_scans),
    )
    zeros = np.zeros(n_scans)
    f_cap, _ = f_g_split(np.full(n_scans, z_upper), zeros, problem)
    f_floor, _ = f_g_split(zeros, zeros, problem)
    return replace(problem, f_cap=f_cap, f_floor=f_floor)


# ----------------------------------------------------------------------
# Monotone split of the link constraint
# ----------------------------------------------------------------------

def f_g_split(z_scan, p_com_scan, problem: BoundProblem
              ) -> tuple[np.ndarray, np.ndarray]:
    """The link demand as a difference of nondecreasing functions.

    Returns per-scan (f, g), both coordinate-wise nondecreasing in
    (z, p_com) on the nonnegative orthant, with f - g equal to
    ``link_excess(z) * d^2 - gamma * p_com`` at the per-scan robust
    position: cross-track from the no-gap tiling recursion plus the
    compensation shift, altitude z plus the altitude shift, along-track at
    the scan's most favorable slot.  Expanding the squared distance and
    routing every negatively-signed term into g (with the positive/negative
    parts of the station's cross-track coordinate kept separate) is what
    keeps both functions monotone.

    Args:
        z_scan: per-scan nominal altitudes, shape (N,).
        p_com_scan: per-scan com powers, shape (N,).
        problem: the assembled relaxation.

    Returns:
        Tuple of arrays (f, g), each shape (N,).
    """
    z = np.asarray(z_scan, dtype=float)
    p = np.asarray(p_com_scan, dtype=float)
    gx, _, gz = problem.gs
    pos_gx, neg_gx = max(gx, 0.0), max(-gx, 0.0)
    span = problem.swath_slope
    c1 = problem.slope_near
    prefix = np.concatenate(([0.0], np.cumsum(z[:-1])))
    ea = problem.link_excess(z)
    f = ea * (span ** 2 * prefix ** 2
              + (1.0 + c1 ** 2) * z ** 2
              + 2.0 * z * (c1 * pos_gx - c1 * problem.x_shift_m
                           + problem.alt_shift_m)
              + 2.0 * span * prefix * neg_gx
              + problem.c_const)
    g = problem.gamma * p + ea * (2.0 * span * prefix * (pos_gx - problem.x_shift_m)
                                  + 2.0 * c1 * span * prefix * z
                                  + 2.0 * z * (c1 * neg_gx + gz))
    return f, g


@dataclass(frozen=True)
class SplitBlocks:
    """Constant ranges used by the three-way slack rewrite of f - g <= 0."""

    f_cap: np.ndarray      # f at the all-z_upper corner, per scan
    f_floor: np.ndarray    # f at the origin, per scan
    slack_max: np.ndarray  # allowed t range: f_cap - f_floor


def split_constraints(problem: BoundProblem) -> SplitBlocks:
    """Blocks of the slack rewrite of the link constraint.

    f - g <= 0 on the box is equivalent to: there is a t with
    ``f + t <= f_cap`` (downward closed), ``g + t >= f_cap`` (upward
    closed), and ``0 <= t <= slack_max``; the witness is
    ``t = f_cap - max(f, g clipped)``, always in range because f runs
    between ``f_floor`` and ``f_cap`` on the box.
    """
    return SplitBlocks(f_cap=problem.f_cap.copy(),
                       f_floor=problem.f_floor.copy(),
                       slack_max=problem.f_cap - problem.f_floor)


# ----------------------------------------------------------------------
# Feasible-region membership (closed form)
# ----------------------------------------------------------------------

def _within(value, limit) -> bool:
    """value <= limit, with relative grace on the limit side."""
    return bool(np.all(value <= limit + _FEAS_SLACK * np.maximum(1.0, np.abs(limit))))


def in_normal_set(v, problem: BoundProblem) -> bool:
    """Membership in the downward-closed constraint set G.

    Box top, sensing-power cube, the f-side slack inequality, and battery
    levels after each of the first N-1 scans.  Every constraint is
    nondecreasing in v, so the set contains each point below any member --
    which is what makes the ray bisection in :func:`bisect_project` valid.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v < -1e-12):
        return False
    z, t, p = problem.split(v)
    if not (_within(z, problem.z_upper)
            and _within(t, problem.f_cap - problem.f_floor)
            and _within(p, problem.com_power_max)):
        return False
    z_r = z + problem.alt_shift_m
    p_sar = z_r ** 3 / problem.beta
    if not _within(p_sar, problem.sar_power_max):
        return False
    f, _ = f_g_split(z, p, problem)
    if not _within(f + t, problem.f_cap):
        return False
    draw = problem.slots_per_scan * problem.slot_dt * (
        p + p_sar + problem.cruise_power)
    spent = np.cumsum(draw)[:problem.n_scans - 1]
    return _within(spent, problem.q_start)


def in_reverse_normal_set(v, problem: BoundProblem) -> bool:
    """Membership in the upward-closed constraint set H.

    Minimum compensated altitude and the g-side slack inequality; both
    nondecreasing in v, so the set contains each point above any member.
    Corners outside H can be discarded: nothing below them is feasible.
    """
    v = np.asarray(v, dtype=float)
    z, t, p = problem.split(v)
    floor = problem.z_min - _FEAS_SLACK * max(1.0, abs(problem.z_min))
    if np.any(z + problem.alt_shift_m < floor):
        return False
    _, g = f_g_split(z, p, problem)
    grace = _FEAS_SLACK * np.maximum(1.0, np.abs(problem.f_cap))
    return bool(np.all(g + t >= problem.f_cap - grace))


def feasibility_check(v, problem: BoundProblem) -> bool:
    """Exact membership of a vertex in the feasible region G intersect H.

    With z, t, and p fixed the radar power is uniquely minimal at
    ``(z + shift)^3 / beta`` and every remaining check is a closed-form
    scan: no solver is needed.
    """
    return in_normal_set(v, problem) and in_reverse_normal_set(v, problem)


def vertex_from_plan(plan: Plan, problem: BoundProblem) -> np.ndarray:
    """Per-scan image of a slot-resolved plan in the bound's variable box.

    Altitude is the plan's nominal per-scan value, com power the smallest
    within each scan (the most favorable slot pays exactly the per-scan
    link demand), and the slack is the witness ``f_cap - f(z)``.  A plan
    that validates slot-by-slot maps to a vertex inside G intersect H.
    """
    if plan.n_scans != problem.n_scans:
        raise ValueError("plan and bound problem disagree on scan count")
    z = plan.scan_values(plan.nominal_xyz[2])
    p = plan.p_com_w.reshape(problem.n_scans, -1).min(axis=1)
    f, _ = f_g_split(z, np.zeros_like(p), problem)
    t = np.clip(problem.f_cap - f, 0.0, problem.f_cap - problem.f_floor)
    return np.concatenate([z, t, p])


# ----------------------------------------------------------------------
# Boundary projection
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    """Bracketing of a ray-to-origin projection onto the boundary of G."""

    point: np.ndarray    # scale * v, inside G
    outer: np.ndarray    # just outside G (equals point when v is in G)
    scale: float         # the feasible end of the bracket, in [0, 1]


def bisect_project(v, problem: BoundProblem, tol: float = 1e-10) -> Projection:
    """Largest scale lambda with lambda * v inside G, by bisection.

    G is downward closed, so membership along the ray is monotone in lambda
    and bisection brackets the boundary crossing to within ``tol``.  The
    returned point is always feasible for G; ``outer`` is the matching
    infeasible end, which the polyblock uses to cut (cutting at the outer
    end never removes feasible points).

    Raises:
        ValueError: if even the zero point is outside G (the budget
            constraints admit no mission at all -- a degenerate problem).
    """
    v = np.asarray(v, dtype=float)
    if in_normal_set(v, problem):
        return Projection(point=v.copy(), outer=v.copy(), scale=1.0)
    if not in_normal_set(np.zeros_like(v), problem):
        raise ValueError("degenerate bound problem: even the zero point "
                         "violates the budget constraints")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if in_normal_set(mid * v, problem):
            lo = mid
        else:
            hi = mid
    return Projection(point=lo * v, outer=hi * v, scale=lo)


def _push_to_boundary(point: np.ndarray, corner: np.ndarray,
                      problem: BoundProblem,
                      tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Extend a feasible point coordinate-wise to a maximal point of G.

    The ray projection shrinks every coordinate proportionally, which makes
    it an *improper* boundary point: coordinates the objective ignores keep
    slack, the cut spawns children differing only in those coordinates, and
    the bound stops improving.  One sequential per-coordinate bisection
    toward the corner repairs that: the result is maximal in every
    coordinate given the others, so the uncut region above it is provably
    outside G.  Returns (inner, outer): the inner point is in G, the outer
    upper-bounds the true per-coordinate maxima (cutting there never
    removes feasible points).
    """
    inner = point.copy()
    outer = point.copy()
    for i in range(problem.dim):
        lo, hi = inner[i], corner[i]
        if hi - lo <= _FEAS_SLACK * max(1.0, hi):
            outer[i] = max(lo, hi)
            continue
        probe = inner.copy()
        probe[i] = hi
        if in_normal_set(probe, problem):
            inner[i] = outer[i] = hi
            continue
        step_tol = tol * max(1.0, abs(hi))
        while hi - lo > step_tol:
            mid = 0.5 * (lo + hi)
            probe[i] = mid
            if in_normal_set(probe, problem):
                lo = mid
            else:
                hi = mid
        inner[i] = lo
        outer[i] = hi
    return inner, outer


# ----------------------------------------------------------------------
# Polyblock outer approximation
# ----------------------------------------------------------------------

@dataclass
class PolyblockState:
    """Mutable search state: the corner set and the incumbent.

    ``vertices`` is an (n, 3N) array of box corners whose union of boxes
    [0, corner] covers every feasible point not yet ruled out; no corner
    dominates another.
    """

    vertices: np.ndarray
    iteration: int
    best_value_m2: float
    best_point: Optional[np.ndarray]
    tolerance_m2: float


@dataclass(frozen=True)
class BoundResult:
    """Outcome of the polyblock search.

    ``bound_m2`` is a valid upper bound on the mission coverage in every
    status except ``infeasible`` (where no plan exists at all);
    ``incumbent_m2`` is the value of the best feasible vertex found, or
    -inf when none was.
    """

    status: str            # "optimal" | "infeasible" | "aborted"
    bound_m2: float
    incumbent_m2: float
    incumbent: Optional[np.ndarray]
    iterations: int
    trace: tuple[tuple[int, float, float], ...]   # (iteration, bound, incumbent)
    converged: bool


def _coverages(problem: BoundProblem, vertices: np.ndarray) -> np.ndarray:
    n = problem.n_scans
    return problem.coverage_weight * (vertices[:, :n].sum(axis=1)
                                      + n * problem.alt_shift_m)


def _select_corner(problem: BoundProblem, vertices: np.ndarray) -> int:
    """Index of the best corner: max coverage, lexicographically smallest
    coordinates on ties (for determinism)."""
    cov = _coverages(problem, vertices)
    cand = np.flatnonzero(cov >= cov.max())
    if cand.size == 1:
        return int(cand[0])
    order = np.lexsort(vertices[cand].T[::-1])
    return int(cand[order[0]])


def polyblock_step(state: PolyblockState, problem: BoundProblem,
                   projection_tol: float = 1e-10) -> Optional[str]:
    """One outer-approximation iteration: select, project, cut, prune.

    Mutates ``state`` in place.  Returns "optimal" when the selected corner
    itself lies in G (it then attains the maximum over a set covering all
    feasible points, and survives the H prune, so it is a global optimum);
    returns None otherwise.
    """
    idx = _select_corner(problem, state.vertices)
    corner = state.vertices[idx].copy()
    value = problem.coverage_of(corner)
    state.iteration += 1
    if in_normal_set(corner, problem):
        if value >= state.best_value_m2:
            state.best_value_m2 = value
            state.best_point = corner
        return "optimal"
    proj = bisect_project(corner, problem, projection_tol)
    inner, outer = _push_to_boundary(proj.point, corner, problem, projection_tol)
    # Incumbent update: only projections feasible for both sets count.
    inner_value = problem.coverage_of(inner)
    if (inner_value >= state.best_value_m2
            and in_reverse_normal_set(inner, problem)):
        state.best_value_m2 = inner_value
        state.best_point = inner.copy()
    # Replace the corner by one child per meaningfully reduced coordinate
    # (tolerance-sized gaps are treated as zero so roundoff cannot spawn
    # an endless trickle of near-duplicate corners).
    remaining = np.delete(state.vertices, idx, axis=0)
    children = []
    for i in range(problem.dim):
        gap = corner[i] - outer[i]
        if corner[i] <= 0.0 or gap <= _FEAS_SLACK * max(1.0, corner[i]):
            continue
        child = corner.copy()
        child[i] = outer[i]
        if not in_reverse_normal_set(child, problem):
            continue                      # nothing below it is feasible
        if remaining.size and bool(np.any(np.all(remaining >= child, axis=1))):
            continue                      # dominated by an existing corner
        children.append(child)
    if children:
        state.vertices = np.vstack([remaining] + [c[None, :] for c in children])
    else:
        state.vertices = remaining
    # Corners that cannot beat the incumbent need no further refinement.
    if state.best_point is not None and state.vertices.size:
        cov = _coverages(problem, state.vertices)
        state.vertices = state.vertices[cov > state.best_value_m2]
    return None


def polyblock_solve(problem: BoundProblem,
                    epsilon_m2: Optional[float] = None,
                    max_iterations: int = 20000,
                    max_vertices: int = 20000,
                    projection_tol: float = 1e-10) -> BoundResult:
    """Polyblock outer approximation of the per-scan relaxation.

    Maintains a corner set whose union of boxes covers the feasible region.
    The best corner value is a valid upper bound at every iteration and
    never increases; the incumbent never decreases; the loop ends when the
    two meet within ``epsilon_m2`` (default: 1% of the value of the full
    box corner).  Hitting the iteration or corner-count cap aborts with the
    current -- still valid -- bound and ``converged=False``.

    Args:
        problem: the assembled per-scan relaxation.
        epsilon_m2: absolute termination gap in square meters.
        max_iterations: hard cap on outer iterations.
        max_vertices: hard cap on the corner-set size.
        projection_tol: bisection tolerance for the boundary projection.

    Returns:
        A :class:`BoundResult`.
    """
    v_max = problem.v_max
    if epsilon_m2 is None:
        epsilon_m2 = 0.01 * problem.coverage_of(v_max)
    if epsilon_m2 <= 0.0:
        raise ValueError("epsilon_m2 must be strictly positive")
    neg_inf = float("-inf")
    if not in_normal_set(np.zeros_like(v_max), problem):
        # G is downward closed, so an empty origin means an empty G.
        return BoundResult(status="infeasible", bound_m2=0.0,
                           incumbent_m2=neg_inf, incumbent=None,
                           iterations=0, trace=(), converged=True)
    if not in_reverse_normal_set(v_max, problem):
        # H is upward closed, so the box misses H entirely.
        return BoundResult(status="infeasible", bound_m2=0.0,
                           incumbent_m2=neg_inf, incumbent=None,
                           iterations=0, trace=(), converged=True)
    state = PolyblockState(vertices=v_max[None, :].copy(), iteration=0,
                           best_value_m2=neg_inf, best_point=None,
                           tolerance_m2=epsilon_m2)
    trace: list[tuple[int, float, float]] = []
    bound = problem.coverage_of(v_max)
    status, converged = "aborted", False
    for _ in range(max_iterations):
        if state.vertices.shape[0] == 0:
            # Every remaining corner was at or below the incumbent.
            bound = state.best_value_m2
            trace.append((state.iteration + 1, bound, state.best_value_m2))
            status, converged = "optimal", True
            break
        bound = float(_coverages(problem, state.vertices).max())
        trace.append((state.iteration + 1, bound, state.best_value_m2))
        if bound - state.best_value_m2 <= epsilon_m2:
            status, converged = "optimal", True
            break
        if state.vertices.shape[0] > max_vertices:
            break
        if polyblock_step(state, problem, projection_tol) == "optimal":
            status, converged = "optimal", True
            break
    return BoundResult(status=status, bound_m2=bound,
                       incumbent_m2=state.best_value_m2,
                       incumbent=state.best_point,
                       iterations=state.iteration,
                       trace=tuple(trace), converged=converged)
