"""Placement and power planning for the UAV relay/jammer.

The UAV serves K ground UEs, jams the warden to protect a covert satellite
downlink to Bob, and must be placed (ground position q, altitude H) and
powered (per-UE powers Pk, peak jamming power Pj_hat, satellite power Pa) to
maximize Bob's covert rate subject to:

- covertness: the fading-averaged minimum detection error at the warden stays
  above 1 - eps, enforced through the closed-form bound (a ball around the
  warden in placement space, a linear cap on Pa in power space);
- per-UE rate targets (balls around each UE once powers are fixed, linear
  power floors once the placement is fixed);
- the UAV power budget, the satellite power cap, minimum-elevation cones to
  every ground node, and altitude limits.

Two solution paths are provided. ``bcd_optimize`` alternates a placement
step (maximize distance to Bob, a convex objective handled by successive
linearization over the second-order-cone feasible set) with a power step (a
linear-fractional program made linear by the Charnes-Cooper substitution).
``perfect_cancellation_optimize`` covers the case where Bob strips the
jamming entirely (varpi = 0): the rate then depends on the placement only
through the covertness ceiling on Pa, a ratio of a concave to a convex
quadratic maximized exactly by Dinkelbach iteration, after which the power
split follows in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    GammaApprox,
    SatelliteLink,
    SRParams,
    UavLinkBudget,
    UavPlacement,
    covert_rate,
    sample_sr_power,
    uav_gain,
    ue_rate,
)
from .detection import covert_constraint_satisfied, phi_inverse
from .solvers import (
    AffineConstraint,
    FractionalProgram,
    LinearObjective,
    LinearProgram,
    QuadraticSum,
    SocConstraint,
    _barrier_maximize,
    ball_constraint,
    dinkelbach,
    max_slack_point,
    solve_lp,
)

__all__ = [
    "PlannerInfeasible",
    "Scenario",
    "PowerAllocation",
    "Solution",
    "ValidationReport",
    "bob_rate",
    "constraint_residuals",
    "placement_subproblem",
    "power_subproblem",
    "bcd_optimize",
    "perfect_cancellation_optimize",
    "validate_solution",
]


class PlannerInfeasible(RuntimeError):
    """Raised when a subproblem's constraint set is empty; names the culprit."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"infeasible: {constraint}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class Scenario:
    """Complete problem instance in SI units.

    ``sr``/``gamma`` describe the satellite fading law and its two-moment
    surrogate, ``sat`` the satellite large-scale link, ``budget`` the UAV
    reference gains and minimum elevation angle. Positions are ground-plane
    coordinates in meters; ``willie`` is the warden. ``varpi`` is the
    fraction of the jamming power Bob cannot cancel.
    """

    sr: SRParams
    gamma: GammaApprox
    sat: SatelliteLink
    budget: UavLinkBudget
    bob: np.ndarray
    willie: np.ndarray
    ues: np.ndarray            # (K, 2), possibly K = 0
    sigma_kappa2: float
    sigma_b2: float
    sigma_w2: float
    varpi: float
    eps: float
    P_tot: float
    Pa_max: float
    H_min: float
    H_max: float
    R_tg: float
    delta: float = 1e-6
    i_max: int = 50

    def __post_init__(self) -> None:
        object.__setattr__(self, "bob", np.asarray(self.bob, dtype=float).reshape(2))
        object.__setattr__(self, "willie", np.asarray(self.willie, dtype=float).reshape(2))
        ues = np.asarray(self.ues, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "ues", ues)
        if not 0.0 < self.eps < 0.5:
            raise ValueError(f"eps must be in (0, 0.5), got {self.eps}")
        if not 0.0 < self.H_min < self.H_max:
            raise ValueError("need 0 < H_min < H_max")
        if self.P_tot <= 0.0 or self.Pa_max <= 0.0:
            raise ValueError("P_tot and Pa_max must be positive")
        if not 0.0 <= self.varpi <= 1.0:
            raise ValueError(f"varpi must be in [0, 1], got {self.varpi}")
        for name in ("sigma_kappa2", "sigma_b2", "sigma_w2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.R_tg <= 0.0:
            raise ValueError("R_tg must be positive")
        if self.delta <= 0.0 or self.i_max < 1:
            raise ValueError("need delta > 0 and i_max >= 1")

    @property
    def K(self) -> int:
        return self.ues.shape[0]

    @property
    def xi_coeff(self) -> float:
        """Minimum UE service power per squared 3D distance, W/m^2."""
        return (2.0 ** self.R_tg - 1.0) * self.sigma_kappa2 / self.budget.beta0_kappa

    @property
    def ground_nodes(self) -> np.ndarray:
        """All nodes the UAV must see above the elevation mask: UEs, Bob, warden."""
        return np.vstack([self.ues, self.bob[None, :], self.willie[None, :]])


@dataclass(frozen=True)
class PowerAllocation:
    """UE service powers, peak jamming power, and satellite power (W)."""

    Pk: np.ndarray
    Pj_hat: float
    Pa: float

    def __post_init__(self) -> None:
        pk = np.asarray(self.Pk, dtype=float).ravel()
        # LP recovery can leave harmless -1e-18 dust on active bounds
        pk = np.where((pk < 0.0) & (pk > -1e-12), 0.0, pk)
        object.__setattr__(self, "Pk", pk)
        for name in ("Pj_hat", "Pa"):
            v = getattr(self, name)
            if -1e-12 < v < 0.0:
                object.__setattr__(self, name, 0.0)
            elif v < 0.0 or not np.isfinite(v):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if np.any(self.Pk < 0.0) or not np.all(np.isfinite(self.Pk)):
            raise ValueError("UE powers must be finite and nonnegative")

    @property
    def total(self) -> float:
        """UAV-side power draw: jamming peak plus all UE service powers."""
        return float(self.Pj_hat + self.Pk.sum())


@dataclass(frozen=True)
class Solution:
    """Planner output; ``trace`` holds Bob's rate after each outer iteration."""

    placement: UavPlacement | None
    powers: PowerAllocation | None
    Rb: float
    trace: list
    status: str  # converged | iteration-capped | infeasible
    message: str = ""


def _lift(point2d) -> np.ndarray:
    p = np.asarray(point2d, dtype=float).reshape(2)
    return np.array([p[0], p[1], 0.0])


def bob_rate(s: Scenario, pl: UavPlacement, powers: PowerAllocation) -> float:
    """Bob's rate at mean satellite fading under peak residual jamming."""
    g_ub = uav_gain(pl, s.bob, s.budget.beta0_chi)
    g_ab = s.sat.ell * s.sr.mean_power
    return covert_rate(powers.Pa, g_ab, s.varpi, powers.Pj_hat, g_ub, s.sigma_b2)


def constraint_residuals(s: Scenario, pl: UavPlacement, powers: PowerAllocation) -> dict:
    """Signed constraint residuals; every value <= 0 means satisfied.

    Keys: ``covert`` (detection-bound slack deficit, in eps units),
    ``ue_rate`` (worst rate shortfall, bps/Hz), ``total_power`` (W),
    ``pa_range`` (W), ``altitude`` (m), ``elevation`` (m), ``nonneg`` (W).
    """
    g_uw = uav_gain(pl, s.willie, s.budget.beta0_chi)
    _, slack = covert_constraint_satisfied(
        powers.Pa, powers.Pj_hat, g_uw, s.sat.ell, s.eps, s.gamma)
    res = {"covert": -slack}
    if s.K:
        rates = np.array([
            ue_rate(pk, uav_gain(pl, u, s.budget.beta0_kappa), s.sigma_kappa2)
            for pk, u in zip(powers.Pk, s.ues)
        ])
        res["ue_rate"] = float(np.max(s.R_tg - rates))
    else:
        res["ue_rate"] = -np.inf
    res["total_power"] = powers.total - s.P_tot
    res["pa_range"] = max(-powers.Pa, powers.Pa - s.Pa_max)
    res["altitude"] = max(s.H_min - pl.H, pl.H - s.H_max)
    reach = pl.H / math.tan(s.budget.phi_min)
    dists = np.linalg.norm(s.ground_nodes - pl.q[None, :], axis=1)
    res["elevation"] = float(np.max(dists) - reach)
    res["nonneg"] = float(max(-powers.Pj_hat,
                              -np.min(powers.Pk) if s.K else -np.inf))
    return res


# ---------------------------------------------------------------------------
# placement geometry


def _elevation_cones(s: Scenario) -> list:
    """One SOC per ground node: ||q - node|| <= H / tan(phi_min)."""
    t = 1.0 / math.tan(s.budget.phi_min)
    proj = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return [SocConstraint(proj, node, np.array([0.0, 0.0, t]), 0.0)
            for node in s.ground_nodes]


def _altitude_band(s: Scenario) -> list:
    return [AffineConstraint(np.array([0.0, 0.0, -1.0]), -s.H_min),
            AffineConstraint(np.array([0.0, 0.0, 1.0]), s.H_max)]


def _placement_constraints(s: Scenario, powers: PowerAllocation) -> list:
    """Feasible placements at fixed powers: cones, altitude band, UE-rate
    balls (radius sqrt(Pk/Xi) around each lifted UE), and the covertness
    ball around the lifted warden."""
    cons = _elevation_cones(s) + _altitude_band(s)
    xi = s.xi_coeff
    for pk, u in zip(powers.Pk, s.ues):
        cons.append(ball_constraint(_lift(u), math.sqrt(max(pk, 0.0) / xi)))
    if powers.Pa > 0.0:
        cap = (powers.Pj_hat * s.budget.beta0_chi * phi_inverse(s.eps, s.gamma)
               / (s.gamma.theta * s.sat.ell * powers.Pa))
        cons.append(ball_constraint(_lift(s.willie), math.sqrt(max(cap, 0.0))))
    return cons


def placement_subproblem(s: Scenario, powers: PowerAllocation, q0: UavPlacement,
                         sca_tol: float = 1e-6, sca_max: int = 30) -> UavPlacement:
    """Move the UAV as far from Bob as the current powers allow.

    Maximizes the convex objective ||x - bob_lifted||^2 over the SOC
    feasible set by successive linearization: each round maximizes the
    touching linear minorant (exact first-order expansion at the incumbent)
    with the log-barrier solver, which can only increase the true objective.
    Stops when the gain drops below ``sca_tol`` (m^2) or after ``sca_max``
    rounds.

    The incumbent typically sits exactly on the covertness and UE-rate ball
    boundaries right after a power step, so the start point is nudged to a
    max-slack interior point first; if the feasible set has no interior the
    placement cannot move and q0 is returned unchanged.
    """
    cons = _placement_constraints(s, powers)
    x0 = q0.lifted
    worst = min(con.margin(x0) for con in cons)
    if worst < -1e-8:
        bad = min(range(len(cons)), key=lambda i: cons[i].margin(x0))
        raise PlannerInfeasible("placement start", f"constraint {bad} margin {worst:.3e}")
    b_bar = _lift(s.bob)

    def true_obj(x):
        return float(np.sum((x - b_bar) ** 2))

    start_val = true_obj(x0)
    if worst <= 1e-7:
        x_int, slack = max_slack_point(cons, x0)
        if slack <= 1e-9:
            return q0  # boundary point with no interior: nothing can move
        x0 = x_int
    x = x0
    val = true_obj(x)
    for _ in range(sca_max):
        grad = 2.0 * (x - b_bar)
        grad /= np.linalg.norm(grad)  # unit objective: tolerances in meters
        y, _ = _barrier_maximize(LinearObjective(grad), cons, x, tol=1e-7)
        new_val = true_obj(y)
        improvement = new_val - val
        if new_val > val:
            x, val = y, new_val
        if improvement < sca_tol:
            break
    if val <= start_val:
        return q0
    return UavPlacement(q=x[:2], H=float(x[2]))


# ---------------------------------------------------------------------------
# power subproblem (linear-fractional -> LP via Charnes-Cooper)


def power_subproblem(s: Scenario, pl: UavPlacement) -> PowerAllocation:
    """Optimal powers at a fixed placement.

    Bob's SINR is linear-fractional in (Pa, Pj_hat): numerator Pa times
    constants, denominator varpi*g_ub*Pj_hat + sigma_b2. Substituting
    scaled variables P~ = t*P with the denominator normalized to one turns
    the problem into an LP over [Pk~..., Pj~, Pa~, t]:

        max Pa~   s.t.  Pa~ <= ups * Pj~                (covertness cap)
                        xi*d_k^2 * t <= Pk~             (UE rate floors)
                        sum Pk~ + Pj~ <= P_tot * t      (UAV budget)
                        Pa~ <= Pa_max * t               (satellite cap)
                        varpi*g_ub*Pj~ + sigma_b2*t = 1 (normalization)
                        t >= 1e-12, all variables >= 0

    where ups = Phi_inverse(eps)*g_uw/(theta*ell_aw). The physical powers
    are recovered as P = P~/t. Coefficients span many orders of magnitude
    (noise floors ~1e-14 W against unit ratios), which the LP solver's
    equilibration absorbs. Raises PlannerInfeasible when the UE rate floors
    exceed the budget at this placement.
    """
    k = s.K
    g_ub = uav_gain(pl, s.bob, s.budget.beta0_chi)
    g_uw = uav_gain(pl, s.willie, s.budget.beta0_chi)
    ups = phi_inverse(s.eps, s.gamma) * g_uw / (s.gamma.theta * s.sat.ell)
    d2 = np.array([float(np.sum((pl.q - u) ** 2)) + pl.H ** 2 for u in s.ues])
    floors = s.xi_coeff * d2

    n = k + 3  # [Pk~ (k), Pj~, Pa~, t]
    jj, aa, tt = k, k + 1, k + 2
    rows, rhs = [], []

    covert_row = np.zeros(n)
    covert_row[aa] = 1.0
    covert_row[jj] = -ups
    rows.append(covert_row)
    rhs.append(0.0)
    for i in range(k):
        r = np.zeros(n)
        r[tt] = floors[i]
        r[i] = -1.0
        rows.append(r)
        rhs.append(0.0)
    budget_row = np.zeros(n)
    budget_row[:k] = 1.0
    budget_row[jj] = 1.0
    budget_row[tt] = -s.P_tot
    rows.append(budget_row)
    rhs.append(0.0)
    cap_row = np.zeros(n)
    cap_row[aa] = 1.0
    cap_row[tt] = -s.Pa_max
    rows.append(cap_row)
    rhs.append(0.0)

    norm_row = np.zeros(n)
    norm_row[jj] = s.varpi * g_ub
    norm_row[tt] = s.sigma_b2
    lb = np.zeros(n)
    lb[tt] = 1e-12

    c = np.zeros(n)
    c[aa] = 1.0
    lp = LinearProgram(c=c, A_ub=np.array(rows), b_ub=np.array(rhs),
                       A_eq=norm_row[None, :], b_eq=np.array([1.0]), lb=lb)
    res = solve_lp(lp)
    if res.status == "infeasible":
        raise PlannerInfeasible(
            "ue-rate power floors",
            f"need {floors.sum():.6g} W of {s.P_tot:.6g} W at this placement")
    if res.status != "optimal":
        raise PlannerInfeasible("power subproblem", f"LP ended {res.status}")
    t = res.x[tt]
    return PowerAllocation(Pk=res.x[:k] / t, Pj_hat=res.x[jj] / t, Pa=res.x[aa] / t)


# ---------------------------------------------------------------------------
# block coordinate descent


def _initial_placement(s: Scenario) -> UavPlacement:
    """Centroid of all ground nodes at the lowest altitude clearing the cones."""
    nodes = s.ground_nodes
    centroid = nodes.mean(axis=0)
    maxdist = float(np.max(np.linalg.norm(nodes - centroid[None, :], axis=1)))
    h_need = math.tan(s.budget.phi_min) * maxdist
    h0 = max(s.H_min, h_need)
    if h0 <= s.H_max:
        return UavPlacement(q=centroid, H=h0)
    # centroid cannot clear the cones below H_max: find any interior placement
    cons = _elevation_cones(s) + _altitude_band(s)
    anchor = np.array([centroid[0], centroid[1], 0.5 * (s.H_min + s.H_max)])
    x, slack = max_slack_point(cons, anchor)
    if slack <= 0.0:
        raise PlannerInfeasible(
            "elevation cones", "no altitude in range sees every ground node")
    return UavPlacement(q=x[:2], H=float(x[2]))


def _initial_powers(s: Scenario, pl: UavPlacement) -> PowerAllocation:
    """UE floors at the placement, all residual power to jamming, Pa at its cap."""
    d2 = np.array([float(np.sum((pl.q - u) ** 2)) + pl.H ** 2 for u in s.ues])
    pk = s.xi_coeff * d2
    pj = s.P_tot - pk.sum()
    if pj < 0.0:
        raise PlannerInfeasible(
            "ue-rate power floors",
            f"need {pk.sum():.6g} W of {s.P_tot:.6g} W at the initial placement")
    g_uw = uav_gain(pl, s.willie, s.budget.beta0_chi)
    ups = phi_inverse(s.eps, s.gamma) * g_uw / (s.gamma.theta * s.sat.ell)
    pa = min(pj * ups, s.Pa_max)
    return PowerAllocation(Pk=pk, Pj_hat=pj, Pa=pa)


def bcd_optimize(s: Scenario, init: PowerAllocation | None = None,
                 sca_tol: float = 1e-6, sca_max: int = 30,
                 single_sca_iterate: bool = False) -> Solution:
    """Alternate placement and power steps until Bob's rate settles.

    Starts at the ground-node centroid with UE powers at their rate floors,
    the residual as jamming, and Pa at its covertness cap (or from ``init``
    when given). Each outer iteration runs the placement step (kept only
    when it does not reduce Bob's rate at the current powers, which makes
    the rate trace nondecreasing by construction) and then the exact power
    LP. Stops when the rate changes by less than ``s.delta`` or after
    ``s.i_max`` iterations.
    """
    try:
        pl = _initial_placement(s)
        powers = _initial_powers(s, pl) if init is None else init
    except PlannerInfeasible as e:
        return Solution(None, None, math.nan, [], "infeasible", str(e))
    if init is not None:
        res = constraint_residuals(s, pl, powers)
        worst = max(res, key=res.get)
        if res[worst] > 1e-8:
            return Solution(None, None, math.nan, [], "infeasible",
                            f"initial powers violate {worst} by {res[worst]:.3e}")

    rb = bob_rate(s, pl, powers)
    trace = [rb]
    status = "iteration-capped"
    eff_sca_max = 1 if single_sca_iterate else sca_max
    for _ in range(s.i_max):
        try:
            pl_new = placement_subproblem(s, powers, pl, sca_tol, eff_sca_max)
        except PlannerInfeasible as e:
            return Solution(None, None, math.nan, trace, "infeasible", str(e))
        if bob_rate(s, pl_new, powers) > bob_rate(s, pl, powers):
            pl = pl_new
        try:
            powers = power_subproblem(s, pl)
        except PlannerInfeasible as e:
            return Solution(None, None, math.nan, trace, "infeasible", str(e))
        rb_new = bob_rate(s, pl, powers)
        trace.append(rb_new)
        if abs(rb_new - rb) < s.delta:
            rb = rb_new
            status = "converged"
            break
        rb = rb_new
    return Solution(pl, powers, rb, trace, status)


# ---------------------------------------------------------------------------
# perfect cancellation (varpi = 0): Dinkelbach over the placement


def perfect_cancellation_optimize(s: Scenario) -> Solution:
    """Exact planner for varpi = 0.

    With the jamming fully cancelled at Bob, the rate grows with Pa alone,
    and the binding structure is known: every UE gets exactly its rate
    floor, all remaining UAV power jams, and Pa sits at its covertness cap.
    The cap as a function of the lifted placement x is the ratio

        f(x)/g(x) = (P_tot - xi * sum_k ||x-u_k||^2) * Phi_inv * beta0_chi
                    / (theta * ell_aw * ||x - w||^2),

    concave over convex positive, maximized by Dinkelbach iteration over
    the cones, the altitude band, and the ball where the numerator stays
    nonnegative. Powers then follow in closed form and Pa is clamped at
    Pa_max.
    """
    if s.varpi != 0.0:
        raise ValueError("perfect_cancellation_optimize requires varpi = 0")
    phi_inv = phi_inverse(s.eps, s.gamma)
    xi = s.xi_coeff
    cons = _elevation_cones(s) + _altitude_band(s)
    centers = (np.vstack([_lift(u) for u in s.ues])
               if s.K else np.zeros((0, 3)))
    if s.K:
        centroid = centers.mean(axis=0)
        spread = float(np.sum((centers - centroid[None, :]) ** 2))
        r2 = (s.P_tot / xi - spread) / s.K
        if r2 <= 0.0:
            return Solution(None, None, math.nan, [], "infeasible",
                            "ue-rate power floors exceed the budget everywhere")
        cons.append(ball_constraint(centroid, math.sqrt(r2)))

    anchor = np.append(s.ground_nodes.mean(axis=0), 0.5 * (s.H_min + s.H_max))
    x0, slack = max_slack_point(cons, anchor)
    if slack <= 0.0:
        return Solution(None, None, math.nan, [], "infeasible",
                        "no placement satisfies cones, altitude, and power budget")

    # scale f and g so g(x0) = 1; the ratio (and lam) is unchanged but the
    # Dinkelbach residual f - lam*g then lives in watts, matching delta
    w_bar = _lift(s.willie)
    g_raw = s.gamma.theta * s.sat.ell
    scale = 1.0 / (g_raw * float(np.sum((x0 - w_bar) ** 2)))
    f_obj = QuadraticSum(weight=-xi * phi_inv * s.budget.beta0_chi * scale,
                         centers=centers,
                         const=s.P_tot * phi_inv * s.budget.beta0_chi * scale)
    g_obj = QuadraticSum(weight=g_raw * scale, centers=w_bar[None, :])
    res = dinkelbach(FractionalProgram(f_obj, g_obj, cons), x0,
                     delta=s.delta, i_max=s.i_max)

    pl = UavPlacement(q=res.x[:2], H=float(res.x[2]))
    d2 = np.array([float(np.sum((pl.q - u) ** 2)) + pl.H ** 2 for u in s.ues])
    pk = xi * d2
    pj = s.P_tot - pk.sum()
    pa = min(res.lam, s.Pa_max)
    powers = PowerAllocation(Pk=pk, Pj_hat=pj, Pa=pa)
    g_ab = s.sat.ell * s.sr.mean_power
    trace = [covert_rate(min(l, s.Pa_max), g_ab, 0.0, pj, 1.0, s.sigma_b2)
             for l in res.lam_trace]
    rb = bob_rate(s, pl, powers)
    return Solution(pl, powers, rb, trace,
                    "converged" if res.converged else "iteration-capped")


# ---------------------------------------------------------------------------
# Monte Carlo validation


@dataclass(frozen=True)
class ValidationReport:
    """Monte Carlo check of a solution's covertness and rate claims."""

    trials: int
    xi_mc: float
    xi_stderr: float
    rate_mc: float
    rate_stderr: float
    covert_pass: bool
    rb_deterministic: float

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "xi_mc": self.xi_mc,
            "xi_stderr": self.xi_stderr,
            "rate_mc": self.rate_mc,
            "rate_stderr": self.rate_stderr,
            "covert_pass": self.covert_pass,
            "rb_deterministic": self.rb_deterministic,
        }


def validate_solution(s: Scenario, sol: Solution, trials: int = 10_000,
                      rng: np.random.Generator | None = None) -> ValidationReport:
    """Monte Carlo validation of a feasible solution.

    Draws satellite fading realizations to estimate (a) the warden's
    fading-averaged minimum detection error under the solution's powers and
    placement, and (b) Bob's mean rate with the jamming power drawn uniform
    on [0, Pj_hat] per slot. The covertness verdict requires the estimate
    to clear 1 - eps minus two standard errors.
    """
    if sol.placement is None or sol.powers is None:
        raise ValueError("cannot validate an infeasible solution")
    if rng is None:
        rng = np.random.default_rng(0)
    pl, pw = sol.placement, sol.powers
    g_uw = uav_gain(pl, s.willie, s.budget.beta0_chi)
    g_ub = uav_gain(pl, s.bob, s.budget.beta0_chi)

    fade_w = sample_sr_power(s.sr, rng, trials)
    sig = pw.Pa * s.sat.ell * fade_w
    jam = pw.Pj_hat * g_uw
    if jam == 0.0:
        xi = np.where(sig > 0.0, 0.0, 1.0)
    else:
        xi = np.maximum(0.0, 1.0 - sig / jam)
    xi_mc = float(xi.mean())
    xi_se = float(xi.std(ddof=1) / math.sqrt(trials))

    fade_b = sample_sr_power(s.sr, rng, trials)
    pj = rng.uniform(0.0, pw.Pj_hat, trials)
    rate = np.log2(1.0 + pw.Pa * s.sat.ell * fade_b
                   / (s.varpi * pj * g_ub + s.sigma_b2))
    rate_mc = float(rate.mean())
    rate_se = float(rate.std(ddof=1) / math.sqrt(trials))

    return ValidationReport(
        trials=trials,
        xi_mc=xi_mc,
        xi_stderr=xi_se,
        rate_mc=rate_mc,
        rate_stderr=rate_se,
        covert_pass=bool(xi_mc >= 1.0 - s.eps - 2.0 * xi_se),
        rb_deterministic=sol.Rb,
    )
