"""Small dense convex solvers used by the placement/power planner.

Nothing here is large scale. The linear programs have at most K + 3
variables (UE powers, jamming power, transmit power, one scaling variable),
the smooth programs have 3 or 4 (UAV position, altitude, optional slack).
So the tools are deliberately simple and transparent:

- a two-phase dense simplex with Bland's rule and geometric-mean
  equilibration (the power subproblem mixes coefficients spanning 14 orders
  of magnitude, from noise floors in watts to dimensionless ratios);
- a log-barrier Newton method over second-order-cone and affine constraints,
  using the canonical SOC barrier -log((c.x+d)^2 - ||Ax-b||^2);
- a Dinkelbach driver for concave/convex fractional objectives;
- scalar bisection for monotone root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SolverError",
    "InfeasibleStartError",
    "LineSearchError",
    "BracketError",
    "LinearProgram",
    "LpResult",
    "solve_lp",
    "AffineConstraint",
    "SocConstraint",
    "ball_constraint",
    "LinearObjective",
    "QuadraticSum",
    "SmoothConvexProgram",
    "solve_smooth_convex",
    "max_slack_point",
    "strictly_feasible",
    "FractionalProgram",
    "DinkelbachResult",
    "dinkelbach",
    "bisect",
]


class SolverError(RuntimeError):
    pass


class InfeasibleStartError(SolverError):
    pass


class LineSearchError(SolverError):
    pass


class BracketError(SolverError):
    pass


# ---------------------------------------------------------------------------
# scalar bisection


def bisect(fn, target: float, bracket, tol: float = 1e-10, max_iter: int = 300) -> float:
    """Solve fn(x) = target for monotone fn on the bracket.

    Returns x with |fn(x) - target| <= tol. Raises BracketError when the
    target is not enclosed by the bracket endpoints.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    flo, fhi = fn(lo), fn(hi)
    increasing = fhi >= flo
    fmin, fmax = (flo, fhi) if increasing else (fhi, flo)
    if not (fmin <= target <= fmax):
        raise BracketError(
            f"target {target} outside fn range [{fmin}, {fmax}] on bracket"
        )
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = fn(x)
        if abs(fx - target) <= tol:
            return x
        if (fx < target) == increasing:
            lo = x
        else:
            hi = x
        x = 0.5 * (lo + hi)
    raise BracketError(f"bisection did not reach tol={tol} in {max_iter} steps")


# ---------------------------------------------------------------------------
# linear programming: dense two-phase simplex, Bland's rule


@dataclass
class LinearProgram:
    """max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= lb."""

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = _norm_block(self.A_ub, self.b_ub, n, "ub")
        self.A_eq, self.b_eq = _norm_block(self.A_eq, self.b_eq, n, "eq")
        self.lb = (np.zeros(n) if self.lb is None
                   else np.asarray(self.lb, dtype=float).ravel())
        if self.lb.size != n:
            raise ValueError("lb size mismatch")


def _norm_block(A, b, n, name):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape != (b.size, n):
        raise ValueError(f"{name} block shape mismatch: {A.shape} vs rhs {b.size}, n={n}")
    return A, b


@dataclass
class LpResult:
    status: str                     # optimal | infeasible | unbounded | stalled
    x: np.ndarray | None = None
    objective: float | None = None
    duals_ub: np.ndarray | None = None
    duals_eq: np.ndarray | None = None
    farkas_ub: np.ndarray | None = None
    farkas_eq: np.ndarray | None = None
    iterations: int = 0
    message: str = ""


def _equilibrate(M: np.ndarray, passes: int = 6):
    """Geometric-mean row/column scaling, rounded to powers of two (exact)."""
    m, n = M.shape
    r = np.ones(m)
    s = np.ones(n)
    if m == 0 or n == 0:
        return r, s
    W = np.abs(M.copy())
    for _ in range(passes):
        for axis, scale in ((1, r), (0, s)):
            mx = W.max(axis=axis)
            mn = np.where(mx > 0, np.min(np.where(W > 0, W, np.inf), axis=axis), 1.0)
            f = np.where(mx > 0, 1.0 / np.sqrt(mx * np.where(np.isfinite(mn), mn, mx)), 1.0)
            f = np.exp2(np.round(np.log2(f)))
            scale *= f
            W = (W.T * f).T if axis == 1 else W * f
    return r, s


def _pivot_loop(T, basis, costs, allowed, tol, max_iter):
    """Bland-rule pivoting on tableau T (rows = constraints, last row =
    reduced costs with rhs = -objective). Returns (status, iterations)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        obj_row = T[-1, :-1]
        enter = -1
        for j in range(obj_row.size):
            if allowed[j] and obj_row[j] < -tol:
                enter = j
                break
        if enter < 0:
            return "optimal", it
        col = T[:m, enter]
        best_ratio = np.inf
        leave = -1
        for i in range(m):
            if col[i] > tol:
                ratio = T[i, -1] / col[i]
                if ratio < best_ratio - 1e-15 or (
                    abs(ratio - best_ratio) <= 1e-15
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded", it
        piv = T[leave, enter]
        T[leave] /= piv
        for i in range(m + 1):
            if i != leave and T[i, enter] != 0.0:
                T[i] -= T[i, enter] * T[leave]
        basis[leave] = enter
    return "stalled", max_iter


def _set_cost_row(T, basis, costs):
    T[-1, :] = 0.0
    T[-1, : costs.size] = costs
    for i, bi in enumerate(basis):
        if costs[bi] != 0.0:
            T[-1] -= costs[bi] * T[i]


def solve_lp(lp: LinearProgram, tol: float = 1e-9, max_iter: int = 50_000) -> LpResult:
    """Two-phase dense simplex for the (maximization) program in ``lp``.

    Variables are shifted by their lower bounds, the constraint matrix is
    equilibrated, and both phases pivot with Bland's rule, so degenerate
    bases cannot cycle. On optimality the result carries dual vectors for
    the inequality and equality blocks; on infeasibility it carries a
    Farkas certificate (phase-1 duals).
    """
    n = lp.c.size
    # shift to z >= 0
    b_ub = lp.b_ub - lp.A_ub @ lp.lb
    b_eq = lp.b_eq - lp.A_eq @ lp.lb
    m_ub, m_eq = b_ub.size, b_eq.size
    m = m_ub + m_eq

    A = np.vstack([lp.A_ub, lp.A_eq]) if m else np.zeros((0, n))
    b = np.concatenate([b_ub, b_eq])
    r_sc, s_sc = _equilibrate(A) if m else (np.zeros(0), np.ones(n))
    A = (A.T * r_sc).T * s_sc
    b = b * r_sc
    c_s = lp.c * s_sc

    # orient all rhs nonnegative; remember sign per row
    row_sign = np.where(b < 0.0, -1.0, 1.0)
    A = (A.T * row_sign).T
    b = b * row_sign

    # columns: n originals | m_ub slacks | artificials for rows lacking an
    # identity column (negated ub rows and all eq rows)
    slack_cols = {}
    art_rows = []
    for i in range(m_ub):
        slack_cols[i] = n + i
    for i in range(m):
        is_ub = i < m_ub
        keeps_slack = is_ub and row_sign[i] > 0
        if not keeps_slack:
            art_rows.append(i)
    n_slack = m_ub
    n_art = len(art_rows)
    width = n + n_slack + n_art + 1

    T = np.zeros((m + 1, width))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    art_col_of_row = {}
    for i in range(m_ub):
        T[i, n + i] = row_sign[i]  # slack coefficient carries the row sign
    k = 0
    for i in range(m):
        if i < m_ub and row_sign[i] > 0:
            basis[i] = n + i
        else:
            col = n + n_slack + k
            T[i, col] = 1.0
            basis[i] = col
            art_col_of_row[i] = col
            k += 1

    allowed = np.ones(width - 1, dtype=bool)

    # phase 1: minimize sum of artificials
    iters = 0
    if n_art:
        costs1 = np.zeros(width - 1)
        costs1[n + n_slack:] = 1.0
        _set_cost_row(T, basis, costs1)
        status, it1 = _pivot_loop(T, basis, costs1, allowed, tol, max_iter)
        iters += it1
        if status == "stalled":
            return LpResult(status="stalled", iterations=iters,
                            message="phase-1 iteration cap")
        p1_obj = -T[-1, -1]
        if p1_obj > tol * max(1.0, np.abs(b).max(initial=0.0)):
            # Farkas certificate from phase-1 duals: y_i = -reduced cost of
            # the row's initial identity column (cost 0 slack / cost 1 art).
            y = np.zeros(m)
            for i in range(m):
                if i in art_col_of_row:
                    y[i] = 1.0 - T[-1, art_col_of_row[i]]
                else:
                    y[i] = -T[-1, slack_cols[i]] / row_sign[i]
                y[i] *= row_sign[i]
            y *= r_sc  # unscale rows
            return LpResult(
                status="infeasible",
                farkas_ub=-y[:m_ub],
                farkas_eq=-y[m_ub:],
                iterations=iters,
                message=f"phase-1 optimum {p1_obj:.3e} > 0",
            )
        # drive artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= n + n_slack:
                piv_j = -1
                for j in range(n + n_slack):
                    if allowed[j] and abs(T[i, j]) > tol:
                        piv_j = j
                        break
                if piv_j >= 0:
                    piv = T[i, piv_j]
                    T[i] /= piv
                    for ii in range(m + 1):
                        if ii != i and T[ii, piv_j] != 0.0:
                            T[ii] -= T[ii, piv_j] * T[i]
                    basis[i] = piv_j
        allowed[n + n_slack:] = False  # artificials may never re-enter

    # phase 2: minimize -c.z
    costs2 = np.zeros(width - 1)
    costs2[:n] = -c_s
    _set_cost_row(T, basis, costs2)
    status, it2 = _pivot_loop(T, basis, costs2, allowed, tol, max_iter)
    iters += it2
    if status != "optimal":
        return LpResult(status=status, iterations=iters,
                        message=f"phase-2 ended {status}")

    z = np.zeros(width - 1)
    for i, bi in enumerate(basis):
        z[bi] = T[i, -1]
    x = lp.lb + z[:n] * s_sc
    objective = float(lp.c @ x)

    # duals off the initial identity columns (phase-2 costs: all zero there)
    y = np.zeros(m)
    for i in range(m):
        if i in art_col_of_row:
            y[i] = -T[-1, art_col_of_row[i]]
        else:
            y[i] = -T[-1, slack_cols[i]] / row_sign[i]
        y[i] *= row_sign[i]
    y *= r_sc
    return LpResult(
        status="optimal",
        x=x,
        objective=objective,
        duals_ub=-y[:m_ub],
        duals_eq=-y[m_ub:],
        iterations=iters,
    )


# ---------------------------------------------------------------------------
# smooth convex programs: SOC/affine constraints, log-barrier Newton


@dataclass
class AffineConstraint:
    """a.x <= b"""

    a: np.ndarray
    b: float

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).ravel()

    def value(self, x):
        return float(self.a @ x - self.b)

    def grad(self, x):
        return self.a

    def hess(self, x):
        return np.zeros((self.a.size, self.a.size))

    def interior(self, x):
        return self.value(x) < 0.0

    def margin(self, x):
        """Distance-to-violation in the constraint's own units."""
        return -self.value(x)

    def lifted(self):
        return AffineConstraint(np.append(self.a, 1.0), self.b)


@dataclass
class SocConstraint:
    """||A x - b|| <= c.x + d, handled in squared smooth form.

    value() returns ||Ax-b||^2 - (c.x+d)^2, whose zero-sublevel set
    intersected with {c.x + d > 0} is the second-order cone; the barrier
    -log(-value) is then the canonical (convex, self-concordant) SOC
    barrier even though value() itself is not convex.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.c = np.asarray(self.c, dtype=float).ravel()
        self._hess = 2.0 * (self.A.T @ self.A - np.outer(self.c, self.c))

    def _parts(self, x):
        return self.A @ x - self.b, float(self.c @ x + self.d)

    def value(self, x):
        r, t = self._parts(x)
        return float(r @ r - t * t)

    def grad(self, x):
        r, t = self._parts(x)
        return 2.0 * (self.A.T @ r) - 2.0 * t * self.c

    def hess(self, x):
        return self._hess

    def interior(self, x):
        r, t = self._parts(x)
        return t > 0.0 and float(r @ r) < t * t

    def margin(self, x):
        r, t = self._parts(x)
        return t - float(np.linalg.norm(r))

    def lifted(self):
        A = np.hstack([self.A, np.zeros((self.A.shape[0], 1))])
        return SocConstraint(A, self.b, np.append(self.c, -1.0), self.d)


def ball_constraint(center, radius: float) -> SocConstraint:
    """||x - center|| <= radius."""
    center = np.asarray(center, dtype=float).ravel()
    n = center.size
    return SocConstraint(np.eye(n), center, np.zeros(n), float(radius))


@dataclass
class LinearObjective:
    c: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()

    def value(self, x):
        return float(self.c @ x) + self.const

    def grad(self, x):
        return self.c

    def hess(self, x):
        return np.zeros((self.c.size, self.c.size))


@dataclass
class QuadraticSum:
    """const + weight * sum_k ||x - centers[k]||^2 (concave iff weight <= 0)."""

    weight: float
    centers: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))

    def value(self, x):
        diff = x[None, :] - self.centers
        return self.const + self.weight * float(np.sum(diff * diff))

    def grad(self, x):
        diff = x[None, :] - self.centers
        return 2.0 * self.weight * diff.sum(axis=0)

    def hess(self, x):
        n = self.centers.shape[1]
        return 2.0 * self.weight * self.centers.shape[0] * np.eye(n)


class _CombinedObjective:
    """f - lam * g for the Dinkelbach subproblems."""

    def __init__(self, f, g, lam):
        self.f, self.g, self.lam = f, g, lam

    def value(self, x):
        return self.f.value(x) - self.lam * self.g.value(x)

    def grad(self, x):
        return self.f.grad(x) - self.lam * self.g.grad(x)

    def hess(self, x):
        return self.f.hess(x) - self.lam * self.g.hess(x)


@dataclass
class SmoothConvexProgram:
    """max c.x over an intersection of SOC/affine constraints."""

    c: np.ndarray
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()


def strictly_feasible(constraints, x, margin: float = 0.0) -> bool:
    return all(con.margin(x) > margin for con in constraints)


def _barrier_maximize(objective, constraints, x0, tol=1e-8, t0=1.0,
                      t_factor=10.0, max_newton=200):
    """Maximize a smooth concave objective over constraints via log barrier.

    Outer loop raises the barrier weight until m/t < tol (duality-gap bound);
    inner loop is damped Newton with an Armijo backtracking line search that
    also enforces strict feasibility. Returns (x, info dict).
    """
    x = np.asarray(x0, dtype=float).copy()
    m = len(constraints)
    if not all(con.interior(x) for con in constraints):
        worst = min(con.margin(x) for con in constraints) if m else 0.0
        raise InfeasibleStartError(f"x0 not strictly feasible (worst margin {worst:.3e})")
    if m == 0:
        raise SolverError("unconstrained maximization is unbounded here")

    t = t0
    newton_steps = 0
    while True:
        # minimize phi(x) = -t*obj + sum -log(-g_i)
        for _ in range(max_newton):
            vals = np.array([con.value(x) for con in constraints])
            grad = -t * objective.grad(x)
            H = -t * objective.hess(x)
            for con, v in zip(constraints, vals):
                gci = con.grad(x)
                grad += gci / (-v)
                H += np.outer(gci, gci) / (v * v) + con.hess(x) / (-v)
            ridge = 0.0
            base = np.trace(H) / H.shape[0]
            while True:
                try:
                    np.linalg.cholesky(H + ridge * np.eye(H.shape[0]))
                    break
                except np.linalg.LinAlgError:
                    ridge = max(ridge * 10.0, 1e-12 * max(base, 1.0))
            step = np.linalg.solve(H + ridge * np.eye(H.shape[0]), -grad)
            decrement = float(-grad @ step)
            phi0 = -t * objective.value(x) - float(np.sum(np.log(-vals)))
            fuzz = 1e-11 * (1.0 + abs(phi0))
            if decrement <= 2.0 * fuzz:
                break
            slope = float(grad @ step)
            alpha = 1.0
            accepted = False
            for _ls in range(70):
                xn = x + alpha * step
                if all(con.interior(xn) for con in constraints):
                    phin = (-t * objective.value(xn)
                            - sum(math.log(-con.value(xn)) for con in constraints))
                    # the fuzz term absorbs cancellation noise in t*objective
                    # when the combined objective is itself a near-zero
                    # difference of large terms (Dinkelbach residuals)
                    if phin <= phi0 + 0.25 * alpha * slope + fuzz:
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                if decrement > 1e-2 * (1.0 + abs(phi0)):
                    raise LineSearchError(
                        f"no acceptable step with decrement {decrement:.3e}")
                break  # progress is below floating-point resolution at this t
            x = xn
            newton_steps += 1
        if m / t < tol:
            break
        t *= t_factor

    lam = np.array([1.0 / (t * (-con.value(x))) for con in constraints])
    stat = objective.grad(x) - sum(
        li * con.grad(x) for li, con in zip(lam, constraints)
    )
    info = {
        "t": t,
        "newton_steps": newton_steps,
        "duals": lam,
        "kkt_residual": float(np.linalg.norm(stat, np.inf)),
        "gap_bound": m / t,
    }
    return x, info


def solve_smooth_convex(p: SmoothConvexProgram, x0, tol: float = 1e-8):
    """Maximize the linear objective of ``p`` from a strictly feasible x0.

    Returns (x*, objective*). The barrier schedule guarantees the duality
    gap bound m/t < tol at exit; the KKT stationarity residual is available
    through the underlying routine and asserted in the test suite.
    """
    x, _ = _barrier_maximize(LinearObjective(p.c), p.constraints, x0, tol=tol)
    return x, float(p.c @ x)


def max_slack_point(constraints, anchor, tol: float = 1e-9, s_cap: float | None = None):
    """Chebyshev-style strictly feasible point: maximize the minimum slack.

    The slack variable is appended to the affine side of every constraint
    (||Ax-b|| <= c.x+d-s, a.x+s <= b), which keeps the lifted problem a
    plain SOC program; the anchor point with s below its worst margin is
    always strictly feasible, so no further phase is needed. Returns
    (x, s_star); s_star > 0 certifies a strictly feasible interior.
    """
    anchor = np.asarray(anchor, dtype=float)
    n = anchor.size
    lifted = [con.lifted() for con in constraints]
    margins = [con.margin(anchor) for con in constraints]
    s0 = min(margins) - 1.0
    cap = s_cap
    if cap is None:
        # bound s so the lifted program cannot be unbounded
        cap = max(abs(s0), max(abs(m) for m in margins), 1.0) * 10.0 + 1.0
    lifted.append(AffineConstraint(np.append(np.zeros(n), 1.0), cap))
    obj = np.append(np.zeros(n), 1.0)
    x0 = np.append(anchor, s0)
    xs, _ = _barrier_maximize(LinearObjective(obj), lifted, x0, tol=tol)
    return xs[:n], float(xs[n])


# ---------------------------------------------------------------------------
# fractional programming


@dataclass
class FractionalProgram:
    """max f(x)/g(x) with f concave, g convex and positive on the feasible set."""

    f: object
    g: object
    constraints: list


@dataclass
class DinkelbachResult:
    x: np.ndarray
    lam: float
    converged: bool
    iterations: int
    lam_trace: list


def dinkelbach(fp: FractionalProgram, x0, delta: float = 1e-6,
               i_max: int = 50, inner_tol: float = 1e-9) -> DinkelbachResult:
    """Dinkelbach iteration for ``fp`` starting from strictly feasible x0.

    lam starts at 0; each round maximizes f - lam*g over the constraints and
    stops once |f - lam_prev*g| < delta at the new point. The returned lam
    is f(x*)/g(x*). Non-convergence within i_max is flagged, not raised.
    """
    x = np.asarray(x0, dtype=float).copy()
    lam = 0.0
    trace = []
    for it in range(1, i_max + 1):
        obj = _CombinedObjective(fp.f, fp.g, lam)
        x, _ = _barrier_maximize(obj, fp.constraints, x, tol=inner_tol)
        fv, gv = fp.f.value(x), fp.g.value(x)
        if gv <= 0.0:
            raise SolverError(f"denominator nonpositive ({gv:.3e}) at iterate {it}")
        F = fv - lam * gv
        lam = fv / gv
        trace.append(lam)
        if abs(F) < delta:
            return DinkelbachResult(x=x, lam=lam, converged=True,
                                    iterations=it, lam_trace=trace)
    return DinkelbachResult(x=x, lam=lam, converged=False,
                            iterations=i_max, lam_trace=trace)
