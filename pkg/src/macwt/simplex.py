"""Dense-tableau simplex: phase 1 for feasibility, phase 2 for optimization.

Problems are maximizations

    max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper

with ``lower`` defaulting to 0 and ``upper`` to +inf.  Internally everything is
mapped to ``max c'.x'  s.t.  A' x' (<=|=) b',  x' >= 0`` by shifting finite
lower bounds, splitting free variables and turning finite upper bounds into rows.

Every returned status carries a certificate over the explicit system
``G x <= h`` produced by :meth:`LPProblem.inequality_system`:

* optimal: dual multipliers y >= 0 with G'y = c and h.y = optimum,
* infeasible: a Farkas vector y >= 0 with G'y = 0 and h.y < 0,
* unbounded: a ray d with G d <= 0 and c.d > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

ITERATION_CAP = 100_000


class LPIterationError(RuntimeError):
    """The pivot count exceeded the cap; no status is claimed."""


@dataclass
class LPProblem:
    objective: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        self.objective = c

        def rows(a, b, what):
            if a is None:
                if b is not None and len(b):
                    raise ValueError(f"{what}: right-hand side given without matrix")
                return np.zeros((0, n)), np.zeros(0)
            a = np.asarray(a, dtype=float).reshape(-1, n) if np.size(a) else np.zeros((0, n))
            b = np.asarray(b, dtype=float).ravel()
            if a.shape[0] != b.size:
                raise ValueError(f"{what}: {a.shape[0]} rows but {b.size} right-hand sides")
            if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
                raise ValueError(f"{what}: non-finite entries")
            return a, b

        self.A_ub, self.b_ub = rows(self.A_ub, self.b_ub, "inequalities")
        self.A_eq, self.b_eq = rows(self.A_eq, self.b_eq, "equalities")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)) \
                or np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds must be finite where declared")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @classmethod
    def from_inequalities(cls, objective, ineqs, lower=None, upper=None) -> "LPProblem":
        """Build from objects with ``coeffs`` and ``rhs`` (``coeffs . x <= rhs``)."""
        objective = np.asarray(objective, dtype=float)
        ineqs = list(ineqs)
        if ineqs:
            A = np.array([np.asarray(q.coeffs, dtype=float) for q in ineqs])
            b = np.array([float(q.rhs) for q in ineqs])
        else:
            A, b = None, None
        return cls(objective, A, b, lower=lower, upper=upper)

    def inequality_system(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints as ``G x <= h``: inequalities, equalities (both
        directions), finite upper bounds, finite lower bounds, in that order."""
        n = self.num_vars
        eye = np.eye(n)
        up = np.isfinite(self.upper)
        lo = np.isfinite(self.lower)
        G = np.vstack([self.A_ub, self.A_eq, -self.A_eq, eye[up], -eye[lo]])
        h = np.concatenate([self.b_ub, self.b_eq, -self.b_eq, self.upper[up], -self.lower[lo]])
        return G, h


@dataclass
class LPSolution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    # certificate over LPProblem.inequality_system()
    certificate: np.ndarray | None = None
    iterations: int = 0
    pivots: list[tuple[int, int]] = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


class _Tableau:
    """Rows ``T[:m]`` are constraints, ``T[m]`` holds reduced costs z_j - c_j."""

    def __init__(self, T, basis, n_real, barred):
        self.T = T
        self.basis = basis
        self.m = T.shape[0] - 1
        self.n_real = n_real
        self.barred = barred  # columns never allowed to enter
        self.iterations = 0
        self.pivots: list[tuple[int, int]] = []
        self.bland_after = 2 * (self.m + T.shape[1] - 1)

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, q] = 0.0
        T[r, q] = 1.0
        self.basis[r] = q
        self.pivots.append((r, q))

    def run(self):
        """Pivot until optimal; returns the unbounded column index or None."""
        T = self.T
        m = self.m
        tol = TOL.pivot
        while True:
            if self.iterations >= ITERATION_CAP:
                raise LPIterationError(f"simplex exceeded {ITERATION_CAP} pivots "
                                       f"({m} rows, {T.shape[1] - 1} columns)")
            cost = T[m, :-1].copy()
            cost[self.barred] = 0.0
            candidates = np.flatnonzero(cost < -tol)
            if candidates.size == 0:
                return None
            if self.iterations < self.bland_after:
                q = int(candidates[np.argmin(cost[candidates])])  # argmin keeps smallest index on ties
            else:
                q = int(candidates[0])
            col = T[:m, q]
            pos = np.flatnonzero(col > tol)
            if pos.size == 0:
                return q
            ratios = T[pos, -1] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, q)
            self.iterations += 1


def _standard_form(lp: LPProblem):
    """Map to max c'.x' s.t. A' x' (<= | =) b', x' >= 0.

    Returns (c', A_ub', b_ub', A_eq', b_eq', back) where ``back`` maps a
    standard-form vector x' to the original x, plus the column maps needed to
    translate certificates.
    """
    n = lp.num_vars
    lo, up = lp.lower, lp.upper
    shift = np.where(np.isfinite(lo), lo, 0.0)
    free = ~np.isfinite(lo)
    # columns: one per original var, plus one negative part per free var
    neg_of = {j: n + i for i, j in enumerate(np.flatnonzero(free))}
    n_std = n + len(neg_of)

    def expand(A):
        out = np.zeros((A.shape[0], n_std))
        out[:, :n] = A
        for j, jn in neg_of.items():
            out[:, jn] = -A[:, j]
        return out

    c = expand(lp.objective[None, :])[0]
    up_idx = np.flatnonzero(np.isfinite(up))
    U = np.zeros((up_idx.size, n))
    U[np.arange(up_idx.size), up_idx] = 1.0
    A_ub = expand(np.vstack([lp.A_ub, U]))
    b_ub = np.concatenate([lp.b_ub - lp.A_ub @ shift, up[up_idx] - shift[up_idx]])
    A_eq = expand(lp.A_eq)
    b_eq = lp.b_eq - lp.A_eq @ shift

    def back(xs):
        x = xs[:n] + shift
        for j, jn in neg_of.items():
            x[j] -= xs[jn]
        return x

    return c, A_ub, b_ub, A_eq, b_eq, back, neg_of, shift


def _build(A_ub, b_ub, A_eq, b_eq):
    m_ub, n = A_ub.shape
    m_eq = A_eq.shape[0]
    m = m_ub + m_eq
    flip_ub = b_ub < 0
    n_art = int(flip_ub.sum()) + m_eq
    width = n + m_ub + n_art + 1
    T = np.zeros((m + 1, width))
    basis = np.empty(m, dtype=int)
    sign = np.ones(m)
    art_row = []
    a = n + m_ub
    for i in range(m_ub):
        s = -1.0 if flip_ub[i] else 1.0
        T[i, :n] = s * A_ub[i]
        T[i, n + i] = s
        T[i, -1] = s * b_ub[i]
        sign[i] = s
        if flip_ub[i]:
            T[i, a] = 1.0
            basis[i] = a
            art_row.append(i)
            a += 1
        else:
            basis[i] = n + i
    art_of_eq = {}
    for k in range(m_eq):
        i = m_ub + k
        s = -1.0 if b_eq[k] < 0 else 1.0
        T[i, :n] = s * A_eq[k]
        T[i, -1] = s * b_eq[k]
        T[i, a] = 1.0
        sign[i] = s
        basis[i] = a
        art_row.append(i)
        art_of_eq[i] = a
        a += 1
    return T, basis, sign, art_row, art_of_eq, n + m_ub


def _lp_core(c, A_ub, b_ub, A_eq, b_eq):
    """Solve the standard-form problem.

    Returns (status, xs, value, y_rows, reduced_x, ray, tableau) where y_rows
    are multipliers on the standard-form rows (inequalities then equalities;
    equality multipliers may be negative).
    """
    n = c.size
    m_ub = A_ub.shape[0]
    T, basis, sign, art_row, art_of_eq, first_art = _build(A_ub, b_ub, A_eq, b_eq)
    m = T.shape[0] - 1
    art_cols = list(range(first_art, T.shape[1] - 1))
    tab = _Tableau(T, basis, n, barred=[])

    if art_row:
        # phase 1: max -sum(artificials)
        T[m, :] = -T[art_row].sum(axis=0)
        T[m, art_cols] = 0.0
        tab.run()
        if T[m, -1] < -TOL.feasibility:
            y = _row_multipliers(T, sign, m_ub, art_of_eq, n, art_cost=-1.0)
            return INFEASIBLE, None, None, y, None, None, tab
        _drive_out_artificials(tab, first_art)

    # phase 2
    tab.barred = art_cols
    T[m, :] = 0.0
    T[m, :n] = -c
    for i in range(m):
        j = tab.basis[i]
        if j < n and c[j] != 0.0:
            T[m] += c[j] * T[i]
    q = tab.run()
    if q is not None:
        ray = np.zeros(n)
        if q < n:
            ray[q] = 1.0
        for i in range(m):
            j = tab.basis[i]
            if j < n:
                ray[j] = -T[i, q]
        return UNBOUNDED, None, None, None, None, ray, tab
    xs = np.zeros(T.shape[1] - 1)
    xs[tab.basis] = T[:m, -1]
    xs = np.maximum(xs[:n], 0.0)
    y = _row_multipliers(T, sign, m_ub, art_of_eq, n, art_cost=0.0)
    return OPTIMAL, xs, float(c @ xs), y, T[m, :n].copy(), None, tab


def _row_multipliers(T, sign, m_ub, art_of_eq, n, art_cost):
    # the reduced cost of a slack equals the multiplier of its (unflipped) row;
    # for equalities the artificial column plays the slack's role
    m = T.shape[0] - 1
    y = np.zeros(m)
    y[:m_ub] = T[m, n:n + m_ub]
    for i, a in art_of_eq.items():
        y[i] = (T[m, a] + art_cost) * sign[i]
    return y


def _drive_out_artificials(tab: _Tableau, first_art: int):
    # an artificial still basic (at level 0) is swapped for any real column;
    # if its row has none, the row is a redundant equality and stays inert
    T = tab.T
    for i in range(tab.m):
        if tab.basis[i] < first_art:
            continue
        nz = np.flatnonzero(np.abs(T[i, :first_art]) > TOL.pivot)
        if nz.size:
            tab.pivot(i, int(nz[0]))


def solve(lp: LPProblem) -> LPSolution:
    """Maximize ``lp.objective`` and return a certified solution."""
    c, A_ub, b_ub, A_eq, b_eq, back, neg_of, shift = _standard_form(lp)
    status, xs, _, y, reduced, ray, tab = _lp_core(c, A_ub, b_ub, A_eq, b_eq)
    n = lp.num_vars
    m_ub = lp.A_ub.shape[0]
    m_eq = lp.A_eq.shape[0]
    n_up = int(np.isfinite(lp.upper).sum())
    lo_idx = np.flatnonzero(np.isfinite(lp.lower))

    def lift_rows(yr, lower_mult):
        y_ub = yr[:m_ub]
        y_up = yr[m_ub:m_ub + n_up]
        y_eq = yr[m_ub + n_up:m_ub + n_up + m_eq]
        return np.concatenate([y_ub, np.maximum(y_eq, 0), np.maximum(-y_eq, 0), y_up, lower_mult])

    if status == OPTIMAL:
        x = back(xs)
        cert = lift_rows(y, np.maximum(reduced[lo_idx], 0.0))
        return LPSolution(OPTIMAL, x, float(lp.objective @ x), cert, tab.iterations, tab.pivots)
    if status == INFEASIBLE:
        A_full = np.vstack([A_ub, A_eq])
        lower_mult = np.maximum((A_full.T @ y)[:n][lo_idx], 0.0)
        cert = lift_rows(y, lower_mult)
        return LPSolution(INFEASIBLE, None, None, cert, tab.iterations, tab.pivots)
    d = ray[:n].copy()
    for j, jn in neg_of.items():
        d[j] -= ray[jn]
    return LPSolution(UNBOUNDED, None, None, d, tab.iterations, tab.pivots)


def feasible_point(system, nonneg_vars=(), num_vars: int | None = None) -> LPSolution:
    """Phase 1 only: any point with ``coeffs . x <= rhs`` for every row.

    ``nonneg_vars`` lists indices constrained to be >= 0; all others are free.
    """
    system = list(system)
    if num_vars is None:
        if not system:
            raise ValueError("num_vars is required for an empty system")
        num_vars = len(system[0].coeffs)
    lower = np.full(num_vars, -np.inf)
    for j in nonneg_vars:
        lower[j] = 0.0
    lp = LPProblem.from_inequalities(np.zeros(num_vars), system, lower=lower)
    return solve(lp)


# --- certificate checks -------------------------------------------------------

def check_certificate(lp: LPProblem, sol: LPSolution, tol: float = 1e-7) -> bool:
    """Independent verification of the status claimed by ``sol``."""
    G, h = lp.inequality_system()
    c = lp.objective
    scale = 1.0 + np.abs(h).max(initial=0.0) + np.abs(c).max(initial=0.0)
    if sol.status == OPTIMAL:
        y = sol.certificate
        x = sol.x
        return bool(np.all(G @ x <= h + TOL.feasibility * scale)
                    and np.all(y >= -tol)
                    and np.allclose(G.T @ y, c, atol=tol * scale)
                    and abs(h @ y - c @ x) <= tol * scale)
    if sol.status == INFEASIBLE:
        y = sol.certificate
        return bool(np.all(y >= -tol)
                    and np.allclose(G.T @ y, 0.0, atol=tol * scale * (1 + np.abs(y).sum()))
                    and h @ y < -tol * (1 + np.abs(y).sum()))
    d = sol.certificate
    return bool(np.all(G @ d <= tol * scale) and c @ d > tol)
