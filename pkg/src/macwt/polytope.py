"""H-representation polytopes with integer coefficients and real right-hand sides.

A :class:`Polytope` is the set ``{x : A x <= b}`` over a named variable order.
``A`` is kept as an int64 matrix so that Fourier-Motzkin combinations never
drift; only ``b`` is floating point.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .config import TOL


class UnboundedPolytopeError(ValueError):
    pass


class EliminationLimitError(RuntimeError):
    pass


DEFAULT_REDUCE_THRESHOLD = 512
DEFAULT_HARD_CAP = 10**6


@dataclass(frozen=True)
class LinearInequality:
    """``sum(coeffs[i] * var_i) <= rhs``."""
    coeffs: tuple[int, ...]
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", float(self.rhs))

    def is_trivial(self) -> bool:
        return not any(self.coeffs)


class Polytope:
    def __init__(self, vars, A=None, b=None):
        self.vars = tuple(vars)
        n = len(self.vars)
        if len(set(self.vars)) != n:
            raise ValueError("variable names must be distinct")
        if A is None:
            A = np.zeros((0, n), dtype=np.int64)
            b = np.zeros(0)
        A = np.asarray(A)
        if A.size and not np.all(A == np.round(A)):
            raise ValueError("coefficients must be integers")
        rows = A.shape[0] if A.ndim == 2 else (0 if A.size == 0 else -1)
        self.A = A.astype(np.int64).reshape(rows, n)
        self.b = np.asarray(b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise ValueError("one right-hand side per inequality required")
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @classmethod
    def from_inequalities(cls, vars, ineqs) -> "Polytope":
        ineqs = list(ineqs)
        n = len(tuple(vars))
        for q in ineqs:
            if len(q.coeffs) != n:
                raise ValueError(f"inequality has {len(q.coeffs)} coefficients, expected {n}")
        A = np.array([q.coeffs for q in ineqs], dtype=np.int64).reshape(-1, n)
        return cls(vars, A, [q.rhs for q in ineqs])

    @property
    def ineqs(self) -> list[LinearInequality]:
        return [LinearInequality(tuple(row), rhs) for row, rhs in zip(self.A.tolist(), self.b)]

    @property
    def dim(self) -> int:
        return len(self.vars)

    def __len__(self):
        return self.A.shape[0]

    def __repr__(self):
        return f"Polytope(vars={self.vars!r}, {len(self)} inequalities)"

    def index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise KeyError(f"unknown variable {var!r}") from None

    def add(self, A, b) -> "Polytope":
        A = np.asarray(A, dtype=np.int64).reshape(-1, self.dim)
        return Polytope(self.vars, np.vstack([self.A, A]), np.concatenate([self.b, np.ravel(b)]))

    def with_box(self, lower, upper) -> "Polytope":
        """Add ``lower <= x_j <= upper`` for every variable (scalars broadcast)."""
        n = self.dim
        lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
        up = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
        eye = np.eye(n, dtype=np.int64)
        return self.add(np.vstack([eye, -eye]), np.concatenate([up, -lo]))

    def substitute(self, values: dict[str, float]) -> "Polytope":
        """Fix some variables and drop them from the variable order."""
        idx = [self.index(v) for v in values]
        keep = [j for j in range(self.dim) if j not in idx]
        fixed = np.array([float(values[v]) for v in values])
        b = self.b - (self.A[:, idx] @ fixed if idx else 0.0)
        return Polytope([self.vars[j] for j in keep], self.A[:, keep], b)

    def reorder(self, vars) -> "Polytope":
        vars = tuple(vars)
        if sorted(vars) != sorted(self.vars):
            raise ValueError("reorder needs a permutation of the variables")
        return Polytope(vars, self.A[:, [self.index(v) for v in vars]], self.b)

    # --- JSON ---------------------------------------------------------------
    def to_dict(self) -> dict:
        return {"vars": list(self.vars),
                "ineqs": [{"coeffs": row, "rhs": float(r)} for row, r in zip(self.A.tolist(), self.b)]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Polytope":
        try:
            vars = doc["vars"]
            rows = doc["ineqs"]
            A = [q["coeffs"] for q in rows]
            b = [q["rhs"] for q in rows]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polytope document: {exc}") from None
        for row in A:
            if any(isinstance(c, bool) or not isinstance(c, int) for c in row):
                raise ValueError("polytope coefficients must be integers")
        return cls(vars, np.array(A, dtype=np.int64).reshape(-1, len(vars)), b)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Vertex:
    point: np.ndarray
    active: tuple[int, ...]


def _row_gcd(A: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(A), axis=1) if A.shape[1] else np.zeros(A.shape[0], dtype=np.int64)
    return np.where(g == 0, 1, g)


def normalize(p: Polytope) -> Polytope:
    """Divide rows by the gcd of their coefficients, drop tautologies ``0 <= r``
    (r >= 0), merge rows with identical coefficients keeping the smallest rhs.

    A contradictory zero row is kept as the single marker ``0 <= -1``.
    """
    A, b = p.A, p.b
    g = _row_gcd(A)
    A = A // g[:, None]
    b = b / g
    zero = ~A.any(axis=1)
    if np.any(zero & (b < -TOL.feasibility)):
        return Polytope(p.vars, np.zeros((1, p.dim), dtype=np.int64), [-1.0])
    order: list[bytes] = []
    rows: dict[bytes, tuple[np.ndarray, float]] = {}
    for i in np.flatnonzero(~zero):
        key = A[i].tobytes()
        if key in rows:
            if b[i] < rows[key][1]:
                rows[key] = (A[i], b[i])
        else:
            rows[key] = (A[i], b[i])
            order.append(key)
    if not order:
        return Polytope(p.vars)
    return Polytope(p.vars, np.array([rows[k][0] for k in order]), [rows[k][1] for k in order])


@dataclass(frozen=True)
class EliminationStep:
    var: str
    upper: int
    lower: int
    pairs: int
    total: int


def fm_step(p: Polytope, var: str) -> tuple[Polytope, EliminationStep]:
    """One Fourier-Motzkin step; rows free of ``var`` come first, then the
    pairings (upper i, lower j) in input order."""
    j = p.index(var)
    col = p.A[:, j]
    up = np.flatnonzero(col > 0)
    lo = np.flatnonzero(col < 0)
    zero = np.flatnonzero(col == 0)
    keep = [k for k in range(p.dim) if k != j]
    if up.size and lo.size:
        ai = col[up][:, None, None]            # > 0
        aj = -col[lo][None, :, None]           # > 0
        rows = aj * p.A[up][:, None, :] + ai * p.A[lo][None, :, :]
        rhs = aj[..., 0] * p.b[up][:, None] + ai[..., 0] * p.b[lo][None, :]
        rows = rows.reshape(-1, p.dim)
        rhs = rhs.reshape(-1)
        g = _row_gcd(rows)
        rows = rows // g[:, None]
        rhs = rhs / g
    else:
        rows = np.zeros((0, p.dim), dtype=np.int64)
        rhs = np.zeros(0)
    A = np.vstack([p.A[zero], rows])[:, keep]
    b = np.concatenate([p.b[zero], rhs])
    step = EliminationStep(var, int(up.size), int(lo.size), int(up.size * lo.size), int(A.shape[0]))
    return Polytope([p.vars[k] for k in keep], A, b), step


def fm_eliminate(p: Polytope, var: str) -> Polytope:
    """Project out ``var``; no redundancy removal."""
    return fm_step(p, var)[0]


def fm_eliminate_all(p: Polytope, vars, threshold: int = DEFAULT_REDUCE_THRESHOLD,
                     hard_cap: int = DEFAULT_HARD_CAP, trace: list | None = None) -> Polytope:
    """Eliminate ``vars`` in order, pruning redundancy whenever an intermediate
    system grows beyond ``threshold`` rows."""
    for var in vars:
        col = p.A[:, p.index(var)]
        projected = int((col == 0).sum()) + int((col > 0).sum()) * int((col < 0).sum())
        if projected > hard_cap:
            raise EliminationLimitError(
                f"eliminating {var} would produce {projected} inequalities (cap {hard_cap})")
        p, step = fm_step(p, var)
        if trace is not None:
            trace.append(step)
        if len(p) > threshold:
            p = remove_redundant(p)
    return p


# --- LP helpers ---------------------------------------------------------------

def _lp(p: Polytope, objective) -> simplex.LPSolution:
    lp = simplex.LPProblem(np.asarray(objective, dtype=float), p.A, p.b,
                           lower=np.full(p.dim, -np.inf))
    return simplex.solve(lp)


def maximize(p: Polytope, objective) -> simplex.LPSolution:
    """Maximize ``objective . x`` over ``p`` (all variables free)."""
    return _lp(p, objective)


def is_empty(p: Polytope) -> bool:
    if len(p) == 0:
        return False
    if np.any(~p.A.any(axis=1) & (p.b < -TOL.feasibility)):
        return True
    return _lp(p, np.zeros(p.dim)).status == simplex.INFEASIBLE


def _implied_bound(A: np.ndarray, b: np.ndarray, target: np.ndarray) -> float:
    """max target.x s.t. A x <= b, through the dual ``min b.y, A'y = target, y >= 0``.

    Returns +inf when the dual is infeasible (the maximum is unbounded, given a
    non-empty primal).
    """
    m = A.shape[0]
    if m == 0:
        return 0.0 if not target.any() else math.inf
    lp = simplex.LPProblem(-b, A_eq=A.T.astype(float), b_eq=target.astype(float))
    sol = simplex.solve(lp)
    if sol.status != simplex.OPTIMAL:
        return math.inf
    return -sol.objective


def remove_redundant(p: Polytope) -> Polytope:
    """Drop every inequality implied by the remaining ones (LP certified).

    Rows are tested in input order against the rows still kept; the survivors
    keep their relative order.  An empty polytope collapses to ``0 <= -1``.
    """
    p = normalize(p)
    if len(p) == 0 or (len(p) == 1 and not p.A.any()):
        return p
    if is_empty(p):
        return Polytope(p.vars, np.zeros((1, p.dim), dtype=np.int64), [-1.0])
    keep = np.ones(len(p), dtype=bool)
    for i in range(len(p)):
        keep[i] = False
        bound = _implied_bound(p.A[keep], p.b[keep], p.A[i])
        if bound > p.b[i] + TOL.redundancy:
            keep[i] = True
    return Polytope(p.vars, p.A[keep], p.b[keep])


# --- membership -----------------------------------------------------------------

def contains(p: Polytope, point, tol: float | None = None) -> bool:
    x = np.asarray(point, dtype=float).ravel()
    if x.size != p.dim:
        raise ValueError(f"point has {x.size} coordinates, polytope has {p.dim} variables")
    tol = TOL.feasibility if tol is None else tol
    return bool(np.all(p.A @ x <= p.b + tol))


def _containing_batch(p: Polytope, X: np.ndarray, tol: float) -> np.ndarray:
    if len(p) == 0:
        return np.ones(X.shape[0], dtype=bool)
    return np.all(X @ p.A.T <= p.b + tol, axis=1)


# --- vertices -------------------------------------------------------------------

def _bounds(p: Polytope) -> tuple[np.ndarray, np.ndarray]:
    lo = np.empty(p.dim)
    hi = np.empty(p.dim)
    for j in range(p.dim):
        e = np.zeros(p.dim)
        e[j] = 1.0
        for sign, out in ((1.0, hi), (-1.0, lo)):
            sol = _lp(p, sign * e)
            if sol.status == simplex.UNBOUNDED:
                raise UnboundedPolytopeError(
                    f"polytope is unbounded along {'+' if sign > 0 else '-'}{p.vars[j]}")
            out[j] = sign * sol.objective
    return lo, hi


_CHUNK = 50_000


def _basis_points(A: np.ndarray, b: np.ndarray, d: int, tol: float) -> np.ndarray:
    m = A.shape[0]
    found = []
    combos = itertools.combinations(range(m), d)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)),
                            dtype=np.int64)
        if chunk.size == 0:
            break
        idx = chunk.reshape(-1, d)
        M = A[idx].astype(float)
        det = np.linalg.det(M)
        ok = np.abs(det) > 0.5  # integer matrices: nonsingular iff |det| >= 1
        if not ok.any():
            continue
        X = np.linalg.solve(M[ok], b[idx[ok]][..., None])[..., 0]
        feas = np.all(X @ A.T <= b + tol, axis=1)
        if feas.any():
            found.append(X[feas])
    if not found:
        return np.zeros((0, d))
    return np.vstack(found)


def _dedupe(X: np.ndarray, tol: float) -> np.ndarray:
    """Merge points closer than ``tol`` (max-norm); result sorted lexicographically."""
    if X.shape[0] == 0:
        return X
    # grid keys only collapse exact repeats cheaply; the tolerance pass does the rest
    _, first = np.unique(np.round(X / (tol / 10)), axis=0, return_index=True)
    X = X[np.sort(first)]
    keep: list[np.ndarray] = []
    for x in X:
        if not keep or np.abs(np.array(keep) - x).max(axis=1).min() > tol:
            keep.append(x)
    out = np.array(keep)
    # sort on rounded keys so float noise cannot reorder equal coordinates
    key = np.round(out, 9) + 0.0
    return out[np.lexsort(key.T[::-1])]


def _initial_rows(G: np.ndarray) -> list[int]:
    chosen: list[int] = []
    basis = np.zeros((0, G.shape[1]))
    for i in range(G.shape[0]):
        trial = np.vstack([basis, G[i]])
        if np.linalg.matrix_rank(trial, tol=1e-9) > basis.shape[0]:
            chosen.append(i)
            basis = trial
            if len(chosen) == G.shape[1]:
                break
    return chosen


def _dd_points(A: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """Double description on the cone {(x, t): A x - b t <= 0, t >= 0};
    vertices are the extreme rays with t > 0, rescaled to t = 1."""
    m, d = A.shape
    G = np.hstack([A.astype(float), -b[:, None]])
    G = np.vstack([G, np.eye(d + 1)[-1:] * -1.0])
    start = _initial_rows(G)
    if len(start) < d + 1:
        raise UnboundedPolytopeError("constraint matrix is rank deficient (unbounded directions)")
    # rays of the simplicial start cone: columns of -inv(G_B)
    R = -np.linalg.inv(G[start]).T
    R /= np.abs(R).max(axis=1, keepdims=True)
    order = start + [i for i in range(G.shape[0]) if i not in start]
    # zero sets as a boolean matrix over the processed constraints
    Z = np.zeros((d + 1, G.shape[0]), dtype=bool)
    for r in range(d + 1):
        Z[r, start] = True
        Z[r, start[r]] = False
    for i in order[d + 1:]:
        v = R @ G[i]
        pos = np.flatnonzero(v > tol)
        neg = np.flatnonzero(v < -tol)
        zer = np.flatnonzero(np.abs(v) <= tol)
        Z[zer, i] = True
        if pos.size == 0:
            continue
        new_R, new_Z = [], []
        if neg.size:
            common = Z[pos][:, None, :] & Z[neg][None, :, :]
            cand = np.argwhere(common.sum(axis=2) >= d - 1)
            if cand.size:
                C = common[cand[:, 0], cand[:, 1]]
                # adjacent iff only p and n have zero sets containing the common one
                missing = C.astype(np.int32) @ (~Z).T.astype(np.int32)
                adjacent = (missing == 0).sum(axis=1) == 2
                for (a, c), Zc in zip(cand[adjacent], C[adjacent]):
                    p_, n_ = pos[a], neg[c]
                    r = v[p_] * R[n_] - v[n_] * R[p_]
                    r /= np.abs(r).max()
                    zc = Zc.copy()
                    zc[i] = True
                    new_R.append(r)
                    new_Z.append(zc)
        keep = np.setdiff1d(np.arange(R.shape[0]), pos)
        R = np.vstack([R[keep]] + ([np.array(new_R)] if new_R else []))
        Z = np.vstack([Z[keep]] + ([np.array(new_Z)] if new_Z else []))
        if R.shape[0] == 0:
            return np.zeros((0, d))
    t = R[:, d]
    if np.any(np.abs(t) <= tol):
        raise UnboundedPolytopeError("polytope has a recession direction")
    return R[:, :d] / t[:, None]


def vertices(p: Polytope, method: str = "dd") -> list[Vertex]:
    """All vertices of a bounded polytope, sorted lexicographically.

    ``method`` is ``"dd"`` (double description, default) or ``"basis"``
    (every d-subset of constraints solved and filtered; slow, used as oracle).
    Raises :class:`UnboundedPolytopeError` if some coordinate is unbounded.
    """
    if is_empty(p):
        return []
    if p.dim == 0:
        return [Vertex(np.zeros(0), tuple(range(len(p))))]
    lo, hi = _bounds(p)
    # coordinates pinned by the constraints are substituted before enumeration
    fixed = np.abs(hi - lo) <= TOL.vertex * 1e-2
    free = np.flatnonzero(~fixed)
    pinned = np.where(fixed, (hi + lo) / 2, 0.0)
    vtol = TOL.vertex
    if free.size == 0:
        X = pinned[None, :]
    else:
        A = p.A[:, free]
        b = p.b - p.A[:, fixed] @ pinned[fixed]
        nz = A.any(axis=1)
        sub = normalize(Polytope([p.vars[j] for j in free], A[nz], b[nz]))
        if method == "basis":
            if math.comb(len(sub), free.size) > 5000:
                sub = remove_redundant(sub)
            Y = _basis_points(sub.A, sub.b, free.size, TOL.feasibility * 10)
        elif method == "dd":
            Y = _dd_points(sub.A, sub.b, 1e-9)
        else:
            raise ValueError(f"unknown vertex method {method!r}")
        X = np.tile(pinned, (Y.shape[0], 1))
        X[:, free] = Y
    X = X[np.all(X @ p.A.T <= p.b + vtol, axis=1)]
    X = _dedupe(X, vtol)
    out = []
    for x in X:
        x = np.where(np.abs(x) < 1e-15, 0.0, x)
        active = tuple(int(i) for i in np.flatnonzero(np.abs(p.A @ x - p.b) <= vtol))
        out.append(Vertex(x, active))
    return out


def vertex_array(p: Polytope) -> np.ndarray:
    vs = vertices(p)
    return np.array([v.point for v in vs]).reshape(-1, p.dim)


def polytope_equal(a: Polytope, b: Polytope, tol: float | None = None) -> bool:
    """Same point set: every vertex of each lies in the other."""
    if a.vars != b.vars:
        raise ValueError("polytopes must share the variable order")
    tol = TOL.vertex if tol is None else tol
    va = vertex_array(a)
    vb = vertex_array(b)
    if va.shape[0] == 0 or vb.shape[0] == 0:
        return va.shape[0] == vb.shape[0]
    return bool(_containing_batch(b, va, tol).all() and _containing_batch(a, vb, tol).all())


def union_contains(regions, point, tol: float | None = None) -> bool:
    return any(contains(r, point, tol) for r in regions)


@dataclass(frozen=True)
class Inclusion:
    included: bool
    witness: np.ndarray | None = None

    def __bool__(self):
        return self.included


def boundary_samples(p: Polytope, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` boundary points: rays from the vertex centroid in random directions."""
    V = vertex_array(p)
    if V.shape[0] == 0 or k <= 0:
        return np.zeros((0, p.dim))
    center = V.mean(axis=0)
    D = rng.normal(size=(k, p.dim))
    AD = D @ p.A.T                          # (k, m)
    slack = p.b - p.A @ center              # (m,)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(AD > 1e-12, slack / AD, np.inf)
    step = t.min(axis=1)
    step = np.where(np.isfinite(step), np.maximum(step, 0.0), 0.0)
    return center + step[:, None] * D


def union_included(A, B, samples: int = 200, seed: int = 0, tol: float | None = None) -> Inclusion:
    """Is the union of ``A`` inside the union of ``B``?

    Every vertex of every member of ``A`` is tested, plus ``samples`` boundary
    points per member; the first point outside all of ``B`` is the witness.
    """
    tol = TOL.vertex if tol is None else tol
    rng = np.random.default_rng(seed)
    for member in A:
        pts = vertex_array(member)
        pts = np.vstack([pts, boundary_samples(member, samples, rng)])
        inside = np.zeros(pts.shape[0], dtype=bool)
        for other in B:
            inside |= _containing_batch(other, pts, tol)
        if not inside.all():
            return Inclusion(False, pts[np.flatnonzero(~inside)[0]])
    return Inclusion(True)


# --- export ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def vertices_csv(p: Polytope, points: np.ndarray | None = None) -> str:
    pts = vertex_array(p) if points is None else points
    lines = [",".join(p.vars)]
    lines += [",".join(_fmt(v) for v in row) for row in pts]
    return "\n".join(lines) + "\n"


def ccw_polygon(p: Polytope) -> np.ndarray:
    """Vertices of a 2-D polytope in counterclockwise order."""
    if p.dim != 2:
        raise ValueError("ccw_polygon needs exactly two variables")
    V = vertex_array(p)
    if V.shape[0] <= 2:
        return V
    c = V.mean(axis=0)
    ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
    return V[np.argsort(ang, kind="stable")]
