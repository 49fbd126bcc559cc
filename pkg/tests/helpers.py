"""Channel generators, samplers and independent oracles shared by the tests."""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from macwt.channel import channel_from_marginals, make_channel
from macwt.polytope import vertex_array
from macwt.regions import HypothesisError, build_region, check_hypothesis


# --- channels -----------------------------------------------------------------

def random_channel(rng: np.random.Generator, K: int, degraded: bool = True, max_alphabet: int = 3,
                   concentration: float = 0.7):
    """Random channel with alphabets in [2, max_alphabet].

    ``degraded`` routes Z through Y (X -> Y -> Z), which makes Bob at least as
    strong as Eve for every subset; otherwise Y and Z are drawn independently.
    """
    alph = tuple(int(a) for a in rng.integers(2, max_alphabet + 1, size=K))
    ny, nz = (int(v) for v in rng.integers(2, max_alphabet + 1, size=2))
    pmfs = [rng.dirichlet(np.full(a, concentration)) for a in alph]
    p_y = rng.dirichlet(np.full(ny, concentration), size=alph)
    if degraded:
        z_of_y = rng.dirichlet(np.full(nz, concentration), size=ny)
        return make_channel(pmfs, np.einsum("...y,yz->...yz", p_y, z_of_y))
    p_z = rng.dirichlet(np.full(nz, concentration), size=alph)
    return channel_from_marginals(pmfs, p_y, p_z)


def satisfies_hypothesis(spec) -> bool:
    try:
        for kp in range(1, spec.full_mask + 1):
            check_hypothesis(spec, kp)
    except HypothesisError:
        return False
    return True


@functools.lru_cache(maxsize=None)
def fuzz_channels(K: int, n: int = 100, seed: int = 0) -> tuple:
    """``n`` channels meeting the projection hypothesis for every partition.

    Even slots are degraded channels; odd slots try general channels first
    (rejection sampling) and fall back to a degraded one.
    """
    rng = np.random.default_rng([seed, K])
    out = []
    for i in range(n):
        ch = None
        if i % 2:
            for _ in range(40):
                cand = random_channel(rng, K, degraded=False)
                if satisfies_hypothesis(cand):
                    ch = cand
                    break
        out.append(ch if ch is not None else random_channel(rng, K))
    return tuple(out)


def bsc_channel(p: float, q: float, prior: float = 0.5):
    """Single user, Y = X through BSC(p), Z = X through BSC(q), independent noise."""
    bsc = lambda e: np.array([[1 - e, e], [e, 1 - e]])  # noqa: E731
    return channel_from_marginals([[prior, 1 - prior]], bsc(p), bsc(q))


def h2(p: float) -> float:
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


# --- brute-force information measures -----------------------------------------

def joint_table(spec) -> dict[tuple[int, ...], float]:
    """p(x_1..x_K, y, z) by explicit loops over every alphabet symbol."""
    table = {}
    alph = spec.user_alphabets
    for xs in itertools.product(*(range(a) for a in alph)):
        px = 1.0
        for k, x in enumerate(xs):
            px *= float(spec.input_pmfs[k][x])
        for y in range(spec.y_alphabet):
            for z in range(spec.z_alphabet):
                p = px * float(spec.transition[xs + (y, z)])
                if p > 0:
                    table[xs + (y, z)] = p
    return table


def entropy_oracle(table, axes) -> float:
    axes = sorted(axes)
    if not axes:
        return 0.0
    marg: dict[tuple[int, ...], float] = {}
    for key, p in table.items():
        sub = tuple(key[a] for a in axes)
        marg[sub] = marg.get(sub, 0.0) + p
    return -sum(p * math.log2(p) for p in marg.values() if p > 0)


def mi_oracle(table, left, right, given=()) -> float:
    L, R, G = set(left), set(right), set(given)
    h = lambda s: entropy_oracle(table, s)  # noqa: E731
    return h(L | G) + h(R | G) - h(L | R | G) - h(G)


def user_axes(mask: int) -> list[int]:
    return [k for k in range(mask.bit_length()) if mask >> k & 1]


# --- region samplers ----------------------------------------------------------

def shrunk_vertices(poly, eps: float = 1e-4) -> np.ndarray:
    V = vertex_array(poly)
    c = V.mean(axis=0)
    return c + (1 - eps) * (V - c)


def exterior_points(poly, forced_zero, rng, count: int, push: float = 0.05,
                    min_violation: float = 1e-6) -> np.ndarray:
    """Points just past the boundary along non-negative rays from the centroid.

    The rays keep forced-zero secret rates at zero, so every point is
    non-negative and only a rate bound can exclude it; the exit distance is
    overshot by the factor ``1 + push`` and shallow exits are resampled.
    """
    V = vertex_array(poly)
    c = V.mean(axis=0)
    n = poly.dim
    zero = np.zeros(n, dtype=bool)
    for k in forced_zero:
        zero[2 * (k - 1)] = True
    out = []
    while len(out) < count:
        d = rng.exponential(size=n)
        d[zero] = 0.0
        d /= np.linalg.norm(d)
        Ad = poly.A @ d
        pos = Ad > 1e-12
        t = float(np.min((poly.b - poly.A @ c)[pos] / Ad[pos]))
        x = c + t * (1 + push) * d
        if np.max(poly.A @ x - poly.b) > min_violation:
            out.append(x)
    return np.array(out)


def hull_samples(poly, rng, count: int) -> np.ndarray:
    """Random convex combinations of vertices, plus the vertices themselves."""
    V = vertex_array(poly)
    W = rng.dirichlet(np.full(len(V), 0.3), size=count)
    X = W @ V
    X[: min(len(V), count)] = V[: min(len(V), count)]
    return X


def garbage_violation(eng, kp: int, rates: np.ndarray, garbage: dict[str, float]) -> float:
    """Largest violation of the garbage-rate system, evaluated term by term."""
    K, full = eng.num_users, eng.full_mask
    comp = full & ~kp
    rs, ro = rates[0::2], rates[1::2]
    g = np.zeros(K)
    for name, v in garbage.items():
        g[int(name[1:-1]) - 1] = v
    worst = max([-g[k] for k in user_axes(kp)], default=0.0)
    for s in range(full + 1):
        if s & ~kp:
            continue
        for t in range(full + 1):
            if t & ~comp:
                continue
            lhs = sum(rs[k] + ro[k] + g[k] for k in user_axes(s)) + sum(ro[k] for k in user_axes(t))
            worst = max(worst, lhs - eng.bob(s | t, (kp & ~s) | (comp & ~t)))
        lhs = sum(ro[k] + g[k] for k in user_axes(s))
        worst = max(worst, eng.eve(s, comp) - lhs)
    return worst


# --- LP oracles ---------------------------------------------------------------

def face_lp_oracle(spec, secrecy_value: float) -> float:
    """max sum of open rates over the union with the secret sum pinned,
    solved with scipy's HiGHS on each partition's inequality system."""
    from scipy.optimize import linprog

    best = -math.inf
    K = spec.num_users
    c = np.zeros(2 * K)
    c[1::2] = -1.0
    eq = np.zeros((1, 2 * K))
    eq[0, 0::2] = 1.0
    for kp in range(spec.full_mask + 1):
        P = build_region(spec, kp).polytope
        res = linprog(c, A_ub=P.A.astype(float), b_ub=P.b, A_eq=eq, b_eq=[secrecy_value],
                      bounds=[(None, None)] * (2 * K), method="highs")
        if res.status == 0:
            best = max(best, -res.fun)
    return best


def lp_vertex_oracle(c, A_ub, b_ub, A_eq, b_eq, lower, upper):
    """Best objective over basic feasible solutions of a box-bounded LP.

    Every choice of ``n - m_eq`` tight inequality rows (constraints and bounds)
    together with the equalities is solved directly; returns ``None`` when
    no basic solution is feasible.
    """
    n = len(c)
    G = np.vstack([A_ub, np.eye(n), -np.eye(n)])
    h = np.concatenate([b_ub, upper, -lower])
    m_eq = len(b_eq)
    need = n - m_eq
    best = None
    combos = np.array(list(itertools.combinations(range(len(G)), need)), dtype=int) \
        if need > 0 else np.zeros((1, 0), dtype=int)
    M = np.concatenate([G[combos], np.broadcast_to(A_eq, (len(combos), m_eq, n))], axis=1)
    r = np.concatenate([h[combos], np.broadcast_to(b_eq, (len(combos), m_eq))], axis=1)
    ok = np.abs(np.linalg.det(M)) > 1e-9
    if not ok.any():
        return None
    X = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    feas = np.all(X @ G.T <= h + 1e-9, axis=1) & np.all(np.abs(X @ A_eq.T - b_eq) <= 1e-9, axis=1)
    if feas.any():
        best = float((X[feas] @ c).max())
    return best


def random_bounded_lp(rng, n=None):
    """Small LP with integer data (so degenerate vertices are common) and
    finite bounds on every variable."""
    from macwt.simplex import LPProblem

    n = int(rng.integers(1, 7)) if n is None else n
    m_ub = int(rng.integers(0, 6))
    m_eq = int(rng.integers(0, min(2, n)))
    A_ub = rng.integers(-3, 4, size=(m_ub, n)).astype(float)
    b_ub = rng.integers(-2, 8, size=m_ub).astype(float)
    A_eq = rng.integers(-2, 3, size=(m_eq, n)).astype(float)
    b_eq = rng.integers(-2, 3, size=m_eq).astype(float)
    lower = -rng.integers(0, 3, size=n).astype(float)
    upper = rng.integers(1, 5, size=n).astype(float)
    return LPProblem(rng.normal(size=n), A_ub, b_ub, A_eq, b_eq, lower, upper)
