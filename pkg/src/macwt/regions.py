"""Rate regions of the multiple-access wiretap channel.

Users are numbered 1..K in public interfaces and stored as bitmasks internally
(bit ``k-1`` is user k).  The rate space is ordered
``(R1s, R1o, R2s, R2o, ..., RKs, RKo)``; garbage rates are ``R1g, ..., RKg``.
All subset iterations run in increasing bitmask order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .channel import ChannelSpec
from .config import TOL
from .infomeasures import MIEngine
from .polytope import (EliminationStep, Polytope, contains, fm_eliminate_all, fm_step, normalize,
                       polytope_equal, remove_redundant, union_included)


class HypothesisError(ValueError):
    """The MI precondition for eliminating garbage rates fails for some subset."""

    def __init__(self, partition: int, subset: int, bob: float, eve: float):
        self.partition = partition
        self.subset = subset
        self.bob = bob
        self.eve = eve
        super().__init__(
            f"hypothesis fails for S={mask_users(subset)} within K'={mask_users(partition)}: "
            f"I(X_S;Y|...)={bob:.12g} < I(X_S;Z|...)={eve:.12g}")


class ZeroSecrecyError(ValueError):
    """The maximum sum secrecy rate is zero; the open-rate formula does not apply."""


# --- masks and names --------------------------------------------------------------

def submasks(mask: int):
    """Subsets of ``mask`` in increasing numeric order (including 0 and mask)."""
    return [s for s in range(mask + 1) if s & ~mask == 0]


def mask_users(mask: int) -> list[int]:
    return [k + 1 for k in range(mask.bit_length()) if mask >> k & 1]


def users_mask(users) -> int:
    m = 0
    for u in users:
        m |= 1 << (int(u) - 1)
    return m


def engine_for(source) -> MIEngine:
    return source if isinstance(source, MIEngine) else MIEngine(source)


def rate_vars(K: int) -> list[str]:
    out = []
    for k in range(1, K + 1):
        out += [f"R{k}s", f"R{k}o"]
    return out


def garbage_vars(partition: int) -> list[str]:
    return [f"R{k}g" for k in mask_users(partition)]


def _si(k: int) -> int:
    return 2 * k


def _oi(k: int) -> int:
    return 2 * k + 1


@dataclass(frozen=True)
class RateTuple:
    secret: tuple[float, ...]
    open: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(v) for v in self.secret)
        o = tuple(float(v) for v in self.open)
        if len(s) != len(o):
            raise ValueError("secret and open rate vectors must have the same length")
        if not all(math.isfinite(v) and v >= 0 for v in s + o):
            raise ValueError("rates must be finite and non-negative")
        object.__setattr__(self, "secret", s)
        object.__setattr__(self, "open", o)

    @property
    def num_users(self) -> int:
        return len(self.secret)

    def vector(self) -> np.ndarray:
        v = np.empty(2 * self.num_users)
        v[0::2] = self.secret
        v[1::2] = self.open
        return v

    @classmethod
    def from_vector(cls, v) -> "RateTuple":
        v = np.asarray(v, dtype=float)
        return cls(tuple(v[0::2]), tuple(v[1::2]))

    def values(self) -> dict[str, float]:
        return dict(zip(rate_vars(self.num_users), self.vector()))


@dataclass(frozen=True)
class ClampEntry:
    S: int
    S_prime: int
    T: int
    raw: float


@dataclass
class RegionDescriptor:
    partition: int
    polytope: Polytope
    num_users: int
    clamped: list[ClampEntry] = field(default_factory=list)
    forced_zero: list[int] = field(default_factory=list)
    family_size: int = 0
    kind: str = "rate"

    def contains(self, point, tol: float | None = None) -> bool:
        return contains(self.polytope, point, tol)

    def to_dict(self) -> dict:
        d = self.polytope.to_dict()
        d["partition"] = mask_users(self.partition)
        d["clamped"] = [{"S": mask_users(c.S), "S_prime": mask_users(c.S_prime),
                         "T": mask_users(c.T), "raw": c.raw} for c in self.clamped]
        d["forced_zero"] = list(self.forced_zero)
        return d


def _nonneg_rows(n: int):
    return -np.eye(n, dtype=np.int64), np.zeros(n)


# --- partition regions ------------------------------------------------------------

def build_region(spec, partition: int, clamped: bool = True) -> RegionDescriptor:
    """One inequality per (S within K', S' within S, T within the complement),
    plus ``R_k^s = 0`` off K' and non-negativity of every rate."""
    eng = engine_for(spec)
    K = eng.num_users
    full = eng.full_mask
    if partition & ~full:
        raise ValueError(f"partition {mask_users(partition)} names users beyond K={K}")
    comp = full & ~partition
    n = 2 * K
    rows, rhs, log = [], [], []
    for s in submasks(partition):
        for sp in submasks(s):
            for t in submasks(comp):
                raw, pos = eng.region_rhs(partition, s, sp, t)
                row = np.zeros(n, dtype=np.int64)
                for k in range(K):
                    if s >> k & 1:
                        row[_si(k)] = 1
                    if (s & ~sp | t) >> k & 1:
                        row[_oi(k)] = 1
                rows.append(row)
                rhs.append(pos if clamped else raw)
                if raw < 0:
                    log.append(ClampEntry(s, sp, t, raw))
    family = len(rows)
    forced = mask_users(comp)
    for k in forced:
        row = np.zeros(n, dtype=np.int64)
        row[_si(k - 1)] = 1
        rows += [row, -row]
        rhs += [0.0, 0.0]
    A, b = _nonneg_rows(n)
    P = Polytope(rate_vars(K), np.vstack([np.array(rows), A]), np.concatenate([rhs, b]))
    return RegionDescriptor(partition, normalize(P), K, log, forced, family)


def build_legacy_region(spec) -> RegionDescriptor:
    eng = engine_for(spec)
    return build_region(eng, eng.full_mask, clamped=True)


def build_mac_region(spec) -> RegionDescriptor:
    """Conventional MAC family over open rates: sum_T R^o <= I(X_T; Y | X_Tbar),
    all secret rates zero."""
    eng = engine_for(spec)
    K, full = eng.num_users, eng.full_mask
    n = 2 * K
    rows, rhs = [], []
    for t in submasks(full):
        row = np.zeros(n, dtype=np.int64)
        for k in mask_users(t):
            row[_oi(k - 1)] = 1
        rows.append(row)
        rhs.append(eng.bob(t, full & ~t))
    for k in range(K):
        row = np.zeros(n, dtype=np.int64)
        row[_si(k)] = 1
        rows += [row, -row]
        rhs += [0.0, 0.0]
    A, b = _nonneg_rows(n)
    P = Polytope(rate_vars(K), np.vstack([np.array(rows), A]), np.concatenate([rhs, b]))
    return RegionDescriptor(0, normalize(P), K, [], list(range(1, K + 1)), len(submasks(full)), "mac")


def build_secrecy_region(spec, partition: int = 0, legacy: bool = False) -> RegionDescriptor:
    """Secret-rate-only regions over ``(R1s, ..., RKs)``.

    ``legacy`` selects the single region with bounds
    ``[I(X_S;Y|X_Sbar) - I(X_S;Z)]^+`` for every S; otherwise the partition
    version ``[I(X_S;Y|X_Sbar,X_K'bar) - I(X_S;Z|X_K'bar)]^+`` for S within K'
    with ``R_k^s = 0`` off K'.
    """
    eng = engine_for(spec)
    K, full = eng.num_users, eng.full_mask
    if legacy:
        partition = full
    comp = full & ~partition
    rows, rhs, log = [], [], []
    for s in submasks(partition):
        eve = eng.eve(s, 0) if legacy else eng.eve(s, comp)
        raw = eng.bob(s, full & ~s) - eve
        row = np.zeros(K, dtype=np.int64)
        for k in mask_users(s):
            row[k - 1] = 1
        rows.append(row)
        rhs.append(max(raw, 0.0))
        if raw < 0:
            log.append(ClampEntry(s, s, 0, raw))
    family = len(rows)
    forced = mask_users(comp)
    for k in forced:
        row = np.zeros(K, dtype=np.int64)
        row[k - 1] = 1
        rows += [row, -row]
        rhs += [0.0, 0.0]
    A, b = _nonneg_rows(K)
    P = Polytope([f"R{k}s" for k in range(1, K + 1)], np.vstack([np.array(rows), A]),
                 np.concatenate([rhs, b]))
    kind = "secrecy-legacy" if legacy else "secrecy"
    return RegionDescriptor(partition, normalize(P), K, log, forced, family, kind)


def region_union(spec, clamped: bool = True, threads: int | None = None) -> list[RegionDescriptor]:
    """``build_region`` for every partition, in increasing mask order."""
    eng = engine_for(spec)
    masks = list(range(eng.full_mask + 1))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda m: build_region(eng, m, clamped), masks))
    return [build_region(eng, m, clamped) for m in masks]


def secrecy_union(spec) -> list[RegionDescriptor]:
    eng = engine_for(spec)
    return [build_secrecy_region(eng, m) for m in range(eng.full_mask + 1)]


# --- garbage rates ------------------------------------------------------------------

@dataclass
class GarbagePolytope:
    partition: int
    polytope: Polytope
    num_users: int
    symbolic: bool


def build_garbage_polytope(spec, partition: int, rates: RateTuple | None = None) -> GarbagePolytope:
    """The system on garbage rates: R^g >= 0, the upper family indexed by
    (S within K', T within the complement), the lower family indexed by S.

    With ``rates=None`` the rate variables stay symbolic; otherwise they are
    substituted and only ``R_k^g`` (k in K') remain.
    """
    eng = engine_for(spec)
    K, full = eng.num_users, eng.full_mask
    if partition & ~full:
        raise ValueError(f"partition {mask_users(partition)} names users beyond K={K}")
    comp = full & ~partition
    gvars = garbage_vars(partition)
    gidx = {k: 2 * K + i for i, k in enumerate(mask_users(partition))}
    n = 2 * K + len(gvars)
    rows, rhs = [], []
    for k in mask_users(partition):
        row = np.zeros(n, dtype=np.int64)
        row[gidx[k]] = -1
        rows.append(row)
        rhs.append(0.0)
    for s in submasks(partition):
        for t in submasks(comp):
            row = np.zeros(n, dtype=np.int64)
            for k in mask_users(s):
                row[_si(k - 1)] = row[_oi(k - 1)] = row[gidx[k]] = 1
            for k in mask_users(t):
                row[_oi(k - 1)] = 1
            rows.append(row)
            rhs.append(eng.bob(s | t, (partition & ~s) | (comp & ~t)))
    for s in submasks(partition):
        row = np.zeros(n, dtype=np.int64)
        for k in mask_users(s):
            row[_oi(k - 1)] = row[gidx[k]] = -1
        rows.append(row)
        rhs.append(-eng.eve(s, comp))
    P = Polytope(rate_vars(K) + gvars, np.array(rows), rhs)
    if rates is not None:
        if rates.num_users != K:
            raise ValueError(f"rate tuple has {rates.num_users} users, channel has {K}")
        P = P.substitute(rates.values())
    return GarbagePolytope(partition, P, K, rates is None)


def _forced_zero_rows(K: int, partition: int, n: int):
    rows = []
    for k in mask_users(((1 << K) - 1) & ~partition):
        row = np.zeros(n, dtype=np.int64)
        row[_si(k - 1)] = 1
        rows += [row, -row]
    return rows


def check_hypothesis(spec, partition: int) -> None:
    """Raise :class:`HypothesisError` unless
    I(X_S;Y|X_Sbar,X_K'bar) >= I(X_S;Z|X_K'bar) for every S within K'."""
    eng = engine_for(spec)
    full = eng.full_mask
    comp = full & ~partition
    for s in submasks(partition)[1:]:
        bob = eng.bob(s, full & ~s)
        eve = eng.eve(s, comp)
        if bob < eve - TOL.mi:
            raise HypothesisError(partition, s, bob, eve)


@dataclass
class ProjectionReport:
    match: bool
    direct: RegionDescriptor
    projected: Polytope
    trace: list


def verify_fm_projection(spec, partition: int, threshold: int = 512) -> ProjectionReport:
    """Eliminate every garbage rate from the symbolic system and compare the
    result with the unclamped region, both boxed by ``0 <= R <= I(X_K;Y)``."""
    eng = engine_for(spec)
    check_hypothesis(eng, partition)
    K = eng.num_users
    gp = build_garbage_polytope(eng, partition).polytope
    trace: list = []
    projected = fm_eliminate_all(gp, garbage_vars(partition), threshold=threshold, trace=trace)
    n = 2 * K
    extra = _forced_zero_rows(K, partition, n)
    if extra:
        projected = projected.add(np.array(extra), np.zeros(len(extra)))
    cap = eng.bob(eng.full_mask, 0)
    projected = remove_redundant(projected.with_box(0.0, cap))
    direct = build_region(eng, partition, clamped=False)
    boxed = direct.polytope.with_box(0.0, cap)
    return ProjectionReport(polytope_equal(projected, boxed), direct, projected, trace)


def elimination_counts(spec, partition: int | None = None) -> list[EliminationStep]:
    """Bound counts seen while eliminating R1g, R2g, ... one by one.

    The elimination itself keeps every combination; only the bound extraction
    at each stage looks at the system with redundant rows pruned, so
    ``upper``/``lower``/``pairs`` count irredundant bounds while ``total`` is
    the raw size of the system after the step.
    """
    eng = engine_for(spec)
    if partition is None:
        partition = eng.full_mask
    p = build_garbage_polytope(eng, partition).polytope
    steps = []
    for var in garbage_vars(partition):
        reduced = remove_redundant(p)
        col = reduced.A[:, reduced.index(var)]
        up, lo = int((col > 0).sum()), int((col < 0).sum())
        p, raw = fm_step(p, var)
        steps.append(EliminationStep(var, up, lo, up * lo, raw.total))
    return steps


@dataclass
class GarbageResult:
    feasible: bool
    rates: dict[str, float] | None
    solution: simplex.LPSolution | None = None


def find_garbage_rates(spec, partition: int, rates: RateTuple) -> GarbageResult:
    """Phase-1 LP for garbage rates meeting the system at the given tuple."""
    eng = engine_for(spec)
    gp = build_garbage_polytope(eng, partition, rates).polytope
    if gp.dim == 0:
        ok = bool(np.all(gp.b >= -TOL.feasibility))
        return GarbageResult(ok, {} if ok else None)
    sol = simplex.feasible_point(gp.ineqs, nonneg_vars=range(gp.dim), num_vars=gp.dim)
    if sol.status == simplex.INFEASIBLE:
        return GarbageResult(False, None, sol)
    x = np.maximum(sol.x, 0.0)
    if not contains(gp, x, TOL.feasibility):
        raise ArithmeticError("simplex returned a point violating the garbage-rate system")
    return GarbageResult(True, dict(zip(gp.vars, x.tolist())), sol)


# --- maximum secrecy ------------------------------------------------------------------

@dataclass(frozen=True)
class SecrecyMax:
    value: float
    partition: int
    raw: float


def max_sum_secrecy(spec) -> SecrecyMax:
    """max over K' of [I(X_K';Y|X_K'bar) - I(X_K';Z|X_K'bar)]^+ ; the smallest
    mask wins ties."""
    eng = engine_for(spec)
    full = eng.full_mask
    best, arg, best_raw = -math.inf, 0, 0.0
    for kp in range(full + 1):
        raw = eng.secrecy_gap(kp, kp)
        value = max(raw, 0.0)
        if value > best + 1e-12:
            best, arg, best_raw = value, kp, raw
    return SecrecyMax(best, arg, best_raw)


def max_open_at_max_secrecy(spec) -> float:
    """I(X_K'bar;Y) + I(X_K';Z|X_K'bar) at the maximizing partition K'."""
    eng = engine_for(spec)
    best = max_sum_secrecy(eng)
    if best.value <= TOL.mi:
        raise ZeroSecrecyError("maximum sum secrecy rate is zero; use the MAC region for open rates")
    kp = best.partition
    comp = eng.full_mask & ~kp
    return eng.bob(comp, 0) + eng.eve(kp, comp)


# --- partition reduction ------------------------------------------------------------

@dataclass(frozen=True)
class PartitionReduction:
    k0: int
    k2: int
    violating: tuple[int, ...]


def reduce_partition(spec, partition: int) -> PartitionReduction:
    """Split K' into K0 (users whose secrecy bound collapses) and K'' = K' - K0.

    With d(A) = I(X_A;Y|X_{K'-A},X_K'bar) - I(X_A;Z|X_K'bar), a valid K0 has
    d(K0) <= 0 while every strictly larger subset of K' containing it has
    d > 0.  Non-positivity is judged with the MI tolerance, so d = 0 counts as a
    violation.  The empty set is valid exactly when no non-empty subset
    violates; among valid sets the smallest mask is returned.
    """
    eng = engine_for(spec)
    subs = submasks(partition)
    d = {a: eng.secrecy_gap(partition, a) for a in subs}
    bad = {a for a in subs if d[a] <= TOL.mi}
    violating = tuple(a for a in subs if a and a in bad)
    for a in subs:
        if a not in bad:
            continue
        if all(b not in bad for b in subs if b != a and b & a == a):
            return PartitionReduction(a, partition & ~a, violating)
    raise AssertionError("unreachable: the empty set always has d = 0")


# --- secrecy-region comparison (two users) --------------------------------------------

@dataclass
class SecrecyComparison:
    relation: str                 # "equal" or "strict"
    condition: str | None         # "geq_max", "leq_min", "intermediate" (K = 2 only)
    claimed_relation: str | None
    witness: np.ndarray | None
    differences: dict[str, float] = field(default_factory=dict)


def compare_secrecy_regions(spec, samples: int = 200) -> SecrecyComparison:
    """Compare the single-region secrecy bound with the union over partitions.

    The union always contains the single region; the relation is "equal" when
    the reverse inclusion holds and "strict" otherwise, with a witness point of
    the union outside the single region.
    """
    eng = engine_for(spec)
    legacy = build_secrecy_region(eng, legacy=True)
    union = secrecy_union(eng)
    back = union_included([r.polytope for r in union], [legacy.polytope], samples=samples)
    relation = "equal" if back.included else "strict"
    condition = claimed = None
    diffs: dict[str, float] = {}
    if eng.num_users == 2:
        a = eng.secrecy_gap(0b01, 0b01)
        b = eng.secrecy_gap(0b10, 0b10)
        c = eng.secrecy_gap(0b11, 0b11)
        diffs = {"single_1": a, "single_2": b, "sum": c}
        if c >= max(a, b) - TOL.mi:
            condition, claimed = "geq_max", "equal"
        elif c < min(a, b) - TOL.mi:
            condition, claimed = "leq_min", "strict"
        else:
            condition, claimed = "intermediate", "strict"
    return SecrecyComparison(relation, condition, claimed, back.witness, diffs)


# --- bound-family comparison ----------------------------------------------------------

@dataclass
class FamilyComparison:
    user: int
    entries: list[dict]
    extra_count: int
    all_hold: bool


def bound_family_comparison(spec, j: int) -> FamilyComparison:
    """For user j with R_j^s = 0, compare the bounds obtained with j inside the
    partition (all users secret-capable) against j outside it.

    For every S within K - {j} and S' within S the entry holds the right-hand
    sides of both versions; conditioning Eve's term on the independent X_j can
    only shrink the outside-version bounds.  ``extra_count`` is the size of the
    family that exists only when j is inside: 3^(K-1).
    """
    eng = engine_for(spec)
    K, full = eng.num_users, eng.full_mask
    if K < 2 or not 1 <= j <= K:
        raise ValueError(f"need K >= 2 and 1 <= j <= K, got K={K}, j={j}")
    jm = 1 << (j - 1)
    rest = full & ~jm
    entries, ok = [], True
    for s in submasks(rest):
        for sp in submasks(s):
            bob_a = eng.bob(s, full & ~s)
            bob_b = eng.bob(s | jm, full & ~s & ~jm)
            e = {
                "S": mask_users(s), "S_prime": mask_users(sp),
                "inside_a": bob_a - eng.eve(sp, 0),
                "outside_a": bob_a - eng.eve(sp, jm),
                "inside_b": bob_b - eng.eve(sp, 0),
                "outside_b": bob_b - eng.eve(sp, jm),
                "inside_c": bob_b - eng.eve(sp | jm, 0),
            }
            e["holds"] = (e["outside_a"] <= e["inside_a"] + TOL.mi
                          and e["outside_b"] <= e["inside_b"] + TOL.mi)
            ok &= e["holds"]
            entries.append(e)
    return FamilyComparison(j, entries, 3 ** (K - 1), ok)
