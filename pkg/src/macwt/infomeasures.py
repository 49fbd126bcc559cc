"""Entropies and conditional mutual informations of a discrete joint law.

Everything is measured in bits.  Variable subsets are described by
:class:`VariableSet`, a user bitmask (bit ``k-1`` stands for X_k) plus flags for
Y and Z.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, JointDistribution, joint_distribution
from .config import TOL


class InformationError(ArithmeticError):
    """A mutual information came out clearly negative (not rounding noise)."""


class OverlapError(ValueError):
    pass


class SubsetError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class VariableSet:
    user_mask: int = 0
    include_y: bool = False
    include_z: bool = False

    def __post_init__(self):
        if self.user_mask < 0:
            raise ValueError("user mask must be non-negative")

    @classmethod
    def users(cls, mask: int) -> "VariableSet":
        return cls(mask)

    def __or__(self, other: "VariableSet") -> "VariableSet":
        return VariableSet(self.user_mask | other.user_mask,
                           self.include_y or other.include_y,
                           self.include_z or other.include_z)

    def overlaps(self, other: "VariableSet") -> bool:
        return bool(self.user_mask & other.user_mask
                    or (self.include_y and other.include_y)
                    or (self.include_z and other.include_z))

    def is_empty(self) -> bool:
        return not (self.user_mask or self.include_y or self.include_z)

    def axes(self, num_users: int) -> tuple[int, ...]:
        if self.user_mask >> num_users:
            raise ValueError(f"user mask {self.user_mask:#b} names users beyond K={num_users}")
        out = [k for k in range(num_users) if self.user_mask >> k & 1]
        if self.include_y:
            out.append(num_users)
        if self.include_z:
            out.append(num_users + 1)
        return tuple(out)

    def __str__(self):
        names = [f"X{k + 1}" for k in range(self.user_mask.bit_length()) if self.user_mask >> k & 1]
        if self.include_y:
            names.append("Y")
        if self.include_z:
            names.append("Z")
        return ",".join(names) if names else "()"


Y = VariableSet(include_y=True)
Z = VariableSet(include_z=True)
EMPTY = VariableSet()


def X(mask: int) -> VariableSet:
    return VariableSet(mask)


def _entropy_of(tensor: np.ndarray, keep: tuple[int, ...]) -> float:
    if not keep:
        return 0.0
    drop = tuple(i for i in range(tensor.ndim) if i not in keep)
    marg = tensor.sum(axis=drop) if drop else tensor
    p = marg[marg > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(joint: JointDistribution, vars: VariableSet) -> float:
    """H(vars) in bits; the empty set has entropy 0."""
    return _entropy_of(joint.tensor, vars.axes(joint.num_users))


def _clamp(value: float, what: str) -> float:
    if value < 0:
        if value < -TOL.mi_clamp:
            raise InformationError(f"{what} = {value!r} is negative beyond rounding noise")
        return 0.0
    return value


def cond_mutual_info(joint: JointDistribution, left: VariableSet, right: VariableSet,
                     given: VariableSet = EMPTY) -> float:
    """I(left; right | given) = H(left, given) + H(right, given) - H(all) - H(given)."""
    _check_disjoint(left, right, given)
    h = lambda v: entropy(joint, v)  # noqa: E731
    value = h(left | given) + h(right | given) - h(left | right | given) - h(given)
    return _clamp(value, f"I({left};{right}|{given})")


def _check_disjoint(left, right, given):
    for a, b, names in ((left, right, "left/right"), (left, given, "left/given"),
                        (right, given, "right/given")):
        if a.overlaps(b):
            raise OverlapError(f"{names} variable sets intersect: {a} vs {b}")


class MIEngine:
    """Cached information measures over one joint distribution.

    Entropies are cached per variable set and MI values per canonical
    ``(left, right, given)`` triple; both caches are guarded by a lock so one
    engine can be shared between threads.
    """

    def __init__(self, source: ChannelSpec | JointDistribution):
        self.joint = source if isinstance(source, JointDistribution) else joint_distribution(source)
        self.num_users = self.joint.num_users
        self.full_mask = (1 << self.num_users) - 1
        self._h: dict[VariableSet, float] = {}
        self._mi: dict[tuple[VariableSet, VariableSet, VariableSet], float] = {}
        self._lock = threading.Lock()

    def entropy(self, vars: VariableSet) -> float:
        with self._lock:
            cached = self._h.get(vars)
        if cached is not None:
            return cached
        value = entropy(self.joint, vars)
        with self._lock:
            self._h.setdefault(vars, value)
        return value

    def mi(self, left: VariableSet, right: VariableSet, given: VariableSet = EMPTY) -> float:
        _check_disjoint(left, right, given)
        key = (min(left, right), max(left, right), given)
        with self._lock:
            cached = self._mi.get(key)
        if cached is not None:
            return cached
        h = self.entropy
        value = h(left | given) + h(right | given) - h(left | right | given) - h(given)
        value = _clamp(value, f"I({left};{right}|{given})")
        with self._lock:
            self._mi.setdefault(key, value)
        return value

    # shorthands for the two families of terms used by the rate regions
    def bob(self, mask: int, given: int = 0) -> float:
        """I(X_mask; Y | X_given)."""
        return self.mi(X(mask), Y, X(given))

    def eve(self, mask: int, given: int = 0) -> float:
        """I(X_mask; Z | X_given)."""
        return self.mi(X(mask), Z, X(given))

    def region_rhs(self, kp: int, s: int, sp: int, t: int) -> tuple[float, float]:
        return region_rhs(self, kp, s, sp, t)

    def secrecy_gap(self, kp: int, s: int) -> float:
        """I(X_S; Y | X_{K' minus S}, X_{K'bar}) - I(X_S; Z | X_{K'bar}) for S within K'."""
        comp = self.full_mask & ~kp
        return self.bob(s, self.full_mask & ~s) - self.eve(s, comp)


def region_rhs(engine: MIEngine | JointDistribution, kp: int, s: int, sp: int, t: int) -> tuple[float, float]:
    """Right-hand side of the (S, S', T) bound of the partition-K' region.

    Returns ``(raw, clamped)`` where raw is
    I(X_S, X_T; Y | X_{K' minus S}, X_{K'bar minus T}) - I(X_{S'}; Z | X_{K'bar})
    and clamped is ``max(raw, 0)``.
    """
    if isinstance(engine, JointDistribution):
        engine = MIEngine(engine)
    full = engine.full_mask
    comp = full & ~kp
    if kp & ~full:
        raise SubsetError(f"K'={kp:#b} is not a subset of the users")
    if s & ~kp:
        raise SubsetError(f"S={s:#b} is not a subset of K'={kp:#b}")
    if sp & ~s:
        raise SubsetError(f"S'={sp:#b} is not a subset of S={s:#b}")
    if t & ~comp:
        raise SubsetError(f"T={t:#b} is not a subset of the complement of K'={kp:#b}")
    given = (kp & ~s) | (comp & ~t)
    raw = engine.bob(s | t, given) - engine.eve(sp, comp)
    return raw, max(raw, 0.0)
