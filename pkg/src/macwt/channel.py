"""Discrete memoryless MAC-WT channel specifications.

A channel has K independent inputs X_1..X_K with finite alphabets, a
legitimate output Y and an eavesdropper output Z.  The transition law
p(y, z | x_1, ..., x_K) is stored as a tensor indexed ``(x_1, ..., x_K, y, z)``
with x_1 the slowest axis; the JSON form flattens it in C (row-major) order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import TOL


class ChannelError(ValueError):
    """Invalid channel document or specification.

    ``code`` is one of ``"schema"``, ``"normalization"``, ``"dimension"``.
    """

    def __init__(self, code: str, message: str, **detail: Any):
        super().__init__(message)
        self.code = code
        self.detail = detail


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    input_pmfs: tuple[np.ndarray, ...]
    transition: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "input_pmfs", tuple(_frozen(p) for p in self.input_pmfs))
        object.__setattr__(self, "transition", _frozen(self.transition))
        _validate(self)

    @property
    def num_users(self) -> int:
        return len(self.input_pmfs)

    @property
    def user_alphabets(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.input_pmfs)

    @property
    def y_alphabet(self) -> int:
        return self.transition.shape[-2]

    @property
    def z_alphabet(self) -> int:
        return self.transition.shape[-1]

    @property
    def full_mask(self) -> int:
        return (1 << self.num_users) - 1

    def __eq__(self, other):
        if not isinstance(other, ChannelSpec):
            return NotImplemented
        return (
            self.user_alphabets == other.user_alphabets
            and all(np.array_equal(a, b) for a, b in zip(self.input_pmfs, other.input_pmfs))
            and self.transition.shape == other.transition.shape
            and np.array_equal(self.transition, other.transition)
        )

    __hash__ = None


def _validate(spec: ChannelSpec) -> None:
    if spec.num_users < 1:
        raise ChannelError("schema", "a channel needs at least one user")
    for k, pmf in enumerate(spec.input_pmfs, start=1):
        if pmf.ndim != 1 or pmf.size < 1:
            raise ChannelError("dimension", f"pmf of user {k} must be a non-empty vector", user=k)
        if not np.all(np.isfinite(pmf)) or np.any(pmf < 0) or np.any(pmf > 1):
            raise ChannelError("normalization", f"pmf of user {k} has entries outside [0, 1]",
                               user=k, pmf=pmf.tolist())
        total = float(pmf.sum())
        if abs(total - 1.0) > TOL.pmf:
            raise ChannelError("normalization", f"pmf of user {k} sums to {total!r}",
                               user=k, observed_sum=total)
    expected = spec.user_alphabets
    t = spec.transition
    if t.ndim != spec.num_users + 2 or t.shape[:-2] != expected:
        raise ChannelError("dimension",
                           f"transition shape {t.shape} does not match alphabets {expected} + (|Y|, |Z|)",
                           shape=list(t.shape), alphabets=list(expected))
    if t.shape[-2] < 1 or t.shape[-1] < 1:
        raise ChannelError("dimension", "output alphabets must be non-empty", shape=list(t.shape))
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
        bad = np.argwhere(~np.isfinite(t) | (t < 0) | (t > 1))[0]
        raise ChannelError("normalization", "transition has entries outside [0, 1]",
                           index=[int(i) for i in bad])
    sums = t.sum(axis=(-2, -1))
    dev = np.abs(sums - 1.0)
    if np.any(dev > TOL.pmf):
        idx = np.unravel_index(int(np.argmax(dev)), sums.shape)
        raise ChannelError("normalization",
                           f"transition row x={tuple(int(i) for i in idx)} sums to {float(sums[idx])!r}",
                           x_index=[int(i) for i in idx], observed_sum=float(sums[idx]))


def make_channel(pmfs, transition) -> ChannelSpec:
    return ChannelSpec(tuple(np.asarray(p, dtype=float) for p in pmfs), np.asarray(transition, dtype=float))


def channel_from_marginals(pmfs, p_y: np.ndarray, p_z: np.ndarray) -> ChannelSpec:
    """Channel whose outputs are conditionally independent given the inputs.

    ``p_y`` has shape ``(*alphabets, |Y|)`` and ``p_z`` shape ``(*alphabets, |Z|)``.
    """
    p_y = np.asarray(p_y, dtype=float)
    p_z = np.asarray(p_z, dtype=float)
    return make_channel(pmfs, p_y[..., :, None] * p_z[..., None, :])


def parse_channel(document: str | bytes | dict) -> ChannelSpec:
    """Parse a channel document (JSON text or an already decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ChannelError("schema", f"not valid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ChannelError("schema", "channel document must be a JSON object")
    for key in ("users", "y_size", "z_size", "transition"):
        if key not in doc:
            raise ChannelError("schema", f"missing field {key!r}", field=key)
    users = doc["users"]
    if not isinstance(users, list) or not users:
        raise ChannelError("schema", "'users' must be a non-empty list", field="users")
    pmfs = []
    for k, user in enumerate(users, start=1):
        if not isinstance(user, dict) or "pmf" not in user:
            raise ChannelError("schema", f"user {k} lacks a 'pmf' field", field="users", user=k)
        pmfs.append(_number_list(user["pmf"], f"users[{k - 1}].pmf"))
    sizes = []
    for key in ("y_size", "z_size"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ChannelError("schema", f"{key!r} must be a positive integer", field=key)
        sizes.append(v)
    flat = _number_list(doc["transition"], "transition")
    shape = tuple(len(p) for p in pmfs) + tuple(sizes)
    if len(flat) != int(np.prod(shape)):
        raise ChannelError("dimension",
                           f"transition has {len(flat)} entries, expected {int(np.prod(shape))} for shape {shape}",
                           expected=int(np.prod(shape)), observed=len(flat), shape=list(shape))
    return make_channel(pmfs, np.array(flat, dtype=float).reshape(shape))


def _number_list(value, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ChannelError("schema", f"{where} must be a non-empty list of numbers", field=where)
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ChannelError("schema", f"{where} contains a non-number: {v!r}", field=where)
    return [float(v) for v in value]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def render_channel(spec: ChannelSpec) -> str:
    """Canonical JSON text; ``parse_channel(render_channel(s)) == s`` bit for bit."""
    users = ", ".join('{"pmf": [' + ", ".join(_fmt(v) for v in p) + "]}" for p in spec.input_pmfs)
    trans = ", ".join(_fmt(v) for v in spec.transition.ravel())
    return (f'{{"users": [{users}], "y_size": {spec.y_alphabet}, '
            f'"z_size": {spec.z_alphabet}, "transition": [{trans}]}}')


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """p(x_1, ..., x_K, y, z) with one named axis per variable."""

    tensor: np.ndarray
    axis_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "tensor", _frozen(self.tensor))
        if not self.axis_names:
            k = self.tensor.ndim - 2
            names = tuple(f"X{i}" for i in range(1, k + 1)) + ("Y", "Z")
            object.__setattr__(self, "axis_names", names)
        if len(self.axis_names) != self.tensor.ndim:
            raise ValueError("one axis name per tensor dimension required")

    @property
    def num_users(self) -> int:
        return self.tensor.ndim - 2


def joint_distribution(spec: ChannelSpec) -> JointDistribution:
    """Product-form joint law prod_k p(x_k) * p(y, z | x)."""
    k = spec.num_users
    prior = np.ones(())
    for i, pmf in enumerate(spec.input_pmfs):
        shape = [1] * k
        shape[i] = pmf.size
        prior = prior * pmf.reshape(shape)
    tensor = prior[..., None, None] * spec.transition
    return JointDistribution(tensor)


def degenerate_eve(spec: ChannelSpec) -> ChannelSpec:
    """Same channel with Eve's output replaced by a constant (|Z| = 1)."""
    p_y = spec.transition.sum(axis=-1, keepdims=True)
    return make_channel(spec.input_pmfs, p_y)


def eve_sees_bob(spec: ChannelSpec) -> ChannelSpec:
    """Channel with Z = Y, i.e. p(y, z | x) = p(y | x) 1{z = y}."""
    p_y = spec.transition.sum(axis=-1)
    ny = p_y.shape[-1]
    return make_channel(spec.input_pmfs, p_y[..., :, None] * np.eye(ny))
