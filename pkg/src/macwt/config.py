"""Numerical tolerances shared by every layer of the package.

The defaults can be overridden through the ``MACWT_TOL`` environment variable,
either as a single float (applied to ``feasibility``) or as comma separated
``name=value`` pairs, e.g. ``MACWT_TOL="feasibility=1e-8,vertex=1e-6"``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

ENV_VAR = "MACWT_TOL"


@dataclass
class Tolerances:
    # normalization of pmfs / transition rows
    pmf: float = 1e-12
    # total mass of a joint distribution
    joint: float = 1e-10
    # "MI >= 0" style decisions
    mi: float = 1e-9
    # negative MI values in [-mi_clamp, 0) are rounding noise
    mi_clamp: float = 1e-10
    feasibility: float = 1e-9
    vertex: float = 1e-7
    redundancy: float = 1e-8
    pivot: float = 1e-10
    dedup_rhs: float = 1e-12


TOL = Tolerances()


def parse_overrides(text: str) -> dict[str, float]:
    text = text.strip()
    if not text:
        return {}
    names = {f.name for f in dataclasses.fields(Tolerances)}
    out = {}
    if "=" not in text:
        return {"feasibility": float(text)}
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in names:
            raise ValueError(f"unknown tolerance {key!r}; expected one of {sorted(names)}")
        out[key] = float(value)
    return out


def apply_overrides(overrides: dict[str, float]) -> None:
    for key, value in overrides.items():
        if value <= 0:
            raise ValueError(f"tolerance {key} must be positive, got {value}")
        setattr(TOL, key, value)


def load_env() -> None:
    """Apply ``MACWT_TOL`` if it is set."""
    text = os.environ.get(ENV_VAR)
    if text:
        apply_overrides(parse_overrides(text))


def reset() -> None:
    for f in dataclasses.fields(Tolerances):
        setattr(TOL, f.name, f.default)
