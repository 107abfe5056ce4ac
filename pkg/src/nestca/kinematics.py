"""Propagation speeds of shifts and of signals in nested orthogonal frames.

A shift ``(dr, dt)`` moves a signal at ``dr / dt`` lattice units per step.
With a limiting speed ``u``, a signal that already moves at ``v`` in the
outer frame has ``u * sqrt(1 - v**2 / u**2)`` left for the (orthogonal)
nested frame; each further level subtracts its own squared speed as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from nestca.spacetime import Shift


class SpeedExceedsLimit(ValueError):
    """The summed squared level speeds exceed ``u**2``."""


@dataclass(frozen=True)
class Speed:
    components: tuple[float, ...]
    magnitude: float


@dataclass(frozen=True)
class NestedSpeedSpec:
    u: float
    level_speeds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "level_speeds", tuple(float(v) for v in self.level_speeds))
        if not self.u > 0:
            raise ValueError(f"u must be positive, got {self.u}")
        if any(not v >= 0 for v in self.level_speeds):
            raise ValueError(f"level speeds must be >= 0, got {self.level_speeds}")


def shift_speed(shift: Shift) -> Speed:
    comps = tuple(Fraction(d, shift.dt) for d in shift.dr)
    return Speed(tuple(float(c) for c in comps), math.sqrt(float(sum(c * c for c in comps))))


def nested_speed(spec: NestedSpeedSpec, level: int) -> float:
    """Effective propagation speed at nesting ``level`` (0 = outermost).

    Level 0 is the raw speed of the first level; level ``n >= 1`` is
    ``u * sqrt(1 - (v_1**2 + ... + v_n**2) / u**2)``.
    """
    speeds = spec.level_speeds
    if level < 0 or level > len(speeds) or not speeds:
        raise ValueError(f"level {level} needs at least {max(level, 1)} level speeds, have {len(speeds)}")
    if level == 0:
        return speeds[0]
    ratio = math.fsum(v * v for v in speeds[:level]) / spec.u**2
    if ratio > 1:
        raise SpeedExceedsLimit(
            f"sum of squared speeds {speeds[:level]} exceeds u**2 = {spec.u ** 2}"
        )
    return spec.u * math.sqrt(1 - ratio)


@dataclass(frozen=True)
class SpeedRow:
    level: int
    shift_index: int
    raw_speed: float
    effective_speed: float
    flag: str = ""


def speed_table(nested, u: float) -> list[SpeedRow]:
    """Per-level, per-shift speeds of a (possibly nested) automaton.

    Shift ``i`` at level ``n`` is paired with shift ``i`` of every outer
    level; its effective speed uses those outer raw speeds. Problems are
    flagged rather than raised: ``exceeds_limit`` or ``unpaired``.
    """
    levels = list(nested.levels()) if hasattr(nested, "levels") else [nested]
    raw = [[shift_speed(s).magnitude for s in lvl.structure.state_shifts] for lvl in levels]
    rows = []
    for n, speeds in enumerate(raw):
        for i, v in enumerate(speeds):
            if n == 0:
                rows.append(SpeedRow(0, i, v, v, "exceeds_limit" if v > u else ""))
                continue
            if any(i >= len(outer) for outer in raw[:n]):
                rows.append(SpeedRow(n, i, v, math.nan, "unpaired"))
                continue
            spec = NestedSpeedSpec(u, tuple(outer[i] for outer in raw[:n]))
            try:
                rows.append(SpeedRow(n, i, v, nested_speed(spec, n)))
            except SpeedExceedsLimit:
                rows.append(SpeedRow(n, i, v, math.nan, "exceeds_limit"))
    return rows


def rationalize_speed(target: float, max_dt: int) -> tuple[Shift, float]:
    """Closest lattice shift ``(dr, dt)`` with ``dt <= max_dt`` to ``target``.

    Ties go to the smaller ``dt``, then the smaller ``|dr|``. Distances are
    compared exactly; a float target is read as its shortest decimal form,
    so 0.8 means 4/5.
    """
    if max_dt < 1:
        raise ValueError("max_dt must be >= 1")
    goal = Fraction(repr(target)) if isinstance(target, float) else Fraction(target)
    best = None
    for dt in range(1, max_dt + 1):
        lo = math.floor(goal * dt)
        for dr in (lo, lo + 1):
            key = (abs(Fraction(dr, dt) - goal), dt, abs(dr))
            if best is None or key < best:
                best = key
                choice = (dr, dt)
    return Shift((choice[0],), choice[1]), float(best[0])

