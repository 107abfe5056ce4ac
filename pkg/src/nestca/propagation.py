"""Closed-form signal propagation over real-valued nested coordinates.

A nested coordinate is a list of ``(r, t)`` pairs, outermost level first.
One propagation step reads the field at a back-translated coordinate: level
``j`` moves back by ``speed_j * delay_j`` in space (along the first axis)
and ``delay_j`` in time, where ``speed_0`` is the raw outer speed and deeper
levels use the effective nested speeds from :mod:`nestca.kinematics`.

Evaluators:

* :func:`propagate_pure`: transport only;
* :func:`propagate_processed`: transport with a unary rule applied per step;
* :func:`propagate_multi`: ``k`` signals of different speeds combined by a
  ``k``-ary rule, two levels;
* :func:`propagate_general` / :func:`general_formula`: ``k`` arguments with
  per-argument speeds at every level (multi-step / single step).
"""
from __future__ import annotations

import functools
import inspect
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from nestca.kinematics import NestedSpeedSpec, nested_speed

MAX_LEVELS = 3


@dataclass(frozen=True)
class Level:
    r: tuple[float, ...]
    t: float


@dataclass(frozen=True)
class NestedCoordinate:
    levels: tuple[Level, ...]

    def __post_init__(self):
        if not 1 <= len(self.levels) <= MAX_LEVELS:
            raise ValueError(f"nested coordinates have 1..{MAX_LEVELS} levels")

    @classmethod
    def of(cls, *pairs) -> NestedCoordinate:
        """``NestedCoordinate.of((r, t), (r', t'), ...)``; ``r`` may be a scalar."""
        levels = []
        for r, t in pairs:
            r = (float(r),) if np.isscalar(r) else tuple(float(x) for x in r)
            levels.append(Level(r, float(t)))
        return cls(tuple(levels))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def spatial(self) -> tuple[float, ...]:
        return tuple(x for lvl in self.levels for x in lvl.r)

    def moved(self, offsets: Sequence[tuple[float, float]]) -> NestedCoordinate:
        """Subtract ``(dr, dt)`` per level; ``dr`` acts on the first axis."""
        out = []
        for lvl, (dr, dt) in zip(self.levels, offsets):
            out.append(Level((lvl.r[0] - dr, *lvl.r[1:]), lvl.t - dt))
        return NestedCoordinate(tuple(out))

    def isclose(self, other: NestedCoordinate, tol: float = 1e-12) -> bool:
        if self.depth != other.depth:
            return False
        return all(
            abs(a.t - b.t) <= tol and np.allclose(a.r, b.r, rtol=0, atol=tol)
            for a, b in zip(self.levels, other.levels)
        )


@dataclass(frozen=True)
class NestedField:
    """Base field ``s0``: a total map from nested coordinates to symbols."""

    evaluator: Callable[[NestedCoordinate], int]
    levels: int

    def __call__(self, coord: NestedCoordinate) -> int:
        return self.evaluator(coord)


def delta(site: Sequence, levels: int, tol: float = 1e-9, on: int = 1, off: int = 0) -> NestedField:
    """``on`` where the spatial position matches ``site`` level by level.

    ``site`` gives one position per level (scalar or vector); levels beyond
    ``len(site)`` are not constrained. Time is ignored.
    """
    site = [np.atleast_1d(np.asarray(s, dtype=float)) for s in site]

    def value(coord: NestedCoordinate) -> int:
        for s, lvl in zip(site, coord.levels):
            if np.max(np.abs(np.asarray(lvl.r) - s)) > tol:
                return off
        return on

    return NestedField(value, levels)


def step(threshold: float, levels: int, level: int = 0, below: int = 0, above: int = 1) -> NestedField:
    return NestedField(lambda c: above if c.levels[level].r[0] >= threshold else below, levels)


def grid(samples: Mapping[tuple[float, ...], int], levels: int, tol: float = 1e-9,
         default: int | None = None, period: Sequence[float] | None = None) -> NestedField:
    """Nearest-sample lookup keyed by the concatenated spatial coordinates.

    A query farther than ``tol`` from every sample returns ``default`` (or
    raises ``KeyError`` when ``default`` is None). ``period`` wraps each key
    component first, for lattice fields with periodic boundaries.
    """
    keys = np.array(list(samples.keys()), dtype=float)
    vals = list(samples.values())
    per = None if period is None else np.asarray(period, dtype=float)

    def value(coord: NestedCoordinate) -> int:
        q = np.asarray(coord.spatial(), dtype=float)
        d = keys - q
        if per is not None:
            d = (d + per / 2) % per - per / 2
        err = np.max(np.abs(d), axis=1)
        i = int(np.argmin(err))
        if err[i] <= tol:
            return vals[i]
        if default is None:
            raise KeyError(f"no sample within {tol} of {tuple(q)}")
        return default

    return NestedField(value, levels)


def level_speeds(spec: NestedSpeedSpec, levels: int) -> list[float]:
    """Speeds used at levels ``0..levels-1``: raw outer speed, then effective."""
    return [nested_speed(spec, j) for j in range(levels)]


def _delays(delays: Sequence[float] | None, levels: int) -> list[float]:
    if delays is None:
        return [1.0] * levels
    if len(delays) < levels:
        raise ValueError(f"need a delay for each of {levels} levels")
    return [float(d) for d in delays[:levels]]


def back_translate(spec: NestedSpeedSpec, coord: NestedCoordinate, steps: int,
                   delays: Sequence[float] | None = None) -> NestedCoordinate:
    """Closed form of ``steps`` back-translations."""
    speeds = level_speeds(spec, coord.depth)
    ds = _delays(delays, coord.depth)
    return coord.moved([(steps * v * d, steps * d) for v, d in zip(speeds, ds)])


def back_translate_loop(spec: NestedSpeedSpec, coord: NestedCoordinate, steps: int,
                        delays: Sequence[float] | None = None) -> NestedCoordinate:
    speeds = level_speeds(spec, coord.depth)
    ds = _delays(delays, coord.depth)
    for _ in range(steps):
        coord = coord.moved([(v * d, d) for v, d in zip(speeds, ds)])
    return coord


def propagate_pure(field: NestedField, spec: NestedSpeedSpec, coord: NestedCoordinate,
                   steps: int, delays: Sequence[float] | None = None) -> int:
    return field(back_translate(spec, coord, steps, delays))


def propagate_processed(field: NestedField, spec: NestedSpeedSpec, rule: Callable[[int], int],
                        coord: NestedCoordinate, steps: int,
                        delays: Sequence[float] | None = None) -> int:
    value = field(back_translate(spec, coord, steps, delays))
    for _ in range(steps):
        value = rule(value)
    return value


def _check_arity(rule: Callable, k: int) -> None:
    try:
        inspect.signature(rule).bind(*range(k))
    except TypeError as exc:
        raise ValueError(f"rule does not accept {k} arguments") from exc
    except ValueError:  # builtins without a signature
        pass


def _argument_offsets(args: Sequence[NestedSpeedSpec], levels: int,
                      delays: Sequence[Sequence[float]] | None) -> list[list[tuple[float, float]]]:
    if delays is not None and len(delays) != len(args):
        raise ValueError("need one delay list per argument")
    out = []
    for i, spec in enumerate(args):
        speeds = level_speeds(spec, levels)
        ds = _delays(None if delays is None else delays[i], levels)
        out.append([(v * d, d) for v, d in zip(speeds, ds)])
    return out


def propagate_general(field: NestedField, rule: Callable[..., int], args: Sequence[NestedSpeedSpec],
                      coord: NestedCoordinate, steps: int,
                      delays: Sequence[Sequence[float]] | None = None) -> int:
    """Unroll ``s_n(c) = F(s_{n-1}(T_1 c), ..., s_{n-1}(T_k c))`` with ``s_0 = field``.

    Back-translations commute, so a subproblem is identified by how often
    each argument's translation has been applied; coordinates are rebuilt
    from those counts in closed form.
    """
    k = len(args)
    _check_arity(rule, k)
    offsets = _argument_offsets(args, coord.depth, delays)

    def at(counts: tuple[int, ...]) -> NestedCoordinate:
        return coord.moved([
            (sum(a * offsets[i][j][0] for i, a in enumerate(counts)),
             sum(a * offsets[i][j][1] for i, a in enumerate(counts)))
            for j in range(coord.depth)
        ])

    @functools.lru_cache(maxsize=None)
    def s(remaining: int, counts: tuple[int, ...]) -> int:
        if remaining == 0:
            return field(at(counts))
        return rule(*(s(remaining - 1, counts[:i] + (counts[i] + 1,) + counts[i + 1:]) for i in range(k)))

    return s(steps, (0,) * k)


def propagate_multi(field: NestedField, u: float, speeds: Sequence[float], rule: Callable[..., int],
                    coord: NestedCoordinate, steps: int,
                    delays: Sequence[Sequence[float]] | None = None) -> int:
    """``k`` signals at level-0 speeds ``speeds``, each with its own level-1 speed."""
    if coord.depth > 2:
        raise ValueError("multi-signal propagation uses at most two levels")
    return propagate_general(field, rule, [NestedSpeedSpec(u, (v,)) for v in speeds], coord, steps, delays)


def general_formula(field: NestedField, rule: Callable[..., int], args: Sequence[NestedSpeedSpec],
                    coord: NestedCoordinate, delays: Sequence[Sequence[float]] | None = None) -> int:
    """One step: ``F`` over ``k`` arguments, each moved back at every level at once."""
    _check_arity(rule, len(args))
    offsets = _argument_offsets(args, coord.depth, delays)
    return rule(*(field(coord.moved(off)) for off in offsets))


@dataclass(frozen=True)
class TraceRow:
    step: int
    coord: NestedCoordinate
    value: int


def trace(case: str, field: NestedField, coord: NestedCoordinate, steps: int, *, u: float,
          speeds: Sequence[Sequence[float]], rule: Callable[..., int] | None = None,
          delays: Sequence[Sequence[float]] | None = None) -> list[TraceRow]:
    """Rows for steps ``1..steps``.

    ``speeds`` holds one level-speed list per argument (``[[v]]`` for case
    ``a``, ``[[v, w]]`` for ``b``, ``[[v1], [v2], ...]`` for ``c``). Cases
    with several arguments emit one row per argument per step, carrying that
    argument's pure back-translated coordinate; the value column is the full
    evaluator result after ``n`` steps.
    """
    specs = [NestedSpeedSpec(u, tuple(v)) for v in speeds]
    if case in ("a", "b") and len(specs) != 1:
        raise ValueError(f"case {case} takes exactly one signal")
    rows = []
    for n in range(1, steps + 1):
        if case == "a":
            value = propagate_pure(field, specs[0], coord, n, delays and delays[0])
        elif case == "b":
            value = propagate_processed(field, specs[0], rule, coord, n, delays and delays[0])
        elif case == "c":
            value = propagate_multi(field, u, [s[0] for s in speeds], rule, coord, n, delays)
        elif case == "general":
            value = propagate_general(field, rule, specs, coord, n, delays)
        else:
            raise ValueError(f"unknown case {case!r}")
        for i, spec in enumerate(specs):
            moved = back_translate(spec, coord, n, None if delays is None else delays[i])
            rows.append(TraceRow(n, moved, value))
    return rows
