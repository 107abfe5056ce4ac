"""Finite discrete space-time frames, shifts and block indexing.

A frame is a finite lattice (any number of axes) with a boundary rule and a
time horizon. Shifts point strictly backwards in time. A ``BlockIndex``
identifies positions ``1..k`` of a tuple with the points of an inner
space-time block, time-major and then row-major over space.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

PERIODIC = "periodic"
FIXED = "fixed"

Coord = tuple[int, ...]


@dataclass(frozen=True)
class SpaceTimeFrame:
    extents: tuple[int, ...]
    horizon: int = 1
    boundary: str = PERIODIC
    fixed_symbol: int = 0

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))
        if not self.extents:
            raise ValueError("a frame needs at least one spatial axis")
        if any(e < 1 for e in self.extents):
            raise ValueError(f"extents must be >= 1, got {self.extents}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.boundary not in (PERIODIC, FIXED):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def dims(self) -> int:
        return len(self.extents)

    @property
    def cells(self) -> int:
        return math.prod(self.extents)

    @property
    def block_size(self) -> int:
        return self.cells * self.horizon

    def points(self):
        """All lattice points in row-major order."""
        return itertools.product(*(range(e) for e in self.extents))


@dataclass(frozen=True)
class Shift:
    dr: tuple[int, ...]
    dt: int = 1

    def __post_init__(self):
        dr = (self.dr,) if isinstance(self.dr, (int, np.integer)) else self.dr
        object.__setattr__(self, "dr", tuple(int(x) for x in dr))
        if self.dt < 1:
            raise ValueError(f"shift dt must be >= 1 (got {self.dt})")

    def __neg__(self) -> Shift:
        # Only the spatial part is negated; used for periodic round trips.
        return Shift(tuple(-x for x in self.dr), self.dt)


@dataclass(frozen=True)
class ShiftStructure:
    state_shifts: tuple[Shift, ...]
    input_shifts: tuple[Shift, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "state_shifts", tuple(self.state_shifts))
        object.__setattr__(self, "input_shifts", tuple(self.input_shifts))
        if not self.state_shifts:
            raise ValueError("a shift structure needs at least one state shift")
        dims = {len(s.dr) for s in self.state_shifts + self.input_shifts}
        if len(dims) != 1:
            raise ValueError(f"shifts disagree on spatial dimension: {sorted(dims)}")

    @property
    def k(self) -> int:
        return len(self.state_shifts)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.input_shifts)

    @property
    def dims(self) -> int:
        return len(self.state_shifts[0].dr)

    @property
    def depth(self) -> int:
        """History depth needed to evaluate one step (max dt)."""
        return max(s.dt for s in self.state_shifts + self.input_shifts)


@dataclass(frozen=True)
class FixedSymbol:
    """Sentinel for a neighbour that lies outside a fixed-boundary lattice."""

    value: int


def resolve(frame: SpaceTimeFrame, r: Sequence[int], shift: Shift) -> Coord | FixedSymbol:
    """Source point ``r - dr`` completed by the frame's boundary rule."""
    if len(r) != frame.dims or len(shift.dr) != frame.dims:
        raise ValueError("coordinate/shift dimension does not match frame")
    src = tuple(ri - di for ri, di in zip(r, shift.dr))
    if frame.boundary == PERIODIC:
        return tuple(s % e for s, e in zip(src, frame.extents))
    if all(0 <= s < e for s, e in zip(src, frame.extents)):
        return src
    return FixedSymbol(frame.fixed_symbol)


def shift_slice(frame: SpaceTimeFrame, values: np.ndarray, dr: Sequence[int],
                fill: int | None = None) -> np.ndarray:
    """Whole-slice form of :func:`resolve`: ``out[r] = values[r - dr]``.

    ``values`` has the lattice on its leading ``frame.dims`` axes; any
    trailing axes (state components) ride along. ``fill`` overrides the
    boundary symbol (fixed boundaries only).
    """
    axes = tuple(range(frame.dims))
    if frame.boundary == PERIODIC:
        return np.roll(values, tuple(dr), axis=axes)
    out = np.full_like(values, frame.fixed_symbol if fill is None else fill)
    src, dst = [], []
    for d, e in zip(dr, frame.extents):
        if abs(d) >= e:
            return out
        src.append(slice(max(0, -d), e - max(0, d)))
        dst.append(slice(max(0, d), e - max(0, -d)))
    out[tuple(dst)] = values[tuple(src)]
    return out


@dataclass(frozen=True)
class BlockIndex:
    """Bijection between tuple positions ``1..k`` and points of ``frame``'s block."""

    frame: SpaceTimeFrame

    @property
    def k(self) -> int:
        return self.frame.block_size

    def point(self, pos: int) -> tuple[Coord, int]:
        if not 1 <= pos <= self.k:
            raise IndexError(f"block position {pos} outside 1..{self.k}")
        t, flat = divmod(pos - 1, self.frame.cells)
        r = np.unravel_index(flat, self.frame.extents)
        return tuple(int(x) for x in r), t

    def position(self, r: Sequence[int], t: int) -> int:
        if not 0 <= t < self.frame.horizon:
            raise IndexError(f"block time {t} outside 0..{self.frame.horizon - 1}")
        if len(r) != self.frame.dims or not all(0 <= x < e for x, e in zip(r, self.frame.extents)):
            raise IndexError(f"block point {tuple(r)} outside extents {self.frame.extents}")
        flat = int(np.ravel_multi_index(tuple(r), self.frame.extents))
        return t * self.frame.cells + flat + 1

    def to_window(self, block: np.ndarray) -> np.ndarray:
        """Reshape a ``(k, ...)`` block into a ``(horizon, *extents, ...)`` window."""
        block = np.asarray(block)
        if block.shape[0] != self.k:
            raise ValueError(f"block has {block.shape[0]} entries, expected {self.k}")
        return block.reshape((self.frame.horizon, *self.frame.extents, *block.shape[1:]))

    def to_block(self, window: np.ndarray) -> np.ndarray:
        window = np.asarray(window)
        lead = (self.frame.horizon, *self.frame.extents)
        if window.shape[: len(lead)] != lead:
            raise ValueError(f"window shape {window.shape} does not start with {lead}")
        return window.reshape((self.k, *window.shape[len(lead):]))
