"""Nested cellular automata.

A node is either a leaf (it carries a :class:`CellRule`) or wraps an inner
node whose global map serves as this level's cell function. With an inner
node the cell state is a block of ``k = |R'| * horizon'`` inner cells, each
as wide as the inner node's own state. One outer step of a cell:

1. gather ``k`` block entries from the neighbours named by the shift
   structure (entry ``i`` comes from neighbour ``i``, block position
   ``taps[i]``);
2. read the gathered block as the inner history window (time-major,
   row-major) and evolve the inner automaton ``horizon'`` fresh steps;
3. the evolved ``horizon'`` slices, in the same order, are the new block.

Inner levels are autonomous: no input shifts below the root.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from nestca.automaton import (
    DEFAULT_MAX_CONFIGS,
    OUTSIDE_INPUT,
    Alphabet,
    Automaton,
    CapExceeded,
    CellRule,
    EquivalenceReport,
    Trajectory,
    check_history,
    check_taps,
    compare_trajectories,
    default_taps,
    enumerate_windows,
    evaluate_global,
    initial_window,
    inputs_at,
    random_windows,
)
from nestca.spacetime import BlockIndex, FixedSymbol, ShiftStructure, SpaceTimeFrame, resolve


@dataclass(frozen=True)
class NestedAutomaton:
    frame: SpaceTimeFrame
    structure: ShiftStructure
    rule: CellRule | None = None
    inner: NestedAutomaton | None = None
    taps: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.rule is None) == (self.inner is None):
            raise ValueError("a level carries either a cell rule (leaf) or an inner automaton")
        s = self.structure
        if s.dims != self.frame.dims:
            raise ValueError(f"shifts are {s.dims}-D but the frame is {self.frame.dims}-D")
        if s.depth > self.frame.horizon:
            raise ValueError(f"max shift dt {s.depth} exceeds frame horizon {self.frame.horizon}")
        if self.inner is not None:
            block = self.inner.frame.block_size
            if s.k != block:
                raise ValueError(
                    f"k={s.k} does not match the inner block size "
                    f"{block} = {self.inner.frame.cells} cells x horizon {self.inner.frame.horizon}"
                )
            if s.l:
                raise ValueError("levels with an inner automaton take no input shifts")
            _require_autonomous(self.inner)
        elif (self.rule.k, self.rule.l) != (s.k, s.l):
            raise ValueError(f"rule arity ({self.rule.k}, {self.rule.l}) does not match structure ({s.k}, {s.l})")
        if self.frame.fixed_symbol >= self.alphabet.states:
            raise ValueError(f"boundary symbol {self.frame.fixed_symbol} is not a state symbol")
        taps = default_taps(s.k, self.tap_range) if self.taps is None else tuple(self.taps)
        check_taps(taps, s.k, self.tap_range)
        object.__setattr__(self, "taps", taps)

    @property
    def is_leaf(self) -> bool:
        return self.inner is None

    @property
    def tap_range(self) -> int:
        """Number of addressable state components (leaf) or block positions."""
        return self.rule.m if self.is_leaf else self.structure.k

    @property
    def element_width(self) -> int:
        return 1 if self.is_leaf else self.inner.width

    @property
    def width(self) -> int:
        """Cell state width in base symbols."""
        return self.rule.m if self.is_leaf else self.structure.k * self.inner.width

    @property
    def depth(self) -> int:
        return 1 if self.is_leaf else 1 + self.inner.depth

    @property
    def alphabet(self) -> Alphabet:
        return self.rule.alphabet if self.is_leaf else self.inner.alphabet

    @property
    def block_index(self) -> BlockIndex | None:
        return None if self.is_leaf else BlockIndex(self.inner.frame)

    def levels(self):
        node = self
        while node is not None:
            yield node
            node = node.inner

    def leaf_rule(self) -> CellRule:
        return list(self.levels())[-1].rule


def _require_autonomous(node: NestedAutomaton) -> None:
    for level in node.levels():
        if level.structure.l:
            raise ValueError("inner levels must be autonomous (no input shifts)")


def leaf(frame: SpaceTimeFrame, structure: ShiftStructure, rule: CellRule,
         taps: Sequence[int] | None = None) -> NestedAutomaton:
    return NestedAutomaton(frame, structure, rule=rule, taps=None if taps is None else tuple(taps))


def compose_nested(outer_structure: ShiftStructure, outer_frame: SpaceTimeFrame,
                   inner: NestedAutomaton, taps: Sequence[int] | None = None) -> NestedAutomaton:
    return NestedAutomaton(outer_frame, outer_structure, inner=inner,
                           taps=None if taps is None else tuple(taps))


def as_nested(automaton: Automaton) -> NestedAutomaton:
    return leaf(automaton.frame, automaton.structure, automaton.rule, automaton.taps)


def cell_function_of(inner: NestedAutomaton, block) -> np.ndarray:
    """The outer cell function realised by ``inner``'s global map.

    ``block`` holds ``k`` entries (flat, or ``(k, inner.width)``); the result
    has the same shape.
    """
    block = np.asarray(block, dtype=np.int64)
    bi = BlockIndex(inner.frame)
    shaped = block.reshape(bi.k, inner.width) if block.ndim == 1 else block
    if shaped.shape != (bi.k, inner.width):
        raise ValueError(f"block of shape {block.shape} does not hold {bi.k} entries of width {inner.width}")
    h = inner.frame.horizon
    traj = evaluate_nested(inner, bi.to_window(shaped), h)
    return bi.to_block(traj.states[h:]).reshape(block.shape)


def _gather(node: NestedAutomaton, states: np.ndarray, t: int, r) -> np.ndarray:
    w = node.element_width
    out = np.empty((node.structure.k, w), dtype=np.int64)
    for i, (shift, tap) in enumerate(zip(node.structure.state_shifts, node.taps)):
        src = resolve(node.frame, r, shift)
        if isinstance(src, FixedSymbol):
            out[i] = src.value
        else:
            out[i] = states[(t - shift.dt, *src)][(tap - 1) * w:tap * w]
    return out


def step_nested(nested: NestedAutomaton, history: Trajectory, t: int):
    """Cell-by-cell step at this level; cell functions recurse into inner levels."""
    s = nested.structure
    check_history(s, t, history.states.shape[0])
    frame = nested.frame
    new = np.empty((*frame.extents, nested.width), dtype=np.int64)
    out = np.empty((*frame.extents, s.l), dtype=np.int64)
    for r in frame.points():
        args = _gather(nested, history.states, t, r)
        if nested.is_leaf:
            xs = []
            for shift in s.input_shifts:
                src = resolve(frame, r, shift)
                xs.append(OUTSIDE_INPUT if isinstance(src, FixedSymbol)
                          else int(inputs_at(history, t - shift.dt)[src]))
            states = args[:, 0].tolist()
            new[r] = nested.rule.transition(states, xs)
            out[r] = nested.rule.output(states, xs)
        else:
            new[r] = cell_function_of(nested.inner, args).reshape(-1)
            out[r] = ()
    return new, out


def evaluate_nested(nested: NestedAutomaton, initial, steps: int, inputs=None) -> Trajectory:
    window = initial_window(ShapeView(nested), initial)
    h = window.shape[0]
    states = np.zeros((h + steps, *window.shape[1:]), dtype=np.int64)
    states[:h] = window
    if inputs is not None:
        inputs = np.asarray(inputs, dtype=np.int64)
    outputs = np.zeros((steps, *nested.frame.extents, nested.structure.l), dtype=np.int64)
    traj = Trajectory(nested.frame, states, h, inputs, outputs)
    for t in range(h, h + steps):
        traj.states[t], traj.outputs[t - h] = step_nested(nested, traj, t)
    return traj


class ShapeView:
    """Just enough of an Automaton for :func:`initial_window`."""

    def __init__(self, node: NestedAutomaton):
        self.frame, self.structure = node.frame, node.structure
        self.width, self.alphabet = node.width, node.alphabet


def flatten(nested: NestedAutomaton, mode: str = "auto",
            max_table: int = DEFAULT_MAX_CONFIGS) -> Automaton:
    """Equivalent single-level automaton with state width ``nested.width``.

    Each outer shift is repeated once per component of a block entry, so the
    flat rule sees all ``k * w`` gathered symbols. The flat rule runs the
    flattened inner automaton through :func:`evaluate_global`. ``mode`` is
    ``"table"`` (explicit table, ``CapExceeded`` beyond ``max_table`` rows),
    ``"synthesized"`` (exact callable) or ``"auto"``.
    """
    if mode not in ("auto", "table", "synthesized"):
        raise ValueError(f"unknown flatten mode {mode!r}")
    if nested.is_leaf:
        return Automaton(nested.frame, nested.structure, nested.rule, nested.taps)
    inner_flat = flatten(nested.inner, mode, max_table)
    k, w = nested.structure.k, nested.inner.width
    shifts = tuple(sh for sh in nested.structure.state_shifts for _ in range(w))
    taps = tuple((tap - 1) * w + j + 1 for tap in nested.taps for j in range(w))
    bi = BlockIndex(nested.inner.frame)
    h = nested.inner.frame.horizon
    alphabet = nested.alphabet

    @functools.lru_cache(maxsize=1 << 16)
    def cell(args: tuple[int, ...]) -> tuple[int, ...]:
        window = bi.to_window(np.asarray(args, dtype=np.int64).reshape(k, w))
        traj = evaluate_global(inner_flat, window, h)
        return tuple(bi.to_block(traj.states[h:]).reshape(-1).tolist())

    n = k * w
    rows = alphabet.states**n
    if mode == "table" or (mode == "auto" and rows <= max_table):
        if rows > max_table:
            raise CapExceeded(f"explicit table needs {rows} rows, cap is {max_table}")
        table = tuple(cell(args) for args in itertools.product(range(alphabet.states), repeat=n))
        rule = CellRule("table", n, 0, n, alphabet, table_f=table)
    else:
        rule = CellRule("synthesized", n, 0, n, alphabet, func=cell)
    return Automaton(nested.frame, ShiftStructure(shifts), rule, taps)


def validate_lowest_level(nested: NestedAutomaton) -> tuple[str, ...] | None:
    """Path to the first level that has both a rule and an inner level, else ``None``."""
    path: tuple[str, ...] = ("root",)
    node = nested
    while node is not None:
        if node.rule is not None and node.inner is not None:
            return path
        node = node.inner
        path += ("inner",)
    return None



def verify_flatten(nested: NestedAutomaton, mode: str = "exhaustive", steps: int = 4,
                   count: int = 1000, seed: int = 0,
                   max_configs: int = DEFAULT_MAX_CONFIGS) -> EquivalenceReport:
    """Compare :func:`evaluate_nested` with the staged run of :func:`flatten`."""
    flat = flatten(nested, "auto", max_configs)
    shape = (nested.structure.depth, *nested.frame.extents, nested.width)
    n_s = nested.alphabet.states
    if mode == "exhaustive":
        windows = enumerate_windows(shape, n_s, max_configs)
    elif mode == "random":
        windows = random_windows(shape, n_s, count, seed)
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    report = EquivalenceReport(mode, 0, steps)
    for i, window in enumerate(windows):
        compare_trajectories(evaluate_nested(nested, window, steps),
                             evaluate_global(flat, window, steps), i, report)
        report.configurations += 1
    return report
