"""Flat cellular automata.

One step can be computed two ways:

* ``step_direct`` walks every cell, resolves each shift by hand and calls the
  rule on the gathered scalars;
* ``build_shift_stage`` followed by ``apply_pointwise_stage`` first builds the
  ``k + l`` shifted copies of the history (whole-slice array shifts) and then
  applies the rule to all cells at once.

``evaluate_global`` iterates the staged form. ``verify_factorization``
compares it against repeated ``step_direct``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from nestca.spacetime import FixedSymbol, ShiftStructure, SpaceTimeFrame, resolve, shift_slice

BUILTINS = ("identity", "xor", "sum_mod", "threshold", "projection", "constant")

DEFAULT_MAX_CONFIGS = 1 << 20

# Input symbol read from beyond a fixed boundary (the boundary symbol is a state).
OUTSIDE_INPUT = 0


class CapExceeded(ValueError):
    pass


class InsufficientHistory(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    states: int = 2
    inputs: int = 1
    outputs: int = 1

    def __post_init__(self):
        if min(self.states, self.inputs, self.outputs) < 1:
            raise ValueError(f"alphabet sizes must be >= 1: {self}")


@dataclass(frozen=True)
class CellRule:
    """Transition ``F: S^k x X^l -> S^m`` and output ``G: S^k x X^l -> Y^l``.

    ``name`` is one of :data:`BUILTINS`, ``"table"`` (dense tables keyed by the
    mixed-radix index of the arguments, first state argument most significant)
    or ``"synthesized"`` (an exact Python callable, e.g. from flattening).
    Built-in output functions echo the input arguments, reduced mod ``|Y|``.
    """

    name: str
    k: int
    l: int = 0  # noqa: E741
    m: int = 1
    alphabet: Alphabet = Alphabet()
    params: tuple[tuple[str, int], ...] = ()
    table_f: tuple[tuple[int, ...], ...] | None = None
    table_g: tuple[tuple[int, ...], ...] | None = None
    func: Callable[[tuple[int, ...]], tuple[int, ...]] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if self.k < 1 or self.l < 0 or self.m < 1:
            raise ValueError(f"bad arities k={self.k} l={self.l} m={self.m}")
        p = dict(self.params)
        n_s = self.alphabet.states
        if self.name == "table":
            self._check_table()
        elif self.name == "synthesized":
            if self.func is None:
                raise ValueError("synthesized rule needs a callable")
        elif self.name == "identity":
            if self.m != self.k:
                raise ValueError("identity rule needs m == k")
        elif self.name == "xor":
            if n_s != 2:
                raise ValueError("xor rule needs a binary state alphabet")
        elif self.name == "threshold":
            if "theta" not in p or n_s < 2:
                raise ValueError("threshold rule needs theta and |S| >= 2")
        elif self.name == "projection":
            if not 1 <= p.get("j", 0) <= self.k:
                raise ValueError(f"projection index must lie in 1..{self.k}")
        elif self.name == "constant":
            if not 0 <= p.get("c", -1) < n_s:
                raise ValueError("constant symbol outside the state alphabet")
        elif self.name != "sum_mod":
            raise ValueError(f"unknown rule {self.name!r}")
        if self.name not in ("identity", "table", "synthesized") and self.m != 1:
            raise ValueError(f"built-in {self.name!r} produces a single state component")

    def _check_table(self):
        n = self.domain_size
        if self.table_f is None or len(self.table_f) != n:
            raise ValueError(f"F table needs {n} rows for k={self.k}, l={self.l}")
        for row in self.table_f:
            if len(row) != self.m or not all(0 <= v < self.alphabet.states for v in row):
                raise ValueError(f"F table row {row} is not in S^{self.m}")
        if self.l:
            if self.table_g is None or len(self.table_g) != n:
                raise ValueError(f"G table needs {n} rows")
            for row in self.table_g:
                if len(row) != self.l or not all(0 <= v < self.alphabet.outputs for v in row):
                    raise ValueError(f"G table row {row} is not in Y^{self.l}")

    @property
    def domain_size(self) -> int:
        return self.alphabet.states**self.k * self.alphabet.inputs**self.l

    def param(self, key: str) -> int:
        return dict(self.params)[key]

    # -- scalar evaluation (used by the direct route) -----------------------

    def index(self, states: Sequence[int], inputs: Sequence[int] = ()) -> int:
        idx = 0
        for s in states:
            idx = idx * self.alphabet.states + s
        for x in inputs:
            idx = idx * self.alphabet.inputs + x
        return idx

    def transition(self, states: Sequence[int], inputs: Sequence[int] = ()) -> tuple[int, ...]:
        states, inputs = tuple(states), tuple(inputs)
        if len(states) != self.k or len(inputs) != self.l:
            raise ValueError(f"expected {self.k}+{self.l} arguments, got {len(states)}+{len(inputs)}")
        name = self.name
        if name == "table":
            return self.table_f[self.index(states, inputs)]
        if name == "synthesized":
            return tuple(self.func(states + inputs))
        if name == "identity":
            return states
        if name == "xor":
            return (sum(states + inputs) % 2,)
        if name == "sum_mod":
            return (sum(states + inputs) % self.alphabet.states,)
        if name == "threshold":
            return (int(sum(states + inputs) >= self.param("theta")),)
        if name == "projection":
            return (states[self.param("j") - 1],)
        return (self.param("c"),)

    def output(self, states: Sequence[int], inputs: Sequence[int] = ()) -> tuple[int, ...]:
        if self.l == 0:
            return ()
        if self.name == "table":
            return self.table_g[self.index(states, inputs)]
        return tuple(x % self.alphabet.outputs for x in inputs)

    # -- vectorised evaluation (used by the staged route) -------------------

    def apply(self, state_args: np.ndarray, input_args: np.ndarray | None = None):
        """Apply ``(F, G)`` to ``n`` cells at once.

        ``state_args`` is ``(k, n)``, ``input_args`` is ``(l, n)``. Returns
        ``(new_states (n, m), outputs (n, l))``.
        """
        state_args = np.asarray(state_args, dtype=np.int64)
        n = state_args.shape[1]
        if input_args is None:
            input_args = np.zeros((self.l, n), dtype=np.int64)
        input_args = np.asarray(input_args, dtype=np.int64)
        if state_args.shape[0] != self.k or input_args.shape[0] != self.l:
            raise ValueError(
                f"expected {self.k}+{self.l} argument slices, got "
                f"{state_args.shape[0]}+{input_args.shape[0]}"
            )
        name = self.name
        everything = np.concatenate([state_args, input_args], axis=0)
        if name == "table":
            idx = np.zeros(n, dtype=np.int64)
            for row in state_args:
                idx = idx * self.alphabet.states + row
            for row in input_args:
                idx = idx * self.alphabet.inputs + row
            new = np.asarray(self.table_f, dtype=np.int64)[idx]
            if self.l:
                return new, np.asarray(self.table_g, dtype=np.int64)[idx]
            return new, np.zeros((n, 0), dtype=np.int64)
        if name == "synthesized":
            cache: dict[tuple[int, ...], tuple[int, ...]] = {}
            new = np.empty((n, self.m), dtype=np.int64)
            for c, args in enumerate(map(tuple, everything.T.tolist())):
                if args not in cache:
                    cache[args] = tuple(self.func(args))
                new[c] = cache[args]
        elif name == "identity":
            new = state_args.T.copy()
        elif name == "xor":
            new = np.bitwise_xor.reduce(everything & 1, axis=0)[:, None]
        elif name == "sum_mod":
            new = (everything.sum(axis=0) % self.alphabet.states)[:, None]
        elif name == "threshold":
            new = (everything.sum(axis=0) >= self.param("theta")).astype(np.int64)[:, None]
        elif name == "projection":
            new = state_args[self.param("j") - 1][:, None].copy()
        else:
            new = np.full((n, 1), self.param("c"), dtype=np.int64)
        return new, (input_args.T % self.alphabet.outputs)


def builtin(name: str, k: int, l: int = 0, alphabet: Alphabet = Alphabet(), **params) -> CellRule:  # noqa: E741
    m = k if name == "identity" else 1
    return CellRule(name, k, l, m, alphabet, tuple(sorted(params.items())))


def table_rule(f: Callable[..., Sequence[int] | int], k: int, l: int = 0, m: int = 1,
               alphabet: Alphabet = Alphabet(), g: Callable[..., Sequence[int]] | None = None) -> CellRule:
    """Tabulate a Python function over the whole argument domain."""
    domain = [range(alphabet.states)] * k + [range(alphabet.inputs)] * l
    rows_f, rows_g = [], []
    for args in itertools.product(*domain):
        out = f(*args)
        rows_f.append(tuple(out) if isinstance(out, Sequence) else (int(out),))
        if l:
            rows_g.append(tuple(g(*args)) if g else tuple(x % alphabet.outputs for x in args[k:]))
    return CellRule("table", k, l, m, alphabet, table_f=tuple(rows_f),
                    table_g=tuple(rows_g) if l else None)


@dataclass(frozen=True)
class Automaton:
    frame: SpaceTimeFrame
    structure: ShiftStructure
    rule: CellRule
    taps: tuple[int, ...] | None = None

    def __post_init__(self):
        s, r = self.structure, self.rule
        if (s.k, s.l) != (r.k, r.l):
            raise ValueError(f"rule arity ({r.k}, {r.l}) does not match structure ({s.k}, {s.l})")
        if s.dims != self.frame.dims:
            raise ValueError(f"shifts are {s.dims}-D but the frame is {self.frame.dims}-D")
        if s.depth > self.frame.horizon:
            raise ValueError(f"max shift dt {s.depth} exceeds frame horizon {self.frame.horizon}")
        if self.frame.fixed_symbol >= r.alphabet.states:
            raise ValueError(f"boundary symbol {self.frame.fixed_symbol} is not a state symbol")
        taps = default_taps(s.k, r.m) if self.taps is None else tuple(self.taps)
        check_taps(taps, s.k, r.m)
        object.__setattr__(self, "taps", taps)

    @property
    def width(self) -> int:
        return self.rule.m

    @property
    def alphabet(self) -> Alphabet:
        return self.rule.alphabet


def default_taps(k: int, m: int) -> tuple[int, ...]:
    return tuple(min(i, m) for i in range(1, k + 1))


def check_taps(taps: Sequence[int], k: int, m: int) -> None:
    if len(taps) != k:
        raise ValueError(f"need {k} taps, got {len(taps)}")
    bad = [t for t in taps if not 1 <= t <= m]
    if bad:
        raise ValueError(f"taps {bad} outside 1..{m}")


@dataclass
class Trajectory:
    """States ``(T, *extents, m)``; the first ``history`` slices are given.

    ``inputs`` is ``(T, *extents)`` or ``None`` (all zero). ``outputs`` holds
    the evolved slices only: ``(T - history, *extents, l)``.
    """

    frame: SpaceTimeFrame
    states: np.ndarray
    history: int
    inputs: np.ndarray | None = None
    outputs: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.states.shape[0] - self.history


def initial_window(automaton: Automaton, initial) -> np.ndarray:
    """Normalise an initial condition to ``(depth, *extents, m)``."""
    ext, m = automaton.frame.extents, automaton.width
    arr = np.asarray(initial, dtype=np.int64)
    if arr.shape == ext:
        arr = arr[None]
    if arr.ndim == len(ext) + 1 and m == 1 and arr.shape[1:] == ext:
        arr = arr[..., None]
    if arr.ndim == len(ext) and m > 1:
        arr = arr[None]
    if arr.shape[1:] != (*ext, m):
        raise ValueError(f"initial window shape {arr.shape} does not fit (*, {ext}, {m})")
    if arr.shape[0] < automaton.structure.depth:
        raise InsufficientHistory(
            f"initial window has {arr.shape[0]} slices, structure needs {automaton.structure.depth}"
        )
    if arr.min(initial=0) < 0 or arr.max(initial=0) >= automaton.alphabet.states:
        raise ValueError("initial window contains symbols outside the state alphabet")
    return arr


def check_history(structure: ShiftStructure, t: int, available: int) -> None:
    if t - structure.depth < 0 or t > available:
        raise InsufficientHistory(f"step to t={t} needs slices {t - structure.depth}..{t - 1}")


def inputs_at(traj: Trajectory, t: int) -> np.ndarray:
    if traj.inputs is None:
        return np.zeros(traj.frame.extents, dtype=np.int64)
    return traj.inputs[t]


def step_direct(automaton: Automaton, history: Trajectory, t: int):
    """Cell-by-cell evaluation of the local recurrence for slice ``t``."""
    s = automaton.structure
    check_history(s, t, history.states.shape[0])
    frame, rule = automaton.frame, automaton.rule
    new = np.empty((*frame.extents, rule.m), dtype=np.int64)
    out = np.empty((*frame.extents, rule.l), dtype=np.int64)
    for r in frame.points():
        args = []
        for shift, tap in zip(s.state_shifts, automaton.taps):
            src = resolve(frame, r, shift)
            if isinstance(src, FixedSymbol):
                args.append(src.value)
            else:
                args.append(int(history.states[(t - shift.dt, *src, tap - 1)]))
        xs = []
        for shift in s.input_shifts:
            src = resolve(frame, r, shift)
            if isinstance(src, FixedSymbol):
                xs.append(OUTSIDE_INPUT)
            else:
                xs.append(int(inputs_at(history, t - shift.dt)[src]))
        new[r] = rule.transition(args, xs)
        out[r] = rule.output(args, xs)
    return new, out


def build_shift_stage(automaton: Automaton, history: Trajectory, t: int) -> list[np.ndarray]:
    """The ``k + l`` shifted copies of the history feeding slice ``t``."""
    s = automaton.structure
    check_history(s, t, history.states.shape[0])
    frame = automaton.frame
    stage = [
        shift_slice(frame, history.states[t - sh.dt][..., tap - 1], sh.dr)
        for sh, tap in zip(s.state_shifts, automaton.taps)
    ]
    stage += [shift_slice(frame, inputs_at(history, t - sh.dt), sh.dr, fill=OUTSIDE_INPUT)
              for sh in s.input_shifts]
    return stage


def apply_pointwise_stage(rule: CellRule, stage: Sequence[np.ndarray]):
    if len(stage) != rule.k + rule.l:
        raise ValueError(f"stage has {len(stage)} slices, rule takes {rule.k}+{rule.l}")
    ext = np.shape(stage[0])
    flat = np.stack([np.asarray(a, dtype=np.int64).reshape(-1) for a in stage])
    new, out = rule.apply(flat[: rule.k], flat[rule.k:])
    return new.reshape((*ext, rule.m)), out.reshape((*ext, rule.l))


def _prepare(automaton: Automaton, initial, steps: int, inputs) -> Trajectory:
    window = initial_window(automaton, initial)
    h = window.shape[0]
    states = np.zeros((h + steps, *window.shape[1:]), dtype=np.int64)
    states[:h] = window
    if inputs is not None:
        inputs = np.asarray(inputs, dtype=np.int64)
        if inputs.shape != (h + steps, *automaton.frame.extents):
            raise ValueError(f"inputs must have shape {(h + steps, *automaton.frame.extents)}")
    outputs = np.zeros((steps, *automaton.frame.extents, automaton.rule.l), dtype=np.int64)
    return Trajectory(automaton.frame, states, h, inputs, outputs)


def evaluate_global(automaton: Automaton, initial, steps: int, inputs=None,
                    permute_stage: Sequence[int] | None = None) -> Trajectory:
    """Evolve ``steps`` slices as pointwise-stage after shift-stage.

    ``permute_stage`` reorders the state part of each stage before the rule
    sees it. It exists to build deliberately broken evaluators for tests.
    """
    traj = _prepare(automaton, initial, steps, inputs)
    k = automaton.structure.k
    for t in range(traj.history, traj.history + steps):
        stage = build_shift_stage(automaton, traj, t)
        if permute_stage is not None:
            stage = [stage[i] for i in permute_stage] + stage[k:]
        traj.states[t], traj.outputs[t - traj.history] = apply_pointwise_stage(automaton.rule, stage)
    return traj


def evaluate_direct(automaton: Automaton, initial, steps: int, inputs=None) -> Trajectory:
    traj = _prepare(automaton, initial, steps, inputs)
    for t in range(traj.history, traj.history + steps):
        traj.states[t], traj.outputs[t - traj.history] = step_direct(automaton, traj, t)
    return traj


@dataclass
class EquivalenceReport:
    mode: str
    configurations: int
    steps: int
    mismatches: list[tuple[int, tuple[int, ...], int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def enumerate_windows(shape: tuple[int, ...], n_states: int, max_configs: int):
    total = n_states ** math.prod(shape)
    if total > max_configs:
        raise CapExceeded(f"{total} configurations exceed the cap of {max_configs}")
    size = math.prod(shape)
    for digits in itertools.product(range(n_states), repeat=size):
        yield np.array(digits, dtype=np.int64).reshape(shape)


def random_windows(shape: tuple[int, ...], n_states: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield rng.integers(0, n_states, size=shape, dtype=np.int64)


def compare_trajectories(a: Trajectory, b: Trajectory, config: int, report: EquivalenceReport) -> None:
    diff = np.argwhere((a.states != b.states).any(axis=-1))
    for t, *r in diff.tolist():
        report.mismatches.append((config, tuple(r), t))
    if a.outputs.size:
        for t, *r in np.argwhere((a.outputs != b.outputs).any(axis=-1)).tolist():
            report.mismatches.append((config, tuple(r), t + a.history))


def verify_factorization(automaton: Automaton, mode: str = "exhaustive", steps: int = 16,
                         count: int = 1000, seed: int = 0, max_configs: int = DEFAULT_MAX_CONFIGS,
                         staged: Callable[..., Trajectory] = evaluate_global) -> EquivalenceReport:
    """Compare the staged evaluator against repeated ``step_direct``.

    Exhaustive mode enumerates every initial window (with all-zero inputs);
    random mode draws ``count`` windows and input fields from ``seed``.
    """
    shape = (automaton.structure.depth, *automaton.frame.extents, automaton.width)
    n_s = automaton.alphabet.states
    report = EquivalenceReport(mode, 0, steps)
    rng = np.random.default_rng(seed + 1)
    if mode == "exhaustive":
        windows = enumerate_windows(shape, n_s, max_configs)
    elif mode == "random":
        windows = random_windows(shape, n_s, count, seed)
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    for i, window in enumerate(windows):
        inputs = None
        if mode == "random" and automaton.structure.l:
            inputs = rng.integers(0, automaton.alphabet.inputs,
                                  size=(shape[0] + steps, *automaton.frame.extents))
        compare_trajectories(staged(automaton, window, steps, inputs),
                 evaluate_direct(automaton, window, steps, inputs), i, report)
        report.configurations += 1
    return report
