import os

import numpy as np
import pytest
from hypothesis import settings

from nestca.automaton import Automaton, builtin, table_rule
from nestca.nesting import compose_nested, leaf
from nestca.spacetime import Shift, ShiftStructure, SpaceTimeFrame

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

XOR_SHIFTS = ShiftStructure((Shift(-1), Shift(1)))


def bits(s: str) -> np.ndarray:
    return np.array([int(c) for c in s], dtype=np.int64)


def show(arr) -> str:
    return "".join(str(int(v)) for v in np.asarray(arr).reshape(-1))


@pytest.fixture
def xor8():
    return Automaton(SpaceTimeFrame((8,)), XOR_SHIFTS, builtin("xor", 2))


@pytest.fixture
def and_not8():
    # F(a, b) = a and not b: argument order matters.
    return Automaton(SpaceTimeFrame((8,)), XOR_SHIFTS, table_rule(lambda a, b: a & (1 - b), 2))


def depth2_xor(outer_n: int = 4):
    """Inner: 2 cells x horizon 1, self+left xor. Outer: k = 2 block entries."""
    inner = leaf(SpaceTimeFrame((2,)), ShiftStructure((Shift(0), Shift(1))), builtin("xor", 2))
    return compose_nested(XOR_SHIFTS, SpaceTimeFrame((outer_n,)), inner)


def depth3_small(outer_n: int = 3):
    innermost = leaf(SpaceTimeFrame((2,)), ShiftStructure((Shift(0), Shift(1))), builtin("xor", 2))
    middle = compose_nested(ShiftStructure((Shift(1), Shift(0))), SpaceTimeFrame((2,)), innermost)
    return compose_nested(XOR_SHIFTS, SpaceTimeFrame((outer_n,)), middle, taps=(2, 1))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
