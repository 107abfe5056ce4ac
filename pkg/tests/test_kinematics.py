import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import XOR_SHIFTS
from nestca.automaton import Automaton, builtin
from nestca.kinematics import (
    NestedSpeedSpec,
    SpeedExceedsLimit,
    nested_speed,
    rationalize_speed,
    shift_speed,
    speed_table,
)
from nestca.nesting import compose_nested, leaf
from nestca.spacetime import Shift, ShiftStructure, SpaceTimeFrame


def mp_nested(u, speeds, level):
    mpmath.mp.dps = 50
    if level == 0:
        return mpmath.mpf(speeds[0])
    u = mpmath.mpf(u)
    return u * mpmath.sqrt(1 - sum(mpmath.mpf(v) ** 2 for v in speeds[:level]) / u**2)


def point_leaf():
    return leaf(SpaceTimeFrame((1,)), ShiftStructure((Shift(0),)), builtin("identity", 1))


def chain(*shifts):
    """Nest levels that repeat one shift, outermost first, over a one-cell leaf."""
    node = point_leaf()
    for depth, s in enumerate(reversed(shifts)):
        frame = SpaceTimeFrame((8,) if depth == len(shifts) - 1 else (1,), horizon=s.dt)
        node = compose_nested(ShiftStructure((s,) * node.frame.block_size), frame, node)
    return node


def brute_rationalize(target, max_dt):
    goal = Fraction(repr(target))
    best = None
    for dt in range(1, max_dt + 1):
        lo = math.floor(goal * dt)
        for dr in range(lo - 3, lo + 4):
            key = (abs(Fraction(dr, dt) - goal), dt, abs(dr))
            if best is None or key < best[0]:
                best = (key, dr, dt)
    return best[1], best[2]


@pytest.mark.parametrize("shift,components,magnitude", [
    (Shift(2, 1), (2.0,), 2.0),
    (Shift(0, 3), (0.0,), 0.0),
    (Shift((3, 4), 5), (0.6, 0.8), 1.0),
])
def test_shift_speed(shift, components, magnitude):
    speed = shift_speed(shift)
    assert speed.components == components
    assert speed.magnitude == magnitude


def test_nested_speed_examples():
    assert nested_speed(NestedSpeedSpec(1, [0]), 1) == 1.0
    assert nested_speed(NestedSpeedSpec(1, [0.6]), 0) == 0.6
    for speeds, level, expected in [([0.6], 1, 0.8), ([0.6, 0.48], 2, 0.64)]:
        got = nested_speed(NestedSpeedSpec(1, speeds), level)
        assert abs(got - expected) <= 1e-12
        assert abs(got - float(mp_nested(1, speeds, level))) <= 1e-15


def test_nested_speed_limit():
    with pytest.raises(SpeedExceedsLimit):
        nested_speed(NestedSpeedSpec(1, [1.2]), 1)
    assert nested_speed(NestedSpeedSpec(1, [1.0]), 1) == 0.0
    with pytest.raises(ValueError):
        nested_speed(NestedSpeedSpec(1, [0.5]), 2)
    with pytest.raises(ValueError):
        NestedSpeedSpec(0, [0.5])
    with pytest.raises(ValueError):
        NestedSpeedSpec(1, [-0.1])


speeds_under_u = st.floats(0.1, 10).flatmap(
    lambda u: st.tuples(st.just(u), st.lists(st.floats(0, u / 2), min_size=1, max_size=3)))


@given(speeds_under_u)
def test_nested_speed_non_increasing(case):
    u, speeds = case
    spec = NestedSpeedSpec(u, speeds)
    effs = [nested_speed(spec, n) for n in range(1, len(speeds) + 1)]
    for n in range(1, len(effs)):
        assert effs[n] <= effs[n - 1]
        if speeds[n] > 1e-6 * u:
            assert effs[n] < effs[n - 1]


@given(st.floats(0.01, 100), st.integers(1, 4))
def test_zero_speeds_give_u(u, n):
    assert nested_speed(NestedSpeedSpec(u, [0.0] * n), n) == u


@given(st.floats(0.01, 100), st.floats(0, 1))
def test_pythagorean_closure(u, frac):
    v = u * frac
    eff = nested_speed(NestedSpeedSpec(u, [v]), 1)
    assert abs(eff**2 + v**2 - u**2) <= 1e-12 * max(1.0, u**2)


def test_speed_table_flat():
    a = Automaton(SpaceTimeFrame((8,)), XOR_SHIFTS, builtin("xor", 2))
    rows = speed_table(a, 2)
    assert [(r.level, r.shift_index, r.raw_speed, r.effective_speed, r.flag) for r in rows] == [
        (0, 0, 1.0, 1.0, ""), (0, 1, 1.0, 1.0, "")]


def test_speed_table_depth_two_and_three():
    rows = speed_table(chain(Shift(3, 5)), 1)
    assert rows[0].raw_speed == 0.6
    assert rows[1].level == 1 and abs(rows[1].effective_speed - 0.8) <= 1e-12
    rows = speed_table(chain(Shift(3, 5), Shift(12, 25)), 1)
    assert [r.level for r in rows] == [0] * 25 + [1, 2]
    assert abs(rows[-1].effective_speed - 0.64) <= 1e-12
    assert all(r.flag == "" for r in rows)


def test_speed_table_flags():
    rows = speed_table(chain(Shift(6, 5)), 1)
    assert rows[0].flag == "exceeds_limit"
    assert rows[1].flag == "exceeds_limit" and math.isnan(rows[1].effective_speed)
    inner = leaf(SpaceTimeFrame((1,)), ShiftStructure((Shift(0), Shift(0))), builtin("xor", 2))
    node = compose_nested(ShiftStructure((Shift(0),)), SpaceTimeFrame((4,)), inner)
    assert [r.flag for r in speed_table(node, 1)] == ["", "", "unpaired"]


@pytest.mark.parametrize("target,max_dt,dr,dt", [(0.5, 2, 1, 2), (0.8, 5, 4, 5), (-0.5, 4, -1, 2), (0.0, 3, 0, 1)])
def test_rationalize_exact(target, max_dt, dr, dt):
    shift, error = rationalize_speed(target, max_dt)
    assert (shift.dr, shift.dt, error) == ((dr,), dt, 0.0)


def test_rationalize_sqrt_half():
    target = math.sqrt(2) / 2
    shift, error = rationalize_speed(target, 12)
    assert (shift.dr[0], shift.dt) == brute_rationalize(target, 12) == (7, 10)
    assert error == pytest.approx(abs(0.7 - target), abs=1e-15)
    # the stdlib best approximation lands on the same fraction
    assert Fraction(target).limit_denominator(12) == Fraction(7, 10)


@given(st.floats(-5, 5, allow_nan=False), st.integers(1, 30))
def test_rationalize_matches_exhaustive_search(target, max_dt):
    shift, error = rationalize_speed(target, max_dt)
    assert (shift.dr[0], shift.dt) == brute_rationalize(target, max_dt)
    assert error == float(abs(Fraction(shift.dr[0], shift.dt) - Fraction(repr(target))))


def test_rationalize_tie_prefers_small_dt():
    # 0.25 is equidistant from 0 and 1/2 at dt <= 2; dt=1 gives 0 at distance 0.25
    shift, _ = rationalize_speed(0.25, 2)
    assert (shift.dr, shift.dt) == ((0,), 1)
