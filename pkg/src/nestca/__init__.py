"""Nested cellular automata: lattice engine, nesting, speed calculus."""
from nestca.automaton import (
    Alphabet,
    Automaton,
    CellRule,
    builtin,
    evaluate_direct,
    evaluate_global,
    table_rule,
    verify_factorization,
)
from nestca.kinematics import NestedSpeedSpec, SpeedExceedsLimit, nested_speed, rationalize_speed, speed_table
from nestca.nesting import NestedAutomaton, compose_nested, evaluate_nested, flatten, leaf, verify_flatten
from nestca.spacetime import BlockIndex, Shift, ShiftStructure, SpaceTimeFrame
from nestca.specfile import parse_spec

__all__ = [
    "Alphabet",
    "Automaton",
    "BlockIndex",
    "CellRule",
    "NestedAutomaton",
    "NestedSpeedSpec",
    "Shift",
    "ShiftStructure",
    "SpaceTimeFrame",
    "SpeedExceedsLimit",
    "builtin",
    "compose_nested",
    "evaluate_direct",
    "evaluate_global",
    "evaluate_nested",
    "flatten",
    "leaf",
    "nested_speed",
    "parse_spec",
    "rationalize_speed",
    "speed_table",
    "table_rule",
    "verify_factorization",
    "verify_flatten",
]
