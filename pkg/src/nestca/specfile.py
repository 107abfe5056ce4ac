"""JSON spec documents, initial conditions and trajectory files.

A spec document (``"version": "nestca/1"``) lists levels outermost first::

    {
      "version": "nestca/1",
      "alphabet": {"states": 2},
      "levels": [
        {"extents": [8], "horizon": 1, "boundary": "periodic",
         "state_shifts": [{"dr": [-1], "dt": 1}, {"dr": [1], "dt": 1}]}
      ],
      "rule": {"builtin": "xor"},
      "u": 1.0,
      "initial": "00010000"
    }

``boundary`` is ``"periodic"`` or ``{"fixed": symbol}``. The rule belongs to
the innermost level and is either ``{"builtin": name, ...params}`` or
``{"table": {"m": m, "F": [[...], ...], "G": [[...], ...]}}``. Optional keys:
``taps`` per level, ``input_shifts`` (outermost leaf only), ``text``
(``{"letters": ..., "extents": [word, sentence, paragraph]}``) and
``fixture`` (``{"stage_permutation": [...]}``, for building broken staged
evaluators in verification tests). Unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from nestca.automaton import BUILTINS, Alphabet, CellRule, initial_window
from nestca.nesting import NestedAutomaton, ShapeView
from nestca.spacetime import FIXED, PERIODIC, Shift, ShiftStructure, SpaceTimeFrame
from nestca.text import DEFAULT_LETTERS

VERSION = "nestca/1"
TRAJECTORY_FORMAT = "nestca-trajectory/1"

_TOP_KEYS = {"version", "alphabet", "levels", "rule", "u", "initial", "text", "fixture"}
_LEVEL_KEYS = {"extents", "horizon", "boundary", "state_shifts", "input_shifts", "taps"}
_BUILTIN_PARAMS = {"threshold": {"theta"}, "projection": {"j"}, "constant": {"c"}}


class SpecError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class TextConfig:
    letters: str = DEFAULT_LETTERS
    extents: tuple[int, int, int] = (32, 32, 16)


@dataclass(frozen=True)
class SpecModel:
    automaton: NestedAutomaton
    u: float = 1.0
    initial: Any = None
    text: TextConfig | None = None
    stage_permutation: tuple[int, ...] | None = None


def _require(doc: Any, kind: type, path: str):
    if not isinstance(doc, kind) or (kind is int and isinstance(doc, bool)):
        raise SpecError(path, f"expected {kind.__name__}, got {type(doc).__name__}")
    return doc


def _keys(doc: dict, allowed: set[str], required: set[str], path: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise SpecError(path, f"unknown field(s) {unknown}")
    missing = sorted(required - set(doc))
    if missing:
        raise SpecError(path, f"missing field(s) {missing}")


def _int_list(doc: Any, path: str) -> list[int]:
    _require(doc, list, path)
    return [_require(x, int, f"{path}[{i}]") for i, x in enumerate(doc)]


def _shifts(doc: Any, path: str) -> tuple[Shift, ...]:
    out = []
    for i, item in enumerate(_require(doc, list, path)):
        p = f"{path}[{i}]"
        _keys(_require(item, dict, p), {"dr", "dt"}, {"dr", "dt"}, p)
        try:
            out.append(Shift(tuple(_int_list(item["dr"], f"{p}.dr")), _require(item["dt"], int, f"{p}.dt")))
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(p, str(exc)) from None
    return tuple(out)


def _frame(doc: dict, path: str) -> SpaceTimeFrame:
    boundary = doc.get("boundary", PERIODIC)
    fixed = 0
    if isinstance(boundary, dict):
        _keys(boundary, {FIXED}, {FIXED}, f"{path}.boundary")
        fixed = _require(boundary[FIXED], int, f"{path}.boundary.fixed")
        boundary = FIXED
    elif boundary != PERIODIC:
        raise SpecError(f"{path}.boundary", f"expected 'periodic' or {{'fixed': symbol}}, got {boundary!r}")
    try:
        return SpaceTimeFrame(tuple(_int_list(doc["extents"], f"{path}.extents")),
                              _require(doc.get("horizon", 1), int, f"{path}.horizon"), boundary, fixed)
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(path, str(exc)) from None


def _rule(doc: Any, structure: ShiftStructure, alphabet: Alphabet, path: str) -> CellRule:
    _require(doc, dict, path)
    try:
        if "builtin" in doc:
            name = doc["builtin"]
            if name not in BUILTINS:
                raise SpecError(f"{path}.builtin", f"unknown built-in {name!r}; choose from {list(BUILTINS)}")
            params = _BUILTIN_PARAMS.get(name, set())
            _keys(doc, {"builtin"} | params, {"builtin"} | params, path)
            values = tuple(sorted((p, _require(doc[p], int, f"{path}.{p}")) for p in params))
            m = structure.k if name == "identity" else 1
            return CellRule(name, structure.k, structure.l, m, alphabet, values)
        if "table" in doc:
            _keys(doc, {"table"}, {"table"}, path)
            tab = _require(doc["table"], dict, f"{path}.table")
            _keys(tab, {"m", "F", "G"}, {"m", "F"}, f"{path}.table")
            f_rows = tuple(tuple(_int_list(r, f"{path}.table.F[{i}]")) for i, r in enumerate(_require(tab["F"], list, f"{path}.table.F")))
            g_rows = None
            if "G" in tab:
                g_rows = tuple(tuple(_int_list(r, f"{path}.table.G[{i}]")) for i, r in enumerate(_require(tab["G"], list, f"{path}.table.G")))
            return CellRule("table", structure.k, structure.l, _require(tab["m"], int, f"{path}.table.m"),
                            alphabet, table_f=f_rows, table_g=g_rows)
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError(path, str(exc)) from None
    raise SpecError(path, "rule needs 'builtin' or 'table'")


def build_model(doc: Any) -> SpecModel:
    """Validate a decoded spec document into a :class:`SpecModel`."""
    _require(doc, dict, "$")
    _keys(doc, _TOP_KEYS, {"version", "levels", "rule"}, "$")
    if doc["version"] != VERSION:
        raise SpecError("version", f"expected {VERSION!r}, got {doc['version']!r}")
    a = _require(doc.get("alphabet", {}), dict, "alphabet")
    _keys(a, {"states", "inputs", "outputs"}, set(), "alphabet")
    try:
        alphabet = Alphabet(*(_require(a.get(key, 1 if key != "states" else 2), int, f"alphabet.{key}")
                              for key in ("states", "inputs", "outputs")))
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError("alphabet", str(exc)) from None
    levels = _require(doc["levels"], list, "levels")
    if not levels:
        raise SpecError("levels", "at least one level is required")
    parsed = []
    for i, lvl in enumerate(levels):
        p = f"levels[{i}]"
        _keys(_require(lvl, dict, p), _LEVEL_KEYS, {"extents", "state_shifts"}, p)
        frame = _frame(lvl, p)
        try:
            structure = ShiftStructure(_shifts(lvl["state_shifts"], f"{p}.state_shifts"),
                                       _shifts(lvl.get("input_shifts", []), f"{p}.input_shifts"))
        except SpecError:
            raise
        except ValueError as exc:
            raise SpecError(p, str(exc)) from None
        taps = tuple(_int_list(lvl["taps"], f"{p}.taps")) if "taps" in lvl else None
        parsed.append((p, frame, structure, taps))
    p, frame, structure, taps = parsed[-1]
    node = _node(p, frame, structure, taps, rule=_rule(doc["rule"], structure, alphabet, "rule"))
    for p, frame, structure, taps in reversed(parsed[:-1]):
        node = _node(p, frame, structure, taps, inner=node)
    u = doc.get("u", 1.0)
    if isinstance(u, bool) or not isinstance(u, (int, float)) or not u > 0:
        raise SpecError("u", f"expected a positive number, got {u!r}")
    text = None
    if "text" in doc:
        t = _require(doc["text"], dict, "text")
        _keys(t, {"letters", "extents"}, set(), "text")
        ext = tuple(_int_list(t.get("extents", list(TextConfig.extents)), "text.extents"))
        if len(ext) != 3 or min(ext) < 1:
            raise SpecError("text.extents", "expected three positive extents [word, sentence, paragraph]")
        text = TextConfig(_require(t.get("letters", DEFAULT_LETTERS), str, "text.letters"), ext)
    perm = None
    if "fixture" in doc:
        fx = _require(doc["fixture"], dict, "fixture")
        _keys(fx, {"stage_permutation"}, {"stage_permutation"}, "fixture")
        perm = tuple(_int_list(fx["stage_permutation"], "fixture.stage_permutation"))
        if sorted(perm) != list(range(1, node.structure.k + 1)):
            raise SpecError("fixture.stage_permutation", f"expected a permutation of 1..{node.structure.k}")
    return SpecModel(node, float(u), doc.get("initial"), text, perm)


def _node(path, frame, structure, taps, rule=None, inner=None) -> NestedAutomaton:
    try:
        return NestedAutomaton(frame, structure, rule=rule, inner=inner, taps=taps)
    except ValueError as exc:
        raise SpecError(path, str(exc)) from None


def parse_spec(source: str | Path | dict) -> SpecModel:
    """Parse a spec from a path, a JSON string or an already decoded dict."""
    if isinstance(source, dict):
        return build_model(source)
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON: {exc}") from None
    return build_model(doc)


def _shift_doc(s: Shift) -> dict:
    return {"dr": list(s.dr), "dt": s.dt}


def _level_doc(node) -> dict:
    f, s = node.frame, node.structure
    doc = {
        "extents": list(f.extents),
        "horizon": f.horizon,
        "boundary": PERIODIC if f.boundary == PERIODIC else {FIXED: f.fixed_symbol},
        "state_shifts": [_shift_doc(x) for x in s.state_shifts],
        "taps": list(node.taps),
    }
    if s.input_shifts:
        doc["input_shifts"] = [_shift_doc(x) for x in s.input_shifts]
    return doc


def _rule_doc(rule: CellRule) -> dict:
    if rule.name == "table":
        tab = {"m": rule.m, "F": [list(r) for r in rule.table_f]}
        if rule.table_g is not None:
            tab["G"] = [list(r) for r in rule.table_g]
        return {"table": tab}
    if rule.name == "synthesized":
        raise SpecError("rule", "synthesized rules cannot be serialized; raise the table cap")
    return {"builtin": rule.name, **dict(rule.params)}


def serialize_model(model: SpecModel) -> dict:
    levels = list(model.automaton.levels())
    a = levels[-1].rule.alphabet
    doc = {
        "version": VERSION,
        "alphabet": {"states": a.states, "inputs": a.inputs, "outputs": a.outputs},
        "levels": [_level_doc(n) for n in levels],
        "rule": _rule_doc(levels[-1].rule),
        "u": model.u,
    }
    if model.initial is not None:
        doc["initial"] = model.initial
    if model.text is not None:
        doc["text"] = {"letters": model.text.letters, "extents": list(model.text.extents)}
    if model.stage_permutation is not None:
        doc["fixture"] = {"stage_permutation": list(model.stage_permutation)}
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def spec_hash(model: SpecModel) -> str:
    return hashlib.sha256(dumps(serialize_model(model)).encode("utf-8")).hexdigest()


# -- initial conditions and slices -------------------------------------------

def parse_slice(text: str, extents: tuple[int, ...], width: int) -> np.ndarray:
    """``"0010"``; cells of width > 1 separated by ``|``; 2-D rows by ``/``."""
    rows = text.split("/") if len(extents) == 2 else [text]
    if len(extents) > 2:
        raise ValueError("string slices support 1-D and 2-D lattices; use nested lists")
    cells = []
    for row in rows:
        if width == 1:
            cells.extend([[int(ch)] for ch in row.strip()])
        else:
            cells.extend([[int(ch) for ch in cell.strip()] for cell in row.split("|")])
    arr = np.array(cells, dtype=np.int64)
    if arr.shape != (int(np.prod(extents)), width):
        raise ValueError(f"slice {text!r} does not fit extents {extents} with width {width}")
    return arr.reshape((*extents, width))


def format_slice(values: np.ndarray) -> str:
    *ext, width = values.shape
    flat = values.reshape(-1, width)
    cells = ["".join(str(int(v)) for v in cell) for cell in flat]
    sep = "" if width == 1 else "|"
    if len(ext) == 1:
        return sep.join(cells)
    n = ext[1]
    return "/".join(sep.join(cells[i:i + n]) for i in range(0, len(cells), n))


def _delta(spec: str, extents: tuple[int, ...], width: int) -> np.ndarray:
    arr = np.zeros((*extents, width), dtype=np.int64)
    _, _, pos = spec.partition(":")
    flat = int(pos) if pos else int(np.prod(extents)) // 2
    arr.reshape(-1, width)[flat, 0] = 1
    return arr


def load_initial(value: Any, nested: NestedAutomaton, base: Path | None = None) -> np.ndarray:
    """Initial window ``(depth, *extents, width)`` from an inline or file reference.

    Accepted: ``"delta"`` / ``"delta:i"`` (one 1 at flat cell ``i``, default
    the centre; repeated over the history depth), a slice string, a list of
    slice strings, nested integer lists, or ``{"file": path}``.
    """
    ext, width = nested.frame.extents, nested.width
    depth = nested.structure.depth
    if isinstance(value, dict):
        _keys(value, {"file"}, {"file"}, "initial")
        path = Path(value["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        raw = path.read_text(encoding="utf-8")
        try:
            content = json.loads(raw)
        except json.JSONDecodeError:
            content = None
        if not isinstance(content, (dict, list)):
            # "0110" would decode as the number 110
            content = raw.strip().splitlines()
            content = content[0] if len(content) == 1 else content
        if isinstance(content, dict):
            content = content.get("initial")
        return load_initial(content, nested, path.parent)
    if isinstance(value, str):
        if value.startswith("delta"):
            window = np.repeat(_delta(value, ext, width)[None], depth, axis=0)
        else:
            window = parse_slice(value, ext, width)[None]
    elif isinstance(value, list) and value and all(isinstance(v, str) for v in value):
        window = np.stack([parse_slice(v, ext, width) for v in value])
    elif isinstance(value, list):
        window = np.asarray(value, dtype=np.int64)
    else:
        raise ValueError(f"cannot interpret initial condition {value!r}")
    return initial_window(ShapeView(nested), window)


def trajectory_doc(model: SpecModel, states: np.ndarray, history: int, outputs: np.ndarray | None) -> dict:
    use_strings = model.automaton.alphabet.states <= 10 and len(model.automaton.frame.extents) <= 2
    render = format_slice if use_strings else (lambda s: s.tolist())
    doc = {
        "format": TRAJECTORY_FORMAT,
        "meta": {
            "spec_sha256": spec_hash(model),
            "history": history,
            "steps": int(states.shape[0] - history),
            "determinism": "deterministic: no random seed is involved",
        },
        "extents": list(model.automaton.frame.extents),
        "width": model.automaton.width,
        "states": [render(s) for s in states],
    }
    if outputs is not None and outputs.size:
        doc["outputs"] = [render(o) for o in outputs]
    return doc
