"""Command line front end.

Exit codes: 0 success, 1 verification mismatch, 2 validation error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from nestca import kinematics, propagation
from nestca.automaton import DEFAULT_MAX_CONFIGS, CapExceeded, EquivalenceReport, evaluate_global, verify_factorization
from nestca.nesting import as_nested, evaluate_nested, flatten, verify_flatten
from nestca.specfile import (
    SpecModel,
    dumps,
    load_initial,
    parse_spec,
    serialize_model,
    trajectory_doc,
)
from nestca.text import DEFAULT_LETTERS, HierarchyText, TextError, decode_text, encode_text

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3
MAX_LISTED_MISMATCHES = 100


def _write(out: str | None, payload: str) -> None:
    if out is None:
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload, encoding="utf-8", newline="")


def _load(args) -> SpecModel:
    return parse_spec(Path(args.spec))


def _initial(model: SpecModel, args):
    value = args.initial if args.initial is not None else model.initial
    if value is None:
        raise ValueError("no initial condition: pass --initial or set 'initial' in the spec file")
    base = Path(args.spec).parent
    if isinstance(value, str) and args.initial is not None and Path(value).is_file():
        value = {"file": str(Path(value).resolve())}
    return load_initial(value, model.automaton, base)


def cmd_run(args) -> int:
    model = _load(args)
    window = _initial(model, args)
    nested = model.automaton
    if nested.is_leaf:
        traj = evaluate_global(flatten(nested), window, args.steps)
    else:
        traj = evaluate_nested(nested, window, args.steps)
    _write(args.out, dumps(trajectory_doc(model, traj.states, traj.history, traj.outputs)))
    return EXIT_OK


def _report_doc(kind: str, report: EquivalenceReport) -> dict:
    return {
        "format": "nestca-verify/1",
        "kind": kind,
        "mode": report.mode,
        "configurations": report.configurations,
        "steps": report.steps,
        "ok": report.ok,
        "mismatch_count": len(report.mismatches),
        "mismatches": [
            {"config": c, "r": list(r), "t": t} for c, r, t in report.mismatches[:MAX_LISTED_MISMATCHES]
        ],
    }


def cmd_verify(args) -> int:
    model = _load(args)
    nested = model.automaton
    opts = dict(mode=args.mode, count=args.count, seed=args.seed, max_configs=args.max_configs)
    if nested.is_leaf:
        staged = evaluate_global
        if model.stage_permutation is not None:
            perm = [p - 1 for p in model.stage_permutation]

            def staged(a, initial, steps, inputs=None):
                return evaluate_global(a, initial, steps, inputs, permute_stage=perm)

        steps = 16 if args.steps is None else args.steps
        report = verify_factorization(flatten(nested), steps=steps, staged=staged, **opts)
        kind = "factorization"
    else:
        steps = 4 if args.steps is None else args.steps
        report = verify_flatten(nested, steps=steps, **opts)
        kind = "flatten"
    _write(args.out, dumps(_report_doc(kind, report)))
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def cmd_speeds(args) -> int:
    model = _load(args)
    u = model.u if args.u is None else args.u
    rows = kinematics.speed_table(model.automaton, u)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "shift_index", "raw_speed", "effective_speed", "flag"])
    for r in rows:
        w.writerow([r.level, r.shift_index, _fmt(r.raw_speed), _fmt(r.effective_speed), r.flag])
    _write(args.out, buf.getvalue())
    warnings = sum(1 for r in rows if r.flag)
    if warnings:
        print(f"warnings: {warnings} flagged row(s)", file=sys.stderr)
    return EXIT_OK


def trace_rules(n_states: int) -> dict:
    return {
        "identity": lambda x: x,
        "negate": lambda x: (n_states - 1) - x,
        "increment": lambda x: min(x + 1, n_states - 1),
        "first": lambda *xs: xs[0],
        "max": lambda *xs: max(xs),
        "min": lambda *xs: min(xs),
        "sum_mod": lambda *xs: sum(xs) % n_states,
    }


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _coord(text: str | None, levels: int) -> propagation.NestedCoordinate:
    if text is None:
        return propagation.NestedCoordinate.of(*[(0.0, 0.0)] * levels)
    pairs = []
    for part in text.split(";"):
        *r, t = _floats(part)
        pairs.append((r, t))
    if len(pairs) != levels:
        raise ValueError(f"case needs a {levels}-level coordinate, got {len(pairs)}")
    return propagation.NestedCoordinate.of(*pairs)


def cmd_trace(args) -> int:
    u = args.u
    n_states = args.states
    if args.spec is not None:
        model = _load(args)
        u = model.u if u is None else u
    u = 1.0 if u is None else u
    vs = args.v or [0.0]
    ws = args.w or []
    if args.case == "c" or (args.case == "a" and not ws):
        levels, speeds = 2, [[v] for v in vs]
    else:
        if len(ws) != len(vs):
            raise ValueError(f"case {args.case} needs one --w per --v")
        levels, speeds = 3, [[v, w] for v, w in zip(vs, ws)]
    coord = _coord(args.coord, levels)
    if args.field == "delta":
        site = [[x] for x in _floats(args.site)] if args.site else [[0.0]] * levels
        field = propagation.delta(site, levels)
    else:
        field = propagation.step(float(args.site or 0.0), levels)
    rules = trace_rules(n_states)
    default_rule = "identity" if args.case in ("a", "b") else "first"
    rule = rules[args.rule or default_rule]
    rows = propagation.trace(args.case, field, coord, args.steps, u=u, speeds=speeds, rule=rule)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "r0", "t0", "r1", "t1", "r2", "t2", "value"])
    for row in rows:
        cells = []
        for j in range(3):
            if j < row.coord.depth:
                lvl = row.coord.levels[j]
                cells += [";".join(_fmt(x) for x in lvl.r), _fmt(lvl.t)]
            else:
                cells += ["", ""]
        w.writerow([row.step, *cells, row.value])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_flatten(args) -> int:
    model = _load(args)
    flat = flatten(model.automaton, "table", args.max_configs)
    flat_model = SpecModel(as_nested(flat), model.u, None, model.text, None)
    _write(args.out, dumps(serialize_model(flat_model)))
    return EXIT_OK


def _text_config(args):
    letters, extents = DEFAULT_LETTERS, (32, 32, 16)
    if args.spec is not None:
        model = _load(args)
        if model.text is not None:
            letters, extents = model.text.letters, model.text.extents
    if args.extents:
        extents = tuple(int(x) for x in args.extents.split(","))
        if len(extents) != 3:
            raise ValueError("--extents takes word,sentence,paragraph")
    return letters, extents


def cmd_encode_text(args) -> int:
    letters, extents = _text_config(args)
    text = args.text if args.text is not None else Path(args.input).read_text(encoding="utf-8")
    _write(args.out, dumps(encode_text(text, extents, letters).to_json()))
    return EXIT_OK


def cmd_decode_text(args) -> int:
    doc = json.loads(Path(args.input).read_text(encoding="utf-8"))
    _write(args.out, decode_text(HierarchyText.from_json(doc)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nestca", description="Nested cellular automata toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evolve a spec and write the trajectory (JSON)")
    run.add_argument("--spec", required=True)
    run.add_argument("--initial", help="inline slice, 'delta[:i]' or a file")
    run.add_argument("--steps", type=int, default=8)
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="staged vs direct (flat) or nested vs flattened")
    ver.add_argument("--spec", required=True)
    ver.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    ver.add_argument("--steps", type=int)
    ver.add_argument("--count", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--max-configs", type=int, default=DEFAULT_MAX_CONFIGS)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)

    sp = sub.add_parser("speeds", help="per-level speed table (CSV)")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--u", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_speeds)

    tr = sub.add_parser("trace", help="propagation trace for case a, b, c or general (CSV)")
    tr.add_argument("--case", choices=["a", "b", "c", "general"], required=True)
    tr.add_argument("--spec")
    tr.add_argument("--u", type=float)
    tr.add_argument("--v", type=float, action="append", help="level-0 speed, once per signal")
    tr.add_argument("--w", type=float, action="append", help="level-1 speed, once per signal")
    tr.add_argument("--steps", type=int, default=4)
    tr.add_argument("--coord", help="'r,t;r,t[;r,t]' outermost first")
    tr.add_argument("--field", choices=["delta", "step"], default="delta")
    tr.add_argument("--site", help="delta: 'x0,x1[,x2]' per level; step: threshold")
    tr.add_argument("--rule", choices=sorted(trace_rules(2)))
    tr.add_argument("--states", type=int, default=2)
    tr.add_argument("--out")
    tr.set_defaults(func=cmd_trace)

    fl = sub.add_parser("flatten", help="emit the equivalent single-level spec")
    fl.add_argument("--spec", required=True)
    fl.add_argument("--max-configs", type=int, default=DEFAULT_MAX_CONFIGS)
    fl.add_argument("--out")
    fl.set_defaults(func=cmd_flatten)

    enc = sub.add_parser("encode-text", help="text to nested letter/word/sentence/paragraph codes")
    enc.add_argument("--spec")
    src = enc.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--input")
    enc.add_argument("--extents", help="word,sentence,paragraph")
    enc.add_argument("--out")
    enc.set_defaults(func=cmd_encode_text)

    dec = sub.add_parser("decode-text", help="nested codes back to text")
    dec.add_argument("--input", required=True)
    dec.add_argument("--out")
    dec.set_defaults(func=cmd_decode_text)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, CapExceeded, TextError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
