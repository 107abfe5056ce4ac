"""Check nested automata against their flattened equivalents and time it."""
import argparse
import sys
import time
from pathlib import Path

from nestca import parse_spec, verify_flatten

SPECS = Path(__file__).resolve().parents[1] / "specs"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("specs", nargs="*", type=Path,
                   default=[SPECS / "depth2_xor.json", SPECS / "depth3_small.json"])
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    failed = False
    for path in args.specs:
        nested = parse_spec(path).automaton
        mode = "exhaustive" if nested.alphabet.states ** (nested.frame.cells * nested.width) <= 1 << 16 else "random"
        t0 = time.perf_counter()
        report = verify_flatten(nested, mode, steps=args.steps, count=args.count, seed=args.seed)
        dt = time.perf_counter() - t0
        print(f"{path.name}: depth {nested.depth}, {mode}, {report.configurations} histories, "
              f"{len(report.mismatches)} mismatches, {dt:.2f}s")
        failed |= not report.ok
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
