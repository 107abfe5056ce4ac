"""Print the xor light cone from a single live cell, staged and direct side by side."""
import argparse

import numpy as np

from nestca import Automaton, Shift, ShiftStructure, SpaceTimeFrame, builtin, evaluate_direct, evaluate_global


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cells", type=int, default=31)
    p.add_argument("--steps", type=int, default=15)
    args = p.parse_args()

    xor = Automaton(SpaceTimeFrame((args.cells,)), ShiftStructure((Shift(-1), Shift(1))), builtin("xor", 2))
    start = np.zeros(args.cells, dtype=np.int64)
    start[args.cells // 2] = 1
    staged = evaluate_global(xor, start, args.steps).states[..., 0]
    direct = evaluate_direct(xor, start, args.steps).states[..., 0]
    for t, (a, b) in enumerate(zip(staged, direct)):
        row = "".join("#" if x else "." for x in a)
        print(f"{t:3d} {row} {'ok' if np.array_equal(a, b) else 'MISMATCH'}")


if __name__ == "__main__":
    main()
