"""Effective speed per nesting level, and the nearest lattice shift for each."""
import argparse

from nestca import NestedSpeedSpec, SpeedExceedsLimit, nested_speed, rationalize_speed


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("speeds", nargs="*", type=float, default=[0.6, 0.48], help="level speeds, outermost first")
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--max-dt", type=int, default=16)
    args = p.parse_args()

    spec = NestedSpeedSpec(args.u, args.speeds)
    print("level  speed               shift (dr/dt)  error")
    for level in range(len(args.speeds) + 1):
        try:
            v = nested_speed(spec, level)
        except SpeedExceedsLimit as exc:
            print(f"{level:5d}  exceeds limit: {exc}")
            break
        shift, err = rationalize_speed(v, args.max_dt)
        print(f"{level:5d}  {v:<18.15g}  {shift.dr[0]:>5d}/{shift.dt:<7d}  {err:.3g}")


if __name__ == "__main__":
    main()
