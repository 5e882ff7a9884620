"""Residual weight, guess weight and (U, S, F) along the split repetitions of
the shipped d=9 fixture, written as CSV (one row per inner iteration)."""

import argparse
import csv
import sys

import numpy as np

from gbpqec.codes import surface_code
from gbpqec.decoder import DecoderConfig, regions_for, split_repeat_decode
from gbpqec.fixtures import fig6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fx = fig6()
    code = surface_code(9)
    t = code.tanner_x_checks
    cfg = DecoderConfig(p_init=fx["p_init"]).resolve(9)
    s = np.array(fx["syndrome"])[code.x_check_rows]
    out = split_repeat_decode(t, regions_for(t), s, cfg, keep_traces=True)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["step", "repetition", "iteration", "U", "S", "F", "residual_weight", "guess_weight"])
    step = 0
    for st in out.stages:
        for row in st["trace"]:
            w.writerow([step, st["repetition"], row["iteration"], f"{row['U']:.6f}", f"{row['S']:.6f}",
                        f"{row['F']:.6f}", row["residual_weight"], st["guess_weight"]])
            step += 1
    if fh is not sys.stdout:
        fh.close()
    print(f"status={out.status.value} repetitions={out.repetitions} iterations={out.iterations}", file=sys.stderr)


if __name__ == "__main__":
    main()
