"""Failure-rate curves and threshold estimates for d = 3, 5, 7 on both channels.

    python scripts/threshold_sweep.py --shots 2000 --out-dir runs/
"""

import argparse
import sys
from pathlib import Path

from gbpqec.codes import surface_code
from gbpqec.decoder import DecoderConfig
from gbpqec.sim import parse_grid, run_sweep, threshold_from_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--distances", default="3,5,7")
    ap.add_argument("--grid", default="0.10:0.22:0.02")
    ap.add_argument("--shots", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--decoder", choices=("gbp", "bp"), default="gbp")
    ap.add_argument("--rep", choices=("gf2", "gf4"), default="gf2")
    ap.add_argument("--out-dir", type=Path, default=Path("runs"))
    args = ap.parse_args()

    codes = [surface_code(int(d)) for d in args.distances.split(",")]
    args.out_dir.mkdir(parents=True, exist_ok=True)
    cfg = DecoderConfig(rep=args.rep)
    for channel in ("xz", "depolarizing"):
        res = run_sweep(codes, channel, parse_grid(args.grid), args.shots, args.seed, cfg, args.decoder,
                        lambda pt: print(f"{channel} d={pt.distance} p={pt.p:.3f} f={pt.failure_rate:.4f}",
                                         file=sys.stderr))
        path = args.out_dir / f"{channel}_{args.decoder}_{args.rep}.csv"
        path.write_text(res.to_csv())
        est = threshold_from_sweep(res)
        print(channel, est.to_json())


if __name__ == "__main__":
    main()
