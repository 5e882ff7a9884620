"""Mean inner iterations and split repetitions per shot versus distance.

Fits log-log slopes over all distances and over d >= 5, and prints how each
inner run ended (solved, messages converged, iteration cap).
"""

import argparse
from collections import Counter

import numpy as np

from gbpqec.codes import surface_code
from gbpqec.decoder import DecoderConfig, decode
from gbpqec.sim import NoiseChannel, fit_power_law, sample_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--distances", default="3,5,7,9")
    ap.add_argument("--channel", default="depolarizing")
    ap.add_argument("--p", type=float, default=0.10)
    ap.add_argument("--shots", type=int, default=300)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()

    ds = [int(d) for d in args.distances.split(",")]
    its, reps = [], []
    for d in ds:
        code = surface_code(d)
        rng = np.random.default_rng([args.seed, d])
        cfg = DecoderConfig(p_init=args.p, channel=args.channel, tol=args.tol)
        stops, stop_its = Counter(), Counter()
        tot_it = tot_rep = 0
        for _ in range(args.shots):
            e = sample_error(NoiseChannel(args.channel, args.p), code.n_qubits, rng)
            out = decode(code, code.syndrome(e), cfg, rng=rng)
            tot_it += out.iterations
            tot_rep += out.repetitions
            for part in out.parts.values():
                for st in part.stages:
                    stops[st["stop"]] += 1
                    stop_its[st["stop"]] += st["iterations"]
        its.append(tot_it / args.shots)
        reps.append(tot_rep / args.shots)
        ends = ", ".join(f"{k}: {stops[k]} runs, {stop_its[k] / stops[k]:.1f} it" for k in sorted(stops))
        print(f"d={d}: iterations/shot {its[-1]:.1f}, repetitions/shot {reps[-1]:.2f} ({ends})")
    for label, lo in (("all d", 0), ("d >= 5", next(i for i, d in enumerate(ds) if d >= 5))):
        if len(ds) - lo >= 2:
            a_it = fit_power_law(ds[lo:], its[lo:])[0]
            a_rep = fit_power_law(ds[lo:], reps[lo:])[0]
            print(f"slopes ({label}): iterations {a_it:.2f}, repetitions {a_rep:.2f}")


if __name__ == "__main__":
    main()
