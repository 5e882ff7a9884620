"""Command line interface: ``gbpqec {decode,sweep,threshold,fixtures,scaling}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .codes import code_from_spec
from .decoder import CHANNELS, DecoderConfig, decode
from .gbp import HARD_DECISIONS
from .sim import SweepResult, fit_power_law, parse_grid, run_sweep, threshold_from_sweep


def _decoder_config(args, **extra) -> DecoderConfig:
    overrides = {
        "hard_decision": getattr(args, "hard_decision", None),
        "rep": getattr(args, "rep", None),
        "damping": getattr(args, "damping", None),
        "n_mi": getattr(args, "n_mi", None),
        "n_mr": getattr(args, "n_mr", None),
        "n_reinit": getattr(args, "n_reinit", None),
        **extra,
    }
    if getattr(args, "config", None):
        return DecoderConfig.from_file(args.config, **overrides)
    return DecoderConfig(**{k: v for k, v in overrides.items() if v is not None})


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_syndrome(args) -> np.ndarray:
    if args.syndrome is not None:
        raw = args.syndrome
    else:
        raw = Path(args.syndrome_file).read_text()
    raw = raw.strip()
    if raw.startswith("[") or raw.startswith("{"):
        obj = json.loads(raw)
        bits = obj["syndrome"] if isinstance(obj, dict) else obj
    else:
        bits = [int(ch) for ch in raw if ch in "01"]
    return np.asarray(bits, dtype=np.uint8)


def cmd_decode(args) -> int:
    codes = code_from_spec(args.code)
    if len(codes) != 1:
        raise ValueError("decode needs exactly one code")
    code = codes[0]
    cfg = _decoder_config(args, p_init=args.p, channel=args.channel, seed=args.seed)
    out = decode(code, _read_syndrome(args), cfg, decoder=args.decoder, keep_traces=args.trace)
    _emit(json.dumps({"code": code.name, "config": cfg.to_json(), **out.to_json()}, indent=1) + "\n", args.out)
    return 0 if out.success else 1


def _progress(args):
    if args.quiet:
        return None
    return lambda pt: print(f"{pt.code} p={pt.p:.4g} fail={pt.failure_rate:.4f} decode_fail={pt.decode_failures}",
                            file=sys.stderr)


def cmd_sweep(args) -> int:
    codes = code_from_spec(args.code)
    res = run_sweep(codes, args.channel, parse_grid(args.p), args.shots, args.seed,
                    _decoder_config(args), args.decoder, _progress(args))
    _emit(res.to_csv(), args.out)
    return 0


def cmd_threshold(args) -> int:
    res = SweepResult()
    for path in args.csv:
        res.points += SweepResult.from_csv(Path(path).read_text()).points
    by_channel = {}
    for pt in res.points:
        by_channel.setdefault(pt.channel, SweepResult()).points.append(pt)
    report = {ch: threshold_from_sweep(r).to_json() for ch, r in sorted(by_channel.items())}
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return 0


def cmd_fixtures(args) -> int:
    _emit(json.dumps(fixtures.get(args.name, args.d), indent=1) + "\n", args.out)
    return 0


def cmd_scaling(args) -> int:
    codes = code_from_spec(args.code)
    res = run_sweep(codes, args.channel, [args.p], args.shots, args.seed, _decoder_config(args),
                    "gbp", _progress(args))
    _emit(res.to_csv(), args.out)
    pts = sorted(res.points, key=lambda r: r.distance)
    if len(pts) >= 2:
        ds = [r.distance for r in pts]
        fit = {what: fit_power_law(ds, [max(r.mean(what), 1e-12) for r in pts])[0]
               for what in ("iterations", "repetitions")}
        text = json.dumps({"distances": ds, "exponents": fit}, indent=1) + "\n"
        if args.fit_out:
            Path(args.fit_out).write_text(text)
        elif not args.quiet:
            sys.stderr.write(text)
    return 0


def _add_decoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or TOML file with DecoderConfig fields")
    p.add_argument("--hard-decision", choices=HARD_DECISIONS, default=None)
    p.add_argument("--rep", choices=("gf2", "gf4"), default=None)
    p.add_argument("--damping", type=float, default=None)
    p.add_argument("--n-mi", type=int, default=None)
    p.add_argument("--n-mr", type=int, default=None)
    p.add_argument("--n-reinit", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbpqec", description="GBP decoding of surface and HGP codes")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode one syndrome")
    p.add_argument("--code", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--syndrome", help="bit string or JSON list")
    src.add_argument("--syndrome-file")
    p.add_argument("--channel", choices=CHANNELS, default="xz")
    p.add_argument("--p", type=float, default=0.1, help="channel error probability used as prior")
    p.add_argument("--decoder", choices=("gbp", "bp"), default="gbp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="include per-iteration traces")
    p.add_argument("--out")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="Monte Carlo failure rates over codes and p")
    p.add_argument("--code", required=True)
    p.add_argument("--channel", choices=CHANNELS, default="xz")
    p.add_argument("--p", required=True, help="lo:hi:step or comma list")
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoder", choices=("gbp", "bp"), default="gbp")
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="crossing estimate from sweep CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("fixtures", help="emit regression fixtures as JSON")
    p.add_argument("--name", choices=fixtures.NAMES, required=True)
    p.add_argument("--d", type=int, default=3, help="distance for --name surface")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("scaling", help="mean iterations and repetitions versus distance")
    p.add_argument("--code", required=True)
    p.add_argument("--channel", choices=CHANNELS, default="depolarizing")
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--shots", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--fit-out")
    p.add_argument("--quiet", action="store_true")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_scaling)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        parser.exit(2, f"gbpqec {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
