"""Split-and-repeat GBP decoding with prior rescaling and random re-initialization."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .codes import StabilizerCode, TannerGraph
from .galois import GF4, PauliVector
from .gbp import HARD_DECISIONS, InconsistentRegionError, bp_reference, run_gbp
from .region_graph import RegionGraph, bethe_regions

P_MIN, P_MAX = 1e-4, 0.4999
CHANNELS = ("xz", "depolarizing")


class Status(str, Enum):
    SUCCESS = "success"
    FAIL = "fail"


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder knobs.  ``None`` caps resolve per code via :meth:`resolve`.

    Defaults: ``n_mi = 8 d^2``, ``n_mr = 4 d^2``, ``n_reinit`` 10 (binary) or
    100 (quaternary).  The union ("top") hard decision is the default; the
    qubitwise rule stalls on surface codes once d >= 5.
    """

    p_init: float = 0.1
    n_mi: int | None = None
    n_mr: int | None = None
    n_reinit: int | None = None
    gaussian_width: float = 0.1
    hard_decision: str = "top"
    damping: float = 1.0
    tol: float = 1e-6
    seed: int = 0
    channel: str = "xz"
    rep: str = "gf2"

    def __post_init__(self):
        if not 0 < self.p_init < 0.5:
            raise ValueError("p_init must lie in (0, 0.5)")
        for name in ("n_mi", "n_mr"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_reinit is not None and self.n_reinit < 0:
            raise ValueError("n_reinit must be >= 0")
        if self.gaussian_width <= 0:
            raise ValueError("gaussian_width must be positive")
        if self.hard_decision not in HARD_DECISIONS:
            raise ValueError(f"hard_decision must be one of {HARD_DECISIONS}")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if self.rep not in ("gf2", "gf4"):
            raise ValueError("rep must be gf2 or gf4")

    def resolve(self, distance: int) -> "DecoderConfig":
        d2 = distance * distance
        return replace(
            self,
            n_mi=self.n_mi or 8 * d2,
            n_mr=self.n_mr or 4 * d2,
            n_reinit=self.n_reinit if self.n_reinit is not None else (100 if self.rep == "gf4" else 10),
        )

    @classmethod
    def from_file(cls, path, **overrides) -> "DecoderConfig":
        """Load from ``.json`` or ``.toml``; keyword overrides win (None is ignored)."""
        path = Path(path)
        if path.suffix == ".toml":
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            data = tomllib.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        data = data.get("decoder", data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown decoder options: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)


def xz_flip_probability(p: float) -> float:
    """Per-type flip probability ``q`` with ``1 - (1 - q)^2 = p``."""
    return 1.0 - math.sqrt(1.0 - p)


def channel_prior(channel: str, alphabet: int, p: float, n_qubits: int) -> np.ndarray:
    """Per-qubit prior table for a channel at error rate ``p``.

    ``p`` is the probability that a qubit suffers any error.  Binary halves
    use the marginal flip probability (:func:`xz_flip_probability` for the XZ
    channel, ``2p/3`` for depolarizing); the quaternary alphabet is ordered
    I, X, Z, Y.
    """
    if channel == "xz":
        q = xz_flip_probability(p)
        if alphabet == 2:
            row = [1 - q, q]
        else:
            row = [(1 - q) ** 2, q * (1 - q), q * (1 - q), q * q]
    elif channel == "depolarizing":
        row = [1 - 2 * p / 3, 2 * p / 3] if alphabet == 2 else [1 - p, p / 3, p / 3, p / 3]
    else:
        raise ValueError(f"unknown channel {channel!r}")
    return np.tile(np.asarray(row, dtype=np.float64), (n_qubits, 1))


def clamp_p(p: float) -> float:
    return min(max(p, P_MIN), P_MAX)


@dataclass
class DecodeOutcome:
    """Result on one Tanner graph; ``guess`` is over the graph's local alphabet."""

    guess: np.ndarray
    status: Status
    repetitions: int = 0
    reinits: int = 0
    iterations: int = 0
    stages: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status is Status.SUCCESS

    def to_json(self) -> dict:
        return {
            "guess": [int(v) for v in self.guess],
            "status": self.status.value,
            "repetitions": self.repetitions,
            "reinits": self.reinits,
            "iterations": self.iterations,
            "stages": self.stages,
        }


def split_repeat_decode(tanner: TannerGraph, rg: RegionGraph, syndrome, cfg: DecoderConfig,
                        p_init: float | None = None, keep_traces: bool = False) -> DecodeOutcome:
    """Run GBP on the residual syndrome, accumulate guesses, repeat up to ``n_mr`` times.

    Before each run the prior is rescaled to ``|p_init - wt(total)/n|``
    (clamped to [1e-4, 0.4999]).  ``cfg`` must be resolved.
    """
    s = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
    n = tanner.n_qubits
    p_init = cfg.p_init if p_init is None else p_init
    total = np.zeros(n, dtype=np.uint8)
    if not s.any():
        return DecodeOutcome(total, Status.SUCCESS)
    residual = s.copy()
    iterations = 0
    stages = []
    for i in range(cfg.n_mr):
        weight = int(np.count_nonzero(total))
        p_tilde = clamp_p(abs(p_init - weight / n))
        prior = channel_prior(cfg.channel, tanner.alphabet, p_tilde, n)
        try:
            guess, diag = run_gbp(rg, residual, prior, cfg.n_mi, cfg.damping, cfg.tol, cfg.hard_decision)
        except InconsistentRegionError:
            break
        iterations += diag.iterations
        total = _add(total, guess, tanner.alphabet)
        produced = tanner.syndrome(guess)
        residual = residual ^ produced
        stage = {"repetition": i, "p_tilde": p_tilde, "iterations": diag.iterations,
                 "residual_weight": int(residual.sum()), "guess_weight": int(np.count_nonzero(total)),
                 "stop": "solved" if diag.solved else ("converged" if diag.converged else "cap")}
        if keep_traces:
            stage["trace"] = diag.to_json()["trace"]
        stages.append(stage)
        if not residual.any():
            return DecodeOutcome(total, Status.SUCCESS, i + 1, 0, iterations, stages)
    return DecodeOutcome(total, Status.FAIL, len(stages), 0, iterations, stages)


def _add(a: np.ndarray, b: np.ndarray, alphabet: int) -> np.ndarray:
    # binary and GF(4) addition are both XOR in the 2-bit encoding
    return (a ^ b).astype(np.uint8)


def decode_with_reinit(tanner: TannerGraph, rg: RegionGraph, syndrome, cfg: DecoderConfig,
                       rng: np.random.Generator | None = None, keep_traces: bool = False) -> DecodeOutcome:
    """Split-and-repeat; on Fail redraw ``p_init ~ N(p_channel, width)`` up to ``n_reinit`` times."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    out = split_repeat_decode(tanner, rg, syndrome, cfg, keep_traces=keep_traces)
    iterations, repetitions = out.iterations, out.repetitions
    stages = list(out.stages)
    reinits = 0
    while not out.success and reinits < cfg.n_reinit:
        reinits += 1
        p = clamp_p(float(rng.normal(cfg.p_init, cfg.gaussian_width)))
        out = split_repeat_decode(tanner, rg, syndrome, cfg, p_init=p, keep_traces=keep_traces)
        iterations += out.iterations
        repetitions += out.repetitions
        stages += [dict(st, reinit=reinits, p_init=p) for st in out.stages]
    out.reinits = reinits
    out.iterations = iterations
    out.repetitions = repetitions
    out.stages = stages
    return out


# ---------------------------------------------------------------------------
# whole-code decoding
# ---------------------------------------------------------------------------

@dataclass
class CodeDecodeOutcome:
    guess: PauliVector
    status: Status
    repetitions: int
    reinits: int
    iterations: int
    parts: dict

    @property
    def success(self) -> bool:
        return self.status is Status.SUCCESS

    def to_json(self) -> dict:
        return {
            "guess": str(self.guess),
            "status": self.status.value,
            "repetitions": self.repetitions,
            "reinits": self.reinits,
            "iterations": self.iterations,
            "parts": {k: v.to_json() for k, v in self.parts.items()},
        }


_RG_CACHE: dict = {}


def regions_for(tanner: TannerGraph) -> RegionGraph:
    key = id(tanner)
    hit = _RG_CACHE.get(key)
    if hit is None or hit[0] is not tanner:
        hit = (tanner, bethe_regions(tanner))
        _RG_CACHE[key] = hit
    return hit[1]


def code_distance_hint(code: StabilizerCode) -> int:
    return code.d if code.d else max(3, math.isqrt(code.n_checks))


def decoding_problems(code: StabilizerCode, rep: str):
    """``[(label, tanner, syndrome rows)]``; binary halves for CSS codes in gf2 mode."""
    if rep == "gf4":
        return [("joint", code.tanner, np.arange(code.n_checks))]
    if not code.is_css:
        raise ValueError(f"{code.name} is not CSS; use rep='gf4'")
    # X-type checks see Z errors, Z-type checks see X errors
    return [("z", code.tanner_x_checks, code.x_check_rows), ("x", code.tanner_z_checks, code.z_check_rows)]


def decode(code: StabilizerCode, syndrome, cfg: DecoderConfig, decoder: str = "gbp",
           rng: np.random.Generator | None = None, keep_traces: bool = False) -> CodeDecodeOutcome:
    """Decode a full-code syndrome.  ``decoder`` is "gbp" (split-repeat with
    re-initialization) or "bp" (plain reference BP, Fail if the guess does not
    reproduce the syndrome)."""
    s = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
    if s.size != code.n_checks:
        raise ValueError(f"syndrome length {s.size} != {code.n_checks}")
    cfg = cfg.resolve(code_distance_hint(code))
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    parts = {}
    for label, tanner, rows in decoding_problems(code, cfg.rep):
        sub = s[rows]
        if decoder == "gbp":
            parts[label] = decode_with_reinit(tanner, regions_for(tanner), sub, cfg, rng, keep_traces)
        elif decoder == "bp":
            prior = channel_prior(cfg.channel, tanner.alphabet, cfg.p_init, tanner.n_qubits)
            guess, _ = bp_reference(tanner, sub, prior, cfg.n_mi)
            ok = np.array_equal(tanner.syndrome(guess), sub)
            parts[label] = DecodeOutcome(guess, Status.SUCCESS if ok else Status.FAIL)
        else:
            raise ValueError(f"unknown decoder {decoder!r}")
    n = code.n_qubits
    if cfg.rep == "gf4":
        guess = PauliVector(GF4, parts["joint"].guess).to_gf2()
    else:
        guess = PauliVector.from_xz(parts["x"].guess, parts["z"].guess)
    ok = all(p.success for p in parts.values())
    return CodeDecodeOutcome(
        guess,
        Status.SUCCESS if ok else Status.FAIL,
        sum(p.repetitions for p in parts.values()),
        sum(p.reinits for p in parts.values()),
        sum(p.iterations for p in parts.values()),
        parts,
    )
