"""Monte Carlo sampling, parameter sweeps, threshold and scaling estimates."""

from __future__ import annotations

import csv
import io
import math
import os
import time
import zlib
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .codes import ResidualClass, StabilizerCode, classify_residual
from .decoder import CHANNELS, DecoderConfig, Status, decode, xz_flip_probability
from .galois import PauliVector

WORKERS_ENV = "GBPQEC_WORKERS"

CSV_FIELDS = (
    "code", "distance", "channel", "p", "shots", "logical_failures", "decode_failures",
    "mean_iterations", "mean_repetitions", "mean_reinits", "seed",
)


@dataclass(frozen=True)
class NoiseChannel:
    """I.i.d. single-qubit Pauli noise; ``p`` is the probability of any error.

    ``xz``: independent X and Z flips, each with ``q = 1 - sqrt(1 - p)``.
    ``depolarizing``: X, Y, Z each with ``p / 3``.
    """

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if not 0 <= self.p < 0.75:
            raise ValueError("p must lie in [0, 0.75)")

    def probabilities(self) -> np.ndarray:
        """``[P(I), P(X), P(Z), P(Y)]`` in the 2-bit symbol order."""
        if self.kind == "xz":
            q = xz_flip_probability(self.p)
            return np.array([(1 - q) ** 2, q * (1 - q), q * (1 - q), q * q])
        p = self.p
        return np.array([1 - p, p / 3, p / 3, p / 3])


def sample_error(channel: NoiseChannel, n_qubits: int, rng: np.random.Generator) -> PauliVector:
    cdf = np.cumsum(channel.probabilities())
    sym = np.searchsorted(cdf, rng.random(n_qubits), side="right").clip(0, 3).astype(np.uint8)
    return PauliVector.from_xz(sym & 1, sym >> 1)


@dataclass
class ShotRecord:
    index: int
    error: PauliVector
    status: Status
    residual_class: ResidualClass
    iterations: int
    repetitions: int
    reinits: int
    wall_time: float

    @property
    def logical_failure(self) -> bool:
        return self.status is Status.SUCCESS and self.residual_class is ResidualClass.LOGICAL

    @property
    def decode_failure(self) -> bool:
        return self.status is Status.FAIL


class SoundnessError(AssertionError):
    """The decoder reported Success with a guess that misses the syndrome."""


def run_shot(code: StabilizerCode, channel: NoiseChannel, cfg: DecoderConfig, rng: np.random.Generator,
             decoder: str = "gbp", index: int = 0, error: PauliVector | None = None) -> ShotRecord:
    """Sample (or take ``error``), decode its syndrome, classify ``e + guess``."""
    e = sample_error(channel, code.n_qubits, rng) if error is None else error.to_gf2()
    s = code.syndrome(e)
    t0 = time.perf_counter()
    out = decode(code, s, cfg, decoder=decoder, rng=rng)
    dt = time.perf_counter() - t0
    produced = code.syndrome(out.guess)
    if out.success and not np.array_equal(produced, s):
        raise SoundnessError(f"shot {index}: Success guess does not reproduce the syndrome")
    cls = classify_residual(code, e + out.guess)
    return ShotRecord(index, e, out.status, cls, out.iterations, out.repetitions, out.reinits, dt)


@dataclass
class SweepPoint:
    code: str
    distance: int
    channel: str
    p: float
    shots: int
    logical_failures: int = 0
    decode_failures: int = 0
    total_iterations: int = 0
    total_repetitions: int = 0
    total_reinits: int = 0
    seed: int = 0

    @property
    def failures(self) -> int:
        return self.logical_failures + self.decode_failures

    @property
    def failure_rate(self) -> float:
        """Logical plus decode failures per shot."""
        return self.failures / self.shots

    @property
    def logical_rate(self) -> float:
        return self.logical_failures / self.shots

    def mean(self, what: str) -> float:
        return getattr(self, f"total_{what}") / self.shots

    def row(self) -> dict:
        return {
            "code": self.code,
            "distance": self.distance,
            "channel": self.channel,
            "p": f"{self.p:.6g}",
            "shots": self.shots,
            "logical_failures": self.logical_failures,
            "decode_failures": self.decode_failures,
            "mean_iterations": f"{self.mean('iterations'):.6f}",
            "mean_repetitions": f"{self.mean('repetitions'):.6f}",
            "mean_reinits": f"{self.mean('reinits'):.6f}",
            "seed": self.seed,
        }


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)

    def sorted(self) -> "SweepResult":
        return SweepResult(sorted(self.points, key=lambda r: (r.code, r.p)))

    def by_distance(self) -> dict[int, list[SweepPoint]]:
        out: dict[int, list[SweepPoint]] = {}
        for r in sorted(self.points, key=lambda r: (r.distance, r.p)):
            out.setdefault(r.distance, []).append(r)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.sorted().points:
            w.writerow(r.row())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepResult":
        pts = []
        for row in csv.DictReader(io.StringIO(text)):
            shots = int(row["shots"])
            pts.append(SweepPoint(
                row["code"], int(row["distance"]), row["channel"], float(row["p"]), shots,
                int(row["logical_failures"]), int(row["decode_failures"]),
                round(float(row["mean_iterations"]) * shots), round(float(row["mean_repetitions"]) * shots),
                round(float(row["mean_reinits"]) * shots), int(row["seed"]),
            ))
        return cls(pts)


def point_key(code_name: str, p: float) -> tuple[int, int]:
    """Order-independent key of a sweep point, used to derive its RNG streams."""
    return zlib.crc32(code_name.encode()), int(round(p * 1e9))


def shot_rng(seed: int, key: tuple[int, int], shot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*key, shot)))


def _run_chunk(args):
    code, channel, cfg, decoder, seed, key, lo, hi = args
    acc = np.zeros(5, dtype=np.int64)
    for i in range(lo, hi):
        rec = run_shot(code, channel, cfg, shot_rng(seed, key, i), decoder, i)
        acc += (rec.logical_failure, rec.decode_failure, rec.iterations, rec.repetitions, rec.reinits)
    return acc


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_point(code: StabilizerCode, channel: NoiseChannel, shots: int, seed: int,
              cfg: DecoderConfig | None = None, decoder: str = "gbp") -> SweepPoint:
    cfg = replace(cfg or DecoderConfig(), p_init=min(max(channel.p, 1e-4), 0.4999), channel=channel.kind)
    key = point_key(code.name, channel.p)
    workers = min(_workers(), shots) if shots else 1
    bounds = np.linspace(0, shots, workers + 1).astype(int)
    jobs = [(code, channel, cfg, decoder, seed, key, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            parts = pool.map(_run_chunk, jobs)
    else:
        parts = [_run_chunk(j) for j in jobs]
    tot = np.sum(parts, axis=0) if parts else np.zeros(5, dtype=np.int64)
    return SweepPoint(code.name, code.d or 0, channel.kind, channel.p, shots, *(int(v) for v in tot), seed=seed)


def run_sweep(codes, channel: str, ps, shots: int, seed: int, cfg: DecoderConfig | None = None,
              decoder: str = "gbp", progress=None) -> SweepResult:
    """Every (code, p) point; each shot draws from its own stream keyed by (seed, point, shot)."""
    res = SweepResult()
    for code in codes:
        for p in ps:
            pt = run_point(code, NoiseChannel(channel, float(p)), shots, seed, cfg, decoder)
            res.points.append(pt)
            if progress:
                progress(pt)
    return res.sorted()


def parse_grid(text: str) -> list[float]:
    """``"0.10:0.22:0.02"`` (inclusive) or ``"0.05,0.1"``."""
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 10) for i in range(n)]
    return [float(v) for v in text.split(",")]


# ---------------------------------------------------------------------------
# thresholds and scaling
# ---------------------------------------------------------------------------

@dataclass
class ThresholdEstimate:
    mean: float | None
    spread: float | None
    resolution: float
    crossings: dict = field(default_factory=dict)

    @property
    def in_range(self) -> bool:
        return self.mean is not None and all(v is not None for v in self.crossings.values())

    def to_json(self) -> dict:
        return {
            "threshold": self.mean,
            "spread": self.spread,
            "resolution": self.resolution,
            "in_range": self.in_range,
            "crossings": [{"d_small": a, "d_large": b, "p": v} for (a, b), v in sorted(self.crossings.items())],
        }


def _crossing(ps, f_small, f_large) -> float | None:
    """p where the larger code stops beating the smaller one (log-rate interpolation).

    With several sign changes the one most consistent with a single crossing
    wins (fewest points on the wrong side), ties to the lowest p.
    """
    g = np.log(f_small) - np.log(f_large)
    best, best_score = None, None
    for i in range(len(ps) - 1):
        if g[i] > 0 and g[i + 1] <= 0:
            score = int(np.sum(g[: i + 1] <= 0) + np.sum(g[i + 1:] > 0))
            if best_score is None or score < best_score:
                best, best_score = i, score
    if best is None:
        return None
    i = best
    return float(ps[i] + (ps[i + 1] - ps[i]) * g[i] / (g[i] - g[i + 1]))


def estimate_threshold(curves: dict[int, tuple]) -> ThresholdEstimate:
    """``curves[d] = (ps, failure_rates)`` on a shared p grid.

    Each distance pair contributes the crossing of its log failure-rate curves;
    the estimate is their mean, the spread their standard deviation.
    """
    if len(curves) < 2:
        raise ValueError("need at least two distances")
    grids = [np.asarray(ps, dtype=float) for ps, _ in curves.values()]
    ps = grids[0]
    if len(ps) < 3:
        raise ValueError("need at least three p points")
    if any(len(g) != len(ps) or not np.allclose(g, ps) for g in grids):
        raise ValueError("curves must share one p grid")
    order = np.argsort(ps)
    ps = ps[order]
    floor = 1e-12
    rates = {d: np.maximum(np.asarray(f, dtype=float)[order], floor) for d, (_, f) in curves.items()}
    cross = {(a, b): _crossing(ps, rates[a], rates[b]) for a, b in combinations(sorted(rates), 2)}
    found = [v for v in cross.values() if v is not None]
    resolution = float(np.min(np.diff(ps)))
    if not found:
        return ThresholdEstimate(None, None, resolution, cross)
    return ThresholdEstimate(float(np.mean(found)), float(np.std(found)), resolution, cross)


def threshold_from_sweep(result: SweepResult, shots_floor: bool = True) -> ThresholdEstimate:
    """Zero-failure points are floored at half a count so logs stay finite."""
    curves = {}
    for d, pts in result.by_distance().items():
        rates = [max(pt.failures, 0.5 if shots_floor else 0) / pt.shots for pt in pts]
        curves[d] = ([pt.p for pt in pts], rates)
    return estimate_threshold(curves)


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares ``log y = a log x + b``; returns ``(a, exp(b))``."""
    a, b = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(a), float(math.exp(b))


def binomial_sigma(k: int, n: int) -> float:
    p = k / n
    return math.sqrt(max(p * (1 - p), 1.0 / n) / n)
