"""Parent-to-child generalized belief propagation on region graphs.

Two engines share one state interface:

* a compiled engine for Bethe region graphs (one region per check over
  single-qubit regions), used for all decoding runs;
* a table-based engine that follows the shadow/blanket belief rule literally
  for any region graph.  It is slow and serves as the reference.

Message and belief tables are indexed by local configurations in
lexicographic order, first (lowest-index) qubit most significant, so
``argmax`` ties resolve to the lexicographically smallest configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .codes import TannerGraph
from .region_graph import RegionGraph

EPS = 1e-30
LOG_EPS = math.log(EPS)

HARD_DECISIONS = ("qubitwise", "top")


class InconsistentRegionError(ValueError):
    """A region belief vanished everywhere (no configuration satisfies its checks)."""


def _configs(alphabet: int, k: int) -> np.ndarray:
    """All ``alphabet**k`` configurations, lexicographic, shape (alphabet**k, k)."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((alphabet,) * k).reshape(k, -1).T
    return grids.astype(np.int64)


def _log_normalize(x: np.ndarray) -> np.ndarray:
    m = np.max(x)
    if not np.isfinite(m):
        raise InconsistentRegionError("belief table is zero everywhere")
    return x - (m + np.log(np.sum(np.exp(x - m))))


# ---------------------------------------------------------------------------
# compiled Bethe kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _bethe_beliefs(A, chk_ptr, edge_q, edge_par, syn, lp, lm, qubit_ptr, qubit_edges, small_cn,
                   marg, lbq, best_val, edge_digit):
    """Region beliefs for the current messages.

    Fills ``marg`` (large-region marginal per edge), ``lbq`` (log qubit
    beliefs), ``best_val`` (max large-region belief) and ``edge_digit`` (each
    edge's qubit value in its region's argmax).  Returns (U, S, status) with
    status -1 on success, else the index of a check whose belief vanished.
    """
    n_q = lp.shape[0]
    n_c = chk_ptr.shape[0] - 1
    S_q = np.zeros((n_q, A))
    for q in range(n_q):
        for i in range(qubit_ptr[q], qubit_ptr[q + 1]):
            e = qubit_edges[i]
            for a in range(A):
                S_q[q, a] += lm[e, a]
    U = 0.0
    S = 0.0
    max_deg = 0
    for c in range(n_c):
        max_deg = max(max_deg, chk_ptr[c + 1] - chk_ptr[c])
    size = A ** max_deg
    logw = np.empty(size)
    digits = np.zeros(max_deg, dtype=np.int64)
    L = np.empty((max_deg, A))
    status = -1
    for c in range(n_c):
        base = chk_ptr[c]
        k = chk_ptr[c + 1] - base
        n_cfg = A ** k
        for j in range(k):
            e = base + j
            q = edge_q[e]
            for a in range(A):
                L[j, a] = lp[q, a] + S_q[q, a] - lm[e, a]
            digits[j] = 0
        best = -np.inf
        best_t = -1
        for t in range(n_cfg):
            par = 0
            w = 0.0
            for j in range(k):
                par ^= edge_par[base + j, digits[j]]
                w += L[j, digits[j]]
            if par != syn[c]:
                w = -np.inf
            logw[t] = w
            if w > best:
                best = w
                best_t = t
            # odometer increment, last qubit least significant
            j = k - 1
            while j >= 0:
                digits[j] += 1
                if digits[j] < A:
                    break
                digits[j] = 0
                j -= 1
        for j in range(k):
            for a in range(A):
                marg[base + j, a] = 0.0
        if best_t < 0 or best == -np.inf:
            status = c
            for j in range(k):
                edge_digit[base + j] = 0
            best_val[c] = 0.0
            continue
        Z = 0.0
        for t in range(n_cfg):
            Z += math.exp(logw[t] - best)
        logZ = best + math.log(Z)
        for j in range(k):
            digits[j] = 0
        for t in range(n_cfg):
            if logw[t] > -np.inf:
                b = math.exp(logw[t] - logZ)
                if b > 0.0:
                    S -= b * (logw[t] - logZ)
                    for j in range(k):
                        marg[base + j, digits[j]] += b
                        lpq = lp[edge_q[base + j], digits[j]]
                        if lpq == -np.inf:
                            U = np.inf
                        else:
                            U -= b * lpq
            j = k - 1
            while j >= 0:
                digits[j] += 1
                if digits[j] < A:
                    break
                digits[j] = 0
                j -= 1
        best_val[c] = math.exp(best - logZ)
        rem = best_t
        for j in range(k - 1, -1, -1):
            edge_digit[base + j] = rem % A
            rem //= A
    for q in range(n_q):
        m = -np.inf
        for a in range(A):
            lbq[q, a] = lp[q, a] + S_q[q, a]
            m = max(m, lbq[q, a])
        if m == -np.inf:
            status = n_c + q
            continue
        z = 0.0
        for a in range(A):
            z += math.exp(lbq[q, a] - m)
        lz = m + math.log(z)
        for a in range(A):
            lbq[q, a] -= lz
        cn = small_cn[q]
        if cn != 0:
            for a in range(A):
                b = math.exp(lbq[q, a])
                if b > 0.0:
                    S -= cn * b * lbq[q, a]
                    if lp[q, a] == -np.inf:
                        U = np.inf
                    else:
                        U -= cn * b * lp[q, a]
    return U, S, status


@numba.njit(cache=True)
def _bethe_update(A, edge_q, edge_active, lm, marg, lbq, damping, log_eps):
    """Multiplicative parent-to-child update; returns (max change, clamp events)."""
    n_e = lm.shape[0]
    max_change = 0.0
    clamps = 0
    new = np.empty(A)
    for e in range(n_e):
        if not edge_active[e]:
            continue
        q = edge_q[e]
        top = -np.inf
        for a in range(A):
            num = marg[e, a]
            den = lbq[q, a]
            if num < math.exp(log_eps):
                num = math.exp(log_eps)
                clamps += 1
            if den < log_eps:
                den = log_eps
                clamps += 1
            new[a] = lm[e, a] + damping * (math.log(num) - den)
            top = max(top, new[a])
        z = 0.0
        for a in range(A):
            z += math.exp(new[a] - top)
        lz = top + math.log(z)
        for a in range(A):
            new[a] -= lz
            if new[a] < log_eps:
                new[a] = log_eps
        z = 0.0
        for a in range(A):
            z += math.exp(new[a])
        lz = math.log(z)
        for a in range(A):
            v = new[a] - lz
            d = abs(math.exp(v) - math.exp(lm[e, a]))
            if d > max_change:
                max_change = d
            lm[e, a] = v
    return max_change, clamps


@numba.njit(cache=True)
def _bethe_decide(A, qubit_ptr, qubit_edges, edge_chk, edge_digit, best_val, lbq, qubitwise, out):
    n_q = out.shape[0]
    for q in range(n_q):
        lo = qubit_ptr[q]
        hi = qubit_ptr[q + 1]
        if lo == hi:
            # isolated qubit: its own region (c=1) decides
            best = 0
            for a in range(1, A):
                if lbq[q, a] > lbq[q, best]:
                    best = a
            out[q] = best
            continue
        if qubitwise:
            bi = qubit_edges[lo]
            for i in range(lo + 1, hi):
                e = qubit_edges[i]
                if best_val[edge_chk[e]] > best_val[edge_chk[bi]]:
                    bi = e
            out[q] = edge_digit[bi]
        else:
            v = 0
            for i in range(lo, hi):
                d = edge_digit[qubit_edges[i]]
                if d != 0:
                    v = d
                    break
            out[q] = v


@numba.njit(cache=True)
def _syndrome_weight_diff(chk_ptr, edge_q, edge_par, x, syn):
    n_c = chk_ptr.shape[0] - 1
    w = 0
    for c in range(n_c):
        par = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            par ^= edge_par[e, x[edge_q[e]]]
        if par != syn[c]:
            w += 1
    return w


@numba.njit(cache=True)
def _bethe_run(A, chk_ptr, edge_q, edge_chk, edge_par, edge_active, syn, lp, lm, qubit_ptr, qubit_edges,
               small_cn, n_mi, damping, tol, qubitwise, log_eps,
               marg, lbq, best_val, edge_digit, out, trace):
    """Full inner loop; trace rows are (max_change, U, S, F, residual weight).

    Returns (iterations, stop reason, clamp events, status); stop reason is
    0 = solved, 1 = messages converged, 2 = iteration cap.
    """
    clamps = 0
    U, S, status = _bethe_beliefs(A, chk_ptr, edge_q, edge_par, syn, lp, lm, qubit_ptr, qubit_edges,
                                  small_cn, marg, lbq, best_val, edge_digit)
    if status >= 0:
        return 0, 2, clamps, status
    _bethe_decide(A, qubit_ptr, qubit_edges, edge_chk, edge_digit, best_val, lbq, qubitwise, out)
    res = _syndrome_weight_diff(chk_ptr, edge_q, edge_par, out, syn)
    trace[0, 0] = np.nan
    trace[0, 1] = U
    trace[0, 2] = S
    trace[0, 3] = U - S
    trace[0, 4] = res
    # the uniform-message guess is only taken for a trivial syndrome
    if res == 0 and not syn.any():
        return 0, 0, clamps, status
    for it in range(1, n_mi + 1):
        mc, cl = _bethe_update(A, edge_q, edge_active, lm, marg, lbq, damping, log_eps)
        clamps += cl
        U, S, status = _bethe_beliefs(A, chk_ptr, edge_q, edge_par, syn, lp, lm, qubit_ptr, qubit_edges,
                                      small_cn, marg, lbq, best_val, edge_digit)
        if status >= 0:
            return it, 2, clamps, status
        _bethe_decide(A, qubit_ptr, qubit_edges, edge_chk, edge_digit, best_val, lbq, qubitwise, out)
        res = _syndrome_weight_diff(chk_ptr, edge_q, edge_par, out, syn)
        trace[it, 0] = mc
        trace[it, 1] = U
        trace[it, 2] = S
        trace[it, 3] = U - S
        trace[it, 4] = res
        if res == 0:
            return it, 0, clamps, status
        if mc < tol:
            return it, 1, clamps, status
    return n_mi, 2, clamps, status


def _bethe_layout(rg: RegionGraph) -> dict:
    """Static CSR arrays of a Bethe region graph, computed once per graph."""
    cached = getattr(rg, "_bethe_layout", None)
    if cached is not None:
        return cached
    t = rg.tanner
    A = t.alphabet
    chk_ptr = np.zeros(t.n_checks + 1, dtype=np.int64)
    eq, ec, par = [], [], []
    for c, (qs, labs) in enumerate(zip(t.check_qubits, t.check_labels)):
        chk_ptr[c + 1] = chk_ptr[c] + len(qs)
        for q, lab in zip(qs, labs):
            eq.append(q)
            ec.append(c)
            par.append(t.parity_table(lab))
    edge_q = np.array(eq, dtype=np.int64)
    edge_chk = np.array(ec, dtype=np.int64)
    qubit_ptr = np.zeros(t.n_qubits + 1, dtype=np.int64)
    np.add.at(qubit_ptr, edge_q + 1, 1)
    qubit_ptr = np.cumsum(qubit_ptr)
    deg = np.diff(qubit_ptr)
    layout = {
        "chk_ptr": chk_ptr,
        "edge_q": edge_q,
        "edge_chk": edge_chk,
        "edge_par": np.array(par, dtype=np.int64).reshape(-1, A),
        "qubit_edges": np.lexsort((edge_chk, edge_q)).astype(np.int64),
        "qubit_ptr": qubit_ptr,
        "small_cn": np.where(deg == 1, 0, 1 - deg).astype(np.int64),
        "edge_active": deg[edge_q] != 1,
    }
    rg._bethe_layout = layout
    return layout


class _BetheEngine:
    def __init__(self, rg: RegionGraph, syndrome: np.ndarray, log_prior: np.ndarray):
        t = rg.tanner
        self.rg = rg
        self.A = t.alphabet
        self.n_c, self.n_q = t.n_checks, t.n_qubits
        layout = _bethe_layout(rg)
        for k, v in layout.items():
            setattr(self, k, v)
        n_e = len(self.edge_q)
        self.syn = np.asarray(syndrome, dtype=np.int64)
        self.lp = np.ascontiguousarray(log_prior, dtype=np.float64)
        self.lm = np.zeros((n_e, self.A))
        self.lm[self.edge_active] = -math.log(self.A)
        self.marg = np.zeros((n_e, self.A))
        self.lbq = np.zeros((self.n_q, self.A))
        self.best_val = np.zeros(self.n_c)
        self.edge_digit = np.zeros(n_e, dtype=np.int64)
        self.U = self.S = float("nan")
        self.fresh = False

    def beliefs(self):
        if not self.fresh:
            U, S, status = _bethe_beliefs(self.A, self.chk_ptr, self.edge_q, self.edge_par, self.syn, self.lp,
                                          self.lm, self.qubit_ptr, self.qubit_edges, self.small_cn,
                                          self.marg, self.lbq, self.best_val, self.edge_digit)
            if status >= 0:
                raise InconsistentRegionError(f"belief of region {status} vanished")
            self.U, self.S = U, S
            self.fresh = True

    def update(self, damping: float) -> tuple[float, int]:
        self.beliefs()
        mc, clamps = _bethe_update(self.A, self.edge_q, self.edge_active, self.lm, self.marg, self.lbq,
                                   damping, LOG_EPS)
        self.fresh = False
        return mc, clamps

    def decide(self, mode: str) -> np.ndarray:
        self.beliefs()
        out = np.zeros(self.n_q, dtype=np.int64)
        _bethe_decide(self.A, self.qubit_ptr, self.qubit_edges, self.edge_chk, self.edge_digit,
                      self.best_val, self.lbq, mode == "qubitwise", out)
        return out.astype(np.uint8)

    def free_energy(self) -> tuple[float, float, float]:
        self.beliefs()
        return self.U, self.S, self.U - self.S

    def region_belief(self, r: int) -> np.ndarray:
        self.beliefs()
        if r >= self.n_c:
            return np.exp(self.lbq[r - self.n_c])
        base, k = self.chk_ptr[r], self.chk_ptr[r + 1] - self.chk_ptr[r]
        cfg = _configs(self.A, k)
        S_q = np.zeros((self.n_q, self.A))
        np.add.at(S_q, self.edge_q, self.lm)
        logw = np.zeros(len(cfg))
        par = np.zeros(len(cfg), dtype=np.int64)
        for j in range(k):
            e = base + j
            q = self.edge_q[e]
            logw += (self.lp[q] + S_q[q] - self.lm[e])[cfg[:, j]]
            par ^= self.edge_par[e][cfg[:, j]]
        logw[par != self.syn[r]] = -np.inf
        return np.exp(_log_normalize(logw))

    def messages(self) -> dict:
        n_c = self.n_c
        return {(int(self.edge_chk[e]), n_c + int(self.edge_q[e])): np.exp(self.lm[e])
                for e in np.flatnonzero(self.edge_active)}


class _GeneralEngine:
    """Literal shadow/blanket beliefs and parent-to-child updates on any region graph."""

    def __init__(self, rg: RegionGraph, syndrome: np.ndarray, log_prior: np.ndarray):
        t = rg.tanner
        self.rg = rg
        self.A = t.alphabet
        self.syn = np.asarray(syndrome, dtype=np.int64)
        self.lp = np.asarray(log_prior, dtype=np.float64)
        self.ids = sorted(rg.regions)
        self.cfg = {}
        self.local = {}
        for r in self.ids:
            reg = rg.regions[r]
            cfg = _configs(self.A, len(reg.qubits))
            pos = {q: j for j, q in enumerate(reg.qubits)}
            logf = np.zeros(len(cfg))
            for q, j in pos.items():
                logf += self.lp[q][cfg[:, j]]
            for c in reg.checks:
                par = np.zeros(len(cfg), dtype=np.int64)
                for q, lab in zip(t.check_qubits[c], t.check_labels[c]):
                    par ^= t.parity_table(lab).astype(np.int64)[cfg[:, pos[q]]]
                logf[par != self.syn[c]] = -np.inf
            self.cfg[r] = cfg
            self.local[r] = logf
        self.lm = {}
        for p, c in rg.edges:
            n = self.A ** len(rg.regions[c].qubits)
            self.lm[(p, c)] = np.full(n, -math.log(n))
        # for each region r: the messages entering its belief, with index maps
        self.inbound = {}
        for r in self.ids:
            shadow = rg.shadow(r)
            blanket = rg.blanket(r)
            entries = []
            for a, b in rg.edges:
                if a in blanket and b in shadow:
                    entries.append(((a, b), self._index_map(r, b)))
            self.inbound[r] = entries
        self.proj = {(p, c): self._index_map(p, c) for p, c in rg.edges}
        self._beliefs = None

    def _index_map(self, r, b) -> np.ndarray:
        """Index of the sub-configuration on region b's qubits for every config of r."""
        rq = self.rg.regions[r].qubits
        bq = self.rg.regions[b].qubits
        pos = [rq.index(q) for q in bq]
        idx = np.zeros(len(self.cfg[r]), dtype=np.int64)
        for j in pos:
            idx = idx * self.A + self.cfg[r][:, j]
        return idx

    def _log_belief(self, r) -> np.ndarray:
        x = self.local[r].copy()
        for key, idx in self.inbound[r]:
            x += self.lm[key][idx]
        return _log_normalize(x)

    def beliefs(self):
        if self._beliefs is None:
            self._beliefs = {r: self._log_belief(r) for r in self.ids}
        return self._beliefs

    def update(self, damping: float) -> tuple[float, int]:
        lb = self.beliefs()
        new = {}
        max_change, clamps = 0.0, 0
        for (p, c), idx in self.proj.items():
            bp = np.exp(lb[p])
            num = np.bincount(idx, weights=bp, minlength=len(lb[c]))
            clamps += int(np.sum(num < EPS)) + int(np.sum(lb[c] < LOG_EPS))
            ratio = np.log(np.maximum(num, EPS)) - np.maximum(lb[c], LOG_EPS)
            m = self.lm[(p, c)] + damping * ratio
            m = np.maximum(_log_normalize(m), LOG_EPS)
            m = _log_normalize(m)
            max_change = max(max_change, float(np.max(np.abs(np.exp(m) - np.exp(self.lm[(p, c)])))))
            new[(p, c)] = m
        self.lm = new
        self._beliefs = None
        return max_change, clamps

    def region_belief(self, r) -> np.ndarray:
        return np.exp(self.beliefs()[r])

    def decide(self, mode: str) -> np.ndarray:
        lb = self.beliefs()
        n = self.rg.tanner.n_qubits
        out = np.zeros(n, dtype=np.uint8)
        score = np.full(n, -np.inf)
        decided = np.zeros(n, dtype=bool)
        for r in self.rg.top_regions():
            t = int(np.argmax(lb[r]))
            val = lb[r][t]
            for j, q in enumerate(self.rg.regions[r].qubits):
                d = self.cfg[r][t, j]
                if mode == "qubitwise":
                    if val > score[q]:
                        score[q], out[q] = val, d
                elif d != 0 and not decided[q]:
                    out[q], decided[q] = d, True
        return out

    def free_energy(self) -> tuple[float, float, float]:
        lb = self.beliefs()
        U = S = 0.0
        for r in self.ids:
            cr = self.rg.regions[r].counting_number
            if cr == 0:
                continue
            b = np.exp(lb[r])
            sup = b > 0
            energy = np.zeros(len(b))
            for j, q in enumerate(self.rg.regions[r].qubits):
                energy -= self.lp[q][self.cfg[r][:, j]]
            if np.any(np.isinf(energy[sup])):
                U = np.inf
            else:
                U += cr * float(np.sum(b[sup] * energy[sup]))
            S -= cr * float(np.sum(b[sup] * lb[r][sup]))
        return U, S, U - S

    def messages(self) -> dict:
        return {k: np.exp(v) for k, v in self.lm.items()}


# ---------------------------------------------------------------------------
# public state API
# ---------------------------------------------------------------------------

@dataclass
class Diagnostics:
    iterations: int = 0
    converged: bool = False
    solved: bool = False
    residual_weight: int = 0
    clamp_events: int = 0
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "solved": self.solved,
            "residual_weight": self.residual_weight,
            "clamp_events": self.clamp_events,
            "trace": [
                {"iteration": i, "max_change": mc, "U": U, "S": S, "F": F, "residual_weight": w}
                for i, mc, U, S, F, w in self.trace
            ],
        }


@dataclass
class GbpState:
    rg: RegionGraph
    syndrome: np.ndarray
    prior: np.ndarray
    engine: object = field(repr=False)
    iteration: int = 0
    max_change: float = float("inf")
    clamp_events: int = 0
    trace: list = field(default_factory=list)

    @property
    def messages(self) -> dict:
        """``{(parent, child): table}`` for every region-graph edge."""
        return self.engine.messages()


def _check_prior(prior, n_qubits: int, alphabet: int) -> np.ndarray:
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (n_qubits, alphabet):
        raise ValueError(f"prior shape {prior.shape} != ({n_qubits}, {alphabet})")
    if np.any(prior < 0) or np.any(np.abs(prior.sum(axis=1) - 1) > 1e-12):
        raise ValueError("prior rows must be probability distributions")
    return prior


def _log(prior: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(prior)


def init_state(rg: RegionGraph, syndrome, prior, engine: str = "auto") -> GbpState:
    """Uniform messages, iteration 0.  ``engine`` is "auto", "bethe" or "general"."""
    t = rg.tanner
    syndrome = np.asarray(syndrome, dtype=np.uint8).reshape(-1)
    if syndrome.size != t.n_checks:
        raise ValueError(f"syndrome length {syndrome.size} != {t.n_checks} checks")
    prior = _check_prior(prior, t.n_qubits, t.alphabet)
    if engine == "auto":
        engine = "bethe" if rg.is_bethe else "general"
    if engine == "bethe":
        if not rg.is_bethe:
            raise ValueError("compiled engine needs a Bethe region graph")
        eng = _BetheEngine(rg, syndrome, _log(prior))
    elif engine == "general":
        eng = _GeneralEngine(rg, syndrome, _log(prior))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return GbpState(rg, syndrome, prior, eng)


def region_belief(state: GbpState, r: int) -> np.ndarray:
    """Normalized belief table of region ``r`` over its qubits' configurations."""
    if r not in state.rg:
        raise KeyError(f"unknown region id {r}")
    return state.engine.region_belief(r)


def update_messages(state: GbpState, damping: float = 1.0) -> float:
    """One synchronous sweep of parent-to-child updates; returns the max entry change."""
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    mc, clamps = state.engine.update(damping)
    state.iteration += 1
    state.max_change = mc
    state.clamp_events += clamps
    return mc


def hard_decision_top(state: GbpState) -> np.ndarray:
    """Union of per-region argmax assignments over the c_r = 1 regions.

    A qubit is set to the first nonzero value among its regions (lowest id).
    """
    return state.engine.decide("top")


def hard_decision_qubitwise(state: GbpState) -> np.ndarray:
    """Each qubit follows the containing top region with the largest belief maximum."""
    return state.engine.decide("qubitwise")


def hard_decision(state: GbpState, mode: str = "qubitwise") -> np.ndarray:
    if mode not in HARD_DECISIONS:
        raise ValueError(f"unknown hard decision {mode!r}")
    return state.engine.decide(mode)


def free_energy(state: GbpState) -> tuple[float, float, float]:
    """Region-based ``(U, S, F = U - S)`` of the current beliefs."""
    return state.engine.free_energy()


def run_gbp(rg: RegionGraph, syndrome, prior, n_mi: int, damping: float = 1.0, tol: float = 1e-6,
            mode: str = "qubitwise", engine: str = "auto") -> tuple[np.ndarray, Diagnostics]:
    """Iterate until the guess reproduces the syndrome, messages settle, or ``n_mi`` sweeps."""
    if n_mi < 1:
        raise ValueError("n_mi must be >= 1")
    if mode not in HARD_DECISIONS:
        raise ValueError(f"unknown hard decision {mode!r}")
    state = init_state(rg, syndrome, prior, engine)
    eng = state.engine
    if isinstance(eng, _BetheEngine):
        out = np.zeros(eng.n_q, dtype=np.int64)
        trace = np.full((n_mi + 1, 5), np.nan)
        it, reason, clamps, status = _bethe_run(
            eng.A, eng.chk_ptr, eng.edge_q, eng.edge_chk, eng.edge_par, eng.edge_active, eng.syn, eng.lp,
            eng.lm, eng.qubit_ptr, eng.qubit_edges, eng.small_cn, n_mi, damping, tol, mode == "qubitwise",
            LOG_EPS, eng.marg, eng.lbq, eng.best_val, eng.edge_digit, out, trace)
        if status >= 0:
            raise InconsistentRegionError(f"belief of region {status} vanished")
        rows = [(i, None if i == 0 else float(r[0]), float(r[1]), float(r[2]), float(r[3]), int(r[4]))
                for i, r in enumerate(trace[: it + 1])]
        diag = Diagnostics(it, reason in (0, 1), reason == 0, rows[-1][5], clamps, rows)
        return out.astype(np.uint8), diag

    tanner = rg.tanner
    diag = Diagnostics()
    guess = hard_decision(state, mode)
    res = int(np.count_nonzero(tanner.syndrome(guess) != state.syndrome))
    diag.trace.append((0, None, *free_energy(state), res))
    while (res or (state.iteration == 0 and state.syndrome.any())) and state.iteration < n_mi:
        mc = update_messages(state, damping)
        guess = hard_decision(state, mode)
        res = int(np.count_nonzero(tanner.syndrome(guess) != state.syndrome))
        diag.trace.append((state.iteration, mc, *free_energy(state), res))
        if mc < tol:
            diag.converged = True
            break
    diag.iterations = state.iteration
    diag.solved = res == 0
    diag.converged = diag.converged or diag.solved
    diag.residual_weight = res
    diag.clamp_events = state.clamp_events
    return guess, diag


# ---------------------------------------------------------------------------
# textbook BP (flooding), the reference the Bethe engine must reproduce
# ---------------------------------------------------------------------------

def bp_reference(tanner: TannerGraph, syndrome, prior, n_mi: int, stop_on_syndrome: bool = True):
    """Sum-product BP with qubit-to-check / check-to-qubit messages.

    The check rule uses the parity bias ``P(even) - P(odd)`` of each incoming
    message, so no configuration enumeration is involved.  Returns the
    per-qubit argmax guess and the qubit marginals ``(n_qubits, alphabet)``.
    """
    A = tanner.alphabet
    syndrome = np.asarray(syndrome, dtype=np.int64).reshape(-1)
    prior = _check_prior(prior, tanner.n_qubits, A)
    n_c = tanner.n_checks
    deg = [len(q) for q in tanner.check_qubits]
    D = max(deg, default=0)
    # padded (check, slot) layout
    qidx = np.zeros((n_c, D), dtype=np.int64)
    mask = np.zeros((n_c, D), dtype=bool)
    sign = np.zeros((n_c, D, A))  # +1 where symbol contributes parity 0, -1 otherwise
    for c, (qs, labs) in enumerate(zip(tanner.check_qubits, tanner.check_labels)):
        for j, (q, lab) in enumerate(zip(qs, labs)):
            qidx[c, j] = q
            mask[c, j] = True
            sign[c, j] = 1.0 - 2.0 * tanner.parity_table(lab)
    s_sign = (1.0 - 2.0 * syndrome)[:, None]
    par_tab = (sign < 0).astype(np.int64)

    def satisfies(x):
        bits = np.take_along_axis(par_tab, x[qidx][..., None], axis=2)[..., 0] & mask
        return np.array_equal(np.bitwise_xor.reduce(bits, axis=1), syndrome)

    c2q = np.where(mask[..., None], 1.0 / A, 1.0)
    marg = prior.copy()
    guess = np.argmax(marg, axis=1)
    for _ in range(n_mi):
        # qubit -> check: prior times all other incoming check messages
        logc2q = np.where(mask[..., None], np.log(np.maximum(c2q, 1e-300)), 0.0)
        tot = np.zeros((tanner.n_qubits, A))
        np.add.at(tot, qidx[mask], logc2q[mask])
        q2c = np.log(np.maximum(prior, 1e-300))[qidx] + tot[qidx] - logc2q
        q2c = np.exp(q2c - q2c.max(axis=2, keepdims=True))
        q2c /= q2c.sum(axis=2, keepdims=True)
        # check -> qubit via products of parity biases of the other qubits
        bias = np.where(mask, np.sum(q2c * sign, axis=2), 1.0)
        prefix = np.cumprod(np.hstack([np.ones((n_c, 1)), bias[:, :-1]]), axis=1)
        suffix = np.flip(np.cumprod(np.flip(np.hstack([bias[:, 1:], np.ones((n_c, 1))]), axis=1), axis=1), axis=1)
        others = prefix * suffix
        c2q = 0.5 * (1.0 + s_sign[..., None] * sign * others[..., None])
        c2q = np.maximum(c2q, 0.0)
        c2q = np.where(mask[..., None], c2q / np.maximum(c2q.sum(axis=2, keepdims=True), 1e-300), 1.0)
        # marginals
        logc2q = np.where(mask[..., None], np.log(np.maximum(c2q, 1e-300)), 0.0)
        tot = np.zeros((tanner.n_qubits, A))
        np.add.at(tot, qidx[mask], logc2q[mask])
        lb = np.log(np.maximum(prior, 1e-300)) + tot
        marg = np.exp(lb - lb.max(axis=1, keepdims=True))
        marg /= marg.sum(axis=1, keepdims=True)
        guess = np.argmax(marg, axis=1)
        if stop_on_syndrome and satisfies(guess):
            break
    return guess.astype(np.uint8), marg
