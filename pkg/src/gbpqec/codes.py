"""Code families: Steane, repetition, random LDPC, hypergraph product and planar surface codes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .galois import (
    GF2,
    GF4,
    GF4_CONJ,
    GF4_MUL,
    GF4_TRACE,
    ParityCheckMatrix,
    PauliVector,
    RowSpace,
    gf2_rank,
    pack_rows,
    symplectic_gf2,
    symplectic_kernel,
    syndrome,
)


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite check/qubit graph with a GF(4) label on every edge.

    ``alphabet`` is 2 for a binary (one CSS half) graph and 4 for the joint
    quaternary graph.  Edge labels are GF(4) symbols of ``H_cq``: for a binary
    graph they are all 1, so the parity contribution of a qubit is its bit.
    """

    n_qubits: int
    check_qubits: tuple[tuple[int, ...], ...]
    check_labels: tuple[tuple[int, ...], ...]
    alphabet: int = 2

    @property
    def n_checks(self) -> int:
        return len(self.check_qubits)

    @classmethod
    def from_binary(cls, H) -> "TannerGraph":
        H = np.atleast_2d(np.asarray(H, dtype=np.uint8))
        qubits = tuple(tuple(int(q) for q in np.flatnonzero(row)) for row in H)
        return cls(H.shape[1], qubits, tuple((1,) * len(q) for q in qubits), 2)

    @classmethod
    def from_gf4(cls, H: ParityCheckMatrix) -> "TannerGraph":
        rows = H.to_gf4().rows
        qubits = tuple(tuple(int(q) for q in np.flatnonzero(row)) for row in rows)
        labels = tuple(tuple(int(rows[c, q]) for q in qs) for c, qs in enumerate(qubits))
        return cls(H.n_qubits, qubits, labels, 4)

    @cached_property
    def qubit_checks(self) -> tuple[tuple[int, ...], ...]:
        nbrs = [[] for _ in range(self.n_qubits)]
        for c, qs in enumerate(self.check_qubits):
            for q in qs:
                nbrs[q].append(c)
        return tuple(tuple(n) for n in nbrs)

    @cached_property
    def edges(self) -> list[tuple[int, int, str]]:
        """``(qubit, check, pauli)`` triples."""
        return [
            (q, c, "IXZY"[lab])
            for c, (qs, labs) in enumerate(zip(self.check_qubits, self.check_labels))
            for q, lab in zip(qs, labs)
        ]

    def parity_table(self, label: int) -> np.ndarray:
        """Parity bit contributed by each local symbol for an edge with this label."""
        if self.alphabet == 2:
            return np.array([0, 1], dtype=np.uint8)
        return GF4_TRACE[GF4_MUL[label, GF4_CONJ[np.arange(4)]]].astype(np.uint8)

    def biadjacency(self) -> np.ndarray:
        """Check x qubit matrix of edge labels (the parity-check matrix)."""
        M = np.zeros((self.n_checks, self.n_qubits), dtype=np.uint8)
        for c, (qs, labs) in enumerate(zip(self.check_qubits, self.check_labels)):
            M[c, list(qs)] = labs
        return M

    @cached_property
    def _edge_arrays(self):
        q = np.array([q for qs in self.check_qubits for q in qs], dtype=np.int64)
        c = np.array([c for c, qs in enumerate(self.check_qubits) for _ in qs], dtype=np.int64)
        par = np.array([self.parity_table(l) for labs in self.check_labels for l in labs],
                       dtype=np.int64).reshape(-1, self.alphabet)
        return q, c, par

    def syndrome(self, x) -> np.ndarray:
        """Syndrome of a local-alphabet assignment ``x`` (length n_qubits)."""
        x = np.asarray(x, dtype=np.int64)
        if x.size != self.n_qubits:
            raise ValueError(f"assignment length {x.size} != {self.n_qubits}")
        q, c, par = self._edge_arrays
        bits = par[np.arange(q.size), x[q]]
        return (np.bincount(c, weights=bits, minlength=self.n_checks).astype(np.int64) & 1).astype(np.uint8)

    def max_check_degree(self) -> int:
        return max((len(q) for q in self.check_qubits), default=0)

    def max_qubit_degree(self) -> int:
        return max((len(c) for c in self.qubit_checks), default=0)


@dataclass(frozen=True)
class ClassicalCode:
    H: np.ndarray = field(repr=False)
    d: int | None = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=np.uint8))
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @cached_property
    def k(self) -> int:
        return self.n - gf2_rank(self.H)


class ResidualClass(str, Enum):
    TRIVIAL = "trivial"
    LOGICAL = "logical"
    DETECTABLE = "detectable"


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    H: ParityCheckMatrix
    k: int
    d: int | None = None
    logical_basis: tuple[PauliVector, ...] = ()
    name: str = "code"

    @property
    def n_qubits(self) -> int:
        return self.H.n_qubits

    @property
    def n_checks(self) -> int:
        return self.H.n_checks

    @cached_property
    def tanner(self) -> TannerGraph:
        return TannerGraph.from_gf4(self.H)

    @cached_property
    def css(self) -> tuple[np.ndarray, np.ndarray] | None:
        return self.H.css_blocks()

    @property
    def is_css(self) -> bool:
        return self.css is not None

    @cached_property
    def tanner_x_checks(self) -> TannerGraph:
        """Binary graph of the X-type checks; they detect Z errors."""
        return TannerGraph.from_binary(self._blocks()[0])

    @cached_property
    def tanner_z_checks(self) -> TannerGraph:
        """Binary graph of the Z-type checks; they detect X errors."""
        return TannerGraph.from_binary(self._blocks()[1])

    def _blocks(self):
        if self.css is None:
            raise ValueError(f"{self.name} is not a CSS code")
        return self.css

    @cached_property
    def x_check_rows(self) -> np.ndarray:
        """Indices (into H) of the X-type checks, in order."""
        n = self.n_qubits
        return np.flatnonzero(self.H.to_gf2().rows[:, :n].any(axis=1))

    @cached_property
    def z_check_rows(self) -> np.ndarray:
        n = self.n_qubits
        return np.flatnonzero(self.H.to_gf2().rows[:, n:].any(axis=1))

    @cached_property
    def stabilizer_space(self) -> RowSpace:
        return RowSpace(self.H.to_gf2().rows, 2 * self.n_qubits)

    def syndrome(self, e: PauliVector) -> np.ndarray:
        return syndrome(self.H, e)

    def to_json(self) -> dict:
        from .io import pcm_to_json

        return {
            "name": self.name,
            "n": self.n_qubits,
            "k": self.k,
            "d": self.d,
            "H": pcm_to_json(self.H),
            "logicals": [str(L) for L in self.logical_basis],
        }


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

_HAMMING = np.array(
    [
        [1, 1, 1, 0, 1, 0, 0],
        [0, 1, 1, 1, 0, 1, 0],
        [0, 0, 1, 0, 1, 1, 1],
    ],
    dtype=np.uint8,
)


def hamming_code() -> ClassicalCode:
    """The [7,4,3] Hamming code in the layout used by the Steane code."""
    return ClassicalCode(_HAMMING, d=3)


def stabilizer_code(H: ParityCheckMatrix, d: int | None = None, name: str = "code",
                    logical_basis=None) -> StabilizerCode:
    k = H.n_qubits - gf2_rank(H.to_gf2().rows)
    if logical_basis is None:
        logical_basis = logical_operators(H)
    return StabilizerCode(H, k, d, tuple(logical_basis), name)


def steane() -> StabilizerCode:
    H = ParityCheckMatrix.from_css(_HAMMING, _HAMMING)
    xl = PauliVector.from_support(7, range(7), "X")
    zl = PauliVector.from_support(7, range(7), "Z")
    return stabilizer_code(H, d=3, name="steane", logical_basis=(xl, zl))


def repetition_code(n: int, cyclic: bool = False) -> ClassicalCode:
    if n < 2:
        raise ValueError("repetition code needs n >= 2")
    rows = n if cyclic else n - 1
    H = np.zeros((rows, n), dtype=np.uint8)
    for i in range(rows):
        H[i, i] = 1
        H[i, (i + 1) % n] = 1
    return ClassicalCode(H, d=n)


def hgp_matrices(H1, H2) -> tuple[np.ndarray, np.ndarray]:
    """``H_X = (1 (x) H2 | H1^T (x) 1)``, ``H_Z = (H1 (x) 1 | 1 (x) H2^T)``.

    Qubit columns: the V1 x V2 block first, then C1 x C2.
    """
    H1 = np.atleast_2d(np.asarray(H1, dtype=np.uint8))
    H2 = np.atleast_2d(np.asarray(H2, dtype=np.uint8))
    m1, n1 = H1.shape
    m2, n2 = H2.shape
    hx = np.hstack([np.kron(np.eye(n1, dtype=np.uint8), H2), np.kron(H1.T, np.eye(m2, dtype=np.uint8))])
    hz = np.hstack([np.kron(H1, np.eye(n2, dtype=np.uint8)), np.kron(np.eye(m1, dtype=np.uint8), H2.T)])
    return hx % 2, hz % 2


def hgp(C1: ClassicalCode, C2: ClassicalCode, name: str | None = None,
        logical_basis=None) -> StabilizerCode:
    hx, hz = hgp_matrices(C1.H, C2.H)
    H = ParityCheckMatrix.from_css(hx, hz)
    d = None
    if C1.d is not None and C2.d is not None and C1.k and C2.k:
        d = min(C1.d, C2.d)
    return stabilizer_code(H, d=d, name=name or f"hgp[{C1.n}x{C2.n}]", logical_basis=logical_basis)


def surface_code(d: int) -> StabilizerCode:
    """Planar surface code of distance ``d`` as ``hgp(rep(d), rep(d))``."""
    if d < 2:
        raise ValueError("surface code distance must be >= 2")
    rep = repetition_code(d, cyclic=False)
    n = d * d + (d - 1) ** 2
    # Z string along the first V1 row, X string down the first V2 column.
    zl = PauliVector.from_support(n, [i2 for i2 in range(d)], "Z")
    xl = PauliVector.from_support(n, [i1 * d for i1 in range(d)], "X")
    return hgp(rep, rep, name=f"surface:d={d}", logical_basis=(xl, zl))


def random_ldpc(n: int, m: int, dc: int, dq: int, seed=None, max_retries: int = 100) -> ClassicalCode:
    """Configuration-model LDPC matrix: row weight <= dc, column weight <= dq.

    Stubs are matched uniformly at random; repeated edges cancel to a single
    edge (so weights may drop below the targets).  Resamples until the rank is
    at least ``m - 1``.
    """
    if n * dq != m * dc:
        raise ValueError(f"infeasible degrees: n*dq={n * dq} != m*dc={m * dc}")
    rng = np.random.default_rng(seed)
    qubit_stubs = np.repeat(np.arange(n), dq)
    check_stubs = np.repeat(np.arange(m), dc)
    for _ in range(max_retries):
        perm = rng.permutation(check_stubs)
        H = np.zeros((m, n), dtype=np.uint8)
        H[perm, qubit_stubs] = 1
        if H.any(axis=0).all() and gf2_rank(H) >= m - 1:
            return ClassicalCode(H)
    raise RuntimeError(f"no acceptable ({dc},{dq}) matrix after {max_retries} draws")


# ---------------------------------------------------------------------------
# logicals, distance, classification
# ---------------------------------------------------------------------------

def logical_operators(H: ParityCheckMatrix) -> list[PauliVector]:
    """Symplectic basis ``X_1, Z_1, X_2, Z_2, ...`` of the logical operators.

    Kernel of the symplectic form modulo the stabilizer row space, then a
    symplectic Gram-Schmidt pass to pair the representatives.
    """
    n = H.n_qubits
    space = RowSpace(H.to_gf2().rows, 2 * n)
    reps = []
    for v in symplectic_kernel(H):
        if space.add(v):
            reps.append(PauliVector(GF2, v))
    basis = []
    while reps:
        a = reps.pop(0)
        j = next((i for i, b in enumerate(reps) if symplectic_gf2(a, b)), None)
        if j is None:
            raise ValueError("logical representatives are not symplectically paired")
        b = reps.pop(j)
        fixed = []
        for c in reps:
            if symplectic_gf2(c, b):
                c = c + a
            if symplectic_gf2(c, a):
                c = c + b
            fixed.append(c)
        reps = fixed
        basis += [a, b]
    return basis


def classify_residual(code: StabilizerCode, residual: PauliVector) -> ResidualClass:
    if np.any(code.syndrome(residual)):
        return ResidualClass.DETECTABLE
    if code.stabilizer_space.contains(residual.to_gf2().data):
        return ResidualClass.TRIVIAL
    return ResidualClass.LOGICAL


def _binary_min_logical(h_detect: np.ndarray, stab: RowSpace, w_max: int) -> int | None:
    """Smallest weight of a binary vector in ker(h_detect) outside ``stab``."""
    n = h_detect.shape[1]
    cols = pack_rows(h_detect.T) if h_detect.shape[0] else [0] * n
    for w in range(1, w_max + 1):
        for support in itertools.combinations(range(n), w):
            s = 0
            for q in support:
                s ^= cols[q]
            if s:
                continue
            v = 0
            for q in support:
                v |= 1 << q
            if not stab.contains(v):
                return w
    return None


def min_distance_bruteforce(code: StabilizerCode, w_max: int, max_candidates: int = 5 * 10**7):
    """Exhaustive minimum distance up to ``w_max``; returns ``f"> {w_max}"`` if not found.

    CSS codes are searched per Pauli type (binary supports), general codes
    over all ``3^w`` Pauli assignments of each support.
    """
    n = code.n_qubits
    from math import comb

    if code.is_css:
        hx, hz = code.css
        budget = sum(comb(n, w) for w in range(1, w_max + 1))
        if 2 * budget > max_candidates:
            raise RuntimeError(f"search over {2 * budget} supports exceeds cap {max_candidates}")
        sx, sz = RowSpace(hx, n), RowSpace(hz, n)
        found = [w for w in (_binary_min_logical(hz, sx, w_max), _binary_min_logical(hx, sz, w_max)) if w]
        return min(found) if found else f"> {w_max}"

    budget = sum(comb(n, w) * 3**w for w in range(1, w_max + 1))
    if budget > max_candidates:
        raise RuntimeError(f"search over {budget} Paulis exceeds cap {max_candidates}")
    for w in range(1, w_max + 1):
        for support in itertools.combinations(range(n), w):
            for paulis in itertools.product((1, 2, 3), repeat=w):
                sym = np.zeros(n, dtype=np.uint8)
                sym[list(support)] = paulis
                e = PauliVector(GF4, sym)
                if classify_residual(code, e) is ResidualClass.LOGICAL:
                    return w
    return f"> {w_max}"


def code_from_spec(spec: str) -> list[StabilizerCode]:
    """Parse CLI code specs: ``steane``, ``surface:d=5``, ``surface:d=3,5,7``,
    ``surface:d=3..9``, ``hgp:a.alist,b.alist``."""
    from .io import read_alist

    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "steane":
        return [steane()]
    if kind == "surface":
        key, _, val = arg.partition("=")
        if key.strip() != "d" or not val:
            raise ValueError(f"expected surface:d=<distances>, got {spec!r}")
        if ".." in val:
            lo, hi = (int(v) for v in val.split(".."))
            ds = list(range(lo, hi + 1, 2 if lo % 2 else 1))
        else:
            ds = [int(v) for v in val.split(",")]
        return [surface_code(d) for d in ds]
    if kind == "hgp":
        files = arg.split(",")
        if len(files) != 2:
            raise ValueError("hgp needs two alist files")
        c1, c2 = (ClassicalCode(read_alist(f)) for f in files)
        return [hgp(c1, c2, name=f"hgp:{arg}")]
    raise ValueError(f"unknown code spec {spec!r}")
