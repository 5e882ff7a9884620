"""GF(2)/GF(4) arithmetic, Pauli vectors, parity-check matrices and GF(2) linear algebra.

GF(4) symbols are stored as 2-bit integers::

    0 -> 0b00,  1 -> 0b01,  w -> 0b10,  wbar -> 0b11

With this encoding GF(4) addition is bitwise XOR, and the Pauli map
I->0, X->1, Z->w, Y->wbar coincides with ``symbol = x | (z << 1)`` for the
binary pair (x, z).  All Pauli operations are phase-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ZERO, ONE, OMEGA, OMEGA_BAR = 0, 1, 2, 3
GF4_SYMBOLS = ("0", "1", "w", "W")

GF4_ADD = np.array(
    [
        [0, 1, 2, 3],
        [1, 0, 3, 2],
        [2, 3, 0, 1],
        [3, 2, 1, 0],
    ],
    dtype=np.uint8,
)

GF4_MUL = np.array(
    [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ],
    dtype=np.uint8,
)

GF4_CONJ = GF4_MUL[np.arange(4), np.arange(4)].copy()
GF4_TRACE = GF4_ADD[np.arange(4), GF4_CONJ]

PAULI_TO_GF4 = {"I": 0, "X": 1, "Z": 2, "Y": 3}
GF4_TO_PAULI = "IXZY"

GF2 = "gf2"
GF4 = "gf4"


def _check_symbol(a: int) -> int:
    a = int(a)
    if not 0 <= a < 4:
        raise ValueError(f"not a GF(4) symbol: {a}")
    return a


def gf4_add(a: int, b: int) -> int:
    return int(GF4_ADD[_check_symbol(a), _check_symbol(b)])


def gf4_mul(a: int, b: int) -> int:
    return int(GF4_MUL[_check_symbol(a), _check_symbol(b)])


def gf4_conj(a: int) -> int:
    """Conjugation ``a -> a*a`` (the Frobenius map)."""
    return int(GF4_CONJ[_check_symbol(a)])


def gf4_trace(a: int) -> int:
    """Trace ``a + conj(a)``; always 0 or 1."""
    return int(GF4_TRACE[_check_symbol(a)])


@dataclass(frozen=True)
class PauliVector:
    """A Pauli word (up to phase) in binary ``(e_x | e_z)`` or quaternary form."""

    rep: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.uint8).reshape(-1)
        if self.rep == GF2:
            if data.size % 2:
                raise ValueError("GF(2) Pauli vector must have even length 2n")
            if np.any(data > 1):
                raise ValueError("GF(2) Pauli vector entries must be 0/1")
        elif self.rep == GF4:
            if np.any(data > 3):
                raise ValueError("GF(4) Pauli vector entries must be in 0..3")
        else:
            raise ValueError(f"unknown representation {self.rep!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_qubits(self) -> int:
        return self.data.size // 2 if self.rep == GF2 else self.data.size

    @classmethod
    def identity(cls, n_qubits: int, rep: str = GF2) -> "PauliVector":
        size = 2 * n_qubits if rep == GF2 else n_qubits
        return cls(rep, np.zeros(size, dtype=np.uint8))

    @classmethod
    def from_xz(cls, x: Sequence[int], z: Sequence[int]) -> "PauliVector":
        return cls(GF2, np.concatenate([np.asarray(x, dtype=np.uint8), np.asarray(z, dtype=np.uint8)]))

    @classmethod
    def from_string(cls, word: str, rep: str = GF2) -> "PauliVector":
        """Parse e.g. ``"XIZY"``."""
        sym = np.array([PAULI_TO_GF4[ch] for ch in word.upper()], dtype=np.uint8)
        return cls(GF4, sym) if rep == GF4 else cls(GF4, sym).to_gf2()

    @classmethod
    def from_support(cls, n_qubits: int, qubits: Iterable[int], pauli: str = "Z",
                     rep: str = GF2) -> "PauliVector":
        sym = np.zeros(n_qubits, dtype=np.uint8)
        sym[list(qubits)] = PAULI_TO_GF4[pauli]
        return cls(GF4, sym) if rep == GF4 else cls(GF4, sym).to_gf2()

    @property
    def x(self) -> np.ndarray:
        return self.to_gf2().data[: self.n_qubits]

    @property
    def z(self) -> np.ndarray:
        return self.to_gf2().data[self.n_qubits:]

    def to_gf4(self) -> "PauliVector":
        if self.rep == GF4:
            return self
        n = self.n_qubits
        return PauliVector(GF4, self.data[:n] | (self.data[n:] << 1))

    def to_gf2(self) -> "PauliVector":
        if self.rep == GF2:
            return self
        return PauliVector(GF2, np.concatenate([self.data & 1, self.data >> 1]))

    def weight(self) -> int:
        return int(np.count_nonzero(self.to_gf4().data))

    def support(self) -> list[int]:
        return [int(q) for q in np.flatnonzero(self.to_gf4().data)]

    def __add__(self, other: "PauliVector") -> "PauliVector":
        if other.rep != self.rep or other.data.size != self.data.size:
            raise ValueError("cannot add Pauli vectors of different shape/representation")
        return PauliVector(self.rep, self.data ^ other.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliVector):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.to_gf2().data, other.to_gf2().data)

    def __hash__(self) -> int:
        return hash(self.to_gf2().data.tobytes())

    def __str__(self) -> str:
        return "".join(GF4_TO_PAULI[s] for s in self.to_gf4().data)


def _same_shape(e: PauliVector, f: PauliVector, rep: str) -> None:
    if e.rep != rep or f.rep != rep:
        raise ValueError(f"expected {rep} vectors, got {e.rep}/{f.rep}")
    if e.data.size != f.data.size:
        raise ValueError("Pauli vectors act on different numbers of qubits")


def symplectic_gf2(e: PauliVector, f: PauliVector) -> int:
    """``e_x . f_z + e_z . f_x`` mod 2; 1 iff the Paulis anticommute."""
    _same_shape(e, f, GF2)
    n = e.n_qubits
    ed, fd = e.data.astype(np.int64), f.data.astype(np.int64)
    return int((ed[:n] @ fd[n:] + ed[n:] @ fd[:n]) & 1)


def symplectic_gf4(e: PauliVector, f: PauliVector) -> int:
    """``Tr(sum_q e_q * conj(f_q))``."""
    _same_shape(e, f, GF4)
    prods = GF4_MUL[e.data, GF4_CONJ[f.data]]
    acc = np.bitwise_xor.reduce(prods) if prods.size else 0
    return int(GF4_TRACE[acc])


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Stabilizer generators as rows; GF(2) rows have length 2n, GF(4) rows length n."""

    rep: str
    rows: np.ndarray = field(repr=False)
    n_qubits: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.uint8)
        if rows.ndim == 1:
            rows = rows.reshape(0 if rows.size == 0 else 1, -1)
        width = 2 * self.n_qubits if self.rep == GF2 else self.n_qubits
        if rows.size == 0:
            rows = rows.reshape(0, width)
        if rows.shape[1] != width:
            raise ValueError(f"row length {rows.shape[1]} does not match {self.rep} width {width}")
        if rows.shape[0] > width:
            raise ValueError("more generators than the representation allows")
        if np.any(rows > (1 if self.rep == GF2 else 3)):
            raise ValueError(f"invalid symbols for {self.rep}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_checks(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def from_css(cls, hx: np.ndarray, hz: np.ndarray) -> "ParityCheckMatrix":
        """Block-diagonal ``[[H_X, 0], [0, H_Z]]``; X-type checks come first."""
        hx = np.atleast_2d(np.asarray(hx, dtype=np.uint8))
        hz = np.atleast_2d(np.asarray(hz, dtype=np.uint8))
        n = hx.shape[1]
        if hz.shape[1] != n:
            raise ValueError("H_X and H_Z act on different numbers of qubits")
        top = np.hstack([hx, np.zeros_like(hx)])
        bottom = np.hstack([np.zeros_like(hz), hz])
        return cls(GF2, np.vstack([top, bottom]), n)

    def row(self, i: int) -> PauliVector:
        return PauliVector(self.rep, self.rows[i])

    def to_gf4(self) -> "ParityCheckMatrix":
        if self.rep == GF4:
            return self
        n = self.n_qubits
        return ParityCheckMatrix(GF4, self.rows[:, :n] | (self.rows[:, n:] << 1), n)

    def to_gf2(self) -> "ParityCheckMatrix":
        if self.rep == GF2:
            return self
        return ParityCheckMatrix(GF2, np.hstack([self.rows & 1, self.rows >> 1]), self.n_qubits)

    def css_blocks(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Return ``(H_X, H_Z)`` if every row is pure X or pure Z, else None."""
        g = self.to_gf2().rows
        n = self.n_qubits
        has_x = g[:, :n].any(axis=1)
        has_z = g[:, n:].any(axis=1)
        if np.any(has_x & has_z):
            return None
        return g[has_x, :n].copy(), g[has_z, n:].copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.to_gf2().rows, other.to_gf2().rows)

    __hash__ = None


def syndrome(H: ParityCheckMatrix, e: PauliVector) -> np.ndarray:
    """``H * e``: bit c is the symplectic product of generator c with ``e``."""
    if H.n_qubits != e.n_qubits:
        raise ValueError(f"H acts on {H.n_qubits} qubits, error on {e.n_qubits}")
    if H.rep == GF4:
        prods = GF4_MUL[H.rows, GF4_CONJ[e.to_gf4().data][None, :]]
        acc = np.bitwise_xor.reduce(prods, axis=1) if H.n_qubits else np.zeros(H.n_checks, np.uint8)
        return GF4_TRACE[acc].astype(np.uint8)
    n = H.n_qubits
    ed = e.to_gf2().data.astype(np.int64)
    swapped = np.concatenate([ed[n:], ed[:n]])
    return ((H.rows.astype(np.int64) @ swapped) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# GF(2) linear algebra on int bitsets (bit j of a row int = column j)
# ---------------------------------------------------------------------------

def pack_rows(M) -> list[int]:
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    weights = 1 << np.arange(M.shape[1], dtype=object) if M.shape[1] else np.zeros(0, dtype=object)
    return [int(np.dot(row.astype(object), weights)) if M.shape[1] else 0 for row in M]


def unpack_rows(rows: Sequence[int], n_cols: int) -> np.ndarray:
    out = np.zeros((len(rows), n_cols), dtype=np.uint8)
    for i, r in enumerate(rows):
        for j in range(n_cols):
            if (r >> j) & 1:
                out[i, j] = 1
    return out


class RowSpace:
    """Reduced echelon basis of a GF(2) row space, for repeated membership queries."""

    def __init__(self, M, n_cols: int | None = None):
        M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
        self.n_cols = M.shape[1] if n_cols is None else n_cols
        self.pivots: dict[int, int] = {}
        for r in pack_rows(M) if M.size else []:
            self._insert(r)

    def _reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            piv = self.pivots.get(top)
            if piv is None:
                return v
            v ^= piv
        return 0

    def _insert(self, v: int) -> bool:
        v = self._reduce(v)
        if v:
            self.pivots[v.bit_length() - 1] = v
            return True
        return False

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def contains(self, v) -> bool:
        if not isinstance(v, int):
            v = pack_rows(np.asarray(v, dtype=np.uint8).reshape(1, -1))[0]
        return self._reduce(v) == 0

    def add(self, v) -> bool:
        """Add a vector; returns True if it was independent."""
        if not isinstance(v, int):
            v = pack_rows(np.asarray(v, dtype=np.uint8).reshape(1, -1))[0]
        return self._insert(v)


def _check_binary(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M))
    if M.size and (M.min() < 0 or M.max() > 1):
        raise ValueError("matrix is not binary")
    return M.astype(np.uint8)


def gf2_rank(M) -> int:
    M = _check_binary(M)
    return RowSpace(M).rank


def gf2_in_rowspace(M, v) -> bool:
    M = _check_binary(M)
    v = np.asarray(v, dtype=np.uint8).reshape(-1)
    if v.size != M.shape[1]:
        raise ValueError(f"vector length {v.size} != matrix width {M.shape[1]}")
    return RowSpace(M).contains(v)


def gf2_rref(M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (left-to-right)."""
    A = _check_binary(M).copy()
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        hits = np.flatnonzero(A[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        A[others] ^= A[r]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def gf2_nullspace(M) -> np.ndarray:
    """Basis (as rows) of ``{v : M v = 0}`` over GF(2)."""
    M = _check_binary(M)
    n = M.shape[1]
    R, pivots = gf2_rref(M)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in zip(R, pivots):
            if row[f]:
                basis[i, pc] = 1
    return basis


def symplectic_kernel(H: ParityCheckMatrix) -> np.ndarray:
    """Basis of all binary Paulis commuting with every row of ``H`` (GF(2) rep)."""
    g = H.to_gf2().rows
    n = H.n_qubits
    swapped = np.hstack([g[:, n:], g[:, :n]])
    return gf2_nullspace(swapped) if g.shape[0] else np.eye(2 * n, dtype=np.uint8)
