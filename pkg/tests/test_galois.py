import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbpqec.galois import (
    GF2,
    GF4,
    GF4_ADD,
    GF4_MUL,
    ParityCheckMatrix,
    PauliVector,
    RowSpace,
    gf2_in_rowspace,
    gf2_nullspace,
    gf2_rank,
    gf2_rref,
    gf4_add,
    gf4_conj,
    gf4_mul,
    gf4_trace,
    pack_rows,
    symplectic_gf2,
    symplectic_gf4,
    symplectic_kernel,
    syndrome,
    unpack_rows,
)
from oracles import commutes_by_matrices, dense_rank

# Tables as printed, symbols 0, 1, w, W (W = conjugate of w).
ADD_TABLE = """
0 1 w W
1 0 W w
w W 0 1
W w 1 0
"""
MUL_TABLE = """
0 0 0 0
0 1 w W
0 w W 1
0 W 1 w
"""
SYM = {"0": 0, "1": 1, "w": 2, "W": 3}


def parse_table(text):
    return np.array([[SYM[t] for t in line.split()] for line in text.strip().splitlines()])


paulis = st.text(alphabet="IXYZ", min_size=1, max_size=12)


def pauli_pair():
    return st.integers(1, 12).flatmap(
        lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
    )


def test_tables_match_printed():
    assert np.array_equal(GF4_ADD, parse_table(ADD_TABLE))
    assert np.array_equal(GF4_MUL, parse_table(MUL_TABLE))


def test_scalar_ops():
    for a in range(4):
        assert gf4_conj(a) == gf4_mul(a, a)
        assert gf4_trace(a) == gf4_add(a, gf4_conj(a))
        assert gf4_trace(a) in (0, 1)
    assert gf4_mul(2, 3) == 1
    with pytest.raises(ValueError):
        gf4_add(4, 0)


def test_field_axioms():
    for a in range(4):
        for b in range(4):
            assert gf4_add(a, b) == gf4_add(b, a)
            assert gf4_mul(a, b) == gf4_mul(b, a)
            for c in range(4):
                assert gf4_mul(a, gf4_add(b, c)) == gf4_add(gf4_mul(a, b), gf4_mul(a, c))
        if a:
            assert sum(gf4_mul(a, b) == 1 for b in range(4)) == 1


@given(pauli_pair())
def test_symplectic_matches_matrix_commutation(pair):
    a, b = pair
    expect = 0 if commutes_by_matrices(a, b) else 1
    assert symplectic_gf2(PauliVector.from_string(a), PauliVector.from_string(b)) == expect
    assert symplectic_gf4(PauliVector.from_string(a, GF4), PauliVector.from_string(b, GF4)) == expect


def test_symplectic_agreement_bulk():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        n = int(rng.integers(1, 16))
        x = rng.integers(0, 4, n)
        y = rng.integers(0, 4, n)
        e, f = PauliVector(GF4, x), PauliVector(GF4, y)
        assert symplectic_gf4(e, f) == symplectic_gf2(e.to_gf2(), f.to_gf2())


@given(pauli_pair(), st.text("IXYZ", min_size=12, max_size=12))
def test_symplectic_bilinear(pair, c):
    a, b = pair
    c = c[: len(a)]
    e, f, g = (PauliVector.from_string(w) for w in (a, b, c))
    assert symplectic_gf2(e + f, g) == symplectic_gf2(e, g) ^ symplectic_gf2(f, g)
    assert symplectic_gf2(e, e) == 0


@given(paulis)
def test_representation_round_trip(word):
    e = PauliVector.from_string(word)
    assert str(e) == word
    assert e.to_gf4().to_gf2() == e
    assert e.weight() == sum(ch != "I" for ch in word)
    assert e.support() == [i for i, ch in enumerate(word) if ch != "I"]


def test_pauli_vector_validation():
    with pytest.raises(ValueError):
        PauliVector(GF2, [1, 0, 1])
    with pytest.raises(ValueError):
        PauliVector(GF4, [4])
    with pytest.raises(ValueError):
        PauliVector.from_string("XX") + PauliVector.from_string("XXX")
    with pytest.raises(ValueError):
        symplectic_gf4(PauliVector.from_string("X"), PauliVector.from_string("X"))


def test_from_xz_and_support():
    e = PauliVector.from_xz([1, 0, 1], [0, 1, 1])
    assert str(e) == "XZY"
    assert PauliVector.from_support(4, [1, 3], "Y") == PauliVector.from_string("IYIY")
    assert PauliVector.identity(3).weight() == 0


def test_css_layout_and_syndrome_agree():
    hx = np.array([[1, 1, 0], [0, 1, 1]])
    hz = np.array([[1, 1, 1]])
    H = ParityCheckMatrix.from_css(hx, hz)
    assert H.n_checks == 3
    assert np.array_equal(H.rows[0], [1, 1, 0, 0, 0, 0])
    bx, bz = H.css_blocks()
    assert np.array_equal(bx, hx) and np.array_equal(bz, hz)
    e = PauliVector.from_string("ZIX")
    assert np.array_equal(syndrome(H, e), syndrome(H.to_gf4(), e))
    assert np.array_equal(syndrome(H, e), [1, 0, 1])


def test_non_css_blocks():
    H = ParityCheckMatrix(GF4, [[1, 2, 2, 1, 0]], 5)  # XZZXI
    assert H.css_blocks() is None
    with pytest.raises(ValueError):
        ParityCheckMatrix(GF2, [[1, 0, 1]], 2)


binary_matrices = st.integers(1, 7).flatmap(
    lambda m: st.integers(1, 9).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


@given(binary_matrices)
def test_rank_matches_dense_elimination(M):
    M = np.array(M, dtype=np.uint8)
    assert gf2_rank(M) == dense_rank(M)
    R, piv = gf2_rref(M)
    assert len(piv) == dense_rank(M)
    assert dense_rank(np.vstack([M, R])) == dense_rank(M)


@given(binary_matrices)
def test_nullspace(M):
    M = np.array(M, dtype=np.uint8)
    N = gf2_nullspace(M)
    assert N.shape[0] == M.shape[1] - dense_rank(M)
    assert not np.any((M.astype(int) @ N.T.astype(int)) % 2)
    if len(N):
        assert dense_rank(N) == len(N)


@given(binary_matrices, st.data())
def test_rowspace_membership(M, data):
    M = np.array(M, dtype=np.uint8)
    coeffs = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(M), max_size=len(M))))
    v = (coeffs @ M) % 2
    assert gf2_in_rowspace(M, v)
    rs = RowSpace(M)
    w = v.copy()
    w[0] ^= 1
    assert rs.contains(w) == (dense_rank(np.vstack([M, w])) == dense_rank(M))


@given(binary_matrices)
def test_pack_round_trip(M):
    M = np.array(M, dtype=np.uint8)
    assert np.array_equal(unpack_rows(pack_rows(M), M.shape[1]), M)


def test_symplectic_kernel_of_steane_rows():
    h = np.array([[1, 1, 1, 0, 1, 0, 0], [0, 1, 1, 1, 0, 1, 0], [0, 0, 1, 0, 1, 1, 1]])
    H = ParityCheckMatrix.from_css(h, h)
    K = symplectic_kernel(H)
    assert K.shape[0] == 14 - 6
    for v in K:
        assert not syndrome(H, PauliVector(GF2, v)).any()
