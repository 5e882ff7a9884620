"""alist and JSON serialization of parity-check matrices."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .galois import GF2, GF4, ParityCheckMatrix


def format_alist(H) -> str:
    """MacKay alist text for a binary matrix (1-based indices, zero padded)."""
    H = np.atleast_2d(np.asarray(H, dtype=np.uint8))
    m, n = H.shape
    col_sets = [np.flatnonzero(H[:, j]) + 1 for j in range(n)]
    row_sets = [np.flatnonzero(H[i]) + 1 for i in range(m)]
    max_col = max((len(c) for c in col_sets), default=0)
    max_row = max((len(r) for r in row_sets), default=0)

    def pad(idx, width):
        return " ".join(str(int(v)) for v in list(idx) + [0] * (width - len(idx)))

    lines = [f"{n} {m}", f"{max_col} {max_row}",
             " ".join(str(len(c)) for c in col_sets),
             " ".join(str(len(r)) for r in row_sets)]
    lines += [pad(c, max_col) for c in col_sets]
    lines += [pad(r, max_row) for r in row_sets]
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> np.ndarray:
    tokens = [int(t) for t in text.split()]
    if len(tokens) < 4:
        raise ValueError("truncated alist")
    n, m, max_col, max_row = tokens[:4]
    pos = 4
    col_w = tokens[pos:pos + n]
    pos += n
    row_w = tokens[pos:pos + m]
    pos += m
    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = tokens[pos:pos + max_col]
        pos += max_col
        for i in entries[: col_w[j]]:
            H[i - 1, j] = 1
    for i in range(m):
        entries = [c for c in tokens[pos:pos + max_row] if c][: row_w[i]]
        pos += max_row
        if sorted(entries) != list(np.flatnonzero(H[i]) + 1):
            raise ValueError(f"alist row {i + 1} disagrees with its column lists")
    return H


def read_alist(path) -> np.ndarray:
    return parse_alist(Path(path).read_text())


def write_alist(path, H) -> None:
    Path(path).write_text(format_alist(H))


def pcm_to_json(H: ParityCheckMatrix) -> dict:
    """``{n, m, rep, rows: [[[col, symbol], ...], ...]}``; GF(2) columns index ``(x|z)``."""
    rows = [[[int(c), int(r[c])] for c in np.flatnonzero(r)] for r in H.rows]
    return {"n": H.n_qubits, "m": H.n_checks, "rep": H.rep, "rows": rows}


def pcm_from_json(obj) -> ParityCheckMatrix:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    rep = obj["rep"]
    if rep not in (GF2, GF4):
        raise ValueError(f"unknown rep {rep!r}")
    n, m = int(obj["n"]), int(obj["m"])
    width = 2 * n if rep == GF2 else n
    rows = np.zeros((m, width), dtype=np.uint8)
    if len(obj["rows"]) != m:
        raise ValueError("row count does not match m")
    for i, entries in enumerate(obj["rows"]):
        for col, sym in entries:
            rows[i, col] = sym
    return ParityCheckMatrix(rep, rows, n)
