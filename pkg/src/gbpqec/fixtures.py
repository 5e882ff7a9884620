"""Regression instances shipped with the package.

Index conventions follow :func:`gbpqec.codes.surface_code`: qubits of the
``V x V`` block come first (row-major), then the ``C x C`` block; X-type checks
precede Z-type checks.  For the planar patches used here these indices
coincide with the labels of the classic split-belief picture, so the index map
stored in the fixtures is the identity.
"""

from __future__ import annotations

import numpy as np

from .codes import hamming_code, steane, surface_code
from .codes import TannerGraph
from .galois import PauliVector
from .region_graph import RegionGraph, cvm_regions

# Two Z errors whose two defects admit an equal-weight degenerate partner.
SPLIT_BELIEF = {
    "distance": 5,
    "error": {"pauli": "Z", "qubits": [12, 31]},
    "violated_x_checks": [6, 9],
    "partner": {"pauli": "Z", "qubits": [7, 30]},
}

# A d=9 Z-error pattern that needs several split repetitions with the default
# decoder at p_init = 0.1 (see scripts/fig6_trace.py).
FIG6 = {
    "distance": 9,
    "p_init": 0.1,
    "error": {"pauli": "Z", "qubits": [8, 11, 15, 19, 44, 80, 84, 90, 99, 106, 118, 126, 136, 137, 139]},
}

NAMES = ("split-belief", "fig6", "steane", "surface", "hamming-cvm")


def _identity_map(n: int) -> list[int]:
    return list(range(n))


def split_belief() -> dict:
    """d=5 surface patch with the planted error ``Z12 Z31``."""
    f = SPLIT_BELIEF
    code = surface_code(f["distance"])
    e = PauliVector.from_support(code.n_qubits, f["error"]["qubits"], "Z")
    partner = PauliVector.from_support(code.n_qubits, f["partner"]["qubits"], "Z")
    s = code.syndrome(e)
    return {
        "name": "split-belief",
        "code": code.name,
        "error": str(e),
        "error_support": f["error"]["qubits"],
        "syndrome": [int(v) for v in s],
        "violated_checks": [int(c) for c in np.flatnonzero(s)],
        "x_check_syndrome": [int(v) for v in s[code.x_check_rows]],
        "partner": str(partner),
        "partner_support": f["partner"]["qubits"],
        "qubit_index_map": _identity_map(code.n_qubits),
        "check_index_map": _identity_map(code.n_checks),
    }


def fig6() -> dict:
    f = FIG6
    code = surface_code(f["distance"])
    e = PauliVector.from_support(code.n_qubits, f["error"]["qubits"], "Z")
    s = code.syndrome(e)
    return {
        "name": "fig6",
        "code": code.name,
        "p_init": f["p_init"],
        "error": str(e),
        "error_support": f["error"]["qubits"],
        "syndrome": [int(v) for v in s],
    }


def code_fixture(code, error_support=(), pauli="Z") -> dict:
    e = PauliVector.from_support(code.n_qubits, list(error_support), pauli)
    out = code.to_json()
    out.update({"error": str(e), "syndrome": [int(v) for v in code.syndrome(e)]})
    return out


def hamming_tanner() -> TannerGraph:
    return TannerGraph.from_binary(hamming_code().H)


def hamming_cvm() -> RegionGraph:
    """Multi-level region graph of the Hamming code: one large region per check,
    closed under intersection."""
    t = hamming_tanner()
    return cvm_regions(t, [[c] for c in range(t.n_checks)])


def hamming_cvm_fixture() -> dict:
    rg = hamming_cvm()
    out = rg.to_json()
    out["name"] = "hamming-cvm"
    return out


def get(name: str, distance: int = 3) -> dict:
    if name == "split-belief":
        return split_belief()
    if name == "fig6":
        return fig6()
    if name == "steane":
        return code_fixture(steane(), [0])
    if name == "surface":
        code = surface_code(distance)
        return code_fixture(code, [distance * (distance // 2) + distance // 2])
    if name == "hamming-cvm":
        return hamming_cvm_fixture()
    raise ValueError(f"unknown fixture {name!r}; choose from {NAMES}")
