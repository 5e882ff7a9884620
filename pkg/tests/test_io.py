import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbpqec.codes import steane, surface_code
from gbpqec.io import format_alist, parse_alist, pcm_from_json, pcm_to_json, read_alist, write_alist

matrices = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 9).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


@given(matrices)
def test_alist_round_trip(M):
    M = np.array(M, dtype=np.uint8)
    assert np.array_equal(parse_alist(format_alist(M)), M)


def test_alist_layout():
    text = format_alist(np.array([[1, 1, 0], [0, 1, 1]]))
    lines = text.splitlines()
    assert lines[0] == "3 2"
    assert lines[1] == "2 2"
    assert lines[2] == "1 2 1"
    assert lines[4] == "1 0"  # column 1 sits in row 1 only, padded with 0


def test_alist_file(tmp_path):
    H = surface_code(3).css[0]
    path = tmp_path / "hx.alist"
    write_alist(path, H)
    assert np.array_equal(read_alist(path), H)


def test_alist_rejects_inconsistent():
    text = format_alist(np.array([[1, 1, 0], [0, 1, 1]]))
    bad = text.replace("1 2\n2 3", "1 3\n2 3")
    with pytest.raises(ValueError):
        parse_alist(bad)
    with pytest.raises(ValueError):
        parse_alist("3 2")


@pytest.mark.parametrize("rep", ["gf2", "gf4"])
def test_pcm_json_round_trip(rep):
    H = steane().H
    H = H.to_gf4() if rep == "gf4" else H
    assert pcm_from_json(pcm_to_json(H)) == H
    import json

    assert pcm_from_json(json.dumps(pcm_to_json(H))) == H
