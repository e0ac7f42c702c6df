import json

import numpy as np
import pytest

from tetralab.hardy import build_ladder_basis
from tetralab.io import (
    CacheFormatError,
    decay_csv,
    dumps,
    load_basis,
    load_moment_cache,
    load_window,
    save_basis,
    save_moment_cache,
    save_window,
)
from tetralab.measure import MeasureContext, moment, monomials_up_to, precompute
from tetralab.symbols import parse_symbol
from tetralab.toeplitz import rank_one_window, toeplitz_window


@pytest.fixture(scope="module")
def ctx8():
    c = MeasureContext(8)
    mons = monomials_up_to(4)
    precompute(c, [(a, b) for a in mons for b in mons if a.degree == b.degree])
    return c


def test_cache_round_trip_is_byte_identical(ctx8, tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    save_moment_cache(ctx8, p1)
    loaded = load_moment_cache(p1)
    save_moment_cache(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert loaded.cache == ctx8.cache


def test_loaded_cache_serves_hits(ctx8, tmp_path):
    p = tmp_path / "c.csv"
    save_moment_cache(ctx8, p)
    fresh = load_moment_cache(p, MeasureContext(8))
    val = moment((1, 1, 2), (0, 0, 4), fresh)
    assert fresh.quadrature_evaluations == 0
    assert fresh.cache_hits == 1
    assert val == moment((1, 1, 2), (0, 0, 4), ctx8)


def test_corrupted_header(ctx8, tmp_path):
    p = tmp_path / "c.csv"
    save_moment_cache(ctx8, p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(["# garbage"] + lines[1:]) + "\n")
    with pytest.raises(CacheFormatError) as err:
        load_moment_cache(p)
    assert err.value.line == 1


def test_malformed_row_reports_line(ctx8, tmp_path):
    p = tmp_path / "c.csv"
    save_moment_cache(ctx8, p)
    lines = p.read_text().splitlines()
    lines[5] = "1,2,x,0,0,0,0.5,0"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(CacheFormatError) as err:
        load_moment_cache(p)
    assert err.value.line == 6
    lines[5] = "1,2,3"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(CacheFormatError, match="line 6"):
        load_moment_cache(p)


def test_max_degree_mismatch(ctx8, tmp_path):
    p = tmp_path / "c.csv"
    save_moment_cache(ctx8, p)
    with pytest.raises(CacheFormatError, match="max_degree"):
        load_moment_cache(p, MeasureContext(10))


def test_basis_round_trip(tmp_path):
    ctx = MeasureContext(12)
    basis = build_ladder_basis(6, ctx)
    p = tmp_path / "basis.json"
    save_basis(basis, p)
    doc = json.loads(p.read_text())
    assert doc["max_degree"] == 6
    assert [d["ladder_from_prev"] for d in doc["degrees"]] == [0, 0, 1, 2, 4, 6]
    back = load_basis(p)
    for n in basis.degrees:
        assert np.array_equal(back.vectors[n], basis.vectors[n])
        assert back.monomials[n] == basis.monomials[n]
        assert back.ladder_link_holds(n)
    save_basis(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == p.read_bytes()


def test_window_round_trip(basis, tmp_path):
    W = toeplitz_window(parse_symbol("(0.5-1i)*~z2*z3"), basis, 5)
    p = tmp_path / "w.json"
    save_window(W, p)
    back = load_window(p, basis)
    assert np.array_equal(back.matrix, W.matrix)
    assert (back.lo, back.hi) == (1, 5)
    R = rank_one_window(basis, 4)
    save_window(R, p)
    assert np.array_equal(load_window(p, basis).matrix, R.matrix)


def test_report_helpers():
    assert dumps({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
    assert decay_csv([(0, 1.0), (1, 0.25)]) == "r,max_abs_entry\n0,1\n1,0.25\n"
