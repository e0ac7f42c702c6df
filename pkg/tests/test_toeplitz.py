import math

import numpy as np
import pytest

from conftest import mc_mean
from tetralab.measure import moment
from tetralab.symbols import SymbolExpr, dictionary_terms, parse_symbol
from tetralab.toeplitz import (
    BH_TOL,
    OperatorWindow,
    WindowTooSmall,
    brown_halmos_residual,
    check_tuple_relations,
    compactness_probe,
    coordinate_windows,
    identity_window,
    ladder_shift_check,
    rank_one_window,
    symbol_recovery,
    toeplitz_window,
)

# <A phi_3 e, phi_3 e> - <A e, e> for the projector A onto e = e_1^1: phi_3 e has
# degree 3, outside the range of A, so the residual is |0 - 1|.
RANK_ONE_R3 = 1.0
# sqrt(3 * moment((1,0,1),(1,0,1))) = sqrt(2/5): the largest entry of the
# conj(z2) z3 window on degrees <= 3 (quadrature at r = 0)
PROBE_Z2BAR_Z3 = 0.6324555320336759


def test_identity_symbol_gives_identity(basis):
    W = toeplitz_window(SymbolExpr.term(0, 0, 0), basis, 6)
    assert np.abs(W.matrix - np.eye(W.matrix.shape[0])).max() <= 1e-10


def test_z3_window_is_ladder_shift(basis):
    W = toeplitz_window(parse_symbol("z3"), basis, 8)
    expected = np.zeros_like(W.matrix)
    off = W.offsets
    for n in range(1, 7):
        d = basis.dim(n)
        expected[off[n + 2]:off[n + 2] + d, off[n]:off[n] + d] = np.eye(d)
    assert np.abs(W.matrix - expected).max() <= 1e-10


def test_z3_conjugate_is_adjoint(basis):
    W = toeplitz_window(parse_symbol("z3"), basis, 8)
    Wc = toeplitz_window(parse_symbol("~z3"), basis, 8)
    assert np.abs(Wc.matrix - W.matrix.conj().T).max() <= 1e-12


@pytest.mark.slow
def test_z2_window_against_monte_carlo(basis, mc_points):
    w11, w22, w12 = mc_points
    W = toeplitz_window(parse_symbol("z2"), basis, 4)
    vals = {(n, i): basis.poly(n, i).evaluate((w11, w22, w12)) for n in range(1, 5) for i in range(basis.dim(n))}
    for (n, i), ei in vals.items():
        for (m, j), ej in vals.items():
            mean, se = mc_mean(w22 * ei * np.conj(ej))
            assert abs(W.entry(m, j, n, i) - mean) <= 4 * se + 1e-12


def test_adjoint_consistency(basis):
    rng = np.random.default_rng(40)
    terms = dictionary_terms(2)
    for _ in range(5):
        s = SymbolExpr({terms[i]: complex(*rng.standard_normal(2)) for i in rng.choice(len(terms), 3)})
        W = toeplitz_window(s, basis, 6)
        Wc = toeplitz_window(s.conj(), basis, 6)
        assert np.abs(Wc.matrix - W.matrix.conj().T).max() <= 1e-12


def test_coordinate_windows(basis):
    N = 8
    Z1, Z2, Z3 = coordinate_windows(basis, N)
    s = Z3.size_upto(N - 2)
    cols = Z3.matrix[:, :s]
    assert np.abs(cols.conj().T @ cols - np.eye(s)).max() <= 1e-10
    safe = Z3.size_upto(N - 4)
    for A, B in ((Z1, Z2), (Z1, Z3), (Z2, Z3)):
        C = (A.matrix @ B.matrix - B.matrix @ A.matrix)[:, :safe]
        assert np.abs(C).max() <= 1e-10


def test_coordinate_windows_small(basis):
    Z3 = coordinate_windows(basis, 3)[2]
    assert abs(Z3.entry(3, 0, 1, 0) - 1) <= 1e-12


def test_z1_coordinate_window_equals_toeplitz_window(basis):
    Z1 = coordinate_windows(basis, 8)[0]
    W = toeplitz_window(parse_symbol("~z2*z3"), basis, 8)
    assert np.abs(Z1.matrix - W.matrix).max() <= 1e-9


def test_tuple_relations(basis):
    rep = check_tuple_relations(basis, 1)
    assert rep.residuals["T3adj_T3_minus_I"] <= 1e-12
    rep = check_tuple_relations(basis, 6, tol=1e-9)
    assert rep.passed
    assert max(rep.residuals.values()) <= 1e-9
    d = rep.as_dict()
    assert d["N"] == 6 and d["tol"] == 1e-9 and d["pass"] is True
    assert set(d["residuals"]) == {"T1_minus_T2adj_T3", "T2_minus_T1adj_T3", "T3adj_T3_minus_I"}


def test_brown_halmos_examples(basis):
    W = toeplitz_window(parse_symbol("~z2*z3"), basis, 8)
    assert max(brown_halmos_residual(W, basis, 6).values()) <= 1e-8
    assert max(brown_halmos_residual(identity_window(basis, 8), basis, 6).values()) <= 1e-12
    res = brown_halmos_residual(rank_one_window(basis, 6), basis, 4)
    assert abs(res["T3adj_A_T3_minus_A"] - RANK_ONE_R3) <= 1e-12
    assert res["T3adj_A_T3_minus_A"] >= 10 * BH_TOL


def test_brown_halmos_window_too_small(basis):
    W = toeplitz_window(parse_symbol("z3"), basis, 5)
    with pytest.raises(WindowTooSmall, match="1..6"):
        brown_halmos_residual(W, basis, 4)


def test_brown_halmos_necessity_sweep(basis):
    for a, b, k in dictionary_terms(2):
        if abs(k) > 2:
            continue
        W = toeplitz_window(SymbolExpr.term(a, b, k), basis, 8)
        assert max(brown_halmos_residual(W, basis, 6).values()) <= 1e-8, (a, b, k)


def random_hermitian_window(basis, hi, rng):
    size = basis.size(1, hi)
    X = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    dims = {n: basis.dim(n) for n in range(1, hi + 1)}
    return OperatorWindow((X + X.conj().T) / 2, 1, hi, dims)


def test_detection_of_non_toeplitz_windows(basis):
    rng = np.random.default_rng(41)
    for _ in range(5):
        A = random_hermitian_window(basis, 6, rng)
        _, rel = symbol_recovery(A, basis, 4, 2)
        assert rel > 1e-2
        assert max(brown_halmos_residual(A, basis, 4).values()) >= 10 * BH_TOL


def test_ladder_shift_examples(basis):
    one = SymbolExpr.term(0, 0, 0)
    for r in (1, 2, 3):
        assert ladder_shift_check(one, basis, 8, r) <= 1e-12
    s = parse_symbol("z2*~z2")
    assert ladder_shift_check(s, basis, 8, 0) == 0.0
    W = toeplitz_window(s, basis, 8)
    for r in (1, 2, 3):
        assert ladder_shift_check(s, basis, 8, r, window=W) <= 1e-9


def test_probe_examples(basis):
    prof = compactness_probe(SymbolExpr(), basis, 8, seed_degree=2)
    assert all(v == 0.0 for _, v in prof)
    prof = compactness_probe(parse_symbol("z3"), basis, 8)
    assert all(abs(v - 1) <= 1e-10 for _, v in prof)
    prof = compactness_probe(parse_symbol("~z2*z3"), basis, 8)
    assert len(prof) >= 3
    assert abs(prof[0][1] - PROBE_Z2BAR_Z3) <= 1e-12
    assert all(abs(v - prof[0][1]) <= 1e-9 for _, v in prof)


def test_probe_oracle_value(ctx):
    assert abs(math.sqrt(3 * moment((1, 0, 1), (1, 0, 1), ctx).real) - PROBE_Z2BAR_Z3) <= 1e-12


def test_recovery_round_trip(basis):
    s = parse_symbol("0.5*~z2*z3 + z2^2")
    A = toeplitz_window(s, basis, 8)
    rec, rel = symbol_recovery(A, basis, 6, 3)
    assert rel <= 1e-6
    assert rec.max_abs_diff(s) <= 1e-6


def test_recovery_of_zero_window(basis):
    A = toeplitz_window(SymbolExpr(), basis, 6)
    rec, rel = symbol_recovery(A, basis, 4, 2)
    assert rec.is_zero()
    assert rel == 0.0


def test_recovery_of_z1_window(basis):
    Z1 = coordinate_windows(basis, 8)[0]
    rec, rel = symbol_recovery(Z1, basis, 6, 3)
    assert rel <= 1e-6
    assert rec.max_abs_diff(SymbolExpr.term(0, 1, 1)) <= 1e-6


def test_recovery_needs_wide_window(basis):
    with pytest.raises(WindowTooSmall):
        symbol_recovery(identity_window(basis, 5), basis, 4, 2)


def test_window_shape_checked():
    with pytest.raises(ValueError):
        OperatorWindow(np.zeros((2, 2)), 1, 2, {1: 1, 2: 2})


def test_default_seed_degree_is_minimal(basis):
    from tetralab.toeplitz import default_seed_degree

    assert default_seed_degree(parse_symbol("~z2^2*z3")) == 2
    for key in dictionary_terms(2):
        s = SymbolExpr.term(*key)
        d = default_seed_degree(s)
        if d > 8:
            continue
        W = toeplitz_window(s, basis, 8)
        assert compactness_probe(s, basis, 8, window=W)[0][1] > 0.1, key
        if d > 1:
            assert compactness_probe(s, basis, 8, seed_degree=d - 1, window=W)[0][1] <= 1e-12, key
