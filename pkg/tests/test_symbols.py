import numpy as np
import pytest

from tetralab.measure import MeasureContext, integrate, phi_polys, sample_boundary_R, map_phi
from tetralab.poly import Poly
from tetralab.symbols import (
    MAX_EXPONENT,
    SymbolExpr,
    SymbolSyntaxError,
    dictionary_terms,
    parse_symbol,
    symbol_pullback,
)


def test_parse_examples():
    assert parse_symbol("z3") == SymbolExpr.term(0, 0, 1)
    s = parse_symbol("~z2*z3 + (0.5+0i)*z2^2")
    assert s == SymbolExpr({(0, 1, 1): 1, (2, 0, 0): 0.5})
    assert parse_symbol("z1") == SymbolExpr.term(0, 1, 1)


def test_conjugate_rewrites():
    assert parse_symbol("~z1") == SymbolExpr.term(1, 0, -1)
    assert parse_symbol("~z3") == parse_symbol("z3^-1")
    assert parse_symbol("z3*~z3").terms == {(0, 0, 0): 1}
    assert parse_symbol("z1 - ~z2*z3").is_zero()


def test_coefficients_and_signs():
    s = parse_symbol("-2*z2 + (1.5-2i)*~z2^2*z3^-2 - 3")
    assert s.terms == {(1, 0, 0): -2, (0, 2, -2): 1.5 - 2j, (0, 0, 0): -3}
    assert parse_symbol("1e-3*z2").terms == {(1, 0, 0): 1e-3}
    assert parse_symbol("z2 + z2").terms == {(1, 0, 0): 2}


@pytest.mark.parametrize(
    "text, pos",
    [
        ("z4", 0),
        ("z2 +", 4),
        ("z2 ** z3", 4),
        ("(1+2)*z2", 4),
        ("z2^1.5", 3),
        ("z2^-1", 4),
        ("z2 z3", 3),
        ("  ", 0),
    ],
)
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(SymbolSyntaxError) as err:
        parse_symbol(text)
    assert err.value.position == pos


def test_exponent_overflow():
    parse_symbol(f"z2^{MAX_EXPONENT}")
    with pytest.raises(SymbolSyntaxError, match="exceeds"):
        parse_symbol(f"z2^{MAX_EXPONENT + 1}")


def test_text_round_trip():
    rng = np.random.default_rng(3)
    keys = dictionary_terms(2)
    for _ in range(10):
        s = SymbolExpr({keys[i]: complex(*rng.standard_normal(2)) for i in rng.choice(len(keys), 4)})
        assert parse_symbol(s.to_text()).max_abs_diff(s) == 0


def test_conj_and_shift():
    s = SymbolExpr({(2, 1, -1): 1 + 2j})
    assert s.conj().terms == {(1, 2, 1): 1 - 2j}
    assert SymbolExpr.shift((2, 1, -1)) == -1
    assert s.pullback_degree() == 5


def test_dictionary_size():
    assert len(dictionary_terms(3)) == 10 * 7
    assert len(dictionary_terms(0)) == 1


def test_pullback_examples():
    p1, p2, p3 = (p.as_boundary() for p in phi_polys())
    assert symbol_pullback(parse_symbol("z3")) == p3
    assert symbol_pullback(parse_symbol("1")) == Poly.constant(1.0, 6)


def test_pullback_of_z1_equals_phi1_on_boundary():
    ctx = MeasureContext(12)
    rng = np.random.default_rng(8)
    p1 = phi_polys()[0].as_boundary()
    diff = symbol_pullback(parse_symbol("~z2*z3")) - p1
    for _ in range(5):
        u = Poly({(int(a), int(b), 1): complex(*rng.standard_normal(2)) for a, b in rng.integers(0, 3, (3, 2))})
        v = Poly({(int(a), int(b), 1): complex(*rng.standard_normal(2)) for a, b in rng.integers(0, 3, (3, 2))})
        val = integrate(diff * u.as_boundary() * v.as_boundary().conj(), ctx)
        assert abs(val) <= 1e-10


def test_symbol_values_match_pullback_pointwise():
    s = parse_symbol("(0.5+1i)*~z2*z3^-1 + z2^2*z3 - 2")
    u = symbol_pullback(s)
    for p in sample_boundary_R(20, seed=5):
        z = p.z
        zc = tuple(np.conj(z))
        assert abs(u.evaluate(z + zc) - s.evaluate(map_phi(z))) <= 1e-12
