import pytest
from hypothesis import given, settings, strategies as st

from tetralab.poly import Poly, holo_vars

coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
exps = st.tuples(*[st.integers(0, 3)] * 3)
polys = st.dictionaries(exps, coeff, max_size=5).map(Poly)


def test_pruning_drops_tiny_coefficients():
    p = Poly({(1, 0, 0): 1e-16, (0, 1, 0): 2.0})
    assert p.terms == {(0, 1, 0): 2.0}


def test_cancellation_gives_zero():
    z1, _, _ = holo_vars()
    assert (z1 - z1).is_zero()


def test_phi3_square():
    z1, z2, z3 = holo_vars()
    p = z1 * z2 - z3**2
    assert (p * p).terms == {(2, 2, 0): 1, (1, 1, 2): -2, (0, 0, 4): 1}


@settings(max_examples=50, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert ((a * b) * c).max_abs_diff(a * (b * c)) < 1e-9
    assert (a * (b + c)).max_abs_diff(a * b + a * c) < 1e-9
    assert (a * b).max_abs_diff(b * a) < 1e-12


@settings(max_examples=30, deadline=None)
@given(polys, st.tuples(*[st.complex_numbers(max_magnitude=1.5, allow_nan=False)] * 3))
def test_evaluation_is_a_homomorphism(a, pt):
    b = a * a + 1
    assert abs(b.evaluate(pt) - (a.evaluate(pt) ** 2 + 1)) <= 1e-8 * (1 + abs(b.evaluate(pt)))


def test_substitute_and_conj():
    z1, z2, z3 = holo_vars()
    p = z1 + 2 * z3
    q = p.substitute([z2, z1, z3])
    assert q == z2 + 2 * z3
    c = (1j * z1).conj()
    assert c.terms == {(0, 0, 0, 1, 0, 0): -1j}


def test_mixed_variable_sets_rejected():
    with pytest.raises(ValueError):
        Poly.variable(0, 3) + Poly.variable(0, 6)
