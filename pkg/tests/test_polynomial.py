from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdfpore.polynomial import Polynomial, as_fraction

small_fracs = st.fractions(min_value=-10, max_value=10, max_denominator=12)


@pytest.mark.parametrize(
    "value, expected",
    [(0.9, Fraction(9, 10)), ("-1/4", Fraction(-1, 4)), (3, Fraction(3)), (Fraction(1, 63), Fraction(1, 63))],
)
def test_as_fraction(value, expected):
    assert as_fraction(value) == expected


def test_trailing_zeros_trimmed():
    p = Polynomial([1, 2, 0, 0])
    assert len(p) == 2 and p.degree == 1


def test_zero_degree():
    assert Polynomial([0]).degree == -1


def test_arithmetic_and_eval():
    z = Polynomial([Fraction(0), Fraction(1)])
    p = (z - 1) ** 3
    assert p.coeffs == (-1, 3, -3, 1)
    assert p(Fraction(3)) == 8
    assert p.deriv().coeffs == (3, -6, 3)


def test_divmod_exact():
    z = Polynomial([Fraction(0), Fraction(1)])
    a = (z - 2) * (z * z + 1)
    q, r = a.divmod(z - 2)
    assert q == z * z + 1 and r == 0


def test_shift_and_divide():
    p = Polynomial([Fraction(1), Fraction(2)]).shift(3)
    assert p.low_order_zeros() == 3
    assert p.divide_by_z(3).coeffs == (1, 2)
    with pytest.raises(ValueError):
        Polynomial([1, 1]).divide_by_z(1)


def test_scaled_to_integers():
    assert Polynomial([Fraction(1, 6), Fraction(-1, 4)]).scaled_to_integers() == (12, (2, -3))


def test_float_evaluation_matches_exact():
    p = Polynomial([Fraction(1, 3), Fraction(-2), Fraction(5, 7)])
    z = np.linspace(-2, 2, 7)
    np.testing.assert_allclose(p.evaluate(z), [float(p(as_fraction(v))) for v in z], rtol=1e-14)


@given(st.lists(small_fracs, min_size=1, max_size=5), st.lists(small_fracs, min_size=1, max_size=5), small_fracs)
def test_ring_homomorphism(a, b, z):
    pa, pb = Polynomial(a), Polynomial(b)
    assert (pa * pb)(z) == pa(z) * pb(z)
    assert (pa + pb)(z) == pa(z) + pb(z)
    assert (pa - pb)(z) == pa(z) - pb(z)


@given(st.lists(small_fracs, min_size=1, max_size=6), st.lists(small_fracs, min_size=2, max_size=4))
def test_division_identity(a, b):
    pb = Polynomial(b)
    if pb.degree < 1:
        return
    q, r = Polynomial(a).divmod(pb)
    assert q * pb + r == Polynomial(a)
    assert r.degree < pb.degree
