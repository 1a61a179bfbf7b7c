from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twistcalc.series import (ConfigurationError, NotInvertibleError, Series, Truncation,
                              lc_add, lc_lowest_order, lc_shift)

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def series(order):
    return st.lists(fracs, min_size=order + 1, max_size=order + 1).map(lambda c: Series(c, order))


def test_truncation_drops_high_powers():
    T = Truncation(2)
    h = T.h()
    assert h * h * h == T.zero()
    assert T.h(3) == T.zero()
    assert (T.one() + h) ** 3 == T.series([1, 3, 3])


def test_inverse_of_one_plus_h():
    T = Truncation(4)
    s = T.one() + T.h()
    assert s.invert() == T.series([1, -1, 1, -1, 1])


def test_non_invertible():
    with pytest.raises(NotInvertibleError):
        Truncation(2).h().invert()


def test_order_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        Truncation(1).one() + Truncation(2).one()
    with pytest.raises(ConfigurationError):
        Truncation(-1)


def test_parse_and_render_round_trip():
    T = Truncation(3)
    s = T.parse("1 - 1/2*h + 3*h^3")
    assert s.coeffs == (1, Fraction(-1, 2), 0, 3)
    assert T.parse(str(s)) == s
    assert str(T.zero()) == "0"


@pytest.mark.parametrize("bad", ["", "h^", "1 + + h", "x"])
def test_parse_rejects_garbage(bad):
    with pytest.raises(ValueError):
        Truncation(2).parse(bad)


@given(series(3), series(3), series(3))
def test_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(series(3))
def test_invert_when_constant_term_nonzero(a):
    if a[0] == 0:
        return
    assert a * a.invert() == Series([1], 3)


def test_sparse_helpers():
    a = {("x", 0): Fraction(1), ("y", 1): Fraction(2)}
    b = lc_add(a, {("x", 0): Fraction(-1)})
    assert b == {("y", 1): 2}
    assert lc_lowest_order(b) == 1
    assert lc_shift(a, 1, 1) == {("x", 1): 1}
