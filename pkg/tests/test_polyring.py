from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from darboux3.fieldspec import parse_expression
from darboux3.polyring import Cofactor, Monomial, Poly, monomials_up_to

X = Poly.variable("x")
Y = Poly.variable("y")
Z = Poly.variable("z")
ONE = Poly.constant(1)


class TestArithmetic:
    def test_partial_derivative(self):
        assert (X * X * Y).partial_derivative("x") == 2 * X * Y
        assert X.partial_derivative("z") == Poly.zero()

    def test_product(self):
        assert (X + Y) * (X - Y) == X * X - Y * Y

    def test_power(self):
        assert (X + ONE) ** 2 == X * X + 2 * X + ONE
        with pytest.raises(ValueError):
            X ** -1

    def test_degree_sentinel(self):
        assert Poly.zero().degree == -1
        assert ONE.degree == 0
        assert (X * Y * Z).degree == 3


class TestHomogeneousParts:
    def test_mixed(self):
        p = X * X + Y + ONE
        assert p.homogeneous_parts() == [(0, ONE), (1, Y), (2, X * X)]

    def test_quadratic_form(self):
        gamma = X * X + Y * Y  # alpha = 1
        assert gamma.homogeneous_parts() == [(2, gamma)]

    def test_zero(self):
        assert Poly.zero().homogeneous_parts() == []

    def test_resum_identity(self):
        p = X * Y - 3 * Z + ONE + X ** 3
        total = Poly.zero()
        for _, part in p.homogeneous_parts():
            total = total + part
        assert total == p


class TestTryDivide:
    def test_monomial(self):
        assert (X * X * Y).try_divide(X) == X * Y

    def test_fails(self):
        assert (X * X + ONE).try_divide(X) is None

    def test_difference_of_squares(self):
        assert (X * X - Y * Y).try_divide(X - Y) == X + Y

    def test_zero_divisor(self):
        with pytest.raises(ZeroDivisionError):
            X.try_divide(Poly.zero())


class TestEvaluate:
    def test_exact(self):
        p = X * Y - X - Z
        assert p.evaluate((1, 2, 3)) == F(-2)

    def test_constant_term_at_origin(self):
        p = X * Y + 7 * Z + Poly.constant(F(5, 3))
        assert p.evaluate((0, 0, 0)) == F(5, 3)

    def test_fraction_point(self):
        assert (X * X).evaluate((F(1, 2), 0, 0)) == F(1, 4)

    def test_float(self):
        p = X * X - Y
        assert p.evaluate_f((0.5, 0.25, 0.0)) == pytest.approx(0.0)


class TestRendering:
    def test_canonical_order(self):
        p = X * Y - X - Z
        assert str(p) == "x*y - x - z"

    def test_fraction_coefficients(self):
        p = Poly.constant(F(3, 2)) * X - Poly.constant(F(1, 2))
        assert str(p) == "3/2*x - 1/2"

    def test_zero(self):
        assert str(Poly.zero()) == "0"

    def test_roundtrip(self):
        p = -X ** 2 - Y + ONE
        assert parse_expression(str(p)) == p


class TestCofactor:
    def test_as_poly(self):
        k = Cofactor(F(-1), 0, F(1), 0)
        assert k.as_poly() == Y - ONE

    def test_from_poly_rejects_high_degree(self):
        with pytest.raises(ValueError):
            Cofactor.from_poly(X * X)

    def test_roundtrip(self):
        k = Cofactor(F(1, 2), F(-3), 0, F(7))
        assert Cofactor.from_poly(k.as_poly()) == k


def test_monomials_up_to_dimensions():
    # dim of degree <= n space in three variables is C(n+3, 3)
    assert len(monomials_up_to(2)) == 10
    assert len(monomials_up_to(4)) == 35
    assert len(monomials_up_to(6)) == 84
    assert len(monomials_up_to(2, 1)) == 9
    assert monomials_up_to(1) == [
        Monomial(0, 0, 0),
        Monomial(1, 0, 0),
        Monomial(0, 1, 0),
        Monomial(0, 0, 1),
    ]


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=2)


@st.composite
def small_poly(draw):
    n_terms = draw(st.integers(min_value=0, max_value=4))
    terms = {}
    for _ in range(n_terms):
        m = Monomial(
            draw(st.integers(min_value=0, max_value=2)),
            draw(st.integers(min_value=0, max_value=2)),
            draw(st.integers(min_value=0, max_value=2)),
        )
        terms[m] = draw(coeffs)
    return Poly(terms)


@given(small_poly(), small_poly(), small_poly())
@settings(max_examples=200, deadline=None)
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p + q == q + p
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r


@given(small_poly())
@settings(max_examples=200, deadline=None)
def test_homogeneous_resum(p):
    total = Poly.zero()
    for d, part in p.homogeneous_parts():
        assert not part.is_zero()
        for m, _ in part.terms.items():
            assert m.degree == d
        total = total + part
    assert total == p


@given(small_poly(), small_poly())
@settings(max_examples=200, deadline=None)
def test_try_divide_of_product(p, d):
    if d.is_zero():
        return
    q = (p * d).try_divide(d)
    assert q == p


@given(small_poly())
@settings(max_examples=200, deadline=None)
def test_mixed_partials_commute(p):
    xy = p.partial_derivative("x").partial_derivative("y")
    yx = p.partial_derivative("y").partial_derivative("x")
    assert xy == yx


@given(small_poly())
@settings(max_examples=150, deadline=None)
def test_render_parse_roundtrip(p):
    assert parse_expression(str(p)) == p
