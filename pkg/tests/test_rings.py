from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import polynomials, rationals, sym, to_sympy
from heatext.errors import WindowExceeded
from heatext.rings import (
    ONE,
    ZERO,
    Polynomial,
    ZSeries,
    as_fraction,
    bell_sequence,
    p,
    t,
    v,
    w,
    xi_derivative,
)


@settings(max_examples=1000)
@given(rationals, rationals, rationals)
def test_rational_field_laws(a, b, c):
    A, B, C = (Polynomial.const(x) for x in (a, b, c))
    assert (A + B) + C == A + (B + C)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C


@given(polynomials(), polynomials(), polynomials())
def test_polynomial_ring_laws(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == ZERO
    assert f * ONE == f


@given(polynomials(), polynomials())
def test_product_matches_sympy(f, g):
    assert to_sympy(f * g) == sympy.expand(to_sympy(f) * to_sympy(g))


@given(polynomials(), polynomials())
def test_partial_matches_sympy_and_leibniz(f, g):
    x = ("p", 1)
    assert to_sympy(f.partial(x)) == sympy.diff(to_sympy(f), sym(x))
    assert (f * g).partial(x) == f.partial(x) * g + f * g.partial(x)


@given(polynomials(), polynomials())
def test_derivation_is_leibniz(f, g):
    rule = lambda gen: p(gen[1] + 1) if gen[0] == "p" else (ONE if gen == ("t", 1) else None)
    assert (f * g).derivation(rule) == f.derivation(rule) * g + f * g.derivation(rule)


@given(polynomials())
def test_substitute_identity_and_json(f):
    assert f.substitute(lambda g: None) == f
    assert Polynomial.from_json(f.to_json()) == f


def test_coefficients_stay_exact():
    assert as_fraction(Fraction(4, 2)) == 2 and type(as_fraction(Fraction(4, 2))) is int
    with pytest.raises(TypeError):
        as_fraction(0.5)
    half = Polynomial.const(Fraction(1, 2))
    assert (half * 2) == ONE


def test_text_and_latex():
    f = t(1) ** 2 + t(2) * 2
    assert f.to_text() == "t1^2+2*t2"
    assert v(1, 2).to_text() == "v1_xx"
    assert w(2, 1).to_text() == "w2_x"
    assert "t_{1}" in f.to_latex()


def test_json_shape():
    data = (t(1) * Fraction(3, 2)).to_json()
    assert data == {"terms": [{"mono": [["t", 1, 1]], "coef": "3/2"}]}
    # the exponent may be left out and defaults to 1
    assert Polynomial.from_json({"terms": [{"mono": [["t", 1]], "coef": "1/1"}]}) == t(1)


def test_bad_generators_rejected():
    with pytest.raises(ValueError):
        Polynomial.gen(("q", 1))
    with pytest.raises(ValueError):
        Polynomial.gen(("v", 1))


def test_zseries_validity():
    s = ZSeries([ONE, t(1), t(2)], valid=1)
    assert s[1] == t(1)
    with pytest.raises(WindowExceeded):
        s[2]
    assert s.dz().valid == 0
    assert (s * s).valid == 1
    assert ZSeries.from_json(s.to_json()) == s


def test_xi_derivative_coefficients():
    x2 = xi_derivative(N=4, r=2, Z=3)
    # d^2/dz^2 (t1 z + t2 z^2 + t3 z^3 + t4 z^4) = 2 t2 + 6 t3 z + 12 t4 z^2
    assert [x2[s] for s in range(3)] == [t(2) * 2, t(3) * 6, t(4) * 12]
    with pytest.raises(WindowExceeded):
        x2[3]
    with pytest.raises(ValueError):
        xi_derivative(4, 0, 3)


def _sympy_bell(N, m):
    z = sympy.Symbol("z")
    xi = sum(sympy.Symbol(f"t{k}") * z**k for k in range(1, N + 1))
    return sympy.Poly(sympy.expand(sympy.simplify(sympy.exp(-xi) * sympy.diff(sympy.exp(xi), z, m))), z)


@pytest.mark.parametrize("N,M,Z", [(3, 2, 3), (5, 2, 3), (6, 3, 4), (4, 4, 2)])
def test_bell_sequence_matches_exp_differentiation(N, M, Z):
    # a larger N stands in for the infinite time series; certified coefficients
    # must not depend on the extra times
    big = N + M + Z
    B = bell_sequence(N, M, Z)
    for m in range(M + 1):
        ref = _sympy_bell(big, m)
        assert B[m].valid == min(Z, N - m)
        for s in range(B[m].valid + 1):
            assert to_sympy(B[m][s]) == sympy.expand(ref.coeff_monomial(sympy.Symbol("z") ** s))


def test_bell_low_orders():
    B = bell_sequence(3, 2, 2)
    assert B[1][0] == t(1)
    assert B[2][0] == t(1) ** 2 + t(2) * 2
    assert B[2][1] == t(1) * t(2) * 4 + t(3) * 6
