from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import polynomials
from heatext.errors import DepthExhausted, MissingFlow, NonIntegralBracket
from heatext.psdo import (
    D,
    IDENTITY,
    FlowTable,
    L_power,
    PsdoOperator,
    build_phi,
    commutator,
    dress,
    dx,
    gbinom,
    kp_flows,
    lax_operator,
    leibniz_compose,
    split,
    symmetry_operator,
    t_derivative,
    v_in_terms_of_w,
    verify_g_flow_consistency,
    verify_S_relations,
    verify_zero_curvature,
    w_flows,
)
from heatext.rings import ONE, v, w

X = sympy.Symbol("x")
XI = sympy.Symbol("xi")
V_GENS = [("v", 1, 0), ("v", 2, 0), ("v", 1, 1), ("t", 1)]


def _coef_to_sympy(poly):
    out = sympy.Integer(0)
    for mono, c in poly.items():
        term = sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
        for g, e in mono:
            if g[0] == "t":
                base = X if g[1] == 1 else sympy.Symbol(f"t{g[1]}")
            else:
                f = sympy.Function(f"{g[0]}{g[1]}")(X)
                base = sympy.diff(f, X, g[2]) if g[2] else f
            term *= base**e
        out += term
    return out


def _symbol(A):
    return sum((_coef_to_sympy(c) * XI**a for a, c in A.coeffs.items()), sympy.Integer(0))


def symbol_compose(A, B, lowest):
    """Symbol calculus: sigma(A B) = sum_r 1/r! d_xi^r sigma_A d_x^r sigma_B."""
    sa, sb = _symbol(A), _symbol(B)
    top = A.order() + B.order()
    out = 0
    for r in range(top - lowest + 1):
        out += sympy.diff(sa, XI, r) * sympy.diff(sb, X, r) / sympy.factorial(r)
    out = sympy.expand(out)
    return {k: sympy.expand(out.coeff(XI, k)) for k in range(lowest, top + 1)}


small_ops = st.builds(
    lambda cs: PsdoOperator(cs),
    st.dictionaries(st.integers(0, 2), polynomials(gens=V_GENS, max_terms=2, max_exp=1), max_size=3),
)
pseudo_ops = st.builds(
    lambda cs: PsdoOperator(cs, -4),
    st.dictionaries(st.integers(-3, 2), polynomials(gens=V_GENS, max_terms=2, max_exp=1), max_size=3),
)


def test_gbinom():
    assert gbinom(-1, 2) == 1
    assert gbinom(-2, 3) == -4
    assert gbinom(3, 4) == 0
    assert gbinom(5, 2) == 10


def test_inverse_derivative_expansion():
    # d^{-1} v = v d^{-1} - v_x d^{-2} + v_xx d^{-3} - ...
    op = leibniz_compose(PsdoOperator.d(-1), PsdoOperator({0: v(1)}), depth=4)
    assert [op.coefficient(a) for a in (-1, -2, -3, -4)] == [v(1), -v(1, 1), v(1, 2), -v(1, 3)]


@settings(max_examples=40)
@given(pseudo_ops, pseudo_ops)
def test_composition_matches_symbol_calculus(A, B):
    C = leibniz_compose(A, B)
    if C.tail is None or A.order() is None or B.order() is None:
        return
    ref = symbol_compose(A, B, C.tail)
    for k, expect in ref.items():
        got = _coef_to_sympy(C.coefficient(k))
        assert sympy.simplify(got - expect) == 0, k


@given(small_ops, small_ops, small_ops)
def test_composition_associative(A, B, C):
    assert leibniz_compose(leibniz_compose(A, B), C) == leibniz_compose(A, leibniz_compose(B, C))


@given(pseudo_ops)
def test_split_idempotent(A):
    plus, minus = split(A)
    assert split(plus) == (plus, PsdoOperator({}))
    assert split(minus)[1] == minus
    assert plus + minus == A


def test_tail_is_enforced():
    L = lax_operator(3)
    with pytest.raises(DepthExhausted):
        L.coefficient(-4)
    with pytest.raises(DepthExhausted):
        leibniz_compose(PsdoOperator.d(-1), PsdoOperator({0: v(1)}))
    assert L_power(2, 4).tail == -3


def test_canonical_powers():
    P2, _ = split(L_power(2, 6))
    P3, _ = split(L_power(3, 6))
    assert P2 == PsdoOperator({2: ONE, 0: v(1) * 2})
    assert P3 == PsdoOperator({3: ONE, 1: v(1) * 3, 0: v(1, 1) * 3 + v(2) * 3})
    assert P3.to_text() == "D^3 + 3*v1*D + (3*v1_x+3*v2)"


def test_kp_flows():
    f2 = kp_flows(2, 6)
    assert f2.rhs(1) == v(1, 2) + v(2, 1) * 2
    assert kp_flows(1, 6).rhs(3) == v(3, 1)
    with pytest.raises(MissingFlow):
        f2.rhs(6)
    assert FlowTable.from_json(f2.to_json()) == f2
    assert f2.to_text().splitlines()[0] == "v1_t2 = v1_xx+2*v2_x"


def test_kp_equation_from_flows():
    # u = 2 v1, y = t2, t = t3:  3 u_yy = (4 u_t - u_xxx - 6 u u_x)_x
    f2, f3 = kp_flows(2, 6), kp_flows(3, 6)
    u = v(1) * 2
    u_yy = t_derivative(f2.rhs(1), f2) * 2
    u_t = f3.rhs(1) * 2
    assert u_yy * 3 == dx(u_t * 4 - dx(u, 3) - u * dx(u) * 6)


@pytest.mark.parametrize("j,k", [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
def test_zero_curvature(j, k):
    assert verify_zero_curvature(j, k, 6).is_zero()


def test_zero_curvature_depth_guard():
    with pytest.raises(DepthExhausted):
        verify_zero_curvature(3, 5, 4)


def test_non_integral_bracket_is_detected():
    from heatext import psdo

    with pytest.raises(NonIntegralBracket):
        psdo._integral_check(PsdoOperator({0: v(1)}), "test")


def test_dressing():
    g, g_inv, L = dress(6)
    assert leibniz_compose(g, g_inv) - IDENTITY == PsdoOperator({}, -6)
    assert v_in_terms_of_w(6)[1] == -w(1, 1)
    assert v_in_terms_of_w(6)[2] == -w(2, 1) + w(1) * w(1, 1)
    assert L.coefficient(1) == ONE and L.coefficient(0) == 0


@pytest.mark.parametrize("j", [1, 2, 3])
def test_g_flow_consistency(j):
    assert verify_g_flow_consistency(j, 6).is_zero()


def test_w_flows_t1_is_x_derivative():
    f1 = w_flows(1, 6)
    for a, rhs in f1.equations.items():
        assert rhs == w(a, 1)


@pytest.mark.parametrize("dressed", [True, False])
def test_S_relations(dressed):
    report = verify_S_relations(2, 4, 4, dressed=dressed)
    assert report.ok
    assert commutator(D, symmetry_operator(4)) == IDENTITY


def test_S_relations_need_flow_inside_cutoff():
    with pytest.raises(DepthExhausted):
        verify_S_relations(5, 4, 4)


@pytest.mark.parametrize("n,jmax", [(4, 3), (6, 2), (7, 3)])
def test_phi_flat_on_certified_columns(n, jmax):
    rep = build_phi(n, jmax, 6)
    assert rep.ok and rep.certified_columns == list(range(n - jmax))
    assert rep.phi[1, 0].coefficient(("dt", 1)) == ONE


def test_printing_and_json():
    L = lax_operator(2)
    assert L.to_text() == "D + v1*D^-1 + v2*D^-2 + O(D^-3)"
    assert "\\partial_x" in L.to_latex()
    assert PsdoOperator.from_json(L.to_json()) == L
    assert L.to_json()["tail_depth"] == -2


@given(pseudo_ops)
def test_json_round_trip(A):
    assert PsdoOperator.from_json(A.to_json()) == A
