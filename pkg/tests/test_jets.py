import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import to_sympy
from heatext.errors import NonzeroResidual, WindowExceeded
from heatext.jets import (
    JetExpression,
    apply_T,
    apply_V,
    apply_weyl_image,
    commutator_residual,
    d_t,
    dx_power,
    symmetry_basis,
    total_x,
    verify_symmetry,
)
from heatext.rings import ONE, p, t
from heatext.weyl import s_bracket
from heatext.window import TruncationWindow


def jet(poly, N=6, P=8):
    return JetExpression.of(poly, (N, P))


def _on_wave(e: JetExpression):
    """Evaluate on the wave solution exp(xi): p_k -> z^k exp(xi), divided by exp(xi)."""
    z = sympy.Symbol("z")
    expr = to_sympy(e.poly)
    return sympy.expand(expr.subs({sympy.Symbol(f"p{k}"): z**k for k in range(e.P + 1)}))


def test_heat_compatibility():
    for i in range(1, 8):
        for j in range(1, 9 - i):
            assert d_t(i, d_t(j, jet(p(0)))) == p(i + j)


def test_flows_commute_on_mixed_monomials():
    e = jet(p(1) * t(2) * t(3) ** 2, P=8)
    assert d_t(2, d_t(3, e)) == d_t(3, d_t(2, e))


def test_window_is_enforced():
    with pytest.raises(WindowExceeded):
        d_t(3, jet(p(7)))
    with pytest.raises(WindowExceeded):
        jet(t(7))
    with pytest.raises(WindowExceeded):
        jet(p(9))


def test_T_examples():
    e3 = JetExpression.of(p(0), (3, 5))
    assert apply_T(e3) == t(1) * p(0) + t(2) * p(1) * 2 + t(3) * p(2) * 3
    assert apply_V(1, 1, e3) == t(1) * p(1) + t(2) * p(2) * 2 + t(3) * p(3) * 3
    assert apply_T(jet(ONE)) == t(1)
    assert apply_T(jet(t(1))) == t(1) ** 2 + t(2) * 2


@pytest.mark.parametrize("m,j", [(0, 0), (1, 0), (0, 2), (1, 1), (2, 0), (2, 1), (3, 0)])
def test_V_matches_wave_oracle(m, j):
    N = 3
    e = JetExpression.of(p(0), (N, 12))
    z = sympy.Symbol("z")
    xi = sum(sympy.Symbol(f"t{k}") * z**k for k in range(1, N + 1))
    expect = sympy.expand(sympy.simplify(z**j * sympy.diff(sympy.exp(xi), z, m) / sympy.exp(xi)))
    assert _on_wave(apply_V(m, j, e)) == expect


def test_dx_T_commutator_is_identity():
    w = TruncationWindow(N=4, P=12)
    for e in symmetry_basis(w, growth=4):
        lhs = total_x(apply_T(e)) - apply_T(total_x(e))
        assert lhs == e


@pytest.mark.parametrize("a,b", [((0, 1), (1, 0)), ((1, 1), (1, 0)), ((1, 0), (0, 2)), ((1, 1), (0, 1))])
def test_V_commutators_match_structure_constants(a, b):
    w = TruncationWindow(N=3, P=14)
    e = JetExpression.of(p(0) * t(1), w)
    lhs = apply_V(*a, apply_V(*b, e)) - apply_V(*b, apply_V(*a, e))
    assert lhs == apply_weyl_image(s_bracket(a, b), e)


@pytest.mark.parametrize("i,m,j", [(1, 1, 0), (2, 1, 0), (3, 0, 2), (2, 1, 1), (4, 2, 0), (3, 2, 1)])
def test_symmetry_residual_vanishes(i, m, j):
    report = verify_symmetry(i, m, j, TruncationWindow(N=4, P=16))
    assert report and all(r.is_zero() for r in report.values())


def test_symmetry_needs_flow_inside_cutoff():
    with pytest.raises(WindowExceeded):
        verify_symmetry(5, 1, 0, TruncationWindow(N=4, P=16))


def test_symmetry_catches_a_broken_operator():
    # with the T cutoff below the flow index the commutator picks up t_i terms
    e = JetExpression.of(p(0), (2, 12))
    assert not commutator_residual(3, 1, 0, e).is_zero()


def test_symmetry_needs_room_for_growth():
    with pytest.raises(WindowExceeded):
        verify_symmetry(4, 3, 0, TruncationWindow(N=6, P=8))


@given(st.integers(0, 4), st.integers(1, 3))
def test_dx_power_composes(k, extra):
    e = jet(p(0) * t(2), P=8)
    assert dx_power(k + extra, e) == dx_power(extra, dx_power(k, e))


def test_serialization():
    e = JetExpression.of(t(1) * p(2) * 3, (4, 6))
    assert JetExpression.from_json(e.to_json()) == e
    assert e.to_text() == "3*p2*t1"
