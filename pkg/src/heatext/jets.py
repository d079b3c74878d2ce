"""Jet ring of the heat hierarchy and the operators acting on it.

Coordinates are the times ``t_1 = x, t_2, ...`` and the jets ``p_j`` of
``u = p_0``.  The frame is on-shell: ``p_j`` are independent generators and
the hierarchy derivation ``D_{t_i}`` acts by ``t_i -> 1``, ``p_k -> p_{k+i}``.
``D_{t_1}`` is the total x-derivative.

The symmetry operator ``T = sum_{j=1}^{N} j t_j d_x^{j-1}`` is cut off at the
window's ``N``.  Nothing here ever drops a term silently: a result needing a
jet above ``P`` raises :class:`WindowExceeded`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .errors import NonzeroResidual, WindowExceeded
from .rings import ONE, ZERO, Polynomial, p, t
from .window import TruncationWindow
from . import weyl


@dataclass(frozen=True)
class JetExpression:
    poly: Polynomial
    N: int
    P: int

    def __post_init__(self):
        for g in self.poly.generators():
            if g[0] == "t" and not 1 <= g[1] <= self.N:
                raise WindowExceeded(f"t{g[1]} outside window N={self.N}")
            if g[0] == "p" and g[1] > self.P:
                raise WindowExceeded(f"p{g[1]} outside window P={self.P}")
            if g[0] not in ("t", "p"):
                raise ValueError(f"jet expressions only use t and p, got {g}")

    @classmethod
    def of(cls, poly, window: TruncationWindow | tuple) -> "JetExpression":
        N, P = (window.N, window.P) if isinstance(window, TruncationWindow) else window
        return cls(Polynomial.coerce(poly), N, P)

    def _like(self, poly: Polynomial) -> "JetExpression":
        return JetExpression(poly, self.N, self.P)

    def __add__(self, other):
        return self._like(self.poly + _poly(other))

    def __sub__(self, other):
        return self._like(self.poly - _poly(other))

    def __mul__(self, other):
        return self._like(self.poly * _poly(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.poly)

    def __pow__(self, n: int):
        return self._like(self.poly ** n)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __eq__(self, other):
        if isinstance(other, JetExpression):
            return self.poly == other.poly
        if isinstance(other, (Polynomial, int)):
            return self.poly == other
        return NotImplemented

    def __hash__(self):
        return hash(self.poly)

    def __str__(self):
        return self.poly.to_text()

    def to_text(self) -> str:
        return self.poly.to_text()

    def to_latex(self) -> str:
        return self.poly.to_latex()

    def to_json(self) -> dict:
        return {"N": self.N, "P": self.P, "poly": self.poly.to_json()}

    @classmethod
    def from_json(cls, data) -> "JetExpression":
        return cls(Polynomial.from_json(data["poly"]), int(data["N"]), int(data["P"]))

    def jet_order(self) -> int:
        return max((g[1] for g in self.poly.generators() if g[0] == "p"), default=-1)


def _poly(x) -> Polynomial:
    if isinstance(x, JetExpression):
        return x.poly
    return Polynomial.coerce(x)


def _shift_rule(i: int, P: int):
    def rule(g):
        tag, idx = g
        if tag == "t":
            return ONE if idx == i else None
        if idx + i > P:
            raise WindowExceeded(f"D_t{i} of p{idx} needs p{idx + i} beyond P={P}")
        return p(idx + i)

    return rule


def d_t(i: int, e: JetExpression) -> JetExpression:
    """On-shell hierarchy derivation ``D_{t_i}``."""
    if i < 1:
        raise ValueError("flow index starts at 1")
    return e._like(e.poly.derivation(_shift_rule(i, e.P)))


def total_x(e: JetExpression) -> JetExpression:
    return d_t(1, e)


def dx_power(k: int, e: JetExpression) -> JetExpression:
    for _ in range(k):
        e = total_x(e)
    return e


def apply_T(e: JetExpression) -> JetExpression:
    """``T e = sum_{j=1}^{N} j t_j d_x^{j-1} e`` with the window's N."""
    acc = ZERO
    de = e
    for j in range(1, e.N + 1):
        if j > 1:
            de = total_x(de)
        if de.is_zero():
            break
        acc = acc + t(j) * j * de.poly
    return e._like(acc)


def apply_V(m: int, j: int, e: JetExpression) -> JetExpression:
    """``V_{m,j} e = T^m (d_x^j e)``."""
    e = dx_power(j, e)
    for _ in range(m):
        e = apply_T(e)
    return e


def apply_weyl_image(X: weyl.WeylElement, e: JetExpression) -> JetExpression:
    """Act with the s-element whose A_1 image is ``X`` (key ``(m, j)`` -> ``V_{m,j}``)."""
    acc = e._like(ZERO)
    for (m, j), c in X.items():
        acc = acc + apply_V(m, j, e) * c
    return acc


def flow_minus_dx(i: int, e: JetExpression) -> JetExpression:
    """``(D_{t_i} - d_x^i) e``."""
    return d_t(i, e) - dx_power(i, e)


def commutator_residual(i: int, m: int, j: int, e: JetExpression) -> JetExpression:
    """``[D_{t_i} - d_x^i, V_{m,j}] e``."""
    return flow_minus_dx(i, apply_V(m, j, e)) - apply_V(m, j, flow_minus_dx(i, e))


def symmetry_basis(window: TruncationWindow, growth: int) -> list[JetExpression]:
    """t-monomials of degree <= 2 times ``p_k`` for k up to P/2, capped so
    that ``growth`` further jet orders still fit in the window."""
    kmax = min(window.P // 2, window.P - growth)
    if kmax < 0:
        raise WindowExceeded(
            f"window P={window.P} cannot absorb {growth} extra jet orders"
        )
    times = [()] + [(a,) for a in range(1, window.N + 1)]
    times += list(combinations_with_replacement(range(1, window.N + 1), 2))
    out = []
    for k in range(kmax + 1):
        for mono in times:
            poly = p(k)
            for a in mono:
                poly = poly * t(a)
            out.append(JetExpression.of(poly, window))
    return out


def verify_symmetry(i: int, m: int, j: int, window: TruncationWindow) -> dict:
    """Residuals of ``[D_{t_i} - d_x^i, V_{m,j}]`` on the test basis.

    Requires ``i <= N``: with T cut at N, ``[D_{t_i}, T]`` only sees
    ``t_i`` when it is inside the window.  Raises :class:`NonzeroResidual`
    on the first nonzero residual; otherwise returns ``{basis text: residual}``.
    """
    if i > window.N:
        raise WindowExceeded(f"flow t{i} is outside the T cutoff N={window.N}")
    growth = i + j + m * max(window.N - 1, 0)
    report = {}
    for e in symmetry_basis(window, growth):
        r = commutator_residual(i, m, j, e)
        if not r.is_zero():
            raise NonzeroResidual(
                f"[D_t{i} - dx^{i}, V({m},{j})] nonzero on {e}", location=str(e), residual=r
            )
        report[str(e)] = r
    return report
