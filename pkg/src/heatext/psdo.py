"""Truncated pseudo-differential operators and the dressed heat hierarchy.

An operator ``sum_a f_a d^a`` (``d = d/dx``) stores its coefficients for
orders ``a >= tail`` only.  ``tail`` is the most negative order certified
exact; ``None`` means the operator is exactly what is stored.

Composition uses ``d^a . f = sum_r C(a, r) f^(r) d^(a-r)`` with the
generalized binomial for negative ``a``.  Depth loss: unknown orders of A
(below ``tail_A``) only reach orders ``< tail_A + ord B``, and symmetrically,
so the product is certified down to ``max(tail_A + ord B, tail_B + ord A)``.

Coefficients are differential polynomials: ``("v", a, r)`` is the r-th
x-derivative of ``v^a``, ``("w", a, r)`` likewise for the dressing
coefficients, and ``t_1 = x`` so ``d_x t_1 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable, Mapping

from .errors import DepthExhausted, MissingFlow, NonIntegralBracket, NonzeroResidual
from .forms import ConnectionMatrix, GradedForm, dt, exterior_d
from .rings import ONE, ZERO, Fraction, Polynomial, t, v, w


def _dx_rule(g):
    tag = g[0]
    if tag in ("v", "w"):
        return Polynomial.gen((tag, g[1], g[2] + 1))
    if tag == "t":
        return ONE if g[1] == 1 else None
    raise ValueError(f"generator {g} has no x-derivative here")


def dx(f: Polynomial, r: int = 1) -> Polynomial:
    """r-th total x-derivative of a differential polynomial."""
    for _ in range(r):
        if not f:
            break
        f = f.derivation(_dx_rule)
    return f


def gbinom(a: int, r: int) -> Fraction:
    """``a (a-1) ... (a-r+1) / r!`` for any integer a."""
    num = 1
    for i in range(r):
        num *= a - i
    return Fraction(num, factorial(r))


def _max_tail(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return max(x, y)


class PsdoOperator:
    """``sum_{tail <= a <= order} f_a d^a`` with polynomial coefficients."""

    __slots__ = ("_coeffs", "tail")

    def __init__(self, coeffs: Mapping[int, object] | None = None, tail: int | None = None):
        self.tail = tail
        clean = {}
        for a, c in (coeffs or {}).items():
            if tail is not None and a < tail:
                continue
            c = Polynomial.coerce(c)
            if c:
                clean[int(a)] = c
        self._coeffs = clean

    @classmethod
    def d(cls, a: int = 1) -> "PsdoOperator":
        return cls({a: ONE})

    @classmethod
    def scalar(cls, c) -> "PsdoOperator":
        return cls({0: Polynomial.coerce(c)})

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def orders(self) -> list[int]:
        return sorted(self._coeffs, reverse=True)

    def order(self):
        """Highest order with a nonzero coefficient (None for the zero operator)."""
        return max(self._coeffs, default=None)

    def coefficient(self, a: int) -> Polynomial:
        if self.tail is not None and a < self.tail:
            raise DepthExhausted(f"order {a} is below the certified tail {self.tail}")
        return self._coeffs.get(a, ZERO)

    def is_zero(self) -> bool:
        return not self._coeffs

    def __eq__(self, other):
        if not isinstance(other, PsdoOperator):
            return NotImplemented
        return self.tail == other.tail and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.tail, frozenset(self._coeffs.items())))

    def truncate(self, tail: int | None) -> "PsdoOperator":
        """Forget everything below ``tail`` (never raises the certificate)."""
        if tail is None:
            return self
        return PsdoOperator(self._coeffs, _max_tail(self.tail, tail))

    def __add__(self, other: "PsdoOperator") -> "PsdoOperator":
        tail = _max_tail(self.tail, other.tail)
        out = dict(self._coeffs)
        for a, c in other._coeffs.items():
            out[a] = out.get(a, ZERO) + c
        return PsdoOperator(out, tail)

    def __neg__(self):
        return PsdoOperator({a: -c for a, c in self._coeffs.items()}, self.tail)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PsdoOperator":
        c = Polynomial.coerce(c)
        return PsdoOperator({a: f * c for a, f in self._coeffs.items()}, self.tail)

    def map_coefficients(self, f: Callable[[Polynomial], Polynomial]) -> "PsdoOperator":
        return PsdoOperator({a: f(c) for a, c in self._coeffs.items()}, self.tail)

    def __matmul__(self, other):
        return leibniz_compose(self, other)

    def __pow__(self, n: int):
        if n < 1:
            raise ValueError("positive power required")
        out = self
        for _ in range(n - 1):
            out = leibniz_compose(out, self)
        return out

    def __repr__(self):
        return f"PsdoOperator({self.to_text()})"

    def to_text(self) -> str:
        pieces = []
        for a in self.orders():
            c = self._coeffs[a]
            op = "" if a == 0 else ("D" if a == 1 else f"D^{a}")
            if not op:
                multi = len(c) > 1 and len(self._coeffs) > 1
                body = f"({c.to_text()})" if multi else c.to_text()
            elif c == ONE:
                body = op
            elif len(c) == 1:
                body = f"{c.to_text()}*{op}"
            else:
                body = f"({c.to_text()})*{op}"
            pieces.append(body)
        text = " + ".join(pieces) if pieces else "0"
        text = text.replace("+ -", "- ")
        if self.tail is not None:
            text += f" + O(D^{self.tail - 1})"
        return text

    def to_latex(self) -> str:
        pieces = []
        for a in self.orders():
            c = self._coeffs[a]
            op = "" if a == 0 else (r"\partial_x" if a == 1 else rf"\partial_x^{{{a}}}")
            if not op:
                multi = len(c) > 1 and len(self._coeffs) > 1
                pieces.append(rf"\left({c.to_latex()}\right)" if multi else c.to_latex())
            elif c == ONE:
                pieces.append(op)
            elif len(c) == 1:
                pieces.append(f"{c.to_latex()} {op}")
            else:
                pieces.append(rf"\left({c.to_latex()}\right) {op}")
        text = " + ".join(pieces) if pieces else "0"
        if self.tail is not None:
            text += rf" + O(\partial_x^{{{self.tail - 1}}})"
        return text.replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "orders": [{"a": a, "coef": self._coeffs[a].to_json()} for a in self.orders()],
            "tail_depth": self.tail,
        }

    @classmethod
    def from_json(cls, data) -> "PsdoOperator":
        coeffs = {e["a"]: Polynomial.from_json(e["coef"]) for e in data["orders"]}
        return cls(coeffs, data["tail_depth"])


D = PsdoOperator.d(1)
IDENTITY = PsdoOperator.scalar(1)


def leibniz_compose(A: PsdoOperator, B: PsdoOperator, depth: int | None = None) -> PsdoOperator:
    """``A . B`` certified down to ``max(tail_A + ord B, tail_B + ord A, -depth)``.

    ``depth`` is an extra truncation; it is required when both operands are
    exact but the product is an infinite series (A has negative orders).
    """
    ordA, ordB = A.order(), B.order()
    if ordA is None or ordB is None:
        tail = _max_tail(A.tail, B.tail)
        return PsdoOperator({}, None if tail is None else tail + max(ordA or 0, ordB or 0))
    tail = None
    if A.tail is not None:
        tail = A.tail + ordB
    if B.tail is not None:
        tail = _max_tail(tail, B.tail + ordA)
    if depth is not None:
        tail = _max_tail(tail, -depth)
    if tail is None and min(A._coeffs) < 0 and any(
        not c.is_constant() for c in B._coeffs.values()
    ):
        raise DepthExhausted("exact operands with an infinite product: pass depth")
    out: dict = {}
    deriv_cache: dict = {}
    for a, f in A._coeffs.items():
        for b, g in B._coeffs.items():
            r = 0
            while True:
                order = a + b - r
                if tail is not None and order < tail:
                    break
                if a >= 0 and r > a:
                    break
                key = (b, r)
                if key not in deriv_cache:
                    deriv_cache[key] = g if r == 0 else dx(deriv_cache[(b, r - 1)])
                gr = deriv_cache[key]
                if not gr:
                    break
                c = gbinom(a, r)
                if c:
                    out[order] = out.get(order, ZERO) + f * gr * c
                r += 1
    return PsdoOperator(out, tail)


def commutator(A: PsdoOperator, B: PsdoOperator) -> PsdoOperator:
    return leibniz_compose(A, B) - leibniz_compose(B, A)


def split(A: PsdoOperator) -> tuple[PsdoOperator, PsdoOperator]:
    """(differential part, integral part); the plus part is exact when ``tail <= 0``."""
    if A.tail is not None and A.tail > 0:
        raise DepthExhausted(f"tail {A.tail} does not certify the differential part")
    plus = PsdoOperator({a: c for a, c in A._coeffs.items() if a >= 0})
    minus = PsdoOperator({a: c for a, c in A._coeffs.items() if a < 0}, A.tail)
    return plus, minus


def lax_operator(depth: int) -> PsdoOperator:
    """``L = d + sum_{a=1}^{depth} v^a d^{-a}`` with symbolic coefficients."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    coeffs = {1: ONE}
    coeffs.update({-a: v(a) for a in range(1, depth + 1)})
    return PsdoOperator(coeffs, -depth)


@lru_cache(maxsize=None)
def L_power(j: int, depth: int) -> PsdoOperator:
    """``L^j`` certified down to order ``-depth + j - 1``."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if j - 1 > depth:
        raise DepthExhausted(f"L^{j} at depth {depth} certifies no integral orders")
    return lax_operator(depth) ** j


@dataclass
class FlowTable:
    """``d/dt_j`` of each coefficient generator: ``tag^a -> rhs``."""

    j: int
    equations: dict
    depth: int
    tag: str = "v"

    def rhs(self, a: int) -> Polynomial:
        if a not in self.equations:
            raise MissingFlow(f"no t{self.j}-flow for {self.tag}^{a} at depth {self.depth}")
        return self.equations[a]

    def to_text(self) -> str:
        return "\n".join(
            f"{self.tag}{a}_t{self.j} = {rhs.to_text()}" for a, rhs in sorted(self.equations.items())
        )

    def to_latex(self) -> str:
        sym = (lambda a: f"v^{{{a}}}") if self.tag == "v" else (lambda a: f"w_{{{a}}}")
        lines = [
            rf"\partial_{{t_{{{self.j}}}}} {sym(a)} &= {rhs.to_latex()}"
            for a, rhs in sorted(self.equations.items())
        ]
        return "\\begin{aligned}\n" + " \\\\\n".join(lines) + "\n\\end{aligned}"

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "tag": self.tag,
            "depth": self.depth,
            "equations": [{"a": a, "rhs": r.to_json()} for a, r in sorted(self.equations.items())],
        }

    @classmethod
    def from_json(cls, data) -> "FlowTable":
        eqs = {e["a"]: Polynomial.from_json(e["rhs"]) for e in data["equations"]}
        return cls(data["j"], eqs, data["depth"], data.get("tag", "v"))


def _integral_check(op: PsdoOperator, what: str):
    for a in op.orders():
        if a >= 0:
            raise NonIntegralBracket(f"{what} has order-{a} coefficient {op.coefficient(a)}")


@lru_cache(maxsize=None)
def kp_flows(j: int, depth: int) -> FlowTable:
    """``dL/dt_j = [(L^j)_+, L]`` read off at each ``d^{-a}``, a <= depth - j."""
    plus, _ = split(L_power(j, depth))
    bracket = commutator(plus, lax_operator(depth))
    _integral_check(bracket, f"[(L^{j})_+, L]")
    eqs = {a: bracket.coefficient(-a) for a in range(1, depth - j + 1)}
    return FlowTable(j, eqs, depth)


def t_derivative(p: Polynomial, flows: FlowTable) -> Polynomial:
    """Chain rule: ``d/dt_j`` of a differential polynomial, prolonged by x-derivatives."""

    def rule(g):
        if g[0] != flows.tag:
            if g[0] in ("v", "w"):
                raise MissingFlow(f"flow table is for {flows.tag}, met {g}")
            return None
        return dx(flows.rhs(g[1]), g[2])

    return p.derivation(rule)


def verify_zero_curvature(j: int, k: int, depth: int, raise_on_failure: bool = True) -> PsdoOperator:
    """``d_{t_j}(L^k)_+ - d_{t_k}(L^j)_+ - [(L^j)_+, (L^k)_+]``; exact differential operator."""
    Pj, _ = split(L_power(j, depth))
    Pk, _ = split(L_power(k, depth))
    try:
        fj, fk = kp_flows(j, depth), kp_flows(k, depth)
        dPk = Pk.map_coefficients(lambda c: t_derivative(c, fj))
        dPj = Pj.map_coefficients(lambda c: t_derivative(c, fk))
    except MissingFlow as exc:
        raise DepthExhausted(f"depth {depth} too small for (j, k) = ({j}, {k}): {exc}") from exc
    residual = dPk - dPj - commutator(Pj, Pk)
    if raise_on_failure and not residual.is_zero():
        a = residual.order()
        raise NonzeroResidual(
            f"zero-curvature residual at order {a}", location=a, residual=residual.coefficient(a)
        )
    return residual


@dataclass
class PhiReport:
    phi: ConnectionMatrix
    curvature: ConnectionMatrix
    certified_columns: list
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def build_phi(n: int, j_max: int, depth: int, raise_on_failure: bool = True) -> PhiReport:
    """Connection of the dressed heat hierarchy: ``d p~ = p~ phi``.

    ``p~_i = d^i u~`` and ``d u~ = sum_j (L^j)_+ u~ dt_j`` give
    ``phi[l][i] = sum_j [d^l](d^i . (L^j)_+) dt_j``.  The n-by-n cut keeps
    every term of ``d phi + phi ^ phi`` in columns ``i <= n - 1 - j_max``.
    """
    if n < 1 or j_max < 1:
        raise ValueError("n and j_max must be positive")
    entries = [[GradedForm.zero(1) for _ in range(n)] for _ in range(n)]
    for j in range(1, j_max + 1):
        Pj, _ = split(L_power(j, depth))
        for i in range(n):
            op = leibniz_compose(PsdoOperator.d(i), Pj)
            for l, c in op.coeffs.items():
                if l < n:
                    entries[l][i] = entries[l][i] + GradedForm.basis(dt(j), coef=c)
    phi = ConnectionMatrix(entries)

    try:
        flows = {k: kp_flows(k, depth) for k in range(1, j_max + 1)}
    except DepthExhausted:
        raise

    def rule(g):
        if g[0] != "v":
            return None
        acc = GradedForm.zero(1)
        for k, fl in flows.items():
            try:
                acc = acc + GradedForm.basis(dt(k), coef=dx(fl.rhs(g[1]), g[2]))
            except MissingFlow as exc:
                raise DepthExhausted(str(exc)) from exc
        return acc

    dphi = phi.map(lambda f: exterior_d(f, rule, 0, 0))
    curvature = dphi + phi.wedge(phi)
    columns = list(range(max(0, n - j_max)))
    report = PhiReport(phi, curvature, columns)
    for i in columns:
        for l in range(n):
            if not curvature[l, i].is_zero():
                report.failures.append((l, i, curvature[l, i]))
    if report.failures and raise_on_failure:
        l, i, f = report.failures[0]
        raise NonzeroResidual(f"d phi + phi^phi nonzero at ({l},{i})", location=(l, i), residual=f)
    return report


# -- dressing ----------------------------------------------------------------

@lru_cache(maxsize=None)
def dress(depth: int) -> tuple[PsdoOperator, PsdoOperator, PsdoOperator]:
    """``g = 1 + sum w_a d^{-a}``, its inverse, and ``L = g . d . g^{-1}``.

    The inverse is the Neumann series ``sum_n (1 - g)^n`` cut at the depth.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    coeffs = {0: ONE}
    coeffs.update({-a: w(a) for a in range(1, depth + 1)})
    g = PsdoOperator(coeffs, -depth)
    h = g - IDENTITY
    minus_h = -h
    g_inv = IDENTITY.truncate(-depth)
    power = IDENTITY
    for _ in range(depth):
        power = leibniz_compose(power, minus_h, depth=depth)
        g_inv = g_inv + power
    L = leibniz_compose(leibniz_compose(g, D), g_inv)
    return g, g_inv, L


def v_in_terms_of_w(depth: int) -> dict:
    """``v^a`` as a differential polynomial in the w's, for the certified a."""
    _, _, L = dress(depth)
    return {a: L.coefficient(-a) for a in range(1, -L.tail + 1)}


@lru_cache(maxsize=None)
def w_flows(j: int, depth: int) -> FlowTable:
    """``d g / d t_j = -(L^j)_- g`` read off at each ``d^{-a}``."""
    g, _, L = dress(depth)
    _, minus = split(L ** j)
    G = -leibniz_compose(minus, g)
    _integral_check(G, f"-(L^{j})_- g")
    eqs = {a: G.coefficient(-a) for a in range(1, -G.tail + 1)}
    return FlowTable(j, eqs, depth, tag="w")


def verify_g_flow_consistency(j: int, depth: int, raise_on_failure: bool = True) -> PsdoOperator:
    """Residual of ``d_{t_j} L - [(L^j)_+, L]`` with the w-flows from the g equation."""
    g, _, L = dress(depth)
    flows = w_flows(j, depth)
    plus, _ = split(L ** j)
    bracket = commutator(plus, L)
    floor = max(bracket.tail, -max(flows.equations, default=0))
    dL = L.truncate(floor).map_coefficients(lambda c: t_derivative(c, flows))
    residual = (dL - bracket).truncate(floor)
    if raise_on_failure and not residual.is_zero():
        a = residual.order()
        raise NonzeroResidual(f"g-flow residual at order {a}", location=a, residual=residual.coefficient(a))
    return residual


def induced_v_flow(j: int, depth: int) -> dict:
    """``d v^a / d t_j`` computed through ``v(w)`` and the w-flows."""
    flows = w_flows(j, depth)
    v_w = v_in_terms_of_w(depth)
    top = max(flows.equations, default=0)
    return {a: t_derivative(v_w[a], flows) for a in v_w if a <= top}


def substitute_v(p: Polynomial, depth: int) -> Polynomial:
    """Replace each ``v^a_(r)`` by ``d_x^r v^a(w)``."""
    v_w = v_in_terms_of_w(depth)

    def rule(g):
        if g[0] != "v":
            return None
        if g[1] not in v_w:
            raise DepthExhausted(f"v^{g[1]} not certified at depth {depth}")
        return dx(v_w[g[1]], g[2])

    return p.substitute(rule)


def symmetry_operator(N: int) -> PsdoOperator:
    """``T = sum_{j=1}^{N} j t_j d^{j-1}``."""
    return PsdoOperator({j - 1: t(j) * j for j in range(1, N + 1)})


@dataclass
class SRelationsReport:
    S: PsdoOperator
    L_S_residual: PsdoOperator
    flow_residuals: dict

    @property
    def ok(self) -> bool:
        return self.L_S_residual.is_zero() and all(r.is_zero() for r in self.flow_residuals.values())


def verify_S_relations(i_max: int, N: int, depth: int, dressed: bool = True, raise_on_failure: bool = True) -> SRelationsReport:
    """``[L, S] = 1`` and ``[d_{t_i} - (L^i)_+, S] = 0`` for ``S = g T g^{-1}``.

    With ``dressed=False`` the dressing is trivial: ``g = 1``, ``S = T``,
    ``L = d``.
    """
    if i_max > N:
        raise DepthExhausted(f"flows beyond the time cutoff N={N} do not commute with T")
    T = symmetry_operator(N)
    if dressed:
        g, g_inv, L = dress(depth)
        S = leibniz_compose(leibniz_compose(g, T), g_inv)
    else:
        L, S = D, T
    LS = commutator(L, S) - IDENTITY
    flow_res = {}
    for i in range(1, i_max + 1):
        plus, _ = split(L ** i)
        bracket = commutator(plus, S)
        if dressed:
            flows = w_flows(i, depth)
            floor = max(bracket.tail, (N - 1) - max(flows.equations, default=0))
        else:
            flows, floor = None, None

        def rule(gen, i=i, flows=flows):
            if gen[0] == "t":
                return ONE if gen[1] == i else None
            return dx(flows.rhs(gen[1]), gen[2])

        dS = S.truncate(floor).map_coefficients(lambda c: c.derivation(rule))
        flow_res[i] = (dS - bracket).truncate(floor)
    report = SRelationsReport(S, LS, flow_res)
    if raise_on_failure and not report.ok:
        if not LS.is_zero():
            raise NonzeroResidual("[L, S] - 1 nonzero", location="[L,S]", residual=LS)
        i = next(i for i, r in flow_res.items() if not r.is_zero())
        raise NonzeroResidual(f"[d_t{i} - (L^{i})_+, S] nonzero", location=i, residual=flow_res[i])
    return report
