"""Graded forms over the eta coframe, the connection matrices, and the wave extension.

Basis 1-forms are tagged tuples: ``("eta", m, j)`` for the coframe dual to
``V_{m,j}`` and ``("dt", k)`` for coordinate differentials.  A
:class:`GradedForm` of degree ``d`` maps strictly increasing ``d``-tuples of
basis symbols to polynomial coefficients; antisymmetry is normalized at
construction.

Structure equation, with ``[V_a, V_b] = f^c_{ab} V_c``::

    d eta^c = - sum_{a < b} f^c_{ab} eta^a ^ eta^b

In the full algebra that sum is infinite.  :func:`d_eta` keeps the pairs
whose factors both lie inside a window ``m <= M, j <= J``; a component of a
derived form is *certified* only when every contribution to it is retained.
The certification rules live next to the checks that use them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .errors import MissingDifferentialRule, NonzeroResidual, WindowExceeded
from .rings import ONE, ZERO, Polynomial, bell_sequence
from .window import TruncationWindow
from . import weyl


def eta(m: int, j: int) -> tuple:
    return ("eta", m, j)


def dt(k: int) -> tuple:
    return ("dt", k)


def _basis_text(s: tuple) -> str:
    if s[0] == "eta":
        return f"eta({s[1]},{s[2]})"
    return f"dt{s[1]}"


def _basis_latex(s: tuple) -> str:
    if s[0] == "eta":
        return rf"\eta^{{{s[1]},{s[2]}}}"
    return rf"dt_{{{s[1]}}}"


def _normalize(key: Iterable[tuple]) -> tuple[int, tuple] | None:
    """Sort a wedge key; return (sign, sorted key) or None if a factor repeats."""
    key = list(key)
    if len(set(key)) != len(key):
        return None
    sign = 1
    # insertion sort keeps track of the permutation parity
    for i in range(1, len(key)):
        j = i
        while j > 0 and key[j - 1] > key[j]:
            key[j - 1], key[j] = key[j], key[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(key)


class GradedForm:
    """Homogeneous differential form with polynomial coefficients."""

    __slots__ = ("degree", "_terms", "window")

    def __init__(
        self,
        degree: int,
        terms: Mapping[tuple, object] | None = None,
        window: TruncationWindow | None = None,
    ):
        self.degree = degree
        self.window = window
        clean: dict = {}
        for key, c in (terms or {}).items():
            if len(key) != degree:
                raise ValueError(f"key {key} does not have degree {degree}")
            norm = _normalize(key)
            if norm is None:
                continue
            sign, key = norm
            c = Polynomial.coerce(c)
            if c:
                clean[key] = clean.get(key, ZERO) + c * sign
        self._terms = {k: c for k, c in clean.items() if c}

    @classmethod
    def basis(cls, *symbols: tuple, coef=1) -> "GradedForm":
        return cls(len(symbols), {tuple(symbols): coef})

    @classmethod
    def zero(cls, degree: int, window=None) -> "GradedForm":
        return cls(degree, {}, window)

    @classmethod
    def _raw(cls, degree, terms, window=None) -> "GradedForm":
        obj = cls.__new__(cls)
        obj.degree = degree
        obj.window = window
        obj._terms = terms
        return obj

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> list:
        return sorted(self._terms.items())

    def coefficient(self, *key: tuple) -> Polynomial:
        norm = _normalize(key)
        if norm is None:
            return ZERO
        sign, key = norm
        return self._terms.get(key, ZERO) * sign

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, GradedForm):
            return NotImplemented
        if not self._terms and not other._terms:
            return True
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self):
        return hash((self.degree, frozenset(self._terms.items())))

    def _check(self, other):
        if self._terms and other._terms and self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")

    def __add__(self, other: "GradedForm") -> "GradedForm":
        self._check(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return GradedForm._raw(self.degree, out, self.window or other.window)

    def __neg__(self):
        return GradedForm._raw(self.degree, {k: -c for k, c in self._terms.items()}, self.window)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GradedForm":
        c = Polynomial.coerce(c)
        if not c:
            return GradedForm.zero(self.degree, self.window)
        return GradedForm(self.degree, {k: v * c for k, v in self._terms.items()}, self.window)

    __mul__ = scale
    __rmul__ = scale

    def wedge(self, other: "GradedForm") -> "GradedForm":
        out: dict = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                norm = _normalize(ka + kb)
                if norm is None:
                    continue
                sign, key = norm
                out[key] = out.get(key, ZERO) + ca * cb * sign
        return GradedForm(self.degree + other.degree, out, self.window or other.window)

    __xor__ = wedge

    def restrict(self, keep: Callable[[tuple], bool]) -> "GradedForm":
        """Keep only terms whose every basis factor satisfies ``keep``."""
        return GradedForm._raw(
            self.degree,
            {k: c for k, c in self._terms.items() if all(keep(s) for s in k)},
            self.window,
        )

    def pullback(self, rule: Callable[[tuple], "GradedForm | None"]) -> "GradedForm":
        """Substitute each basis 1-form by ``rule(symbol)`` (None keeps it)."""
        acc = GradedForm.zero(self.degree, self.window)
        for key, c in self._terms.items():
            term = GradedForm(0, {(): c})
            for s in key:
                img = rule(s)
                term = term.wedge(GradedForm.basis(s) if img is None else img)
            acc = acc + term
        return acc

    def map_coefficients(self, f: Callable[[Polynomial], Polynomial]) -> "GradedForm":
        return GradedForm(self.degree, {k: f(c) for k, c in self._terms.items()}, self.window)

    def __repr__(self):
        return f"GradedForm[{self.degree}]({self.to_text()})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for key, c in self.items():
            basis = "^".join(_basis_text(s) for s in key)
            if c.is_constant():
                k = c.coefficient()
                mag, neg = abs(k), k < 0
                body = basis if mag == 1 else f"{mag}*{basis}"
            elif len(c) == 1:
                ((mono, k),) = c.items()
                neg = k < 0
                body = f"{(-c if neg else c).to_text()}*{basis}"
            else:
                neg = False
                body = f"({c.to_text()})*{basis}"
            if not key:
                body = (-c if neg else c).to_text()
            pieces.append((neg, body))
        out = ("-" if pieces[0][0] else "") + pieces[0][1]
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for key, c in self.items():
            basis = r" \wedge ".join(_basis_latex(s) for s in key)
            if c == ONE:
                out.append(basis)
            elif len(c) == 1:
                out.append(f"{c.to_latex()} {basis}")
            else:
                out.append(rf"\left({c.to_latex()}\right) {basis}")
        return " + ".join(out).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [
                {"basis": [list(s) for s in key], "coef": c.to_json()}
                for key, c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "GradedForm":
        terms = {}
        for e in data["terms"]:
            key = tuple(tuple(s) for s in e["basis"])
            terms[key] = Polynomial.from_json(e["coef"])
        return cls(data["degree"], terms)


# -- structure equation ----------------------------------------------------

def _window_basis(M: int, J: int) -> list[tuple[int, int]]:
    return [(m, j) for m in range(M + 1) for j in range(J + 1)]


@lru_cache(maxsize=None)
def _d_eta_table(M: int, J: int) -> dict:
    """dη^c for every c reachable from pairs inside the (M, J) box."""
    table: dict = {}
    basis = _window_basis(M, J)
    for ia, a in enumerate(basis):
        for b in basis[ia + 1 :]:
            for c, f in weyl.s_bracket(a, b).items():
                table.setdefault(c, {})[(eta(*a), eta(*b))] = -Polynomial.const(f)
    return {c: GradedForm(2, terms) for c, terms in table.items()}


def d_eta(q: int, i: int, M: int, J: int) -> GradedForm:
    """Coboundary of ``eta^{q,i}``, keeping wedge pairs inside ``m <= M, j <= J``.

    Exact on every wedge key whose factors lie in that box; pairs with a factor
    outside are dropped by construction.
    """
    if min(q, i, M, J) < 0:
        raise ValueError("indices must be nonnegative")
    form = _d_eta_table(M, J).get((q, i))
    window = TruncationWindow(M=M, K=J)
    if form is None:
        return GradedForm.zero(2, window)
    return GradedForm._raw(2, form._terms, window)


def exterior_d(
    f: GradedForm,
    rule: Callable[[tuple], GradedForm] | Mapping[tuple, GradedForm],
    M: int,
    J: int,
) -> GradedForm:
    """Exterior derivative of ``f``.

    Coefficient differentials use ``rule``: generator -> 1-form.  Basis
    differentials use :func:`d_eta` with the ``(M, J)`` box for ``eta`` and
    zero for coordinate ``dt``.
    """
    if isinstance(rule, Mapping):
        table = rule

        def rule(g):
            if g not in table:
                raise MissingDifferentialRule(f"no differential for generator {g}")
            return table[g]

    def d_basis(s: tuple) -> GradedForm:
        if s[0] == "eta":
            return d_eta(s[1], s[2], M, J)
        return GradedForm.zero(2)

    acc = GradedForm.zero(f.degree + 1, f.window)
    for key, c in f._terms.items():
        base = GradedForm._raw(f.degree, {key: ONE})
        for g in sorted(c.generators()):
            dg = rule(g)
            if dg is None:
                raise MissingDifferentialRule(f"no differential for generator {g}")
            acc = acc + dg.scale(c.partial(g)).wedge(base)
        # d(s_1 ^ ... ^ s_d) = sum_i (-1)^i s_1 ^ .. ^ d s_i ^ .. ^ s_d
        for i, s in enumerate(key):
            ds = d_basis(s)
            if not ds:
                continue
            left = GradedForm._raw(i, {key[:i]: ONE})
            right = GradedForm._raw(f.degree - i - 1, {key[i + 1 :]: ONE})
            piece = left.wedge(ds).wedge(right).scale(c)
            acc = acc + (piece if i % 2 == 0 else -piece)
    acc.window = f.window
    return acc


# -- connection matrices -----------------------------------------------------

@dataclass
class ConnectionMatrix:
    """n-by-n matrix of forms; ``entries[i][k]`` is row i, column k."""

    entries: list

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def toeplitz(cls, bands: list) -> "ConnectionMatrix":
        """Lower-triangular Toeplitz matrix with ``entries[i][k] = bands[i-k]``."""
        n = len(bands)
        zero = GradedForm.zero(1)
        return cls([[bands[i - k] if i >= k else zero for k in range(n)] for i in range(n)])

    def __getitem__(self, ik):
        i, k = ik
        return self.entries[i][k]

    def wedge(self, other: "ConnectionMatrix") -> "ConnectionMatrix":
        n = self.n
        out = []
        for i in range(n):
            row = []
            for k in range(n):
                acc = None
                for l in range(n):
                    term = self.entries[i][l].wedge(other.entries[l][k])
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return ConnectionMatrix(out)

    def map(self, f: Callable[[GradedForm], GradedForm]) -> "ConnectionMatrix":
        return ConnectionMatrix([[f(e) for e in row] for row in self.entries])

    def __add__(self, other):
        return ConnectionMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __eq__(self, other):
        if not isinstance(other, ConnectionMatrix):
            return NotImplemented
        return self.n == other.n and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def is_lower_triangular(self) -> bool:
        return all(self.entries[i][k].is_zero() for i in range(self.n) for k in range(i + 1, self.n))

    def is_toeplitz(self) -> bool:
        n = self.n
        return all(
            self.entries[i][k] == self.entries[i - k][0] for i in range(n) for k in range(i + 1)
        )

    def row_times(self, row: list) -> list:
        """Row vector times matrix: ``(row . A)_k = sum_i row[i] A[i][k]``."""
        return [
            _sum_forms([self.entries[i][k].scale(row[i]) for i in range(self.n)], 1)
            for k in range(self.n)
        ]

    def to_text(self) -> str:
        lines = []
        for i, row in enumerate(self.entries):
            for k, e in enumerate(row):
                if not e.is_zero():
                    lines.append(f"[{i},{k}] {e.to_text()}")
        return "\n".join(lines) if lines else "0"

    def to_latex(self) -> str:
        rows = [" & ".join(e.to_latex() for e in row) for row in self.entries]
        return "\\begin{pmatrix}\n" + " \\\\\n".join(rows) + "\n\\end{pmatrix}"

    def to_json(self) -> dict:
        return {"n": self.n, "entries": [[e.to_json() for e in row] for row in self.entries]}

    @classmethod
    def from_json(cls, data) -> "ConnectionMatrix":
        return cls([[GradedForm.from_json(e) for e in row] for row in data["entries"]])


def _sum_forms(forms: Iterable[GradedForm], degree: int) -> GradedForm:
    acc = GradedForm.zero(degree)
    for f in forms:
        acc = acc + f
    return acc


def build_omega(n: int) -> ConnectionMatrix:
    """Heat-hierarchy connection: band r holds ``dt_r`` (band 0 is zero)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    bands = [GradedForm.zero(1)] + [GradedForm.basis(dt(r)) for r in range(1, n)]
    return ConnectionMatrix.toeplitz(bands)


def d_matrix_coordinate(A: ConnectionMatrix) -> ConnectionMatrix:
    """d of a matrix of forms in the coordinate coframe with t-polynomial coefficients."""
    rule = lambda g: GradedForm.basis(dt(g[1])) if g[0] == "t" else None
    return A.map(lambda f: exterior_d(f, rule, 0, 0))


def heat_differential(k: int, n: int) -> GradedForm:
    """``d p_k = sum_j p_{k+j} dt_j`` truncated to jets below n."""
    from .rings import p

    return _sum_forms((GradedForm.basis(dt(j), coef=p(k + j)) for j in range(1, n - k)), 1)


# -- wave extension --------------------------------------------------------

@dataclass
class ExtensionTable:
    """``dt_k = sum_{m<=M, j<=k} T^k_{m,j} eta^{m,j}`` for k = 0..K."""

    dt: list
    window: TruncationWindow

    def coefficient(self, k: int, m: int, j: int) -> Polynomial:
        if k > self.window.K or m > self.window.M:
            raise WindowExceeded(f"T^{k}_({m},{j}) lies outside the table")
        return self.dt[k].coefficient(eta(m, j))

    def to_text(self) -> str:
        return "\n".join(f"dt{k} = {f.to_text()}" for k, f in enumerate(self.dt))

    def to_latex(self) -> str:
        lines = [rf"dt_{{{k}}} &= {f.to_latex()}" for k, f in enumerate(self.dt)]
        return "\\begin{aligned}\n" + " \\\\\n".join(lines) + "\n\\end{aligned}"

    def to_json(self) -> dict:
        return {
            "window": self.window.to_json(),
            "dt": [
                {
                    "k": k,
                    "terms": [
                        {"eta": [key[0][1], key[0][2]], "coef": c.to_json()}
                        for key, c in f.items()
                    ],
                }
                for k, f in enumerate(self.dt)
            ],
        }

    @classmethod
    def from_json(cls, data) -> "ExtensionTable":
        window = TruncationWindow.from_json(data["window"])
        dts = []
        for entry in sorted(data["dt"], key=lambda e: e["k"]):
            terms = {
                (eta(*e["eta"]),): Polynomial.from_json(e["coef"]) for e in entry["terms"]
            }
            dts.append(GradedForm(1, terms, window))
        return cls(dts, window)

    def __eq__(self, other):
        if not isinstance(other, ExtensionTable):
            return NotImplemented
        return self.window == other.window and self.dt == other.dt


def solve_wave_extension(window: TruncationWindow) -> ExtensionTable:
    """Solve ``w sum_k dt_k z^k = sum_{m,j} z^j (d/dz)^m(w) eta^{m,j}`` for the dt_k.

    After cancelling w, ``T^k_{m,j}`` is the ``z^(k-j)`` coefficient of ``B_m``.
    Needs ``N >= K + M`` so every coefficient is independent of the time cutoff.
    """
    M, K, N = window.M, window.K, window.N
    if N < K + M:
        raise WindowExceeded(f"need N >= K + M = {K + M}, got N = {N}")
    B = bell_sequence(N, M, K)
    dts = []
    for k in range(K + 1):
        terms = {}
        for m in range(M + 1):
            for j in range(k + 1):
                c = B[m][k - j]
                if c:
                    terms[(eta(m, j),)] = c
        dts.append(GradedForm(1, terms, window))
    return ExtensionTable(dts, window)


def resubstitute(ext: ExtensionTable) -> dict:
    """Residual of the z-power matching system after plugging the table back in.

    For each ``(k, m, j)``: ``[z^k](z^j B_m) - T^k_{m,j}``.  All zero iff the
    table solves the system; the solution is unique because each power of z
    carries exactly one ``dt_k``.
    """
    M, K, N = ext.window.M, ext.window.K, ext.window.N
    B = bell_sequence(N, M, K)
    out = {}
    for k in range(K + 1):
        for m in range(M + 1):
            for j in range(K + 1):
                lhs = B[m][k - j] if j <= k else ZERO
                out[(k, m, j)] = lhs - ext.coefficient(k, m, j)
    return out


def build_hat_omega(ext: ExtensionTable, n: int) -> ConnectionMatrix:
    """Extended connection: band r is ``dt_r`` from the extension table."""
    if n - 1 > ext.window.K:
        raise WindowExceeded(f"table covers k <= {ext.window.K}, need {n - 1}")
    return ConnectionMatrix.toeplitz([ext.dt[r] for r in range(n)])


@dataclass
class FlatnessReport:
    checked: list = field(default_factory=list)  # (k, wedge key)
    failures: list = field(default_factory=list)  # (k, wedge key, coefficient)
    uncertified_nonzero: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _certified_pair(key: tuple, M: int) -> bool:
    (a, b) = key
    return a[0] == "eta" and b[0] == "eta" and a[1] + b[1] <= M


def verify_flatness(ext: ExtensionTable, raise_on_failure: bool = True) -> FlatnessReport:
    """Check ``d(dt_k) = 0`` for every k in the table.

    The rule ``dt_l -> sum T^l_{m,j} eta^{m,j}`` is taken from a companion
    table extended to ``l <= K + M`` (the highest time index any ``T^k_{m,j}``
    with k <= K, m <= M can contain).  A wedge key ``eta^a ^ eta^b`` is
    certified when ``m_a + m_b <= M`` and both j's are at most ``K + M``: then
    every structure constant and every table entry feeding it is retained.
    """
    M, K = ext.window.M, ext.window.K
    J = K + M
    rule_window = ext.window.widened(K=J, N=max(ext.window.N, J + M))
    rule_table = solve_wave_extension(rule_window)
    for k in range(K + 1):
        if rule_table.dt[k] != ext.dt[k]:
            raise ValueError(f"table entry dt{k} does not solve the wave extension")

    def rule(g):
        if g[0] != "t":
            return None
        if g[1] > J:
            raise MissingDifferentialRule(f"dt{g[1]} beyond rule table")
        return rule_table.dt[g[1]]

    report = FlatnessReport()
    basis = [eta(m, j) for m in range(M + 1) for j in range(J + 1)]
    keys = [(a, b) for i, a in enumerate(basis) for b in basis[i + 1 :] if _certified_pair((a, b), M)]
    for k in range(K + 1):
        ddt = exterior_d(ext.dt[k], rule, M, J)
        for key in keys:
            c = ddt.coefficient(*key)
            report.checked.append((k, key))
            if c:
                report.failures.append((k, key, c))
        report.uncertified_nonzero += sum(
            1 for key, c in ddt.items() if not _certified_pair(key, M)
        )
    if report.failures and raise_on_failure:
        k, key, c = report.failures[0]
        raise NonzeroResidual(f"d(dt{k}) has component {c} on {key}", location=(k, key), residual=c)
    return report


def d_squared_eta(q: int, i: int, M: int, J: int) -> tuple[GradedForm, list]:
    """``d(d eta^{q,i})`` as a 3-form, with the list of certified 3-keys.

    A key ``(a, b, c)`` is certified when its m's sum to at most M and its
    j's to at most J: every intermediate bracket then stays in the box.
    """
    dd = exterior_d(d_eta(q, i, M, J), lambda g: None, M, J)
    basis = [eta(m, j) for m in range(M + 1) for j in range(J + 1)]
    certified = [
        (a, b, c)
        for x, a in enumerate(basis)
        for y, b in enumerate(basis[x + 1 :], x + 1)
        for c in basis[y + 1 :]
        if a[1] + b[1] + c[1] <= M and a[2] + b[2] + c[2] <= J
    ]
    return dd, certified


# -- constraint and reduction ----------------------------------------------

def is_constrained(s: tuple) -> bool:
    """Members of the constraint set: eta^{m,j} with m >= 1, and eta^{0,0}."""
    return s[0] == "eta" and (s[1] >= 1 or s[2] == 0)


def apply_constraint(f: GradedForm) -> GradedForm:
    return f.restrict(lambda s: not is_constrained(s))


def reduce_to_heat(A: ConnectionMatrix) -> ConnectionMatrix:
    """Apply the constraint entrywise and rename the surviving ``eta^{0,k}`` to ``dt_k``."""
    rename = lambda s: GradedForm.basis(dt(s[2])) if s[0] == "eta" else None
    return A.map(lambda f: apply_constraint(f).pullback(rename))


@dataclass
class ConstraintReport:
    constraints: dict  # z-power -> 1-form that must vanish

    def solved(self) -> dict:
        """Constraints of the form ``c * dt_j = 0`` read as ``dt_j = 0``."""
        out = {}
        for power, form in sorted(self.constraints.items()):
            if len(form.terms) == 1:
                ((key, c),) = form.items()
                if c.is_constant():
                    out[_basis_text(key[0])] = 0
                    continue
            out[f"[z^{power}]"] = form
        return out

    def to_text(self) -> str:
        return "\n".join(f"{k} = 0" for k in self.solved())


def example_0wave(n: int) -> ConstraintReport:
    """Put the two-time wave ``exp(t_1 z + t_2 z^2)`` into the first heat equation.

    ``du - p_1 dt_1 - p_2 dt_2 - sum_{j=3}^{n} p_j dt_j`` divided by w has, at
    each power of z, a 1-form that must vanish.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    times = (1, 2)
    residual: dict = {}
    for k in times:  # du / w
        residual[k] = residual.get(k, GradedForm.zero(1)) + GradedForm.basis(dt(k))
    for j in range(1, n + 1):  # p_j / w = z^j
        residual[j] = residual.get(j, GradedForm.zero(1)) - GradedForm.basis(dt(j))
    return ConstraintReport({j: f for j, f in residual.items() if f})
