"""The Weyl algebra A_1 in normal-ordered form, and the symmetry algebra s.

A :class:`WeylElement` is a finite sum of ``z**j (d/dz)**m`` with rational
coefficients, keyed by ``(m, j)``.  Products never clip indices.

The symmetry algebra s has basis ``V_{m,j} = T**m . d_x**j``.  It is mapped to
A_1 by the anti-isomorphism ``V_{m,j} -> z**j (d/dz)**m``, so an s-bracket is
minus the Weyl commutator of the images.  That sign is applied in exactly one
place, :func:`s_bracket`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping

from .rings import as_fraction


def c_coefficient(m: int, k: int, r: int) -> int:
    """``r! C(m,r) C(k,r)``: coefficient of ``z**(k-r) D**(m-r)`` in ``D**m . z**k``."""
    if min(m, k, r) < 0:
        raise ValueError("indices must be nonnegative")
    if r > m or r > k:
        return 0
    return factorial(r) * comb(m, r) * comb(k, r)


class WeylElement:
    """Normal-ordered element ``sum c[m,j] z**j (d/dz)**m``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean = {}
        for (m, j), c in (terms or {}).items():
            if m < 0 or j < 0:
                raise ValueError(f"negative index in {(m, j)}")
            c = as_fraction(c)
            if c:
                clean[(m, j)] = clean.get((m, j), 0) + c
        self._terms = {k: c for k, c in clean.items() if c}

    @classmethod
    def basis(cls, m: int, j: int, c=1) -> "WeylElement":
        return cls({(m, j): c})

    @classmethod
    def scalar(cls, c) -> "WeylElement":
        return cls({(0, 0): c})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> list:
        return sorted(self._terms.items())

    def coefficient(self, m: int, j: int) -> Fraction:
        return self._terms.get((m, j), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeylElement.scalar(other)
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeylElement.scalar(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return WeylElement(out)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeylElement.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return WeylElement({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, WeylElement):
            return NotImplemented
        return normal_order_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        out = WeylElement.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"WeylElement({self.to_text()!r})"

    # printing runs from the highest (m, j) down so ``zD + 1`` reads as usual
    def _print_order(self):
        return sorted(self._terms.items(), reverse=True)

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        out = ""
        for i, ((m, j), c) in enumerate(self._print_order()):
            factors = []
            if j:
                factors.append("z" + (f"^{j}" if j > 1 else ""))
            if m:
                factors.append("D" + (f"^{m}" if m > 1 else ""))
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                piece = str(mag)
            elif mag == 1:
                piece = body
            else:
                piece = f"{mag}*{body}"
            out += ("-" if c < 0 else ("+" if i else "")) + piece
        return out

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        out = ""
        for i, ((m, j), c) in enumerate(self._print_order()):
            body = ""
            if j:
                body += "z" + (f"^{{{j}}}" if j > 1 else "")
            if m == 1:
                body += r"\frac{d}{dz}"
            elif m > 1:
                body += rf"\left(\frac{{d}}{{dz}}\right)^{{{m}}}"
            mag = abs(c)
            if mag.denominator != 1:
                num = rf"\frac{{{mag.numerator}}}{{{mag.denominator}}}"
            else:
                num = str(mag.numerator)
            if not body:
                piece = num
            elif mag == 1:
                piece = body
            else:
                piece = num + body
            out += ("-" if c < 0 else ("+" if i else "")) + piece
        return out

    def to_json(self) -> dict:
        return {
            "terms": [
                {"m": m, "j": j, "coef": f"{c.numerator}/{c.denominator}"}
                for (m, j), c in self.items()
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "WeylElement":
        terms: dict = {}
        for e in data["terms"]:
            key = (int(e["m"]), int(e["j"]))
            terms[key] = terms.get(key, 0) + Fraction(e["coef"])
        return cls(terms)


D = WeylElement.basis(1, 0)
Z = WeylElement.basis(0, 1)


@lru_cache(maxsize=None)
def _basis_product(m: int, j: int, n: int, k: int) -> tuple:
    # (z^j D^m)(z^k D^n) = sum_r c^{m,k}_r z^{j+k-r} D^{m+n-r}
    return tuple(
        ((m + n - r, j + k - r), c_coefficient(m, k, r)) for r in range(min(m, k) + 1)
    )


def normal_order_product(A: WeylElement, B: WeylElement) -> WeylElement:
    out: dict = {}
    for (m, j), a in A._terms.items():
        for (n, k), b in B._terms.items():
            for key, c in _basis_product(m, j, n, k):
                out[key] = out.get(key, 0) + a * b * c
    return WeylElement(out)


def weyl_commutator(A: WeylElement, B: WeylElement) -> WeylElement:
    return normal_order_product(A, B) - normal_order_product(B, A)


def image(m: int, j: int) -> WeylElement:
    """Image of ``V_{m,j}`` under the anti-isomorphism s -> A_1."""
    return WeylElement.basis(m, j)


@lru_cache(maxsize=None)
def s_bracket(a: tuple[int, int], b: tuple[int, int]) -> WeylElement:
    """``[V_a, V_b]`` in s, written in the V basis (key ``(m, j)`` means ``V_{m,j}``).

    ``[V_{m,j}, V_{n,k}] = -sum_r (c^{m,k}_r - c^{n,j}_r) V_{m+n-r, j+k-r}``.
    """
    (m, j), (n, k) = a, b
    out = {}
    for r in range(max(min(m, k), min(n, j)) + 1):
        c = c_coefficient(m, k, r) - c_coefficient(n, j, r)
        if c:
            out[(m + n - r, j + k - r)] = -c
    return WeylElement(out)


def s_bracket_elements(X: WeylElement, Y: WeylElement) -> WeylElement:
    """Bilinear extension of :func:`s_bracket` to elements written in the V basis."""
    out: dict = {}
    for a, x in X._terms.items():
        for b, y in Y._terms.items():
            for key, c in s_bracket(a, b)._terms.items():
                out[key] = out.get(key, 0) + x * y * c
    return WeylElement(out)


def structure_constant(c: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> Fraction:
    """``f^c_{ab}`` with ``[V_a, V_b] = sum_c f^c_{ab} V_c``."""
    return s_bracket(a, b).coefficient(*c)


def basis_within(bound: int) -> list[tuple[int, int]]:
    """All ``(m, j)`` with ``m + j <= bound`` in ascending order."""
    return sorted((m, s - m) for s in range(bound + 1) for m in range(s + 1))


class StructureTable:
    """Brackets ``[V_a, V_b]`` for all basis pairs with index sums ``<= bound``."""

    def __init__(self, bound: int, entries: Mapping[tuple, WeylElement]):
        self.bound = bound
        self.entries = dict(entries)

    def __getitem__(self, key):
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, StructureTable):
            return NotImplemented
        return self.bound == other.bound and self.entries == other.entries

    def keys(self):
        return sorted(self.entries)

    def to_text(self) -> str:
        return "\n".join(
            f"[V({a[0]},{a[1]}),V({b[0]},{b[1]})] = {v_text(self.entries[(a, b)])}"
            for a, b in self.keys()
        )

    def to_latex(self) -> str:
        lines = [
            rf"[V_{{{a[0]},{a[1]}}}, V_{{{b[0]},{b[1]}}}] &= {v_latex(self.entries[(a, b)])}"
            for a, b in self.keys()
        ]
        return "\\begin{aligned}\n" + " \\\\\n".join(lines) + "\n\\end{aligned}"

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "entries": [
                {"a": list(a), "b": list(b), "bracket": self.entries[(a, b)].to_json()}
                for a, b in self.keys()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StructureTable":
        entries = {
            (tuple(e["a"]), tuple(e["b"])): WeylElement.from_json(e["bracket"])
            for e in data["entries"]
        }
        return cls(data["bound"], entries)


def _v_join(X: WeylElement, name) -> str:
    if X.is_zero():
        return "0"
    out = ""
    for i, ((m, j), c) in enumerate(X.items()):
        mag = abs(c)
        piece = name(m, j) if mag == 1 else f"{mag}*{name(m, j)}"
        out += ("-" if c < 0 else ("+" if i else "")) + piece
    return out


def v_text(X: WeylElement) -> str:
    """Write an s-element in the V basis, e.g. ``V(0,0)-2*V(1,1)``."""
    return _v_join(X, lambda m, j: f"V({m},{j})")


def v_latex(X: WeylElement) -> str:
    return _v_join(X, lambda m, j: f"V_{{{m},{j}}}").replace("*", "")


def structure_table(bound: int) -> StructureTable:
    if bound < 1:
        raise ValueError("bound must be >= 1")
    basis = basis_within(bound)
    entries = {(a, b): s_bracket(a, b) for a in basis for b in basis}
    return StructureTable(bound, entries)


def act_on_monomial(A: WeylElement, s: int) -> dict[int, Fraction]:
    """Apply ``A`` to ``z**s``; returns ``{power: coefficient}``."""
    out: dict = {}
    for (m, j), c in A._terms.items():
        if m > s:
            continue
        power = s - m + j
        out[power] = out.get(power, 0) + c * (factorial(s) // factorial(s - m))
    return {k: c for k, c in out.items() if c}


def jacobi(A: WeylElement, B: WeylElement, C: WeylElement, bracket=None) -> WeylElement:
    """Jacobiator; ``bracket`` defaults to the Weyl commutator."""
    br = bracket or weyl_commutator
    return br(br(A, B), C) + br(br(B, C), A) + br(br(C, A), B)


def sum_elements(items: Iterable[WeylElement]) -> WeylElement:
    out = WeylElement()
    for x in items:
        out = out + x
    return out
