"""Exact coefficient rings.

Three layers live here:

* rationals, which are just :class:`fractions.Fraction`;
* :class:`Polynomial`, a sparse commutative polynomial over a countable set of
  tagged generators (``("t", k)``, ``("p", j)``, ``("v", a, r)``, ``("w", a, r)``);
* :class:`ZSeries`, a polynomial-coefficient power series in an auxiliary
  indeterminate ``z``, truncated at ``z**Z`` and carrying the order through
  which its coefficients are known exactly.

The wave function ``exp(xi)`` with ``xi = sum_k t_k z**k`` is never formed.
Everything downstream works with ``B_m = exp(-xi) (d/dz)**m exp(xi)``, built
by :func:`bell_sequence`.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Mapping

__all__ = [
    "Fraction",
    "as_fraction",
    "fraction_to_str",
    "fraction_from_str",
    "Polynomial",
    "ZSeries",
    "t",
    "p",
    "v",
    "w",
    "gen_text",
    "gen_latex",
    "xi_derivative",
    "bell_sequence",
]

# generator arity (number of integer indices) per tag
GEN_ARITY = {"t": 1, "p": 1, "v": 2, "w": 2}


def as_fraction(c):
    """Validate an exact coefficient; integral values are kept as ``int`` for speed."""
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int) and not isinstance(c, bool):
        return c
    raise TypeError(f"exact coefficient expected, got {type(c).__name__}")


def fraction_to_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def fraction_from_str(s: str) -> Fraction:
    return Fraction(s)


def _check_gen(g) -> tuple:
    if not (isinstance(g, tuple) and g and g[0] in GEN_ARITY):
        raise ValueError(f"bad generator {g!r}")
    if len(g) != 1 + GEN_ARITY[g[0]] or any(
        not isinstance(i, int) or i < 0 for i in g[1:]
    ):
        raise ValueError(f"bad generator indices {g!r}")
    return g


def gen_text(g: tuple) -> str:
    tag = g[0]
    if tag in ("t", "p"):
        return f"{tag}{g[1]}"
    a, r = g[1], g[2]
    return f"{tag}{a}" + ("_" + "x" * r if r else "")


def gen_latex(g: tuple) -> str:
    tag = g[0]
    if tag in ("t", "p"):
        return f"{tag}_{{{g[1]}}}"
    a, r = g[1], g[2]
    sub = "x" * r
    if tag == "v":
        return f"v^{{{a}}}" + (f"_{{{sub}}}" if r else "")
    return f"w_{{{a}" + (f",{sub}" if r else "") + "}"


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for g, e in b:
        d[g] = d.get(g, 0) + e
    return tuple(sorted(d.items()))


class Polynomial:
    """Sparse polynomial with exact rational coefficients.

    Terms map a monomial, a sorted tuple of ``(generator, exponent)`` pairs,
    to a nonzero :class:`Fraction`.  The zero polynomial has no terms.
    Instances are treated as immutable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = as_fraction(c)
                if c:
                    clean[mono] = clean.get(mono, 0) + c
            clean = {m: c for m, c in clean.items() if c}
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Polynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c) -> "Polynomial":
        c = as_fraction(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def gen(cls, g: tuple, exp: int = 1) -> "Polynomial":
        _check_gen(g)
        if exp == 0:
            return cls.const(1)
        return cls._raw({((g, exp),): 1})

    @classmethod
    def coerce(cls, x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        return cls.const(x)

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> list:
        """Terms in canonical order."""
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, mono: tuple = ()):
        return self._terms.get(mono, 0)

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {()}

    def generators(self) -> set:
        return {g for mono in self._terms for g, _ in mono}

    def degree(self, tag: str | None = None) -> int:
        """Total degree, optionally counting only generators with ``tag``."""
        best = -1
        for mono in self._terms:
            d = sum(e for g, e in mono if tag is None or g[0] == tag)
            best = max(best, d)
        return best

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = Polynomial.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other):
        return Polynomial.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial._raw({})
            return Polynomial._raw({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self._terms or not other._terms:
            return Polynomial._raw({})
        out: dict = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("nonnegative integer exponent required")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus ---------------------------------------------------------
    def partial(self, g: tuple) -> "Polynomial":
        """Formal partial derivative with respect to generator ``g``."""
        _check_gen(g)
        out: dict = {}
        for mono, c in self._terms.items():
            for idx, (h, e) in enumerate(mono):
                if h == g:
                    rest = mono[:idx] + (((h, e - 1),) if e > 1 else ()) + mono[idx + 1 :]
                    out[rest] = out.get(rest, 0) + c * e
                    break
        return Polynomial(out)

    def derivation(self, rule: Callable[[tuple], "Polynomial | None"]) -> "Polynomial":
        """Apply the derivation sending each generator ``g`` to ``rule(g)``.

        ``rule`` returning ``None`` or zero means ``g`` is a constant for this
        derivation.
        """
        images: dict = {}
        out: dict = {}
        for mono, c in self._terms.items():
            for idx, (g, e) in enumerate(mono):
                if g not in images:
                    img = rule(g)
                    images[g] = img._terms if img else None
                img = images[g]
                if not img:
                    continue
                rest = mono[:idx] + (((g, e - 1),) if e > 1 else ()) + mono[idx + 1 :]
                ce = c * e
                for m2, c2 in img.items():
                    m = _mono_mul(rest, m2)
                    out[m] = out.get(m, 0) + ce * c2
        return Polynomial._raw({m: c for m, c in out.items() if c})

    def substitute(self, rule: Callable[[tuple], "Polynomial | None"]) -> "Polynomial":
        """Replace generators by polynomials; ``None`` keeps a generator as is."""
        cache: dict = {}
        acc = Polynomial._raw({})
        for mono, c in self._terms.items():
            term = Polynomial.const(c)
            for g, e in mono:
                if g not in cache:
                    img = rule(g)
                    cache[g] = Polynomial.gen(g) if img is None else img
                term = term * cache[g] ** e
            acc = acc + term
        return acc

    def map_coefficients(self, f: Callable[[Fraction], Fraction]) -> "Polynomial":
        return Polynomial({m: f(c) for m, c in self._terms.items()})

    # -- printing & serialization ----------------------------------------
    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.to_text()!r})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for mono, c in self.items():
            body = "*".join(
                gen_text(g) + (f"^{e}" if e != 1 else "") for g, e in mono
            )
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not body:
                piece = str(mag)
            elif mag == 1:
                piece = body
            else:
                piece = f"{mag}*{body}"
            out.append((sign, piece))
        text = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, piece in out[1:]:
            text += sign + piece
        return text

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        text = ""
        for i, (mono, c) in enumerate(self.items()):
            body = " ".join(
                gen_latex(g) + (f"^{{{e}}}" if e != 1 else "") for g, e in mono
            )
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
                piece = f"{num} {body}"
            if c < 0:
                text += "-" + piece
            else:
                text += ("+" if i else "") + piece
        return text

    def to_json(self) -> dict:
        return {
            "terms": [
                {
                    "mono": [[g[0], *g[1:], e] for g, e in mono],
                    "coef": fraction_to_str(c),
                }
                for mono, c in self.items()
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        terms = {}
        for entry in data["terms"]:
            factors = []
            for item in entry["mono"]:
                tag = item[0]
                arity = GEN_ARITY[tag]
                g = _check_gen((tag, *item[1 : 1 + arity]))
                rest = item[1 + arity :]
                e = rest[0] if rest else 1
                factors.append((g, e))
            mono = tuple(sorted(factors))
            c = fraction_from_str(entry["coef"])
            terms[mono] = terms.get(mono, 0) + c
        return cls(terms)


def t(k: int) -> Polynomial:
    return Polynomial.gen(("t", k))


def p(j: int) -> Polynomial:
    return Polynomial.gen(("p", j))


def v(a: int, r: int = 0) -> Polynomial:
    return Polynomial.gen(("v", a, r))


def w(a: int, r: int = 0) -> Polynomial:
    return Polynomial.gen(("w", a, r))


ZERO = Polynomial()
ONE = Polynomial.const(1)


class ZSeries:
    """Power series in ``z`` with polynomial coefficients, truncated at ``z**Z``.

    ``valid`` is the highest power whose coefficient is certified exact; it
    never exceeds ``Z`` and may be negative when nothing is certified.
    """

    __slots__ = ("coeffs", "valid")

    def __init__(self, coeffs: Iterable, valid: int | None = None):
        self.coeffs = tuple(Polynomial.coerce(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("ZSeries needs at least the z^0 coefficient")
        Z = len(self.coeffs) - 1
        self.valid = Z if valid is None else min(valid, Z)

    @property
    def Z(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c, Z: int) -> "ZSeries":
        return cls([Polynomial.coerce(c)] + [ZERO] * Z)

    def __getitem__(self, s: int) -> Polynomial:
        if s < 0:
            return ZERO
        if s > self.valid:
            from .errors import WindowExceeded

            raise WindowExceeded(f"z^{s} lies beyond the certified order {self.valid}")
        return self.coeffs[s]

    def _match(self, other: "ZSeries") -> int:
        if self.Z != other.Z:
            raise ValueError("z-order bounds differ")
        return min(self.valid, other.valid)

    def __add__(self, other: "ZSeries") -> "ZSeries":
        valid = self._match(other)
        return ZSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], valid)

    def __sub__(self, other: "ZSeries") -> "ZSeries":
        valid = self._match(other)
        return ZSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], valid)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            return ZSeries([c * other for c in self.coeffs], self.valid)
        valid = self._match(other)
        Z = self.Z
        out = []
        for s in range(Z + 1):
            acc = ZERO
            for i in range(s + 1):
                a, b = self.coeffs[i], other.coeffs[s - i]
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return ZSeries(out, valid)

    def dz(self) -> "ZSeries":
        """d/dz; the top coefficient is lost, so the certified order drops by one."""
        out = [self.coeffs[s + 1] * (s + 1) for s in range(self.Z)] + [ZERO]
        return ZSeries(out, self.valid - 1)

    def truncate(self, Z: int) -> "ZSeries":
        coeffs = list(self.coeffs[: Z + 1]) + [ZERO] * max(0, Z - self.Z)
        return ZSeries(coeffs, min(self.valid, Z))

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        return self.coeffs == other.coeffs and self.valid == other.valid

    def __hash__(self):
        return hash((self.coeffs, self.valid))

    def __repr__(self):
        body = " + ".join(
            f"({c.to_text()})*z^{s}" for s, c in enumerate(self.coeffs) if c
        )
        return f"ZSeries({body or '0'}; valid<=z^{self.valid})"

    def to_json(self) -> dict:
        return {
            "Z": self.Z,
            "valid": self.valid,
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ZSeries":
        coeffs = [Polynomial.from_json(c) for c in data["coeffs"]]
        if len(coeffs) != data["Z"] + 1:
            raise ValueError("coefficient count does not match Z")
        return cls(coeffs, data["valid"])


def xi_derivative(N: int, r: int, Z: int) -> ZSeries:
    """r-th z-derivative of ``xi = sum_{k<=N} t_k z**k``, truncated at ``z**Z``.

    The coefficient of ``z**s`` is ``(s+r)!/s! * t_{s+r}``.  Coefficients are
    certified through ``z**(N-r)``: beyond that they would involve times not
    present in the window.
    """
    if r < 1:
        raise ValueError("xi is only used through derivatives of order >= 1")
    if N < 0 or Z < 0:
        raise ValueError("N and Z must be nonnegative")
    coeffs = []
    for s in range(Z + 1):
        k = s + r
        coeffs.append(t(k) * (factorial(k) // factorial(s)) if k <= N else ZERO)
    return ZSeries(coeffs, min(Z, N - r))


def bell_sequence(N: int, M: int, Z: int) -> list[ZSeries]:
    """``B_0 .. B_M`` with ``B_m = exp(-xi) (d/dz)**m exp(xi)``.

    Uses ``B_0 = 1`` and ``B_{m+1} = B_m' + xi' B_m``.  The work is done at
    order ``Z + M`` so the derivative losses never reach ``z**Z``; the
    certified order of ``B_m`` is ``min(Z, N - m)``.
    """
    if min(N, M, Z) < 0:
        raise ValueError("N, M, Z must be nonnegative")
    work = Z + M
    if N >= 1:
        # xi' is a polynomial in z for finite N, so drop its certificate here
        xi1 = ZSeries(xi_derivative(N, 1, work).coeffs)
    else:
        xi1 = ZSeries.constant(0, work)
    B = ZSeries.constant(1, work)
    out = [ZSeries(B.coeffs[: Z + 1])]
    for m in range(1, M + 1):
        B = B.dz() + xi1 * B
        out.append(ZSeries(B.coeffs[: Z + 1], min(Z, N - m)))
    return out
