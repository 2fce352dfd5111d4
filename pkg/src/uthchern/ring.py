"""Exact multivariate polynomials over a coordinate chart, and polynomial vector fields.

Smooth functions on a chart are modelled by ``Q[x1, ..., xn]``. Every
coefficient is a :class:`fractions.Fraction`, so all identities are decided by
exact equality of canonical forms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "CYLINDER_VAR",
    "Chart",
    "ChartMismatch",
    "Poly",
    "PolyParseError",
    "VField",
    "derive",
    "monomials",
    "parse_poly",
    "vf_apply",
    "vf_bracket",
]

CYLINDER_VAR = "t"

Scalar = Union[int, Fraction]


class ChartMismatch(ValueError):
    """Operands live on different charts."""


class PolyParseError(ValueError):
    def __init__(self, text: str, pos: int, message: str):
        self.text = text
        self.pos = pos
        self.message = message
        super().__init__(f"{message} at position {pos} in {text!r}")


@dataclass(frozen=True)
class Chart:
    """An ordered list of coordinate names.

    The name ``t`` is reserved for the interval coordinate of a cylinder chart
    and may only occur as the last coordinate of a chart built by
    :meth:`cylinder`.
    """

    vars: tuple[str, ...]
    is_cylinder: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate coordinate names in {self.vars}")
        for v in self.vars:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v):
                raise ValueError(f"invalid coordinate name {v!r}")
        if self.is_cylinder:
            if not self.vars or self.vars[-1] != CYLINDER_VAR or CYLINDER_VAR in self.vars[:-1]:
                raise ValueError("a cylinder chart ends with the coordinate 't'")
        elif CYLINDER_VAR in self.vars:
            raise ValueError("'t' is reserved for the cylinder coordinate")

    @property
    def dim(self) -> int:
        return len(self.vars)

    def cylinder(self) -> "Chart":
        if self.is_cylinder:
            raise ValueError("chart is already a cylinder")
        return Chart(self.vars + (CYLINDER_VAR,), is_cylinder=True)

    def base(self) -> "Chart":
        if not self.is_cylinder:
            return self
        return Chart(self.vars[:-1])

    @property
    def t_index(self) -> int:
        if not self.is_cylinder:
            raise ValueError("chart has no cylinder coordinate")
        return self.dim - 1

    def __str__(self):
        return f"Chart({', '.join(self.vars)})"


def _exp_order(e: tuple[int, ...]):
    # graded, then lexicographic with x1 heaviest; used descending
    return (sum(e), e)


class Poly:
    """Sparse polynomial with rational coefficients. Immutable."""

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[tuple[int, ...], Scalar] | None = None):
        self.chart = chart
        clean = {}
        if terms:
            n = chart.dim
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match chart dimension {n}")
                if c:
                    clean[tuple(e)] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, chart, terms):
        p = cls.__new__(cls)
        p.chart = chart
        p._terms = terms
        p._hash = None
        return p

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls._raw(chart, {})

    @classmethod
    def const(cls, chart: Chart, c: Scalar) -> "Poly":
        c = Fraction(c)
        return cls._raw(chart, {(0,) * chart.dim: c} if c else {})

    @classmethod
    def one(cls, chart: Chart) -> "Poly":
        return cls.const(chart, 1)

    @classmethod
    def var(cls, chart: Chart, i: int | str) -> "Poly":
        if isinstance(i, str):
            i = chart.vars.index(i)
        _check_index(chart, i)
        e = [0] * chart.dim
        e[i] = 1
        return cls._raw(chart, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, chart: Chart, exps: Sequence[int], c: Scalar = 1) -> "Poly":
        return cls(chart, {tuple(exps): c})

    @classmethod
    def parse(cls, text: str, chart: Chart) -> "Poly":
        return parse_poly(text, chart)

    # -- inspection -----------------------------------------------------
    def terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in canonical (graded, descending) order."""
        return sorted(self._terms.items(), key=lambda kv: _exp_order(kv[0]), reverse=True)

    @property
    def key(self) -> tuple:
        return tuple(self.terms())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.chart.dim, Fraction(0))

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.chart != self.chart:
                raise ChartMismatch(f"{self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.chart, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly.zero(self.chart)
            return Poly._raw(self.chart, {e: c * other for e, c in self._terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        if other.chart != self.chart:
            raise ChartMismatch(f"{self.chart} vs {other.chart}")
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Poly._raw(self.chart, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Poly.one(self.chart)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.chart, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.chart == other.chart and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self._terms.items())))
        return self._hash

    # -- calculus -------------------------------------------------------
    def derive(self, i: int) -> "Poly":
        _check_index(self.chart, i)
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                out[e2] = c * k
        return Poly._raw(self.chart, out)

    def subs(self, i: int, value: Scalar) -> "Poly":
        """Substitute a rational value for coordinate ``i`` (the chart is kept)."""
        _check_index(self.chart, i)
        value = Fraction(value)
        out: dict = {}
        for e, c in self._terms.items():
            e2 = e[:i] + (0,) + e[i + 1:]
            v = out.get(e2, 0) + c * value ** e[i]
            if v:
                out[e2] = v
            else:
                out.pop(e2, None)
        return Poly._raw(self.chart, out)

    def integrate_unit(self, i: int) -> "Poly":
        """Integral over ``x_i`` in [0, 1]; the result does not depend on ``x_i``."""
        _check_index(self.chart, i)
        out: dict = {}
        for e, c in self._terms.items():
            e2 = e[:i] + (0,) + e[i + 1:]
            v = out.get(e2, 0) + c / (e[i] + 1)
            if v:
                out[e2] = v
            else:
                out.pop(e2, None)
        return Poly._raw(self.chart, out)

    def lift(self, chart: Chart) -> "Poly":
        """Embed into a chart whose leading coordinates are this chart's."""
        if chart == self.chart:
            return self
        if chart.vars[: self.chart.dim] != self.chart.vars:
            raise ChartMismatch(f"cannot lift {self.chart} into {chart}")
        pad = (0,) * (chart.dim - self.chart.dim)
        return Poly._raw(chart, {e + pad: c for e, c in self._terms.items()})

    def lower(self, chart: Chart) -> "Poly":
        """Inverse of :meth:`lift`; the dropped coordinates must not occur."""
        if chart == self.chart:
            return self
        n = chart.dim
        if self.chart.vars[:n] != chart.vars:
            raise ChartMismatch(f"cannot lower {self.chart} onto {chart}")
        out = {}
        for e, c in self._terms.items():
            if any(e[n:]):
                raise ValueError(f"{self} depends on a dropped coordinate")
            out[e[:n]] = c
        return Poly._raw(chart, out)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= Fraction(x) ** k
            total += term
        return total

    # -- printing -------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.chart.vars, e) if k
            )
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r})"


def _check_index(chart: Chart, i: int):
    if not isinstance(i, int) or not 0 <= i < chart.dim:
        raise IndexError(f"coordinate index {i} out of range for {chart}")


def derive(p: Poly, i: int) -> Poly:
    """Exact partial derivative with respect to coordinate ``i`` (0-based)."""
    return p.derive(i)


def monomials(chart: Chart, max_degree: int, min_degree: int = 0) -> Iterator[Poly]:
    """All monic monomials with total degree in ``[min_degree, max_degree]``."""
    n = chart.dim
    for d in range(min_degree, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            yield Poly.monomial(chart, e)


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def parse_poly(text: str, chart: Chart) -> Poly:
    """Parse ``3/2*x1^2*x2 - x3 + 1`` style text over ``chart``.

    Supports ``+ - * ^`` (also ``**``), parentheses, integer and ``p/q``
    literals, and division by a rational literal. Unknown names are rejected.
    """
    tokens = []
    pos = 0
    text_s = str(text)
    while pos < len(text_s):
        if text_s[pos:].strip() == "":
            break
        m = _TOKEN.match(text_s, pos)
        if not m:
            raise PolyParseError(text_s, pos, "unexpected character")
        start = m.start(m.lastindex)
        tokens.append((m.lastindex, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append((0, None, len(text_s)))
    parser = _Parser(text_s, tokens, chart)
    p = parser.expr()
    kind, tok, at = parser.peek()
    if kind != 0:
        raise PolyParseError(text_s, at, f"unexpected {tok!r}")
    return p


class _Parser:
    def __init__(self, text, tokens, chart):
        self.text = text
        self.tokens = tokens
        self.i = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expr(self) -> Poly:
        kind, tok, _ = self.peek()
        neg = False
        if kind == 3 and tok in "+-":
            self.take()
            neg = tok == "-"
        p = self.term()
        if neg:
            p = -p
        while True:
            kind, tok, _ = self.peek()
            if kind == 3 and tok in ("+", "-"):
                self.take()
                q = self.term()
                p = p + q if tok == "+" else p - q
            else:
                return p

    def term(self) -> Poly:
        p = self.power()
        while True:
            kind, tok, at = self.peek()
            if kind == 3 and tok == "*":
                self.take()
                p = p * self.power()
            elif kind == 3 and tok == "/":
                self.take()
                d = self.power()
                if not d.is_constant() or d.is_zero():
                    raise PolyParseError(self.text, at, "division by a non-constant or zero")
                p = p / d.constant_term()
            else:
                return p

    def power(self) -> Poly:
        base = self.atom()
        kind, tok, at = self.peek()
        if kind == 3 and tok in ("^", "**"):
            self.take()
            kind, e, at = self.take()
            if kind != 1 or "/" in e:
                raise PolyParseError(self.text, at, "exponent must be a non-negative integer")
            return base ** int(e)
        return base

    def atom(self) -> Poly:
        kind, tok, at = self.take()
        if kind == 1:
            try:
                return Poly.const(self.chart, Fraction(tok))
            except ZeroDivisionError:
                raise PolyParseError(self.text, at, "division by zero") from None
        if kind == 2:
            if tok not in self.chart.vars:
                raise PolyParseError(self.text, at, f"unknown symbol {tok!r}")
            return Poly.var(self.chart, tok)
        if kind == 3 and tok == "(":
            p = self.expr()
            kind, tok2, at2 = self.take()
            if tok2 != ")":
                raise PolyParseError(self.text, at2, "expected ')'")
            return p
        if kind == 3 and tok == "-":
            return -self.power()
        raise PolyParseError(self.text, at, "unexpected end of input" if kind == 0 else f"unexpected {tok!r}")


# -- vector fields ------------------------------------------------------------

@dataclass(frozen=True)
class VField:
    """A polynomial derivation ``sum_i a_i d/dx_i``."""

    chart: Chart
    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != self.chart.dim:
            raise ValueError("vector field length must equal the chart dimension")
        for a in self.coeffs:
            if a.chart != self.chart:
                raise ChartMismatch(f"coefficient over {a.chart}, field over {self.chart}")

    @classmethod
    def coordinate(cls, chart: Chart, i: int) -> "VField":
        return cls(chart, tuple(Poly.one(chart) if k == i else Poly.zero(chart) for k in range(chart.dim)))

    @classmethod
    def from_strings(cls, chart: Chart, coeffs: Iterable[str]) -> "VField":
        return cls(chart, tuple(parse_poly(c, chart) for c in coeffs))

    def __call__(self, f: Poly) -> Poly:
        return vf_apply(self, f)

    def __add__(self, other: "VField") -> "VField":
        return VField(self.chart, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VField") -> "VField":
        return VField(self.chart, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return VField(self.chart, tuple(-a for a in self.coeffs))

    def scale(self, f: Poly | Scalar) -> "VField":
        return VField(self.chart, tuple(a * f if isinstance(f, Poly) else a * f for a in self.coeffs))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coeffs)

    def __str__(self):
        parts = [f"({a})*d/d{v}" for a, v in zip(self.coeffs, self.chart.vars) if a]
        return " + ".join(parts) or "0"


def apply_derivation(coeffs: Sequence[Poly], f: Poly) -> Poly:
    """``sum_i coeffs[i] * df/dx_i``; ``coeffs`` may be shorter than the chart."""
    out = Poly.zero(f.chart)
    for i, a in enumerate(coeffs):
        if a:
            out = out + a * f.derive(i)
    return out


def vf_apply(X: VField, f: Poly) -> Poly:
    if X.chart != f.chart:
        raise ChartMismatch(f"{X.chart} vs {f.chart}")
    return apply_derivation(X.coeffs, f)


def vf_bracket(X: VField, Y: VField) -> VField:
    """Commutator of derivations: component k is X(Y_k) - Y(X_k)."""
    if X.chart != Y.chart:
        raise ChartMismatch(f"{X.chart} vs {Y.chart}")
    return VField(X.chart, tuple(X(b) - Y(a) for a, b in zip(X.coeffs, Y.coeffs)))
