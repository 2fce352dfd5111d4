"""Nonlinear forms: antisymmetric R-multilinear maps on carrier sections.

An :class:`NLForm` is an expression node evaluated on tuples of
:class:`~uthchern.carrier.CSection`. Nothing is assumed about function
linearity, so forms are not stored as coefficient tables; each node knows how
to evaluate itself and memoizes results under a sorted (sign-tracked)
argument tuple. Forms that do turn out to be function-linear are read off on
the frame by :func:`assemble_true_form` into a :class:`TrueForm`.

Values come in three kinds: ``"scalar"`` (a :class:`Poly`), ``"section"``
(a :class:`Section` of a super bundle) and ``"endo"`` (an :class:`EndMap`).
Endomorphism-valued forms carry an E-parity; the total parity of a form is
its degree plus its E-parity.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Iterable, Mapping, Sequence

from .carrier import Carrier, CSection
from .ring import Chart, ChartMismatch, Poly, apply_derivation, monomials, parse_poly
from .superlin import EndMap, Section, SuperBundle, supertrace

if TYPE_CHECKING:
    from .conn import Conn

__all__ = [
    "ENDO",
    "SCALAR",
    "SECTION",
    "ClosednessViolation",
    "ConstForm",
    "KoszulForm",
    "LinearityViolation",
    "NLForm",
    "ProductForm",
    "RuleForm",
    "SumForm",
    "SupertraceForm",
    "TrueForm",
    "anchor_pullback",
    "assemble_true_form",
    "commutator",
    "exterior_d",
    "fiber_integrate",
    "nl_d",
    "nl_eval",
    "nl_product",
    "restrict_t",
    "shuffles",
]

SCALAR, SECTION, ENDO = "scalar", "section", "endo"


class LinearityViolation(ValueError):
    """A form failed a function-linearity probe, so it is not a true form."""

    def __init__(self, slot: int, probe: str, args: str, residual):
        self.slot = slot
        self.probe = probe
        self.residual = residual
        super().__init__(f"not function-linear in slot {slot} for probe {probe} at ({args}): residual {residual}")


class ClosednessViolation(ArithmeticError):
    """A form that must be closed has a nonzero exterior derivative."""

    def __init__(self, form: "TrueForm", d_form: "TrueForm"):
        self.form = form
        self.d_form = d_form
        super().__init__(f"d of {form} is {d_form}, expected 0")


# -- values --------------------------------------------------------------------

def _zero_value(kind: str, chart: Chart, ranks: tuple[int, int] | None):
    if kind == SCALAR:
        return Poly.zero(chart)
    if kind == SECTION:
        return Section.zero(chart, *ranks)
    return EndMap.zero(chart, *ranks)


def _derive_value(coeffs: Sequence[Poly], v):
    """Apply the derivation ``sum_i coeffs[i] d/dx_i`` entrywise."""
    if isinstance(v, Poly):
        return apply_derivation(coeffs, v)
    return v.map(lambda a: apply_derivation(coeffs, a))


def shuffles(n: int, m: int):
    """Yield ``(sign, first, second)`` for the (n, m)-shuffles of ``range(n + m)``."""
    for first in itertools.combinations(range(n + m), n):
        second = tuple(k for k in range(n + m) if k not in first)
        # sign of the permutation first + second
        inv = sum(1 for a in first for b in second if a > b)
        yield (-1 if inv % 2 else 1), first, second


def _sort_with_sign(args: Sequence[CSection]):
    order = sorted(range(len(args)), key=lambda k: args[k].key)
    inv = 0
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b]:
                inv += 1
    return tuple(args[k] for k in order), (-1 if inv % 2 else 1)


# -- expression nodes ------------------------------------------------------------

class NLForm:
    """Base class for nonlinear forms.

    Subclasses implement :meth:`_evaluate` on an argument tuple already in
    canonical order; :meth:`__call__` handles arity checks, canonical
    ordering, the antisymmetry sign and memoization.
    """

    def __init__(self, carrier: Carrier, degree: int, kind: str, epar: int = 0,
                 ranks: tuple[int, int] | None = None, label: str = ""):
        if kind not in (SCALAR, SECTION, ENDO):
            raise ValueError(f"unknown value kind {kind!r}")
        if kind != SCALAR and ranks is None:
            raise ValueError("bundle ranks are required for section or endo values")
        self.carrier = carrier
        self.degree = degree
        self.kind = kind
        self.epar = epar % 2 if kind != SCALAR else 0
        self.ranks = tuple(ranks) if ranks is not None else None
        self.label = label
        self._cache: dict = {}

    @property
    def parity(self) -> int:
        return (self.degree + self.epar) % 2

    @property
    def chart(self) -> Chart:
        return self.carrier.chart

    def zero_value(self):
        return _zero_value(self.kind, self.chart, self.ranks)

    def __call__(self, *args: CSection):
        if len(args) != self.degree:
            raise TypeError(f"{self!r} takes {self.degree} arguments, got {len(args)}")
        for X in args:
            if X.rank != self.carrier.rank or (X.coeffs and X.coeffs[0].chart != self.chart):
                raise ChartMismatch(f"argument {X} is not a section of {self.carrier}")
        canon, sign = _sort_with_sign(args)
        keys = [X.key for X in canon]
        if any(a == b for a, b in zip(keys, keys[1:])):
            return self.zero_value()
        key = tuple(keys)
        try:
            v = self._cache[key]
        except KeyError:
            v = self._cache[key] = self._evaluate(canon)
        return v if sign > 0 else -v

    def _evaluate(self, args: tuple[CSection, ...]):
        raise NotImplementedError

    def clear_cache(self):
        self._cache.clear()

    # -- algebra sugar ------------------------------------------------------
    def __add__(self, other: "NLForm") -> "NLForm":
        return SumForm([(1, self), (1, other)])

    def __sub__(self, other: "NLForm") -> "NLForm":
        return SumForm([(1, self), (-1, other)])

    def __neg__(self):
        return SumForm([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, NLForm):
            return nl_product(self, other)
        if isinstance(other, (int, Fraction)):
            return SumForm([(other, self)])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SumForm([(other, self)])
        return NotImplemented

    def __repr__(self):
        tag = self.label or type(self).__name__
        return f"<{tag}: degree {self.degree} {self.kind} form, parity {self.parity}>"


class RuleForm(NLForm):
    """A form given by an arbitrary evaluation rule.

    The rule must be antisymmetric and R-multilinear; nothing else is assumed.
    """

    def __init__(self, carrier, degree, kind, rule: Callable, epar=0, ranks=None, label="rule"):
        super().__init__(carrier, degree, kind, epar, ranks, label)
        self.rule = rule

    def _evaluate(self, args):
        return self.rule(*args)


class ConstForm(NLForm):
    """Inclusion of a :class:`TrueForm` into the nonlinear forms."""

    def __init__(self, alpha: "TrueForm", epar: int | None = None, label: str = ""):
        if epar is None:
            epar = alpha.epar
        super().__init__(alpha.carrier, alpha.degree, alpha.kind, epar, alpha.ranks, label or "true-form")
        self.alpha = alpha

    def _evaluate(self, args):
        return self.alpha.evaluate(args)


class SumForm(NLForm):
    """Rational linear combination of forms of equal degree and kind."""

    def __init__(self, terms: Iterable[tuple[int | Fraction, NLForm]], label: str = "sum"):
        terms = [(Fraction(c), w) for c, w in terms if c]
        if not terms:
            raise ValueError("empty sum; use a zero form")
        w0 = terms[0][1]
        for _, w in terms:
            if (w.degree, w.kind, w.ranks) != (w0.degree, w0.kind, w0.ranks) or w.carrier != w0.carrier:
                raise ValueError("summands must share carrier, degree and value kind")
            if w.kind == ENDO and w.epar != w0.epar:
                raise ValueError("summands must share E-parity")
        super().__init__(w0.carrier, w0.degree, w0.kind, w0.epar, w0.ranks, label)
        self.terms = terms

    def _evaluate(self, args):
        out = self.zero_value()
        for c, w in self.terms:
            v = w(*args)
            out = out + (v * c if c != 1 else v)
        return out


class ProductForm(NLForm):
    """Shuffle product; see :func:`nl_product`."""

    def __init__(self, left: NLForm, right: NLForm):
        kind = _product_kind(left.kind, right.kind)
        ranks = left.ranks or right.ranks
        super().__init__(left.carrier, left.degree + right.degree, kind, left.epar + right.epar, ranks, "product")
        self.left = left
        self.right = right
        # composition of multiplication operators: an odd E-degree on the left
        # passing an odd number of right-hand arguments costs a sign
        self.koszul = -1 if (left.epar and right.degree % 2) else 1
        self._shuffles = list(shuffles(left.degree, right.degree))

    def _evaluate(self, args):
        out = self.zero_value()
        for sign, first, second in self._shuffles:
            a = self.left(*(args[k] for k in first))
            if _is_zero(a):
                continue
            b = self.right(*(args[k] for k in second))
            if _is_zero(b):
                continue
            v = a * b
            out = out + v if sign * self.koszul > 0 else out - v
        return out


def _product_kind(a: str, b: str) -> str:
    table = {
        (SCALAR, SCALAR): SCALAR,
        (SCALAR, SECTION): SECTION,
        (SCALAR, ENDO): ENDO,
        (ENDO, SCALAR): ENDO,
        (ENDO, ENDO): ENDO,
        (ENDO, SECTION): SECTION,
    }
    try:
        return table[(a, b)]
    except KeyError:
        raise TypeError(f"no product of a {a}-valued form with a {b}-valued form") from None


def _is_zero(v) -> bool:
    return v.is_zero()


class KoszulForm(NLForm):
    """The odd extension of a first-order operator to forms.

    With ``D_X`` the operator in degree 0,

        (Dw)(X_1..X_{n+1}) = sum_{i<j} (-1)^{i+j} w([X_i, X_j], X_1..^i..^j..)
                           + sum_i (-1)^{i+1} D_{X_i} w(X_1..^i..).

    ``ctx`` is a carrier (``D_X`` is the anchor derivation, entrywise) or a
    connection (``D_X = nabla_X`` on sections, ``[nabla_X, -]`` on
    endomorphisms).
    """

    def __init__(self, ctx, form: NLForm):
        super().__init__(form.carrier, form.degree + 1, form.kind, form.epar, form.ranks,
                         "d" if isinstance(ctx, Carrier) else "d_nabla")
        self.ctx = ctx
        self.form = form

    def _act(self, X: CSection, v):
        ctx = self.ctx
        if isinstance(ctx, Carrier):
            return _derive_value(ctx.anchor_of(X), v)
        if self.kind == SECTION:
            return ctx.apply(X, v)
        th = ctx.theta(X)
        return _derive_value(ctx.carrier.anchor_of(X), v) + th * v - v * th

    def _evaluate(self, args):
        C = self.carrier
        w = self.form
        n1 = len(args)
        out = self.zero_value()
        for i, j in itertools.combinations(range(n1), 2):
            rest = [args[k] for k in range(n1) if k != i and k != j]
            br = C.bracket(args[i], args[j])
            if br.is_zero():
                continue
            v = w(br, *rest)
            out = out + v if (i + j) % 2 == 0 else out - v
        for i in range(n1):
            rest = [args[k] for k in range(n1) if k != i]
            v = self._act(args[i], w(*rest))
            out = out + v if i % 2 == 0 else out - v
        return out


class SupertraceForm(NLForm):
    """Pointwise supertrace of an endomorphism-valued form."""

    def __init__(self, form: NLForm):
        if form.kind != ENDO:
            raise TypeError("supertrace needs an endomorphism-valued form")
        super().__init__(form.carrier, form.degree, SCALAR, 0, None, "str")
        self.form = form

    def _evaluate(self, args):
        if self.form.epar:
            return Poly.zero(self.chart)
        return supertrace(self.form(*args))


class ZeroForm(NLForm):
    def __init__(self, carrier, degree, kind, epar=0, ranks=None):
        super().__init__(carrier, degree, kind, epar, ranks, "zero")

    def _evaluate(self, args):
        return self.zero_value()


# -- operations ----------------------------------------------------------------

def nl_eval(form: NLForm, args: Sequence[CSection]):
    """Evaluate ``form`` on the argument list (exact, memoized)."""
    return form(*args)


def nl_product(left: NLForm, right: NLForm) -> NLForm:
    """Shuffle product of forms.

    When the left factor has odd E-degree and the right factor has odd form
    degree, each term picks up a minus sign; this makes the product agree
    with composition of the induced multiplication operators.
    """
    if left.carrier != right.carrier:
        raise ChartMismatch("product of forms over different carriers")
    if left.ranks and right.ranks and left.ranks != right.ranks:
        raise ValueError("product of forms valued in different bundles")
    return ProductForm(left, right)


def commutator(a: NLForm, b: NLForm) -> NLForm:
    """Graded commutator ``ab - (-1)^{|a||b|} ba`` with total parities."""
    sign = -1 if a.parity * b.parity == 0 else 1
    return SumForm([(1, nl_product(a, b)), (sign, nl_product(b, a))], label="commutator")


def nl_d(ctx, form: NLForm) -> NLForm:
    """Odd extension of the anchor action (``ctx`` a carrier) or of a connection."""
    if isinstance(ctx, Carrier):
        if ctx != form.carrier:
            raise ChartMismatch("form and carrier differ")
        return KoszulForm(ctx, form)
    if form.kind == SCALAR:
        raise TypeError("a connection acts on section- or endomorphism-valued forms")
    if ctx.carrier != form.carrier or (ctx.bundle.r0, ctx.bundle.r1) != form.ranks:
        raise ValueError("form and connection live on different carriers or bundles")
    return KoszulForm(ctx, form)


# -- true forms ----------------------------------------------------------------

class TrueForm:
    """A function-linear form, stored by its values on increasing frame tuples.

    ``coeffs`` maps strictly increasing index tuples ``(i_1 < ... < i_n)`` to
    the value on ``(e_{i_1}, ..., e_{i_n})``: a :class:`Poly` for scalar forms,
    an :class:`EndMap` for endomorphism-valued ones.
    """

    __slots__ = ("carrier", "degree", "kind", "ranks", "epar", "coeffs")

    def __init__(self, carrier: Carrier, degree: int, coeffs: Mapping[tuple[int, ...], object] | None = None,
                 kind: str = SCALAR, ranks: tuple[int, int] | None = None, epar: int = 0):
        if kind not in (SCALAR, ENDO):
            raise ValueError("true forms are scalar or endomorphism valued")
        if kind == ENDO and ranks is None:
            raise ValueError("endomorphism-valued true forms need bundle ranks")
        self.carrier = carrier
        self.degree = degree
        self.kind = kind
        self.ranks = tuple(ranks) if ranks is not None else None
        self.epar = epar if kind == ENDO else 0
        clean = {}
        for idx, v in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing of length {degree}")
            if idx and not (0 <= idx[0] and idx[-1] < carrier.rank):
                raise IndexError(f"index tuple {idx} out of range")
            if kind == SCALAR and not isinstance(v, Poly):
                v = parse_poly(v, carrier.chart) if isinstance(v, str) else Poly.const(carrier.chart, v)
            if v.chart != carrier.chart:
                raise ChartMismatch("coefficient over a different chart")
            if not v.is_zero():
                clean[idx] = v
        self.coeffs = dict(sorted(clean.items()))

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, carrier: Carrier, degree: int, kind: str = SCALAR, ranks=None) -> "TrueForm":
        return cls(carrier, degree, {}, kind, ranks)

    @classmethod
    def function(cls, carrier: Carrier, f: Poly | str) -> "TrueForm":
        return cls(carrier, 0, {(): f})

    @classmethod
    def coframe(cls, carrier: Carrier, i: int) -> "TrueForm":
        """The dual frame element ``e_i^*`` (0-based ``i``)."""
        return cls(carrier, 1, {(i,): Poly.one(carrier.chart)})

    @classmethod
    def endo(cls, carrier: Carrier, degree: int, coeffs: Mapping[tuple[int, ...], EndMap], ranks, epar: int | None = None):
        if epar is None:
            pars = {m.parity for m in coeffs.values() if not m.is_zero()}
            pars.discard(None)
            epar = pars.pop() if len(pars) == 1 else 0
        return cls(carrier, degree, coeffs, ENDO, ranks, epar)

    # -- values -------------------------------------------------------------
    @property
    def chart(self) -> Chart:
        return self.carrier.chart

    def zero_value(self):
        return _zero_value(self.kind, self.chart, self.ranks)

    def coefficient(self, idx: Sequence[int]):
        """Value on ``(e_{idx[0]}, ...)`` for any index order (antisymmetry applied)."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return self.zero_value()
        order = sorted(range(len(idx)), key=lambda k: idx[k])
        inv = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
        v = self.coeffs.get(tuple(sorted(idx)))
        if v is None:
            return self.zero_value()
        return -v if inv % 2 else v

    def evaluate(self, args: Sequence[CSection]):
        """``sum_I coeff_I * det[args[a].coeffs[I[b]]]``."""
        n = self.degree
        if len(args) != n:
            raise TypeError(f"degree-{n} form evaluated on {len(args)} arguments")
        out = self.zero_value()
        if not self.coeffs:
            return out
        if n == 0:
            return self.coeffs[()]
        minors = _minors(args, self.carrier.rank, self.chart)
        for idx, c in self.coeffs.items():
            m = minors.get(idx)
            if m:
                out = out + c * m
        return out

    def __call__(self, *args):
        return self.evaluate(args)

    # -- algebra ------------------------------------------------------------
    def _like(self, coeffs) -> "TrueForm":
        return TrueForm(self.carrier, self.degree, coeffs, self.kind, self.ranks, self.epar)

    def _check(self, other: "TrueForm"):
        if (self.carrier, self.degree, self.kind, self.ranks) != (other.carrier, other.degree, other.kind, other.ranks):
            raise ValueError("forms of different shape")

    def __add__(self, other: "TrueForm") -> "TrueForm":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return self._like(out)

    def __sub__(self, other: "TrueForm") -> "TrueForm":
        return self + (-other)

    def __neg__(self):
        return self._like({k: -v for k, v in self.coeffs.items()})

    def __mul__(self, c):
        if isinstance(c, (int, Fraction, Poly)):
            return self._like({k: v * c for k, v in self.coeffs.items()})
        return NotImplemented

    __rmul__ = __mul__

    def wedge(self, other: "TrueForm") -> "TrueForm":
        """Exterior product; the left factor must be scalar-valued."""
        if self.carrier != other.carrier:
            raise ChartMismatch("wedge of forms over different carriers")
        if self.kind != SCALAR:
            raise TypeError("left factor of a wedge must be scalar")
        out: dict = {}
        for I, a in self.coeffs.items():
            for J, b in other.coeffs.items():
                if set(I) & set(J):
                    continue
                idx = I + J
                order = sorted(range(len(idx)), key=lambda k: idx[k])
                inv = sum(1 for x in range(len(order)) for y in range(x + 1, len(order)) if order[x] > order[y])
                key = tuple(sorted(idx))
                v = b * a if other.kind == ENDO else a * b
                if inv % 2:
                    v = -v
                out[key] = out[key] + v if key in out else v
        return TrueForm(self.carrier, self.degree + other.degree, out, other.kind, other.ranks, other.epar)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, TrueForm):
            return NotImplemented
        return (self.carrier, self.degree, self.kind, self.ranks, self.coeffs) == (
            other.carrier, other.degree, other.kind, other.ranks, other.coeffs)

    def __hash__(self):
        return hash((self.carrier, self.degree, tuple(self.coeffs.items())))

    def lift(self, chart: Chart, carrier: Carrier | None = None) -> "TrueForm":
        carrier = carrier or self.carrier.lift(chart)
        return TrueForm(carrier, self.degree, {k: v.lift(chart) for k, v in self.coeffs.items()},
                        self.kind, self.ranks, self.epar)

    def as_nlform(self, label: str = "") -> NLForm:
        return ConstForm(self, label=label)

    def to_dict(self) -> list[dict]:
        """Serialization: ``[{"indices": [1-based...], "coeff": "..."}]`` in index order."""
        return [{"indices": [i + 1 for i in idx], "coeff": str(v)} for idx, v in self.coeffs.items()]

    def __str__(self):
        if not self.coeffs:
            return "0"
        names = _coframe_names(self.carrier)
        parts = []
        for idx, v in self.coeffs.items():
            basis = "^".join(names[i] for i in idx)
            parts.append(f"({v})*{basis}" if basis else f"({v})")
        return " + ".join(parts)

    def __repr__(self):
        return f"TrueForm({self})"


def _coframe_names(C: Carrier) -> list[str]:
    if C.name == "tangent" or C.is_cylinder and C.base.name == "tangent":
        return ["d" + v for v in C.chart.vars]
    names = [f"e{j + 1}*" for j in range(C.rank)]
    if C.is_cylinder:
        names[-1] = "dt"
    return names


def _minors(args: Sequence[CSection], rank: int, chart: Chart) -> dict:
    """All maximal minors ``det[args[a].coeffs[S[b]]]`` for increasing column sets ``S``."""
    prev = {(): Poly.one(chart)}
    for k, X in enumerate(args):
        cur: dict = {}
        for S, d in prev.items():
            for j in range(rank):
                a = X.coeffs[j]
                if not a or j in S:
                    continue
                # insert column j into S; expanding along the last row
                pos = sum(1 for s in S if s < j)
                T = S[:pos] + (j,) + S[pos:]
                sign = -1 if (k + pos) % 2 else 1
                v = a * d if sign > 0 else -(a * d)
                cur[T] = cur[T] + v if T in cur else v
        prev = {T: v for T, v in cur.items() if v}
        if not prev:
            break
    return prev


def assemble_true_form(form: NLForm, probe_degree: int = 2, probe: bool = True) -> TrueForm:
    """Read a function-linear form off on the frame.

    Before reading off, every slot of every increasing frame tuple is probed
    with ``f * e_i`` for the monic monomials ``f`` of degree
    ``1..probe_degree``; a failed probe raises :class:`LinearityViolation`.
    """
    C = form.carrier
    if form.kind == SECTION:
        raise TypeError("section-valued forms are not assembled")
    frame = [C.frame(j) for j in range(C.rank)]
    probes = list(monomials(C.chart, probe_degree, 1)) if probe else []
    coeffs = {}
    for idx in itertools.combinations(range(C.rank), form.degree):
        base = [frame[i] for i in idx]
        v0 = form(*base)
        for slot in range(form.degree):
            for f in probes:
                args = list(base)
                args[slot] = base[slot] * f
                residual = form(*args) - v0 * f
                if not residual.is_zero():
                    where = ", ".join(f"{f}*e{i + 1}" if s == slot else f"e{i + 1}" for s, i in enumerate(idx))
                    raise LinearityViolation(slot, str(f), where, residual)
        coeffs[idx] = v0
    return TrueForm(C, form.degree, coeffs, form.kind, form.ranks, form.epar)


def exterior_d(alpha: TrueForm) -> TrueForm:
    """Chevalley-Eilenberg differential of the carrier, computed on the frame.

    For the tangent carrier this is the de Rham differential.
    """
    C = alpha.carrier
    n = alpha.degree
    out: dict = {}
    if not alpha.coeffs:
        return TrueForm(C, n + 1, {}, alpha.kind, alpha.ranks, alpha.epar)
    for idx in itertools.combinations(range(C.rank), n + 1):
        acc = alpha.zero_value()
        for k in range(n + 1):
            rest = idx[:k] + idx[k + 1:]
            v = alpha.coeffs.get(rest)
            if v is not None:
                dv = _derive_value(C.anchor[idx[k]], v)
                acc = acc + dv if k % 2 == 0 else acc - dv
        for k, l in itertools.combinations(range(n + 1), 2):
            c = C.c(idx[k], idx[l])
            rest = tuple(i for m, i in enumerate(idx) if m != k and m != l)
            for mm, cm in enumerate(c):
                if not cm or mm in rest:
                    continue
                v = alpha.coefficient((mm,) + rest)
                if v.is_zero():
                    continue
                v = v * cm
                acc = acc + v if (k + l) % 2 == 0 else acc - v
        if not acc.is_zero():
            out[idx] = acc
    return TrueForm(C, n + 1, out, alpha.kind, alpha.ranks, alpha.epar)


def fiber_integrate(alpha: TrueForm) -> TrueForm:
    """Integrate a cylinder form over the interval fiber.

    Writing ``alpha = dt ^ beta + gamma`` with ``beta``, ``gamma`` free of
    ``dt``, the result is ``int_0^1 beta dt`` as a form on the base carrier.
    """
    C = alpha.carrier
    if not C.is_cylinder:
        raise ValueError("fiber integration needs a form on a cylinder carrier")
    base = C.base
    tf = C.rank - 1
    ti = C.chart.t_index
    out = {}
    for idx, v in alpha.coeffs.items():
        if not idx or idx[-1] != tf:
            continue
        rest = idx[:-1]
        # e_rest ^ dt = (-1)^{|rest|} dt ^ e_rest
        w = v.integrate_unit(ti) if isinstance(v, Poly) else v.map(lambda a: a.integrate_unit(ti))
        w = w.lower(base.chart)
        out[rest] = -w if len(rest) % 2 else w
    return TrueForm(base, alpha.degree - 1, out, alpha.kind, alpha.ranks, alpha.epar)


def restrict_t(alpha: TrueForm, value: int | Fraction) -> TrueForm:
    """Pull a cylinder form back along ``x -> (x, value)``."""
    C = alpha.carrier
    if not C.is_cylinder:
        raise ValueError("restriction needs a form on a cylinder carrier")
    tf = C.rank - 1
    ti = C.chart.t_index
    base = C.base
    out = {}
    for idx, v in alpha.coeffs.items():
        if idx and idx[-1] == tf:
            continue
        w = v.subs(ti, value) if isinstance(v, Poly) else v.map(lambda a: a.subs(ti, value))
        out[idx] = w.lower(base.chart)
    return TrueForm(base, alpha.degree, out, alpha.kind, alpha.ranks, alpha.epar)


def anchor_pullback(C: Carrier, alpha: TrueForm) -> TrueForm:
    """Precompose every slot of a de Rham form with the anchor of ``C``."""
    T = alpha.carrier
    if T.chart != C.chart or T.rank != C.chart.dim or T.structure or T.is_cylinder:
        raise ChartMismatch("anchor pullback takes a form on the tangent carrier of the same chart")
    images = [CSection(C.anchor[j]) for j in range(C.rank)]
    out = {}
    for idx in itertools.combinations(range(C.rank), alpha.degree):
        out[idx] = alpha.evaluate([images[j] for j in idx])
    return TrueForm(C, alpha.degree, out, alpha.kind, alpha.ranks, alpha.epar)


def normalize(alpha: TrueForm, p: int) -> TrueForm:
    """Divide by ``p!``."""
    return alpha * Fraction(1, math.factorial(p))
