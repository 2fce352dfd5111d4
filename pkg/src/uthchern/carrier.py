"""Trivialized Lie algebroids (Lie-Rinehart carriers) over a polynomial chart.

A carrier is a free module of rank ``r`` with frame ``e_1..e_r``, an anchor
``rho(e_j)`` given by polynomial vector fields, and structure functions
``[e_i, e_j] = sum_k c_ij^k e_k``. The tangent bundle, Lie algebras (over a
point) and action algebroids are all carriers, so the form calculus runs
unchanged in the classical and the algebroid setting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .report import Report
from .ring import Chart, ChartMismatch, Poly, VField, apply_derivation, monomials, parse_poly, vf_bracket

__all__ = [
    "CSection",
    "Carrier",
    "action_carrier",
    "aff1_carrier",
    "carrier_bracket",
    "carrier_check",
    "cylinder_carrier",
    "lie_algebra_carrier",
    "tangent_carrier",
]


@dataclass(frozen=True)
class CSection:
    """A section ``sum_j coeffs[j] e_j`` of a carrier."""

    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def __add__(self, other: "CSection") -> "CSection":
        _same_rank(self, other)
        return CSection(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "CSection") -> "CSection":
        _same_rank(self, other)
        return CSection(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return CSection(tuple(-a for a in self.coeffs))

    def __mul__(self, f):
        return CSection(tuple(a * f for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coeffs)

    @cached_property
    def key(self) -> tuple:
        return tuple(a.key for a in self.coeffs)

    def __str__(self):
        parts = [f"({a})*e{j + 1}" for j, a in enumerate(self.coeffs) if a]
        return " + ".join(parts) or "0"


def _same_rank(a: CSection, b: CSection):
    if a.rank != b.rank:
        raise ValueError(f"rank mismatch: {a.rank} vs {b.rank}")


@dataclass(frozen=True, eq=False)
class Carrier:
    chart: Chart
    rank: int
    anchor: tuple[tuple[Poly, ...], ...]  # anchor[j] = components of rho(e_j)
    structure: Mapping[tuple[int, int], tuple[Poly, ...]] = field(default_factory=dict)
    name: str = ""
    base: "Carrier | None" = None  # set on cylinder carriers

    def __post_init__(self):
        anchor = tuple(tuple(col) for col in self.anchor)
        if len(anchor) != self.rank:
            raise ValueError(f"anchor has {len(anchor)} columns, rank is {self.rank}")
        for col in anchor:
            if len(col) != self.chart.dim:
                raise ValueError("anchor column length must equal chart dimension")
            for a in col:
                if a.chart != self.chart:
                    raise ChartMismatch("anchor entry over a different chart")
        object.__setattr__(self, "anchor", anchor)
        table = {}
        for (i, j), coeffs in dict(self.structure).items():
            if not (0 <= i < self.rank and 0 <= j < self.rank):
                raise IndexError(f"structure index ({i}, {j}) out of range")
            coeffs = tuple(coeffs)
            if len(coeffs) != self.rank:
                raise ValueError("structure coefficient vector must have length rank")
            if any(c for c in coeffs):
                table[(i, j)] = coeffs
        object.__setattr__(self, "structure", table)

    # -- identity ---------------------------------------------------------
    @cached_property
    def _key(self):
        return (
            self.chart,
            self.rank,
            self.anchor,
            tuple(sorted(self.structure.items())),
            self.base._key if self.base is not None else None,
        )

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Carrier):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Carrier({self.name or '?'}, rank={self.rank}, {self.chart})"

    @property
    def is_cylinder(self) -> bool:
        return self.base is not None

    # -- structure --------------------------------------------------------
    def c(self, i: int, j: int) -> tuple[Poly, ...]:
        """Coefficients of ``[e_i, e_j]``; unspecified entries follow antisymmetry."""
        if (i, j) in self.structure:
            return self.structure[(i, j)]
        if (j, i) in self.structure:
            return tuple(-a for a in self.structure[(j, i)])
        return tuple(Poly.zero(self.chart) for _ in range(self.rank))

    def zero_section(self) -> CSection:
        return CSection(tuple(Poly.zero(self.chart) for _ in range(self.rank)))

    def frame(self, j: int) -> CSection:
        if not 0 <= j < self.rank:
            raise IndexError(f"frame index {j} out of range")
        return CSection(tuple(Poly.one(self.chart) if k == j else Poly.zero(self.chart) for k in range(self.rank)))

    def section(self, coeffs: Iterable[Poly | str | int]) -> CSection:
        out = []
        for a in coeffs:
            if isinstance(a, str):
                a = parse_poly(a, self.chart)
            elif not isinstance(a, Poly):
                a = Poly.const(self.chart, a)
            out.append(a)
        s = CSection(tuple(out))
        self._check_section(s)
        return s

    def _check_section(self, s: CSection):
        if s.rank != self.rank:
            raise ValueError(f"section of rank {s.rank} on a carrier of rank {self.rank}")
        for a in s.coeffs:
            if a.chart != self.chart:
                raise ChartMismatch("section coefficient over a different chart")

    def anchor_of(self, s: CSection) -> tuple[Poly, ...]:
        """Components of the vector field ``rho(s)``."""
        out = [Poly.zero(self.chart) for _ in range(self.chart.dim)]
        for g, col in zip(s.coeffs, self.anchor):
            if g:
                for i, a in enumerate(col):
                    if a:
                        out[i] = out[i] + g * a
        return tuple(out)

    def anchor_field(self, s: CSection) -> VField:
        return VField(self.chart, self.anchor_of(s))

    def act(self, s: CSection, f: Poly) -> Poly:
        """``rho(s)(f)``."""
        return apply_derivation(self.anchor_of(s), f)

    def bracket(self, s1: CSection, s2: CSection) -> CSection:
        return carrier_bracket(self, s1, s2)

    # -- charts -----------------------------------------------------------
    def lift(self, chart: Chart) -> "Carrier":
        """Same frame and brackets, with coefficients allowed to depend on extra coordinates."""
        if chart == self.chart:
            return self
        return Carrier(
            chart,
            self.rank,
            tuple(tuple(a.lift(chart) for a in col) + _zeros(chart, chart.dim - self.chart.dim) for col in self.anchor),
            {k: tuple(a.lift(chart) for a in v) for k, v in self.structure.items()},
            name=self.name,
        )


def _zeros(chart: Chart, n: int) -> tuple[Poly, ...]:
    return tuple(Poly.zero(chart) for _ in range(n))


def carrier_bracket(C: Carrier, s1: CSection, s2: CSection) -> CSection:
    """Bracket of two sections by bilinear expansion over the frame.

    ``[f e_i, g e_j] = f g [e_i, e_j] + f rho(e_i)(g) e_j - g rho(e_j)(f) e_i``.
    """
    C._check_section(s1)
    C._check_section(s2)
    out = [C.act(s1, g) - C.act(s2, f) for f, g in zip(s1.coeffs, s2.coeffs)]
    pairs = set(C.structure) | {(j, i) for i, j in C.structure}
    for i, j in sorted(pairs):
        fg = s1.coeffs[i] * s2.coeffs[j]
        if fg:
            for k, c in enumerate(C.c(i, j)):
                if c:
                    out[k] = out[k] + fg * c
    return CSection(tuple(out))


def tangent_carrier(chart: Chart) -> Carrier:
    """``TM`` with the coordinate frame: identity anchor, vanishing brackets."""
    n = chart.dim
    anchor = tuple(tuple(Poly.one(chart) if i == j else Poly.zero(chart) for i in range(n)) for j in range(n))
    return Carrier(chart, n, anchor, {}, name="tangent")


def lie_algebra_carrier(rank: int, structure: Mapping[tuple[int, int], Sequence], name: str = "lie-algebra") -> Carrier:
    """A Lie algebra, i.e. a carrier over the zero-dimensional chart."""
    point = Chart(())
    table = {k: tuple(_as_poly(a, point) for a in v) for k, v in structure.items()}
    return Carrier(point, rank, tuple(() for _ in range(rank)), table, name=name)


def action_carrier(
    chart: Chart,
    fields: Sequence[VField | Sequence],
    structure: Mapping[tuple[int, int], Sequence],
    name: str = "action",
) -> Carrier:
    """Action algebroid of a Lie algebra acting by the given vector fields."""
    anchor = []
    for X in fields:
        coeffs = X.coeffs if isinstance(X, VField) else tuple(_as_poly(a, chart) for a in X)
        anchor.append(coeffs)
    table = {k: tuple(_as_poly(a, chart) for a in v) for k, v in structure.items()}
    return Carrier(chart, len(anchor), tuple(anchor), table, name=name)


def aff1_carrier(chart: Chart | None = None) -> Carrier:
    """The affine Lie algebra acting on the line: ``rho(e1) = d/dx``, ``rho(e2) = x d/dx``, ``[e1, e2] = e1``."""
    chart = chart or Chart(("x",))
    return action_carrier(chart, [["1"], ["x"]], {(0, 1): ["1", "0"]}, name="aff(1)")


def cylinder_carrier(C: Carrier) -> Carrier:
    """``C x I``: the base frame plus a last frame element ``e_t`` anchored to ``d/dt``."""
    if C.chart.is_cylinder:
        raise ValueError("carrier already lives on a cylinder chart")
    cyl = C.chart.cylinder()
    lifted = C.lift(cyl)
    t_col = _zeros(cyl, cyl.dim - 1) + (Poly.one(cyl),)
    structure = {k: v + (Poly.zero(cyl),) for k, v in lifted.structure.items()}
    return Carrier(cyl, C.rank + 1, lifted.anchor + (t_col,), structure, name=f"{C.name}xI", base=C)


def _as_poly(a, chart: Chart) -> Poly:
    if isinstance(a, Poly):
        return a
    if isinstance(a, str):
        return parse_poly(a, chart)
    return Poly.const(chart, a)


def carrier_check(C: Carrier, probe_degree: int = 2) -> Report:
    """Antisymmetry, Jacobi, Leibniz and anchor-morphism identities of a carrier.

    Jacobi is evaluated on basis triples and on triples ``(f e_i, e_j, e_k)``
    for monic monomials ``f`` of degree ``1..probe_degree``; the probe triples
    pick up anchor-morphism failures through the function-coefficient terms.
    """
    rep = Report(f"carrier_check[{C.name or 'carrier'}]")
    rep.notes["probe_degree"] = probe_degree
    r = C.rank
    frame = [C.frame(j) for j in range(r)]
    probes = list(monomials(C.chart, probe_degree, 1))

    for (i, j), coeffs in C.structure.items():
        if i == j:
            rep.expect_zero("antisymmetry", f"[e{i + 1},e{i + 1}]", CSection(coeffs))
        elif (j, i) in C.structure:
            rep.expect_zero("antisymmetry", f"[e{i + 1},e{j + 1}]+[e{j + 1},e{i + 1}]", CSection(coeffs) + CSection(C.structure[(j, i)]))
        else:
            rep.count("antisymmetry")

    def jacobi(a, b, c):
        return (
            C.bracket(C.bracket(a, b), c)
            + C.bracket(C.bracket(b, c), a)
            + C.bracket(C.bracket(c, a), b)
        )

    for i, j, k in itertools.combinations(range(r), 3):
        rep.expect_zero("jacobi", f"(e{i + 1},e{j + 1},e{k + 1})", jacobi(frame[i], frame[j], frame[k]))
    for i in range(r):
        for j, k in itertools.combinations(range(r), 2):
            for f in probes:
                rep.expect_zero("jacobi", f"({f}*e{i + 1},e{j + 1},e{k + 1})", jacobi(frame[i] * f, frame[j], frame[k]))

    for i in range(r):
        for j in range(r):
            for f in probes:
                lhs = C.bracket(frame[i], frame[j] * f)
                rhs = C.bracket(frame[i], frame[j]) * f + frame[j] * C.act(frame[i], f)
                rep.expect_zero("leibniz", f"[e{i + 1},{f}*e{j + 1}]", lhs - rhs)
                lhs = C.bracket(frame[i] * f, frame[j])
                rhs = C.bracket(frame[i], frame[j]) * f - frame[i] * C.act(frame[j], f)
                rep.expect_zero("leibniz", f"[{f}*e{i + 1},e{j + 1}]", lhs - rhs)

    for i, j in itertools.combinations(range(r), 2):
        lhs = vf_bracket(C.anchor_field(frame[i]), C.anchor_field(frame[j]))
        rhs = C.anchor_field(C.bracket(frame[i], frame[j]))
        rep.expect_zero("anchor-morphism", f"rho[e{i + 1},e{j + 1}]", lhs - rhs)
    return rep
