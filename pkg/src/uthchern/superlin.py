"""Z2-graded linear algebra over the polynomial ring.

A trivialized super vector bundle ``E = E0 + E1`` of ranks ``(r0, r1)``
carries an odd differential ``partial``. Sections are column vectors with the
even components first; endomorphisms are dense ``(r0+r1)``-square matrices of
polynomials, viewed in 2x2 block form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from .report import Report
from .ring import Chart, ChartMismatch, Poly, parse_poly

__all__ = [
    "EndMap",
    "MixedParityError",
    "Section",
    "SuperBundle",
    "check_partial",
    "scommutator",
    "supertrace",
]


class MixedParityError(ValueError):
    """A graded operation received an endomorphism that is neither even nor odd."""


def _grade(k: int, r0: int) -> int:
    return 0 if k < r0 else 1


@dataclass(frozen=True)
class Section:
    """A section of ``E``: ``comps[:r0]`` lie in ``E0``, ``comps[r0:]`` in ``E1``."""

    r0: int
    comps: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "comps", tuple(self.comps))
        if not 0 <= self.r0 <= len(self.comps):
            raise ValueError("even rank exceeds the section length")

    @classmethod
    def zero(cls, chart: Chart, r0: int, r1: int) -> "Section":
        return cls(r0, tuple(Poly.zero(chart) for _ in range(r0 + r1)))

    @property
    def r1(self) -> int:
        return len(self.comps) - self.r0

    @property
    def even_part(self) -> tuple[Poly, ...]:
        return self.comps[: self.r0]

    @property
    def odd_part(self) -> tuple[Poly, ...]:
        return self.comps[self.r0:]

    @property
    def parity(self) -> int | None:
        even = any(self.even_part)
        odd = any(self.odd_part)
        if even and odd:
            return None
        return 1 if odd else 0

    def _check(self, other: "Section"):
        if (self.r0, self.r1) != (other.r0, other.r1):
            raise ValueError("sections of bundles with different ranks")

    def __add__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.r0, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.r0, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self):
        return Section(self.r0, tuple(-a for a in self.comps))

    def __mul__(self, f):
        if isinstance(f, (Poly, int, Fraction)):
            return Section(self.r0, tuple(a * f for a in self.comps))
        return NotImplemented

    __rmul__ = __mul__

    def map(self, fn: Callable[[Poly], Poly]) -> "Section":
        return Section(self.r0, tuple(fn(a) for a in self.comps))

    def is_zero(self) -> bool:
        return not any(self.comps)

    def __str__(self):
        return "[" + ", ".join(str(a) for a in self.comps) + "]"


class EndMap:
    """Endomorphism of a trivialized super bundle, stored as a dense matrix."""

    __slots__ = ("chart", "r0", "r1", "rows", "__dict__")

    def __init__(self, chart: Chart, r0: int, r1: int, rows: Sequence[Sequence[Poly]]):
        n = r0 + r1
        rows = tuple(tuple(row) for row in rows)
        if len(rows) != n or any(len(row) != n for row in rows):
            raise ValueError(f"expected a {n}x{n} matrix")
        for row in rows:
            for a in row:
                if a.chart != chart:
                    raise ChartMismatch("matrix entry over a different chart")
        self.chart = chart
        self.r0 = r0
        self.r1 = r1
        self.rows = rows

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, chart: Chart, r0: int, r1: int) -> "EndMap":
        z = Poly.zero(chart)
        n = r0 + r1
        return cls(chart, r0, r1, [[z] * n for _ in range(n)])

    @classmethod
    def identity(cls, chart: Chart, r0: int, r1: int) -> "EndMap":
        n = r0 + r1
        return cls(chart, r0, r1, [[Poly.const(chart, int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def from_strings(cls, chart: Chart, r0: int, r1: int, rows: Sequence[Sequence[str | int]]) -> "EndMap":
        return cls(chart, r0, r1, [[_poly(a, chart) for a in row] for row in rows])

    @classmethod
    def from_blocks(cls, chart: Chart, r0: int, r1: int, a00=None, a01=None, a10=None, a11=None) -> "EndMap":
        """Assemble from blocks; ``a01`` maps ``E1 -> E0`` (rows even, columns odd)."""
        n = r0 + r1
        m = [[Poly.zero(chart)] * n for _ in range(n)]
        for blk, (ro, co, nr, nc) in (
            (a00, (0, 0, r0, r0)),
            (a01, (0, r0, r0, r1)),
            (a10, (r0, 0, r1, r0)),
            (a11, (r0, r0, r1, r1)),
        ):
            if blk is None:
                continue
            if len(blk) != nr or any(len(row) != nc for row in blk):
                raise ValueError(f"block has wrong shape, expected {nr}x{nc}")
            for i, row in enumerate(blk):
                m[ro + i] = list(m[ro + i])
                for j, a in enumerate(row):
                    m[ro + i][co + j] = _poly(a, chart)
        return cls(chart, r0, r1, m)

    # -- inspection -----------------------------------------------------
    @property
    def size(self) -> int:
        return self.r0 + self.r1

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def block(self, a: int, b: int) -> tuple[tuple[Poly, ...], ...]:
        rs = range(0, self.r0) if a == 0 else range(self.r0, self.size)
        cs = range(0, self.r0) if b == 0 else range(self.r0, self.size)
        return tuple(tuple(self.rows[i][j] for j in cs) for i in rs)

    @cached_property
    def parity(self) -> int | None:
        """0 for even (or zero), 1 for odd, ``None`` for mixed."""
        diag = off = False
        for i, row in enumerate(self.rows):
            gi = _grade(i, self.r0)
            for j, a in enumerate(row):
                if a:
                    if gi == _grade(j, self.r0):
                        diag = True
                    else:
                        off = True
        if diag and off:
            return None
        return 1 if off else 0

    def graded_part(self, parity: int) -> "EndMap":
        rows = [
            [a if (_grade(i, self.r0) + _grade(j, self.r0)) % 2 == parity else Poly.zero(self.chart) for j, a in enumerate(row)]
            for i, row in enumerate(self.rows)
        ]
        return EndMap(self.chart, self.r0, self.r1, rows)

    def is_zero(self) -> bool:
        return not any(a for row in self.rows for a in row)

    def __bool__(self):
        return not self.is_zero()

    @cached_property
    def key(self) -> tuple:
        return tuple(a.key for row in self.rows for a in row)

    def __eq__(self, other):
        if not isinstance(other, EndMap):
            return NotImplemented
        return (self.chart, self.r0, self.r1, self.rows) == (other.chart, other.r0, other.r1, other.rows)

    def __hash__(self):
        return hash((self.chart, self.r0, self.r1, self.rows))

    # -- algebra --------------------------------------------------------
    def _check(self, other: "EndMap"):
        if (self.r0, self.r1) != (other.r0, other.r1):
            raise ValueError(f"rank mismatch: ({self.r0},{self.r1}) vs ({other.r0},{other.r1})")
        if self.chart != other.chart:
            raise ChartMismatch(f"{self.chart} vs {other.chart}")

    def _new(self, rows) -> "EndMap":
        return EndMap(self.chart, self.r0, self.r1, rows)

    def __add__(self, other: "EndMap") -> "EndMap":
        if not isinstance(other, EndMap):
            return NotImplemented
        self._check(other)
        return self._new([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "EndMap") -> "EndMap":
        if not isinstance(other, EndMap):
            return NotImplemented
        self._check(other)
        return self._new([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self._new([[-a for a in row] for row in self.rows])

    def __mul__(self, other):
        if isinstance(other, (Poly, int, Fraction)):
            return self._new([[a * other for a in row] for row in self.rows])
        if isinstance(other, EndMap):
            self._check(other)
            n = self.size
            cols = list(zip(*other.rows)) if n else []
            out = []
            for row in self.rows:
                out_row = []
                for col in cols:
                    acc = Poly.zero(self.chart)
                    for a, b in zip(row, col):
                        if a and b:
                            acc = acc + a * b
                    out_row.append(acc)
                out.append(out_row)
            return self._new(out)
        if isinstance(other, Section):
            if (other.r0, other.r1) != (self.r0, self.r1):
                raise ValueError("section and endomorphism ranks differ")
            comps = []
            for row in self.rows:
                acc = Poly.zero(self.chart)
                for a, b in zip(row, other.comps):
                    if a and b:
                        acc = acc + a * b
                comps.append(acc)
            return Section(self.r0, tuple(comps))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Poly, int, Fraction)):
            return self * other
        return NotImplemented

    def map(self, fn: Callable[[Poly], Poly]) -> "EndMap":
        return self._new([[fn(a) for a in row] for row in self.rows])

    def lift(self, chart: Chart) -> "EndMap":
        return EndMap(chart, self.r0, self.r1, [[a.lift(chart) for a in row] for row in self.rows])

    def lower(self, chart: Chart) -> "EndMap":
        return EndMap(chart, self.r0, self.r1, [[a.lower(chart) for a in row] for row in self.rows])

    def __str__(self):
        return "[" + "; ".join(", ".join(str(a) for a in row) for row in self.rows) + "]"

    def __repr__(self):
        return f"EndMap({self.r0},{self.r1}; {self})"


def _poly(a, chart: Chart) -> Poly:
    if isinstance(a, Poly):
        return a
    if isinstance(a, str):
        return parse_poly(a, chart)
    return Poly.const(chart, a)


def supertrace(A: EndMap) -> Poly:
    """``Tr(A_00) - Tr(A_11)``."""
    out = Poly.zero(A.chart)
    for i in range(A.size):
        a = A.rows[i][i]
        if a:
            out = out + a if i < A.r0 else out - a
    return out


def _homogeneous_parity(A: EndMap) -> int:
    p = A.parity
    if p is None:
        raise MixedParityError(f"endomorphism of mixed parity: {A}")
    return p


def scommutator(A: EndMap, B: EndMap, pa: int | None = None, pb: int | None = None) -> EndMap:
    """Graded commutator ``AB - (-1)^{|A||B|} BA``.

    ``pa``/``pb`` override the parities read off the blocks; they matter only
    for a zero operand, whose parity is ambiguous.
    """
    pa = _homogeneous_parity(A) if pa is None else pa
    pb = _homogeneous_parity(B) if pb is None else pb
    if pa * pb:
        return A * B + B * A
    return A * B - B * A


@dataclass(frozen=True, eq=False)
class SuperBundle:
    """Trivial super bundle ``E0 + E1`` over a chart with an odd differential."""

    chart: Chart
    r0: int
    r1: int
    partial: EndMap | None = None
    name: str = ""

    def __post_init__(self):
        if self.partial is None:
            object.__setattr__(self, "partial", EndMap.zero(self.chart, self.r0, self.r1))
        d = self.partial
        if (d.r0, d.r1) != (self.r0, self.r1) or d.chart != self.chart:
            raise ValueError("differential does not match the bundle")

    @classmethod
    def from_blocks(cls, chart: Chart, r0: int, r1: int, even_to_odd=None, odd_to_even=None, name: str = "") -> "SuperBundle":
        """``even_to_odd`` is the ``r1 x r0`` block ``E0 -> E1``; ``odd_to_even`` is ``r0 x r1``."""
        return cls(chart, r0, r1, EndMap.from_blocks(chart, r0, r1, a01=odd_to_even, a10=even_to_odd), name=name)

    @property
    def rank(self) -> int:
        return self.r0 + self.r1

    def _key(self):
        return (self.chart, self.r0, self.r1, self.partial)

    def __eq__(self, other):
        if not isinstance(other, SuperBundle):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def zero_section(self) -> Section:
        return Section.zero(self.chart, self.r0, self.r1)

    def frame(self, c: int) -> Section:
        return Section(self.r0, tuple(Poly.const(self.chart, int(k == c)) for k in range(self.rank)))

    def section(self, comps) -> Section:
        comps = tuple(_poly(a, self.chart) for a in comps)
        if len(comps) != self.rank:
            raise ValueError(f"section needs {self.rank} components")
        return Section(self.r0, comps)

    def zero_end(self) -> EndMap:
        return EndMap.zero(self.chart, self.r0, self.r1)

    def identity(self) -> EndMap:
        return EndMap.identity(self.chart, self.r0, self.r1)

    def endmap(self, rows) -> EndMap:
        return EndMap(self.chart, self.r0, self.r1, [[_poly(a, self.chart) for a in row] for row in rows])

    def lift(self, chart: Chart) -> "SuperBundle":
        if chart == self.chart:
            return self
        return SuperBundle(chart, self.r0, self.r1, self.partial.lift(chart), name=self.name)

    def lower(self, chart: Chart) -> "SuperBundle":
        if chart == self.chart:
            return self
        return SuperBundle(chart, self.r0, self.r1, self.partial.lower(chart), name=self.name)


def direct_sum(E: SuperBundle, F: SuperBundle) -> SuperBundle:
    """``E + F`` with even parts first; the result is graded, so blocks interleave."""
    if E.chart != F.chart:
        raise ChartMismatch("direct sum over different charts")
    return SuperBundle(E.chart, E.r0 + F.r0, E.r1 + F.r1, endmap_sum(E.partial, F.partial))


def _sum_index(k: int, r0: int, r1: int, off0: int, off1: int, R0: int) -> int:
    return off0 + k if k < r0 else R0 + off1 + (k - r0)


def endmap_sum(A: EndMap, B: EndMap) -> EndMap:
    """Block-diagonal ``A + B`` acting on the direct sum of the two bundles."""
    R0, R1 = A.r0 + B.r0, A.r1 + B.r1
    n = R0 + R1
    m = [[Poly.zero(A.chart)] * n for _ in range(n)]
    for M, off0, off1 in ((A, 0, 0), (B, A.r0, A.r1)):
        idx = [_sum_index(k, M.r0, M.r1, off0, off1, R0) for k in range(M.size)]
        for i in range(M.size):
            m[idx[i]] = list(m[idx[i]])
            for j in range(M.size):
                m[idx[i]][idx[j]] = M.rows[i][j]
    return EndMap(A.chart, R0, R1, m)


def check_partial(E: SuperBundle) -> Report:
    """``partial`` is odd and squares to zero."""
    rep = Report(f"check_partial[{E.name or 'bundle'}]")
    d = E.partial
    rep.expect_zero("odd", "even blocks of partial", d.graded_part(0))
    rep.expect_zero("square-zero", "partial*partial", d * d)
    return rep
