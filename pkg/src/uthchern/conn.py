"""Connections, connections up to homotopy and superconnections; curvature, Chern and Chern-Simons forms.

Every connection-like object here satisfies the Leibniz rule in the section
argument, so it is determined by its action on constant frame sections:

    nabla_X s = rho(X)(s) + theta(X) s,

where ``theta(X)`` is an :class:`EndMap` that may depend on ``X`` in a
non-function-linear way (that is exactly the room a connection up to
homotopy needs). Variants differ only in how they produce ``theta(X)`` and
the odd homotopy ``H(f, X)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence

from .carrier import Carrier, CSection, cylinder_carrier
from .forms import (
    ENDO,
    ClosednessViolation,
    ConstForm,
    KoszulForm,
    NLForm,
    SumForm,
    SupertraceForm,
    TrueForm,
    assemble_true_form,
    exterior_d,
    fiber_integrate,
    nl_product,
)
from .report import Report
from .ring import Chart, ChartMismatch, Poly, apply_derivation, monomials
from .superlin import EndMap, Section, SuperBundle

__all__ = [
    "AffinePath",
    "Conn",
    "ConnectionAxiomError",
    "ConnectionForm",
    "CurvatureForm",
    "HTemplate",
    "MatrixConn",
    "SuperConn",
    "TemplateUTH",
    "affine_path",
    "check_connection",
    "check_form_uth",
    "check_higher",
    "check_uth",
    "chern_form",
    "chern_simons",
    "conn_apply",
    "curvature",
    "d_nabla",
    "dense_section",
    "linearize",
    "super_chern_form",
    "super_curvature",
]


class ConnectionAxiomError(ValueError):
    """A constructed connection violates a connection axiom."""

    def __init__(self, report: Report):
        self.report = report
        super().__init__(report.summary())


def _odd_bracket(H: EndMap, d: EndMap) -> EndMap:
    # [H, d] for odd H and odd d
    return H * d + d * H


def dense_section(C: Carrier) -> CSection:
    """The composite probe section ``sum_j (j + 1 + sum_k (k + j + 2) x_k) e_j``."""
    chart = C.chart
    coeffs = []
    for j in range(C.rank):
        g = Poly.const(chart, j + 1)
        for k in range(chart.dim):
            g = g + Poly.var(chart, k) * (k + j + 2)
        coeffs.append(g)
    return CSection(tuple(coeffs))


def _dense_bundle_section(E: SuperBundle) -> Section:
    chart = E.chart
    comps = []
    for c in range(E.rank):
        g = Poly.const(chart, 2 * c + 1)
        for k in range(chart.dim):
            g = g + Poly.var(chart, k) * Poly.var(chart, (k + c) % chart.dim) * (c - k + 1)
        comps.append(g)
    return Section(E.r0, tuple(comps))


class Conn:
    """Base class: a first-order operator ``nabla_X`` on sections of ``bundle``."""

    def __init__(self, carrier: Carrier, bundle: SuperBundle, label: str = ""):
        if carrier.chart != bundle.chart:
            raise ChartMismatch("carrier and bundle live on different charts")
        self.carrier = carrier
        self.bundle = bundle
        self.label = label

    # -- the three things a variant defines ------------------------------------
    def theta(self, X: CSection) -> EndMap:
        raise NotImplementedError

    def homotopy(self, f: Poly, X: CSection) -> EndMap:
        """The odd operator ``H(f, X)``; zero for a genuine connection."""
        return self.bundle.zero_end()

    def lift(self, chart: Chart) -> "Conn":
        """The same rule with coefficients allowed to depend on extra coordinates."""
        raise NotImplementedError

    # -- derived ---------------------------------------------------------------
    def apply(self, X: CSection, s: Section) -> Section:
        C = self.carrier
        rho = C.anchor_of(X)
        return s.map(lambda a: apply_derivation(rho, a)) + self.theta(X) * s

    def __call__(self, X: CSection, s: Section) -> Section:
        return self.apply(X, s)

    @cached_property
    def curvature_form(self) -> "CurvatureForm":
        return CurvatureForm(self)

    @cached_property
    def connection_form(self) -> "ConnectionForm":
        return ConnectionForm(self)

    @cached_property
    def _powers(self) -> list[NLForm]:
        return [self.curvature_form]

    def curvature_power(self, p: int) -> NLForm:
        """``k^p`` as a left-nested product, shared across calls."""
        powers = self._powers
        while len(powers) < p:
            powers.append(nl_product(powers[-1], self.curvature_form))
        return powers[p - 1]

    def __repr__(self):
        return f"<{type(self).__name__} {self.label or ''} on {self.carrier.name} ranks ({self.bundle.r0},{self.bundle.r1})>"


class ConnectionForm(NLForm):
    """``X -> theta(X)``: the connection one-form, function-linear only for true connections."""

    def __init__(self, conn: Conn):
        super().__init__(conn.carrier, 1, ENDO, 0, (conn.bundle.r0, conn.bundle.r1), "theta")
        self.conn = conn

    def _evaluate(self, args):
        return self.conn.theta(args[0])


class CurvatureForm(NLForm):
    """``k(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``, read off column by column on the bundle frame."""

    def __init__(self, conn: Conn):
        super().__init__(conn.carrier, 2, ENDO, 0, (conn.bundle.r0, conn.bundle.r1), "curvature")
        self.conn = conn

    def _evaluate(self, args):
        # on the constant frame sections e_c, nabla_Y e_c is column c of theta(Y), so
        # the columns of [nabla_X, nabla_Y] - nabla_[X,Y] assemble to
        # X(theta_Y) - Y(theta_X) + theta_X theta_Y - theta_Y theta_X - theta_[X,Y]
        X, Y = args
        nabla = self.conn
        C = nabla.carrier
        tx, ty = nabla.theta(X), nabla.theta(Y)
        rx, ry = C.anchor_of(X), C.anchor_of(Y)
        return (ty.map(lambda a: apply_derivation(rx, a)) - tx.map(lambda a: apply_derivation(ry, a))
                + tx * ty - ty * tx - nabla.theta(C.bracket(X, Y)))


# -- variants ---------------------------------------------------------------------

class MatrixConn(Conn):
    """``nabla = rho + theta`` with ``theta`` a function-linear endomorphism-valued one-form."""

    def __init__(self, carrier: Carrier, bundle: SuperBundle, theta: Mapping[int, EndMap] | TrueForm | None = None,
                 label: str = ""):
        super().__init__(carrier, bundle, label)
        if isinstance(theta, TrueForm):
            mats = {idx[0]: m for idx, m in theta.coeffs.items()}
        else:
            mats = dict(theta or {})
        for j, m in mats.items():
            if not 0 <= j < carrier.rank:
                raise IndexError(f"frame direction {j} out of range")
            if (m.r0, m.r1) != (bundle.r0, bundle.r1) or m.chart != bundle.chart:
                raise ValueError("theta entry does not match the bundle")
        self.mats = {j: m for j, m in sorted(mats.items()) if not m.is_zero()}

    @cached_property
    def theta_form(self) -> TrueForm:
        return TrueForm(self.carrier, 1, {(j,): m for j, m in self.mats.items()}, ENDO, (self.bundle.r0, self.bundle.r1))

    def theta(self, X: CSection) -> EndMap:
        out = self.bundle.zero_end()
        for j, m in self.mats.items():
            g = X.coeffs[j]
            if g:
                out = out + m * g
        return out

    def lift(self, chart: Chart) -> "MatrixConn":
        return MatrixConn(self.carrier.lift(chart), self.bundle.lift(chart),
                          {j: m.lift(chart) for j, m in self.mats.items()}, self.label)


class HTemplate:
    """``H(f, sum_j g_j e_j) = sum_{a,j} P_a(f) g_j Theta[a, j]``.

    ``P_0(f) = f`` and ``P_a(f) = df/dx_a`` for ``a >= 1`` (1-based
    coordinates); frame directions ``j`` are 0-based. Each ``Theta`` is odd.
    """

    def __init__(self, bundle: SuperBundle, entries: Mapping[tuple[int, int], EndMap]):
        self.bundle = bundle
        for (a, j), m in entries.items():
            if not 0 <= a <= bundle.chart.dim:
                raise IndexError(f"derivative index {a} out of range")
            if m.parity == 0 and not m.is_zero() or m.parity is None:
                raise ValueError(f"homotopy template entry ({a}, {j}) is not odd")
        self.entries = {k: m for k, m in sorted(entries.items()) if not m.is_zero()}

    def __call__(self, f: Poly, X: CSection) -> EndMap:
        out = self.bundle.zero_end()
        for (a, j), m in self.entries.items():
            g = X.coeffs[j]
            if not g:
                continue
            pf = f if a == 0 else f.derive(a - 1)
            if pf:
                out = out + m * (pf * g)
        return out

    def lift(self, chart: Chart) -> "HTemplate":
        return HTemplate(self.bundle.lift(chart), {k: m.lift(chart) for k, m in self.entries.items()})


class TemplateUTH(Conn):
    """A connection up to homotopy built from a matrix connection and a homotopy template.

    For ``X = sum_j g_j e_j``: ``nabla_X = sum_j g_j base_{e_j} + sum_j [H(g_j, e_j), partial]``.
    """

    def __init__(self, base: MatrixConn, H: HTemplate, label: str = ""):
        super().__init__(base.carrier, base.bundle, label)
        if H.bundle != base.bundle:
            raise ValueError("template and connection live on different bundles")
        self.base = base
        self.H = H

    def theta(self, X: CSection) -> EndMap:
        C = self.carrier
        d = self.bundle.partial
        out = self.base.theta(X)
        for j, g in enumerate(X.coeffs):
            if g:
                h = self.H(g, C.frame(j))
                if not h.is_zero():
                    out = out + _odd_bracket(h, d)
        return out

    def homotopy(self, f: Poly, X: CSection) -> EndMap:
        return self.H(f, X)

    def lift(self, chart: Chart) -> "TemplateUTH":
        return TemplateUTH(self.base.lift(chart), self.H.lift(chart), self.label)


class AffinePath(Conn):
    """``(1 - t) nabla0 + t nabla1`` on the cylinder, with ``nabla_{e_t} = d/dt``."""

    def __init__(self, c0: Conn, c1: Conn, label: str = ""):
        if c0.carrier != c1.carrier or c0.bundle != c1.bundle:
            raise ValueError("path endpoints must share carrier and bundle")
        cyl = cylinder_carrier(c0.carrier)
        super().__init__(cyl, c0.bundle.lift(cyl.chart), label or "path")
        self.c0, self.c1 = c0, c1
        self.l0 = c0.lift(cyl.chart)
        self.l1 = c1.lift(cyl.chart)
        self.t = Poly.var(cyl.chart, cyl.chart.t_index)

    def _base_part(self, X: CSection) -> CSection:
        return CSection(X.coeffs[:-1])

    def theta(self, X: CSection) -> EndMap:
        Xb = self._base_part(X)
        return self.l0.theta(Xb) * (1 - self.t) + self.l1.theta(Xb) * self.t

    def homotopy(self, f: Poly, X: CSection) -> EndMap:
        Xb = self._base_part(X)
        return self.l0.homotopy(f, Xb) * (1 - self.t) + self.l1.homotopy(f, Xb) * self.t

    def at(self, value) -> "Conn":
        """The endpoint connection (``value`` 0 or 1)."""
        if value == 0:
            return self.c0
        if value == 1:
            return self.c1
        raise ValueError("only the endpoints t = 0, 1 are available")


class SuperConn(Conn):
    """``omega0 + nabla_core + sum_i omega_i`` with ``omega_i`` endomorphism-valued i-forms.

    As an operator on sections (the degree-one part) it acts like the core.
    """

    def __init__(self, core: Conn, omega0: EndMap | None = None, higher: Mapping[int, NLForm | TrueForm] | None = None,
                 label: str = ""):
        super().__init__(core.carrier, core.bundle, label)
        self.core = core
        self.omega0 = omega0 if omega0 is not None else core.bundle.zero_end()
        forms = {}
        for i, w in sorted((higher or {}).items()):
            if i < 2:
                raise ValueError("higher components start at form degree 2")
            if isinstance(w, TrueForm):
                w = ConstForm(w)
            if w.degree != i or w.kind != ENDO or w.carrier != core.carrier:
                raise ValueError(f"component {i} is not an endomorphism-valued {i}-form on the carrier")
            forms[i] = w
        self.higher = forms

    def theta(self, X):
        return self.core.theta(X)

    def homotopy(self, f, X):
        return self.core.homotopy(f, X)

    @property
    def odd_pieces(self) -> list[NLForm]:
        E = self.bundle
        ranks = (E.r0, E.r1)
        pieces = []
        if not self.omega0.is_zero():
            pieces.append(ConstForm(TrueForm(self.carrier, 0, {(): self.omega0}, ENDO, ranks, self.omega0.parity or 0),
                                    label="omega0"))
        pieces.extend(self.higher.values())
        return pieces

    def parity_notes(self) -> list[str]:
        """Components whose total parity is even, so the total operator is not odd."""
        notes = []
        if self.omega0.parity != 1 and not self.omega0.is_zero():
            notes.append("omega0 is not odd")
        for i, w in self.higher.items():
            if w.parity != 1:
                notes.append(f"omega{i} has E-parity {w.epar}, total parity {w.parity}")
        return notes


# -- operations ---------------------------------------------------------------------

def conn_apply(nabla: Conn, X: CSection, s: Section) -> Section:
    """``nabla_X s``."""
    nabla.carrier._check_section(X)
    if (s.r0, s.r1) != (nabla.bundle.r0, nabla.bundle.r1):
        raise ValueError("section of a different bundle")
    return nabla.apply(X, s)


def _probe_fields(C: Carrier) -> list[tuple[str, CSection]]:
    out = [(f"e{j + 1}", C.frame(j)) for j in range(C.rank)]
    if C.rank:
        out.append(("X_dense", dense_section(C)))
    return out


def _probe_sections(E: SuperBundle) -> list[tuple[str, Section]]:
    out = [(f"s{c + 1}", E.frame(c)) for c in range(E.rank)]
    if E.rank and E.chart.dim:
        out.append(("s_dense", _dense_bundle_section(E)))
    return out


def check_connection(nabla: Conn, probe_degree: int = 2) -> Report:
    """Axioms (i) parity and commutation with ``partial``, (ii) Leibniz, (iii) function-linearity."""
    rep = Report(f"check_connection[{nabla.label or type(nabla).__name__}]")
    rep.notes["probe_degree"] = probe_degree
    C, E = nabla.carrier, nabla.bundle
    d = E.partial
    fs = list(monomials(C.chart, probe_degree, 1))
    for xname, X in _probe_fields(C):
        th = nabla.theta(X)
        rep.expect_zero("i-even", xname, th.graded_part(1))
        rho = C.anchor_of(X)
        comm = d.map(lambda a: apply_derivation(rho, a)) + th * d - d * th
        rep.expect_zero("i-partial", xname, comm)
        for sname, s in _probe_sections(E):
            for f in fs:
                lhs = nabla.apply(X, s * f)
                rhs = nabla.apply(X, s) * f + s * C.act(X, f)
                rep.expect_zero("ii-leibniz", f"X={xname}, s={sname}, f={f}", lhs - rhs)
        for f in fs:
            for sname, s in _probe_sections(E):
                res = nabla.apply(X * f, s) - nabla.apply(X, s) * f
                rep.expect_zero("iii-linear", f"X={xname}, f={f}, s={sname}", res)
    return rep


def _homotopy_fn(H) -> Callable[[Poly, CSection], EndMap]:
    if isinstance(H, Conn):
        return H.homotopy
    return H


def check_uth(nabla: Conn, H=None, probe_degree: int = 2) -> Report:
    """``nabla_{fX} s - f nabla_X s = [H(f, X), partial] s`` on probes, with ``H(f, X)`` odd."""
    H = _homotopy_fn(H) if H is not None else nabla.homotopy
    rep = Report(f"check_uth[{nabla.label or type(nabla).__name__}]")
    rep.notes["probe_degree"] = probe_degree
    C, E = nabla.carrier, nabla.bundle
    d = E.partial
    for f in monomials(C.chart, probe_degree, 1):
        for xname, X in _probe_fields(C):
            h = H(f, X)
            rep.expect_zero("homotopy-odd", f"H({f}, {xname})", h.graded_part(0))
            hd = _odd_bracket(h, d)
            for sname, s in _probe_sections(E):
                res = nabla.apply(X * f, s) - nabla.apply(X, s) * f - hd * s
                rep.expect_zero("uth", f"f={f}, X={xname}, s={sname}", res)
    return rep


def check_higher(nabla_or_H1, H2=None, bundle: SuperBundle | None = None, carrier: Carrier | None = None,
                 probe_degree: int = 2) -> Report:
    """``f H1(g, X) - H1(fg, X) + H1(f, gX) = [H2(f, g, X), partial]`` on probe triples.

    ``nabla_or_H1`` is a connection (its homotopy is used) or a callable
    ``(f, X) -> EndMap``; then ``bundle`` and ``carrier`` must be given.
    ``H2 = None`` means ``H2 = 0``.
    """
    if isinstance(nabla_or_H1, Conn):
        bundle = bundle or nabla_or_H1.bundle
        carrier = carrier or nabla_or_H1.carrier
    elif isinstance(nabla_or_H1, HTemplate):
        bundle = bundle or nabla_or_H1.bundle
    if bundle is None or carrier is None:
        raise ValueError("bundle and carrier are needed for a bare homotopy")
    H1 = _homotopy_fn(nabla_or_H1)
    d = bundle.partial
    rep = Report("check_higher")
    rep.notes["probe_degree"] = probe_degree
    fs = list(monomials(carrier.chart, probe_degree, 1))
    for f in fs:
        for g in fs:
            for xname, X in _probe_fields(carrier):
                lhs = H1(g, X) * f - H1(f * g, X) + H1(f, X * g)
                rhs = _odd_bracket(H2(f, g, X), d) if H2 is not None else bundle.zero_end()
                rep.expect_zero("higher-homotopy", f"f={f}, g={g}, X={xname}", lhs - rhs)
    return rep


def curvature(nabla: Conn) -> CurvatureForm:
    """The curvature two-form, cached on the connection."""
    return nabla.curvature_form


def d_nabla(nabla: Conn, form: NLForm) -> NLForm:
    """Extension of ``T -> [nabla_X, T]`` to endomorphism-valued forms."""
    if form.kind != ENDO:
        raise TypeError("d_nabla acts on endomorphism-valued forms")
    if form.carrier != nabla.carrier or form.ranks != (nabla.bundle.r0, nabla.bundle.r1):
        raise ValueError("form and connection live on different carriers or bundles")
    return KoszulForm(nabla, form)


def _assemble_closed(form: NLForm, probe_degree: int) -> TrueForm:
    C = form.carrier
    if form.degree > C.rank:
        return TrueForm.zero(C, form.degree)
    alpha = assemble_true_form(form, probe_degree)
    dalpha = exterior_d(alpha)
    if not dalpha.is_zero():
        raise ClosednessViolation(alpha, dalpha)
    return alpha


def chern_form(nabla: Conn, p: int, probe_degree: int = 2, normalize: bool = False) -> TrueForm:
    """``Str(k^p)`` as a true ``2p``-form, checked closed.

    Raw by default; ``normalize=True`` divides by ``p!``.
    """
    if p < 1:
        raise ValueError("p must be positive")
    alpha = _assemble_closed(SupertraceForm(nabla.curvature_power(p)), probe_degree)
    if normalize:
        alpha = alpha * Fraction(1, math.factorial(p))
    return alpha


def linearize(nabla: Conn, probe_degree: int = 2) -> MatrixConn:
    """The matrix connection agreeing with ``nabla`` on frame sections."""
    if isinstance(nabla, MatrixConn):
        return MatrixConn(nabla.carrier, nabla.bundle, dict(nabla.mats), nabla.label)
    C = nabla.carrier
    mats = {j: nabla.theta(C.frame(j)) for j in range(C.rank)}
    lin = MatrixConn(C, nabla.bundle, mats, f"lin({nabla.label or type(nabla).__name__})")
    rep = check_connection(lin, probe_degree)
    bad = rep.failed("i-even") + rep.failed("i-partial")
    if bad:
        raise ConnectionAxiomError(rep)
    return lin


def affine_path(c0: Conn, c1: Conn) -> AffinePath:
    """The cylinder connection ``(1 - t) c0 + t c1``."""
    return AffinePath(c0, c1)


def chern_simons(c0: Conn, c1: Conn, p: int, probe_degree: int = 2, normalize: bool = False) -> TrueForm:
    """Fiber integral of ``Str(k^p)`` along the affine path; ``d cs = Ch_p(c1) - Ch_p(c0)``."""
    alpha = chern_form(affine_path(c0, c1), p, probe_degree)
    cs = fiber_integrate(alpha)
    if normalize:
        cs = cs * Fraction(1, math.factorial(p))
    return cs


def check_form_uth(form: NLForm, bundle: SuperBundle, H: Callable | None = None, probe_degree: int = 2) -> Report:
    """Forms up to homotopy: values commute with ``partial``; ``f w(X..) - w(fX..) = [H(f, X..), partial]``.

    Without ``H`` the function-linearity defect must vanish outright.
    """
    rep = Report(f"check_form_uth[{form.label}]")
    C = form.carrier
    d = bundle.partial
    frame_tuples = _frame_tuples(C, form.degree)
    for names, args in frame_tuples:
        v = form(*args)
        pv = v.parity
        comm = v * d + d * v if pv == 1 else v * d - d * v
        if pv is None:
            comm = v.graded_part(0) * d - d * v.graded_part(0) + v.graded_part(1) * d + d * v.graded_part(1)
        rep.expect_zero("commutes-with-partial", names, comm)
        for f in monomials(C.chart, probe_degree, 1):
            if not args:
                break
            defect = v * f - form(args[0] * f, *args[1:])
            target = _odd_bracket(H(f, *args), d) if H is not None else bundle.zero_end()
            rep.expect_zero("linear-up-to-homotopy", f"f={f}, ({names})", defect - target)
    return rep


def _frame_tuples(C: Carrier, n: int):
    import itertools

    out = []
    for idx in itertools.combinations(range(C.rank), n):
        out.append((",".join(f"e{i + 1}" for i in idx), [C.frame(i) for i in idx]))
    return out


# -- superconnections --------------------------------------------------------------

def super_curvature(S: SuperConn) -> dict[tuple[int, int], NLForm]:
    """Homogeneous parts of ``k + sum_P d_nabla P + sum_{P,Q} P Q``, keyed by (degree, E-parity).

    ``P, Q`` run over omega0 and the higher components (ordered pairs); when
    all pieces are odd this is the square of the total operator.
    """
    terms: list[NLForm] = [S.core.curvature_form]
    pieces = S.odd_pieces
    for P in pieces:
        terms.append(KoszulForm(S.core, P))
    for P in pieces:
        for Q in pieces:
            terms.append(nl_product(P, Q))
    return _group(terms)


def _group(terms: Sequence[NLForm]) -> dict[tuple[int, int], NLForm]:
    groups: dict[tuple[int, int], list[NLForm]] = {}
    for w in terms:
        groups.setdefault((w.degree, w.epar), []).append(w)
    return {k: (ws[0] if len(ws) == 1 else SumForm([(1, w) for w in ws])) for k, ws in sorted(groups.items())}


def super_chern_form(S: SuperConn, p: int, probe_degree: int = 2, normalize: bool = False) -> list[TrueForm]:
    """Homogeneous components ``[deg 0, deg 1, ..., deg rank]`` of ``Str(F^p)``; each is checked closed."""
    if p < 1:
        raise ValueError("p must be positive")
    F = super_curvature(S)
    power = dict(F)
    for _ in range(p - 1):
        terms = []
        for a in power.values():
            for b in F.values():
                if a.degree + b.degree <= S.carrier.rank:
                    terms.append(nl_product(a, b))
        power = _group(terms) if terms else {}
    C = S.carrier
    by_degree: dict[int, list[NLForm]] = {}
    for (deg, epar), w in power.items():
        if epar == 0 and deg <= C.rank:
            by_degree.setdefault(deg, []).append(SupertraceForm(w))
    out = []
    for deg in range(C.rank + 1):
        ws = by_degree.get(deg)
        if not ws:
            out.append(TrueForm.zero(C, deg))
            continue
        form = ws[0] if len(ws) == 1 else SumForm([(1, w) for w in ws])
        alpha = _assemble_closed(form, probe_degree)
        if normalize:
            alpha = alpha * Fraction(1, math.factorial(p))
        out.append(alpha)
    return out
