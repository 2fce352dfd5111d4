"""The adjoint complex ``g --rho--> TM`` of a carrier and its canonical flat connection up to homotopy.

Vanishing of the characters is shown constructively: the canonical
connection is flat, so its Chern forms vanish identically, and for any other
``g``-connection on the same complex the Chern-Simons form along the affine
path is an explicit primitive of that connection's Chern form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .carrier import Carrier, CSection, aff1_carrier, carrier_check, tangent_carrier
from .conn import (
    Conn,
    ConnectionAxiomError,
    MatrixConn,
    _probe_fields,
    check_connection,
    check_higher,
    check_uth,
    chern_form,
    chern_simons,
)
from .forms import anchor_pullback, exterior_d
from .report import Report
from .ring import Chart, Poly
from .superlin import EndMap, SuperBundle, check_partial

__all__ = [
    "AdjointComplex",
    "CanonicalAdjoint",
    "CarrierCheckError",
    "adjoint_complex",
    "adjoint_sign_resolution",
    "canonical_adjoint_conn",
    "g_connection_from_classical",
    "homotopy_sign",
    "vanishing_report",
]


class CarrierCheckError(ValueError):
    def __init__(self, report: Report):
        self.report = report
        super().__init__(report.summary())


@dataclass(frozen=True, eq=False)
class AdjointComplex:
    """``E0 = g`` (rank r), ``E1 = TM`` (rank dim), ``partial`` = anchor on ``E0 -> E1``."""

    carrier: Carrier
    bundle: SuperBundle

    @property
    def rank(self) -> int:
        return self.carrier.rank

    @property
    def tm_rank(self) -> int:
        return self.bundle.r1


def _adjoint_bundle(C: Carrier, tm_rank: int) -> SuperBundle:
    even_to_odd = [[C.anchor[j][i] for j in range(C.rank)] for i in range(tm_rank)]
    return SuperBundle.from_blocks(C.chart, C.rank, tm_rank, even_to_odd=even_to_odd, name=f"adj({C.name})")


def adjoint_complex(C: Carrier, probe_degree: int = 2) -> AdjointComplex:
    rep = carrier_check(C, probe_degree)
    if not rep.passed:
        raise CarrierCheckError(rep)
    A = AdjointComplex(C, _adjoint_bundle(C, C.chart.dim))
    assert check_partial(A.bundle).passed
    return A


class CanonicalAdjoint(Conn):
    """``nabla_X Y = [X, Y]`` on ``g``, ``nabla_X V = [rho(X), V]`` on ``TM``.

    The homotopy is ``H(f, X)(Y) = 0``, ``H(f, X)(V) = sigma V(f) X``.
    """

    def __init__(self, A: AdjointComplex, sigma: int, label: str = "canonical"):
        if sigma not in (1, -1):
            raise ValueError("sigma is +1 or -1")
        super().__init__(A.carrier, A.bundle, label)
        self.complex = A
        self.sigma = sigma

    def theta(self, X: CSection) -> EndMap:
        C = self.carrier
        r, n = self.bundle.r0, self.bundle.r1
        chart = C.chart
        cols = []
        for c in range(r):
            br = C.bracket(X, C.frame(c))
            cols.append(list(br.coeffs) + [Poly.zero(chart)] * n)
        rho = C.anchor_of(X)
        for k in range(n):
            # [rho(X), d/dx_k] = -sum_i d(rho_i)/dx_k d/dx_i
            cols.append([Poly.zero(chart)] * r + [-rho[i].derive(k) for i in range(n)])
        size = r + n
        return EndMap(chart, r, n, [[cols[c][i] for c in range(size)] for i in range(size)])

    def homotopy(self, f: Poly, X: CSection) -> EndMap:
        r, n = self.bundle.r0, self.bundle.r1
        chart = self.carrier.chart
        size = r + n
        rows = [[Poly.zero(chart)] * size for _ in range(size)]
        for k in range(n):
            fk = f.derive(k)
            if not fk:
                continue
            for j in range(r):
                if X.coeffs[j]:
                    rows[j][r + k] = fk * X.coeffs[j] * self.sigma
        return EndMap(chart, r, n, rows)

    def lift(self, chart: Chart) -> "CanonicalAdjoint":
        C = self.carrier.lift(chart)
        A = AdjointComplex(C, self.bundle.lift(chart))
        return CanonicalAdjoint(A, self.sigma, self.label)


@lru_cache(maxsize=None)
def adjoint_sign_resolution() -> dict:
    """Run ``check_uth`` for both signs of the adjoint homotopy on reference carriers.

    Returns the passing sign together with the reports for both signs. Linear
    probes suffice: a wrong sign already leaves the residual ``2 [H(x, X), partial]``.
    """
    carriers = [aff1_carrier(), tangent_carrier(Chart(("x", "y")))]
    reports = {}
    passing = []
    for sigma in (1, -1):
        reps = [check_uth(CanonicalAdjoint(adjoint_complex(C), sigma), probe_degree=1) for C in carriers]
        reports[sigma] = reps
        if all(r.passed for r in reps):
            passing.append(sigma)
    if len(passing) != 1:
        raise RuntimeError(f"adjoint homotopy sign is not determined: passing signs {passing}")
    return {"sigma": passing[0], "reports": reports}


def homotopy_sign() -> int:
    return adjoint_sign_resolution()["sigma"]


def canonical_adjoint_conn(A: AdjointComplex, sigma: int | None = None) -> CanonicalAdjoint:
    """The canonical connection up to homotopy, with the sign fixed by :func:`adjoint_sign_resolution`."""
    return CanonicalAdjoint(A, homotopy_sign() if sigma is None else sigma)


def g_connection_from_classical(A: AdjointComplex, aux: MatrixConn, probe_degree: int = 2) -> MatrixConn:
    """``nabla^g_X = aux_{rho(X)}`` for a classical connection ``aux`` on the same bundle."""
    C = A.carrier
    if aux.carrier != tangent_carrier(C.chart):
        raise ValueError("aux must be a connection over the tangent carrier of the same chart")
    if aux.bundle != A.bundle:
        raise ValueError("aux must live on the adjoint complex bundle")
    rep = check_connection(aux, probe_degree)
    if not rep.passed:
        raise ConnectionAxiomError(rep)
    mats = {}
    for j in range(C.rank):
        m = A.bundle.zero_end()
        for i, a in enumerate(C.anchor[j]):
            if a and i in aux.mats:
                m = m + aux.mats[i] * a
        mats[j] = m
    return MatrixConn(C, A.bundle, mats, f"rho^*({aux.label or 'aux'})")


def canonical_flatness(nabla: Conn) -> Report:
    """Curvature of ``nabla`` on all pairs of probe fields (frame plus one dense section)."""
    rep = Report("canonical_flatness")
    k = nabla.curvature_form
    fields = _probe_fields(nabla.carrier)
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            (na, X), (nb, Y) = fields[a], fields[b]
            rep.expect_zero("flat", f"k({na},{nb})", k(X, Y))
    return rep


def vanishing_report(C: Carrier, aux: MatrixConn, p_max: int = 1, probe_degree: int = 2) -> dict:
    """Constructive vanishing certificate for the adjoint complex of ``C``.

    ``aux`` is either a classical connection on the adjoint bundle over the
    tangent carrier (it is pulled back along the anchor) or directly a
    ``g``-connection over ``C``. For each ``p <= p_max`` the report lists the
    Chern forms of the canonical connection (zero) and of the ``g``-connection,
    the Chern-Simons primitive, and the residual
    ``d(cs_p) - (Ch_p(g-conn) - Ch_p(canonical))``.
    """
    crep = carrier_check(C, probe_degree)
    out: dict = {"carrier": C.name, "carrier_check": crep.to_dict()}
    if not crep.passed:
        out["passed"] = False
        return out
    A = adjoint_complex(C, probe_degree)
    can = canonical_adjoint_conn(A)
    flat = canonical_flatness(can)
    uth = check_uth(can, probe_degree=probe_degree)
    higher = check_higher(can, None, probe_degree=probe_degree)
    out["sigma"] = can.sigma
    out["canonical_flatness"] = flat.to_dict()
    out["canonical_uth"] = uth.to_dict()
    out["canonical_higher"] = higher.to_dict()
    if aux.carrier == C:
        g_conn = aux
        classical = None
    else:
        g_conn = g_connection_from_classical(A, aux, probe_degree)
        classical = aux
    ok = flat.passed and uth.passed and higher.passed
    per_p = []
    for p in range(1, p_max + 1):
        ch_can = chern_form(can, p, probe_degree)
        ch_g = chern_form(g_conn, p, probe_degree)
        cs = chern_simons(can, g_conn, p, probe_degree)
        residual = exterior_d(cs) - (ch_g - ch_can)
        entry = {
            "p": p,
            "chern_canonical": ch_can.to_dict(),
            "chern_induced": ch_g.to_dict(),
            "chern_induced_TM_minus_g": (-ch_g).to_dict(),
            "cs": cs.to_dict(),
            "closed": exterior_d(ch_g).is_zero(),
            "exactness_residual": residual.to_dict(),
        }
        ok = ok and ch_can.is_zero() and residual.is_zero() and entry["closed"]
        if classical is not None:
            pulled = anchor_pullback(C, chern_form(classical, p, probe_degree))
            entry["pullback_residual"] = (ch_g - pulled).to_dict()
            ok = ok and (ch_g - pulled).is_zero()
        per_p.append(entry)
    out["per_p"] = per_p
    out["passed"] = ok
    return out
