"""Acceptance criteria 1-8, exact in rational arithmetic.

Each criterion prints one ``criterion N: PASS|FAIL`` line. Run with pytest,
or directly as ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from uthchern import (
    Chart,
    EndMap,
    MatrixConn,
    SuperBundle,
    SuperConn,
    TrueForm,
    adjoint_complex,
    aff1_carrier,
    anchor_pullback,
    assemble_true_form,
    carrier_check,
    check_connection,
    check_higher,
    check_uth,
    chern_form,
    chern_simons,
    commutator,
    curvature,
    d_nabla,
    exterior_d,
    g_connection_from_classical,
    nl_d,
    nl_product,
    scommutator,
    super_chern_form,
    supertrace,
    tangent_carrier,
)
from uthchern.adjoint import CanonicalAdjoint, adjoint_sign_resolution, canonical_adjoint_conn, canonical_flatness
from uthchern.conn import dense_section
from uthchern.forms import RuleForm, SumForm
from uthchern.ring import Poly, monomials

ROOT = Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "scenarios" / "aff1.json"
GOLDEN = ROOT / "scenarios" / "aff1.report.json"

R2 = Chart(("x", "y"))
R3 = Chart(("x", "y", "z"))
R4 = Chart(("x", "y", "z", "w"))


def _report(n: int, ok: bool, started: float, what: str):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - started:.1f}s) {what}")


@pytest.fixture
def announce(capsys):
    def emit(n, ok, started, what):
        with capsys.disabled():
            _report(n, ok, started, what)
    return emit


# -- 1 -------------------------------------------------------------------------------

def _random_homogeneous(rng: random.Random, chart: Chart, r0: int, r1: int, parity: int) -> EndMap:
    basis = list(monomials(chart, 2))
    n = r0 + r1
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if (int(i >= r0) ^ int(j >= r0)) != parity or rng.random() < 0.3:
                row.append(Poly.zero(chart))
                continue
            p = Poly.zero(chart)
            for m in rng.sample(basis, rng.randint(1, 3)):
                p = p + m * rng.randint(-5, 5)
            row.append(p)
        rows.append(row)
    return EndMap(chart, r0, r1, rows)


def criterion_1() -> bool:
    rng = random.Random(20240611)
    for _ in range(200):
        r0, r1 = rng.randint(0, 3), rng.randint(0, 3)
        if r0 + r1 == 0:
            r0 = 1
        pa, pb = rng.randint(0, 1), rng.randint(0, 1)
        A = _random_homogeneous(rng, R2, r0, r1, pa)
        B = _random_homogeneous(rng, R2, r0, r1, pb)
        if not supertrace(scommutator(A, B, pa, pb)).is_zero():
            return False
    return True


def test_criterion_1(announce):
    t = time.perf_counter()
    ok = criterion_1()
    announce(1, ok, t, "supertrace of 200 random supercommutators vanishes")
    assert ok


# -- 2 -------------------------------------------------------------------------------

def r3_setup():
    T = tangent_carrier(R3)
    E = SuperBundle(R3, 2, 1)
    nab = MatrixConn(T, E, {
        0: E.endmap([[0, "z", 0], [0, 0, 0], [0, 0, 0]]),          # nilpotent off-diagonal part
        1: E.endmap([["x", "x*y", 0], [0, 0, 0], [0, 0, "x"]]),     # x dy
        2: E.endmap([[0, 0, 0], [0, "y", 0], [0, 0, 0]]),           # y dz
    }, "r3-example")
    return T, E, nab


def criterion_2() -> dict[str, bool]:
    T, E, nab = r3_setup()
    fr = [T.frame(i) for i in range(3)]
    X = dense_section(T)
    k = curvature(nab)
    w1 = TrueForm.endo(T, 1, {(0,): E.endmap([[0, 0, "x"], [0, 0, "y*z"], ["z", 1, 0]]),
                              (2,): E.endmap([[0, 0, 1], [0, 0, "x"], ["x*y", 0, 0]])}, (2, 1)).as_nlform()
    w0 = TrueForm.endo(T, 0, {(): E.endmap([["x*y", 1, 0], [0, "z", 0], [0, 0, "x"]])}, (2, 1)).as_nlform()
    sig = RuleForm(T, 1, "section",
                   lambda Y: E.section([Y.coeffs[0].derive(1) + Y.coeffs[2], Y.coeffs[1], Y.coeffs[0].derive(0)]),
                   ranks=(2, 1))
    out = {}

    # (a) Leibniz: d(a b) = d(a) b + (-1)^|a| a d(b)
    probes = {2: [(fr[0], X), (fr[1], fr[2]), (X, fr[2])], 3: [tuple(fr), (fr[0], X, fr[2]), (X, fr[1], fr[0])]}
    ok = True
    for a, b in ((w1, w0), (w0, w1), (w1, w1), (w0, k)):
        lhs = d_nabla(nab, nl_product(a, b))
        sign = -1 if a.parity else 1
        rhs = SumForm([(1, nl_product(d_nabla(nab, a), b)), (sign, nl_product(a, d_nabla(nab, b)))])
        for args in probes[lhs.degree]:
            ok &= (lhs(*args) - rhs(*args)).is_zero()
    out["a"] = ok

    # (b) d_nabla^2 = [k, -] on endomorphism-valued and section-valued probes
    ok = True
    for w in (w0, w1):
        dd = d_nabla(nab, d_nabla(nab, w))
        rhs = commutator(k, w)
        n = dd.degree
        for args in ([fr[0], X, fr[2]][:n], fr[:n], [X, fr[1], fr[2]][:n]):
            ok &= (dd(*args) - rhs(*args)).is_zero()
    dd = nl_d(nab, nl_d(nab, sig))
    rhs = nl_product(k, sig)
    for args in (fr, [fr[0], X, fr[2]]):
        ok &= (dd(*args) - rhs(*args)).is_zero()
    out["b"] = ok

    # (c) Bianchi on all coordinate triples
    dk = d_nabla(nab, k)
    out["c"] = all(dk(*args).is_zero() for args in itertools.product(fr, repeat=3))

    # (d) Chern forms are closed
    forms = [chern_form(nab, p) for p in (1, 2, 3)]
    out["d"] = all(exterior_d(f).is_zero() for f in forms) and not forms[0].is_zero()
    return out


def test_criterion_2(announce):
    t = time.perf_counter()
    res = criterion_2()
    ok = all(res.values())
    announce(2, ok, t, "Leibniz, d^2 = [k, -], Bianchi, closed Chern forms on R^3 rank (2,1) "
             + " ".join(f"({k}){'ok' if v else 'FAIL'}" for k, v in res.items()))
    assert ok


# -- 3 -------------------------------------------------------------------------------

def criterion_3() -> dict[str, bool]:
    T = tangent_carrier(R2)
    can = canonical_adjoint_conn(adjoint_complex(T))
    rep = check_connection(can)
    out = {
        "i,ii pass": not (rep.failed("i-even") or rep.failed("i-partial") or rep.failed("ii-leibniz")),
        "iii fails": bool(rep.failed("iii-linear")),
        "uth passes": check_uth(can).passed,
        "flat": canonical_flatness(can).passed,
    }
    chern = [chern_form(can, p) for p in (1, 2, 3)]  # p = 1 runs the linearity probes
    out["Ch_p = 0"] = all(c.is_zero() for c in chern)
    return out


def test_criterion_3(announce):
    t = time.perf_counter()
    res = criterion_3()
    ok = all(res.values())
    announce(3, ok, t, "canonical adjoint connection on R^2: " + ", ".join(k for k, v in res.items() if v))
    assert ok


# -- 4 -------------------------------------------------------------------------------

def criterion_4() -> dict[str, bool]:
    out = {}
    T = tangent_carrier(R2)
    L = SuperBundle(R2, 1, 0)
    c0 = MatrixConn(T, L, {})
    c1 = MatrixConn(T, L, {1: L.endmap([["x"]])})
    cs = chern_simons(c0, c1, 1)
    out["cs1 = x dy"] = cs == TrueForm(T, 1, {(1,): "x"})
    out["d cs1 = dx^dy"] = exterior_d(cs) == TrueForm(T, 2, {(0, 1): 1}) == chern_form(c1, 1) - chern_form(c0, 1)

    for chart in (R2, R4):
        Tn = tangent_carrier(chart)
        E = SuperBundle(chart, 2, 1)
        n = chart.dim
        m0 = {1: E.endmap([["x", 0, 0], [0, 0, 0], [0, 0, 0]]),
              n - 1: E.endmap([[0, 0, 0], ["x*y", 0, 0], [0, 0, "y"]])}
        m1 = {0: E.endmap([[0, "y", 0], [0, 0, 0], [0, 0, "x"]]),
              1: E.endmap([["x*y", 0, 0], [0, "x", 0], [0, 0, 0]])}
        if n == 4:
            m0[2] = E.endmap([[0, 0, 0], [0, "w", 0], [0, 0, 0]])
            m1[3] = E.endmap([[0, 0, 0], ["z", "w", 0], [0, 0, "x"]])
        n0, n1 = MatrixConn(Tn, E, m0), MatrixConn(Tn, E, m1)
        for p in (1, 2):
            cs = chern_simons(n0, n1, p)
            diff = chern_form(n1, p) - chern_form(n0, p)
            out[f"R^{n} p={p}"] = exterior_d(cs) == diff
        if n == 4:
            out["R^4 p=2 nontrivial"] = not (chern_form(n1, 2) - chern_form(n0, 2)).is_zero()
    return out


def test_criterion_4(announce):
    t = time.perf_counter()
    res = criterion_4()
    ok = all(res.values())
    announce(4, ok, t, "Chern-Simons transgression: " + ", ".join(f"{k}{'' if v else ' FAIL'}" for k, v in res.items()))
    assert ok


# -- 5 -------------------------------------------------------------------------------

def criterion_5() -> dict[str, bool]:
    out = {}
    for chart in (R2, R4):
        T = tangent_carrier(chart)
        n = chart.dim
        blocks0 = {1: [["x", "y"], [0, "x*y"]], n - 1: [["y", 0], ["x", 0]]}
        blocks1 = {0: [["y"]], 1: [["x^2"]]}
        if n == 4:
            blocks0[2] = [[0, "w"], [0, "x"]]
            blocks1[3] = [["z"]]
        E = SuperBundle(chart, 2, 1)
        E0, E1 = SuperBundle(chart, 2, 0), SuperBundle(chart, 1, 0)
        theta, th0, th1 = {}, {}, {}
        for j in range(n):
            b0 = blocks0.get(j, [[0, 0], [0, 0]])
            b1 = blocks1.get(j, [[0]])
            theta[j] = EndMap.from_blocks(chart, 2, 1,
                                          a00=[[_p(a, chart) for a in r] for r in b0],
                                          a11=[[_p(a, chart) for a in r] for r in b1])
            th0[j] = E0.endmap(b0)
            th1[j] = E1.endmap(b1)
        whole, f0, f1 = MatrixConn(T, E, theta), MatrixConn(T, E0, th0), MatrixConn(T, E1, th1)
        for p in (1, 2):
            lhs = chern_form(whole, p)
            out[f"R^{n} p={p}"] = lhs == chern_form(f0, p) - chern_form(f1, p)
            if 2 * p <= n:
                out[f"R^{n} p={p}"] &= not lhs.is_zero()
    return out


def _p(a, chart):
    return Poly.parse(str(a), chart)


def test_criterion_5(announce):
    t = time.perf_counter()
    res = criterion_5()
    ok = all(res.values())
    announce(5, ok, t, "split bundle Ch(E) = Ch(E0) - Ch(E1): " + ", ".join(f"{k}{'' if v else ' FAIL'}" for k, v in res.items()))
    assert ok


# -- 6 -------------------------------------------------------------------------------

def criterion_6() -> dict[str, bool]:
    C = aff1_carrier()
    out = {"carrier_check": carrier_check(C).passed}
    A = adjoint_complex(C)
    res = adjoint_sign_resolution()
    sigma = res["sigma"]
    can = canonical_adjoint_conn(A)
    out["uth with sigma"] = check_uth(can).passed and can.sigma == sigma
    out["opposite sign fails"] = not check_uth(CanonicalAdjoint(A, -sigma)).passed
    out["higher, H2 = 0"] = check_higher(can).passed
    out["k = 0"] = canonical_flatness(can).passed and assemble_true_form(curvature(can)).is_zero()

    E = A.bundle
    T1 = tangent_carrier(C.chart)
    aux = MatrixConn(T1, E, {0: E.endmap([["x", 1, 0], [0, "x", 0], [0, 0, "x"]])}, "aux")
    induced = g_connection_from_classical(A, aux)
    ch = chern_form(induced, 1)
    cs = chern_simons(can, induced, 1)
    out["closed"] = exterior_d(ch).is_zero()
    out["= pullback"] = ch == anchor_pullback(C, chern_form(aux, 1))
    out["= d cs1"] = exterior_d(cs) == ch

    # a g-connection with nonzero character; oracle: Str k(e1, e2) = d/dx(x) - 0 - 0 = 1
    g = MatrixConn(C, E, {0: E.endmap([[0, 1, 0], [0, 0, 0], [0, 0, 0]]),
                          1: E.endmap([["x", "x", 0], [0, "x", 0], [0, 0, "x"]])})
    chg = chern_form(g, 1)
    out["nonzero g-form = d cs1"] = (check_connection(g).passed and chg == TrueForm(C, 2, {(0, 1): 1})
                                     and exterior_d(chern_simons(can, g, 1)) == chg)
    return out


def test_criterion_6(announce):
    t = time.perf_counter()
    res = criterion_6()
    ok = all(res.values())
    announce(6, ok, t, "aff(1) vanishing pipeline: " + ", ".join(f"{k}{'' if v else ' FAIL'}" for k, v in res.items()))
    assert ok


# -- 7 -------------------------------------------------------------------------------

def criterion_7() -> dict[str, bool]:
    out = {}
    for chart in (R2, R4):
        T = tangent_carrier(chart)
        E = SuperBundle.from_blocks(chart, 2, 2, even_to_odd=[["1", "0"], ["0", "0"]])
        theta = {1: E.endmap([["x", 0, 0, 0], [0, "2*x", 0, 0], [0, 0, "x", 0], [0, 0, 0, 0]])}
        if chart.dim == 4:
            theta[3] = E.endmap([["z", 0, 0, 0], ["y", "z", 0, 0], [0, 0, "z", 0], [0, 0, 0, "x"]])
        core = MatrixConn(T, E, theta)
        w2 = TrueForm.endo(T, 2, {(0, 1): E.identity() * 3}, (2, 2))
        S = SuperConn(core, omega0=E.partial, higher={2: w2})
        ok = check_connection(core).passed
        for p in (1, 2):
            comps = super_chern_form(S, p)
            c = chern_form(core, p)
            same = all((comps[d] == c) if d == 2 * p else comps[d].is_zero() for d in range(len(comps)))
            out[f"R^{chart.dim} p={p}"] = ok and same and (2 * p > chart.dim or not c.is_zero())
    return out


def test_criterion_7(announce):
    t = time.perf_counter()
    res = criterion_7()
    ok = all(res.values())
    announce(7, ok, t, "superconnection with omega0 = partial, omega2 = 3 dx^dy Id: "
             + ", ".join(f"{k}{'' if v else ' FAIL'}" for k, v in res.items()))
    assert ok


# -- 8 -------------------------------------------------------------------------------

def _cli(*paths):
    """Run one CLI process per path, concurrently; return ``(exit, stdout, stderr)`` in order."""
    procs = [subprocess.Popen([sys.executable, "-m", "uthchern", str(p)], stdout=subprocess.PIPE,
                              stderr=subprocess.PIPE, cwd=ROOT) for p in paths]
    out = []
    for p in procs:
        so, se = p.communicate()
        out.append((p.returncode, so, se.decode()))
    return out


def criterion_8(tmp: Path) -> dict[str, bool]:
    doc = json.loads(SCENARIO.read_text())
    doc["carrier"]["structure"] = [[1, 2, 1, "x"]]
    bad = tmp / "corrupted.json"
    bad.write_text(json.dumps(doc))
    (c1, o1, _), (c2, o2, _), (cb, _, err) = _cli(SCENARIO, SCENARIO, bad)
    return {
        "exit 0": c1 == 0 and c2 == 0,
        "byte-identical": o1 == o2,
        "golden": o1 == GOLDEN.read_bytes(),
        "corrupted exit 1": cb == 1,
        "residual printed": "anchor-morphism @ rho[e1,e2]: residual (-x + 1)*d/dx" in err,
    }


def test_criterion_8(announce, tmp_path):
    t = time.perf_counter()
    res = criterion_8(tmp_path)
    ok = all(res.values())
    announce(8, ok, t, "CLI determinism and golden report: " + ", ".join(f"{k}{'' if v else ' FAIL'}" for k, v in res.items()))
    assert ok


if __name__ == "__main__":
    import tempfile

    failed = 0
    for n, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7), 1):
        t = time.perf_counter()
        res = fn()
        ok = res if isinstance(res, bool) else all(res.values())
        _report(n, ok, t, "")
        failed += not ok
    with tempfile.TemporaryDirectory() as d:
        t = time.perf_counter()
        ok = all(criterion_8(Path(d)).values())
        _report(8, ok, t, "")
        failed += not ok
    sys.exit(1 if failed else 0)
