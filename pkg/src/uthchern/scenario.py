"""Declarative scenario files: parse, validate, run, report.

A scenario is a JSON document with one chart, an optional carrier (default:
the tangent carrier), a bundle, named connections and a task list. All frame
and coordinate indices in files and reports are 1-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import adjoint as adj
from .carrier import Carrier, action_carrier, carrier_check, tangent_carrier
from .conn import (
    Conn,
    HTemplate,
    MatrixConn,
    SuperConn,
    TemplateUTH,
    check_connection,
    check_higher,
    check_uth,
    chern_form,
    chern_simons,
    super_chern_form,
)
from .forms import ClosednessViolation, LinearityViolation, TrueForm, exterior_d
from .report import Report
from .ring import Chart, Poly, PolyParseError, parse_poly
from .superlin import EndMap, SuperBundle, check_partial

__all__ = ["Diagnostic", "Scenario", "ScenarioError", "parse_scenario", "run", "scenario_to_dict"]

TASK_TYPES = ("check", "chern", "transgress", "adjoint", "super")


@dataclass(frozen=True)
class Diagnostic:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


class ScenarioError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass
class Scenario:
    name: str
    chart: Chart
    carrier: Carrier
    bundle: SuperBundle
    connections: dict[str, Conn]
    tasks: list[dict]
    options: dict
    source: dict = field(repr=False)
    adjoint_complex: adj.AdjointComplex | None = None


class _Builder:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def err(self, where: str, message: str):
        self.diags.append(Diagnostic(where, message))

    def poly(self, text, chart: Chart, where: str) -> Poly | None:
        if isinstance(text, bool) or not isinstance(text, (str, int)):
            self.err(where, f"expected a polynomial string, got {text!r}")
            return None
        try:
            return parse_poly(str(text), chart)
        except PolyParseError as e:
            self.err(where, e.message + f" at position {e.pos}")
            return None

    def matrix(self, rows, chart: Chart, nrows: int, ncols: int, where: str):
        if not isinstance(rows, list) or len(rows) != nrows or any(not isinstance(r, list) or len(r) != ncols for r in rows):
            self.err(where, f"expected a {nrows}x{ncols} matrix")
            return None
        out = []
        for i, row in enumerate(rows):
            out_row = []
            for j, a in enumerate(row):
                p = self.poly(a, chart, f"{where}[{i}][{j}]")
                out_row.append(p if p is not None else Poly.zero(chart))
            out.append(out_row)
        return out

    def endmap(self, rows, bundle: SuperBundle, where: str) -> EndMap | None:
        m = self.matrix(rows, bundle.chart, bundle.rank, bundle.rank, where)
        if m is None:
            return None
        return EndMap(bundle.chart, bundle.r0, bundle.r1, m)


def _index(b: _Builder, value, upper: int, where: str) -> int | None:
    if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= upper:
        b.err(where, f"index {value!r} out of range 1..{upper}")
        return None
    return value - 1


def parse_scenario(text: str | dict) -> Scenario:
    """Parse and validate a scenario; raise :class:`ScenarioError` with every diagnostic found."""
    b = _Builder()
    if isinstance(text, dict):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError([Diagnostic(f"line {e.lineno}, column {e.colno}", f"syntax error: {e.msg}")]) from None
    if not isinstance(doc, dict):
        raise ScenarioError([Diagnostic("$", "scenario must be a JSON object")])

    known = {"name", "chart", "carrier", "bundle", "connections", "tasks", "options"}
    for k in doc:
        if k not in known:
            b.err(k, "unknown top-level key")

    try:
        chart = Chart(tuple(doc.get("chart", [])))
    except (ValueError, TypeError) as e:
        raise ScenarioError([Diagnostic("chart", str(e))]) from None

    carrier = _build_carrier(b, doc.get("carrier"), chart)
    if carrier is None:
        raise ScenarioError(b.diags)

    A = None
    bundle_doc = doc.get("bundle", "adjoint" if "bundle" not in doc and carrier.name != "tangent" else None)
    if bundle_doc == "adjoint":
        A = adj.AdjointComplex(carrier, adj._adjoint_bundle(carrier, chart.dim))
        bundle = A.bundle
    else:
        bundle = _build_bundle(b, bundle_doc, chart)
        if bundle is None:
            raise ScenarioError(b.diags)

    options = {"probe_degree": 2, "normalize": False}
    for k, v in (doc.get("options") or {}).items():
        if k == "probe_degree" and isinstance(v, int) and not isinstance(v, bool) and v >= 1:
            options[k] = v
        elif k == "normalize" and isinstance(v, bool):
            options[k] = v
        else:
            b.err(f"options.{k}", f"invalid option value {v!r}")

    conns: dict[str, Conn] = {}
    cdocs = doc.get("connections") or {}
    if not isinstance(cdocs, dict):
        b.err("connections", "expected an object of named connections")
        cdocs = {}
    # superconnections refer to other connections: build plain ones first
    order = sorted(cdocs, key=lambda n: (isinstance(cdocs[n], dict) and cdocs[n].get("type") == "superconn", n))
    for name in order:
        c = _build_conn(b, name, cdocs[name], carrier, bundle, A, conns)
        if c is not None:
            conns[name] = c

    tasks = doc.get("tasks") or []
    if not isinstance(tasks, list):
        b.err("tasks", "expected a list")
        tasks = []
    norm_tasks = []
    for i, t in enumerate(tasks):
        nt = _validate_task(b, t, f"tasks[{i}]", cdocs, A)
        if nt is not None:
            norm_tasks.append(nt)

    if b.diags:
        raise ScenarioError(b.diags)
    return Scenario(
        name=str(doc.get("name", "")),
        chart=chart,
        carrier=carrier,
        bundle=bundle,
        connections=conns,
        tasks=norm_tasks,
        options=options,
        source=doc,
        adjoint_complex=A,
    )


def _build_carrier(b: _Builder, cdoc, chart: Chart) -> Carrier | None:
    if cdoc is None or cdoc == "tangent" or (isinstance(cdoc, dict) and cdoc.get("type") == "tangent"):
        return tangent_carrier(chart)
    if not isinstance(cdoc, dict):
        b.err("carrier", "expected 'tangent' or a carrier block")
        return None
    rank = cdoc.get("rank")
    if isinstance(rank, bool) or not isinstance(rank, int) or rank < 0:
        b.err("carrier.rank", "expected a non-negative integer")
        return None
    anchor = cdoc.get("anchor", [[] for _ in range(rank)] if chart.dim == 0 else None)
    if not isinstance(anchor, list) or len(anchor) != rank:
        b.err("carrier.anchor", f"expected {rank} columns (one per frame element)")
        return None
    cols = []
    for j, col in enumerate(anchor):
        if not isinstance(col, list) or len(col) != chart.dim:
            b.err(f"carrier.anchor[{j}]", f"expected {chart.dim} components")
            return None
        cols.append([b.poly(a, chart, f"carrier.anchor[{j}][{i}]") or Poly.zero(chart) for i, a in enumerate(col)])
    structure: dict[tuple[int, int], list[Poly]] = {}
    for n, entry in enumerate(cdoc.get("structure", [])):
        where = f"carrier.structure[{n}]"
        if not isinstance(entry, list) or len(entry) != 4:
            b.err(where, "expected [i, j, k, poly]")
            continue
        i = _index(b, entry[0], rank, where + "[0]")
        j = _index(b, entry[1], rank, where + "[1]")
        k = _index(b, entry[2], rank, where + "[2]")
        p = b.poly(entry[3], chart, where + "[3]")
        if None in (i, j, k) or p is None:
            continue
        if i >= j:
            b.err(where, "structure triples need i < j")
            continue
        vec = structure.setdefault((i, j), [Poly.zero(chart)] * rank)
        vec[k] = vec[k] + p
    if b.diags:
        return None
    return action_carrier(chart, cols, structure, name=str(cdoc.get("name", "carrier")))


def _build_bundle(b: _Builder, bdoc, chart: Chart) -> SuperBundle | None:
    if not isinstance(bdoc, dict):
        b.err("bundle", "expected a bundle block or \"adjoint\"")
        return None
    r0, r1 = bdoc.get("r0"), bdoc.get("r1")
    for name, r in (("r0", r0), ("r1", r1)):
        if isinstance(r, bool) or not isinstance(r, int) or r < 0:
            b.err(f"bundle.{name}", "expected a non-negative integer")
            return None
    eo = bdoc.get("even_to_odd")
    oe = bdoc.get("odd_to_even")
    eo = b.matrix(eo, chart, r1, r0, "bundle.even_to_odd") if eo is not None else None
    oe = b.matrix(oe, chart, r0, r1, "bundle.odd_to_even") if oe is not None else None
    if b.diags:
        return None
    return SuperBundle.from_blocks(chart, r0, r1, even_to_odd=eo, odd_to_even=oe, name=str(bdoc.get("name", "")))


def _theta_mats(b, tdoc, carrier: Carrier, bundle: SuperBundle, where: str) -> dict[int, EndMap]:
    mats = {}
    if tdoc is None:
        return mats
    if not isinstance(tdoc, list) or len(tdoc) != carrier.rank:
        b.err(where, f"expected one matrix (or null) per frame direction, {carrier.rank} in total")
        return mats
    for j, m in enumerate(tdoc):
        if m is None:
            continue
        em = b.endmap(m, bundle, f"{where}[{j}]")
        if em is not None:
            mats[j] = em
    return mats


def _build_conn(b, name, cdoc, carrier, bundle, A, built) -> Conn | None:
    where = f"connections.{name}"
    if not isinstance(cdoc, dict):
        b.err(where, "expected a connection block")
        return None
    kind = cdoc.get("type")
    over = cdoc.get("over", "carrier")
    C = carrier
    if over == "tangent":
        C = tangent_carrier(carrier.chart)
    elif over != "carrier":
        b.err(where + ".over", "expected 'carrier' or 'tangent'")
        return None
    if kind == "matrix":
        return MatrixConn(C, bundle, _theta_mats(b, cdoc.get("theta"), C, bundle, where + ".theta"), label=name)
    if kind == "uth":
        base = MatrixConn(C, bundle, _theta_mats(b, cdoc.get("theta"), C, bundle, where + ".theta"), label=name)
        entries = {}
        for n, e in enumerate(cdoc.get("H", [])):
            w = f"{where}.H[{n}]"
            if not isinstance(e, dict):
                b.err(w, "expected {a, j, matrix}")
                continue
            a = e.get("a")
            if isinstance(a, bool) or not isinstance(a, int) or not 0 <= a <= carrier.chart.dim:
                b.err(w + ".a", f"expected 0..{carrier.chart.dim}")
                continue
            j = _index(b, e.get("j"), C.rank, w + ".j")
            m = b.endmap(e.get("matrix"), bundle, w + ".matrix")
            if j is None or m is None:
                continue
            if m.parity != 1 and not m.is_zero():
                b.err(w + ".matrix", "homotopy matrices must be odd")
                continue
            entries[(a, j)] = m
        return TemplateUTH(base, HTemplate(bundle, entries), label=name)
    if kind == "canonical-adjoint":
        if A is None:
            b.err(where, "canonical-adjoint needs \"bundle\": \"adjoint\"")
            return None
        sigma = cdoc.get("sigma")
        if sigma not in (None, 1, -1):
            b.err(where + ".sigma", "expected 1 or -1")
            return None
        c = adj.canonical_adjoint_conn(A, sigma)
        c.label = name
        return c
    if kind == "superconn":
        core = cdoc.get("core")
        if not isinstance(core, str) or core not in built:
            b.err(where + ".core", f"dangling connection reference {core!r}")
            return None
        core_c = built[core]
        om0 = cdoc.get("omega0")
        if om0 == "partial":
            omega0 = bundle.partial
        elif om0 is None:
            omega0 = None
        else:
            omega0 = b.endmap(om0, bundle, where + ".omega0")
        higher = {}
        for n, h in enumerate(cdoc.get("higher", [])):
            w = f"{where}.higher[{n}]"
            deg = h.get("degree") if isinstance(h, dict) else None
            if isinstance(deg, bool) or not isinstance(deg, int) or deg < 2:
                b.err(w + ".degree", "expected an integer >= 2")
                continue
            coeffs = {}
            for m_i, term in enumerate(h.get("form", [])):
                idx = term.get("indices") if isinstance(term, dict) else None
                if not isinstance(idx, list) or len(idx) != deg:
                    b.err(f"{w}.form[{m_i}].indices", f"expected {deg} indices")
                    continue
                idx0 = [_index(b, i, core_c.carrier.rank, f"{w}.form[{m_i}].indices") for i in idx]
                if None in idx0 or sorted(set(idx0)) != idx0:
                    b.err(f"{w}.form[{m_i}].indices", "indices must be strictly increasing")
                    continue
                m = b.endmap(term.get("matrix"), bundle, f"{w}.form[{m_i}].matrix")
                if m is not None:
                    coeffs[tuple(idx0)] = m
            higher[deg] = TrueForm.endo(core_c.carrier, deg, coeffs, (bundle.r0, bundle.r1))
        return SuperConn(core_c, omega0, higher, label=name)
    b.err(where + ".type", f"unknown connection type {kind!r}")
    return None


def _validate_task(b: _Builder, t, where: str, cdocs: dict, A) -> dict | None:
    if not isinstance(t, dict):
        b.err(where, "expected a task object")
        return None
    kind = t.get("task")
    if kind not in TASK_TYPES:
        b.err(where + ".task", f"unknown task {kind!r}; expected one of {', '.join(TASK_TYPES)}")
        return None

    def ref(key):
        name = t.get(key)
        if not isinstance(name, str) or name not in cdocs:
            b.err(f"{where}.{key}", f"dangling connection reference {name!r}")
            return None
        return name

    def prange(key="p"):
        p = t.get(key, [1])
        if isinstance(p, int) and not isinstance(p, bool):
            p = [p]
        if not isinstance(p, list) or not p or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in p):
            b.err(f"{where}.{key}", "expected a positive integer or a list of them")
            return None
        return p

    out = {"task": kind}
    if kind in ("check", "chern", "super"):
        out["connection"] = ref("connection")
    if kind in ("chern", "transgress", "super"):
        out["p"] = prange()
    if kind == "transgress":
        out["from"] = ref("from")
        out["to"] = ref("to")
    if kind == "adjoint":
        if A is None:
            b.err(where, "adjoint task needs \"bundle\": \"adjoint\"")
        out["aux"] = ref("aux")
        p_max = t.get("p_max", 1)
        if isinstance(p_max, bool) or not isinstance(p_max, int) or p_max < 1:
            b.err(where + ".p_max", "expected a positive integer")
        out["p_max"] = p_max
    if kind == "super" and isinstance(out.get("connection"), str):
        if cdocs[out["connection"]].get("type") != "superconn":
            b.err(where + ".connection", "super task needs a superconn connection")
    if kind == "check" and "expect" in t:
        if t["expect"] not in ("connection", "uth"):
            b.err(where + ".expect", "expected 'connection' or 'uth'")
        out["expect"] = t["expect"]
    if any(v is None for v in out.values()):
        return None
    return out


# -- serialization -------------------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    """Normalized document: polynomials re-printed canonically, key order stable."""
    return _normalize(s.source, s.chart)


def _normalize(value, chart: Chart):
    if isinstance(value, dict):
        return {k: _normalize(v, chart) for k, v in sorted(value.items())}
    if isinstance(value, list):
        return [_normalize(v, chart) for v in value]
    if isinstance(value, str):
        try:
            return str(parse_poly(value, chart))
        except PolyParseError:
            return value
    return value


# -- running ---------------------------------------------------------------------------

def _form(alpha: TrueForm) -> list[dict]:
    return alpha.to_dict()


def run(s: Scenario, probe_degree: int | None = None, normalize: bool | None = None) -> dict:
    """Execute tasks in order; per-task errors are recorded and execution continues."""
    pd = s.options["probe_degree"] if probe_degree is None else probe_degree
    norm = s.options["normalize"] if normalize is None else normalize
    crep = carrier_check(s.carrier, pd)
    prep = check_partial(s.bundle)
    report: dict[str, Any] = {
        "scenario": s.name,
        "chart": list(s.chart.vars),
        "carrier": s.carrier.name,
        "bundle": {"r0": s.bundle.r0, "r1": s.bundle.r1},
        "options": {"probe_degree": pd, "normalize": norm},
        "carrier_check": crep.to_dict(),
        "partial_check": prep.to_dict(),
        "tasks": [],
    }
    ok = crep.passed and prep.passed
    for t in s.tasks:
        try:
            entry, passed = _run_task(s, t, pd, norm)
        except (LinearityViolation, ClosednessViolation, ValueError, adj.CarrierCheckError) as e:
            entry, passed = {"task": t["task"], "error": f"{type(e).__name__}: {e}"}, False
        entry["passed"] = passed
        report["tasks"].append(entry)
        ok = ok and passed
    report["passed"] = ok
    return report


def _run_task(s: Scenario, t: dict, pd: int, norm: bool) -> tuple[dict, bool]:
    kind = t["task"]
    out: dict[str, Any] = {"task": kind}
    if kind == "check":
        c = s.connections[t["connection"]]
        out["connection"] = t["connection"]
        expect = t.get("expect", "connection" if isinstance(c, MatrixConn) else "uth")
        crep = check_connection(c, pd)
        urep = check_uth(c, probe_degree=pd)
        out["expect"] = expect
        if expect == "uth":
            # function-linearity is not required up to homotopy; record only whether it holds
            out["iii_linear_holds"] = not crep.failed("iii-linear")
            crep = _drop_identity(crep, "iii-linear")
        out["axioms"] = crep.to_dict()
        out["uth"] = urep.to_dict()
        passed = crep.passed and (expect == "connection" or urep.passed)
        if isinstance(c, adj.CanonicalAdjoint):
            hrep = check_higher(c, None, probe_degree=pd)
            out["higher"] = hrep.to_dict()
            passed = passed and hrep.passed
        return out, passed
    if kind == "chern":
        c = s.connections[t["connection"]]
        out["connection"] = t["connection"]
        out["forms"] = []
        for p in t["p"]:
            alpha = chern_form(c, p, pd, norm)
            out["forms"].append({"p": p, "form": _form(alpha)})
        return out, True
    if kind == "transgress":
        c0, c1 = s.connections[t["from"]], s.connections[t["to"]]
        out["from"], out["to"] = t["from"], t["to"]
        out["forms"] = []
        passed = True
        for p in t["p"]:
            cs = chern_simons(c0, c1, p, pd)
            ch0 = chern_form(c0, p, pd)
            ch1 = chern_form(c1, p, pd)
            residual = exterior_d(cs) - (ch1 - ch0)
            scale = Fraction(1, math.factorial(p)) if norm else 1
            out["forms"].append({
                "p": p,
                "cs": _form(cs * scale),
                "chern_from": _form(ch0 * scale),
                "chern_to": _form(ch1 * scale),
                "exactness_residual": _form(residual),
            })
            passed = passed and residual.is_zero()
        return out, passed
    if kind == "adjoint":
        aux = s.connections[t["aux"]]
        out["aux"] = t["aux"]
        rep = adj.vanishing_report(s.carrier, aux, t["p_max"], pd)
        out.update({k: v for k, v in rep.items() if k != "passed"})
        return out, rep["passed"]
    if kind == "super":
        c = s.connections[t["connection"]]
        out["connection"] = t["connection"]
        notes = c.parity_notes()
        if notes:
            out["parity_notes"] = notes
        out["components"] = []
        for p in t["p"]:
            comps = super_chern_form(c, p, pd, norm)
            out["components"].append({"p": p, "by_degree": [{"degree": a.degree, "form": _form(a)} for a in comps if not a.is_zero()]})
        return out, True
    raise ValueError(f"unknown task {kind}")


def _drop_identity(rep: Report, identity: str) -> Report:
    out = Report(rep.title, {k: n for k, n in rep.checked.items() if k != identity},
                 [v for v in rep.violations if v.identity != identity], dict(rep.notes))
    return out


def residual_lines(report: dict) -> list[str]:
    """Human-readable list of everything that failed in a report."""
    lines = []

    def visit(node, path):
        if isinstance(node, dict):
            if "violations" in node and node.get("violations"):
                for v in node["violations"]:
                    lines.append(f"{path}: {v['identity']} @ {v['where']}: residual {v['residual']}")
            for k, v in node.items():
                if k == "violations":
                    continue
                if k.endswith("residual") and v:
                    lines.append(f"{path}.{k}: {v}")
                elif k == "error":
                    lines.append(f"{path}: {v}")
                else:
                    visit(v, f"{path}.{k}" if path else k)
        elif isinstance(node, list):
            for i, v in enumerate(node):
                visit(v, f"{path}[{i}]")

    visit(report, "")
    return lines
