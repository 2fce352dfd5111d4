"""Exact, chart-local Chern character forms from connections up to homotopy."""

from .adjoint import (
    AdjointComplex,
    CanonicalAdjoint,
    adjoint_complex,
    adjoint_sign_resolution,
    canonical_adjoint_conn,
    g_connection_from_classical,
    vanishing_report,
)
from .carrier import (
    Carrier,
    CSection,
    action_carrier,
    aff1_carrier,
    carrier_bracket,
    carrier_check,
    cylinder_carrier,
    lie_algebra_carrier,
    tangent_carrier,
)
from .conn import (
    AffinePath,
    HTemplate,
    MatrixConn,
    SuperConn,
    TemplateUTH,
    affine_path,
    check_connection,
    check_form_uth,
    check_higher,
    check_uth,
    chern_form,
    chern_simons,
    conn_apply,
    curvature,
    d_nabla,
    linearize,
    super_chern_form,
)
from .forms import (
    ClosednessViolation,
    LinearityViolation,
    NLForm,
    RuleForm,
    TrueForm,
    anchor_pullback,
    assemble_true_form,
    commutator,
    exterior_d,
    fiber_integrate,
    nl_d,
    nl_eval,
    nl_product,
    restrict_t,
)
from .report import Report
from .ring import Chart, Poly, VField, derive, parse_poly, vf_apply, vf_bracket
from .superlin import EndMap, Section, SuperBundle, check_partial, scommutator, supertrace

__version__ = "0.1.0"
from .scenario import Scenario, ScenarioError, parse_scenario, run
