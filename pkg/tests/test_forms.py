import pytest
from hypothesis import given

from uthchern import (
    Chart,
    EndMap,
    LinearityViolation,
    MatrixConn,
    RuleForm,
    SuperBundle,
    TrueForm,
    aff1_carrier,
    anchor_pullback,
    assemble_true_form,
    curvature,
    cylinder_carrier,
    exterior_d,
    fiber_integrate,
    nl_d,
    nl_product,
    parse_poly,
    restrict_t,
    tangent_carrier,
)
from uthchern.conn import dense_section
from uthchern.forms import SupertraceForm, SumForm, shuffles

from conftest import R1, R2, R3, polys

T2 = tangent_carrier(R2)
T3 = tangent_carrier(R3)
AFF = aff1_carrier()


def dx(i, C=T2):
    return TrueForm.coframe(C, i)


def test_shuffles_count_and_signs():
    sh = list(shuffles(1, 1))
    assert sorted(s for s, _, _ in sh) == [-1, 1]
    assert len(list(shuffles(2, 2))) == 6


def test_eval_coframe():
    assert dx(0).as_nlform()(T2.frame(1)).is_zero()
    assert dx(0).as_nlform()(T2.frame(0)).constant_term() == 1


def test_product_of_coframes():
    w = nl_product(dx(0).as_nlform(), dx(1).as_nlform())
    assert w(T2.frame(0), T2.frame(1)).constant_term() == 1
    assert w(T2.frame(1), T2.frame(0)).constant_term() == -1
    assert w(T2.frame(0), T2.frame(0)).is_zero()


def test_degree_zero_factor_is_pointwise():
    f = TrueForm.function(T2, "x*y").as_nlform()
    w = nl_product(f, dx(1).as_nlform())
    X = T2.section(["1", "y^2"])
    assert w(X) == parse_poly("x*y^3", R2)


def test_product_node_antisymmetric():
    a = RuleForm(T2, 1, "scalar", lambda X: X.coeffs[0].derive(1) + X.coeffs[1] * parse_poly("x", R2))
    b = dx(1).as_nlform()
    w = nl_product(a, b)
    X, Y = T2.section(["x", "1"]), T2.section(["y", "x*y"])
    assert w(X, Y) == -w(Y, X)


def test_curvature_node_value():
    E = SuperBundle(R2, 2, 0)
    N = E.endmap([[0, 1], [0, 0]])
    nab = MatrixConn(T2, E, {1: N * parse_poly("x", R2)})
    assert curvature(nab)(T2.frame(0), T2.frame(1)) == N


def test_odd_endo_product_matches_operator_composition():
    E = SuperBundle(R2, 1, 1)
    A = TrueForm.endo(T2, 1, {(0,): E.endmap([[0, "x"], ["y", 0]]), (1,): E.endmap([[0, 1], ["x*y", 0]])}, (1, 1))
    B = TrueForm.endo(T2, 1, {(0,): E.endmap([[0, "y^2"], [1, 0]]), (1,): E.endmap([[0, "x"], [2, 0]])}, (1, 1))
    s = RuleForm(T2, 0, "section", lambda: E.section(["x + y", "x*y"]), ranks=(1, 1))
    s1 = RuleForm(T2, 1, "section", lambda X: E.section([X.coeffs[0].derive(1), X.coeffs[1].derive(0) + X.coeffs[0]]), ranks=(1, 1))
    X, Y, Z = T2.frame(0), dense_section(T2), T2.section(["y", "x^2"])
    a, b = A.as_nlform(), B.as_nlform()
    for sec, args in ((s, (X, Y)), (s1, (X, Y, Z))):
        lhs = nl_product(nl_product(a, b), sec)
        rhs = nl_product(a, nl_product(b, sec))
        assert lhs(*args) == rhs(*args)


def test_nl_d_on_functions_is_anchor_action():
    f = parse_poly("x^3 + 2*x", R1)
    df = nl_d(AFF, TrueForm.function(AFF, f).as_nlform())
    assert df(AFF.frame(1)) == parse_poly("x", R1) * f.derive(0)
    assert df(AFF.frame(0)) == f.derive(0)


def test_nl_d_three_terms():
    w = TrueForm(T2, 1, {(1,): "x"}).as_nlform()
    assert nl_d(T2, w)(T2.frame(0), T2.frame(1)).constant_term() == 1


def test_nl_d_squared_zero_on_nonlinear_forms():
    w = RuleForm(AFF, 1, "scalar", lambda X: X.coeffs[0].derive(0) + X.coeffs[1].derive(0) * parse_poly("x^2", R1))
    dd = nl_d(AFF, nl_d(AFF, w))
    X, Y, Z = AFF.frame(0), AFF.section(["x", "1"]), dense_section(AFF)
    assert dd(X, Y, Z).is_zero()


def test_nl_d_leibniz():
    a = RuleForm(T2, 1, "scalar", lambda X: X.coeffs[0].derive(0) * parse_poly("y", R2) + X.coeffs[1].derive(1))
    b = TrueForm(T2, 1, {(0,): "y", (1,): "x^2"}).as_nlform()
    lhs = nl_d(T2, nl_product(a, b))
    rhs = SumForm([(1, nl_product(nl_d(T2, a), b)), (-1, nl_product(a, nl_d(T2, b)))])
    args = (T2.frame(0), dense_section(T2), T2.section(["x", "y"]))
    assert lhs(*args) == rhs(*args)


def test_assemble_round_trip():
    a = dx(0)
    assert assemble_true_form(a.as_nlform()) == a
    b = TrueForm(T3, 2, {(0, 1): "x*z", (1, 2): "y - 1"})
    assert assemble_true_form(b.as_nlform()) == b


def test_assemble_curvature_supertrace():
    E = SuperBundle(R2, 1, 1)
    nab = MatrixConn(T2, E, {1: E.endmap([["x", 0], [0, "x*y"]])})
    alpha = assemble_true_form(SupertraceForm(curvature(nab)))
    assert alpha == TrueForm(T2, 2, {(0, 1): "1 - y"})


def test_assemble_rejects_nonlinear_rule():
    rule = RuleForm(T2, 1, "scalar", lambda X: X.coeffs[0].derive(0))
    with pytest.raises(LinearityViolation) as e:
        assemble_true_form(rule)
    assert e.value.probe == "x" and str(e.value.residual) == "1"


def test_exterior_d_examples():
    assert exterior_d(TrueForm(T2, 1, {(1,): "x"})) == TrueForm(T2, 2, {(0, 1): 1})
    e1 = TrueForm.coframe(AFF, 0)
    assert exterior_d(e1) == TrueForm(AFF, 2, {(0, 1): -1})


@given(polys(R3), polys(R3), polys(R3))
def test_dd_zero_tangent(a, b, c):
    alpha = TrueForm(T3, 1, {(0,): a, (1,): b, (2,): c})
    assert exterior_d(exterior_d(alpha)).is_zero()
    assert exterior_d(exterior_d(TrueForm.function(T3, a))).is_zero()


@given(polys(R1, 3), polys(R1, 3))
def test_dd_zero_aff1(a, b):
    assert exterior_d(exterior_d(TrueForm(AFF, 1, {(0,): a, (1,): b}))).is_zero()
    assert exterior_d(exterior_d(TrueForm.function(AFF, a))).is_zero()


def test_fiber_integrate_examples():
    Z = cylinder_carrier(T2)
    # dt ^ (x dy) = -x dy ^ dt
    assert fiber_integrate(TrueForm(Z, 2, {(1, 2): "-x"})) == TrueForm(T2, 1, {(1,): "x"})
    assert fiber_integrate(TrueForm(Z, 2, {(0, 2): "-t^2"})) == TrueForm(T2, 1, {(0,): "1/3"})
    assert fiber_integrate(TrueForm(Z, 2, {(0, 1): "t"})).is_zero()
    with pytest.raises(ValueError):
        fiber_integrate(TrueForm(T2, 1, {(0,): 1}))


def test_restrict_t():
    Z = cylinder_carrier(T2)
    a = TrueForm(Z, 2, {(0, 1): "t*x + 1", (0, 2): "x"})
    assert restrict_t(a, 1) == TrueForm(T2, 2, {(0, 1): "x + 1"})


def test_anchor_pullback_examples():
    T1 = tangent_carrier(R1)
    assert anchor_pullback(AFF, TrueForm.coframe(T1, 0)) == TrueForm(AFF, 1, {(0,): 1, (1,): "x"})
    b = TrueForm(T2, 1, {(0,): "x*y", (1,): "y"})
    assert anchor_pullback(T2, b) == b


@given(polys(R1, 3))
def test_anchor_pullback_is_cochain_map(f):
    T1 = tangent_carrier(R1)
    for alpha in (TrueForm.function(T1, f), TrueForm(T1, 1, {(0,): f})):
        assert anchor_pullback(AFF, exterior_d(alpha)) == exterior_d(anchor_pullback(AFF, alpha))


def test_pullback_along_planar_action():
    C2 = tangent_carrier(R2)
    from uthchern import action_carrier
    # sl2 action on the plane: x d/dy, y d/dx, x d/dx - y d/dy
    C = action_carrier(R2, [["0", "x"], ["y", "0"], ["x", "-y"]],
                       {(0, 1): [0, 0, 1], (0, 2): [-2, 0, 0], (1, 2): [0, 2, 0]})
    from uthchern import carrier_check
    assert carrier_check(C).passed
    alpha = TrueForm(C2, 1, {(0,): "x*y", (1,): "y^2 + x"})
    assert anchor_pullback(C, exterior_d(alpha)) == exterior_d(anchor_pullback(C, alpha))
