import pytest

from twistcalc.bimod import FreeBimodule
from twistcalc.connection import (ConnectionError_, braided_leibniz_check, curvature,
                                  curvature_forms, curvature_sum_check, form_connection,
                                  is_equivariant, quantize_connection, sum_connections,
                                  twisted_curvature_check, verify_curvature_formula,
                                  verify_dual_connections, verify_extension_well_defined,
                                  verify_right_leibniz, verify_sum_associative,
                                  verify_sum_diagram, verify_sum_well_defined)
from twistcalc.morphism import certify_quasi_commutative


def last_form(world, y):
    """The Ω coefficient of a rank-one module element ``e ⊗ θ``."""
    parts = dict(world.split_last(y)) if y else {}
    return parts.get((0,))


def line_connection(s, text, V=None, name="∇"):
    V = V or FreeBimodule(s.real, [0], name="V")
    omega = {(0, 0): s.form(text)} if text else {}
    return form_connection(s.U, V, omega, name)


def equivariant_line(s):
    """A line bundle on which x1 dx2 + x2 dx1 is an invariant connection form."""
    x1 = {((1, 0), 0): 1}
    x2 = {((0, 1), 0): 1}
    x1x2 = {((1, 1), 0): 1}
    return FreeBimodule(s.real, [0], {"d1": {(0, 0): x2}, "d2": {(0, 0): x1},
                                       "x1d1": {(0, 0): x1x2}, "x2d2": {(0, 0): x1x2}}, name="L")


def test_classical_curvature_is_d_omega(mo):
    c = line_connection(mo, "x1 dx2")
    assert curvature_forms(c) == {(0, 0): mo.form("dx1∧dx2", 2)}
    assert verify_curvature_formula(c)
    e = c.module.basis(0)
    assert last_form(mo.U, curvature(c)(e)) == mo.form("dx1∧dx2", 2)


def test_rank_two_curvature_has_wedge_term(mo):
    V = FreeBimodule(mo.real, [0, 1], name="V2")
    omega = {(0, 1): mo.form("dx1"), (1, 0): mo.form("dx2")}
    c = form_connection(mo.U, V, omega)
    forms = curvature_forms(c)
    # ω^0_1 ∧ ω^1_0 = dx1∧dx2 and the opposite order on the other diagonal entry
    assert forms == {(0, 0): mo.form("dx1∧dx2", 2), (1, 1): mo.form("-1 dx1∧dx2", 2)}
    assert verify_curvature_formula(c)


def test_leibniz_and_extension(mo):
    c = line_connection(mo, "x1 dx2 + x2^2 dx1")
    assert verify_right_leibniz(c, 2)
    assert verify_extension_well_defined(c, 1)


def test_quantized_connection_on_a_coordinate(mo):
    c = line_connection(mo, "x1 dx2")
    q = quantize_connection(mo.U, mo.D, c)
    y = q(c.module.basis(0, mo.x(2)))
    assert last_form(mo.D, y) == mo.form("dx2 + x1 x2 dx2 + 1/2 h dx2")
    assert verify_right_leibniz(q, 2)


def test_flat_connection_acquires_curvature_after_quantization(mo):
    c = line_connection(mo, "x1 dx2 + x2 dx1")
    e = c.module.basis(0)
    assert not curvature(c)(e)
    q = quantize_connection(mo.U, mo.D, c)
    assert last_form(mo.D, curvature(q)(e)) == mo.form("-1 h dx1∧dx2", 2)
    out = twisted_curvature_check(mo.U, mo.D, c, 1)
    assert out["identity"]
    assert out["quantized_curvature_differs"]


def test_twisted_curvature_identity_on_the_line(jo):
    c = line_connection(jo, "x1^2 dx1")
    assert twisted_curvature_check(jo.U, jo.D, c, 1)["identity"]


def test_equivariance(mo):
    assert not is_equivariant(mo.U, line_connection(mo, "x1 dx2"))
    L = equivariant_line(mo)
    assert is_equivariant(mo.U, line_connection(mo, "x2 dx1 + x1 dx2", L))


def test_braided_leibniz_requires_the_twisted_r_matrix(jo):
    q = quantize_connection(jo.U, jo.D, line_connection(jo, "x1 dx1"))
    certify_quasi_commutative(jo.D, jo.RF, [q.module, jo.O1], 1)
    assert braided_leibniz_check(jo.D, jo.RF, q, 1)
    v = braided_leibniz_check(jo.D, jo.R1, q, 1, enforce=False)
    assert not v and v.first_failing_order == 1


@pytest.fixture(scope="module")
def line_sum(request):
    jo = request.getfixturevalue("jo")
    cs = [line_connection(jo, t, FreeBimodule(jo.real, [0], name=n), n)
          for t, n in (("x1 dx1", "V"), ("dx1", "W"), ("x1^2 dx1", "Z"))]
    qs = [quantize_connection(jo.U, jo.D, c) for c in cs]
    certify_quasi_commutative(jo.D, jo.RF, [q.module for q in qs] + [jo.O1], 1)
    certify_quasi_commutative(jo.U, jo.R1, [c.module for c in cs] + [jo.O1], 1)
    return jo, cs, qs


def test_braided_sum_of_quantized_connections(line_sum):
    jo, cs, qs = line_sum
    s = sum_connections(jo.D, jo.RF, qs[0], qs[1], 1)
    assert verify_sum_well_defined(s, 1)
    assert verify_right_leibniz(s, 1)
    assert verify_sum_associative(jo.D, jo.RF, *qs, degree=1)
    assert verify_sum_diagram(jo.U, jo.D, jo.R1, cs[0], cs[1], 1)


def test_curvature_of_braided_sum(mo):
    a = line_connection(mo, "x1 dx2", FreeBimodule(mo.real, [0], name="V"), "V")
    b = line_connection(mo, "x2 dx1", FreeBimodule(mo.real, [0], name="W"), "W")
    qa, qb = (quantize_connection(mo.U, mo.D, c) for c in (a, b))
    certify_quasi_commutative(mo.D, mo.RF, [qa.module, qb.module, mo.O1], 1)
    out = curvature_sum_check(mo.D, mo.RF, qa, qb, 1)
    assert out["identity"]
    # neither summand is equivariant, so the mixed term survives from first order
    v = out["mixed_term_vanishes"]
    assert not v and v.first_failing_order == 1


def test_mixed_curvature_term_vanishes_for_an_equivariant_summand(mo):
    plain = line_connection(mo, "x1 dx2")
    eq = line_connection(mo, "x2 dx1 + x1 dx2", equivariant_line(mo), "L")
    qp, qe = (quantize_connection(mo.U, mo.D, c) for c in (plain, eq))
    certify_quasi_commutative(mo.D, mo.RF, [qp.module, qe.module, mo.O1], 1)
    out = curvature_sum_check(mo.D, mo.RF, qp, qe, 1)
    assert out["identity"] and out["mixed_term_vanishes"]


def test_dual_connections(mo):
    c = line_connection(mo, "x1 dx2")
    out = verify_dual_connections(mo.U, c, mo.R1, 1)
    assert all(out.values()), out


def test_connections_are_built_classically(mo):
    with pytest.raises(ConnectionError_):
        form_connection(mo.D, FreeBimodule(mo.real, [0]), {})
    with pytest.raises(ConnectionError_):
        form_connection(mo.U, FreeBimodule(mo.real, [0]), {(0, 0): mo.form("dx1∧dx2", 2)})
