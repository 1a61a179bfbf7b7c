import pytest
from hypothesis import given, strategies as st

from twistcalc.bimod import (FreeBimodule, ModuleError, phi, phi_inverse, phi_inverse_direct,
                             star_wedge, tensor_over_A, verify_coherence,
                             verify_quasi_commutative_module, verify_star_bimodule)


def test_exterior_derivative(mo):
    calc = mo.calc
    f = mo.ring.parse("x1^2 x2")
    df = calc.d(calc.function(f))
    assert df == mo.form("2 x1 x2 dx1 + x1^2 dx2")
    assert not calc.d(df)
    assert calc.d(mo.form("x1 dx2")) == mo.form("dx1∧dx2", 2)


def test_lie_derivative_on_forms(mo):
    U = mo.U
    assert U.act(mo.alg.gen("x1d1"), mo.form("dx1")) == mo.form("dx1")
    assert U.act(mo.alg.gen("d1"), mo.form("x1 dx2")) == mo.form("dx2")
    assert not U.act(mo.alg.gen("d2"), mo.form("dx2"))


def test_star_actions_on_one_forms(mo):
    D = mo.D
    x1 = mo.x(1)
    # constant coefficients are invariant under the translations
    assert D.right(mo.form("dx2"), x1) == D.left(x1, mo.form("dx2")) == mo.form("x1 dx2")
    assert D.right(mo.form("x2 dx1"), x1) == mo.form("x1 x2 dx1 - 1/2 h dx1")
    assert D.left(x1, mo.form("x2 dx1")) == mo.form("x1 x2 dx1 + 1/2 h dx1")


def test_star_wedge(mo):
    w = star_wedge(mo.D, mo.form("x1 dx1"), mo.form("x2 dx2"))
    assert w == mo.form("x1 x2 dx1∧dx2 + 1/2 h dx1∧dx2", 2)
    assert mo.D.wedge(mo.form("x1 dx1"), mo.form("x2 dx2")) == w
    assert not star_wedge(mo.D, mo.form("dx1"), mo.form("dx1"))


@pytest.mark.parametrize("setup", ["mo", "jo"])
def test_star_bimodule_laws(setup, request):
    s = request.getfixturevalue(setup)
    assert verify_star_bimodule(s.D, s.O1, 2)


def test_quasi_commutativity_needs_the_twisted_r_matrix(jo):
    assert verify_quasi_commutative_module(jo.D, jo.RF, jo.O1, 2)
    v = verify_quasi_commutative_module(jo.D, jo.R1, jo.O1, 2)
    assert not v and v.first_failing_order == 1
    assert verify_quasi_commutative_module(jo.U, jo.R1, jo.O1, 2)


def test_module_action_must_respect_brackets(mo):
    # [d1, x1d1] = d1 forces M_{d1} = [M_{d1}, M_{x1d1}] + d1(M_{x1d1}) - x1d1(M_{d1})
    x1 = {(((1, 0), 0)): 1}
    with pytest.raises(ModuleError):
        FreeBimodule(mo.real, [0], {"d1": {(0, 0): x1}}, name="bad")


def test_equivariant_line_module(mo):
    x1 = {(((1, 0), 0)): 1}
    x2 = {(((0, 1), 0)): 1}
    x1x2 = {(((1, 1), 0)): 1}
    L = FreeBimodule(mo.real, [0], {"d1": {(0, 0): x2}, "d2": {(0, 0): x1},
                                     "x1d1": {(0, 0): x1x2}, "x2d2": {(0, 0): x1x2}}, name="L")
    e = L.basis(0)
    assert mo.U.act(mo.alg.gen("d1"), e) == L.basis(0, mo.x(2))


def test_phi_on_coordinates(mo):
    D = mo.D
    A1 = FreeBimodule(mo.real, [0], name="A")
    v = A1.basis(0, mo.x(1))
    w = A1.basis(0, mo.x(2))
    y = phi(D, D.tensor_elements(v, w))
    # (f̄^α ▷ x1) ⊗_A (f̄_α ▷ x2) collapses to the star product on A ⊗_A A
    expected = tensor_over_A(A1, A1).basis((0, 0), mo.D.mul(mo.x(1), mo.x(2)))
    assert y == expected


@given(st.integers(0, 2), st.integers(0, 2))
def test_phi_inverse_routes_agree(mo, i, j):
    D = mo.D
    e = mo.O1.basis((0,), mo.ring.monomial((i, j)))
    f = mo.O1.basis((1,), mo.ring.monomial((j, i)))
    x = D.tensor_elements(e, f)
    y = phi(D, x)
    assert phi_inverse(D, y) == x
    assert phi_inverse_direct(D, y) == x


def test_phi_coherence(jo):
    assert verify_coherence(jo.D, jo.O1, jo.O1, jo.O1, 2)


def test_phi_coherence_detects_a_truncated_twist(jo):
    # dx is not invariant under H, so every twist leg acts on the basis forms;
    # cutting F^{-1} after first order breaks coherence at second order
    cut = jo.twist.F_inv.truncate(1)
    v = verify_coherence(jo.D, jo.O1, jo.O1, jo.O1, 2, phi2=lambda world, x: phi(world, x, cut))
    assert not v and v.first_failing_order == 2
