import random

import pytest
from hypothesis import given, strategies as st

from twistcalc.hopf import RMatrix
from twistcalc.morphism import (QuasiCommutativityRequired, adjoint_act, certify_quasi_commutative,
                                compare_maps, d_quantize, entry_map, kt_samples,
                                left_multiplication, random_elements, tau, tau_inverse,
                                tau_quotient,
                                verify_braid_relations, verify_braiding_equivariance,
                                verify_braiding_inverse, verify_d_alternative,
                                verify_d_homomorphism, verify_d_inverse, verify_intertwining,
                                verify_quantization_diagram, verify_right_linear_restriction,
                                verify_tensor_R_laws)

from oracles import moyal_oracle, to_sympy

monomials2 = st.tuples(st.integers(0, 2), st.integers(0, 2))


def test_quantized_left_multiplication_on_coordinates(mo):
    Dl = d_quantize(mo.U, mo.twist, left_multiplication(mo.A, mo.x(1)))
    out = Dl(mo.A.basis((), mo.x(2)))
    assert out.component(()) == mo.ring.parse("x1 x2 + 1/2 h")


@given(monomials2, monomials2)
def test_quantized_left_multiplication_is_star_multiplication(mo, a, f):
    a, f = mo.ring.monomial(a), mo.ring.monomial(f)
    Dl = d_quantize(mo.U, mo.twist, left_multiplication(mo.A, a))
    got = Dl(mo.A.basis((), f)).component(())
    assert to_sympy(got) == moyal_oracle(to_sympy(a), to_sympy(f), mo.ring.order)


def test_adjoint_action_on_left_multiplication(mo):
    # d1 ▶ l_a = l_{d1 ▷ a}
    P = left_multiplication(mo.A, mo.ring.parse("x1^2 x2"))
    expected = left_multiplication(mo.A, mo.ring.parse("2 x1 x2"))
    assert compare_maps(adjoint_act(mo.U, mo.alg.gen("d1"), P), expected, [])


def test_adjoint_action_of_a_generator_on_a_derivative(jo):
    # H ▶ E-derivative: [H, ∂] = [-2x∂, ∂] = 2∂ as operators
    P = entry_map(jo.A, jo.A, {((), ()): [(jo.ring.one(), "E")]}, "d")
    expected = entry_map(jo.A, jo.A, {((), ()): [(jo.ring.constant(2), "E")]}, "2d")
    assert compare_maps(adjoint_act(jo.U, jo.alg.gen("H"), P), expected, [])


def sample_maps(s):
    x = s.x(1)
    A, O1 = s.A, s.O1
    first = O1.labels[0]
    return [
        entry_map(A, A, {((), ()): [(x, "E")]}, "P"),
        entry_map(A, A, {((), ()): [(x * x, "")]}, "Q"),
        entry_map(O1, O1, {(first, first): [(x, "H")]}, "O"),
    ]


def test_quantization_laws_on_the_line(jo):
    P, Q, O = sample_maps(jo)
    U, t = jo.U, jo.twist
    assert verify_d_inverse(U, t, [P, Q, O])
    assert verify_d_alternative(U, t, [P, Q, O])
    assert verify_d_homomorphism(U, t, [(P, Q), (Q, P), (O, O)])
    alg = jo.alg
    assert verify_intertwining(U, jo.D, t, [(alg.gen("H"), P), (alg.gen("E"), Q),
                                            (alg.word("H", "E"), O)])


def test_quantization_deforms_multiplications_but_fixes_generators(jo):
    P, Q, _ = sample_maps(jo)
    # x∂ = -H/2 is invariant under the twist, multiplication by x^2 is not
    assert compare_maps(d_quantize(jo.U, jo.twist, P), P, [])
    v = compare_maps(d_quantize(jo.U, jo.twist, Q), Q, [])
    assert not v and v.first_failing_order == 1


def test_right_linear_maps_stay_right_linear(mo):
    P = left_multiplication(mo.O1, mo.x(1))
    assert P.right_linear
    assert verify_right_linear_restriction(mo.U, mo.D, mo.twist, [P], 1)


def test_braiding_of_constant_forms_is_the_flip(mo):
    D = mo.D
    x = D.rep(D.tensor_elements(mo.form("dx1"), mo.form("dx2")))
    assert tau(D, mo.RF, x) == D.rep(D.tensor_elements(mo.form("dx2"), mo.form("dx1")))


def test_braiding_laws(jo):
    D = jo.D
    rng = random.Random(5)
    pairs = [D.rep(D.tensor_elements(a, b))
             for a, b in zip(random_elements(jo.O1, 2, 4, rng), random_elements(jo.O1, 2, 4, rng))]
    triples = kt_samples(D, [jo.O1] * 3, 1)
    xis = [jo.alg.gen("H"), jo.alg.gen("E")]
    assert verify_braiding_inverse(D, jo.RF, pairs)
    assert verify_braiding_equivariance(D, jo.RF, xis, pairs)
    assert verify_braid_relations(D, jo.RF, triples)
    assert verify_braid_relations(D, jo.RF, triples, inverse=False)
    for x in pairs:
        assert tau_inverse(D, jo.RF, tau(D, jo.RF, x)) == x


def test_tensor_R_laws_and_quantization_diagram(jo):
    P, Q, O = sample_maps(jo)
    xis = [jo.alg.gen("H"), jo.alg.gen("E")]
    laws = verify_tensor_R_laws(jo.D, jo.RF, P, O, Q, O, P, xis, 1)
    assert set(laws) == {"equivariance", "associativity", "composition"}
    assert all(laws.values()), laws
    diagram = verify_quantization_diagram(jo.U, jo.D, jo.R1, P, O, 1)
    assert all(diagram.values()), diagram


def test_braided_structures_need_quasi_commutativity(jo):
    D = jo.D
    x = D.tensor(jo.O1, jo.O1).monomial_basis(1)[0]
    R1 = RMatrix.trivial(jo.alg)
    with pytest.raises(QuasiCommutativityRequired):
        tau_quotient(D, R1, x)
    v = certify_quasi_commutative(D, R1, [jo.O1], 1)
    assert not v and v.first_failing_order == 1
    with pytest.raises(QuasiCommutativityRequired):
        tau_quotient(D, R1, x)
    assert certify_quasi_commutative(D, jo.RF, [jo.O1], 1)
    assert tau_quotient(D, jo.RF, x).space is x.space


def test_kt_samples_cover_the_monomial_basis(mo):
    xs = list(kt_samples(mo.U, [mo.A, mo.A], 1))
    assert len(xs) == len(set(map(str, xs))) > 0
