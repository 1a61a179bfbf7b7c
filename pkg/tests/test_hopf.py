from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twistcalc.hopf import (HopfAlgebra, HopfStructure, LiePresentation, PresentationError,
                            RMatrix, TwistRejected, build_twist, coproduct, antipode, counit,
                            parse_hopf, parse_tensor, render_tensor, twist_r_matrix,
                            verify_cocycle, verify_hopf_axioms, verify_quasitriangular,
                            verify_triangular, verify_yang_baxter)

# affine algebra of the line: [H, E] = 2E
SL = LiePresentation(["H", "E"], {("H", "E"): {"E": 2}})
# translations and dilations of the plane
AFF = LiePresentation(["d1", "d2", "x1d1", "x2d2"],
                      {("d1", "x1d1"): {"d1": 1}, ("d2", "x2d2"): {"d2": 1}})


def t(alg, text):
    return parse_tensor(text, alg)


def test_primitive_coproduct_and_antipode():
    alg = HopfAlgebra(AFF, 2)
    X = alg.gen("d1")
    assert coproduct(X) == t(alg, "d1 ⊗ 1 + 1 ⊗ d1")
    assert antipode(X) == -X
    assert counit(X) == alg.series(0)
    assert counit(alg.one()) == alg.series(1)


def test_coproduct_of_commuting_product():
    alg = HopfAlgebra(AFF, 1)
    XY = alg.word("d1", "d2")
    assert coproduct(XY) == t(alg, "d1 d2 ⊗ 1 + d1 ⊗ d2 + d2 ⊗ d1 + 1 ⊗ d1 d2")


def test_antipode_reverses_products():
    alg = HopfAlgebra(AFF, 1)
    # S(d1 x1d1) = x1d1 d1 = d1 x1d1 - [d1, x1d1] = d1 x1d1 - d1
    assert antipode(alg.word("d1", "x1d1")) == alg.word("d1", "x1d1") - alg.gen("d1")


def test_pbw_normal_form_uses_brackets():
    alg = HopfAlgebra(SL, 1)
    # E H = H E - [H, E] = H E - 2E
    assert alg.word("E", "H") == alg.word("H", "E") - alg.gen("E").scale(2)


def test_presentation_rejects_jacobi_violation():
    with pytest.raises(PresentationError):
        LiePresentation(["a", "b", "c"], {("a", "b"): {"c": 1}, ("b", "c"): {"a": 1},
                                          ("a", "c"): {"a": 1}})


words = st.lists(st.sampled_from(["H", "E"]), max_size=3)


@given(words, words)
def test_twisted_coproduct_is_multiplicative(u, v):
    alg = HopfAlgebra(SL, 2)
    tw = build_twist(("jordanian", alg, "H", "E"))
    st_ = HopfStructure(alg, tw)
    a, b = alg.word(*u), alg.word(*v)
    assert st_.coproduct(a * b) == st_.coproduct(a) * st_.coproduct(b)


def test_hopf_axioms_hold_before_and_after_twisting():
    alg = HopfAlgebra(SL, 3)
    samples = [alg.word(*w) for w in [(), ("H",), ("E",), ("H", "E"), ("E", "E")]]
    assert verify_hopf_axioms(HopfStructure(alg), samples)
    tw = build_twist(("jordanian", alg, "H", "E"))
    assert verify_hopf_axioms(HopfStructure(alg, tw), samples)


def test_jordanian_twisted_coproduct_closed_forms():
    N = 3
    alg = HopfAlgebra(SL, N)
    tw = build_twist(("jordanian", alg, "H", "E"))
    st_ = HopfStructure(alg, tw)
    E, H, one = alg.gen("E"), alg.gen("H"), alg.one()
    h = alg.h()
    one_plus_hE = one + E.scale(h)
    # (1 + hE)^{-1} as a geometric series
    inv = one
    for k in range(1, N + 1):
        inv = inv + alg.word(*["E"] * k).scale(alg.h(k) * (-1) ** k)
    assert one_plus_hE * inv == one
    assert st_.coproduct(E) == alg.tensor(E, one_plus_hE) + alg.tensor(one, E)
    assert st_.coproduct(H) == alg.tensor(H, inv) + alg.tensor(one, H)


def test_moyal_r_matrix_is_exponential_of_theta():
    alg = HopfAlgebra(AFF, 2)
    tw = build_twist(("moyal", alg, ["d1", "d2"], [[0, 1], [-1, 0]]))
    RF = twist_r_matrix(tw, RMatrix.trivial(alg))
    # exp(h(d1⊗d2 - d2⊗d1)) to second order
    expected = t(alg, "1 ⊗ 1 + (h) * d1 ⊗ d2 + (-h) * d2 ⊗ d1"
                      " + (1/2*h^2) * d1 d1 ⊗ d2 d2 + (-h^2) * d1 d2 ⊗ d1 d2"
                      " + (1/2*h^2) * d2 d2 ⊗ d1 d1")
    assert RF.R == expected
    assert verify_yang_baxter(RF)
    assert verify_triangular(RF)
    assert verify_quasitriangular(HopfStructure(alg, tw), RF, [alg.gen(g) for g in AFF.names])


def test_trivial_r_matrix_is_not_quasitriangular_after_twisting():
    alg = HopfAlgebra(SL, 2)
    tw = build_twist(("jordanian", alg, "H", "E"))
    v = verify_quasitriangular(HopfStructure(alg, tw), RMatrix.trivial(alg),
                               [alg.gen("H"), alg.gen("E")])
    assert not v and v.first_failing_order == 1


def test_truncated_exponential_fails_cocycle_at_second_order():
    alg = HopfAlgebra(AFF, 2)
    F = t(alg, "1 ⊗ 1 + (h) * d1 ⊗ d2")
    with pytest.raises(TwistRejected) as info:
        build_twist(("explicit", F, None))
    assert info.value.verdict.first_failing_order == 2
    # at first order the same element is a cocycle
    alg1 = HopfAlgebra(AFF, 1)
    assert verify_cocycle(build_twist(("explicit", t(alg1, "1 ⊗ 1 + (h) * d1 ⊗ d2"), None)))


def test_twist_constructors_validate_input():
    alg = HopfAlgebra(AFF, 1)
    with pytest.raises(TwistRejected):
        build_twist(("moyal", alg, ["d1", "d2"], [[0, 1], [1, 0]]))
    with pytest.raises(TwistRejected):
        build_twist(("moyal", alg, ["d1", "x1d1"], [[0, 1], [-1, 0]]))
    with pytest.raises(TwistRejected):
        build_twist(("jordanian", alg, "x1d1", "d1"))


def test_render_parse_round_trip():
    alg = HopfAlgebra(SL, 2)
    tw = build_twist(("jordanian", alg, "H", "E"))
    assert parse_tensor(render_tensor(tw.F), alg) == tw.F
    assert parse_hopf("(1/2*h) * H E", alg) == alg.word("H", "E").scale(Fraction(1, 2)).scale(alg.h())
