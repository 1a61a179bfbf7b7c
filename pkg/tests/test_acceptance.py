"""The nine acceptance criteria, one test each.

Every criterion prints a PASS/FAIL line in the terminal summary (see
``conftest.py``); run ``pytest tests/test_acceptance.py -v`` to see them.
"""
import functools
import time

import pytest

from twistcalc.bimod import phi, verify_coherence, verify_quasi_commutative_module
from twistcalc.connection import quantize_connection, curvature
from twistcalc.funcalg import star_commutator, verify_quasi_commutative_algebra
from twistcalc.hopf import (HopfAlgebra, LiePresentation, RMatrix, build_twist, twist_r_matrix,
                            verify_cocycle, verify_inverse, verify_normalization,
                            verify_triangular, verify_yang_baxter)
from twistcalc.morphism import (d_quantize, kt_samples, verify_braid_relations,
                                verify_d_homomorphism, verify_d_inverse, verify_intertwining,
                                verify_quasi_left_linearity)
from twistcalc.scenario import bundled_scenario, load_scenario
from twistcalc.verify import Context, run_suite, star_associativity_verdict

from conftest import record_criterion

MOYAL = "moyal_r2.scn"
JORDANIAN = "jordanian_line.scn"
BOTH = (MOYAL, JORDANIAN)


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                note = fn(*args, **kwargs)
            except BaseException as e:
                record_criterion(number, title, False, f"{type(e).__name__}: {str(e)[:160]}")
                raise
            took = time.perf_counter() - start
            record_criterion(number, title, True, (note + ", " if note else "") + f"{took:.1f} s")
        return run
    return wrap


def scenario(name):
    return load_scenario(bundled_scenario(name))


def context(name, **kw):
    return Context(scenario(name), **kw)


def assert_pass(v, what):
    assert v, f"{what}: failed at h^{v.first_failing_order} on {v.sample}"


def assert_fails_at_first_order(v, what):
    assert not v, f"{what} unexpectedly held with R = 1⊗1"
    assert v.first_failing_order == 1, f"{what} first failed at h^{v.first_failing_order}"


def suite(name, ids, **kw):
    report = run_suite(scenario(name), ids, **kw)
    for r in report.results:
        assert r.status in ("pass", "skip"), f"{name}: {r.id} {r.status}: {r.sample or r.detail}"
    for i in ids:
        assert report.result(i).status == "pass", f"{name}: {i} {report.result(i).detail}"
    return report


# --------------------------------------------------------------------------

AFFINE = LiePresentation(["d1", "d2", "x1d1", "x2d2"],
                         {("d1", "x1d1"): {"d1": 1}, ("d2", "x2d2"): {"d2": 1}})
SL = LiePresentation(["H", "E"], {("H", "E"): {"E": 2}})


def twist_at(kind, N):
    if kind == "moyal":
        return build_twist(("moyal", HopfAlgebra(AFFINE, N), ["d1", "d2"], [[0, 1], [-1, 0]]))
    return build_twist(("jordanian", HopfAlgebra(SL, N), "H", "E"))


@criterion(1, "Moyal and Jordanian twists: cocycle, normalization and inverse at N = 2, 3, 4")
def test_criterion_1_twist_validity():
    slowest = 0.0
    for N in (2, 3, 4):
        for kind in ("moyal", "jordanian"):
            start = time.perf_counter()
            t = twist_at(kind, N)
            assert_pass(verify_cocycle(t), f"{kind} cocycle N={N}")
            assert_pass(verify_normalization(t), f"{kind} normalization N={N}")
            assert_pass(verify_inverse(t), f"{kind} inverse N={N}")
            took = time.perf_counter() - start
            assert took < 10, f"{kind} at N={N} took {took:.1f} s"
            slowest = max(slowest, took)
    return f"slowest run {slowest:.2f} s"


@criterion(2, "star associativity on all monomial triples up to degree 4; [x1, x2]⋆ = h")
def test_criterion_2_star_algebra():
    counts = []
    for name in BOTH:
        ctx = context(name, degree=4)
        v = star_associativity_verdict(ctx, 4)
        assert_pass(v, f"{name} associativity")
        counts.append(v.detail)
    ctx = context(MOYAL)
    comm = star_commutator(ctx.real, ctx.twist, ctx.ring.var(1), ctx.ring.var(2))
    assert comm == ctx.ring.parse("h"), f"[x1, x2]⋆ = {comm}"
    return " + ".join(counts)


@criterion(3, "D_F homomorphism, intertwining and inverse on 50 seeded samples at N = 3")
def test_criterion_3_quantization_map():
    for name in BOTH:
        ctx = context(name, order=3)
        maps = ctx.map_samples(100, "acceptance")
        pairs = list(zip(maps[::2], maps[1::2]))
        assert len(pairs) >= 50
        assert_pass(verify_d_homomorphism(ctx.U, ctx.twist, pairs), f"{name} homomorphism")
        rng = ctx.rng("acceptance-xi")
        assert_pass(verify_intertwining(ctx.U, ctx.D, ctx.twist,
                                        [(rng.choice(ctx.xis), P) for P in maps[:50]]),
                    f"{name} intertwining")
        assert_pass(verify_d_inverse(ctx.U, ctx.twist, maps[:50]), f"{name} inverse")
    return "50 pairs, 50 maps per twist"


@criterion(4, "R^F satisfies Yang-Baxter and triangularity at N = 3; braid relations on Ω⋆")
def test_criterion_4_braided_structure():
    for name in BOTH:
        ctx = context(name, order=3)
        rF = twist_r_matrix(ctx.twist, RMatrix.trivial(ctx.alg))
        assert_pass(verify_yang_baxter(rF), f"{name} Yang-Baxter")
        assert_pass(verify_triangular(rF), f"{name} triangularity")
        triples = kt_samples(ctx.D, [ctx.O1] * 3, 1)
        assert_pass(verify_braid_relations(ctx.D, rF, triples, inverse=True), f"{name} braid τ⁻¹")
        assert_pass(verify_braid_relations(ctx.D, rF, triples, inverse=False), f"{name} braid τ")


@criterion(5, "⊗_R equivariance, associativity, composition; quantization diagram; coherence")
def test_criterion_5_tensor_R_laws():
    ids = ["tensor_R.equivariance", "tensor_R.associativity", "tensor_R.composition",
           "phi.diagram", "phi.coherence"]
    for name in BOTH:
        suite(name, ids, order=2)
    # the coherence square must notice a twist cut after first order
    ctx = context(JORDANIAN)
    cut = ctx.twist.F_inv.truncate(1)
    v = verify_coherence(ctx.D, ctx.O1, ctx.O1, ctx.O1, 2,
                         phi2=lambda world, x: phi(world, x, cut))
    assert not v and v.first_failing_order == 2, "coherence missed a truncated twist"


@criterion(6, "quasi-commutativity holds with R^F and fails at order h with R = 1⊗1")
def test_criterion_6_quasi_commutativity():
    for name in BOTH:
        ctx = context(name)
        rF = twist_r_matrix(ctx.twist, RMatrix.trivial(ctx.alg))
        assert_pass(verify_quasi_commutative_algebra(ctx.real, ctx.twist, rF, ctx.degree),
                    f"{name} algebra")
        for S in [ctx.O1] + ctx.module_list:
            assert_pass(verify_quasi_commutative_module(ctx.D, rF, S, ctx.degree),
                        f"{name} {S.name}")
        Q = d_quantize(ctx.U, ctx.twist, ctx.map_samples(1, "acceptance", right_linear=True)[0])
        assert_pass(verify_quasi_left_linearity(ctx.D, rF, Q, 1), f"{name} left-linearity")
    # The Jordanian star product on the line is commutative, so the
    # untwisted control can only be exposed on the Moyal plane.
    ctx = context(MOYAL)
    R1 = RMatrix.trivial(ctx.alg)
    assert_fails_at_first_order(
        verify_quasi_commutative_algebra(ctx.real, ctx.twist, R1, ctx.degree), "algebra")
    assert_fails_at_first_order(
        verify_quasi_commutative_module(ctx.D, R1, ctx.O1, ctx.degree), "Ω1")
    Q = d_quantize(ctx.U, ctx.twist, ctx.map_samples(1, "acceptance", right_linear=True)[0])
    assert_fails_at_first_order(verify_quasi_left_linearity(ctx.D, R1, Q, 1), "left-linearity")
    return "R = 1⊗1 control on the Moyal plane"


CONNECTION_IDS = ["connection.quantized_leibniz", "connection.braided_leibniz",
                  "connection.sum_well_defined", "connection.sum_leibniz",
                  "connection.sum_associative", "connection.sum_diagram"]


@criterion(7, "quantized and braided Leibniz rules, braided sums and their diagram, < 2 min")
def test_criterion_7_connections():
    start = time.perf_counter()
    for name in BOTH:
        ctx = context(name)
        ranks = [ctx.connections[c].module.rank for c in ctx.sum_names]
        assert ranks == [1, 1, 1], f"sum factors have ranks {ranks}"
        suite(name, CONNECTION_IDS, order=2)
    took = time.perf_counter() - start
    assert took < 120, f"connection checks took {took:.0f} s"


@criterion(8, "curvature of sums, vanishing mixed term, twisted curvature, flat turns curved")
def test_criterion_8_curvature():
    suite(MOYAL, ["curvature.sum_identity", "curvature.sum_mixed_term",
                  "curvature.twisted_identity", "curvature.quantized_expectation"], order=2)
    ctx = context(MOYAL)
    flat = ctx.connections["flat"]
    e = flat.module.basis(0)
    assert not curvature(flat)(e), "ω = x1 dx2 + x2 dx1 should be flat"
    q = quantize_connection(ctx.U, ctx.D, flat)
    R = curvature(q)(e)
    assert R and R.lowest_order() == 1, "quantized curvature should start at order h"
    form = dict(ctx.D.split_last(R))[(0,)]
    assert form == ctx.calc.parse("-1 h dx1∧dx2", 2)
    return f"quantized flat curvature {form.space.render(form)}"


@criterion(9, "two full-suite runs give byte-identical machine reports")
def test_criterion_9_determinism():
    for name in BOTH:
        a = run_suite(scenario(name)).to_json().encode()
        b = run_suite(scenario(name), jobs=2).to_json().encode()
        assert a == b, f"{name} reports differ"
        assert run_suite(scenario(name)).ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
