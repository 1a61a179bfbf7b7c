"""The Jordanian twist on the line, compared with its closed form.

For this twist x^m ⋆ g = x^m (1 + h d/dx)^m g, so star products of monomials
are easy to predict by hand.
"""
from math import comb, perm

from twistcalc.hopf import render_tensor, twisted_coproduct
from twistcalc.scenario import bundled_scenario, load_scenario
from twistcalc.verify import Context

ctx = Context(load_scenario(bundled_scenario("jordanian_line.scn")), order=3)
ring = ctx.ring


def by_hand(m, n):
    """x^m ⋆ x^n from the closed form: sum_k C(m,k) n!/(n-k)! h^k x^(m+n-k)."""
    terms = [f"{comb(m, k) * perm(n, k)} h^{k} x1^{m + n - k}"
             for k in range(min(n, ctx.order) + 1)]
    return ring.parse(" + ".join(terms))


for m, n in [(1, 1), (2, 3), (3, 2)]:
    product = ctx.D.mul(ring.parse(f"x1^{m}"), ring.parse(f"x1^{n}"))
    print(f"x^{m} ⋆ x^{n} = {product}   matches closed form: {product == by_hand(m, n)}")

# The line algebra stays commutative, but the coproduct does not.
H, E = ctx.alg.gen(0), ctx.alg.gen(1)
print()
print("Δ^F(E) =", render_tensor(twisted_coproduct(ctx.twist, E)))
print("Δ^F(H) =", render_tensor(twisted_coproduct(ctx.twist, H)))
