"""The Moyal plane: star products, the commutator and the twisted R-matrix.

Run with ``python demos/01_moyal_plane.py``.
"""
from twistcalc.hopf import RMatrix, render_tensor, twist_r_matrix, verify_triangular, verify_yang_baxter
from twistcalc.scenario import bundled_scenario, load_scenario
from twistcalc.verify import Context

ctx = Context(load_scenario(bundled_scenario("moyal_r2.scn")), order=3)
ring = ctx.ring
x1, x2 = ring.var(1), ring.var(2)

print("truncation order", ctx.order)
print("twist F =", render_tensor(ctx.twist.F))
print()

# Coordinates stop commuting at first order in h.
print("x1 ⋆ x2 =", ctx.D.mul(x1, x2))
print("x2 ⋆ x1 =", ctx.D.mul(x2, x1))
print("[x1, x2]⋆ =", ctx.D.mul(x1, x2) - ctx.D.mul(x2, x1))

# Higher powers pick up h^2 and h^3 terms from the exponential.
f = ring.parse("x1^2 x2")
g = ring.parse("x1 x2^2")
print("x1²x2 ⋆ x1x2² =", ctx.D.mul(f, g))
print()

# The star product is associative although it is not commutative.
a, b, c = x1 + x2, ring.parse("x1 x2"), ring.parse("x2^2")
left = ctx.D.mul(ctx.D.mul(a, b), c)
right = ctx.D.mul(a, ctx.D.mul(b, c))
print("(a⋆b)⋆c == a⋆(b⋆c):", left == right)

# R^F = F21 F^-1 measures the failure of commutativity.
rF = twist_r_matrix(ctx.twist, RMatrix.trivial(ctx.alg))
print("R^F =", render_tensor(rF.R))
print("Yang-Baxter:", bool(verify_yang_baxter(rF)), " triangular:", bool(verify_triangular(rF)))
