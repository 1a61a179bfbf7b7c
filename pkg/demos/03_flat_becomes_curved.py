"""A flat connection whose quantization is curved.

On the trivial line bundle over the plane, ∇ = d + ω with
ω = x1 dx2 + x2 dx1 = d(x1 x2) is flat.  After twisting, the wedge of ω with
itself no longer vanishes and the curvature becomes -h dx1∧dx2.
"""
from twistcalc.cli import render_curvature
from twistcalc.connection import curvature
from twistcalc.scenario import bundled_scenario, load_scenario
from twistcalc.verify import Context

ctx = Context(load_scenario(bundled_scenario("moyal_r2.scn")))

for name in ("nablaV", "nablaW", "nablaL", "flat"):
    classical = ctx.connections[name]
    quantized = ctx.quantized(name)
    print(f"{name:7s} classical curvature: {render_curvature(ctx.U, curvature(classical), classical.module):16s}"
          f" quantized: {render_curvature(ctx.D, curvature(quantized), quantized.module)}")

# The same numbers come out of the command line:
#   twistcalc curvature moyal_r2.scn flat --quantized
