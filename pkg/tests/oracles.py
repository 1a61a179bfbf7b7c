"""Closed-form oracles computed with sympy, independent of the package."""
from math import comb, factorial

import sympy

h, x1, x2 = sympy.symbols("h x1 x2")
X = (x1, x2)


def to_sympy(f):
    out = sympy.Integer(0)
    for (e, k), c in f.terms.items():
        term = sympy.Rational(c.numerator, c.denominator) * h ** k
        for i, p in enumerate(e):
            term *= X[i] ** p
        out += term
    return sympy.expand(out)


def truncate(expr, N):
    expr = sympy.expand(expr)
    return sum((expr.coeff(h, k) * h ** k for k in range(N + 1)), sympy.Integer(0))


def moyal_oracle(f, g, N):
    """Closed form of the Moyal product for θ^12 = 1:
    sum_k (h/2)^k / k! sum_j C(k,j) (-1)^(k-j) ∂1^j ∂2^(k-j) f · ∂2^j ∂1^(k-j) g."""
    out = sympy.Integer(0)
    for k in range(N + 1):
        inner = sympy.Integer(0)
        for j in range(k + 1):
            df = sympy.diff(f, x1, j, x2, k - j) if k else f
            dg = sympy.diff(g, x2, j, x1, k - j) if k else g
            inner += comb(k, j) * (-1) ** (k - j) * df * dg
        out += (h / 2) ** k / factorial(k) * inner
    return truncate(out, N)


def jordanian_oracle(m, g, N):
    """x^m ⋆ g = x^m (1 + h ∂)^m g on the line with H = -2x∂, E = ∂."""
    out = sympy.Integer(0)
    for j in range(m + 1):
        out += comb(m, j) * h ** j * sympy.diff(g, x1, j)
    return truncate(x1 ** m * out, N)
