"""Exact arithmetic in the ground ring Q[[h]] truncated at a fixed order.

Every algebraic object in the package carries the truncation order ``N``
explicitly; two objects built for different orders never mix.

Internally, the larger structures (polynomials, Hopf elements, operators)
do not store a :class:`Series` per coefficient.  They keep sparse dicts
keyed by ``(basis_key, k)`` where ``k`` is the power of ``h``, which makes
truncation a matter of dropping keys with ``k > N``.  The helpers at the
bottom of this module implement that representation.
"""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

Scalar = Fraction


class ConfigurationError(ValueError):
    """Objects built for incompatible sessions were combined."""


class NotInvertibleError(ArithmeticError):
    pass


def scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not accepted; use a Fraction or a 'p/q' string")
    return Fraction(x)


def render_scalar(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Truncation:
    """The session context: power of ``h`` beyond which terms are discarded."""

    order: int

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 0:
            raise ConfigurationError(f"truncation order must be a non-negative int, got {self.order!r}")

    def series(self, coeffs: Iterable = ()) -> "Series":
        return Series(coeffs, self.order)

    def zero(self) -> "Series":
        return Series((), self.order)

    def one(self) -> "Series":
        return Series((1,), self.order)

    def h(self, power: int = 1) -> "Series":
        if power > self.order:
            return self.zero()
        return Series([0] * power + [1], self.order)

    def parse(self, text: str) -> "Series":
        return Series.parse(text, self.order)


class Series:
    """A truncated power series ``c0 + c1 h + ... + cN h^N`` with rational coefficients.

    Immutable.  The coefficient tuple always has length ``N + 1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable, order: int):
        cs = [scalar(c) for c in coeffs]
        if len(cs) > order + 1:
            # silently truncating a caller's higher terms is intended
            cs = cs[: order + 1]
        cs.extend([Fraction(0)] * (order + 1 - len(cs)))
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def _check(self, other: "Series"):
        if self.order != other.order:
            raise ConfigurationError(
                f"truncation order mismatch: {self.order} vs {other.order}")

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, str)):
            return Series((other,), self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Series([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    __radd__ = __add__

    def __neg__(self):
        return Series([-a for a in self.coeffs], self.order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = self.order
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return Series(out, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = Series((1,), self.order)
        for _ in range(k):
            out = out * self
        return out

    def invert(self) -> "Series":
        """Multiplicative inverse, computed order by order."""
        a = self.coeffs
        if a[0] == 0:
            raise NotInvertibleError(f"series {self} has zero constant term")
        n = self.order
        b = [Fraction(0)] * (n + 1)
        b[0] = 1 / a[0]
        for k in range(1, n + 1):
            s = sum((a[i] * b[k - i] for i in range(1, k + 1)), Fraction(0))
            b[k] = -s / a[0]
        return Series(b, n)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.invert()

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def lowest_order(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def __repr__(self):
        return f"Series({self})"

    def __str__(self):
        return render_series_terms({k: c for k, c in enumerate(self.coeffs) if c})

    @classmethod
    def parse(cls, text: str, order: int) -> "Series":
        coeffs = parse_series_terms(text)
        if coeffs and max(coeffs) > order:
            coeffs = {k: c for k, c in coeffs.items() if k <= order}
        out = [Fraction(0)] * (order + 1)
        for k, c in coeffs.items():
            out[k] += c
        return cls(out, order)


def render_series_terms(coeffs: dict[int, Fraction]) -> str:
    parts = []
    for k in sorted(coeffs):
        c = coeffs[k]
        if k == 0:
            body = render_scalar(abs(c))
        elif k == 1:
            body = f"{render_scalar(abs(c))}*h"
        else:
            body = f"{render_scalar(abs(c))}*h^{k}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    sign, body = parts[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_SERIES_TERM = re.compile(
    r"^(?P<coef>\d+(?:/\d+)?)?\s*\*?\s*(?P<h>h(?:\s*\^\s*(?P<pow>\d+))?)?$")


def parse_series_terms(text: str) -> dict[int, Fraction]:
    """Parse ``"1 - 1*h + 1/2*h^2"`` style text into ``{power: coefficient}``."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty series literal")
    if s[0] not in "+-":
        s = "+" + s
    if "".join(re.findall(r"[+-][^+-]+", s)) != s:
        raise ValueError(f"cannot parse series literal {text!r}")
    out: dict[int, Fraction] = defaultdict(Fraction)
    for sign, body in re.findall(r"([+-])([^+-]+)", s):
        m = _SERIES_TERM.match(body)
        if not m or (m.group("coef") is None and m.group("h") is None):
            raise ValueError(f"cannot parse series term {body!r} in {text!r}")
        try:
            c = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {body!r}") from None
        k = 0
        if m.group("h"):
            k = int(m.group("pow")) if m.group("pow") else 1
        out[k] += -c if sign == "-" else c
    return {k: c for k, c in out.items() if c}


# ---------------------------------------------------------------------------
# sparse (key, h-power) -> Fraction dictionaries

def lc_clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def lc_add(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + scale * v
    return lc_clean(out)


def lc_scale(a: dict, c) -> dict:
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def lc_scale_series(a: dict, s: Series) -> dict:
    """Multiply every coefficient of ``a`` by the series ``s`` (truncating)."""
    n = s.order
    out = defaultdict(Fraction)
    for (key, k), v in a.items():
        for j, c in enumerate(s.coeffs):
            if c and k + j <= n:
                out[(key, k + j)] += v * c
    return lc_clean(out)


def lc_shift(a: dict, power: int, order: int) -> dict:
    """Multiply by ``h**power``."""
    return {(key, k + power): v for (key, k), v in a.items() if k + power <= order}


def lc_series_of(a: dict, key, order: int) -> Series:
    cs = [Fraction(0)] * (order + 1)
    for (kk, k), v in a.items():
        if kk == key:
            cs[k] += v
    return Series(cs, order)


def lc_group(a: dict, order: int) -> dict:
    """Regroup ``{(key, k): c}`` into ``{key: Series}``."""
    grouped: dict = {}
    for (key, k), v in a.items():
        grouped.setdefault(key, [Fraction(0)] * (order + 1))[k] += v
    return {key: Series(cs, order) for key, cs in grouped.items()}


def lc_from_series(key, s: Series) -> dict:
    return {(key, k): c for k, c in enumerate(s.coeffs) if c}


def lc_lowest_order(a: dict) -> int | None:
    ks = [k for (_, k), v in a.items() if v]
    return min(ks) if ks else None


def lc_at_order(a: dict, k: int) -> dict:
    return {key: v for (key, kk), v in a.items() if kk == k and v}
