"""Universal enveloping algebras in PBW normal form, twists and R-matrices.

Elements of ``U(g)`` are sparse dictionaries ``{(word, k): c}`` where
``word`` is a non-decreasing tuple of generator indices, ``k`` the power of
``h`` and ``c`` a ``Fraction``.  Tensor elements use tuples of words.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .series import (ConfigurationError, Series, lc_group, lc_scale,
                     lc_scale_series, parse_series_terms, render_series_terms,
                     scalar)
from .verdict import Verdict, combine

Word = tuple


class PresentationError(ValueError):
    pass


class TwistRejected(ValueError):
    """A proposed twist failed normalization, invertibility or the cocycle law."""

    def __init__(self, message: str, verdict: Verdict):
        super().__init__(message)
        self.verdict = verdict


class LiePresentation:
    """A finite-dimensional Lie algebra given by structure constants.

    ``brackets`` maps ordered pairs of generators (names or indices) to the
    bracket ``[g_i, g_j] = sum_k c^k_ij g_k`` given as ``{k: c}``.  Pairs not
    listed commute; listing only one ordering is enough.
    """

    def __init__(self, names: Sequence[str], brackets: Mapping | None = None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise PresentationError(f"duplicate generator names in {self.names}")
        self._index = {n: i for i, n in enumerate(self.names)}
        m = len(self.names)
        c: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b), rhs in (brackets or {}).items():
            i, j = self.index(a), self.index(b)
            vals = {self.index(k): scalar(v) for k, v in rhs.items()}
            vals = {k: v for k, v in vals.items() if v}
            if i == j:
                if vals:
                    raise PresentationError(f"[{self.names[i]}, {self.names[i]}] must vanish")
                continue
            neg = {k: -v for k, v in vals.items()}
            for key, val in (((i, j), vals), ((j, i), neg)):
                if key in c and c[key] != val:
                    raise PresentationError(
                        f"structure constants are not antisymmetric for pair {key}")
                c[key] = val
        self._c = {k: v for k, v in c.items() if v}
        self._check_jacobi(m)
        self._nf: dict[Word, dict[Word, Fraction]] = {}

    def index(self, g) -> int:
        if isinstance(g, int):
            if not 0 <= g < len(self.names):
                raise PresentationError(f"generator index {g} out of range")
            return g
        try:
            return self._index[g]
        except KeyError:
            raise PresentationError(f"unknown generator {g!r}") from None

    @property
    def dimension(self) -> int:
        return len(self.names)

    def bracket(self, i: int, j: int) -> dict[int, Fraction]:
        return self._c.get((i, j), {})

    def structure_constant(self, k: int, i: int, j: int) -> Fraction:
        return self.bracket(i, j).get(k, Fraction(0))

    def is_abelian(self) -> bool:
        return not self._c

    def _check_jacobi(self, m: int):
        for i, j, k in itertools.combinations(range(m), 3):
            total: dict[int, Fraction] = defaultdict(Fraction)
            for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
                for l, c1 in self.bracket(a, b).items():
                    for mm, c2 in self.bracket(l, cc).items():
                        total[mm] += c1 * c2
            if any(total.values()):
                raise PresentationError(
                    f"Jacobi identity fails for ({self.names[i]}, {self.names[j]}, {self.names[k]})")

    # -- PBW straightening ------------------------------------------------

    def normalize(self, word: Iterable[int]) -> dict[Word, Fraction]:
        """Straighten an arbitrary generator sequence into sorted PBW words.

        Uses ``x_j x_i = x_i x_j + [x_j, x_i]`` at the leftmost descent; the
        number of inversions drops or the word gets shorter, so it terminates.
        """
        word = tuple(word)
        cached = self._nf.get(word)
        if cached is not None:
            return cached
        for p in range(len(word) - 1):
            if word[p] > word[p + 1]:
                j, i = word[p], word[p + 1]
                out: dict[Word, Fraction] = defaultdict(Fraction)
                for w, c in self.normalize(word[:p] + (i, j) + word[p + 2:]).items():
                    out[w] += c
                for k, ck in self.bracket(j, i).items():
                    for w, c in self.normalize(word[:p] + (k,) + word[p + 2:]).items():
                        out[w] += ck * c
                result = {w: c for w, c in out.items() if c}
                break
        else:
            result = {word: Fraction(1)}
        self._nf[word] = result
        return result

    def render_word(self, word: Word) -> str:
        return " ".join(self.names[i] for i in word) if word else "1"

    def parse_word(self, text: str) -> Word:
        """Parse a space-separated generator sequence; ``"1"`` is the empty word."""
        toks = text.split()
        if toks == ["1"] or not toks:
            return ()
        return tuple(self.index(t) for t in toks)

    def __repr__(self):
        return f"LiePresentation({list(self.names)})"


def pbw_normalize(pres: LiePresentation, word: Iterable, coeff: Series) -> "HopfElement":
    """The PBW normal form of ``coeff * word`` for an arbitrary word."""
    alg = HopfAlgebra(pres, coeff.order)
    idx = tuple(pres.index(g) for g in word)
    terms = {(w, 0): c for w, c in pres.normalize(idx).items()}
    return HopfElement(alg, lc_scale_series(terms, coeff))


class HopfAlgebra:
    """``U(g)`` over ``Q[[h]]/(h^(N+1))`` with primitive generators."""

    def __init__(self, pres: LiePresentation, order: int):
        self.pres = pres
        self.order = order
        self._cop: dict[Word, dict] = {}
        self._anti: dict[Word, dict] = {}

    def __eq__(self, other):
        return (isinstance(other, HopfAlgebra) and self.pres is other.pres
                and self.order == other.order)

    def __hash__(self):
        return hash((id(self.pres), self.order))

    def check(self, other: "HopfAlgebra"):
        if self.pres is not other.pres:
            raise ConfigurationError("elements belong to different Lie presentations")
        if self.order != other.order:
            raise ConfigurationError(
                f"truncation order mismatch: {self.order} vs {other.order}")

    # constructors
    def one(self) -> "HopfElement":
        return HopfElement(self, {((), 0): Fraction(1)})

    def zero(self) -> "HopfElement":
        return HopfElement(self, {})

    def gen(self, g) -> "HopfElement":
        return HopfElement(self, {((self.pres.index(g),), 0): Fraction(1)})

    def word(self, *gens, coeff=1) -> "HopfElement":
        """The PBW normal form of ``coeff * g_1 g_2 ... g_k``."""
        idx = tuple(self.pres.index(g) for g in gens)
        terms = {(w, 0): c for w, c in self.pres.normalize(idx).items()}
        return HopfElement(self, lc_scale_series(terms, self.series(coeff)))

    def series(self, c) -> Series:
        if isinstance(c, Series):
            return c
        return Series((c,), self.order)

    def h(self, power=1) -> Series:
        return Series([0] * power + [1], self.order)

    def tensor_one(self, arity: int = 2) -> "TensorElement":
        return TensorElement(self, arity, {(((),) * arity, 0): Fraction(1)})

    def tensor(self, *factors: "HopfElement") -> "TensorElement":
        """Tensor product ``a_1 ⊗ ... ⊗ a_k`` of Hopf elements."""
        terms: dict = {((), 0): Fraction(1)}
        for f in factors:
            self.check(f.algebra)
            new: dict = defaultdict(Fraction)
            for (ws, k), c in terms.items():
                for (w, j), d in f.terms.items():
                    if k + j <= self.order:
                        new[(ws + (w,), k + j)] += c * d
            terms = new
        return TensorElement(self, len(factors), terms)

    # structure maps on single words (rational, h-free)
    def coproduct_word(self, word: Word) -> dict:
        cached = self._cop.get(word)
        if cached is None:
            out: dict = defaultdict(Fraction)
            n = len(word)
            for mask in range(1 << n):
                left = tuple(word[i] for i in range(n) if mask >> i & 1)
                right = tuple(word[i] for i in range(n) if not mask >> i & 1)
                out[(left, right)] += 1
            cached = dict(out)
            self._cop[word] = cached
        return cached

    def antipode_word(self, word: Word) -> dict:
        cached = self._anti.get(word)
        if cached is None:
            sign = -1 if len(word) % 2 else 1
            cached = {w: sign * c for w, c in self.pres.normalize(tuple(reversed(word))).items()}
            self._anti[word] = cached
        return cached

    def product_words(self, a: Word, b: Word) -> dict:
        if not a:
            return {b: Fraction(1)}
        if not b:
            return {a: Fraction(1)}
        return self.pres.normalize(a + b)


class _Sparse:
    __slots__ = ("algebra", "terms")

    def _wrap(self, terms):
        raise NotImplementedError

    def _same(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        self.algebra.check(other.algebra)

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return self._wrap(out)

    def __sub__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) - v
        return self._wrap(out)

    def __neg__(self):
        return self._wrap({k: -v for k, v in self.terms.items()})

    def scale(self, c) -> "_Sparse":
        if isinstance(c, Series):
            return self._wrap(lc_scale_series(self.terms, c))
        return self._wrap(lc_scale(self.terms, scalar(c)))

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction, Series)):
            return self.scale(c)
        return NotImplemented

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def lowest_order(self) -> int | None:
        ks = [k for (_, k) in self.terms]
        return min(ks) if ks else None

    def at_order(self, k: int):
        """The ``h^k`` component, as an element with only that order."""
        return self._wrap({key: v for key, v in self.terms.items() if key[1] == k})

    def truncate(self, k: int):
        return self._wrap({key: v for key, v in self.terms.items() if key[1] <= k})


class HopfElement(_Sparse):
    """An element of ``U(g)`` with truncated-series coefficients."""

    def __init__(self, algebra: HopfAlgebra, terms: dict):
        n = algebra.order
        self.algebra = algebra
        self.terms = {k: v for k, v in terms.items() if v and k[1] <= n}

    def _wrap(self, terms):
        return HopfElement(self.algebra, terms)

    @property
    def pres(self) -> LiePresentation:
        return self.algebra.pres

    def coefficients(self) -> dict[Word, Series]:
        return lc_group(self.terms, self.algebra.order)

    def coefficient(self, word) -> Series:
        word = tuple(word)
        return Series([self.terms.get((word, k), 0) for k in range(self.algebra.order + 1)],
                      self.algebra.order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Series)):
            return self.scale(other)
        self._same(other)
        return hopf_mul(self, other)

    def counit(self) -> Series:
        return counit(self)

    def coproduct(self) -> "TensorElement":
        return coproduct(self)

    def antipode(self) -> "HopfElement":
        return antipode(self)

    def invert(self) -> "HopfElement":
        """Inverse of ``1 + O(h)`` by the Neumann series."""
        one = self.algebra.one()
        rest = self - one
        if any(k == 0 for (_, k) in rest.terms):
            raise ConfigurationError("only elements of the form 1 + O(h) are inverted")
        out, power = one, one
        for _ in range(self.algebra.order):
            power = power * (-rest)
            if not power:
                break
            out = out + power
        return out

    def __str__(self):
        return render_hopf(self)

    def __repr__(self):
        return f"HopfElement({self})"


class TensorElement(_Sparse):
    """An element of ``U(g)^{⊗ arity}``."""

    __slots__ = ("arity",)

    def __init__(self, algebra: HopfAlgebra, arity: int, terms: dict):
        n = algebra.order
        self.algebra = algebra
        self.arity = arity
        self.terms = {k: v for k, v in terms.items() if v and k[1] <= n}

    def _wrap(self, terms):
        return TensorElement(self.algebra, self.arity, terms)

    def _same(self, other):
        super()._same(other)
        if self.arity != other.arity:
            raise ConfigurationError(f"tensor arity mismatch: {self.arity} vs {other.arity}")

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.arity == other.arity and super().__eq__(other)

    __hash__ = _Sparse.__hash__

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Series)):
            return self.scale(other)
        self._same(other)
        alg = self.algebra
        n = alg.order
        out: dict = defaultdict(Fraction)
        for (wa, i), ca in self.terms.items():
            for (wb, j), cb in other.terms.items():
                k = i + j
                if k > n:
                    continue
                c = ca * cb
                parts = [alg.product_words(x, y) for x, y in zip(wa, wb)]
                for combo in itertools.product(*(p.items() for p in parts)):
                    coef = c
                    for _, cc in combo:
                        coef *= cc
                    out[(tuple(w for w, _ in combo), k)] += coef
        return TensorElement(alg, self.arity, out)

    def coefficients(self) -> dict[tuple, Series]:
        return lc_group(self.terms, self.algebra.order)

    def permute(self, perm: Sequence[int]) -> "TensorElement":
        """Reorder legs: leg ``i`` of the result is leg ``perm[i]`` of ``self``."""
        return TensorElement(self.algebra, self.arity,
                             {(tuple(ws[p] for p in perm), k): c
                              for (ws, k), c in self.terms.items()})

    def flip(self) -> "TensorElement":
        if self.arity != 2:
            raise ConfigurationError("flip needs arity 2")
        return self.permute((1, 0))

    def embed(self, positions: Sequence[int], arity: int) -> "TensorElement":
        """Place the legs at ``positions`` of a longer tensor, filling with 1."""
        out = {}
        for (ws, k), c in self.terms.items():
            full = [()] * arity
            for p, w in zip(positions, ws):
                full[p] = w
            out[(tuple(full), k)] = c
        return TensorElement(self.algebra, arity, out)

    def map_leg(self, leg: int, fn, width: int = 2) -> "TensorElement":
        """Apply ``fn: word -> {(words tuple, k): c}`` to one leg, splicing the result.

        ``width`` is the number of legs ``fn`` produces.
        """
        n = self.algebra.order
        out: dict = defaultdict(Fraction)
        for (ws, k), c in self.terms.items():
            for (new, j), d in fn(ws[leg]).items():
                if k + j > n:
                    continue
                out[(ws[:leg] + tuple(new) + ws[leg + 1:], k + j)] += c * d
        return TensorElement(self.algebra, self.arity - 1 + width, out)

    def coproduct_leg(self, leg: int, structure: "HopfStructure | None" = None) -> "TensorElement":
        if structure is None:
            cop = self.algebra.coproduct_word
            return self.map_leg(leg, lambda w: {(pair, 0): c for pair, c in cop(w).items()})
        return self.map_leg(leg, structure.coproduct_word_terms)

    def counit_leg(self, leg: int) -> "TensorElement | HopfElement":
        out = {}
        for (ws, k), c in self.terms.items():
            if ws[leg] == ():
                key = (ws[:leg] + ws[leg + 1:], k)
                out[key] = out.get(key, 0) + c
        if self.arity == 2:
            return HopfElement(self.algebra, {(ws[0], k): c for (ws, k), c in out.items()})
        return TensorElement(self.algebra, self.arity - 1, out)

    def antipode_leg(self, leg: int, structure: "HopfStructure | None" = None) -> "TensorElement":
        if structure is None:
            anti = self.algebra.antipode_word
            return self.map_leg(leg, lambda w: {((v,), 0): c for v, c in anti(w).items()}, 1)
        return self.map_leg(leg, lambda w: {((v,), k): c for (v, k), c in
                                            structure.antipode_word_terms(w).items()}, 1)

    def multiply_legs(self) -> HopfElement:
        """``μ`` applied to all legs in order (``a ⊗ b ↦ ab``)."""
        alg = self.algebra
        out: dict = defaultdict(Fraction)
        for (ws, k), c in self.terms.items():
            partial = {(): Fraction(1)}
            for w in ws:
                nxt: dict = defaultdict(Fraction)
                for p, cp in partial.items():
                    for q, cq in alg.product_words(p, w).items():
                        nxt[q] += cp * cq
                partial = nxt
            for w, cw in partial.items():
                out[(w, k)] += c * cw
        return HopfElement(alg, out)

    def leg_factors(self):
        """Iterate ``(words, k, c)`` over the stored terms."""
        for (ws, k), c in self.terms.items():
            yield ws, k, c

    def invert(self) -> "TensorElement":
        """Inverse of an element ``1⊗...⊗1 + O(h)`` by the Neumann series in ``h``."""
        one = self.algebra.tensor_one(self.arity)
        rest = self - one
        if any(k == 0 for (_, k) in rest.terms):
            raise ConfigurationError("the h^0 part of an invertible twist element must be 1⊗1")
        out, power = one, one
        for _ in range(self.algebra.order):
            power = power * (-rest)
            if not power:
                break
            out = out + power
        return out

    def __str__(self):
        return render_tensor(self)

    def __repr__(self):
        return f"TensorElement({self})"


# -- Hopf structure maps ----------------------------------------------------

def hopf_mul(a: HopfElement, b: HopfElement) -> HopfElement:
    a.algebra.check(b.algebra)
    alg = a.algebra
    n = alg.order
    out: dict = defaultdict(Fraction)
    for (wa, i), ca in a.terms.items():
        for (wb, j), cb in b.terms.items():
            if i + j > n:
                continue
            for w, c in alg.product_words(wa, wb).items():
                out[(w, i + j)] += ca * cb * c
    return HopfElement(alg, out)


def coproduct(a: HopfElement) -> TensorElement:
    """Primitive generators, extended multiplicatively over PBW words."""
    alg = a.algebra
    out: dict = defaultdict(Fraction)
    for (w, k), c in a.terms.items():
        for pair, d in alg.coproduct_word(w).items():
            out[(pair, k)] += c * d
    return TensorElement(alg, 2, out)


def counit(a: HopfElement) -> Series:
    return a.coefficient(())


def antipode(a: HopfElement) -> HopfElement:
    alg = a.algebra
    out: dict = defaultdict(Fraction)
    for (w, k), c in a.terms.items():
        for v, d in alg.antipode_word(w).items():
            out[(v, k)] += c * d
    return HopfElement(alg, out)


def tensor_exp(x: TensorElement) -> TensorElement:
    """``exp(x)`` for ``x = O(h)``, exact after truncation."""
    if any(k == 0 for (_, k) in x.terms):
        raise ConfigurationError("exponent must vanish at order h^0")
    alg = x.algebra
    out = alg.tensor_one(x.arity)
    power = out
    for j in range(1, alg.order + 1):
        power = power * x
        if not power:
            break
        out = out + power.scale(Fraction(1, math.factorial(j)))
    return out


class HopfStructure:
    """Coproduct and antipode of either ``H`` or the twisted ``H^F``.

    ``twist=None`` gives the undeformed cocommutative structure.
    """

    def __init__(self, algebra: HopfAlgebra, twist: "Twist | None" = None):
        self.algebra = algebra
        self.twist = twist
        self._cop: dict[Word, dict] = {}
        self._anti: dict[Word, dict] = {}
        self._iter: dict[tuple, dict] = {}

    @property
    def twisted(self) -> bool:
        return self.twist is not None

    def coproduct_word_terms(self, word: Word) -> dict:
        cached = self._cop.get(word)
        if cached is None:
            alg = self.algebra
            if self.twist is None:
                cached = {(pair, 0): c for pair, c in alg.coproduct_word(word).items()}
            else:
                base = coproduct(HopfElement(alg, {(word, 0): Fraction(1)}))
                cached = (self.twist.F * base * self.twist.F_inv).terms
            self._cop[word] = cached
        return cached

    def coproduct(self, a: HopfElement) -> TensorElement:
        alg = self.algebra
        out: dict = defaultdict(Fraction)
        for (w, k), c in a.terms.items():
            for (pair, j), d in self.coproduct_word_terms(w).items():
                if k + j <= alg.order:
                    out[(pair, k + j)] += c * d
        return TensorElement(alg, 2, out)

    def iterated_coproduct_word(self, word: Word, m: int) -> dict:
        """``Δ^(m)`` of a single word as ``{(words, k): c}``; ``m = 1`` is the word itself."""
        key = (word, m)
        cached = self._iter.get(key)
        if cached is None:
            if m == 1:
                cached = {((word,), 0): Fraction(1)}
            else:
                prev = TensorElement(self.algebra, m - 1,
                                     self.iterated_coproduct_word(word, m - 1))
                cached = prev.map_leg(0, self.coproduct_word_terms).terms
            self._iter[key] = cached
        return cached

    def iterated_coproduct(self, a: HopfElement, m: int) -> TensorElement:
        alg = self.algebra
        out: dict = defaultdict(Fraction)
        for (w, k), c in a.terms.items():
            for (ws, j), d in self.iterated_coproduct_word(w, m).items():
                if k + j <= alg.order:
                    out[(ws, k + j)] += c * d
        return TensorElement(alg, m, out)

    def antipode_word_terms(self, word: Word) -> dict:
        cached = self._anti.get(word)
        if cached is None:
            a = HopfElement(self.algebra, {(word, 0): Fraction(1)})
            if self.twist is None:
                cached = antipode(a).terms
            else:
                t = self.twist
                cached = (t.chi * antipode(a) * t.chi_inv).terms
            self._anti[word] = cached
        return cached

    def antipode(self, a: HopfElement) -> HopfElement:
        alg = self.algebra
        out: dict = defaultdict(Fraction)
        for (w, k), c in a.terms.items():
            for (v, j), d in self.antipode_word_terms(w).items():
                if k + j <= alg.order:
                    out[(v, k + j)] += c * d
        return HopfElement(alg, out)

    def counit(self, a: HopfElement) -> Series:
        return counit(a)


def verify_hopf_axioms(structure: HopfStructure, samples: Iterable[HopfElement]) -> Verdict:
    """Coassociativity, counit and antipode laws on the given elements."""
    verdicts = []
    for xi in samples:
        d = structure.coproduct(xi)
        left = d.coproduct_leg(0, structure)
        right = d.coproduct_leg(1, structure)
        verdicts.append(_compare(left, right, f"coassociativity on {xi}"))
        verdicts.append(_compare(d.counit_leg(0), xi, f"(ε⊗id)Δ on {xi}"))
        verdicts.append(_compare(d.counit_leg(1), xi, f"(id⊗ε)Δ on {xi}"))
        unit = xi.algebra.one().scale(counit(xi))
        verdicts.append(_compare(d.antipode_leg(0, structure).multiply_legs(), unit,
                                 f"μ(S⊗id)Δ on {xi}"))
        verdicts.append(_compare(d.antipode_leg(1, structure).multiply_legs(), unit,
                                 f"μ(id⊗S)Δ on {xi}"))
    return combine(verdicts)


def _compare(a, b, sample: str) -> Verdict:
    diff = a - b
    if diff:
        return Verdict.fail(diff.lowest_order(), sample)
    return Verdict.ok()


# -- twists ------------------------------------------------------------------

class Twist:
    """An invertible ``F ∈ H⊗H`` with its inverse and the element ``χ``.

    Use :func:`build_twist` to construct one with verification.
    """

    def __init__(self, F: TensorElement, F_inv: TensorElement, label: str = "explicit"):
        self.algebra = F.algebra
        self.F = F
        self.F_inv = F_inv
        self.label = label
        self.chi = F.antipode_leg(1).multiply_legs()
        self.chi_inv = F_inv.antipode_leg(0).multiply_legs()
        self.normalization: Verdict | None = None
        self.cocycle: Verdict | None = None
        self.inverse_check: Verdict | None = None

    @property
    def verified(self) -> bool:
        return bool(self.normalization and self.cocycle and self.inverse_check)

    def inverse_legs(self):
        """Terms ``(fbar^α, fbar_α, k, c)`` of ``F^{-1}``."""
        for (ws, k), c in self.F_inv.terms.items():
            yield ws[0], ws[1], k, c

    def legs(self):
        for (ws, k), c in self.F.terms.items():
            yield ws[0], ws[1], k, c

    def structure(self) -> HopfStructure:
        return HopfStructure(self.algebra, self)

    def __repr__(self):
        return f"Twist({self.label}, F={self.F})"


def moyal_twist(algebra: HopfAlgebra, generators: Sequence, theta) -> Twist:
    """``F = exp(-(h/2) θ^{ab} X_a ⊗ X_b)`` over mutually commuting generators."""
    pres = algebra.pres
    idx = [pres.index(g) for g in generators]
    m = len(idx)
    th = [[scalar(theta[a][b]) for b in range(m)] for a in range(m)]
    for a in range(m):
        for b in range(m):
            if th[a][b] != -th[b][a]:
                raise TwistRejected("Moyal θ must be antisymmetric",
                                    Verdict.fail(0, detail="theta not antisymmetric"))
            if pres.bracket(idx[a], idx[b]):
                raise TwistRejected(
                    "Moyal twist needs commuting generators",
                    Verdict.fail(0, detail=f"[{pres.names[idx[a]]}, {pres.names[idx[b]]}] ≠ 0"))
    terms = {}
    for a in range(m):
        for b in range(m):
            if th[a][b] and algebra.order >= 1:
                key = (((idx[a],), (idx[b],)), 1)
                terms[key] = terms.get(key, 0) - th[a][b] / 2
    x = TensorElement(algebra, 2, terms)
    return Twist(tensor_exp(x), tensor_exp(-x), label="moyal")


def jordanian_twist(algebra: HopfAlgebra, H, E) -> Twist:
    """``F = exp(½ H ⊗ log(1 + hE))`` for ``[H, E] = 2E``."""
    pres = algebra.pres
    hi, ei = pres.index(H), pres.index(E)
    if pres.bracket(hi, ei) != {ei: Fraction(2)}:
        raise TwistRejected("Jordanian twist needs [H, E] = 2E",
                            Verdict.fail(0, detail="bracket relation violated"))
    n = algebra.order
    one = algebra.one()
    e = algebra.gen(ei)
    # log(1 + hE) = sum_k (-1)^(k+1) h^k E^k / k
    sigma = algebra.zero()
    power = one
    for k in range(1, n + 1):
        power = power * e
        sigma = sigma + power.scale(algebra.h(k)).scale(Fraction((-1) ** (k + 1), k))
    x = algebra.tensor(algebra.gen(hi), sigma).scale(Fraction(1, 2))
    return Twist(tensor_exp(x), tensor_exp(-x), label="jordanian")


def explicit_twist(F: TensorElement, F_inv: TensorElement | None = None) -> Twist:
    if F_inv is None:
        F_inv = F.invert()
    return Twist(F, F_inv)


def verify_normalization(t: Twist) -> Verdict:
    one = t.algebra.one()
    verdicts = [
        _compare(t.F.counit_leg(0), one, "(ε⊗id)F"),
        _compare(t.F.counit_leg(1), one, "(id⊗ε)F"),
    ]
    return combine(verdicts)


def verify_inverse(t: Twist) -> Verdict:
    one = t.algebra.tensor_one(2)
    return combine([_compare(t.F * t.F_inv, one, "F·F⁻¹"),
                    _compare(t.F_inv * t.F, one, "F⁻¹·F")])


def verify_cocycle(t: Twist) -> Verdict:
    """``F12 (Δ⊗id)F = F23 (id⊗Δ)F`` and its inverse form, in ``H⊗H⊗H``."""
    F, Fi = t.F, t.F_inv
    F12, F23 = F.embed((0, 1), 3), F.embed((1, 2), 3)
    left = F12 * F.coproduct_leg(0)
    right = F23 * F.coproduct_leg(1)
    direct = _compare(left, right, "F12(Δ⊗id)F vs F23(id⊗Δ)F")
    Fi12, Fi23 = Fi.embed((0, 1), 3), Fi.embed((1, 2), 3)
    inv_left = Fi.coproduct_leg(0) * Fi12
    inv_right = Fi.coproduct_leg(1) * Fi23
    inverse = _compare(inv_left, inv_right, "((Δ⊗id)F⁻¹)F⁻¹12 vs ((id⊗Δ)F⁻¹)F⁻¹23")
    return combine([direct, inverse])


def build_twist(spec) -> Twist:
    """Construct and verify a twist.

    ``spec`` is a :class:`Twist` (verified in place), or a tuple
    ``("moyal", algebra, generators, theta)``, ``("jordanian", algebra, H, E)``
    or ``("explicit", F, F_inv_or_None)``.  Raises :class:`TwistRejected`
    with the first failing order when a law fails.
    """
    if isinstance(spec, Twist):
        t = spec
    else:
        kind, *args = spec
        if kind == "moyal":
            t = moyal_twist(*args)
        elif kind == "jordanian":
            t = jordanian_twist(*args)
        elif kind == "explicit":
            t = explicit_twist(*args)
        else:
            raise ValueError(f"unknown twist kind {kind!r}")
    t.normalization = verify_normalization(t)
    if not t.normalization:
        raise TwistRejected(
            f"twist fails normalization at order h^{t.normalization.first_failing_order}",
            t.normalization)
    t.inverse_check = verify_inverse(t)
    if not t.inverse_check:
        raise TwistRejected(
            f"supplied inverse is wrong at order h^{t.inverse_check.first_failing_order}",
            t.inverse_check)
    t.cocycle = verify_cocycle(t)
    if not t.cocycle:
        raise TwistRejected(
            f"twist fails the 2-cocycle law at order h^{t.cocycle.first_failing_order}",
            t.cocycle)
    return t


def twisted_coproduct(t: Twist, a: HopfElement) -> TensorElement:
    return t.F * coproduct(a) * t.F_inv


def twisted_antipode(t: Twist, a: HopfElement) -> HopfElement:
    return t.chi * antipode(a) * t.chi_inv


# -- R-matrices --------------------------------------------------------------

class RMatrix:
    def __init__(self, R: TensorElement, R_inv: TensorElement | None = None, label: str = ""):
        self.algebra = R.algebra
        self.R = R
        self.R_inv = R.invert() if R_inv is None else R_inv
        self.label = label
        self.triangular: Verdict | None = None

    @classmethod
    def trivial(cls, algebra: HopfAlgebra) -> "RMatrix":
        one = algebra.tensor_one(2)
        return cls(one, one, label="trivial")

    def is_trivial(self) -> bool:
        return self.R == self.algebra.tensor_one(2)

    def inverse_legs(self):
        """Terms ``(Rbar^α, Rbar_α, k, c)`` of ``R^{-1}``."""
        for (ws, k), c in self.R_inv.terms.items():
            yield ws[0], ws[1], k, c

    def legs(self):
        for (ws, k), c in self.R.terms.items():
            yield ws[0], ws[1], k, c

    def __repr__(self):
        return f"RMatrix({self.label or self.R})"


def twist_r_matrix(t: Twist, r: RMatrix) -> RMatrix:
    """``R^F = F21 R F^{-1}`` with inverse ``F R^{-1} F21^{-1}``."""
    F21 = t.F.flip()
    F21_inv = t.F_inv.flip()
    return RMatrix(F21 * r.R * t.F_inv, t.F * r.R_inv * F21_inv,
                   label=f"twisted({r.label or 'R'})")


def verify_yang_baxter(r: RMatrix) -> Verdict:
    R = r.R
    R12, R13, R23 = R.embed((0, 1), 3), R.embed((0, 2), 3), R.embed((1, 2), 3)
    return _compare(R12 * R13 * R23, R23 * R13 * R12, "R12R13R23 vs R23R13R12")


def verify_triangular(r: RMatrix) -> Verdict:
    v = _compare(r.R.flip() * r.R, r.algebra.tensor_one(2), "R21·R")
    r.triangular = v
    return v


def verify_r_inverse(r: RMatrix) -> Verdict:
    return _compare(r.R * r.R_inv, r.algebra.tensor_one(2), "R·R⁻¹")


def verify_quasitriangular(structure: HopfStructure, r: RMatrix,
                           samples: Iterable[HopfElement]) -> Verdict:
    """``Δ^op(ξ) = R Δ(ξ) R^{-1}``, ``(Δ⊗id)R = R13 R23``, ``(id⊗Δ)R = R13 R12``."""
    R = r.R
    verdicts = [
        _compare(R.coproduct_leg(0, structure), R.embed((0, 2), 3) * R.embed((1, 2), 3),
                 "(Δ⊗id)R vs R13R23"),
        _compare(R.coproduct_leg(1, structure), R.embed((0, 2), 3) * R.embed((0, 1), 3),
                 "(id⊗Δ)R vs R13R12"),
    ]
    for xi in samples:
        d = structure.coproduct(xi)
        verdicts.append(_compare(d.flip(), R * d * r.R_inv, f"Δ^op on {xi}"))
    return combine(verdicts)


# -- rendering / parsing -----------------------------------------------------

def _render_coef(coeffs: dict[int, Fraction]) -> str:
    text = render_series_terms(coeffs)
    return f"({text})"


def render_hopf(a: HopfElement) -> str:
    if not a.terms:
        return "0"
    grouped: dict = defaultdict(dict)
    for (w, k), c in a.terms.items():
        grouped[w][k] = c
    pres = a.pres
    parts = [f"{_render_coef(grouped[w])} * {pres.render_word(w)}"
             for w in sorted(grouped, key=lambda w: (len(w), w))]
    return " + ".join(parts)


def render_tensor(t: TensorElement) -> str:
    """Canonical ``Σ (coeff) * w1 ⊗ w2 [⊗ w3]`` rendering."""
    if not t.terms:
        return "0"
    grouped: dict = defaultdict(dict)
    for (ws, k), c in t.terms.items():
        grouped[ws][k] = c
    pres = t.algebra.pres
    parts = []
    for ws in sorted(grouped, key=lambda ws: (sum(map(len, ws)), ws)):
        legs = " ⊗ ".join(pres.render_word(w) for w in ws)
        parts.append(f"{_render_coef(grouped[ws])} * {legs}")
    return " + ".join(parts)


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur, i = [], 0, "", 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            parts.append(cur)
            cur = ""
            i += len(sep)
            continue
        cur += ch
        i += 1
    parts.append(cur)
    return parts


_TERM_RE = re.compile(r"^\s*(?:\((?P<coef>[^()]*)\)\s*\*?)?\s*(?P<legs>.*)$")


def parse_tensor(text: str, algebra: HopfAlgebra, arity: int | None = None) -> TensorElement:
    """Parse the rendering of :func:`render_tensor`; ``(x)`` is accepted for ``⊗``."""
    text = text.replace("(x)", "⊗").strip()
    if text == "0":
        if arity is None:
            raise ValueError("arity needed to parse a zero tensor")
        return TensorElement(algebra, arity, {})
    out: dict = defaultdict(Fraction)
    found = None
    for term in _split_top(text, " + "):
        m = _TERM_RE.match(term)
        if not m:
            raise ValueError(f"cannot parse tensor term {term!r}")
        coef = parse_series_terms(m.group("coef")) if m.group("coef") else {0: Fraction(1)}
        legs = [algebra.pres.parse_word(s) for s in m.group("legs").split("⊗")]
        if found is None:
            found = len(legs)
        elif found != len(legs):
            raise ValueError("inconsistent tensor arity in literal")
        normalized = [algebra.pres.normalize(w) for w in legs]
        for combo in itertools.product(*(p.items() for p in normalized)):
            d = Fraction(1)
            for _, cc in combo:
                d *= cc
            ws = tuple(w for w, _ in combo)
            for k, c in coef.items():
                if k <= algebra.order:
                    out[(ws, k)] += c * d
    if arity is not None and found != arity:
        raise ValueError(f"expected a tensor of arity {arity}, got {found}")
    return TensorElement(algebra, found, out)


def parse_hopf(text: str, algebra: HopfAlgebra) -> HopfElement:
    t = parse_tensor(text, algebra, 1) if text.strip() != "0" else None
    if t is None:
        return algebra.zero()
    return HopfElement(algebra, {(ws[0], k): c for (ws, k), c in t.terms.items()})
