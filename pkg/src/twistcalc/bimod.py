"""Free equivariant bimodules, differential forms, tensor products and their deformations.

A module element is a sparse dict ``{(label, exps, k): c}``: the basis label,
the exponents of the right coefficient monomial, and the power of ``h``.
Undeformed bimodules have a central basis over the commutative algebra, so
``v = sum_α e_α f_α`` is a unique normal form.

Two *worlds* share the same spaces: :class:`Undeformed` uses the Hopf
algebra ``H`` and pointwise products, :class:`Deformed` uses ``H^F``, the
star products and the ``⊗_{A⋆}`` tensor product.  Code that is generic in
the world (braidings, sums of connections, curvature) only talks to the
world interface.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from typing import Sequence

from .funcalg import (PolyFunction, PolyRing, Realization, op_apply, op_apply_monomial,
                      p_add, p_mul, p_shift, render_poly, split_signed_terms,
                      parse_monomial_term)
from .hopf import HopfElement, HopfStructure, TensorElement, Twist
from .series import ConfigurationError, Series
from .verdict import Collector, Verdict


class ModuleError(ConfigurationError):
    pass


def t_add(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for key, v in b.items():
        out[key] = out.get(key, 0) + scale * v
    return {k: v for k, v in out.items() if v}


def t_shift(a: dict, power: int, order: int) -> dict:
    return {(l, e, k + power): c for (l, e, k), c in a.items() if k + power <= order}


def t_mul_poly(terms: dict, poly: dict, order: int) -> dict:
    """Multiply every coefficient of a module element by a polynomial."""
    out: dict = defaultdict(Fraction)
    for (l, e, k), c in terms.items():
        for (pe, pk), pc in poly.items():
            if k + pk <= order:
                out[(l, tuple(x + y for x, y in zip(e, pe)), k + pk)] += c * pc
    return {k: v for k, v in out.items() if v}


def t_component(terms: dict, label) -> dict:
    return {(e, k): c for (l, e, k), c in terms.items() if l == label}


# ---------------------------------------------------------------------------


class ModuleElement:
    """An element of a space, stored as ``{(label, exps, k): c}``."""

    __slots__ = ("space", "terms")

    def __init__(self, space: "Space", terms: dict):
        self.space = space
        n = space.order
        self.terms = {k: v for k, v in terms.items() if v and k[2] <= n}

    def _same(self, other):
        if not isinstance(other, ModuleElement):
            raise TypeError(f"expected ModuleElement, got {type(other).__name__}")
        if other.space is not self.space:
            raise ModuleError(f"elements of different spaces: {self.space} vs {other.space}")

    def __add__(self, other):
        self._same(other)
        return ModuleElement(self.space, t_add(self.terms, other.terms))

    def __sub__(self, other):
        self._same(other)
        return ModuleElement(self.space, t_add(self.terms, other.terms, -1))

    def __neg__(self):
        return ModuleElement(self.space, {k: -v for k, v in self.terms.items()})

    def scale(self, c) -> "ModuleElement":
        if isinstance(c, Series):
            out: dict = defaultdict(Fraction)
            for (l, e, k), v in self.terms.items():
                for j, s in enumerate(c.coeffs):
                    if s and k + j <= self.space.order:
                        out[(l, e, k + j)] += v * s
            return ModuleElement(self.space, out)
        return ModuleElement(self.space, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction, Series)):
            return self.scale(c)
        return NotImplemented

    def times(self, f: PolyFunction) -> "ModuleElement":
        """Pointwise right multiplication ``v · f`` (central basis)."""
        return ModuleElement(self.space, t_mul_poly(self.terms, f.terms, self.space.order))

    def __eq__(self, other):
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return self.space is other.space and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def lowest_order(self):
        ks = [k for (_, _, k) in self.terms]
        return min(ks) if ks else None

    def at_order(self, k: int) -> "ModuleElement":
        return ModuleElement(self.space, {key: v for key, v in self.terms.items() if key[2] == k})

    def component(self, label) -> PolyFunction:
        return PolyFunction(self.space.ring, t_component(self.terms, label))

    def components(self) -> dict:
        labels = sorted({l for (l, _, _) in self.terms}, key=self.space.label_position)
        return {l: self.component(l) for l in labels}

    def __str__(self):
        return self.space.render(self)

    def __repr__(self):
        return f"ModuleElement({self.space.name}: {self})"


class Space:
    """Common bookkeeping for spaces with a finite basis and polynomial coefficients."""

    name = "space"

    def _init_space(self, real: Realization, labels: Sequence, nvars: int, name: str):
        self.real = real
        self.order = real.order
        self.n = real.n
        self.nvars = nvars
        self.ring = real.ring if nvars == real.n else PolyRing(nvars, real.order)
        self.labels = list(labels)
        self._pos = {l: i for i, l in enumerate(self.labels)}
        if len(self._pos) != len(self.labels):
            raise ModuleError(f"duplicate basis labels in {name}")
        self.name = name

    @property
    def rank(self) -> int:
        return len(self.labels)

    def label_position(self, label) -> int:
        try:
            return self._pos[label]
        except KeyError:
            raise ModuleError(f"{label!r} is not a basis label of {self.name}") from None

    def element(self, terms: dict) -> ModuleElement:
        return ModuleElement(self, terms)

    def zero(self) -> ModuleElement:
        return ModuleElement(self, {})

    def basis(self, label, coeff: PolyFunction | None = None) -> ModuleElement:
        self.label_position(label)
        if coeff is None:
            return ModuleElement(self, {(label, (0,) * self.nvars, 0): Fraction(1)})
        return ModuleElement(self, {(label, e, k): c for (e, k), c in coeff.terms.items()})

    def from_components(self, comps: dict) -> ModuleElement:
        terms: dict = {}
        for label, f in comps.items():
            self.label_position(label)
            for (e, k), c in f.terms.items():
                terms[(label, e, k)] = terms.get((label, e, k), 0) + c
        return ModuleElement(self, terms)

    def monomial_basis(self, degree: int):
        """``e_α x^m`` for every label and every monomial of degree ``≤ degree``."""
        monos = self.ring.monomials(degree)
        return [ModuleElement(self, {(l, e, 0): Fraction(1)}) for l in self.labels for e in monos]

    def label_name(self, label) -> str:
        return str(label)

    def render(self, v: ModuleElement) -> str:
        if not v.terms:
            return "0"
        parts = []
        for label, f in v.components().items():
            text = render_poly(f.terms)
            name = self.label_name(label)
            if text == "1":
                parts.append(name)
            elif text == "-1":
                parts.append(f"-{name}")
            elif " " in text.strip("-") and len(f.terms) > 1:
                parts.append(f"({text}) {name}")
            else:
                parts.append(f"{text} {name}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} rank={self.rank}>"


class FreeBimodule(Space):
    """A free module with central basis and an equivariant ``H``-action.

    ``matrices[a]`` gives ``g_a ▷ e_α = sum_β e_β (M_a)^β_α`` as a dict
    ``{(β, α): poly dict}``.  Generators act on ``e_α f`` by the derivation
    rule; the bracket relations are checked exactly at construction.
    """

    def __init__(self, real: Realization, labels: Sequence, matrices: dict | None = None,
                 name: str = "V", degree: int | None = None, label_names: dict | None = None,
                 check: bool = True):
        self._init_space(real, labels, real.n, name)
        self.degree = degree
        self._names = label_names or {}
        m = real.pres.dimension
        mats: dict = {}
        for a, mat in (matrices or {}).items():
            a = real.pres.index(a)
            entries = {}
            for (b, al), poly in mat.items():
                self.label_position(b)
                self.label_position(al)
                if isinstance(poly, PolyFunction):
                    poly = poly.terms
                if any(k for (_, k) in poly):
                    raise ModuleError("action matrices must be h-independent")
                if poly:
                    entries[(b, al)] = dict(poly)
            mats[a] = entries
        self.matrices = {a: mats.get(a, {}) for a in range(m)}
        self._gen_cache: dict = {}
        self._word_cache: dict = {}
        if check:
            self._check_brackets()

    def label_name(self, label) -> str:
        return self._names.get(label, f"e{label}" if isinstance(label, int) else str(label))

    def act_gen_monomial(self, a: int, label, exps: tuple) -> dict:
        key = (a, label, exps)
        cached = self._gen_cache.get(key)
        if cached is None:
            out: dict = {}
            field = self.real._gen_ops[a]
            for (e, k), c in op_apply_monomial(field, exps, self.order).items():
                out[(label, e, k)] = out.get((label, e, k), 0) + c
            for (b, al), poly in self.matrices[a].items():
                if al != label:
                    continue
                for (pe, pk), pc in poly.items():
                    key2 = (b, tuple(x + y for x, y in zip(pe, exps)), pk)
                    out[key2] = out.get(key2, 0) + pc
            cached = {k: v for k, v in out.items() if v}
            self._gen_cache[key] = cached
        return cached

    def act_word_monomial(self, word: tuple, label, exps: tuple) -> dict:
        """``word ▷ (e_label x^exps)``; the rightmost letter acts first."""
        key = (word, label, exps)
        cached = self._word_cache.get(key)
        if cached is None:
            if not word:
                cached = {(label, exps, 0): Fraction(1)}
            else:
                inner = self.act_word_monomial(word[1:], label, exps)
                out: dict = defaultdict(Fraction)
                for (l, e, k), c in inner.items():
                    for (l2, e2, k2), c2 in self.act_gen_monomial(word[0], l, e).items():
                        out[(l2, e2, k + k2)] += c * c2
                cached = {k: v for k, v in out.items() if v}
            self._word_cache[key] = cached
        return cached

    def act_word(self, word: tuple, terms: dict) -> dict:
        out: dict = defaultdict(Fraction)
        n = self.order
        for (l, e, k), c in terms.items():
            for (l2, e2, k2), c2 in self.act_word_monomial(word, l, e).items():
                if k + k2 <= n:
                    out[(l2, e2, k + k2)] += c * c2
        return {k: v for k, v in out.items() if v}

    def _check_brackets(self):
        pres = self.real.pres
        m = pres.dimension
        for a in range(m):
            for b in range(a + 1, m):
                for label in self.labels:
                    for e in self.ring.monomials(2):
                        lhs = t_add(self.act_word_monomial((a, b), label, e),
                                    self.act_word_monomial((b, a), label, e), -1)
                        rhs: dict = {}
                        for k, c in pres.bracket(a, b).items():
                            rhs = t_add(rhs, self.act_word_monomial((k,), label, e), c)
                        if lhs != rhs:
                            raise ModuleError(
                                f"action on {self.name} violates [{pres.names[a]}, "
                                f"{pres.names[b]}] on basis {self.label_name(label)}")
        # the matrices are polynomial; monomials of degree <= 2 exercise every
        # entry of the first-order operator identity, which is linear in f


class ATensor(FreeBimodule):
    """``V_1 ⊗_A ... ⊗_A V_m`` of undeformed central-basis modules.

    The basis is the product basis with tuple labels; generators act by the
    Kronecker sum of the factor matrices (primitive coproduct).
    """

    def __init__(self, factors: Sequence[FreeBimodule]):
        flat = []
        for f in factors:
            if isinstance(f, StarTensor):
                raise ModuleError("cannot form an A-tensor product with a star tensor")
            flat.extend(f.factors if isinstance(f, ATensor) else [f])
        real = flat[0].real
        for f in flat:
            if f.real is not real:
                raise ModuleError("tensor factors use different realizations")
        self.factors = flat
        labels = list(itertools.product(*(f.labels for f in flat)))
        mats: dict = {}
        m = real.pres.dimension
        for a in range(m):
            entries: dict = defaultdict(dict)
            for lab in labels:
                for i, f in enumerate(flat):
                    for (b, al), poly in f.matrices[a].items():
                        if al != lab[i]:
                            continue
                        tgt = lab[:i] + (b,) + lab[i + 1:]
                        entries[(tgt, lab)] = p_add(entries[(tgt, lab)], poly)
            mats[a] = {k: v for k, v in entries.items() if v}
        name = "⊗".join(f.name for f in flat)
        degree = None
        if flat[-1].degree is not None:
            degree = flat[-1].degree
        super().__init__(real, labels, mats, name=name, degree=degree, check=False)

    def label_name(self, label) -> str:
        return "⊗".join(f.label_name(l) for f, l in zip(self.factors, label))


def tensor_over_A(*factors: FreeBimodule) -> ATensor:
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, ATensor) else [f])
    return _cached_tensor(ATensor, flat)


_TENSOR_CACHE: dict = {}


def _cached_tensor(cls, factors, *extra):
    key = (cls, tuple(id(f) for f in factors), tuple(id(x) for x in extra))
    hit = _TENSOR_CACHE.get(key)
    if hit is None or hit[1] != tuple(factors):
        space = cls(list(factors), *extra)
        _TENSOR_CACHE[key] = (space, tuple(factors))
        return space
    return hit[0]


# ---------------------------------------------------------------------------
# differential forms


class FormsCalculus:
    """The de Rham calculus ``Ω^0 .. Ω^n`` on polynomial functions.

    ``Ω^p`` has basis ``dx^I`` with ``I`` increasing tuples of 0-based
    indices; generators act by the Lie derivative, derived from the
    realization.  Construction checks ``d∘d = 0``, the graded Leibniz rule
    and ``ξ ▷ dθ = d(ξ ▷ θ)`` on a monomial sample.
    """

    def __init__(self, real: Realization, check: bool = True):
        self.real = real
        self.n = real.n
        self.order = real.order
        self._omega = {p: self._build(p) for p in range(self.n + 1)}
        if check:
            v = self.self_check(2)
            if not v:
                raise ModuleError(f"differential calculus self-check failed: {v.sample}")

    def _build(self, p: int) -> FreeBimodule:
        real = self.real
        labels = list(itertools.combinations(range(self.n), p))
        mats: dict = {}
        for a in range(real.pres.dimension):
            entries: dict = defaultdict(dict)
            comps = real.components[a]
            for I in labels:
                for j, i in enumerate(I):
                    # d(X^i) = sum_k d_k X^i dx^k replaces dx^i in slot j
                    xi = comps[i].terms
                    for k in range(self.n):
                        dk = op_apply({((0,) * self.n, tuple(1 if t == k else 0 for t in range(self.n)), 0):
                                       Fraction(1)}, xi, self.order)
                        if not dk:
                            continue
                        J = I[:j] + (k,) + I[j + 1:]
                        sign, K = sort_sign(J)
                        if sign == 0:
                            continue
                        entries[(K, I)] = p_add(entries[(K, I)], dk, sign)
            mats[a] = {k: v for k, v in entries.items() if v}
        names = {I: form_label(I) for I in labels}
        return FreeBimodule(real, labels, mats, name=f"Ω{p}", degree=p, label_names=names,
                            check=False)

    def omega(self, p: int) -> FreeBimodule:
        if p < 0:
            raise ModuleError("negative form degree")
        return self._omega[min(p, self.n)] if p <= self.n else self._omega[self.n]

    def functions(self) -> FreeBimodule:
        return self._omega[0]

    def function(self, f: PolyFunction) -> ModuleElement:
        return self._omega[0].basis((), f)

    def d(self, theta: ModuleElement) -> ModuleElement:
        return exterior_d(self, theta)

    def wedge(self, a: ModuleElement, b: ModuleElement) -> ModuleElement:
        return wedge(self, a, b)

    def parse(self, text: str, degree: int | None = None) -> ModuleElement:
        return parse_form(self, text, degree)

    def self_check(self, degree: int) -> Verdict:
        col = Collector()
        real = self.real
        for p in range(self.n + 1):
            om = self._omega[p]
            for v in om.monomial_basis(degree):
                if p + 2 <= self.n:
                    col.record(exterior_d(self, exterior_d(self, v)).terms, f"d∘d on {v}")
                for a in range(real.pres.dimension):
                    left = om.act_word((a,), v.terms)
                    dv = exterior_d(self, v)
                    if p + 1 <= self.n:
                        lhs = dv.space.act_word((a,), dv.terms)
                        rhs = exterior_d(self, ModuleElement(om, left)).terms
                        col.record(t_add(lhs, rhs, -1), f"equivariance of d on {v}")
                for q in range(self.n - p + 1):
                    for w in self._omega[q].monomial_basis(1):
                        if p + q + 1 > self.n:
                            continue
                        lhs = exterior_d(self, wedge(self, v, w))
                        sign = -1 if p % 2 else 1
                        rhs = wedge(self, exterior_d(self, v), w) + \
                            wedge(self, v, exterior_d(self, w)).scale(sign)
                        col.record((lhs - rhs).terms, f"graded Leibniz on {v}, {w}")
        return col.verdict("d∘d, equivariance, graded Leibniz")


def sort_sign(J: tuple):
    """Sign of the permutation sorting ``J`` and the sorted tuple; sign 0 on repeats."""
    if len(set(J)) != len(J):
        return 0, None
    sign = 1
    arr = list(J)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


def form_label(I: tuple) -> str:
    if not I:
        return "1"
    return "∧".join(f"dx{i + 1}" for i in I)


def wedge_terms(calc: FormsCalculus, a: dict, b: dict) -> dict:
    order = calc.order
    out: dict = defaultdict(Fraction)
    for (I, ea, ka), ca in a.items():
        for (J, eb, kb), cb in b.items():
            if ka + kb > order:
                continue
            sign, K = sort_sign(I + J)
            if not sign:
                continue
            out[(K, tuple(x + y for x, y in zip(ea, eb)), ka + kb)] += sign * ca * cb
    return {k: v for k, v in out.items() if v}


def wedge(calc: FormsCalculus, a: ModuleElement, b: ModuleElement) -> ModuleElement:
    """Undeformed wedge product; degrees beyond ``n`` give zero in the top degree."""
    p, q = a.space.degree, b.space.degree
    if p is None or q is None:
        raise ModuleError("wedge needs differential forms")
    target = calc.omega(min(p + q, calc.n))
    if p + q > calc.n:
        return target.zero()
    return ModuleElement(target, wedge_terms(calc, a.terms, b.terms))


def exterior_d(calc: FormsCalculus, theta: ModuleElement) -> ModuleElement:
    """``d(dx^I f) = (-1)^|I| dx^I ∧ df`` with ``df = sum_i dx^i ∂_i f``."""
    p = theta.space.degree
    if p is None:
        raise ModuleError("d needs a differential form")
    if p >= calc.n:
        return calc.omega(calc.n).zero()
    target = calc.omega(p + 1)
    sign = -1 if p % 2 else 1
    out: dict = defaultdict(Fraction)
    for (I, e, k), c in theta.terms.items():
        for i in range(calc.n):
            if not e[i]:
                continue
            s, K = sort_sign(I + (i,))
            if not s:
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            out[(K, e2, k)] += sign * s * c * e[i]
    return ModuleElement(target, out)


def parse_form(calc: FormsCalculus, text: str, degree: int | None = None) -> ModuleElement:
    """Parse literals like ``"x1 dx2 + 1/2 dx1"`` or ``"x2 dx1∧dx2"``."""
    n, order = calc.n, calc.order
    text = text.replace("^d", " d").replace("∧", " ")
    if text.strip() == "0":
        if degree is None:
            raise ValueError("degree needed for the zero form")
        return calc.omega(degree).zero()
    out: dict = defaultdict(Fraction)
    found = None
    dx = __import__("re").compile(r"^dx(\d+)$")
    for sign, body in split_signed_terms(text):
        c, e, k, extras = parse_monomial_term(body, n, extra=lambda t: bool(dx.match(t)))
        idx = []
        for t in extras:
            i = int(dx.match(t).group(1))
            if not 1 <= i <= n:
                raise ValueError(f"dx{i} out of range (n = {n})")
            idx.append(i - 1)
        s, K = sort_sign(tuple(idx))
        if found is None:
            found = len(idx)
        elif found != len(idx):
            raise ValueError(f"mixed form degrees in {text!r}")
        if not s or k > order:
            continue
        out[(K, e, k)] += (-c if sign == "-" else c) * s
    if degree is not None and found != degree:
        raise ValueError(f"expected a {degree}-form, got degree {found} in {text!r}")
    return ModuleElement(calc.omega(found), out)


# ---------------------------------------------------------------------------
# tensor products over the ground ring


class KTensor(Space):
    """``V_1 ⊗ ... ⊗ V_m`` over the ground ring.

    Each slot has its own copy of the ``n`` coordinates, so an element is a
    polynomial in ``n·m`` variables with tuple labels.
    """

    def __init__(self, factors: Sequence[Space]):
        factors = list(factors)
        real = factors[0].real
        for f in factors:
            if f.real is not real or f.nvars != real.n:
                raise ModuleError("K-tensor factors must be modules over the same algebra")
        self.factors = factors
        labels = list(itertools.product(*(f.labels for f in factors)))
        self._init_space(real, labels, real.n * len(factors),
                         "(" + " ⊗ ".join(f.name for f in factors) + ")")

    @property
    def arity(self) -> int:
        return len(self.factors)

    def label_name(self, label) -> str:
        return " ⊗ ".join(f.label_name(l) for f, l in zip(self.factors, label))

    def slot_exps(self, exps: tuple, i: int) -> tuple:
        n = self.n
        return exps[i * n:(i + 1) * n]

    def render(self, v: ModuleElement) -> str:
        """Slot ``i`` coordinates are primed ``i`` times: ``x1, x1', x1''``."""
        if not v.terms:
            return "0"
        names = [f"x{j + 1}" + "'" * i for i in range(self.arity) for j in range(self.n)]
        parts = []
        for label in sorted({l for (l, _, _) in v.terms}, key=self.label_position):
            poly = {(e, k): c for (l, e, k), c in v.terms.items() if l == label}
            parts.append(f"({render_poly(poly, names)}) {self.label_name(label)}")
        return " + ".join(parts)


def ktensor_space(*factors: Space) -> KTensor:
    return _cached_tensor(KTensor, factors)


def product_terms(parts: Sequence[dict], order: int) -> dict:
    """Tensor product of per-slot term dicts into K-tensor terms."""
    acc = {((), (), 0): Fraction(1)}
    for part in parts:
        nxt: dict = defaultdict(Fraction)
        for (ls, es, k), c in acc.items():
            for (l, e, j), d in part.items():
                if k + j <= order:
                    nxt[(ls + (l,), es + e, k + j)] += c * d
        acc = nxt
    return {k: v for k, v in acc.items() if v}


def ktensor(*elements: ModuleElement) -> ModuleElement:
    """``v_1 ⊗ ... ⊗ v_m`` over the ground ring."""
    space = ktensor_space(*(v.space for v in elements))
    return ModuleElement(space, product_terms([v.terms for v in elements], space.order))


def split_term(space: KTensor, labels: tuple, exps: tuple, start: int, stop: int):
    n = space.n
    return labels[start:stop], exps[start * n:stop * n]


def kt_map_block(x: ModuleElement, start: int, stop: int, fn, new_factors: Sequence[Space]):
    """Apply a linear map to slots ``start..stop-1`` of a K-tensor element.

    ``fn`` receives an element of the block (a single factor when the block
    has one slot, otherwise a K-tensor) and returns an element whose slots are
    ``new_factors``.  The result is an element of the K-tensor with the block
    replaced.
    """
    space: KTensor = x.space
    n = space.n
    factors = space.factors
    block = factors[start:stop]
    block_space = block[0] if len(block) == 1 else ktensor_space(*block)
    out_factors = list(factors[:start]) + list(new_factors) + list(factors[stop:])
    out_space = ktensor_space(*out_factors)
    single_out = len(new_factors) == 1
    groups: dict = defaultdict(dict)
    for (ls, es, k), c in x.terms.items():
        outer = (ls[:start], es[:start * n], ls[stop:], es[stop * n:])
        inner_l = ls[start] if len(block) == 1 else ls[start:stop]
        inner_e = es[start * n:stop * n]
        key = (inner_l, inner_e, k)
        groups[outer][key] = groups[outer].get(key, 0) + c
    result: dict = defaultdict(Fraction)
    for (l0, e0, l1, e1), inner in groups.items():
        img = fn(ModuleElement(block_space, inner))
        for (l, e, k), c in img.terms.items():
            mid = (l,) if single_out else tuple(l)
            result[(l0 + mid + l1, e0 + e + e1, k)] += c
    return ModuleElement(out_space, result)


def kt_permute(x: ModuleElement, perm: Sequence[int]) -> ModuleElement:
    """Reorder slots: slot ``i`` of the result is slot ``perm[i]`` of ``x``."""
    space: KTensor = x.space
    n = space.n
    out_space = ktensor_space(*(space.factors[p] for p in perm))
    out = {}
    for (ls, es, k), c in x.terms.items():
        nl = tuple(ls[p] for p in perm)
        ne = tuple(itertools.chain.from_iterable(es[p * n:(p + 1) * n] for p in perm))
        out[(nl, ne, k)] = c
    return ModuleElement(out_space, out)


def kt_contract(x: ModuleElement) -> ModuleElement:
    """Collapse a one-slot K-tensor element to its factor."""
    space = x.space
    if isinstance(space, KTensor):
        if space.arity != 1:
            raise ModuleError("only one-slot tensors collapse")
        return ModuleElement(space.factors[0], {(l[0], e, k): c for (l, e, k), c in x.terms.items()})
    return x


# ---------------------------------------------------------------------------
# star tensor products


class StarTensor(Space):
    """``V_1⋆ ⊗_{A⋆} ... ⊗_{A⋆} V_m⋆`` in star normal form.

    An element with coordinates ``g_L`` stands for
    ``sum_L (e_{L1} ⊗⋆ ... ⊗⋆ e_{Lm}) ⋆ g_L``.
    """

    def __init__(self, factors: Sequence[Space], world: "Deformed"):
        flat = []
        for f in factors:
            if isinstance(f, KTensor):
                raise ModuleError("star tensors are formed from modules, not K-tensors")
            flat.extend(f.factors if isinstance(f, StarTensor) else [f])
        self.factors = flat
        self.world = world
        real = flat[0].real
        labels = list(itertools.product(*(f.labels for f in flat)))
        self._init_space(real, labels, real.n, "⊗⋆".join(f.name for f in flat))
        self.degree = flat[-1].degree if isinstance(flat[-1], FreeBimodule) else None

    def label_name(self, label) -> str:
        return "⊗⋆".join(f.label_name(l) for f, l in zip(self.factors, label))


# ---------------------------------------------------------------------------
# worlds


class World:
    """Operations shared by the undeformed and deformed settings."""

    twisted = False
    twist: Twist | None = None

    def __init__(self, real: Realization, calc: FormsCalculus | None = None,
                 structure: HopfStructure | None = None):
        self.real = real
        self.algebra = real.algebra
        self.order = real.order
        self.ring = real.ring
        self.calc = calc
        self.structure = structure or HopfStructure(self.algebra, self.twist)
        self._act_cache: dict = {}

    # -- products
    def mul(self, a: PolyFunction, b: PolyFunction) -> PolyFunction:
        raise NotImplementedError

    # -- actions
    def act_word_monomial(self, space: Space, word: tuple, label, exps: tuple) -> dict:
        if isinstance(space, FreeBimodule):
            return space.act_word_monomial(word, label, exps)
        key = (id(space), word, label, exps)
        hit = self._act_cache.get(key)
        if hit is None:
            hit = self._act_word_other(space, word, label, exps)
            self._act_cache[key] = (hit, space)
            return hit
        return hit[0]

    def _act_word_other(self, space, word, label, exps) -> dict:
        if isinstance(space, KTensor):
            legs = self.structure.iterated_coproduct_word(word, space.arity)
            mono = ModuleElement(space, {(label, exps, 0): Fraction(1)})
            return act_legs(self, legs, mono).terms
        raise ModuleError(f"{self.name} cannot act on {space!r}")

    def act(self, xi: HopfElement, x: ModuleElement) -> ModuleElement:
        """``ξ ▷ x`` with the world's Hopf structure on tensor products."""
        self.algebra.check(xi.algebra)
        return self.act_terms(xi.terms, x)

    def act_terms(self, xi_terms: dict, x: ModuleElement) -> ModuleElement:
        order = self.order
        out: dict = defaultdict(Fraction)
        space = x.space
        for (w, j), d in xi_terms.items():
            for (l, e, k), c in x.terms.items():
                if j + k > order:
                    continue
                for (l2, e2, k2), c2 in self.act_word_monomial(space, w, l, e).items():
                    if j + k + k2 <= order:
                        out[(l2, e2, j + k + k2)] += c * c2 * d
        return ModuleElement(space, out)

    def act_word(self, word: tuple, x: ModuleElement) -> ModuleElement:
        return self.act_terms({(word, 0): Fraction(1)}, x)

    def antipode_terms(self, word: tuple) -> dict:
        return self.structure.antipode_word_terms(word)

    def coproduct_terms(self, word: tuple) -> dict:
        return self.structure.coproduct_word_terms(word)

    # -- tensors
    def tensor(self, *factors: Space) -> Space:
        raise NotImplementedError

    def project(self, x: ModuleElement) -> ModuleElement:
        raise NotImplementedError

    def rep(self, x: ModuleElement) -> ModuleElement:
        raise NotImplementedError

    def tensor_elements(self, *elements: ModuleElement) -> ModuleElement:
        """``v_1 ⊗_world ... ⊗_world v_m``."""
        return self.project(ktensor(*elements))

    def is_tensor(self, space: Space) -> bool:
        raise NotImplementedError

    def prefix_label(self, space: Space, prefix: tuple):
        """Label of ``space`` corresponding to leading slots of a tensor with it."""
        return prefix if self.is_tensor(space) else prefix[0]

    def prefix_width(self, space: Space) -> int:
        return len(space.factors) if self.is_tensor(space) else 1

    def factors_of(self, space: Space) -> list:
        return list(space.factors) if self.is_tensor(space) else [space]

    def split_last(self, x: ModuleElement):
        """Decompose a tensor element as ``sum (bare basis prefix) ⊗ (last-slot element)``."""
        r = self.rep(x)
        kspace: KTensor = r.space
        m = kspace.arity
        n = kspace.n
        last = kspace.factors[-1]
        groups: dict = defaultdict(dict)
        for (ls, es, k), c in r.terms.items():
            if any(es[:(m - 1) * n]):
                raise ModuleError("representative has non-constant leading slots")
            key = (ls[-1], es[(m - 1) * n:], k)
            groups[ls[:-1]][key] = groups[ls[:-1]].get(key, 0) + c
        return [(prefix, ModuleElement(last, terms)) for prefix, terms in groups.items()]

    def join_last(self, prefix_factors: Sequence[Space], prefix: tuple, last: ModuleElement,
                  project: bool = True) -> ModuleElement:
        parts = [f.basis(l) for f, l in zip(prefix_factors, prefix)] + [last]
        kt = ktensor(*parts)
        return self.project(kt) if project else kt

    # -- modules
    def right(self, x: ModuleElement, a: PolyFunction) -> ModuleElement:
        raise NotImplementedError

    def left(self, a: PolyFunction, x: ModuleElement) -> ModuleElement:
        raise NotImplementedError

    def wedge(self, a: ModuleElement, b: ModuleElement) -> ModuleElement:
        raise NotImplementedError

    def d(self, theta: ModuleElement) -> ModuleElement:
        return exterior_d(self.calc, theta)

    def forms(self, p: int) -> FreeBimodule:
        return self.calc.omega(p)


def act_legs(world: World, legs: dict, x: ModuleElement) -> ModuleElement:
    """Apply ``sum c h^k w_1 ⊗ ... ⊗ w_m`` slotwise to a K-tensor element."""
    space: KTensor = x.space
    order = space.order
    n = space.n
    out: dict = defaultdict(Fraction)
    for (words, j), d in legs.items():
        for (ls, es, k), c in x.terms.items():
            if j + k > order:
                continue
            parts = []
            for i, (f, w) in enumerate(zip(space.factors, words)):
                img = world.act_word_monomial(f, w, ls[i], es[i * n:(i + 1) * n])
                if not img:
                    break
                parts.append(img)
            else:
                for key, v in product_terms(parts, order - j - k).items():
                    l2, e2, k2 = key
                    out[(l2, e2, k2 + j + k)] += v * c * d
    return ModuleElement(space, out)


def act_tensor(world: World, t: TensorElement, x: ModuleElement) -> ModuleElement:
    """Slotwise action of a tensor element of matching arity on a K-tensor element."""
    if t.arity != x.space.arity:
        raise ModuleError(f"arity {t.arity} does not match {x.space.arity} slots")
    return act_legs(world, t.terms, x)


def pi_project(x: ModuleElement) -> ModuleElement:
    """The canonical projection ``π: V_1 ⊗ ... ⊗ V_m → V_1 ⊗_A ... ⊗_A V_m``."""
    space: KTensor = x.space
    target = tensor_over_A(*space.factors)
    n = space.n
    flat = [isinstance(f, ATensor) for f in space.factors]
    out: dict = defaultdict(Fraction)
    for (ls, es, k), c in x.terms.items():
        lab = []
        for is_t, l in zip(flat, ls):
            lab.extend(l if is_t else (l,))
        e = tuple(sum(es[i * n + j] for i in range(space.arity)) for j in range(n))
        out[(tuple(lab), e, k)] += c
    return ModuleElement(target, out)


class Undeformed(World):
    """``H``, the commutative ``A`` and ``⊗_A``."""

    name = "undeformed"

    def mul(self, a: PolyFunction, b: PolyFunction) -> PolyFunction:
        return a * b

    def right(self, x: ModuleElement, a: PolyFunction) -> ModuleElement:
        return x.times(a)

    def left(self, a: PolyFunction, x: ModuleElement) -> ModuleElement:
        return x.times(a)

    def is_tensor(self, space):
        return isinstance(space, ATensor)

    def tensor(self, *factors: Space) -> ATensor:
        return tensor_over_A(*factors)

    def project(self, x: ModuleElement) -> ModuleElement:
        return pi_project(x)

    def rep(self, x: ModuleElement) -> ModuleElement:
        space: ATensor = x.space
        if not isinstance(space, ATensor):
            raise ModuleError("only A-tensor elements have tensor representatives")
        m = len(space.factors)
        kspace = ktensor_space(*space.factors)
        pad = (0,) * (space.n * (m - 1))
        return ModuleElement(kspace, {(l, pad + e, k): c for (l, e, k), c in x.terms.items()})

    def wedge(self, a: ModuleElement, b: ModuleElement) -> ModuleElement:
        return wedge(self.calc, a, b)


class Deformed(World):
    """``H^F``, the star products and ``⊗_{A⋆}``."""

    name = "deformed"
    twisted = True

    def __init__(self, real: Realization, twist: Twist, calc: FormsCalculus | None = None):
        self.twist = twist
        real.algebra.check(twist.algebra)
        super().__init__(real, calc, HopfStructure(real.algebra, twist))
        self._finv = [(w1, w2, k, c) for w1, w2, k, c in twist.inverse_legs()]
        self._dec_cache: dict = {}
        self._bstar_cache: dict = {}
        self._lstar_cache: dict = {}
        self._nf_cache: dict = {}
        self._star_cache: dict = {}

    # -- star products on functions
    def mul(self, a: PolyFunction, b: PolyFunction) -> PolyFunction:
        return PolyFunction(a.ring, self.star_terms(a.terms, b.terms))

    def _star_mono(self, ea, eb) -> dict:
        key = (ea, eb)
        hit = self._star_cache.get(key)
        if hit is None:
            real = self.real
            hit = {}
            for w1, w2, k, c in self._finv:
                left = real.act_word_monomial(w1, ea)
                if not left:
                    continue
                right = real.act_word_monomial(w2, eb)
                if not right:
                    continue
                hit = p_add(hit, p_shift(p_mul(left, right, self.order - k), k, self.order), c)
            self._star_cache[key] = hit
        return hit

    def star_terms(self, a: dict, b: dict) -> dict:
        order = self.order
        out: dict = defaultdict(Fraction)
        for (ea, ka), ca in a.items():
            for (eb, kb), cb in b.items():
                if ka + kb > order:
                    continue
                for (e, k), c in self._star_mono(ea, eb).items():
                    if k + ka + kb <= order:
                        out[(e, k + ka + kb)] += c * ca * cb
        return {k: v for k, v in out.items() if v}

    # -- star actions on free modules
    def _right_mono(self, space: FreeBimodule, label, ev, ea) -> dict:
        """``(e_label x^ev) ⋆ x^ea``."""
        key = ("r", id(space), label, ev, ea)
        hit = self._bstar_cache.get(key)
        if hit is None:
            real = self.real
            hit = {}
            for w1, w2, k, c in self._finv:
                v = space.act_word_monomial(w1, label, ev)
                if not v:
                    continue
                a = real.act_word_monomial(w2, ea)
                if not a:
                    continue
                hit = t_add(hit, t_shift(t_mul_poly(v, a, self.order - k), k, self.order), c)
            self._bstar_cache[key] = (hit, space)
            return hit
        return hit[0]

    def _left_mono(self, space: FreeBimodule, ea, label, ev) -> dict:
        """``x^ea ⋆ (e_label x^ev)``."""
        key = ("l", id(space), ea, label, ev)
        hit = self._lstar_cache.get(key)
        if hit is None:
            real = self.real
            hit = {}
            for w1, w2, k, c in self._finv:
                a = real.act_word_monomial(w1, ea)
                if not a:
                    continue
                v = space.act_word_monomial(w2, label, ev)
                if not v:
                    continue
                hit = t_add(hit, t_shift(t_mul_poly(v, a, self.order - k), k, self.order), c)
            self._lstar_cache[key] = (hit, space)
            return hit
        return hit[0]

    def _bilinear(self, x_terms: dict, a_terms: dict, fn) -> dict:
        order = self.order
        out: dict = defaultdict(Fraction)
        for (l, ev, kv), cv in x_terms.items():
            for (ea, ka), ca in a_terms.items():
                if kv + ka > order:
                    continue
                for (l2, e2, k2), c2 in fn(l, ev, ea).items():
                    if k2 + kv + ka <= order:
                        out[(l2, e2, k2 + kv + ka)] += c2 * cv * ca
        return {k: v for k, v in out.items() if v}

    def right(self, x: ModuleElement, a: PolyFunction) -> ModuleElement:
        space = x.space
        if isinstance(space, StarTensor):
            out: dict = {}
            for label in {l for (l, _, _) in x.terms}:
                g = self.star_terms(t_component(x.terms, label), a.terms)
                out = t_add(out, {(label, e, k): c for (e, k), c in g.items()})
            return ModuleElement(space, out)
        if not isinstance(space, FreeBimodule):
            raise ModuleError(f"no right star action on {space!r}")
        return ModuleElement(space, self._bilinear(
            x.terms, a.terms, lambda l, ev, ea: self._right_mono(space, l, ev, ea)))

    def left(self, a: PolyFunction, x: ModuleElement) -> ModuleElement:
        space = x.space
        if isinstance(space, StarTensor):
            r = self.rep(x)
            return self.project(kt_map_block(r, 0, 1, lambda v: self.left(a, v),
                                             [space.factors[0]]))
        if not isinstance(space, FreeBimodule):
            raise ModuleError(f"no left star action on {space!r}")
        return ModuleElement(space, self._bilinear(
            x.terms, a.terms, lambda l, ev, ea: self._left_mono(space, ea, l, ev)))

    def decompose(self, space: FreeBimodule, label, exps: tuple) -> dict:
        """Coordinates ``g`` with ``sum_α e_α ⋆ g_α = e_label x^exps``.

        Solved by iterated correction; each pass fixes one more order of ``h``.
        """
        key = (id(space), label, exps)
        hit = self._dec_cache.get(key)
        if hit is None:
            target = {(label, exps, 0): Fraction(1)}
            g = dict(target)
            for _ in range(self.order + 2):
                cur = self._basis_star(space, g)
                resid = t_add(target, cur, -1)
                if not resid:
                    break
                g = t_add(g, resid)
            else:
                raise ModuleError("star decomposition did not converge")
            self._dec_cache[key] = (g, space)
            return g
        return hit[0]

    def _basis_star(self, space, coords: dict) -> dict:
        out: dict = {}
        z = (0,) * space.n
        for (l, e, k), c in coords.items():
            img = self._right_mono(space, l, z, e)
            out = t_add(out, t_shift(img, k, self.order), c)
        return out

    def decompose_element(self, v: ModuleElement) -> ModuleElement:
        """Star coordinates of a module element (same space, reinterpreted)."""
        out: dict = {}
        for (l, e, k), c in v.terms.items():
            out = t_add(out, t_shift(self.decompose(v.space, l, e), k, self.order), c)
        return ModuleElement(v.space, out)

    def basis_star(self, v: ModuleElement) -> ModuleElement:
        """Inverse of :meth:`decompose_element`: ``sum e_α ⋆ g_α``."""
        return ModuleElement(v.space, self._basis_star(v.space, v.terms))

    # -- star tensors
    def is_tensor(self, space):
        return isinstance(space, StarTensor)

    def tensor(self, *factors: Space) -> StarTensor:
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, StarTensor) else [f])
        return _cached_tensor(StarTensor, flat, self)

    def _nf_mono(self, factors: tuple, labels: tuple, exps: tuple) -> dict:
        key = (tuple(id(f) for f in factors), labels, exps)
        hit = self._nf_cache.get(key)
        if hit is not None:
            return hit[0]
        n, order = self.real.n, self.order
        first = factors[0]
        dec = self.decompose(first, labels[0], exps[:n])
        if len(factors) == 1:
            out = {((l,), e, k): c for (l, e, k), c in dec.items()}
        else:
            second = factors[1]
            acc: dict = defaultdict(Fraction)
            for (al, ge, gk), gc in dec.items():
                pushed = self._left_mono(second, ge, labels[1], exps[n:2 * n])
                for (l2, e2, k2), c2 in pushed.items():
                    if gk + k2 > order:
                        continue
                    sub = self._nf_mono(factors[1:], (l2,) + labels[2:], e2 + exps[2 * n:])
                    for (ls, e3, k3), c3 in sub.items():
                        if gk + k2 + k3 <= order:
                            acc[((al,) + ls, e3, gk + k2 + k3)] += gc * c2 * c3
            out = {k: v for k, v in acc.items() if v}
        self._nf_cache[key] = (out, factors)
        return out

    def project(self, x: ModuleElement) -> ModuleElement:
        """Star normal form of ``v_1 ⊗ ... ⊗ v_m`` in ``V_1⋆ ⊗_{A⋆} ... ⊗_{A⋆} V_m⋆``."""
        space: KTensor = x.space
        factors = tuple(space.factors)
        target = self.tensor(*factors)
        order = self.order
        out: dict = defaultdict(Fraction)
        for (ls, es, k), c in x.terms.items():
            for (l2, e2, k2), c2 in self._nf_mono(factors, ls, es).items():
                if k + k2 <= order:
                    out[(l2, e2, k + k2)] += c * c2
        return ModuleElement(target, out)

    def rep(self, x: ModuleElement) -> ModuleElement:
        """``e_{L1} ⊗ ... ⊗ (e_{Lm} ⋆ g)`` as a K-tensor element."""
        space: StarTensor = x.space
        if not isinstance(space, StarTensor):
            raise ModuleError("only star-tensor elements have tensor representatives")
        factors = space.factors
        last = factors[-1]
        n = space.n
        kspace = ktensor_space(*factors)
        pad = (0,) * (n * (len(factors) - 1))
        out: dict = {}
        z = (0,) * n
        for (ls, e, k), c in x.terms.items():
            img = self._right_mono(last, ls[-1], z, e)
            for (l2, e2, k2), c2 in img.items():
                if k + k2 <= self.order:
                    key = (ls[:-1] + (l2,), pad + e2, k + k2)
                    out[key] = out.get(key, 0) + c * c2
        return ModuleElement(kspace, out)

    def _act_word_other(self, space, word, label, exps) -> dict:
        if isinstance(space, StarTensor):
            mono = ModuleElement(space, {(label, exps, 0): Fraction(1)})
            r = self.rep(mono)
            legs = self.structure.iterated_coproduct_word(word, len(space.factors))
            return self.project(act_legs(self, legs, r)).terms
        return super()._act_word_other(space, word, label, exps)

    def wedge(self, a: ModuleElement, b: ModuleElement) -> ModuleElement:
        return star_wedge(self, a, b)


# ---------------------------------------------------------------------------
# module-level operations


def module_act(world: World, xi: HopfElement, v: ModuleElement) -> ModuleElement:
    return world.act(xi, v)


def star_left_act(world: Deformed, a: PolyFunction, v: ModuleElement) -> ModuleElement:
    """``a ⋆ v = (f̄^α ▷ a)(f̄_α ▷ v)``."""
    return world.left(a, v)


def star_right_act(world: Deformed, v: ModuleElement, a: PolyFunction) -> ModuleElement:
    """``v ⋆ a = (f̄^α ▷ v)(f̄_α ▷ a)``."""
    return world.right(v, a)


def star_wedge(world: Deformed, a: ModuleElement, b: ModuleElement) -> ModuleElement:
    """``θ ∧⋆ θ' = (f̄^α ▷ θ) ∧ (f̄_α ▷ θ')``."""
    calc = world.calc
    p, q = a.space.degree, b.space.degree
    target = calc.omega(min(p + q, calc.n))
    if p + q > calc.n:
        return target.zero()
    out: dict = {}
    order = world.order
    for w1, w2, k, c in world.twist.inverse_legs():
        x = a.space.act_word(w1, a.terms)
        if not x:
            continue
        y = b.space.act_word(w2, b.terms)
        if not y:
            continue
        out = t_add(out, t_shift(wedge_terms(calc, x, y), k, order), c)
    return ModuleElement(target, out)


def tensor_over_Astar(world: Deformed, *elements: ModuleElement) -> ModuleElement:
    return world.project(ktensor(*elements))


def tensor_over_A_elements(*elements: ModuleElement) -> ModuleElement:
    return pi_project(ktensor(*elements))


def twist_inverse_power(twist: Twist, m: int) -> TensorElement:
    """``F^{-1}_(m)``: ``(Δ^(m-1) ⊗ id)(F^{-1}) · (F^{-1}_(m-1) ⊗ 1)``."""
    alg = twist.algebra
    if m == 1:
        return TensorElement(alg, 1, {(((),), 0): Fraction(1)})
    if m == 2:
        return twist.F_inv
    prev = twist_inverse_power(twist, m - 1)
    base = twist.F_inv
    for _ in range(m - 2):
        base = base.coproduct_leg(0)
    return base * prev.embed(tuple(range(m - 1)), m)


def twist_power(twist: Twist, m: int) -> TensorElement:
    """``F_(m) = (F_(m-1) ⊗ 1)^{-1}``-compatible inverse of :func:`twist_inverse_power`."""
    if m == 2:
        return twist.F
    prev = twist_power(twist, m - 1)
    base = twist.F
    for _ in range(m - 2):
        base = base.coproduct_leg(0)
    return prev.embed(tuple(range(m - 1)), m) * base


def phi(world: Deformed, x: ModuleElement, f_inv: TensorElement | None = None) -> ModuleElement:
    """``φ: V_1⋆ ⊗_{A⋆} ... → (V_1 ⊗_A ...)⋆``, ``v ⊗⋆ w ↦ (f̄^α ▷ v) ⊗_A (f̄_α ▷ w)``.

    ``f_inv`` overrides the iterated inverse twist (used for fault injection).
    """
    space: StarTensor = x.space
    m = len(space.factors)
    if f_inv is None:
        f_inv = twist_inverse_power(world.twist, m)
    r = world.rep(x)
    acted = act_legs(_UNDEFORMED_ACTOR, f_inv.terms, r)
    return pi_project(acted)


class _PlainActor:
    """Undeformed slot actions on free modules (used by φ)."""

    def act_word_monomial(self, space, word, label, exps):
        if not isinstance(space, FreeBimodule):
            raise ModuleError("φ acts on free module slots only")
        return space.act_word_monomial(word, label, exps)


_UNDEFORMED_ACTOR = _PlainActor()


def phi_inverse(world: Deformed, y: ModuleElement, factors: Sequence[Space] | None = None) -> ModuleElement:
    """Inverse of :func:`phi` by fixed-point correction (``φ = id + O(h)``)."""
    space: ATensor = y.space
    factors = list(factors) if factors is not None else list(space.factors)
    target = world.tensor(*factors)
    conv = _label_converter(target, space)
    x = ModuleElement(target, {(conv[l], e, k): c for (l, e, k), c in y.terms.items()})
    for _ in range(world.order + 2):
        resid = y - phi(world, x)
        if not resid:
            return x
        x = x + ModuleElement(target, {(conv[l], e, k): c for (l, e, k), c in resid.terms.items()})
    raise ModuleError("φ inversion did not converge")


def phi_inverse_direct(world: Deformed, y: ModuleElement,
                       factors: Sequence[Space] | None = None) -> ModuleElement:
    """``φ^{-1}`` computed independently: act with ``F_(m)`` and take the star normal form."""
    space: ATensor = y.space
    factors = list(factors) if factors is not None else list(space.factors)
    m = len(factors)
    f = twist_power(world.twist, m) if m > 1 else None
    kspace = ktensor_space(*factors)
    conv = _label_converter(world.tensor(*factors), space)
    inv = {v: k for k, v in conv.items()}
    n = space.n
    pad = (0,) * (n * (m - 1))
    terms = {(inv[l], pad + e, k): c for (l, e, k), c in y.terms.items()}
    r = ModuleElement(kspace, terms)
    if f is not None:
        r = act_legs(_UNDEFORMED_ACTOR, f.terms, r)
    return world.project(r)


def _label_converter(star_space: StarTensor, a_space: ATensor) -> dict:
    """Map flattened A-tensor labels to (possibly nested) star-tensor labels."""
    out = {}
    for lab in star_space.labels:
        flat = []
        for f, l in zip(star_space.factors, lab):
            flat.extend(l if isinstance(f, ATensor) else (l,))
        out[tuple(flat)] = lab
    if set(out) != set(a_space.labels):
        raise ModuleError("star tensor and A-tensor bases do not match")
    return out


# ---------------------------------------------------------------------------
# checks


def verify_quasi_commutative_module(world: World, r, space: FreeBimodule, degree: int) -> Verdict:
    """``v · a = (R̄^α ▷ a) · (R̄_α ▷ v)`` with the world's bimodule actions."""
    col = Collector()
    ring = world.ring
    legs = list(r.inverse_legs())
    for v in space.monomial_basis(degree):
        for e in ring.monomials(degree):
            a = ring.monomial(e)
            lhs = world.right(v, a)
            rhs = space.zero()
            for w1, w2, k, c in legs:
                aa = PolyFunction(ring, world.real.act_word(w1, a.terms))
                vv = world.act_word(w2, v)
                if not aa or not vv:
                    continue
                rhs = rhs + ModuleElement(space, t_shift(world.left(aa, vv).terms, k,
                                                         world.order)).scale(c)
            col.record((lhs - rhs).terms, f"v={v}, a={a}")
    return col.verdict(f"{col.count} samples on {space.name}")


def verify_star_bimodule(world: Deformed, space: FreeBimodule, degree: int) -> Verdict:
    """Associativity of the star actions (left, right and mixed)."""
    col = Collector()
    ring = world.ring
    monos = [ring.monomial(e) for e in ring.monomials(degree)]
    for v in space.monomial_basis(degree):
        for a in monos:
            for b in monos:
                ab = world.mul(a, b)
                col.record((world.left(ab, v) - world.left(a, world.left(b, v))).terms,
                           f"(a⋆b)⋆v, a={a}, b={b}, v={v}")
                col.record((world.right(v, ab) - world.right(world.right(v, a), b)).terms,
                           f"(v⋆a)⋆b, a={a}, b={b}, v={v}")
                col.record((world.right(world.left(a, v), b) -
                            world.left(a, world.right(v, b))).terms,
                           f"(a⋆v)⋆b, a={a}, b={b}, v={v}")
    return col.verdict(f"{col.count} samples")


def verify_coherence(world: Deformed, V: FreeBimodule, W: FreeBimodule, Z: FreeBimodule,
                     degree: int = 1, phi2=None) -> Verdict:
    """Both ways of identifying ``V⋆⊗⋆W⋆⊗⋆Z⋆`` with ``(V⊗W⊗Z)⋆`` agree.

    ``phi2(world, x)`` replaces the two-factor ``φ`` (fault injection).
    """
    phi2 = phi2 or phi
    col = Collector()
    VW = tensor_over_A(V, W)
    WZ = tensor_over_A(W, Z)
    triple = world.tensor(V, W, Z)
    for x in triple.monomial_basis(degree):
        r = world.rep(x)
        # (φ_{V⊗W,Z}) ∘ (φ_{V,W} ⊗ id)
        left = kt_map_block(r, 0, 2, lambda y: phi2(world, world.project(y)), [VW])
        path_a = phi2(world, world.project(left))
        # (φ_{V,W⊗Z}) ∘ (id ⊗ φ_{W,Z})
        right = kt_map_block(r, 1, 3, lambda y: phi2(world, world.project(y)), [WZ])
        path_b = phi2(world, world.project(right))
        col.record((path_a - path_b).terms, f"basis {x}")
    return col.verdict(f"{col.count} basis samples")
