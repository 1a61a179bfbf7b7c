"""Linear maps between modules, adjoint actions, the quantization map and braidings.

Maps between free bimodules are :class:`OperatorMatrix` objects: a matrix
of polynomial differential operators in Weyl normal form.  That class is
closed under composition, the adjoint actions and ``D_F``, and its equality
test is exact.  Maps that pass through star normal forms are wrapped as
:class:`FunctionMap` and compared on samples.
"""
from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Sequence

from .bimod import (Deformed, FreeBimodule, KTensor, ModuleElement, Space, Undeformed, World, act_legs, kt_permute, ktensor, ktensor_space)
from .funcalg import (PolyFunction, op_apply_monomial, op_compose, op_from_poly,
                      op_identity, p_add, render_op)
from .hopf import HopfElement, RMatrix, TensorElement, Twist
from .series import ConfigurationError
from .verdict import Collector, Verdict, combine


class MapError(ConfigurationError):
    pass


class LinearMap:
    """A ground-ring-linear map ``source → target``."""

    source: Space
    target: Space
    right_linear: bool = False

    def __call__(self, x: ModuleElement) -> ModuleElement:
        raise NotImplementedError

    def _check_input(self, x: ModuleElement):
        if x.space is not self.source:
            raise MapError(f"map expects elements of {self.source.name}, got {x.space.name}")


class FunctionMap(LinearMap):
    def __init__(self, source: Space, target: Space, fn: Callable, name: str = "map",
                 right_linear: bool = False):
        self.source = source
        self.target = target
        self.fn = fn
        self.name = name
        self.right_linear = right_linear

    def __call__(self, x):
        self._check_input(x)
        y = self.fn(x)
        if y.space is not self.target:
            raise MapError(f"{self.name} produced {y.space.name}, expected {self.target.name}")
        return y

    def __repr__(self):
        return f"FunctionMap({self.name}: {self.source.name} → {self.target.name})"


class OperatorMatrix(LinearMap):
    """``(P v)_β = sum_α P^β_α (v_α)`` with ``P^β_α`` differential operators.

    ``right_linear`` marks maps whose entries are pure multiplications, i.e.
    right ``A``-linear maps of central-basis modules.
    """

    def __init__(self, source: Space, target: Space, entries: dict, name: str = "P"):
        if source.nvars != target.nvars:
            raise MapError("operator matrices need source and target in the same variables")
        self.source = source
        self.target = target
        self.order = source.order
        clean = {}
        for (b, a), op in entries.items():
            target.label_position(b)
            source.label_position(a)
            op = {k: v for k, v in op.items() if v and k[2] <= self.order}
            if op:
                clean[(b, a)] = op
        self.entries = clean
        self.name = name
        self._cache: dict = {}

    @property
    def right_linear(self) -> bool:
        return all(not any(d) for op in self.entries.values() for (_, d, _) in op)

    @property
    def linearity(self) -> str:
        return "right_A_linear" if self.right_linear else "k_linear"

    def _by_source(self):
        grouped = getattr(self, "_grouped", None)
        if grouped is None:
            grouped = defaultdict(list)
            for (b, a), op in self.entries.items():
                grouped[a].append((b, op))
            self._grouped = grouped
        return grouped

    def apply_monomial(self, label, exps) -> dict:
        key = (label, exps)
        hit = self._cache.get(key)
        if hit is None:
            hit = {}
            for b, op in self._by_source().get(label, ()):
                for (e, k), c in op_apply_monomial(op, exps, self.order).items():
                    hit[(b, e, k)] = hit.get((b, e, k), 0) + c
            hit = {k: v for k, v in hit.items() if v}
            self._cache[key] = hit
        return hit

    def __call__(self, x):
        self._check_input(x)
        out: dict = defaultdict(Fraction)
        order = self.order
        for (l, e, k), c in x.terms.items():
            for (b, e2, k2), c2 in self.apply_monomial(l, e).items():
                if k + k2 <= order:
                    out[(b, e2, k + k2)] += c * c2
        return ModuleElement(self.target, out)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.target is not self.source:
            raise MapError(f"cannot compose {self.name} after {other.name}: "
                           f"{other.target.name} ≠ {self.source.name}")
        out: dict = defaultdict(dict)
        left = defaultdict(list)
        for (b, m), op in self.entries.items():
            left[m].append((b, op))
        for (m, a), op2 in other.entries.items():
            for b, op1 in left.get(m, ()):
                out[(b, a)] = p_add(out[(b, a)], op_compose(op1, op2, self.order))
        return OperatorMatrix(other.source, self.target, out, name=f"{self.name}∘{other.name}")

    def _same(self, other):
        if not isinstance(other, OperatorMatrix) or other.source is not self.source \
                or other.target is not self.target:
            raise MapError("operator matrices with different shapes")

    def __add__(self, other):
        self._same(other)
        out = dict(self.entries)
        for key, op in other.entries.items():
            out[key] = p_add(out.get(key, {}), op)
        return OperatorMatrix(self.source, self.target, out, name=self.name)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c, hpow: int = 0) -> "OperatorMatrix":
        out = {}
        for key, op in self.entries.items():
            out[key] = {(x, d, k + hpow): v * c for (x, d, k), v in op.items()
                        if k + hpow <= self.order}
        return OperatorMatrix(self.source, self.target, out, name=self.name)

    def __eq__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return (self.source is other.source and self.target is other.target
                and self.entries == other.entries)

    def __hash__(self):
        return hash(frozenset((k, frozenset(v.items())) for k, v in self.entries.items()))

    def diff_terms(self, other: "OperatorMatrix") -> dict:
        """Flattened nonzero entries of ``self - other`` keyed with the h-power last."""
        d = (self - other).entries
        return {(key, x, dd, k): c for key, op in d.items() for (x, dd, k), c in op.items()}

    def __str__(self):
        if not self.entries:
            return "0"
        rows = []
        for (b, a), op in sorted(self.entries.items(),
                                 key=lambda it: (self.target.label_position(it[0][0]),
                                                 self.source.label_position(it[0][1]))):
            rows.append(f"[{self.target.label_name(b)} ← {self.source.label_name(a)}] {render_op(op)}")
        return "; ".join(rows)

    def __repr__(self):
        return f"OperatorMatrix({self.name}: {self.source.name} → {self.target.name})"


# ---------------------------------------------------------------------------
# constructors


def identity_map(space: Space) -> OperatorMatrix:
    one = op_identity(space.nvars)
    return OperatorMatrix(space, space, {(l, l): one for l in space.labels}, name="id")


def zero_map(source: Space, target: Space) -> OperatorMatrix:
    return OperatorMatrix(source, target, {}, name="0")


def left_multiplication(space: Space, a: PolyFunction) -> OperatorMatrix:
    """``l_a``: ``v ↦ a·v`` on a central-basis module."""
    op = op_from_poly(a.terms, space.nvars)
    return OperatorMatrix(space, space, {(l, l): op for l in space.labels}, name=f"l[{a}]")


def entry_map(source: Space, target: Space, grid: dict, name: str = "P") -> OperatorMatrix:
    """Build a map from ``{(β, α): [(poly, word), ...]}`` grids.

    The entry acts on the ``α`` coefficient function by ``sum poly · (word ▷ f)``
    using the realization on functions, so it ignores the module's own matrices.
    """
    real = source.real
    entries: dict = {}
    for key, pairs in grid.items():
        op: dict = {}
        for poly, word in pairs:
            if isinstance(word, str):
                word = real.pres.parse_word(word)
            w = real.word_op(tuple(word))
            op = p_add(op, op_compose(op_from_poly(poly.terms, source.nvars), w, source.order))
        entries[key] = op
    return OperatorMatrix(source, target, entries, name=name)


_WORD_MATRIX: dict = {}


def word_matrix(space: FreeBimodule, word: tuple) -> OperatorMatrix:
    """``L_word`` on a free bimodule as an operator matrix."""
    key = (id(space), word)
    hit = _WORD_MATRIX.get(key)
    if hit is not None and hit[1] is space:
        return hit[0]
    if not word:
        m = identity_map(space)
    else:
        real = space.real
        a = word[0]
        entries: dict = defaultdict(dict)
        field = real._gen_ops[a]
        for l in space.labels:
            entries[(l, l)] = dict(field)
        for (b, al), poly in space.matrices[a].items():
            entries[(b, al)] = p_add(entries[(b, al)], op_from_poly(poly, space.nvars))
        gen = OperatorMatrix(space, space, entries, name=real.pres.names[a])
        m = gen @ word_matrix(space, word[1:]) if len(word) > 1 else gen
    _WORD_MATRIX[key] = (m, space)
    return m


def action_matrix(space: FreeBimodule, terms: dict) -> OperatorMatrix:
    """``ξ ▷ -`` on a free bimodule for ``ξ`` given by its term dict."""
    out: dict = {}
    order = space.order
    for (w, k), c in terms.items():
        for key, op in word_matrix(space, w).entries.items():
            shifted = {(x, d, j + k): v * c for (x, d, j), v in op.items() if j + k <= order}
            out[key] = p_add(out.get(key, {}), shifted)
    return OperatorMatrix(space, space, out, name="ξ▷")


def compose(P: LinearMap, Q: LinearMap) -> LinearMap:
    """``P ∘ Q``."""
    if Q.target is not P.source:
        raise MapError(f"cannot compose: {Q.target.name} ≠ {P.source.name}")
    if isinstance(P, OperatorMatrix) and isinstance(Q, OperatorMatrix):
        return P @ Q
    return FunctionMap(Q.source, P.target, lambda x: P(Q(x)),
                       name=f"{getattr(P, 'name', 'P')}∘{getattr(Q, 'name', 'Q')}")


def add_maps(P: LinearMap, Q: LinearMap, scale=1) -> LinearMap:
    if P.source is not Q.source or P.target is not Q.target:
        raise MapError("cannot add maps with different shapes")
    if isinstance(P, OperatorMatrix) and isinstance(Q, OperatorMatrix):
        return P + Q.scale(scale)
    return FunctionMap(P.source, P.target, lambda x: P(x) + Q(x).scale(scale),
                       name=f"{getattr(P, 'name', 'P')}+{getattr(Q, 'name', 'Q')}")


def _is_free(space) -> bool:
    return isinstance(space, FreeBimodule)


def _space_action(world: World, space: Space, terms: dict):
    """``ξ ▷ -`` on ``space`` as a callable, exact matrix when possible."""
    if _is_free(space):
        return action_matrix(space, terms)
    return FunctionMap(space, space, lambda x: world.act_terms(terms, x), name="ξ▷")


def adjoint_terms(world: World, xi_terms: dict, P: LinearMap) -> LinearMap:
    """``ξ ▶ P = ξ_1 ▷ ∘ P ∘ S(ξ_2) ▷`` with the world's coproduct and antipode."""
    order = world.order
    acc = None
    for (w, k), c in xi_terms.items():
        for ((w1, w2), j), d in world.coproduct_terms(w).items():
            if k + j > order:
                continue
            s_terms = {}
            for (v, i), e in world.antipode_terms(w2).items():
                if k + j + i <= order:
                    s_terms[(v, k + j + i)] = s_terms.get((v, k + j + i), 0) + e * c * d
            if not s_terms:
                continue
            left = _space_action(world, P.target, {(w1, 0): Fraction(1)})
            right = _space_action(world, P.source, s_terms)
            term = compose(compose(left, P), right)
            acc = term if acc is None else add_maps(acc, term)
    if acc is None:
        return zero_map(P.source, P.target) if isinstance(P, OperatorMatrix) and \
            _is_free(P.source) and _is_free(P.target) else \
            FunctionMap(P.source, P.target, lambda x: P.target.zero(), name="0")
    return acc


def adjoint_act(world: World, xi: HopfElement, P: LinearMap) -> LinearMap:
    """``ξ ▶ P``; in the deformed world this is ``ξ ▶_F P`` built from ``Δ^F`` and ``S^F``."""
    world.algebra.check(xi.algebra)
    return adjoint_terms(world, xi.terms, P)


def adjoint_act_F(world: Deformed, xi: HopfElement, P: LinearMap) -> LinearMap:
    if not world.twisted:
        raise MapError("the twisted adjoint action needs the deformed world")
    return adjoint_act(world, xi, P)


def d_quantize(undeformed: Undeformed, twist: Twist, P: LinearMap) -> LinearMap:
    """``D_F(P) = (f̄^α ▶ P) ∘ f̄_α ▷`` with the undeformed adjoint action."""
    acc = None
    for w1, w2, k, c in twist.inverse_legs():
        left = adjoint_terms(undeformed, {(w1, k): c}, P)
        term = compose(left, _space_action(undeformed, P.source, {(w2, 0): Fraction(1)}))
        acc = term if acc is None else add_maps(acc, term)
    return _named(acc, f"D_F({getattr(P, 'name', 'P')})")


def d_quantize_inverse(undeformed: Undeformed, twist: Twist, P: LinearMap) -> LinearMap:
    """``D_F^{-1}(P) = f̄^α ▷ ∘ P ∘ χ S(f̄_α) ▷``."""
    alg = twist.algebra
    acc = None
    for w1, w2, k, c in twist.inverse_legs():
        right_el = twist.chi * HopfElement(alg, {(w2, k): c}).antipode()
        left = _space_action(undeformed, P.target, {(w1, 0): Fraction(1)})
        right = _space_action(undeformed, P.source, right_el.terms)
        term = compose(compose(left, P), right)
        acc = term if acc is None else add_maps(acc, term)
    return _named(acc, f"D_F⁻¹({getattr(P, 'name', 'P')})")


def d_quantize_alternative(undeformed: Undeformed, twist: Twist, P: LinearMap) -> LinearMap:
    """``f^β ▷ ∘ P ∘ S(f_β) χ^{-1} ▷``, an equivalent expression for ``D_F(P)``."""
    alg = twist.algebra
    acc = None
    for w1, w2, k, c in twist.legs():
        right_el = HopfElement(alg, {(w2, k): c}).antipode() * twist.chi_inv
        left = _space_action(undeformed, P.target, {(w1, 0): Fraction(1)})
        right = _space_action(undeformed, P.source, right_el.terms)
        term = compose(compose(left, P), right)
        acc = term if acc is None else add_maps(acc, term)
    return _named(acc, f"D_F'({getattr(P, 'name', 'P')})")


def star_compose(undeformed: Undeformed, twist: Twist | None, P: LinearMap, Q: LinearMap) -> LinearMap:
    """``P ∘⋆ Q = (f̄^α ▶ P) ∘ (f̄_α ▶ Q)``; plain composition without a twist."""
    if twist is None:
        return compose(P, Q)
    acc = None
    for w1, w2, k, c in twist.inverse_legs():
        left = adjoint_terms(undeformed, {(w1, k): c}, P)
        right = adjoint_terms(undeformed, {(w2, 0): Fraction(1)}, Q)
        term = compose(left, right)
        acc = term if acc is None else add_maps(acc, term)
    return acc


def _named(m: LinearMap, name: str) -> LinearMap:
    m.name = name
    return m


# ---------------------------------------------------------------------------
# comparing maps


def sample_elements(space: Space, degree: int, count: int | None = None, rng=None):
    """Monomial basis elements up to ``degree``; a seeded subset when ``count`` is given."""
    basis = space.monomial_basis(degree)
    if count is not None and count < len(basis):
        rng = rng or random.Random(0)
        basis = rng.sample(basis, count)
    return basis


def random_elements(space: Space, degree: int, count: int, rng: random.Random, terms: int = 3):
    """Seeded random combinations of basis monomials with small rational coefficients."""
    basis = space.monomial_basis(degree)
    out = []
    for _ in range(count):
        v = space.zero()
        for b in rng.sample(basis, min(terms, len(basis))):
            c = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            v = v + b.scale(c)
        out.append(v)
    return out


def compare_maps(P: LinearMap, Q: LinearMap, samples, label: str = "") -> Verdict:
    """Exact comparison for operator matrices, otherwise on the given samples."""
    if P.source is not Q.source or P.target is not Q.target:
        raise MapError(f"cannot compare maps {P!r} and {Q!r}")
    if isinstance(P, OperatorMatrix) and isinstance(Q, OperatorMatrix):
        diff = P.diff_terms(Q)
        if diff:
            order = min(key[-1] for key in diff)
            return Verdict.fail(order, f"{label} operator entries differ")
        return Verdict.ok(f"{label} exact")
    col = Collector()
    for x in samples:
        col.record((P(x) - Q(x)).terms, f"{label} on {x}")
    return col.verdict(f"{label} {col.count} samples")


# ---------------------------------------------------------------------------
# braidings and R-tensor products


def tau(world: World, r: RMatrix, x: ModuleElement, i: int = 0) -> ModuleElement:
    """``τ_R`` on slots ``i, i+1`` of a K-tensor: ``w ⊗ v ↦ (R̄^α ▷ v) ⊗ (R̄_α ▷ w)``."""
    space: KTensor = x.space
    m = space.arity
    perm = list(range(m))
    perm[i], perm[i + 1] = perm[i + 1], perm[i]
    swapped = kt_permute(x, perm)
    legs = _legs_at(r.R_inv, i, m)
    return act_legs(world, legs, swapped)


def tau_inverse(world: World, r: RMatrix, x: ModuleElement, i: int = 0) -> ModuleElement:
    """``τ_R^{-1}`` on slots ``i, i+1``: ``v ⊗ w ↦ (R_α ▷ w) ⊗ (R^α ▷ v)``."""
    space: KTensor = x.space
    m = space.arity
    perm = list(range(m))
    perm[i], perm[i + 1] = perm[i + 1], perm[i]
    swapped = kt_permute(x, perm)
    legs = _legs_at(r.R.flip(), i, m)
    return act_legs(world, legs, swapped)


def _legs_at(t: TensorElement, i: int, m: int) -> dict:
    return t.embed((i, i + 1), m).terms


class QuasiCommutativityRequired(MapError):
    pass


def certify_quasi_commutative(world: World, r: RMatrix, spaces: Sequence[Space], degree: int = 1):
    """Run the quasi-commutativity check on each space and remember passes on the world."""
    from .bimod import verify_quasi_commutative_module

    certs = world.__dict__.setdefault("_qc_certificates", {})
    verdicts = []
    for s in spaces:
        for f in world.factors_of(s):
            key = (id(f), id(r))
            if key not in certs:
                certs[key] = (verify_quasi_commutative_module(world, r, f, degree), f, r)
            verdicts.append(certs[key][0])
    return combine(verdicts)


def _require_certificates(world: World, r: RMatrix, spaces: Sequence[Space]):
    certs = world.__dict__.get("_qc_certificates", {})
    for s in spaces:
        for f in world.factors_of(s):
            hit = certs.get((id(f), id(r)))
            if hit is None or not hit[0]:
                raise QuasiCommutativityRequired(
                    f"{f.name} has no quasi-commutativity certificate for this R-matrix; "
                    "run certify_quasi_commutative first")


def tau_quotient(world: World, r: RMatrix, x: ModuleElement, i: int = 0) -> ModuleElement:
    """``τ_R`` descended to the tensor product over the algebra."""
    _require_certificates(world, r, x.space.factors)
    return world.project(tau(world, r, world.rep(x), i))


def tau_inverse_quotient(world: World, r: RMatrix, x: ModuleElement, i: int = 0) -> ModuleElement:
    _require_certificates(world, r, x.space.factors)
    return world.project(tau_inverse(world, r, world.rep(x), i))


def slot_factors(world: World, space: Space) -> list:
    """The K-tensor slots that represent elements of ``space``."""
    if isinstance(space, KTensor):
        return list(space.factors)
    return world.factors_of(space)


def _slot_element(world, source, labels, exps):
    """The element of ``source`` given by a monomial over its K-tensor slots."""
    if isinstance(source, KTensor):
        return ModuleElement(source, {(tuple(labels), exps, 0): Fraction(1)})
    if len(labels) == 1 and not world.is_tensor(source):
        return ModuleElement(source, {(labels[0], exps, 0): Fraction(1)})
    kspace = ktensor_space(*world.factors_of(source))
    return world.project(ModuleElement(kspace, {(tuple(labels), exps, 0): Fraction(1)}))


def apply_pair(world: World, x: ModuleElement, P: LinearMap, Q: LinearMap) -> ModuleElement:
    """``(P ⊗ Q)(x)`` for a K-tensor ``x`` whose slots are those of ``P.source`` then ``Q.source``."""
    space: KTensor = x.space
    n = space.n
    split = len(slot_factors(world, P.source))
    expected = slot_factors(world, P.source) + slot_factors(world, Q.source)
    if list(space.factors) != expected:
        raise MapError(f"tensor of maps expects slots {expected}, got {space.factors}")
    target = ktensor_space(*(slot_factors(world, P.target) + slot_factors(world, Q.target)))
    cache_p: dict = {}
    cache_q: dict = {}
    out: dict = defaultdict(Fraction)
    order = space.order
    for (ls, es, k), c in x.terms.items():
        a_key = (ls[:split], es[:split * n])
        b_key = (ls[split:], es[split * n:])
        if a_key not in cache_p:
            cache_p[a_key] = expand(world, P(_slot_element(world, P.source, *a_key)))
        if b_key not in cache_q:
            cache_q[b_key] = expand(world, Q(_slot_element(world, Q.source, *b_key)))
        for (l1, e1, k1), c1 in cache_p[a_key].terms.items():
            if k + k1 > order:
                continue
            for (l2, e2, k2), c2 in cache_q[b_key].terms.items():
                if k + k1 + k2 <= order:
                    out[(tuple(l1) + tuple(l2), e1 + e2, k + k1 + k2)] += c * c1 * c2
    return ModuleElement(target, out)


def expand(world: World, x: ModuleElement) -> ModuleElement:
    """A K-tensor representative: world tensors unfold, plain modules become one slot."""
    if isinstance(x.space, KTensor):
        return x
    if world.is_tensor(x.space):
        return world.rep(x)
    return ktensor(x)


def tensor_of_maps(world: World, P: LinearMap, Q: LinearMap, name: str = "P⊗Q") -> FunctionMap:
    """``P ⊗ Q`` on K-tensors."""
    source = ktensor_space(*(slot_factors(world, P.source) + slot_factors(world, Q.source)))
    target = ktensor_space(*(slot_factors(world, P.target) + slot_factors(world, Q.target)))
    return FunctionMap(source, target, lambda x: apply_pair(world, x, P, Q), name=name)


def tensor_R(world: World, r: RMatrix, P: LinearMap, Q: LinearMap,
             flipped: bool = False) -> FunctionMap:
    """``P ⊗_R Q = (P ∘ R̄^α ▷) ⊗ (R̄_α ▶ Q)`` on K-tensors.

    ``flipped`` swaps the legs of ``R^{-1}``; it exists only to inject faults.
    """
    pieces = []
    for w1, w2, k, c in r.inverse_legs():
        if flipped:
            w1, w2 = w2, w1
        left = compose(P, _space_action(world, P.source, {(w1, 0): Fraction(1)}))
        right = adjoint_terms(world, {(w2, k): c}, Q)
        pieces.append(tensor_of_maps(world, left, right))
    first = pieces[0]

    def apply(x):
        out = first(x)
        for m in pieces[1:]:
            out = out + m(x)
        return out

    return FunctionMap(first.source, first.target, apply,
                       name=f"{getattr(P, 'name', 'P')}⊗_R{getattr(Q, 'name', 'Q')}")


def tensor_R_quotient(world: World, r: RMatrix, P: LinearMap, Q: LinearMap) -> FunctionMap:
    """``⊗_R`` descended to the tensor product over the algebra.

    Needs quasi-commutativity certificates for all factors involved.
    """
    _require_certificates(world, r, [P.source, Q.source, P.target, Q.target])
    k_level = tensor_R(world, r, P, Q)
    source = world.tensor(P.source, Q.source)
    target = world.tensor(P.target, Q.target)
    return FunctionMap(source, target, lambda x: world.project(k_level(world.rep(x))),
                       name=k_level.name)


def concat(*parts: ModuleElement) -> ModuleElement:
    """Tensor product of K-tensor elements, concatenating slots."""
    factors = []
    for p in parts:
        factors.extend(p.space.factors)
    space = ktensor_space(*factors)
    acc = {((), (), 0): Fraction(1)}
    order = space.order
    for p in parts:
        nxt: dict = defaultdict(Fraction)
        for (ls, es, k), c in acc.items():
            for (l, e, j), d in p.terms.items():
                if k + j <= order:
                    nxt[(ls + tuple(l), es + e, k + j)] += c * d
        acc = nxt
    return ModuleElement(space, {k: v for k, v in acc.items() if v})


def combine_elements(world: World, *parts: ModuleElement, project: bool = True) -> ModuleElement:
    """``x_1 ⊗ x_2 ⊗ ...`` over the world's algebra, for module or tensor elements."""
    kt = concat(*(expand(world, p) for p in parts))
    return world.project(kt) if project else kt


# ---------------------------------------------------------------------------
# checks


def verify_d_homomorphism(U: Undeformed, twist: Twist, pairs) -> Verdict:
    """``D_F(P ∘⋆ Q) = D_F(P) ∘ D_F(Q)``."""
    vs = []
    for P, Q in pairs:
        lhs = d_quantize(U, twist, star_compose(U, twist, P, Q))
        rhs = compose(d_quantize(U, twist, P), d_quantize(U, twist, Q))
        vs.append(compare_maps(lhs, rhs, [], f"P={P}, Q={Q}"))
    return combine(vs)


def verify_intertwining(U: Undeformed, D: Deformed, twist: Twist, samples) -> Verdict:
    """``D_F(ξ ▶ P) = ξ ▶_F D_F(P)``."""
    vs = []
    for xi, P in samples:
        lhs = d_quantize(U, twist, adjoint_act(U, xi, P))
        rhs = adjoint_act(D, xi, d_quantize(U, twist, P))
        vs.append(compare_maps(lhs, rhs, [], f"ξ={xi}, P={P}"))
    return combine(vs)


def verify_d_inverse(U: Undeformed, twist: Twist, maps) -> Verdict:
    vs = []
    for P in maps:
        vs.append(compare_maps(d_quantize(U, twist, d_quantize_inverse(U, twist, P)), P, [],
                               f"D_F∘D_F⁻¹ on {P}"))
        vs.append(compare_maps(d_quantize_inverse(U, twist, d_quantize(U, twist, P)), P, [],
                               f"D_F⁻¹∘D_F on {P}"))
    return combine(vs)


def verify_d_alternative(U: Undeformed, twist: Twist, maps) -> Verdict:
    return combine([compare_maps(d_quantize(U, twist, P), d_quantize_alternative(U, twist, P), [],
                                 f"two forms of D_F on {P}") for P in maps])


def verify_right_linear_restriction(U: Undeformed, D: Deformed, twist: Twist, maps,
                                    degree: int) -> Verdict:
    """Right ``A``-linear ``P`` quantize to right ``A⋆``-linear maps."""
    col = Collector()
    ring = U.ring
    for P in maps:
        if not P.right_linear:
            raise MapError(f"{P} is not right A-linear")
        DP = d_quantize(U, twist, P)
        for v in P.source.monomial_basis(degree):
            for e in ring.monomials(degree):
                a = ring.monomial(e)
                col.record((DP(D.right(v, a)) - D.right(DP(v), a)).terms, f"P={P}, v={v}, a={a}")
    return col.verdict(f"{col.count} samples")


def verify_braid_relations(world: World, r: RMatrix, x_samples, inverse: bool = True,
                           quotient: bool = False) -> Verdict:
    """``τ12 τ23 τ12 = τ23 τ12 τ23`` on triple tensors (for ``τ^{-1}`` by default)."""
    t = tau_inverse if inverse else tau
    col = Collector()
    for x in x_samples:
        if quotient:
            y = world.rep(x)
            lhs = world.project(t(world, r, t(world, r, t(world, r, y, 0), 1), 0))
            rhs = world.project(t(world, r, t(world, r, t(world, r, y, 1), 0), 1))
        else:
            lhs = t(world, r, t(world, r, t(world, r, x, 0), 1), 0)
            rhs = t(world, r, t(world, r, t(world, r, x, 1), 0), 1)
        col.record((lhs - rhs).terms, f"{x}")
    return col.verdict(f"{col.count} samples")


def verify_braiding_equivariance(world: World, r: RMatrix, xis, x_samples) -> Verdict:
    """``ξ ▶ τ = ε(ξ) τ``, i.e. ``τ(ξ ▷ x) = ξ ▷ τ(x)``."""
    col = Collector()
    for xi in xis:
        for x in x_samples:
            lhs = tau(world, r, world.act(xi, x))
            rhs = world.act(xi, tau(world, r, x))
            col.record((lhs - rhs).terms, f"ξ={xi}, x={x}")
    return col.verdict(f"{col.count} samples")


def verify_braiding_inverse(world: World, r: RMatrix, x_samples) -> Verdict:
    col = Collector()
    for x in x_samples:
        col.record((tau(world, r, tau_inverse(world, r, x)) - x).terms, f"{x}")
    return col.verdict(f"{col.count} samples")


def kt_samples(world: World, spaces: Sequence[Space], degree: int, count: int | None = None,
               rng: random.Random | None = None):
    """Monomial basis samples of the K-tensor over the slots of ``spaces``."""
    factors = []
    for s in spaces:
        factors.extend(slot_factors(world, s))
    return sample_elements(ktensor_space(*factors), degree, count, rng)


def verify_tensor_R_laws(world: World, r: RMatrix, P: LinearMap, Q: LinearMap,
                         Pt: LinearMap, Qt: LinearMap, Z: LinearMap, xis, degree: int = 1,
                         flipped: bool = False) -> dict:
    """Equivariance, associativity and the composition law of ``⊗_R``.

    ``flipped`` computes the composition law's right side with the ``R^{-1}``
    legs exchanged (fault injection).
    """
    out = {}
    PQ = tensor_R(world, r, P, Q)
    pairs = kt_samples(world, [P.source, Q.source], degree)

    vs = []
    for xi in xis:
        lhs = adjoint_act(world, xi, PQ)
        pieces = []
        for (w, k), c in xi.terms.items():
            for ((w1, w2), j), d in world.coproduct_terms(w).items():
                if k + j <= world.order:
                    pieces.append(tensor_R(world, r, adjoint_terms(world, {(w1, k + j): c * d}, P),
                                           adjoint_terms(world, {(w2, 0): Fraction(1)}, Q)))
        rhs = FunctionMap(PQ.source, PQ.target, _summing(pieces, PQ.target))
        vs.append(compare_maps(lhs, rhs, pairs, f"ξ={xi}"))
    out["equivariance"] = combine(vs)

    triples = kt_samples(world, [P.source, Q.source, Z.source], degree)
    left = tensor_R(world, r, PQ, Z)
    right = tensor_R(world, r, P, tensor_R(world, r, Q, Z))
    out["associativity"] = compare_maps(left, right, triples, "associativity")

    lhs = compose(tensor_R(world, r, Pt, Qt), PQ)
    pieces = []
    for w1, w2, k, c in r.inverse_legs():
        if flipped:
            w1, w2 = w2, w1
        a = compose(Pt, adjoint_terms(world, {(w1, k): c}, P))
        b = compose(adjoint_terms(world, {(w2, 0): Fraction(1)}, Qt), Q)
        pieces.append(tensor_R(world, r, a, b))
    rhs = FunctionMap(lhs.source, lhs.target, _summing(pieces, lhs.target))
    out["composition"] = compare_maps(lhs, rhs, pairs, "composition")
    return out


def _summing(maps, target):
    def apply(x):
        acc = target.zero()
        for m in maps:
            acc = acc + m(x)
        return acc
    return apply


def phi_k(world: World, twist: Twist, x: ModuleElement) -> ModuleElement:
    """``φ`` on plain K-tensors: the iterated inverse twist acting slotwise."""
    from .bimod import twist_inverse_power

    m = x.space.arity
    return act_legs(world, twist_inverse_power(twist, m).terms, x)


def verify_quantization_diagram(U: Undeformed, D: Deformed, r: RMatrix, P: LinearMap,
                                Q: LinearMap, degree: int = 1, quotient: bool = True) -> dict:
    """``φ ∘ (D_F P ⊗_{R^F} D_F Q) = D_F((f̄^α ▶ P) ⊗_R (f̄_α ▶ Q)) ∘ φ``.

    ``r`` is the undeformed R-matrix; the deformed side uses its twist.
    """
    from .bimod import phi
    from .hopf import twist_r_matrix

    twist = D.twist
    rF = twist_r_matrix(twist, r)
    DP, DQ = d_quantize(U, twist, P), d_quantize(U, twist, Q)

    def rhs_map(tensor):
        pieces = []
        for w1, w2, k, c in twist.inverse_legs():
            pieces.append(tensor(adjoint_terms(U, {(w1, k): c}, P),
                                 adjoint_terms(U, {(w2, 0): Fraction(1)}, Q)))
        m = FunctionMap(pieces[0].source, pieces[0].target, _summing(pieces, pieces[0].target))
        return d_quantize(U, twist, m)

    out = {}
    samples = kt_samples(U, [P.source, Q.source], degree)
    left = tensor_R(D, rF, DP, DQ)
    right = rhs_map(lambda a, b: tensor_R(U, r, a, b))
    col = Collector()
    for x in samples:
        col.record((phi_k(U, twist, left(x)) - right(phi_k(U, twist, x))).terms, f"{x}")
    out["k_level"] = col.verdict(f"{col.count} samples")

    if quotient:
        spaces = [P.source, Q.source, P.target, Q.target]
        certify_quasi_commutative(D, rF, spaces, degree)
        certify_quasi_commutative(U, r, spaces, degree)
        left_q = tensor_R_quotient(D, rF, DP, DQ)
        right_q = rhs_map(lambda a, b: tensor_R_quotient(U, r, a, b))
        col = Collector()
        for x in D.tensor(P.source, Q.source).monomial_basis(degree):
            col.record((phi(D, left_q(x)) - right_q(phi(D, x))).terms, f"{x}")
        out["quotient"] = col.verdict(f"{col.count} samples")
    return out


def verify_quasi_left_linearity(world: World, r: RMatrix, Q: LinearMap, degree: int = 1) -> Verdict:
    """``Q(a · w) = (R̄^α ▷ a) · (R̄_α ▶ Q)(w)`` with the world's left action."""
    col = Collector()
    ring = world.ring
    legs = [(w1, adjoint_terms(world, {(w2, k): c}, Q)) for w1, w2, k, c in r.inverse_legs()]
    for w in Q.source.monomial_basis(degree):
        for e in ring.monomials(degree):
            a = ring.monomial(e)
            lhs = Q(world.left(a, w))
            rhs = Q.target.zero()
            for w1, Qa in legs:
                aa = PolyFunction(ring, world.real.act_word(w1, a.terms))
                if aa:
                    rhs = rhs + world.left(aa, Qa(w))
            col.record((lhs - rhs).terms, f"a={a}, w={w}")
    return col.verdict(f"{col.count} samples")
