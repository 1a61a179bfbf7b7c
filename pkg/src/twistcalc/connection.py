"""Right connections, their curvature, quantization and braided sums.

A connection is a ground-ring-linear map ``∇: M → M ⊗ Ω¹`` in a world
(undeformed or deformed) satisfying the right Leibniz rule.  Classical
connections on free modules are given by coefficient one-forms and carry an
exact :class:`~twistcalc.morphism.OperatorMatrix`; quantized connections and
sums are element-level maps built from the world interface.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Sequence

from .bimod import (Deformed, FreeBimodule, KTensor, ModuleElement,
                    ModuleError, Space, Undeformed, World, kt_map_block, ktensor_space,
                    phi, phi_inverse, t_shift)
from .funcalg import PolyFunction, op_from_poly, op_partial, p_add
from .hopf import RMatrix, verify_triangular
from .morphism import (FunctionMap, LinearMap, MapError, OperatorMatrix, adjoint_act,
                       adjoint_terms, certify_quasi_commutative, combine_elements, compare_maps,
                       compose, concat, d_quantize, expand, slot_factors, star_compose, tau_inverse,
                       _slot_element)
from .series import ConfigurationError
from .verdict import Collector, Verdict, combine


class ConnectionError_(ConfigurationError):
    pass


class PreconditionFailed(ConfigurationError):
    def __init__(self, message: str, verdict: Verdict):
        super().__init__(message)
        self.verdict = verdict


class Connection:
    """``∇: M → M ⊗ Ω¹`` in a world.

    ``omega`` holds the coefficient forms ``{(β, α): Ω¹ element}`` when the
    connection is classical; ``operator`` is then the exact matrix form.
    """

    def __init__(self, world: World, module: Space, fn, name: str = "∇",
                 omega: dict | None = None, operator: OperatorMatrix | None = None):
        if world.calc is None:
            raise ConnectionError_("connections need a differential calculus")
        self.world = world
        self.module = module
        self.calc = world.calc
        self.target = world.tensor(module, world.calc.omega(1))
        self._fn = fn
        self.name = name
        self.omega = omega
        self.operator = operator
        self._basis_cache: dict = {}

    def __call__(self, x: ModuleElement) -> ModuleElement:
        if x.space is not self.module:
            raise MapError(f"{self.name} acts on {self.module.name}, got {x.space.name}")
        if self.operator is not None:
            return self.operator(x)
        y = self._fn(x)
        if y.space is not self.target:
            raise MapError(f"{self.name} produced {y.space.name}, expected {self.target.name}")
        return y

    def as_map(self) -> LinearMap:
        if self.operator is not None:
            return self.operator
        return FunctionMap(self.module, self.target, self.__call__, name=self.name)

    def __add__(self, P: LinearMap) -> "Connection":
        """``∇ + P`` for a right-linear ``P: M → M ⊗ Ω¹``."""
        if P.source is not self.module or P.target is not self.target:
            raise MapError("the shift must map M to M ⊗ Ω¹")
        if self.operator is not None and isinstance(P, OperatorMatrix):
            return Connection(self.world, self.module, None, f"{self.name}+{P.name}",
                              operator=self.operator + P)
        return Connection(self.world, self.module, lambda x: self(x) + P(x),
                          name=f"{self.name}+{getattr(P, 'name', 'P')}")

    def __sub__(self, other: "Connection") -> LinearMap:
        if other.module is not self.module or other.world is not self.world:
            raise MapError("connections on different modules")
        if self.operator is not None and other.operator is not None:
            return self.operator - other.operator
        return FunctionMap(self.module, self.target, lambda x: self(x) - other(x),
                           name=f"{self.name}-{other.name}")

    def __repr__(self):
        return f"Connection({self.name} on {self.module.name}, {self.world.name})"


def form_connection(world: Undeformed, V: FreeBimodule, omega: dict | None = None,
                    name: str = "∇") -> Connection:
    """``∇(e_α f) = e_β ⊗ ω^β_α f + e_α ⊗ df`` from coefficient one-forms."""
    if world.twisted:
        raise ConnectionError_("coefficient connections are classical; quantize them instead")
    calc = world.calc
    O1 = calc.omega(1)
    omega = dict(omega or {})
    for (b, a), w in omega.items():
        V.label_position(b)
        V.label_position(a)
        if w.space is not O1:
            raise ConnectionError_(f"connection coefficient ω[{b},{a}] is not a one-form")
    target = world.tensor(V, O1)
    n = V.nvars
    entries: dict = defaultdict(dict)
    for (b, a), w in omega.items():
        for (I, e, k), c in w.terms.items():
            key = ((b, I), a)
            entries[key] = p_add(entries[key], op_from_poly({(e, k): c}, n))
    for a in V.labels:
        for i in range(n):
            key = ((a, (i,)), a)
            entries[key] = p_add(entries[key], op_partial(i, n))
    op = OperatorMatrix(V, target, entries, name=name)
    return Connection(world, V, None, name, omega=omega, operator=op)


def connection_apply(conn: Connection, v: ModuleElement) -> ModuleElement:
    return conn(v)


def basis_element(world: World, module: Space, prefix: tuple) -> ModuleElement:
    """The bare basis element of ``module`` indexed by leading tensor labels."""
    if isinstance(module, KTensor):
        raise ModuleError("connections live on modules, not K-tensors")
    return _slot_element(world, module, prefix, (0,) * (module.nvars * len(prefix)))


def extend_to_forms(conn: Connection, x: ModuleElement) -> ModuleElement:
    """``∇(v ⊗ θ) = (∇v) ∧ θ + v ⊗ dθ``; on ``M`` itself this is ``∇``."""
    world = conn.world
    M = conn.module
    if x.space is M:
        return conn(x)
    factors = slot_factors(world, M)
    space = x.space
    if not world.is_tensor(space) or list(space.factors[:-1]) != factors:
        raise ModuleError(f"{space.name} is not {M.name} tensored with forms")
    p = space.factors[-1].degree
    calc = conn.calc
    if p is None:
        raise ModuleError("the last factor must be a space of forms")
    if p >= calc.n:
        return world.tensor(M, calc.omega(calc.n)).zero()
    target = world.tensor(M, calc.omega(p + 1))
    out = target.zero()
    for prefix, theta in world.split_last(x):
        v = basis_element(world, M, prefix)
        for pre2, eta in world.split_last(conn(v)):
            out = out + world.join_last(factors, pre2, world.wedge(eta, theta))
        out = out + world.join_last(factors, prefix, world.d(theta))
    return out


def curvature(conn: Connection) -> FunctionMap:
    """``R_∇ = ∇ ∘ ∇`` with the extension to one-form valued elements."""
    world = conn.world
    target = world.tensor(conn.module, conn.calc.omega(2))
    return FunctionMap(conn.module, target, lambda x: extend_to_forms(conn, conn(x)),
                       name=f"R[{conn.name}]", right_linear=True)


def curvature_forms(conn: Connection) -> dict:
    """``dω^β_α + ω^β_γ ∧ ω^γ_α`` for a classical connection."""
    if conn.omega is None:
        raise ConnectionError_("curvature forms need a classical connection")
    calc = conn.calc
    V = conn.module
    O2 = calc.omega(2)
    out = {}
    for b in V.labels:
        for a in V.labels:
            acc = O2.zero()
            w = conn.omega.get((b, a))
            if w is not None:
                acc = acc + calc.d(w)
            for g in V.labels:
                w1, w2 = conn.omega.get((b, g)), conn.omega.get((g, a))
                if w1 is not None and w2 is not None:
                    acc = acc + calc.wedge(w1, w2)
            if acc:
                out[(b, a)] = acc
    return out


def verify_curvature_formula(conn: Connection) -> Verdict:
    """Curvature on basis elements matches ``dω + ω ∧ ω``."""
    world = conn.world
    R = curvature(conn)
    forms = curvature_forms(conn)
    V = conn.module
    col = Collector()
    for a in V.labels:
        expected = R.target.zero()
        for b in V.labels:
            f = forms.get((b, a))
            if f is not None:
                expected = expected + world.join_last([V], (b,), f)
        col.record((R(V.basis(a)) - expected).terms, f"e{a}")
    return col.verdict(f"{col.count} basis elements")


def _functions_sample(world: World, degree: int):
    ring = world.ring
    return [ring.monomial(e) for e in ring.monomials(degree)]


def verify_right_leibniz(conn: Connection, degree: int = 1) -> Verdict:
    """``∇(v a) = (∇v) a + v ⊗ da`` with the world's right action."""
    world = conn.world
    calc = conn.calc
    col = Collector()
    for v in conn.module.monomial_basis(degree):
        for a in _functions_sample(world, degree):
            lhs = conn(world.right(v, a))
            rhs = world.right(conn(v), a) + combine_elements(world, v, calc.d(calc.function(a)))
            col.record((lhs - rhs).terms, f"v={v}, a={a}")
    return col.verdict(f"{col.count} samples")


def verify_right_linear(world: World, P: LinearMap, degree: int = 1) -> Verdict:
    """``P(v a) = P(v) a`` with the world's right actions."""
    col = Collector()
    for v in P.source.monomial_basis(degree):
        for a in _functions_sample(world, degree):
            col.record((P(world.right(v, a)) - world.right(P(v), a)).terms, f"v={v}, a={a}")
    return col.verdict(f"{col.count} samples")


def verify_extension_well_defined(conn: Connection, degree: int = 1, p: int = 1) -> Verdict:
    """Images of ``(v a) ⊗ θ`` and ``v ⊗ (a θ)`` under the extension agree."""
    world = conn.world
    Op = conn.calc.omega(p)
    col = Collector()
    for v in conn.module.monomial_basis(degree):
        for theta in Op.monomial_basis(degree):
            for a in _functions_sample(world, degree):
                x1 = combine_elements(world, world.right(v, a), theta)
                x2 = combine_elements(world, v, world.left(a, theta))
                col.record((extend_to_forms(conn, x1) - extend_to_forms(conn, x2)).terms,
                           f"v={v}, θ={theta}, a={a}")
    return col.verdict(f"{col.count} samples")


# ---------------------------------------------------------------------------
# quantization


def quantize_connection(U: Undeformed, D: Deformed, conn: Connection) -> Connection:
    """``D̃_F(∇) = φ^{-1} ∘ D_F(∇)``, a connection in the deformed world."""
    if conn.world is not U:
        raise ConnectionError_("only undeformed connections are quantized")
    if D.calc is not U.calc:
        raise ConnectionError_("both worlds must share the differential calculus")
    DF = d_quantize(U, D.twist, conn.as_map())
    O1 = conn.calc.omega(1)
    factors = [conn.module, O1]

    def apply(x):
        return phi_inverse(D, DF(x), factors)

    return Connection(D, conn.module, apply, name=f"D̃({conn.name})")


def quantize_map(U: Undeformed, D: Deformed, P: LinearMap, factors: Sequence[Space]) -> FunctionMap:
    """``D̃_F(P) = φ^{-1} ∘ D_F(P)`` for ``P`` with an A-tensor target."""
    DF = d_quantize(U, D.twist, P)
    target = D.tensor(*factors)
    return FunctionMap(P.source, target, lambda x: phi_inverse(D, DF(x), factors),
                       name=f"D̃({getattr(P, 'name', 'P')})")


def extension_map(conn: Connection, p: int = 1) -> FunctionMap:
    """The extension ``M ⊗ Ω^p → M ⊗ Ω^{p+1}`` as a map."""
    world = conn.world
    calc = conn.calc
    source = world.tensor(conn.module, calc.omega(p))
    target = world.tensor(conn.module, calc.omega(min(p + 1, calc.n)))
    return FunctionMap(source, target, lambda x: extend_to_forms(conn, x),
                       name=f"{conn.name}^({p})")


def twisted_curvature_check(U: Undeformed, D: Deformed, conn: Connection,
                            degree: int = 1) -> dict:
    """``R_{D̃_F(∇)} = D̃_F(∇ ∘⋆ ∇)``, and whether ``D̃_F(R_∇)`` differs from it."""
    q = quantize_connection(U, D, conn)
    Rq = curvature(q)
    ext = extension_map(conn, 1)
    star_sq = star_compose(U, D.twist, ext, conn.as_map())
    O2 = conn.calc.omega(2)
    rhs = quantize_map(U, D, star_sq, [conn.module, O2])
    naive = quantize_map(U, D, curvature(conn), [conn.module, O2])
    samples = conn.module.monomial_basis(degree)
    out = {"identity": compare_maps(Rq, rhs, samples, "R of quantized vs D̃(∇∘⋆∇)")}
    col = Collector()
    for x in samples:
        col.record((Rq(x) - naive(x)).terms, f"{x}")
    differs = col.verdict(f"{col.count} samples")
    out["quantized_curvature_differs"] = not differs.passed
    out["difference"] = differs
    out["quantized_curvature"] = Rq
    return out


# ---------------------------------------------------------------------------
# braided structure


def verify_graded_quasi_commutative(world: World, r: RMatrix, degree: int = 1) -> Verdict:
    """``θ ∧ η = (-1)^{pq} (R̄^α ▷ η) ∧ (R̄_α ▷ θ)`` on monomial forms."""
    calc = world.calc
    legs = list(r.inverse_legs())
    col = Collector()
    for p in range(1, calc.n + 1):
        for q in range(1, calc.n + 1 - p):
            for theta in calc.omega(p).monomial_basis(degree):
                for eta in calc.omega(q).monomial_basis(degree):
                    lhs = world.wedge(theta, eta)
                    rhs = lhs.space.zero()
                    for w1, w2, k, c in legs:
                        a = world.act_terms({(w1, k): c}, eta)
                        b = world.act_word(w2, theta)
                        if a and b:
                            rhs = rhs + world.wedge(a, b)
                    col.record((lhs - rhs.scale((-1) ** (p * q))).terms, f"θ={theta}, η={eta}")
    return col.verdict(f"{col.count} samples")


def certify_braided_setting(world: World, r: RMatrix, modules: Sequence[Space],
                            degree: int = 1) -> Verdict:
    """Quasi-commutativity of the modules and of the calculus (cached on the world)."""
    cache = world.__dict__.setdefault("_graded_certificates", {})
    key = id(r)
    if key not in cache:
        cache[key] = verify_graded_quasi_commutative(world, r, degree)
    spaces = list(modules) + [world.calc.omega(1)]
    return combine([certify_quasi_commutative(world, r, spaces, degree), cache[key]])


def _require(world, r, modules, degree):
    v = certify_braided_setting(world, r, modules, degree)
    if not v:
        raise PreconditionFailed(
            f"R-matrix does not braid the modules or the calculus (order {v.first_failing_order})", v)


def braided_leibniz_check(world: World, r: RMatrix, conn: Connection, degree: int = 1,
                          enforce: bool = True) -> Verdict:
    """``∇(a v) = (R̄^α ▷ a)(R̄_α ▶ ∇)(v) + (R_α ▷ v) ⊗ (R^α ▷ da)``.

    With ``enforce`` the quasi-commutativity preconditions must hold first.
    """
    if enforce:
        _require(world, r, [conn.module], degree)
    calc = conn.calc
    ring = world.ring
    nabla = conn.as_map()
    adj = [(w1, adjoint_terms(world, {(w2, k): c}, nabla)) for w1, w2, k, c in r.inverse_legs()]
    legs = list(r.legs())
    col = Collector()
    for v in conn.module.monomial_basis(degree):
        for a in _functions_sample(world, degree):
            lhs = conn(world.left(a, v))
            rhs = conn.target.zero()
            for w1, P in adj:
                aa = PolyFunction(ring, world.real.act_word(w1, a.terms))
                if aa:
                    rhs = rhs + world.left(aa, P(v))
            da = calc.d(calc.function(a))
            for w1, w2, k, c in legs:
                vv = world.act_terms({(w2, k): c}, v)
                th = world.act_word(w1, da)
                if vv and th:
                    rhs = rhs + combine_elements(world, vv, th)
            col.record((lhs - rhs).terms, f"a={a}, v={v}")
    return col.verdict(f"{col.count} samples")


def _braid_last_past(world: World, r: RMatrix, kt: ModuleElement, pos: int,
                     stop: int | None = None) -> ModuleElement:
    """Move slot ``pos`` to index ``stop`` (default: the end) with successive ``τ^{-1}``."""
    stop = kt.space.arity - 1 if stop is None else stop
    for i in range(pos, stop):
        kt = tau_inverse(world, r, kt, i)
    return kt


def _split_pair(world: World, V: Space, W: Space, x: ModuleElement):
    """Group a representative of ``x ∈ V ⊗ W`` as ``sum v_i ⊗ w_i`` (module elements)."""
    rep = world.rep(x)
    n = rep.space.n
    p = len(slot_factors(world, V))
    groups: dict = defaultdict(dict)
    for (ls, es, k), c in rep.terms.items():
        key = (ls[:p], es[:p * n])
        inner = (ls[p:], es[p * n:], k)
        groups[key][inner] = groups[key].get(inner, 0) + c
    w_slots = slot_factors(world, W)
    wk = ktensor_space(*w_slots)
    out = []
    for (lv, ev), inner in groups.items():
        v = _slot_element(world, V, lv, ev)
        w_kt = ModuleElement(wk, {(tuple(l), e, k): c for (l, e, k), c in inner.items()})
        w = world.project(w_kt) if world.is_tensor(W) else \
            ModuleElement(W, {(l[0], e, k): c for (l, e, k), c in inner.items()})
        out.append((v, w))
    return out


class SumData:
    """The two maps entering ``∇_V ⊕_R ∇_W`` and the precomputed adjoint legs."""

    def __init__(self, world, r, PV: LinearMap, PW: LinearMap):
        self.world = world
        self.r = r
        self.PV = PV
        self.PW = PW
        self.legs = [(w1, k, c, adjoint_terms(world, {(w2, 0): Fraction(1)}, PW))
                     for w1, w2, k, c in r.inverse_legs()]
        self.v_slots = len(slot_factors(world, PV.source))
        self.w_slots = len(slot_factors(world, PW.source))

    def first(self, v, w) -> ModuleElement:
        """``τ^{-1}_{23} π (∇_V ⊗ id)(v ⊗ w)`` before projection."""
        kt = concat(expand(self.world, self.PV(v)), expand(self.world, w))
        pos = len(kt.space.factors) - self.w_slots - 1
        return _braid_last_past(self.world, self.r, kt, pos)

    def second(self, v, w) -> ModuleElement:
        """``π (id ⊗_R ∇_W)(v ⊗ w)`` before projection."""
        world = self.world
        out = None
        for w1, k, c, P in self.legs:
            vv = world.act_terms({(w1, k): c}, v)
            if not vv:
                continue
            term = concat(expand(world, vv), expand(world, P(w)))
            out = term if out is None else out + term
        return out

    def k_level(self, v, w) -> ModuleElement:
        world = self.world
        a = world.project(self.first(v, w))
        b = self.second(v, w)
        return a if b is None else a + world.project(b)


def sum_maps(world: World, r: RMatrix, PV: LinearMap, PW: LinearMap, name: str = "⊕") -> FunctionMap:
    """``τ^{-1}_{23} π (P_V ⊗_R id) + π (id ⊗_R P_W)`` on ``V ⊗ W``, for arbitrary maps."""
    V, W = PV.source, PW.source
    data = SumData(world, r, PV, PW)
    source = world.tensor(V, W)
    target = world.tensor(V, W, world.calc.omega(1))

    def apply(x):
        out = target.zero()
        for v, w in _split_pair(world, V, W, x):
            out = out + data.k_level(v, w)
        return out

    m = FunctionMap(source, target, apply, name=name)
    m.data = data
    return m


def sum_connections(world: World, r: RMatrix, cV: Connection, cW: Connection,
                    degree: int = 1, enforce: bool = True) -> Connection:
    """``∇_V ⊕_R ∇_W`` on ``V ⊗ W`` (over the world's algebra)."""
    if cV.world is not world or cW.world is not world:
        raise ConnectionError_("both connections must live in the same world as the sum")
    if enforce:
        _require(world, r, [cV.module, cW.module], degree)
    m = sum_maps(world, r, cV.as_map(), cW.as_map(), name=f"({cV.name}⊕{cW.name})")
    conn = Connection(world, m.source, m.fn, name=m.name)
    conn.sum_data = m.data
    conn.parts = (cV, cW)
    return conn


def verify_sum_well_defined(conn: Connection, degree: int = 1) -> Verdict:
    """Images of ``(v a) ⊗ w`` and ``v ⊗ (a w)`` under the K-level sum agree."""
    data: SumData = conn.sum_data
    world = conn.world
    cV, cW = conn.parts
    col = Collector()
    for v in cV.module.monomial_basis(degree):
        for w in cW.module.monomial_basis(degree):
            for a in _functions_sample(world, degree):
                lhs = data.k_level(world.right(v, a), w)
                rhs = data.k_level(v, world.left(a, w))
                col.record((lhs - rhs).terms, f"v={v}, a={a}, w={w}")
    return col.verdict(f"{col.count} samples")


def verify_sum_associative(world: World, r: RMatrix, c1: Connection, c2: Connection,
                           c3: Connection, degree: int = 1) -> Verdict:
    left = sum_connections(world, r, sum_connections(world, r, c1, c2), c3, enforce=False)
    right = sum_connections(world, r, c1, sum_connections(world, r, c2, c3), enforce=False)
    if left.module is not right.module:
        raise ConnectionError_("the two bracketings act on different spaces")
    return compare_maps(left.as_map(), right.as_map(), left.module.monomial_basis(degree),
                        "associativity")


def verify_sum_equivariance(world: World, r: RMatrix, cV: Connection, cW: Connection, xis,
                            degree: int = 1) -> Verdict:
    """``ξ ▶ (∇_V ⊕ ∇_W) = (ξ ▶ ∇_V) ⊕ (ξ ▶ ∇_W)``."""
    s = sum_maps(world, r, cV.as_map(), cW.as_map())
    samples = s.source.monomial_basis(degree)
    vs = []
    for xi in xis:
        lhs = adjoint_act(world, xi, s)
        rhs = sum_maps(world, r, adjoint_act(world, xi, cV.as_map()),
                       adjoint_act(world, xi, cW.as_map()))
        vs.append(compare_maps(lhs, rhs, samples, f"ξ={xi}"))
    return combine(vs)


def verify_sum_diagram(U: Undeformed, D: Deformed, r: RMatrix, cV: Connection, cW: Connection,
                       degree: int = 1) -> Verdict:
    """``φ ∘ (D̃ ∇_V ⊕_{R^F} D̃ ∇_W) = D_F(∇_V ⊕_R ∇_W) ∘ φ`` on basis samples."""
    from .hopf import twist_r_matrix

    rF = twist_r_matrix(D.twist, r)
    qV, qW = quantize_connection(U, D, cV), quantize_connection(U, D, cW)
    left = sum_connections(D, rF, qV, qW, degree)
    right = d_quantize(U, D.twist, sum_connections(U, r, cV, cW, degree).as_map())
    col = Collector()
    for x in left.module.monomial_basis(degree):
        col.record((phi(D, left(x)) - right(phi(D, x))).terms, f"{x}")
    return col.verdict(f"{col.count} samples")


def is_equivariant(world: World, conn: Connection, degree: int = 1) -> Verdict:
    """``X ▶ ∇ = 0`` for every generator ``X`` (so ``ξ ▶ ∇ = ε(ξ) ∇``)."""
    alg = world.algebra
    samples = conn.module.monomial_basis(degree)
    vs = []
    for i in range(alg.pres.dimension):
        m = adjoint_act(world, alg.gen(i), conn.as_map())
        col = Collector()
        for x in samples:
            col.record(m(x).terms, f"{alg.pres.names[i]} ▶ {conn.name} on {x}")
        vs.append(col.verdict())
    return combine(vs)


def _wedge_last_two(world: World, kt: ModuleElement) -> ModuleElement:
    """Wedge the last two (form) slots of a K-tensor element."""
    m = kt.space.arity
    calc = world.calc
    a_sp, b_sp = kt.space.factors[m - 2], kt.space.factors[m - 1]
    target = calc.omega(min(a_sp.degree + b_sp.degree, calc.n))
    n = kt.space.n
    cache: dict = {}

    def fn(y):
        out = target.zero()
        for (ls, es, k), c in y.terms.items():
            key = (ls, es)
            if key not in cache:
                a = ModuleElement(a_sp, {(ls[0], es[:n], 0): Fraction(1)})
                b = ModuleElement(b_sp, {(ls[1], es[n:], 0): Fraction(1)})
                cache[key] = world.wedge(a, b)
            out = out + ModuleElement(target, t_shift(cache[key].terms, k, world.order)).scale(c)
        return out

    return kt_map_block(kt, m - 2, m, fn, [target])


def curvature_sum_check(world: World, r: RMatrix, cV: Connection, cW: Connection,
                        degree: int = 1, enforce: bool = True) -> dict:
    """Curvature of a braided sum against its expansion in the curvatures of the parts.

    Also returns the mixed (second-line) term on its own; it vanishes when
    one connection is equivariant.
    """
    s = sum_connections(world, r, cV, cW, degree, enforce)
    Rs = curvature(s)
    RV, RW = curvature(cV), curvature(cW)
    first = SumData(world, r, RV, RW)
    nV, nW = cV.as_map(), cW.as_map()
    mixed_legs = []
    for w1, w2, k, c in r.inverse_legs():
        # (∇_V ⊗_R ∇_W): ∇_V ∘ (R̄^α ▷) ⊗ (R̄_α ▶ ∇_W)
        mixed_legs.append((compose(nV, _action(world, cV.module, w1, k, c)),
                           adjoint_terms(world, {(w2, 0): Fraction(1)}, nW), 1))
    for w1, w2, k, c in r.inverse_legs():
        PV = adjoint_terms(world, {(w1, k): c}, nV)
        PW = adjoint_terms(world, {(w2, 0): Fraction(1)}, nW)
        for u1, u2, j, d in r.inverse_legs():
            mixed_legs.append((compose(PV, _action(world, cV.module, u1, j, d)),
                               adjoint_terms(world, {(u2, 0): Fraction(1)}, PW), -1))
    w_slots = len(slot_factors(world, cW.module))

    def mixed(v, w):
        acc = None
        for A, B, sign in mixed_legs:
            kt = concat(expand(world, A(v)), expand(world, B(w)))
            kt = kt.scale(sign)
            acc = kt if acc is None else acc + kt
        # slots: V.., Ω¹, W.., Ω¹; braid the first form past W
        m = acc.space.arity
        acc = _braid_last_past(world, r, acc, m - w_slots - 2, m - 2)
        return world.project(_wedge_last_two(world, acc))

    col = Collector()
    mixed_col = Collector()
    for x in s.module.monomial_basis(degree):
        lhs = Rs(x)
        rhs = lhs.space.zero()
        mix = lhs.space.zero()
        for v, w in _split_pair(world, cV.module, cW.module, x):
            rhs = rhs + world.project(first.first(v, w))
            sec = first.second(v, w)
            if sec is not None:
                rhs = rhs + world.project(sec)
            mix = mix + mixed(v, w)
        col.record((lhs - rhs - mix).terms, f"{x}")
        mixed_col.record(mix.terms, f"{x}")
    return {"identity": col.verdict(f"{col.count} samples"),
            "mixed_term_vanishes": mixed_col.verdict(f"{mixed_col.count} samples")}


def _action(world, space, w, k, c):
    return FunctionMap(space, space, lambda x: world.act_terms({(w, k): c}, x), name="▷")


# ---------------------------------------------------------------------------
# dual modules


def dual_module(V: FreeBimodule, name: str | None = None) -> FreeBimodule:
    """``V'`` with the dual basis and the contragredient action ``M' = -M^T``."""
    mats = {}
    for a, mat in V.matrices.items():
        mats[a] = {(al, b): {key: -c for key, c in poly.items()} for (b, al), poly in mat.items()}
    names = {l: V.label_name(l) + "'" for l in V.labels}
    return FreeBimodule(V.real, V.labels, mats, name=name or V.name + "'", label_names=names)


def pairing(Vd: FreeBimodule, vd: ModuleElement, v: ModuleElement) -> PolyFunction:
    """``⟨v', v⟩ = sum_α v'_α v_α`` in the commutative algebra."""
    ring = v.space.real.ring
    out = ring.zero()
    for l in Vd.labels:
        out = out + vd.component(l) * v.component(l)
    return out


def pair_tensor(world: Undeformed, y: ModuleElement, v: ModuleElement, left: bool) -> ModuleElement:
    """``⟨y, v⟩`` for ``y ∈ V' ⊗ Ω`` (``left=False``) or ``y ∈ Ω ⊗ V'`` (``left=True``)."""
    calc = world.calc
    O1 = calc.omega(1)
    out = O1.zero()
    for (lab, e, k), c in y.terms.items():
        l_form, l_mod = (lab[0], lab[1]) if left else (lab[1], lab[0])
        comp = v.component(l_mod)
        mono = ModuleElement(O1, {(l_form, e, k): c})
        out = out + mono.times(comp)
    return out


def dual_connections(world: Undeformed, conn: Connection, r: RMatrix, degree: int = 1):
    """The left connection ``∇'`` and the right connection ``∇_{V'}`` on the dual module.

    ``∇_{V'}`` is fixed on the dual basis by the braided pairing rule and
    extended by the right Leibniz rule; only triangular ``R`` is accepted.
    """
    if world.twisted or conn.world is not world:
        raise ConnectionError_("dual connections are built in the undeformed world")
    tri = r.triangular if r.triangular is not None else verify_triangular(r)
    r.triangular = tri
    if not tri:
        raise PreconditionFailed("the R-matrix is not triangular", tri)
    V = conn.module
    if conn.omega is None:
        raise ConnectionError_("dual connections need a classical connection")
    Vd = dual_module(V)
    calc = world.calc
    O1 = calc.omega(1)
    n = V.nvars
    # left connection: ∇'(e'^α) = sum_β (-ω^α_β) ⊗ e'^β
    left_target = world.tensor(O1, Vd)
    entries: dict = defaultdict(dict)
    for (al, b), w in conn.omega.items():
        for (I, e, k), c in w.terms.items():
            key = ((I, b), al)
            entries[key] = p_add(entries[key], op_from_poly({(e, k): -c}, n))
    for a in Vd.labels:
        for i in range(n):
            key = (((i,), a), a)
            entries[key] = p_add(entries[key], op_partial(i, n))
    left_op = OperatorMatrix(Vd, left_target, entries, name=f"{conn.name}'")

    # right connection from the braided pairing on basis elements
    nabla = conn.as_map()
    legs = [(w1, k, c, adjoint_terms(world, {(w2, 0): Fraction(1)}, nabla))
            for w1, w2, k, c in r.inverse_legs()]
    right_target = world.tensor(Vd, O1)
    entries = defaultdict(dict)
    for al in Vd.labels:
        for b in V.labels:
            theta = O1.zero()
            for w1, k, c, P in legs:
                vd = world.act_terms({(w1, k): c}, Vd.basis(al))
                if vd:
                    theta = theta - _pair_first(vd, P(V.basis(b)), O1)
            for (I, e, k), c in theta.terms.items():
                key = ((b, I), al)
                entries[key] = p_add(entries[key], op_from_poly({(e, k): c}, n))
    for a in Vd.labels:
        for i in range(n):
            key = ((a, (i,)), a)
            entries[key] = p_add(entries[key], op_partial(i, n))
    right_op = OperatorMatrix(Vd, right_target, entries, name=f"{conn.name}_dual")
    right = Connection(world, Vd, None, right_op.name, operator=right_op)
    return left_op, right


def _pair_first(vd: ModuleElement, y: ModuleElement, O1) -> ModuleElement:
    """``⟨v' ⊗ id, y⟩`` for ``y ∈ V ⊗ Ω¹``."""
    out = O1.zero()
    for (lab, e, k), c in y.terms.items():
        comp = vd.component(lab[0])
        out = out + ModuleElement(O1, {(lab[1], e, k): c}).times(comp)
    return out


def verify_dual_connections(world: Undeformed, conn: Connection, r: RMatrix,
                            degree: int = 1) -> dict:
    """Leibniz rules of both duals and the two pairing identities on samples."""
    left_op, right = dual_connections(world, conn, r, degree)
    Vd = right.module
    V = conn.module
    calc = world.calc
    out = {}
    col = Collector()
    for vd in Vd.monomial_basis(degree):
        for a in _functions_sample(world, degree):
            lhs = left_op(vd.times(a))
            da = calc.d(calc.function(a))
            rhs = left_op(vd).times(a) + combine_elements(world, da, vd)
            col.record((lhs - rhs).terms, f"v'={vd}, a={a}")
    out["left_leibniz"] = col.verdict(f"{col.count} samples")
    out["right_leibniz"] = verify_right_leibniz(right, degree)
    nabla = conn.as_map()
    legs = [(w1, k, c, adjoint_terms(world, {(w2, 0): Fraction(1)}, nabla))
            for w1, w2, k, c in r.inverse_legs()]
    O1 = calc.omega(1)
    c_left, c_right = Collector(), Collector()
    for vd in Vd.monomial_basis(degree):
        for v in V.monomial_basis(degree):
            d_pair = calc.d(calc.function(pairing(Vd, vd, v)))
            lhs = pair_tensor(world, left_op(vd), v, left=True)
            c_left.record((lhs - (d_pair - _pair_first(vd, nabla(v), O1))).terms,
                          f"v'={vd}, v={v}")
            rhs = d_pair
            for w1, k, c, P in legs:
                x = world.act_terms({(w1, k): c}, vd)
                if x:
                    rhs = rhs - _pair_first(x, P(v), O1)
            c_right.record((pair_tensor(world, right(vd), v, left=False) - rhs).terms,
                           f"v'={vd}, v={v}")
    out["left_pairing"] = c_left.verdict(f"{c_left.count} samples")
    out["right_pairing"] = c_right.verdict(f"{c_right.count} samples")
    return out
