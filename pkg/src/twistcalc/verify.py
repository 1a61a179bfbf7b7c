"""The check catalog and the suite runner.

Every identity of the twisted calculus is registered here as a
:class:`Check`: an id, a short statement of the identity, the checks it
depends on, the scenario features it needs and a function of a
:class:`Context`.  :func:`run_suite` evaluates a selection in catalog order,
turning failed or errored dependencies into skips, and assembles a
:class:`SuiteReport` whose machine form is byte-stable for a fixed
scenario and seed.
"""
from __future__ import annotations

import itertools
import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

from .bimod import (Deformed, FormsCalculus, FreeBimodule, ModuleElement, Undeformed,
                    exterior_d, phi, phi_inverse, phi_inverse_direct, tensor_over_A,
                    verify_coherence, verify_quasi_commutative_module, verify_star_bimodule)
from .connection import (braided_leibniz_check, curvature, curvature_sum_check,
                         form_connection, is_equivariant, quantize_connection,
                         sum_connections, twisted_curvature_check, verify_curvature_formula,
                         verify_dual_connections, verify_extension_well_defined,
                         verify_graded_quasi_commutative, verify_right_leibniz,
                         verify_right_linear, verify_sum_associative, verify_sum_diagram,
                         verify_sum_equivariance, verify_sum_well_defined,
                         certify_braided_setting)
from .funcalg import PolyFunction, Realization, derive_structure_constants, parse_poly
from .hopf import (HopfElement, HopfStructure, RMatrix, Twist, explicit_twist,
                   jordanian_twist, moyal_twist, parse_tensor, twist_r_matrix, verify_cocycle,
                   verify_hopf_axioms, verify_inverse, verify_normalization,
                   verify_quasitriangular, verify_triangular, verify_yang_baxter)
from .funcalg import PolyRing, verify_quasi_commutative_algebra
from .morphism import (adjoint_act, certify_quasi_commutative, compare_maps, compose,
                       d_quantize, entry_map, kt_samples,
                       verify_braid_relations, verify_braiding_equivariance,
                       verify_braiding_inverse, verify_d_alternative, verify_d_homomorphism,
                       verify_d_inverse, verify_intertwining, verify_quantization_diagram,
                       verify_quasi_left_linearity, verify_right_linear_restriction,
                       verify_tensor_R_laws)
from .scenario import Scenario, ScenarioError, parse_scenario
from .series import ConfigurationError
from .verdict import Collector, Verdict, combine

REPORT_VERSION = 1


# ---------------------------------------------------------------------------
# results


@dataclass
class CheckResult:
    id: str
    anchor: str
    status: str  # pass | fail | skip | error
    first_failing_order: int | None = None
    sample: str | None = None
    detail: str = ""
    elapsed: float = 0.0

    def __post_init__(self):
        if self.status not in ("pass", "fail", "skip", "error"):
            raise ValueError(f"bad status {self.status!r}")
        if self.passed and self.first_failing_order is not None:
            raise ValueError("a passing check cannot carry a failing order")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def record(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "status": self.status,
                "passed": self.passed, "first_failing_order": self.first_failing_order,
                "sample": self.sample, "detail": self.detail}


@dataclass
class SuiteReport:
    fingerprint: str
    scenario: str
    order: int
    degree: int
    seed: int
    results: list[CheckResult]

    @property
    def counts(self) -> dict:
        c = {"pass": 0, "fail": 0, "skip": 0, "error": 0}
        for r in self.results:
            c[r.status] += 1
        c["total"] = len(self.results)
        return c

    @property
    def ok(self) -> bool:
        c = self.counts
        return c["fail"] == 0 and c["error"] == 0

    def result(self, check_id: str) -> CheckResult:
        for r in self.results:
            if r.id == check_id:
                return r
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        # elapsed times are left out so that reports are byte-stable
        return {
            "version": REPORT_VERSION,
            "scenario": {"name": self.scenario, "fingerprint": self.fingerprint,
                         "order": self.order, "degree": self.degree, "seed": self.seed},
            "summary": dict(self.counts, ok=self.ok),
            "checks": [r.record() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, sort_keys=False) + "\n"

    def to_table(self) -> str:
        rows = [("check", "status", "order", "detail")]
        for r in self.results:
            order = "" if r.first_failing_order is None else f"h^{r.first_failing_order}"
            detail = r.detail if r.passed or not r.sample else f"{r.detail} [{r.sample}]"
            rows.append((r.id, r.status.upper(), order, _clip(detail, 90)))
        widths = [max(len(row[i]) for row in rows) for i in range(3)]
        lines = [f"scenario {self.scenario}  N={self.order}  D={self.degree}  seed={self.seed}",
                 f"fingerprint {self.fingerprint[:16]}"]
        for i, row in enumerate(rows):
            lines.append("  ".join(row[j].ljust(widths[j]) for j in range(3)) + "  " + row[3])
            if i == 0:
                lines.append("  ".join("-" * w for w in widths) + "  " + "-" * 6)
        c = self.counts
        lines.append(f"{c['pass']} passed, {c['fail']} failed, {c['error']} errors, "
                     f"{c['skip']} skipped of {c['total']}")
        return "\n".join(lines) + "\n"


def _clip(s: str, n: int) -> str:
    s = " ".join(s.split())
    return s if len(s) <= n else s[: n - 1] + "…"


# ---------------------------------------------------------------------------
# the catalog


class NotApplicable(Exception):
    """Raised by a check when the scenario lacks what it talks about."""


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    run: Callable
    depends: tuple = ()
    needs: tuple = ()


CATALOG: list[Check] = []
_BY_ID: dict[str, Check] = {}


def check(check_id: str, anchor: str, depends=(), needs=()):
    def deco(fn):
        if check_id in _BY_ID:
            raise ValueError(f"duplicate check id {check_id}")
        for d in depends:
            if d not in _BY_ID:
                raise ValueError(f"{check_id} depends on unregistered {d}")
        c = Check(check_id, anchor, fn, tuple(depends), tuple(needs))
        CATALOG.append(c)
        _BY_ID[check_id] = c
        return fn
    return deco


def catalog_ids() -> list[str]:
    return [c.id for c in CATALOG]


def get_check(check_id: str) -> Check:
    try:
        return _BY_ID[check_id]
    except KeyError:
        raise ConfigurationError(f"unknown check id {check_id!r}") from None


# ---------------------------------------------------------------------------
# scenario context


def _err(line, fn, *args):
    try:
        return fn(*args)
    except ScenarioError:
        raise
    except (ValueError, ArithmeticError, KeyError) as e:
        raise ScenarioError(str(e), line) from None


class Context:
    """Mathematical objects of a scenario, built lazily and cached."""

    def __init__(self, scn: Scenario, seed: int | None = None, order: int | None = None,
                 degree: int | None = None):
        self.scn = scn
        self.order = order or scn.order
        self.degree = degree or scn.degree
        self.seed = scn.seed if seed is None else seed
        self.samples = scn.samples
        if self.order < 1 or self.degree < 1:
            raise ScenarioError("order and degree must be at least 1", None, scn.source)
        # tensor-level laws run on degree-1 monomials
        self.low = 1

    def rng(self, salt: str) -> random.Random:
        return random.Random(f"{self.seed}:{salt}")

    # -- syntax that can be checked without building the algebra
    def validate(self):
        """Parse every polynomial literal; raise :class:`ScenarioError` with its line."""
        try:
            self._validate()
        except ScenarioError as e:
            if e.source != self.scn.source:
                raise ScenarioError(e.bare, e.line, self.scn.source) from None
            raise

    def _validate(self):
        n, N = self.scn.dimension, self.order
        for _, comps, line in self.scn.generators:
            for c in comps:
                _err(line, parse_poly, c, n, N)
        for m in self.scn.modules:
            for entries, line in m.actions.values():
                for text in entries.values():
                    _err(line, parse_poly, text, n, N)
        for mp in self.scn.maps:
            for (row, col), (pairs, line) in mp.entries.items():
                for poly, _ in pairs:
                    _err(line, parse_poly, poly or "1", n, N)
        names = {m.name for m in self.scn.modules}
        for c in self.scn.connections:
            if c.module == "A":
                continue
            if c.module not in names:
                raise ScenarioError(f"unknown module {c.module!r}", c.line, self.scn.source)
        try:
            calc = self.calc
        except ScenarioError:
            raise
        except Exception:
            return  # reported by the checks
        if calc is None:
            return
        for c in self.scn.connections:
            for (b, a), (text, line) in c.omega.items():
                _err(line, calc.parse, text, 1)

    # -- algebra
    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(self.scn.dimension, self.order)

    @cached_property
    def real(self) -> Realization:
        names = [g[0] for g in self.scn.generators]
        fields = [g[1] for g in self.scn.generators]
        pres = derive_structure_constants(names, self.ring, fields)
        return Realization(pres, self.ring, fields)

    @property
    def alg(self):
        return self.real.algebra

    @cached_property
    def calc(self) -> FormsCalculus | None:
        return FormsCalculus(self.real) if self.scn.calculus else None

    @cached_property
    def twist(self) -> Twist:
        """The scenario's twist, deliberately not verified here."""
        t = self.scn.twist
        alg = self.alg
        kind = t["kind"]
        if kind == "moyal":
            tw = moyal_twist(alg, t["generators"], t["theta"])
        elif kind == "jordanian":
            tw = jordanian_twist(alg, t["H"], t["E"])
        elif kind == "explicit":
            text, line = t["F"]
            F = _err(line, parse_tensor, text, alg, 2)
            inv = t.get("F_inv")
            tw = explicit_twist(F, _err(inv[1], parse_tensor, inv[0], alg, 2) if inv else None)
        else:
            one = alg.tensor_one(2)
            tw = Twist(one, one, label="identity")
        if t.get("fault") == "drop_top_order":
            F = tw.F - tw.F.at_order(self.order)
            tw = Twist(F, F.invert(), label=f"{tw.label} (top order dropped)")
        return tw

    @cached_property
    def nontrivial(self) -> bool:
        return bool(self.twist.F.at_order(1))

    @cached_property
    def U(self) -> Undeformed:
        return Undeformed(self.real, self.calc)

    @cached_property
    def D(self) -> Deformed:
        return Deformed(self.real, self.twist, self.calc)

    @cached_property
    def r0(self) -> RMatrix:
        spec = self.scn.rmatrix
        if spec["kind"] == "explicit":
            text, line = spec["R"]
            return RMatrix(_err(line, parse_tensor, text, self.alg, 2), label="explicit")
        return RMatrix.trivial(self.alg)

    @cached_property
    def rD(self) -> RMatrix:
        """The R-matrix used in the deformed world."""
        if self.scn.rmatrix["kind"] == "trivial":
            return self.r0
        return twist_r_matrix(self.twist, self.r0)

    @cached_property
    def r_untwisted(self) -> RMatrix:
        return RMatrix.trivial(self.alg)

    # -- spaces
    @cached_property
    def A(self) -> FreeBimodule:
        if self.calc is not None:
            return self.calc.functions()
        return FreeBimodule(self.real, [0], name="A")

    @cached_property
    def O1(self) -> FreeBimodule:
        return self.calc.omega(1) if self.calc is not None else self.A

    @cached_property
    def modules(self) -> dict:
        out = {}
        for m in self.scn.modules:
            mats = {g: {k: self.ring.parse(txt) for k, txt in entries.items()}
                    for g, (entries, _) in m.actions.items()}
            out[m.name] = FreeBimodule(self.real, list(range(m.rank)), mats, name=m.name)
        return out

    def space(self, name: str):
        if name == "A":
            return self.A
        if name in ("Omega1", "Omega2"):
            if self.calc is None:
                raise ConfigurationError(f"{name} needs a differential calculus")
            return self.calc.omega(int(name[-1]))
        return self.modules[name]

    @cached_property
    def module_list(self) -> list:
        return list(self.modules.values())

    @cached_property
    def triple(self) -> list:
        """Three modules for coherence-type checks (declared ones first)."""
        mods = self.module_list[:3]
        while len(mods) < 3:
            mods.append(self.O1)
        return mods

    @cached_property
    def maps(self) -> list:
        out = []
        for mp in self.scn.maps:
            src, tgt = self.space(mp.source), self.space(mp.target)
            grid = {}
            for (row, col), (pairs, line) in mp.entries.items():
                if not (1 <= row <= tgt.rank and 1 <= col <= src.rank):
                    raise ScenarioError(f"entry {row},{col} outside the {tgt.rank}×{src.rank} "
                                        "matrix", line, self.scn.source)
                grid[(tgt.labels[row - 1], src.labels[col - 1])] = [
                    (self.ring.parse(p or "1"), w) for p, w in pairs]
            out.append(entry_map(src, tgt, grid, name=mp.name))
        return out

    # -- sampled objects
    @cached_property
    def hopf_samples(self) -> list:
        """PBW words of length at most 2 plus an ``h``-dependent combination."""
        alg = self.alg
        m = alg.pres.dimension
        out = [alg.one()]
        out += [alg.gen(i) for i in range(m)]
        out += [alg.word(i, j) for i in range(m) for j in range(i, m)]
        if self.order >= 1 and m >= 1:
            out.append(alg.gen(0).scale(alg.h(1)) + alg.word(m - 1, 0))
        return out

    @cached_property
    def xis(self) -> list:
        alg = self.alg
        m = alg.pres.dimension
        out = [alg.gen(i) for i in range(m)]
        if m >= 2:
            out.append(alg.word(0, m - 1))
        return out

    def random_map(self, src, tgt, rng, right_linear=False, name="P"):
        ring = self.ring
        m = self.alg.pres.dimension
        monos = ring.monomials(1)
        grid = {}
        for b in tgt.labels:
            for a in src.labels:
                if rng.random() < 0.4:
                    continue
                pairs = []
                for _ in range(rng.randint(1, 2)):
                    c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 2))
                    poly = ring.monomial(rng.choice(monos), c)
                    if right_linear:
                        word = ()
                    else:
                        word = tuple(rng.randrange(m) for _ in range(rng.randint(0, 1)))
                    pairs.append((poly, word))
                grid[(b, a)] = pairs
        if not grid:
            grid[(tgt.labels[0], src.labels[0])] = [(ring.one(), ())]
        return entry_map(src, tgt, grid, name=name)

    def map_samples(self, count: int, salt: str, right_linear=False) -> list:
        rng = self.rng(salt)
        S = self.O1
        return [self.random_map(S, S, rng, right_linear, name=f"P{i}") for i in range(count)]

    # -- connections
    @cached_property
    def connections(self) -> dict:
        if self.calc is None:
            return {}
        out = {}
        for c in self.scn.connections:
            M = self.space(c.module)
            omega = {}
            for (b, a), (text, line) in c.omega.items():
                w = self.calc.parse(text, 1)
                if w:
                    omega[(M.labels[b], M.labels[a])] = w
            out[c.name] = form_connection(self.U, M, omega, name=c.name)
        return out

    def quantized(self, name: str):
        cache = self.__dict__.setdefault("_quantized", {})
        if name not in cache:
            cache[name] = quantize_connection(self.U, self.D, self.connections[name])
        return cache[name]

    @cached_property
    def sum_names(self) -> list:
        if "sum" in self.scn.roles:
            return self.scn.roles["sum"][0]
        return [c.name for c in self.scn.connections][:3]

    @cached_property
    def equivariant_names(self) -> list:
        return [name for name, c in self.connections.items()
                if is_equivariant(self.U, c, self.low)]


# ---------------------------------------------------------------------------
# helpers for the algebra-level checks


def _monos(ctx: Context, degree: int | None = None) -> list[PolyFunction]:
    ring = ctx.ring
    return [ring.monomial(e) for e in ring.monomials(degree or ctx.degree)]


def _need(cond: bool, what: str):
    if not cond:
        raise NotApplicable(what)


def _pick(ctx: Context, n: int) -> list:
    _need(len(ctx.sum_names) >= n, f"needs {n} connections for sums")
    return ctx.sum_names[:n]


def jacobi_verdict(pres) -> Verdict:
    m = pres.dimension
    col = Collector()

    def br(x: dict, j: int) -> dict:
        out: dict = {}
        for i, c in x.items():
            for k, d in pres.bracket(i, j).items():
                out[k] = out.get(k, 0) + c * d
        return out

    for a, b, c in itertools.combinations(range(m), 3):
        total: dict = {}
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            for k, v in br(pres.bracket(x, y), z).items():
                total[k] = total.get(k, 0) + v
        col.record({(k, 0): v for k, v in total.items()}, f"({pres.names[a]}, {pres.names[b]}, "
                                                           f"{pres.names[c]})")
    return col.verdict(f"{col.count} triples")


def realization_verdict(real: Realization) -> Verdict:
    """``[X_a, X_b] = c^k_{ab} X_k`` as differential operators."""
    from .funcalg import op_compose

    pres = real.pres
    col = Collector()
    N = real.order
    for a, b in itertools.combinations(range(pres.dimension), 2):
        A, B = real.word_op((a,)), real.word_op((b,))
        lhs = op_compose(A, B, N)
        for key, v in op_compose(B, A, N).items():
            lhs[key] = lhs.get(key, 0) - v
        for k, c in pres.bracket(a, b).items():
            for key, v in real.word_op((k,)).items():
                lhs[key] = lhs.get(key, 0) - c * v
        col.record(lhs, f"[{pres.names[a]}, {pres.names[b]}]")
    return col.verdict(f"{col.count} brackets")


def module_algebra_verdict(ctx: Context) -> Verdict:
    """``ξ ▷ (f g) = (ξ_1 ▷ f)(ξ_2 ▷ g)`` and ``ξ ▷ 1 = ε(ξ) 1``."""
    real = ctx.real
    U = ctx.U
    col = Collector()
    monos = _monos(ctx)
    one = ctx.ring.one()
    for xi in ctx.hopf_samples:
        lhs1 = PolyFunction(ctx.ring, real.act_terms(xi.terms, one.terms))
        col.record((lhs1 - one * xi.counit()).terms, f"ξ ▷ 1 for ξ={xi}")
        for f, g in itertools.combinations_with_replacement(monos, 2):
            lhs = PolyFunction(ctx.ring, real.act_terms(xi.terms, (f * g).terms))
            rhs = _split_product(ctx, U, xi, f, g, lambda a, b: a * b)
            col.record((lhs - rhs).terms, f"ξ={xi}, f={f}, g={g}")
    return col.verdict(f"{col.count} samples")


def _split_product(ctx, world, xi: HopfElement, f, g, mul):
    real = ctx.real
    out = ctx.ring.zero()
    for (w, k), c in xi.terms.items():
        for ((w1, w2), j), d in world.coproduct_terms(w).items():
            if k + j > ctx.order:
                continue
            a = PolyFunction(ctx.ring, real.act_word(w1, f.terms))
            b = PolyFunction(ctx.ring, real.act_word(w2, g.terms))
            if a and b:
                out = out + mul(a, b) * ctx.alg.h(k + j) * (c * d)
    return out


def star_associativity_verdict(ctx: Context, degree: int | None = None) -> Verdict:
    D = ctx.D
    monos = _monos(ctx, degree)
    col = Collector()
    for f, g, k in itertools.product(monos, repeat=3):
        lhs = D.mul(D.mul(f, g), k)
        rhs = D.mul(f, D.mul(g, k))
        col.record((lhs - rhs).terms, f"f={f}, g={g}, k={k}")
    return col.verdict(f"{col.count} monomial triples")


def _shift_el(ctx, el: ModuleElement, k: int, c) -> ModuleElement:
    from .bimod import t_shift

    return ModuleElement(el.space, t_shift(el.terms, k, ctx.order)).scale(c)


def star_bimodule_covariance_verdict(ctx: Context, spaces) -> Verdict:
    """``ξ ▷ (a ⋆ v) = (ξ_1F ▷ a) ⋆ (ξ_2F ▷ v)`` and the right-action analogue."""
    D = ctx.D
    real = ctx.real
    col = Collector()
    monos = _monos(ctx, ctx.low)
    for space in spaces:
        for v in space.monomial_basis(ctx.low):
            for a in monos:
                for xi in ctx.xis:
                    lhs_l = D.act(xi, D.left(a, v))
                    lhs_r = D.act(xi, D.right(v, a))
                    rhs_l = space.zero()
                    rhs_r = space.zero()
                    for (w, k), c in xi.terms.items():
                        for ((w1, w2), j), d in D.coproduct_terms(w).items():
                            if k + j > ctx.order:
                                continue
                            a1 = PolyFunction(ctx.ring, real.act_word(w1, a.terms))
                            v2 = D.act_word(w2, v)
                            if a1 and v2:
                                rhs_l = rhs_l + _shift_el(ctx, D.left(a1, v2), k + j, c * d)
                            v1 = D.act_word(w1, v)
                            a2 = PolyFunction(ctx.ring, real.act_word(w2, a.terms))
                            if v1 and a2:
                                rhs_r = rhs_r + _shift_el(ctx, D.right(v1, a2), k + j, c * d)
                    col.record((lhs_l - rhs_l).terms, f"left, ξ={xi}, a={a}, v={v}")
                    col.record((lhs_r - rhs_r).terms, f"right, ξ={xi}, a={a}, v={v}")
    return col.verdict(f"{col.count} samples")


def _forms(ctx: Context):
    calc = ctx.calc
    return [(p, calc.omega(p)) for p in range(calc.n + 1)]


def nilpotency_verdict(ctx: Context) -> Verdict:
    calc = ctx.calc
    col = Collector()
    for p, om in _forms(ctx):
        if p + 2 > calc.n:
            continue
        for v in om.monomial_basis(ctx.degree):
            col.record(exterior_d(calc, exterior_d(calc, v)).terms, f"d∘d on {v}")
    return col.verdict(f"{col.count} forms")


def graded_leibniz_verdict(ctx: Context, world=None) -> Verdict:
    """``d(θ ∧ η) = dθ ∧ η + (-1)^p θ ∧ dη`` in the given world."""
    calc = ctx.calc
    world = world or ctx.U
    col = Collector()
    for p, om in _forms(ctx):
        for q, oq in _forms(ctx):
            if p + q + 1 > calc.n:
                continue
            for v in om.monomial_basis(ctx.low):
                for w in oq.monomial_basis(ctx.low):
                    lhs = calc.d(_wedge(world, calc, v, w))
                    rhs = _wedge(world, calc, calc.d(v), w) + \
                        _wedge(world, calc, v, calc.d(w)).scale(-1 if p % 2 else 1)
                    col.record((lhs - rhs).terms, f"θ={v}, η={w}")
    return col.verdict(f"{col.count} pairs")


def _wedge(world, calc, a, b):
    """Wedge with functions treated as zero-forms (left/right actions)."""
    if a.space is calc.functions():
        return world.left(a.component(()), b)
    if b.space is calc.functions():
        return world.right(a, b.component(()))
    return world.wedge(a, b)


def equivariant_d_verdict(ctx: Context) -> Verdict:
    calc = ctx.calc
    U = ctx.U
    col = Collector()
    for p, om in _forms(ctx):
        if p + 1 > calc.n:
            continue
        for v in om.monomial_basis(ctx.degree):
            for xi in ctx.xis:
                col.record((U.act(xi, calc.d(v)) - calc.d(U.act(xi, v))).terms,
                           f"ξ={xi}, θ={v}")
    return col.verdict(f"{col.count} samples")


# ---------------------------------------------------------------------------
# the registered checks

TWIST = ("twist.normalization", "twist.inverse", "twist.cocycle")


@check("presentation.jacobi", "[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y] = 0 for the structure constants")
def _(ctx):
    return jacobi_verdict(ctx.real.pres)


@check("presentation.realization", "[X_a, X_b] = c^k_ab X_k for the realizing vector fields",
       depends=("presentation.jacobi",))
def _(ctx):
    return realization_verdict(ctx.real)


@check("hopf.axioms", "coassociativity, counit and μ(S⊗id)Δ = μ(id⊗S)Δ = ε1 for U(g)",
       depends=("presentation.jacobi",))
def _(ctx):
    return verify_hopf_axioms(HopfStructure(ctx.alg), ctx.hopf_samples)


@check("twist.normalization", "(ε⊗id)F = (id⊗ε)F = 1", depends=("hopf.axioms",))
def _(ctx):
    return verify_normalization(ctx.twist)


@check("twist.inverse", "F F⁻¹ = F⁻¹ F = 1⊗1", depends=("hopf.axioms",))
def _(ctx):
    return verify_inverse(ctx.twist)


@check("twist.cocycle", "(F⊗1)(Δ⊗id)F = (1⊗F)(id⊗Δ)F", depends=("hopf.axioms",))
def _(ctx):
    return verify_cocycle(ctx.twist)


@check("hopf.twisted_axioms", "Hopf axioms for Δ^F = FΔF⁻¹, ε and S^F = χSχ⁻¹", depends=TWIST)
def _(ctx):
    return verify_hopf_axioms(ctx.D.structure, ctx.hopf_samples)


@check("rmatrix.yang_baxter", "R12 R13 R23 = R23 R13 R12 for the deformed R-matrix",
       depends=TWIST)
def _(ctx):
    return verify_yang_baxter(ctx.rD)


@check("rmatrix.triangular", "R21 = R⁻¹ for the deformed R-matrix", depends=TWIST)
def _(ctx):
    return verify_triangular(ctx.rD)


@check("rmatrix.quasitriangular",
       "Δ^F_op = R Δ^F R⁻¹, (Δ^F⊗id)R = R13 R23, (id⊗Δ^F)R = R13 R12", depends=TWIST)
def _(ctx):
    return verify_quasitriangular(ctx.D.structure, ctx.rD, ctx.hopf_samples)


@check("algebra.module_algebra", "ξ ▷ (fg) = (ξ1 ▷ f)(ξ2 ▷ g) and ξ ▷ 1 = ε(ξ)1",
       depends=("presentation.realization",))
def _(ctx):
    return module_algebra_verdict(ctx)


@check("star.associativity", "(f ⋆ g) ⋆ k = f ⋆ (g ⋆ k) on monomial triples",
       depends=TWIST + ("algebra.module_algebra",))
def _(ctx):
    return star_associativity_verdict(ctx)


@check("star.unit", "1 ⋆ f = f ⋆ 1 = f", depends=TWIST)
def _(ctx):
    D = ctx.D
    one = ctx.ring.one()
    col = Collector()
    for f in _monos(ctx):
        col.record((D.mul(one, f) - f).terms, f"1 ⋆ {f}")
        col.record((D.mul(f, one) - f).terms, f"{f} ⋆ 1")
    return col.verdict(f"{col.count} samples")


@check("star.covariance", "ξ ▷ (f ⋆ g) = (ξ1F ▷ f) ⋆ (ξ2F ▷ g)",
       depends=TWIST + ("algebra.module_algebra",))
def _(ctx):
    D = ctx.D
    real = ctx.real
    col = Collector()
    monos = _monos(ctx, ctx.low + 1)
    for xi in ctx.xis:
        for f, g in itertools.product(monos, repeat=2):
            lhs = PolyFunction(ctx.ring, real.act_terms(xi.terms, D.mul(f, g).terms))
            rhs = _split_product(ctx, D, xi, f, g, D.mul)
            col.record((lhs - rhs).terms, f"ξ={xi}, f={f}, g={g}")
    return col.verdict(f"{col.count} samples")


@check("bimodule.star_associativity",
       "(a ⋆ b) ⋆ v = a ⋆ (b ⋆ v), (v ⋆ a) ⋆ b = v ⋆ (a ⋆ b), (a ⋆ v) ⋆ b = a ⋆ (v ⋆ b)",
       depends=("star.associativity",))
def _(ctx):
    spaces = ctx.module_list + ([ctx.O1] if ctx.calc else [])
    _need(bool(spaces), "no modules declared")
    return combine([verify_star_bimodule(ctx.D, s, ctx.low) for s in spaces])


@check("bimodule.star_covariance", "ξ ▷ (a ⋆ v) = (ξ1F ▷ a) ⋆ (ξ2F ▷ v) and likewise on the right",
       depends=("star.covariance",))
def _(ctx):
    spaces = ctx.module_list + ([ctx.O1] if ctx.calc else [])
    _need(bool(spaces), "no modules declared")
    return star_bimodule_covariance_verdict(ctx, spaces)


@check("calculus.nilpotent", "d ∘ d = 0", needs=("calculus",))
def _(ctx):
    return nilpotency_verdict(ctx)


@check("calculus.graded_leibniz", "d(θ ∧ η) = dθ ∧ η + (-1)^p θ ∧ dη", needs=("calculus",))
def _(ctx):
    return graded_leibniz_verdict(ctx)


@check("calculus.equivariant_d", "ξ ▷ dθ = d(ξ ▷ θ)", needs=("calculus",))
def _(ctx):
    return equivariant_d_verdict(ctx)


@check("calculus.star_leibniz", "d(θ ∧⋆ η) = dθ ∧⋆ η + (-1)^p θ ∧⋆ dη",
       depends=("calculus.graded_leibniz", "calculus.equivariant_d", "star.associativity"),
       needs=("calculus",))
def _(ctx):
    return graded_leibniz_verdict(ctx, ctx.D)


@check("calculus.graded_quasi_commutative",
       "θ ∧⋆ η = (-1)^pq (R̄^α ▷ η) ∧⋆ (R̄_α ▷ θ) with the deformed R-matrix",
       depends=("calculus.star_leibniz", "rmatrix.triangular"), needs=("calculus",))
def _(ctx):
    return verify_graded_quasi_commutative(ctx.D, ctx.rD, ctx.low)


@check("adjoint.hopf_action", "(ξη) ▶ P = ξ ▶ (η ▶ P) and 1 ▶ P = P",
       depends=("hopf.axioms",))
def _(ctx):
    alg = ctx.alg
    vs = []
    for P in ctx.map_samples(3, "adjoint") + ctx.maps:
        vs.append(compare_maps(adjoint_act(ctx.U, alg.one(), P), P, [], f"1 ▶ {P}"))
        for xi, eta in itertools.product(ctx.xis[:3], repeat=2):
            lhs = adjoint_act(ctx.U, xi * eta, P)
            rhs = adjoint_act(ctx.U, xi, adjoint_act(ctx.U, eta, P))
            vs.append(compare_maps(lhs, rhs, [], f"ξ={xi}, η={eta}, P={P}"))
    return combine(vs)


@check("quantization.homomorphism", "D_F(P ∘⋆ Q) = D_F(P) ∘ D_F(Q)",
       depends=TWIST + ("adjoint.hopf_action",))
def _(ctx):
    maps = ctx.map_samples(2 * ctx.samples, "homomorphism")
    return verify_d_homomorphism(ctx.U, ctx.twist, list(zip(maps[::2], maps[1::2])))


@check("adjoint.composition", "ξ ▶ (P ∘ Q) = (ξ1 ▶ P) ∘ (ξ2 ▶ Q)",
       depends=("adjoint.hopf_action",))
def _(ctx):
    return _composition_verdict(ctx, ctx.U, ctx.map_samples(4, "composition"))


def _composition_verdict(ctx, world, maps) -> Verdict:
    from .morphism import adjoint_terms, add_maps

    vs = []
    for P, Q in zip(maps[::2], maps[1::2]):
        for xi in ctx.xis:
            lhs = adjoint_act(world, xi, compose(P, Q))
            acc = None
            for (w, k), c in xi.terms.items():
                for ((w1, w2), j), d in world.coproduct_terms(w).items():
                    if k + j > ctx.order:
                        continue
                    term = compose(adjoint_terms(world, {(w1, k + j): c * d}, P),
                                   adjoint_terms(world, {(w2, 0): Fraction(1)}, Q))
                    acc = term if acc is None else add_maps(acc, term)
            vs.append(compare_maps(lhs, acc, [], f"ξ={xi}, P={P}, Q={Q}"))
    return combine(vs)


@check("adjoint.twisted_composition", "ξ ▶_F (P ∘ Q) = (ξ1F ▶_F P) ∘ (ξ2F ▶_F Q)",
       depends=TWIST + ("adjoint.composition",))
def _(ctx):
    maps = [d_quantize(ctx.U, ctx.twist, P) for P in ctx.map_samples(4, "twisted-composition")]
    return _composition_verdict(ctx, ctx.D, maps)


@check("quantization.inverse", "D_F ∘ D_F⁻¹ = id and D_F⁻¹ ∘ D_F = id",
       depends=TWIST + ("adjoint.hopf_action",))
def _(ctx):
    return verify_d_inverse(ctx.U, ctx.twist, ctx.map_samples(ctx.samples, "homomorphism")[::2])


@check("quantization.alternative_form", "(f̄^α ▶ P) ∘ f̄_α ▷ = f^β ▷ ∘ P ∘ S(f_β)χ⁻¹ ▷",
       depends=TWIST + ("adjoint.hopf_action",))
def _(ctx):
    return verify_d_alternative(ctx.U, ctx.twist, ctx.map_samples(ctx.samples, "alternative"))


@check("quantization.intertwining", "D_F(ξ ▶ P) = ξ ▶_F D_F(P)",
       depends=TWIST + ("adjoint.hopf_action",))
def _(ctx):
    rng = ctx.rng("intertwining")
    maps = ctx.map_samples(ctx.samples, "intertwining")
    return verify_intertwining(ctx.U, ctx.D, ctx.twist,
                               [(rng.choice(ctx.xis), P) for P in maps])


@check("quantization.right_linear", "right A-linear P give right A⋆-linear D_F(P)",
       depends=TWIST + ("bimodule.star_associativity",))
def _(ctx):
    maps = ctx.map_samples(4, "right-linear", right_linear=True)
    maps += [P for P in ctx.maps if P.right_linear]
    return verify_right_linear_restriction(ctx.U, ctx.D, ctx.twist, maps, ctx.low)


@check("braiding.equivariance", "τ_R(ξ ▷ x) = ξ ▷ τ_R(x) on K-tensors",
       depends=("rmatrix.quasitriangular",))
def _(ctx):
    pairs = kt_samples(ctx.D, [ctx.O1, ctx.O1], ctx.low)
    return combine([verify_braiding_equivariance(ctx.D, ctx.rD, ctx.xis, pairs),
                    verify_braiding_equivariance(ctx.U, ctx.r0, ctx.xis, pairs)])


@check("braiding.inverse", "τ_R ∘ τ_R⁻¹ = id", depends=("rmatrix.quasitriangular",))
def _(ctx):
    return verify_braiding_inverse(ctx.D, ctx.rD, kt_samples(ctx.D, [ctx.O1, ctx.O1], ctx.low))


@check("braiding.braid_relations", "τ12 τ23 τ12 = τ23 τ12 τ23 on triple K-tensors",
       depends=("rmatrix.yang_baxter", "rmatrix.quasitriangular"))
def _(ctx):
    triples = kt_samples(ctx.D, [ctx.O1] * 3, ctx.low)
    return combine([verify_braid_relations(ctx.D, ctx.rD, triples, inverse=True),
                    verify_braid_relations(ctx.D, ctx.rD, triples, inverse=False)])


@check("quasi_commutative.algebra", "a ⋆ b = (R̄^α ▷ b) ⋆ (R̄_α ▷ a)",
       depends=("star.associativity", "rmatrix.triangular"))
def _(ctx):
    return verify_quasi_commutative_algebra(ctx.real, ctx.twist, ctx.rD, ctx.degree)


@check("quasi_commutative.module", "v ⋆ a = (R̄^α ▷ a) ⋆ (R̄_α ▷ v) on every declared module",
       depends=("bimodule.star_associativity", "rmatrix.triangular"))
def _(ctx):
    spaces = ctx.module_list + ([ctx.O1] if ctx.calc else [])
    _need(bool(spaces), "no modules declared")
    return combine([verify_quasi_commutative_module(ctx.D, ctx.rD, s, ctx.low) for s in spaces])


@check("quasi_commutative.left_linearity", "Q(a ⋆ w) = (R̄^α ▷ a) ⋆ (R̄_α ▶ Q)(w)",
       depends=("quasi_commutative.module", "quantization.right_linear"))
def _(ctx):
    maps = ctx.map_samples(3, "left-linearity", right_linear=True)
    return combine([verify_quasi_left_linearity(ctx.D, ctx.rD, d_quantize(ctx.U, ctx.twist, P),
                                                ctx.low) for P in maps])


def _expect_order_one(v: Verdict, what: str) -> Verdict:
    if v.passed:
        return Verdict.fail(None, what, "held with R = 1⊗1, expected a failure at order h")
    if v.first_failing_order != 1:
        return Verdict.fail(v.first_failing_order, v.sample,
                            f"{what} failed first at h^{v.first_failing_order}, expected h^1")
    return Verdict.ok(f"R = 1⊗1 fails at order h ({v.sample})")


@check("quasi_commutative.untwisted_control",
       "with R = 1⊗1 the quasi-commutativity laws fail at order h",
       depends=("quasi_commutative.algebra", "quasi_commutative.module",
                "quasi_commutative.left_linearity"))
def _(ctx):
    _need(ctx.nontrivial, "the twist is trivial at order h")
    R1 = ctx.r_untwisted
    vs = [verify_quasi_commutative_algebra(ctx.real, ctx.twist, R1, ctx.degree)]
    spaces = ctx.module_list + ([ctx.O1] if ctx.calc else [])
    vs += [verify_quasi_commutative_module(ctx.D, R1, s, ctx.low) for s in spaces]
    P = ctx.map_samples(1, "left-linearity", right_linear=True)[0]
    vs.append(verify_quasi_left_linearity(ctx.D, R1, d_quantize(ctx.U, ctx.twist, P), ctx.low))
    failed = [v for v in vs if not v.passed]
    if not failed:
        return _expect_order_one(vs[0], "quasi-commutativity")
    first = min(failed, key=lambda v: v.first_failing_order)
    return _expect_order_one(first, "quasi-commutativity")


@check("braiding.braid_relations_quotient",
       "τ⁻¹ descends to the tensor product over A⋆ and obeys the braid relation there",
       depends=("braiding.braid_relations", "quasi_commutative.module"))
def _(ctx):
    D = ctx.D
    certify_quasi_commutative(D, ctx.rD, [ctx.O1], ctx.low)
    samples = D.tensor(ctx.O1, ctx.O1, ctx.O1).monomial_basis(ctx.low)
    return verify_braid_relations(D, ctx.rD, samples, inverse=True, quotient=True)


def _tensor_R_maps(ctx):
    maps = ctx.map_samples(5, "tensor-R")
    return [d_quantize(ctx.U, ctx.twist, P) for P in maps]


@check("tensor_R.equivariance", "ξ ▶ (P ⊗_R Q) = (ξ1 ▶ P) ⊗_R (ξ2 ▶ Q)",
       depends=("braiding.equivariance", "adjoint.twisted_composition"))
def _(ctx):
    P, Q, Pt, Qt, Z = _tensor_R_maps(ctx)
    return verify_tensor_R_laws(ctx.D, ctx.rD, P, Q, Pt, Qt, Z, ctx.xis[:2], ctx.low)[
        "equivariance"]


@check("tensor_R.associativity", "(P ⊗_R Q) ⊗_R Z = P ⊗_R (Q ⊗_R Z)",
       depends=("braiding.braid_relations", "adjoint.twisted_composition"))
def _(ctx):
    P, Q, Pt, Qt, Z = _tensor_R_maps(ctx)
    return verify_tensor_R_laws(ctx.D, ctx.rD, P, Q, Pt, Qt, Z, [], ctx.low)["associativity"]


@check("tensor_R.composition",
       "(P̃ ⊗_R Q̃) ∘ (P ⊗_R Q) = (P̃ ∘ (R̄^α ▶ P)) ⊗_R ((R̄_α ▶ Q̃) ∘ Q)",
       depends=("braiding.braid_relations", "adjoint.twisted_composition"))
def _(ctx):
    P, Q, Pt, Qt, Z = _tensor_R_maps(ctx)
    return verify_tensor_R_laws(ctx.D, ctx.rD, P, Q, Pt, Qt, Z, [], ctx.low)["composition"]


@check("phi.invertibility", "φ: V⋆ ⊗⋆ W⋆ → (V ⊗ W)⋆ is invertible; two inverses agree",
       depends=("bimodule.star_associativity",))
def _(ctx):
    D = ctx.D
    V, W, _ = ctx.triple
    col = Collector()
    for x in D.tensor(V, W).monomial_basis(ctx.low):
        col.record((phi_inverse(D, phi(D, x), [V, W]) - x).terms, f"φ⁻¹φ on {x}")
    for y in tensor_over_A(V, W).monomial_basis(ctx.low):
        a = phi_inverse(D, y, [V, W])
        col.record((a - phi_inverse_direct(D, y, [V, W])).terms, f"two inverses on {y}")
        col.record((phi(D, a) - y).terms, f"φφ⁻¹ on {y}")
    return col.verdict(f"{col.count} samples")


@check("phi.diagram", "φ ∘ (D_F P ⊗_{R^F} D_F Q) = D_F((f̄^α ▶ P) ⊗_R (f̄_α ▶ Q)) ∘ φ",
       depends=("tensor_R.composition", "quasi_commutative.module", "phi.invertibility"))
def _(ctx):
    _need(ctx.scn.rmatrix["kind"] != "trivial", "needs the twisted R-matrix")
    P, Q = ctx.map_samples(2, "diagram", right_linear=True)
    res = verify_quantization_diagram(ctx.U, ctx.D, ctx.r0, P, Q, ctx.low)
    return combine([res["k_level"], res["quotient"]])


@check("phi.coherence", "φ_{V⊗W,Z} ∘ (φ_{V,W} ⊗ id) = φ_{V,W⊗Z} ∘ (id ⊗ φ_{W,Z})",
       depends=("phi.invertibility",))
def _(ctx):
    V, W, Z = ctx.triple
    return verify_coherence(ctx.D, V, W, Z, ctx.low)


# -- connections


def _conns(ctx):
    _need(bool(ctx.connections), "no connections declared")
    return ctx.connections


@check("connection.leibniz", "∇(v a) = (∇v) a + v ⊗ da", needs=("calculus",),
       depends=("calculus.graded_leibniz",))
def _(ctx):
    return combine([verify_right_leibniz(c, ctx.degree) for c in _conns(ctx).values()])


@check("connection.curvature_formula", "R_∇ = ∇ ∘ ∇ has coefficients dω + ω ∧ ω",
       depends=("connection.leibniz",), needs=("calculus",))
def _(ctx):
    return combine([verify_curvature_formula(c) for c in _conns(ctx).values()])


@check("connection.affine", "differences of connections are right A-linear, in both worlds",
       depends=("connection.leibniz", "calculus.star_leibniz"), needs=("calculus",))
def _(ctx):
    vs = []
    for name, c in _conns(ctx).items():
        base = form_connection(ctx.U, c.module, {}, name="d")
        vs.append(verify_right_linear(ctx.U, c - base, ctx.low))
        qb = quantize_connection(ctx.U, ctx.D, base)
        vs.append(verify_right_linear(ctx.D, ctx.quantized(name) - qb, ctx.low))
    return combine(vs)


@check("connection.quantized_leibniz", "D̃_F(∇)(v ⋆ a) = D̃_F(∇)(v) ⋆ a + v ⊗⋆ da",
       depends=("connection.leibniz", "calculus.star_leibniz", "phi.invertibility",
                "quantization.homomorphism"), needs=("calculus",))
def _(ctx):
    return combine([verify_right_leibniz(ctx.quantized(n), ctx.degree) for n in _conns(ctx)])


@check("connection.braided_leibniz",
       "∇(a ⋆ v) = (R̄^α ▷ a) ⋆ (R̄_α ▶ ∇)(v) + (R_α ▷ v) ⊗⋆ (R^α ▷ da)",
       depends=("connection.quantized_leibniz", "calculus.graded_quasi_commutative",
                "quasi_commutative.module"), needs=("calculus",))
def _(ctx):
    return combine([braided_leibniz_check(ctx.D, ctx.rD, ctx.quantized(n), ctx.low)
                    for n in _conns(ctx)])


@check("connection.braided_leibniz_control", "with R = 1⊗1 the braided Leibniz rule fails at order h",
       depends=("connection.braided_leibniz",), needs=("calculus",))
def _(ctx):
    _need(ctx.nontrivial, "the twist is trivial at order h")
    vs = [braided_leibniz_check(ctx.D, ctx.r_untwisted, ctx.quantized(n), ctx.low, enforce=False)
          for n in _conns(ctx)]
    failed = [v for v in vs if not v.passed]
    if not failed:
        return _expect_order_one(vs[0], "braided Leibniz")
    return _expect_order_one(min(failed, key=lambda v: v.first_failing_order), "braided Leibniz")


def _sum_pair(ctx):
    a, b = _pick(ctx, 2)
    return ctx.quantized(a), ctx.quantized(b)


SUM_DEPS = ("connection.braided_leibniz", "braiding.braid_relations_quotient")


@check("connection.sum_well_defined", "∇_V ⊕_R ∇_W descends to V ⊗_{A⋆} W",
       depends=SUM_DEPS, needs=("calculus",))
def _(ctx):
    qV, qW = _sum_pair(ctx)
    a, b = _pick(ctx, 2)
    cV, cW = ctx.connections[a], ctx.connections[b]
    return combine([verify_sum_well_defined(sum_connections(ctx.D, ctx.rD, qV, qW, ctx.low),
                                            ctx.low),
                    verify_sum_well_defined(sum_connections(ctx.U, ctx.r0, cV, cW, ctx.low),
                                            ctx.low)])


@check("connection.sum_leibniz", "∇_V ⊕_R ∇_W satisfies the right Leibniz rule",
       depends=("connection.sum_well_defined",), needs=("calculus",))
def _(ctx):
    qV, qW = _sum_pair(ctx)
    return verify_right_leibniz(sum_connections(ctx.D, ctx.rD, qV, qW, ctx.low), ctx.low)


@check("connection.sum_associative", "(∇_V ⊕_R ∇_W) ⊕_R ∇_Z = ∇_V ⊕_R (∇_W ⊕_R ∇_Z)",
       depends=("connection.sum_well_defined",), needs=("calculus",))
def _(ctx):
    a, b, c = _pick(ctx, 3)
    certify_braided_setting(ctx.D, ctx.rD, [ctx.connections[n].module for n in (a, b, c)],
                            ctx.low)
    return verify_sum_associative(ctx.D, ctx.rD, ctx.quantized(a), ctx.quantized(b),
                                  ctx.quantized(c), ctx.low)


@check("connection.sum_equivariance", "ξ ▶ (∇_V ⊕_R ∇_W) = (ξ ▶ ∇_V) ⊕_R (ξ ▶ ∇_W)",
       depends=("connection.sum_well_defined", "tensor_R.equivariance"), needs=("calculus",))
def _(ctx):
    qV, qW = _sum_pair(ctx)
    return verify_sum_equivariance(ctx.D, ctx.rD, qV, qW, ctx.xis[:2], ctx.low)


@check("connection.sum_diagram", "φ ∘ (D̃_F ∇_V ⊕_{R^F} D̃_F ∇_W) = D_F(∇_V ⊕_R ∇_W) ∘ φ",
       depends=("connection.sum_well_defined", "phi.diagram"), needs=("calculus",))
def _(ctx):
    a, b = _pick(ctx, 2)
    return verify_sum_diagram(ctx.U, ctx.D, ctx.r0, ctx.connections[a], ctx.connections[b],
                              ctx.low)


@check("connection.dual_leibniz", "the dual connections obey the left and right Leibniz rules",
       depends=("connection.leibniz",), needs=("calculus",))
def _(ctx):
    _need(ctx.scn.rmatrix["kind"] != "explicit" or verify_triangular(ctx.r0).passed,
          "needs a triangular R-matrix")
    vs = []
    for c in _conns(ctx).values():
        res = verify_dual_connections(ctx.U, c, ctx.r0, ctx.low)
        vs += [res["left_leibniz"], res["right_leibniz"]]
    return combine(vs)


@check("connection.dual_pairing",
       "⟨∇'v', v⟩ = d⟨v', v⟩ − ⟨v' ⊗ id, ∇v⟩ and the braided right-dual pairing",
       depends=("connection.dual_leibniz",), needs=("calculus",))
def _(ctx):
    vs = []
    for c in _conns(ctx).values():
        res = verify_dual_connections(ctx.U, c, ctx.r0, ctx.low)
        vs += [res["left_pairing"], res["right_pairing"]]
    return combine(vs)


# -- curvature


@check("curvature.extension_well_defined", "∇(v ⊗ θ) = (∇v) ∧ θ + v ⊗ dθ is well defined",
       depends=("connection.quantized_leibniz",), needs=("calculus",))
def _(ctx):
    vs = []
    for n, c in _conns(ctx).items():
        vs.append(verify_extension_well_defined(c, ctx.low))
        vs.append(verify_extension_well_defined(ctx.quantized(n), ctx.low))
    return combine(vs)


@check("curvature.right_linear", "R_∇(v a) = R_∇(v) a, in both worlds",
       depends=("curvature.extension_well_defined",), needs=("calculus",))
def _(ctx):
    vs = []
    for n, c in _conns(ctx).items():
        vs.append(verify_right_linear(ctx.U, curvature(c), ctx.low))
        vs.append(verify_right_linear(ctx.D, curvature(ctx.quantized(n)), ctx.low))
    return combine(vs)


@check("curvature.sum_identity",
       "R_{∇_V ⊕ ∇_W} = R_V ⊗_R id + id ⊗_R R_W − (∇_V ⊗_R ∇_W)(id − τ⁻¹ braiding)",
       depends=("connection.sum_leibniz", "curvature.right_linear"), needs=("calculus",))
def _(ctx):
    qV, qW = _sum_pair(ctx)
    return curvature_sum_check(ctx.D, ctx.rD, qV, qW, ctx.low)["identity"]


@check("curvature.sum_mixed_term", "the mixed curvature term vanishes when a summand is equivariant",
       depends=("curvature.sum_identity",), needs=("calculus",))
def _(ctx):
    eq = ctx.equivariant_names
    _need(bool(eq), "no equivariant connection declared")
    others = [n for n in ctx.connections if n not in eq]
    _need(bool(others), "needs a non-equivariant connection too")
    vs = []
    for n in eq:
        qe = ctx.quantized(n)
        vs.append(is_equivariant(ctx.D, qe, ctx.low))
        for m in others[:1]:
            qm = ctx.quantized(m)
            vs.append(curvature_sum_check(ctx.D, ctx.rD, qm, qe, ctx.low)["mixed_term_vanishes"])
            vs.append(curvature_sum_check(ctx.D, ctx.rD, qe, qm, ctx.low)["mixed_term_vanishes"])
    return combine(vs)


@check("curvature.twisted_identity", "R_{D̃_F(∇)} = D̃_F(∇ ∘⋆ ∇)",
       depends=("curvature.right_linear", "quantization.homomorphism"), needs=("calculus",))
def _(ctx):
    return combine([twisted_curvature_check(ctx.U, ctx.D, c, ctx.low)["identity"]
                    for c in _conns(ctx).values()])


@check("curvature.quantized_expectation",
       "declared expectations on the quantized curvature (flat connections can acquire curvature)",
       depends=("curvature.twisted_identity",), needs=("calculus",))
def _(ctx):
    todo = [c for c in ctx.scn.connections if c.expect is not None]
    _need(bool(todo), "no curvature expectations declared")
    vs = []
    for decl in todo:
        q = ctx.quantized(decl.name)
        R = curvature(q)
        vals = [R(b) for b in q.module.monomial_basis(0)]
        nonzero = [v for v in vals if v]
        if decl.expect == "zero" and nonzero:
            vs.append(Verdict.fail(nonzero[0].lowest_order(), str(nonzero[0]),
                                   f"{decl.name}: quantized curvature is not zero"))
        elif decl.expect == "nonzero" and not nonzero:
            vs.append(Verdict.fail(None, decl.name, f"{decl.name}: quantized curvature vanishes"))
        else:
            low = min((v.lowest_order() for v in nonzero), default=None)
            vs.append(Verdict.ok(f"{decl.name}: {decl.expect}"
                                 + (f" from h^{low}" if low is not None else "")))
    return combine(vs)


# ---------------------------------------------------------------------------
# running


def _closure(selection) -> list[str]:
    wanted = set()

    def add(cid):
        if cid in wanted:
            return
        wanted.add(cid)
        for d in get_check(cid).depends:
            add(d)

    for cid in selection:
        add(cid)
    return [c.id for c in CATALOG if c.id in wanted]


def _feature_missing(ctx: Context, c: Check) -> str | None:
    for need in c.needs:
        if need == "calculus" and not ctx.scn.calculus:
            return "needs a differential calculus"
    return None


def run_check(ctx: Context, c: Check) -> CheckResult:
    t0 = time.perf_counter()
    missing = _feature_missing(ctx, c)
    if missing:
        return CheckResult(c.id, c.anchor, "skip", detail=f"not applicable: {missing}")
    try:
        v = c.run(ctx)
    except NotApplicable as e:
        return CheckResult(c.id, c.anchor, "skip", detail=f"not applicable: {e}",
                           elapsed=time.perf_counter() - t0)
    except Exception as e:  # construction problems become errored checks
        return CheckResult(c.id, c.anchor, "error", detail=f"{type(e).__name__}: {e}",
                           elapsed=time.perf_counter() - t0)
    status = "pass" if v.passed else "fail"
    sample = None if v.sample is None else _clip(v.sample, 300)
    return CheckResult(c.id, c.anchor, status, v.first_failing_order, sample,
                       _clip(v.detail, 240), time.perf_counter() - t0)


def _blocked(c: Check, done: dict) -> CheckResult | None:
    for d in c.depends:
        r = done[d]
        if r.status in ("fail", "error"):
            return CheckResult(c.id, c.anchor, "skip", detail=f"skipped: {d} {r.status}ed"
                               if r.status == "error" else f"skipped: {d} failed")
        if r.status == "skip":
            return CheckResult(c.id, c.anchor, "skip", detail=r.detail if
                               r.detail.startswith("not applicable") else f"skipped: {d} skipped")
    return None


_WORKER: dict = {}


def _worker_init(text, source, seed, order, degree):
    scn = parse_scenario(text, source)
    _WORKER["ctx"] = Context(scn, seed, order, degree)


def _worker_run(cid):
    return run_check(_WORKER["ctx"], get_check(cid))


def run_suite(scenario, selection=None, seed: int | None = None, jobs: int = 1,
              order: int | None = None, degree: int | None = None) -> SuiteReport:
    """Run the selected checks (default: the scenario's suite, else all).

    Dependencies of selected checks are run and reported too, so a failure
    that blocks a selected check is never hidden.  ``jobs > 1`` runs
    independent checks in worker processes; the report does not depend on it.
    """
    if isinstance(scenario, str):
        scenario = parse_scenario(scenario)
    ctx = Context(scenario, seed, order, degree)
    ctx.validate()
    if selection is None:
        selection = scenario.checks or catalog_ids()
    ids = _closure(selection)
    done: dict[str, CheckResult] = {}
    if jobs <= 1:
        for cid in ids:
            c = get_check(cid)
            done[cid] = _blocked(c, done) or run_check(ctx, c)
    else:
        pending = list(ids)
        with ProcessPoolExecutor(max_workers=jobs, initializer=_worker_init,
                                 initargs=(scenario.text, scenario.source, ctx.seed, ctx.order,
                                           ctx.degree)) as pool:
            while pending:
                ready = [cid for cid in pending
                         if all(d in done for d in get_check(cid).depends)]
                runnable = []
                for cid in ready:
                    blocked = _blocked(get_check(cid), done)
                    if blocked:
                        done[cid] = blocked
                    else:
                        runnable.append(cid)
                for cid, res in zip(runnable, pool.map(_worker_run, runnable)):
                    done[cid] = res
                pending = [cid for cid in pending if cid not in done]
    fingerprint = _fingerprint(scenario, ctx)
    return SuiteReport(fingerprint, scenario.name, ctx.order, ctx.degree, ctx.seed,
                       [done[cid] for cid in ids])


def _fingerprint(scn: Scenario, ctx: Context) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(scn.text.encode())
    h.update(f"|N={ctx.order}|D={ctx.degree}|seed={ctx.seed}".encode())
    return h.hexdigest()


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1
