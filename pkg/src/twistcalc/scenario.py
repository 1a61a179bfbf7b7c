"""Scenario files: a line-oriented declarative format with sections.

See ``docs/scenario-format.md`` for the grammar.  :func:`parse_scenario`
never raises anything but :class:`ScenarioError`, which carries the line
number of the offending input.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .series import ConfigurationError


class ScenarioError(ConfigurationError):
    def __init__(self, message: str, line: int | None = None, source: str = "<scenario>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.bare = message


@dataclass
class Item:
    key: str
    value: str
    line: int


@dataclass
class Section:
    kind: str
    name: str | None
    line: int
    items: list[Item] = field(default_factory=list)

    def get(self, key: str, default=None):
        found = [it for it in self.items if it.key == key]
        if len(found) > 1:
            raise ScenarioError(f"duplicate key {key!r} in [{self.kind}]", found[1].line)
        return found[0] if found else default

    def require(self, key: str) -> Item:
        it = self.get(key)
        if it is None:
            raise ScenarioError(f"[{self.header}] needs '{key} = ...'", self.line)
        return it

    def all(self, prefix: str) -> list[Item]:
        return [it for it in self.items if it.key.split()[0] == prefix]

    @property
    def header(self) -> str:
        return self.kind + (f" {self.name}" if self.name else "")


@dataclass
class ModuleDecl:
    name: str
    rank: int
    actions: dict  # generator -> {(row, col): poly text}
    line: int


@dataclass
class MapDecl:
    name: str
    source: str
    target: str
    entries: dict  # (row, col) -> [(poly text, word text)]
    line: int


@dataclass
class ConnectionDecl:
    name: str
    module: str
    omega: dict  # (row, col) -> form text
    expect: str | None
    line: int


@dataclass
class Scenario:
    text: str
    source: str
    name: str
    order: int
    dimension: int
    degree: int
    seed: int
    samples: int
    generators: list  # (name, [component texts], line)
    twist: dict
    rmatrix: dict
    calculus: bool
    modules: list[ModuleDecl]
    maps: list[MapDecl]
    connections: list[ConnectionDecl]
    checks: list[str] | None
    roles: dict

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.text.encode())
        h.update(f"|N={self.order}|D={self.degree}|seed={self.seed}".encode())
        return h.hexdigest()


SECTION_RE = re.compile(r"^\[\s*([a-z_]+)(?:\s+([A-Za-z_][A-Za-z0-9_']*))?\s*\]$")
KNOWN_SECTIONS = {"scenario", "lie", "twist", "rmatrix", "calculus", "module", "map",
                  "connection", "suite"}
NAMED = {"module", "map", "connection"}


def _sections(text: str, source: str) -> list[Section]:
    out: list[Section] = []
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = SECTION_RE.match(line)
            if not m:
                raise ScenarioError(f"malformed section header {raw.strip()!r}", i, source)
            kind, name = m.group(1), m.group(2)
            if kind not in KNOWN_SECTIONS:
                raise ScenarioError(f"unknown section [{kind}]", i, source)
            if (kind in NAMED) != (name is not None):
                raise ScenarioError(
                    f"[{kind}] {'needs' if kind in NAMED else 'takes no'} name", i, source)
            current = Section(kind, name, i)
            out.append(current)
            continue
        if current is None:
            raise ScenarioError("content before the first section", i, source)
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", i, source)
        key, value = line.split("=", 1)
        key = " ".join(key.split())
        if not key:
            raise ScenarioError("empty key", i, source)
        current.items.append(Item(key, value.strip(), i))
    return out


def _int(item: Item, lo: int = 1) -> int:
    try:
        v = int(item.value)
    except ValueError:
        raise ScenarioError(f"{item.key} must be an integer, got {item.value!r}", item.line)
    if v < lo:
        raise ScenarioError(f"{item.key} must be at least {lo}", item.line)
    return v


def _list(value: str) -> list[str]:
    return [p.strip() for p in value.split(",") if p.strip()]


def _grid(item: Item) -> list[list[str]]:
    rows = [r.strip() for r in item.value.split(";")]
    grid = [[c.strip() for c in r.split(",")] for r in rows]
    if any(not c for r in grid for c in r):
        raise ScenarioError(f"empty entry in grid {item.value!r}", item.line)
    if len({len(r) for r in grid}) != 1:
        raise ScenarioError("grid rows have different lengths", item.line)
    return grid


def _fraction(text: str, line: int) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"not a rational number: {text!r}", line)


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse scenario text; every malformed input raises :class:`ScenarioError`."""
    try:
        return _parse(text, source)
    except ScenarioError as e:
        if e.source != source:
            raise ScenarioError(e.bare, e.line, source) from None
        raise


def _parse(text: str, source: str) -> Scenario:
    secs = _sections(text, source)
    by_kind: dict = {}
    for s in secs:
        if s.kind not in NAMED and s.kind in by_kind:
            raise ScenarioError(f"duplicate section [{s.kind}]", s.line)
        by_kind.setdefault(s.kind, []).append(s)
    for required in ("scenario", "lie"):
        if required not in by_kind:
            raise ScenarioError(f"missing section [{required}]", None)

    head = by_kind["scenario"][0]
    known = {"name", "order", "dimension", "degree", "seed", "samples"}
    for it in head.items:
        if it.key not in known:
            raise ScenarioError(f"unknown key {it.key!r} in [scenario]", it.line)
    order = _int(head.require("order"))
    dim = _int(head.require("dimension"))
    degree = _int(head.get("degree") or Item("degree", "4", head.line))
    seed = _int(head.get("seed") or Item("seed", "0", head.line), lo=0)
    samples = _int(head.get("samples") or Item("samples", "20", head.line))
    name = (head.get("name") or Item("name", "scenario", head.line)).value

    lie = by_kind["lie"][0]
    gens = []
    for it in lie.items:
        parts = it.key.split()
        if len(parts) != 2 or parts[0] != "generator":
            raise ScenarioError(f"expected 'generator <name> = <components>', got {it.key!r}",
                                it.line)
        comps = _list(it.value)
        if len(comps) != dim:
            raise ScenarioError(
                f"generator {parts[1]} has {len(comps)} components, dimension is {dim}", it.line)
        if any(g[0] == parts[1] for g in gens):
            raise ScenarioError(f"generator {parts[1]} declared twice", it.line)
        gens.append((parts[1], comps, it.line))
    if not gens:
        raise ScenarioError("[lie] declares no generators", lie.line)
    gen_names = {g[0] for g in gens}

    twist = {"kind": "none", "line": None}
    if "twist" in by_kind:
        sec = by_kind["twist"][0]
        kind = sec.require("kind")
        twist = {"kind": kind.value, "line": kind.line}
        if kind.value == "moyal":
            over = sec.require("generators")
            names = _list(over.value)
            for g in names:
                if g not in gen_names:
                    raise ScenarioError(f"unknown generator {g!r}", over.line)
            th = sec.require("theta")
            grid = _grid(th)
            if len(grid) != len(names) or any(len(r) != len(names) for r in grid):
                raise ScenarioError("theta must be a square matrix over the twist generators",
                                    th.line)
            twist["generators"] = names
            twist["theta"] = [[_fraction(c, th.line) for c in r] for r in grid]
        elif kind.value == "jordanian":
            for key in ("H", "E"):
                it = sec.require(key)
                if it.value not in gen_names:
                    raise ScenarioError(f"unknown generator {it.value!r}", it.line)
                twist[key] = it.value
        elif kind.value == "explicit":
            it = sec.require("F")
            twist["F"] = (it.value, it.line)
            inv = sec.get("F_inv")
            twist["F_inv"] = (inv.value, inv.line) if inv else None
        elif kind.value != "none":
            raise ScenarioError(f"unknown twist kind {kind.value!r}", kind.line)
        fault = sec.get("fault")
        if fault is not None:
            if fault.value != "drop_top_order":
                raise ScenarioError(f"unknown fault {fault.value!r}", fault.line)
            twist["fault"] = fault.value

    rmatrix = {"kind": "twisted", "line": None}
    if "rmatrix" in by_kind:
        sec = by_kind["rmatrix"][0]
        kind = sec.require("kind")
        if kind.value not in ("trivial", "twisted", "explicit"):
            raise ScenarioError(f"unknown R-matrix kind {kind.value!r}", kind.line)
        rmatrix = {"kind": kind.value, "line": kind.line}
        if kind.value == "explicit":
            it = sec.require("R")
            rmatrix["R"] = (it.value, it.line)

    calculus = False
    if "calculus" in by_kind:
        sec = by_kind["calculus"][0]
        kind = sec.require("kind")
        if kind.value not in ("de_rham", "none"):
            raise ScenarioError(f"unknown calculus {kind.value!r}", kind.line)
        calculus = kind.value == "de_rham"

    modules = []
    for sec in by_kind.get("module", []):
        rank = _int(sec.require("rank"))
        actions: dict = {}
        for it in sec.items:
            parts = it.key.split()
            if parts[0] == "rank":
                continue
            if parts[0] != "action" or len(parts) != 2:
                raise ScenarioError(f"unknown key {it.key!r} in [module {sec.name}]", it.line)
            if parts[1] not in gen_names:
                raise ScenarioError(f"unknown generator {parts[1]!r}", it.line)
            grid = _grid(it)
            if len(grid) != rank or len(grid[0]) != rank:
                raise ScenarioError(f"action matrix must be {rank}×{rank}", it.line)
            actions[parts[1]] = ({(i, j): grid[i][j] for i in range(rank) for j in range(rank)},
                                 it.line)
        modules.append(ModuleDecl(sec.name, rank, actions, sec.line))

    builtin = {"A", "Omega1", "Omega2"}
    names = set(builtin)
    for m in modules:
        if m.name in names:
            raise ScenarioError(f"module name {m.name!r} already used", m.line)
        names.add(m.name)

    maps = []
    for sec in by_kind.get("map", []):
        src, tgt = sec.require("source"), sec.require("target")
        for it in (src, tgt):
            if it.value not in names:
                raise ScenarioError(f"unknown module {it.value!r}", it.line)
        entries: dict = {}
        for it in sec.items:
            parts = it.key.split()
            if parts[0] in ("source", "target"):
                continue
            if parts[0] != "entry" or len(parts) != 2:
                raise ScenarioError(f"unknown key {it.key!r} in [map {sec.name}]", it.line)
            try:
                row, col = (int(x) for x in parts[1].split(","))
            except ValueError:
                raise ScenarioError(f"entry position must be 'row,col', got {parts[1]!r}",
                                    it.line)
            pairs = []
            for chunk in it.value.split(";"):
                if "|" not in chunk:
                    raise ScenarioError(f"entry terms are 'poly | word', got {chunk.strip()!r}",
                                        it.line)
                poly, word = chunk.split("|", 1)
                for g in word.split():
                    if g not in gen_names:
                        raise ScenarioError(f"unknown generator {g!r} in operator word", it.line)
                pairs.append((poly.strip(), word.strip()))
            entries[(row, col)] = (pairs, it.line)
        maps.append(MapDecl(sec.name, src.value, tgt.value, entries, sec.line))

    conns = []
    for sec in by_kind.get("connection", []):
        mod = sec.require("module")
        if mod.value not in names or mod.value in builtin - {"A"}:
            raise ScenarioError(f"unknown module {mod.value!r}", mod.line)
        if not calculus:
            raise ScenarioError("connections need '[calculus] kind = de_rham'", sec.line)
        omega = {}
        om = sec.get("omega")
        if om is not None:
            grid = _grid(om)
            omega = {(i, j): (grid[i][j], om.line) for i in range(len(grid))
                     for j in range(len(grid[i]))}
        expect = sec.get("expect_quantized_curvature")
        if expect is not None and expect.value not in ("zero", "nonzero"):
            raise ScenarioError("expect_quantized_curvature is 'zero' or 'nonzero'", expect.line)
        for it in sec.items:
            if it.key not in ("module", "omega", "expect_quantized_curvature"):
                raise ScenarioError(f"unknown key {it.key!r} in [connection {sec.name}]",
                                    it.line)
        conns.append(ConnectionDecl(sec.name, mod.value, omega,
                                    expect.value if expect else None, sec.line))
    conn_names = [c.name for c in conns]
    if len(set(conn_names)) != len(conn_names):
        raise ScenarioError("connection declared twice", None)

    checks = None
    roles: dict = {}
    if "suite" in by_kind:
        sec = by_kind["suite"][0]
        for it in sec.items:
            if it.key == "checks":
                checks = None if it.value.strip() == "all" else _list(it.value)
            elif it.key == "sum":
                roles["sum"] = (_list(it.value), it.line)
                for c in roles["sum"][0]:
                    if c not in conn_names:
                        raise ScenarioError(f"unknown connection {c!r}", it.line)
            else:
                raise ScenarioError(f"unknown key {it.key!r} in [suite]", it.line)

    return Scenario(text, source, name, order, dim, degree, seed, samples, gens, twist,
                    rmatrix, calculus, modules, maps, conns, checks, roles)


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario: {e.strerror}", None, str(path))
    return parse_scenario(text, str(path))


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package (``moyal_r2.scn`` and friends)."""
    from importlib.resources import files

    return Path(str(files("twistcalc") / "scenarios" / name))
