import pytest
from hypothesis import HealthCheck, settings

from twistcalc.bimod import Deformed, FormsCalculus, FreeBimodule, Undeformed
from twistcalc.funcalg import PolyRing, Realization, derive_structure_constants
from twistcalc.hopf import RMatrix, build_twist, twist_r_matrix

settings.register_profile("twistcalc", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("twistcalc")


class Setup:
    """One realization with its calculus, twist, worlds and R-matrices."""

    def __init__(self, names, fields, n, order, twist_spec):
        self.ring = PolyRing(n, order)
        pres = derive_structure_constants(names, self.ring, fields)
        self.real = Realization(pres, self.ring, fields)
        self.alg = self.real.algebra
        self.calc = FormsCalculus(self.real)
        self.twist = build_twist(twist_spec(self.alg))
        self.U = Undeformed(self.real, self.calc)
        self.D = Deformed(self.real, self.twist, self.calc)
        self.R1 = RMatrix.trivial(self.alg)
        self.RF = twist_r_matrix(self.twist, self.R1)
        self.O1 = self.calc.omega(1)
        self.O2 = self.calc.omega(2)
        self.A = self.calc.functions()

    def x(self, i):
        """The coordinate ``x_i``, counted from one."""
        return self.ring.var(i)

    def form(self, text, degree=1):
        return self.calc.parse(text, degree)

    def line(self, name="V", matrices=None):
        return FreeBimodule(self.real, [0], matrices, name=name)


def moyal(order=2, affine=True):
    names = ["d1", "d2"] + (["x1d1", "x2d2"] if affine else [])
    fields = [["1", "0"], ["0", "1"]] + ([["x1", "0"], ["0", "x2"]] if affine else [])
    return Setup(names, fields, 2, order,
                 lambda alg: ("moyal", alg, ["d1", "d2"], [[0, 1], [-1, 0]]))


def jordanian(order=2):
    return Setup(["H", "E"], [["-2 x1"], ["1"]], 1, order,
                 lambda alg: ("jordanian", alg, "H", "E"))


@pytest.fixture(scope="session")
def mo():
    return moyal(2)


@pytest.fixture(scope="session")
def mo_flat():
    """Moyal plane with translations only."""
    return moyal(2, affine=False)


@pytest.fixture(scope="session")
def jo():
    return jordanian(2)


# -- acceptance criteria: one summary line each

ACCEPTANCE: dict = {}


def record_criterion(number: int, title: str, passed: bool, note: str = ""):
    ACCEPTANCE[number] = (title, passed, note)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, note = ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        tr.write_line(line + (f"  ({note})" if note else ""))
