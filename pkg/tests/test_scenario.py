from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twistcalc.scenario import Scenario, ScenarioError, bundled_scenario, load_scenario, parse_scenario

MINIMAL = """\
[scenario]
order = 2
dimension = 1

[lie]
generator E = 1
"""

BUNDLED = ["moyal_r2.scn", "jordanian_line.scn", "moyal_theta0.scn", "moyal_faulty.scn"]


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_parse(name):
    scn = load_scenario(bundled_scenario(name))
    assert scn.order >= 1 and scn.generators
    assert scn.source.endswith(name)


def test_defaults():
    scn = parse_scenario(MINIMAL)
    assert (scn.name, scn.degree, scn.seed, scn.samples) == ("scenario", 4, 0, 20)
    assert scn.twist["kind"] == "none"
    assert scn.rmatrix["kind"] == "twisted"
    assert not scn.calculus and scn.checks is None


def test_moyal_section():
    scn = load_scenario(bundled_scenario("moyal_r2.scn"))
    assert scn.twist["generators"] == ["d1", "d2"]
    assert scn.twist["theta"] == [[0, 1], [-1, 0]]
    assert all(isinstance(c, Fraction) for row in scn.twist["theta"] for c in row)
    assert [c.name for c in scn.connections] == ["nablaV", "nablaW", "nablaL", "flat"]
    assert scn.roles["sum"][0] == ["nablaV", "nablaW", "nablaL"]


def test_fingerprint_depends_on_text_and_parameters():
    a = parse_scenario(MINIMAL)
    b = parse_scenario(MINIMAL + "# comment\n")
    assert a.fingerprint() == parse_scenario(MINIMAL).fingerprint()
    assert a.fingerprint() != b.fingerprint()
    a.seed = 1
    assert a.fingerprint() != parse_scenario(MINIMAL).fingerprint()


@pytest.mark.parametrize("extra, line, needle", [
    ("[twist]\nkind = quantum\n", 9, "unknown twist kind"),
    ("[twist]\nkind = moyal\ngenerators = E\ntheta = 0, 1; -1, 0\n", 11, "square"),
    ("[twist]\nkind = jordanian\nH = H\nE = E\n", 10, "unknown generator"),
    ("[module V]\nrank = 1\naction F = 0\n", 10, "unknown generator"),
    ("[connection c]\nmodule = V\n", 9, "unknown module"),
    ("[connection c]\nmodule = A\n", 8, "calculus"),
    ("[suite]\nspeed = fast\n", 9, "unknown key"),
    ("[bogus]\n", 8, None),
    ("stray line\n", 8, "key = value"),
])
def test_errors_carry_line_numbers(extra, line, needle):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(MINIMAL + "\n" + extra, "x.scn")
    assert info.value.line == line
    assert str(info.value).startswith(f"x.scn:{line}:")
    if needle:
        assert needle in str(info.value)


def test_missing_sections_and_values():
    with pytest.raises(ScenarioError, match=r"\[lie\]"):
        parse_scenario("[scenario]\norder = 1\ndimension = 1\n")
    with pytest.raises(ScenarioError, match="order"):
        parse_scenario(MINIMAL.replace("order = 2", "order = two"))
    with pytest.raises(ScenarioError, match="components"):
        parse_scenario(MINIMAL.replace("generator E = 1", "generator E = 1, 0"))


def test_missing_file_is_a_scenario_error(tmp_path):
    with pytest.raises(ScenarioError) as info:
        load_scenario(tmp_path / "absent.scn")
    assert "absent.scn" in str(info.value)


FRAGMENTS = [
    "[scenario]", "[lie]", "[twist]", "[rmatrix]", "[calculus]", "[module V]", "[map P]",
    "[connection c]", "[suite]", "[module]", "[", "]", "order = 2", "order = 0", "dimension = 1",
    "dimension = 2", "generator E = 1", "generator H = -2 x1", "generator E = 1, 0",
    "kind = moyal", "kind = jordanian", "kind = explicit", "kind = de_rham", "kind = trivial",
    "generators = E, H", "theta = 0, 1; -1, 0", "theta = 0", "H = H", "E = E", "F = 1 ⊗ 1",
    "fault = drop_top_order", "rank = 1", "rank = 2", "action E = 0", "action E = 1, 0; 0",
    "source = A", "target = Omega1", "entry 1,1 = x1 | E", "entry 1 = x1", "entry 1,1 = x1",
    "module = V", "omega = x1 dx1", "expect_quantized_curvature = maybe", "checks = all",
    "sum = c, c", "# note", "", "= 3", "key =", "name = ok",
]


@settings(max_examples=300)
@given(st.lists(st.one_of(st.sampled_from(FRAGMENTS), st.text(max_size=12)), max_size=25))
def test_parsing_is_total(lines):
    text = "\n".join(lines)
    try:
        scn = parse_scenario(text)
    except ScenarioError as e:
        assert e.line is None or 1 <= e.line <= len(lines)
    else:
        assert isinstance(scn, Scenario)
