import json
from importlib.resources import files

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from twistcalc.scenario import ScenarioError, bundled_scenario, load_scenario, parse_scenario
from twistcalc.series import ConfigurationError
from twistcalc.verify import CATALOG, Context, catalog_ids, get_check, run_suite

from test_scenario import FRAGMENTS, MINIMAL

# every law the suite promises to cover, grouped by subject
REQUIRED = {
    "twist": ["twist.normalization", "twist.inverse", "twist.cocycle", "hopf.twisted_axioms"],
    "r-matrix": ["rmatrix.yang_baxter", "rmatrix.triangular", "rmatrix.quasitriangular"],
    "star": ["star.associativity", "star.unit", "star.covariance",
             "bimodule.star_associativity", "bimodule.star_covariance"],
    "quantization": ["quantization.homomorphism", "quantization.inverse",
                     "quantization.alternative_form", "quantization.intertwining",
                     "quantization.right_linear"],
    "braiding": ["braiding.equivariance", "braiding.inverse", "braiding.braid_relations",
                 "quasi_commutative.algebra", "quasi_commutative.module",
                 "quasi_commutative.untwisted_control"],
    "tensor": ["tensor_R.equivariance", "tensor_R.associativity", "tensor_R.composition",
               "phi.invertibility", "phi.diagram", "phi.coherence"],
    "connection": ["connection.leibniz", "connection.quantized_leibniz",
                   "connection.braided_leibniz", "connection.sum_well_defined",
                   "connection.sum_leibniz", "connection.sum_associative",
                   "connection.sum_equivariance", "connection.sum_diagram",
                   "connection.dual_leibniz", "connection.dual_pairing"],
    "curvature": ["curvature.right_linear", "curvature.sum_identity",
                  "curvature.sum_mixed_term", "curvature.twisted_identity",
                  "curvature.quantized_expectation"],
}


def scenario(name):
    return load_scenario(bundled_scenario(name))


@pytest.fixture(scope="module")
def moyal_report():
    return run_suite(scenario("moyal_r2.scn"))


@pytest.fixture(scope="module")
def faulty_report():
    return run_suite(scenario("moyal_faulty.scn"))


@pytest.mark.parametrize("group", sorted(REQUIRED))
def test_catalog_covers_required_laws(group):
    missing = set(REQUIRED[group]) - set(catalog_ids())
    assert not missing


def test_catalog_is_topologically_ordered():
    seen = set()
    for c in CATALOG:
        assert set(c.depends) <= seen, c.id
        seen.add(c.id)
    assert len(seen) == len(CATALOG)


def test_unknown_check_id():
    with pytest.raises(ConfigurationError, match="unknown check"):
        get_check("twist.magic")
    with pytest.raises(ConfigurationError):
        run_suite(scenario("moyal_r2.scn"), ["twist.magic"])


def test_moyal_suite_passes(moyal_report):
    failing = [r.id for r in moyal_report.results if not r.passed]
    assert not failing
    assert moyal_report.ok
    assert moyal_report.counts["total"] == len(CATALOG)


def test_jordanian_suite_passes():
    report = run_suite(scenario("jordanian_line.scn"))
    assert report.ok, [(r.id, r.detail) for r in report.results if not r.passed]


def test_checks_without_their_ingredients_are_skipped():
    report = run_suite(scenario("moyal_theta0.scn"))
    assert report.ok
    skipped = [r for r in report.results if r.status == "skip"]
    assert skipped and all(r.detail for r in skipped)
    assert report.result("quasi_commutative.untwisted_control").status == "skip"


def test_failed_cocycle_blocks_dependants(faulty_report):
    r = faulty_report.result("twist.cocycle")
    assert r.status == "fail" and r.first_failing_order == 2
    assert not faulty_report.ok
    blocked = faulty_report.result("star.associativity")
    assert blocked.status == "skip" and "twist.cocycle" in blocked.detail
    assert faulty_report.result("twist.normalization").status == "pass"
    assert faulty_report.counts["error"] == 0


def test_selection_runs_dependencies():
    report = run_suite(scenario("moyal_r2.scn"), ["star.associativity"])
    ids = [r.id for r in report.results]
    assert ids[-1] == "star.associativity"
    assert "twist.cocycle" in ids and "connection.leibniz" not in ids


def test_overrides_change_the_fingerprint():
    scn = scenario("moyal_r2.scn")
    a = run_suite(scn, ["twist.cocycle"])
    b = run_suite(scn, ["twist.cocycle"], order=3)
    c = run_suite(scn, ["twist.cocycle"], seed=1)
    assert len({a.fingerprint, b.fingerprint, c.fingerprint}) == 3
    assert b.order == 3 and c.seed == 1


def test_reports_are_deterministic_across_workers():
    scn = scenario("moyal_r2.scn")
    ids = ["quantization.homomorphism", "tensor_R.composition", "connection.sum_diagram"]
    one = run_suite(scn, ids, jobs=1).to_json()
    assert one == run_suite(scn, ids, jobs=1).to_json()
    assert one == run_suite(scn, ids, jobs=3).to_json()


@pytest.mark.parametrize("which", ["moyal_report", "faulty_report"])
def test_report_matches_schema(which, request):
    report = request.getfixturevalue(which)
    schema = json.loads((files("twistcalc") / "scenarios" / "report.schema.json").read_text())
    doc = json.loads(report.to_json())
    jsonschema.validate(doc, schema)
    assert doc["summary"]["total"] == len(doc["checks"])


def test_human_table_has_one_row_per_check(moyal_report):
    rows = [line for line in moyal_report.to_table().splitlines()
            if line.split(" ", 1)[0] in catalog_ids()]
    assert len(rows) == len(CATALOG)


def test_validation_reports_bad_polynomials():
    bad = MINIMAL.replace("generator E = 1", "generator E = 1 +* x1")
    with pytest.raises(ScenarioError) as info:
        Context(parse_scenario(bad, "bad.scn")).validate()
    assert info.value.line == 6 and "bad.scn" in str(info.value)


@settings(max_examples=60)
@given(st.lists(st.sampled_from(FRAGMENTS), max_size=20))
def test_validation_is_total(lines):
    try:
        Context(parse_scenario(MINIMAL + "\n".join(lines))).validate()
    except ConfigurationError:
        pass
