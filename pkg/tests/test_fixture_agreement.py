"""Agreement with committed reference fixtures (skipped when absent).

The fixtures under testdata/fixtures are produced offline by the separate
oracle-harness package from the committed sample tables; this suite never
invokes that package. Mixed-model fixed effects must agree within
max(1e-3, 0.05 * reference SE) per term; the plain-logistic fixture must
agree within 1e-5.
"""
import hashlib
import json
from pathlib import Path

import pytest

from adaptometer.glmm import build_design, default_formula, fit_glmm, fit_logistic
from adaptometer.sampling import SampleTable

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "testdata" / "fixtures"
TABLES = ROOT / "testdata" / "tables"

fixture_paths = sorted(FIXTURES.glob("*.json")) if FIXTURES.is_dir() else []

pytestmark = pytest.mark.skipif(
    not fixture_paths, reason="no committed fixtures under testdata/fixtures"
)


def load(path):
    fixture = json.loads(path.read_text(encoding="utf-8"))
    table_path = TABLES / Path(fixture["input_csv"]).name
    digest = hashlib.sha256(table_path.read_bytes()).hexdigest()
    assert digest == fixture["input_sha256"], f"{table_path} changed since {path}"
    return fixture, SampleTable.from_csv(table_path)


@pytest.mark.parametrize("path", fixture_paths, ids=lambda p: p.stem)
def test_fixture_agreement(path):
    fixture, table = load(path)
    if not fixture["converged"]:
        pytest.skip("fixture flagged as non-converged")
    if fixture["mixed"]:
        fit = fit_glmm(table, default_formula())
        for term in fixture["terms"]:
            mine = fit.term(term["name"])
            tolerance = max(1e-3, 0.05 * term["se"])
            assert abs(mine.beta - term["beta"]) <= tolerance, (
                f"{term['name']}: {mine.beta} vs reference {term['beta']}"
            )
    else:
        fit = fit_logistic(build_design(table, default_formula()))
        for term in fixture["terms"]:
            mine = fit.term(term["name"])
            assert abs(mine.beta - term["beta"]) <= 1e-5, (
                f"{term['name']}: {mine.beta} vs reference {term['beta']}"
            )


def test_fixture_set_is_complete():
    mixed = [p for p in fixture_paths if p.name.endswith(".mixed.json")]
    logit = [p for p in fixture_paths if p.name.endswith(".logit.json")]
    assert len(mixed) >= 5
    assert len(logit) >= 1
