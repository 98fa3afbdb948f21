import json
from pathlib import Path

import numpy as np
import pytest
from scipy.special import expit

from oracle_harness.fixtures import (
    fixture_from_csv, read_sample_csv, sha256_of, two_sided_p,
)
from oracle_harness.reference import (
    design_from_frame, logit_reference, random_design_from_frame,
)

TABLES = Path(__file__).resolve().parents[2] / "testdata" / "tables"

SAMPLE_HEADER = "prime,same_conv,ln_freq_c,ln_size_c,conv_id,speaker_id,rule"


def synthetic_csv(tmp_path, n_conv=12, units=10, seed=0, sd=0.5):
    """Small sample-table CSV drawn from a known mixed logistic model."""
    rng = np.random.default_rng(seed)
    lines = [SAMPLE_HEADER]
    u = rng.normal(0.0, sd, n_conv)
    for c in range(n_conv):
        for k in range(units):
            lf, ls = rng.normal(), rng.normal()
            for sc in (1, 0):
                eta = -0.6 + 0.8 * lf + 0.3 * sc + 0.5 * ls + u[c]
                prime = int(rng.random() < expit(eta))
                speaker = "A" if k % 2 else "B"
                lines.append(f"{prime},{sc},{lf!r},{ls!r},c{c:02d},{speaker},R{k}")
    path = tmp_path / "table.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_read_sample_csv_schema(tmp_path):
    path = synthetic_csv(tmp_path)
    frame = read_sample_csv(path)
    assert list(frame.columns) == ["prime", "same_conv", "ln_freq", "ln_size",
                                   "conv_id", "speaker_id", "rule"]
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="columns"):
        read_sample_csv(bad)


def test_design_matrices(tmp_path):
    frame = read_sample_csv(synthetic_csv(tmp_path))
    X, names = design_from_frame(frame)
    assert names[0] == "Intercept" and X.shape[1] == 7
    np.testing.assert_allclose(X[:, 4], X[:, 1] * X[:, 2])
    Z, component = random_design_from_frame(frame)
    n_conv = frame["conv_id"].nunique()
    n_pair = frame.groupby(["conv_id", "speaker_id"]).ngroups
    assert Z.shape[1] == 2 * n_conv + n_pair
    assert (np.bincount(component) == [n_conv, n_conv, n_pair]).all()
    # every row touches exactly one column of each component
    assert ((Z[:, :n_conv] != 0).sum(axis=1) == 1).all()
    assert ((Z[:, 2 * n_conv:] != 0).sum(axis=1) == 1).all()


def test_fe_only_fixture_matches_statsmodels(tmp_path):
    path = synthetic_csv(tmp_path)
    fixture = fixture_from_csv(path, mixed=False)
    frame = read_sample_csv(path)
    X, names = design_from_frame(frame)
    reference = logit_reference(X, frame["prime"].to_numpy(float))
    for i, term in enumerate(fixture.terms):
        assert term["name"] == names[i]
        assert term["beta"] == pytest.approx(float(reference.params[i]), abs=1e-12)
    assert not fixture.mixed
    assert fixture.input_sha256 == sha256_of(path)


def test_mixed_fixture_regenerates_identically(tmp_path):
    path = synthetic_csv(tmp_path, n_conv=10, units=8)
    a = fixture_from_csv(path, mixed=True)
    b = fixture_from_csv(path, mixed=True)
    assert a.to_json() == b.to_json()
    payload = json.loads(a.to_json())
    assert set(payload) == {"input_csv", "input_sha256", "formula", "mixed",
                            "terms", "variance_components", "converged",
                            "loglik", "tool"}
    assert [t["name"] for t in payload["terms"]][0] == "Intercept"
    assert len(payload["variance_components"]) == 3


def test_mixed_fixture_recovers_known_effect(tmp_path):
    path = synthetic_csv(tmp_path, n_conv=40, units=14, seed=3)
    fixture = fixture_from_csv(path, mixed=True)
    sc = next(t for t in fixture.terms if t["name"] == "same_conv")
    assert abs(sc["beta"] - 0.3) < 3 * sc["se"] + 0.1
    conv_sd = next(v for v in fixture.variance_components
                   if v["group"] == "conv_id" and v["kind"] == "intercept")
    assert 0.2 < conv_sd["sd"] < 0.9


def test_single_group_variance_hits_boundary(tmp_path):
    # one conversation: the conversation-level components cannot be estimated
    rng = np.random.default_rng(5)
    lines = [SAMPLE_HEADER]
    for k in range(60):
        lf, ls = rng.normal(), rng.normal()
        for sc in (1, 0):
            prime = int(rng.random() < expit(-0.3 + 0.6 * lf + 0.2 * sc))
            lines.append(f"{prime},{sc},{lf!r},{ls!r},only,{'A' if k % 2 else 'B'},R{k}")
    path = tmp_path / "single.csv"
    path.write_text("\n".join(lines) + "\n")
    fixture = fixture_from_csv(path, mixed=True)
    flags = {(v["group"], v["kind"]): v["boundary"]
             for v in fixture.variance_components}
    assert flags[("conv_id", "intercept")] or flags[("conv_id", "slope:ln_freq")]
    assert fixture.terms  # fixture still emitted


def test_two_sided_p():
    assert two_sided_p(0.0) == 1.0
    assert two_sided_p(2.0) == pytest.approx(0.0455, abs=5e-5)


@pytest.mark.skipif(not TABLES.is_dir(), reason="committed tables not present")
def test_committed_tables_readable():
    tables = sorted(TABLES.glob("*.csv"))
    assert len(tables) >= 5
    for path in tables:
        frame = read_sample_csv(path)
        assert len(frame) > 100
        assert set(frame["prime"].unique()) <= {0, 1}
