import json

import numpy as np
import pytest
from scipy.special import expit

from adaptometer.glmm import (
    FitResult, TermStat, VarianceComponent, backward_select, wald_report,
)
from adaptometer.sampling import SampleTable


def interaction_table(seed=1, n_conv=40, units_per=14, b_fs=-0.35, b_fz=0.4,
                      b_sz=0.0):
    """Rows from a logistic model with chosen interaction coefficients and a
    conversation random intercept."""
    rng = np.random.default_rng(seed)
    rows = []
    u = rng.normal(0.0, 0.4, n_conv)
    for c in range(n_conv):
        for k in range(units_per):
            ln_freq = rng.normal()
            ln_size = rng.normal()
            for sc in (1, 0):
                eta = (-0.8 + 0.9 * ln_freq + 0.3 * sc + 0.6 * ln_size
                       + b_fs * ln_freq * sc + b_fz * ln_freq * ln_size
                       + b_sz * sc * ln_size + u[c])
                prime = int(rng.random() < expit(eta))
                rows.append((prime, sc, ln_freq, ln_size, f"c{c:03d}",
                             "A" if k % 2 else "B", f"R{k}"))
    cols = list(zip(*rows))
    return SampleTable(*cols, centered=True)


def test_backward_select_drops_null_interaction_keeps_strong():
    table = interaction_table(seed=2)
    fit = backward_select(table, alpha=0.05)
    names = fit.term_names()
    assert "same_conv:ln_size" not in names
    assert "ln_freq:same_conv" in names
    assert "ln_freq:ln_size" in names
    for main in ("ln_freq", "same_conv", "ln_size"):
        assert main in names
    assert fit.selection_trace and fit.selection_trace[0]["removed"] == "same_conv:ln_size"
    assert all(fit.term(t).p < 0.05 for t in names if ":" in t)


def test_backward_select_alpha_one_returns_full_model():
    table = interaction_table(seed=3, n_conv=15, units_per=6)
    fit = backward_select(table, alpha=1.0)
    assert set(fit.term_names()) == {
        "Intercept", "ln_freq", "same_conv", "ln_size",
        "ln_freq:same_conv", "ln_freq:ln_size", "same_conv:ln_size",
    }
    assert fit.selection_trace == []


def test_backward_select_logistic_route():
    table = interaction_table(seed=4, n_conv=20, units_per=10)
    fit = backward_select(table, alpha=0.05, use_random_effects=False)
    assert fit.method == "irls"
    assert "same_conv" in fit.term_names()


def test_wald_report_payload_and_layout():
    fit = FitResult(
        terms=[
            TermStat("Intercept", -2.9, 0.02, -145.0, 0.0),
            TermStat("ln_freq", 1.17, 0.008, 146.0, 0.0),
            TermStat("same_conv", 0.23, 0.023, 10.0, 0.0),
        ],
        variance_components=[VarianceComponent("conv_id", "intercept", 0.4)],
        loglik=-1234.5,
        converged=True,
        iterations=31,
        method="laplace",
        selection_trace=[{"removed": "same_conv:ln_size", "p": 0.4, "alpha": 0.05}],
    )
    payload, text = wald_report(fit)
    assert [t["name"] for t in payload["terms"]] == ["Intercept", "ln_freq", "same_conv"]
    assert set(payload["terms"][0]) == {"name", "beta", "se", "z", "p"}
    assert payload["variance_components"][0]["sd"] == 0.4
    assert payload["selection_trace"][0]["removed"] == "same_conv:ln_size"
    json.dumps(payload)  # must be serializable as-is

    lines = text.splitlines()
    assert lines[0].split() == ["term", "beta", "se", "z", "p>|z|"]
    assert lines[1].startswith("Intercept")
    assert lines[2].startswith("ln_freq")


def test_term_lookup():
    fit = FitResult(
        terms=[TermStat("same_conv", 0.2, 0.1, 2.0, 0.045)],
        variance_components=[], loglik=0.0, converged=True, iterations=1,
        method="irls",
    )
    assert fit.term("same_conv").beta == 0.2
    with pytest.raises(KeyError):
        fit.term("nope")
