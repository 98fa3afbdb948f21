"""Golden fixture construction: reference fit -> committed JSON."""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field

import pandas as pd
import scipy
import statsmodels

from .reference import (
    COMPONENT_NAMES, FORMULA, MixedLogitReference, design_from_frame,
    logit_reference, random_design_from_frame,
)

FE_ONLY_FORMULA = FORMULA.split(" + (")[0]


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_sample_csv(path) -> pd.DataFrame:
    frame = pd.read_csv(path, comment="#")
    expected = ["prime", "same_conv", "ln_freq_c", "ln_size_c",
                "conv_id", "speaker_id", "rule"]
    if list(frame.columns) != expected:
        raise ValueError(f"unexpected sample CSV columns in {path}: "
                         f"{list(frame.columns)}")
    return frame.rename(columns={"ln_freq_c": "ln_freq", "ln_size_c": "ln_size"})


def two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


@dataclass
class Fixture:
    input_csv: str
    input_sha256: str
    formula: str
    mixed: bool
    terms: list[dict]
    variance_components: list[dict] = field(default_factory=list)
    converged: bool = True
    loglik: float = 0.0
    tool: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _tool_string() -> str:
    return (f"adaptometer-oracle-harness (statsmodels {statsmodels.__version__}, "
            f"scipy {scipy.__version__})")


def fixture_from_csv(csv_path, mixed: bool = True, input_name: str | None = None
                     ) -> Fixture:
    """Fit the reference model for one exported sample table."""
    frame = read_sample_csv(csv_path)
    X, names = design_from_frame(frame)
    y = frame["prime"].to_numpy(dtype=float)

    if not mixed:
        result = logit_reference(X, y)
        terms = [
            {"name": name,
             "beta": float(result.params[i]),
             "se": float(result.bse[i]),
             "z": float(result.params[i] / result.bse[i]),
             "p": two_sided_p(result.params[i] / result.bse[i])}
            for i, name in enumerate(names)
        ]
        return Fixture(
            input_csv=input_name or os.path.basename(str(csv_path)),
            input_sha256=sha256_of(csv_path),
            formula=FE_ONLY_FORMULA,
            mixed=False,
            terms=terms,
            converged=bool(result.mle_retvals.get("converged", True)),
            loglik=float(result.llf),
            tool=_tool_string(),
        )

    Z, component = random_design_from_frame(frame)
    model = MixedLogitReference(X, y, Z, component).fit()
    terms = []
    for i, name in enumerate(names):
        z = float(model.beta_[i] / model.se_[i])
        terms.append({"name": name, "beta": float(model.beta_[i]),
                      "se": float(model.se_[i]), "z": z, "p": two_sided_p(z)})
    components = [
        {"group": group, "kind": kind, "sd": float(model.sd_[k]),
         "boundary": bool(model.boundary_[k])}
        for k, (group, kind) in enumerate(COMPONENT_NAMES)
    ]
    return Fixture(
        input_csv=input_name or os.path.basename(str(csv_path)),
        input_sha256=sha256_of(csv_path),
        formula=FORMULA,
        mixed=True,
        terms=terms,
        variance_components=components,
        converged=model.converged_,
        loglik=model.loglik_,
        tool=_tool_string(),
    )


def load_fixture(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
