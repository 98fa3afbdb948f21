"""Wald inference, fit reports, and backward model selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formula import ModelFormula, default_formula


def wald_z_p(beta, se):
    """z = beta/se and the two-sided standard normal tail probability."""
    beta = np.atleast_1d(np.asarray(beta, dtype=np.float64))
    se = np.atleast_1d(np.asarray(se, dtype=np.float64))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.nan)
    p = np.array([math.erfc(abs(v) / math.sqrt(2.0)) if np.isfinite(v) else np.nan
                  for v in z])
    return z, p


@dataclass
class TermStat:
    name: str
    beta: float
    se: float
    z: float
    p: float


@dataclass
class VarianceComponent:
    group: str
    kind: str
    sd: float
    boundary: bool = False


@dataclass
class FitResult:
    """Coefficients with Wald statistics plus convergence diagnostics."""

    terms: list[TermStat]
    variance_components: list[VarianceComponent]
    loglik: float
    converged: bool
    iterations: int
    method: str
    diagnostics: dict = field(default_factory=dict)
    selection_trace: list[dict] | None = None
    model: object = field(default=None, repr=False)

    def term(self, name: str) -> TermStat:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def term_names(self) -> list[str]:
        return [t.name for t in self.terms]


def wald_report(fit: FitResult) -> tuple[dict, str]:
    """JSON-ready dict and an aligned text table, terms in design order."""
    payload = {
        "terms": [
            {"name": t.name, "beta": t.beta, "se": t.se, "z": t.z, "p": t.p}
            for t in fit.terms
        ],
        "variance_components": [
            {"group": v.group, "kind": v.kind, "sd": v.sd, "boundary": v.boundary}
            for v in fit.variance_components
        ],
        "loglik": fit.loglik,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "method": fit.method,
    }
    if fit.selection_trace is not None:
        payload["selection_trace"] = fit.selection_trace

    width = max(len("term"), max((len(t.name) for t in fit.terms), default=4))
    lines = [f"{'term':<{width}}  {'beta':>10}  {'se':>9}  {'z':>8}  {'p>|z|':>8}"]
    for t in fit.terms:
        lines.append(
            f"{t.name:<{width}}  {t.beta:>10.4f}  {t.se:>9.4f}  {t.z:>8.2f}  {t.p:>8.4f}"
        )
    if fit.variance_components:
        lines.append("")
        lines.append("random effects (sd):")
        for v in fit.variance_components:
            note = "  [boundary]" if v.boundary else ""
            lines.append(f"  {v.group} {v.kind}: {v.sd:.4f}{note}")
    lines.append("")
    lines.append(f"loglik {fit.loglik:.4f}  converged {fit.converged}  "
                 f"iterations {fit.iterations}")
    return payload, "\n".join(lines)


def backward_select(table, full_formula: ModelFormula | None = None,
                    alpha: float = 0.05, use_random_effects: bool = True,
                    **fit_params) -> FitResult:
    """Drop the least significant interaction (p >= alpha) until none remain.

    Main effects and same_conv are never candidates for removal, so
    marginality holds by construction. Every removal lands in the result's
    ``selection_trace``.
    """
    from .laplace import fit_glmm
    from .logistic import fit_logistic
    from .formula import build_design

    formula = full_formula if full_formula is not None else default_formula()
    trace: list[dict] = []
    coef_by_name: dict = {}
    log_sd_warm: dict = {}

    def fit_once(f: ModelFormula) -> FitResult:
        if use_random_effects and f.random:
            # warm-start refits from the previous solution (minus the removal)
            names = ["Intercept", *f.fixed]
            init_beta = None
            if coef_by_name and all(n in coef_by_name for n in names):
                import numpy as np

                init_beta = np.array([coef_by_name[n] for n in names])
            return fit_glmm(table, f, init_beta=init_beta,
                            init_log_sd=log_sd_warm or None, **fit_params)
        return fit_logistic(build_design(table, f))

    while True:
        fit = fit_once(formula)
        if fit.method == "laplace" and fit.model is not None:
            coef_by_name = dict(zip(fit.term_names(), fit.model.coef_))
            log_sd_warm = {
                k: math.log(v) for k, v in fit.model.vc_sd_.items() if v > 0
            }
        stats = {t.name: t for t in fit.terms}
        removable = [
            (1.0 if math.isnan(stats[name].p) else stats[name].p, name)
            for name in formula.interactions()
            if not (stats[name].p < alpha)
        ]
        if not removable:
            fit.selection_trace = trace
            return fit
        # drop the largest p; ties break on the term name for determinism
        removable.sort(key=lambda item: (-item[0], item[1]))
        p_value, victim = removable[0]
        trace.append({"removed": victim, "p": float(p_value), "alpha": alpha})
        formula = formula.drop_term(victim)
