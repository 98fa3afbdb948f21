"""Logistic regression with and without nested random effects.

The fixed-effects solver is iteratively reweighted least squares; the mixed
model maximizes a Laplace-approximated marginal likelihood with per-group
inner Newton optimization and a quasi-Newton outer loop. Inference is
Wald-based throughout.
"""
from .formula import DesignMatrix, ModelFormula, RandomTerm, build_design, default_formula
from .logistic import LogisticModel, PerfectSeparationError, SingularInformationError, fit_logistic
from .laplace import LaplaceObjective, MixedLogisticModel, RandomEffect, fit_glmm
from .inference import FitResult, TermStat, VarianceComponent, backward_select, wald_report, wald_z_p

__all__ = [
    "DesignMatrix",
    "ModelFormula",
    "RandomTerm",
    "build_design",
    "default_formula",
    "LogisticModel",
    "PerfectSeparationError",
    "SingularInformationError",
    "fit_logistic",
    "LaplaceObjective",
    "MixedLogisticModel",
    "RandomEffect",
    "fit_glmm",
    "FitResult",
    "TermStat",
    "VarianceComponent",
    "backward_select",
    "wald_report",
    "wald_z_p",
]
