"""Maximum-likelihood logistic regression via iteratively reweighted least squares."""
from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .formula import DesignMatrix


class PerfectSeparationError(RuntimeError):
    """Coefficients diverge: the classes are (quasi-)separable."""


class SingularInformationError(RuntimeError):
    """The Fisher information matrix is singular."""


def _loglik(y, eta):
    # sum over y*eta - log(1 + exp(eta)), stable for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


class LogisticModel(BaseEstimator):
    """Unpenalized logistic regression fit by IRLS with Wald inference.

    The design matrix is used as given (include your own intercept column).
    Newton steps are halved whenever the log-likelihood would decrease, so
    ``loglik_path_`` is non-decreasing.

    Parameters
    ----------
    max_iter : int
        Maximum IRLS iterations.
    grad_tol : float
        Converged when the score's max-norm drops below this.
    loglik_tol : float
        ... or when the relative log-likelihood change drops below this.
    separation_limit : float
        Raise PerfectSeparationError when any |coefficient| exceeds this.

    Attributes
    ----------
    coef_ : (p,) ndarray of fitted coefficients
    se_ : (p,) ndarray of Wald standard errors (inverse Fisher information)
    zvalues_, pvalues_ : Wald z statistics and two-sided normal p-values
    loglik_ : float, log-likelihood at the optimum
    loglik_path_ : list of per-iteration log-likelihoods
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, max_iter: int = 100, grad_tol: float = 1e-8,
                 loglik_tol: float = 1e-10, separation_limit: float = 1e4):
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.loglik_tol = loglik_tol
        self.separation_limit = separation_limit

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have different numbers of rows")
        if not np.isin(y, (0.0, 1.0)).all():
            raise ValueError("response must be binary 0/1")
        n, p = X.shape

        beta = np.zeros(p)
        eta = X @ beta
        ll = _loglik(y, eta)
        path = [ll]
        converged = False
        it = 0
        for it in range(1, self.max_iter + 1):
            mu = expit(eta)
            if np.all(np.abs(y - mu) < 1e-6):
                # every probability pinned to its response: the MLE is at infinity
                raise PerfectSeparationError(
                    "coefficient norm diverging; data are separable"
                )
            score = X.T @ (y - mu)
            if np.max(np.abs(score)) < self.grad_tol:
                converged = True
                break
            w = np.clip(mu * (1.0 - mu), 1e-12, None)
            info = (X * w[:, None]).T @ X
            try:
                step = np.linalg.solve(info, score)
            except np.linalg.LinAlgError as exc:
                raise SingularInformationError(
                    "singular information matrix; drop collinear columns"
                ) from exc
            # halve the Newton step until the log-likelihood does not decrease
            alpha = 1.0
            for _ in range(50):
                candidate = beta + alpha * step
                ll_new = _loglik(y, X @ candidate)
                if ll_new >= ll - 1e-12:
                    break
                alpha *= 0.5
            beta = beta + alpha * step
            eta = X @ beta
            ll_new = _loglik(y, eta)
            if np.max(np.abs(beta)) > self.separation_limit:
                raise PerfectSeparationError(
                    "coefficient norm diverging; data are separable"
                )
            path.append(ll_new)
            if abs(ll_new - ll) <= self.loglik_tol * max(1.0, abs(ll)):
                ll = ll_new
                converged = True
                break
            ll = ll_new

        mu = expit(eta)
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        info = (X * w[:, None]).T @ X
        try:
            cov = np.linalg.inv(info)
        except np.linalg.LinAlgError as exc:
            raise SingularInformationError(
                "singular information matrix at the optimum"
            ) from exc
        se = np.sqrt(np.diag(cov))

        from .inference import wald_z_p

        self.coef_ = beta
        self.cov_ = cov
        self.se_ = se
        self.zvalues_, self.pvalues_ = wald_z_p(beta, se)
        self.loglik_ = ll
        self.loglik_path_ = path
        self.n_iter_ = it
        self.converged_ = converged
        self.n_features_in_ = p
        self.classes_ = np.array([0.0, 1.0])
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_

    def predict_proba(self, X):
        p1 = expit(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(float)


def fit_logistic(design: DesignMatrix, **params):
    """Fit the fixed-effects-only model on a built design; returns a FitResult."""
    from .inference import FitResult, TermStat

    model = LogisticModel(**params).fit(design.X, design.y)
    terms = [
        TermStat(name=name, beta=float(b), se=float(s), z=float(z), p=float(p))
        for name, b, s, z, p in zip(design.names, model.coef_, model.se_,
                                    model.zvalues_, model.pvalues_)
    ]
    return FitResult(
        terms=terms,
        variance_components=[],
        loglik=model.loglik_,
        converged=model.converged_,
        iterations=model.n_iter_,
        method="irls",
        diagnostics={"loglik_path": [float(v) for v in model.loglik_path_]},
    )
