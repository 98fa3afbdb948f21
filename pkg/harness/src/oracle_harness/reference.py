"""Reference model fits, built deliberately unlike the main implementation.

The mixed fit maximizes the Laplace-approximated marginal likelihood of a
logistic model with three uncorrelated scalar random effects (conversation
intercept, conversation slope on ln_freq, speaker-within-conversation
intercept) using one dense random-effects design matrix, full-matrix
linear algebra, and an outer optimizer driven by numerical derivatives.
Slow but transparent; intended for small committed tables only.
"""
from __future__ import annotations

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy.optimize import minimize
from scipy.special import expit
from statsmodels.tools import numdiff

TERMS = ["ln_freq", "same_conv", "ln_size"]
INTERACTIONS = [("ln_freq", "same_conv"), ("ln_freq", "ln_size"),
                ("same_conv", "ln_size")]
FORMULA = ("prime ~ ln_freq + same_conv + ln_size + ln_freq:same_conv + "
           "ln_freq:ln_size + same_conv:ln_size + (1 + ln_freq || conv_id) + "
           "(1 | conv_id:speaker_id)")


def design_from_frame(frame: pd.DataFrame):
    """Fixed-effects matrix (intercept first) and column names."""
    cols = [np.ones(len(frame))]
    names = ["Intercept"]
    for term in TERMS:
        cols.append(frame[term].to_numpy(dtype=float))
        names.append(term)
    for a, b in INTERACTIONS:
        cols.append(frame[a].to_numpy(dtype=float) * frame[b].to_numpy(dtype=float))
        names.append(f"{a}:{b}")
    return np.column_stack(cols), names


def random_design_from_frame(frame: pd.DataFrame):
    """Dense Z plus the variance-component index of each of its columns."""
    n = len(frame)
    conv_codes, conv_levels = pd.factorize(frame["conv_id"], sort=True)
    pair_key = frame["conv_id"].astype(str) + "\x00" + frame["speaker_id"].astype(str)
    pair_codes, pair_levels = pd.factorize(pair_key, sort=True)
    n_conv, n_pair = len(conv_levels), len(pair_levels)
    q = 2 * n_conv + n_pair
    Z = np.zeros((n, q))
    rows = np.arange(n)
    Z[rows, conv_codes] = 1.0
    Z[rows, n_conv + conv_codes] = frame["ln_freq"].to_numpy(dtype=float)
    Z[rows, 2 * n_conv + pair_codes] = 1.0
    component = np.concatenate([
        np.zeros(n_conv, dtype=int),
        np.ones(n_conv, dtype=int),
        np.full(n_pair, 2, dtype=int),
    ])
    return Z, component


COMPONENT_NAMES = [
    ("conv_id", "intercept"),
    ("conv_id", "slope:ln_freq"),
    ("conv_id/speaker_id", "intercept"),
]


class MixedLogitReference:
    """Dense Laplace ML fit of the fixed three-component random structure."""

    def __init__(self, X, y, Z, component, rho_bounds=(-7.0, 5.0)):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.Z = np.asarray(Z, dtype=float)
        self.component = np.asarray(component, dtype=int)
        self.n_components = int(self.component.max()) + 1
        self.rho_bounds = rho_bounds
        self._u = np.zeros(self.Z.shape[1])

    def _precision_diag(self, rho):
        return np.exp(-2.0 * rho)[self.component]

    def _modes(self, beta, prec, tol=1e-10, iters=100):
        u = self._u.copy()
        xb = self.X @ beta
        for _ in range(iters):
            eta = xb + self.Z @ u
            mu = expit(eta)
            grad = self.Z.T @ (self.y - mu) - prec * u

            if np.max(np.abs(grad)) < tol:
                break
            w = np.clip(mu * (1.0 - mu), 1e-12, None)
            hess = (self.Z * w[:, None]).T @ self.Z
            hess[np.diag_indices_from(hess)] += prec
            step = np.linalg.solve(hess, grad)

            def penalized(u_try):
                eta_try = xb + self.Z @ u_try
                return (np.sum(self.y * eta_try - np.logaddexp(0.0, eta_try))
                        - 0.5 * np.sum(prec * u_try * u_try))

            base = penalized(u)
            alpha = 1.0
            for _ in range(40):
                if penalized(u + alpha * step) >= base - 1e-12:
                    break
                alpha *= 0.5
            u = u + alpha * step
        self._u = u
        return u

    def negative_loglik(self, params):
        p = self.X.shape[1]
        beta, rho = params[:p], params[p:]
        prec = self._precision_diag(rho)
        u = self._modes(beta, prec)
        eta = self.X @ beta + self.Z @ u
        mu = expit(eta)
        loglik = np.sum(self.y * eta - np.logaddexp(0.0, eta))
        penalty = -0.5 * np.sum(prec * u * u)
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        hess = (self.Z * w[:, None]).T @ self.Z
        hess[np.diag_indices_from(hess)] += prec
        sign, logdet_h = np.linalg.slogdet(hess)
        assert sign > 0
        logdet_prec = float(np.sum(np.log(prec)))
        return -(loglik + penalty + 0.5 * (logdet_prec - logdet_h))

    def fit(self, max_iter=300):
        p = self.X.shape[1]
        logit0 = sm.Logit(self.y, self.X).fit(disp=0)
        start = np.concatenate([logit0.params, np.full(self.n_components,
                                                       np.log(0.5))])
        bounds = [(None, None)] * p + [self.rho_bounds] * self.n_components
        result = minimize(self.negative_loglik, start, method="L-BFGS-B",
                          bounds=bounds,
                          options={"maxiter": max_iter, "ftol": 1e-12})
        self.params_ = result.x
        self.converged_ = bool(result.success)
        self.loglik_ = -float(result.fun)
        self.beta_ = result.x[:p]
        self.rho_ = result.x[p:]
        self.sd_ = np.exp(self.rho_)
        self.boundary_ = self.rho_ <= self.rho_bounds[0] + 1e-6

        def beta_objective(beta):
            return self.negative_loglik(np.concatenate([beta, self.rho_]))

        hess = numdiff.approx_hess2(self.beta_, beta_objective)
        self.cov_ = np.linalg.inv(0.5 * (hess + hess.T))
        self.se_ = np.sqrt(np.diag(self.cov_))
        return self


def logit_reference(X, y):
    """Plain logistic reference via statsmodels (exact ML)."""
    result = sm.Logit(np.asarray(y, float), np.asarray(X, float)).fit(
        disp=0, method="newton", tol=1e-12)
    return result
