"""Mixed-effects logistic regression via the Laplace approximation.

The marginal likelihood integral over random effects is approximated at the
conditional modes: for fixed effects beta and per-component log standard
deviations rho, the objective is

    sum_g [ loglik_g(u_g) - u_g' L_g u_g / 2 + (log|L_g| - log|H_g|) / 2 ]

where L is the diagonal prior precision, H = Z'WZ + L is the conditional
curvature, and g runs over blocks of one partition factor under which every
random-effects grouping nests (here: the conversation). Blocks are small, so
all per-block linear algebra is batched into (n_blocks, S, S) arrays.

The gradient is exact: inner modes are implicit functions of the outer
parameters, and the chain-rule terms through the modes and through W in the
log-determinant are included. The fixed-effect part of this gradient is
verifiable against central finite differences to high accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .formula import DesignMatrix, ModelFormula

_W_FLOOR = 1e-12


@dataclass
class RandomEffect:
    """One scalar variance component: a grouping plus a design value per row.

    ``values`` of None means a random intercept (all ones); otherwise the
    per-row slope column the effect multiplies.
    """

    name: str
    group: str
    kind: str
    keys: list
    values: np.ndarray | None = None


def _factorize(keys) -> tuple[np.ndarray, list]:
    """Codes into the sorted unique key list (deterministic)."""
    uniq = sorted(set(keys))
    index = {k: i for i, k in enumerate(uniq)}
    return np.fromiter((index[k] for k in keys), dtype=np.intp, count=len(keys)), uniq


def infer_partition(effects: list[RandomEffect]) -> list:
    """Pick the coarsest effect grouping under which all others nest."""
    best = None
    for cand in effects:
        n_groups = len(set(cand.keys))
        if best is None or n_groups < best[0]:
            best = (n_groups, cand)
    cand = best[1]
    for eff in effects:
        seen: dict = {}
        for fine, coarse in zip(eff.keys, cand.keys):
            prev = seen.setdefault(fine, coarse)
            if prev != coarse:
                raise ValueError(
                    f"random effect {eff.name!r} is crossed with {cand.name!r}; "
                    f"only structures nested under one factor are supported"
                )
    return list(cand.keys)


class LaplaceObjective:
    """Value and exact gradient of the negative Laplace log-likelihood.

    Parameters are packed as [beta, rho] with one rho (log standard
    deviation) per free variance component. Inner modes are cached between
    calls and re-converged from the cache, so nearby evaluations (line
    searches, finite differences) are cheap.
    """

    def __init__(self, X, y, effects: list[RandomEffect], partition_keys,
                 fixed_log_sd: dict | None = None,
                 inner_tol: float = 1e-9, inner_max_iter: int = 100):
        self.inner_tol = inner_tol
        self.inner_max_iter = inner_max_iter
        n, p = X.shape
        self.n_fixed = p
        self.effects = effects
        fixed_log_sd = fixed_log_sd or {}
        self.fixed_log_sd = fixed_log_sd
        self.free_names = [e.name for e in effects if e.name not in fixed_log_sd]
        self.n_free = len(self.free_names)

        if effects:
            part_codes, part_uniq = _factorize(partition_keys)
            C = len(part_uniq)
            widths = []
            local_ranks = []
            slot_counts = []  # per effect: distinct keys per partition block
            for eff in effects:
                if list(eff.keys) == list(partition_keys):
                    widths.append(1)
                    local_ranks.append(np.zeros(n, dtype=np.intp))
                    slot_counts.append(np.ones(C, dtype=np.intp))
                else:
                    per_part: dict[int, set] = {}
                    for part, key in zip(part_codes, eff.keys):
                        per_part.setdefault(int(part), set()).add(key)
                    rank_of = {
                        (part, key): r
                        for part, keys in per_part.items()
                        for r, key in enumerate(sorted(keys))
                    }
                    local_ranks.append(np.fromiter(
                        (rank_of[(int(pc), k)] for pc, k in zip(part_codes, eff.keys)),
                        dtype=np.intp, count=n,
                    ))
                    counts = np.zeros(C, dtype=np.intp)
                    for part, keys in per_part.items():
                        counts[part] = len(keys)
                    widths.append(int(counts.max()))
                    slot_counts.append(counts)
            offsets = np.concatenate([[0], np.cumsum(widths)[:-1]]).astype(np.intp)
            S = int(sum(widths))

            comp_of_slot = np.full((C, S), -1, dtype=np.intp)
            for e_idx in range(len(effects)):
                for r in range(widths[e_idx]):
                    filled = slot_counts[e_idx] > r
                    comp_of_slot[filled, offsets[e_idx] + r] = e_idx

            locs = [offsets[e] + local_ranks[e] for e in range(len(effects))]
            vals = [
                np.ones(n) if eff.values is None else np.asarray(eff.values, float)
                for eff in effects
            ]

            # canonical row order: partition, then slots, then the data itself,
            # so identical inputs in any order produce bit-identical fits
            sort_keys = [y] + [X[:, j] for j in range(p - 1, -1, -1)]
            sort_keys += [loc for loc in reversed(locs)] + [part_codes]
            order = np.lexsort(sort_keys)
            self.X = np.ascontiguousarray(X[order])
            self.y = np.ascontiguousarray(y[order])
            self.part = part_codes[order]
            self.locs = [np.ascontiguousarray(l[order]) for l in locs]
            self.vals = [np.ascontiguousarray(v[order]) for v in vals]
            self.C, self.S = C, S
            self.comp_of_slot = comp_of_slot
            self.real_slots = comp_of_slot >= 0
            self.glob = [self.part * S + l for l in self.locs]
            self.pair_idx = [
                [self.part * S * S + li * S + lj for lj in self.locs]
                for li in self.locs
            ]
            self.n_real_slots = np.array([
                int((comp_of_slot == e).sum()) for e in range(len(effects))
            ])
        else:
            self.X, self.y = np.asarray(X, float), np.asarray(y, float)
            self.C, self.S = 0, 0
        self._U = np.zeros((self.C, self.S))

    # -- parameter packing ---------------------------------------------------

    def pack(self, beta, log_sd: dict) -> np.ndarray:
        return np.concatenate([beta, [log_sd[name] for name in self.free_names]])

    def unpack(self, params) -> tuple[np.ndarray, np.ndarray]:
        params = np.asarray(params, dtype=np.float64)
        beta = params[: self.n_fixed]
        rho_free = params[self.n_fixed:]
        if rho_free.shape[0] != self.n_free:
            raise ValueError("parameter vector has the wrong length")
        return beta, rho_free

    def _lambda(self, rho_free) -> tuple[np.ndarray, np.ndarray]:
        """Per-slot prior precision (padded slots get 1), plus per-effect rho."""
        rho_all = np.empty(len(self.effects))
        free_iter = iter(rho_free)
        for i, eff in enumerate(self.effects):
            if eff.name in self.fixed_log_sd:
                rho_all[i] = self.fixed_log_sd[eff.name]
            else:
                rho_all[i] = next(free_iter)
        prec = np.exp(-2.0 * rho_all)
        lam = np.ones((self.C, self.S))
        lam[self.real_slots] = prec[self.comp_of_slot[self.real_slots]]
        return lam, rho_all

    # -- inner problem ---------------------------------------------------------

    def _compose_eta(self, xb, U):
        eta = xb.copy()
        uf = U.ravel()
        for g, v in zip(self.glob, self.vals):
            eta += v * uf[g]
        return eta

    def _gather(self, flat):
        """Row-wise Z @ vec for a flattened (C, S) vector."""
        out = np.zeros(len(self.y))
        for g, v in zip(self.glob, self.vals):
            out += v * flat[g]
        return out

    def _assemble_score(self, resid, lam, U):
        CS = self.C * self.S
        G = np.zeros(CS)
        for g, v in zip(self.glob, self.vals):
            G += np.bincount(g, weights=v * resid, minlength=CS)
        return G.reshape(self.C, self.S) - lam * U

    def _block_hessian(self, w, lam):
        CS2 = self.C * self.S * self.S
        H = np.zeros(CS2)
        wv = [w * v for v in self.vals]
        for i in range(len(self.effects)):
            for j in range(len(self.effects)):
                H += np.bincount(self.pair_idx[i][j], weights=wv[i] * self.vals[j],
                                 minlength=CS2)
        H = H.reshape(self.C, self.S, self.S)
        H[:, np.arange(self.S), np.arange(self.S)] += lam
        return H

    def _block_objective(self, eta, lam, U):
        ll = self.y * eta - np.logaddexp(0.0, eta)
        per = np.bincount(self.part, weights=ll, minlength=self.C)
        return per - 0.5 * np.sum(lam * U * U, axis=1)

    def _solve_modes(self, xb, lam):
        """Per-block penalized Newton, warm-started from the previous call.

        Steps are accepted when they contract the score max-norm (the cheap,
        almost-always-true case); otherwise the step is halved per block
        against the penalized objective.
        """
        U = self._U
        eta = self._compose_eta(xb, U)
        mu = expit(eta)
        G = self._assemble_score(self.y - mu, lam, U)
        converged = False
        for _ in range(self.inner_max_iter):
            gnorm = np.max(np.abs(G))
            if gnorm < self.inner_tol:
                converged = True
                break
            w = np.clip(mu * (1.0 - mu), _W_FLOOR, None)
            H = self._block_hessian(w, lam)
            delta = np.linalg.solve(H, G[..., None])[..., 0]
            zdelta = self._gather(delta.ravel())
            eta_try = eta + zdelta
            mu_try = expit(eta_try)
            U_try = U + delta
            G_try = self._assemble_score(self.y - mu_try, lam, U_try)
            if np.max(np.abs(G_try)) < gnorm:
                U, eta, mu, G = U_try, eta_try, mu_try, G_try
                continue
            # fall back to objective-based per-block step halving
            f0 = self._block_objective(eta, lam, U)
            alpha = np.ones((self.C, 1))
            for _ in range(30):
                U_try = U + alpha * delta
                eta_try = eta + self._gather((alpha * delta).ravel())
                f1 = self._block_objective(eta_try, lam, U_try)
                worse = f1 < f0 - 1e-12
                if not worse.any():
                    break
                alpha[worse] *= 0.5
            U = U + alpha * delta
            eta = self._compose_eta(xb, U)
            mu = expit(eta)
            G = self._assemble_score(self.y - mu, lam, U)
        self._U = U
        self._inner_converged = converged
        return U, eta, mu

    # -- outer objective -------------------------------------------------------

    def value_and_grad(self, params) -> tuple[float, np.ndarray]:
        beta, rho_free = self.unpack(params)
        if not self.effects:
            eta = self.X @ beta
            mu = expit(eta)
            value = -float(np.sum(self.y * eta - np.logaddexp(0.0, eta)))
            return value, -(self.X.T @ (self.y - mu))

        lam, _ = self._lambda(rho_free)
        U, eta, mu = self._solve_modes(self.X @ beta, lam)
        w = np.clip(mu * (1.0 - mu), _W_FLOOR, None)
        ll = float(np.sum(self.y * eta - np.logaddexp(0.0, eta)))
        penalty = -0.5 * float(np.sum(lam * U * U))
        H = self._block_hessian(w, lam)
        chol = np.linalg.cholesky(H)
        logdet_H = 2.0 * float(np.sum(np.log(np.diagonal(chol, axis1=1, axis2=2))))
        logdet_lam = float(np.sum(np.log(lam)))  # padded slots contribute log 1 = 0
        value = -(ll + penalty + 0.5 * (logdet_lam - logdet_H))

        Hinv = np.linalg.inv(H)
        # s_i = z_i' Hinv z_i, gathered per row from the row's block
        s = np.zeros(len(self.y))
        for i in range(len(self.effects)):
            for j in range(len(self.effects)):
                s += (self.vals[i] * self.vals[j]
                      * Hinv[self.part, self.locs[i], self.locs[j]])
        dw = w * (1.0 - 2.0 * mu)          # dW/deta
        d = 0.5 * dw * s
        CS = self.C * self.S
        Zd = np.zeros(CS)
        for g, v in zip(self.glob, self.vals):
            Zd += np.bincount(g, weights=v * d, minlength=CS)
        ed = np.einsum("cij,cj->ci", Hinv, Zd.reshape(self.C, self.S))
        zed = self._gather(ed.ravel())
        grad_beta = -(self.X.T @ ((self.y - mu) - d + w * zed))

        grad_rho = np.empty(self.n_free)
        k = 0
        for e_idx, eff in enumerate(self.effects):
            if eff.name in self.fixed_log_sd:
                continue
            mask = self.comp_of_slot == e_idx
            lam_e = lam[mask]
            u_e = U[mask]
            ed_e = ed[mask]
            hinv_diag = Hinv[:, np.arange(self.S), np.arange(self.S)][mask]
            dloglik = (
                float(np.sum(lam_e * u_e * u_e))
                - self.n_real_slots[e_idx]
                + float(np.sum(lam_e * hinv_diag))
                - 2.0 * float(np.sum(ed_e * lam_e * u_e))
            )
            grad_rho[k] = -dloglik
            k += 1
        return value, np.concatenate([grad_beta, grad_rho])

    def value(self, params) -> float:
        return self.value_and_grad(params)[0]

    def gradient(self, params) -> np.ndarray:
        return self.value_and_grad(params)[1]

    def conditional_modes(self, params) -> np.ndarray:
        beta, rho_free = self.unpack(params)
        if not self.effects:
            return np.zeros((0, 0))
        lam, _ = self._lambda(rho_free)
        return self._solve_modes(self.X @ beta, lam)[0]


class MixedLogisticModel(BaseEstimator):
    """Logistic regression with nested scalar random effects (Laplace ML).

    Fixed effects are initialized from an IRLS logistic fit and the outer
    problem over [beta, log sd] is solved with L-BFGS-B using the exact
    gradient. Variance components whose log sd hits the lower bound are
    reported as boundary fits, not errors.

    Parameters
    ----------
    max_outer : int
        Outer quasi-Newton iteration cap.
    init_log_sd : float
        Starting log standard deviation for every free component.
    log_sd_bounds : (float, float)
        Box bounds for the log sd parameters.
    fixed_sd : dict | None
        Per-component pinned standard deviations. A value of 0 removes the
        component entirely (its slots vanish); positive values are held
        fixed while the rest are optimized.
    gtol, ftol : float
        L-BFGS-B projected-gradient and relative-reduction tolerances.
    inner_tol : float
        Max-norm tolerance for the per-block mode equations.
    """

    def __init__(self, max_outer: int = 200, init_log_sd: float = math.log(0.5),
                 log_sd_bounds: tuple = (-7.0, 5.0), fixed_sd: dict | None = None,
                 gtol: float = 1e-6, ftol: float = 1e-11, inner_tol: float = 1e-9,
                 inner_max_iter: int = 100, se_step: float = 1e-5,
                 polish_gtol: float = 1e-7, max_polish: int = 5):
        self.max_outer = max_outer
        self.init_log_sd = init_log_sd
        self.log_sd_bounds = log_sd_bounds
        self.fixed_sd = fixed_sd
        self.gtol = gtol
        self.ftol = ftol
        self.inner_tol = inner_tol
        self.inner_max_iter = inner_max_iter
        self.se_step = se_step
        self.polish_gtol = polish_gtol
        self.max_polish = max_polish

    def fit(self, X, y, random_effects: list[RandomEffect] | None = None,
            partition_keys=None, init_beta=None, init_log_sd: dict | None = None):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        n, p = X.shape
        random_effects = list(random_effects or [])

        fixed_sd = dict(self.fixed_sd or {})
        known = {e.name for e in random_effects}
        for name in fixed_sd:
            if name not in known:
                raise ValueError(f"fixed_sd names unknown component {name!r}")
        kept, fixed_log_sd = [], {}
        for eff in random_effects:
            sd = fixed_sd.get(eff.name)
            if sd is None:
                kept.append(eff)
            elif sd == 0.0:
                continue  # a zero-variance component contributes nothing
            else:
                fixed_log_sd[eff.name] = math.log(sd)
                kept.append(eff)

        if kept and partition_keys is None:
            partition_keys = infer_partition(kept)

        objective = LaplaceObjective(
            X, y, kept, partition_keys, fixed_log_sd=fixed_log_sd,
            inner_tol=self.inner_tol, inner_max_iter=self.inner_max_iter,
        )

        if init_beta is None:
            from .logistic import LogisticModel

            init_beta = LogisticModel().fit(X, y).coef_
        lo, hi = self.log_sd_bounds
        rho_start = np.full(objective.n_free, self.init_log_sd)
        if init_log_sd:
            for k, name in enumerate(objective.free_names):
                if name in init_log_sd:
                    rho_start[k] = min(max(init_log_sd[name], lo), hi)
        start = np.concatenate([init_beta, rho_start])
        bounds = [(None, None)] * p + [self.log_sd_bounds] * objective.n_free
        result = minimize(
            objective.value_and_grad, start, jac=True, method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": self.max_outer, "ftol": self.ftol, "gtol": self.gtol},
        )
        params, hess_free, free_idx = self._polish(objective, result.x, bounds)
        beta, rho_free = objective.unpack(params)

        cov, se_note = self._beta_covariance(objective, params, p, hess_free, free_idx)
        se = np.sqrt(np.diag(cov)) if cov is not None else np.full(p, np.nan)

        from .inference import wald_z_p

        self.objective_ = objective
        self.params_ = params
        self.coef_ = beta
        self.cov_ = cov
        self.se_ = se
        self.zvalues_, self.pvalues_ = wald_z_p(beta, se)
        self.loglik_ = -float(result.fun)
        self.n_iter_ = int(result.nit)
        self.converged_ = bool(result.success) and cov is not None
        self.vc_names_ = list(objective.free_names)
        self.vc_sd_ = {name: float(np.exp(r)) for name, r in zip(self.vc_names_, rho_free)}
        for name, logsd in fixed_log_sd.items():
            self.vc_sd_[name] = float(np.exp(logsd))
        lo = self.log_sd_bounds[0]
        self.boundary_ = {
            name: bool(r <= lo + 1e-6) for name, r in zip(self.vc_names_, rho_free)
        }
        self.diagnostics_ = {
            "optimizer_message": str(result.message),
            "n_objective_evals": int(result.nfev),
            "inner_converged": bool(getattr(objective, "_inner_converged", True)),
        }
        if se_note:
            self.diagnostics_["se_note"] = se_note
        self.n_features_in_ = p
        return self

    def _fd_hessian(self, objective, params, idx):
        """Central finite differences of the exact gradient on coordinates idx."""
        hess = np.zeros((len(idx), len(idx)))
        for col, j in enumerate(idx):
            step = self.se_step * max(1.0, abs(params[j]))
            up = params.copy()
            up[j] += step
            down = params.copy()
            down[j] -= step
            delta = objective.gradient(up) - objective.gradient(down)
            hess[:, col] = delta[idx] / (2.0 * step)
        return 0.5 * (hess + hess.T)

    def _free_coordinates(self, params, grad, bounds):
        """Everything except log-sd coordinates pinned at a bound by the sign
        of the gradient (those stay put during polishing)."""
        idx = []
        for j, (lo, hi) in enumerate(bounds):
            at_lower = lo is not None and params[j] <= lo + 1e-9 and grad[j] > 0
            at_upper = hi is not None and params[j] >= hi - 1e-9 and grad[j] < 0
            if not (at_lower or at_upper):
                idx.append(j)
        return np.asarray(idx, dtype=np.intp)

    def _polish(self, objective, params, bounds):
        """Newton-refine the L-BFGS-B solution until the free-coordinate
        gradient max-norm is below polish_gtol. Returns the refined params
        plus the last finite-difference Hessian (reused for Wald SEs)."""
        params = params.copy()
        hess_free, free_idx, hess_at = None, None, None
        value, grad = objective.value_and_grad(params)
        for _ in range(self.max_polish):
            free = self._free_coordinates(params, grad, bounds)
            if free.size == 0 or np.max(np.abs(grad[free])) <= self.polish_gtol:
                break
            hess = self._fd_hessian(objective, params, free)
            try:
                step = np.linalg.solve(hess, grad[free])
            except np.linalg.LinAlgError:
                break
            hess_free, free_idx, hess_at = hess, free, params.copy()
            improved = False
            alpha = 1.0
            for _ in range(10):
                trial = params.copy()
                trial[free] = trial[free] - alpha * step
                for j, (lo, hi) in enumerate(bounds):
                    if lo is not None:
                        trial[j] = max(trial[j], lo)
                    if hi is not None:
                        trial[j] = min(trial[j], hi)
                trial_value, trial_grad = objective.value_and_grad(trial)
                if trial_value <= value + 1e-10 * max(1.0, abs(value)):
                    params, value, grad = trial, trial_value, trial_grad
                    improved = True
                    break
                alpha *= 0.5
            if not improved:
                break
        if hess_at is not None and not np.array_equal(hess_at, params):
            hess_free, free_idx = None, None  # stale: computed at an earlier iterate
        return params, hess_free, free_idx

    def _beta_covariance(self, objective, params, p, hess_free=None, free_idx=None):
        """Observed-information covariance for beta: the fixed-effects block of
        the finite-difference Hessian of the exact gradient, inverted."""
        if hess_free is not None and free_idx is not None:
            beta_pos = [k for k, j in enumerate(free_idx) if j < p]
            if len(beta_pos) == p:
                hess = hess_free[np.ix_(beta_pos, beta_pos)]
            else:
                hess = self._fd_hessian(objective, params, np.arange(p))
        else:
            hess = self._fd_hessian(objective, params, np.arange(p))
        try:
            cov = np.linalg.inv(hess)
            if (np.diag(cov) <= 0).any():
                return None, "curvature not positive definite at the optimum"
            return cov, None
        except np.linalg.LinAlgError:
            return None, "singular curvature at the optimum"

    def predict_proba(self, X):
        """Population-level probabilities (random effects at their mean)."""
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        p1 = expit(X @ self.coef_)
        return np.column_stack([1.0 - p1, p1])


def build_random_effects(design: DesignMatrix, formula: ModelFormula
                         ) -> tuple[list[RandomEffect], list]:
    """Expand formula random terms into scalar components over the design."""
    id_columns = {"conv_id": design.conv_id, "speaker_id": design.speaker_id}
    effects = []
    first_parts = set()
    for term in formula.random:
        parts = term.group.split("/")
        first_parts.add(parts[0])
        if len(parts) == 1:
            keys = list(id_columns[parts[0]])
        else:
            keys = list(zip(*(id_columns[p] for p in parts)))
        if term.intercept:
            effects.append(RandomEffect(
                name=f"{term.group}:intercept", group=term.group,
                kind="intercept", keys=keys,
            ))
        for slope in term.slopes:
            values = np.asarray(design.table.column(slope), dtype=np.float64)
            effects.append(RandomEffect(
                name=f"{term.group}:{slope}", group=term.group,
                kind=f"slope:{slope}", keys=keys, values=values,
            ))
    if len(first_parts) > 1:
        raise ValueError(
            f"random terms must nest under one factor; got {sorted(first_parts)}"
        )
    partition_keys = list(id_columns[next(iter(first_parts))]) if effects else None
    return effects, partition_keys


def fit_glmm(table, formula: ModelFormula | None = None, init_beta=None,
             init_log_sd: dict | None = None, **model_params):
    """Fit the mixed model for a sample table; returns a FitResult."""
    from .formula import build_design, default_formula
    from .inference import FitResult, TermStat, VarianceComponent

    if formula is None:
        formula = default_formula()
    design = build_design(table, formula)
    effects, partition_keys = build_random_effects(design, formula)
    model = MixedLogisticModel(**model_params).fit(
        design.X, design.y, random_effects=effects, partition_keys=partition_keys,
        init_beta=init_beta, init_log_sd=init_log_sd,
    )
    terms = [
        TermStat(name=name, beta=float(b), se=float(s), z=float(z), p=float(pv))
        for name, b, s, z, pv in zip(design.names, model.coef_, model.se_,
                                     model.zvalues_, model.pvalues_)
    ]
    components = []
    for eff in effects:
        sd = model.vc_sd_.get(eff.name)
        if sd is None:
            continue
        components.append(VarianceComponent(
            group=eff.group, kind=eff.kind, sd=sd,
            boundary=model.boundary_.get(eff.name, False),
        ))
    return FitResult(
        terms=terms,
        variance_components=components,
        loglik=model.loglik_,
        converged=model.converged_,
        iterations=model.n_iter_,
        method="laplace",
        diagnostics=dict(model.diagnostics_),
        model=model,
    )
