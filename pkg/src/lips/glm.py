"""Logistic regression by maximum likelihood (Newton/IRLS) and an L1 variant.

Fits are pure functions of their inputs, so many models can be fitted
concurrently from different workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from . import _kernels


class FitError(ValueError):
    pass


class RecipeMismatch(FitError):
    pass


class FitWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Named real-valued columns; the intercept is implicit."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1) if len(self.names) == 1 else values.reshape(-1, 0)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise FitError("design values must be n x len(names)")
        if len(set(self.names)) != len(self.names):
            raise FitError("duplicate column names")
        if not np.isfinite(values).all():
            raise FitError("design matrix has non-finite entries")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, n: int) -> "DesignMatrix":
        return cls((), np.zeros((n, 0)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def with_intercept(self) -> np.ndarray:
        return np.hstack([np.ones((self.n, 1)), self.values])


@dataclass(frozen=True, eq=False)
class FittedModel:
    names: tuple[str, ...]
    coefficients: np.ndarray  # intercept first
    standard_errors: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float
    ridge_applied: bool = False
    separation_suspected: bool = False
    penalty: float | None = None
    recipe: dict | None = field(default=None, compare=False)

    @property
    def n_terms(self) -> int:
        """Non-zero slope coefficients (the model's term count)."""
        return int(np.count_nonzero(self.coefficients[1:]))

    def to_json(self) -> dict:
        z, pv = wald_stats(self, strict=False)
        names = ("(intercept)",) + self.names

        def num(x):
            x = float(x)
            return x if math.isfinite(x) else None

        return {
            "recipe": self.recipe,
            "penalty": self.penalty,
            "coefficients": [
                {"name": nm, "coef": num(b), "se": num(s), "z": num(zz), "p_value": num(pp)}
                for nm, b, s, zz, pp in zip(names, self.coefficients, self.standard_errors, z, pv)
            ],
            "converged": self.converged,
            "iterations": self.iterations,
            "log_likelihood": self.log_likelihood,
            "ridge_applied": self.ridge_applied,
            "separation_suspected": self.separation_suspected,
        }


def _check_inputs(X: DesignMatrix, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.n:
        raise FitError("outcome length does not match the design matrix")
    if not np.isin(y, (0.0, 1.0)).all():
        raise FitError("outcome must be binary 0/1")
    if y.min() == y.max():
        raise FitError("outcome has a single class")
    if X.n <= X.k + 1:
        warnings.warn(f"n={X.n} does not exceed the parameter count {X.k + 1}", FitWarning, stacklevel=3)
    return y


def log_likelihood(A: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = A @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _information(A, beta):
    p = expit(A @ beta)
    w = p * (1.0 - p)
    return A.T @ (w[:, None] * A)


def _is_singular(H: np.ndarray) -> bool:
    eig = np.linalg.eigvalsh(H)
    return not (eig[0] > eig[-1] * 1e-12 and eig[0] > 0)


def _covariance(H: np.ndarray, ridge_eps: float) -> tuple[np.ndarray, bool]:
    ridged = _is_singular(H)
    if ridged:
        H = H + ridge_eps * np.eye(H.shape[0])
    try:
        return np.linalg.inv(H), ridged
    except np.linalg.LinAlgError:
        return np.full_like(H, np.nan), True


def fit_logistic(
    X: DesignMatrix,
    y,
    *,
    max_iter: int = 100,
    tol: float = 1e-8,
    ridge_eps: float = 1e-8,
    separation_bound: float = 30.0,
    recipe: dict | None = None,
) -> FittedModel:
    """Unpenalised logistic regression by Newton's method with step halving.

    Stops when the largest absolute score entry drops below ``tol``, or when
    the relative log-likelihood change stays below ``tol`` for two
    consecutive iterations. A ridge of ``ridge_eps`` is added to the Hessian
    only when it is numerically singular. Coefficients beyond
    ``separation_bound`` in absolute value mark the fit as a suspected
    separation (``converged=False``); the model is returned regardless.
    """
    y = _check_inputs(X, y)
    A = X.with_intercept()
    beta = np.zeros(A.shape[1])
    ybar = y.mean()
    beta[0] = math.log(ybar / (1.0 - ybar))
    ll = log_likelihood(A, y, beta)
    converged = False
    ridged = False
    stalls = 0
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(A @ beta)
        score = A.T @ (y - p)
        if np.max(np.abs(score)) < tol:
            converged = True
            break
        H = A.T @ ((p * (1.0 - p))[:, None] * A)
        if _is_singular(H):
            H = H + ridge_eps * np.eye(H.shape[0])
            ridged = True
        try:
            step = np.linalg.solve(H, score)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, score, rcond=None)[0]
        t = 1.0
        while True:
            cand = beta + t * step
            ll_new = log_likelihood(A, y, cand)
            if ll_new >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t *= 0.5
        if ll_new < ll - 1e-12 * abs(ll):
            break  # no ascent possible along the Newton direction
        rel = abs(ll_new - ll) / max(abs(ll), 1e-300)
        beta, ll = cand, ll_new
        stalls = stalls + 1 if rel < tol else 0
        if stalls >= 2:
            converged = True
            break

    cov, ridged_cov = _covariance(_information(A, beta), ridge_eps)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    separated = bool(np.max(np.abs(beta)) > separation_bound)
    return FittedModel(
        names=X.names,
        coefficients=beta,
        standard_errors=se,
        converged=converged and not separated,
        iterations=it,
        log_likelihood=ll,
        ridge_applied=ridged or ridged_cov,
        separation_suspected=separated,
        recipe=recipe,
    )


def penalized_objective(A: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Mean negative log-likelihood plus ``lam`` times the slope L1 norm."""
    return -log_likelihood(A, y, beta) / A.shape[0] + lam * float(np.abs(beta[1:]).sum())


def fit_logistic_l1(
    X: DesignMatrix,
    y,
    lam: float,
    *,
    max_iter: int = 100,
    tol: float = 1e-8,
    inner_max_iter: int = 1000,
    ridge_eps: float = 1e-8,
    separation_bound: float = 30.0,
    recipe: dict | None = None,
) -> FittedModel:
    """L1-penalised logistic regression (unpenalised intercept).

    Minimises ``-loglik / n + lam * sum(|beta_j|)`` by proximal Newton:
    each outer step builds the IRLS quadratic model and solves it with
    cyclic coordinate descent and soft-thresholding, followed by a
    backtracking line search on the penalised objective. Columns are used
    as given (no standardisation). Standard errors are reported for the
    intercept and the non-zero coefficients only; zeros get NaN.
    """
    if lam < 0:
        raise FitError("lambda must be non-negative")
    y = _check_inputs(X, y)
    A = X.with_intercept()
    n, k1 = A.shape
    Xs = np.ascontiguousarray(X.values)
    ybar = y.mean()
    beta = np.zeros(k1)
    beta[0] = math.log(ybar / (1.0 - ybar))
    obj = penalized_objective(A, y, beta, lam)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = A @ beta
        p = expit(eta)
        w = np.clip(p * (1.0 - p), 1e-10, None)
        # quadratic model in the coefficient change: residual of the working response
        r = (y - p) / w
        slopes = beta[1:].copy()
        b0 = beta[0]
        for _ in range(inner_max_iter):
            shift = float(w @ r) / float(w.sum())
            b0 += shift
            r -= shift
            moved = _kernels.cd_pass(Xs, w, r, slopes, lam) if Xs.shape[1] else 0.0
            if max(moved, abs(shift)) < tol * 1e-2:
                break
        direction = np.concatenate(([b0], slopes)) - beta
        t = 1.0
        while True:
            cand = beta + t * direction
            obj_new = penalized_objective(A, y, cand, lam)
            if obj_new <= obj + 1e-14 * abs(obj) or t < 1e-10:
                break
            t *= 0.5
        if obj_new > obj + 1e-14 * abs(obj):
            break
        change = np.max(np.abs(cand - beta))
        rel = abs(obj - obj_new) / max(abs(obj), 1e-300)
        beta, obj = cand, obj_new
        if change < tol or rel < tol * 1e-2:
            converged = True
            break

    active = np.concatenate(([True], beta[1:] != 0.0))
    se = np.full(k1, np.nan)
    Aa = A[:, active]
    cov, ridged = _covariance(_information(Aa, beta[active]), ridge_eps)
    se[active] = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    separated = bool(np.max(np.abs(beta)) > separation_bound)
    return FittedModel(
        names=X.names,
        coefficients=beta,
        standard_errors=se,
        converged=converged and not separated,
        iterations=it,
        log_likelihood=log_likelihood(A, y, beta),
        ridge_applied=ridged,
        separation_suspected=separated,
        penalty=float(lam),
        recipe=recipe,
    )


def predict_proba(m: FittedModel, X_new: DesignMatrix) -> np.ndarray:
    if tuple(X_new.names) != tuple(m.names):
        raise RecipeMismatch(f"columns {X_new.names} do not match the model's {m.names}")
    return expit(X_new.with_intercept() @ m.coefficients)


def wald_stats(m: FittedModel, *, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Per-coefficient Wald ``z`` and two-sided normal p-values.

    A zero standard error raises ``FitError`` unless ``strict=False``, in
    which case that coefficient gets NaN statistics.
    """
    se = np.asarray(m.standard_errors, dtype=float)
    zero = se == 0
    if strict and zero.any():
        raise FitError("zero standard error")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(zero, np.nan, m.coefficients / np.where(zero, 1.0, se))
    p = 2.0 * norm.sf(np.abs(z))
    return z, p


def design_from_columns(columns: Sequence[tuple[str, np.ndarray]], n: int) -> DesignMatrix:
    if not columns:
        return DesignMatrix.empty(n)
    names = tuple(name for name, _ in columns)
    values = np.column_stack([np.asarray(col, dtype=np.float64) for _, col in columns])
    return DesignMatrix(names, values)
