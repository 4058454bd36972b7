import math
import warnings

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit

from lips.glm import (
    DesignMatrix,
    FitError,
    FittedModel,
    FitWarning,
    RecipeMismatch,
    design_from_columns,
    fit_logistic,
    fit_logistic_l1,
    log_likelihood,
    penalized_objective,
    predict_proba,
    wald_stats,
)


def design(values, prefix="x"):
    values = np.asarray(values, dtype=float).reshape(len(values), -1)
    return DesignMatrix(tuple(f"{prefix}{j}" for j in range(values.shape[1])), values)


def oracle_mle(X, y):
    """Independent optimiser: exact-Hessian trust region on the negative log-likelihood."""
    A = np.hstack([np.ones((len(y), 1)), X])

    def f(b):
        eta = A @ b
        return np.sum(np.logaddexp(0, eta) - y * eta)

    def g(b):
        return A.T @ (expit(A @ b) - y)

    def h(b):
        p = expit(A @ b)
        return A.T @ ((p * (1 - p))[:, None] * A)

    res = minimize(f, np.zeros(A.shape[1]), jac=g, hess=h, method="trust-exact", options={"gtol": 1e-12})
    return res.x


def test_intercept_only_closed_form():
    y = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
    m = fit_logistic(DesignMatrix.empty(10), y)
    assert m.coefficients[0] == pytest.approx(math.log(3 / 7), abs=1e-8)
    assert m.converged
    assert predict_proba(m, DesignMatrix.empty(4)) == pytest.approx(0.3)


def test_symmetric_column_gets_zero_slope():
    m = fit_logistic(design([0, 1, 0, 1]), np.array([0, 1, 1, 0]))
    assert m.coefficients[1] == pytest.approx(0.0, abs=1e-10)


def tiny_instances(count):
    rng = np.random.default_rng(2024)
    out = []
    while len(out) < count:
        n = int(rng.integers(12, 41))
        k = int(rng.integers(1, 4))
        X = rng.normal(size=(n, k)) if rng.random() < 0.5 else rng.integers(0, 3, size=(n, k)).astype(float)
        y = (rng.random(n) < expit(X @ rng.normal(size=k) * 0.7)).astype(float)
        if y.min() == y.max():
            continue
        m = fit_logistic(design(X), y)
        if m.separation_suspected or not m.converged:
            continue
        out.append((X, y, m))
    return out


@pytest.mark.parametrize("X, y, m", tiny_instances(20))
def test_matches_independent_optimiser(X, y, m):
    np.testing.assert_allclose(m.coefficients, oracle_mle(X, y), atol=1e-6)
    A = np.hstack([np.ones((len(y), 1)), X])
    assert np.max(np.abs(A.T @ (y - expit(A @ m.coefficients)))) < 1e-8
    assert predict_proba(m, design(X)).mean() == pytest.approx(y.mean(), abs=1e-8)


def test_two_column_instance_standard_errors():
    X = np.array([[0, 1], [1, 0], [1, 1], [0, 0], [1, 1], [0, 1], [1, 0], [0, 0], [1, 1], [0, 1.0]])
    y = np.array([0, 1, 1, 0, 0, 1, 1, 1, 1, 0.0])
    m = fit_logistic(design(X), y)
    np.testing.assert_allclose(m.coefficients, oracle_mle(X, y), atol=1e-6)
    A = np.hstack([np.ones((10, 1)), X])
    p = expit(A @ m.coefficients)
    cov = np.linalg.inv(A.T @ ((p * (1 - p))[:, None] * A))
    np.testing.assert_allclose(m.standard_errors, np.sqrt(np.diag(cov)), rtol=1e-8)


def test_log_likelihood_never_drops():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3)) * 3
    y = (rng.random(60) < expit(X[:, 0] * 2)).astype(float)
    A = np.hstack([np.ones((60, 1)), X])
    trace = [fit_logistic(design(X), y, max_iter=it, tol=0.0).log_likelihood for it in range(1, 12)]
    assert all(b >= a - 1e-12 * abs(a) for a, b in zip(trace, trace[1:]))
    assert trace[-1] == pytest.approx(log_likelihood(A, y, oracle_mle(X, y)), rel=1e-10)


def test_separation_is_reported_not_raised():
    x = np.array([0, 0, 0, 1, 1, 1.0])
    y = np.array([0, 0, 0, 1, 1, 1.0])
    m = fit_logistic(design(x), y)
    assert m.separation_suspected and not m.converged
    assert predict_proba(m, design(x)) == pytest.approx(y, abs=1e-6)


def test_collinear_columns_use_ridge():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 50).astype(float)
    y = (rng.random(50) < 0.4).astype(float)
    y[:2] = [0, 1]
    m = fit_logistic(design(np.column_stack([x, 1 - x])), y)
    assert m.ridge_applied
    assert np.isfinite(m.coefficients).all()


def test_input_validation():
    with pytest.raises(FitError):
        fit_logistic(design([0, 1, 0]), np.array([1, 1, 1]))
    with pytest.raises(FitError):
        fit_logistic(design([0, 1, 0]), np.array([0, 2, 1]))
    with pytest.raises(FitError):
        fit_logistic(design([0, 1, 0]), np.array([0, 1]))
    with pytest.raises(FitError):
        DesignMatrix(("a", "a"), np.zeros((3, 2)))
    with pytest.raises(FitError):
        DesignMatrix(("a",), np.array([np.nan, 1.0]))
    with pytest.warns(FitWarning):
        fit_logistic(design(np.eye(3)), np.array([0, 1, 0]))


def test_l1_without_penalty_matches_mle():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(80, 3))
    y = (rng.random(80) < expit(X @ [1.0, -0.5, 0.2])).astype(float)
    m0 = fit_logistic(design(X), y)
    m1 = fit_logistic_l1(design(X), y, 0.0)
    np.testing.assert_allclose(m1.coefficients, m0.coefficients, atol=1e-4)


def test_l1_large_penalty_zeroes_slopes():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(80, 4))
    X = (X - X.mean(0)) / X.std(0)
    y = (rng.random(80) < expit(X[:, 0])).astype(float)
    m = fit_logistic_l1(design(X), y, 1e3)
    assert np.all(m.coefficients[1:] == 0.0)
    assert m.coefficients[0] == pytest.approx(math.log(y.mean() / (1 - y.mean())), abs=1e-6)
    assert m.n_terms == 0
    assert np.isnan(m.standard_errors[1:]).all()


def test_l1_objective_beats_mle_point():
    X = np.array([[1, 0], [0, 1], [1, 1], [0, 0], [1, 0], [0, 1], [1, 1], [0, 0.0]])
    y = np.array([1, 0, 1, 0, 0, 1, 1, 0.0])
    A = np.hstack([np.ones((8, 1)), X])
    m_l1 = fit_logistic_l1(design(X), y, 0.1)
    m_ml = fit_logistic(design(X), y)
    assert penalized_objective(A, y, m_l1.coefficients, 0.1) <= penalized_objective(A, y, m_ml.coefficients, 0.1)
    # optimality: perturbing any coefficient cannot lower the objective
    base = penalized_objective(A, y, m_l1.coefficients, 0.1)
    for j in range(3):
        for step in (1e-4, -1e-4):
            b = m_l1.coefficients.copy()
            b[j] += step
            assert penalized_objective(A, y, b, 0.1) >= base - 1e-12


def test_l1_path_monotone():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(150, 6))
    y = (rng.random(150) < expit(X @ [2, -1.5, 1, 0.5, 0, 0])).astype(float)
    counts = [fit_logistic_l1(design(X), y, lam).n_terms for lam in (0.0, 0.005, 0.02, 0.05, 0.1, 0.2, 0.5)]
    assert counts == sorted(counts, reverse=True)
    assert counts[0] == 6 and counts[-1] == 0


def test_l1_rejects_negative_penalty():
    with pytest.raises(FitError):
        fit_logistic_l1(design([0, 1]), np.array([0, 1]), -1.0)


def test_predict_examples():
    zero = FittedModel(("x0",), np.zeros(2), np.ones(2), True, 1, 0.0)
    assert predict_proba(zero, design([3, -1, 8])) == pytest.approx(0.5)
    m = FittedModel(("x0",), np.array([0.0, 2.0]), np.ones(2), True, 1, 0.0)
    assert predict_proba(m, design([1, -1])) == pytest.approx([0.8808, 0.1192], abs=5e-5)
    with pytest.raises(RecipeMismatch):
        predict_proba(m, design([1, -1], prefix="z"))


def test_wald_examples():
    m = FittedModel(("x0", "x1"), np.array([0.0, 1.96, -3.0]), np.array([1.0, 1.0, 0.5]), True, 1, 0.0)
    z, p = wald_stats(m)
    assert p[0] == pytest.approx(1.0)
    assert p[1] == pytest.approx(0.05, abs=1e-4)
    assert ((p >= 0) & (p <= 1)).all()
    bad = FittedModel(("x0",), np.array([0.1, 1.0]), np.array([1.0, 0.0]), True, 1, 0.0)
    with pytest.raises(FitError):
        wald_stats(bad)
    assert np.isnan(wald_stats(bad, strict=False)[1][1])


def test_model_json():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(40, 2))
    y = (rng.random(40) < 0.4).astype(float)
    y[:2] = [0, 1]
    doc = fit_logistic(design(X), y, recipe={"kind": "test"}).to_json()
    assert [c["name"] for c in doc["coefficients"]] == ["(intercept)", "x0", "x1"]
    assert doc["recipe"] == {"kind": "test"}
    assert all(0 <= c["p_value"] <= 1 for c in doc["coefficients"])


def test_design_from_columns():
    d = design_from_columns([("a", [1, 0]), ("b", [0, 2])], 2)
    assert d.names == ("a", "b") and d.values.tolist() == [[1, 0], [0, 2]]
    assert design_from_columns([], 3).k == 0


def test_fits_are_pure_under_concurrency():
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(12)
    X = rng.normal(size=(100, 3))
    y = (rng.random(100) < expit(X[:, 0])).astype(float)
    serial = fit_logistic(design(X), y).coefficients
    with warnings.catch_warnings(), ThreadPoolExecutor(4) as pool:
        outs = list(pool.map(lambda _: fit_logistic(design(X), y).coefficients, range(8)))
    assert all(np.array_equal(o, serial) for o in outs)
