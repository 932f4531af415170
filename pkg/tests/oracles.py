"""Independent reference computations used by the tests.

Everything here is written from the model definition directly (dense
numpy/scipy, generic numerical optimizers, naive density sums) and must not
call into the estimators it is used to check.
"""

import math

import numpy as np
from scipy.optimize import minimize
from scipy.stats import multivariate_normal, norm

LOG2PI = math.log(2.0 * math.pi)


def objective_scaled(z, m, r, a, b, c, s1sq, s2sq, delta):
    """-n*log det(Sigma) - sum of residual quadratic forms, evaluated naively
    per trial (no sufficient statistics)."""
    e1 = m - a * z
    e2 = r - c * z - b * m
    det = s1sq * s2sq * (1.0 - delta * delta)
    # inverse of [[s1sq, d*s1*s2], [d*s1*s2, s2sq]]
    i11 = s2sq / det
    i22 = s1sq / det
    i12 = -delta * math.sqrt(s1sq * s2sq) / det
    quad = float(np.sum(i11 * e1 * e1 + 2.0 * i12 * e1 * e2 + i22 * e2 * e2))
    return -z.size * math.log(det) - quad


def numerical_single_fit(z, m, r, delta):
    """Maximize the joint objective over (a, b, c, log s1sq, log s2sq) with a
    generic optimizer; returns (a, b, c, s1sq, s2sq, value)."""
    zz = float(z @ z)
    a0 = float(z @ m) / zz
    X = np.column_stack([z, m])
    slopes, *_ = np.linalg.lstsq(X, r, rcond=None)
    c0, b0 = float(slopes[0]), float(slopes[1])
    e1 = m - a0 * z
    e2 = r - c0 * z - b0 * m
    s1sq0 = max(float(e1 @ e1) / z.size, 1e-8)
    s2sq0 = max(float(e2 @ e2) / z.size, 1e-8)

    def neg(p):
        a, b, c, l1, l2 = p
        return -objective_scaled(z, m, r, a, b, c, math.exp(l1), math.exp(l2), delta)

    x0 = np.array([a0, b0, c0, math.log(s1sq0), math.log(s2sq0)])
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"maxiter": 40000, "xatol": 1e-10, "fatol": 1e-12})
    res = minimize(neg, res.x, method="Nelder-Mead",
                   options={"maxiter": 40000, "xatol": 1e-12, "fatol": 1e-14})
    a, b, c, l1, l2 = res.x
    return a, b, c, math.exp(l1), math.exp(l2), -res.fun


def _subject_arrays(values_by_subject):
    # accept a dict keyed by subject id or a plain sequence of value arrays
    if isinstance(values_by_subject, dict):
        return [np.asarray(values_by_subject[k], float) for k in sorted(values_by_subject)]
    return [np.asarray(v, float) for v in values_by_subject]


def marginal_loglik_numeric(values_by_subject, mean, var_between, var_within):
    """Marginal Gaussian log-likelihood of a random-intercept model computed
    with dense per-subject covariance matrices."""
    total = 0.0
    for y in _subject_arrays(values_by_subject):
        k = y.size
        V = var_within * np.eye(k) + var_between * np.ones((k, k))
        total += multivariate_normal.logpdf(y, mean=np.full(k, mean), cov=V)
    return float(total)


def reml_loglik_matrix(values_by_subject, var_between, var_within):
    """REML log-likelihood via the standard dense-matrix formula with the
    (n - p)/2 * log(2*pi) constant, p = 1 (intercept only)."""
    ys = _subject_arrays(values_by_subject)
    y = np.concatenate(ys)
    n = y.size
    blocks = []
    for v in ys:
        k = v.size
        blocks.append(var_within * np.eye(k) + var_between * np.ones((k, k)))
    V = np.zeros((n, n))
    at = 0
    for b in blocks:
        k = b.shape[0]
        V[at:at + k, at:at + k] = b
        at += k
    X = np.ones((n, 1))
    Vi = np.linalg.inv(V)
    XtViX = X.T @ Vi @ X
    beta = np.linalg.solve(XtViX, X.T @ Vi @ y)
    resid = y - X @ beta
    sign, logdetV = np.linalg.slogdet(V)
    sign2, logdetX = np.linalg.slogdet(XtViX)
    quad = float(resid @ Vi @ resid)
    return -0.5 * ((n - 1) * LOG2PI + logdetV + logdetX + quad)


def h_naive(sessions, state_b_ik, state_u, state_b, lam, psi, sigma1_sq, sigma2_sq, delta):
    """Hierarchical objective evaluated as a plain sum of scipy log-densities.

    sessions: dict key -> (z, m, r); state_b_ik: key -> (A, B, C);
    state_u: subject -> 3-vector; lam, psi: 3-vectors; sigma maps key -> var.
    """
    h1 = 0.0
    for key, (z, m, r) in sessions.items():
        A, B, C = state_b_ik[key]
        s1 = math.sqrt(sigma1_sq[key])
        s2 = math.sqrt(sigma2_sq[key])
        cov = np.array([
            [s1 * s1, delta * s1 * s2],
            [delta * s1 * s2, s2 * s2],
        ])
        mean = np.column_stack([A * z, C * z + B * m])
        obs = np.column_stack([m, r])
        h1 += float(np.sum(multivariate_normal.logpdf(obs - mean, mean=[0, 0], cov=cov)))
    # diagonal covariances: the direct density is a product of univariate
    # normals, which also stays finite when a variance sits on its floor
    h2 = 0.0
    for key, bik in state_b_ik.items():
        subj = key[0]
        mean = state_b + state_u[subj]
        h2 += float(np.sum(norm.logpdf(np.asarray(bik), loc=mean, scale=np.sqrt(lam))))
    h3 = 0.0
    for subj, u in state_u.items():
        h3 += float(np.sum(norm.logpdf(np.asarray(u), scale=np.sqrt(psi))))
    return h1, h2, h3, h1 + h2 + h3


def bc_endpoints(replicates, point, level):
    """Bias-corrected percentile endpoints computed longhand."""
    arr = np.sort(np.asarray(replicates, float))
    z0 = norm.ppf(np.mean(arr < point))
    za = norm.ppf(0.5 * (1.0 + level))
    p_lo = norm.cdf(2 * z0 - za)
    p_hi = norm.cdf(2 * z0 + za)
    return float(np.quantile(arr, p_lo)), float(np.quantile(arr, p_hi))
