"""Vectorised NumPy implementations of the numeric hot paths.

Reference implementations for the kernels in `kernels_numba`; the
dispatcher in `kernels` binds one of the two sets at import time. All
functions take float64 arrays, never mutate their inputs, and leave
input validation (finite weights, positive-definite factors) to the
calling layer.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

_LOG_2PI = float(np.log(2.0 * np.pi))


def mvn_logpdf(x, mean, chol):
    """Gaussian log density at each row of x, for one shared mean.

    `chol` is the lower Cholesky factor of the covariance. Quadratic
    overflow far in the tails maps to -inf, matching exp underflow.
    """
    diff = (x - mean).T
    z = solve_triangular(chol, diff, lower=True, check_finite=False)
    logdet = np.sum(np.log(np.diag(chol)))
    with np.errstate(over="ignore"):
        return -0.5 * x.shape[1] * _LOG_2PI - logdet - 0.5 * np.sum(z * z, axis=0)


def mvn_logpdf_rowmeans(x, means, chol):
    """Gaussian log density at each row of x with a per-row mean."""
    diff = (x - means).T
    z = solve_triangular(chol, diff, lower=True, check_finite=False)
    logdet = np.sum(np.log(np.diag(chol)))
    with np.errstate(over="ignore"):
        return -0.5 * x.shape[1] * _LOG_2PI - logdet - 0.5 * np.sum(z * z, axis=0)


def normalized_weights(log_w):
    """Self-normalised weights from log weights (max must be finite)."""
    w = np.exp(log_w - np.max(log_w))
    return w / np.sum(w)


def ess_from_log_weights(log_w):
    """(sum w)^2 / sum(w^2), shift-invariant via max subtraction."""
    w = np.exp(log_w - np.max(log_w))
    s = np.sum(w)
    return float(s * s / np.sum(w * w))


def weighted_mean_cov(x, w):
    """Weighted mean and maximum-likelihood covariance of the rows of x."""
    mean = w @ x
    diff = x - mean
    cov = (w[:, None] * diff).T @ diff
    return mean, cov


def em_e_step(x, log_mix_w, means, chols):
    """Normalised log responsibilities and total data log likelihood."""
    n = x.shape[0]
    m = means.shape[0]
    lp = np.empty((n, m))
    for j in range(m):
        lp[:, j] = log_mix_w[j] + mvn_logpdf(x, means[j], chols[j])
    mx = np.max(lp, axis=1)
    lse = mx + np.log(np.sum(np.exp(lp - mx[:, None]), axis=1))
    return lp - lse[:, None], float(np.sum(lse))


def em_m_step(x, resp, jitter):
    """Mixture weights and per-component moments from responsibilities.

    Every responsibility column must carry mass; covariances get
    `jitter` added to their diagonals.
    """
    n, d = x.shape
    m = resp.shape[1]
    mass = np.sum(resp, axis=0)
    weights = mass / n
    means = (resp.T @ x) / mass[:, None]
    covs = np.empty((m, d, d))
    eye = np.eye(d)
    for j in range(m):
        diff = x - means[j]
        covs[j] = (resp[:, j, None] * diff).T @ diff / mass[j] + jitter * eye
    return weights, means, covs
