"""Numba-compiled implementations of the numeric hot paths.

Loop-based equivalents of `kernels_numpy`, one function per kernel with
identical signatures. Compiled lazily with on-disk caching, so the
first call in a fresh environment pays the JIT cost once.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LOG_2PI = float(np.log(2.0 * np.pi))


@njit(cache=True)
def _solve_lower(chol, b, out):
    # forward substitution: chol @ out = b
    d = b.shape[0]
    for i in range(d):
        s = b[i]
        for j in range(i):
            s -= chol[i, j] * out[j]
        out[i] = s / chol[i, i]


@njit(cache=True)
def mvn_logpdf(x, mean, chol):
    n, d = x.shape
    logdet = 0.0
    for i in range(d):
        logdet += np.log(chol[i, i])
    const = -0.5 * d * _LOG_2PI - logdet
    out = np.empty(n)
    diff = np.empty(d)
    z = np.empty(d)
    for k in range(n):
        for i in range(d):
            diff[i] = x[k, i] - mean[i]
        _solve_lower(chol, diff, z)
        quad = 0.0
        for i in range(d):
            quad += z[i] * z[i]
        out[k] = const - 0.5 * quad
    return out


@njit(cache=True)
def mvn_logpdf_rowmeans(x, means, chol):
    n, d = x.shape
    logdet = 0.0
    for i in range(d):
        logdet += np.log(chol[i, i])
    const = -0.5 * d * _LOG_2PI - logdet
    out = np.empty(n)
    diff = np.empty(d)
    z = np.empty(d)
    for k in range(n):
        for i in range(d):
            diff[i] = x[k, i] - means[k, i]
        _solve_lower(chol, diff, z)
        quad = 0.0
        for i in range(d):
            quad += z[i] * z[i]
        out[k] = const - 0.5 * quad
    return out


@njit(cache=True)
def normalized_weights(log_w):
    n = log_w.shape[0]
    m = np.max(log_w)
    w = np.empty(n)
    s = 0.0
    for i in range(n):
        w[i] = np.exp(log_w[i] - m)
        s += w[i]
    for i in range(n):
        w[i] /= s
    return w


@njit(cache=True)
def ess_from_log_weights(log_w):
    n = log_w.shape[0]
    m = np.max(log_w)
    s = 0.0
    s2 = 0.0
    for i in range(n):
        w = np.exp(log_w[i] - m)
        s += w
        s2 += w * w
    return s * s / s2


@njit(cache=True)
def weighted_mean_cov(x, w):
    n, d = x.shape
    mean = np.zeros(d)
    for k in range(n):
        for i in range(d):
            mean[i] += w[k] * x[k, i]
    cov = np.zeros((d, d))
    for k in range(n):
        for i in range(d):
            di = x[k, i] - mean[i]
            for j in range(d):
                cov[i, j] += w[k] * di * (x[k, j] - mean[j])
    return mean, cov


@njit(cache=True)
def em_e_step(x, log_mix_w, means, chols):
    n = x.shape[0]
    m = means.shape[0]
    lp = np.empty((n, m))
    for j in range(m):
        lp[:, j] = log_mix_w[j] + mvn_logpdf(x, means[j], chols[j])
    ll = 0.0
    for k in range(n):
        mx = lp[k, 0]
        for j in range(1, m):
            if lp[k, j] > mx:
                mx = lp[k, j]
        acc = 0.0
        for j in range(m):
            acc += np.exp(lp[k, j] - mx)
        lse = mx + np.log(acc)
        for j in range(m):
            lp[k, j] -= lse
        ll += lse
    return lp, ll


@njit(cache=True)
def em_m_step(x, resp, jitter):
    n, d = x.shape
    m = resp.shape[1]
    mass = np.zeros(m)
    for k in range(n):
        for j in range(m):
            mass[j] += resp[k, j]
    weights = mass / n
    means = np.zeros((m, d))
    for k in range(n):
        for j in range(m):
            for i in range(d):
                means[j, i] += resp[k, j] * x[k, i]
    for j in range(m):
        for i in range(d):
            means[j, i] /= mass[j]
    covs = np.zeros((m, d, d))
    for k in range(n):
        for j in range(m):
            for i in range(d):
                di = x[k, i] - means[j, i]
                for i2 in range(d):
                    covs[j, i, i2] += resp[k, j] * di * (x[k, i2] - means[j, i2])
    for j in range(m):
        for i in range(d):
            for i2 in range(d):
                covs[j, i, i2] /= mass[j]
            covs[j, i, i] += jitter
    return weights, means, covs
