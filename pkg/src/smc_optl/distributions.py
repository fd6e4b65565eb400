"""Multivariate Gaussian and Gaussian-mixture building blocks.

Provides the density containers used throughout the sampler
(`GaussianParams`, `GmmParams`, `JointBlocks`), sampling and log-density
evaluation, moment fits, an EM fitter for mixtures, and the Gaussian /
mixture conditionalisation that backs the approximately optimal
L-kernels.

All covariance factorisations go through :func:`cholesky_with_jitter`:
a plain Cholesky is attempted first and, only if it fails, the diagonal
jitter (1e-6) is added before one retry. Fitted covariances carry the
jitter unconditionally, because resampled particle clouds can be
rank-deficient.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GmmFitError, InsufficientSamplesError, SingularCovarianceError

logger = logging.getLogger(__name__)

#: Diagonal regularisation added to fitted covariances and used as the
#: Cholesky fallback for near-singular inputs.
JITTER = 1e-6

#: Symmetry tolerance for covariance-like inputs (max |A - A.T| element).
SYMMETRY_TOL = 1e-12

_EM_TOL = 1e-3
_EM_MAX_ITER = 100
_EM_EMPTY_MASS = 1e-10
_EM_MAX_RECOVERIES = 5


def cholesky_with_jitter(cov: np.ndarray, jitter: float = JITTER) -> np.ndarray:
    """Lower Cholesky factor of `cov`, retrying once with added jitter.

    Raises
    ------
    SingularCovarianceError
        If `cov + jitter*I` is still not positive definite.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(
            f"covariance of shape {cov.shape} is not positive definite, "
            f"even after {jitter:g} diagonal jitter"
        ) from None


def _check_symmetric(a: np.ndarray, what: str) -> None:
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise ValueError(f"{what} is not symmetric within {SYMMETRY_TOL:g}")


@dataclass(eq=False)
class GaussianParams:
    """Mean vector and symmetric covariance of a multivariate Gaussian."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = self.mean.shape[0]
        if self.cov.shape != (d, d):
            raise ValueError(
                f"covariance shape {self.cov.shape} does not match dimension {d}"
            )
        _check_symmetric(self.cov, "covariance")
        self._chol = None

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def chol(self) -> np.ndarray:
        """Cached lower Cholesky factor of the covariance."""
        if self._chol is None:
            self._chol = cholesky_with_jitter(self.cov)
        return self._chol


@dataclass(eq=False)
class GmmParams:
    """Gaussian mixture: component weights plus per-component Gaussians."""

    component_weights: np.ndarray
    components: list[GaussianParams]

    def __post_init__(self):
        self.component_weights = np.atleast_1d(
            np.asarray(self.component_weights, dtype=float)
        )
        w = self.component_weights
        if len(self.components) != w.shape[0]:
            raise ValueError("one weight per component required")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("component weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > SYMMETRY_TOL:
            raise ValueError("component weights must sum to 1 within 1e-12")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError(f"components disagree on dimension: {sorted(dims)}")

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim


@dataclass(eq=False)
class JointBlocks:
    """Block view of a Gaussian over (previous, current) state pairs.

    `s_pp`, `s_pc`, `s_cp`, `s_cc` are the covariance blocks for the
    previous/current partition; `s_cp` must equal `s_pc.T`.
    """

    mu_prev: np.ndarray
    mu_curr: np.ndarray
    s_pp: np.ndarray
    s_pc: np.ndarray
    s_cp: np.ndarray
    s_cc: np.ndarray

    def __post_init__(self):
        self.mu_prev = np.atleast_1d(np.asarray(self.mu_prev, dtype=float))
        self.mu_curr = np.atleast_1d(np.asarray(self.mu_curr, dtype=float))
        for name in ("s_pp", "s_pc", "s_cp", "s_cc"):
            setattr(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        d = self.dim
        shapes = {self.s_pp.shape, self.s_pc.shape, self.s_cp.shape, self.s_cc.shape}
        if self.mu_curr.shape != (d,) or shapes != {(d, d)}:
            raise ValueError("inconsistent block shapes")
        if np.max(np.abs(self.s_cp - self.s_pc.T)) > SYMMETRY_TOL:
            raise ValueError("cross blocks must be transposes within 1e-12")

    @property
    def dim(self) -> int:
        return self.mu_prev.shape[0]

    @classmethod
    def from_gaussian(cls, params: GaussianParams) -> "JointBlocks":
        """Partition a Gaussian over concatenated pairs into blocks."""
        if params.dim % 2 != 0:
            raise ValueError("paired Gaussian must have even dimension")
        d = params.dim // 2
        cov = params.cov
        return cls(
            mu_prev=params.mean[:d],
            mu_curr=params.mean[d:],
            s_pp=cov[:d, :d],
            s_pc=cov[:d, d:],
            s_cp=cov[d:, :d],
            s_cc=cov[d:, d:],
        )

    def to_gaussian(self) -> GaussianParams:
        """Reassemble the full 2D-dimensional Gaussian."""
        mean = np.concatenate([self.mu_prev, self.mu_curr])
        top = np.hstack([self.s_pp, self.s_pc])
        bottom = np.hstack([self.s_cp, self.s_cc])
        return GaussianParams(mean, np.vstack([top, bottom]))


def _as_batch(x: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise ValueError(f"point has dimension {x.shape[0]}, expected {dim}")
        return x.reshape(1, dim), True
    if x.shape[1] != dim:
        raise ValueError(f"points have dimension {x.shape[1]}, expected {dim}")
    return x, False


def gaussian_log_pdf(p: GaussianParams, x: np.ndarray):
    """Log density of `p` at `x` (a point, or a batch of points as rows).

    Evaluated through the Cholesky factor; no covariance inverse is
    ever formed.
    """
    batch, single = _as_batch(x, p.dim)
    out = kernels.mvn_logpdf(batch, p.mean, p.chol)
    return float(out[0]) if single else out


def gaussian_sample(p: GaussianParams, rng: np.random.Generator, size: int | None = None):
    """Draw from `p` as mean + chol(cov) @ z with z standard normal.

    Returns a vector for `size=None`, otherwise a (size, D) array.
    Deterministic given the generator state.
    """
    n = 1 if size is None else int(size)
    z = rng.standard_normal((n, p.dim))
    draws = p.mean + z @ p.chol.T
    return draws[0] if size is None else draws


def gmm_log_pdf(p: GmmParams, x: np.ndarray):
    """Mixture log density via log-sum-exp over the components."""
    batch, single = _as_batch(x, p.dim)
    lp = np.empty((batch.shape[0], p.n_components))
    with np.errstate(divide="ignore"):
        log_w = np.log(p.component_weights)
    for m, comp in enumerate(p.components):
        lp[:, m] = log_w[m] + kernels.mvn_logpdf(batch, comp.mean, comp.chol)
    mx = np.max(lp, axis=1)
    out = np.full(batch.shape[0], -np.inf)
    ok = np.isfinite(mx)
    if np.any(ok):
        out[ok] = mx[ok] + np.log(np.sum(np.exp(lp[ok] - mx[ok, None]), axis=1))
    return float(out[0]) if single else out


def gmm_sample(p: GmmParams, rng: np.random.Generator, size: int | None = None):
    """Draw from the mixture: component by weight, then Gaussian draw."""
    n = 1 if size is None else int(size)
    choice = rng.choice(p.n_components, size=n, p=p.component_weights)
    draws = np.empty((n, p.dim))
    for m, comp in enumerate(p.components):
        rows = np.flatnonzero(choice == m)
        if rows.size:
            draws[rows] = gaussian_sample(comp, rng, size=rows.size)
    return draws[0] if size is None else draws


def fit_gaussian(samples: np.ndarray) -> GaussianParams:
    """Moment fit: sample mean and ML covariance plus diagonal jitter.

    Requires at least D+1 samples.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    n, d = x.shape
    if n < d + 1:
        raise InsufficientSamplesError(
            f"need at least {d + 1} samples to fit a {d}-dimensional Gaussian, got {n}"
        )
    mean = x.mean(axis=0)
    diff = x - mean
    cov = diff.T @ diff / n + JITTER * np.eye(d)
    return GaussianParams(mean, cov)


def _kmeanspp_indices(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Squared-distance-seeded choice of m data points (kmeans++ style)."""
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    for _ in range(m - 1):
        d2 = np.min(
            np.stack([np.sum((x - x[i]) ** 2, axis=1) for i in idx]), axis=0
        )
        total = d2.sum()
        if total > 0.0:
            idx.append(int(rng.choice(n, p=d2 / total)))
        else:
            idx.append(int(rng.integers(n)))
    return np.array(idx)


def _run_em(x, means, covs, weights, rng, tol, max_iter):
    """EM iterations from explicit initial parameters.

    Returns the final (weights, means, covs) and the log-likelihood
    trace, one entry per E-step. A component whose responsibility mass
    drops below 1e-10 is re-seeded from a random sample; more than five
    such recoveries abort the fit.
    """
    n = x.shape[0]
    trace = []
    prev_ll = -np.inf
    recoveries = 0
    for _ in range(max_iter):
        chols = np.stack([cholesky_with_jitter(c) for c in covs])
        log_resp, ll = kernels.em_e_step(x, np.log(weights), means, chols)
        trace.append(ll)
        if len(trace) > 1 and abs(ll - prev_ll) < tol * abs(prev_ll):
            break
        prev_ll = ll
        resp = np.exp(log_resp)
        mass = resp.sum(axis=0)
        empty = mass < _EM_EMPTY_MASS
        if empty.any():
            recoveries += int(empty.sum())
            if recoveries > _EM_MAX_RECOVERIES:
                raise GmmFitError(
                    f"EM empty-component recovery exhausted after {recoveries} attempts"
                )
            for j in np.flatnonzero(empty):
                means[j] = x[int(rng.integers(n))]
                covs[j] = JITTER * np.eye(x.shape[1])
                weights[j] = 1.0 / n
            weights = weights / weights.sum()
            logger.warning(
                "EM component(s) %s lost all responsibility mass; re-seeded from data",
                np.flatnonzero(empty).tolist(),
            )
            continue
        weights, means, covs = kernels.em_m_step(x, resp, JITTER)
    return weights, means, covs, np.array(trace)


def fit_gmm(
    samples: np.ndarray,
    n_components: int,
    rng: np.random.Generator,
    *,
    return_trace: bool = False,
):
    """Fit an M-component Gaussian mixture by EM.

    Initial means are data points chosen by squared-distance seeding and
    initial covariances are jitter-scaled, so the first E-step is a hard
    nearest-point partition. Iterates until the relative log-likelihood
    change falls below 1e-3 or 100 iterations; the likelihood trace is
    non-decreasing.

    With `return_trace=True` also returns the per-iteration data
    log-likelihood values.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    n, d = x.shape
    m = int(n_components)
    if m < 1:
        raise ValueError("n_components must be >= 1")
    if n < m * (d + 1):
        raise InsufficientSamplesError(
            f"need at least {m * (d + 1)} samples for {m} components in "
            f"dimension {d}, got {n}"
        )
    means = x[_kmeanspp_indices(x, m, rng)].copy()
    covs = np.stack([JITTER * np.eye(d) for _ in range(m)])
    weights = np.full(m, 1.0 / m)
    weights, means, covs, trace = _run_em(
        x, means, covs, weights, rng, _EM_TOL, _EM_MAX_ITER
    )
    weights = weights / weights.sum()
    params = GmmParams(weights, [GaussianParams(means[j], covs[j]) for j in range(m)])
    return (params, trace) if return_trace else params


def conditional_geometry(blocks: JointBlocks):
    """Gain matrix and conditional covariance for prev-given-current.

    Returns (gain, cond_cov) with
    conditional mean  = mu_prev + gain.T @ (x_curr - mu_curr)
    conditional cov   = s_pp - s_pc @ s_cc^{-1} @ s_cp
    where gain = s_cc^{-1} @ s_cp, solved through the Cholesky factor
    of s_cc.
    """
    l_cc = cholesky_with_jitter(blocks.s_cc)
    half = np.linalg.solve(l_cc, blocks.s_cp)
    gain = np.linalg.solve(l_cc.T, half)
    cond_cov = blocks.s_pp - blocks.s_pc @ gain
    cond_cov = 0.5 * (cond_cov + cond_cov.T)
    return gain, cond_cov


def gaussian_conditional(blocks: JointBlocks, x_curr: np.ndarray) -> GaussianParams:
    """Distribution of the previous state given the current one."""
    x = np.asarray(x_curr, dtype=float).reshape(blocks.dim)
    gain, cond_cov = conditional_geometry(blocks)
    mean = blocks.mu_prev + gain.T @ (x - blocks.mu_curr)
    return GaussianParams(mean, cond_cov)


def gmm_conditional(p: GmmParams, x_curr: np.ndarray) -> GmmParams:
    """Conditional mixture of the previous state given the current one.

    Component weights are the posterior responsibilities of `x_curr`
    under each component's current-state marginal, computed in log
    space; components are the per-component Gaussian conditionals. If
    every responsibility underflows to zero the weights fall back to
    uniform (with a logged warning).
    """
    blocks = [JointBlocks.from_gaussian(c) for c in p.components]
    d = blocks[0].dim
    x = np.asarray(x_curr, dtype=float).reshape(d)
    with np.errstate(divide="ignore"):
        log_w = np.log(p.component_weights)
    log_resp = np.empty(p.n_components)
    conds = []
    for m, b in enumerate(blocks):
        marginal = GaussianParams(b.mu_curr, b.s_cc)
        log_resp[m] = log_w[m] + gaussian_log_pdf(marginal, x)
        conds.append(gaussian_conditional(b, x))
    mx = np.max(log_resp)
    if not np.isfinite(mx):
        logger.warning(
            "all conditional-mixture responsibilities underflowed at "
            "x_curr=%s; falling back to uniform weights",
            x,
        )
        resp = np.full(p.n_components, 1.0 / p.n_components)
    else:
        resp = np.exp(log_resp - mx)
        resp = resp / resp.sum()
    return GmmParams(resp, conds)
