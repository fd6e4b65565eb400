"""The sequential Monte Carlo sampler engine.

One run initialises a weighted particle population from the initial
proposal and then, per iteration: resamples if the effective sample
size fell below the threshold, proposes new positions with a Gaussian
random walk, fits the chosen L-kernel to the (previous, proposed)
pairs, and updates the log importance weights

    log w += [log pi(new) - log pi(old)] + [log L(old | new) - log q(new | old)]

All weight arithmetic stays in log space; normalisation happens only
inside ESS/estimate computations via max-subtraction, so adding any
constant to the log weights changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import ExperimentConfig, ProposalSpec
from .distributions import cholesky_with_jitter, gaussian_log_pdf, gaussian_sample
from .errors import DegenerateWeightsError, SmcRunError
from .lkernels import LKernelStrategy, fit_lkernel, log_lkernel_batch
from .recycling import RecyclingState, recycled_estimate, update_recycling


@dataclass(eq=False)
class ParticleSystem:
    """Particle positions, their predecessors, and log weights.

    `log_pi` caches the target log density at `curr`; it is carried
    along purely to avoid re-evaluating the target.
    """

    curr: np.ndarray
    prev: np.ndarray
    log_w: np.ndarray
    iteration: int
    log_pi: np.ndarray | None = None

    @property
    def n_particles(self) -> int:
        return self.curr.shape[0]

    @property
    def dim(self) -> int:
        return self.curr.shape[1]

    def validate(self) -> None:
        if np.any(np.isnan(self.log_w)):
            raise ValueError("log weights contain NaN")
        if not np.any(np.isfinite(self.log_w)):
            raise DegenerateWeightsError("all log weights are -inf")


@dataclass(eq=False)
class RunRecord:
    """Per-iteration diagnostics and estimates of a completed run."""

    ess: np.ndarray
    resampled: np.ndarray
    mean_estimate: np.ndarray
    cov_estimate: np.ndarray
    recycled_mean: np.ndarray
    recycled_cov: np.ndarray
    recycling_constants: np.ndarray
    l_values: np.ndarray

    @property
    def n_iterations(self) -> int:
        return self.ess.shape[0]

    @property
    def dim(self) -> int:
        return self.mean_estimate.shape[1]

    @property
    def resample_count(self) -> int:
        return int(np.sum(self.resampled))

    @property
    def final_recycled_mean(self) -> np.ndarray:
        return self.recycled_mean[-1]

    @property
    def final_recycled_cov(self) -> np.ndarray:
        return self.recycled_cov[-1]


def init(config: ExperimentConfig, rng: np.random.Generator) -> ParticleSystem:
    """Draw the initial population and its importance log weights."""
    n = config.n_particles
    curr = gaussian_sample(config.proposal.initial, rng, size=n)
    log_pi = np.asarray(config.target.log_density(curr), dtype=float)
    log_w = log_pi - gaussian_log_pdf(config.proposal.initial, curr)
    if not np.any(np.isfinite(log_w)):
        raise DegenerateWeightsError(
            "initialization is degenerate: target density is zero at every "
            "initial sample"
        )
    return ParticleSystem(
        curr=curr, prev=curr.copy(), log_w=log_w, iteration=1, log_pi=log_pi
    )


def ess(log_w: np.ndarray) -> float:
    """Effective sample size (sum w)^2 / sum(w^2), stable in log space."""
    log_w = np.asarray(log_w, dtype=float)
    if not np.any(np.isfinite(log_w)):
        raise DegenerateWeightsError("all log weights are -inf")
    return kernels.ess_from_log_weights(log_w)


def normalized_weights(log_w: np.ndarray) -> np.ndarray:
    """Self-normalised weights, raising on fully degenerate input."""
    log_w = np.asarray(log_w, dtype=float)
    if not np.any(np.isfinite(log_w)):
        raise DegenerateWeightsError("all log weights are -inf")
    return kernels.normalized_weights(log_w)


def resample(
    ps: ParticleSystem,
    rng: np.random.Generator,
    scheme: str = "multinomial",
) -> ParticleSystem:
    """Draw N particles with replacement proportionally to the weights.

    Weights reset to a flat zero log weight; only weight ratios ever
    matter downstream. Ancestor rows of `prev` follow their particles.
    """
    w = normalized_weights(ps.log_w)
    n = ps.n_particles
    if scheme == "multinomial":
        idx = rng.choice(n, size=n, replace=True, p=w)
    elif scheme == "systematic":
        positions = (rng.random() + np.arange(n)) / n
        idx = np.searchsorted(np.cumsum(w), positions)
    else:
        raise ValueError(f"unknown resampling scheme {scheme!r}")
    return ParticleSystem(
        curr=ps.curr[idx].copy(),
        prev=ps.prev[idx].copy(),
        log_w=np.zeros(n),
        iteration=ps.iteration,
        log_pi=None if ps.log_pi is None else ps.log_pi[idx].copy(),
    )


def propose_and_reweight(
    ps: ParticleSystem,
    proposal: ProposalSpec,
    strategy: LKernelStrategy,
    target_log_density,
    rng: np.random.Generator,
) -> ParticleSystem:
    """One sampler iteration: random-walk move plus weight update.

    Particles whose proposed position has zero target density keep a
    -inf log weight; they die at the next resampling.
    """
    rw_chol = cholesky_with_jitter(proposal.random_walk_cov)
    n = ps.n_particles
    new = ps.curr + rng.standard_normal((n, ps.dim)) @ rw_chol.T

    fit = fit_lkernel(strategy, ps.curr, new, rng)
    if ps.log_pi is not None:
        log_pi_old = ps.log_pi
    else:
        log_pi_old = np.asarray(target_log_density(ps.curr), dtype=float)
    log_pi_new = np.asarray(target_log_density(new), dtype=float)
    log_l = log_lkernel_batch(fit, rw_chol, ps.curr, new)
    log_q = kernels.mvn_logpdf_rowmeans(new, ps.curr, rw_chol)

    alive = np.isfinite(ps.log_w) & np.isfinite(log_pi_old)
    log_w = np.full(n, -np.inf)
    log_w[alive] = (
        ps.log_w[alive]
        + (log_pi_new[alive] - log_pi_old[alive])
        + (log_l[alive] - log_q[alive])
    )
    if not np.any(np.isfinite(log_w)):
        raise DegenerateWeightsError(
            f"all particles lost weight at iteration {ps.iteration + 1}"
        )
    return ParticleSystem(
        curr=new,
        prev=ps.curr,
        log_w=log_w,
        iteration=ps.iteration + 1,
        log_pi=log_pi_new,
    )


def estimate_moments(ps: ParticleSystem) -> tuple[np.ndarray, np.ndarray]:
    """Self-normalised importance estimates of the mean and covariance."""
    w = normalized_weights(ps.log_w)
    return kernels.weighted_mean_cov(ps.curr, w)


def run(config: ExperimentConfig, rng: np.random.Generator | None = None) -> RunRecord:
    """Execute a full sampler run and collect per-iteration records.

    Resampling is decided before each move from the previous iteration's
    weights (resample-then-move); recycling sees every iteration's
    weights before any reset. Any error mid-run raises `SmcRunError`
    with the partial record attached.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    ess_trace: list[float] = []
    resampled: list[bool] = []
    means: list[np.ndarray] = []
    covs: list[np.ndarray] = []
    rec_means: list[np.ndarray] = []
    rec_covs: list[np.ndarray] = []
    recycling = RecyclingState()

    def _record(ps: ParticleSystem, did_resample: bool) -> None:
        mean_k, cov_k = estimate_moments(ps)
        update_recycling(recycling, ps.log_w, mean_k, cov_k)
        rec_mean, rec_cov = recycled_estimate(recycling)
        ess_trace.append(ess(ps.log_w))
        resampled.append(did_resample)
        means.append(mean_k)
        covs.append(cov_k)
        rec_means.append(rec_mean)
        rec_covs.append(rec_cov)

    def _partial() -> RunRecord:
        return _build_record(
            ess_trace, resampled, means, covs, rec_means, rec_covs, recycling
        )

    try:
        ps = init(config, rng)
        _record(ps, False)
        threshold = config.ess_threshold_ratio * config.n_particles
        for _ in range(2, config.n_iterations + 1):
            if ess(ps.log_w) < threshold:
                ps = resample(ps, rng, scheme=config.resampling)
                did_resample = True
            else:
                did_resample = False
            ps = propose_and_reweight(
                ps, config.proposal, config.strategy, config.target.log_density, rng
            )
            _record(ps, did_resample)
    except Exception as exc:
        raise SmcRunError(
            f"run aborted at iteration {len(ess_trace) + 1}: {exc}",
            partial_record=_partial(),
        ) from exc
    return _partial()


def _build_record(
    ess_trace, resampled, means, covs, rec_means, rec_covs, recycling
) -> RunRecord:
    k = len(ess_trace)
    dim = means[0].shape[0] if k else 0
    l_values = np.asarray(recycling.l_values, dtype=float)
    constants = recycling.constants if k else np.empty(0)
    return RunRecord(
        ess=np.asarray(ess_trace, dtype=float),
        resampled=np.asarray(resampled, dtype=bool),
        mean_estimate=np.asarray(means, dtype=float).reshape(k, dim),
        cov_estimate=np.asarray(covs, dtype=float).reshape(k, dim, dim),
        recycled_mean=np.asarray(rec_means, dtype=float).reshape(k, dim),
        recycled_cov=np.asarray(rec_covs, dtype=float).reshape(k, dim, dim),
        recycling_constants=constants,
        l_values=l_values,
    )
