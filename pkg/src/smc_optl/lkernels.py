"""Pluggable backward-kernel strategies for the weight update.

Each iteration the sampler fits a strategy-dependent object to the
population of (previous, proposed) position pairs and then evaluates
the log backward-kernel density of each previous position given its
proposed one:

* ``forward``    -- reuse the forward proposal density in reverse; no fit.
* ``gauss-opt``  -- Gaussian fit to the pairs, conditionalised.
* ``gmm-opt:M``  -- M-component mixture fit to the pairs, conditionalised
  with responsibility weights.
* a fixed user-supplied conditional (used for exactness checks where
  the optimal backward kernel is known in closed form).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .distributions import (
    GaussianParams,
    GmmParams,
    JointBlocks,
    cholesky_with_jitter,
    conditional_geometry,
    fit_gaussian,
    fit_gmm,
    gaussian_conditional,
    gaussian_log_pdf,
    gmm_conditional,
    gmm_log_pdf,
)

logger = logging.getLogger(__name__)

_KIND_LABELS = ("forward", "gauss-opt", "gmm-opt", "fixed")


@dataclass(frozen=True)
class LKernelStrategy:
    """Tagged choice of backward kernel.

    Construct through the classmethods; `fixed` wraps a callable
    ``(x_prev_batch, x_curr_batch) -> log densities`` and is not
    reachable from the CLI.
    """

    kind: str
    n_components: int = 1
    log_conditional: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in _KIND_LABELS:
            raise ValueError(f"unknown L-kernel kind {self.kind!r}")
        if self.n_components < 1:
            raise ValueError("mixture L-kernel needs at least 1 component")
        if self.kind == "fixed" and self.log_conditional is None:
            raise ValueError("fixed L-kernel requires a log-conditional callable")

    @classmethod
    def forward_proposal(cls) -> "LKernelStrategy":
        return cls(kind="forward")

    @classmethod
    def gaussian_opt(cls) -> "LKernelStrategy":
        return cls(kind="gauss-opt")

    @classmethod
    def gmm_opt(cls, n_components: int) -> "LKernelStrategy":
        return cls(kind="gmm-opt", n_components=int(n_components))

    @classmethod
    def fixed(cls, log_conditional) -> "LKernelStrategy":
        return cls(kind="fixed", log_conditional=log_conditional)

    @classmethod
    def parse(cls, text: str) -> "LKernelStrategy":
        """Parse a CLI/config spec: forward | gauss-opt | gmm-opt:M."""
        spec = text.strip().lower()
        if spec == "forward":
            return cls.forward_proposal()
        if spec == "gauss-opt":
            return cls.gaussian_opt()
        if spec.startswith("gmm-opt:"):
            try:
                m = int(spec.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad component count in {text!r}") from None
            return cls.gmm_opt(m)
        raise ValueError(
            f"unknown L-kernel {text!r}; expected forward, gauss-opt or gmm-opt:M"
        )

    @property
    def label(self) -> str:
        if self.kind == "gmm-opt":
            return f"gmm-opt:{self.n_components}"
        return self.kind


@dataclass(eq=False)
class FittedLKernel:
    """Per-iteration fit backing one strategy's log-density evaluation."""

    strategy: LKernelStrategy
    blocks: JointBlocks | None = None
    mixture: GmmParams | None = None


def fit_lkernel(
    strategy: LKernelStrategy,
    prev_positions: np.ndarray,
    curr_positions: np.ndarray,
    rng: np.random.Generator,
) -> FittedLKernel:
    """Fit the strategy's approximation to the paired positions.

    The forward-proposal and fixed variants need no fit; the others fit
    a Gaussian or mixture over the concatenated (prev, curr) rows.
    """
    prev = np.atleast_2d(np.asarray(prev_positions, dtype=float))
    curr = np.atleast_2d(np.asarray(curr_positions, dtype=float))
    if prev.shape != curr.shape:
        raise ValueError(
            f"paired positions disagree: {prev.shape} vs {curr.shape}"
        )
    if strategy.kind in ("forward", "fixed"):
        return FittedLKernel(strategy)
    pairs = np.hstack([prev, curr])
    if strategy.kind == "gauss-opt":
        joint = fit_gaussian(pairs)
        return FittedLKernel(strategy, blocks=JointBlocks.from_gaussian(joint))
    mixture = fit_gmm(pairs, strategy.n_components, rng)
    return FittedLKernel(strategy, mixture=mixture)


def log_lkernel_batch(
    fit: FittedLKernel,
    proposal_chol: np.ndarray,
    x_prev: np.ndarray,
    x_curr: np.ndarray,
) -> np.ndarray:
    """Log backward-kernel density of each previous position.

    `proposal_chol` is the Cholesky factor of the random-walk proposal
    covariance, used only by the forward-proposal variant.
    """
    prev = np.atleast_2d(np.asarray(x_prev, dtype=float))
    curr = np.atleast_2d(np.asarray(x_curr, dtype=float))
    strategy = fit.strategy
    if strategy.kind == "forward":
        return kernels.mvn_logpdf_rowmeans(prev, curr, proposal_chol)
    if strategy.kind == "fixed":
        return np.asarray(strategy.log_conditional(prev, curr), dtype=float)
    if strategy.kind == "gauss-opt":
        gain, cond_cov = conditional_geometry(fit.blocks)
        cond_means = fit.blocks.mu_prev + (curr - fit.blocks.mu_curr) @ gain
        return kernels.mvn_logpdf_rowmeans(
            prev, cond_means, cholesky_with_jitter(cond_cov)
        )
    return _gmm_log_conditional_batch(fit.mixture, prev, curr)


def _gmm_log_conditional_batch(mixture: GmmParams, prev, curr) -> np.ndarray:
    """Responsibility-weighted conditional mixture density, batched."""
    n = prev.shape[0]
    m = mixture.n_components
    log_resp = np.empty((n, m))
    comp_lp = np.empty((n, m))
    with np.errstate(divide="ignore"):
        log_w = np.log(mixture.component_weights)
    for j, comp in enumerate(mixture.components):
        blocks = JointBlocks.from_gaussian(comp)
        log_resp[:, j] = log_w[j] + kernels.mvn_logpdf(
            curr, blocks.mu_curr, cholesky_with_jitter(blocks.s_cc)
        )
        gain, cond_cov = conditional_geometry(blocks)
        cond_means = blocks.mu_prev + (curr - blocks.mu_curr) @ gain
        comp_lp[:, j] = kernels.mvn_logpdf_rowmeans(
            prev, cond_means, cholesky_with_jitter(cond_cov)
        )
    resp_mx = np.max(log_resp, axis=1)
    dead = ~np.isfinite(resp_mx)
    if np.any(dead):
        # matches gmm_conditional's uniform-responsibility fallback
        logger.warning(
            "conditional-mixture responsibilities underflowed for %d "
            "particle(s); using uniform weights there",
            int(dead.sum()),
        )
        log_resp[dead] = 0.0
        resp_mx[dead] = 0.0
    joint = log_resp + comp_lp
    mx = np.max(joint, axis=1)
    out = np.full(n, -np.inf)
    ok = np.isfinite(mx)
    if np.any(ok):
        num = mx[ok] + np.log(np.sum(np.exp(joint[ok] - mx[ok, None]), axis=1))
        den = resp_mx[ok] + np.log(
            np.sum(np.exp(log_resp[ok] - resp_mx[ok, None]), axis=1)
        )
        out[ok] = num - den
    return out


def log_lkernel(
    fit: FittedLKernel,
    forward_proposal: Callable[[np.ndarray], GaussianParams],
    x_prev: np.ndarray,
    x_curr: np.ndarray,
) -> float:
    """Log backward-kernel density at a single (prev, curr) pair.

    `forward_proposal` maps a centre point to the proposal distribution
    around it; only the forward-proposal variant evaluates it.
    """
    strategy = fit.strategy
    x_prev = np.atleast_1d(np.asarray(x_prev, dtype=float))
    x_curr = np.atleast_1d(np.asarray(x_curr, dtype=float))
    if strategy.kind == "forward":
        return gaussian_log_pdf(forward_proposal(x_curr), x_prev)
    if strategy.kind == "fixed":
        value = strategy.log_conditional(
            x_prev.reshape(1, -1), x_curr.reshape(1, -1)
        )
        return float(np.asarray(value).reshape(()))
    if strategy.kind == "gauss-opt":
        return gaussian_log_pdf(gaussian_conditional(fit.blocks, x_curr), x_prev)
    return gmm_log_pdf(gmm_conditional(fit.mixture, x_curr), x_prev)
