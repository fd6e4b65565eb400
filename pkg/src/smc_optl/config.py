"""Experiment configuration: targets, proposals, and JSON round-trips.

Config JSON keys mirror the dataclass field names; covariance matrices
are row-major nested arrays. Target densities are tagged by ``kind``
(``gaussian`` or ``gmm``) and expose their log density plus analytic
moments, which serve as ground truth for the toy studies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import GaussianParams, GmmParams, gaussian_log_pdf, gmm_log_pdf
from .lkernels import LKernelStrategy

RESAMPLING_SCHEMES = ("multinomial", "systematic")


@dataclass(eq=False)
class GaussianTarget:
    """Gaussian target density with known moments."""

    params: GaussianParams

    def log_density(self, x):
        return gaussian_log_pdf(self.params, x)

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def true_mean(self) -> np.ndarray:
        return self.params.mean

    @property
    def true_cov(self) -> np.ndarray:
        return self.params.cov

    def to_json_dict(self) -> dict:
        return {
            "kind": "gaussian",
            "mean": self.params.mean.tolist(),
            "cov": self.params.cov.tolist(),
        }


@dataclass(eq=False)
class MixtureTarget:
    """Gaussian-mixture target density with known moments."""

    params: GmmParams

    def log_density(self, x):
        return gmm_log_pdf(self.params, x)

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def true_mean(self) -> np.ndarray:
        w = self.params.component_weights
        means = np.stack([c.mean for c in self.params.components])
        return w @ means

    @property
    def true_cov(self) -> np.ndarray:
        w = self.params.component_weights
        mean = self.true_mean
        second = sum(
            wm * (c.cov + np.outer(c.mean, c.mean))
            for wm, c in zip(w, self.params.components)
        )
        return second - np.outer(mean, mean)

    def to_json_dict(self) -> dict:
        return {
            "kind": "gmm",
            "weights": self.params.component_weights.tolist(),
            "means": [c.mean.tolist() for c in self.params.components],
            "covs": [c.cov.tolist() for c in self.params.components],
        }


def target_from_json_dict(data: dict):
    kind = data.get("kind")
    if kind == "gaussian":
        return GaussianTarget(GaussianParams(data["mean"], data["cov"]))
    if kind == "gmm":
        comps = [GaussianParams(m, c) for m, c in zip(data["means"], data["covs"])]
        return MixtureTarget(GmmParams(data["weights"], comps))
    raise ValueError(f"unknown target kind {kind!r}; expected gaussian or gmm")


@dataclass(eq=False)
class ProposalSpec:
    """Initial proposal distribution plus random-walk covariance."""

    initial: GaussianParams
    random_walk_cov: np.ndarray

    def __post_init__(self):
        self.random_walk_cov = np.atleast_2d(
            np.asarray(self.random_walk_cov, dtype=float)
        )
        d = self.initial.dim
        if self.random_walk_cov.shape != (d, d):
            raise ValueError(
                f"random-walk covariance shape {self.random_walk_cov.shape} "
                f"does not match dimension {d}"
            )
        if np.max(np.abs(self.random_walk_cov - self.random_walk_cov.T)) > 1e-12:
            raise ValueError("random-walk covariance must be symmetric")

    def to_json_dict(self) -> dict:
        return {
            "initial": {
                "mean": self.initial.mean.tolist(),
                "cov": self.initial.cov.tolist(),
            },
            "random_walk_cov": self.random_walk_cov.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProposalSpec":
        initial = GaussianParams(data["initial"]["mean"], data["initial"]["cov"])
        return cls(initial=initial, random_walk_cov=data["random_walk_cov"])


@dataclass(eq=False)
class ExperimentConfig:
    """Everything one sampler run (or replicate study) needs."""

    target: GaussianTarget | MixtureTarget
    proposal: ProposalSpec
    n_particles: int
    n_iterations: int
    strategy: LKernelStrategy = field(default_factory=LKernelStrategy.forward_proposal)
    seed: int = 0
    ess_threshold_ratio: float = 0.5
    replicates: int = 1
    resampling: str = "multinomial"

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        if self.n_iterations < 1:
            raise ValueError("need at least 1 iteration")
        if not 0.0 < self.ess_threshold_ratio <= 1.0:
            raise ValueError("ess_threshold_ratio must lie in (0, 1]")
        if self.replicates < 1:
            raise ValueError("need at least 1 replicate")
        if self.resampling not in RESAMPLING_SCHEMES:
            raise ValueError(
                f"resampling must be one of {RESAMPLING_SCHEMES}, "
                f"got {self.resampling!r}"
            )
        if self.target.dim != self.proposal.initial.dim:
            raise ValueError("target and proposal dimensions disagree")

    @property
    def dim(self) -> int:
        return self.target.dim

    def replace(self, **changes) -> "ExperimentConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def to_json_dict(self) -> dict:
        return {
            "target": self.target.to_json_dict(),
            "proposal": self.proposal.to_json_dict(),
            "n_particles": self.n_particles,
            "n_iterations": self.n_iterations,
            "strategy": self.strategy.label,
            "seed": self.seed,
            "ess_threshold_ratio": self.ess_threshold_ratio,
            "replicates": self.replicates,
            "resampling": self.resampling,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(
            target=target_from_json_dict(data["target"]),
            proposal=ProposalSpec.from_json_dict(data["proposal"]),
            n_particles=int(data["n_particles"]),
            n_iterations=int(data["n_iterations"]),
            strategy=LKernelStrategy.parse(data.get("strategy", "forward")),
            seed=int(data.get("seed", 0)),
            ess_threshold_ratio=float(data.get("ess_threshold_ratio", 0.5)),
            replicates=int(data.get("replicates", 1)),
            resampling=data.get("resampling", "multinomial"),
        )

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_json_dict(json.loads(text))
