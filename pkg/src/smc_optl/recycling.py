"""Combine per-iteration estimates with ESS-maximising constants.

Each iteration contributes its effective sample size l_k and its moment
estimates; the combined estimate weights iteration k by
c_k = l_k / sum(l). Those constants maximise the effective sample size
of the pooled weighted population, i.e. the objective
1 / sum_k sum_i (c_k * normalised_weight_ki)^2, which reduces to
1 / sum_k (c_k^2 / l_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateWeightsError


@dataclass
class RecyclingState:
    """Append-only record of per-iteration ESS values and estimates.

    Keeps l-weighted running sums of the means and second moments so a
    combined estimate costs O(1) per iteration.
    """

    l_values: list[float] = field(default_factory=list)
    means: list[np.ndarray] = field(default_factory=list)
    covs: list[np.ndarray] = field(default_factory=list)
    _l_total: float = 0.0
    _mean_sum: np.ndarray | None = None
    _second_sum: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.l_values)

    @property
    def constants(self) -> np.ndarray:
        """Normalised combination constants c = l / sum(l)."""
        l = np.asarray(self.l_values, dtype=float)
        return l / l.sum()


def update_recycling(
    state: RecyclingState,
    log_w: np.ndarray,
    mean_k: np.ndarray,
    cov_k: np.ndarray,
) -> RecyclingState:
    """Append iteration k's ESS and moment estimates to the state.

    Must be called with the iteration's weights before any resampling
    reset, otherwise l_k would trivially equal N.
    """
    log_w = np.asarray(log_w, dtype=float)
    if not np.any(np.isfinite(log_w)):
        raise DegenerateWeightsError("all log weights are -inf")
    l_k = kernels.ess_from_log_weights(log_w)
    mean_k = np.array(mean_k, dtype=float)
    cov_k = np.array(cov_k, dtype=float)
    state.l_values.append(l_k)
    state.means.append(mean_k)
    state.covs.append(cov_k)
    second_k = cov_k + np.outer(mean_k, mean_k)
    state._l_total += l_k
    if state._mean_sum is None:
        state._mean_sum = l_k * mean_k
        state._second_sum = l_k * second_k
    else:
        state._mean_sum = state._mean_sum + l_k * mean_k
        state._second_sum = state._second_sum + l_k * second_k
    return state


def recycled_estimate(state: RecyclingState) -> tuple[np.ndarray, np.ndarray]:
    """Convex combination of the stored estimates under the constants.

    Means and second moments are each combined as plain weighted
    functionals; the combined covariance is then
    sum_k c_k (cov_k + mean_k mean_k^T) - mean mean^T.
    """
    if not state.l_values:
        raise ValueError("no iterations recorded yet")
    mean = state._mean_sum / state._l_total
    second = state._second_sum / state._l_total
    return mean, second - np.outer(mean, mean)


def recycling_objective(l_values: np.ndarray, constants: np.ndarray) -> float:
    """Pooled-ESS objective 1 / sum_k (c_k^2 / l_k) for given constants."""
    l = np.asarray(l_values, dtype=float)
    c = np.asarray(constants, dtype=float)
    return float(1.0 / np.sum(c * c / l))
