"""Dispatch layer binding the active numeric kernel implementations.

Import kernels from here; `backend.BACKEND` records which set is live.
Both implementation modules stay importable on their own so they can be
benchmarked against each other (see ``benchmarks/bench_kernels.py``).
"""

from .backend import BACKEND

if BACKEND == "numba":
    from . import kernels_numba as _impl
else:
    from . import kernels_numpy as _impl

mvn_logpdf = _impl.mvn_logpdf
mvn_logpdf_rowmeans = _impl.mvn_logpdf_rowmeans
normalized_weights = _impl.normalized_weights
ess_from_log_weights = _impl.ess_from_log_weights
weighted_mean_cov = _impl.weighted_mean_cov
em_e_step = _impl.em_e_step
em_m_step = _impl.em_m_step

__all__ = [
    "BACKEND",
    "mvn_logpdf",
    "mvn_logpdf_rowmeans",
    "normalized_weights",
    "ess_from_log_weights",
    "weighted_mean_cov",
    "em_e_step",
    "em_m_step",
]
