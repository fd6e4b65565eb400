"""Benchmark the numba kernels against the pure-NumPy fallback.

Times each hot kernel on SMC-sized inputs (N particles, small D) plus
one end-to-end bimodal run per backend. Run with:

    python benchmarks/bench_kernels.py [--n 500] [--d 2] [--repeats 2000]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from smc_optl import kernels_numpy

try:
    from smc_optl import kernels_numba
except ImportError:
    kernels_numba = None


def make_inputs(n, d, m=2, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    mean = rng.standard_normal(d)
    a = rng.standard_normal((d, d))
    chol = np.linalg.cholesky(a @ a.T + 0.5 * np.eye(d))
    means_rows = rng.standard_normal((n, d))
    log_w = rng.standard_normal(n)
    w = np.exp(log_w - log_w.max())
    w /= w.sum()
    comp_means = rng.standard_normal((m, d))
    chols = np.stack([chol] * m)
    log_mix = np.log(np.full(m, 1.0 / m))
    resp = rng.random((n, m))
    resp /= resp.sum(axis=1, keepdims=True)
    return {
        "mvn_logpdf": (x, mean, chol),
        "mvn_logpdf_rowmeans": (x, means_rows, chol),
        "normalized_weights": (log_w,),
        "ess_from_log_weights": (log_w,),
        "weighted_mean_cov": (x, w),
        "em_e_step": (x, log_mix, comp_means, chols),
        "em_m_step": (x, resp, 1e-6),
    }


def time_call(fn, args, repeats):
    fn(*args)  # warm-up (JIT for the numba set)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_kernels(n, d, repeats):
    inputs = make_inputs(n, d)
    print(f"\nPer-kernel timings (N={n}, D={d}, {repeats} repeats):")
    header = f"{'kernel':24s} {'numpy':>12s} {'numba':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for name, args in inputs.items():
        t_np = time_call(getattr(kernels_numpy, name), args, repeats)
        if kernels_numba is not None:
            t_nb = time_call(getattr(kernels_numba, name), args, repeats)
            print(
                f"{name:24s} {t_np * 1e6:10.2f}us {t_nb * 1e6:10.2f}us "
                f"{t_np / t_nb:8.1f}x"
            )
        else:
            print(f"{name:24s} {t_np * 1e6:10.2f}us {'n/a':>12s}")


def bench_end_to_end():
    script = (
        "import time, smc_optl as so; "
        "cfg = so.builtin_config('bimodal').replace("
        "strategy=so.LKernelStrategy.gmm_opt(2), n_iterations=300); "
        "so.run(cfg.replace(n_iterations=30)); "
        "t0 = time.perf_counter(); so.run(cfg); "
        "print(f'{time.perf_counter() - t0:.2f}')"
    )
    print("\nEnd-to-end bimodal gmm-opt:2 run (300 iterations, after warm-up):")
    backends = ["numpy"] + (["numba"] if kernels_numba is not None else [])
    for backend in backends:
        env = dict(os.environ, SMC_OPTL_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True
        )
        value = out.stdout.strip().splitlines()[-1] if out.returncode == 0 else "failed"
        print(f"  {backend:6s} {value:>8s} s")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=500)
    parser.add_argument("--d", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument(
        "--skip-end-to-end", action="store_true", help="kernel table only"
    )
    args = parser.parse_args()
    if kernels_numba is None:
        print("numba unavailable; timing the NumPy set only")
    bench_kernels(args.n, args.d, args.repeats)
    if not args.skip_end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
