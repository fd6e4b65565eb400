"""L-kernel strategy fitting and log-density evaluation tests."""

import numpy as np
import pytest

from smc_optl import (
    GaussianParams,
    JointBlocks,
    LKernelStrategy,
    fit_lkernel,
    gaussian_log_pdf,
    log_lkernel,
)
from smc_optl.lkernels import log_lkernel_batch


def rw_proposal_factory(cov):
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    return lambda center: GaussianParams(center, cov)


def analytic_blocks():
    # x1 ~ N(0,1), x2 = x1 + N(0,1): joint mean (0,0), cov [[1,1],[1,2]]
    return JointBlocks(
        mu_prev=[0.0], mu_curr=[0.0], s_pp=[[1.0]], s_pc=[[1.0]],
        s_cp=[[1.0]], s_cc=[[2.0]],
    )


class TestStrategyParsing:
    def test_round_trips(self):
        assert LKernelStrategy.parse("forward").kind == "forward"
        assert LKernelStrategy.parse("gauss-opt").kind == "gauss-opt"
        s = LKernelStrategy.parse("gmm-opt:3")
        assert (s.kind, s.n_components) == ("gmm-opt", 3)
        assert LKernelStrategy.parse(s.label) == s

    def test_rejects_unknown(self):
        with pytest.raises(ValueError, match="forward"):
            LKernelStrategy.parse("optimal")
        with pytest.raises(ValueError):
            LKernelStrategy.parse("gmm-opt:x")
        with pytest.raises(ValueError):
            LKernelStrategy.gmm_opt(0)


class TestFitLKernel:
    def test_forward_fit_is_empty(self):
        rng = np.random.default_rng(0)
        fit = fit_lkernel(
            LKernelStrategy.forward_proposal(),
            rng.standard_normal((50, 2)),
            rng.standard_normal((50, 2)),
            rng,
        )
        assert fit.blocks is None and fit.mixture is None

    def test_gaussian_fit_recovers_analytic_joint(self):
        # oracle: Monte Carlo pairs from the known linear-Gaussian process
        rng = np.random.default_rng(12)
        prev = rng.standard_normal((100_000, 1))
        curr = prev + rng.standard_normal((100_000, 1))
        fit = fit_lkernel(LKernelStrategy.gaussian_opt(), prev, curr, rng)
        b = fit.blocks
        for got, want in [
            (b.mu_prev[0], 0.0), (b.mu_curr[0], 0.0),
            (b.s_pp[0, 0], 1.0), (b.s_pc[0, 0], 1.0), (b.s_cc[0, 0], 2.0),
        ]:
            assert abs(got - want) < 0.02

    def test_gmm1_fit_equals_gaussian_fit(self):
        rng = np.random.default_rng(5)
        prev = rng.standard_normal((300, 2))
        curr = prev + 0.5 * rng.standard_normal((300, 2))
        gauss = fit_lkernel(LKernelStrategy.gaussian_opt(), prev, curr, rng)
        mix = fit_lkernel(
            LKernelStrategy.gmm_opt(1), prev, curr, np.random.default_rng(5)
        )
        comp = mix.mixture.components[0]
        joint = gauss.blocks.to_gaussian()
        np.testing.assert_allclose(comp.mean, joint.mean, atol=1e-12)
        np.testing.assert_allclose(comp.cov, joint.cov, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            fit_lkernel(
                LKernelStrategy.gaussian_opt(),
                np.zeros((10, 2)),
                np.zeros((9, 2)),
                rng,
            )


class TestLogLKernel:
    def test_forward_symmetric_random_walk(self):
        rng = np.random.default_rng(1)
        cov = [[0.5]]
        fit = fit_lkernel(
            LKernelStrategy.forward_proposal(),
            rng.standard_normal((10, 1)),
            rng.standard_normal((10, 1)),
            rng,
        )
        proposal = rw_proposal_factory(cov)
        a, b = np.array([0.3]), np.array([-0.9])
        forward_ab = log_lkernel(fit, proposal, a, b)
        # symmetric RW: density of a around b equals density of b around a
        assert forward_ab == pytest.approx(
            gaussian_log_pdf(GaussianParams(a, cov), b), rel=1e-14
        )
        assert forward_ab == pytest.approx(
            gaussian_log_pdf(GaussianParams(b, cov), a), rel=1e-14
        )

    def test_forward_ignores_population(self):
        rng = np.random.default_rng(2)
        proposal = rw_proposal_factory([[0.7]])
        vals = []
        for seed in (0, 1):
            pop = np.random.default_rng(seed).standard_normal((40, 1))
            fit = fit_lkernel(
                LKernelStrategy.forward_proposal(), pop, pop + 1.0, rng
            )
            vals.append(log_lkernel(fit, proposal, [0.2], [0.5]))
        assert vals[0] == vals[1]

    def test_gaussian_opt_closed_form(self):
        from smc_optl.lkernels import FittedLKernel

        fit = FittedLKernel(LKernelStrategy.gaussian_opt(), blocks=analytic_blocks())
        got = log_lkernel(fit, rw_proposal_factory([[1.0]]), [0.5], [1.0])
        expected = gaussian_log_pdf(GaussianParams([0.5], [[0.5]]), [0.5])
        assert got == pytest.approx(expected, rel=1e-13)

    def test_gmm_far_separated_matches_responsible_component(self):
        from smc_optl.distributions import GmmParams
        from smc_optl.lkernels import FittedLKernel

        near = GaussianParams([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
        far = GaussianParams([400.0, 400.0], [[1.0, 0.5], [0.5, 1.0]])
        mix_fit = FittedLKernel(
            LKernelStrategy.gmm_opt(2),
            mixture=GmmParams([0.5, 0.5], [near, far]),
        )
        gauss_fit = FittedLKernel(
            LKernelStrategy.gaussian_opt(),
            blocks=JointBlocks.from_gaussian(near),
        )
        proposal = rw_proposal_factory([[1.0]])
        got = log_lkernel(mix_fit, proposal, [0.3], [0.8])
        want = log_lkernel(gauss_fit, proposal, [0.3], [0.8])
        assert got == pytest.approx(want, abs=1e-10)

    def test_gmm1_equals_gaussian_opt_log_values(self):
        rng = np.random.default_rng(7)
        prev = np.concatenate(
            [rng.normal(-3, 1, (150, 1)), rng.normal(3, 1, (150, 1))]
        )
        curr = prev + rng.normal(0, 0.3, (300, 1))
        gauss = fit_lkernel(LKernelStrategy.gaussian_opt(), prev, curr, rng)
        mix = fit_lkernel(
            LKernelStrategy.gmm_opt(1), prev, curr, np.random.default_rng(7)
        )
        a = log_lkernel_batch(gauss, np.eye(1), prev[:20], curr[:20])
        b = log_lkernel_batch(mix, np.eye(1), prev[:20], curr[:20])
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(9)
        prev = rng.standard_normal((100, 1))
        curr = prev + 0.4 * rng.standard_normal((100, 1))
        rw_chol = np.linalg.cholesky(np.array([[0.16]]))
        proposal = rw_proposal_factory([[0.16]])
        for spec in ("forward", "gauss-opt", "gmm-opt:2"):
            fit = fit_lkernel(LKernelStrategy.parse(spec), prev, curr, rng)
            batch = log_lkernel_batch(fit, rw_chol, prev[:5], curr[:5])
            for i in range(5):
                scalar = log_lkernel(fit, proposal, prev[i], curr[i])
                assert batch[i] == pytest.approx(scalar, rel=1e-10), spec


class TestConditionalNormalization:
    @pytest.mark.parametrize("spec", ["forward", "gauss-opt", "gmm-opt:2"])
    def test_integrates_to_one(self, spec):
        # the backward kernel must be a valid conditional density in x_prev
        rng = np.random.default_rng(23)
        prev = np.concatenate(
            [rng.normal(-3, 1, (200, 1)), rng.normal(3, 1, (200, 1))]
        )
        curr = prev + rng.normal(0, 0.3, (400, 1))
        fit = fit_lkernel(LKernelStrategy.parse(spec), prev, curr, rng)
        rw_chol = np.linalg.cholesky(np.array([[0.09]]))
        grid = np.linspace(-25.0, 25.0, 50001)[:, None]
        for x_curr in (-2.9, 0.1, 3.2):
            centers = np.full_like(grid, x_curr)
            log_vals = log_lkernel_batch(fit, rw_chol, grid, centers)
            integral = np.trapezoid(np.exp(log_vals), grid[:, 0])
            assert integral == pytest.approx(1.0, abs=1e-6), (spec, x_curr)
