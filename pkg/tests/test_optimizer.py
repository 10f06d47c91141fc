"""Optimizer tests: agreement with the closed-form optimum in the
perfect-sensing case, monotone refinement, feasibility strictness, and a
brute-force fine-grid oracle."""

import math

import numpy as np
import pytest

import cogstab as cs
from cogstab import optimizer as opt


def sym(**overrides):
    base = dict(n_secondary=3, p0=1.0, q=0.5, beta=10.0, beta_p=1.0,
                r_j=1.0, r_0=1.0, r=1.0, sigma_tilde_sq=1.0, sigma0_sq=1.0,
                sigma_sq=1.0, sigma_pp_sq=1.0, p_p=1.0,
                noise=10 ** -0.5 / 10.0, pf=0.2, pe=0.3)
    base.update(overrides)
    return cs.SymmetricConfig(**base)


class TestObjectiveFns:
    def test_matches_reference_formulas(self):
        cfg = sym()
        lam = 0.3
        feasible, value, mu_p = opt._objective_fns(cfg, lam)
        rng = np.random.default_rng(17)
        for _ in range(40):
            q = float(rng.uniform(0.01, 1.0))
            p0 = float(rng.uniform(0.05, 10.0))
            probe = cfg.replace(q=q, p0=p0)
            assert mu_p(q, p0) == pytest.approx(
                cs.mu_p_imperfect_symmetric(probe), rel=1e-12)
            if feasible(q, p0):
                expected = cfg.n_secondary * cs.secondary_rate_imperfect_symmetric(probe, lam)
                assert value(q, p0) == pytest.approx(expected, rel=1e-12)


class TestPerfectSensingOptimum:
    @pytest.mark.parametrize("beta,n", [(1.0, 4), (10.0, 2), (5.0, 1), (0.7, 6)])
    def test_recovers_closed_form(self, beta, n):
        cfg = sym(beta=beta, n_secondary=n, pe=0.0, pf=0.0)
        res = opt.maximize_sum_throughput(cfg, 0.2, p0_cap=10.0, grid=(101, 41))
        q_star = cs.optimal_q_perfect(cfg)
        assert abs(res.q_opt - q_star) <= res.certificate.final_step_q + 1e-12
        assert res.p0_opt == pytest.approx(10.0, rel=1e-9)

    def test_lambda_zero_full_rectangle(self):
        cfg = sym(pe=0.4)
        res = opt.maximize_sum_throughput(cfg, 0.0, p0_cap=10.0, grid=(41, 41))
        assert math.isinf(res.box.p0_max)
        assert res.box.q_max == 1.0
        assert res.certificate.feasible_points >= 41 * 41


class TestFeasibility:
    def test_every_optimum_strictly_feasible(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            cfg = sym(pe=float(rng.uniform(0.1, 0.9)), n_secondary=int(rng.integers(1, 5)))
            lam = float(rng.uniform(0.3, 0.9)) * cs.mu_p_max(cfg)
            res = opt.maximize_sum_throughput(cfg, lam, p0_cap=10.0, grid=(61, 41))
            probe = cfg.replace(q=res.q_opt, p0=res.p0_opt)
            assert cs.mu_p_imperfect_symmetric(probe) > lam

    def test_infeasible_arrival_rate(self):
        cfg = sym()
        with pytest.raises(cs.InfeasiblePrimaryError):
            opt.maximize_sum_throughput(cfg, cs.mu_p_max(cfg), p0_cap=10.0)


class TestRefinement:
    def test_refinement_never_degrades(self):
        cfg = sym(pe=0.5)
        lam = 0.6 * cs.mu_p_max(cfg)
        values = []
        for rounds in (0, 1, 2):
            res = opt.maximize_sum_throughput(cfg, lam, p0_cap=10.0,
                                              grid=(51, 31), refine_rounds=rounds)
            values.append(res.value)
        assert values[1] >= values[0] - 1e-15
        assert values[2] >= values[1] - 1e-15

    def test_matches_brute_force_fine_grid(self):
        cfg = sym(pe=0.5, n_secondary=2)
        lam = 0.5 * cs.mu_p_max(cfg)
        res = opt.maximize_sum_throughput(cfg, lam, p0_cap=2.0, grid=(101, 101))
        feasible, value, _ = opt._objective_fns(cfg, lam)
        best = -1.0
        for q in np.arange(0.0, 1.0 + 1e-12, 1e-3):
            for p0 in np.arange(1e-3, 2.0 + 1e-12, 1e-3):
                if feasible(float(q), float(p0)):
                    best = max(best, value(float(q), float(p0)))
        assert res.value >= best * (1 - 1e-3)

    def test_certificate_reports_resolution(self):
        cfg = sym()
        res = opt.maximize_sum_throughput(cfg, 0.1, p0_cap=10.0, grid=(51, 31))
        assert res.certificate.coarse_grid == (51, 31)
        assert res.certificate.final_step_q == pytest.approx((1 / 50) / 100, rel=1e-9)
        assert res.certificate.runner_up_gap >= 0.0


class TestFeasibleBox:
    def test_box_reports_binding_constraint(self):
        cfg = sym(n_secondary=1, q=1.0, pe=0.5)
        mu_max = cs.mu_p_max(cfg)
        box = opt.feasible_box(cfg, 0.95 * mu_max, p0_cap=10.0)
        assert box.binding in ("access_prob", "power", "both")
        assert box.p0_cap <= 10.0
