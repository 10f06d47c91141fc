"""Closed-form expression tests.

Cross-checks fall into: frozen exact values, grid-search or
finite-difference oracles, reductions between regimes (sensing errors
off, relaying off), and symmetric-vs-general dual-path evaluation, which
must agree to 1e-9 relative.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cogstab as cs
from cogstab.analysis import subset_weights

RHO = 1e-9


def sym(**overrides):
    base = dict(n_secondary=4, p0=1.0, q=0.5, beta=1.0, beta_p=1.0,
                r_j=1.0, r_0=1.0, r=1.0, sigma_tilde_sq=1.0, sigma0_sq=1.0,
                sigma_sq=1.0, sigma_pp_sq=1.0, p_p=1.0, noise=0.0)
    base.update(overrides)
    return cs.SymmetricConfig(**base)


def sym_mu03_a9(n=4, q=0.5, pe=0.2):
    """mu_p_max = 0.3 with power ratio a = 9."""
    return sym(n_secondary=n, q=q, pe=pe, noise=math.log(10 / 3),
               sigma_pp_sq=1.0, p0=1.0 / 9.0)


def relay_cfg(n, p_d, snr, mu_max=0.3):
    """Relay-mode config with given decode probability, relay-link mean
    SNR (linear), and interference-free primary rate."""
    noise = 1.0
    return sym(n_secondary=n, noise=noise,
               sigma_pp_sq=-1.0 / math.log(mu_max),
               sigma_sq=-1.0 / math.log(p_d),
               sigma0_sq=1.0, p0=snr)


class TestMuPMax:
    def test_zero_noise(self):
        assert cs.mu_p_max(sym()) == 1.0

    def test_point_three(self):
        cfg = sym_mu03_a9()
        assert cs.mu_p_max(cfg) == pytest.approx(0.3, rel=1e-12)
        assert cfg.a == pytest.approx(9.0, rel=1e-12)

    def test_half(self):
        cfg = sym(noise=math.log(2), sigma_pp_sq=1.0)
        assert cs.mu_p_max(cfg) == pytest.approx(0.5, rel=1e-12)


class TestPerfectSensing:
    def test_q_zero_never_transmits(self):
        assert cs.secondary_rate_perfect_symmetric(sym(q=0.0), 0.0) == 0.0

    def test_sole_noiseless_user(self):
        assert cs.secondary_rate_perfect_symmetric(sym(n_secondary=1, q=1.0), 0.0) == 1.0

    def test_four_node_frozen_value(self):
        got = cs.secondary_rate_perfect_symmetric(sym(), 0.0)
        assert got == pytest.approx(0.5 * 0.75 ** 3, rel=1e-12)

    def test_unstable_rejected(self):
        cfg = sym_mu03_a9()
        with pytest.raises(cs.UnstableError):
            cs.secondary_rate_perfect_symmetric(cfg, 0.31)

    def test_region_matches_symmetric_at_n1_and_n2(self):
        for n in (1, 2):
            cfg = sym(n_secondary=n, q=0.3, beta=2.0, noise=0.2)
            lam = 0.1
            general = cs.secondary_region_perfect_asymmetric(cfg.expand(), lam)
            closed = cs.secondary_rate_perfect_symmetric(cfg, lam)
            for g in general:
                assert g == pytest.approx(closed, rel=RHO)

    def test_region_respects_idle_fraction_bound(self):
        cfg = sym(n_secondary=3, q=0.9, noise=0.5)
        lam = 0.2
        cap = 1.0 - lam / cs.mu_p_max(cfg)
        for g in cs.secondary_region_perfect_asymmetric(cfg.expand(), lam):
            assert 0.0 <= g <= cap + 1e-12

    def test_region_too_large(self):
        cfg = sym(n_secondary=13)
        with pytest.raises(cs.TooLargeError):
            cs.secondary_region_perfect_asymmetric(cfg.expand(), 0.0)


class TestOptimalQ:
    def test_beta_large_single_node(self):
        assert cs.optimal_q_perfect(sym(n_secondary=1, beta=1e9)) == 1.0

    @pytest.mark.parametrize("beta,n,expected", [(1.0, 4, 0.5), (10.0, 2, 0.55)])
    def test_frozen_values(self, beta, n, expected):
        assert cs.optimal_q_perfect(sym(n_secondary=n, beta=beta)) == pytest.approx(expected)

    @pytest.mark.parametrize("beta,n", [(1.0, 4), (10.0, 2), (3.0, 7), (0.5, 1)])
    def test_against_grid_search(self, beta, n):
        cfg = sym(n_secondary=n, beta=beta, noise=0.1)
        grid = np.arange(0.0, 1.0 + 1e-12, 1e-4)
        values = [cs.secondary_rate_perfect_symmetric(cfg.replace(q=float(g)), 0.0)
                  for g in grid]
        best = grid[int(np.argmax(values))]
        assert abs(cs.optimal_q_perfect(cfg) - best) <= 1e-4 + 1e-12


class TestSubsetWeights:
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_weights_partition_unity(self, probs):
        total = math.fsum(w for _, w in subset_weights(probs))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_weights_partition_on_submask(self):
        probs = [0.3, 0.6, 0.9]
        total = math.fsum(w for _, w in subset_weights(probs, universe=0b101))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestImperfectPrimary:
    def test_symmetric_frozen_value(self):
        cfg = sym_mu03_a9(n=4)
        assert cs.mu_p_imperfect_symmetric(cfg) == pytest.approx(0.3 * 0.99 ** 4, rel=1e-12)

    def test_pe_zero_recovers_max(self):
        cfg = sym_mu03_a9(pe=0.0)
        assert cs.mu_p_imperfect_symmetric(cfg) == pytest.approx(cs.mu_p_max(cfg), rel=1e-12)
        assert cs.mu_p_imperfect_general(cfg.expand()) == pytest.approx(
            cs.mu_p_max(cfg), rel=1e-12)

    def test_q_zero_recovers_max(self):
        cfg = sym_mu03_a9(q=0.0)
        assert cs.mu_p_imperfect_general(cfg.expand()) == pytest.approx(
            cs.mu_p_max(cfg), rel=1e-12)

    def test_general_matches_symmetric(self):
        cfg = sym_mu03_a9(n=3)
        assert cs.mu_p_imperfect_general(cfg.expand()) == pytest.approx(
            cs.mu_p_imperfect_symmetric(cfg), rel=RHO)

    def test_general_matches_collapsed_form(self):
        # Node i interferes in a busy slot iff it misdetects and accesses:
        # the double subset sum must agree with the single sum over
        # transmit sets weighted by pe_i*q_i.
        cfg = sym_mu03_a9(n=3).expand()
        cfg = cfg.replace(miss_probs=(0.1, 0.5, 0.9), access_probs=(0.2, 0.6, 1.0),
                          secondary_powers=(0.5, 1.0, 2.0))
        combo = [p * q for p, q in zip(cfg.miss_probs, cfg.access_probs)]
        expected = 0.0
        for t_mask, w in subset_weights(combo):
            chosen = [cfg.rx_sec_at_dp(i) for i in range(3) if t_mask >> i & 1]
            expected += w * cs.sinr_success_probability(
                cfg.rx_primary_at_dp(), cfg.primary_threshold, cfg.noise_power, chosen)
        assert cs.mu_p_imperfect_general(cfg) == pytest.approx(expected, rel=1e-12)

    def test_strictly_below_max_unless_silent(self):
        cfg = sym_mu03_a9(n=3).expand()
        assert cs.mu_p_imperfect_general(cfg) < cs.mu_p_max(cfg)
        silent = cfg.replace(miss_probs=(0.0, 0.5, 0.3), access_probs=(0.7, 0.0, 0.0))
        assert cs.mu_p_imperfect_general(silent) == pytest.approx(cs.mu_p_max(cfg), rel=1e-12)

    def test_proposition_limits(self):
        base = sym_mu03_a9(n=4)
        mu_max = cs.mu_p_max(base)

        def with_a(cfg, a):
            # a scales as 1/p0 with everything else fixed.
            return cfg.replace(p0=cfg.p0 * cfg.a / a)

        # a -> infinity: full service rate.
        assert cs.mu_p_imperfect_symmetric(with_a(base, 1e8)) == pytest.approx(
            mu_max, rel=1e-6)
        # a -> 0 at fixed primary power (secondary power to infinity).
        assert cs.mu_p_imperfect_symmetric(with_a(base, 1e-8)) == pytest.approx(
            mu_max * (1 - base.q * base.pe) ** base.n_secondary, rel=1e-6)
        # q -> 0.
        assert cs.mu_p_imperfect_symmetric(base.replace(q=1e-8)) == pytest.approx(
            mu_max, rel=1e-6)
        # q -> 1.
        assert cs.mu_p_imperfect_symmetric(base.replace(q=1.0)) == pytest.approx(
            mu_max * (1 - base.pe / (base.a + 1)) ** base.n_secondary, rel=1e-6)

    def test_monotone_in_a_and_q(self):
        base = sym_mu03_a9(n=4)
        for a_lo, a_hi in [(0.5, 1.0), (2.0, 5.0), (9.0, 20.0)]:
            lo = cs.mu_p_imperfect_symmetric(base.replace(p0=base.p0 * base.a / a_lo))
            hi = cs.mu_p_imperfect_symmetric(base.replace(p0=base.p0 * base.a / a_hi))
            assert hi > lo
        for q_lo, q_hi in [(0.1, 0.2), (0.5, 0.7), (0.8, 1.0)]:
            assert (cs.mu_p_imperfect_symmetric(base.replace(q=q_hi))
                    < cs.mu_p_imperfect_symmetric(base.replace(q=q_lo)))


class TestProtectionConstraints:
    def test_unbounded_power_branch(self):
        cfg = sym_mu03_a9(n=4)
        safe = cs.mu_p_max(cfg) * (1 - cfg.q * cfg.pe) ** 4
        pc = cs.protection_constraints(cfg, 0.9 * safe)
        assert math.isinf(pc.p0_max)
        assert pc.a_min == 0.0
        assert not pc.p0_max_binding

    def test_qmax_frozen_value(self):
        cfg = sym_mu03_a9(n=1)
        pc = cs.protection_constraints(cfg, 0.297)
        assert pc.q_max == pytest.approx(0.5, rel=1e-9)
        assert pc.q_max_binding

    def test_pe_zero_unconstrained(self):
        cfg = sym_mu03_a9(pe=0.0)
        for lam in (0.1, 0.25, 0.29):
            pc = cs.protection_constraints(cfg, lam)
            assert pc.q_max == 1.0
            assert math.isinf(pc.p0_max)

    def test_infeasible(self):
        with pytest.raises(cs.InfeasiblePrimaryError):
            cs.protection_constraints(sym_mu03_a9(), 0.3)

    @given(
        lam_frac=st.floats(0.02, 0.98),
        pe=st.floats(0.05, 1.0),
        a=st.floats(0.1, 40.0),
        n=st.integers(1, 10),
    )
    @settings(max_examples=200, deadline=None)
    def test_binding_qmax_inverts_service_rate(self, lam_frac, pe, a, n):
        cfg = sym_mu03_a9(n=n, pe=pe, q=1.0)
        cfg = cfg.replace(p0=cfg.p0 * cfg.a / a)
        lam = lam_frac * cs.mu_p_max(cfg)
        pc = cs.protection_constraints(cfg, lam)
        if pc.q_max_binding and pc.q_max < 1.0:
            back = cs.mu_p_imperfect_symmetric(cfg.replace(q=pc.q_max))
            assert back == pytest.approx(lam, rel=1e-9)


class TestImperfectSecondary:
    def test_reduces_to_perfect(self):
        cfg = sym(pe=0.0, pf=0.0, noise=0.3)
        lam = 0.2
        assert cs.secondary_rate_imperfect_symmetric(cfg, lam) == pytest.approx(
            cs.secondary_rate_perfect_symmetric(cfg, lam), rel=1e-12)

    def test_lambda_zero_scales_by_false_alarm(self):
        cfg = sym(pe=0.3, pf=0.25, noise=0.3, n_secondary=1)
        perfect = cs.secondary_rate_perfect_symmetric(cfg.replace(pe=0.0, pf=0.0), 0.0)
        got = cs.secondary_rate_imperfect_symmetric(cfg, 0.0)
        assert got == pytest.approx(perfect * (1 - cfg.pf), rel=1e-12)

    def test_frozen_two_term_value(self):
        # N=1, q=1, beta=10, Pf=0.2, Pe=0.5, primary-interference factor
        # 0.1, no noise attenuation, busy share one half.
        cfg = sym(n_secondary=1, q=1.0, beta=10.0, pe=0.5, pf=0.2,
                  sigma_pd_sq=0.01, r_pd=1.0, sigma0_sq=1.0, beta_p=1.0,
                  sigma_pp_sq=1.0, p_p=1.0, p0=1.0, noise=0.0)
        assert cfg.primary_busy_interference == pytest.approx(0.1, rel=1e-12)
        mu_p = cs.mu_p_imperfect_symmetric(cfg)
        lam = 0.5 * mu_p
        got = cs.secondary_rate_imperfect_symmetric(cfg, lam)
        assert got == pytest.approx(0.5 * 0.8 + 0.5 * 0.5 / 1.1, rel=1e-12)

    def test_general_matches_symmetric(self):
        cfg = sym(n_secondary=3, q=0.4, beta=2.0, pe=0.3, pf=0.2, noise=0.2,
                  sigma_pd_sq=0.5)
        lam = 0.3 * cs.mu_p_imperfect_symmetric(cfg)
        general = cs.secondary_rate_imperfect_general(cfg.expand(), lam)
        closed = cs.secondary_rate_imperfect_symmetric(cfg, lam)
        for g in general:
            assert g == pytest.approx(closed, rel=RHO)

    def test_general_reductions(self):
        cfg = sym(n_secondary=3, q=0.4, noise=0.2).expand()
        assert cs.secondary_rate_imperfect_general(
            cfg.replace(access_probs=(0.0,) * 3), 0.1) == [0.0] * 3
        lam = 0.1
        perfect = cs.secondary_region_perfect_asymmetric(cfg, lam)
        imperfect = cs.secondary_rate_imperfect_general(cfg, lam)
        for a, b in zip(perfect, imperfect):
            assert a == pytest.approx(b, rel=1e-12)


class TestRelay:
    def test_decode_prob_values(self):
        assert cs.relay_decode_prob(sym()) == 1.0  # zero noise
        assert cs.relay_decode_prob(relay_cfg(2, 0.3, 1.0)) == pytest.approx(0.3, rel=1e-12)
        assert cs.relay_decode_prob(relay_cfg(2, 0.9, 1.0)) == pytest.approx(0.9, rel=1e-12)

    def test_relay_success_frozen_values(self):
        cfg = relay_cfg(1, 0.5, 1.0)
        assert cs.relay_success_prob(cfg) == pytest.approx(math.exp(-1), rel=1e-12)
        cfg2 = relay_cfg(2, 0.9, 1.0)
        assert cs.relay_success_prob(cfg2) == pytest.approx(
            0.1 * math.exp(-1) + 0.9 * (2 / math.e), rel=1e-12)

    def test_relay_success_monotone_in_n(self):
        # SNR kept low enough that the tail stays below 1.0 in double
        # precision through N=20, so strict increase is observable.
        rng = np.random.default_rng(3)
        for _ in range(20):
            p_d = float(rng.uniform(0.2, 0.9))
            snr = float(10 ** rng.uniform(math.log10(0.05), math.log10(0.5)))
            values = [cs.relay_success_prob(relay_cfg(n, p_d, snr)) for n in range(1, 21)]
            assert all(b > a for a, b in zip(values, values[1:]))
            assert values[-1] <= 1.0

    def test_mu_p_relay_values(self):
        assert cs.mu_p_relay(relay_cfg(3, 1e-300, 1.0)) == pytest.approx(0.3, rel=1e-6)
        cfg = relay_cfg(2, 0.9, 1.0)
        assert cs.mu_p_relay(cfg) == pytest.approx(0.993, rel=1e-12)
        assert cs.mu_p_relay(relay_cfg(200, 0.5, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_mu_p_relay_dominates_max(self):
        for n in (1, 3, 8):
            cfg = relay_cfg(n, 0.4, 0.5)
            assert cs.mu_p_relay(cfg) > cs.mu_p_max(cfg)

    def test_lambda_p_max_zero_decode(self):
        cfg = sym(noise=math.log(10 / 3), sigma_pp_sq=1.0, sigma_sq=1e-300)
        assert cs.relay_decode_prob(cfg) == pytest.approx(0.0, abs=1e-12)
        assert cs.lambda_p_max_relay(cfg) == pytest.approx(0.3, rel=1e-9)

    def test_one_node_relaying_beats_non_relaying_at_0db(self):
        for p_d in (0.3, 0.9):
            cfg = relay_cfg(1, p_d, 1.0)
            assert cs.lambda_p_max_relay(cfg) > 0.3

    def test_relay_threshold_crossings(self):
        # The relayed bound exceeds the non-relaying rate 0.3 at some
        # finite N for each relay-link SNR.
        for snr_db in (-10.0, -5.0, 0.0):
            for p_d in (0.3, 0.9):
                snr = 10 ** (snr_db / 10)
                crossed = [n for n in range(1, 21)
                           if cs.lambda_p_max_relay(relay_cfg(n, p_d, snr)) > 0.3]
                assert crossed, f"no crossing for snr={snr_db} dB, p_d={p_d}"

    def test_benefit_equivalence_single_node(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            p_d = float(rng.uniform(0.05, 0.95))
            snr = float(10 ** rng.uniform(-1, 1))
            mu_max = float(rng.uniform(0.05, 0.95))
            cfg = relay_cfg(1, p_d, snr, mu_max=mu_max)
            bound = min(cs.lambda_p_max_relay(cfg), cs.mu_p_max(cfg))
            lam = float(rng.uniform(0.05, 0.95)) * bound
            if lam <= 0:
                continue
            primary, secondary = cs.relay_benefit_conditions(cfg, lam)
            assert primary == secondary
            assert primary == (cs.mu_p_max(cfg) < cs.relay_success_prob(cfg))

    def test_benefit_boundary_equal_links(self):
        # Equal average received SNR on the relay and primary links: the
        # strict inequality fails on both sides.
        cfg = relay_cfg(1, 0.5, 1.0, mu_max=math.exp(-1))
        assert cs.relay_success_prob(cfg) == pytest.approx(cs.mu_p_max(cfg), rel=1e-12)
        primary, secondary = cs.relay_benefit_conditions(cfg, 0.1)
        assert (primary, secondary) == (False, False)

    def test_secondary_rate_relay_reductions(self):
        cfg = relay_cfg(3, 0.4, 2.0)
        # Arrival rate zero: relay queues idle, matches perfect sensing.
        assert cs.secondary_rate_relay(cfg, 0.0) == pytest.approx(
            cs.secondary_rate_perfect_symmetric(cfg, 0.0), rel=1e-12)
        # No decoding possible: matches the non-relaying formula.
        no_decode = cfg.replace(sigma_sq=1e-300)
        lam = 0.2
        assert cs.secondary_rate_relay(no_decode, lam) == pytest.approx(
            cs.secondary_rate_perfect_symmetric(no_decode, lam), rel=1e-9)

    def test_secondary_rate_relay_unstable(self):
        cfg = relay_cfg(2, 0.9, 1.0)
        with pytest.raises(cs.UnstableError):
            cs.secondary_rate_relay(cfg, cs.lambda_p_max_relay(cfg) * 1.01)


class TestRelayAsymmetric:
    def test_symmetric_reduction(self):
        for n in range(1, 7):
            cfg = relay_cfg(n, 0.35, 0.8)
            rep = cs.relay_asymmetric(cfg.expand())
            p_s = cs.relay_success_prob(cfg)
            for v in rep.relay_success_probs:
                assert v == pytest.approx(p_s, rel=RHO)
            assert rep.lambda_p_max == pytest.approx(cs.lambda_p_max_relay(cfg), rel=RHO)
            assert rep.mu_p == pytest.approx(cs.mu_p_relay(cfg), rel=RHO)

    def test_single_node_reduction(self):
        cfg = relay_cfg(1, 0.6, 1.5)
        rep = cs.relay_asymmetric(cfg.expand())
        assert rep.lambda_p_max == pytest.approx(cs.lambda_p_max_relay(cfg), rel=RHO)

    def test_success_prob_nondecreasing_with_extra_node(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            base = relay_cfg(n, 0.5, 1.0).expand()
            powers = tuple(float(rng.uniform(0.3, 3.0)) for _ in range(n))
            base = base.replace(secondary_powers=powers,
                                fade_p_src=tuple(float(rng.uniform(0.2, 2.0))
                                                 for _ in range(n)))
            grown_cfg = relay_cfg(n + 1, 0.5, 1.0).expand()
            grown = grown_cfg.replace(
                secondary_powers=powers + (float(rng.uniform(0.3, 3.0)),),
                fade_p_src=base.fade_p_src + (float(rng.uniform(0.2, 2.0)),))
            r_base = cs.relay_asymmetric(base)
            r_grown = cs.relay_asymmetric(grown)
            for j in range(n):
                assert r_grown.relay_success_probs[j] >= r_base.relay_success_probs[j] - 1e-12

    def test_too_large(self):
        with pytest.raises(cs.TooLargeError):
            cs.relay_asymmetric(relay_cfg(13, 0.5, 1.0).expand())


class TestAnalyticalReport:
    def test_perfect_config_report(self):
        cfg = sym_mu03_a9(pe=0.0)
        rep = cs.analytical_report(cfg, 0.1)
        assert rep.mu_p == pytest.approx(rep.mu_p_max, rel=1e-12)
        assert rep.primary_stable
        assert rep.idle_fraction == pytest.approx(1 - 0.1 / 0.3, rel=1e-12)
        assert len(rep.secondary_rates) == cfg.n_secondary

    def test_infeasible_raises(self):
        with pytest.raises(cs.InfeasiblePrimaryError):
            cs.analytical_report(sym_mu03_a9(), 0.35)

    def test_relay_report_serializes_with_sentinel(self):
        cfg = sym_mu03_a9(pe=0.0)
        rep = cs.analytical_report(cfg, 0.1)
        d = rep.to_dict()
        assert d["constraints"]["p0_max"] == "unbounded"

    def test_relay_lifts_mu(self):
        cfg = relay_cfg(2, 0.9, 1.0)
        rep = cs.analytical_report(cfg, 0.25, relay=True)
        assert rep.mu_p >= rep.mu_p_max
        assert rep.relay.lambda_p_max > 0.3
