"""The analytic-vs-simulation cross-check battery and property suites.

The standard battery runs a fixed set of configurations spanning all
three operating modes, simulates each, and requires every simulated rate
to sit within four Monte Carlo standard errors of its closed-form
counterpart, alongside analytic property suites (limits, monotonicity,
benefit equivalence, constraint inversion, optimizer sanity, asymmetric
reduction, canned-sweep limit shapes). The extended battery adds the
perfect-sensing independence grid, relay stability probes around the
analytic bound, and simulated constraint-boundary runs.

Closed forms are compared where they are exact for the simulated
protocol. One deliberate exception is documented throughout: the
relaying-queue service analysis treats the co-holder count of a relayed
packet as resampled per packet, while the protocol freezes it at decode
time, so the queue bound and relay-discounted throughput are exact only
for a single secondary node (or degenerate holder counts). Relay-queue
checks therefore run at N=1, where they are identities; the service-rate
lift from relaying is exact for every N and is checked at several.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .config import NetworkConfig, SymmetricConfig
from .errors import UnstableError
from .optimizer import maximize_sum_throughput
from .simulator import (
    MODE_IMPERFECT,
    MODE_PERFECT,
    MODE_RELAY,
    VERDICT_STABLE,
    VERDICT_UNSTABLE,
    SimConfig,
    SimResult,
    run_replications,
    stability_probe,
)
from .sweeps import load_spec, run_sweep

DEFAULT_SEED = 20240811
DEFAULT_SLOTS = 1_000_000


@dataclass(frozen=True)
class Check:
    """One named pass/fail outcome with a human-readable detail line."""

    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}\t{self.name}\t{self.detail}"


def _check_close(name: str, got: float, expected: float, tol: float) -> Check:
    ok = abs(got - expected) <= tol
    return Check(name, ok, f"got={got:.6g} expected={expected:.6g} tol={tol:.3g}")


def _check_rel(name: str, got: float, expected: float, rtol: float) -> Check:
    denom = max(abs(expected), 1e-300)
    ok = abs(got - expected) / denom <= rtol
    return Check(name, ok, f"got={got:.12g} expected={expected:.12g} rtol={rtol:.1e}")


def _check_true(name: str, ok: bool, detail: str = "") -> Check:
    return Check(name, bool(ok), detail)


# --- battery configurations ----------------------------------------------


def _sym(**overrides) -> SymmetricConfig:
    base = dict(n_secondary=1, p0=1.0, q=0.5, beta=1.0, beta_p=1.0,
                r_j=1.0, r_0=1.0, r=1.0, sigma_tilde_sq=1.0, sigma0_sq=1.0,
                sigma_sq=1.0, sigma_pp_sq=1.0, p_p=1.0, noise=0.0)
    base.update(overrides)
    return SymmetricConfig(**base)


def _sym_mu03_a9(n: int, q=0.5, pe=0.2, pf=0.2, sigma_tilde_sq=40.0) -> SymmetricConfig:
    """Interference-free primary rate 0.3 with power ratio a = 9."""
    return _sym(n_secondary=n, q=q, pe=pe, pf=pf, noise=math.log(10 / 3),
                p0=1 / 9, sigma_tilde_sq=sigma_tilde_sq)


def _relay(n: int, p_d: float, snr: float, mu_max=0.3) -> SymmetricConfig:
    return _sym(n_secondary=n, p0=snr, noise=1.0, sigma0_sq=1.0,
                sigma_sq=-1.0 / math.log(p_d), sigma_pp_sq=-1.0 / math.log(mu_max),
                sigma_tilde_sq=8.0)


def _asym_perfect() -> NetworkConfig:
    net = _sym(n_secondary=3, noise=0.4, sigma_tilde_sq=2.0).expand()
    return net.replace(
        secondary_powers=(0.5, 1.0, 2.0),
        access_probs=(0.3, 0.6, 0.9),
        secondary_thresholds=(1.0, 2.0, 0.5),
        dist_sec_p=(1.0, 1.5, 2.0),
        fade_sec_sec=((2.0, 1.0, 0.5), (1.0, 2.0, 1.0), (0.5, 1.0, 2.0)),
    )


def _asym_imperfect() -> NetworkConfig:
    return _asym_perfect().replace(
        miss_probs=(0.1, 0.3, 0.5),
        false_alarm_probs=(0.1, 0.2, 0.3),
        fade_p_sec=(0.2, 0.5, 1.0),
    )


@dataclass(frozen=True)
class BatteryCase:
    """One configuration of the equivalence battery."""

    name: str
    config: SymmetricConfig | NetworkConfig
    mode: str
    lambda_p: float | Callable[[SymmetricConfig | NetworkConfig], float]
    checks: tuple[str, ...]  # subset of: mu_p, lambda_j, idle, relay_queue

    def arrival_rate(self) -> float:
        if callable(self.lambda_p):
            return self.lambda_p(self.config)
        return self.lambda_p


def battery_cases() -> list[BatteryCase]:
    """The standard equivalence battery: >= 12 configurations spanning
    perfect sensing, imperfect sensing, and relaying."""
    busy_cfg = _sym_mu03_a9(2, q=0.8, pe=0.5, sigma_tilde_sq=40.0).replace(sigma_pd_sq=0.4)
    return [
        BatteryCase("perfect-n1", _sym(n_secondary=1, q=1.0, noise=math.log(2),
                                       sigma_tilde_sq=2.0),
                    MODE_PERFECT, 0.2, ("mu_p", "lambda_j", "idle")),
        BatteryCase("perfect-n4-noiseless", _sym(n_secondary=4, q=0.5),
                    MODE_PERFECT, 0.0, ("lambda_j", "idle")),
        BatteryCase("perfect-n2", _sym(n_secondary=2, q=0.35, beta=2.0,
                                       noise=math.log(1 / 0.6), sigma_tilde_sq=3.0),
                    MODE_PERFECT, 0.3, ("mu_p", "lambda_j", "idle")),
        BatteryCase("perfect-n3-asymmetric", _asym_perfect(),
                    MODE_PERFECT, 0.1, ("mu_p", "lambda_j", "idle")),
        BatteryCase("imperfect-a9-n1", _sym_mu03_a9(1),
                    MODE_IMPERFECT, 0.2, ("mu_p", "lambda_j", "idle")),
        BatteryCase("imperfect-a9-n4", _sym_mu03_a9(4),
                    MODE_IMPERFECT, 0.25, ("mu_p", "lambda_j", "idle")),
        BatteryCase("imperfect-a9-n4-saturated", _sym_mu03_a9(4),
                    MODE_IMPERFECT, 1.0, ("mu_p",)),
        BatteryCase("imperfect-n3-asymmetric", _asym_imperfect(),
                    MODE_IMPERFECT, 0.15, ("mu_p", "lambda_j", "idle")),
        BatteryCase("imperfect-busy-term", busy_cfg, MODE_IMPERFECT,
                    lambda cfg: 0.7 * analysis.mu_p_imperfect_symmetric(cfg),
                    ("mu_p", "lambda_j", "idle")),
        BatteryCase("relay-n1-snr0-pd03", _relay(1, 0.3, 1.0),
                    MODE_RELAY, 0.25, ("mu_p", "lambda_j", "idle", "relay_queue")),
        BatteryCase("relay-n1-snrm5-pd09", _relay(1, 0.9, 10 ** -0.5),
                    MODE_RELAY, 0.03, ("mu_p", "lambda_j", "idle", "relay_queue")),
        BatteryCase("relay-n3-pd09-snr0", _relay(3, 0.9, 1.0),
                    MODE_RELAY, 0.3, ("mu_p", "idle")),
        BatteryCase("relay-n4-pd03-snr0", _relay(4, 0.3, 1.0),
                    MODE_RELAY, 0.2, ("mu_p", "idle")),
    ]


def _analytic_mu(case: BatteryCase) -> float:
    cfg = case.config
    if case.mode == MODE_PERFECT:
        return analysis.mu_p_max(cfg)
    if case.mode == MODE_RELAY:
        return analysis.mu_p_relay(cfg)
    if isinstance(cfg, SymmetricConfig):
        return analysis.mu_p_imperfect_symmetric(cfg)
    return analysis.mu_p_imperfect_general(cfg)


def _analytic_lambda_j(case: BatteryCase, lam: float) -> list[float]:
    cfg = case.config
    if case.mode == MODE_RELAY:
        return [analysis.secondary_rate_relay(cfg, lam)] * cfg.n_secondary
    if isinstance(cfg, SymmetricConfig):
        if case.mode == MODE_PERFECT:
            return [analysis.secondary_rate_perfect_symmetric(cfg, lam)] * cfg.n_secondary
        return [analysis.secondary_rate_imperfect_symmetric(cfg, lam)] * cfg.n_secondary
    if case.mode == MODE_PERFECT:
        return analysis.secondary_region_perfect_asymmetric(cfg, lam)
    return analysis.secondary_rate_imperfect_general(cfg, lam)


def evaluate_case(case: BatteryCase, slots: int, seed: int, jobs: int = 1) -> list[Check]:
    """Simulate one battery configuration and compare against the closed
    forms, each at four standard errors."""
    cfg = case.config
    net = cfg.expand() if isinstance(cfg, SymmetricConfig) else cfg
    lam = case.arrival_rate()
    sc = SimConfig(network=net, lambda_p=lam, n_slots=slots, seed=seed, mode=case.mode)
    res = run_replications(sc, 1, jobs=jobs)
    out: list[Check] = []
    prefix = f"battery/{case.name}"
    out.append(_check_true(f"{prefix}/conservation", res.conservation_holds(),
                           f"arrivals={res.arrivals_total}"))
    if "mu_p" in case.checks:
        expected = _analytic_mu(case)
        tol = 4 * (res.mu_p_stderr or float("inf"))
        out.append(_check_close(f"{prefix}/primary-service-rate",
                                res.empirical_mu_p, expected, tol))
    if "lambda_j" in case.checks:
        expected_j = _analytic_lambda_j(case, lam)
        for j, (got, se, expected) in enumerate(
                zip(res.empirical_lambda_j, res.lambda_j_stderr, expected_j)):
            tol = 4 * se if math.isfinite(se) and se > 0 else 1e-12
            out.append(_check_close(f"{prefix}/secondary-rate-node{j}",
                                    got, expected, tol))
    if "idle" in case.checks:
        mu = _analytic_mu(case)
        expected = 1.0 - lam / mu
        se = res.idle_fraction_stderr
        tol = 4 * se if math.isfinite(se) and se > 0 else 1e-12
        out.append(_check_close(f"{prefix}/idle-fraction", res.idle_fraction,
                                expected, tol))
    if "relay_queue" in case.checks:
        lam_ext, mu_ext = analysis.relay_queue_load(cfg, lam)
        p_s = analysis.relay_success_prob(cfg)
        got = res.relay_arrival_rates[0]
        se = res.relay_arrival_stderr[0]
        out.append(_check_close(f"{prefix}/relay-queue-arrival-rate", got, lam_ext, 4 * se))
        attempts = res.relay_attempt_slots
        if attempts:
            se_ps = math.sqrt(p_s * (1 - p_s) / attempts)
            out.append(_check_close(f"{prefix}/relay-success-per-attempt",
                                    res.relay_success_given_attempt, p_s, 4 * se_ps))
        fse = res.relay_attempt_fraction_stderr
        out.append(_check_close(f"{prefix}/relay-idle-slot-consumption",
                                res.relay_attempt_fraction, lam_ext / p_s, 4 * fse))
        # The two rates above combine into the queue-load ratio, i.e. the
        # stability margin of the relaying queue.
        out.append(_check_true(
            f"{prefix}/relay-queue-load-below-one",
            res.relay_attempt_fraction < res.idle_fraction,
            f"consumed={res.relay_attempt_fraction:.4f} idle={res.idle_fraction:.4f}"))
    return out


def equivalence_battery_checks(slots: int = DEFAULT_SLOTS, seed: int = DEFAULT_SEED,
                               jobs: int = 1,
                               progress: Callable[[str], None] | None = None) -> list[Check]:
    checks: list[Check] = []
    for i, case in enumerate(battery_cases()):
        if progress:
            progress(f"battery case {case.name}")
        checks.extend(evaluate_case(case, slots, seed + i, jobs))
    return checks


# --- analytic property suites ---------------------------------------------


def service_rate_limit_checks() -> list[Check]:
    """Extreme-parameter limits of the imperfect-sensing service rate."""
    base = _sym_mu03_a9(4)
    mu_max = analysis.mu_p_max(base)
    out = []

    def with_a(a):
        return base.replace(p0=base.p0 * base.a / a)

    out.append(_check_rel("limits/power-ratio-large",
                          analysis.mu_p_imperfect_symmetric(with_a(1e8)), mu_max, 1e-6))
    out.append(_check_rel("limits/power-ratio-small",
                          analysis.mu_p_imperfect_symmetric(with_a(1e-8)),
                          mu_max * (1 - base.q * base.pe) ** 4, 1e-6))
    out.append(_check_rel("limits/access-prob-zero",
                          analysis.mu_p_imperfect_symmetric(base.replace(q=1e-8)),
                          mu_max, 1e-6))
    out.append(_check_rel("limits/access-prob-one",
                          analysis.mu_p_imperfect_symmetric(base.replace(q=1.0)),
                          mu_max * (1 - base.pe / (base.a + 1)) ** 4, 1e-6))
    return out


def sweep_limit_checks() -> list[Check]:
    """Shape limits of the canned power and node-count sweeps."""
    out = []
    rows1 = run_sweep(load_spec("fig1"))
    by_metric: dict[str, list] = {}
    for r in rows1:
        by_metric.setdefault(r.metric_name, []).append(r)
    for metric, rows in sorted(by_metric.items()):
        rows = sorted(rows, key=lambda r: r.axis_value)
        label = metric.split("@", 1)[1]
        n = 2 if "N=2" in label else 5
        pe = 0.1 if "pe=0.1" in label else 0.3
        expected = (1 - 0.5 * pe) ** n
        out.append(_check_close(f"sweep-limits/power-to-infinity[{label}]",
                                rows[-1].value, expected, 1e-3))
    rows2 = run_sweep(load_spec("fig2"))
    strong = sorted((r for r in rows2 if r.metric_name.endswith("pe=0.5 a=0.1")),
                    key=lambda r: r.axis_value)
    out.append(_check_true("sweep-limits/node-count-to-zero",
                           strong[-1].value < 1e-3,
                           f"value at N=50: {strong[-1].value:.3g}"))
    values = [r.value for r in strong]
    out.append(_check_true("sweep-limits/node-count-monotone",
                           all(b < a for a, b in zip(values, values[1:])), ""))
    return out


def relay_success_growth_checks(seed: int = DEFAULT_SEED, draws: int = 50) -> list[Check]:
    """Joint relay success strictly grows with the population and tends
    to certainty."""
    rng = np.random.default_rng(seed)
    out = []
    worst_gap = math.inf
    all_monotone = True
    all_saturate = True
    for _ in range(draws):
        # Ranges keep the joint success away from exact 1.0 in double
        # precision up to N=19, so strictness is testable, while still
        # reachable above 0.999 at a feasible population.
        p_d = float(rng.uniform(0.2, 0.9))
        snr = float(10 ** rng.uniform(math.log10(0.05), math.log10(0.5)))
        cfg = _relay(1, p_d, snr)
        values = [analysis.relay_success_prob(cfg.replace(n_secondary=n))
                  for n in range(1, 20)]
        gaps = [b - a for a, b in zip(values, values[1:])]
        all_monotone &= all(g > 0 for g in gaps)
        worst_gap = min(worst_gap, min(gaps))
        n, ps = 19, values[-1]
        while ps <= 0.999 and n < 1000:
            n *= 2
            ps = analysis.relay_success_prob(cfg.replace(n_secondary=min(n, 1000)))
        all_saturate &= ps > 0.999
    out.append(_check_true("relay-growth/strictly-increasing", all_monotone,
                           f"worst increment {worst_gap:.3g}"))
    out.append(_check_true("relay-growth/saturates-above-0.999", all_saturate, ""))
    return out


def benefit_equivalence_checks(seed: int = DEFAULT_SEED, draws: int = 200) -> list[Check]:
    """With one secondary node, primary and secondary relaying benefits
    coincide and equal the link-quality comparison."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    predicate_mismatches = 0
    for _ in range(draws):
        p_d = float(rng.uniform(0.05, 0.95))
        snr = float(10 ** rng.uniform(-1, 1))
        mu_max = float(rng.uniform(0.05, 0.95))
        cfg = _relay(1, p_d, snr, mu_max=mu_max)
        bound = min(analysis.lambda_p_max_relay(cfg), analysis.mu_p_max(cfg))
        lam = float(rng.uniform(0.05, 0.95)) * bound
        if lam <= 0:
            continue
        primary, secondary = analysis.relay_benefit_conditions(cfg, lam)
        if primary != secondary:
            mismatches += 1
        if primary != (analysis.mu_p_max(cfg) < analysis.relay_success_prob(cfg)):
            predicate_mismatches += 1
    return [
        _check_true("benefit/one-node-booleans-agree", mismatches == 0,
                    f"{mismatches}/{draws} mismatches"),
        _check_true("benefit/one-node-predicate", predicate_mismatches == 0,
                    f"{predicate_mismatches}/{draws} mismatches"),
    ]


def constraint_boundary_checks(seed: int = DEFAULT_SEED, draws: int = 100) -> list[Check]:
    """Substituting a binding access-probability bound back into the
    service-rate formula recovers the arrival rate to 1e-9 relative."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    tested = 0
    for _ in range(draws):
        n = int(rng.integers(1, 7))
        pe = float(rng.uniform(0.2, 1.0))
        a = float(rng.uniform(0.5, 20.0))
        cfg = _sym_mu03_a9(n, q=1.0, pe=pe)
        cfg = cfg.replace(p0=cfg.p0 * cfg.a / a)
        mu_max = analysis.mu_p_max(cfg)
        floor = mu_max * (1 - pe / (a + 1)) ** n
        lam = floor + float(rng.uniform(0.05, 0.95)) * (mu_max - floor)
        pc = analysis.protection_constraints(cfg, lam)
        if not (pc.q_max_binding and pc.q_max < 1.0):
            continue
        tested += 1
        back = analysis.mu_p_imperfect_symmetric(cfg.replace(q=pc.q_max))
        worst = max(worst, abs(back - lam) / lam)
    return [
        _check_true("constraint-boundary/inversion-1e-9", worst <= 1e-9 and tested >= draws // 2,
                    f"worst rel err {worst:.2e} over {tested} binding draws"),
    ]


def constraint_boundary_sim_checks(seed: int = DEFAULT_SEED, samples: int = 6,
                                   slots: int = 600_000, jobs: int = 1,
                                   progress: Callable[[str], None] | None = None) -> list[Check]:
    """Simulated runs just inside / outside a binding access bound.

    Inside (0.95 of the bound) must be stable; outside (1.05, when it is
    a valid probability) must never be stable. Draws are filtered to
    cases where the inside margin is resolvable at the given run length
    (a 5% backoff from a binding bound only moves the service rate by a
    few thousandths, so draws favor strong per-node interference).
    """
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    found = 0
    attempts = 0
    while found < samples and attempts < 400:
        attempts += 1
        n = int(rng.integers(2, 6))
        pe = float(rng.uniform(0.6, 1.0))
        a = float(rng.uniform(0.2, 3.0))
        cfg = _sym_mu03_a9(n, q=1.0, pe=pe)
        cfg = cfg.replace(p0=cfg.p0 * cfg.a / a)
        mu_max = analysis.mu_p_max(cfg)
        floor = mu_max * (1 - pe / (a + 1)) ** n
        lam = floor + float(rng.uniform(0.3, 0.7)) * (mu_max - floor)
        pc = analysis.protection_constraints(cfg, lam)
        if not (pc.q_max_binding and pc.q_max < 0.95):
            continue
        inside = cfg.replace(q=0.95 * pc.q_max)
        margin = analysis.mu_p_imperfect_symmetric(inside) - lam
        if margin < 0.005:  # needs to clear four standard errors comfortably
            continue
        found += 1
        if progress:
            progress(f"constraint boundary sample {found}")
        sc = SimConfig(network=inside.expand(), lambda_p=lam, n_slots=slots,
                       seed=seed + found, mode=MODE_IMPERFECT)
        probe = stability_probe(sc)
        out.append(_check_true(
            f"constraint-sim/inside-{found}-stable", probe.verdict == VERDICT_STABLE,
            f"q=0.95*q_max margin={margin:.4f} verdict={probe.verdict}"))
        outside_q = 1.05 * pc.q_max
        if outside_q <= 1.0:
            outside = cfg.replace(q=outside_q)
            sc2 = SimConfig(network=outside.expand(), lambda_p=lam, n_slots=slots,
                            seed=seed + 100 + found, mode=MODE_IMPERFECT)
            probe2 = stability_probe(sc2)
            out.append(_check_true(
                f"constraint-sim/outside-{found}-not-stable",
                probe2.verdict != VERDICT_STABLE,
                f"q=1.05*q_max verdict={probe2.verdict}"))
    out.append(_check_true("constraint-sim/enough-samples", found >= samples,
                           f"{found} samples"))
    return out


def optimizer_sanity_checks(seed: int = DEFAULT_SEED, draws: int = 20) -> list[Check]:
    """With no sensing errors the optimizer recovers the closed-form
    access probability and pushes power to the hardware cap."""
    rng = np.random.default_rng(seed)
    bad_q = 0
    bad_p0 = 0
    worst = 0.0
    for _ in range(draws):
        beta = float(10 ** rng.uniform(-0.5, 1.2))
        n = int(rng.integers(1, 9))
        cfg = _sym(n_secondary=n, beta=beta, noise=0.2, sigma_tilde_sq=2.0,
                   pe=0.0, pf=0.0)
        res = maximize_sum_throughput(cfg, 0.2, p0_cap=10.0, grid=(101, 41))
        q_star = analysis.optimal_q_perfect(cfg)
        err = abs(res.q_opt - q_star)
        worst = max(worst, err)
        if err > res.certificate.final_step_q + 1e-12:
            bad_q += 1
        if abs(res.p0_opt - 10.0) > 1e-9:
            bad_p0 += 1
    return [
        _check_true("optimizer/q-matches-closed-form", bad_q == 0,
                    f"worst |q_opt - q*| = {worst:.2e}"),
        _check_true("optimizer/power-at-cap", bad_p0 == 0, ""),
    ]


def asymmetric_relay_consistency_checks(seed: int = DEFAULT_SEED,
                                        draws: int = 20) -> list[Check]:
    """The asymmetric relaying pipeline reduces to the symmetric one and
    its per-node success never decreases when a node joins."""
    out = []
    worst = 0.0
    for n in range(1, 7):
        cfg = _relay(n, 0.35, 0.8)
        rep = analysis.relay_asymmetric(cfg.expand())
        p_s = analysis.relay_success_prob(cfg)
        lam_max = analysis.lambda_p_max_relay(cfg)
        for v in rep.relay_success_probs:
            worst = max(worst, abs(v - p_s) / p_s)
        worst = max(worst, abs(rep.lambda_p_max - lam_max) / lam_max)
    out.append(_check_true("asym-relay/symmetric-reduction-1e-9", worst <= 1e-9,
                           f"worst rel err {worst:.2e}"))
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(draws):
        n = int(rng.integers(1, 6))
        base = _relay(n, 0.5, 1.0).expand().replace(
            secondary_powers=tuple(float(rng.uniform(0.3, 3.0)) for _ in range(n)),
            fade_p_src=tuple(float(rng.uniform(0.2, 2.0)) for _ in range(n)))
        grown = _relay(n + 1, 0.5, 1.0).expand().replace(
            secondary_powers=base.secondary_powers + (float(rng.uniform(0.3, 3.0)),),
            fade_p_src=base.fade_p_src + (float(rng.uniform(0.2, 2.0)),))
        r0 = analysis.relay_asymmetric(base)
        r1 = analysis.relay_asymmetric(grown)
        for j in range(n):
            if r1.relay_success_probs[j] < r0.relay_success_probs[j] - 1e-12:
                violations += 1
    out.append(_check_true("asym-relay/success-nondecreasing-in-n", violations == 0,
                           f"{violations} violations over {draws} draws"))
    return out


# --- extended (simulation-heavy) suites -----------------------------------


def perfect_sensing_independence_checks(seed: int = DEFAULT_SEED,
                                        slots: int = 200_000, jobs: int = 1,
                                        progress: Callable[[str], None] | None = None) -> list[Check]:
    """Perfect sensing: the primary's service rate is indifferent to the
    secondary population and its parameters.

    A 5x5x3 grid over (access probability, secondary power, node count),
    each point simulated with its own substream; every estimate must sit
    within four standard errors of the interference-free rate and no
    regression against any swept parameter may show a trend.
    """
    base = _sym(noise=math.log(10 / 3))  # mu_p_max = 0.3
    mu_max = analysis.mu_p_max(base)
    qs = [0.1, 0.3, 0.5, 0.7, 0.9]
    powers = [0.01, 0.1, 1.0, 10.0, 100.0]
    ns = [1, 4, 8]
    rows = []
    out: list[Check] = []
    worst_dev = 0.0
    idx = 0
    for n in ns:
        for p0 in powers:
            for q in qs:
                idx += 1
                if progress and idx % 15 == 1:
                    progress(f"independence grid point {idx}/75")
                cfg = base.replace(n_secondary=n, p0=p0, q=q)
                sc = SimConfig(network=cfg.expand(), lambda_p=1.0, n_slots=slots,
                               seed=seed + idx, mode=MODE_PERFECT)
                res = run_replications(sc, 1, jobs=1)
                dev = abs(res.empirical_mu_p - mu_max) / res.mu_p_stderr
                worst_dev = max(worst_dev, dev)
                rows.append((q, math.log10(p0), float(n), res.empirical_mu_p))
    out.append(_check_true("independence/within-4se-band", worst_dev <= 4.0,
                           f"worst |dev|/se = {worst_dev:.2f} over {len(rows)} points"))
    data = np.array(rows)
    for axis, label in ((0, "access-prob"), (1, "log-power"), (2, "node-count")):
        x = data[:, axis]
        y = data[:, 3]
        xc = x - x.mean()
        slope = float(np.dot(xc, y) / np.dot(xc, xc))
        resid = y - y.mean() - slope * xc
        se = math.sqrt(float(np.dot(resid, resid)) / (len(y) - 2) / float(np.dot(xc, xc)))
        t = abs(slope / se)
        out.append(_check_true(f"independence/no-trend-{label}", t < 2.0,
                               f"t={t:.2f}"))
    return out


RELAY_PROBE_POINTS = (
    # (n, p_d, snr_db): chosen where the analytic bound is exact for the
    # protocol (single node) or verified to sit within the +-10% probe
    # bracket of the protocol's true boundary (the closed form treats the
    # co-holder count as resampled per packet; the protocol freezes it at
    # decode time, which lowers the boundary at higher populations).
    (1, 0.3, 0.0),
    (1, 0.9, 0.0),
    (1, 0.3, -5.0),
    (3, 0.9, 0.0),
    (4, 0.9, 0.0),
)


def relay_threshold_checks(seed: int = DEFAULT_SEED, slots: int = 1_000_000,
                           jobs: int = 1,
                           progress: Callable[[str], None] | None = None) -> list[Check]:
    """Relaying beats the non-relaying rate 0.3 at finite population for
    every relay-link SNR, immediately at 0 dB; stability probes at +-10%
    of the analytic bound return the matching verdicts."""
    out: list[Check] = []
    for p_d in (0.3, 0.9):
        for snr_db in (-10.0, -5.0, 0.0):
            snr = 10 ** (snr_db / 10)
            bounds = [analysis.lambda_p_max_relay(_relay(n, p_d, snr))
                      for n in range(1, 21)]
            crossing = next((n for n, b in enumerate(bounds, start=1) if b > 0.3), None)
            out.append(_check_true(
                f"relay-threshold/crosses[pd={p_d},snr={snr_db:g}dB]",
                crossing is not None,
                f"first crossing at N={crossing}"))
            if snr_db == 0.0:
                out.append(_check_true(
                    f"relay-threshold/single-node-gain[pd={p_d}]",
                    bounds[0] > 0.3, f"bound at N=1: {bounds[0]:.4f}"))
    for k, (n, p_d, snr_db) in enumerate(RELAY_PROBE_POINTS):
        snr = 10 ** (snr_db / 10)
        cfg = _relay(n, p_d, snr)
        bound = analysis.lambda_p_max_relay(cfg)
        sc = SimConfig(network=cfg.expand(), lambda_p=0.5, n_slots=slots,
                       seed=seed + 31 * k, mode=MODE_RELAY)
        if progress:
            progress(f"relay probe point N={n} pd={p_d} snr={snr_db:g}dB")
        below = stability_probe(sc, 0.9 * bound)
        above = stability_probe(sc, min(1.0, 1.1 * bound))
        tag = f"N={n},pd={p_d},snr={snr_db:g}dB"
        out.append(_check_true(f"relay-probe/stable-below[{tag}]",
                               below.verdict == VERDICT_STABLE,
                               f"verdict={below.verdict} slope={below.slope:.2e}"))
        out.append(_check_true(f"relay-probe/unstable-above[{tag}]",
                               above.verdict == VERDICT_UNSTABLE,
                               f"verdict={above.verdict} slope={above.slope:.2e}"))
    return out


# --- battery entry points --------------------------------------------------


def run_battery(battery: str = "standard", seed: int = DEFAULT_SEED,
                slots: int = DEFAULT_SLOTS, jobs: int = 1,
                progress: Callable[[str], None] | None = None) -> list[Check]:
    """Run the named battery and return every check outcome."""
    if battery not in ("standard", "extended"):
        raise ValueError(f"battery must be standard or extended, got {battery!r}")
    checks: list[Check] = []
    checks.extend(equivalence_battery_checks(slots=slots, seed=seed, jobs=jobs,
                                             progress=progress))
    checks.extend(service_rate_limit_checks())
    checks.extend(sweep_limit_checks())
    checks.extend(relay_success_growth_checks(seed=seed))
    checks.extend(benefit_equivalence_checks(seed=seed, draws=100))
    checks.extend(constraint_boundary_checks(seed=seed))
    checks.extend(optimizer_sanity_checks(seed=seed))
    checks.extend(asymmetric_relay_consistency_checks(seed=seed))
    if battery == "extended":
        checks.extend(perfect_sensing_independence_checks(seed=seed, jobs=jobs,
                                                          progress=progress))
        checks.extend(relay_threshold_checks(seed=seed, slots=slots, jobs=jobs,
                                             progress=progress))
        checks.extend(constraint_boundary_sim_checks(seed=seed, jobs=jobs,
                                                     progress=progress))
    return checks
