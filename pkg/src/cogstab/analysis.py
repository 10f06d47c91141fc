"""Closed-form throughput, stability, and protection expressions.

Covers the three operating regimes of the shared-band network:

  * perfect sensing — the primary is never interfered with; secondary
    throughput follows from random access among the secondaries alone;
  * imperfect sensing — misdetections let secondaries collide with the
    primary, shrinking its service rate and inducing protection
    constraints on secondary power and access probability;
  * relaying — secondaries that decoded a failed primary packet jointly
    retransmit it in idle slots, raising the primary's service rate.

Each general (asymmetric) expression is a subset enumeration whose
weights form a probability partition; the symmetric specializations are
closed forms in N. Symmetric and general paths are independent code
routes and are cross-checked in the test suite.

All functions are pure; results are plain floats or frozen dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .channel import erlang_tail, hypoexponential_tail, sinr_success_probability
from .config import NetworkConfig, SymmetricConfig
from .errors import (
    DomainError,
    InfeasiblePrimaryError,
    TooLargeError,
    UnstableError,
)

# Subset enumerations grow as 3^N; beyond this cap they are refused.
# The symmetric closed forms have no such bound.
MAX_ENUM_NODES = 12

UNBOUNDED = math.inf


def _require_enum_size(n: int) -> None:
    if n > MAX_ENUM_NODES:
        raise TooLargeError(
            f"subset enumeration supports at most {MAX_ENUM_NODES} secondary nodes, got {n}")


def _network(cfg: SymmetricConfig | NetworkConfig) -> NetworkConfig:
    return cfg.expand() if isinstance(cfg, SymmetricConfig) else cfg


def subset_weights(probs: Sequence[float], universe: int | None = None) -> Iterator[tuple[int, float]]:
    """Yield (bitmask, probability) for every subset of ``universe``.

    Bit i is set with probability ``probs[i]``, independently. The weights
    over all yielded subsets sum to exactly 1, which downstream formulas
    rely on as a partition of the outcome space.
    """
    n = len(probs)
    if universe is None:
        universe = (1 << n) - 1
    members = [i for i in range(n) if universe >> i & 1]
    sub = universe
    while True:
        w = 1.0
        for i in members:
            w *= probs[i] if sub >> i & 1 else 1.0 - probs[i]
        yield sub, w
        if sub == 0:
            break
        sub = (sub - 1) & universe


def mu_p_max(cfg: SymmetricConfig | NetworkConfig) -> float:
    """Interference-free service rate of the primary link.

    The probability that the primary's own SNR clears its threshold; for
    a Rayleigh link this is ``exp(-noise * beta_p / mean_rx_power)``.
    This is also the primary's maximum stable arrival rate under perfect
    sensing, where secondaries never transmit in busy slots.
    """
    net = _network(cfg)
    return sinr_success_probability(net.rx_primary_at_dp(), net.primary_threshold,
                                    net.noise_power)


def optimal_q_perfect(cfg: SymmetricConfig) -> float:
    """Access probability maximizing the symmetric per-node throughput
    under perfect sensing: min(1, (1+beta) / (beta * N))."""
    if cfg.n_secondary < 1:
        raise DomainError("optimal_q_perfect requires at least one secondary node")
    return min(1.0, (1.0 + cfg.beta) / (cfg.beta * cfg.n_secondary))


def secondary_rate_perfect_symmetric(cfg: SymmetricConfig, lambda_p: float) -> float:
    """Per-node secondary throughput, symmetric network, perfect sensing.

    idle fraction x single-link success x own access probability x the
    closed binomial collapse of interference from the other N-1 nodes.
    """
    if cfg.n_secondary < 1:
        raise DomainError("secondary rate requires at least one secondary node")
    mu_max = mu_p_max(cfg)
    if not (lambda_p < mu_max):
        raise UnstableError(
            f"lambda_p={lambda_p} is not below the primary service rate {mu_max}")
    alpha = cfg.path_loss_exp
    exponent = cfg.beta * cfg.noise / (cfg.sigma_tilde_sq * cfg.r_j ** (-alpha) * cfg.p0)
    collide = cfg.q * cfg.beta / (1.0 + cfg.beta)
    return ((1.0 - lambda_p / mu_max)
            * math.exp(-exponent)
            * cfg.q
            * (1.0 - collide) ** (cfg.n_secondary - 1))


def secondary_region_perfect_asymmetric(
    cfg: NetworkConfig,
    lambda_p: float,
    q_vector: Sequence[float] | None = None,
) -> list[float]:
    """Per-node secondary throughputs in the asymmetric perfect-sensing case.

    Enumerates every transmit set, weighting by the access probabilities,
    and multiplies each set's weight by that set's success probability at
    the node's own destination.
    """
    _require_enum_size(cfg.n_secondary)
    mu_max = mu_p_max(cfg)
    if not (lambda_p < mu_max):
        raise UnstableError(
            f"lambda_p={lambda_p} is not below the primary service rate {mu_max}")
    q = tuple(cfg.access_probs if q_vector is None else q_vector)
    if len(q) != cfg.n_secondary:
        raise DomainError(f"q_vector must have length {cfg.n_secondary}")
    idle = 1.0 - lambda_p / mu_max
    rates = []
    for j in range(cfg.n_secondary):
        total = 0.0
        for t_mask, w in subset_weights(q):
            if not t_mask >> j & 1:
                continue
            interferers = [cfg.rx_sec_at_dest(i, j)
                           for i in range(cfg.n_secondary)
                           if i != j and t_mask >> i & 1]
            total += w * sinr_success_probability(
                cfg.rx_sec_at_dest(j, j), cfg.secondary_thresholds[j],
                cfg.noise_power, interferers)
        rates.append(idle * total)
    return rates


def mu_p_imperfect_general(cfg: NetworkConfig) -> float:
    """Primary service rate under sensing errors, asymmetric network.

    Double subset sum: over misdetection sets U (each node misdetects the
    busy primary independently), then over transmit sets T inside U (only
    misdetecting nodes transmit in a busy slot). Each term carries the
    primary's success probability against the interfering set T.
    """
    _require_enum_size(cfg.n_secondary)
    rx_p = cfg.rx_primary_at_dp()
    interference = [cfg.rx_sec_at_dp(i) for i in range(cfg.n_secondary)]
    success_cache: dict[int, float] = {}

    def success(t_mask: int) -> float:
        if t_mask not in success_cache:
            chosen = [interference[i] for i in range(cfg.n_secondary) if t_mask >> i & 1]
            success_cache[t_mask] = sinr_success_probability(
                rx_p, cfg.primary_threshold, cfg.noise_power, chosen)
        return success_cache[t_mask]

    total = 0.0
    for u_mask, w_u in subset_weights(cfg.miss_probs):
        for t_mask, w_t in subset_weights(cfg.access_probs, universe=u_mask):
            total += w_u * w_t * success(t_mask)
    return total


def mu_p_imperfect_symmetric(cfg: SymmetricConfig) -> float:
    """Primary service rate under sensing errors, symmetric network:
    ``mu_p_max * (1 - q*pe/(a+1))**N`` with ``a`` the normalized
    primary-to-secondary received-power ratio."""
    factor = 1.0 - cfg.q * cfg.pe / (cfg.a + 1.0)
    return mu_p_max(cfg) * factor ** cfg.n_secondary


@dataclass(frozen=True)
class ProtectionConstraints:
    """Bounds keeping the primary queue stable despite sensing errors.

    ``p0_max`` is ``math.inf`` when any secondary power is tolerable;
    the ``*_binding`` flags record which piecewise branch applied.
    """

    a_min: float
    q_max: float
    p0_max: float
    a_min_binding: bool
    q_max_binding: bool
    p0_max_binding: bool

    def to_dict(self) -> dict:
        return {
            "a_min": self.a_min,
            "q_max": self.q_max,
            "p0_max": "unbounded" if math.isinf(self.p0_max) else self.p0_max,
            "a_min_binding": self.a_min_binding,
            "q_max_binding": self.q_max_binding,
            "p0_max_binding": self.p0_max_binding,
        }


def protection_constraints(cfg: SymmetricConfig, lambda_p: float) -> ProtectionConstraints:
    """Minimum power ratio, maximum access probability, and maximum
    secondary power compatible with primary stability at ``lambda_p``.

    Piecewise: each bound is unconstrained while the arrival rate sits
    below the service rate the respective parameter leaves untouched,
    then follows the inversion of the symmetric service-rate formula.
    Substituting a binding ``q_max`` back into that formula returns
    exactly ``lambda_p``.
    """
    mu_max = mu_p_max(cfg)
    if not (lambda_p < mu_max):
        raise InfeasiblePrimaryError(
            f"lambda_p={lambda_p} is not below mu_p_max={mu_max}; "
            "no secondary parameters can protect the primary")
    n = cfg.n_secondary
    if n == 0 or cfg.q * cfg.pe == 0.0 or lambda_p == 0.0:
        # No secondary interference path: nothing binds.
        q_unbounded = n == 0 or cfg.pe == 0.0 or lambda_p == 0.0
        return ProtectionConstraints(
            a_min=0.0,
            q_max=1.0 if q_unbounded else min(
                1.0, (1.0 - (lambda_p / mu_max) ** (1.0 / n)) * (cfg.a + 1.0) / cfg.pe),
            p0_max=UNBOUNDED,
            a_min_binding=False,
            q_max_binding=not q_unbounded,
            p0_max_binding=False,
        )
    x = (lambda_p / mu_max) ** (1.0 / n)
    power_safe = mu_max * (1.0 - cfg.q * cfg.pe) ** n
    access_safe = mu_max * (1.0 - cfg.pe / (cfg.a + 1.0)) ** n

    if lambda_p > power_safe:
        a_min = max(0.0, cfg.q * cfg.pe / (1.0 - x) - 1.0)
        a_min_binding = True
        # a scales as 1/p0 at fixed primary parameters, so a >= a_min caps p0.
        fixed_ratio = cfg.a * cfg.p0
        p0_max = fixed_ratio * (1.0 - x) / (cfg.q * cfg.pe - (1.0 - x))
        p0_max_binding = True
    else:
        a_min = 0.0
        a_min_binding = False
        p0_max = UNBOUNDED
        p0_max_binding = False

    if lambda_p < access_safe:
        q_max = 1.0
        q_max_binding = False
    else:
        q_max = min(1.0, (1.0 - x) * (cfg.a + 1.0) / cfg.pe)
        q_max_binding = True

    return ProtectionConstraints(a_min, q_max, p0_max,
                                 a_min_binding, q_max_binding, p0_max_binding)


def secondary_rate_imperfect_symmetric(cfg: SymmetricConfig, lambda_p: float) -> float:
    """Per-node secondary throughput under sensing errors, symmetric case.

    Two terms: idle slots reached without a false alarm, and busy slots
    entered through a misdetection where the primary's interference
    attenuates the success probability by 1/(1+I).
    """
    if cfg.n_secondary < 1:
        raise DomainError("secondary rate requires at least one secondary node")
    mu_p = mu_p_imperfect_symmetric(cfg)
    if not (lambda_p < mu_p):
        raise UnstableError(
            f"lambda_p={lambda_p} is not below the primary service rate {mu_p}")
    alpha = cfg.path_loss_exp
    base = math.exp(-cfg.beta * cfg.noise / (cfg.sigma_tilde_sq * cfg.p0 * cfg.r_j ** (-alpha)))
    frac = cfg.beta / (1.0 + cfg.beta)
    busy_share = lambda_p / mu_p
    n1 = cfg.n_secondary - 1
    idle_term = ((1.0 - busy_share) * base * cfg.q * (1.0 - cfg.pf)
                 * (1.0 - cfg.q * (1.0 - cfg.pf) * frac) ** n1)
    busy_term = (busy_share * base * cfg.q * cfg.pe
                 / (1.0 + cfg.primary_busy_interference)
                 * (1.0 - cfg.q * cfg.pe * frac) ** n1)
    return idle_term + busy_term


def secondary_rate_imperfect_general(cfg: NetworkConfig, lambda_p: float) -> list[float]:
    """Per-node secondary throughputs under sensing errors, asymmetric.

    Conditions on the primary being idle (false-alarm sets F, then
    transmit sets among non-alarmed nodes) or busy (misdetection sets E,
    then transmit sets inside E, with the primary as an extra interferer),
    weighting each condition by its stationary probability.
    """
    _require_enum_size(cfg.n_secondary)
    mu_p = mu_p_imperfect_general(cfg)
    if not (lambda_p < mu_p):
        raise UnstableError(
            f"lambda_p={lambda_p} is not below the primary service rate {mu_p}")
    n = cfg.n_secondary
    busy_share = lambda_p / mu_p
    all_mask = (1 << n) - 1
    rates = []
    for j in range(n):
        rx_own = cfg.rx_sec_at_dest(j, j)
        beta_j = cfg.secondary_thresholds[j]

        def success(t_mask: int, with_primary: bool) -> float:
            interferers = [cfg.rx_sec_at_dest(i, j) for i in range(n)
                           if i != j and t_mask >> i & 1]
            if with_primary:
                interferers.append(cfg.rx_primary_at_dest(j))
            return sinr_success_probability(rx_own, beta_j, cfg.noise_power, interferers)

        idle_rate = 0.0
        for f_mask, w_f in subset_weights(cfg.false_alarm_probs):
            for t_mask, w_t in subset_weights(cfg.access_probs, universe=all_mask & ~f_mask):
                if t_mask >> j & 1:
                    idle_rate += w_f * w_t * success(t_mask, with_primary=False)
        busy_rate = 0.0
        for e_mask, w_e in subset_weights(cfg.miss_probs):
            for t_mask, w_t in subset_weights(cfg.access_probs, universe=e_mask):
                if t_mask >> j & 1:
                    busy_rate += w_e * w_t * success(t_mask, with_primary=True)
        rates.append((1.0 - busy_share) * idle_rate + busy_share * busy_rate)
    return rates


# --- relaying ------------------------------------------------------------


def relay_decode_prob(cfg: SymmetricConfig) -> float:
    """Probability that one secondary source decodes a primary packet:
    the primary-to-secondary-source link clears the primary threshold."""
    rx = cfg.p_p * cfg.r ** (-cfg.path_loss_exp) * cfg.sigma_sq
    return sinr_success_probability(rx, cfg.beta_p, cfg.noise)


def relay_success_prob(cfg: SymmetricConfig) -> float:
    """Probability a jointly relayed packet reaches the primary destination.

    The node holding the packet is joined by k other decoders with
    binomial probability; k+1 gain summands then must push the combined
    received SNR over the primary threshold (an Erlang tail).
    """
    if cfg.n_secondary < 1:
        raise DomainError("relay_success_prob requires at least one secondary node")
    p_d = relay_decode_prob(cfg)
    alpha = cfg.path_loss_exp
    c = cfg.beta_p * cfg.noise / (cfg.p0 * cfg.r_0 ** (-alpha) * cfg.sigma0_sq)
    n1 = cfg.n_secondary - 1
    return math.fsum(
        math.comb(n1, k) * p_d ** k * (1.0 - p_d) ** (n1 - k) * erlang_tail(k + 1, c, 1.0)
        for k in range(cfg.n_secondary))


def mu_p_relay(cfg: SymmetricConfig) -> float:
    """Primary service rate with relaying: the packet leaves the queue
    when the destination decodes it or at least one secondary does."""
    p_d = relay_decode_prob(cfg)
    return 1.0 - (1.0 - mu_p_max(cfg)) * (1.0 - p_d) ** cfg.n_secondary


def relay_queue_load(cfg: SymmetricConfig, lambda_p: float) -> tuple[float, float]:
    """Per-node relaying-queue arrival and service rates (packets/slot).

    Arrivals: busy slot, primary destination fails, this node decodes.
    Service: idle slot times the joint relay success probability.
    """
    mu_p = mu_p_relay(cfg)
    if not (lambda_p <= mu_p):
        raise UnstableError(
            f"lambda_p={lambda_p} exceeds the relayed primary service rate {mu_p}")
    busy_share = lambda_p / mu_p if mu_p > 0 else 0.0
    lam_ext = busy_share * (1.0 - mu_p_max(cfg)) * relay_decode_prob(cfg)
    mu_ext = (1.0 - busy_share) * relay_success_prob(cfg)
    return lam_ext, mu_ext


def lambda_p_max_relay(cfg: SymmetricConfig) -> float:
    """Maximum stable primary arrival rate under the relaying protocol."""
    if cfg.n_secondary < 1:
        raise DomainError("lambda_p_max_relay requires at least one secondary node")
    p_d = relay_decode_prob(cfg)
    if p_d == 0.0:
        return mu_p_max(cfg)
    p_s = relay_success_prob(cfg)
    if p_s == 0.0:
        return 0.0
    mu_p = mu_p_relay(cfg)
    return mu_p * p_s / (p_s + (1.0 - mu_p_max(cfg)) * p_d)


def relay_benefit_conditions(cfg: SymmetricConfig, lambda_p: float) -> tuple[bool, bool]:
    """Whether relaying strictly helps (primary, secondary).

    The primary benefits when the relayed stability bound exceeds the
    non-relaying one. The secondary benefits when the enlarged idle
    fraction, discounted by the slots consumed relaying, strictly exceeds
    the non-relaying idle fraction. For a single secondary node the two
    answers coincide whenever ``0 < lambda_p`` and decoding is possible.
    """
    bound = lambda_p_max_relay(cfg)
    if not (lambda_p < bound):
        raise UnstableError(f"lambda_p={lambda_p} is not below the relayed bound {bound}")
    mu_max = mu_p_max(cfg)
    p_d = relay_decode_prob(cfg)
    if p_d > 0.0:
        p_s = relay_success_prob(cfg)
        gain = p_s * (1.0 - (1.0 - p_d) ** cfg.n_secondary) / p_d
        primary = mu_max < gain
    else:
        primary = False
    lam_ext, mu_ext = relay_queue_load(cfg, lambda_p)
    utilization = lam_ext / mu_ext if lam_ext > 0.0 else 0.0
    relay_fraction = (1.0 - lambda_p / mu_p_relay(cfg)) * (1.0 - utilization) ** cfg.n_secondary
    no_relay_fraction = 1.0 - lambda_p / mu_max if lambda_p < mu_max else 0.0
    secondary = no_relay_fraction < relay_fraction
    return primary, secondary


def secondary_rate_relay(cfg: SymmetricConfig, lambda_p: float) -> float:
    """Per-node secondary own-traffic throughput under relaying.

    The conditional success factor is the perfect-sensing one; the idle
    fraction is the relayed one, discounted once per node for the slots
    relaying consumes.
    """
    bound = lambda_p_max_relay(cfg)
    if not (lambda_p < bound):
        raise UnstableError(f"lambda_p={lambda_p} is not below the relayed bound {bound}")
    lam_ext, mu_ext = relay_queue_load(cfg, lambda_p)
    utilization = lam_ext / mu_ext if lam_ext > 0.0 else 0.0
    alpha = cfg.path_loss_exp
    base = math.exp(-cfg.beta * cfg.noise / (cfg.sigma_tilde_sq * cfg.r_j ** (-alpha) * cfg.p0))
    own = base * cfg.q * (1.0 - cfg.q * cfg.beta / (1.0 + cfg.beta)) ** (cfg.n_secondary - 1)
    return (1.0 - lambda_p / mu_p_relay(cfg)) * (1.0 - utilization) ** cfg.n_secondary * own


@dataclass(frozen=True)
class AsymmetricRelayReport:
    """Relaying quantities for the asymmetric network."""

    decode_probs: tuple[float, ...]
    relay_success_probs: tuple[float, ...]
    mu_p: float
    lambda_p_max: float
    lambda_p_max_large_n: float

    def to_dict(self) -> dict:
        return {
            "decode_probs": list(self.decode_probs),
            "relay_success_probs": list(self.relay_success_probs),
            "mu_p": self.mu_p,
            "lambda_p_max": self.lambda_p_max,
            "lambda_p_max_large_n": self.lambda_p_max_large_n,
        }


def relay_asymmetric(cfg: NetworkConfig) -> AsymmetricRelayReport:
    """Per-node decode and joint-relay success probabilities, the relayed
    primary service rate, and the system stability bound (the minimum of
    the per-node relaying-queue bounds), for the asymmetric network.

    Also evaluates the large-N approximation of the bound, which replaces
    every joint success probability with 1.
    """
    n = cfg.n_secondary
    if n < 1:
        raise DomainError("relay_asymmetric requires at least one secondary node")
    _require_enum_size(n)
    mu_max = mu_p_max(cfg)
    p_d = tuple(
        sinr_success_probability(cfg.rx_primary_at_src(i), cfg.primary_threshold,
                                 cfg.noise_power)
        for i in range(n))
    p_joint = 1.0 - math.prod(1.0 - p for p in p_d)
    mu_p = mu_max + (1.0 - mu_max) * p_joint
    c = cfg.primary_threshold * cfg.noise_power
    p_s = []
    for j in range(n):
        others = [i for i in range(n) if i != j]
        total = 0.0
        for t_mask, w in subset_weights(p_d, universe=sum(1 << i for i in others)):
            members = [i for i in others if t_mask >> i & 1] + [j]
            rates = [1.0 / cfg.rx_sec_at_dp(i) for i in members]
            total += w * hypoexponential_tail(rates, c)
        p_s.append(total)
    bounds = []
    for j in range(n):
        if p_d[j] == 0.0:
            bounds.append(mu_p)
        elif p_s[j] == 0.0:
            bounds.append(0.0)
        else:
            bounds.append(mu_p * p_s[j] / (p_s[j] + (1.0 - mu_max) * p_d[j]))
    large_n = mu_p / (1.0 + (1.0 - mu_max) * max(p_d))
    return AsymmetricRelayReport(
        decode_probs=p_d,
        relay_success_probs=tuple(p_s),
        mu_p=mu_p,
        lambda_p_max=min(bounds),
        lambda_p_max_large_n=large_n,
    )


# --- report assembly ------------------------------------------------------


@dataclass(frozen=True)
class RelayBlock:
    p_d: float
    p_s: float
    mu_p_relay: float
    lambda_p_max: float
    primary_benefits: bool | None
    secondary_benefits: bool | None
    secondary_rate: float | None

    def to_dict(self) -> dict:
        return {
            "p_d": self.p_d,
            "p_s": self.p_s,
            "mu_p_relay": self.mu_p_relay,
            "lambda_p_max": self.lambda_p_max,
            "primary_benefits": self.primary_benefits,
            "secondary_benefits": self.secondary_benefits,
            "secondary_rate": self.secondary_rate,
        }


@dataclass(frozen=True)
class AnalyticalReport:
    """Closed-form summary for one configuration and arrival rate."""

    mu_p_max: float
    mu_p: float
    lambda_p: float
    primary_stable: bool
    idle_fraction: float
    secondary_rates: tuple[float, ...]
    constraints: ProtectionConstraints | None
    relay: RelayBlock | None
    asymmetric_relay: AsymmetricRelayReport | None = None

    def __post_init__(self):
        for name in ("mu_p_max", "mu_p", "idle_fraction"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v} outside [0, 1]")
        for v in self.secondary_rates:
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"secondary rate {v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "mu_p_max": self.mu_p_max,
            "mu_p": self.mu_p,
            "lambda_p": self.lambda_p,
            "primary_stable": self.primary_stable,
            "idle_fraction": self.idle_fraction,
            "secondary_rates": list(self.secondary_rates),
            "constraints": self.constraints.to_dict() if self.constraints else None,
            "relay": self.relay.to_dict() if self.relay else None,
            "asymmetric_relay": (self.asymmetric_relay.to_dict()
                                 if self.asymmetric_relay else None),
        }


def analytical_report(
    cfg: SymmetricConfig | NetworkConfig,
    lambda_p: float = 0.0,
    relay: bool = False,
) -> AnalyticalReport:
    """Assemble the full closed-form report for one configuration.

    Raises InfeasiblePrimaryError when no secondary parameters could make
    the primary stable (arrival rate at or above its interference-free
    service rate, without relaying to lift it).
    """
    mu_max = mu_p_max(cfg)
    symmetric = isinstance(cfg, SymmetricConfig)

    relay_block = None
    asym_relay = None
    if relay:
        if symmetric:
            bound = lambda_p_max_relay(cfg)
            stable = lambda_p < bound
            benefits = (relay_benefit_conditions(cfg, lambda_p) if stable else (None, None))
            relay_block = RelayBlock(
                p_d=relay_decode_prob(cfg),
                p_s=relay_success_prob(cfg),
                mu_p_relay=mu_p_relay(cfg),
                lambda_p_max=bound,
                primary_benefits=benefits[0],
                secondary_benefits=benefits[1],
                secondary_rate=secondary_rate_relay(cfg, lambda_p) if stable else None,
            )
        else:
            asym_relay = relay_asymmetric(cfg)

    if not relay and not (lambda_p < mu_max):
        raise InfeasiblePrimaryError(
            f"lambda_p={lambda_p} is not below mu_p_max={mu_max}: the primary queue "
            "cannot be stabilized by any secondary transmission parameters")

    if relay:
        mu_p = mu_p_relay(cfg) if symmetric else asym_relay.mu_p
        bound = relay_block.lambda_p_max if symmetric else asym_relay.lambda_p_max
        stable = lambda_p < bound
    else:
        mu_p = mu_p_imperfect_symmetric(cfg) if symmetric else mu_p_imperfect_general(cfg)
        stable = lambda_p < mu_p

    idle_fraction = 1.0 - lambda_p / mu_p if stable else 0.0
    if stable and cfg.n_secondary >= 1:
        if relay and symmetric:
            per_node = relay_block.secondary_rate
            rates = (per_node,) * cfg.n_secondary
        elif symmetric:
            rates = (secondary_rate_imperfect_symmetric(cfg, lambda_p),) * cfg.n_secondary
        else:
            rates = tuple(secondary_rate_imperfect_general(cfg, lambda_p))
    else:
        rates = ()

    constraints = None
    if symmetric and not relay:
        constraints = protection_constraints(cfg, lambda_p)

    return AnalyticalReport(
        mu_p_max=mu_max,
        mu_p=mu_p,
        lambda_p=lambda_p,
        primary_stable=stable,
        idle_fraction=idle_fraction,
        secondary_rates=rates,
        constraints=constraints,
        relay=relay_block,
        asymmetric_relay=asym_relay,
    )
