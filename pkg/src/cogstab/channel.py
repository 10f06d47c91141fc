"""Fading-sum tail probabilities and SINR success kernels.

Every closed-form throughput expression in this package reduces to a small
set of facts about sums of independent exponential random variables (the
squared magnitudes of Rayleigh fading coefficients):

  * the tail of a sum of i.i.d. exponentials (Erlang tail),
  * the tail of a sum of independent exponentials with distinct or
    partially repeated rates (hypoexponential tail),
  * the probability that one exponential exceeds a threshold-scaled sum
    of noise plus independent exponential interference terms, which
    factors into ``exp(-threshold/snr)`` times one rational term per
    interferer.

All functions are pure and reentrant: no shared mutable state, safe to
call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import gammaincc

from .errors import DomainError

# Rates closer than this (relative) are treated as equal and routed to the
# multiplicity-aware evaluation; the distinct-rate partial fractions are
# singular at exact ties and ill-conditioned near them.
RATE_MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class RateList:
    """Exponential rate parameters of independent summands.

    Invariants: non-empty, every rate strictly positive.
    """

    rates: tuple[float, ...]

    def __init__(self, rates: Sequence[float]):
        object.__setattr__(self, "rates", tuple(float(r) for r in rates))
        if not self.rates:
            raise DomainError("RateList must contain at least one rate")
        if any(not (r > 0) for r in self.rates):
            raise DomainError(f"all rates must be > 0, got {self.rates}")

    def __len__(self) -> int:
        return len(self.rates)

    def __iter__(self):
        return iter(self.rates)


@dataclass(frozen=True)
class FadingSpec:
    """One Rayleigh-faded link: h ~ CN(0, variance).

    The squared magnitude |h|^2 is exponential with mean ``variance``
    (rate ``1/variance``).
    """

    variance: float

    def __post_init__(self):
        if not (self.variance > 0):
            raise DomainError(f"fading variance must be > 0, got {self.variance}")

    @property
    def gain_rate(self) -> float:
        """Exponential rate of the channel power gain |h|^2."""
        return 1.0 / self.variance

    def mean_rx_power(self, tx_power: float, distance: float, path_loss_exp: float) -> float:
        """Average received power of this link: P * r^-alpha * variance."""
        return tx_power * distance ** (-path_loss_exp) * self.variance


def erlang_tail(k: int, c: float, rate: float) -> float:
    """Pr[X_1 + ... + X_k > c] for i.i.d. X_i ~ exponential(rate).

    Evaluates the closed finite sum
    ``exp(-rate*c) * sum_{m=0}^{k-1} (rate*c)^m / m!``
    in log space so large ``rate*c`` neither overflows the partial sums
    nor underflows prematurely.

    Args:
        k: number of summands, >= 1.
        c: tail point, >= 0.
        rate: common exponential rate, > 0.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if not (rate > 0):
        raise DomainError(f"rate must be > 0, got {rate}")
    if c < 0:
        raise DomainError(f"c must be >= 0, got {c}")
    x = rate * c
    if x == 0.0:
        return 1.0
    lx = math.log(x)
    logs = [m * lx - math.lgamma(m + 1) for m in range(int(k))]
    top = max(logs)
    s = math.fsum(math.exp(v - top) for v in logs)
    return min(1.0, math.exp(top + math.log(s) - x))


def upper_incomplete_gamma_int(s: int, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) for integer order s >= 1.

    Computed through the regularized routine as ``(s-1)! * Q(s, x)``,
    deliberately a different route than :func:`erlang_tail`'s finite sum;
    the identity ``Gamma(s, x)/(s-1)! == erlang_tail(s, x, 1)`` is a
    cross-check between the two, not a shared implementation.
    """
    if int(s) != s or s < 1:
        raise DomainError(f"s must be a positive integer, got {s}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    return math.factorial(int(s) - 1) * float(gammaincc(s, x))


def _group_rates(rates: Sequence[float]) -> list[tuple[float, int]]:
    """Cluster rates that coincide within RATE_MERGE_RTOL.

    Returns (representative_rate, multiplicity) pairs, representative =
    group mean, sorted ascending.
    """
    ordered = sorted(float(r) for r in rates)
    groups: list[list[float]] = [[ordered[0]]]
    for r in ordered[1:]:
        ref = groups[-1][-1]
        if r - ref <= RATE_MERGE_RTOL * max(abs(r), abs(ref)):
            groups[-1].append(r)
        else:
            groups.append([r])
    return [(math.fsum(g) / len(g), len(g)) for g in groups]


def _tail_distinct(lams: Sequence[float], c: float) -> float:
    # Pr[Z > c] = sum_i (prod_{j != i} lam_j/(lam_j-lam_i)) exp(-lam_i c)
    total = 0.0
    for i, li in enumerate(lams):
        coef = 1.0
        for j, lj in enumerate(lams):
            if j != i:
                coef *= lj / (lj - li)
        total += coef * math.exp(-li * c)
    return total


def _tail_multiplicity(groups: Sequence[tuple[float, int]], c: float) -> float:
    # Partial-fraction expansion of the Laplace transform
    #   L(s) = prod_g (lam_g/(s+lam_g))^{m_g}
    # into sum_g sum_{j=1}^{m_g} b_gj (s+lam_g)^{-j}; each term integrates
    # to an Erlang tail. The b_gj come from derivatives of the remaining
    # factor R_g(s) at s = -lam_g, computed exactly via the log-derivative
    # recursion R' = psi * R.
    total = 0.0
    for g, (lam_g, m_g) in enumerate(groups):
        others = [(lam_h, m_h) for h, (lam_h, m_h) in enumerate(groups) if h != g]
        # R_g(-lam_g) = prod_h lam_h^{m_h} * prod_{h != g} (lam_h-lam_g)^{-m_h}
        r0 = lam_g ** m_g
        for lam_h, m_h in others:
            r0 *= (lam_h / (lam_h - lam_g)) ** m_h
        derivs = [r0]
        for n in range(1, m_g):
            # psi^{(i)}(-lam_g) = sum_h m_h * (-1)^{i+1} * i! / (lam_h-lam_g)^{i+1}
            acc = 0.0
            for i in range(n):
                psi_i = sum(
                    m_h * (-1.0) ** (i + 1) * math.factorial(i) / (lam_h - lam_g) ** (i + 1)
                    for lam_h, m_h in others
                )
                acc += math.comb(n - 1, i) * psi_i * derivs[n - 1 - i]
            derivs.append(acc)
        for j in range(1, m_g + 1):
            b = derivs[m_g - j] / math.factorial(m_g - j)
            total += b / lam_g ** j * erlang_tail(j, c, lam_g)
    return total


def hypoexponential_tail(rates: RateList | Sequence[float], c: float) -> float:
    """Pr[X_1 + ... + X_n > c] for independent X_i ~ exponential(rate_i).

    Uses the distinct-rate partial-fraction form when all rates differ,
    and falls back to the multiplicity-aware expansion (grouping rates
    equal within RATE_MERGE_RTOL) where the distinct form is singular.
    With all rates equal this reduces exactly to :func:`erlang_tail`.
    """
    rl = rates if isinstance(rates, RateList) else RateList(rates)
    if c < 0:
        raise DomainError(f"c must be >= 0, got {c}")
    if c == 0:
        return 1.0
    groups = _group_rates(rl.rates)
    if len(groups) == 1:
        lam, m = groups[0]
        return erlang_tail(m, c, lam)
    if all(m == 1 for _, m in groups):
        raw = _tail_distinct([lam for lam, _ in groups], c)
    else:
        raw = _tail_multiplicity(groups, c)
    return min(1.0, max(0.0, raw))


def rayleigh_interference_success(
    signal_mean_snr: float,
    threshold: float,
    interferer_ratios: Sequence[float] = (),
) -> float:
    """Success probability of one Rayleigh link against Rayleigh interferers.

    Reception succeeds when the desired link's SINR exceeds ``threshold``.
    Averaging the exponential gain of the desired link over the
    independent exponential interference terms factors the probability as

        exp(-threshold / signal_mean_snr) * prod_k rho_k / (1 + rho_k)

    where ``signal_mean_snr`` is the mean received SNR of the desired link
    and ``rho_k`` is the mean received power of the desired link divided by
    ``threshold`` times the mean received power of interferer k. With no
    interferers this is the plain single-link outage complement.

    ``signal_mean_snr`` may be ``math.inf`` for the noiseless case.
    """
    if not (signal_mean_snr > 0):
        raise DomainError(f"signal_mean_snr must be > 0, got {signal_mean_snr}")
    if not (threshold > 0):
        raise DomainError(f"threshold must be > 0, got {threshold}")
    log_p = -threshold / signal_mean_snr if math.isfinite(signal_mean_snr) else 0.0
    for rho in interferer_ratios:
        if not (rho > 0):
            raise DomainError(f"interferer ratios must be > 0, got {rho}")
        # log(rho/(1+rho)) accumulated in log space: products over large
        # transmit sets would underflow if multiplied directly.
        log_p -= math.log1p(1.0 / rho)
    return math.exp(log_p)


def sinr_success_probability(
    desired_mean_power: float,
    threshold: float,
    noise_power: float,
    interferer_mean_powers: Sequence[float] = (),
) -> float:
    """Same success probability parameterized by absolute received powers.

    ``desired_mean_power`` and each interferer entry are average received
    powers (transmit power x distance^-alpha x fading variance);
    ``noise_power`` may be zero.
    """
    if not (desired_mean_power > 0):
        raise DomainError(f"desired_mean_power must be > 0, got {desired_mean_power}")
    if noise_power < 0:
        raise DomainError(f"noise_power must be >= 0, got {noise_power}")
    snr = math.inf if noise_power == 0 else desired_mean_power / noise_power
    ratios = [desired_mean_power / (threshold * p) for p in interferer_mean_powers]
    return rayleigh_interference_success(snr, threshold, ratios)
