"""Stable-throughput analysis and simulation of a cognitive radio network.

A licensed primary link shares its band with N opportunistic secondary
pairs. The package pairs two independent engines: closed-form expressions
for every throughput, stability, and protection quantity, and a
slot-level Monte Carlo simulator of the actual protocol. Each engine
serves as the other's oracle; the ``validate`` CLI subcommand runs the
cross-check battery.
"""

__version__ = "0.1.0"

from .analysis import (
    AnalyticalReport,
    AsymmetricRelayReport,
    ProtectionConstraints,
    UNBOUNDED,
    analytical_report,
    lambda_p_max_relay,
    mu_p_imperfect_general,
    mu_p_imperfect_symmetric,
    mu_p_max,
    mu_p_relay,
    optimal_q_perfect,
    protection_constraints,
    relay_asymmetric,
    relay_benefit_conditions,
    relay_decode_prob,
    relay_queue_load,
    relay_success_prob,
    secondary_rate_imperfect_general,
    secondary_rate_imperfect_symmetric,
    secondary_rate_perfect_symmetric,
    secondary_rate_relay,
    secondary_region_perfect_asymmetric,
)
from .channel import (
    FadingSpec,
    RateList,
    erlang_tail,
    hypoexponential_tail,
    rayleigh_interference_success,
    sinr_success_probability,
    upper_incomplete_gamma_int,
)
from .config import (
    ConfigBundle,
    NetworkConfig,
    SymmetricConfig,
    linear_value,
    load_config,
    parse_config_tree,
)
from .errors import (
    CogstabError,
    ConfigError,
    DomainError,
    InfeasiblePrimaryError,
    TooLargeError,
    UnstableError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
