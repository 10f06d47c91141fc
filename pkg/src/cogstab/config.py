"""Network descriptions and configuration-file ingestion.

Two configuration shapes exist:

  * :class:`NetworkConfig` — the fully asymmetric description: per-node
    powers, thresholds, sensing error probabilities, and per-directed-link
    distances and fading variances.
  * :class:`SymmetricConfig` — the reduced parameter set of the symmetric
    geometry (all secondary nodes share one power, access probability,
    threshold, and link statistics). It expands losslessly into a
    :class:`NetworkConfig`.

Config files are JSON trees. Power-like and ratio-like entries may be
written either as plain linear numbers or as strings with a decibel
suffix (``"10 dBW"``, ``"-5 dB"``); everything is normalized to linear
units at parse time and all internal math is linear.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError

Matrix = tuple[tuple[float, ...], ...]
Vector = tuple[float, ...]


def linear_value(value: Any, *, name: str = "value") -> float:
    """Normalize a config entry to a linear float.

    Accepts a plain number, or a string like ``"10 dBW"`` / ``"-5 dB"``
    which is converted as ``10**(x/10)``.
    """
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        lowered = text.lower()
        for suffix in ("dbw", "db"):
            if lowered.endswith(suffix):
                num = text[: len(text) - len(suffix)].strip()
                try:
                    return 10.0 ** (float(num) / 10.0)
                except ValueError:
                    raise ConfigError(f"{name}: cannot parse decibel value {value!r}") from None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{name}: cannot parse numeric value {value!r}") from None
    raise ConfigError(f"{name}: expected number or dB string, got {type(value).__name__}")


def _check_prob(value: float, name: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    return value


def _check_pos(value: float, name: str) -> float:
    if not (value > 0):
        raise ConfigError(f"{name} must be > 0, got {value}")
    return value


@dataclass(frozen=True)
class NetworkConfig:
    """Full asymmetric system description.

    Distances and fading variances are indexed by directed link:
    ``dist_sec_sec[i][j]`` is secondary source i -> secondary destination j,
    ``dist_sec_p[i]`` is secondary source i -> primary destination,
    ``dist_p_sec[j]`` is primary source -> secondary destination j, and
    ``dist_p_src[i]`` is primary source -> secondary source i (the decode
    link used by relaying). ``fade_*`` carry the matching variances.
    """

    n_secondary: int
    primary_power: float
    secondary_powers: Vector
    path_loss_exp: float
    noise_power: float
    primary_threshold: float
    secondary_thresholds: Vector
    dist_pp: float
    dist_sec_sec: Matrix
    dist_p_sec: Vector
    dist_sec_p: Vector
    dist_p_src: Vector
    fade_pp: float
    fade_sec_sec: Matrix
    fade_p_sec: Vector
    fade_sec_p: Vector
    fade_p_src: Vector
    access_probs: Vector
    miss_probs: Vector
    false_alarm_probs: Vector

    def __post_init__(self):
        n = self.n_secondary
        if int(n) != n or n < 0:
            raise ConfigError(f"n_secondary must be a nonnegative integer, got {n}")
        _check_pos(self.primary_power, "primary_power")
        _check_pos(self.path_loss_exp, "path_loss_exp")
        if self.noise_power < 0:
            raise ConfigError(f"noise_power must be >= 0, got {self.noise_power}")
        _check_pos(self.primary_threshold, "primary_threshold")
        _check_pos(self.dist_pp, "dist_pp")
        _check_pos(self.fade_pp, "fade_pp")
        for name in ("secondary_powers", "secondary_thresholds", "dist_p_sec",
                     "dist_sec_p", "dist_p_src", "fade_p_sec", "fade_sec_p",
                     "fade_p_src", "access_probs", "miss_probs", "false_alarm_probs"):
            vec = getattr(self, name)
            if len(vec) != n:
                raise ConfigError(f"{name} must have length {n}, got {len(vec)}")
        for name in ("dist_sec_sec", "fade_sec_sec"):
            mat = getattr(self, name)
            if len(mat) != n or any(len(row) != n for row in mat):
                raise ConfigError(f"{name} must be a {n}x{n} matrix")
        for name in ("secondary_powers", "secondary_thresholds", "dist_p_sec",
                     "dist_sec_p", "dist_p_src", "fade_p_sec", "fade_sec_p",
                     "fade_p_src"):
            for v in getattr(self, name):
                _check_pos(v, name)
        for name in ("dist_sec_sec", "fade_sec_sec"):
            for row in getattr(self, name):
                for v in row:
                    _check_pos(v, name)
        for name in ("access_probs", "miss_probs", "false_alarm_probs"):
            for v in getattr(self, name):
                _check_prob(v, name)

    # Mean received powers (transmit power x distance^-alpha x variance).

    def rx_primary_at_dp(self) -> float:
        return self.primary_power * self.dist_pp ** (-self.path_loss_exp) * self.fade_pp

    def rx_sec_at_dp(self, i: int) -> float:
        return (self.secondary_powers[i]
                * self.dist_sec_p[i] ** (-self.path_loss_exp)
                * self.fade_sec_p[i])

    def rx_sec_at_dest(self, i: int, j: int) -> float:
        return (self.secondary_powers[i]
                * self.dist_sec_sec[i][j] ** (-self.path_loss_exp)
                * self.fade_sec_sec[i][j])

    def rx_primary_at_dest(self, j: int) -> float:
        return (self.primary_power
                * self.dist_p_sec[j] ** (-self.path_loss_exp)
                * self.fade_p_sec[j])

    def rx_primary_at_src(self, i: int) -> float:
        return (self.primary_power
                * self.dist_p_src[i] ** (-self.path_loss_exp)
                * self.fade_p_src[i])

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SymmetricConfig:
    """Symmetric-geometry parameter set.

    All N secondary nodes share transmit power ``p0``, access probability
    ``q``, SINR threshold ``beta``, sensing error probabilities ``pe`` /
    ``pf``, and the link statistics below. Distances: ``r_j`` from any
    secondary source to any secondary destination, ``r_0`` from any
    secondary source to the primary destination, ``r`` from the primary
    source to any secondary source, ``r_pp`` for the primary link itself,
    and ``r_pd`` from the primary source to any secondary destination.
    Fading variances follow the same link roles (``sigma_tilde_sq``,
    ``sigma0_sq``, ``sigma_sq``, ``sigma_pp_sq``, ``sigma_pd_sq``).
    """

    n_secondary: int
    p0: float
    q: float
    beta: float
    beta_p: float
    r_j: float
    r_0: float
    r: float
    sigma_tilde_sq: float
    sigma0_sq: float
    sigma_sq: float
    sigma_pp_sq: float
    p_p: float
    noise: float
    pe: float = 0.0
    pf: float = 0.0
    r_pp: float = 1.0
    r_pd: float = 1.0
    sigma_pd_sq: float = 1.0
    path_loss_exp: float = 2.0

    def __post_init__(self):
        if int(self.n_secondary) != self.n_secondary or self.n_secondary < 0:
            raise ConfigError(f"n_secondary must be a nonnegative integer, got {self.n_secondary}")
        for name in ("p0", "beta", "beta_p", "r_j", "r_0", "r", "r_pp", "r_pd",
                     "sigma_tilde_sq", "sigma0_sq", "sigma_sq", "sigma_pp_sq",
                     "sigma_pd_sq", "p_p", "path_loss_exp"):
            _check_pos(getattr(self, name), name)
        if self.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        for name in ("q", "pe", "pf"):
            _check_prob(getattr(self, name), name)

    @property
    def a(self) -> float:
        """Primary-to-secondary received-power ratio at the primary
        destination, normalized by the primary's SINR threshold."""
        alpha = self.path_loss_exp
        num = self.sigma_pp_sq * self.p_p * self.r_pp ** (-alpha)
        den = self.sigma0_sq * self.beta_p * self.p0 * self.r_0 ** (-alpha)
        return num / den

    @property
    def primary_busy_interference(self) -> float:
        """Mean interference-to-signal factor the busy primary inflicts on
        a secondary destination, scaled by the secondary threshold."""
        alpha = self.path_loss_exp
        num = self.p_p * self.r_pd ** (-alpha) * self.beta * self.sigma_pd_sq
        den = self.p0 * self.r_j ** (-alpha) * self.sigma_tilde_sq
        return num / den

    @property
    def relay_snr(self) -> float:
        """Mean received SNR of one relay transmission at the primary
        destination, normalized by the primary threshold."""
        if self.noise == 0:
            return math.inf
        return self.p0 * self.r_0 ** (-self.path_loss_exp) * self.sigma0_sq / (
            self.beta_p * self.noise)

    def expand(self) -> NetworkConfig:
        """Expand into the equivalent asymmetric description."""
        n = self.n_secondary
        return NetworkConfig(
            n_secondary=n,
            primary_power=self.p_p,
            secondary_powers=(self.p0,) * n,
            path_loss_exp=self.path_loss_exp,
            noise_power=self.noise,
            primary_threshold=self.beta_p,
            secondary_thresholds=(self.beta,) * n,
            dist_pp=self.r_pp,
            dist_sec_sec=((self.r_j,) * n,) * n,
            dist_p_sec=(self.r_pd,) * n,
            dist_sec_p=(self.r_0,) * n,
            dist_p_src=(self.r,) * n,
            fade_pp=self.sigma_pp_sq,
            fade_sec_sec=((self.sigma_tilde_sq,) * n,) * n,
            fade_p_sec=(self.sigma_pd_sq,) * n,
            fade_sec_p=(self.sigma0_sq,) * n,
            fade_p_src=(self.sigma_sq,) * n,
            access_probs=(self.q,) * n,
            miss_probs=(self.pe,) * n,
            false_alarm_probs=(self.pf,) * n,
        )

    def replace(self, **changes) -> "SymmetricConfig":
        return dataclasses.replace(self, **changes)


# --- config file ingestion ---------------------------------------------

_SYMMETRIC_FIELDS = {f.name for f in dataclasses.fields(SymmetricConfig)}
_NETWORK_FIELDS = {f.name for f in dataclasses.fields(NetworkConfig)}
_INT_FIELDS = {"n_secondary"}


def symmetric_from_dict(raw: dict, *, where: str = "symmetric") -> SymmetricConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(raw) - _SYMMETRIC_FIELDS
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if key in _INT_FIELDS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{where}.{key}: expected an integer")
            kwargs[key] = value
        else:
            kwargs[key] = linear_value(value, name=f"{where}.{key}")
    try:
        return SymmetricConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {_missing_fields_message(exc)}") from None


def _missing_fields_message(exc: TypeError) -> str:
    text = str(exc)
    return "missing required field(s): " + text.split(":", 1)[-1].strip() if "missing" in text else text


def _vector(raw: Any, n: int, name: str) -> Vector:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return (float(raw),) * n
    if isinstance(raw, str):
        return (linear_value(raw, name=name),) * n
    if isinstance(raw, list):
        if len(raw) != n:
            raise ConfigError(f"{name} must have length {n}, got {len(raw)}")
        return tuple(linear_value(v, name=name) for v in raw)
    raise ConfigError(f"{name}: expected number or list of length {n}")


def _matrix(raw: Any, n: int, name: str) -> Matrix:
    if isinstance(raw, (int, float, str)) and not isinstance(raw, bool):
        v = linear_value(raw, name=name)
        return ((v,) * n,) * n
    if isinstance(raw, list):
        if len(raw) != n:
            raise ConfigError(f"{name} must be a {n}x{n} matrix")
        return tuple(_vector(row, n, name) for row in raw)
    raise ConfigError(f"{name}: expected number or {n}x{n} matrix")


def network_from_dict(raw: dict, *, where: str = "network") -> NetworkConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(raw) - _NETWORK_FIELDS
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = {"n_secondary"} - set(raw)
    if missing:
        raise ConfigError(f"{where}: missing required field(s) {sorted(missing)}")
    n = raw["n_secondary"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ConfigError(f"{where}.n_secondary: expected a nonnegative integer")
    kwargs: dict[str, Any] = {"n_secondary": n}
    vector_fields = {"secondary_powers", "secondary_thresholds", "dist_p_sec",
                     "dist_sec_p", "dist_p_src", "fade_p_sec", "fade_sec_p",
                     "fade_p_src", "access_probs", "miss_probs", "false_alarm_probs"}
    matrix_fields = {"dist_sec_sec", "fade_sec_sec"}
    for key, value in raw.items():
        if key == "n_secondary":
            continue
        name = f"{where}.{key}"
        if key in vector_fields:
            kwargs[key] = _vector(value, n, name)
        elif key in matrix_fields:
            kwargs[key] = _matrix(value, n, name)
        else:
            kwargs[key] = linear_value(value, name=name)
    try:
        return NetworkConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {_missing_fields_message(exc)}") from None


def config_to_dict(cfg: SymmetricConfig | NetworkConfig) -> dict:
    """Serialize a config with all values in linear units.

    Parsing the result yields a config equal to ``cfg`` field by field.
    """
    def plain(value):
        if isinstance(value, tuple):
            return [plain(v) for v in value]
        return value

    body = {f.name: plain(getattr(cfg, f.name)) for f in dataclasses.fields(cfg)}
    key = "symmetric" if isinstance(cfg, SymmetricConfig) else "network"
    return {key: body}


@dataclass(frozen=True)
class ConfigBundle:
    """A parsed configuration file: the network description plus the
    run-level knobs that accompany it."""

    config: SymmetricConfig | NetworkConfig
    lambda_p: float | None = None
    relay: bool = False
    p0_cap: float | None = None
    sim: dict = field(default_factory=dict)

    @property
    def symmetric(self) -> SymmetricConfig:
        if not isinstance(self.config, SymmetricConfig):
            raise ConfigError("this operation requires a 'symmetric' configuration")
        return self.config


_BUNDLE_KEYS = {"symmetric", "network", "lambda_p", "relay", "p0_cap", "sim"}
_SIM_KEYS = {"n_slots", "seed", "mode", "warmup_slots", "replications"}


def parse_config_tree(tree: dict) -> ConfigBundle:
    if not isinstance(tree, dict):
        raise ConfigError("top level: expected an object")
    unknown = set(tree) - _BUNDLE_KEYS
    if unknown:
        raise ConfigError(f"top level: unknown field(s) {sorted(unknown)}")
    has_sym = "symmetric" in tree
    has_net = "network" in tree
    if has_sym == has_net:
        raise ConfigError("top level: exactly one of 'symmetric' or 'network' is required")
    cfg = (symmetric_from_dict(tree["symmetric"]) if has_sym
           else network_from_dict(tree["network"]))
    lambda_p = None
    if "lambda_p" in tree:
        lambda_p = linear_value(tree["lambda_p"], name="lambda_p")
        _check_prob(lambda_p, "lambda_p")
    relay = tree.get("relay", False)
    if not isinstance(relay, bool):
        raise ConfigError("relay: expected true or false")
    p0_cap = None
    if "p0_cap" in tree and tree["p0_cap"] is not None:
        p0_cap = _check_pos(linear_value(tree["p0_cap"], name="p0_cap"), "p0_cap")
    sim = tree.get("sim", {})
    if not isinstance(sim, dict):
        raise ConfigError("sim: expected an object")
    unknown = set(sim) - _SIM_KEYS
    if unknown:
        raise ConfigError(f"sim: unknown field(s) {sorted(unknown)}")
    return ConfigBundle(config=cfg, lambda_p=lambda_p, relay=relay, p0_cap=p0_cap, sim=dict(sim))


def load_config(path: str) -> ConfigBundle:
    """Parse a JSON configuration file into a :class:`ConfigBundle`."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tree = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config_tree(tree)
