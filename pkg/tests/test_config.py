"""Configuration parsing, unit normalization, and symmetric expansion."""

import json
import math

import pytest

from cogstab import (
    ConfigError,
    NetworkConfig,
    SymmetricConfig,
    linear_value,
    parse_config_tree,
)
from cogstab.config import config_to_dict


def sym_kwargs(**overrides):
    base = dict(n_secondary=3, p0=1.0, q=0.5, beta=2.0, beta_p=1.0,
                r_j=1.0, r_0=2.0, r=1.5, sigma_tilde_sq=1.0, sigma0_sq=0.5,
                sigma_sq=0.8, sigma_pp_sq=1.2, p_p=2.0, noise=0.1)
    base.update(overrides)
    return base


class TestLinearValue:
    def test_numbers_pass_through(self):
        assert linear_value(3) == 3.0
        assert linear_value(0.25) == 0.25

    def test_dbw_conversion(self):
        assert linear_value("10 dBW") == pytest.approx(10.0)
        assert linear_value("-5dB") == pytest.approx(10 ** -0.5)
        assert linear_value("0 dBW") == pytest.approx(1.0)

    def test_plain_numeric_string(self):
        assert linear_value("2.5") == 2.5

    def test_rejects_garbage(self):
        with pytest.raises(ConfigError, match="p0"):
            linear_value("ten dBW", name="p0")
        with pytest.raises(ConfigError):
            linear_value(True)


class TestSymmetricConfig:
    def test_accessor_a(self):
        cfg = SymmetricConfig(**sym_kwargs(p0=0.5, r_0=1.0, r_pp=1.0))
        expected = cfg.sigma_pp_sq * cfg.p_p / (cfg.sigma0_sq * cfg.beta_p * cfg.p0)
        assert cfg.a == pytest.approx(expected, rel=1e-12)

    def test_validation_names_field(self):
        with pytest.raises(ConfigError, match="q"):
            SymmetricConfig(**sym_kwargs(q=1.5))
        with pytest.raises(ConfigError, match="p0"):
            SymmetricConfig(**sym_kwargs(p0=0.0))
        with pytest.raises(ConfigError, match="n_secondary"):
            SymmetricConfig(**sym_kwargs(n_secondary=-1))

    def test_expand_shapes_and_values(self):
        cfg = SymmetricConfig(**sym_kwargs())
        net = cfg.expand()
        n = cfg.n_secondary
        assert net.n_secondary == n
        assert net.secondary_powers == (cfg.p0,) * n
        assert net.access_probs == (cfg.q,) * n
        assert len(net.dist_sec_sec) == n and len(net.dist_sec_sec[0]) == n
        assert net.dist_sec_sec[1][2] == cfg.r_j
        assert net.fade_sec_p == (cfg.sigma0_sq,) * n
        assert net.fade_p_src == (cfg.sigma_sq,) * n
        assert net.dist_pp == cfg.r_pp

    def test_expand_zero_nodes(self):
        cfg = SymmetricConfig(**sym_kwargs(n_secondary=0))
        net = cfg.expand()
        assert net.n_secondary == 0
        assert net.secondary_powers == ()


class TestNetworkConfig:
    def test_dimension_mismatch(self):
        cfg = SymmetricConfig(**sym_kwargs()).expand()
        with pytest.raises(ConfigError, match="access_probs"):
            cfg.replace(access_probs=(0.5,))

    def test_rx_helpers(self):
        cfg = SymmetricConfig(**sym_kwargs()).expand()
        alpha = cfg.path_loss_exp
        assert cfg.rx_sec_at_dp(0) == pytest.approx(
            cfg.secondary_powers[0] * cfg.dist_sec_p[0] ** (-alpha) * cfg.fade_sec_p[0])
        assert cfg.rx_primary_at_dp() == pytest.approx(
            cfg.primary_power * cfg.dist_pp ** (-alpha) * cfg.fade_pp)


class TestConfigTree:
    def test_symmetric_tree_with_db_units(self):
        tree = {
            "symmetric": dict(sym_kwargs(), p0="0 dBW", noise="-10 dBW"),
            "lambda_p": 0.2,
            "relay": True,
            "p0_cap": "10 dBW",
        }
        bundle = parse_config_tree(tree)
        assert isinstance(bundle.config, SymmetricConfig)
        assert bundle.config.p0 == pytest.approx(1.0)
        assert bundle.config.noise == pytest.approx(0.1)
        assert bundle.relay is True
        assert bundle.p0_cap == pytest.approx(10.0)
        assert bundle.lambda_p == 0.2

    def test_network_tree_with_broadcast(self):
        tree = {
            "network": {
                "n_secondary": 2,
                "primary_power": 1.0,
                "secondary_powers": 0.5,
                "path_loss_exp": 2.0,
                "noise_power": 0.1,
                "primary_threshold": 1.0,
                "secondary_thresholds": [1.0, 2.0],
                "dist_pp": 1.0,
                "dist_sec_sec": 1.0,
                "dist_p_sec": 1.0,
                "dist_sec_p": [1.0, 2.0],
                "dist_p_src": 1.0,
                "fade_pp": 1.0,
                "fade_sec_sec": [[1.0, 0.5], [0.5, 1.0]],
                "fade_p_sec": 1.0,
                "fade_sec_p": 1.0,
                "fade_p_src": 1.0,
                "access_probs": 0.5,
                "miss_probs": 0.0,
                "false_alarm_probs": 0.0,
            }
        }
        bundle = parse_config_tree(tree)
        net = bundle.config
        assert isinstance(net, NetworkConfig)
        assert net.secondary_powers == (0.5, 0.5)
        assert net.fade_sec_sec[0][1] == 0.5
        assert net.dist_sec_p == (1.0, 2.0)

    def test_unknown_field_is_named(self):
        with pytest.raises(ConfigError, match="sigma_typo"):
            parse_config_tree({"symmetric": dict(sym_kwargs(), sigma_typo=1.0)})

    def test_missing_section(self):
        with pytest.raises(ConfigError, match="symmetric"):
            parse_config_tree({"lambda_p": 0.1})

    def test_round_trip_is_semantically_identical(self):
        cfg = SymmetricConfig(**sym_kwargs(pe=0.2, pf=0.1))
        tree = config_to_dict(cfg)
        tree["lambda_p"] = 0.15
        again = parse_config_tree(json.loads(json.dumps(tree)))
        assert again.config == cfg

    def test_round_trip_network(self):
        cfg = SymmetricConfig(**sym_kwargs()).expand()
        tree = config_to_dict(cfg)
        again = parse_config_tree(json.loads(json.dumps(tree)))
        assert again.config == cfg

    def test_db_units_normalize_before_round_trip(self):
        tree = {"symmetric": dict(sym_kwargs(), p0="3 dBW")}
        first = parse_config_tree(tree).config
        second = parse_config_tree(config_to_dict(first)).config
        assert first == second
        assert first.p0 == pytest.approx(10 ** 0.3)
