"""Experiment sweeps: axis definitions, canned figure specs, table output.

A sweep spec names one axis (secondary power, node count, arrival rate,
access probability, miss probability, or relay-link SNR), a value grid,
one metric, the engines to run, and optionally a list of parameter
families overlaid on the same axis. Sweep tables use a fixed column
schema; optimize-kind specs produce the optimizer table instead.

Output files are delimiter-separated with a comment block recording the
spec hash, seed, and code version, so regenerated data is diffable.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Sequence

from . import __version__, analysis
from .config import ConfigBundle, SymmetricConfig, linear_value, parse_config_tree
from .errors import CogstabError, ConfigError, InfeasiblePrimaryError, UnstableError
from .optimizer import maximize_sum_throughput
from .simulator import (
    MODE_IMPERFECT,
    MODE_PERFECT,
    MODE_RELAY,
    SimConfig,
    run_replications,
)

SWEEP_AXES = ("P0", "N", "lambda_p", "q", "Pe", "Pd-SNR")
SWEEP_METRICS = ("mu_p", "mu_p_norm", "mu_p_max", "lambda_j", "sum_throughput",
                 "lambda_p_max")
ENGINES = ("analytic", "simulate")
SWEEP_COLUMNS = ("axis_name", "axis_value", "engine", "metric_name",
                 "value", "stderr", "verdict")
OPTIMIZE_COLUMNS = ("lambda_frac", "family", "q_opt", "p0_opt",
                    "sum_throughput", "feasible")
CANNED_SPECS = ("fig1", "fig2", "fig5", "fig6", "fig7", "fig9")


@dataclass(frozen=True)
class Family:
    label: str
    overrides: dict

    def apply(self, bundle: ConfigBundle) -> ConfigBundle:
        cfg = bundle.config
        lambda_p = bundle.lambda_p
        for key, value in self.overrides.items():
            if key == "lambda_p":
                lambda_p = linear_value(value, name="family.lambda_p")
            elif key == "n_secondary":
                cfg = cfg.replace(n_secondary=int(value))
            else:
                cfg = cfg.replace(**{key: linear_value(value, name=f"family.{key}")})
        return ConfigBundle(config=cfg, lambda_p=lambda_p, relay=bundle.relay,
                            p0_cap=bundle.p0_cap, sim=bundle.sim)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep or optimize experiment."""

    name: str
    kind: str                       # "sweep" | "optimize"
    base: dict                      # raw config tree (parsed lazily per point)
    grid: tuple[float, ...]
    sweep_axis: str = "lambda_p"
    metric: str = "mu_p_norm"
    engines: tuple[str, ...] = ("analytic",)
    families: tuple[Family, ...] = ()
    replications: int = 1
    slots: int = 200_000
    output_path: str | None = None
    log_axis: bool = False
    opt_grid: tuple[int, int] = (200, 200)

    def __post_init__(self):
        if self.kind not in ("sweep", "optimize"):
            raise ConfigError(f"spec kind must be sweep or optimize, got {self.kind!r}")
        if not self.grid:
            raise ConfigError("spec grid must be non-empty")
        if self.kind == "sweep":
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}")
            if self.metric not in SWEEP_METRICS:
                raise ConfigError(f"metric must be one of {SWEEP_METRICS}")
            for e in self.engines:
                if e not in ENGINES:
                    raise ConfigError(f"engines entries must be in {ENGINES}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")

    def bundle(self) -> ConfigBundle:
        return parse_config_tree(self.base)

    def sha256(self) -> str:
        canon = json.dumps(spec_to_dict(self), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _parse_grid(raw: Any) -> tuple[tuple[float, ...], bool]:
    if isinstance(raw, list):
        return tuple(linear_value(v, name="grid") for v in raw), False
    if isinstance(raw, dict):
        for key in raw:
            if key not in ("start", "stop", "count", "spacing"):
                raise ConfigError(f"grid: unknown field {key!r}")
        try:
            start, stop = raw["start"], raw["stop"]
            count = raw["count"]
        except KeyError as exc:
            raise ConfigError(f"grid: missing field {exc.args[0]!r}") from None
        spacing = raw.get("spacing", "linear")
        if count < 2:
            raise ConfigError("grid count must be >= 2")
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid needs positive endpoints")
            ratio = (stop / start) ** (1.0 / (count - 1))
            return tuple(start * ratio ** i for i in range(count)), True
        if spacing != "linear":
            raise ConfigError(f"grid spacing must be linear or log, got {spacing!r}")
        step = (stop - start) / (count - 1)
        return tuple(start + step * i for i in range(count)), False
    raise ConfigError("grid: expected a list or a start/stop/count object")


def spec_from_dict(tree: dict, *, name: str | None = None) -> ExperimentSpec:
    if not isinstance(tree, dict):
        raise ConfigError("spec: expected an object")
    known = {"name", "kind", "base", "grid", "sweep_axis", "metric", "engines",
             "families", "replications", "slots", "output", "opt_grid"}
    unknown = set(tree) - known
    if unknown:
        raise ConfigError(f"spec: unknown field(s) {sorted(unknown)}")
    if "base" not in tree or "grid" not in tree:
        raise ConfigError("spec: 'base' and 'grid' are required")
    grid, log_axis = _parse_grid(tree["grid"])
    families = tuple(
        Family(label=str(f.get("label", i)), overrides=dict(f.get("overrides", {})))
        for i, f in enumerate(tree.get("families", [])))
    kwargs = dict(
        name=str(tree.get("name", name or "experiment")),
        kind=str(tree.get("kind", "sweep")),
        base=tree["base"],
        grid=grid,
        families=families,
        replications=int(tree.get("replications", 1)),
        slots=int(tree.get("slots", 200_000)),
        output_path=tree.get("output"),
        log_axis=log_axis,
    )
    if "sweep_axis" in tree:
        kwargs["sweep_axis"] = str(tree["sweep_axis"])
    if "metric" in tree:
        kwargs["metric"] = str(tree["metric"])
    if "engines" in tree:
        kwargs["engines"] = tuple(tree["engines"])
    if "opt_grid" in tree:
        kwargs["opt_grid"] = tuple(int(v) for v in tree["opt_grid"])
    spec = ExperimentSpec(**kwargs)
    spec.bundle()  # validate the base config eagerly
    return spec


def spec_to_dict(spec: ExperimentSpec) -> dict:
    return {
        "name": spec.name,
        "kind": spec.kind,
        "base": spec.base,
        "grid": list(spec.grid),
        "sweep_axis": spec.sweep_axis,
        "metric": spec.metric,
        "engines": list(spec.engines),
        "families": [{"label": f.label, "overrides": f.overrides} for f in spec.families],
        "replications": spec.replications,
        "slots": spec.slots,
    }


def load_spec(path_or_name: str) -> ExperimentSpec:
    """Load a spec from a JSON file path or a canned name (fig1, fig2,
    fig5, fig6, fig7, fig9)."""
    if path_or_name in CANNED_SPECS:
        text = resources.files("cogstab").joinpath(f"specs/{path_or_name}.json").read_text()
        return spec_from_dict(json.loads(text), name=path_or_name)
    try:
        with open(path_or_name, "r", encoding="utf-8") as fh:
            tree = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read spec {path_or_name}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path_or_name}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return spec_from_dict(tree, name=path_or_name)


def apply_axis(bundle: ConfigBundle, axis: str, value: float) -> ConfigBundle:
    """Set one swept parameter on a configuration bundle."""
    cfg = bundle.config
    lambda_p = bundle.lambda_p
    if axis == "lambda_p":
        lambda_p = value
    elif axis == "N":
        cfg = cfg.replace(n_secondary=int(round(value)))
    elif axis == "P0":
        cfg = _require_symmetric(cfg, axis).replace(p0=value)
    elif axis == "q":
        cfg = _require_symmetric(cfg, axis).replace(q=value)
    elif axis == "Pe":
        cfg = _require_symmetric(cfg, axis).replace(pe=value)
    elif axis == "Pd-SNR":
        # The relay-link mean SNR; realized by scaling the secondary power.
        sym = _require_symmetric(cfg, axis)
        alpha = sym.path_loss_exp
        p0 = value * sym.beta_p * sym.noise / (sym.r_0 ** (-alpha) * sym.sigma0_sq)
        cfg = sym.replace(p0=p0)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    return ConfigBundle(config=cfg, lambda_p=lambda_p, relay=bundle.relay,
                        p0_cap=bundle.p0_cap, sim=bundle.sim)


def _require_symmetric(cfg, axis) -> SymmetricConfig:
    if not isinstance(cfg, SymmetricConfig):
        raise ConfigError(f"sweep axis {axis!r} requires a symmetric configuration")
    return cfg


def _analytic_value(spec: ExperimentSpec, bundle: ConfigBundle) -> float:
    cfg = bundle.config
    metric = spec.metric
    lam = bundle.lambda_p or 0.0
    if metric == "mu_p_max":
        return analysis.mu_p_max(cfg)
    if metric == "mu_p":
        return _mu_p_of(cfg)
    if metric == "mu_p_norm":
        return _mu_p_of(cfg) / analysis.mu_p_max(cfg)
    if metric == "lambda_p_max":
        if isinstance(cfg, SymmetricConfig):
            return analysis.lambda_p_max_relay(cfg)
        return analysis.relay_asymmetric(cfg).lambda_p_max
    if metric in ("lambda_j", "sum_throughput"):
        sym = _require_symmetric(cfg, spec.sweep_axis)
        if bundle.relay:
            rate = analysis.secondary_rate_relay(sym, lam)
        else:
            rate = analysis.secondary_rate_imperfect_symmetric(sym, lam)
        return rate * (sym.n_secondary if metric == "sum_throughput" else 1.0)
    raise ConfigError(f"unknown metric {metric!r}")


def _mu_p_of(cfg) -> float:
    if isinstance(cfg, SymmetricConfig):
        return analysis.mu_p_imperfect_symmetric(cfg)
    return analysis.mu_p_imperfect_general(cfg)


def sim_mode_for(bundle: ConfigBundle) -> str:
    if bundle.relay:
        return MODE_RELAY
    net = bundle.config.expand() if isinstance(bundle.config, SymmetricConfig) else bundle.config
    if any(net.miss_probs) or any(net.false_alarm_probs):
        return MODE_IMPERFECT
    return MODE_PERFECT


def _simulated_value(spec: ExperimentSpec, bundle: ConfigBundle,
                     seed: int, jobs: int) -> tuple[float, float, str]:
    cfg = bundle.config
    net = cfg.expand() if isinstance(cfg, SymmetricConfig) else cfg
    mode = sim_mode_for(bundle)
    metric = spec.metric
    if metric in ("mu_p", "mu_p_norm", "mu_p_max"):
        # Service-rate metrics: saturate the primary so every slot measures it.
        lam = 1.0
        if metric == "mu_p_max":
            mode = MODE_PERFECT
    elif metric in ("lambda_j", "sum_throughput"):
        lam = bundle.lambda_p or 0.0
    else:
        raise ConfigError(f"metric {metric!r} has no simulation estimator")
    sc = SimConfig(network=net, lambda_p=lam, n_slots=spec.slots, seed=seed, mode=mode)
    res = run_replications(sc, spec.replications, jobs=jobs)
    if metric in ("mu_p", "mu_p_max"):
        return res.empirical_mu_p, res.mu_p_stderr, "saturated"
    if metric == "mu_p_norm":
        denom = analysis.mu_p_max(cfg)
        return res.empirical_mu_p / denom, res.mu_p_stderr / denom, "saturated"
    n = net.n_secondary
    pooled = sum(res.delivered_own) / (res.measured_slots * max(n, 1))
    batches = [sum(node[b] for node in res.batch_delivered_own)
               for b in range(len(res.batch_slots))]
    from .simulator import _rate_se

    se = _rate_se(batches, [s * max(n, 1) for s in res.batch_slots])
    if metric == "sum_throughput":
        return pooled * n, se * n, res.stability_verdict
    return pooled, se, res.stability_verdict


@dataclass(frozen=True)
class SweepRow:
    axis_name: str
    axis_value: float
    engine: str
    metric_name: str
    value: float | None
    stderr: float | None
    verdict: str

    def cells(self) -> list[str]:
        return [self.axis_name, _fmt(self.axis_value), self.engine, self.metric_name,
                _fmt(self.value), _fmt(self.stderr), self.verdict]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_sweep(spec: ExperimentSpec, seed: int = 0, jobs: int = 1) -> list[SweepRow]:
    """Evaluate every (family, grid point, engine) cell of a sweep.

    A failing cell produces an in-row error verdict; the sweep continues.
    """
    if spec.kind != "sweep":
        raise ConfigError(f"spec {spec.name!r} is not a sweep")
    base = spec.bundle()
    families = spec.families or (Family(label="", overrides={}),)
    rows: list[SweepRow] = []
    for family in families:
        metric_name = spec.metric if not family.label else f"{spec.metric}@{family.label}"
        fam_bundle = family.apply(base)
        for idx, value in enumerate(spec.grid):
            point = apply_axis(fam_bundle, spec.sweep_axis, value)
            for engine in spec.engines:
                try:
                    if engine == "analytic":
                        got = _analytic_value(spec, point)
                        rows.append(SweepRow(spec.sweep_axis, value, engine,
                                             metric_name, got, None, "ok"))
                    else:
                        point_seed = seed + 7919 * idx
                        got, se, verdict = _simulated_value(spec, point, point_seed, jobs)
                        rows.append(SweepRow(spec.sweep_axis, value, engine,
                                             metric_name, got, se, verdict))
                except CogstabError as exc:
                    rows.append(SweepRow(spec.sweep_axis, value, engine, metric_name,
                                         None, None, f"error:{type(exc).__name__}"))
    return rows


@dataclass(frozen=True)
class OptimizeRow:
    lambda_frac: float
    family: str
    q_opt: float | None
    p0_opt: float | None
    sum_throughput: float | None
    feasible: bool

    def cells(self) -> list[str]:
        return [_fmt(self.lambda_frac), self.family, _fmt(self.q_opt),
                _fmt(self.p0_opt), _fmt(self.sum_throughput), str(self.feasible).lower()]


def run_optimize(spec_or_bundle, lambda_fracs: Sequence[float],
                 families: Sequence[Family] = (), opt_grid=(200, 200),
                 p0_cap: float | None = None) -> list[OptimizeRow]:
    """Optimize (q, p0) at each normalized arrival rate for each family.

    ``lambda_fracs`` are fractions of the interference-free primary rate.
    Infeasible points are emitted with an explicit flag rather than
    aborting the table.
    """
    if isinstance(spec_or_bundle, ExperimentSpec):
        spec = spec_or_bundle
        base = spec.bundle()
        families = spec.families or (Family(label="", overrides={}),)
        opt_grid = spec.opt_grid
        lambda_fracs = spec.grid
    else:
        base = spec_or_bundle
        families = tuple(families) or (Family(label="", overrides={}),)
    rows: list[OptimizeRow] = []
    for family in families:
        bundle = family.apply(base)
        sym = bundle.symmetric
        cap = p0_cap or bundle.p0_cap
        if cap is None:
            raise ConfigError("optimization requires a p0_cap (hardware power cap)")
        mu_max = analysis.mu_p_max(sym)
        for frac in lambda_fracs:
            lam = frac * mu_max
            try:
                res = maximize_sum_throughput(sym, lam, cap, grid=opt_grid)
                rows.append(OptimizeRow(frac, family.label, res.q_opt, res.p0_opt,
                                        res.value, True))
            except InfeasiblePrimaryError:
                rows.append(OptimizeRow(frac, family.label, None, None, None, False))
            except UnstableError:
                rows.append(OptimizeRow(frac, family.label, None, None, None, False))
    return rows


def write_table(columns: Sequence[str], rows: Sequence, meta: dict, path: str) -> None:
    """Write a delimiter-separated table with a comment header."""
    buf = format_table(columns, rows, meta)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf)


def format_table(columns: Sequence[str], rows: Sequence, meta: dict) -> str:
    out = io.StringIO()
    for key in sorted(meta):
        out.write(f"# {key}={meta[key]}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        cells = row.cells()
        for cell in cells:
            if "," in cell or "\n" in cell:
                raise ConfigError(f"table cell contains the delimiter: {cell!r}")
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def table_meta(spec_name: str, spec_hash: str, seed: int) -> dict:
    return {"experiment": spec_name, "config_sha256": spec_hash,
            "seed": seed, "version": __version__}
