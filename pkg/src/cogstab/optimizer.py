"""Secondary sum-throughput maximization over (q, p0).

The objective (symmetric per-node throughput times N) is non-convex in
the access probability and transmit power, so the solver is an
exhaustive coarse grid over the feasible rectangle followed by local
refinement, returning a certificate of the resolution searched and the
margin to the runner-up. Feasibility is checked pointwise: a candidate
is admissible only when the primary's service rate at that exact (q, p0)
strictly exceeds the arrival rate; the boxed per-parameter bounds are
reported for context but are not trusted jointly, since each is derived
holding the other parameter fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import mu_p_max, protection_constraints
from .config import SymmetricConfig
from .errors import DomainError, InfeasiblePrimaryError

DEFAULT_GRID = (200, 200)
REFINE_ROUNDS = 2
REFINE_POINTS = 21  # per axis, step shrinks 10x per round


@dataclass(frozen=True)
class FeasibleBox:
    """Per-parameter protection bounds at the configured operating point."""

    q_max: float
    p0_max: float  # math.inf when unbounded
    p0_cap: float  # hardware cap actually limiting the search
    binding: str   # which bound binds: "none", "access_prob", "power", "both"

    def to_dict(self) -> dict:
        return {
            "q_max": self.q_max,
            "p0_max": "unbounded" if math.isinf(self.p0_max) else self.p0_max,
            "p0_cap": self.p0_cap,
            "binding": self.binding,
        }


@dataclass(frozen=True)
class GridCertificate:
    """What the search actually covered."""

    coarse_grid: tuple[int, int]
    refine_rounds: int
    final_step_q: float
    final_step_p0: float
    runner_up_gap: float
    feasible_points: int

    def to_dict(self) -> dict:
        return {
            "coarse_grid": list(self.coarse_grid),
            "refine_rounds": self.refine_rounds,
            "final_step_q": self.final_step_q,
            "final_step_p0": self.final_step_p0,
            "runner_up_gap": self.runner_up_gap,
            "feasible_points": self.feasible_points,
        }


@dataclass(frozen=True)
class OptimizeResult:
    q_opt: float
    p0_opt: float
    value: float          # sum throughput over all N nodes
    per_node: float
    mu_p_at_opt: float
    box: FeasibleBox
    certificate: GridCertificate

    def to_dict(self) -> dict:
        return {
            "q_opt": self.q_opt,
            "p0_opt": self.p0_opt,
            "value": self.value,
            "per_node": self.per_node,
            "mu_p_at_opt": self.mu_p_at_opt,
            "box": self.box.to_dict(),
            "certificate": self.certificate.to_dict(),
        }


def feasible_box(cfg: SymmetricConfig, lambda_p: float, p0_cap: float) -> FeasibleBox:
    """The per-parameter bounds at the configured (q, p0), intersected
    with the hardware power cap."""
    pc = protection_constraints(cfg, lambda_p)
    if pc.q_max_binding and pc.p0_max_binding:
        binding = "both"
    elif pc.q_max_binding:
        binding = "access_prob"
    elif pc.p0_max_binding:
        binding = "power"
    else:
        binding = "none"
    return FeasibleBox(q_max=pc.q_max, p0_max=pc.p0_max,
                       p0_cap=min(p0_cap, pc.p0_max), binding=binding)


def _objective_fns(cfg: SymmetricConfig, lambda_p: float):
    """Scalar (feasible, value) evaluators over (q, p0).

    Inlines the symmetric service-rate and throughput formulas with the
    p0-dependence factored out, so grid scans stay cheap. The test suite
    pins these against the reference implementations in
    :mod:`cogstab.analysis`.
    """
    n = cfg.n_secondary
    mu_max = mu_p_max(cfg)
    a_times_p0 = cfg.a * cfg.p0
    interference_times_p0 = cfg.primary_busy_interference * cfg.p0
    noise_term_times_p0 = cfg.beta * cfg.noise / (
        cfg.sigma_tilde_sq * cfg.r_j ** (-cfg.path_loss_exp))
    frac = cfg.beta / (1.0 + cfg.beta)
    pe, pf = cfg.pe, cfg.pf

    def mu_p(q: float, p0: float) -> float:
        return mu_max * (1.0 - q * pe / (a_times_p0 / p0 + 1.0)) ** n

    def feasible(q: float, p0: float) -> bool:
        return lambda_p < mu_p(q, p0)

    def value(q: float, p0: float) -> float:
        mu = mu_p(q, p0)
        busy_share = lambda_p / mu
        base = math.exp(-noise_term_times_p0 / p0)
        idle = (1.0 - busy_share) * base * q * (1.0 - pf) * (
            1.0 - q * (1.0 - pf) * frac) ** (n - 1)
        busy = busy_share * base * q * pe / (1.0 + interference_times_p0 / p0) * (
            1.0 - q * pe * frac) ** (n - 1)
        return n * (idle + busy)

    return feasible, value, mu_p


def _scan(points_p0, points_q, feasible, value, best):
    """Scan a candidate grid; p0-major ascending order keeps ties broken
    toward smaller power, then smaller access probability."""
    best_q, best_p0, best_val = best
    second_val = -math.inf
    count = 0
    for p0 in points_p0:
        for q in points_q:
            if not feasible(q, p0):
                continue
            count += 1
            v = value(q, p0)
            if v > best_val:
                second_val = best_val
                best_q, best_p0, best_val = q, p0, v
            elif v > second_val:
                second_val = v
    return (best_q, best_p0, best_val), second_val, count


def _linspace(lo: float, hi: float, count: int) -> list[float]:
    if count == 1:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def maximize_sum_throughput(
    cfg: SymmetricConfig,
    lambda_p: float,
    p0_cap: float,
    grid: tuple[int, int] = DEFAULT_GRID,
    refine_rounds: int = REFINE_ROUNDS,
) -> OptimizeResult:
    """Grid-then-refine maximization of the secondary sum throughput.

    ``grid`` is the coarse resolution (points along q, points along p0);
    each refinement round re-grids a one-coarse-cell neighborhood of the
    incumbent at 10x finer steps. The returned certificate records the
    final step sizes and the value margin to the best non-incumbent
    candidate seen in the last round.
    """
    if cfg.n_secondary < 1:
        raise DomainError("optimization requires at least one secondary node")
    if not (p0_cap > 0):
        raise DomainError(f"p0_cap must be > 0, got {p0_cap}")
    n_q, n_p0 = grid
    if n_q < 2 or n_p0 < 2:
        raise DomainError("grid must have at least 2 points per axis")
    if not (lambda_p < mu_p_max(cfg)):
        raise InfeasiblePrimaryError(
            f"lambda_p={lambda_p} is not below mu_p_max={mu_p_max(cfg)}")

    feasible, value, mu_p = _objective_fns(cfg, lambda_p)
    qs = _linspace(0.0, 1.0, n_q)
    p0s = _linspace(p0_cap / n_p0, p0_cap, n_p0)
    best, second, feasible_points = _scan(p0s, qs, feasible, value, (math.nan, math.nan, -math.inf))
    if feasible_points == 0:
        raise InfeasiblePrimaryError(
            "no feasible (q, p0) point found on the coarse grid")

    step_q = 1.0 / (n_q - 1)
    step_p0 = p0_cap * (1.0 - 1.0 / n_p0) / (n_p0 - 1)
    for _ in range(refine_rounds):
        q_c, p0_c, _ = best
        lo_q, hi_q = max(0.0, q_c - step_q), min(1.0, q_c + step_q)
        lo_p, hi_p = max(p0_cap * 1e-9, p0_c - step_p0), min(p0_cap, p0_c + step_p0)
        qs = sorted(set(_linspace(lo_q, hi_q, REFINE_POINTS)) | {q_c})
        p0s = sorted(set(_linspace(lo_p, hi_p, REFINE_POINTS)) | {p0_c})
        best, second, count = _scan(p0s, qs, feasible, value, best)
        feasible_points += count
        step_q /= 10.0
        step_p0 /= 10.0

    q_opt, p0_opt, val = best
    gap = val - second if math.isfinite(second) else 0.0
    cert = GridCertificate(
        coarse_grid=(n_q, n_p0),
        refine_rounds=refine_rounds,
        final_step_q=step_q,
        final_step_p0=step_p0,
        runner_up_gap=gap,
        feasible_points=feasible_points,
    )
    box = feasible_box(cfg, lambda_p, p0_cap)
    return OptimizeResult(
        q_opt=q_opt,
        p0_opt=p0_opt,
        value=val,
        per_node=val / cfg.n_secondary,
        mu_p_at_opt=mu_p(q_opt, p0_opt),
        box=box,
        certificate=cert,
    )
