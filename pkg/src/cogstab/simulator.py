"""Slot-by-slot Monte Carlo execution of the access protocol.

One replication walks the slotted timeline: a Bernoulli arrival feeds the
primary queue; the primary transmits whenever backlogged; secondaries
sense the slot (with optional miss/false-alarm errors), run random
access in slots they believe idle, and every receiver applies the SINR
threshold rule against the realized interferer set with fresh fading on
every directed link in every slot. In relay mode, secondaries that
decode a failed primary packet queue it and jointly retransmit it in
idle slots with priority over their own traffic.

The engine is the independent oracle for the closed forms in
:mod:`cogstab.analysis`: it never evaluates them.

Randomness discipline: one root seed expands into one counter-based
Philox stream per (replication, purpose, link); each stream yields
exactly one draw per slot. Adding nodes or switching modes therefore
never perturbs the draws of existing links, and replications are
disjoint by construction. Identical (config, seed) gives bit-identical
results regardless of internal block size.

Standard errors are batch means: the measured window is cut into
``N_BATCHES`` equal spans and the spread of per-batch rates estimates
the error of the pooled rate, which stays honest under the slot-to-slot
correlation the queue induces.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import NetworkConfig
from .errors import ConfigError, DomainError

MODE_PERFECT = "no_relay_perfect_sensing"
MODE_IMPERFECT = "no_relay_imperfect_sensing"
MODE_RELAY = "relay_perfect_sensing"
MODES = (MODE_PERFECT, MODE_IMPERFECT, MODE_RELAY)

VERDICT_STABLE = "stable"
VERDICT_UNSTABLE = "unstable"
VERDICT_INCONCLUSIVE = "inconclusive"

N_BATCHES = 64
_BLOCK = 1 << 14
_TRAJECTORY_POINTS = 4096

# Stream purposes; combined with node indices into a Philox key so every
# (replication, purpose, i, j) triple owns an independent substream.
_K_ARRIVAL = 0
_K_SENSE = 1
_K_ACCESS = 2
_K_FADE_PP = 3
_K_FADE_SP = 4   # secondary source i -> primary destination
_K_FADE_PD = 5   # primary source -> secondary destination j
_K_FADE_SS = 6   # secondary source i -> secondary destination j
_K_FADE_PX = 7   # primary source -> secondary source i (decode links)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    """One simulation run description.

    ``warmup_slots`` defaults to 10% of ``n_slots``; statistics accumulate
    only after it. ``trace_every`` > 0 records one trace row every that
    many slots. Relay mode requires perfect sensing (zero miss and
    false-alarm probabilities).
    """

    network: NetworkConfig
    lambda_p: float
    n_slots: int
    seed: int
    mode: str = MODE_PERFECT
    warmup_slots: int | None = None
    trace_every: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0.0 <= self.lambda_p <= 1.0):
            raise ConfigError(f"lambda_p must lie in [0, 1], got {self.lambda_p}")
        if self.n_slots < 1:
            raise ConfigError(f"n_slots must be >= 1, got {self.n_slots}")
        if self.warmup_slots is not None and not (0 <= self.warmup_slots < self.n_slots):
            raise ConfigError("warmup_slots must satisfy 0 <= warmup < n_slots")
        if self.trace_every < 0:
            raise ConfigError("trace_every must be >= 0")
        if self.mode == MODE_RELAY:
            net = self.network
            if any(p != 0.0 for p in net.miss_probs) or any(
                    p != 0.0 for p in net.false_alarm_probs):
                raise ConfigError(
                    "relay mode assumes perfect sensing: set miss_probs and "
                    "false_alarm_probs to zero")

    @property
    def warmup(self) -> int:
        return self.n_slots // 10 if self.warmup_slots is None else self.warmup_slots

    def replace(self, **changes) -> "SimConfig":
        import dataclasses

        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class NodeRelayStats:
    """Measured-window bookkeeping for one node's relaying queue."""

    arrivals: int
    attempts: int
    successes: int
    nonempty_slots: int
    arrival_batches: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "arrivals": self.arrivals,
            "attempts": self.attempts,
            "successes": self.successes,
            "nonempty_slots": self.nonempty_slots,
        }


@dataclass(frozen=True)
class TraceRow:
    """One sampled slot: queue lengths, who transmitted, what succeeded."""

    slot: int
    primary_queue: int
    relay_queue_lens: tuple[int, ...]
    primary_tx: bool
    primary_success: bool
    relay_tx: bool
    relay_success: bool
    own_tx_mask: int
    own_success_mask: int


def _rate_se(batch_counts: Sequence[int], batch_slots: Sequence[int]) -> float:
    """Batch-means standard error of a per-slot rate."""
    rates = [c / s for c, s in zip(batch_counts, batch_slots) if s > 0]
    if len(rates) < 2:
        return float("nan")
    return float(np.std(rates, ddof=1) / math.sqrt(len(rates)))


def _ratio_se(num_batches: Sequence[int], den_batches: Sequence[int]) -> float:
    """Batch-means standard error of a ratio of counts (e.g. successes
    per busy slot), using only batches where the denominator is positive."""
    ratios = [n / d for n, d in zip(num_batches, den_batches) if d > 0]
    if len(ratios) < 2:
        return float("nan")
    return float(np.std(ratios, ddof=1) / math.sqrt(len(ratios)))


@dataclass(frozen=True)
class SimResult:
    """Counts and derived rates from one replication (or a merge).

    All counting fields are integers so merging replications is exact and
    associative; rates and standard errors derive from them.
    """

    mode: str
    lambda_p: float
    seed: int
    n_slots: int
    warmup_slots: int
    measured_slots: int
    replications: int
    # Whole-run packet accounting (includes warmup), for conservation.
    arrivals_total: int
    delivered_direct: int
    delivered_relay: int
    final_primary_queue: int
    final_relay_backlog: int
    # Measured-window counts.
    busy_slots: int
    idle_slots: int
    service_successes: int
    delivered_own: tuple[int, ...]
    relay_attempt_slots: int
    relay_attempt_successes: int
    relay_free_idle_slots: int
    attempt_batches: tuple[int, ...]
    # Batch sums over the measured window.
    batch_slots: tuple[int, ...]
    batch_busy: tuple[int, ...]
    batch_idle: tuple[int, ...]
    batch_service: tuple[int, ...]
    batch_delivered_own: tuple[tuple[int, ...], ...]
    relay_nodes: tuple[NodeRelayStats, ...]
    stability_verdict: str
    trajectory: tuple[tuple[int, int, int], ...] = ()
    trace: tuple[TraceRow, ...] = ()

    # -- derived rates ---------------------------------------------------

    @property
    def empirical_mu_p(self) -> float | None:
        """Primary service rate conditioned on busy slots."""
        if self.busy_slots == 0:
            return None
        return self.service_successes / self.busy_slots

    @property
    def mu_p_stderr(self) -> float | None:
        if self.busy_slots == 0:
            return None
        return _ratio_se(self.batch_service, self.batch_busy)

    @property
    def idle_fraction(self) -> float:
        return self.idle_slots / self.measured_slots

    @property
    def idle_fraction_stderr(self) -> float:
        return _rate_se(self.batch_idle, self.batch_slots)

    @property
    def empirical_lambda_j(self) -> tuple[float, ...]:
        """Per-node own-traffic delivery rate, packets per slot."""
        return tuple(d / self.measured_slots for d in self.delivered_own)

    @property
    def lambda_j_stderr(self) -> tuple[float, ...]:
        return tuple(_rate_se(b, self.batch_slots) for b in self.batch_delivered_own)

    @property
    def relay_arrival_rates(self) -> tuple[float, ...]:
        return tuple(n.arrivals / self.measured_slots for n in self.relay_nodes)

    @property
    def relay_arrival_stderr(self) -> tuple[float, ...]:
        return tuple(_rate_se(n.arrival_batches, self.batch_slots) for n in self.relay_nodes)

    @property
    def relay_success_given_attempt(self) -> float | None:
        if self.relay_attempt_slots == 0:
            return None
        return self.relay_attempt_successes / self.relay_attempt_slots

    @property
    def relay_attempt_fraction(self) -> float:
        return self.relay_attempt_slots / self.measured_slots

    @property
    def relay_attempt_fraction_stderr(self) -> float:
        return _rate_se(self.attempt_batches, self.batch_slots)

    @property
    def relay_occupancy(self) -> tuple[float, ...]:
        return tuple(n.nonempty_slots / self.measured_slots for n in self.relay_nodes)

    def conservation_holds(self) -> bool:
        """Every arrived packet is delivered exactly once or still queued."""
        return (self.arrivals_total
                == self.delivered_direct + self.delivered_relay
                + self.final_primary_queue + self.final_relay_backlog)

    def to_dict(self, *, include_trace: bool = False) -> dict:
        out = {
            "mode": self.mode,
            "lambda_p": self.lambda_p,
            "seed": self.seed,
            "n_slots": self.n_slots,
            "warmup_slots": self.warmup_slots,
            "measured_slots": self.measured_slots,
            "replications": self.replications,
            "arrivals_total": self.arrivals_total,
            "delivered_direct": self.delivered_direct,
            "delivered_relay": self.delivered_relay,
            "final_primary_queue": self.final_primary_queue,
            "final_relay_backlog": self.final_relay_backlog,
            "busy_slots": self.busy_slots,
            "idle_slots": self.idle_slots,
            "service_successes": self.service_successes,
            "delivered_own": list(self.delivered_own),
            "empirical_mu_p": self.empirical_mu_p,
            "mu_p_stderr": self.mu_p_stderr,
            "idle_fraction": self.idle_fraction,
            "idle_fraction_stderr": self.idle_fraction_stderr,
            "empirical_lambda_j": list(self.empirical_lambda_j),
            "lambda_j_stderr": list(self.lambda_j_stderr),
            "relay_nodes": [n.to_dict() for n in self.relay_nodes],
            "relay_attempt_slots": self.relay_attempt_slots,
            "relay_attempt_successes": self.relay_attempt_successes,
            "relay_free_idle_slots": self.relay_free_idle_slots,
            "stability_verdict": self.stability_verdict,
        }
        if include_trace:
            out["trace"] = [vars(row) for row in self.trace]
        return out


class _Streams:
    """Counter-based substreams keyed by (seed, replication, purpose, link)."""

    def __init__(self, seed: int, replication: int = 0):
        if not (0 <= replication < 1 << 32):
            raise DomainError("replication index must fit in 32 bits")
        self._seed = seed & _MASK64
        self._rep = replication
        self._cache: dict[tuple[int, int, int], np.random.Generator] = {}

    def gen(self, kind: int, i: int = 0, j: int = 0) -> np.random.Generator:
        key = (kind, i, j)
        if key not in self._cache:
            sub = (self._rep << 32) | (kind << 24) | (i << 12) | j
            bitgen = np.random.Philox(key=np.array([self._seed, sub], dtype=np.uint64))
            self._cache[key] = np.random.Generator(bitgen)
        return self._cache[key]


def _batch_edges(measured: int) -> np.ndarray:
    """Slot offsets (within the measured window) where each batch starts."""
    return (np.arange(N_BATCHES + 1, dtype=np.int64) * measured) // N_BATCHES


def _batch_ids(measured: int) -> np.ndarray:
    ids = (np.arange(measured, dtype=np.int64) * N_BATCHES) // max(measured, 1)
    return np.minimum(ids, N_BATCHES - 1)


class _Accumulator:
    """Measured-window batch accumulation shared by both engines."""

    def __init__(self, n_nodes: int, warmup: int, n_slots: int):
        self.warmup = warmup
        self.measured = n_slots - warmup
        self.busy = np.zeros(N_BATCHES, dtype=np.int64)
        self.idle = np.zeros(N_BATCHES, dtype=np.int64)
        self.service = np.zeros(N_BATCHES, dtype=np.int64)
        self.delivered = np.zeros((n_nodes, N_BATCHES), dtype=np.int64)
        edges = _batch_edges(self.measured)
        self.slots = tuple(int(b - a) for a, b in zip(edges[:-1], edges[1:]))

    def batch_of(self, slot: int) -> int:
        idx = slot - self.warmup
        return min(N_BATCHES - 1, (idx * N_BATCHES) // self.measured)

    def add_block(self, start: int, busy: np.ndarray, service: np.ndarray,
                  delivered: np.ndarray) -> None:
        """Accumulate one block of slots into the batch bins.

        ``busy``/``service`` are per-slot booleans; ``delivered`` is
        (n_nodes, block) of booleans. Slots before the warmup boundary
        are dropped here.
        """
        length = len(busy)
        lo = max(self.warmup - start, 0)
        if lo >= length:
            return
        sl = slice(lo, length)
        offs = np.arange(start + lo - self.warmup, start + length - self.warmup)
        ids = np.minimum((offs * N_BATCHES) // self.measured, N_BATCHES - 1)
        np.add.at(self.busy, ids, busy[sl])
        np.add.at(self.idle, ids, ~busy[sl])
        np.add.at(self.service, ids, service[sl] & busy[sl])
        for node in range(self.delivered.shape[0]):
            np.add.at(self.delivered[node], ids, delivered[node][sl])


def _least_squares_slope(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """OLS slope and its standard error."""
    n = len(xs)
    if n < 3:
        return 0.0, float("inf")
    x = xs - xs.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return 0.0, float("inf")
    slope = float(np.dot(x, ys) / denom)
    resid = ys - ys.mean() - slope * x
    var = float(np.dot(resid, resid)) / max(n - 2, 1)
    return slope, math.sqrt(var / denom)


def _classify(trajectory: Sequence[tuple[int, int, int]], lambda_p: float,
              mu_hat: float | None, mu_se: float | None, relay_mode: bool) -> str:
    """Dual stability test: queue-growth slope plus service-rate margin.

    Stable needs a bounded tail window, a flat total backlog, and an
    arrival rate at least four standard errors below the measured primary
    service rate (and, in relay mode, a flat relay backlog). Unstable
    needs clear positive drift corroborated by the margin test or a
    growing relay backlog. Everything near the boundary stays
    inconclusive.
    """
    if not trajectory:
        return VERDICT_INCONCLUSIVE
    slots = np.array([p[0] for p in trajectory], dtype=float)
    totals = np.array([p[1] + p[2] for p in trajectory], dtype=float)
    relays = np.array([p[2] for p in trajectory], dtype=float)
    half = len(slots) // 2
    slope, slope_se = _least_squares_slope(slots[half:], totals[half:])
    relay_slope, relay_slope_se = _least_squares_slope(slots[half:], relays[half:])
    threshold = max(1e-4, 4.0 * slope_se) if math.isfinite(slope_se) else 1e-4
    relay_threshold = max(1e-4, 4.0 * relay_slope_se) if math.isfinite(relay_slope_se) else 1e-4

    n = len(totals)
    tail = totals[int(0.9 * n):]
    mid = totals[int(0.4 * n):int(0.6 * n) + 1]
    # Bounded: the last tenth sits where the middle did, up to wobble.
    # Linear growth puts the tail near twice the middle, which fails this.
    tail_bounded = tail.mean() <= mid.mean() + max(25.0, 0.5 * mid.mean())

    margin_ok = lambda_p == 0.0 or (
        mu_hat is not None and mu_se is not None and math.isfinite(mu_se)
        and lambda_p < mu_hat - 4.0 * mu_se)
    margin_bad = (mu_hat is not None and mu_se is not None and math.isfinite(mu_se)
                  and lambda_p > mu_hat + 4.0 * mu_se)

    relay_flat = (not relay_mode) or relay_slope < relay_threshold
    if slope < threshold and tail_bounded and margin_ok and relay_flat:
        return VERDICT_STABLE
    relay_growing = relay_mode and relay_slope > relay_threshold and relays[-1] > relays[half] + 25.0
    if slope > threshold and not tail_bounded and (margin_bad or relay_growing):
        return VERDICT_UNSTABLE
    return VERDICT_INCONCLUSIVE


def run_slots(cfg: SimConfig, replication: int = 0) -> SimResult:
    """Execute one replication and return its measurements.

    Dispatches on the configured mode; see :func:`run_relay_slots` for
    the relaying protocol specifics.
    """
    if cfg.mode == MODE_RELAY:
        return run_relay_slots(cfg, replication)
    return _run_no_relay(cfg, replication)


def _mean_rx_arrays(net: NetworkConfig):
    alpha = net.path_loss_exp
    n = net.n_secondary
    rx_pp = net.rx_primary_at_dp()
    rx_sp = np.array([net.rx_sec_at_dp(i) for i in range(n)])
    rx_pd = np.array([net.rx_primary_at_dest(j) for j in range(n)])
    rx_ss = np.array([[net.rx_sec_at_dest(i, j) for j in range(n)] for i in range(n)])
    del alpha
    return rx_pp, rx_sp, rx_pd, rx_ss


def _own_success_block(net: NetworkConfig, tx: np.ndarray, e_ss: np.ndarray,
                       rx_ss: np.ndarray, extra_interference: np.ndarray | None) -> np.ndarray:
    """Per-node success bits for one block given a transmit-bit matrix.

    ``tx`` is (n, L) booleans; ``e_ss`` the unit-exponential draws of the
    secondary-to-secondary links, (n, n, L); ``extra_interference`` an
    optional (n, L) received-power array added at every destination (the
    busy primary)."""
    n, length = tx.shape
    if n == 0:
        return np.zeros((0, length), dtype=bool)
    rx = rx_ss[:, :, None] * e_ss  # realized received powers source->dest
    active = tx[:, None, :] * rx
    interference = active.sum(axis=0)  # at each destination, over sources
    own = np.einsum("iil->il", rx)
    interference = interference - np.where(tx, own, 0.0)
    if extra_interference is not None:
        interference = interference + extra_interference
    beta = np.array(net.secondary_thresholds)[:, None]
    ok = own > beta * (net.noise_power + interference)
    return tx & ok


def _run_no_relay(cfg: SimConfig, replication: int) -> SimResult:
    net = cfg.network
    n = net.n_secondary
    streams = _Streams(cfg.seed, replication)
    warmup = cfg.warmup
    acc = _Accumulator(n, warmup, cfg.n_slots)
    perfect = cfg.mode == MODE_PERFECT
    pe = np.zeros(n) if perfect else np.array(net.miss_probs)
    pf = np.zeros(n) if perfect else np.array(net.false_alarm_probs)
    q = np.array(net.access_probs)
    rx_pp, rx_sp, rx_pd, rx_ss = _mean_rx_arrays(net)

    qp = 0
    arrivals_total = 0
    delivered_direct = 0
    traj_stride = max(1, cfg.n_slots // _TRAJECTORY_POINTS)
    trajectory: list[tuple[int, int, int]] = []
    trace: list[TraceRow] = []

    arrival_gen = streams.gen(_K_ARRIVAL)
    sense_gens = [streams.gen(_K_SENSE, i) for i in range(n)]
    access_gens = [streams.gen(_K_ACCESS, i) for i in range(n)]
    fade_pp_gen = streams.gen(_K_FADE_PP)
    fade_sp_gens = [streams.gen(_K_FADE_SP, i) for i in range(n)]
    fade_pd_gens = [streams.gen(_K_FADE_PD, 0, j) for j in range(n)]
    fade_ss_gens = [[streams.gen(_K_FADE_SS, i, j) for j in range(n)] for i in range(n)]

    for start in range(0, cfg.n_slots, _BLOCK):
        length = min(_BLOCK, cfg.n_slots - start)
        arrive = arrival_gen.random(length) < cfg.lambda_p
        sense_u = np.stack([g.random(length) for g in sense_gens]) if n else np.zeros((0, length))
        access_u = np.stack([g.random(length) for g in access_gens]) if n else np.zeros((0, length))
        e_pp = fade_pp_gen.standard_exponential(length)
        e_sp = (np.stack([g.standard_exponential(length) for g in fade_sp_gens])
                if n else np.zeros((0, length)))
        e_pd = (np.stack([g.standard_exponential(length) for g in fade_pd_gens])
                if n else np.zeros((0, length)))
        e_ss = (np.stack([np.stack([g.standard_exponential(length) for g in row])
                          for row in fade_ss_gens])
                if n else np.zeros((0, 0, length)))

        wants_tx = access_u < q[:, None] if n else np.zeros((0, length), dtype=bool)
        # One sensing draw per node per slot; read as a misdetection in the
        # busy branch and a false alarm in the idle branch (mutually
        # exclusive branches, so the marginals stay exact).
        busy_tx = (sense_u < pe[:, None]) & wants_tx if n else wants_tx
        idle_tx = (sense_u >= pf[:, None]) & wants_tx if n else wants_tx

        interference_p = (busy_tx * rx_sp[:, None] * e_sp).sum(axis=0) if n else np.zeros(length)
        primary_ok = rx_pp * e_pp > net.primary_threshold * (net.noise_power + interference_p)

        succ_idle = _own_success_block(net, idle_tx, e_ss, rx_ss, None)
        primary_rx_at_dest = rx_pd[:, None] * e_pd if n else np.zeros((0, length))
        succ_busy = _own_success_block(net, busy_tx, e_ss, rx_ss, primary_rx_at_dest)

        arrive_l = arrive.tolist()
        primary_ok_l = primary_ok.tolist()
        busy = np.empty(length, dtype=bool)
        for t in range(length):
            b = qp > 0
            busy[t] = b
            if b and primary_ok_l[t]:
                qp -= 1
                delivered_direct += 1
            if arrive_l[t]:
                qp += 1
                arrivals_total += 1
            slot = start + t
            if slot % traj_stride == 0:
                trajectory.append((slot, qp, 0))
            if cfg.trace_every and slot % cfg.trace_every == 0:
                tx_mask = 0
                ok_mask = 0
                col = busy_tx[:, t] if b else idle_tx[:, t]
                okc = succ_busy[:, t] if b else succ_idle[:, t]
                for i in range(n):
                    if col[i]:
                        tx_mask |= 1 << i
                    if okc[i]:
                        ok_mask |= 1 << i
                trace.append(TraceRow(slot, qp, (0,) * n, b, bool(b and primary_ok_l[t]),
                                      False, False, tx_mask, ok_mask))

        delivered = np.where(busy, succ_busy, succ_idle) if n else np.zeros((0, length), dtype=bool)
        acc.add_block(start, busy, primary_ok, delivered)

    measured = cfg.n_slots - warmup
    busy_slots = int(acc.busy.sum())
    mu_hat = acc.service.sum() / busy_slots if busy_slots else None
    mu_se = _ratio_se(acc.service.tolist(), acc.busy.tolist()) if busy_slots else None
    verdict = _classify(trajectory, cfg.lambda_p, mu_hat, mu_se, relay_mode=False)

    return SimResult(
        mode=cfg.mode,
        lambda_p=cfg.lambda_p,
        seed=cfg.seed,
        n_slots=cfg.n_slots,
        warmup_slots=warmup,
        measured_slots=measured,
        replications=1,
        arrivals_total=arrivals_total,
        delivered_direct=delivered_direct,
        delivered_relay=0,
        final_primary_queue=qp,
        final_relay_backlog=0,
        busy_slots=busy_slots,
        idle_slots=int(acc.idle.sum()),
        service_successes=int(acc.service.sum()),
        delivered_own=tuple(int(v) for v in acc.delivered.sum(axis=1)),
        relay_attempt_slots=0,
        relay_attempt_successes=0,
        relay_free_idle_slots=int(acc.idle.sum()),
        attempt_batches=(),
        batch_slots=acc.slots,
        batch_busy=tuple(int(v) for v in acc.busy),
        batch_idle=tuple(int(v) for v in acc.idle),
        batch_service=tuple(int(v) for v in acc.service),
        batch_delivered_own=tuple(tuple(int(v) for v in row) for row in acc.delivered),
        relay_nodes=(),
        stability_verdict=verdict,
        trajectory=tuple(trajectory),
        trace=tuple(trace),
    )


def run_relay_slots(cfg: SimConfig, replication: int = 0) -> SimResult:
    """Execute one replication of the relaying protocol.

    Busy slots: the primary transmits alone (perfect sensing). If its
    destination fails but at least one secondary source decodes, the
    packet leaves the primary queue and every decoder stores it, all
    tagged with the same packet identity. Idle slots: if any relayed
    packet exists anywhere, all holders of the globally oldest one
    transmit it jointly and its delivery is decided by the sum of their
    received powers against the primary threshold; everyone else stays
    silent. Own traffic is sent only in idle slots with no relayed packet
    anywhere in the system.
    """
    if cfg.mode != MODE_RELAY:
        raise ConfigError(f"run_relay_slots requires mode={MODE_RELAY!r}")
    net = cfg.network
    n = net.n_secondary
    streams = _Streams(cfg.seed, replication)
    warmup = cfg.warmup
    acc = _Accumulator(n, warmup, cfg.n_slots)
    q = np.array(net.access_probs)
    rx_pp, rx_sp, rx_pd, rx_ss = _mean_rx_arrays(net)
    rx_px = np.array([net.rx_primary_at_src(i) for i in range(n)])
    decode_floor = net.primary_threshold * net.noise_power

    qp = 0
    arrivals_total = 0
    delivered_direct = 0
    delivered_relay = 0
    relay_queue: deque[list[int]] = deque()  # holder index lists, FIFO by handoff
    qlen = [0] * n
    nonempty_since = [-1] * n
    nonempty_slots = [0] * n
    relay_arrivals = [0] * n
    relay_attempts = [0] * n
    relay_successes = [0] * n
    arrival_batches = np.zeros((n, N_BATCHES), dtype=np.int64)
    attempt_batches = np.zeros(N_BATCHES, dtype=np.int64)
    attempt_slots = 0
    attempt_successes = 0
    free_idle_slots = 0

    traj_stride = max(1, cfg.n_slots // _TRAJECTORY_POINTS)
    trajectory: list[tuple[int, int, int]] = []
    trace: list[TraceRow] = []

    arrival_gen = streams.gen(_K_ARRIVAL)
    access_gens = [streams.gen(_K_ACCESS, i) for i in range(n)]
    fade_pp_gen = streams.gen(_K_FADE_PP)
    fade_sp_gens = [streams.gen(_K_FADE_SP, i) for i in range(n)]
    fade_px_gens = [streams.gen(_K_FADE_PX, i) for i in range(n)]
    fade_ss_gens = [[streams.gen(_K_FADE_SS, i, j) for j in range(n)] for i in range(n)]

    def mark_nonempty(i: int, slot: int) -> None:
        if nonempty_since[i] < 0:
            nonempty_since[i] = slot + 1  # holds a packet from the next slot on

    def mark_empty(i: int, slot: int) -> None:
        start_slot = nonempty_since[i]
        if start_slot >= 0:
            lo = max(start_slot, warmup)
            hi = min(slot + 1, cfg.n_slots)
            if hi > lo:
                nonempty_slots[i] += hi - lo
            nonempty_since[i] = -1

    for start in range(0, cfg.n_slots, _BLOCK):
        length = min(_BLOCK, cfg.n_slots - start)
        arrive = (arrival_gen.random(length) < cfg.lambda_p).tolist()
        e_pp = fade_pp_gen.standard_exponential(length)
        primary_ok = (rx_pp * e_pp > decode_floor).tolist()
        if n:
            e_px = np.stack([g.standard_exponential(length) for g in fade_px_gens])
            decode_bits = rx_px[:, None] * e_px > decode_floor
            relay_rx = rx_sp[:, None] * np.stack(
                [g.standard_exponential(length) for g in fade_sp_gens])
            access_u = np.stack([g.random(length) for g in access_gens])
            own_tx = access_u < q[:, None]
            e_ss = np.stack([np.stack([g.standard_exponential(length) for g in row])
                             for row in fade_ss_gens])
            succ_own = _own_success_block(net, own_tx, e_ss, rx_ss, None)
        else:
            decode_bits = np.zeros((0, length), dtype=bool)
            relay_rx = np.zeros((0, length))
            own_tx = np.zeros((0, length), dtype=bool)
            succ_own = own_tx

        busy = np.empty(length, dtype=bool)
        service = np.zeros(length, dtype=bool)
        delivered = np.zeros((n, length), dtype=bool)

        for t in range(length):
            slot = start + t
            measured = slot >= warmup
            b = qp > 0
            busy[t] = b
            relay_tx = False
            relay_ok = False
            if b:
                if primary_ok[t]:
                    qp -= 1
                    delivered_direct += 1
                    service[t] = True
                else:
                    holders = np.flatnonzero(decode_bits[:, t]).tolist()
                    if holders:
                        qp -= 1
                        service[t] = True
                        relay_queue.append(holders)
                        for i in holders:
                            qlen[i] += 1
                            mark_nonempty(i, slot)
                            if measured:
                                relay_arrivals[i] += 1
                                arrival_batches[i, acc.batch_of(slot)] += 1
            else:
                if relay_queue:
                    holders = relay_queue[0]
                    relay_tx = True
                    power = float(relay_rx[holders, t].sum())
                    if measured:
                        attempt_slots += 1
                        attempt_batches[acc.batch_of(slot)] += 1
                        for i in holders:
                            relay_attempts[i] += 1
                    if power > decode_floor:
                        relay_ok = True
                        relay_queue.popleft()
                        delivered_relay += 1
                        if measured:
                            attempt_successes += 1
                        for i in holders:
                            qlen[i] -= 1
                            if measured:
                                relay_successes[i] += 1
                            if qlen[i] == 0:
                                mark_empty(i, slot)
                else:
                    if measured:
                        free_idle_slots += 1
                    delivered[:, t] = succ_own[:, t]
            if arrive[t]:
                qp += 1
                arrivals_total += 1
            if slot % traj_stride == 0:
                trajectory.append((slot, qp, len(relay_queue)))
            if cfg.trace_every and slot % cfg.trace_every == 0:
                own_mask = 0
                ok_mask = 0
                if not b and not relay_tx:
                    for i in range(n):
                        if own_tx[i, t]:
                            own_mask |= 1 << i
                        if succ_own[i, t]:
                            ok_mask |= 1 << i
                trace.append(TraceRow(slot, qp, tuple(qlen), b,
                                      bool(b and primary_ok[t]), relay_tx, relay_ok,
                                      own_mask, ok_mask))

        acc.add_block(start, busy, service, delivered)

    for i in range(n):
        mark_empty(i, cfg.n_slots - 1)

    measured = cfg.n_slots - warmup
    busy_slots = int(acc.busy.sum())
    mu_hat = acc.service.sum() / busy_slots if busy_slots else None
    mu_se = _ratio_se(acc.service.tolist(), acc.busy.tolist()) if busy_slots else None
    verdict = _classify(trajectory, cfg.lambda_p, mu_hat, mu_se, relay_mode=True)

    relay_nodes = tuple(
        NodeRelayStats(
            arrivals=relay_arrivals[i],
            attempts=relay_attempts[i],
            successes=relay_successes[i],
            nonempty_slots=nonempty_slots[i],
            arrival_batches=tuple(int(v) for v in arrival_batches[i]),
        )
        for i in range(n))

    return SimResult(
        mode=cfg.mode,
        lambda_p=cfg.lambda_p,
        seed=cfg.seed,
        n_slots=cfg.n_slots,
        warmup_slots=warmup,
        measured_slots=measured,
        replications=1,
        arrivals_total=arrivals_total,
        delivered_direct=delivered_direct,
        delivered_relay=delivered_relay,
        final_primary_queue=qp,
        final_relay_backlog=len(relay_queue),
        busy_slots=busy_slots,
        idle_slots=int(acc.idle.sum()),
        service_successes=int(acc.service.sum()),
        delivered_own=tuple(int(v) for v in acc.delivered.sum(axis=1)),
        relay_attempt_slots=attempt_slots,
        relay_attempt_successes=attempt_successes,
        relay_free_idle_slots=free_idle_slots,
        attempt_batches=tuple(int(v) for v in attempt_batches),
        batch_slots=acc.slots,
        batch_busy=tuple(int(v) for v in acc.busy),
        batch_idle=tuple(int(v) for v in acc.idle),
        batch_service=tuple(int(v) for v in acc.service),
        batch_delivered_own=tuple(tuple(int(v) for v in row) for row in acc.delivered),
        relay_nodes=relay_nodes,
        stability_verdict=verdict,
        trajectory=tuple(trajectory),
        trace=tuple(trace),
    )


def merge_results(results: Sequence[SimResult]) -> SimResult:
    """Pool replications into one result.

    Counting fields add exactly (integers), batch lists concatenate in
    replication order, so the merge is associative and independent of
    how the replications were scheduled.
    """
    if not results:
        raise DomainError("merge_results needs at least one result")
    if len(results) == 1:
        return results[0]
    first = results[0]
    for r in results[1:]:
        if (r.mode, r.lambda_p, r.n_slots, r.warmup_slots) != (
                first.mode, first.lambda_p, first.n_slots, first.warmup_slots):
            raise DomainError("cannot merge results from differing configurations")
    n = len(first.delivered_own)
    verdicts = {r.stability_verdict for r in results}
    verdict = verdicts.pop() if len(verdicts) == 1 else VERDICT_INCONCLUSIVE
    relay_nodes = ()
    if first.relay_nodes:
        relay_nodes = tuple(
            NodeRelayStats(
                arrivals=sum(r.relay_nodes[i].arrivals for r in results),
                attempts=sum(r.relay_nodes[i].attempts for r in results),
                successes=sum(r.relay_nodes[i].successes for r in results),
                nonempty_slots=sum(r.relay_nodes[i].nonempty_slots for r in results),
                arrival_batches=tuple(
                    v for r in results for v in r.relay_nodes[i].arrival_batches),
            )
            for i in range(n))
    return SimResult(
        mode=first.mode,
        lambda_p=first.lambda_p,
        seed=first.seed,
        n_slots=first.n_slots,
        warmup_slots=first.warmup_slots,
        measured_slots=sum(r.measured_slots for r in results),
        replications=sum(r.replications for r in results),
        arrivals_total=sum(r.arrivals_total for r in results),
        delivered_direct=sum(r.delivered_direct for r in results),
        delivered_relay=sum(r.delivered_relay for r in results),
        final_primary_queue=sum(r.final_primary_queue for r in results),
        final_relay_backlog=sum(r.final_relay_backlog for r in results),
        busy_slots=sum(r.busy_slots for r in results),
        idle_slots=sum(r.idle_slots for r in results),
        service_successes=sum(r.service_successes for r in results),
        delivered_own=tuple(sum(r.delivered_own[i] for r in results) for i in range(n)),
        relay_attempt_slots=sum(r.relay_attempt_slots for r in results),
        relay_attempt_successes=sum(r.relay_attempt_successes for r in results),
        relay_free_idle_slots=sum(r.relay_free_idle_slots for r in results),
        attempt_batches=tuple(v for r in results for v in r.attempt_batches),
        batch_slots=tuple(v for r in results for v in r.batch_slots),
        batch_busy=tuple(v for r in results for v in r.batch_busy),
        batch_idle=tuple(v for r in results for v in r.batch_idle),
        batch_service=tuple(v for r in results for v in r.batch_service),
        batch_delivered_own=tuple(
            tuple(v for r in results for v in r.batch_delivered_own[i]) for i in range(n)),
        relay_nodes=relay_nodes,
        stability_verdict=verdict,
        trajectory=(),
        trace=(),
    )


def run_replications(cfg: SimConfig, replications: int, jobs: int = 1) -> SimResult:
    """Run and merge ``replications`` independent substreams.

    The output is byte-for-byte independent of ``jobs``: each replication
    owns a disjoint substream family and the merge happens in replication
    order regardless of completion order.
    """
    if replications < 1:
        raise DomainError("replications must be >= 1")
    indices = list(range(replications))
    if jobs > 1 and replications > 1:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_indexed, [(cfg, i) for i in indices]))
    else:
        results = [run_slots(cfg, i) for i in indices]
    return merge_results(results)


def _run_indexed(args: tuple[SimConfig, int]) -> SimResult:
    cfg, idx = args
    return run_slots(cfg, idx)


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of a stability probe at one arrival rate."""

    verdict: str
    lambda_p: float
    slope: float
    slope_se: float
    mu_hat: float | None
    mu_se: float | None
    result: SimResult = field(repr=False)


def stability_probe(cfg: SimConfig, lambda_p: float | None = None) -> ProbeResult:
    """Run the simulation and classify the queueing system's stability.

    Stable when the backlog tail is bounded and the arrival rate sits
    clearly below the measured service rate; unstable when the backlog
    grows with a clear positive least-squares slope (approximately
    arrival rate minus service rate) and the margin test corroborates;
    inconclusive near the boundary.
    """
    if lambda_p is not None:
        cfg = cfg.replace(lambda_p=lambda_p)
    res = run_slots(cfg)
    slots = np.array([p[0] for p in res.trajectory], dtype=float)
    totals = np.array([p[1] + p[2] for p in res.trajectory], dtype=float)
    half = len(slots) // 2
    slope, slope_se = _least_squares_slope(slots[half:], totals[half:])
    return ProbeResult(
        verdict=res.stability_verdict,
        lambda_p=cfg.lambda_p,
        slope=slope,
        slope_se=slope_se,
        mu_hat=res.empirical_mu_p,
        mu_se=res.mu_p_stderr,
        result=res,
    )


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo probability with its binomial standard error."""

    estimate: float
    stderr: float
    draws: int


def mc_success_prob(
    desired_mean_power: float,
    threshold: float,
    noise_power: float,
    interferer_mean_powers: Sequence[float] = (),
    draws: int = 1_000_000,
    seed: int = 0,
) -> MCEstimate:
    """Direct-sampling estimate of the SINR success probability.

    The independent oracle for the closed forms: draws exponential link
    gains and counts threshold crossings. Requires at least 10^4 draws.
    """
    if draws < 10_000:
        raise DomainError(f"draws must be >= 10000, got {draws}")
    if not (desired_mean_power > 0) or not (threshold > 0) or noise_power < 0:
        raise DomainError("bad link spec")
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    successes = 0
    remaining = draws
    while remaining > 0:
        block = min(remaining, 1 << 20)
        x = rng.exponential(desired_mean_power, size=block)
        denom = np.full(block, float(noise_power))
        for p in interferer_mean_powers:
            denom += rng.exponential(p, size=block)
        successes += int(np.count_nonzero(x > threshold * denom))
        remaining -= block
    p_hat = successes / draws
    smoothed = (successes + 1) / (draws + 2)  # keeps the error bar positive at 0 or 1
    se = math.sqrt(smoothed * (1 - smoothed) / draws)
    return MCEstimate(p_hat, se, draws)
