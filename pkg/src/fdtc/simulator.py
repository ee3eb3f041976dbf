"""Monte-Carlo engine: per-trial SINR at the typical receiver and its inversions.

Every trial redraws both the deployment and all fading, so the estimated
outage averages over geometry, channels, loopback error and noise jointly.

Reproducibility contract
------------------------
Trial ``i`` of a run with seed ``s`` consumes randomness exclusively from the
substream ``SeedSequence((s, i))`` feeding an SFC64 generator, with a fixed
draw order: deployment, one complex block for the typical pair's channels
(desired link; plus reverse link, loopback estimate/error and partner
loopback estimate in full duplex), one complex block covering the interfering
nodes' channels (own loopback estimates when the strategy nulls loopback at
the transmitter, own desired links unless transmit shaping is fixed, links to
the typical receiver), then receiver noise.  Estimates are therefore
bit-identical for a given (params, trials, seed) regardless of chunking or
execution order, and ``run_trial`` reproduces any single trial of
``estimate_outage`` exactly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .beamforming import (
    BeamformerSet,
    Strategy,
    build_beamformers,
    cancellable_pairs,
    interferer_transmit_vectors,
    uses_transmit_si_nulling,
)
from .channel import AntennaConfig, ChannelSet, PartnerChannels, complex_normal
from .geometry import DeploymentParams, NetworkRealization, nearest_pairs, sample_network

__all__ = [
    "SystemParams",
    "TrialOutcome",
    "SimulatedTcResult",
    "trial_rng",
    "draw_trial",
    "trial_sinr",
    "run_trial",
    "estimate_outage",
    "simulated_tc",
    "dump_trials",
]

# simulated_tc defaults: bracket grown from DENSITY_LO by doubling, capped at
# 2**MAX_DOUBLINGS * DENSITY_LO, then a fixed number of bisection steps.
_TC_DENSITY_LO = 1e-4
_TC_MAX_DOUBLINGS = 10
_TC_BISECT_STEPS = 20

# Soft cap on per-chunk array footprint (complex entries across the chunk);
# sized so the batched interferer arrays stay cache-resident.
_CHUNK_TARGET_ELEMENTS = 800_000


@dataclass(frozen=True)
class SystemParams:
    """Scalar model parameters of one simulated/analysed operating point.

    ``beta`` is the full-duplex SINR threshold; the target rate is
    ``log2(1 + beta)``.  Half-duplex runs compare against the doubled-rate
    threshold ``2**(2 R) - 1`` so both modes deliver the same per-pair rate.
    """

    config: AntennaConfig
    strategy: Strategy
    density: float
    link_distance: float = 1.0
    power: float = 1.0
    alpha: float = 4.0
    beta: float = 1.0
    epsilon: float = 0.1
    sigma2_si: float = 0.1
    mean_pairs: float = 200.0

    def __post_init__(self):
        if self.alpha <= 2.0:
            raise ValueError("alpha must exceed 2")
        if self.beta <= 0.0:
            raise ValueError("beta must be > 0")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.sigma2_si < 0.0:
            raise ValueError("sigma2_si must be >= 0")
        if self.power <= 0.0 or self.link_distance <= 0.0:
            raise ValueError("power and link_distance must be > 0")
        if self.density < 0.0:
            raise ValueError("density must be >= 0")
        if self.mean_pairs <= 0.0:
            raise ValueError("mean_pairs must be > 0")

    @property
    def rate(self) -> float:
        return math.log2(1.0 + self.beta)

    def sinr_threshold(self) -> float:
        """Outage threshold actually compared against per trial."""
        if self.strategy.is_full_duplex:
            return self.beta
        return (1.0 + self.beta) ** 2 - 1.0

    def deployment(self) -> DeploymentParams:
        if self.density > 0.0:
            return DeploymentParams(density=self.density,
                                    pair_distance=self.link_distance,
                                    mean_pairs=self.mean_pairs)
        return DeploymentParams(density=0.0, pair_distance=self.link_distance,
                                disk_radius=1.0)


@dataclass(frozen=True)
class TrialOutcome:
    """One trial's SINR with its power budget broken out."""

    sinr: float
    outage: bool
    desired_power: float
    interference_power: float
    residual_si_power: float
    noise_power: float
    cancelled_interference_power: float
    degenerate_alignment: bool


@dataclass(frozen=True)
class SimulatedTcResult:
    """Empirical transmission capacity from inverting the outage curve."""

    capacity: float
    density_solved: float
    outage_at_density: float
    zero_tc: bool
    bracket_failed: bool
    probes: tuple


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent substream for one trial, keyed by (seed, trial index)."""
    return np.random.Generator(
        np.random.SFC64(np.random.SeedSequence((seed, trial_index))))


def _n_active(strategy: Strategy) -> int:
    return 2 if strategy.is_full_duplex else 1


@dataclass(frozen=True)
class _TrialDraw:
    realization: NetworkRealization
    channels: ChannelSet
    partner: PartnerChannels | None
    own_si: np.ndarray | None      # (M, 2, n_rx, n_tx)
    own_desired: np.ndarray | None  # (M, n_active, n_rx, n_tx)
    h_int: np.ndarray              # (M, n_active, n_rx, n_tx)
    noise: np.ndarray              # (n_rx,)


def draw_trial(params: SystemParams, rng: np.random.Generator) -> _TrialDraw:
    """Draw everything one trial needs, in the documented order."""
    cfg = params.config
    shape = (cfg.n_rx, cfg.n_tx)
    strategy = params.strategy
    n_active = _n_active(strategy)

    realization = sample_network(params.deployment(), rng)
    m = realization.interferer_count

    if strategy.is_full_duplex:
        typical = complex_normal((5,) + shape, rng)
        h_desired = typical[0]
        si_estimated = typical[2]
        si_error = np.sqrt(params.sigma2_si) * typical[3]
        partner = PartnerChannels(h_si_estimated=typical[4], h_reverse=typical[1])
    else:
        h_desired = complex_normal(shape, rng)
        si_estimated = si_error = None
        partner = None

    with_own_si = uses_transmit_si_nulling(strategy, cfg)
    with_own_desired = strategy is not Strategy.PARTIAL_ZF_ONLY_FD
    n_blocks = 1 + int(with_own_si) + int(with_own_desired)
    block = complex_normal((n_blocks, m, n_active) + shape, rng)
    own_si = block[0] if with_own_si else None
    own_desired = block[-2] if with_own_desired else None
    h_int = block[-1]
    noise = complex_normal((cfg.n_rx,), rng)

    channels = ChannelSet(
        config=cfg,
        h_desired=h_desired,
        h_interferer_b=h_int[:, 0],
        h_interferer_a=h_int[:, 1] if strategy.is_full_duplex else None,
        h_si_estimated=si_estimated,
        h_si_error=si_error,
        h_si_actual=None if si_estimated is None else si_estimated + si_error,
        sigma2_si=params.sigma2_si,
    )
    return _TrialDraw(realization=realization, channels=channels,
                      partner=partner, own_si=own_si,
                      own_desired=own_desired, h_int=h_int, noise=noise)


def _nearest_for(params: SystemParams, realization: NetworkRealization) -> list[int]:
    wanted = cancellable_pairs(params.strategy, params.config)
    return nearest_pairs(realization, min(wanted, realization.interferer_count))


def trial_sinr(params: SystemParams, realization: NetworkRealization,
               channels: ChannelSet, beamformers: BeamformerSet,
               effective_int: np.ndarray, nearest: list[int],
               noise: np.ndarray) -> TrialOutcome:
    """Assemble one trial's SINR from its built components.

    ``effective_int`` holds the post-transmit-beamforming interferer vectors,
    shape (M, n_active, n_rx); the receive vector collapses each to a scalar
    coefficient.  Pairs listed in ``nearest`` are the zero-forced ones and are
    excluded from the interference sum (their leakage is tracked separately).
    """
    z = beamformers.z_typical_rx
    desired = params.link_distance ** (-params.alpha) * beamformers.effective_gain

    m = realization.interferer_count
    if m:
        coeff = np.einsum("kni,i->kn", effective_int, z.conj())
        pair_power = np.sum(np.abs(coeff) ** 2, axis=1)
        weights = realization.interferer_distances ** (-params.alpha)
        cancelled_mask = np.zeros(m, dtype=bool)
        for k in nearest:
            cancelled_mask[k - 1] = True
        interference = float(np.sum(weights[~cancelled_mask]
                                    * pair_power[~cancelled_mask]))
        cancelled_power = float(np.sum(weights[cancelled_mask]
                                       * pair_power[cancelled_mask]))
    else:
        interference = 0.0
        cancelled_power = 0.0

    if params.strategy.is_full_duplex:
        leak = np.vdot(z, channels.h_si_error @ beamformers.w_typical_tx)
        residual_si = float(np.abs(leak) ** 2)
    else:
        residual_si = 0.0

    noise_power = float(np.abs(np.vdot(z, noise)) ** 2) / params.power
    sinr = desired / (interference + residual_si + noise_power)
    return TrialOutcome(
        sinr=float(sinr),
        outage=bool(sinr < params.sinr_threshold()),
        desired_power=float(desired),
        interference_power=interference,
        residual_si_power=residual_si,
        noise_power=noise_power,
        cancelled_interference_power=cancelled_power,
        degenerate_alignment=beamformers.degenerate_alignment,
    )


def run_trial(params: SystemParams, seed: int, trial_index: int) -> TrialOutcome:
    """Single-trial reference path: draw, build, assemble."""
    rng = trial_rng(seed, trial_index)
    draw = draw_trial(params, rng)
    w_int = interferer_transmit_vectors(
        params.strategy, params.config, draw.own_desired, draw.own_si,
        batch_shape=(draw.realization.interferer_count,
                     _n_active(params.strategy)))
    effective = np.einsum("knij,knj->kni", draw.h_int, w_int)
    nearest = _nearest_for(params, draw.realization)
    beamformers = build_beamformers(params.strategy, draw.channels,
                                    draw.partner, w_int, nearest, params.config)
    return trial_sinr(params, draw.realization, draw.channels, beamformers,
                      effective, nearest, draw.noise)


def _chunk_size(params: SystemParams) -> int:
    per_trial = max(params.mean_pairs, 1.0) * 2 * params.config.n_rx * params.config.n_tx
    return int(min(512, max(8, _CHUNK_TARGET_ELEMENTS / per_trial)))


def _outage_chunk(params: SystemParams, seed: int, start: int, stop: int) -> int:
    """Outage count over trials [start, stop), batching the interferer work."""
    strategy, cfg = params.strategy, params.config
    n_active = _n_active(strategy)
    draws = [draw_trial(params, trial_rng(seed, i)) for i in range(start, stop)]
    counts = [d.realization.interferer_count for d in draws]

    own_si = (np.concatenate([d.own_si for d in draws])
              if draws and draws[0].own_si is not None else None)
    own_desired = (np.concatenate([d.own_desired for d in draws])
                   if draws and draws[0].own_desired is not None else None)
    h_int = np.concatenate([d.h_int for d in draws]) if draws else None

    w_all = interferer_transmit_vectors(strategy, cfg, own_desired, own_si,
                                        batch_shape=(sum(counts), n_active))
    effective_all = np.einsum("knij,knj->kni", h_int, w_all)

    n_outage = 0
    offset = 0
    for d, m in zip(draws, counts):
        w_int = w_all[offset:offset + m]
        effective = effective_all[offset:offset + m]
        offset += m
        nearest = _nearest_for(params, d.realization)
        beamformers = build_beamformers(strategy, d.channels, d.partner,
                                        w_int, nearest, cfg)
        outcome = trial_sinr(params, d.realization, d.channels, beamformers,
                             effective, nearest, d.noise)
        n_outage += int(outcome.outage)
    return n_outage


def estimate_outage(params: SystemParams, trials: int, seed: int,
                    chunk_trials: int | None = None) -> tuple[float, float]:
    """Outage fraction over independent trials, with its binomial standard error.

    Fresh geometry and fading every trial; deterministic in
    (params, trials, seed) and independent of ``chunk_trials``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunk = chunk_trials if chunk_trials else _chunk_size(params)
    n_outage = 0
    for start in range(0, trials, chunk):
        n_outage += _outage_chunk(params, seed, start, min(start + chunk, trials))
    p_hat = n_outage / trials
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return p_hat, std_err


def dump_trials(params: SystemParams, trials: int, seed: int, path) -> None:
    """Debug dump: one JSON object per trial (JSON lines) with the outcome
    components."""
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(trials):
            out = run_trial(params, seed, i)
            fh.write(json.dumps({
                "trial": i,
                "sinr": out.sinr,
                "outage": out.outage,
                "desired_power": out.desired_power,
                "interference_power": out.interference_power,
                "residual_si_power": out.residual_si_power,
                "noise_power": out.noise_power,
                "cancelled_interference_power": out.cancelled_interference_power,
                "degenerate_alignment": bool(out.degenerate_alignment),
            }, sort_keys=True) + "\n")


def _probe_seed(seed: int, probe_index: int) -> int:
    return int(np.random.SeedSequence((seed, 0xFD, probe_index))
               .generate_state(1, np.uint64)[0])


def simulated_tc(params: SystemParams, trials: int = 20_000, seed: int = 0,
                 density_lo: float = _TC_DENSITY_LO,
                 max_doublings: int = _TC_MAX_DOUBLINGS,
                 bisect_steps: int = _TC_BISECT_STEPS) -> SimulatedTcResult:
    """Empirical transmission capacity: invert the outage curve by bisection.

    Finds the density where the simulated outage crosses ``epsilon`` (outage
    is monotone in density), then returns density * (1 - epsilon) * rate,
    doubled for half-duplex where a single pair carries the doubled rate.
    Returns zero capacity when even the smallest probed density violates the
    outage target; a bracket that never crosses ``epsilon`` within the
    doubling cap is reported via ``bracket_failed`` with the last bracket
    midpoint used as-is.
    """
    eps = params.epsilon
    probes: list[tuple[float, float]] = []

    def probe(density: float) -> float:
        q, _ = estimate_outage(dataclasses.replace(params, density=density),
                               trials, _probe_seed(seed, len(probes)))
        probes.append((density, q))
        return q

    q_lo = probe(density_lo)
    if q_lo > eps:
        return SimulatedTcResult(capacity=0.0, density_solved=0.0,
                                 outage_at_density=q_lo, zero_tc=True,
                                 bracket_failed=False, probes=tuple(probes))

    lo = hi = density_lo
    bracket_failed = True
    for d in range(1, max_doublings + 1):
        hi = density_lo * 2 ** d
        if probe(hi) > eps:
            bracket_failed = False
            break
        lo = hi

    for _ in range(bisect_steps):
        mid = 0.5 * (lo + hi)
        q_mid = probe(mid)
        if q_mid > eps:
            hi = mid
        else:
            lo = mid
    density = 0.5 * (lo + hi)

    factor = 1.0 if params.strategy.is_full_duplex else 2.0
    capacity = factor * density * (1.0 - eps) * params.rate
    return SimulatedTcResult(capacity=capacity, density_solved=density,
                             outage_at_density=probes[-1][1], zero_tc=False,
                             bracket_failed=bracket_failed, probes=tuple(probes))
