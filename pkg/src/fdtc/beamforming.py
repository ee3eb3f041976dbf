"""Transmit/receive beamformer construction for all duplexing strategies.

Every transmitter sends a single stream through a unit-norm vector shaped by
its own local channels (no coordination across pairs).  The typical receiver
spends its spatial degrees of freedom on zero-forcing: the receive vector is
confined to the joint null space of the constraint set (loopback term and/or
nearest interfering pairs), then scaled so the effective desired coefficient
equals the desired link's top singular value.

Strategy zoo
------------
* ``PROPOSED_FD``   - transmit-heavy splits null the loopback estimate at the
  transmitter, freeing one receive dimension; otherwise the receiver cancels
  loopback plus nearest pairs.
* ``SVD_ONLY_FD``   - matched single-stream transmit, receiver cancels the
  loopback term only.
* ``SVD_PARTIAL_ZF_FD`` - receiver-side loopback + nearest-pair cancellation
  at every antenna split (identical to the proposed scheme when n_tx <= n_rx).
* ``PARTIAL_ZF_ONLY_FD`` - no transmit shaping (fixed reference direction),
  receiver-side cancellation only.
* ``HALF_DUPLEX``   - one transmitter per pair, no loopback; all spare
  receive dimensions cancel the nearest transmitting nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import (
    AntennaConfig,
    ChannelSet,
    PartnerChannels,
    batched_dominant_right_vectors,
    batched_projected_right_vectors,
    dominant_singular_triple,
    null_space,
)

__all__ = [
    "Strategy",
    "BeamformerSet",
    "CapabilityError",
    "cancellable_pairs",
    "uses_transmit_si_nulling",
    "interferer_transmit_vectors",
    "build_proposed_fd",
    "build_baseline",
    "build_hd",
    "build_beamformers",
]

_DEGENERATE_ALIGNMENT_TOL = 1e-10


class CapabilityError(ValueError):
    """The antenna split cannot support the requested strategy."""


class Strategy(enum.Enum):
    PROPOSED_FD = "proposed_fd"
    SVD_ONLY_FD = "svd_only_fd"
    SVD_PARTIAL_ZF_FD = "svd_partial_zf_fd"
    PARTIAL_ZF_ONLY_FD = "partial_zf_only_fd"
    HALF_DUPLEX = "half_duplex"

    @property
    def is_full_duplex(self) -> bool:
        return self is not Strategy.HALF_DUPLEX

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        key = name.strip().lower()
        for member in cls:
            if member.value == key or member.name.lower() == key:
                return member
        raise ValueError(f"unknown strategy {name!r}; expected one of "
                         f"{[m.value for m in cls]}")


def uses_transmit_si_nulling(strategy: Strategy, config: AntennaConfig) -> bool:
    """True when the loopback estimate is nulled by the transmit vector itself."""
    return strategy is Strategy.PROPOSED_FD and config.tx_heavy


def cancellable_pairs(strategy: Strategy, config: AntennaConfig) -> int:
    """How many nearest interferers the receive side can zero-force.

    Returns a pair count for the full-duplex strategies and an individual
    node count for half-duplex (one active transmitter per pair).
    """
    n_r = config.n_rx
    if strategy is Strategy.HALF_DUPLEX:
        return n_r - 1
    if strategy is Strategy.PROPOSED_FD:
        if config.tx_heavy:
            return (n_r - 1) // 2
        if n_r < 2:
            raise CapabilityError(
                "proposed scheme with n_tx <= n_rx cancels the loopback at the "
                "receiver and needs n_rx >= 2")
        return (n_r - 2) // 2
    # The remaining strategies all burn one receive dimension on the loopback.
    if n_r < 2:
        raise CapabilityError(
            f"{strategy.value} spends a receive dimension on the loopback and "
            "needs n_rx >= 2")
    if strategy is Strategy.SVD_ONLY_FD:
        return 0
    if strategy in (Strategy.SVD_PARTIAL_ZF_FD, Strategy.PARTIAL_ZF_ONLY_FD):
        return (n_r - 2) // 2
    raise ValueError(f"unhandled strategy {strategy}")


@dataclass(frozen=True)
class BeamformerSet:
    """All beamforming vectors of one trial plus the effective desired gain.

    ``z_typical_rx`` is not unit norm: it is the zero-forced direction scaled
    so that z^H (desired direction) = 1, which makes the effective desired
    coefficient equal sqrt(effective_gain).  For half-duplex the typical node
    does not transmit and ``w_typical_tx`` is None.
    """

    strategy: Strategy
    config: AntennaConfig
    w_typical_tx: np.ndarray | None     # (n_tx,)
    w_partner_tx: np.ndarray            # (n_tx,)
    w_interferers: np.ndarray           # (K, n_active, n_tx)
    z_typical_rx: np.ndarray            # (n_rx,)
    desired_direction: np.ndarray       # (n_rx,) unit vector z is normalized on
    cancelled_pair_count: int           # node count for half-duplex
    effective_gain: float
    degenerate_alignment: bool


def interferer_transmit_vectors(strategy: Strategy, config: AntennaConfig,
                                own_desired: np.ndarray | None,
                                own_si_estimated: np.ndarray | None,
                                batch_shape: tuple | None = None) -> np.ndarray:
    """Transmit vectors for a stack of interfering nodes.

    ``own_desired`` holds each node's own desired-link channel (leading axes
    arbitrary); nodes are shaped exactly like the typical pair's transmitters:
    loopback-null-projected matched vectors for the transmit-heavy proposed
    scheme, plain matched vectors otherwise, and the fixed reference direction
    for the no-transmit-shaping baseline (which needs only ``batch_shape``).
    """
    if strategy is Strategy.PARTIAL_ZF_ONLY_FD:
        if batch_shape is None:
            if own_desired is None:
                raise ValueError(
                    "need a batch shape to tile the reference direction")
            batch_shape = own_desired.shape[:-2]
        w = np.zeros(tuple(batch_shape) + (config.n_tx,), dtype=complex)
        w[..., 0] = 1.0
        return w
    if own_desired is None:
        raise ValueError("own_desired is required for matched transmit vectors")
    if uses_transmit_si_nulling(strategy, config):
        if own_si_estimated is None:
            raise ValueError("own_si_estimated is required for the "
                             "transmit-heavy proposed scheme")
        return batched_projected_right_vectors(own_desired, own_si_estimated)
    return batched_dominant_right_vectors(own_desired)


def _receive_zf_vector(constraints: np.ndarray | None, desired_direction: np.ndarray):
    """Zero-forced receive vector normalized on the desired direction.

    ``constraints`` stacks the vectors to null as rows (may be None/empty).
    Within the constraint null space the direction maximizing the desired
    gain is the projection of the desired direction; the returned z satisfies
    z^H c = 0 for every constraint and z^H desired_direction = 1.
    """
    n_r = desired_direction.shape[0]
    if constraints is None or len(constraints) == 0:
        basis = np.eye(n_r, dtype=complex)
    else:
        stack = np.atleast_2d(np.asarray(constraints))
        if stack.shape[0] > n_r - 1:
            raise CapabilityError(
                f"{stack.shape[0]} zero-forcing constraints exceed the "
                f"{n_r - 1} spare receive dimensions")
        basis = null_space(stack.conj())
        if basis.shape[1] == 0:
            raise CapabilityError("receive null space is empty")
    projected = basis @ (basis.conj().T @ desired_direction)
    norm = np.linalg.norm(projected)
    degenerate = norm < _DEGENERATE_ALIGNMENT_TOL
    if degenerate:
        # Measure-zero alignment failure: keep the trial (flagged) with an
        # unscaled direction, since normalizing on the desired direction
        # would divide by ~0.
        return basis[:, 0].copy(), True
    s = projected / norm
    c = np.vdot(s, desired_direction)
    return s / np.conj(c), False


def _nearest_effective_vectors(channels: ChannelSet, w_interferers: np.ndarray,
                               nearest: list[int]) -> np.ndarray:
    """Effective receive-side vectors of the pairs to cancel, b node then a node."""
    vectors = []
    for k in nearest:
        idx = k - 1
        vectors.append(channels.h_interferer_b[idx] @ w_interferers[idx, 0])
        vectors.append(channels.h_interferer_a[idx] @ w_interferers[idx, 1])
    return np.asarray(vectors)


def build_proposed_fd(channels: ChannelSet, partner: PartnerChannels,
                      w_interferers: np.ndarray, nearest: list[int],
                      config: AntennaConfig) -> BeamformerSet:
    """Joint transceiver construction, branching on the antenna split.

    Transmit-heavy split: both transmitters restrict themselves to the null
    space of their own loopback estimate (so the estimated loopback vanishes
    before the receive vector is even applied) and match the dominant mode of
    the projected desired link; the receiver's spare dimensions all go to the
    nearest pairs.  Otherwise: plain matched transmit vectors, and the
    receiver cancels the loopback estimate plus the nearest pairs.
    """
    constraints = list(_nearest_effective_vectors(channels, w_interferers, nearest))
    if config.tx_heavy:
        v_partner = null_space(partner.h_si_estimated)
        if v_partner.shape[1] == 0:
            raise CapabilityError("loopback estimate has an empty null space")
        sigma, u1, v1 = dominant_singular_triple(channels.h_desired @ v_partner)
        w_partner = v_partner @ v1
        v_own = null_space(channels.h_si_estimated)
        _, _, v1_own = dominant_singular_triple(partner.h_reverse @ v_own)
        w_typical = v_own @ v1_own
    else:
        sigma, u1, v1 = dominant_singular_triple(channels.h_desired)
        w_partner = v1
        _, _, w_typical = dominant_singular_triple(partner.h_reverse)
        constraints.insert(0, channels.h_si_estimated @ w_typical)
    z, degenerate = _receive_zf_vector(constraints, u1)
    return BeamformerSet(strategy=Strategy.PROPOSED_FD, config=config,
                         w_typical_tx=w_typical, w_partner_tx=w_partner,
                         w_interferers=w_interferers, z_typical_rx=z,
                         desired_direction=u1,
                         cancelled_pair_count=len(nearest),
                         effective_gain=sigma ** 2,
                         degenerate_alignment=degenerate)


def build_baseline(strategy: Strategy, channels: ChannelSet,
                   partner: PartnerChannels, w_interferers: np.ndarray,
                   nearest: list[int], config: AntennaConfig) -> BeamformerSet:
    """Reference schemes: matched-only, matched + receive ZF, receive ZF only."""
    if strategy is Strategy.SVD_ONLY_FD:
        if nearest:
            raise ValueError("the matched-only baseline cancels no pairs")
        sigma, u1, v1 = dominant_singular_triple(channels.h_desired)
        _, _, w_typical = dominant_singular_triple(partner.h_reverse)
        z, degenerate = _receive_zf_vector(
            [channels.h_si_estimated @ w_typical], u1)
        gain = sigma ** 2
        w_partner = v1
    elif strategy is Strategy.SVD_PARTIAL_ZF_FD:
        # Same construction as the proposed scheme's n_tx <= n_rx branch,
        # applied regardless of the split.
        constraints = list(
            _nearest_effective_vectors(channels, w_interferers, nearest))
        sigma, u1, v1 = dominant_singular_triple(channels.h_desired)
        _, _, w_typical = dominant_singular_triple(partner.h_reverse)
        constraints.insert(0, channels.h_si_estimated @ w_typical)
        z, degenerate = _receive_zf_vector(constraints, u1)
        gain = sigma ** 2
        w_partner = v1
    elif strategy is Strategy.PARTIAL_ZF_ONLY_FD:
        w_partner = np.zeros(config.n_tx, dtype=complex)
        w_partner[0] = 1.0
        w_typical = w_partner.copy()
        effective = channels.h_desired @ w_partner
        gain = float(np.linalg.norm(effective) ** 2)
        u1 = effective / np.sqrt(gain)
        constraints = [channels.h_si_estimated @ w_typical]
        constraints += list(
            _nearest_effective_vectors(channels, w_interferers, nearest))
        z, degenerate = _receive_zf_vector(constraints, u1)
    else:
        raise ValueError(f"{strategy} is not a full-duplex baseline")
    return BeamformerSet(strategy=strategy, config=config,
                         w_typical_tx=w_typical, w_partner_tx=w_partner,
                         w_interferers=w_interferers, z_typical_rx=z,
                         desired_direction=u1,
                         cancelled_pair_count=len(nearest),
                         effective_gain=gain, degenerate_alignment=degenerate)


def build_hd(channels: ChannelSet, w_interferers: np.ndarray,
             nearest_nodes: list[int], config: AntennaConfig) -> BeamformerSet:
    """Half-duplex construction: matched transmit, receive ZF on nearest nodes.

    One node per interfering pair transmits, so ``nearest_nodes`` indexes
    pairs and ``w_interferers`` has a single active slot per pair.  There is
    no loopback term.
    """
    sigma, u1, v1 = dominant_singular_triple(channels.h_desired)
    constraints = [channels.h_interferer_b[k - 1] @ w_interferers[k - 1, 0]
                   for k in nearest_nodes]
    z, degenerate = _receive_zf_vector(np.asarray(constraints) if constraints
                                       else None, u1)
    return BeamformerSet(strategy=Strategy.HALF_DUPLEX, config=config,
                         w_typical_tx=None, w_partner_tx=v1,
                         w_interferers=w_interferers, z_typical_rx=z,
                         desired_direction=u1,
                         cancelled_pair_count=len(nearest_nodes),
                         effective_gain=sigma ** 2,
                         degenerate_alignment=degenerate)


def build_beamformers(strategy: Strategy, channels: ChannelSet,
                      partner: PartnerChannels | None, w_interferers: np.ndarray,
                      nearest: list[int], config: AntennaConfig) -> BeamformerSet:
    """Dispatch to the strategy-specific builder."""
    if strategy is Strategy.PROPOSED_FD:
        return build_proposed_fd(channels, partner, w_interferers, nearest, config)
    if strategy is Strategy.HALF_DUPLEX:
        return build_hd(channels, w_interferers, nearest, config)
    return build_baseline(strategy, channels, partner, w_interferers,
                          nearest, config)
