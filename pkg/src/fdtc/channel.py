"""Random channel draws and the complex linear-algebra kernels for beamforming.

All fading entries are i.i.d. zero-mean unit-variance complex Gaussian.  The
loopback (self-interference) channel is only known through an estimate; the
estimation error is an independent complex Gaussian matrix with per-entry
variance ``sigma2_si`` added on top of the estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AntennaConfig",
    "ChannelSet",
    "PartnerChannels",
    "DegenerateMatrixError",
    "complex_normal",
    "draw_rayleigh",
    "draw_si_channel",
    "null_space",
    "null_projector",
    "dominant_singular_triple",
    "batched_top_eigenvalue",
    "batched_dominant_right_vectors",
    "batched_projected_gram",
    "batched_projected_right_vectors",
]

# Relative singular-value cutoff for numerical rank decisions.
_RANK_RTOL = 1e-12

# Fixed power-iteration depth for the batched dominant-vector kernels.  For
# i.i.d. Gaussian inputs the spectral gap contracts the off-dominant error by
# orders of magnitude over 12 steps; the fixed count keeps the result a
# deterministic function of its input.
_POWER_ITERATIONS = 12

# Renormalization cadence inside the power iteration; eigenvalues of the
# Grams seen here stay far below overflow across 4 unnormalized applications.
_POWER_NORM_EVERY = 4


class DegenerateMatrixError(ValueError):
    """A decomposition was requested for an (effectively) zero matrix."""


@dataclass(frozen=True)
class AntennaConfig:
    """Per-node antenna split: ``n_tx`` transmit and ``n_rx`` receive chains."""

    n_tx: int
    n_rx: int

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("n_tx and n_rx must both be >= 1")

    @property
    def n_total(self) -> int:
        return self.n_tx + self.n_rx

    @property
    def tx_heavy(self) -> bool:
        """True when the transmit side has spare dimensions (n_tx > n_rx)."""
        return self.n_tx > self.n_rx


@dataclass(frozen=True)
class ChannelSet:
    """All channel matrices one trial needs at the typical receiver.

    ``h_interferer_b`` / ``h_interferer_a`` hold the links from each
    interfering pair's two nodes to the typical receiver, ordered like the
    realization's pair list.  The actual loopback channel is exactly
    estimate + error.  Half-duplex trials have a single active node per pair
    (stored in the ``b`` slot) and no loopback, so the remaining fields are
    None.
    """

    config: AntennaConfig
    h_desired: np.ndarray                 # (n_rx, n_tx) partner -> typical rx
    h_interferer_b: np.ndarray            # (K, n_rx, n_tx)
    h_interferer_a: np.ndarray | None     # (K, n_rx, n_tx), None in half-duplex
    h_si_estimated: np.ndarray | None     # (n_rx, n_tx)
    h_si_error: np.ndarray | None         # (n_rx, n_tx)
    h_si_actual: np.ndarray | None        # estimate + error, exactly
    sigma2_si: float


@dataclass(frozen=True)
class PartnerChannels:
    """What the typical pair's other node contributes to the construction.

    ``h_si_estimated`` shapes the partner's transmit vector when the
    transmit side nulls its own loopback; ``h_reverse`` is the link from the
    typical node to the partner and shapes the typical node's own transmit
    vector (whose leakage through the loopback error is the residual
    self-interference).
    """

    h_si_estimated: np.ndarray     # (n_rx, n_tx) partner's loopback estimate
    h_reverse: np.ndarray          # (n_rx, n_tx) typical -> partner link


def complex_normal(shape, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) array: real and imaginary parts N(0, 1/2) each.

    One ``standard_normal`` call of trailing dimension 2 per invocation
    (reinterpreted as interleaved real/imaginary pairs), so seeded substreams
    reproduce byte-for-byte.
    """
    parts = rng.standard_normal(tuple(shape) + (2,))
    return parts.view(np.complex128)[..., 0] * np.sqrt(0.5)


def draw_rayleigh(n_rows: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh-fading matrix with i.i.d. CN(0, 1) entries."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return complex_normal((n_rows, n_cols), rng)


def draw_si_channel(config: AntennaConfig, sigma2_si: float,
                    rng: np.random.Generator):
    """Draw (estimate, error, actual) for the loopback channel.

    The estimate has unit-variance entries; the error is independent with
    per-entry variance ``sigma2_si``; the actual channel is their exact sum.
    """
    if sigma2_si < 0.0:
        raise ValueError("sigma2_si must be >= 0")
    estimated = complex_normal((config.n_rx, config.n_tx), rng)
    error = np.sqrt(sigma2_si) * complex_normal((config.n_rx, config.n_tx), rng)
    return estimated, error, estimated + error


def null_space(a: np.ndarray, rtol: float = _RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the right null space of ``a``.

    Singular values below ``max(m, n) * sigma_max * rtol`` count as zero.
    Returns an (n, d) matrix with orthonormal columns; d may be zero.
    """
    a = np.asarray(a)
    if a.size == 0:
        raise ValueError("null_space requires a nonempty matrix")
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        cutoff = max(a.shape) * s[0] * rtol
        rank = int(np.count_nonzero(s > cutoff))
    return vh[rank:].conj().T


def null_projector(a: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the right null space of full-row-rank ``a``.

    P = I - A^H (A A^H)^{-1} A.  Batched over leading axes.
    """
    a = np.asarray(a)
    n = a.shape[-1]
    gram = a @ np.swapaxes(a.conj(), -1, -2)
    inner = np.linalg.solve(gram, a)
    proj = np.swapaxes(a.conj(), -1, -2) @ inner
    return np.broadcast_to(np.eye(n), proj.shape) - proj


def dominant_singular_triple(a: np.ndarray):
    """Largest singular value and phase-normalized singular vector pair.

    Returns (sigma1, u1, v1) with ``a @ v1 = sigma1 * u1``.  The first
    component of v1 with magnitude above 1e-8 is rotated to be real and
    positive (u1 carries the inverse rotation), which makes the output a
    deterministic function of ``a``.
    """
    a = np.asarray(a)
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] <= 0.0:
        raise DegenerateMatrixError("dominant_singular_triple of a zero matrix")
    u1 = u[:, 0]
    v1 = vh[0].conj()
    idx = int(np.argmax(np.abs(v1) > 1e-8))
    phase = v1[idx] / abs(v1[idx])
    return float(s[0]), u1 * np.conj(phase), v1 * np.conj(phase)


def batched_top_eigenvalue(mats: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each Hermitian PSD matrix in a (..., d, d) stack."""
    vals = np.linalg.eigvalsh(mats)
    return vals[..., -1]


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    norm_sq = np.einsum("...i,...i->...", v.real, v.real)
    norm_sq += np.einsum("...i,...i->...", v.imag, v.imag)
    np.maximum(norm_sq, 1e-300, out=norm_sq)
    return v / np.sqrt(norm_sq)[..., None]


def _power_iterate(gram: np.ndarray, n_iter: int) -> np.ndarray:
    """Top eigenvector of each Hermitian PSD matrix in a (..., d, d) stack."""
    v = gram[..., :, 0].copy()
    norm_sq = np.einsum("...i,...i->...", v.real, v.real)
    norm_sq += np.einsum("...i,...i->...", v.imag, v.imag)
    zero = norm_sq < 1e-300
    if np.any(zero):
        v[zero] = 0.0
        v[zero, 0] = 1.0
    v = _normalize_rows(v)
    for step in range(n_iter):
        v = np.einsum("...ij,...j->...i", gram, v)
        if step % _POWER_NORM_EVERY == _POWER_NORM_EVERY - 1:
            v = _normalize_rows(v)
    return _normalize_rows(v)


def batched_dominant_right_vectors(g: np.ndarray,
                                   n_iter: int = _POWER_ITERATIONS) -> np.ndarray:
    """Dominant right singular vector of each matrix in a (..., m, n) stack.

    Power iteration on the smaller Gram side; returns unit vectors (..., n).
    """
    g = np.asarray(g)
    m, n = g.shape[-2], g.shape[-1]
    gc = g.conj()
    if n <= m:
        gram = np.einsum("...ij,...ik->...jk", gc, g)
        return _power_iterate(gram, n_iter)
    gram = np.einsum("...ij,...kj->...ik", g, gc)
    u = _power_iterate(gram, n_iter)
    return _normalize_rows(np.einsum("...ij,...i->...j", gc, u))


def _projected_gram_cached(g, gc, h, hc):
    gram_h = np.einsum("...ij,...kj->...ik", h, hc)
    cross = np.einsum("...ij,...kj->...ik", g, hc)         # G H^H
    sol = np.linalg.solve(gram_h, np.swapaxes(cross, -1, -2).conj())
    gram = np.einsum("...ij,...kj->...ik", g, gc) - cross @ sol
    return gram, gram_h


def batched_projected_gram(g: np.ndarray, h_si_estimated: np.ndarray) -> np.ndarray:
    """G P G^H for each batch element, with P projecting onto null(H_si).

    The top eigenvalue of this Gram is the effective beamforming gain of the
    loopback-null-projected desired link.  Requires full-row-rank H_si
    (n_tx > n_rx with continuous entries).
    """
    g = np.asarray(g)
    h = np.asarray(h_si_estimated)
    if h.shape[-1] <= h.shape[-2]:
        raise ValueError("the loopback null space is empty unless n_tx > n_rx")
    gram, _ = _projected_gram_cached(g, g.conj(), h, h.conj())
    return gram


def batched_projected_right_vectors(g: np.ndarray, h_si_estimated: np.ndarray,
                                    n_iter: int = _POWER_ITERATIONS) -> np.ndarray:
    """Dominant right singular vector of G restricted to null(H_si).

    For each batch element, with P the projector onto the right null space
    of the loopback estimate, returns the top right singular vector of
    ``G P`` (a unit vector inside the null space).  Requires a transmit-heavy
    split so the null space is nonempty.
    """
    g = np.asarray(g)
    h = np.asarray(h_si_estimated)
    if h.shape[-1] <= h.shape[-2]:
        raise ValueError("the loopback null space is empty unless n_tx > n_rx")
    gc = g.conj()
    hc = h.conj()
    gram, gram_h = _projected_gram_cached(g, gc, h, hc)
    u = _power_iterate(gram, n_iter)
    gu = np.einsum("...ij,...i->...j", gc, u)              # G^H u
    hgu = np.einsum("...ij,...j->...i", h, gu)
    corr = np.linalg.solve(gram_h, hgu[..., None])[..., 0]
    return _normalize_rows(gu - np.einsum("...ij,...i->...j", hc, corr))
