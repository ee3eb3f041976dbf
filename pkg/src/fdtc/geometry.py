"""Poisson deployments of transceiver pairs on a disk.

The typical receiver sits at the disk centre; interfering pairs are scattered
by a homogeneous Poisson process.  Each pair is a transmitter/receiver couple
separated by a fixed link distance, and both members of an interfering pair
share the single distance measured from the pair anchor to the typical
receiver (co-located-pair approximation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "DeploymentParams",
    "NetworkRealization",
    "sample_network",
    "nearest_pairs",
    "nth_nearest_distance_cdf",
    "realization_to_json",
]

_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class DeploymentParams:
    """Deployment geometry: density, disk size, link distance.

    Exactly one of ``disk_radius`` / ``mean_pairs`` may be omitted; the other
    is derived from ``density * pi * disk_radius**2 = mean_pairs``.  If both
    are given they must be consistent.
    """

    density: float
    pair_distance: float
    disk_radius: float | None = None
    mean_pairs: float | None = None

    def __post_init__(self):
        if self.density < 0.0:
            raise ValueError("density must be >= 0")
        if self.pair_distance <= 0.0:
            raise ValueError("pair_distance must be > 0")
        if self.disk_radius is None and self.mean_pairs is None:
            raise ValueError("one of disk_radius or mean_pairs is required")
        if self.disk_radius is None:
            if self.density == 0.0:
                raise ValueError(
                    "disk_radius cannot be derived from mean_pairs at density 0")
            object.__setattr__(self, "disk_radius",
                               math.sqrt(self.mean_pairs / (self.density * math.pi)))
        elif self.disk_radius <= 0.0:
            raise ValueError("disk_radius must be > 0")
        expected_mean = self.density * math.pi * self.disk_radius ** 2
        if self.mean_pairs is None:
            object.__setattr__(self, "mean_pairs", expected_mean)
        elif not math.isclose(self.mean_pairs, expected_mean,
                              rel_tol=_CONSISTENCY_RTOL, abs_tol=1e-12):
            raise ValueError(
                f"inconsistent deployment: density*pi*radius^2 = {expected_mean}"
                f" but mean_pairs = {self.mean_pairs}")


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled deployment.

    Index 0 is the typical pair (anchor at the origin); interfering pairs
    occupy indices 1..M-1 sorted by ascending distance from the typical
    receiver.  Arrays are read-only.
    """

    pair_distance: float
    a_positions: np.ndarray     # (M, 2) anchor nodes
    b_positions: np.ndarray     # (M, 2) partner nodes, |b_k - a_k| = L
    distances: np.ndarray       # (M,)  distances[0] = 0, rest ascending

    def __post_init__(self):
        for arr in (self.a_positions, self.b_positions, self.distances):
            arr.setflags(write=False)

    @property
    def pair_count(self) -> int:
        return self.a_positions.shape[0]

    @property
    def interferer_count(self) -> int:
        return self.pair_count - 1

    @property
    def interferer_distances(self) -> np.ndarray:
        return self.distances[1:]


def sample_network(params: DeploymentParams, rng: np.random.Generator) -> NetworkRealization:
    """Draw one Poisson deployment plus the typical pair at the centre.

    Draw order (a fixed contract so seeded substreams reproduce exactly):
    the pair count, then one uniform block holding squared-radius fractions,
    position angles and pair orientations (typical pair's orientation first
    in its row).
    """
    radius = params.disk_radius
    mean = params.density * math.pi * radius ** 2
    n_int = int(rng.poisson(mean)) if mean > 0.0 else 0

    uniforms = rng.random((3, n_int + 1))
    u = uniforms[0, :n_int]
    pos_angle = 2.0 * math.pi * uniforms[1, :n_int]
    orientation = 2.0 * math.pi * uniforms[2]

    r = radius * np.sqrt(u)
    order = np.argsort(r, kind="stable")

    a = np.zeros((n_int + 1, 2))
    a[1:, 0] = r[order] * np.cos(pos_angle[order])
    a[1:, 1] = r[order] * np.sin(pos_angle[order])

    phi = np.concatenate(([orientation[0]], orientation[1:][order]))
    b = a + params.pair_distance * np.stack([np.cos(phi), np.sin(phi)], axis=1)

    distances = np.concatenate(([0.0], r[order]))
    return NetworkRealization(pair_distance=params.pair_distance,
                              a_positions=a, b_positions=b, distances=distances)


def nearest_pairs(realization: NetworkRealization, count: int) -> list[int]:
    """Indices of the ``count`` interfering pairs closest to the typical receiver.

    Ties break toward the lower index.  Raises if more pairs are requested
    than the realization holds.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count > realization.interferer_count:
        raise ValueError(
            f"requested {count} nearest pairs but only "
            f"{realization.interferer_count} interferers exist")
    order = np.argsort(realization.interferer_distances, kind="stable")
    return [int(k) + 1 for k in order[:count]]


def nth_nearest_distance_cdf(density: float, n: int, r) -> np.ndarray:
    """CDF of the distance from the origin to the n-th nearest Poisson point.

    P[r_n <= r] = gammainc(n, density * pi * r^2); this closed form is the
    keystone linking the sampled geometry to the analytic outage chain.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if density < 0.0:
        raise ValueError("density must be >= 0")
    r_arr = np.asarray(r, dtype=float)
    return _sp.gammainc(n, density * math.pi * r_arr ** 2)


def realization_to_json(realization: NetworkRealization, density: float,
                        disk_radius: float, seed: int | None = None) -> str:
    """Serialize a realization to the documented JSON layout."""
    pairs = [
        {
            "ax": float(realization.a_positions[k, 0]),
            "ay": float(realization.a_positions[k, 1]),
            "bx": float(realization.b_positions[k, 0]),
            "by": float(realization.b_positions[k, 1]),
            "r": float(realization.distances[k]),
        }
        for k in range(realization.pair_count)
    ]
    payload = {
        "seed": seed,
        "lambda": density,
        "disk_radius": disk_radius,
        "L": realization.pair_distance,
        "pairs": pairs,
    }
    return json.dumps(payload, sort_keys=True)
