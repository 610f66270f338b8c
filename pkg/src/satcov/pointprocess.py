"""Sampling of the homogeneous spherical Poisson point process on the dome.

Only satellites above the elevation mask are generated; the rest cannot
contribute to the SIR.  Caps are sampled with the hat-box property: on a
sphere, the z-coordinate of a uniform point on a zone is uniform on the
zone's z-range.

Randomness comes from counter-style substreams: ``substream(seed, k)``
returns an independent generator for work unit ``k``, so any parallel
schedule reproduces the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ClusterGeometry, SystemParams, zenith_angle_of_range


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator number ``index`` derived from ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SatelliteSample:
    position: np.ndarray
    distance_to_user_km: float
    in_cluster: bool


def sample_count(rate: float, rng: np.random.Generator, size=None):
    """Poisson number of satellites with mean ``rate``."""
    if rate < 0:
        raise ValueError("Poisson rate must be non-negative")
    return rng.poisson(rate, size=size)


def sample_cap_uniform(
    n: int, zenith_lo: float, zenith_hi: float, rng: np.random.Generator, radius: float = 1.0
) -> np.ndarray:
    """``n`` i.i.d. uniform points on the zone ``zenith_lo <= psi <= zenith_hi``.

    Returns an ``(n, 3)`` array on the sphere of the given radius.
    """
    if not (0.0 <= zenith_lo < zenith_hi <= math.pi):
        raise ValueError("need 0 <= zenith_lo < zenith_hi <= pi")
    z_top, z_bot = math.cos(zenith_lo), math.cos(zenith_hi)
    z = z_bot + (z_top - z_bot) * rng.random(n)
    phi = 2.0 * math.pi * rng.random(n)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return radius * np.column_stack((rho * np.cos(phi), rho * np.sin(phi), z))


def _to_samples(p: SystemParams, pos: np.ndarray, in_cluster: bool) -> list[SatelliteSample]:
    user = np.array([0.0, 0.0, p.earth_radius_km])
    dist = np.linalg.norm(pos - user, axis=1)
    return [SatelliteSample(pos[i], float(dist[i]), in_cluster) for i in range(len(pos))]


def sample_constellation(
    p: SystemParams, g: ClusterGeometry, rng: np.random.Generator
) -> tuple[list[SatelliteSample], list[SatelliteSample]]:
    """One snapshot of the visible constellation, split into cluster and outside satellites."""
    n_in = int(sample_count(p.sat_density_per_km2 * g.cluster_area_km2, rng))
    n_out = int(sample_count(p.sat_density_per_km2 * g.outside_area_km2, rng))
    psi_clu = p.cluster_polar_angle_rad
    psi_max = zenith_angle_of_range(p, g.r_max_km)
    RS = p.sat_orbit_radius_km
    inside = sample_cap_uniform(n_in, 0.0, psi_clu, rng, RS) if n_in else np.empty((0, 3))
    outside = sample_cap_uniform(n_out, psi_clu, psi_max, rng, RS) if n_out else np.empty((0, 3))
    return _to_samples(p, inside, True), _to_samples(p, outside, False)


def sample_region_distances(rng: np.random.Generator, n: int, r_lo: float, r_hi: float) -> np.ndarray:
    """Distances of ``n`` uniform satellites in the zone between ``r_lo`` and ``r_hi``.

    Uniform z on a zone is uniform ``r^2``, since ``r^2 = R_S^2 + R_E^2 - 2 R_E z``.
    """
    u = rng.random(n)
    return np.sqrt(r_lo * r_lo + (r_hi * r_hi - r_lo * r_lo) * u)
