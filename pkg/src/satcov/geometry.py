"""Spherical geometry of the observable dome and the satellite cluster cap.

All lengths are in km, areas in km^2 and angles in radians.  The typical
user sits at ``(0, 0, R_E)``; satellites live on the sphere of radius
``R_S``.  A satellite at zenith (polar) angle ``psi`` is at distance

    r^2 = R_S^2 + R_E^2 - 2 R_S R_E cos(psi)

from the user, so every cap around the user's zenith maps to a distance
interval ``[R_min, r]`` and its area grows linearly in ``r^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0

INSIDE = "inside"
OUTSIDE = "outside"
REGIONS = (INSIDE, OUTSIDE)


class GeometryError(ValueError):
    """Raised for parameter sets that violate the geometric invariants."""


def _dome_area_raw(RE: float, RS: float, theta_min: float) -> float:
    r_max = -RE * math.sin(theta_min) + math.sqrt(RS**2 - RE**2 * math.cos(theta_min) ** 2)
    return 2.0 * math.pi * RS * (RS - RE - r_max * math.sin(theta_min))


# density giving 50 visible satellites for a 500 km shell at 25 deg elevation
_DEFAULT_DENSITY = 50.0 / _dome_area_raw(EARTH_RADIUS_KM, EARTH_RADIUS_KM + 500.0, math.radians(25.0))


def _default_thresholds() -> tuple[float, ...]:
    return tuple(float(g) for g in range(-10, 11))


@dataclass(frozen=True)
class SystemParams:
    """Complete description of one coverage scenario.

    ``sat_density_per_km2`` is the SPPP intensity on the satellite sphere.
    Use :meth:`from_mean_visible` to specify it through the mean number of
    satellites in the observable dome instead.
    """

    earth_radius_km: float = EARTH_RADIUS_KM
    sat_orbit_radius_km: float = EARTH_RADIUS_KM + 500.0
    min_elevation_rad: float = math.radians(25.0)
    cluster_polar_angle_rad: float = math.radians(1.6)
    sat_density_per_km2: float = _DEFAULT_DENSITY
    path_loss_exponent: float = 3.0
    nakagami_m: float = 2.0
    gain_inside: float = 1.0
    gain_outside: float = 0.1
    sir_thresholds_db: tuple[float, ...] = field(default_factory=_default_thresholds)
    rng_seed: int = 20240601
    mc_trials: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "sir_thresholds_db", tuple(float(g) for g in self.sir_thresholds_db))
        RE, RS = self.earth_radius_km, self.sat_orbit_radius_km
        if not (RE > 0 and RS > RE):
            raise GeometryError(f"need R_S > R_E > 0, got R_E={RE}, R_S={RS}")
        if not (0.0 < self.min_elevation_rad < math.pi / 2):
            raise GeometryError("min elevation must lie in (0, pi/2)")
        if not (self.cluster_polar_angle_rad > 0.0):
            raise GeometryError("cluster polar angle must be positive")
        if self.sat_density_per_km2 < 0:
            raise GeometryError("satellite density must be non-negative")
        if not (self.path_loss_exponent > 2.0):
            raise GeometryError("path-loss exponent must exceed 2")
        if not (self.nakagami_m >= 0.5):
            raise GeometryError("Nakagami m must be >= 0.5")
        if not (self.gain_inside > 0 and self.gain_outside > 0):
            raise GeometryError("antenna gains must be positive")
        if self.gain_outside > self.gain_inside:
            raise GeometryError("side-lobe gain cannot exceed main-lobe gain")
        if self.mc_trials < 1:
            raise GeometryError("mc_trials must be >= 1")
        if not (0 <= int(self.rng_seed) < 2**64):
            raise GeometryError("rng_seed must be a 64-bit unsigned integer")
        if cluster_slant_range(self) > max_slant_range(self):
            raise GeometryError(
                "cluster cap exceeds the observable dome (R_clu > R_max); "
                "reduce the cluster polar angle or the minimum elevation"
            )

    @property
    def altitude_km(self) -> float:
        return self.sat_orbit_radius_km - self.earth_radius_km

    @classmethod
    def from_mean_visible(cls, mean_visible: float, **kwargs) -> "SystemParams":
        """Build params whose density gives ``mean_visible`` satellites in the dome."""
        probe = cls(**{**kwargs, "sat_density_per_km2": 0.0})
        return cls(**{**kwargs, "sat_density_per_km2": mean_visible / dome_area(probe)})

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class ClusterGeometry:
    r_min_km: float
    r_clu_km: float
    r_max_km: float
    dome_area_km2: float
    cluster_area_km2: float

    @property
    def outside_area_km2(self) -> float:
        return self.dome_area_km2 - self.cluster_area_km2

    def region_bounds(self, region: str) -> tuple[float, float]:
        """Distance interval ``(lo, hi)`` covered by ``region``."""
        if region == INSIDE:
            return self.r_min_km, self.r_clu_km
        if region == OUTSIDE:
            return self.r_clu_km, self.r_max_km
        raise ValueError(f"unknown region {region!r}")

    def region_area(self, region: str) -> float:
        if region == INSIDE:
            return self.cluster_area_km2
        if region == OUTSIDE:
            return self.outside_area_km2
        raise ValueError(f"unknown region {region!r}")


def max_slant_range(p: SystemParams) -> float:
    """Distance to a satellite seen at the minimum elevation angle (law of cosines)."""
    RE, RS, th = p.earth_radius_km, p.sat_orbit_radius_km, p.min_elevation_rad
    return -RE * math.sin(th) + math.sqrt(RS**2 - RE**2 * math.cos(th) ** 2)


def cap_area(p: SystemParams, r: float) -> float:
    """Area of the cap around the user's zenith whose farthest point is at distance ``r``."""
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    return 2.0 * math.pi * RS * (RS - RE - (RS**2 - RE**2 - r**2) / (2.0 * RE))


def dome_area(p: SystemParams) -> float:
    """Area of the observable dome (hat-box theorem)."""
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    r_max = max_slant_range(p)
    return 2.0 * math.pi * RS * (RS - RE - r_max * math.cos(math.pi / 2 - p.min_elevation_rad))


def cluster_slant_range(p: SystemParams) -> float:
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    return math.sqrt(RS**2 + RE**2 - 2.0 * RS * RE * math.cos(p.cluster_polar_angle_rad))


def cluster_area(p: SystemParams) -> float:
    return cap_area(p, cluster_slant_range(p))


def off_axis_to_cluster_range(p: SystemParams, off_axis_rad: float) -> float:
    """Cluster radius implied by a beam off-axis angle measured at the satellite.

    Satellites point their boresight at the sub-satellite point; the user is
    in the main lobe while the satellite-nadir-user angle stays below
    ``off_axis_rad``.
    """
    if not (0.0 < off_axis_rad < math.pi / 2):
        raise GeometryError("off-axis angle must lie in (0, pi/2)")
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    c = math.cos(off_axis_rad)
    disc = RS**2 * (c * c - 1.0) + RE**2
    if disc < 0:
        raise GeometryError("beam never intersects Earth-visible cone")
    return RS * c - math.sqrt(disc)


def cluster_range_to_off_axis(p: SystemParams, r_clu: float) -> float:
    """Inverse of :func:`off_axis_to_cluster_range`."""
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    c = (RS**2 + r_clu**2 - RE**2) / (2.0 * RS * r_clu)
    return math.acos(min(1.0, max(-1.0, c)))


def cluster_geometry(p: SystemParams) -> ClusterGeometry:
    r_clu = cluster_slant_range(p)
    r_max = max_slant_range(p)
    if r_clu > r_max:
        raise GeometryError("cluster cap exceeds the observable dome (R_clu > R_max)")
    return ClusterGeometry(
        r_min_km=p.sat_orbit_radius_km - p.earth_radius_km,
        r_clu_km=r_clu,
        r_max_km=r_max,
        dome_area_km2=dome_area(p),
        cluster_area_km2=cap_area(p, r_clu),
    )


def _check_support(g: ClusterGeometry, region: str, r):
    lo, hi = g.region_bounds(region)
    r = np.asarray(r, dtype=float)
    tol = 1e-12 * hi
    if np.any(r < lo - tol) or np.any(r > hi + tol):
        raise GeometryError(f"distance outside the {region} support [{lo}, {hi}]")
    return lo, hi, r


def distance_pdf(p: SystemParams, g: ClusterGeometry, region: str, r):
    """Conditional PDF of the user-satellite distance given the region.

    Both regions share the form ``2 r / (r_hi^2 - r_lo^2)`` because cap area
    is affine in ``r^2``.
    """
    lo, hi, r = _check_support(g, region, r)
    if region == INSIDE:
        denom = p.earth_radius_km * p.sat_orbit_radius_km * (1.0 - math.cos(p.cluster_polar_angle_rad))
    else:
        denom = p.earth_radius_km * (
            p.sat_orbit_radius_km * math.cos(p.cluster_polar_angle_rad)
            - p.earth_radius_km
            - g.r_max_km * math.cos(math.pi / 2 - p.min_elevation_rad)
        )
    out = r / denom
    return float(out) if out.ndim == 0 else out


def distance_cdf(p: SystemParams, g: ClusterGeometry, region: str, r):
    lo, hi, r = _check_support(g, region, r)
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    if region == INSIDE:
        num = r**2 - RS**2 - RE**2 + 2.0 * RS * RE
        den = 2.0 * RE * (RS - RE - (RS**2 - RE**2 - g.r_clu_km**2) / (2.0 * RE))
    else:
        num = r**2 - g.r_clu_km**2
        den = 2.0 * RE * (
            (RS**2 - RE**2 - g.r_clu_km**2) / (2.0 * RE)
            - g.r_max_km * math.cos(math.pi / 2 - p.min_elevation_rad)
        )
    out = np.clip(num / den, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def zenith_angle_of_range(p: SystemParams, r: float) -> float:
    """Polar angle on the satellite sphere of a point at distance ``r`` from the user."""
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    c = (RS**2 + RE**2 - r**2) / (2.0 * RS * RE)
    return math.acos(min(1.0, max(-1.0, c)))


def thresholds_linear(gammas_db: Sequence[float]) -> np.ndarray:
    return 10.0 ** (np.asarray(gammas_db, dtype=float) / 10.0)
