import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from satcov.geometry import (
    INSIDE,
    OUTSIDE,
    GeometryError,
    SystemParams,
    cap_area,
    cluster_geometry,
    cluster_range_to_off_axis,
    distance_cdf,
    distance_pdf,
    dome_area,
    max_slant_range,
    off_axis_to_cluster_range,
    zenith_angle_of_range,
)


def test_default_ranges(scen1):
    p, g = scen1
    assert g.r_min_km == pytest.approx(500.0)
    assert g.r_max_km == pytest.approx(1031.819, abs=1e-3)
    assert g.r_clu_km == pytest.approx(533.0427, abs=1e-3)
    assert g.r_min_km < g.r_clu_km < g.r_max_km


def test_max_range_is_elevation_triangle(scen1):
    # law of sines check: satellite at r_max seen at elevation theta from the user
    p, g = scen1
    RE, RS, th = p.earth_radius_km, p.sat_orbit_radius_km, p.min_elevation_rad
    user = np.array([0.0, RE])
    psi = zenith_angle_of_range(p, g.r_max_km)
    sat = np.array([RS * math.sin(psi), RS * math.cos(psi)])
    v = sat - user
    elev = math.asin(v[1] / np.linalg.norm(v))
    assert elev == pytest.approx(th, abs=1e-12)


def test_dome_area_matches_cap_formula(scen1):
    p, g = scen1
    assert dome_area(p) == pytest.approx(cap_area(p, g.r_max_km), rel=1e-12)
    # direct spherical cap area 2 pi R^2 (1 - cos psi)
    psi = zenith_angle_of_range(p, g.r_max_km)
    assert dome_area(p) == pytest.approx(2 * math.pi * p.sat_orbit_radius_km**2 * (1 - math.cos(psi)), rel=1e-10)


def test_cluster_area_is_cap_of_polar_angle(scen1):
    p, g = scen1
    RS = p.sat_orbit_radius_km
    expected = 2 * math.pi * RS**2 * (1 - math.cos(p.cluster_polar_angle_rad))
    assert g.cluster_area_km2 == pytest.approx(expected, rel=1e-10)
    assert g.cluster_area_km2 == pytest.approx(115652.83, rel=1e-6)


def test_cap_area_at_rmin_is_zero(scen1):
    p, g = scen1
    assert cap_area(p, g.r_min_km) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("region", [INSIDE, OUTSIDE])
def test_distance_pdf_integrates_to_one(scen1, region):
    p, g = scen1
    lo, hi = g.region_bounds(region)
    val, _ = integrate.quad(lambda r: distance_pdf(p, g, region, r), lo, hi)
    assert val == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("region", [INSIDE, OUTSIDE])
def test_distance_cdf_endpoints_and_derivative(scen1, region):
    p, g = scen1
    lo, hi = g.region_bounds(region)
    assert distance_cdf(p, g, region, lo) == pytest.approx(0.0, abs=1e-12)
    assert distance_cdf(p, g, region, hi) == pytest.approx(1.0, abs=1e-12)
    r = 0.5 * (lo + hi)
    h = 1e-4
    fd = (distance_cdf(p, g, region, r + h) - distance_cdf(p, g, region, r - h)) / (2 * h)
    assert fd == pytest.approx(distance_pdf(p, g, region, r), rel=1e-6)


def test_distance_pdf_outside_support(scen1):
    p, g = scen1
    with pytest.raises(GeometryError):
        distance_pdf(p, g, INSIDE, g.r_clu_km + 10.0)


def test_pdf_is_two_r_over_range(scen1):
    p, g = scen1
    lo, hi = g.region_bounds(OUTSIDE)
    r = np.linspace(lo, hi, 7)
    assert np.allclose(distance_pdf(p, g, OUTSIDE, r), 2 * r / (hi**2 - lo**2), rtol=1e-10)


def test_cluster_larger_than_dome_rejected():
    with pytest.raises(GeometryError, match="R_clu > R_max"):
        SystemParams(cluster_polar_angle_rad=math.radians(30.0))


@pytest.mark.parametrize(
    "kw",
    [
        {"sat_orbit_radius_km": 6000.0},
        {"path_loss_exponent": 2.0},
        {"nakagami_m": 0.3},
        {"gain_outside": 2.0},
        {"sat_density_per_km2": -1.0},
        {"min_elevation_rad": 0.0},
    ],
)
def test_invalid_params(kw):
    with pytest.raises(GeometryError):
        SystemParams(**kw)


def test_from_mean_visible(scen2):
    p, g = scen2
    assert p.sat_density_per_km2 * g.dome_area_km2 == pytest.approx(300.0, rel=1e-12)


def test_off_axis_round_trip(scen1):
    p, _ = scen1
    for r in (520.0, 700.0, 1000.0):
        ang = cluster_range_to_off_axis(p, r)
        assert off_axis_to_cluster_range(p, ang) == pytest.approx(r, rel=1e-10)


def test_off_axis_beyond_earth():
    p = SystemParams()
    with pytest.raises(GeometryError, match="never intersects"):
        off_axis_to_cluster_range(p, math.radians(80.0))


@settings(max_examples=60, deadline=None)
@given(
    alt=st.floats(300.0, 2000.0),
    theta=st.floats(5.0, 70.0),
    frac=st.floats(0.05, 0.95),
)
def test_geometry_invariants(alt, theta, frac):
    probe = SystemParams(sat_orbit_radius_km=6371.0 + alt, min_elevation_rad=math.radians(theta),
                         cluster_polar_angle_rad=1e-4)
    psi_max = zenith_angle_of_range(probe, max_slant_range(probe))
    p = probe.replace(cluster_polar_angle_rad=frac * psi_max)
    g = cluster_geometry(p)
    assert g.r_min_km < g.r_clu_km < g.r_max_km
    assert 0 < g.cluster_area_km2 < g.dome_area_km2
    # caps grow linearly in r^2
    RE, RS = p.earth_radius_km, p.sat_orbit_radius_km
    slope = math.pi * RS / RE
    assert g.cluster_area_km2 == pytest.approx(slope * (g.r_clu_km**2 - g.r_min_km**2), rel=1e-8)
