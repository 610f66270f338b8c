import math

import numpy as np
import pytest
from scipy import stats

from satcov.geometry import INSIDE, OUTSIDE, distance_cdf, zenith_angle_of_range
from satcov.pointprocess import (
    sample_cap_uniform,
    sample_constellation,
    sample_count,
    sample_region_distances,
    substream,
)


def test_zero_rate():
    rng = substream(1, 0)
    assert np.all(sample_count(0.0, rng, size=100) == 0)


def test_negative_rate():
    with pytest.raises(ValueError):
        sample_count(-1.0, substream(1, 0))


def test_count_mean_and_dispersion(scen1):
    p, g = scen1
    rate = p.sat_density_per_km2 * g.cluster_area_km2
    x = sample_count(rate, substream(5, 0), size=100_000)
    n = len(x)
    assert abs(x.mean() - rate) < 3 * math.sqrt(rate / n)
    # variance of the sample variance of a Poisson: (mu + 2 mu^2 (n/(n-1))) / n
    var_se = math.sqrt((rate + 2 * rate**2) / n)
    assert abs(x.var(ddof=1) - x.mean()) < 3 * var_se


def test_count_mean_reference_value():
    rate = 2.0837
    x = sample_count(rate, substream(11, 0), size=100_000)
    assert abs(x.mean() - rate) < 3 * math.sqrt(rate / len(x))


def test_cap_uniform_constraints(scen1):
    p, g = scen1
    RS = p.sat_orbit_radius_km
    lo, hi = 0.01, zenith_angle_of_range(p, g.r_max_km)
    pts = sample_cap_uniform(10_000, lo, hi, substream(2, 0), RS)
    assert pts.shape == (10_000, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), RS, rtol=1e-12)
    psi = np.arccos(np.clip(pts[:, 2] / RS, -1, 1))
    assert psi.min() >= lo - 1e-12 and psi.max() <= hi + 1e-12


def test_cap_uniform_empty():
    assert sample_cap_uniform(0, 0.0, 0.1, substream(1, 0)).shape == (0, 3)


def test_cap_uniform_z_is_uniform():
    lo, hi = 0.02, 0.3
    pts = sample_cap_uniform(100_000, lo, hi, substream(3, 0))
    z = pts[:, 2]
    a, b = math.cos(hi), math.cos(lo)
    assert stats.kstest(z, "uniform", args=(a, b - a)).pvalue > 0.01
    az = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * math.pi)
    assert stats.kstest(az, "uniform", args=(0, 2 * math.pi)).pvalue > 0.01


def test_constellation_samples(scen1):
    p, g = scen1
    rng = substream(4, 0)
    user = np.array([0, 0, p.earth_radius_km])
    for _ in range(20):
        inside, outside = sample_constellation(p, g, rng)
        for s in inside + outside:
            assert np.linalg.norm(s.position) == pytest.approx(p.sat_orbit_radius_km, rel=1e-9)
            assert np.linalg.norm(s.position - user) == pytest.approx(s.distance_to_user_km, rel=1e-9)
            assert s.in_cluster == (s.distance_to_user_km <= g.r_clu_km * (1 + 1e-12))
            assert s.distance_to_user_km <= g.r_max_km * (1 + 1e-12)


def test_constellation_empty_when_no_density(scen1):
    p, g = scen1
    q = p.replace(sat_density_per_km2=0.0)
    assert sample_constellation(q, g, substream(1, 0)) == ([], [])


def test_constellation_counts_scenario2(scen2):
    p, g = scen2
    rng = substream(9, 0)
    n = 20_000
    cin = np.empty(n)
    cout = np.empty(n)
    lam_in = p.sat_density_per_km2 * g.cluster_area_km2
    lam_out = p.sat_density_per_km2 * g.outside_area_km2
    for k in range(n):
        cin[k] = rng.poisson(lam_in)
        cout[k] = rng.poisson(lam_out)
    assert abs(cin.mean() - lam_in) < 3 * math.sqrt(lam_in / n)
    cov = np.cov(cin, cout)[0, 1]
    assert abs(cov) < 3 * math.sqrt(lam_in * lam_out / n)


def test_constellation_full_sampler_counts(scen2):
    p, g = scen2
    rng = substream(10, 0)
    n = 3000
    counts = np.array([[len(a), len(b)] for a, b in (sample_constellation(p, g, rng) for _ in range(n))])
    lam_in = p.sat_density_per_km2 * g.cluster_area_km2
    assert abs(counts[:, 0].mean() - lam_in) < 3 * math.sqrt(lam_in / n)
    assert abs(counts.sum(axis=1).mean() - 300.0) < 3 * math.sqrt(300.0 / n)


@pytest.mark.parametrize("region", [INSIDE, OUTSIDE])
def test_sampled_distances_follow_cdf(scen1, region):
    p, g = scen1
    # positions from the geometric sampler must follow the closed-form CDF
    rng = substream(12, 0)
    psi_clu = p.cluster_polar_angle_rad
    psi_max = zenith_angle_of_range(p, g.r_max_km)
    lo, hi = (0.0, psi_clu) if region == INSIDE else (psi_clu, psi_max)
    pts = sample_cap_uniform(50_000, lo, hi, rng, p.sat_orbit_radius_km)
    d = np.linalg.norm(pts - np.array([0, 0, p.earth_radius_km]), axis=1)
    d = np.clip(d, *g.region_bounds(region))
    assert stats.kstest(d, lambda r: distance_cdf(p, g, region, r)).pvalue > 0.01


def test_region_distances_match_cdf(scen1):
    p, g = scen1
    d = sample_region_distances(substream(13, 0), 50_000, *g.region_bounds(OUTSIDE))
    assert stats.kstest(d, lambda r: distance_cdf(p, g, OUTSIDE, r)).pvalue > 0.01


def test_substreams_reproducible_and_distinct():
    a = substream(7, 3).random(5)
    b = substream(7, 3).random(5)
    c = substream(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
