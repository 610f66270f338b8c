"""Monte Carlo SIR snapshots, coverage curves and empirical oracles.

Trials are grouped in fixed blocks of :data:`BLOCK_SIZE`; block ``b``
draws from ``substream(seed, b)`` and always covers trials
``b*BLOCK_SIZE .. (b+1)*BLOCK_SIZE - 1``.  Blocks are reassembled in index
order, so a run is bit-identical for any number of worker threads.

Cluster and nearest modes consume exactly the same draws, which makes the
two coverage curves of one seed directly comparable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .channel import NakagamiFading, ShadowedRicianFading
from .geometry import INSIDE, OUTSIDE, ClusterGeometry, SystemParams, thresholds_linear
from .pointprocess import sample_constellation, sample_region_distances, substream

BLOCK_SIZE = 4096
MODES = ("cluster", "nearest")
Z95 = 1.959963984540054

Fading = NakagamiFading | ShadowedRicianFading


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``SATCOV_THREADS``, where 0 means one per CPU."""
    if threads is None:
        raw = os.environ.get("SATCOV_THREADS", "0").strip() or "0"
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ValueError(f"SATCOV_THREADS must be an integer, got {raw!r}") from exc
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _default_fading(p: SystemParams, fading: Fading | None) -> Fading:
    return NakagamiFading(p.nakagami_m) if fading is None else fading


def sir_from_powers(d, i):
    """SIR with the limiting conventions: empty serving set gives 0, no interference gives +inf."""
    d = np.asarray(d, dtype=float)
    i = np.asarray(i, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        sir = np.where(d <= 0.0, 0.0, np.where(i <= 0.0, np.inf, d / np.where(i > 0, i, 1.0)))
    return float(sir) if sir.ndim == 0 else sir


# --------------------------------------------------------------------------
# Single snapshots
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    d_power: float
    i_power: float
    sir: float
    n_cluster: int = 0
    n_outside: int = 0


def snapshot_from_distances(
    p: SystemParams,
    cluster_km: Sequence[float],
    outside_km: Sequence[float],
    mode: str = "cluster",
    fades_cluster: Sequence[float] | None = None,
    fades_outside: Sequence[float] | None = None,
) -> Snapshot:
    """Evaluate D, I and SIR for satellites at given distances (fades default to 1)."""
    _check_mode(mode)
    rc = np.asarray(cluster_km, dtype=float)
    ro = np.asarray(outside_km, dtype=float)
    hc = np.ones_like(rc) if fades_cluster is None else np.asarray(fades_cluster, dtype=float)
    ho = np.ones_like(ro) if fades_outside is None else np.asarray(fades_outside, dtype=float)
    if hc.shape != rc.shape or ho.shape != ro.shape:
        raise ValueError("fades must match the satellite lists")
    a = p.path_loss_exponent
    pc, po = hc * rc ** (-a), ho * ro ** (-a)
    if mode == "cluster":
        d = p.gain_inside * math.fsum(pc)
        i = p.gain_outside * math.fsum(po)
    else:
        r_all = np.concatenate([rc, ro])
        pw = np.concatenate([pc, po])
        if len(r_all) == 0:
            d, i = 0.0, 0.0
        else:
            k = int(np.argmin(r_all))
            d = p.gain_inside * float(pw[k])
            i = p.gain_outside * math.fsum(np.delete(pw, k))
    return Snapshot(d, i, sir_from_powers(d, i), len(rc), len(ro))


def simulate_snapshot(
    p: SystemParams,
    g: ClusterGeometry,
    rng: np.random.Generator,
    mode: str = "cluster",
    fading: Fading | None = None,
) -> Snapshot:
    """One constellation draw evaluated in ``mode``."""
    fading = _default_fading(p, fading)
    inside, outside = sample_constellation(p, g, rng)
    rc = [s.distance_to_user_km for s in inside]
    ro = [s.distance_to_user_km for s in outside]
    hc = fading.sample(rng, len(rc))
    ho = fading.sample(rng, len(ro))
    return snapshot_from_distances(p, rc, ro, mode, hc, ho)


# --------------------------------------------------------------------------
# Vectorised block simulation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    d_power: np.ndarray
    i_power: np.ndarray
    mode: str
    seed: int
    first_trial: int = 0

    @property
    def sir(self) -> np.ndarray:
        return sir_from_powers(self.d_power, self.i_power)

    @property
    def n_trials(self) -> int:
        return len(self.d_power)


def _simulate_block(p, g, fading, mode, seed, block, n):
    rng = substream(seed, block)
    lam = p.sat_density_per_km2
    n_in = rng.poisson(lam * g.cluster_area_km2, n)
    n_out = rng.poisson(lam * g.outside_area_km2, n)
    N_in, N_out = int(n_in.sum()), int(n_out.sum())
    r_in = sample_region_distances(rng, N_in, *g.region_bounds(INSIDE))
    r_out = sample_region_distances(rng, N_out, *g.region_bounds(OUTSIDE))
    h_in = fading.sample(rng, N_in)
    h_out = fading.sample(rng, N_out)
    a = p.path_loss_exponent
    t_in = np.repeat(np.arange(n), n_in)
    t_out = np.repeat(np.arange(n), n_out)
    pw_in = h_in * r_in ** (-a)
    pw_out = h_out * r_out ** (-a)
    if mode == "cluster":
        d = p.gain_inside * np.bincount(t_in, weights=pw_in, minlength=n)
        i = p.gain_outside * np.bincount(t_out, weights=pw_out, minlength=n)
        return d, i
    trial = np.concatenate([t_in, t_out])
    r = np.concatenate([r_in, r_out])
    pw = np.concatenate([pw_in, pw_out])
    order = np.lexsort((r, trial))
    trial, pw = trial[order], pw[order]
    first = np.ones(len(trial), dtype=bool)
    first[1:] = trial[1:] != trial[:-1]
    d = p.gain_inside * np.bincount(trial[first], weights=pw[first], minlength=n)
    i = p.gain_outside * np.bincount(trial[~first], weights=pw[~first], minlength=n)
    return d, i


def simulate(
    p: SystemParams,
    g: ClusterGeometry,
    mode: str = "cluster",
    trials: int | None = None,
    seed: int | None = None,
    fading: Fading | None = None,
    threads: int | None = None,
    first_block: int = 0,
) -> SimulationResult:
    """Draw ``trials`` snapshots starting at block ``first_block``."""
    _check_mode(mode)
    trials = p.mc_trials if trials is None else int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = p.rng_seed if seed is None else int(seed)
    fading = _default_fading(p, fading)
    n_blocks = -(-trials // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, trials - b * BLOCK_SIZE) for b in range(n_blocks)]
    blocks = range(first_block, first_block + n_blocks)
    workers = min(resolve_threads(threads), n_blocks)
    if workers == 1:
        parts = [_simulate_block(p, g, fading, mode, seed, b, n) for b, n in zip(blocks, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda bn: _simulate_block(p, g, fading, mode, seed, *bn), zip(blocks, sizes)))
    d = np.concatenate([x[0] for x in parts])
    i = np.concatenate([x[1] for x in parts])
    return SimulationResult(d, i, mode, seed, first_block * BLOCK_SIZE)


def sample_single_satellite_power(
    p: SystemParams,
    g: ClusterGeometry,
    region: str,
    n: int,
    rng: np.random.Generator,
    fading: Fading | None = None,
) -> np.ndarray:
    """Draws of ``G H r^-alpha`` for one satellite uniform in ``region``."""
    fading = _default_fading(p, fading)
    r = sample_region_distances(rng, n, *g.region_bounds(region))
    G = p.gain_inside if region == INSIDE else p.gain_outside
    return G * fading.sample(rng, n) * r ** (-p.path_loss_exponent)


# --------------------------------------------------------------------------
# Coverage estimation
# --------------------------------------------------------------------------


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n < 1:
        raise ValueError("need n >= 1")
    ph = k / n
    den = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1.0 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class CoverageCounts:
    """Mergeable sufficient statistics of a coverage run (all integers)."""

    gammas_db: tuple[float, ...]
    covered: tuple[int, ...]
    n_trials: int
    n_empty_cluster: int = 0
    n_no_interference: int = 0

    @classmethod
    def from_result(cls, res: SimulationResult, gammas_db: Sequence[float]) -> "CoverageCounts":
        sir = res.sir
        gl = thresholds_linear(gammas_db)
        covered = tuple(int(np.count_nonzero(sir >= x)) for x in gl)
        return cls(
            tuple(float(x) for x in gammas_db),
            covered,
            res.n_trials,
            int(np.count_nonzero(res.d_power <= 0)),
            int(np.count_nonzero(res.i_power <= 0)),
        )

    def merge(self, other: "CoverageCounts") -> "CoverageCounts":
        if self.gammas_db != other.gammas_db:
            raise ValueError("cannot merge counts on different threshold grids")
        return CoverageCounts(
            self.gammas_db,
            tuple(a + b for a, b in zip(self.covered, other.covered)),
            self.n_trials + other.n_trials,
            self.n_empty_cluster + other.n_empty_cluster,
            self.n_no_interference + other.n_no_interference,
        )


@dataclass(frozen=True)
class CoveragePoint:
    gamma_db: float
    estimate: float
    ci95_halfwidth: float
    n_trials: int
    ci_low: float
    ci_high: float

    @property
    def std_error(self) -> float:
        return math.sqrt(max(self.estimate * (1.0 - self.estimate), 0.0) / self.n_trials)

    @property
    def sigma(self) -> float:
        """Binomial standard error at the Wilson centre; stays positive when no trial or every trial is covered."""
        c = 0.5 * (self.ci_low + self.ci_high)
        return math.sqrt(c * (1.0 - c) / self.n_trials)


@dataclass(frozen=True)
class CoverageCurve:
    mode: str
    points: tuple[CoveragePoint, ...]
    counts: CoverageCounts = field(repr=False, default=None)

    @property
    def gammas_db(self) -> np.ndarray:
        return np.array([pt.gamma_db for pt in self.points])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([pt.estimate for pt in self.points])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([pt.std_error for pt in self.points])


def curve_from_counts(c: CoverageCounts, mode: str) -> CoverageCurve:
    pts = []
    for gd, k in zip(c.gammas_db, c.covered):
        lo, hi = wilson_interval(k, c.n_trials)
        pts.append(CoveragePoint(gd, k / c.n_trials, 0.5 * (hi - lo), c.n_trials, lo, hi))
    return CoverageCurve(mode, tuple(pts), c)


def estimate_coverage(
    p: SystemParams,
    g: ClusterGeometry,
    mode: str = "cluster",
    trials: int | None = None,
    gammas_db: Sequence[float] | None = None,
    seed: int | None = None,
    fading: Fading | None = None,
    threads: int | None = None,
) -> CoverageCurve:
    """Fraction of snapshots with ``SIR >= gamma`` on each threshold, with Wilson 95% intervals."""
    gammas_db = p.sir_thresholds_db if gammas_db is None else gammas_db
    res = simulate(p, g, mode, trials, seed, fading, threads)
    return curve_from_counts(CoverageCounts.from_result(res, gammas_db), mode)


# --------------------------------------------------------------------------
# Empirical distribution helpers
# --------------------------------------------------------------------------


class InsufficientSamplesError(ValueError):
    pass


class EmpiricalCDF:
    """Right-continuous step function ``F(x) = #{samples <= x} / n``."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if len(x) < 2:
            raise InsufficientSamplesError("need at least 2 samples")
        self.x = x

    def __call__(self, t):
        out = np.searchsorted(self.x, t, side="right") / len(self.x)
        return float(out) if np.ndim(out) == 0 else out

    def __len__(self):
        return len(self.x)


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    mean_se: float
    variance_se: float
    n: int


def empirical_moments(samples) -> Moments:
    """Unbiased mean and variance with large-sample standard errors."""
    x = np.asarray(samples, dtype=float).ravel()
    n = len(x)
    if n < 2:
        raise InsufficientSamplesError("need at least 2 samples")
    mu = float(np.mean(x))
    dev = x - mu
    var = float(np.sum(dev * dev) / (n - 1))
    m4 = float(np.mean(dev**4))
    var_se = math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)
    return Moments(mu, var, math.sqrt(var / n), var_se, n)


def mc_laplace_derivative(samples, n: int, s: float) -> tuple[float, float]:
    """Sample mean of ``X^n exp(-s X)`` and its standard error.

    Estimates ``(-1)^n d^n L_X / ds^n``.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    if not s > 0:
        raise ValueError("s must be positive")
    x = np.asarray(samples, dtype=float).ravel()
    # X^0 is 1 even at X = 0
    v = np.exp(-s * x) if n == 0 else x**n * np.exp(-s * x)
    se = float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return float(np.mean(v)), se


def mc_ergodic_rate(sir, cost_c: float = 0.0) -> tuple[float, float]:
    """``(1 - C) E[log2(1 + SIR)]`` and its standard error."""
    v = np.log2(1.0 + np.asarray(sir, dtype=float))
    scale = 1.0 - cost_c
    return scale * float(np.mean(v)), scale * float(np.std(v, ddof=1) / math.sqrt(len(v)))


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------


def fmt17(x: float) -> str:
    """17 significant digits in scientific notation."""
    return format(float(x), ".16e")


def write_samples_csv(res: SimulationResult, fh: IO[str]) -> None:
    fh.write("trial,d_power,i_power,sir\n")
    sir = res.sir
    base = res.first_trial
    lines = [
        f"{base + k},{fmt17(d)},{fmt17(i)},{fmt17(s)}\n"
        for k, (d, i, s) in enumerate(zip(res.d_power.tolist(), res.i_power.tolist(), sir.tolist()))
    ]
    fh.writelines(lines)


def write_coverage_csv(curve: CoverageCurve, fh: IO[str]) -> None:
    fh.write("gamma_db,estimate,ci95,n_trials,mode\n")
    for pt in curve.points:
        fh.write(f"{fmt17(pt.gamma_db)},{fmt17(pt.estimate)},{fmt17(pt.ci95_halfwidth)},{pt.n_trials},{curve.mode}\n")
