"""Command-line front end: scenario files, sweeps and figure reproduction.

Scenario files are INI text with a ``[scenario]`` section and optional
``[sweep]`` section::

    [scenario]
    altitude_km = 500
    theta_min_deg = 25
    phi_clu_deg = 1.6
    mean_visible = 50          ; or sat_density_per_km2
    path_loss_exponent = 3
    nakagami_m = 2
    sir_thresholds_db = -10:10:1

    [sweep]
    phi_clu_deg = 1, 2, 3

CSV schemas (all floats printed with 17 significant digits):

  analyze         [sweep cols,] gamma_db,lower,upper,heuristic,theorem,order_used
  simulate        [sweep cols,] gamma_db,estimate,ci95,n_trials,mode
  samples dump    trial,d_power,i_power,sir
  validate-gamma  [sweep cols,] region,m,ks_distance,mean_z,var_z,n_samples
  sensitivity     [sweep cols,] name,value,boundary_limit

Exit codes: 0 success, 2 configuration error, 3 numerical or order-cap error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import itertools
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from . import analytic as an
from . import montecarlo as mc
from .channel import NakagamiFading, ShadowedRicianFading, ShadowedRicianParams
from .geometry import (
    EARTH_RADIUS_KM,
    INSIDE,
    OUTSIDE,
    ClusterGeometry,
    GeometryError,
    SystemParams,
    cluster_geometry,
)
from .pointprocess import sample_count, substream
from .specialfns import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# Reference counts for the two standard scenarios (mean visible satellites
# 50 and 300): mean cluster count and full-sphere count.
TABLE1_REFERENCE = {50: (2.0837, 10_700), 300: (12.5020, 64_100)}

# Shadowed-Rician sets for average shadowing paired with Nakagami m = 1, 2, 3
SHADOWED_RICIAN_SETS = {1: (1, 0.128, 0.827), 2: (2, 0.128, 0.832), 3: (3, 0.126, 0.835)}

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "table1")


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# Scenario files
# --------------------------------------------------------------------------

_FLOAT_KEYS = {
    "earth_radius_km",
    "sat_orbit_radius_km",
    "altitude_km",
    "theta_min_deg",
    "phi_clu_deg",
    "sat_density_per_km2",
    "mean_visible",
    "path_loss_exponent",
    "nakagami_m",
    "gain_inside",
    "gain_outside",
    "sr_m",
    "sr_b0",
    "sr_omega",
}
_INT_KEYS = {"rng_seed", "mc_trials"}
_OTHER_KEYS = {"sir_thresholds_db", "fading", "output_dir"}
SCENARIO_KEYS = _FLOAT_KEYS | _INT_KEYS | _OTHER_KEYS


@dataclass
class Scenario:
    values: dict = field(default_factory=dict)
    sweeps: list[tuple[str, list]] = field(default_factory=list)

    def variants(self) -> Iterable[tuple[dict, dict]]:
        """Yield ``(sweep_point, merged_values)`` for the cartesian product of the sweeps."""
        if not self.sweeps:
            yield {}, dict(self.values)
            return
        names = [n for n, _ in self.sweeps]
        for combo in itertools.product(*(v for _, v in self.sweeps)):
            point = dict(zip(names, combo))
            yield point, {**self.values, **point}


def _parse_thresholds(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ConfigError("threshold range must be start:stop:step with step > 0")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(n))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _convert(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key == "sir_thresholds_db":
            return _parse_thresholds(raw)
        if key == "fading":
            v = raw.strip().lower()
            if v not in ("nakagami", "shadowed_rician"):
                raise ConfigError("fading must be nakagami or shadowed_rician")
            return v
        return raw.strip()
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    extra = set(cp.sections()) - {"scenario", "sweep"}
    if extra:
        raise ConfigError(f"unknown section(s): {sorted(extra)}")
    sc = Scenario()
    if cp.has_section("scenario"):
        for key, raw in cp.items("scenario"):
            if key not in SCENARIO_KEYS:
                raise ConfigError(f"unknown key {key!r}; allowed: {sorted(SCENARIO_KEYS)}")
            sc.values[key] = _convert(key, raw)
    if cp.has_section("sweep"):
        for key, raw in cp.items("sweep"):
            if key not in _FLOAT_KEYS | _INT_KEYS:
                raise ConfigError(f"cannot sweep {key!r}")
            vals = [_convert(key, x) for x in raw.split(",") if x.strip()]
            if not vals:
                raise ConfigError(f"empty sweep for {key}")
            sc.sweeps.append((key, vals))
    return sc


def load_scenario(path: str | None) -> Scenario:
    if path is None:
        return Scenario()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_scenario(text)


def build_params(values: dict) -> SystemParams:
    """Turn scenario values (degrees, altitude, mean_visible allowed) into ``SystemParams``."""
    v = dict(values)
    kw = {}
    re_ = v.pop("earth_radius_km", EARTH_RADIUS_KM)
    kw["earth_radius_km"] = re_
    if "altitude_km" in v and "sat_orbit_radius_km" in v:
        raise ConfigError("give altitude_km or sat_orbit_radius_km, not both")
    if "altitude_km" in v:
        kw["sat_orbit_radius_km"] = re_ + v.pop("altitude_km")
    elif "sat_orbit_radius_km" in v:
        kw["sat_orbit_radius_km"] = v.pop("sat_orbit_radius_km")
    if "theta_min_deg" in v:
        kw["min_elevation_rad"] = math.radians(v.pop("theta_min_deg"))
    if "phi_clu_deg" in v:
        kw["cluster_polar_angle_rad"] = math.radians(v.pop("phi_clu_deg"))
    for key in ("path_loss_exponent", "nakagami_m", "gain_inside", "gain_outside", "rng_seed", "mc_trials"):
        if key in v:
            kw[key] = v.pop(key)
    if "sir_thresholds_db" in v:
        kw["sir_thresholds_db"] = v.pop("sir_thresholds_db")
    mean_visible = v.pop("mean_visible", None)
    density = v.pop("sat_density_per_km2", None)
    try:
        if mean_visible is not None and density is not None:
            raise ConfigError("give mean_visible or sat_density_per_km2, not both")
        if mean_visible is not None:
            return SystemParams.from_mean_visible(mean_visible, **kw)
        if density is not None:
            kw["sat_density_per_km2"] = density
        return SystemParams(**kw)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc


def build_fading(values: dict, p: SystemParams):
    kind = values.get("fading", "nakagami")
    if kind == "nakagami":
        return NakagamiFading(p.nakagami_m)
    try:
        return ShadowedRicianFading(ShadowedRicianParams(values["sr_m"], values["sr_b0"], values["sr_omega"]))
    except KeyError as exc:
        raise ConfigError("shadowed_rician fading needs sr_m, sr_b0 and sr_omega") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# CSV helpers
# --------------------------------------------------------------------------

f17 = mc.fmt17


def _cell(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f17(x)
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(_cell(x) for x in r) + "\n")
    return out.getvalue()


# --------------------------------------------------------------------------
# Subcommand cores (pure: return CSV text)
# --------------------------------------------------------------------------


def run_analyze(sc: Scenario, theorem: int, order_cap: int = an.DEFAULT_ORDER_CAP) -> str:
    names = [n for n, _ in sc.sweeps]
    rows = []
    for point, values in sc.variants():
        p = build_params(values)
        g = cluster_geometry(p)
        for res in an.analytic_curve(p, g, theorem, order_cap=order_cap):
            rows.append([point[n] for n in names] + [
                10.0 * math.log10(res.gamma_lin), res.lower, res.upper, res.heuristic, res.theorem, res.order_used,
            ])
    return csv_text(names + ["gamma_db", "lower", "upper", "heuristic", "theorem", "order_used"], rows)


def run_simulate(
    sc: Scenario,
    mode: str,
    trials: int | None = None,
    seed: int | None = None,
    threads: int | None = None,
    dump: Callable[[str, mc.SimulationResult], None] | None = None,
) -> str:
    names = [n for n, _ in sc.sweeps]
    rows = []
    for k, (point, values) in enumerate(sc.variants()):
        p = build_params(values)
        g = cluster_geometry(p)
        res = mc.simulate(p, g, mode, trials, seed, build_fading(values, p), threads)
        curve = mc.curve_from_counts(mc.CoverageCounts.from_result(res, p.sir_thresholds_db), mode)
        if dump is not None:
            dump(f"samples_{k}.csv" if names else "samples.csv", res)
        for pt in curve.points:
            rows.append([point[n] for n in names] + [pt.gamma_db, pt.estimate, pt.ci95_halfwidth, pt.n_trials, mode])
    return csv_text(names + ["gamma_db", "estimate", "ci95", "n_trials", "mode"], rows)


def validate_gamma_rows(
    p: SystemParams, g: ClusterGeometry, ms: Sequence[float], trials: int, seed: int, threads: int | None = None
) -> list[list]:
    """KS distance and moment z-scores of D and I against their matched Gamma laws."""
    rows = []
    for m in ms:
        res = mc.simulate(p, g, "cluster", trials, seed, NakagamiFading(m), threads)
        for region, x in ((OUTSIDE, res.i_power), (INSIDE, res.d_power)):
            ga = an.gamma_params(p, g, region, m)
            mean, var = an.campbell_moments(p, g, region, m)
            ks = stats.kstest(x, "gamma", args=(ga.shape, 0.0, ga.scale)).statistic
            mom = mc.empirical_moments(x)
            rows.append([
                "interference" if region == OUTSIDE else "cluster",
                float(m),
                float(ks),
                (mom.mean - mean) / mom.mean_se,
                (mom.variance - var) / mom.variance_se,
                len(x),
            ])
    return rows


def run_validate_gamma(sc: Scenario, trials=None, seed=None, threads=None, ms=(1.0, 2.0, 3.0)) -> str:
    names = [n for n, _ in sc.sweeps]
    rows = []
    for point, values in sc.variants():
        p = build_params(values)
        g = cluster_geometry(p)
        n = p.mc_trials if trials is None else trials
        s = p.rng_seed if seed is None else seed
        for r in validate_gamma_rows(p, g, ms, n, s, threads):
            rows.append([point[k] for k in names] + r)
    return csv_text(names + ["region", "m", "ks_distance", "mean_z", "var_z", "n_samples"], rows)


def run_sensitivity(sc: Scenario) -> str:
    names = [n for n, _ in sc.sweeps]
    rows = []
    for point, values in sc.variants():
        p = build_params(values)
        g = cluster_geometry(p)
        for w in an.SENSITIVITIES:
            s = an.sensitivity(p, g, w)
            rows.append([point[k] for k in names] + [s.name, s.value, s.boundary_limit])
    return csv_text(names + ["name", "value", "boundary_limit"], rows)


# --------------------------------------------------------------------------
# Figure reproduction
# --------------------------------------------------------------------------


@dataclass
class FigureOutput:
    csv: str
    script: str


def _gp_header(title: str, xlabel: str, ylabel: str, csv_name: str, logx: bool = False) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set grid",
        f"data = '{csv_name}'",
    ]
    if logx:
        lines.append("set logscale x")
    return "\n".join(lines) + "\n"


def _scenario_params(values: dict, mean_visible: float, **overrides) -> SystemParams:
    v = {k: x for k, x in values.items() if k not in ("mean_visible", "sat_density_per_km2")}
    v["mean_visible"] = mean_visible
    v.update(overrides)
    return build_params(v)


def reproduce(fig: str, sc: Scenario, trials: int | None = None, seed: int | None = None, threads=None) -> FigureOutput:
    if fig not in FIGURES:
        raise ConfigError(f"unknown figure id {fig!r}; choose from {FIGURES}")
    base = dict(sc.values)
    p0 = build_params(base)
    n = p0.mc_trials if trials is None else trials
    s = p0.rng_seed if seed is None else seed
    name = f"{fig}.csv"
    gammas = p0.sir_thresholds_db

    if fig == "table1":
        rows = []
        for mv, (clu_ref, sphere_ref) in TABLE1_REFERENCE.items():
            p = _scenario_params(base, mv)
            g = cluster_geometry(p)
            lam_clu = p.sat_density_per_km2 * g.cluster_area_km2
            sphere = p.sat_density_per_km2 * 4.0 * math.pi * p.sat_orbit_radius_km**2
            emp = float(np.mean(sample_count(lam_clu, substream(s, mv), size=n)))
            rows.append([mv, lam_clu, clu_ref, emp, sphere, sphere_ref])
        csv = csv_text(
            ["mean_visible", "cluster_mean_analytic", "cluster_mean_reference", "cluster_mean_empirical",
             "full_sphere_analytic", "full_sphere_reference"], rows)
        script = _gp_header("Average number of satellites", "mean visible", "count", name) + (
            "set style data histograms\nset style fill solid 0.5\nset logscale y\n"
            "plot data using 2:xtic(1), '' using 4, '' using 5\n"
        )
        return FigureOutput(csv, script)

    if fig == "fig2":
        rows = []
        for mv in (50, 100, 300):
            p = _scenario_params(base, mv, nakagami_m=2.0)
            g = cluster_geometry(p)
            cur = {mode: mc.estimate_coverage(p, g, mode, n, gammas, s, threads=threads) for mode in mc.MODES}
            for a, b in zip(cur["cluster"].points, cur["nearest"].points):
                rows.append([mv, a.gamma_db, a.estimate, a.ci95_halfwidth, b.estimate, b.ci95_halfwidth])
        csv = csv_text(["mean_visible", "gamma_db", "cluster", "cluster_ci95", "nearest", "nearest_ci95"], rows)
        script = _gp_header("Cluster vs nearest-satellite service (m=2)", "SIR threshold (dB)", "coverage", name) + (
            "plot for [mv in '50 100 300'] data using ($1==mv+0 ? $2 : 1/0):3 with linespoints title 'cluster '.mv, \\\n"
            "     for [mv in '50 100 300'] data using ($1==mv+0 ? $2 : 1/0):5 with lines dt 2 title 'nearest '.mv\n"
        )
        return FigureOutput(csv, script)

    if fig == "fig3":
        p = _scenario_params(base, base.get("mean_visible", 50))
        g = cluster_geometry(p)
        rows = []
        for m, sr in SHADOWED_RICIAN_SETS.items():
            a = mc.estimate_coverage(p, g, "cluster", n, gammas, s, NakagamiFading(m), threads)
            b = mc.estimate_coverage(p, g, "cluster", n, gammas, s, ShadowedRicianFading(ShadowedRicianParams(*sr)), threads)
            for x, y in zip(a.points, b.points):
                rows.append([m, x.gamma_db, x.estimate, y.estimate])
        csv = csv_text(["m", "gamma_db", "nakagami", "shadowed_rician"], rows)
        script = _gp_header("Nakagami-m vs shadowed-Rician", "SIR threshold (dB)", "coverage", name) + (
            "plot for [m=1:3] data using ($1==m ? $2 : 1/0):3 with lines title 'Nakagami m='.m, \\\n"
            "     for [m=1:3] data using ($1==m ? $2 : 1/0):4 with points title 'shadowed-Rician m='.m\n"
        )
        return FigureOutput(csv, script)

    if fig in ("fig4", "fig5"):
        region, mv = (OUTSIDE, 50) if fig == "fig4" else (INSIDE, 300)
        p = _scenario_params(base, mv)
        g = cluster_geometry(p)
        rows = []
        for m in (1.0, 2.0, 3.0):
            res = mc.simulate(p, g, "cluster", n, s, NakagamiFading(m), threads)
            x = res.i_power if region == OUTSIDE else res.d_power
            ga = an.gamma_params(p, g, region, m)
            ecdf = mc.empirical_cdf(x)
            grid = np.linspace(0.0, float(np.quantile(x, 0.999)), 200)
            for t in grid:
                rows.append([m, t, ecdf(t), float(stats.gamma.cdf(t, ga.shape, scale=ga.scale))])
        label = "interference I" if region == OUTSIDE else "cluster power D"
        csv = csv_text(["m", "x", "empirical_cdf", "gamma_cdf"], rows)
        script = _gp_header(f"CDF of {label} vs matched Gamma", "power", "CDF", name) + (
            "plot for [m=1:3] data using ($1==m ? $2 : 1/0):3 with lines title 'empirical m='.m, \\\n"
            "     for [m=1:3] data using ($1==m ? $2 : 1/0):4 with lines dt 2 title 'Gamma m='.m\n"
        )
        return FigureOutput(csv, script)

    if fig == "fig6":
        rows = []
        for mv, theorem in ((50, 1), (300, 2)):
            p = _scenario_params(base, mv)
            g = cluster_geometry(p)
            for m in (1.0, 2.0, 3.0):
                cur = mc.estimate_coverage(p, g, "cluster", n, gammas, s, NakagamiFading(m), threads)
                for pt in cur.points:
                    b = an.coverage_bounds(p, g, 10 ** (pt.gamma_db / 10), theorem, m)
                    rows.append([mv, theorem, m, pt.gamma_db, pt.estimate, pt.ci95_halfwidth, b.lower, b.upper, b.heuristic])
        csv = csv_text(["mean_visible", "theorem", "m", "gamma_db", "mc", "mc_ci95", "lower", "upper", "heuristic"], rows)
        script = _gp_header("Coverage: simulation vs bounds", "SIR threshold (dB)", "coverage", name) + (
            "set multiplot layout 1,2\n"
            "do for [t=1:2] {\n"
            "  set title sprintf('theorem %d', t)\n"
            "  plot for [m=1:3] data using (($2==t && $3==m) ? $4 : 1/0):5 with points title 'MC m='.m, \\\n"
            "       for [m=1:3] data using (($2==t && $3==m) ? $4 : 1/0):7 with lines dt 2 title 'lower m='.m, \\\n"
            "       for [m=1:3] data using (($2==t && $3==m) ? $4 : 1/0):8 with lines dt 3 title 'upper m='.m, \\\n"
            "       for [m=1:3] data using (($2==t && $3==m) ? $4 : 1/0):9 with lines title 'heuristic m='.m\n"
            "}\nunset multiplot\n"
        )
        return FigureOutput(csv, script)

    if fig == "fig7":
        p = _scenario_params(base, 50)
        g = cluster_geometry(p)
        rows = []
        for m in (2.0, 3.0):
            cur = mc.estimate_coverage(p, g, "cluster", n, gammas, s, NakagamiFading(m), threads)
            for pt in cur.points:
                gl = 10 ** (pt.gamma_db / 10)
                b1 = an.coverage_bounds_theorem1(p, g, gl, m)
                b2 = an.coverage_bounds_theorem2(p, g, gl, m)
                rows.append([m, pt.gamma_db, pt.estimate, b1.lower, b1.upper, b1.shape, b2.lower, b2.upper, b2.shape])
        csv = csv_text(["m", "gamma_db", "mc", "t1_lower", "t1_upper", "k_interference", "t2_lower", "t2_upper", "k_cluster"], rows)
        script = _gp_header("Bound tightness: theorem 1 vs theorem 2", "SIR threshold (dB)", "coverage", name) + (
            "plot for [m=2:3] data using ($1==m ? $2 : 1/0):3 with points title 'MC m='.m, \\\n"
            "     for [m=2:3] data using ($1==m ? $2 : 1/0):4:5 with filledcurves fs transparent solid 0.3 title 'thm 1 m='.m, \\\n"
            "     for [m=2:3] data using ($1==m ? $2 : 1/0):7:8 with filledcurves fs transparent solid 0.2 title 'thm 2 m='.m\n"
        )
        return FigureOutput(csv, script)

    # fig8 / fig9: sweeps over the cluster polar angle
    phis = np.round(np.arange(0.25, 5.0001, 0.25), 10)
    sweep_gammas = (-10.0, -5.0, 0.0, 5.0)
    ms = (2.0,) if fig == "fig8" else (1.0, 1e20)
    rows = []
    for phi in phis:
        p = _scenario_params(base, 50, phi_clu_deg=float(phi))
        g = cluster_geometry(p)
        for m in ms:
            for gd in sweep_gammas:
                b = an.coverage_bounds_theorem1(p, g, 10 ** (gd / 10), m)
                rows.append([m, gd, float(phi), b.lower, b.upper, b.heuristic])
    csv = csv_text(["m", "gamma_db", "phi_clu_deg", "lower", "upper", "heuristic"], rows)
    title = "Coverage vs cluster angle (m=2)" if fig == "fig8" else "Coverage vs cluster angle, m=1 and m=1e20"
    script = _gp_header(title, "cluster polar angle (deg)", "coverage", name) + (
        "plot for [g in '-10 -5 0 5'] for [m in '" + " ".join(f"{x:g}" for x in ms) + "'] "
        "data using (($2==g+0 && $1==m+0) ? $3 : 1/0):6 with linespoints title sprintf('%s dB, m=%s', g, m)\n"
    )
    return FigureOutput(csv, script)


# --------------------------------------------------------------------------
# argparse front end
# --------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--config", help="scenario INI file (defaults: 500 km, 25 deg, 1.6 deg, 50 visible)")
    sp.add_argument("--out", help="output directory (default: print CSV to stdout)")
    sp.add_argument("--threads", type=int, default=None, help="worker threads (default: SATCOV_THREADS, 0 = auto)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="satcov",
        description="Coverage of clustered LEO satellite downlinks: bounds and Monte Carlo.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n\n", 1)[1],
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="analytic bounds and heuristic per threshold")
    _add_common(sp)
    sp.add_argument("--theorem", type=int, choices=(1, 2), default=1)
    sp.add_argument("--order-cap", type=int, default=an.DEFAULT_ORDER_CAP)

    sp = sub.add_parser("simulate", help="Monte Carlo coverage with Wilson intervals")
    _add_common(sp)
    sp.add_argument("--mode", choices=mc.MODES, default="cluster")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dump-samples", action="store_true", help="also write per-trial D, I, SIR (needs --out)")

    sp = sub.add_parser("validate-gamma", help="KS distance and moment z-scores of the Gamma fits")
    _add_common(sp)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("reproduce", help="data CSV plus gnuplot script for a figure or table")
    _add_common(sp)
    sp.add_argument("figure", choices=FIGURES)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("sensitivity", help="derivatives of the Gamma parameters")
    _add_common(sp)
    return ap


def _emit(text: str, out_dir: str | None, filename: str, stdout) -> None:
    if out_dir is None:
        stdout.write(text)
        return
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / filename).write_text(text)


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config)
        out = args.out if args.out is not None else sc.values.get("output_dir")
        sc.values.pop("output_dir", None)
        if args.threads is not None:
            mc.resolve_threads(args.threads)
        if args.command == "analyze":
            _emit(run_analyze(sc, args.theorem, args.order_cap), out, "analyze.csv", stdout)
        elif args.command == "simulate":
            dump = None
            if args.dump_samples:
                if out is None:
                    raise ConfigError("--dump-samples needs --out")

                def dump(fname, res):
                    Path(out).mkdir(parents=True, exist_ok=True)
                    with open(Path(out) / fname, "w") as fh:
                        mc.write_samples_csv(res, fh)

            text = run_simulate(sc, args.mode, args.trials, args.seed, args.threads, dump)
            _emit(text, out, "simulate.csv", stdout)
        elif args.command == "validate-gamma":
            _emit(run_validate_gamma(sc, args.trials, args.seed, args.threads), out, "validate_gamma.csv", stdout)
        elif args.command == "sensitivity":
            _emit(run_sensitivity(sc), out, "sensitivity.csv", stdout)
        else:
            res = reproduce(args.figure, sc, args.trials, args.seed, args.threads)
            if out is None:
                stdout.write(res.csv)
            else:
                _emit(res.csv, out, f"{args.figure}.csv", stdout)
                _emit(res.script, out, f"{args.figure}.gp", stdout)
    except (ConfigError, GeometryError) as exc:
        print(f"satcov: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except an.OrderCapError as exc:
        print(f"satcov: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (an.AnalyticError, NumericalError, ArithmeticError) as exc:
        print(f"satcov: numerical error: {exc}", file=stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"satcov: config error: {exc}", file=stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
