"""Gamma moment matching, Laplace transforms and coverage-probability bounds.

Notation used throughout: ``X1 = G H r^-alpha`` is the power one satellite
of a region contributes and ``rho(s) = E[exp(-s X1)]`` its Laplace
transform.  The aggregate over the Poisson number of satellites in the
region has ``L(s) = exp(-lambda |area| (1 - rho(s)))``.

Derivatives are carried in *scaled* form ``(-s)^n rho^(n)(s) =
E[(s X1)^n exp(-s X1)]``, which is non-negative and O(1); this keeps the
Bell-polynomial assembly free of cancellation and of overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import INSIDE, OUTSIDE, ClusterGeometry, SystemParams
from .specialfns import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bell_table,
    gauss_2f1,
    integrate_adaptive,
    log_pochhammer_ratio,
)

DEFAULT_ORDER_CAP = 40


class AnalyticError(ArithmeticError):
    pass


class OrderCapError(AnalyticError):
    """Requested derivative order is above the configured cap."""


# --------------------------------------------------------------------------
# Moment matching
# --------------------------------------------------------------------------


def _region_setup(p: SystemParams, g: ClusterGeometry, region: str):
    lo, hi = g.region_bounds(region)
    gain = p.gain_inside if region == INSIDE else p.gain_outside
    return lo, hi, gain


def campbell_moments(p: SystemParams, g: ClusterGeometry, region: str, m: float | None = None):
    """Mean and variance of the accumulated power of ``region``."""
    m = p.nakagami_m if m is None else m
    a = p.path_loss_exponent
    if not a > 2:
        raise AnalyticError("path-loss exponent must exceed 2")
    lo, hi, G = _region_setup(p, g, region)
    dens = (p.sat_orbit_radius_km / p.earth_radius_km) * math.pi * p.sat_density_per_km2
    mean = 2.0 * G / (a - 2.0) * dens * (lo ** (2.0 - a) - hi ** (2.0 - a))
    var = 2.0 * G * G / (2.0 * a - 2.0) * dens * (1.0 + 1.0 / m) * (lo ** (2.0 - 2 * a) - hi ** (2.0 - 2 * a))
    return mean, var


@dataclass(frozen=True)
class GammaApprox:
    shape: float
    scale: float
    region: str

    @property
    def shape_floor(self) -> int:
        return math.floor(self.shape)

    @property
    def shape_ceil(self) -> int:
        return math.ceil(self.shape)

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2


def gamma_params(p: SystemParams, g: ClusterGeometry, region: str, m: float | None = None) -> GammaApprox:
    """Shape and scale of the Gamma law matching the first two moments of a region's power."""
    lo, hi = g.region_bounds(region)
    if not hi > lo:
        raise AnalyticError(f"degenerate {region} region: R_lo == R_hi")
    mean, var = campbell_moments(p, g, region, m)
    if mean <= 0 or var <= 0:
        raise AnalyticError("zero satellite density gives no Gamma approximation")
    return GammaApprox(shape=mean * mean / var, scale=var / mean, region=region)


# --------------------------------------------------------------------------
# Laplace transforms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LaplaceContext:
    """Everything needed to evaluate a region's Laplace transform.

    ``norm`` is ``2 / ((r_hi^2 - r_lo^2) alpha)``; inside the cluster this is
    ``1 / (R_E R_S (1 - cos phi_clu) alpha)``.
    """

    region: str
    r_lo: float
    r_hi: float
    gain: float
    mean_count: float
    m: float
    alpha: float
    norm: float
    quad: QuadratureSpec = field(default=DEFAULT_QUADRATURE, compare=False)


def laplace_context(p: SystemParams, g: ClusterGeometry, region: str, m: float | None = None) -> LaplaceContext:
    lo, hi, G = _region_setup(p, g, region)
    a = p.path_loss_exponent
    return LaplaceContext(
        region=region,
        r_lo=lo,
        r_hi=hi,
        gain=G,
        mean_count=p.sat_density_per_km2 * g.region_area(region),
        m=p.nakagami_m if m is None else m,
        alpha=a,
        norm=2.0 / ((hi * hi - lo * lo) * a),
    )


def _w_range(ctx: LaplaceContext, s: float) -> tuple[float, float]:
    # w = s G t with t = r^-alpha running over [r_hi^-alpha, r_lo^-alpha]
    sg = s * ctx.gain
    return sg * ctx.r_hi ** (-ctx.alpha), sg * ctx.r_lo ** (-ctx.alpha)


def _w_integral(ctx: LaplaceContext, s: float, integrand_log) -> float:
    w_lo, w_hi = _w_range(ctx, s)
    v_lo, v_hi = math.log(w_lo), math.log(w_hi)
    val, _ = integrate_adaptive(lambda v: math.exp(integrand_log(v)), v_lo, v_hi, ctx.quad)
    return ctx.norm * (s * ctx.gain) ** (2.0 / ctx.alpha) * val


def scaled_single_sat_derivative(ctx: LaplaceContext, n: int, s: float) -> float:
    """``(-s)^n rho^(n)(s) = E[(s X1)^n exp(-s X1)]`` by quadrature.

    Differentiating ``(1 + s G t / m)^-m`` n times under the integral gives
    ``(-G t / m)^n (m)_n (1 + s G t / m)^(-m-n)``.
    """
    if n < 0:
        raise ValueError("derivative order must be non-negative")
    if s < 0:
        raise ValueError("Laplace argument must be non-negative")
    if s == 0:
        return 1.0 if n == 0 else 0.0
    m, a = ctx.m, ctx.alpha
    lp = log_pochhammer_ratio(m, n)
    e = n - 2.0 / a

    def log_f(v):
        return lp + e * v - (m + n) * math.log1p(math.exp(v) / m)

    return _w_integral(ctx, s, log_f)


def single_sat_laplace(ctx: LaplaceContext, s: float) -> float:
    """Per-satellite Laplace transform ``rho(s)``."""
    return scaled_single_sat_derivative(ctx, 0, s)


def single_sat_laplace_complement(ctx: LaplaceContext, s: float) -> float:
    """``1 - rho(s)`` without the cancellation of forming it from ``rho``."""
    if s < 0:
        raise ValueError("Laplace argument must be non-negative")
    if s == 0:
        return 0.0
    m, a = ctx.m, ctx.alpha

    def log_f(v):
        return -(2.0 / a) * v + math.log(-math.expm1(-m * math.log1p(math.exp(v) / m)))

    return _w_integral(ctx, s, log_f)


def single_sat_laplace_m1(ctx: LaplaceContext, s: float) -> float:
    """Closed-form ``rho(s)`` for Rayleigh fading via the Gauss hypergeometric function."""
    return _m1_closed_form(ctx, 0, s)


def _m1_closed_form(ctx: LaplaceContext, n: int, s: float) -> float:
    # n-th derivative of rho for m = 1 (unscaled); ctx.m is ignored.
    # Each edge term behaves like K + O(x^-(n+1)) for large x = R^alpha/(sG),
    # with K independent of R.  For x > 1 the connection formula of 2F1 at
    # infinity gives the O(x^-(n+1)) part directly, so K cancels exactly
    # instead of numerically.
    if s <= 0:
        raise ValueError("closed form needs s > 0")
    a, G = ctx.alpha, ctx.gain
    sg = s * G
    b, c = 1.0 + 2.0 / a, 2.0 + 2.0 / a
    A = n + 1.0
    K = None
    if n >= 1:
        K = sg ** (b - A) * math.exp(math.lgamma(b) + math.lgamma(A - b) - math.lgamma(A))

    def edge(R):
        x = R**a / sg
        if K is not None and x > 1.0:
            return True, R ** (2.0 - a * n) / (b - A) * gauss_2f1(A, A - b, A - b + 1.0, -1.0 / x, ctx.quad)
        return False, R ** (2.0 + a) / (sg**A * b) * gauss_2f1(A, b, c, -x, ctx.quad)

    (hi_rem, hi_val), (lo_rem, lo_val) = edge(ctx.r_hi), edge(ctx.r_lo)
    if hi_rem != lo_rem:
        # mixed forms: bring the full-form edge onto the remainder scale
        if hi_rem:
            lo_val -= K
        else:
            hi_val -= K
    return ctx.norm * math.factorial(n) * (-G) ** n * (hi_val - lo_val)


def log_laplace_derivative_m1(ctx: LaplaceContext, n: int, s: float) -> float:
    """``d^n log L / ds^n`` for Rayleigh fading from the hypergeometric closed form."""
    if n < 1:
        raise ValueError("order must be >= 1")
    return ctx.mean_count * _m1_closed_form(ctx, n, s)


def laplace(ctx: LaplaceContext, s: float) -> float:
    """Laplace transform of the region's accumulated power."""
    return math.exp(-ctx.mean_count * single_sat_laplace_complement(ctx, s))


def log_laplace_derivative(ctx: LaplaceContext, n: int, s: float) -> float:
    """``d^n log L / ds^n = lambda |area| rho^(n)(s)`` for ``n >= 1``."""
    if n < 1:
        raise ValueError("order must be >= 1")
    if not s > 0:
        raise ValueError("log-Laplace derivatives need s > 0")
    return ctx.mean_count * scaled_single_sat_derivative(ctx, n, s) / (-s) ** n


def _check_order(n: int, order_cap: int):
    if n > order_cap:
        raise OrderCapError(
            f"derivative order {n} exceeds the cap {order_cap}; "
            "the interference shape is too large for theorem 1, use theorem 2"
        )


def laplace_derivative(ctx: LaplaceContext, n: int, s: float, order_cap: int = DEFAULT_ORDER_CAP) -> float:
    """``d^n L / ds^n`` assembled with Faa di Bruno's formula."""
    if n < 0:
        raise ValueError("order must be non-negative")
    _check_order(n, order_cap)
    L = laplace(ctx, s)
    if n == 0:
        return L
    kappa = [log_laplace_derivative(ctx, j, s) for j in range(1, n + 1)]
    B = bell_table(n, kappa)
    return L * math.fsum(B[n, q] for q in range(1, n + 1))


def erlang_mixture_terms(ctx: LaplaceContext, s: float, count: int, order_cap: int = DEFAULT_ORDER_CAP) -> np.ndarray:
    """Terms ``t_n = s^n / n! (-1)^n L^(n)(s)`` for ``n = 0 .. count-1``.

    ``t_n = E[(sX)^n e^(-sX) / n!]`` for the aggregate power X, i.e. the
    Poisson(sX) probability mass at n averaged over X.
    """
    if count <= 0:
        return np.zeros(0)
    n_max = count - 1
    _check_order(n_max, order_cap)
    L = laplace(ctx, s)
    if n_max == 0:
        return np.array([L])
    y = [ctx.mean_count * scaled_single_sat_derivative(ctx, j, s) for j in range(1, n_max + 1)]
    B = bell_table(n_max, y)
    terms = [L]
    for n in range(1, n_max + 1):
        terms.append(L * math.fsum(B[n, 1 : n + 1]) / math.factorial(n))
    return np.array(terms)


# --------------------------------------------------------------------------
# Coverage bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundResult:
    gamma_lin: float
    lower: float
    upper: float
    heuristic: float
    theorem: int
    order_used: int
    shape: float
    lower_trivial: bool = False
    terms: tuple[float, ...] = ()

    @property
    def gamma_db(self) -> float:
        return 10.0 * math.log10(self.gamma_lin)


INTEGER_SHAPE_RTOL = 1e-9


def snap_shape(k: float) -> float:
    """Round shapes within ``INTEGER_SHAPE_RTOL`` of an integer so floor and ceil coincide."""
    r = round(k)
    if r >= 1 and abs(k - r) <= INTEGER_SHAPE_RTOL * k:
        return float(r)
    return k


def coverage_heuristic(bound_at_floor: float, bound_at_ceil: float, k: float) -> float:
    """Blend of the floor- and ceil-shape bounds weighted by the distance of ``k`` to each."""
    k = snap_shape(k)
    kf, kc = math.floor(k), math.ceil(k)
    if kf == kc:
        return bound_at_floor
    return (kc - k) * bound_at_floor + (k - kf) * bound_at_ceil


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def coverage_bounds_theorem1(
    p: SystemParams,
    g: ClusterGeometry,
    gamma_lin: float,
    m: float | None = None,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> BoundResult:
    """Bounds from the Gamma-approximated interference and the exact cluster-power transform."""
    if not gamma_lin > 0:
        raise ValueError("SIR threshold must be positive")
    gi = gamma_params(p, g, OUTSIDE, m)
    k = snap_shape(gi.shape)
    kf, kc = math.floor(k), math.ceil(k)
    _check_order(kc - 1, order_cap)
    ctx = laplace_context(p, g, INSIDE, m)
    s = 1.0 / (gamma_lin * gi.scale)
    t = erlang_mixture_terms(ctx, s, kc, order_cap)

    def bound(kt):
        return _clip01(1.0 - math.fsum(t[:kt]))

    upper, lower = bound(kf), bound(kc)
    return BoundResult(
        gamma_lin=gamma_lin,
        lower=lower,
        upper=upper,
        heuristic=coverage_heuristic(upper, lower, k),
        theorem=1,
        order_used=max(kc - 1, 0),
        shape=k,
        lower_trivial=False,
        terms=tuple(float(x) for x in t),
    )


def coverage_bounds_theorem2(
    p: SystemParams,
    g: ClusterGeometry,
    gamma_lin: float,
    m: float | None = None,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> BoundResult:
    """Bounds from the Gamma-approximated cluster power and the exact interference transform.

    With a cluster shape below one the floor-shape sum is empty; the lower
    bound is then the trivial 0 and ``lower_trivial`` is set.
    """
    if not gamma_lin > 0:
        raise ValueError("SIR threshold must be positive")
    gd = gamma_params(p, g, INSIDE, m)
    k = snap_shape(gd.shape)
    kf, kc = math.floor(k), math.ceil(k)
    _check_order(kc - 1, order_cap)
    ctx = laplace_context(p, g, OUTSIDE, m)
    s = gamma_lin / gd.scale
    t = erlang_mixture_terms(ctx, s, kc, order_cap)

    def bound(kt):
        return _clip01(math.fsum(t[:kt]))

    lower, upper = bound(kf), bound(kc)
    return BoundResult(
        gamma_lin=gamma_lin,
        lower=lower,
        upper=upper,
        heuristic=coverage_heuristic(lower, upper, k),
        theorem=2,
        order_used=max(kc - 1, 0),
        shape=k,
        lower_trivial=kf == 0,
        terms=tuple(float(x) for x in t),
    )


def coverage_bounds(
    p: SystemParams,
    g: ClusterGeometry,
    gamma_lin: float,
    theorem: int,
    m: float | None = None,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> BoundResult:
    if theorem == 1:
        return coverage_bounds_theorem1(p, g, gamma_lin, m, order_cap)
    if theorem == 2:
        return coverage_bounds_theorem2(p, g, gamma_lin, m, order_cap)
    raise ValueError(f"theorem must be 1 or 2, got {theorem}")


def analytic_curve(
    p: SystemParams,
    g: ClusterGeometry,
    theorem: int,
    gammas_db: Sequence[float] | None = None,
    m: float | None = None,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> list[BoundResult]:
    gammas_db = p.sir_thresholds_db if gammas_db is None else gammas_db
    return [coverage_bounds(p, g, 10.0 ** (gd / 10.0), theorem, m, order_cap) for gd in gammas_db]


# --------------------------------------------------------------------------
# Spectral efficiency
# --------------------------------------------------------------------------


def spectral_efficiency(gammas_lin, coverage, cost_c: float = 0.0, tol: float = 1e-3) -> float:
    """Practical spectral efficiency ``(1 - C) int P(gamma) / ((1 + gamma) ln 2) dgamma``.

    ``gammas_lin`` must be increasing and start near zero.  The integral is a
    trapezoid in ``log gamma``; the head below the first point uses
    ``P <= 1`` and the tail beyond the last point a power-law fit to the last
    two points.  Raises ``ValueError`` when head or tail could exceed ``tol``.
    """
    if not 0.0 <= cost_c <= 1.0:
        raise ValueError("cost must lie in [0, 1]")
    g = np.asarray(gammas_lin, dtype=float)
    P = np.asarray(coverage, dtype=float)
    if g.ndim != 1 or g.shape != P.shape or len(g) < 3 or np.any(np.diff(g) <= 0) or g[0] <= 0:
        raise ValueError("need an increasing positive threshold grid with matching coverage")
    if cost_c == 1.0:
        return 0.0
    head = P[0] * math.log1p(g[0]) / math.log(2.0)
    head_slack = (1.0 - P[0]) * math.log1p(g[0]) / math.log(2.0)
    if head_slack > tol:
        raise ValueError(f"threshold grid starts too high; extend below gamma={g[0]:.3g}")
    lg = np.log(g)
    f = P * g / ((1.0 + g) * math.log(2.0))
    body = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(lg)))
    tail = 0.0
    if P[-1] > 0:
        if not (P[-2] > P[-1] > 0):
            raise ValueError("coverage is not decaying at the end of the grid; extend the grid")
        beta = math.log(P[-2] / P[-1]) / (lg[-1] - lg[-2])
        tail = P[-1] / (beta * math.log(2.0))
        if tail > tol:
            need = g[-1] * (P[-1] / (tol * beta * math.log(2.0))) ** (1.0 / beta)
            raise ValueError(f"threshold grid ends too early; extend to gamma >= {need:.3g}")
    return (1.0 - cost_c) * (head + body + tail)


# --------------------------------------------------------------------------
# Sensitivities of the Gamma parameters
# --------------------------------------------------------------------------

SENSITIVITIES = (
    "dkD_dRclu",
    "dthD_dRclu",
    "dkI_dRclu",
    "dthI_dRclu",
    "dkD_dm",
    "dthD_dm",
    "dkI_dm",
    "dthI_dm",
)


@dataclass(frozen=True)
class Sensitivity:
    name: str
    value: float
    boundary_limit: bool = False


def _shape_prefactor(p: SystemParams, m: float) -> float:
    a = p.path_loss_exponent
    return (
        4.0 * (a - 1.0) * math.pi * p.sat_density_per_km2 * (p.sat_orbit_radius_km / p.earth_radius_km)
        / ((a - 2.0) ** 2 * (1.0 + 1.0 / m))
    )


def _scale_prefactor(p: SystemParams, m: float, gain: float) -> float:
    a = p.path_loss_exponent
    return (a - 2.0) * gain / (2.0 * (a - 1.0)) * (1.0 + 1.0 / m)


def sensitivity(p: SystemParams, g: ClusterGeometry, which: str, m: float | None = None) -> Sensitivity:
    """Closed-form derivative of a Gamma shape/scale w.r.t. the cluster radius or ``m``."""
    if which not in SENSITIVITIES:
        raise ValueError(f"unknown sensitivity {which!r}; choose from {SENSITIVITIES}")
    m = p.nakagami_m if m is None else m
    a = p.path_loss_exponent
    if not a > 2:
        raise AnalyticError("path-loss exponent must exceed 2")
    Rmin, R, Rmax = g.r_min_km, g.r_clu_km, g.r_max_km
    Ks = _shape_prefactor(p, m)
    at_min = R <= Rmin * (1.0 + 1e-12)
    at_max = R >= Rmax * (1.0 - 1e-12)

    if which.startswith(("dkD", "dthD")) and at_min:
        # cluster region collapses; one-sided limits R_clu -> R_min
        limits = {
            # X vanishes at R_min but A/B^2 diverges like 1/(R_clu - R_min)
            "dkD_dRclu": 2.0 * math.pi * p.sat_density_per_km2 * (p.sat_orbit_radius_km / p.earth_radius_km)
            * Rmin / (1.0 + 1.0 / m),
            "dkD_dm": 0.0,
            "dthD_dRclu": -p.gain_inside * (1.0 + 1.0 / m) * a / 2.0 * Rmin ** (-a - 1.0),
            "dthD_dm": -p.gain_inside * Rmin ** (-a) / (m * m),
        }
        return Sensitivity(which, limits[which], True)
    if which.startswith(("dkI", "dthI")) and at_max:
        raise AnalyticError("interference region is empty at R_clu = R_max")

    if which in ("dkD_dRclu", "dthD_dRclu", "dkD_dm", "dthD_dm"):
        A = Rmin ** (2 - a) - R ** (2 - a)
        Bq = Rmin ** (2 - 2 * a) - R ** (2 - 2 * a)
        Kt = _scale_prefactor(p, m, p.gain_inside)
        if which == "dkD_dRclu":
            X = R ** (2 - a) + (a - 2) * R**a * Rmin ** (2 - 2 * a) - (a - 1) * Rmin ** (2 - a)
            val = Ks * 2.0 * R ** (1 - 2 * a) * A / Bq**2 * X
        elif which == "dthD_dRclu":
            Y = (2 * a - 2) * R ** (-a) * Rmin ** (2 - a) - a * R ** (2 - 2 * a) - (a - 2) * Rmin ** (2 - 2 * a)
            val = Kt * R ** (1 - a) / A**2 * Y
        elif which == "dkD_dm":
            val = Ks * (1.0 + 1.0 / m) * A**2 / Bq / (m * m * (1.0 + 1.0 / m) ** 2)
        else:
            val = Kt / (1.0 + 1.0 / m) * Bq / A * (-1.0 / (m * m))
        return Sensitivity(which, val)

    C = R ** (2 - a) - Rmax ** (2 - a)
    D = R ** (2 - 2 * a) - Rmax ** (2 - 2 * a)
    dC = (2 - a) * R ** (1 - a)
    dD = (2 - 2 * a) * R ** (1 - 2 * a)
    Kt = _scale_prefactor(p, m, p.gain_outside)
    if which == "dkI_dRclu":
        val = Ks * (2.0 * C * dC * D - C * C * dD) / D**2
    elif which == "dthI_dRclu":
        val = Kt * (dD * C - D * dC) / C**2
    elif which == "dkI_dm":
        val = Ks * (1.0 + 1.0 / m) * C**2 / D / (m * m * (1.0 + 1.0 / m) ** 2)
    else:
        val = Kt / (1.0 + 1.0 / m) * D / C * (-1.0 / (m * m))
    return Sensitivity(which, val)


def with_cluster_range(g: ClusterGeometry, r_clu: float) -> ClusterGeometry:
    """Geometry with the cluster radius moved and areas left as they were.

    Only for perturbation studies of the Gamma parameters, which depend on
    the areas solely through the satellite density.
    """
    return replace(g, r_clu_km=r_clu)
