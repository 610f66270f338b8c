"""Numerical kernels used by the analytic coverage path.

Only the parameter domains the coverage formulas actually visit are
supported: the Gauss hypergeometric function for ``c > b > 0`` and real
``z <= 0``, partial exponential Bell polynomials up to moderate order,
Erlang CDFs and Pochhammer symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate


class NumericalError(ArithmeticError):
    """Quadrature or series evaluation failed to reach the requested accuracy."""

    def __init__(self, message: str, estimate: float = math.nan, error: float = math.nan):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)``.  Raises :class:`NumericalError`,
    carrying the best estimate, when the requested tolerance is not met.
    """
    if not a < b:
        raise ValueError("integrate_adaptive needs a < b")
    kwargs = {"epsabs": spec.abs_tol, "epsrel": spec.rel_tol, "limit": spec.max_subdivisions, "full_output": 1}
    if points:
        kwargs["points"] = [x for x in points if a < x < b]
    value, err, info, *rest = integrate.quad(f, a, b, **kwargs)
    # quad reports ier != 0 in rest[0] when it gave up
    ier_msg = rest[0] if rest else None
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if ier_msg and err > 10.0 * tol:
        raise NumericalError(f"quadrature did not converge: {ier_msg}", value, err)
    return value, err


def pochhammer(m: float, n: int) -> float:
    """Rising factorial ``m (m+1) ... (m+n-1)``; ``(m)_0 = 1``."""
    if n < 0:
        raise ValueError("pochhammer order must be non-negative")
    out = 1.0
    for i in range(n):
        out *= m + i
    return out


def log_pochhammer_ratio(m: float, n: int) -> float:
    """``log((m)_n / m**n)``, stable for very large ``m``."""
    return math.fsum(math.log1p(i / m) for i in range(n))


@lru_cache(maxsize=None)
def _binomial(n: int, k: int) -> float:
    return float(math.comb(n, k))


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> tuple[float, float]:
    """Power series value and the largest term magnitude seen."""
    term = 1.0
    total = [1.0]
    biggest = 1.0
    for k in range(10_000):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total.append(term)
        biggest = max(biggest, abs(term))
        if abs(term) < 1e-17 * abs(math.fsum(total)):
            return math.fsum(total), biggest
    raise NumericalError("2F1 series did not converge", math.fsum(total))


def _hyp2f1_euler(a: float, b: float, c: float, z: float, spec: QuadratureSpec) -> float:
    # Euler integral on [0, 1]; the factor (1 - z t)^-a with x = -z > 0 decays
    # over a width of 1/x, so panels are geometric in t starting at 1/x.
    x = -z
    edges = [0.0]
    t = 1.0 / x
    while t < 1.0:
        edges.append(t)
        t *= 8.0
    edges.append(1.0)
    p_lo, p_hi = b - 1.0, c - b - 1.0
    pieces = []
    last = len(edges) - 2
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        w_lo = p_lo if i == 0 else 0.0
        w_hi = p_hi if i == last else 0.0

        def smooth(t, lo_=i == 0, hi_=i == last):
            v = (1.0 + x * t) ** (-a)
            if not lo_:
                v *= t**p_lo
            if not hi_:
                v *= (1.0 - t) ** p_hi
            return v

        if w_lo == 0.0 and w_hi == 0.0:
            val, err = integrate_adaptive(smooth, lo, hi, spec)
        else:
            val, err, *_ = integrate.quad(
                smooth, lo, hi, weight="alg", wvar=(w_lo, w_hi),
                epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
            )
        pieces.append(val)
    log_norm = math.lgamma(c) - math.lgamma(b) - math.lgamma(c - b)
    return math.exp(log_norm) * math.fsum(pieces)


def gauss_2f1(a: float, b: float, c: float, z: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Gauss hypergeometric function for ``c > b > 0`` and ``z <= 0``.

    Uses the power series for ``|z| < 0.5`` and the Euler integral
    representation otherwise.
    """
    if not (c > b > 0):
        raise ValueError(f"gauss_2f1 requires c > b > 0, got b={b}, c={c}")
    if not z <= 0:
        raise ValueError(f"gauss_2f1 requires z <= 0, got z={z}")
    if z == 0:
        return 1.0
    if -z < 0.5:
        value, biggest = _hyp2f1_series(a, b, c, z)
        # alternating terms: accept only when cancellation costs < ~3 digits
        if biggest <= 1e3 * abs(value):
            return value
    return _hyp2f1_euler(a, b, c, z, spec)


def erlang_cdf_bound(k_tilde: int, theta: float, x: float) -> float:
    """CDF at ``x`` of the Erlang law with integer shape ``k_tilde`` and scale ``theta``.

    Equals the regularized lower incomplete gamma ``P(k_tilde, x/theta)``.
    """
    if int(k_tilde) != k_tilde or k_tilde < 1:
        raise ValueError("k_tilde must be a positive integer")
    if theta <= 0 or x < 0:
        raise ValueError("need theta > 0 and x >= 0")
    k = int(k_tilde)
    y = x / theta
    if y == 0.0:
        return 0.0
    log_y = math.log(y)
    if y < k:
        # tail series sum_{n >= k} e^-y y^n / n! avoids 1 - (almost 1)
        terms = []
        n = k
        while True:
            t = math.exp(-y + n * log_y - math.lgamma(n + 1))
            terms.append(t)
            if t < 1e-18 * terms[0] or n > k + 100_000:
                break
            n += 1
        return min(1.0, math.fsum(terms))
    head = math.fsum(math.exp(-y + n * log_y - math.lgamma(n + 1)) for n in range(k))
    return max(0.0, 1.0 - head)


def bell_table(n_max: int, x: Sequence[float]) -> np.ndarray:
    """All partial Bell polynomials ``B[n, q]`` for ``0 <= q <= n <= n_max``.

    ``x[i-1]`` holds the argument ``x_i``.  Uses the recurrence
    ``B_{n,q} = sum_i C(n-1, i-1) x_i B_{n-i, q-1}`` with compensated sums.
    """
    if len(x) < n_max:
        raise ValueError(f"need {n_max} arguments, got {len(x)}")
    B = np.zeros((n_max + 1, n_max + 1))
    B[0, 0] = 1.0
    for n in range(1, n_max + 1):
        for q in range(1, n + 1):
            B[n, q] = math.fsum(
                _binomial(n - 1, i - 1) * x[i - 1] * B[n - i, q - 1] for i in range(1, n - q + 2)
            )
    return B


def bell_incomplete(n: int, q: int, x: Sequence[float]) -> float:
    """Partial exponential Bell polynomial ``B_{n,q}(x_1, ..., x_{n-q+1})``."""
    if not (1 <= q <= n):
        raise ValueError(f"need 1 <= q <= n, got n={n}, q={q}")
    if len(x) < n - q + 1:
        raise ValueError(f"B_{{{n},{q}}} needs {n - q + 1} arguments")
    padded = list(x[: n - q + 1]) + [0.0] * (q - 1)
    return float(bell_table(n, padded)[n, q])
