import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from satcov.specialfns import (
    NumericalError,
    QuadratureSpec,
    bell_incomplete,
    bell_table,
    erlang_cdf_bound,
    gauss_2f1,
    integrate_adaptive,
    log_pochhammer_ratio,
    pochhammer,
)


def test_quadrature_polynomial():
    val, err = integrate_adaptive(lambda x: x**3, 0.0, 2.0)
    assert val == pytest.approx(4.0, rel=1e-14)


def test_quadrature_failure_raises():
    spec = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=2)
    with pytest.raises(NumericalError) as ei:
        integrate_adaptive(lambda x: math.sin(1.0 / x) / x, 1e-6, 1.0, spec)
    assert math.isfinite(ei.value.estimate)


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(3.0, 4) == 3 * 4 * 5 * 6
    assert math.exp(log_pochhammer_ratio(2.5, 6)) == pytest.approx(pochhammer(2.5, 6) / 2.5**6, rel=1e-14)
    assert log_pochhammer_ratio(1e20, 10) == pytest.approx(45e-20, rel=1e-10)


def test_2f1_identities():
    assert gauss_2f1(1, 1, 2, -1.0) == pytest.approx(math.log(2.0), rel=1e-14)
    assert gauss_2f1(3.0, 1.5, 2.5, 0.0) == 1.0
    # 2F1(a, b; b; z) = (1 - z)^-a
    assert gauss_2f1(2.3, 1.2, 1.2 + 1e-12, -4.0) == pytest.approx(5.0**-2.3, rel=1e-9)


@pytest.mark.parametrize("alpha", [2.1, 3.0, 4.5])
@pytest.mark.parametrize("a", [1, 2, 6, 11, 25])
def test_2f1_vs_mpmath(alpha, a):
    b, c = 1 + 2 / alpha, 2 + 2 / alpha
    for x in (1e-3, 0.3, 0.49, 0.51, 2.0, 50.0, 1e4, 1e9):
        ref = float(mpmath.hyp2f1(a, b, c, -x))
        assert gauss_2f1(a, b, c, -x) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("a", [2, 5, 11])
def test_2f1_connection_parameters(a):
    # parameters used by the large-argument remainder form
    alpha = 3.0
    b = a - 1 - 2 / alpha
    for z in (-1e-6, -0.2, -0.9):
        ref = float(mpmath.hyp2f1(a, b, b + 1, z))
        assert gauss_2f1(a, b, b + 1, z) == pytest.approx(ref, rel=1e-11)


def test_2f1_domain():
    with pytest.raises(ValueError):
        gauss_2f1(1, 2, 1.5, -1)
    with pytest.raises(ValueError):
        gauss_2f1(1, 1, 2, 0.5)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 60), theta=st.floats(0.01, 100), y=st.floats(0.0, 200.0))
def test_erlang_matches_incomplete_gamma(k, theta, y):
    x = y * theta
    assert erlang_cdf_bound(k, theta, x) == pytest.approx(special.gammainc(k, y), rel=1e-10, abs=1e-300)


def test_erlang_rejects_fractional():
    with pytest.raises(ValueError):
        erlang_cdf_bound(2.5, 1.0, 1.0)


def _bell_bruteforce(n, q, x):
    # sum over compositions j_1 + 2 j_2 + ... = n, j_1 + j_2 + ... = q
    total = 0.0
    m = n - q + 1
    for js in itertools.product(*(range(n // i + 1) for i in range(1, m + 1))):
        if sum(js) != q or sum(i * j for i, j in zip(range(1, m + 1), js)) != n:
            continue
        term = math.factorial(n)
        for i, j in zip(range(1, m + 1), js):
            term *= (x[i - 1] / math.factorial(i)) ** j / math.factorial(j)
        total += term
    return total


@pytest.mark.parametrize("n", range(1, 9))
def test_bell_vs_enumeration(n):
    rng = np.random.default_rng(n)
    x = rng.uniform(-2, 2, n)
    B = bell_table(n, x)
    for q in range(1, n + 1):
        assert B[n, q] == pytest.approx(_bell_bruteforce(n, q, x), rel=1e-12, abs=1e-12)
        assert bell_incomplete(n, q, x) == pytest.approx(B[n, q], rel=1e-14, abs=1e-14)


def test_bell_known_values():
    ones = [1.0] * 10
    # B_{n,q}(1,1,...) are Stirling numbers of the second kind
    assert bell_incomplete(5, 2, ones) == 15
    assert bell_incomplete(6, 3, ones) == 90
    # B_{n,q}(1!,2!,...) are Lah numbers
    fac = [math.factorial(i) for i in range(1, 11)]
    assert bell_incomplete(4, 2, fac) == 36


def test_bell_faa_di_bruno_exp():
    # d^n/ds^n exp(g) with g = c s: sum_q B_{n,q}(c, 0, 0, ...) = c^n
    c = 1.7
    x = [c] + [0.0] * 9
    B = bell_table(10, x)
    assert sum(B[10, 1:]) == pytest.approx(c**10, rel=1e-14)


def test_bell_args_count():
    with pytest.raises(ValueError):
        bell_incomplete(5, 2, [1.0, 2.0])
