"""Small-scale fading models and the two-level sectored antenna gain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

SPEED_OF_LIGHT = 299_792_458.0


class ChannelParameterError(ValueError):
    pass


def _check_m(m: float):
    if not m >= 0.5:
        raise ChannelParameterError(f"Nakagami m must be >= 0.5, got {m}")


def nakagami_power_pdf(m: float, h):
    """Density of the unit-mean fading power under Nakagami-m."""
    _check_m(m)
    h = np.asarray(h, dtype=float)
    hp = np.clip(h, 0.0, None)
    logpdf = m * math.log(m) - m * hp + special.xlogy(m - 1.0, hp) - math.lgamma(m)
    out = np.where(h >= 0, np.exp(logpdf), 0.0)
    return float(out) if out.ndim == 0 else out


def sample_nakagami_power(m: float, rng: np.random.Generator, size=None):
    """Power draws ``|h|^2 ~ Gamma(m, 1/m)``."""
    _check_m(m)
    return rng.gamma(m, 1.0 / m, size=size)


@dataclass(frozen=True)
class ShadowedRicianParams:
    """Shadowed-Rician fading: Nakagami-shadowed LOS plus diffuse scatter.

    ``b0`` is half the average scattered power and ``omega`` the average LOS
    power, so the mean received power is ``2 b0 + omega``.
    """

    m: float
    b0: float
    omega: float

    def __post_init__(self):
        _check_m(self.m)
        if not self.b0 > 0:
            raise ChannelParameterError("b0 must be positive")
        if not self.omega >= 0:
            raise ChannelParameterError("omega must be non-negative")

    @property
    def mean_power(self) -> float:
        return 2.0 * self.b0 + self.omega


def shadowed_rician_power_pdf(sr: ShadowedRicianParams, h):
    m, b0, om = sr.m, sr.b0, sr.omega
    h = np.asarray(h, dtype=float)
    beta = om / (2.0 * b0 * (2.0 * m * b0 + om))
    # Kummer: exp(-h/2b0) 1F1(m;1;beta h) = exp(-m h/(2 m b0 + om)) 1F1(1-m;1;-beta h)
    log_pre = -math.log(2.0 * b0) + m * math.log(2.0 * m * b0 / (2.0 * m * b0 + om))
    decay = m / (2.0 * m * b0 + om)
    hp = np.clip(h, 0.0, None)
    out = np.exp(log_pre - decay * hp) * special.hyp1f1(1.0 - m, 1.0, -beta * hp)
    out = np.where(h >= 0, out, 0.0)
    return float(out) if out.ndim == 0 else out


def sample_shadowed_rician_power(sr: ShadowedRicianParams, rng: np.random.Generator, size=None):
    """Draws of ``|sqrt(w) + z|^2`` with ``w ~ Gamma(m, omega/m)`` and ``z ~ CN(0, 2 b0)``."""
    if sr.omega > 0:
        los = np.sqrt(rng.gamma(sr.m, sr.omega / sr.m, size=size))
    else:
        los = np.zeros(size) if size is not None else 0.0
    sd = math.sqrt(sr.b0)
    re = los + sd * rng.standard_normal(size)
    im = sd * rng.standard_normal(size)
    return re * re + im * im


@dataclass(frozen=True)
class NakagamiFading:
    m: float

    def __post_init__(self):
        _check_m(self.m)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_nakagami_power(self.m, rng, size)

    def pdf(self, h):
        return nakagami_power_pdf(self.m, h)


@dataclass(frozen=True)
class ShadowedRicianFading:
    params: ShadowedRicianParams

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_shadowed_rician_power(self.params, rng, size)

    def pdf(self, h):
        return shadowed_rician_power_pdf(self.params, h)


@dataclass(frozen=True)
class AntennaConfig:
    """Sectored transmit gains.

    ``carrier_freq_hz``, ``rx_gain`` and ``speed_of_light`` form a common
    factor ``G_r c^2 / (4 pi f_c)^2`` that cancels in the SIR; they are kept
    for reference only.
    """

    gain_inside: float = 1.0
    gain_outside: float = 0.1
    carrier_freq_hz: float = 20e9
    rx_gain: float = 1.0
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not (self.gain_inside > 0 and self.gain_outside > 0):
            raise ChannelParameterError("antenna gains must be positive")

    @property
    def common_factor(self) -> float:
        return self.rx_gain * self.speed_of_light**2 / (4.0 * math.pi * self.carrier_freq_hz) ** 2


def antenna_gain(in_cluster: bool, a: AntennaConfig) -> float:
    return a.gain_inside if in_cluster else a.gain_outside


def m_from_rician_k(k_factor: float) -> float:
    """Nakagami parameter matching a Rician K factor."""
    return (k_factor + 1.0) ** 2 / (2.0 * k_factor + 1.0)


def rician_k_from_m(m: float) -> float:
    if m < 1.0:
        raise ChannelParameterError("a Rician K factor exists only for m >= 1")
    return (m - 1.0) + math.sqrt(m * m - m)
