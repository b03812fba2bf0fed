"""Physical optomechanical parameters and their dimensionless map equivalents.

Scaling relations::

    alpha = sqrt(2) omega_A / (L Delta)          inverse length, 1/m
    k     = 2 xi0**2 / Delta                     kick amplitude
    T     = 2 pi / nu                            kick period
    K     = alpha k / (m omega)                  dimensionless kick strength
    theta = omega T  (mod 2 pi)                  rotation per kick
    q     = nu / omega

    x_bar = alpha x,   p_bar = alpha p / (m omega)

The amplitude ``k`` is taken as given above, with hbar and the kick
duration dropped, so ``K`` is only closed under rescaling of the time unit;
science runs should treat ``K`` as the free input.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .webmap import TWO_PI, MapParams, PhaseState

#: regime ratio above which the cosh approximation is flagged
REGIME_WARN = 0.1


@dataclass(frozen=True)
class OptomechanicalParams:
    """Physical setup; all frequencies angular (rad/s), SI units otherwise."""

    L: float
    delta: float
    m: float
    omega: float
    omega_A: float
    xi0: float
    nu: float

    def __post_init__(self):
        for name in ("L", "delta", "m", "omega", "omega_A", "nu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.xi0) and self.xi0 >= 0):
            raise ValueError(f"xi0 must be finite and >= 0, got {self.xi0!r}")

    @classmethod
    def from_hz(cls, L, delta_hz, m, omega_hz, omega_A_hz, xi0, nu_hz) -> "OptomechanicalParams":
        """Build from ordinary frequencies (Hz); ``xi0`` is taken as given."""
        return cls(L=L, delta=TWO_PI * delta_hz, m=m, omega=TWO_PI * omega_hz,
                   omega_A=TWO_PI * omega_A_hz, xi0=xi0, nu=TWO_PI * nu_hz)


@dataclass(frozen=True)
class DerivedScales:
    alpha: float
    k: float
    T: float
    K: float
    theta: float
    q: float
    m: float
    omega: float

    def map_params(self) -> MapParams:
        return MapParams.from_theta(self.K, self.theta)

    def as_dict(self) -> dict:
        return asdict(self)


def derive_scales(p: OptomechanicalParams) -> DerivedScales:
    alpha = math.sqrt(2.0) * p.omega_A / (p.L * p.delta)
    k = 2.0 * p.xi0 ** 2 / p.delta
    T = TWO_PI / p.nu
    K = alpha * k / (p.m * p.omega)
    theta = math.fmod(p.omega * T, TWO_PI)
    if theta <= 0.0:
        raise ValueError("omega T is a multiple of 2 pi: the kicks are synchronous with the oscillator")
    return DerivedScales(alpha=alpha, k=k, T=T, K=K, theta=theta, q=p.nu / p.omega,
                         m=p.m, omega=p.omega)


@dataclass(frozen=True)
class RegimeReport:
    x_max_m: float
    limit_m: float
    ratio: float
    warn: bool


def check_regime(p: OptomechanicalParams, x_max_dimless: float,
                 threshold: float = REGIME_WARN) -> RegimeReport:
    """Compare an excursion to the scale ``|Delta/omega_A| L`` of the cosh approximation."""
    alpha = math.sqrt(2.0) * p.omega_A / (p.L * p.delta)
    x_max_m = abs(x_max_dimless) / alpha
    limit = abs(p.delta / p.omega_A) * p.L
    ratio = x_max_m / limit
    return RegimeReport(x_max_m, limit, ratio, ratio > threshold)


def to_dimensionless(x_m: float, p_si: float, scales: DerivedScales) -> PhaseState:
    return PhaseState(scales.alpha * x_m, scales.alpha * p_si / (scales.m * scales.omega))


def from_dimensionless(s: PhaseState, scales: DerivedScales) -> tuple[float, float]:
    return s[0] / scales.alpha, s[1] * scales.m * scales.omega / scales.alpha
