"""Closed-form bounds and threshold formulas, as pure calculators.

Large quantities are carried as logarithms; the plain value is derived
from the log and overflows to ``inf`` past about e^709.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import log_binomial

EULER_GAMMA = 0.57721566490153286061

NU_CUBE_VERTICES = 2.0 / math.sqrt(math.e)
NU_CUBE_SOLID = 2.0 * math.pi * math.exp(-EULER_GAMMA - 0.5)

# engineering placeholders, not values from the literature
DEFAULT_C1 = 0.01
DEFAULT_C2 = 0.01

FAMILIES = ("cube_vertices", "cube_solid", "ball", "beta", "beta_refined")


def _exp(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709.0 else math.inf


@dataclass(frozen=True)
class LowerBound:
    raw: float
    clamped: float
    log_correction: float  # log of 2 C(N, n) (1 - inf q)^(N - n)
    degenerate: bool = False


@dataclass
class BoundsReport:
    lower: float
    upper: float
    volA: float
    inf_q_inside: float
    sup_q_outside: float
    wet_volume: float
    N: int
    n: int
    clamped: bool
    lower_raw: float = math.nan


def central_upper(volA: float, sup_q_outside: float, wet_vol: float, N: int) -> float:
    """E|K_N| <= |A| + N * sup_{A^c} q * |A^c ∩ {q > 0}|."""
    if volA < 0 or wet_vol < 0 or N < 0:
        raise ValueError("volumes and N must be nonnegative")
    if not 0 <= sup_q_outside <= 1:
        raise ValueError("sup_q_outside must lie in [0, 1]")
    return volA + N * sup_q_outside * wet_vol


def central_lower(volA: float, inf_q_inside: float, N: int, n: int) -> LowerBound:
    """E|K_N| >= |A| (1 - 2 C(N, n) (1 - inf_A q)^(N - n)), evaluated in logs."""
    if not 0 <= inf_q_inside <= 1:
        raise ValueError("inf_q_inside must lie in [0, 1]")
    if N <= n:
        return LowerBound(0.0, 0.0, math.inf, degenerate=True)
    if inf_q_inside == 1:
        log_corr = -math.inf
    else:
        log_corr = math.log(2) + log_binomial(N, n) + (N - n) * math.log1p(-inf_q_inside)
    raw = volA * -math.expm1(log_corr) if log_corr < 0 else volA * (1 - _exp(log_corr))
    return LowerBound(raw, min(max(raw, 0.0), volA), log_corr)


@dataclass(frozen=True)
class ThresholdQuery:
    family: str
    n: int
    epsilon: float = 0.0
    beta_param: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.family == "beta_refined":
            if not self.epsilon > 0:
                raise ValueError("beta_refined needs c > 0 (passed as epsilon)")
        elif not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.family in ("beta", "beta_refined") and (self.beta_param is None or self.beta_param <= -1):
            raise ValueError("beta families need beta_param > -1")


@dataclass(frozen=True)
class Threshold:
    log_low: float
    log_high: float

    @property
    def low(self) -> float:
        return _exp(self.log_low)

    @property
    def high(self) -> float:
        return _exp(self.log_high)


def threshold_N(q: ThresholdQuery) -> Threshold:
    """Below/above-threshold point counts of the known sharp thresholds.

    For ``beta_refined`` both ends are the single crossover count at which
    the expected ratio tends to e^-c, with c passed as ``epsilon``.
    """
    n, eps = q.n, q.epsilon
    if q.family in ("cube_vertices", "cube_solid"):
        nu = NU_CUBE_VERTICES if q.family == "cube_vertices" else NU_CUBE_SOLID
        if nu - eps <= 0:
            raise ValueError("epsilon too large for this nu")
        return Threshold(n * math.log(nu - eps), n * math.log(nu + eps))
    if q.family == "ball":
        base = 0.5 * n * math.log(n)
        return Threshold((1 - eps) * base, (1 + eps) * base)
    if q.family == "beta":
        base = (n / 2 + q.beta_param) * math.log(n)
        return Threshold((1 - eps) * base, (1 + eps) * base)
    c = eps
    log_n = (n / 2 + q.beta_param) * math.log(n / (2 * c))
    return Threshold(log_n, log_n)


def thm1_envelope(n: int, L_mu: float, c1: float = DEFAULT_C1, c2: float = DEFAULT_C2):
    """(largest N covered, cap on E|K_N|/|K|) for symmetric log-concave laws."""
    if c1 <= 0 or c2 <= 0:
        raise ValueError("c1 and c2 must be positive")
    if L_mu == math.inf:
        return 1.0, 1.0
    return _exp(c1 * n / L_mu ** 2), math.exp(-c2 * n / L_mu ** 2)


def log_thm2_required_N(n: int, kappa: float, omega: float) -> float:
    if not 0 < kappa < 1 / n:
        raise ValueError(f"kappa must lie in (0, 1/n), got {kappa}")
    if not omega > 1:
        raise ValueError("omega must exceed 1")
    return (math.log(n) + 2 * math.log(omega)) / kappa


def thm2_required_N(n: int, kappa: float, omega: float) -> float:
    """Point count (n omega^2)^(1/kappa) beyond which E|K_N|/|K| >= 1 - 1/omega."""
    return _exp(log_thm2_required_N(n, kappa, omega))


def thm2_beta_level(n: int, omega: float) -> float:
    """Level b with 32 n b = 1 / (2 omega)."""
    return 1.0 / (64.0 * n * omega)


def thm2_floating_radius(kappa: float, beta_level: float):
    """(radius, vacuous): gauge radius 1 - (16/kappa)^kappa * b of the guaranteed core."""
    shrink = (16.0 / kappa) ** kappa * beta_level
    if shrink >= 1:
        return 0.0, True
    return 1.0 - shrink, False
