"""Exact self-similar solutions of the isothermal Riemann problem (p = rho).

Characteristic speeds are u -+ 1.  Wave curves through a state K:

    rarefaction (rho <= rho_K):  u = u_K -+ ln(rho / rho_K)
    shock       (rho >  rho_K):  u = u_K -+ (rho - rho_K) / sqrt(rho rho_K)

with - for the 1-family (from the left state) and + for the 2-family (from
the right state).  The middle density solves a monotone scalar equation in
ln(rho_m); shocks satisfy the jump conditions s [rho] = [rho u],
s [rho u] = [rho u^2 + rho] and the Lax admissibility selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PrecisionError

__all__ = ["RiemannData", "Wave", "WaveFan", "solve_riemann", "sample_fan"]

_BRACKET = 40.0  # root find bracket in ln(rho_m)


@dataclass(frozen=True)
class RiemannData:
    rho_l: float
    u_l: float
    rho_r: float
    u_r: float

    def __post_init__(self):
        if not (self.rho_l > 0 and self.rho_r > 0):
            raise DomainError("Riemann states need strictly positive densities")
        for name in ("rho_l", "u_l", "rho_r", "u_r"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"RiemannData.{name} must be finite")


@dataclass(frozen=True)
class Wave:
    """One wave of the fan: 'shock' with a single speed, or 'rarefaction'
    with head/tail edge speeds; 'none' for an absent wave."""

    family: int  # 1 or 2
    kind: str  # shock | rarefaction | none
    speed_lo: float
    speed_hi: float

    @property
    def speed(self) -> float:
        return self.speed_lo


@dataclass(frozen=True)
class WaveFan:
    data: RiemannData
    rho_m: float
    u_m: float
    wave1: Wave
    wave2: Wave

    def rankine_hugoniot_residual(self) -> float:
        """Worst absolute residual of the jump conditions over the shocks."""
        worst = 0.0
        for wave, (rho_a, u_a), (rho_b, u_b) in (
            (self.wave1, (self.data.rho_l, self.data.u_l), (self.rho_m, self.u_m)),
            (self.wave2, (self.rho_m, self.u_m), (self.data.rho_r, self.data.u_r)),
        ):
            if wave.kind != "shock":
                continue
            s = wave.speed
            m_a, m_b = rho_a * u_a, rho_b * u_b
            r1 = s * (rho_b - rho_a) - (m_b - m_a)
            r2 = s * (m_b - m_a) - ((rho_b * u_b**2 + rho_b) - (rho_a * u_a**2 + rho_a))
            worst = max(worst, abs(r1), abs(r2))
        return worst

    def lax_admissible(self) -> bool:
        ok = True
        if self.wave1.kind == "shock":
            ok &= self.rho_m > self.data.rho_l
            ok &= self.wave1.speed < self.data.u_l - 1.0 + 1e-12
            ok &= self.wave1.speed > self.u_m - 1.0 - 1e-12
        if self.wave2.kind == "shock":
            ok &= self.rho_m > self.data.rho_r
            ok &= self.wave2.speed > self.data.u_r + 1.0 - 1e-12
            ok &= self.wave2.speed < self.u_m + 1.0 + 1e-12
        return bool(ok)


def _curve(delta_lnrho: float) -> float:
    """Velocity drop along a wave curve as a function of ln(rho/rho_K) >= is
    signed: ln branch for rarefactions (x <= 0), shock branch for x > 0."""
    if delta_lnrho <= 0.0:
        return delta_lnrho
    # (rho - rho_K)/sqrt(rho rho_K) = 2 sinh(x/2) with x = ln(rho/rho_K)
    return 2.0 * math.sinh(0.5 * delta_lnrho)


def solve_riemann(data: RiemannData) -> WaveFan:
    """Intersect the two wave curves by a safeguarded root find in ln(rho_m)."""
    ll, lr = math.log(data.rho_l), math.log(data.rho_r)

    def mismatch(lm: float) -> float:
        # u from the 1-curve minus u from the 2-curve; strictly decreasing
        u_from_l = data.u_l - _curve(lm - ll)
        u_from_r = data.u_r + _curve(lm - lr)
        return u_from_l - u_from_r

    lo, hi = -_BRACKET, _BRACKET
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        raise PrecisionError(
            f"middle state not bracketed in ln rho in [-{_BRACKET}, {_BRACKET}]"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mismatch(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    lm = 0.5 * (lo + hi)
    for _ in range(60):  # Newton polish
        d = 1e-7
        g = mismatch(lm)
        dg = (mismatch(lm + d) - mismatch(lm - d)) / (2 * d)
        if dg == 0.0:
            break
        step = g / dg
        lm -= step
        if abs(step) < 1e-15:
            break
    rho_m = math.exp(lm)
    u_m = data.u_l - _curve(lm - ll)

    if rho_m > data.rho_l * (1.0 + 1e-14):
        s1 = data.u_l - math.sqrt(rho_m / data.rho_l)
        wave1 = Wave(1, "shock", s1, s1)
    elif rho_m < data.rho_l * (1.0 - 1e-14):
        wave1 = Wave(1, "rarefaction", data.u_l - 1.0, u_m - 1.0)
    else:
        wave1 = Wave(1, "none", data.u_l - 1.0, data.u_l - 1.0)

    if rho_m > data.rho_r * (1.0 + 1e-14):
        s2 = data.u_r + math.sqrt(rho_m / data.rho_r)
        wave2 = Wave(2, "shock", s2, s2)
    elif rho_m < data.rho_r * (1.0 - 1e-14):
        wave2 = Wave(2, "rarefaction", u_m + 1.0, data.u_r + 1.0)
    else:
        wave2 = Wave(2, "none", data.u_r + 1.0, data.u_r + 1.0)

    return WaveFan(data=data, rho_m=rho_m, u_m=u_m, wave1=wave1, wave2=wave2)


def sample_fan(fan: WaveFan, x_over_t) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (rho, u) at similarity coordinates x/t (scalar or array).

    Exactly at a shock speed the left-side value is returned; rarefaction
    interiors follow u = xi +- 1 with ln(rho) from the constant Riemann
    invariant of the opposite family.
    """
    xi = np.atleast_1d(np.asarray(x_over_t, float))
    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    d = fan.data

    # region edges ordered left to right
    left_end = fan.wave1.speed_lo if fan.wave1.kind != "none" else -np.inf
    mid_start = fan.wave1.speed_hi if fan.wave1.kind != "none" else -np.inf
    mid_end = fan.wave2.speed_lo if fan.wave2.kind != "none" else np.inf
    right_start = fan.wave2.speed_hi if fan.wave2.kind != "none" else np.inf

    sel = xi <= left_end
    rho[sel], u[sel] = d.rho_l, d.u_l
    sel = (xi > left_end) & (xi < mid_start)  # 1-rarefaction interior
    if np.any(sel):
        uu = xi[sel] + 1.0
        w = d.u_l + math.log(d.rho_l)  # invariant across the 1-fan
        rho[sel], u[sel] = np.exp(w - uu), uu
    sel = (xi >= mid_start) & (xi <= mid_end)
    rho[sel], u[sel] = fan.rho_m, fan.u_m
    sel = (xi > mid_end) & (xi < right_start)  # 2-rarefaction interior
    if np.any(sel):
        uu = xi[sel] - 1.0
        z = d.u_r - math.log(d.rho_r)  # invariant across the 2-fan
        rho[sel], u[sel] = np.exp(uu - z), uu
    sel = xi >= right_start
    rho[sel], u[sel] = d.rho_r, d.u_r

    if np.ndim(x_over_t) == 0:
        return float(rho[0]), float(u[0])
    return rho, u
