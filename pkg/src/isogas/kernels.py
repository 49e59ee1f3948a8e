"""Weak-entropy kernel family for the isothermal (gamma = 1) Euler system.

Everything here lives in the log-density coordinates (R, u) with R = ln(rho).
The building block is the power series

    f(m) = sum_n (A^n / n!)^2 (-m)^n,      A = 1/4,

which solves m f'' + f' + A^2 f = 0.  The entropy kernel is

    chi(R, u - s) = e^{R/2} f((u-s)^2 - R^2)   on |u - s| < |R|,  else 0,

and entropies/fluxes are generated by convolving chi (and the flux kernels
h, sigma = u chi + h) against a weight psi(s).  The kernel support boundary
|u - s| = |R| carries jumps of strength e^{R/2}; the smooth densities of the
s-derivatives are provided for distributional-pairing experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, PrecisionError
from .quadrature import integrate, simpson_uniform

__all__ = [
    "KernelConfig",
    "KernelPoint",
    "EntropyGenerator",
    "SmoothBump1D",
    "SmoothBump2D",
    "DEFAULT_CONFIG",
    "eval_f",
    "eval_f_derivs",
    "eval_chi",
    "eval_H",
    "eval_h",
    "eval_sigma",
    "eval_G_chi",
    "eval_G_h",
    "series_f",
    "series_f1",
    "series_f2",
    "chi_values",
    "h_values",
    "H_values",
    "sigma_values",
    "g_chi_values",
    "g_h_values",
    "chi_s_density",
    "h_s_density",
    "entropy_eta",
    "entropy_flux_q",
    "eta_values",
    "q_values",
    "fundamental_solution_pairing",
    "singular_pairing_chi_s",
    "singular_pairing_h_s",
    "pairing_chi_s_direct",
    "pairing_h_s_direct",
]


@dataclass(frozen=True)
class KernelConfig:
    """Series and quadrature policy for the kernel family.

    ``A`` is fixed at 1/4 and ``A2`` must equal ``A*A`` exactly.  Series
    summation uses the term recurrence t_{n+1} = t_n (-A2 m)/(n+1)^2 and stops
    once |t| < tail_tol with n >= 3 (the first omitted term bounds the tail
    after factorial decay sets in), or errors at ``max_terms``.
    """

    A: float = 0.25
    A2: float = 0.0625
    max_terms: int = 200
    tail_tol: float = 1e-14

    def __post_init__(self):
        if self.A2 != self.A * self.A:
            raise DomainError(f"A2={self.A2!r} must equal A*A={self.A * self.A!r} exactly")
        if self.max_terms <= 0:
            raise DomainError("max_terms must be a positive integer")
        if not (self.tail_tol > 0.0):
            raise DomainError("tail_tol must be positive")


DEFAULT_CONFIG = KernelConfig()


@dataclass(frozen=True)
class KernelPoint:
    """Evaluation point: log-density R = ln(rho), velocity u, kernel shift s."""

    R: float
    u: float
    s: float = 0.0

    def __post_init__(self):
        for name in ("R", "u", "s"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"KernelPoint.{name} must be finite")

    @property
    def rho(self) -> float:
        return math.exp(self.R)


def _require_finite(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise DomainError("series argument must be finite")
    return m


def _sum_series(m, first_term, ratio, cfg: KernelConfig, min_n: int):
    """Sum a term-recurrence series; ``ratio(n)`` multiplies term n -> n+1."""
    scalar = np.ndim(m) == 0
    m = _require_finite(m)
    t = np.full(m.shape, float(first_term))
    total = t.copy()
    worst = abs(float(first_term))
    n = min_n
    while n < cfg.max_terms:
        t = t * ((-cfg.A2) * m) * ratio(n)
        total = total + t
        n += 1
        worst = float(np.max(np.abs(t))) if t.size else 0.0
        if n - min_n >= 3 and worst < cfg.tail_tol:
            return float(total) if scalar else total
    raise PrecisionError(
        f"series truncation cap {cfg.max_terms} reached with last term {worst:.3e} "
        f">= tail_tol {cfg.tail_tol:g}",
        last_term=worst,
    )


def series_f(m, cfg: KernelConfig = DEFAULT_CONFIG):
    """f(m) = sum (A^n/n!)^2 (-m)^n, vectorized."""
    return _sum_series(m, 1.0, lambda n: 1.0 / (n + 1) ** 2, cfg, min_n=0)


def series_f1(m, cfg: KernelConfig = DEFAULT_CONFIG):
    """Termwise derivative f'(m); f'(0) = -A^2."""
    return _sum_series(m, -cfg.A2, lambda n: 1.0 / (n * (n + 1)), cfg, min_n=1)


def series_f2(m, cfg: KernelConfig = DEFAULT_CONFIG):
    """Termwise second derivative f''(m); f''(0) = A^4/2."""
    return _sum_series(m, cfg.A2 * cfg.A2 / 2.0, lambda n: 1.0 / ((n + 1) * (n - 1)), cfg, min_n=2)


def eval_f(m: float, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    if not np.isscalar(m) and np.ndim(m) != 0:
        raise DomainError("eval_f takes a scalar; use series_f for arrays")
    return float(series_f(float(m), cfg))


def eval_f_derivs(m: float, cfg: KernelConfig = DEFAULT_CONFIG) -> tuple[float, float, float]:
    """Return (f, f', f''); the triple satisfies |m f'' + f' + A2 f| <= 10 tail_tol."""
    m = float(m)
    return float(series_f(m, cfg)), float(series_f1(m, cfg)), float(series_f2(m, cfg))


# --------------------------------------------------------------------------
# kernel family
# --------------------------------------------------------------------------


def chi_values(R, u, s=0.0, cfg: KernelConfig = DEFAULT_CONFIG):
    """Entropy kernel chi(R, u - s); open support |u - s| < |R|, 0 outside."""
    R, u, s = np.broadcast_arrays(
        _require_finite(R), _require_finite(u), _require_finite(s)
    )
    v = u - s
    inside = np.abs(v) < np.abs(R)
    out = np.zeros(R.shape)
    if np.any(inside):
        Ri, vi = R[inside], v[inside]
        out[inside] = np.exp(Ri / 2.0) * series_f(vi * vi - Ri * Ri, cfg)
    return out if out.shape else float(out)


def eval_chi(p: KernelPoint, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    return float(chi_values(p.R, p.u, p.s, cfg))


def _tail_integral(kind: str, R, v, cfg: KernelConfig, panels: int | None = None):
    """integral_{-(|R| v |v|)}^{-|v|} g(r) dr with g per ``kind``, vectorized.

    kind "f"   : e^{r/2} f(v^2 - r^2)
    kind "f1"  : e^{r/2} f'(v^2 - r^2)
    kind "gh"  : e^{r/2} (f'(v^2 - r^2) + 2 v^2 f''(v^2 - r^2))
    """
    R, v = np.broadcast_arrays(np.asarray(R, float), np.asarray(v, float))
    aR, av = np.abs(R), np.abs(v)
    span = np.maximum(aR, av) - av
    lo = -np.maximum(aR, av)

    def value(n_nodes: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n_nodes)
        r = lo[..., None] + span[..., None] * t
        vv = v[..., None]
        arg = vv * vv - r * r
        if kind == "f":
            g = series_f(arg, cfg)
        elif kind == "f1":
            g = series_f1(arg, cfg)
        elif kind == "gh":
            g = series_f1(arg, cfg) + 2.0 * vv * vv * series_f2(arg, cfg)
        else:  # pragma: no cover
            raise ValueError(kind)
        g = np.exp(r / 2.0) * g
        return simpson_uniform(g, 1.0 / (n_nodes - 1), axis=-1) * span

    if panels is not None:
        return value(2 * panels + 1)
    nodes = 17
    prev = value(nodes)
    for _ in range(12):
        nodes = 2 * (nodes - 1) + 1
        cur = value(nodes)
        err = np.max(np.abs(cur - prev)) / 15.0 if cur.size else 0.0
        if err <= cfg.tail_tol:
            return cur
        prev = cur
    raise PrecisionError(f"kernel tail integral did not converge (last change {err:.3e})")


def H_values(R, u, s=0.0, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None):
    """Antiderivative kernel H = |u-s| + tail integral of e^{r/2} f."""
    R, u, s = np.broadcast_arrays(
        _require_finite(R), _require_finite(u), _require_finite(s)
    )
    v = u - s
    return np.abs(v) + _tail_integral("f", R, v, cfg, panels)


def eval_H(p: KernelPoint, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    return float(H_values(p.R, p.u, p.s, cfg))


def _h_inner(R, v, cfg: KernelConfig, panels: int | None = None):
    """Interior branch of h, valid on the closed set 0 <= |v| <= |R|."""
    v = np.asarray(v, float)
    av = np.abs(v)
    lead = np.sign(v) * (np.exp(-av / 2.0) - 1.0)
    return lead - 2.0 * v * _tail_integral("f1", R, v, cfg, panels)


def h_values(R, u, s=0.0, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None):
    """Flux kernel h; odd in (u - s), equals -sgn(u-s) outside |u-s| < |R|.

    Not defined on the sign line u = s; callers take one-sided limits.
    """
    R, u, s = np.broadcast_arrays(
        _require_finite(R), _require_finite(u), _require_finite(s)
    )
    v = u - s
    if np.any(v == 0.0):
        raise DomainError("h has a sign discontinuity at u = s; evaluate one-sided")
    av, aR = np.abs(v), np.abs(R)
    lead = np.sign(v) * (np.exp(-av / 2.0) * (av < aR) - 1.0)
    out = lead - 2.0 * v * _tail_integral("f1", R, v, cfg, panels)
    return out if out.shape else float(out)


def eval_h(p: KernelPoint, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    return float(h_values(p.R, p.u, p.s, cfg))


def sigma_values(R, u, s=0.0, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None):
    """Entropy-flux kernel sigma = u * chi + h."""
    u_arr = np.asarray(u, float)
    return u_arr * chi_values(R, u, s, cfg) + h_values(R, u, s, cfg, panels)


def eval_sigma(p: KernelPoint, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    return float(sigma_values(p.R, p.u, p.s, cfg))


def g_chi_values(R, v, cfg: KernelConfig = DEFAULT_CONFIG):
    """Closed-form kernel-boundary density G_chi: 2 e^{R/2} v f'(v^2 - R^2) inside
    |v| < |R|, extended continuously by +-2|R| f'(0) e^{R/2} outside."""
    R, v = np.broadcast_arrays(_require_finite(R), _require_finite(v))
    aR = np.abs(R)
    pref = np.exp(R / 2.0)
    out = np.where(v >= aR, 2.0 * aR * (-cfg.A2) * pref, -2.0 * aR * (-cfg.A2) * pref)
    inside = np.abs(v) < aR
    if np.any(inside):
        Ri, vi = R[inside], v[inside]
        out = np.array(out, dtype=float)
        out[inside] = 2.0 * np.exp(Ri / 2.0) * vi * series_f1(vi * vi - Ri * Ri, cfg)
    return out if out.shape else float(out)


def eval_G_chi(R: float, v: float, cfg: KernelConfig = DEFAULT_CONFIG) -> float:
    return float(g_chi_values(R, v, cfg))


def g_h_values(R, v, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None):
    """Closed-form companion density G_h: e^{-|v|/2}(1/2 - 2|v|) plus the tail
    integral of e^{r/2}(f' + 2 v^2 f'') inside |v| < |R|; constant
    e^{R/2}(2R + 1/2) outside (the continuous extension)."""
    R, v = np.broadcast_arrays(_require_finite(R), _require_finite(v))
    aR, av = np.abs(R), np.abs(v)
    out = np.exp(R / 2.0) * (2.0 * R + 0.5) * np.ones(R.shape)
    inside = av < aR
    if np.any(inside):
        Ri, vi = R[inside], v[inside]
        avi = np.abs(vi)
        interior = np.exp(-avi / 2.0) * (0.5 - 2.0 * avi) + 2.0 * _tail_integral(
            "gh", Ri, vi, cfg, panels
        )
        out = np.array(out, dtype=float)
        out[inside] = interior
    return out if out.shape else float(out)


def eval_G_h(R: float, v: float, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None) -> float:
    return float(g_h_values(R, v, cfg, panels))


def chi_s_density(R, u, s, cfg: KernelConfig = DEFAULT_CONFIG):
    """Smooth part of d/ds [chi(R, u - s)]: matches centered differences of chi
    strictly inside the support.  Equals the G_chi closed form taken with the
    orientation v = s - u (the sign that reproduces the direct pairing).

    Boundary points |u - s| = |R| carry the continuous interior extension so
    that quadrature against test functions keeps its order; the open/closed
    distinction only affects a null set.
    """
    R, u, s = np.broadcast_arrays(
        np.asarray(R, float), np.asarray(u, float), np.asarray(s, float)
    )
    out = np.where(np.abs(u - s) <= np.abs(R), g_chi_values(R, s - u, cfg), 0.0)
    return out if out.shape else float(out)


def h_s_density(R, u, s, cfg: KernelConfig = DEFAULT_CONFIG, panels: int | None = None):
    """Smooth part of d/ds [h(R, u - s)] inside the support (even in u - s).

    Differs from the G_h closed form in the jump-coefficient term: the
    derivative of the e^{-|v|/2} factor carries f'(0) = -A2, giving
    e^{-|v|/2}(1/2 + 2 A2 |v|) + tail.  This is the density consistent with
    centered differences of h, which the pairing contract requires.
    """
    R, u, s = np.broadcast_arrays(
        np.asarray(R, float), np.asarray(u, float), np.asarray(s, float)
    )
    v = u - s
    aR, av = np.abs(R), np.abs(v)
    out = np.zeros(R.shape)
    inside = av <= aR  # closed: continuous extension at the support boundary
    if np.any(inside):
        Ri, vi = R[inside], v[inside]
        avi = np.abs(vi)
        out[inside] = np.exp(-avi / 2.0) * (0.5 + 2.0 * cfg.A2 * avi) + 2.0 * _tail_integral(
            "gh", Ri, vi, cfg, panels
        )
    return out if out.shape else float(out)


# --------------------------------------------------------------------------
# entropy generation
# --------------------------------------------------------------------------


@dataclass
class EntropyGenerator:
    """Weight psi sampled on a uniform s-grid, with interpolation + quadrature policy."""

    s0: float
    s_grid_step: float
    values: np.ndarray
    interp: str = "cubic"
    quadrature: str = "simpson"  # composite simpson | trapezoid

    _spline: CubicSpline = field(init=False, repr=False, default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise DomainError("psi needs at least two samples on a 1-D grid")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("psi samples must be finite")
        if not (self.s_grid_step > 0):
            raise DomainError("s_grid_step must be positive")
        if self.interp not in ("cubic", "linear"):
            raise DomainError(f"unknown interpolation rule {self.interp!r}")
        if self.quadrature not in ("simpson", "trapezoid"):
            raise DomainError(f"unknown quadrature rule {self.quadrature!r}")
        if self.interp == "cubic":
            self._spline = CubicSpline(self.grid, self.values, bc_type="natural")

    @classmethod
    def from_callable(cls, psi, s_min: float, s_max: float, n: int = 801, **kw) -> "EntropyGenerator":
        s = np.linspace(s_min, s_max, n)
        return cls(s0=s_min, s_grid_step=s[1] - s[0], values=np.asarray(psi(s), float), **kw)

    @property
    def grid(self) -> np.ndarray:
        return self.s0 + self.s_grid_step * np.arange(self.values.size)

    @property
    def support(self) -> tuple[float, float]:
        return self.s0, self.s0 + self.s_grid_step * (self.values.size - 1)

    def psi(self, s):
        s = np.asarray(s, float)
        lo, hi = self.support
        inside = (s >= lo) & (s <= hi)
        if self.interp == "cubic":
            vals = self._spline(np.clip(s, lo, hi))
        else:
            vals = np.interp(s, self.grid, self.values)
        out = np.where(inside, vals, 0.0)
        return out if out.shape else float(out)

    def psi_antiderivative(self, s):
        """Integral of psi from the lower support edge; exact for the spline."""
        lo, hi = self.support
        s = np.asarray(s, float)
        if self.interp == "cubic":
            anti = self._spline.antiderivative()
            vals = anti(np.clip(s, lo, hi)) - anti(lo)
        else:
            grid = self.grid
            cum = np.concatenate([[0.0], np.cumsum((self.values[1:] + self.values[:-1]) / 2.0 * self.s_grid_step)])
            vals = np.interp(np.clip(s, lo, hi), grid, cum)
        return vals if vals.shape else float(vals)


def _check_entropy_region(R: float):
    if not math.isfinite(R):
        raise DomainError("R must be finite")
    if R > 0.0:
        raise DomainError("entropy generation is restricted to R <= 0 (rho <= 1)")


def entropy_eta(
    gen: EntropyGenerator,
    R: float,
    u: float,
    cfg: KernelConfig = DEFAULT_CONFIG,
    panels: int | None = None,
) -> float:
    """eta(R, u) = integral of chi(R, u - s) psi(s) ds over the kernel support."""
    _check_entropy_region(R)
    if R == 0.0:
        return 0.0
    aR = abs(R)
    pref = math.exp(R / 2.0)

    def integrand(tau):
        arg = R * R * (tau * tau - 1.0)
        return series_f(arg, cfg) * gen.psi(u + aR * tau)

    lo, hi = gen.support
    cuts = [np.clip((edge - u) / aR, -1.0, 1.0) for edge in (lo, hi)]
    val = integrate(integrand, -1.0, 1.0, cfg.tail_tol, points=cuts, panels=panels)
    return pref * aR * val


def entropy_flux_q(
    gen: EntropyGenerator,
    R: float,
    u: float,
    cfg: KernelConfig = DEFAULT_CONFIG,
    panels: int | None = None,
) -> float:
    """q(R, u) = u * eta + integral of h(R, u - s) psi(s) ds over psi's support.

    The far-field part of h (-sgn(u - s)) integrates exactly against the psi
    antiderivative; the remainder h + sgn(u - s) is supported on |u - s| < |R|.
    """
    _check_entropy_region(R)
    lo, hi = gen.support
    total_mass = gen.psi_antiderivative(hi)
    sgn_part = -(2.0 * gen.psi_antiderivative(u) - total_mass)
    if R == 0.0:
        return sgn_part
    aR = abs(R)

    # h + sgn(u - s) is supported on |u - s| < |R| but jumps across s = u,
    # so each half-interval carries its one-sided sign as a constant.
    inner = 0.0
    for half, sgn in ((+1.0, -1.0), (-1.0, +1.0)):

        def integrand(tau, half=half, sgn=sgn):
            v = -aR * half * tau  # u - s at s = u + aR*half*tau, tau in [0, 1]
            av = np.abs(v)
            tail = _tail_integral("f1", np.full(np.shape(tau), R), v, cfg, panels)
            core = sgn * np.exp(-av / 2.0) - 2.0 * v * tail
            return core * gen.psi(u + aR * half * tau)

        cuts = [np.clip(half * (edge - u) / aR, 0.0, 1.0) for edge in (lo, hi)]
        inner += integrate(integrand, 0.0, 1.0, cfg.tail_tol, points=cuts, panels=panels)

    eta = entropy_eta(gen, R, u, cfg, panels)
    return u * eta + sgn_part + aR * inner


def eta_values(
    gen: EntropyGenerator,
    R,
    u,
    cfg: KernelConfig = DEFAULT_CONFIG,
    nodes: int = 129,
):
    """Vectorized eta over broadcast (R, u) arrays with a fixed Simpson rule."""
    R, u = np.broadcast_arrays(np.asarray(R, float), np.asarray(u, float))
    if np.any(R > 0):
        raise DomainError("entropy generation is restricted to R <= 0")
    aR = np.abs(R)
    tau = np.linspace(-1.0, 1.0, nodes)
    arg = (R * R)[..., None] * (tau * tau - 1.0)
    vals = series_f(arg, cfg) * gen.psi(u[..., None] + aR[..., None] * tau)
    out = np.exp(R / 2.0) * aR * simpson_uniform(vals, 2.0 / (nodes - 1), axis=-1)
    return out if out.shape else float(out)


def q_values(
    gen: EntropyGenerator,
    R,
    u,
    cfg: KernelConfig = DEFAULT_CONFIG,
    nodes: int = 129,
    inner_panels: int = 16,
):
    """Vectorized q over broadcast (R, u) arrays with fixed quadrature rules."""
    R, u = np.broadcast_arrays(np.asarray(R, float), np.asarray(u, float))
    if np.any(R > 0):
        raise DomainError("entropy generation is restricted to R <= 0")
    lo, hi = gen.support
    total_mass = gen.psi_antiderivative(hi)
    sgn_part = -(2.0 * gen.psi_antiderivative(u) - total_mass)
    aR = np.abs(R)
    # integrate the remainder h + sgn(u - s) on each half of its support,
    # carrying the one-sided sign of the jump across s = u as a constant
    half_sum = np.zeros(R.shape)
    for half, sgn in ((+1.0, -1.0), (-1.0, +1.0)):
        tau = half * np.linspace(0.0, 1.0, nodes)
        v = -aR[..., None] * tau
        av = np.abs(v)
        tail = _tail_integral("f1", np.broadcast_to(R[..., None], v.shape), v, cfg, panels=inner_panels)
        core = sgn * np.exp(-av / 2.0) - 2.0 * v * tail
        vals = core * gen.psi(u[..., None] + aR[..., None] * tau)
        half_sum = half_sum + simpson_uniform(vals, 1.0 / (nodes - 1), axis=-1)
    eta = eta_values(gen, R, u, cfg, nodes)
    out = u * eta + sgn_part + aR * half_sum
    return out if out.shape else float(out)


# --------------------------------------------------------------------------
# smooth test functions and distributional pairings
# --------------------------------------------------------------------------


def _bump_core(y):
    """exp(-1/(1-y^2)) on |y| < 1 with first/second derivative factors."""
    y = np.asarray(y, float)
    inside = np.abs(y) < 1.0
    ys = np.where(inside, y, 0.0)
    q = 1.0 - ys * ys
    b = np.where(inside, np.exp(-1.0 / np.where(inside, q, 1.0)), 0.0)
    d1 = -2.0 * ys / q**2  # logarithmic derivative
    d2 = (-2.0 - 6.0 * ys * ys) / q**3
    bp = np.where(inside, b * d1, 0.0)
    bpp = np.where(inside, b * (d1 * d1 + d2), 0.0)
    return b, bp, bpp


@dataclass(frozen=True)
class SmoothBump1D:
    """C-infinity bump a * exp(-1/(1 - ((s-c)/w)^2)) supported on (c-w, c+w)."""

    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def value(self, s):
        b, _, _ = _bump_core((np.asarray(s, float) - self.center) / self.width)
        return self.amplitude * b

    def deriv(self, s):
        _, bp, _ = _bump_core((np.asarray(s, float) - self.center) / self.width)
        return self.amplitude * bp / self.width


@dataclass(frozen=True)
class SmoothBump2D:
    """Tensor bump phi(R, u) with analytic derivatives up to second order."""

    center: tuple[float, float] = (0.0, 0.0)
    width: tuple[float, float] = (1.0, 1.0)
    amplitude: float = 1.0

    @property
    def support_box(self) -> tuple[float, float, float, float]:
        (cR, cu), (wR, wu) = self.center, self.width
        return cR - wR, cR + wR, cu - wu, cu + wu

    def _parts(self, R, u):
        (cR, cu), (wR, wu) = self.center, self.width
        gR = _bump_core((np.asarray(R, float) - cR) / wR)
        gu = _bump_core((np.asarray(u, float) - cu) / wu)
        return gR, gu, wR, wu

    def value(self, R, u):
        gR, gu, _, _ = self._parts(R, u)
        return self.amplitude * gR[0] * gu[0]

    def lstar(self, R, u):
        """Adjoint operator phi_RR - phi_uu + phi_R applied to the bump."""
        gR, gu, wR, wu = self._parts(R, u)
        phi_RR = gR[2] / wR**2 * gu[0]
        phi_uu = gR[0] * gu[2] / wu**2
        phi_R = gR[1] / wR * gu[0]
        return self.amplitude * (phi_RR - phi_uu + phi_R)


def fundamental_solution_pairing(
    testfn: SmoothBump2D,
    quad_step: float,
    cfg: KernelConfig = DEFAULT_CONFIG,
    shift: float = 0.0,
) -> float:
    """Pair chi(R, u - shift) with the adjoint of L(eta) = eta_RR - eta_uu - eta_R.

    Midpoint tensor quadrature over the test function's support box; converges
    to 4 * phi(0, shift) as quad_step -> 0 (first order: the integrand jumps
    along |u - shift| = |R|).  The u-axis step is detuned by 1/sqrt(2): the
    jump lines run diagonally, and commensurate axis steps would lock every
    cut cell to the same phase, making the O(h) error coefficient oscillate
    instead of decay.
    """
    R_lo, R_hi, u_lo, u_hi = testfn.support_box
    if not all(map(math.isfinite, (R_lo, R_hi, u_lo, u_hi))):
        raise DomainError("test function support must be bounded")
    nR = max(2, int(math.ceil((R_hi - R_lo) / quad_step)))
    nu = max(2, int(math.ceil((u_hi - u_lo) / (quad_step / math.sqrt(2.0)))))
    hR, hu = (R_hi - R_lo) / nR, (u_hi - u_lo) / nu
    R = R_lo + hR * (np.arange(nR) + 0.5)
    u = u_lo + hu * (np.arange(nu) + 0.5)
    # accumulate in fixed-size row blocks to bound memory on fine grids
    total = 0.0
    block = max(1, (1 << 21) // nu)
    for i0 in range(0, nR, block):
        RR, UU = np.meshgrid(R[i0 : i0 + block], u, indexing="ij")
        chi = chi_values(RR, UU, shift, cfg)
        total += float(np.sum(chi * testfn.lstar(RR, UU)))
    return total * hR * hu


def _check_pairing_point(R: float):
    if R == 0.0:
        raise DomainError("singular pairings need R != 0")


def singular_pairing_chi_s(
    R: float, u: float, testfn: SmoothBump1D, cfg: KernelConfig = DEFAULT_CONFIG
) -> float:
    """Closed-form pairing of d/ds chi(R, u - s) with a test function:
    boundary jumps e^{R/2}(phi(u-|R|) - phi(u+|R|)) plus the smooth density."""
    _check_pairing_point(R)
    aR = abs(R)
    jumps = math.exp(R / 2.0) * (float(testfn.value(u - aR)) - float(testfn.value(u + aR)))
    body = integrate(
        lambda s: chi_s_density(R, u, s, cfg) * testfn.value(s),
        u - aR,
        u + aR,
        cfg.tail_tol * 10,
    )
    return jumps + body


def singular_pairing_h_s(
    R: float, u: float, testfn: SmoothBump1D, cfg: KernelConfig = DEFAULT_CONFIG
) -> float:
    """Closed-form pairing of d/ds h(R, u - s): boundary jumps
    e^{R/2}(phi(u-|R|) + phi(u+|R|)) plus the smooth density."""
    _check_pairing_point(R)
    aR = abs(R)
    jumps = math.exp(R / 2.0) * (float(testfn.value(u - aR)) + float(testfn.value(u + aR)))
    body = integrate(
        lambda s: h_s_density(R, u, s, cfg, panels=32) * testfn.value(s),
        u - aR,
        u + aR,
        cfg.tail_tol * 10,
        points=[u],
    )
    return jumps + body


def pairing_chi_s_direct(
    R: float, u: float, testfn: SmoothBump1D, cfg: KernelConfig = DEFAULT_CONFIG
) -> float:
    """<chi(R, u - .), -phi'> by quadrature (the oracle side of the pairing).

    Uses the smooth interior formula on the closed support interval, so the
    composite rule keeps full order despite the boundary jumps of chi.
    """
    _check_pairing_point(R)
    aR = abs(R)

    def f(s):
        v = u - np.asarray(s, float)
        return -np.exp(R / 2.0) * series_f(v * v - R * R, cfg) * testfn.deriv(s)

    return integrate(f, u - aR, u + aR, cfg.tail_tol * 10)


def pairing_h_s_direct(
    R: float, u: float, testfn: SmoothBump1D, cfg: KernelConfig = DEFAULT_CONFIG
) -> float:
    """<h(R, u - .), -phi'> by quadrature over the test function's support.

    Integrates branchwise (outer constant vs. interior formula) so that every
    smooth piece is evaluated with its own one-sided extension.
    """
    _check_pairing_point(R)
    aR = abs(R)
    lo, hi = testfn.support

    def outer(s):
        s = np.asarray(s, float)
        return -(-np.sign(u - s)) * testfn.deriv(s)

    def inner(s):
        s = np.asarray(s, float)
        return -_h_inner(R, u - s, cfg, panels=32) * testfn.deriv(s)

    tol = cfg.tail_tol * 10
    total = 0.0
    total += integrate(outer, lo, min(hi, u - aR), tol)
    total += integrate(inner, max(lo, u - aR), min(hi, u + aR), tol, points=[u])
    total += integrate(outer, max(lo, u + aR), hi, tol)
    return total
