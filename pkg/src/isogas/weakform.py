"""Weak-form and entropy-inequality verification on sampled trajectories.

Residuals are space-time trapezoid sums aligned to the solver grid:

    mass     :  iint (rho phi_t + m phi_x) + int rho(.,t0) phi(.,t0)
    momentum :  iint (m phi_t + (m^2/rho + rho) phi_x) + int m(.,t0) phi(.,t0)
    entropy  :  iint (eta phi_t + q phi_x) + int eta(.,t0) phi(.,t0)   (>= -tol)

Entropy pairs come in two flavours: kernel pairs generated from a weight psi
(exercising the convolution machinery) and closed-form power pairs
eta = rho^B e^{A u}, A = sqrt(B (B-1)), whose flux here is the
compatibility-consistent q = (u + (B-1)/A) eta.  Inequality tests demand a
numerically certified convex pair; on desk-scale state ranges the power pairs
certify and the kernel pairs do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .kernels import DEFAULT_CONFIG, EntropyGenerator, KernelConfig, eta_values, q_values
from .riemann import WaveFan, sample_fan
from .viscous import Trajectory

__all__ = [
    "SampledTrajectory",
    "SpaceTimeTestFunction",
    "PowerPair",
    "KernelPair",
    "CertifiedPair",
    "certify_pair",
    "certify_on_trajectory",
    "from_viscous",
    "from_fan",
    "conservation_residual",
    "entropy_inequality_residual",
    "theta_diagnostic",
    "strong_convergence_diagnostic",
    "F_BATTERY",
]

CONVEXITY_FLOOR = -1e-8


@dataclass
class SampledTrajectory:
    """(rho, m) snapshots on a fixed grid at increasing times."""

    x: np.ndarray
    times: np.ndarray
    rho: np.ndarray  # shape (T, N)
    m: np.ndarray  # shape (T, N)
    eps: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.times = np.asarray(self.times, float)
        self.rho = np.asarray(self.rho, float)
        self.m = np.asarray(self.m, float)
        if self.rho.shape != (self.times.size, self.x.size) or self.m.shape != self.rho.shape:
            raise DomainError("field shapes must be (n_times, n_cells)")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def u(self) -> np.ndarray:
        return self.m / self.rho


def from_viscous(traj: Trajectory) -> SampledTrajectory:
    return SampledTrajectory(
        x=traj.x,
        times=np.array(traj.times),
        rho=np.stack([s.rho for s in traj.states]),
        m=np.stack([s.m for s in traj.states]),
        eps=traj.cfg.eps,
        eps2=traj.cfg.eps2,
    )


def from_fan(
    fan: WaveFan, x: np.ndarray, x0: float, times: np.ndarray, t_floor: float = 1e-9
) -> SampledTrajectory:
    """Exact Riemann fan sampled on the grid (reference trajectory)."""
    x = np.asarray(x, float)
    times = np.asarray(times, float)
    rho = np.empty((times.size, x.size))
    m = np.empty_like(rho)
    for k, t in enumerate(times):
        r, u = sample_fan(fan, (x - x0) / max(t, t_floor))
        rho[k], m[k] = r, r * u
    return SampledTrajectory(x=x, times=times, rho=rho, m=m)


# --------------------------------------------------------------------------
# test functions
# --------------------------------------------------------------------------


def _smoothstep(y):
    """C-infinity transition 0 -> 1 on [0, 1] (all derivatives vanish at ends),
    so trapezoid sums against it superconverge (Euler-Maclaurin)."""
    y = np.asarray(y, float)
    inside = (y > 0.0) & (y < 1.0)
    ys = np.where(inside, y, 0.5)
    a = np.exp(-1.0 / ys)
    b = np.exp(-1.0 / (1.0 - ys))
    val = a / (a + b)
    return np.where(y <= 0.0, 0.0, np.where(y >= 1.0, 1.0, val))


def _smoothstep_d(y):
    y = np.asarray(y, float)
    inside = (y > 0.0) & (y < 1.0)
    ys = np.where(inside, y, 0.5)
    a = np.exp(-1.0 / ys)
    b = np.exp(-1.0 / (1.0 - ys))
    d = a * b * (1.0 / ys**2 + 1.0 / (1.0 - ys) ** 2) / (a + b) ** 2
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class SpaceTimeTestFunction:
    """C^2 product test function phi(x, t) = amp * X(x) * T(t).

    X is a smoothstep plateau bump on [x_lo, x_hi] with ramps of length
    x_ramp; T likewise on [t_lo, t_hi] with ramps t_ramp.  Setting
    t_lo = 0 with from_initial_line=True starts T at 1 (phi picks up the
    initial-line term); otherwise T ramps up from 0 inside (t_lo, t_hi).
    """

    x_lo: float
    x_hi: float
    t_lo: float
    t_hi: float
    x_ramp: float
    t_ramp: float
    amplitude: float = 1.0
    from_initial_line: bool = False

    def __post_init__(self):
        if self.x_hi - self.x_lo <= 2 * self.x_ramp or self.t_hi <= self.t_lo:
            raise DomainError("degenerate test-function support")

    @property
    def nonnegative(self) -> bool:
        return self.amplitude >= 0.0

    @property
    def support_box(self) -> tuple[float, float, float, float]:
        return self.x_lo, self.x_hi, self.t_lo, self.t_hi

    def _x_parts(self, x):
        up = _smoothstep((x - self.x_lo) / self.x_ramp)
        dn = _smoothstep((self.x_hi - x) / self.x_ramp)
        dup = _smoothstep_d((x - self.x_lo) / self.x_ramp) / self.x_ramp
        ddn = -_smoothstep_d((self.x_hi - x) / self.x_ramp) / self.x_ramp
        return up * dn, dup * dn + up * ddn

    def _t_parts(self, t):
        dn = _smoothstep((self.t_hi - t) / self.t_ramp)
        ddn = -_smoothstep_d((self.t_hi - t) / self.t_ramp) / self.t_ramp
        if self.from_initial_line:
            up, dup = np.ones_like(dn), np.zeros_like(dn)
        else:
            up = _smoothstep((t - self.t_lo) / self.t_ramp)
            dup = _smoothstep_d((t - self.t_lo) / self.t_ramp) / self.t_ramp
        inside = (t >= self.t_lo - 1e-300) & (t <= self.t_hi)
        return np.where(inside, up * dn, 0.0), np.where(inside, dup * dn + up * ddn, 0.0)

    def value(self, x, t):
        X, _ = self._x_parts(np.asarray(x, float))
        T, _ = self._t_parts(np.asarray(t, float))
        return self.amplitude * X * T

    def phi_x(self, x, t):
        _, dX = self._x_parts(np.asarray(x, float))
        T, _ = self._t_parts(np.asarray(t, float))
        return self.amplitude * dX * T

    def phi_t(self, x, t):
        X, _ = self._x_parts(np.asarray(x, float))
        _, dT = self._t_parts(np.asarray(t, float))
        return self.amplitude * X * dT


def _check_support(traj: SampledTrajectory, phi: SpaceTimeTestFunction):
    x_lo, x_hi, t_lo, t_hi = phi.support_box
    if x_lo < traj.x[0] - 1e-12 or x_hi > traj.x[-1] + 1e-12:
        raise DomainError("test function support exceeds the spatial domain")
    if t_lo < -1e-12 or t_hi > traj.times[-1] + 1e-12:
        raise DomainError("test function support exceeds the stored time range")


def _spacetime_sum(traj: SampledTrajectory, cell_vals: np.ndarray) -> float:
    """Trapezoid in t, cell sum in x (phi vanishes near the edges)."""
    inner = np.sum(cell_vals, axis=1) * traj.dx
    return float(np.trapezoid(inner, traj.times))


def _weak_pairing(
    traj: SampledTrajectory,
    dens: np.ndarray,
    flux: np.ndarray,
    phi: SpaceTimeTestFunction,
) -> float:
    """iint (dens phi_t + flux phi_x) + int dens(., t0) phi(., t0).

    The phi_t term pairs time-slab averages of the density against exact
    increments of phi, so it telescopes exactly against the initial-line term
    wherever the density is constant in time.
    """
    tt = traj.times[:, None]
    xx = traj.x[None, :]
    phi_vals = phi.value(xx, tt)
    dphi = phi_vals[1:] - phi_vals[:-1]
    avg = 0.5 * (dens[1:] + dens[:-1])
    total = float(np.sum(avg * dphi) * traj.dx)
    total += _spacetime_sum(traj, flux * phi.phi_x(xx, tt))
    total += float(np.sum(dens[0] * phi_vals[0]) * traj.dx)
    return total


def conservation_residual(
    traj: SampledTrajectory, phi: SpaceTimeTestFunction
) -> tuple[float, float]:
    """Weak-form residuals (mass, momentum) against one test function."""
    _check_support(traj, phi)
    res_mass = _weak_pairing(traj, traj.rho, traj.m, phi)
    res_mom = _weak_pairing(traj, traj.m, traj.m * traj.u + traj.rho, phi)
    return res_mass, res_mom


# --------------------------------------------------------------------------
# entropy pairs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerPair:
    """Closed-form weak pair eta = rho^B e^{A u}, q = (u + (B-1)/A) eta.

    The flux is the one consistent with the pair relations
    q_m = 2 u eta_m + eta_rho, q_rho = (1 - u^2) eta_m (checked analytically:
    q_m = (B + A u) rho^{B-1} e^{A u} both ways).
    """

    B: float

    def __post_init__(self):
        if not self.B > 1.0:
            raise DomainError("power pairs need B > 1")

    @property
    def A(self) -> float:
        return math.sqrt(self.B * (self.B - 1.0))

    @property
    def reference(self) -> str:
        return f"power(B={self.B:g})"

    def eta(self, rho, m):
        u = np.asarray(m, float) / np.asarray(rho, float)
        return rho**self.B * np.exp(self.A * u)

    def q(self, rho, m):
        u = np.asarray(m, float) / np.asarray(rho, float)
        return (u + (self.B - 1.0) / self.A) * self.eta(rho, m)

    def derivs(self, rho, m):
        """Analytic (eta_rho, eta_m, eta_rr, eta_mm, eta_rm, q_m)."""
        rho = np.asarray(rho, float)
        u = np.asarray(m, float) / rho
        A, B = self.A, self.B
        core = rho ** (B - 1.0) * np.exp(A * u)
        eta_m = A * core
        eta_r = (B - A * u) * core
        eta_mm = A * A * core / rho
        eta_rm = A * (B - 1.0 - A * u) * core / rho
        eta_rr = (A * u + (B - A * u) * (B - 1.0 - A * u)) * core / rho
        q_m = (B + A * u) * core
        return eta_r, eta_m, eta_rr, eta_mm, eta_rm, q_m


@dataclass
class KernelPair:
    """Entropy pair generated from a weight psi by kernel convolution."""

    gen: EntropyGenerator
    cfg: KernelConfig = field(default_factory=lambda: DEFAULT_CONFIG)
    nodes: int = 129
    name: str = "kernel"

    @property
    def reference(self) -> str:
        return f"kernel({self.name})"

    def eta(self, rho, m):
        rho = np.asarray(rho, float)
        return eta_values(self.gen, np.log(rho), np.asarray(m, float) / rho,
                          self.cfg, nodes=self.nodes)

    def q(self, rho, m):
        rho = np.asarray(rho, float)
        return q_values(self.gen, np.log(rho), np.asarray(m, float) / rho,
                        self.cfg, nodes=self.nodes)

    def derivs(self, rho, m):
        """Finite-difference (eta_rho, eta_m, eta_rr, eta_mm, eta_rm, q_m)."""
        rho = np.asarray(rho, float)
        m = np.asarray(m, float)
        dr = 1e-4 * max(float(np.max(rho)), 1e-6)
        dm = 1e-4 * max(float(np.max(np.abs(m))), 1e-2)
        e = self.eta
        eta_r = (e(rho + dr, m) - e(rho - dr, m)) / (2 * dr)
        eta_m = (e(rho, m + dm) - e(rho, m - dm)) / (2 * dm)
        e0 = e(rho, m)
        eta_rr = (e(rho + dr, m) - 2 * e0 + e(rho - dr, m)) / dr**2
        eta_mm = (e(rho, m + dm) - 2 * e0 + e(rho, m - dm)) / dm**2
        eta_rm = (
            e(rho + dr, m + dm) - e(rho + dr, m - dm)
            - e(rho - dr, m + dm) + e(rho - dr, m - dm)
        ) / (4 * dr * dm)
        q_m = (self.q(rho, m + dm) - self.q(rho, m - dm)) / (2 * dm)
        return eta_r, eta_m, eta_rr, eta_mm, eta_rm, q_m


@dataclass
class CertifiedPair:
    """A pair plus its convexity certificate over a probe grid."""

    pair: object
    certificate: float  # min eigenvalue of the (rho, m)-Hessian over probes
    rho_range: tuple[float, float]
    m_range: tuple[float, float]

    @property
    def convex(self) -> bool:
        return self.certificate >= CONVEXITY_FLOOR


def certify_pair(
    pair, rho_range: tuple[float, float], m_range: tuple[float, float], n: int = 15
) -> CertifiedPair:
    """Second-difference Hessian probe of eta over the realized state box."""
    rho = np.linspace(*rho_range, n)
    mm = np.linspace(*m_range, n)
    RR, MM = np.meshgrid(rho, mm, indexing="ij")
    dr = 1e-5 * (rho_range[1] - rho_range[0] + 1e-12)
    dm = 1e-5 * (m_range[1] - m_range[0] + 1e-12)
    e = pair.eta
    e0 = e(RR, MM)
    h_rr = (e(RR + dr, MM) - 2 * e0 + e(RR - dr, MM)) / dr**2
    h_mm = (e(RR, MM + dm) - 2 * e0 + e(RR, MM - dm)) / dm**2
    h_rm = (
        e(RR + dr, MM + dm) - e(RR + dr, MM - dm)
        - e(RR - dr, MM + dm) + e(RR - dr, MM - dm)
    ) / (4 * dr * dm)
    tr = h_rr + h_mm
    disc = np.sqrt(np.maximum(tr * tr - 4 * (h_rr * h_mm - h_rm * h_rm), 0.0))
    min_eig = float(np.min(0.5 * (tr - disc)))
    return CertifiedPair(pair=pair, certificate=min_eig,
                         rho_range=rho_range, m_range=m_range)


def certify_on_trajectory(pair, traj: SampledTrajectory, n: int = 15) -> CertifiedPair:
    pad_r = 0.02 * (np.max(traj.rho) - np.min(traj.rho) + 1e-12)
    pad_m = 0.02 * (np.max(traj.m) - np.min(traj.m) + 1e-12)
    return certify_pair(
        pair,
        (float(np.min(traj.rho) - pad_r), float(np.max(traj.rho) + pad_r)),
        (float(np.min(traj.m) - pad_m), float(np.max(traj.m) + pad_m)),
        n=n,
    )


def entropy_inequality_residual(
    traj: SampledTrajectory, cert: CertifiedPair, phi: SpaceTimeTestFunction
) -> float:
    """iint (eta phi_t + q phi_x) + int eta0 phi(., t0); nonnegative (within
    discretization tolerance) for certified convex pairs."""
    if not cert.convex:
        raise PreconditionError(
            f"pair {getattr(cert.pair, 'reference', '?')} failed the convexity "
            f"certificate (min eigenvalue {cert.certificate:.3e})"
        )
    if not phi.nonnegative:
        raise PreconditionError("entropy inequality tests need phi >= 0")
    _check_support(traj, phi)
    eta = cert.pair.eta(traj.rho, traj.m)
    q = cert.pair.q(traj.rho, traj.m)
    return _weak_pairing(traj, eta, q, phi)


def theta_diagnostic(traj: SampledTrajectory, pair, max_frames: int = 24) -> dict:
    """Surrogate norms for the entropy-production decomposition of a viscous run.

    Returns the L2 norm of eps * eta_x (must vanish with eps), the L1 norm of
    the quadratic-form term eps [eta_rr rho_x^2 + 2 eta_rm rho_x m_x +
    eta_mm m_x^2] (bounded-measure part), and the L2 norm of the eps2 terms
    eps2 u_x (q_m + eta_rho) - 2 eps2 rho_x eta_m / rho (must vanish).
    """
    if traj.eps == 0.0:
        raise PreconditionError("theta diagnostic needs a viscous trajectory")
    stride = max(1, traj.times.size // max_frames)
    idx = np.arange(0, traj.times.size, stride)
    if idx[-1] != traj.times.size - 1:
        idx = np.append(idx, traj.times.size - 1)
    rho, m = traj.rho[idx], traj.m[idx]
    times = traj.times[idx]
    dx = traj.dx
    rho_x = (np.roll(rho, -1, axis=1) - np.roll(rho, 1, axis=1)) / (2 * dx)
    m_x = (np.roll(m, -1, axis=1) - np.roll(m, 1, axis=1)) / (2 * dx)
    rho_x[:, [0, -1]] = 0.0
    m_x[:, [0, -1]] = 0.0
    u_x = (m_x - (m / rho) * rho_x) / rho
    eta_r, eta_m, eta_rr, eta_mm, eta_rm, q_m = pair.derivs(rho, m)

    def norm_l2(f):
        inner = np.sum(f * f, axis=1) * dx
        return math.sqrt(max(float(np.trapezoid(inner, times)), 0.0))

    def norm_l1(f):
        inner = np.sum(np.abs(f), axis=1) * dx
        return float(np.trapezoid(inner, times))

    eta_x = eta_r * rho_x + eta_m * m_x
    quad = traj.eps * (eta_rr * rho_x**2 + eta_mm * m_x**2 + 2 * eta_rm * rho_x * m_x)
    eps2_terms = traj.eps2 * u_x * (q_m + eta_r) - 2 * traj.eps2 * rho_x * eta_m / rho
    return {
        "eps_eta_x_l2": norm_l2(traj.eps * eta_x),
        "quadratic_l1": norm_l1(quad),
        "eps2_terms_l2": norm_l2(eps2_terms),
        "pair": getattr(pair, "reference", "?"),
    }


F_BATTERY = {
    "rho": lambda rho, m: rho,
    "m": lambda rho, m: m,
    "kinetic": lambda rho, m: m * m / rho,
    "W": lambda rho, m: rho * np.exp(m / rho),
    "Z": lambda rho, m: rho * np.exp(-m / rho),
}


def strong_convergence_diagnostic(
    trajs: list[SampledTrajectory], battery: dict | None = None
) -> dict:
    """L1 distances of F(final state) between consecutive sweep members."""
    if len(trajs) < 2:
        raise DomainError("need at least two trajectories")
    x0 = trajs[0].x
    for t in trajs[1:]:
        if t.x.shape != x0.shape or not np.allclose(t.x, x0):
            raise DomainError("sweep members must share a common grid")
    battery = F_BATTERY if battery is None else battery
    table: dict[str, list[float]] = {}
    for name, F in battery.items():
        dists = []
        for a, b in zip(trajs[:-1], trajs[1:]):
            fa = F(a.rho[-1], a.m[-1])
            fb = F(b.rho[-1], b.m[-1])
            dists.append(float(np.sum(np.abs(fa - fb)) * a.dx))
        table[name] = dists
    return table
