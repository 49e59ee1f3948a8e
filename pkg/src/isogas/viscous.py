"""Explicit solver for the parabolic regularization of isothermal gas dynamics.

The advanced fields are (rho, m) with m = rho u:

    rho_t + m_x              = eps rho_xx + 2 eps2 u_x
    m_t + (m u + rho)_x      = eps m_xx   + eps2 (u^2)_x + 2 eps2 (ln rho)_x

with eps2 = lambda * eps1, eps1 = eps^r (r > 1), and initial lift
rho|_{t=0} = lambda * rho0_mollified + 2 eps2.  Spatial derivatives are
second-order central; time stepping is Heun (or forward Euler) under the
parabolic restriction dt = dt_factor dx^2 / (2 eps).  The scheme uses no
limiters or clipping, so the density scaling rho -> lambda rho commutes with
stepping exactly up to rounding; positivity (rho >= 2 eps2) and the
characteristic-variable bounds (max w, min z) are monitored every step and
violations abort the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, StabilityError

__all__ = [
    "SolverConfig",
    "InitialData",
    "GridState",
    "DissipationReport",
    "Trajectory",
    "plateau_weight",
    "mollify_initial_data",
    "step",
    "run",
    "positivity_certificate",
    "energy_identity_residual",
]

POSITIVITY_SLACK = 1e-10  # accepted relative dip below the 2*eps2 floor


@dataclass(frozen=True)
class SolverConfig:
    eps: float
    dx: float
    domain_length: float
    t_final: float
    r: float = 1.5
    lam: float = 1.0
    dt_factor: float = 0.4
    bc: str = "periodic"  # periodic | constant_extension
    mollify_width: float | None = None  # None -> 2 * dx
    time_scheme: str = "heun"  # heun | euler
    inv_tol: float = 0.05  # abort threshold for max-w / min-z drift
    weight_R: float | None = None  # dissipation weight plateau radius; None -> 1
    eps1_override: float | None = None  # diagnostic variant (e.g. eps1 = 0)

    def __post_init__(self):
        if not (self.eps > 0 and self.dx > 0 and self.dt_factor > 0 and self.t_final > 0):
            raise DomainError("eps, dx, dt_factor, t_final must be positive")
        if not self.r > 1.0:
            raise DomainError("the regularization exponent must satisfy r > 1")
        if not self.lam > 0:
            raise DomainError("the density scaling lambda must be positive")
        if self.bc not in ("periodic", "constant_extension"):
            raise DomainError(f"unknown boundary condition {self.bc!r}")
        if self.time_scheme not in ("heun", "euler"):
            raise DomainError(f"unknown time scheme {self.time_scheme!r}")
        if self.domain_length < 2 * self.dx:
            raise DomainError("domain shorter than two cells")

    @property
    def eps1(self) -> float:
        if self.eps1_override is not None:
            return self.eps1_override
        return self.eps**self.r

    @property
    def eps2(self) -> float:
        return self.lam * self.eps1

    @property
    def dt(self) -> float:
        return self.dt_factor * self.dx * self.dx / (2.0 * self.eps)

    @property
    def n_cells(self) -> int:
        return int(round(self.domain_length / self.dx))

    @property
    def width(self) -> float:
        return 2.0 * self.dx if self.mollify_width is None else self.mollify_width

    def grid(self) -> np.ndarray:
        return self.dx * (np.arange(self.n_cells) + 0.5)


@dataclass
class InitialData:
    """Sampled (rho0, u0) with the growth constant and bounds of the data."""

    rho0: np.ndarray
    u0: np.ndarray
    c0: float | None = None
    M: float = field(init=False)
    u1: float = field(init=False)

    def __post_init__(self):
        self.rho0 = np.asarray(self.rho0, float)
        self.u0 = np.asarray(self.u0, float)
        if self.rho0.shape != self.u0.shape or self.rho0.ndim != 1:
            raise DomainError("rho0 and u0 must be 1-D arrays of equal length")
        if np.any(self.rho0 < 0):
            raise DomainError("initial density must be nonnegative")
        self.M = float(np.max(self.rho0))
        self.u1 = float(np.max(np.abs(self.u0)))
        pos = self.rho0 > 0
        if np.any(pos):
            need = np.max(np.abs(self.u0[pos]) / (1.0 + np.abs(np.log(self.rho0[pos]))))
        else:
            need = 0.0
        if self.c0 is None:
            self.c0 = float(need) if need > 0 else 1.0
        elif need > self.c0 * (1 + 1e-12):
            raise DomainError(
                f"|m0| <= c0 rho0 (1 + |ln rho0|) fails: needs c0 >= {need:.6g}"
            )


@dataclass
class GridState:
    t: float
    rho: np.ndarray
    m: np.ndarray
    dx: float
    bc: str
    ghosts: tuple[float, float, float, float] | None = None  # rho_l, rho_r, m_l, m_r

    @property
    def u(self) -> np.ndarray:
        return self.m / self.rho

    @property
    def w(self) -> np.ndarray:
        return self.u + np.log(self.rho)

    @property
    def z(self) -> np.ndarray:
        return self.u - np.log(self.rho)

    def _extend(self, f: np.ndarray, gl: float, gr: float) -> np.ndarray:
        if self.bc == "periodic":
            return np.concatenate([f[-1:], f, f[:1]])
        return np.concatenate([[gl], f, [gr]])

    def extended(self) -> tuple[np.ndarray, np.ndarray]:
        if self.bc == "periodic":
            return self._extend(self.rho, 0, 0), self._extend(self.m, 0, 0)
        rl, rr, ml, mr = self.ghosts
        return self._extend(self.rho, rl, rr), self._extend(self.m, ml, mr)

    def ddx(self, f_ext: np.ndarray) -> np.ndarray:
        return (f_ext[2:] - f_ext[:-2]) / (2.0 * self.dx)


@dataclass
class DissipationReport:
    """Weighted space-time integral of eps rho_x^2 / rho + eps rho u_x^2."""

    value: float
    weight_R: float | None

    def __post_init__(self):
        if self.value < 0:
            raise DomainError("dissipation functional must be nonnegative")


@dataclass
class Trajectory:
    cfg: SolverConfig
    times: list[float]
    states: list[GridState]
    step_times: np.ndarray
    positivity_margin: np.ndarray  # per step: min(rho) - 2*eps2
    positivity_argmin: np.ndarray
    max_w: np.ndarray
    min_z: np.ndarray
    dissipation: DissipationReport
    dt: float
    n_steps: int

    @property
    def final(self) -> GridState:
        return self.states[-1]

    @property
    def x(self) -> np.ndarray:
        return self.cfg.grid()

    def w_drift(self) -> float:
        return float(np.max(self.max_w) - self.max_w[0])

    def z_drift(self) -> float:
        return float(self.min_z[0] - np.min(self.min_z))


def plateau_weight(x: np.ndarray, R: float | None, center: float = 0.0) -> np.ndarray:
    """Weight with value 1 on [-R, R] and exponential tails e^{-|x|} beyond 2R,
    bridged by a C^2 monotone exponent; Psi == 1 when R is None."""
    x = np.asarray(x, float)
    if R is None:
        return np.ones_like(x)
    ax = np.abs(x - center)
    t = np.clip((ax - R) / R, 0.0, 1.0)  # 0 at R, 1 at 2R
    smooth = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)  # quintic smoothstep
    g = np.where(ax <= R, 0.0, np.where(ax >= 2 * R, ax, 2.0 * R * smooth))
    return np.exp(-g)


def mollify_initial_data(data: InitialData, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian moving average of (rho0, u0), then the density lift:
    rho -> lambda * rho_mollified + 2 eps2.  Averaging preserves the data
    bounds 0 <= rho0 <= M and |u0| <= u1."""
    rho, u = data.rho0, data.u0
    if rho.size != cfg.n_cells:
        raise DomainError(
            f"initial data has {rho.size} samples; grid has {cfg.n_cells} cells"
        )
    width = cfg.width
    if width > 0:
        half = max(1, int(math.ceil(4.0 * width / cfg.dx)))
        offs = np.arange(-half, half + 1)
        kern = np.exp(-0.5 * (offs * cfg.dx / width) ** 2)
        kern /= np.sum(kern)
        if cfg.bc == "periodic":
            pad_rho = np.concatenate([rho[-half:], rho, rho[:half]])
            pad_u = np.concatenate([u[-half:], u, u[:half]])
        else:
            pad_rho = np.concatenate([np.full(half, rho[0]), rho, np.full(half, rho[-1])])
            pad_u = np.concatenate([np.full(half, u[0]), u, np.full(half, u[-1])])
        rho = np.convolve(pad_rho, kern, mode="valid")
        u = np.convolve(pad_u, kern, mode="valid")
    rho_lift = cfg.lam * rho + 2.0 * cfg.eps2
    return rho_lift, np.array(u, dtype=float)


def _rhs(state: GridState, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    rho_e, m_e = state.extended()
    if np.any(rho_e <= 0.0):
        raise StabilityError(
            "nonpositive density inside a stage; reduce dt_factor or refine dx"
        )
    u_e = m_e / rho_e
    dx = state.dx
    eps, eps2 = cfg.eps, cfg.eps2

    def Dx(f):
        return (f[2:] - f[:-2]) / (2.0 * dx)

    def Dxx(f):
        return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)

    rhs_rho = -Dx(m_e) + eps * Dxx(rho_e) + 2.0 * eps2 * Dx(u_e)
    rhs_m = (
        -Dx(m_e * u_e + rho_e)
        + eps * Dxx(m_e)
        + eps2 * Dx(u_e * u_e)
        + 2.0 * eps2 * Dx(np.log(rho_e))
    )
    return rhs_rho, rhs_m


def _check_floor(rho: np.ndarray, cfg: SolverConfig):
    floor = 2.0 * cfg.eps2 * (1.0 - POSITIVITY_SLACK)
    if np.min(rho) < floor:
        i = int(np.argmin(rho))
        raise StabilityError(
            f"density {rho[i]:.6e} at cell {i} fell below the floor "
            f"2*eps2*(1-1e-10) = {floor:.6e}; reduce dt_factor (no clipping is done)"
        )


def step(state: GridState, cfg: SolverConfig, dt: float | None = None) -> GridState:
    """One explicit step; raises StabilityError if the positivity floor breaks."""
    dt = cfg.dt if dt is None else dt
    if dt > cfg.dt * (1 + 1e-9):
        raise DomainError(f"dt={dt:g} exceeds the parabolic restriction {cfg.dt:g}")
    k1_rho, k1_m = _rhs(state, cfg)
    if cfg.time_scheme == "euler":
        rho_new = state.rho + dt * k1_rho
        m_new = state.m + dt * k1_m
    else:
        stage = GridState(state.t + dt, state.rho + dt * k1_rho, state.m + dt * k1_m,
                          state.dx, state.bc, state.ghosts)
        k2_rho, k2_m = _rhs(stage, cfg)
        rho_new = state.rho + (dt / 2.0) * (k1_rho + k2_rho)
        m_new = state.m + (dt / 2.0) * (k1_m + k2_m)
    _check_floor(rho_new, cfg)
    return GridState(state.t + dt, rho_new, m_new, state.dx, state.bc, state.ghosts)


def run(
    data: InitialData,
    cfg: SolverConfig,
    output_times: list[float] | None = None,
    store_every: int | None = None,
    n_steps: int | None = None,
) -> Trajectory:
    """Integrate to t_final (or exactly n_steps), recording the a-priori
    bound margins every step and accumulating the dissipation functional."""
    rho0, u0 = mollify_initial_data(data, cfg)
    m0 = rho0 * u0
    ghosts = (rho0[0], rho0[-1], m0[0], m0[-1]) if cfg.bc == "constant_extension" else None
    state = GridState(0.0, rho0, m0, cfg.dx, cfg.bc, ghosts)

    x = cfg.grid()
    psi = plateau_weight(x, cfg.weight_R, center=0.5 * cfg.domain_length)
    dt = cfg.dt
    if n_steps is None:
        # clip the final step so every run lands exactly on t_final
        n_full = int(math.floor(cfg.t_final / dt + 1e-9))
        rem = cfg.t_final - n_full * dt
        dts = [dt] * n_full + ([rem] if rem > 1e-9 * dt else [])
        if not dts:
            dts = [cfg.t_final]
        n_steps = len(dts)
    else:
        dts = [dt] * n_steps
    wanted = sorted(set(output_times)) if output_times else [sum(dts)]

    two_eps2 = 2.0 * cfg.eps2
    t_hist = np.empty(n_steps + 1)
    margin = np.empty(n_steps + 1)
    argmin = np.empty(n_steps + 1, dtype=int)
    max_w = np.empty(n_steps + 1)
    min_z = np.empty(n_steps + 1)

    def record(k: int, st: GridState):
        t_hist[k] = st.t
        i = int(np.argmin(st.rho))
        margin[k] = st.rho[i] - two_eps2
        argmin[k] = i
        max_w[k] = np.max(st.w)
        min_z[k] = np.min(st.z)

    def dissipation_density(st: GridState) -> float:
        rho_e, m_e = st.extended()
        u_e = m_e / rho_e
        rho_x = st.ddx(rho_e)
        u_x = st.ddx(u_e)
        d = cfg.eps * rho_x**2 / st.rho + cfg.eps * st.rho * u_x**2
        return float(np.sum(psi * d) * cfg.dx)

    record(0, state)
    w_cap = max_w[0] + cfg.inv_tol
    z_cap = min_z[0] - cfg.inv_tol

    times: list[float] = []
    states: list[GridState] = []
    next_out = 0
    if wanted and wanted[0] <= 0.0:
        times.append(0.0)
        states.append(state)
        next_out = 1
    if store_every is not None and not times:
        times.append(0.0)
        states.append(state)

    diss = 0.0
    for k, dtk in enumerate(dts, start=1):
        diss += dissipation_density(state) * dtk  # left-endpoint rule in time
        state = step(state, cfg, dtk)
        record(k, state)
        if max_w[k] > w_cap or min_z[k] < z_cap:
            raise StabilityError(
                f"characteristic-variable bound drifted beyond inv_tol={cfg.inv_tol:g} "
                f"at t={state.t:.6g} (max w {max_w[k]:.6g}, min z {min_z[k]:.6g})"
            )
        stored = False
        if store_every is not None and k % store_every == 0:
            times.append(state.t)
            states.append(state)
            stored = True
        while next_out < len(wanted) and state.t >= wanted[next_out] - dt / 2.0:
            if not stored:
                times.append(state.t)
                states.append(state)
                stored = True
            next_out += 1

    if not states or states[-1] is not state:
        times.append(state.t)
        states.append(state)

    return Trajectory(
        cfg=cfg,
        times=times,
        states=states,
        step_times=t_hist,
        positivity_margin=margin,
        positivity_argmin=argmin,
        max_w=max_w,
        min_z=min_z,
        dissipation=DissipationReport(value=diss, weight_R=cfg.weight_R),
        dt=dt,
        n_steps=n_steps,
    )


def positivity_certificate(traj: Trajectory) -> dict:
    """Minimum of rho - 2 eps2 over all steps and cells, with its location."""
    if traj.positivity_margin.size == 0:
        raise DomainError("empty trajectory")
    k = int(np.argmin(traj.positivity_margin))
    floor = 2.0 * traj.cfg.eps2
    return {
        "min_margin": float(traj.positivity_margin[k]),
        "time": float(traj.step_times[k]),
        "cell": int(traj.positivity_argmin[k]),
        "floor": floor,
        "ok": bool(traj.positivity_margin[k] >= -POSITIVITY_SLACK * floor),
    }


def energy_identity_residual(
    traj: Trajectory,
    cfg: SolverConfig,
    window: tuple[float, float] | None = None,
    weight_R: float | None = None,
) -> float:
    """Space-time residual of the balance law for E = rho u^2/2 + 1 + rho ln rho - rho.

    Discretizes E_t + eps rho_x^2/rho + eps rho u_x^2 + J_x with a forward
    time difference between consecutive stored states and central space
    differences, integrates against the plateau weight, and returns the
    absolute value.  Needs a trajectory stored at every step.
    """
    if len(traj.states) < 2:
        raise DomainError("need a trajectory stored at every step")
    x = traj.x
    psi = plateau_weight(x, weight_R, center=0.5 * cfg.domain_length)
    t_lo, t_hi = (window if window is not None else (traj.times[0], traj.times[-1]))
    eps, eps2 = cfg.eps, cfg.eps2

    def energy(st: GridState) -> np.ndarray:
        return st.rho * st.u**2 / 2.0 + 1.0 + st.rho * np.log(st.rho) - st.rho

    total = 0.0
    for a, b in zip(traj.states[:-1], traj.states[1:]):
        if not (t_lo - 1e-12 <= a.t and b.t <= t_hi + 1e-12):
            continue
        dt = b.t - a.t
        rho_e, m_e = a.extended()
        u_e = m_e / rho_e
        rho_x = a.ddx(rho_e)
        u_x = a.ddx(u_e)
        diss = eps * rho_x**2 / a.rho + eps * a.rho * u_x**2
        flux_e = (
            rho_e * u_e**3 / 2.0
            + u_e * rho_e * np.log(rho_e)
            - 2.0 * eps2 * u_e * np.log(rho_e)
            - eps2 * u_e**3 / 3.0
        )
        # the two eps-terms of the flux need extended derivatives of their own
        rho_ee = np.concatenate([rho_e[:1], rho_e, rho_e[-1:]])
        u_ee = np.concatenate([u_e[:1], u_e, u_e[-1:]])
        if a.bc == "periodic":
            rho_ee = np.concatenate([a.rho[-2:], a.rho, a.rho[:2]])
            u_ee = np.concatenate([a.u[-2:], a.u, a.u[:2]])
        rho_x_e = (rho_ee[2:] - rho_ee[:-2]) / (2 * a.dx)
        ke_x_e = ((rho_ee * u_ee**2 / 2.0)[2:] - (rho_ee * u_ee**2 / 2.0)[:-2]) / (2 * a.dx)
        flux_e = flux_e - eps * rho_x_e * np.log(rho_e) - eps * ke_x_e
        J_x = (flux_e[2:] - flux_e[:-2]) / (2.0 * a.dx)
        resid = (energy(b) - energy(a)) / dt + diss + J_x
        total += float(np.sum(psi * resid) * a.dx) * dt
    return abs(total)
