"""Group actions on sampled solutions of the entropy wave equation.

In the characteristic coordinates w = u + ln(rho), z = u - ln(rho) the entropy
equation reads eta_wz - A (eta_z - eta_w) = 0 with A = 1/4.  Five actions map
solutions to solutions:

    translate_w(c):  eta(w + c, z)
    translate_z(c):  eta(w, z + c)
    scale(c):        c * eta(w, z)
    boost(xi):       eta(e^{-xi} w, e^{xi} z) * exp(A w (1 - e^{-xi})
                                                    - A z (1 - e^{xi}))
    add_solution(b): eta + b

The invariant solution of the boost action is eta = e^{A (w - z)} f(w z).
Actions on sampled data read pre-images by bilinear interpolation and return
values on the largest subgrid whose pre-images stay inside the sampled
rectangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError
from .kernels import DEFAULT_CONFIG, KernelConfig, series_f

A_COEFF = 0.25

__all__ = [
    "A_COEFF",
    "GridFunction",
    "LieAction",
    "apply_lie_action",
    "wave_equation_residual",
    "invariant_solution",
]


@dataclass
class GridFunction:
    """Samples of a function on a rectangular (w, z) grid (uniform per axis)."""

    w: np.ndarray
    z: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, float)
        self.z = np.asarray(self.z, float)
        self.values = np.asarray(self.values, float)
        if self.values.shape != (self.w.size, self.z.size):
            raise DomainError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.w.size}, {self.z.size})"
            )
        if self.w.size < 2 or self.z.size < 2:
            raise DomainError("grid needs at least 2 points per axis")

    @property
    def dw(self) -> float:
        return float(self.w[1] - self.w[0])

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    def interp(self, wq: np.ndarray, zq: np.ndarray) -> np.ndarray:
        """Bilinear read at query points (arrays broadcast to a common shape)."""
        wq, zq = np.broadcast_arrays(np.asarray(wq, float), np.asarray(zq, float))
        eps_w = 1e-12 * max(1.0, abs(self.w[-1] - self.w[0]))
        eps_z = 1e-12 * max(1.0, abs(self.z[-1] - self.z[0]))
        if np.any(wq < self.w[0] - eps_w) or np.any(wq > self.w[-1] + eps_w):
            raise DomainError("interpolation read outside the sampled w-range")
        if np.any(zq < self.z[0] - eps_z) or np.any(zq > self.z[-1] + eps_z):
            raise DomainError("interpolation read outside the sampled z-range")
        fw = np.clip((wq - self.w[0]) / self.dw, 0.0, self.w.size - 1.0)
        fz = np.clip((zq - self.z[0]) / self.dz, 0.0, self.z.size - 1.0)
        iw = np.minimum(fw.astype(int), self.w.size - 2)
        iz = np.minimum(fz.astype(int), self.z.size - 2)
        aw, az = fw - iw, fz - iz
        v = self.values
        return (
            v[iw, iz] * (1 - aw) * (1 - az)
            + v[iw + 1, iz] * aw * (1 - az)
            + v[iw, iz + 1] * (1 - aw) * az
            + v[iw + 1, iz + 1] * aw * az
        )


Payload = Union[float, GridFunction]


@dataclass(frozen=True)
class LieAction:
    """One of the five solution-preserving actions; parameter per kind."""

    kind: str  # translate_w | translate_z | scale | boost | add_solution
    param: Payload

    KINDS = ("translate_w", "translate_z", "scale", "boost", "add_solution")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown action kind {self.kind!r}")
        if self.kind == "add_solution":
            if not isinstance(self.param, GridFunction):
                raise DomainError("add_solution takes a GridFunction payload")
        elif not np.isfinite(float(self.param)):
            raise DomainError(f"{self.kind} parameter must be finite")


def _axis_window(grid: np.ndarray, lo: float, hi: float) -> np.ndarray:
    eps = 1e-12 * max(1.0, abs(grid[-1] - grid[0]))
    return np.nonzero((grid >= lo - eps) & (grid <= hi + eps))[0]


def apply_lie_action(fn: GridFunction, action: LieAction) -> GridFunction:
    """Transform sampled solution data; output lives on the largest subgrid
    whose pre-image points fall inside the input rectangle."""
    if action.kind == "scale":
        return GridFunction(fn.w, fn.z, float(action.param) * fn.values)

    if action.kind == "add_solution":
        other = action.param
        if other.w.shape != fn.w.shape or other.z.shape != fn.z.shape or \
                not (np.allclose(other.w, fn.w) and np.allclose(other.z, fn.z)):
            raise DomainError("add_solution needs a payload sampled on the same grid")
        return GridFunction(fn.w, fn.z, fn.values + other.values)

    if action.kind == "translate_w":
        c = float(action.param)
        idx = _axis_window(fn.w, fn.w[0] - c, fn.w[-1] - c)
        if idx.size < 2:
            raise DomainError(f"translate_w({c}) leaves no sampled window")
        w_new = fn.w[idx]
        vals = fn.interp(w_new[:, None] + c, fn.z[None, :])
        return GridFunction(w_new, fn.z, vals)

    if action.kind == "translate_z":
        c = float(action.param)
        idx = _axis_window(fn.z, fn.z[0] - c, fn.z[-1] - c)
        if idx.size < 2:
            raise DomainError(f"translate_z({c}) leaves no sampled window")
        z_new = fn.z[idx]
        vals = fn.interp(fn.w[:, None], z_new[None, :] + c)
        return GridFunction(fn.w, z_new, vals)

    # boost
    xi = float(action.param)
    ew, ez = np.exp(-xi), np.exp(xi)
    w_pre, z_pre = fn.w * ew, fn.z * ez
    # valid output nodes: pre-image inside the sampled rectangle
    iw = _axis_window(w_pre, fn.w[0], fn.w[-1])
    iz = _axis_window(z_pre, fn.z[0], fn.z[-1])
    if iw.size < 2 or iz.size < 2:
        raise DomainError(f"boost({xi}) leaves no sampled window")
    w_new, z_new = fn.w[iw], fn.z[iz]
    base = fn.interp(w_new[:, None] * ew, z_new[None, :] * ez)
    gauge = np.exp(
        A_COEFF * w_new[:, None] * (1.0 - ew) - A_COEFF * z_new[None, :] * (1.0 - ez)
    )
    return GridFunction(w_new, z_new, base * gauge)


def wave_equation_residual(fn: GridFunction) -> np.ndarray:
    """Centered-difference residual eta_wz - A (eta_z - eta_w) on interior nodes."""
    v, dw, dz = fn.values, fn.dw, fn.dz
    eta_wz = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * dw * dz)
    eta_w = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * dw)
    eta_z = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * dz)
    return eta_wz - A_COEFF * (eta_z - eta_w)


def invariant_solution(
    w: np.ndarray, z: np.ndarray, cfg: KernelConfig = DEFAULT_CONFIG
) -> GridFunction:
    """The boost-invariant solution e^{A (w - z)} f(w z) sampled on a grid."""
    w = np.asarray(w, float)
    z = np.asarray(z, float)
    W, Z = np.meshgrid(w, z, indexing="ij")
    vals = np.exp(A_COEFF * (W - Z)) * series_f(W * Z, cfg)
    return GridFunction(w, z, vals)
