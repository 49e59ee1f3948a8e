"""Matplotlib renderings written next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_solution(traj, out: Path):
    x = traj.x
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    for t, st in zip(traj.times, traj.states):
        axes[0, 0].plot(x, st.rho, lw=1, label=f"t={t:.3g}")
        axes[0, 1].plot(x, st.u, lw=1)
        axes[1, 0].plot(x, st.w, lw=1)
        axes[1, 1].plot(x, st.z, lw=1)
    axes[0, 0].set_ylabel("rho")
    axes[0, 1].set_ylabel("u")
    axes[1, 0].set_ylabel("w = u + ln rho")
    axes[1, 1].set_ylabel("z = u - ln rho")
    for ax in axes[1]:
        ax.set_xlabel("x")
    if len(traj.times) <= 8:
        axes[0, 0].legend(fontsize=7)
    _save(fig, out)


def render_margins(traj, out: Path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(traj.step_times, traj.positivity_margin, lw=1)
    axes[0].axhline(0.0, color="k", lw=0.6)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("min rho - 2 eps2")
    axes[1].plot(traj.step_times, traj.max_w - traj.max_w[0], lw=1, label="max w drift")
    axes[1].plot(traj.step_times, traj.min_z - traj.min_z[0], lw=1, label="min z drift")
    axes[1].set_xlabel("t")
    axes[1].legend(fontsize=8)
    _save(fig, out)


def render_kernel_slice(R: float, u: float, s: np.ndarray, chi, h, sigma, out: Path):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(s, chi, label="chi")
    ax.plot(s, h, label="h")
    ax.plot(s, sigma, label="sigma")
    ax.axvline(u - abs(R), color="k", lw=0.5, ls="--")
    ax.axvline(u + abs(R), color="k", lw=0.5, ls="--")
    ax.set_xlabel("s")
    ax.set_title(f"kernel slice at R={R:g}, u={u:g}")
    ax.legend(fontsize=8)
    _save(fig, out)


def render_riemann(xi: np.ndarray, rho: np.ndarray, u: np.ndarray, out: Path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(xi, rho, lw=1.2)
    axes[0].set_xlabel("x/t")
    axes[0].set_ylabel("rho")
    axes[1].plot(xi, u, lw=1.2)
    axes[1].set_xlabel("x/t")
    axes[1].set_ylabel("u")
    _save(fig, out)


def render_verify(report: dict, out: Path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    cons = report.get("conservation", [])
    if cons:
        idx = np.arange(len(cons))
        axes[0].bar(idx - 0.2, [abs(c["mass"]) for c in cons], width=0.4, label="|mass|")
        axes[0].bar(idx + 0.2, [abs(c["momentum"]) for c in cons], width=0.4,
                    label="|momentum|")
        axes[0].set_yscale("log")
        axes[0].set_xlabel("test function")
        axes[0].legend(fontsize=8)
        axes[0].set_title("weak-form residuals")
    ent = report.get("entropy", [])
    if ent:
        vals = [e["residual"] for e in ent]
        axes[1].bar(np.arange(len(vals)), vals)
        axes[1].axhline(0.0, color="k", lw=0.6)
        axes[1].set_xlabel("pair x test function")
        axes[1].set_title("entropy-inequality residuals")
    _save(fig, out)


def render_tartar(measure, out: Path):
    fig, ax = plt.subplots(figsize=(5.5, 5))
    W, Z, w = measure.W, measure.Z, measure.weights
    off = W * Z > 0
    ax.scatter(W[off], Z[off], s=400 * w[off] + 10, color="C3", label="off-vacuum")
    ax.scatter(W[~off], Z[~off], s=400 * w[~off] + 10, color="C0", label="vacuum")
    for Ws, Zs in zip(W[off], Z[off]):
        ax.add_patch(plt.Rectangle((0, 0), Ws, 1.0 / Ws, fill=False, ls="--", lw=0.7,
                                   color="C3"))
        ax.add_patch(plt.Rectangle((0, 0), 1.0 / Zs, Zs, fill=False, ls=":", lw=0.7,
                                   color="C3"))
    ax.set_xlabel("W")
    ax.set_ylabel("Z")
    ax.legend(fontsize=8)
    ax.set_title("atoms and exclusion regions")
    _save(fig, out)


def render_sweep(eps_values, dissipation, cauchy_table: dict, out: Path,
                 l1_exact=None):
    ncols = 3 if l1_exact is not None else 2
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 3.4))
    axes[0].bar([f"{e:g}" for e in eps_values], dissipation)
    axes[0].set_xlabel("eps")
    axes[0].set_title("dissipation functional")
    for name, dists in cauchy_table.items():
        axes[1].plot(range(1, len(dists) + 1), dists, "o-", label=name, lw=1)
    axes[1].set_yscale("log")
    axes[1].set_xlabel("halving step")
    axes[1].set_title("Cauchy L1 distances")
    axes[1].legend(fontsize=7)
    if l1_exact is not None:
        axes[2].plot([f"{e:g}" for e in eps_values], l1_exact, "o-")
        axes[2].set_yscale("log")
        axes[2].set_xlabel("eps")
        axes[2].set_title("L1 distance to exact fan")
    _save(fig, out)
