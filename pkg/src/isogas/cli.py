"""Batch front-end: subcommands solve | kernel | verify | tartar | riemann | sweep.

Every subcommand reads a flat `key = value` config, writes CSV tables (one
provenance comment line with the config digest, then a header row, values at
17 significant digits) plus a JSON report, and renders matplotlib figures
alongside the delimited output unless --no-figures is given.  Exit status is
0 only if every invariant asserted by the subcommand held.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import figures
from .config import RunConfig, parse_config
from .errors import ConfigError, IsogasError
from .kernels import (
    DEFAULT_CONFIG,
    KernelConfig,
    chi_values,
    g_chi_values,
    g_h_values,
    h_values,
    sigma_values,
)
from .riemann import RiemannData, sample_fan, solve_riemann
from .viscous import InitialData, SolverConfig, Trajectory, positivity_certificate, run
from .weakform import (
    KernelPair,
    PowerPair,
    SampledTrajectory,
    SpaceTimeTestFunction,
    certify_on_trajectory,
    conservation_residual,
    entropy_inequality_residual,
    from_fan,
    from_viscous,
    strong_convergence_diagnostic,
    theta_diagnostic,
)
from .youngmeasure import (
    DiscreteMeasure,
    Mollifier,
    MollifierPair,
    compute_Y,
    D_of_R,
    dichotomy_check,
    mollifier_limit_I,
    polynomial_bump,
    support_reduction_classify,
)
from .kernels import EntropyGenerator

FMT = "%.17g"


def _write_csv(path: Path, digest: str, header: list[str], columns: list[np.ndarray]):
    rows = np.column_stack([np.asarray(c, float) for c in columns])
    with open(path, "w") as fh:
        fh.write(f"# config-digest: {digest}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FMT % v for v in row) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return float(obj)


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _solver_config(v: dict, eps: float | None = None) -> SolverConfig:
    return SolverConfig(
        eps=v["solver.eps"] if eps is None else eps,
        r=v["solver.r"],
        lam=v["solver.lambda"],
        dx=v["solver.dx"],
        domain_length=v["solver.domain_length"],
        dt_factor=v["solver.dt_factor"],
        t_final=v["solver.t_final"],
        bc=v["solver.bc"],
        mollify_width=v["solver.mollify_width"],
        time_scheme=v["solver.time_scheme"],
        inv_tol=v["solver.inv_tol"],
        weight_R=v["solver.weight_R"],
    )


def _initial_data(v: dict, cfg: SolverConfig) -> InitialData:
    x = cfg.grid()
    kind = v["init.kind"]
    jump = v["init.jump_x"]
    x0 = 0.5 * cfg.domain_length if jump is None else jump
    if kind == "constant":
        rho0 = np.full(x.size, v["init.rho0"])
        u0 = np.full(x.size, v["init.u0"])
    elif kind in ("riemann", "dam_break"):
        rho0 = np.where(x < x0, v["init.rho_l"], v["init.rho_r"])
        u0 = np.where(x < x0, v["init.u_l"], v["init.u_r"])
        if kind == "dam_break":
            u0 = np.zeros_like(x)
    elif kind == "sine":
        k = 2.0 * np.pi / cfg.domain_length
        rho0 = v["init.rho_mean"] + v["init.rho_amp"] * np.sin(k * x)
        u0 = v["init.u_amp"] * np.cos(k * x)
    else:  # gauss
        rho0 = v["init.rho0"] + v["init.rho_amp"] * np.exp(
            -((x - x0) ** 2) / (0.05 * cfg.domain_length) ** 2
        )
        u0 = np.full(x.size, v["init.u0"])
    return InitialData(rho0=rho0, u0=u0, c0=v["init.c0"])


def _save_solution_csvs(traj: Trajectory, out: Path, digest: str):
    x = traj.x
    for t, st in zip(traj.times, traj.states):
        name = f"solution_t{t:.6g}.csv"
        _write_csv(out / name, digest, ["x", "rho", "u", "m", "w", "z"],
                   [x, st.rho, st.u, st.m, st.w, st.z])


def _save_trajectory(traj: Trajectory, out: Path):
    np.savez(
        out / "trajectory.npz",
        x=traj.x,
        times=np.asarray(traj.times),
        rho=np.stack([s.rho for s in traj.states]),
        m=np.stack([s.m for s in traj.states]),
        eps=traj.cfg.eps,
        eps2=traj.cfg.eps2,
        dx=traj.cfg.dx,
        t_final=traj.cfg.t_final,
    )


def _solve_diagnostics(traj: Trajectory) -> dict:
    cert = positivity_certificate(traj)
    step_dts = np.diff(traj.step_times)
    return {
        "positivity": cert,
        "w_drift": traj.w_drift(),
        "z_drift": traj.z_drift(),
        "dissipation": {"value": traj.dissipation.value,
                        "weight_R": traj.dissipation.weight_R},
        "dt": traj.dt,
        "dt_final_step": float(step_dts[-1]) if step_dts.size else traj.dt,
        "n_steps": traj.n_steps,
        "eps": traj.cfg.eps,
        "eps1": traj.cfg.eps1,
        "eps2": traj.cfg.eps2,
        "invariants_ok": bool(cert["ok"]),
    }


def _run_solve_case(v: dict, out: Path, digest: str, eps: float | None = None,
                    render: bool = True) -> dict:
    cfg = _solver_config(v, eps)
    data = _initial_data(v, cfg)
    times = v["output.times"] or [cfg.t_final]
    traj = run(data, cfg, output_times=times)
    out.mkdir(parents=True, exist_ok=True)
    _save_solution_csvs(traj, out, digest)
    _save_trajectory(traj, out)
    diag = _solve_diagnostics(traj)
    _write_json(out / "diagnostics.json", diag)
    if render:
        figures.render_solution(traj, out / "solution.png")
        figures.render_margins(traj, out / "margins.png")
    diag["_traj"] = traj
    return diag


def cmd_solve(rc: RunConfig, out: Path, render: bool) -> int:
    diag = _run_solve_case(rc.values, out, rc.digest, render=render)
    return 0 if diag["invariants_ok"] else 1


def cmd_kernel(rc: RunConfig, out: Path, render: bool) -> int:
    v = rc.values
    kcfg = KernelConfig(max_terms=v["kernel.max_terms"], tail_tol=v["kernel.tail_tol"])
    rows = {"R": [], "u": [], "s": [], "chi": [], "h": [], "sigma": [],
            "G_chi": [], "G_h": []}
    for R in v["kernel.r_values"]:
        for u in v["kernel.u_values"]:
            for s in v["kernel.s_values"]:
                rows["R"].append(R)
                rows["u"].append(u)
                rows["s"].append(s)
                rows["chi"].append(float(chi_values(R, u, s, kcfg)))
                if u == s:
                    rows["h"].append(np.nan)
                    rows["sigma"].append(np.nan)
                else:
                    rows["h"].append(float(h_values(R, u, s, kcfg)))
                    rows["sigma"].append(float(sigma_values(R, u, s, kcfg)))
                rows["G_chi"].append(float(g_chi_values(R, u - s, kcfg)))
                rows["G_h"].append(float(g_h_values(R, u - s, kcfg)))
    out.mkdir(parents=True, exist_ok=True)
    cols = ["R", "u", "s", "chi", "h", "sigma", "G_chi", "G_h"]
    _write_csv(out / "kernel_table.csv", rc.digest, cols, [rows[c] for c in cols])
    if render:
        R0, u0 = v["kernel.r_values"][0], v["kernel.u_values"][0]
        s = np.linspace(u0 - 2 * abs(R0), u0 + 2 * abs(R0), 401)
        s = s[s != u0]
        figures.render_kernel_slice(
            R0, u0, s,
            chi_values(R0, u0, s, kcfg),
            h_values(R0, u0, s, kcfg, panels=24),
            sigma_values(R0, u0, s, kcfg, panels=24),
            out / "kernel.png",
        )
    return 0


def cmd_riemann(rc: RunConfig, out: Path, render: bool) -> int:
    v = rc.values
    data = RiemannData(v["riemann.rho_l"], v["riemann.u_l"],
                       v["riemann.rho_r"], v["riemann.u_r"])
    fan = solve_riemann(data)
    xi = np.linspace(v["riemann.xi_min"], v["riemann.xi_max"], v["riemann.samples"])
    rho, u = sample_fan(fan, xi)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "riemann.csv", rc.digest, ["x_over_t", "rho", "u"], [xi, rho, u])
    rh = fan.rankine_hugoniot_residual()
    ok = rh <= 1e-12 and fan.lax_admissible()
    _write_json(out / "riemann.json", {
        "middle": {"rho": fan.rho_m, "u": fan.u_m},
        "wave1": {"kind": fan.wave1.kind, "speeds": [fan.wave1.speed_lo, fan.wave1.speed_hi]},
        "wave2": {"kind": fan.wave2.kind, "speeds": [fan.wave2.speed_lo, fan.wave2.speed_hi]},
        "rankine_hugoniot_residual": rh,
        "lax_admissible": fan.lax_admissible(),
        "invariants_ok": ok,
    })
    if render:
        figures.render_riemann(xi, rho, u, out / "riemann.png")
    return 0 if ok else 1


def _load_sampled(run_dir: Path) -> SampledTrajectory:
    npz = np.load(run_dir / "trajectory.npz")
    return SampledTrajectory(x=npz["x"], times=npz["times"], rho=npz["rho"],
                             m=npz["m"], eps=float(npz["eps"]), eps2=float(npz["eps2"]))


def _testfn_battery(traj: SampledTrajectory, n: int, rng: np.random.Generator):
    x_lo, x_hi = float(traj.x[0]), float(traj.x[-1])
    T = float(traj.times[-1])
    span = x_hi - x_lo
    battery = []
    for _ in range(n):
        lo = x_lo + span * rng.uniform(0.02, 0.25)
        hi = x_hi - span * rng.uniform(0.02, 0.25)
        ramp = (hi - lo) * rng.uniform(0.15, 0.3)
        t_hi = T * rng.uniform(0.6, 0.95)
        battery.append(SpaceTimeTestFunction(
            x_lo=lo, x_hi=hi, t_lo=0.0, t_hi=t_hi,
            x_ramp=ramp, t_ramp=t_hi * rng.uniform(0.2, 0.4),
            amplitude=rng.uniform(0.5, 2.0), from_initial_line=True,
        ))
    return battery


def cmd_verify(rc: RunConfig, out: Path, render: bool, seed: int) -> int:
    v = rc.values
    traj = _load_sampled(Path(v["verify.run_dir"]))
    rng = np.random.default_rng(seed)
    battery = _testfn_battery(traj, v["verify.n_testfns"], rng)
    tol = v["verify.tol_constant"] * (traj.eps + traj.dx**2)

    report: dict = {"tolerance": tol, "eps": traj.eps, "dx": traj.dx}
    ok = True
    cons = []
    for i, phi in enumerate(battery):
        rm, rp = conservation_residual(traj, phi)
        good = abs(rm) <= tol and abs(rp) <= tol
        ok &= good
        cons.append({"testfn": i, "mass": rm, "momentum": rp, "ok": good})
    report["conservation"] = cons

    ent = []
    for B in v["verify.generators"]:
        cert = certify_on_trajectory(PowerPair(B), traj)
        if not cert.convex:
            ok = False
            ent.append({"pair": cert.pair.reference, "certificate": cert.certificate,
                        "ok": False, "residual": None, "testfn": None})
            continue
        for i, phi in enumerate(battery):
            val = entropy_inequality_residual(traj, cert, phi)
            good = val >= -tol
            ok &= good
            ent.append({"pair": cert.pair.reference, "certificate": cert.certificate,
                        "testfn": i, "residual": val, "ok": good})
    report["entropy"] = ent

    if v["verify.theta_pair"] != "none":
        if v["verify.theta_pair"] == "power":
            pair = PowerPair(2.0)
        else:
            gen = EntropyGenerator.from_callable(
                lambda s: np.exp(-2.0 * s * s), -6.0, 6.0, 601)
            pair = KernelPair(gen, nodes=65)
        report["theta"] = theta_diagnostic(traj, pair)

    report["invariants_ok"] = bool(ok)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify_report.json", report)
    if render:
        figures.render_verify(report, out / "verify.png")
    return 0 if ok else 1


def _read_measure_csv(path: Path) -> DiscreteMeasure:
    rows = np.loadtxt(path, delimiter=",", comments="#", skiprows=0, ndmin=2,
                      converters=None, encoding=None)
    return DiscreteMeasure(rows)


def cmd_tartar(rc: RunConfig, out: Path, render: bool, seed: int) -> int:
    v = rc.values
    path = Path(v["tartar.measure_csv"])
    try:
        nu = _read_measure_csv(path)
    except ValueError:
        # tolerate a header row
        rows = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
        nu = DiscreteMeasure(rows)

    rng = np.random.default_rng(seed)
    c2 = -0.15 - 0.2 * rng.uniform()
    c3 = 0.15 + 0.2 * rng.uniform()
    w23 = 0.45 + 0.15 * rng.uniform()
    phi2 = Mollifier.from_callable(polynomial_bump(c2, min(w23, 0.99 - abs(c2))))
    phi3 = Mollifier.from_callable(polynomial_bump(c3, min(w23, 0.99 - abs(c3))))
    pair = MollifierPair(phi2, phi3)

    ok = True
    report: dict = {"n_atoms": int(nu.atoms.shape[0])}
    from .youngmeasure import PowerEntropyPair, commutation_residual

    b_vals = v["tartar.b_values"]
    table = []
    for i, B1 in enumerate(b_vals):
        for B2 in b_vals[i + 1:]:
            res = commutation_residual(nu, PowerEntropyPair(B1), PowerEntropyPair(B2))
            table.append({"B1": B1, "B2": B2, "residual": res})
    report["commutation"] = table

    if nu.off_vacuum_indices().size <= 1 and len(b_vals) >= 2:
        residual, predicted = dichotomy_check(nu, b_vals[0], b_vals[1])
        rel = abs(residual - predicted) / max(abs(predicted), 1e-300)
        good = rel <= 1e-12 or predicted == residual == 0.0
        ok &= good
        report["dichotomy"] = {"residual": residual, "predicted": predicted,
                               "relative_error": rel, "ok": good}

    verdict = support_reduction_classify(nu)
    report["verdict"] = {
        "kind": verdict.kind, "alpha": verdict.alpha, "point": verdict.point,
        "violating_pair": verdict.violating_pair, "mstar_mass": verdict.mstar_mass,
        "reason": verdict.reason,
    }

    ident1 = abs(pair.B_minus + pair.B_plus - (1.0 - phi2.cdf(0.0)))
    ident2 = abs(pair.C_minus + pair.C_plus - phi2.cdf(0.0))
    good = ident1 <= 1e-10 and ident2 <= 1e-10
    ok &= good
    report["mollifier"] = {
        "B_minus": pair.B_minus, "C_minus": pair.C_minus,
        "B_plus": pair.B_plus, "C_plus": pair.C_plus,
        "Y": compute_Y(phi2, phi3),
        "complement_identity_errors": [ident1, ident2],
        "ok": good,
    }

    report["D"] = [{"R": R, "value": D_of_R(R),
                    "above_half_exp": bool(D_of_R(R) >= 0.5 * np.exp(R / 2.0) * (1 - 1e-13))}
                   for R in v["tartar.d_values"]]

    if v["tartar.lemma_sweep"]:
        one = lambda s: np.ones_like(np.asarray(s, dtype=float))  # noqa: E731
        psi = lambda s: np.cos(0.3 * np.asarray(s))  # noqa: E731
        res = mollifier_limit_I(one, one, psi, 0.1, 1.5, -1.0, 2.0, phi2, phi3)
        report["lemma_I"] = {
            "eps": list(res.eps), "values": list(res.values), "limit": res.limit,
            "final_error": float(res.errors()[-1]),
        }

    report["invariants_ok"] = bool(ok)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "tartar_report.json", report)
    if render:
        figures.render_tartar(nu, out / "tartar.png")
    return 0 if ok else 1


def cmd_sweep(rc: RunConfig, out: Path, render: bool, threads: int) -> int:
    v = rc.values
    eps_values = v["sweep.eps_values"]
    out.mkdir(parents=True, exist_ok=True)

    def one(eps: float) -> dict:
        sub = out / f"eps_{eps:g}"
        return _run_solve_case(v, sub, rc.digest, eps=eps, render=render)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            diags = list(pool.map(one, eps_values))
    else:
        diags = [one(e) for e in eps_values]

    trajs = [from_viscous(d.pop("_traj")) for d in diags]
    ok = all(d["invariants_ok"] for d in diags)

    diss = [d["dissipation"]["value"] for d in diags]
    spread = (max(diss) - min(diss)) / min(diss) if min(diss) > 0 else 0.0
    cauchy = strong_convergence_diagnostic(trajs)
    if len(eps_values) >= 3:
        for name, dists in cauchy.items():
            ok &= all(b < a for a, b in zip(dists[:-1], dists[1:]))

    report = {
        "eps_values": eps_values,
        "dissipation": diss,
        "dissipation_spread": spread,
        "cauchy": cauchy,
        "per_run": [{k: val for k, val in d.items()} for d in diags],
    }

    l1 = None
    if v["sweep.compare_riemann"] and v["init.kind"] in ("riemann", "dam_break"):
        u_l = 0.0 if v["init.kind"] == "dam_break" else v["init.u_l"]
        u_r = 0.0 if v["init.kind"] == "dam_break" else v["init.u_r"]
        rdata = RiemannData(v["init.rho_l"], u_l, v["init.rho_r"], u_r)
        fan = solve_riemann(rdata)
        x0 = v["init.jump_x"]
        x0 = 0.5 * v["solver.domain_length"] if x0 is None else x0
        jump = abs(rdata.rho_l - rdata.rho_r) + abs(
            rdata.rho_l * rdata.u_l - rdata.rho_r * rdata.u_r)
        l1 = []
        for tr in trajs:
            t = float(tr.times[-1])
            rex, uex = sample_fan(fan, (tr.x - x0) / t)
            d = float(np.sum(np.abs(tr.rho[-1] - rex)) * tr.dx
                      + np.sum(np.abs(tr.m[-1] - rex * uex)) * tr.dx)
            l1.append(d / jump)
        report["l1_vs_exact_per_jump"] = l1
        if len(l1) >= 3:
            ok &= all(b < a for a, b in zip(l1[:-1], l1[1:]))

    report["invariants_ok"] = bool(ok)
    _write_json(out / "sweep_report.json", report)
    _write_csv(out / "dissipation.csv", rc.digest, ["eps", "dissipation"],
               [eps_values, diss])
    names = list(cauchy)
    _write_csv(out / "cauchy_table.csv", rc.digest,
               ["halving"] + names,
               [list(range(1, len(cauchy[names[0]]) + 1))] + [cauchy[n] for n in names])
    if render:
        figures.render_sweep(eps_values, diss, cauchy, out / "sweep.png", l1_exact=l1)
    return 0 if ok else 1


def dispatch(rc: RunConfig, out_dir: str | Path, threads: int = 1, seed: int = 0,
             render: bool = True) -> int:
    """Run a validated config; artifacts land in out_dir; 0 iff invariants held."""
    out = Path(out_dir)
    try:
        if rc.mode == "solve":
            return cmd_solve(rc, out, render)
        if rc.mode == "kernel":
            return cmd_kernel(rc, out, render)
        if rc.mode == "riemann":
            return cmd_riemann(rc, out, render)
        if rc.mode == "verify":
            return cmd_verify(rc, out, render, seed)
        if rc.mode == "tartar":
            return cmd_tartar(rc, out, render, seed)
        if rc.mode == "sweep":
            return cmd_sweep(rc, out, render, threads)
        raise ConfigError(f"unknown subcommand {rc.mode!r}")
    except IsogasError as exc:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "error_report.json", {
            "error": type(exc).__name__,
            "message": str(exc),
            "mode": rc.mode,
        })
        return 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="isogas",
        description="numerical laboratory for isothermal (gamma = 1) gas dynamics",
    )
    ap.add_argument("subcommand",
                    choices=["solve", "kernel", "verify", "tartar", "riemann", "sweep"])
    ap.add_argument("--config", required=True, help="path to a key = value config file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0,
                    help="mollifier/test-function randomization only")
    ap.add_argument("--no-figures", action="store_true")
    args = ap.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        rc = parse_config(text, args.subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    code = dispatch(rc, args.out, threads=args.threads, seed=args.seed,
                    render=not args.no_figures)
    if code != 0:
        print("one or more asserted invariants failed; see the JSON report",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
