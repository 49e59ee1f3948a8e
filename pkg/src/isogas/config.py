"""Flat dotted-key run configuration: parsing, validation, defaults.

The format is one `key = value` assignment per line, `#` comments, no
sections.  Keys are validated against the registry of the requested
subcommand; unknown keys are errors (no silent typo tolerance), and numeric
constraints are enforced at parse time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "config_digest", "KEY_REGISTRY"]


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(f"expected a number, got {text!r}") from exc


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ValueError(f"expected an integer, got {text!r}") from exc


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _float_list(text: str) -> list[float]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return [_float(p) for p in items]


def _str(text: str) -> str:
    return text.strip()


def _choice(*options):
    def parse(text: str) -> str:
        val = text.strip()
        if val not in options:
            raise ValueError(f"expected one of {options}, got {val!r}")
        return val

    return parse


def _float_or(sentinel: str):
    def parse(text: str):
        val = text.strip()
        if val == sentinel:
            return None
        return _float(val)

    return parse


def _positive(name):
    def check(v):
        if v is not None and not v > 0:
            raise ValueError(f"{name} must be positive")

    return check


def _nonnegative(name):
    def check(v):
        if v is not None and v < 0:
            raise ValueError(f"{name} must be nonnegative")

    return check


def _greater_than_one(name):
    def check(v):
        if not v > 1.0:
            raise ValueError(f"{name} must satisfy > 1 (regularization exponent)")

    return check


REQUIRED = object()

_SOLVE_KEYS = {
    "solver.eps": (_float, REQUIRED, _positive("solver.eps")),
    "solver.r": (_float, 1.5, _greater_than_one("solver.r")),
    "solver.lambda": (_float, 1.0, _positive("solver.lambda")),
    "solver.dx": (_float, REQUIRED, _positive("solver.dx")),
    "solver.domain_length": (_float, REQUIRED, _positive("solver.domain_length")),
    "solver.dt_factor": (_float, 0.4, _positive("solver.dt_factor")),
    "solver.t_final": (_float, REQUIRED, _positive("solver.t_final")),
    "solver.bc": (_choice("periodic", "constant_extension"), "periodic", None),
    "solver.mollify_width": (_float_or("auto"), None, _nonnegative("solver.mollify_width")),
    "solver.time_scheme": (_choice("heun", "euler"), "heun", None),
    "solver.inv_tol": (_float, 0.05, _positive("solver.inv_tol")),
    "solver.weight_R": (_float_or("none"), None, _positive("solver.weight_R")),
    "init.kind": (_choice("constant", "riemann", "dam_break", "sine", "gauss"), REQUIRED, None),
    "init.rho_l": (_float, 0.7, _nonnegative("init.rho_l")),
    "init.u_l": (_float, 0.0, None),
    "init.rho_r": (_float, 0.12, _nonnegative("init.rho_r")),
    "init.u_r": (_float, 0.0, None),
    "init.rho0": (_float, 0.4, _nonnegative("init.rho0")),
    "init.u0": (_float, 0.0, None),
    "init.rho_mean": (_float, 0.4, _positive("init.rho_mean")),
    "init.rho_amp": (_float, 0.1, _nonnegative("init.rho_amp")),
    "init.u_amp": (_float, 0.2, None),
    "init.jump_x": (_float_or("center"), None, None),
    "init.c0": (_float_or("auto"), None, _positive("init.c0")),
    "output.times": (_float_list, None, None),
}

_KERNEL_KEYS = {
    "kernel.r_values": (_float_list, REQUIRED, None),
    "kernel.u_values": (_float_list, REQUIRED, None),
    "kernel.s_values": (_float_list, [0.0], None),
    "kernel.tail_tol": (_float, 1e-14, _positive("kernel.tail_tol")),
    "kernel.max_terms": (_int, 200, _positive("kernel.max_terms")),
}

_RIEMANN_KEYS = {
    "riemann.rho_l": (_float, REQUIRED, _positive("riemann.rho_l")),
    "riemann.u_l": (_float, REQUIRED, None),
    "riemann.rho_r": (_float, REQUIRED, _positive("riemann.rho_r")),
    "riemann.u_r": (_float, REQUIRED, None),
    "riemann.xi_min": (_float, -3.0, None),
    "riemann.xi_max": (_float, 3.0, None),
    "riemann.samples": (_int, 601, _positive("riemann.samples")),
}

_VERIFY_KEYS = {
    "verify.run_dir": (_str, REQUIRED, None),
    "verify.generators": (_float_list, [1.5, 2.0, 3.0], None),
    "verify.n_testfns": (_int, 5, _positive("verify.n_testfns")),
    "verify.theta_pair": (_choice("power", "kernel", "none"), "power", None),
    "verify.tol_constant": (_float, 1.0, _positive("verify.tol_constant")),
}

_TARTAR_KEYS = {
    "tartar.measure_csv": (_str, REQUIRED, None),
    "tartar.b_values": (_float_list, [2.0, 3.0], None),
    "tartar.lemma_sweep": (_bool, False, None),
    "tartar.d_values": (_float_list, [-0.5333333333333333, -1.0, -2.0, -5.0], None),
}

_SWEEP_KEYS = dict(_SOLVE_KEYS)
_SWEEP_KEYS.update({
    "sweep.eps_values": (_float_list, REQUIRED, None),
    "sweep.compare_riemann": (_bool, True, None),
})
_SWEEP_KEYS.pop("solver.eps")  # supplied per sweep member

KEY_REGISTRY = {
    "solve": _SOLVE_KEYS,
    "kernel": _KERNEL_KEYS,
    "riemann": _RIEMANN_KEYS,
    "verify": _VERIFY_KEYS,
    "tartar": _TARTAR_KEYS,
    "sweep": _SWEEP_KEYS,
}

_PATH_KEYS = ("verify.run_dir", "tartar.measure_csv")


@dataclass
class RunConfig:
    mode: str
    values: dict
    digest: str
    source: str = ""

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


def config_digest(text: str) -> str:
    canon = "\n".join(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_config(text: str, mode: str) -> RunConfig:
    """Parse and validate; raises ConfigError with a line number on failure."""
    if mode not in KEY_REGISTRY:
        raise ConfigError(f"unknown subcommand {mode!r}")
    registry = KEY_REGISTRY[mode]
    values: dict = {}
    seen: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.split("#", 1)[0].strip()
        if key not in registry:
            raise ConfigError(f"unknown key {key!r} for subcommand {mode!r}", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})",
                              line=lineno)
        seen[key] = lineno
        parser, _, validator = registry[key]
        try:
            parsed = parser(val)
            if validator is not None:
                validator(parsed)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", line=lineno) from None
        values[key] = parsed

    for key, (parser, default, validator) in registry.items():
        if key in values:
            continue
        if default is REQUIRED:
            raise ConfigError(f"missing required key {key!r} for subcommand {mode!r}")
        values[key] = default

    for key in _PATH_KEYS:
        if key in values and values[key] is not None:
            if not Path(values[key]).exists():
                raise ConfigError(f"{key}: path {values[key]!r} does not exist")

    return RunConfig(mode=mode, values=values, digest=config_digest(text), source=text)
