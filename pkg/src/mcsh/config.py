"""Run configuration: strict JSON schema, defaults, and the named
initial-data generators.

The schema rejects unknown keys everywhere: a silent typo in one of the
regularity indices would invalidate every admissibility claim computed
from the file, so nothing is ignored.  All randomness downstream is
seeded from the data spec, which makes a config file plus the recorded
library versions a complete reproducibility record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .model import FieldState, GaussSolveInfo, PhysParams, make_compatible_data
from .spectral import (
    Grid2D,
    SpectralField,
    as_field,
    gaussian_bump,
    random_complex_field,
    random_real_field,
)

GENERATORS = ("zero", "gaussian-bump", "plane-wave", "random-band")
SCHEMES = ("etdrk4", "midpoint")


@dataclass(frozen=True)
class DataSpec:
    generator: str = "zero"
    params: dict = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    period: float = 2.0 * np.pi * 8.0
    dt: float = 1e-3
    T: float = 1.0
    scheme: str = "etdrk4"
    snapshot_stride: int = 0
    e: float = 1.0
    kappa: float = 1.0
    v: float = 1.0
    r: float = 2.0
    s: float = 1.0
    l: float = 1.0
    m: float = 1.0
    b: float = 0.0
    eps: float = 0.01
    data: DataSpec = field(default_factory=DataSpec)
    snapshot_dir: str | None = None
    diagnostics_csv: str | None = None
    manifest: str | None = None

    def grid(self) -> Grid2D:
        return Grid2D(self.n, self.period)

    def phys_params(self) -> PhysParams:
        return PhysParams(e=self.e, kappa=self.kappa, v=self.v)

    def as_dict(self) -> dict:
        return {
            "grid": {"n": self.n, "period": self.period},
            "integrator": {
                "dt": self.dt,
                "T": self.T,
                "scheme": self.scheme,
                "snapshot_stride": self.snapshot_stride,
            },
            "params": {"e": self.e, "kappa": self.kappa, "v": self.v},
            "regularity": {
                "r": self.r, "s": self.s, "l": self.l,
                "m": self.m, "b": self.b, "eps": self.eps,
            },
            "data": {
                "generator": self.data.generator,
                "params": self.data.params,
                "seed": self.data.seed,
            },
            "output": {
                "snapshot_dir": self.snapshot_dir,
                "diagnostics_csv": self.diagnostics_csv,
                "manifest": self.manifest,
            },
        }


def _reject_unknown(section: str, given: dict, allowed: tuple[str, ...]):
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        where = f"{section}." if section else ""
        raise ConfigurationError(
            f"unknown config key {where}{unknown[0]!r}; allowed: {sorted(allowed)}"
        )


def _number(section: str, key: str, value, lo=None, hi=None, strict_lo=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{section}.{key}: expected a number, got {value!r}")
    x = float(value)
    if not np.isfinite(x):
        raise ConfigurationError(f"{section}.{key}: must be finite, got {value!r}")
    if lo is not None and (x <= lo if strict_lo else x < lo):
        op = ">" if strict_lo else ">="
        raise ConfigurationError(f"{section}.{key}: requires {key} {op} {lo}, got {value}")
    if hi is not None and x > hi:
        raise ConfigurationError(f"{section}.{key}: requires {key} <= {hi}, got {value}")
    return x


def parse_config(raw: str) -> RunConfig:
    try:
        doc = json.loads(raw) if raw.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config root must be a JSON object")
    _reject_unknown("", doc, ("grid", "integrator", "params", "regularity", "data", "output"))

    grid = doc.get("grid", {})
    _reject_unknown("grid", grid, ("n", "period"))
    n = grid.get("n", 64)
    if not isinstance(n, int) or n < 4 or n % 2:
        raise ConfigurationError(f"grid.n: must be an even integer >= 4, got {n!r}")
    period = _number("grid", "period", grid.get("period", 2.0 * np.pi * 8.0), lo=0.0, strict_lo=True)

    integ = doc.get("integrator", {})
    _reject_unknown("integrator", integ, ("dt", "T", "scheme", "snapshot_stride"))
    dt = _number("integrator", "dt", integ.get("dt", 1e-3), lo=0.0, strict_lo=True)
    T = _number("integrator", "T", integ.get("T", 1.0), lo=0.0, strict_lo=True)
    scheme = integ.get("scheme", "etdrk4")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"integrator.scheme: unknown scheme {scheme!r}; pick from {SCHEMES}")
    stride = integ.get("snapshot_stride", 0)
    if not isinstance(stride, int) or stride < 0:
        raise ConfigurationError(f"integrator.snapshot_stride: must be an integer >= 0, got {stride!r}")

    params = doc.get("params", {})
    _reject_unknown("params", params, ("e", "kappa", "v"))
    e = _number("params", "e", params.get("e", 1.0))
    kappa = params.get("kappa", 1.0)
    kappa_val = _number("params", "kappa", kappa)
    if kappa_val <= 0.0:
        raise ConfigurationError(
            f"params.kappa: the coupling requires κ > 0, got {kappa}"
        )
    v = _number("params", "v", params.get("v", 1.0))

    reg = doc.get("regularity", {})
    _reject_unknown("regularity", reg, ("r", "s", "l", "m", "b", "eps"))
    r = _number("regularity", "r", reg.get("r", 2.0), lo=1.0, hi=2.0, strict_lo=True)
    s = _number("regularity", "s", reg.get("s", 1.0))
    l = _number("regularity", "l", reg.get("l", 1.0))
    m = _number("regularity", "m", reg.get("m", 1.0))
    b = _number("regularity", "b", reg.get("b", 0.0))
    eps = _number("regularity", "eps", reg.get("eps", 0.01), lo=0.0, strict_lo=True)

    dspec = doc.get("data", {})
    _reject_unknown("data", dspec, ("generator", "params", "seed"))
    generator = dspec.get("generator", "zero")
    if generator not in GENERATORS:
        raise ConfigurationError(
            f"data.generator: unknown generator {generator!r}; pick from {GENERATORS}"
        )
    gparams = dspec.get("params", {})
    if not isinstance(gparams, dict):
        raise ConfigurationError("data.params: must be a JSON object")
    seed = dspec.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigurationError(f"data.seed: must be a nonnegative integer, got {seed!r}")

    out = doc.get("output", {})
    _reject_unknown("output", out, ("snapshot_dir", "diagnostics_csv", "manifest"))
    for key in ("snapshot_dir", "diagnostics_csv", "manifest"):
        val = out.get(key)
        if val is not None and not isinstance(val, str):
            raise ConfigurationError(f"output.{key}: must be a string path, got {val!r}")

    return RunConfig(
        n=n, period=period, dt=dt, T=T, scheme=scheme, snapshot_stride=stride,
        e=e, kappa=kappa_val, v=v, r=r, s=s, l=l, m=m, b=b, eps=eps,
        data=DataSpec(generator, dict(gparams), seed),
        snapshot_dir=out.get("snapshot_dir"),
        diagnostics_csv=out.get("diagnostics_csv"),
        manifest=out.get("manifest"),
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config(p.read_text())


# -- initial-data generators --------------------------------------------------


def _bump(grid: Grid2D, amp: float, sigma: float, center) -> SpectralField:
    return as_field(grid, gaussian_bump(grid, amp, sigma, center), real=True)


def _gen_free_data(cfg: RunConfig):
    """The eight free components (a_j0, a_j1, phi_0, phi_1, N_0, N_1)
    before the compatibility solve, per the named generator."""
    grid = cfg.grid()
    gp = dict(cfg.data.params)
    zero_r = as_field(grid, np.zeros((grid.n, grid.n)), real=True)
    zero_c = as_field(grid, np.zeros((grid.n, grid.n), dtype=complex), real=False)
    a10 = a11 = a20 = a21 = zero_r
    phi0 = phi1 = zero_c
    N0 = N1 = zero_r

    def take(key, default):
        return gp.pop(key, default)

    if cfg.data.generator == "zero":
        pass
    elif cfg.data.generator == "gaussian-bump":
        amp = float(take("amplitude", 0.1))
        sigma = float(take("sigma", 1.5))
        cx = cy = cfg.period / 2.0
        phi0 = _bump(grid, amp, sigma, (cx, cy))
        phi1 = SpectralField(
            grid, 0.5j * amp * gaussian_bump(grid, 1.0, sigma + 0.5, (cx + 2.0, cy - 1.0)),
            "physical", False,
        )
        N0 = _bump(grid, amp, sigma + 0.3, (cx - 2.5, cy + 1.5))
    elif cfg.data.generator == "plane-wave":
        amp = float(take("amplitude", 0.1))
        k1 = int(take("k1", 1))
        k2 = int(take("k2", 0))
        dk = 2.0 * np.pi / cfg.period
        x = np.arange(grid.n) * grid.dx
        phase = np.exp(1j * dk * (k1 * x[:, None] + k2 * x[None, :]))
        phi0 = as_field(grid, amp * phase, real=False)
    elif cfg.data.generator == "random-band":
        amp = float(take("amplitude", 0.1))
        kmin = int(take("kmin", 0))
        kmax = int(take("kmax", 4))
        rng = np.random.default_rng(cfg.data.seed)
        phi0 = random_complex_field(grid, rng, kmax=kmax, kmin=kmin, amplitude=amp)
        phi1 = random_complex_field(grid, rng, kmax=kmax, kmin=kmin, amplitude=amp)
        a10 = random_real_field(grid, rng, kmax=kmax, kmin=kmin, amplitude=amp)
        a20 = random_real_field(grid, rng, kmax=kmax, kmin=kmin, amplitude=amp)
        N0 = random_real_field(grid, rng, kmax=kmax, kmin=kmin, amplitude=amp)
    if gp:
        raise ConfigurationError(
            f"data.params: unknown parameter {sorted(gp)[0]!r} for generator "
            f"{cfg.data.generator!r}"
        )
    return a10, a11, a20, a21, phi0, phi1, N0, N1


def generate_data(cfg: RunConfig) -> tuple[FieldState, GaussSolveInfo]:
    """Build the generator's free data and complete it to a Gauss- and
    Lorenz-compatible initial state."""
    free = _gen_free_data(cfg)
    return make_compatible_data(*free, cfg.phys_params())
