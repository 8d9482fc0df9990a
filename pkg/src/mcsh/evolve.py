"""Time integration of the half-wave system.

The stiff linear rotation d_t u_pm = pm i <grad> u_pm is integrated
exactly through multiplier exponentials; only the bounded nonlinear
part is stepped.  Two schemes:

* "etdrk4": fourth-order exponential Runge-Kutta (the four-stage
  scheme with stage weights phi-style functions of z = h L).  The
  coefficient functions have removable singularities at z = 0, so they
  are evaluated by a Taylor expansion for tiny |z|, by a mean over a
  unit contour around z for small |z| (which sidesteps the cancellation
  in the direct formulas), and directly otherwise.  Since L here is
  purely imaginary the contour mean is complex and is kept complex.

* "midpoint": second-order exponential midpoint, organized as a Strang
  composition half-linear / implicit-midpoint / half-linear.  The
  implicit stage is solved by fixed-point iteration to near machine
  precision, which makes the map algebraically time-reversible: stepping
  dt then -dt returns the initial data to roundoff.

Coefficient arrays depend only on (grid, dt, scheme) and are cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, ConfigurationError, NonConvergenceError
from .model import (
    FieldState,
    HalfWaveState,
    PhysParams,
    grid_symbols,
    halfwave_nonlinear,
    split,
    unsplit,
)
from .spectral import Grid2D

_CONTOUR_POINTS = 32


def _phi_eval(z: np.ndarray, series_coeffs, direct) -> np.ndarray:
    """Evaluate a phi-style function elementwise with branch switching.

    series_coeffs are Taylor coefficients at 0 (ascending).  direct(z)
    is the closed form, numerically safe away from 0.  Branches:
    |z| < 1e-3 Taylor; |z| < 0.5 unit-contour mean; else direct.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    az = np.abs(z)

    tiny = az < 1e-3
    if np.any(tiny):
        zt = z[tiny]
        acc = np.zeros_like(zt)
        for c in reversed(series_coeffs):
            acc = acc * zt + c
        out[tiny] = acc

    mid = (az >= 1e-3) & (az < 0.5)
    if np.any(mid):
        zm = z[mid]
        theta = np.exp(2j * np.pi * np.arange(_CONTOUR_POINTS) / _CONTOUR_POINTS)
        pts = zm[:, None] + theta[None, :]
        out[mid] = np.mean(direct(pts), axis=1)

    big = az >= 0.5
    if np.any(big):
        out[big] = direct(z[big])
    return out


def _coeff_arrays(z: np.ndarray) -> dict[str, np.ndarray]:
    """The four stage-weight functions (divided by h) plus exponentials."""
    e_full = np.exp(z)
    e_half = np.exp(z / 2.0)

    f0 = _phi_eval(
        z,
        [1 / 2, 1 / 8, 1 / 48, 1 / 384, 1 / 3840],
        lambda t: (np.exp(t / 2.0) - 1.0) / t,
    )
    f1 = _phi_eval(
        z,
        [1 / 6, 1 / 6, 3 / 40, 1 / 45, 5 / 1008],
        lambda t: (-4.0 - t + np.exp(t) * (4.0 - 3.0 * t + t**2)) / t**3,
    )
    f2 = _phi_eval(
        z,
        [1 / 6, 1 / 12, 1 / 40, 1 / 180, 1 / 1008],
        lambda t: (2.0 + t + np.exp(t) * (t - 2.0)) / t**3,
    )
    f3 = _phi_eval(
        z,
        [1 / 6, 0.0, -1 / 120, -1 / 360, -1 / 1680],
        lambda t: (-4.0 - 3.0 * t - t**2 + np.exp(t) * (4.0 - t)) / t**3,
    )
    return {"E": e_full, "E2": e_half, "f0": f0, "f1": f1, "f2": f2, "f3": f3}


@dataclass
class _SchemeCoeffs:
    E: np.ndarray
    E2: np.ndarray
    f0: np.ndarray | None = None
    f1: np.ndarray | None = None
    f2: np.ndarray | None = None
    f3: np.ndarray | None = None


_COEFF_CACHE: dict[tuple, _SchemeCoeffs] = {}


def scheme_coefficients(grid: Grid2D, dt: float, scheme: str) -> _SchemeCoeffs:
    key = (grid, float(dt), scheme)
    cached = _COEFF_CACHE.get(key)
    if cached is not None:
        return cached
    bessel = grid_symbols(grid)["bessel"]
    # z for the plus and minus components, stacked to broadcast over fields
    z = np.stack([1j * dt * bessel, -1j * dt * bessel])
    if scheme == "etdrk4":
        c = _coeff_arrays(z)
        coeffs = _SchemeCoeffs(
            E=c["E"],
            E2=c["E2"],
            f0=dt * c["f0"],
            f1=dt * c["f1"],
            f2=dt * c["f2"],
            f3=dt * c["f3"],
        )
    elif scheme == "midpoint":
        coeffs = _SchemeCoeffs(E=np.exp(z), E2=np.exp(z / 2.0))
    else:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    _COEFF_CACHE[key] = coeffs
    return coeffs


def step_etdrk4(
    grid: Grid2D,
    params: PhysParams,
    data: np.ndarray,
    coeffs: _SchemeCoeffs,
    include_unit_terms: bool = True,
) -> np.ndarray:
    nl = lambda u: halfwave_nonlinear(grid, params, u, include_unit_terms)
    n0 = nl(data)
    a = coeffs.E2 * data + coeffs.f0 * n0
    na = nl(a)
    b = coeffs.E2 * data + coeffs.f0 * na
    nb = nl(b)
    c = coeffs.E2 * a + coeffs.f0 * (2.0 * nb - n0)
    nc = nl(c)
    return coeffs.E * data + coeffs.f1 * n0 + 2.0 * coeffs.f2 * (na + nb) + coeffs.f3 * nc


def step_midpoint(
    grid: Grid2D,
    params: PhysParams,
    data: np.ndarray,
    dt: float,
    coeffs: _SchemeCoeffs,
    include_unit_terms: bool = True,
    fp_tol: float = 1e-14,
    fp_maxiter: int = 50,
) -> np.ndarray:
    nl = lambda u: halfwave_nonlinear(grid, params, u, include_unit_terms)
    w = coeffs.E2 * data
    uh = w + 0.5 * dt * nl(w)
    scale = max(1.0, float(np.max(np.abs(w))))
    for _ in range(fp_maxiter):
        new = w + 0.5 * dt * nl(uh)
        delta = float(np.max(np.abs(new - uh)))
        uh = new
        if delta <= fp_tol * scale:
            break
    else:
        raise NonConvergenceError(
            f"midpoint stage did not contract: last update {delta:.3e}",
            residual=delta,
            iterations=fp_maxiter,
        )
    return coeffs.E2 * (uh + 0.5 * dt * nl(uh))


@dataclass
class EvolveResult:
    """Final state plus whatever was recorded along the way."""

    state: FieldState
    steps: int
    times: list[float] = field(default_factory=list)
    snapshots: list[FieldState] = field(default_factory=list)
    records: list = field(default_factory=list)


def integrate(
    state: FieldState,
    params: PhysParams,
    dt: float,
    steps: int,
    scheme: str = "etdrk4",
    snapshot_stride: int = 0,
    observer=None,
    observer_stride: int = 1,
    blowup_threshold: float = 1e6,
    include_unit_terms: bool = True,
) -> EvolveResult:
    """Advance a state by `steps` steps of size dt.

    observer(state) is called every observer_stride steps (and on the
    initial state); its return values are collected in records.
    snapshot_stride > 0 stores full states at that stride (and the
    final state).  A non-finite or threshold-exceeding sup of the
    spectrum raises BlowUpError with the step and time reached.
    """
    # negative dt is legitimate: the wave system is well-posed both ways,
    # and backward stepping is how integrator reversibility is checked
    if dt == 0 or not np.isfinite(dt):
        raise ConfigurationError(f"dt must be nonzero and finite, got {dt}")
    if steps < 0:
        raise ConfigurationError(f"steps must be nonnegative, got {steps}")
    grid = state.grid
    coeffs = scheme_coefficients(grid, dt, scheme)

    hw = split(state)
    data = hw.data
    t0 = state.t
    result = EvolveResult(state=state, steps=0)

    def record(k, d):
        if observer is not None and k % observer_stride == 0:
            snap = unsplit(HalfWaveState(grid, d, t0 + k * dt))
            result.records.append(observer(snap))
            result.times.append(snap.t)

    record(0, data)
    for k in range(1, steps + 1):
        if scheme == "etdrk4":
            data = step_etdrk4(grid, params, data, coeffs, include_unit_terms)
        else:
            data = step_midpoint(grid, params, data, dt, coeffs, include_unit_terms)
        peak = float(np.max(np.abs(data)))
        if not np.isfinite(peak) or peak > blowup_threshold:
            raise BlowUpError(
                f"solution exceeded {blowup_threshold:.1e} at step {k} (t = {t0 + k * dt:.6g})",
                step=k,
                time=t0 + k * dt,
            )
        record(k, data)
        if snapshot_stride > 0 and (k % snapshot_stride == 0 or k == steps):
            result.snapshots.append(unsplit(HalfWaveState(grid, data.copy(), t0 + k * dt)))

    result.state = unsplit(HalfWaveState(grid, data, t0 + steps * dt))
    result.steps = steps
    return result


def self_convergence_order(
    state: FieldState,
    params: PhysParams,
    t_final: float,
    dts: list[float],
    scheme: str = "etdrk4",
    refine: int = 4,
) -> tuple[float, dict[float, float]]:
    """Observed order against a self-reference at min(dts)/refine.

    Each dt must divide t_final to rounding; errors are the stacked-L2
    distances of the final spectra.  Returns (slope, {dt: error}).
    """
    errs: dict[float, float] = {}
    dt_ref = min(dts) / refine
    ref = _run_to(state, params, t_final, dt_ref, scheme)
    for dt in dts:
        end = _run_to(state, params, t_final, dt, scheme)
        s1, d1 = end.spectra()
        s2, d2 = ref.spectra()
        errs[dt] = float(np.sqrt(np.sum(np.abs(s1 - s2) ** 2) + np.sum(np.abs(d1 - d2) ** 2)))
    xs = np.log([dt for dt in dts])
    ys = np.log([max(errs[dt], 1e-300) for dt in dts])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, errs


def _run_to(state: FieldState, params: PhysParams, t_final: float, dt: float, scheme: str) -> FieldState:
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ConfigurationError(f"dt {dt} does not divide t_final {t_final}")
    return integrate(state, params, dt, steps, scheme=scheme).state
