"""Constraint residuals, conserved energy, and time-series emission.

Sign conventions follow model.py.  Two points are worth stating here
because they are easy to get wrong:

* maxwell_residuals assembles the spatial field equations termwise with
  the signs under which they vanish identically on solutions of the
  evolution system; after substituting the second time derivatives each
  residual collapses to minus the spatial gradient of the Lorenz
  residual, which is why it "tracks" the gauge condition.

* energy integrates

      1/2 (F_01^2 + F_02^2) + 1/2 F_12^2 + sum_mu |D_mu phi|^2
      + 1/2 ((d_t N)^2 + |grad N|^2) + U

  with U the substitution form 1/2 (e|phi|^2 + kappa N)^2
  + e^2 (N + c0)^2 |phi|^2 (the pre-shift potential evaluated at
  N + c0, c0 = e v^2 / kappa).  The 1/2 on the neutral-scalar kinetic
  term is forced by the N evolution equation d_t^2 N = Lap N - W_N:
  any other weight is not conserved.  With this functional, exact
  conservation of the semidiscrete flow holds for e = 1 (arbitrary
  kappa, v); for e != 1 the evolution system is not the gradient flow
  of any single potential and no exactly conserved quadrature exists.

All quartic integrands are evaluated pointwise on the doubled grid,
where they are exact for working-band fields, so the reported energy
is the exact integral of the trigonometric interpolants.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import (
    FieldState,
    PhysParams,
    grid_symbols,
    rhs_second_order,
)
from .spectral import FREQUENCY, SpectralField, oversampled_physical


def lorenz_residual(state: FieldState) -> tuple[SpectralField, float]:
    """d_t A_0 - d_1 A_1 - d_2 A_2 and its L^2 norm."""
    sym = grid_symbols(state.grid)
    spec = (
        state.dA0.spectrum
        - sym["ixi1"] * state.A1.spectrum
        - sym["ixi2"] * state.A2.spectrum
    )
    state.grid.zero_nyquist(spec)
    res = SpectralField(state.grid, spec, FREQUENCY, real=True)
    return res, res.l2()


def gauss_residual(state: FieldState, params: PhysParams) -> tuple[SpectralField, float]:
    """-Lap A_0 + d_t(d_1 A_1 + d_2 A_2) + kappa F_12 + 2e Im(phi conj(D_0 phi)).

    Vanishes at t=0 on the output of make_compatible_data and is
    transported by the evolution (its time integral is minus the Lorenz
    residual), so growth signals discretization error, not dynamics.
    """
    g = state.grid
    sym = grid_symbols(g)
    spec = (
        -sym["lap"] * state.A0.spectrum
        + sym["ixi1"] * state.dA1.spectrum
        + sym["ixi2"] * state.dA2.spectrum
        + params.kappa * (sym["ixi1"] * state.A2.spectrum - sym["ixi2"] * state.A1.spectrum)
    )
    # 2e Im(phi conj(D_0 phi)) = 2e Im(phi conj(dphi)) + 2e^2 A_0 |phi|^2
    if params.e != 0.0:
        phi = oversampled_physical(g, state.phi.spectrum)
        dphi = oversampled_physical(g, state.dphi.spectrum)
        a0 = oversampled_physical(g, state.A0.spectrum).real
        cur = 2.0 * params.e * (phi * np.conj(dphi)).imag
        cur += 2.0 * params.e**2 * a0 * (phi.real**2 + phi.imag**2)
        spec = spec + _project(g, cur)
    g.zero_nyquist(spec)
    res = SpectralField(g, spec, FREQUENCY, real=True)
    return res, res.l2()


def maxwell_residuals(
    state: FieldState, params: PhysParams
) -> tuple[SpectralField, SpectralField, float, float]:
    """Residuals of the two spatial field equations, second derivatives
    substituted from the evolution system.

    res_1 = (d_t^2 - d_2^2) A_1 - d_1(d_t A_0 - d_2 A_2)
            + kappa F_02 + 2e Im(phi conj(D_1 phi))
    res_2 = (d_t^2 - d_1^2) A_2 - d_2(d_t A_0 - d_1 A_1)
            - kappa F_01 + 2e Im(phi conj(D_2 phi))

    Each reduces to minus the corresponding spatial derivative of the
    Lorenz residual, hence is small exactly when the gauge condition
    holds along the flow.
    """
    g = state.grid
    sym = grid_symbols(g)
    rhs = rhs_second_order(state, params)
    spec, dspec = state.spectra()
    lap = sym["lap"]
    ix1, ix2 = sym["ixi1"], sym["ixi2"]

    # d_t^2 A_j = Lap A_j - A_j + G_j
    ddta1 = lap * spec[1] - spec[1] + rhs.A1.spectrum
    ddta2 = lap * spec[2] - spec[2] + rhs.A2.spectrum
    f01 = dspec[1] - ix1 * spec[0]
    f02 = dspec[2] - ix2 * spec[0]

    r1 = ddta1 - ix2**2 * spec[1] - ix1 * (dspec[0] - ix2 * spec[2]) + params.kappa * f02
    r2 = ddta2 - ix1**2 * spec[2] - ix2 * (dspec[0] - ix1 * spec[1]) - params.kappa * f01

    if params.e != 0.0:
        phi = oversampled_physical(g, state.phi.spectrum)
        d1phi = oversampled_physical(g, ix1 * spec[3])
        d2phi = oversampled_physical(g, ix2 * spec[3])
        a1 = oversampled_physical(g, spec[1]).real
        a2 = oversampled_physical(g, spec[2]).real
        phi2 = phi.real**2 + phi.imag**2
        cur1 = 2.0 * params.e * (phi * np.conj(d1phi)).imag + 2.0 * params.e**2 * a1 * phi2
        cur2 = 2.0 * params.e * (phi * np.conj(d2phi)).imag + 2.0 * params.e**2 * a2 * phi2
        r1 = r1 + _project(g, cur1)
        r2 = r2 + _project(g, cur2)

    g.zero_nyquist(r1)
    g.zero_nyquist(r2)
    res1 = SpectralField(g, r1, FREQUENCY, real=True)
    res2 = SpectralField(g, r2, FREQUENCY, real=True)
    return res1, res2, res1.l2(), res2.l2()


def energy(state: FieldState, params: PhysParams) -> float:
    """Conserved energy of the shifted system; the vacuum value is 0."""
    g = state.grid
    sym = grid_symbols(g)
    spec, dspec = state.spectra()
    ix1, ix2 = sym["ixi1"], sym["ixi2"]
    e, kappa, c0 = params.e, params.kappa, params.vacuum_shift

    stack = np.stack(
        [
            spec[0],  # A0
            spec[1],  # A1
            spec[2],  # A2
            dspec[1],  # d_t A1
            dspec[2],  # d_t A2
            spec[3],  # phi
            dspec[3],  # d_t phi
            ix1 * spec[3],  # d_1 phi
            ix2 * spec[3],  # d_2 phi
            spec[4],  # N
            dspec[4],  # d_t N
            ix1 * spec[4],  # d_1 N
            ix2 * spec[4],  # d_2 N
            ix1 * spec[0],  # d_1 A0
            ix2 * spec[0],  # d_2 A0
            ix1 * spec[2] - ix2 * spec[1],  # F_12
        ]
    )
    big = oversampled_physical(g, stack)
    a0 = big[0].real
    a1, a2 = big[1].real, big[2].real
    da1, da2 = big[3].real, big[4].real
    phi, dphi, d1phi, d2phi = big[5], big[6], big[7], big[8]
    nn, dn, d1n, d2n = big[9].real, big[10].real, big[11].real, big[12].real
    d1a0, d2a0 = big[13].real, big[14].real
    f12 = big[15].real

    f01 = da1 - d1a0
    f02 = da2 - d2a0
    d0p = dphi - 1j * e * a0 * phi
    d1p = d1phi - 1j * e * a1 * phi
    d2p = d2phi - 1j * e * a2 * phi
    phi2 = phi.real**2 + phi.imag**2

    dens = 0.5 * (f01**2 + f02**2) + 0.5 * f12**2
    dens += np.abs(d0p) ** 2 + np.abs(d1p) ** 2 + np.abs(d2p) ** 2
    dens += 0.5 * (dn**2 + d1n**2 + d2n**2)
    dens += 0.5 * (e * phi2 + kappa * nn) ** 2 + e**2 * (nn + c0) ** 2 * phi2

    m = big.shape[-1]
    return float(np.sum(dens)) * (g.period / m) ** 2


def _project(grid, padded_values: np.ndarray) -> np.ndarray:
    from .spectral import projected_spectrum

    return projected_spectrum(grid, padded_values.astype(complex))


@dataclass
class DiagnosticsRecord:
    """One row of the standard time series."""

    t: float
    energy: float
    gauss_res: float
    lorenz_res: float
    maxwell_res_1: float
    maxwell_res_2: float
    norms: dict = field(default_factory=dict)

    def validate(self) -> "DiagnosticsRecord":
        vals = [self.t, self.energy, self.gauss_res, self.lorenz_res,
                self.maxwell_res_1, self.maxwell_res_2, *self.norms.values()]
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("diagnostics record contains non-finite entries")
        return self


def default_norms(state: FieldState) -> dict:
    return {
        "A0_l2": state.A0.l2(),
        "A1_l2": state.A1.l2(),
        "A2_l2": state.A2.l2(),
        "phi_l2": state.phi.l2(),
        "N_l2": state.N.l2(),
    }


def diagnostics_record(state: FieldState, params: PhysParams, norms=default_norms) -> DiagnosticsRecord:
    _, lor = lorenz_residual(state)
    _, gau = gauss_residual(state, params)
    _, _, m1, m2 = maxwell_residuals(state, params)
    rec = DiagnosticsRecord(
        t=state.t,
        energy=energy(state, params),
        gauss_res=gau,
        lorenz_res=lor,
        maxwell_res_1=m1,
        maxwell_res_2=m2,
        norms=norms(state) if callable(norms) else dict(norms),
    )
    return rec.validate()


def write_diagnostics_csv(path, records: list[DiagnosticsRecord]) -> None:
    """One row per record: t, energy, residual norms, then any field norms."""
    norm_keys = sorted({k for r in records for k in r.norms})
    header = ["t", "energy", "gauss_res", "lorenz_res", "maxwell_res_1", "maxwell_res_2"] + norm_keys
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in records:
            row = [r.t, r.energy, r.gauss_res, r.lorenz_res, r.maxwell_res_1, r.maxwell_res_2]
            row += [r.norms.get(k, "") for k in norm_keys]
            w.writerow([repr(float(v)) if v != "" else "" for v in row])
