import numpy as np
import pytest

from mcsh.diagnostics import (
    DiagnosticsRecord,
    default_norms,
    diagnostics_record,
    energy,
    gauss_residual,
    lorenz_residual,
    write_diagnostics_csv,
)
from mcsh.io import read_diagnostics_csv
from mcsh.model import FieldState, PhysParams, make_compatible_data, zero_state
from mcsh.spectral import Grid2D, as_field, gaussian_bump


def test_energy_vacuum_is_zero():
    grid = Grid2D(16)
    assert energy(zero_state(grid), PhysParams(e=1.0, kappa=1.0, v=1.0)) == 0.0


def test_energy_plane_wave_closed_form():
    # phi = a exp(ik.x), d_t phi = b exp(ik.x), everything else zero:
    # E = P^2 (|b|^2 + |k|^2 |a|^2 + e^2 |a|^4 / 2 + e^2 c0^2 |a|^2)
    period = 4.0 * np.pi
    grid = Grid2D(32, period=period)
    x = np.arange(32) * grid.dx
    k1, k2 = 1.0, -0.5  # integer multiples of dk = 0.5
    a, b = 0.3 + 0.1j, 0.2 - 0.4j
    wave = np.exp(1j * (k1 * x[:, None] + k2 * x[None, :]))
    base = zero_state(grid)
    state = FieldState(
        A0=base.A0, A1=base.A1, A2=base.A2,
        phi=as_field(grid, a * wave, real=False), N=base.N,
        dA0=base.dA0, dA1=base.dA1, dA2=base.dA2,
        dphi=as_field(grid, b * wave, real=False), dN=base.dN,
    )
    p = PhysParams(e=1.3, kappa=0.6, v=0.9)
    c0 = 1.3 * 0.9**2 / 0.6
    expect = period**2 * (
        abs(b) ** 2
        + (k1**2 + k2**2) * abs(a) ** 2
        + 0.5 * 1.3**2 * abs(a) ** 4
        + 1.3**2 * c0**2 * abs(a) ** 2
    )
    assert energy(state, p) == pytest.approx(expect, rel=1e-12)


def test_lorenz_residual_closed_form():
    grid = Grid2D(32, period=2.0 * np.pi)
    x = np.arange(32) * grid.dx
    base = zero_state(grid)
    state = FieldState(
        A0=base.A0,
        A1=as_field(grid, np.cos(3.0 * x[:, None]) * np.ones((1, 32))),
        A2=base.A2, phi=base.phi, N=base.N,
        dA0=base.dA0, dA1=base.dA1, dA2=base.dA2, dphi=base.dphi, dN=base.dN,
    )
    res, norm = lorenz_residual(state)
    expect = 3.0 * np.sin(3.0 * x[:, None]) * np.ones((1, 32))
    assert np.max(np.abs(res.physical - expect)) < 1e-12
    # L2 norm of 3 sin(3 x1) over the 2pi x 2pi torus
    assert norm == pytest.approx(3.0 * np.sqrt(2.0) * np.pi, rel=1e-12)


def test_gauss_residual_flags_incompatible_data():
    grid = Grid2D(32, period=8.0 * np.pi)
    p = PhysParams(e=1.0, kappa=1.0, v=1.0)
    base = zero_state(grid)
    # A_0 chosen freely instead of from the constraint solve
    state = FieldState(
        A0=as_field(grid, gaussian_bump(grid, 1.0, sigma=2.0)),
        A1=base.A1, A2=base.A2,
        phi=as_field(grid, gaussian_bump(grid, 1.0, sigma=1.5).astype(complex), real=False),
        N=base.N,
        dA0=base.dA0, dA1=base.dA1, dA2=base.dA2, dphi=base.dphi, dN=base.dN,
    )
    _, gres = gauss_residual(state, p)
    assert gres > 1e-2


def test_record_and_csv_roundtrip(tmp_path):
    grid = Grid2D(32, period=8.0 * np.pi)
    p = PhysParams(e=1.0, kappa=1.0, v=1.0)
    zero = as_field(grid, np.zeros((32, 32)))
    zc = as_field(grid, np.zeros((32, 32), dtype=complex), real=False)
    phi0 = as_field(grid, gaussian_bump(grid, 0.2, sigma=1.5).astype(complex), real=False)
    phi1 = as_field(grid, 0.1j * gaussian_bump(grid, 1.0, sigma=2.0), real=False)
    state, _ = make_compatible_data(
        a10=zero, a11=zero, a20=zero, a21=zero,
        phi0=phi0, phi1=phi1, N0=zero, N1=zero, params=p,
    )
    rec = diagnostics_record(state, p)
    assert rec.gauss_res < 1e-9
    assert rec.lorenz_res < 1e-12
    assert rec.energy > 0
    assert set(rec.norms) == {"A0_l2", "A1_l2", "A2_l2", "phi_l2", "N_l2"}
    assert rec.norms["phi_l2"] == pytest.approx(state.phi.l2())

    path = tmp_path / "diag.csv"
    write_diagnostics_csv(path, [rec, rec])
    rows = read_diagnostics_csv(path)
    assert len(rows) == 2
    # repr round-trips doubles exactly
    assert rows[0]["energy"] == rec.energy
    assert rows[0]["phi_l2"] == rec.norms["phi_l2"]
    assert rows[0]["t"] == rec.t


def test_record_validation_rejects_nonfinite():
    rec = DiagnosticsRecord(
        t=0.0, energy=np.nan, gauss_res=0.0, lorenz_res=0.0,
        maxwell_res_1=0.0, maxwell_res_2=0.0,
    )
    with pytest.raises(ValueError):
        rec.validate()


def test_default_norms_match_field_l2():
    grid = Grid2D(16)
    state = zero_state(grid)
    norms = default_norms(state)
    assert all(v == 0.0 for v in norms.values())
