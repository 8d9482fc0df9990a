"""Maxwell-Chern-Simons-Higgs system in Lorenz gauge on the torus.

Fields and conventions
----------------------
Metric diag(1, -1, -1); raising a spatial index flips the sign
(d^j = -d_j, d^0 = d_0, A^j = -A_j).  Covariant derivative
D_mu = d_mu - i e A_mu, curvature F_mu_nu = d_mu A_nu - d_nu A_mu.
The neutral scalar is stored shifted by its vacuum value e v^2 / kappa,
so the vacuum of the stored variables is identically zero.

Evolution form
--------------
In Lorenz gauge (d_t A_0 = d_1 A_1 + d_2 A_2) each field satisfies a
mass-shifted wave equation

    (box + 1) u = G_u,   box = d_t^2 - Laplace,

where the right sides G_u retain a linear +u term from the mass shift:

    G_A0  = -kappa F_12 - 2 e Im(phi conj(d_t phi)) - 2 e^2 A_0 |phi|^2 + A_0
    G_A1  = -kappa F_02 - 2 e Im(phi conj(d_1 phi)) - 2 e^2 A_1 |phi|^2 + A_1
    G_A2  = +kappa F_01 - 2 e Im(phi conj(d_2 phi)) - 2 e^2 A_2 |phi|^2 + A_2
    G_phi = 2ie (A_0 d_t phi - A_j d_j phi) + e^2 (A_0^2 - A_j A_j) phi
            - W_phi(|phi|^2, N) + phi
    G_N   = -W_N(|phi|^2, N) + N

with the potential gradients (c0 = e v^2 / kappa)

    W_phi = (e |phi|^2 + kappa N) phi + e^2 (N + c0)^2 phi
    W_N   = kappa (e |phi|^2 + kappa N) + 2 e^2 (N + c0) |phi|^2.

All sign choices here are consistent with the Euler-Lagrange system
(d^lam F_lam_rho + (kappa/2) eps F + 2 e Im(phi conj(D^rho phi)) = 0 and
D_mu D^mu phi + W_phi = 0): in particular the Gauss constraint reads
(Laplace - 2 e^2 |phi|^2) A_0 = div-and-current terms, a coercive
operator.

Half-wave form
--------------
u_pm = (u -+ i <grad>^{-1} d_t u) / 2, so u = u_+ + u_- and
d_t u = i <grad> (u_+ - u_-).  Each component satisfies

    d_t u_pm = pm i <grad> u_pm  -+  (i/2) <grad>^{-1} G_u.

A free wave exp(i(k.x - <k> t)) with its exact time derivative sits
entirely in the minus component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as _spla

from .errors import ConfigurationError, ConstraintError, GridMismatchError, NonConvergenceError
from .spectral import (
    FREQUENCY,
    PHYSICAL,
    Grid2D,
    SpectralField,
    dealias_product,
    oversampled_physical,
    projected_spectrum,
)

FIELD_NAMES = ("A0", "A1", "A2", "phi", "N")
REAL_FIELDS = (True, True, True, False, True)


@dataclass(frozen=True)
class PhysParams:
    """Coupling constants: gauge coupling e, Chern-Simons mass kappa, vev v.

    The physical model has kappa > 0; kappa = 0 is accepted here only so
    decoupled reductions can be exercised (the vacuum shift is then 0).
    Negative kappa is rejected.
    """

    e: float = 1.0
    kappa: float = 1.0
    v: float = 1.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ConfigurationError(f"kappa must be nonnegative, got {self.kappa}")

    @property
    def vacuum_shift(self) -> float:
        """Vacuum value e v^2 / kappa subtracted from the stored scalar."""
        if self.kappa == 0.0:
            return 0.0
        return self.e * self.v**2 / self.kappa


@dataclass
class FieldState:
    """Gauge potentials, Higgs field, shifted neutral scalar, and their
    time derivatives at a single time."""

    A0: SpectralField
    A1: SpectralField
    A2: SpectralField
    phi: SpectralField
    N: SpectralField
    dA0: SpectralField
    dA1: SpectralField
    dA2: SpectralField
    dphi: SpectralField
    dN: SpectralField
    t: float = 0.0

    def __post_init__(self):
        g = self.grid
        for f in self.fields() + self.dfields():
            if f.grid != g:
                raise GridMismatchError("state fields live on different grids")

    @property
    def grid(self) -> Grid2D:
        return self.A0.grid

    def fields(self):
        return [self.A0, self.A1, self.A2, self.phi, self.N]

    def dfields(self):
        return [self.dA0, self.dA1, self.dA2, self.dphi, self.dN]

    def spectra(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (5, n, n) unitary spectra of the fields and derivatives."""
        spec = np.stack([f.spectrum for f in self.fields()])
        dspec = np.stack([f.spectrum for f in self.dfields()])
        return spec, dspec

    @classmethod
    def from_spectra(cls, grid: Grid2D, spec: np.ndarray, dspec: np.ndarray, t: float = 0.0):
        def wrap(row, real):
            return SpectralField(grid, row.copy(), FREQUENCY, real)

        fields = [wrap(spec[i], REAL_FIELDS[i]) for i in range(5)]
        dfields = [wrap(dspec[i], REAL_FIELDS[i]) for i in range(5)]
        return cls(*fields, *dfields, t=t)


def zero_state(grid: Grid2D, t: float = 0.0) -> FieldState:
    z = np.zeros((grid.n, grid.n), dtype=complex)
    return FieldState.from_spectra(grid, np.stack([z] * 5), np.stack([z] * 5), t=t)


@dataclass
class HalfWaveState:
    """Stacked half-wave components, frequency basis.

    data[f, 0] is the plus component of field f, data[f, 1] the minus
    component, with f indexing (A0, A1, A2, phi, N).
    """

    grid: Grid2D
    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.data.shape != (5, 2, self.grid.n, self.grid.n):
            raise GridMismatchError(
                f"half-wave data must have shape (5, 2, n, n), got {self.data.shape}"
            )

    def copy(self) -> "HalfWaveState":
        return HalfWaveState(self.grid, self.data.copy(), self.t)


# -- cached per-grid symbol arrays -----------------------------------------

_SYMBOLS: dict[Grid2D, dict] = {}


def grid_symbols(grid: Grid2D) -> dict:
    """Derivative and Bessel symbols with the Nyquist row/column zeroed."""
    cached = _SYMBOLS.get(grid)
    if cached is not None:
        return cached
    ny = grid.nyquist
    ixi1 = 1j * grid.xi1.copy()
    ixi2 = 1j * grid.xi2.copy()
    for arr in (ixi1, ixi2):
        arr[ny, :] = 0.0
        arr[:, ny] = 0.0
    bessel = grid.bessel
    sym = {
        "ixi1": ixi1,
        "ixi2": ixi2,
        "lap": (ixi1**2 + ixi2**2).real,  # -|xi|^2 on the working band
        "bessel": bessel,
        "inv_bessel": 1.0 / bessel,
        "inv_bessel2": 1.0 / bessel**2,
    }
    _SYMBOLS[grid] = sym
    return sym


# -- split / unsplit --------------------------------------------------------


def split(state: FieldState) -> HalfWaveState:
    """Half-wave decomposition u_pm = (u -+ i <grad>^{-1} d_t u) / 2."""
    sym = grid_symbols(state.grid)
    spec, dspec = state.spectra()
    ib = sym["inv_bessel"]
    plus = 0.5 * (spec - 1j * ib * dspec)
    minus = 0.5 * (spec + 1j * ib * dspec)
    return HalfWaveState(state.grid, np.stack([plus, minus], axis=1), state.t)


def unsplit(hw: HalfWaveState) -> FieldState:
    """Inverse of split: u = u_+ + u_-, d_t u = i <grad> (u_+ - u_-)."""
    sym = grid_symbols(hw.grid)
    spec = hw.data[:, 0] + hw.data[:, 1]
    dspec = 1j * sym["bessel"] * (hw.data[:, 0] - hw.data[:, 1])
    return FieldState.from_spectra(hw.grid, spec, dspec, t=hw.t)


# -- pointwise building blocks ----------------------------------------------


def curvature(state: FieldState) -> tuple[SpectralField, SpectralField, SpectralField]:
    """F_01, F_02, F_12 with F_0j = d_t A_j - d_j A_0 from the stored
    time derivatives."""
    sym = grid_symbols(state.grid)
    a0 = state.A0.spectrum
    f01 = state.dA1.spectrum - sym["ixi1"] * a0
    f02 = state.dA2.spectrum - sym["ixi2"] * a0
    f12 = sym["ixi1"] * state.A2.spectrum - sym["ixi2"] * state.A1.spectrum
    g = state.grid
    mk = lambda arr: SpectralField(g, g.zero_nyquist(arr), FREQUENCY, real=True)
    return mk(f01), mk(f02), mk(f12)


def covariant_derivative(state: FieldState, params: PhysParams, mu: int) -> SpectralField:
    """D_mu phi (lower index): D_0 = d_t - i e A_0, D_j = d_j - i e A_j."""
    if mu not in (0, 1, 2):
        raise ConfigurationError(f"index must be 0, 1 or 2, got {mu}")
    sym = grid_symbols(state.grid)
    if mu == 0:
        lead = state.dphi.spectrum
        a = state.A0
    else:
        lead = sym[f"ixi{mu}"] * state.phi.spectrum
        a = state.A1 if mu == 1 else state.A2
    coupling = dealias_product(a, state.phi, degree=2).to_frequency()
    out = lead - 1j * params.e * coupling.data
    g = state.grid
    return SpectralField(g, g.zero_nyquist(out), FREQUENCY, real=False)


def potential_phi(phi: SpectralField, N: SpectralField, params: PhysParams) -> SpectralField:
    """Gradient of the potential with respect to conj(phi):
    (e |phi|^2 + kappa N) phi + e^2 (N + c0)^2 phi."""
    g = phi.grid
    if N.grid != g:
        raise GridMismatchError("phi and N live on different grids")
    p, n = _padded_physical(g, [phi.spectrum, N.spectrum])
    c0 = params.vacuum_shift
    w = (params.e * (p.real**2 + p.imag**2) + params.kappa * n.real) * p
    w += params.e**2 * (n.real + c0) ** 2 * p
    return _from_padded(g, w, real=False, basis=phi.basis)


def potential_N(phi: SpectralField, N: SpectralField, params: PhysParams) -> SpectralField:
    """Gradient of the potential with respect to N:
    kappa (e |phi|^2 + kappa N) + 2 e^2 (N + c0) |phi|^2."""
    g = phi.grid
    if N.grid != g:
        raise GridMismatchError("phi and N live on different grids")
    p, n = _padded_physical(g, [phi.spectrum, N.spectrum])
    c0 = params.vacuum_shift
    phi2 = p.real**2 + p.imag**2
    w = params.kappa * (params.e * phi2 + params.kappa * n.real)
    w += 2.0 * params.e**2 * (n.real + c0) * phi2
    return _from_padded(g, w.astype(complex), real=True, basis=phi.basis)


def _padded_physical(grid: Grid2D, spectra: list[np.ndarray]) -> np.ndarray:
    """Inverse-transform unitary spectra onto the doubled (alias-free) grid."""
    return oversampled_physical(grid, np.stack(spectra))


def _from_padded(grid: Grid2D, padded_values: np.ndarray, real: bool, basis: str) -> SpectralField:
    """Forward-transform doubled-grid samples and truncate to the band."""
    out = SpectralField(grid, projected_spectrum(grid, padded_values), FREQUENCY, real)
    return out.to_physical() if basis == PHYSICAL else out


# -- right sides -------------------------------------------------------------


def rhs_spectra(
    grid: Grid2D,
    params: PhysParams,
    spec: np.ndarray,
    dspec: np.ndarray,
    include_unit_terms: bool = True,
) -> np.ndarray:
    """Right sides G of the mass-shifted wave system, as stacked spectra.

    spec/dspec are stacked (5, n, n) unitary spectra in FIELD_NAMES
    order.  All products are formed on the doubled grid, so the result
    is the exact band projection of the pointwise right sides.
    """
    sym = grid_symbols(grid)
    e, kappa = params.e, params.kappa
    c0 = params.vacuum_shift

    to_pad = np.stack(
        [
            spec[0],  # A0
            spec[1],  # A1
            spec[2],  # A2
            spec[4],  # N
            spec[3],  # phi
            dspec[3],  # d_t phi
            sym["ixi1"] * spec[3],  # d_1 phi
            sym["ixi2"] * spec[3],  # d_2 phi
        ]
    )
    ph = oversampled_physical(grid, to_pad)
    a0, a1, a2, nn = ph[0].real, ph[1].real, ph[2].real, ph[3].real
    phi, dphi, d1phi, d2phi = ph[4], ph[5], ph[6], ph[7]

    phi2 = phi.real**2 + phi.imag**2
    im_d0 = (phi * np.conj(dphi)).imag
    im_d1 = (phi * np.conj(d1phi)).imag
    im_d2 = (phi * np.conj(d2phi)).imag

    g_a0 = -2.0 * e * im_d0 - 2.0 * e**2 * a0 * phi2
    g_a1 = -2.0 * e * im_d1 - 2.0 * e**2 * a1 * phi2
    g_a2 = -2.0 * e * im_d2 - 2.0 * e**2 * a2 * phi2
    w_phi = (e * phi2 + kappa * nn) * phi + e**2 * (nn + c0) ** 2 * phi
    g_phi = (
        2j * e * (a0 * dphi - a1 * d1phi - a2 * d2phi)
        + e**2 * (a0**2 - a1**2 - a2**2) * phi
        - w_phi
    )
    g_n = -(kappa * (e * phi2 + kappa * nn) + 2.0 * e**2 * (nn + c0) * phi2)

    prods = np.stack([g_a0.astype(complex), g_a1.astype(complex), g_a2.astype(complex), g_phi, g_n.astype(complex)])
    out = projected_spectrum(grid, prods)

    # linear curvature terms, assembled spectrally
    f12 = sym["ixi1"] * spec[2] - sym["ixi2"] * spec[1]
    f01 = dspec[1] - sym["ixi1"] * spec[0]
    f02 = dspec[2] - sym["ixi2"] * spec[0]
    out[0] -= kappa * f12
    out[1] -= kappa * f02
    out[2] += kappa * f01
    if include_unit_terms:
        out += spec
    grid.zero_nyquist(out)
    return out


@dataclass
class SecondOrderRHS:
    A0: SpectralField
    A1: SpectralField
    A2: SpectralField
    phi: SpectralField
    N: SpectralField

    def fields(self):
        return [self.A0, self.A1, self.A2, self.phi, self.N]


def rhs_second_order(state: FieldState, params: PhysParams, include_unit_terms: bool = True) -> SecondOrderRHS:
    """G such that d_t^2 u = Laplace u - u + G_u for each field."""
    spec, dspec = state.spectra()
    out = rhs_spectra(state.grid, params, spec, dspec, include_unit_terms)
    fields = [
        SpectralField(state.grid, out[i], FREQUENCY, REAL_FIELDS[i]) for i in range(5)
    ]
    return SecondOrderRHS(*fields)


def halfwave_nonlinear(
    grid: Grid2D,
    params: PhysParams,
    data: np.ndarray,
    include_unit_terms: bool = True,
) -> np.ndarray:
    """The non-stiff part -+ (i/2) <grad>^{-1} G of the half-wave system.

    The stiff linear rotation pm i <grad> u_pm is excluded; integrators
    treat it exactly through the exponential.
    """
    sym = grid_symbols(grid)
    spec = data[:, 0] + data[:, 1]
    dspec = 1j * sym["bessel"] * (data[:, 0] - data[:, 1])
    g = rhs_spectra(grid, params, spec, dspec, include_unit_terms)
    half = 0.5j * sym["inv_bessel"] * g
    return np.stack([-half, half], axis=1)


def rhs_halfwave(hw: HalfWaveState, params: PhysParams, include_unit_terms: bool = True) -> np.ndarray:
    """Full time derivative of the stacked half-wave components."""
    sym = grid_symbols(hw.grid)
    out = halfwave_nonlinear(hw.grid, params, hw.data, include_unit_terms)
    rot = 1j * sym["bessel"]
    out[:, 0] += rot * hw.data[:, 0]
    out[:, 1] -= rot * hw.data[:, 1]
    return out


# -- constraint-compatible data ----------------------------------------------


@dataclass
class GaussSolveInfo:
    iterations: int
    residual: float
    rhs_norm: float
    mean_defect: float


def make_compatible_data(
    a10: SpectralField,
    a11: SpectralField,
    a20: SpectralField,
    a21: SpectralField,
    phi0: SpectralField,
    phi1: SpectralField,
    N0: SpectralField,
    N1: SpectralField,
    params: PhysParams,
    tol: float = 1e-10,
    maxiter: int = 500,
) -> tuple[FieldState, GaussSolveInfo]:
    """Complete free data to a Gauss- and Lorenz-compatible initial state.

    Solves the Gauss constraint

        (Laplace - 2 e^2 |phi0|^2) a00
            = d_1 a11 + d_2 a21 + kappa (d_1 a20 - d_2 a10)
              + 2 e Im(phi0 conj(phi1))

    for the temporal potential a00, then sets the Lorenz-compatible
    d_t A_0 = d_1 a10 + d_2 a20.  The sign of the potential term is the
    one consistent with the evolution system: it makes gauss_residual
    vanish on the output and renders the operator coercive.  The solve
    runs GMRES on the <grad>^{-2}-preconditioned form
    a = <grad>^{-2}((1 - V) a - f), V = 2 e^2 |phi0|^2, and is verified
    against the unpreconditioned residual.  With e = 0 (or phi0 = 0)
    the operator reduces to the Laplacian; the right side is then
    projected to mean zero and the projection magnitude reported
    (nonzero means torus-incompatible data).
    """
    grid = a10.grid
    for f in (a11, a20, a21, phi0, phi1, N0, N1):
        if f.grid != grid:
            raise GridMismatchError("data fields live on different grids")
    sym = grid_symbols(grid)
    n = grid.n

    # Im(phi0 conj(phi1)), as an exact band projection
    cross = dealias_product(
        phi0,
        SpectralField(grid, np.conj(phi1.physical), PHYSICAL, False),
        degree=2,
    ).to_frequency()
    im_spec = _imag_part_spectrum(grid, cross.data)

    f_spec = (
        sym["ixi1"] * a11.spectrum
        + sym["ixi2"] * a21.spectrum
        + params.kappa * (sym["ixi1"] * a20.spectrum - sym["ixi2"] * a10.spectrum)
        + 2.0 * params.e * im_spec
    )
    grid.zero_nyquist(f_spec)
    f_l2 = grid.dx * float(np.linalg.norm(f_spec))
    scale = max(1.0, f_l2)

    v_phys = None
    if params.e != 0.0 and np.max(np.abs(phi0.spectrum)) > 0.0:
        phi_big = oversampled_physical(grid, phi0.spectrum)
        v_phys = 2.0 * params.e**2 * (phi_big.real**2 + phi_big.imag**2)

    lap = sym["lap"]
    inv_b2 = sym["inv_bessel2"]

    def av_spec(a_spec: np.ndarray) -> np.ndarray:
        """V * a as an exact band projection."""
        if v_phys is None:
            return np.zeros_like(a_spec)
        prod = v_phys * oversampled_physical(grid, a_spec)
        return projected_spectrum(grid, prod)

    def residual_spec(a_spec: np.ndarray) -> np.ndarray:
        return lap * a_spec - av_spec(a_spec) - f_spec

    if v_phys is None:
        # pure Poisson step: project the right side to mean zero
        mean_defect = abs(f_spec[0, 0]) / n  # physical mean = spec[0,0] / n
        if mean_defect > tol * scale:
            raise ConstraintError(
                f"Gauss data incompatible on the torus: right side has mean {mean_defect:.3e}"
            )
        a_spec = np.zeros_like(f_spec)
        nz = lap != 0.0
        a_spec[nz] = f_spec[nz] / lap[nz]
        res = grid.dx * float(np.linalg.norm(residual_spec(a_spec)))
        info = GaussSolveInfo(0, res, f_l2, float(mean_defect))
    else:
        shape = (n, n)
        size = 2 * n * n  # real and imaginary parts stacked

        def to_vec(s):
            return np.concatenate([s.real.ravel(), s.imag.ravel()])

        def to_spec(x):
            return x[: n * n].reshape(shape) + 1j * x[n * n :].reshape(shape)

        def matvec(x):
            s = to_spec(x)
            # (I - T) s with T = <grad>^{-2} ((1 - V) s)
            ts = inv_b2 * (s - av_spec(s))
            return to_vec(s - ts)

        op = _spla.LinearOperator((size, size), matvec=matvec)
        b = to_vec(-inv_b2 * f_spec)
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        restart = max(1, min(50, maxiter))
        x, _code = _spla.gmres(
            op,
            b,
            rtol=1e-13,
            atol=0.0,
            restart=restart,
            maxiter=max(1, maxiter // restart),
            callback=count,
            callback_type="pr_norm",
        )
        a_spec = to_spec(x)
        grid.zero_nyquist(a_spec)
        res = grid.dx * float(np.linalg.norm(residual_spec(a_spec)))
        if res > tol * scale:
            raise NonConvergenceError(
                f"Gauss solve did not reach tolerance: residual {res:.3e} after {iters} iterations",
                residual=res,
                iterations=iters,
            )
        mean_defect = abs(residual_spec(a_spec)[0, 0]) / n
        if mean_defect > tol * scale:
            raise ConstraintError(
                f"Gauss data incompatible on the torus: mean defect {mean_defect:.3e}"
            )
        info = GaussSolveInfo(iters, res, f_l2, float(mean_defect))

    a00 = SpectralField(grid, a_spec, FREQUENCY, real=True)
    a01_spec = sym["ixi1"] * a10.spectrum + sym["ixi2"] * a20.spectrum
    a01 = SpectralField(grid, grid.zero_nyquist(a01_spec), FREQUENCY, real=True)

    state = FieldState(
        A0=a00,
        A1=a10.to_frequency(),
        A2=a20.to_frequency(),
        phi=phi0.to_frequency(),
        N=N0.to_frequency(),
        dA0=a01,
        dA1=a11.to_frequency(),
        dA2=a21.to_frequency(),
        dphi=phi1.to_frequency(),
        dN=N1.to_frequency(),
        t=0.0,
    )
    return state, info


def _imag_part_spectrum(grid: Grid2D, spec: np.ndarray) -> np.ndarray:
    """Spectrum of Im(w) given the spectrum of a complex field w."""
    refl = np.conj(np.roll(np.flip(spec, axis=(-2, -1)), shift=(1, 1), axis=(-2, -1)))
    return (spec - refl) / 2j


def apply_spatial_gauge(state: FieldState, chi: SpectralField, params: PhysParams) -> FieldState:
    """Time-independent gauge change A_j -> A_j + d_j chi, phi -> e^{ie chi} phi.

    chi must be real and smooth; the exponential is evaluated pointwise,
    so the output is only as band-limited as e^{ie chi} phi is smooth.
    """
    sym = grid_symbols(state.grid)
    gspec = chi.spectrum
    d1 = SpectralField(state.grid, sym["ixi1"] * gspec, FREQUENCY, real=True)
    d2 = SpectralField(state.grid, sym["ixi2"] * gspec, FREQUENCY, real=True)
    phase = np.exp(1j * params.e * chi.physical)
    phi_new = SpectralField(state.grid, phase * state.phi.physical, "physical", False)
    dphi_new = SpectralField(state.grid, phase * state.dphi.physical, "physical", False)
    a1 = SpectralField(state.grid, state.A1.spectrum + d1.data, FREQUENCY, real=True)
    a2 = SpectralField(state.grid, state.A2.spectrum + d2.data, FREQUENCY, real=True)
    return FieldState(
        A0=state.A0,
        A1=a1,
        A2=a2,
        phi=phi_new,
        N=state.N,
        dA0=state.dA0,
        dA1=state.dA1,
        dA2=state.dA2,
        dphi=dphi_new,
        dN=state.dN,
        t=state.t,
    )
