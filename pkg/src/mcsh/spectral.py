"""Fourier pseudo-spectral core on a periodic square.

Conventions, fixed once here and relied on everywhere else:

* grid points x_j = j * period / n, j = 0..n-1 per axis
* angular frequency lattice xi = (2*pi/period) * {-n/2, ..., n/2 - 1}
* frequency data is stored with the unitary normalization
  (forward transform = FFT / n), so Parseval holds without factors
* the single asymmetric Nyquist row/column (integer index n/2) is not
  part of the working band: every multiplier application zeroes it, and
  the band-limited field generators never populate it.  This keeps odd
  derivatives of real fields real.
* |grad|^{-1} sends the zero mode to zero
* products of fields are formed on a zero-padded grid of twice the
  size, which makes quadratic and cubic nonlinearities alias-free for
  working-band inputs
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as _fft

from ._env import worker_count
from .errors import BasisError, ConfigurationError, GridMismatchError

PHYSICAL = "physical"
FREQUENCY = "frequency"


def _workers() -> int:
    return worker_count()


class Grid2D:
    """Uniform periodic grid on [0, period)^2 with n points per axis.

    n must be even and at least 8 so the frequency lattice has a clean
    symmetric working band after dropping the Nyquist row/column.
    """

    def __init__(self, n: int, period: float = 2.0 * np.pi * 8.0):
        if n < 8 or n % 2 != 0:
            raise ConfigurationError(f"grid size must be even and >= 8, got {n}")
        if not np.isfinite(period) or period <= 0:
            raise ConfigurationError(f"period must be positive, got {period}")
        self.n = int(n)
        self.period = float(period)
        self.dx = self.period / self.n
        self.dk = 2.0 * np.pi / self.period

        axis = np.arange(self.n) * self.dx
        self.x1 = axis[:, None] * np.ones((1, self.n))
        self.x2 = np.ones((self.n, 1)) * axis[None, :]

        freqs = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        self.xi1 = freqs[:, None] * np.ones((1, self.n))
        self.xi2 = np.ones((self.n, 1)) * freqs[None, :]
        self.mag = np.hypot(self.xi1, self.xi2)
        self.bessel = np.sqrt(1.0 + self.mag**2)
        self.nyquist = self.n // 2

    def __eq__(self, other):
        return (
            isinstance(other, Grid2D)
            and other.n == self.n
            and other.period == self.period
        )

    def __hash__(self):
        return hash((self.n, self.period))

    def __repr__(self):
        return f"Grid2D(n={self.n}, period={self.period!r})"

    # -- quadrature -----------------------------------------------------

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal (here: exact periodic) quadrature of a sample array."""
        return float(np.sum(values).real) * self.dx**2

    def l2(self, values: np.ndarray) -> float:
        """Continuum-normalized L^2 norm of physical samples."""
        return float(np.sqrt(np.sum(np.abs(values) ** 2))) * self.dx

    # -- band bookkeeping -----------------------------------------------

    def zero_nyquist(self, spectrum: np.ndarray) -> np.ndarray:
        """Zero the asymmetric row/column in place and return the array."""
        spectrum[..., self.nyquist, :] = 0.0
        spectrum[..., :, self.nyquist] = 0.0
        return spectrum

    def band_edge_fraction(self, spectrum: np.ndarray, width: int | None = None) -> float:
        """Fraction of spectral mass in the outermost frequency shell.

        Used as a resolution guard: well-resolved data has essentially no
        mass within `width` integer frequencies of the band edge.
        """
        if width is None:
            width = max(1, self.n // 8)
        idx = np.fft.fftfreq(self.n, d=1.0 / self.n)
        near = np.maximum(np.abs(idx[:, None]), np.abs(idx[None, :])) >= self.nyquist - width
        total = float(np.sum(np.abs(spectrum) ** 2))
        if total == 0.0:
            return 0.0
        return float(np.sum(np.abs(spectrum[..., near]) ** 2)) / total


def fft_forward(values: np.ndarray) -> np.ndarray:
    """Unitary 2D FFT over the trailing two axes."""
    return _fft.fft2(values, norm="ortho", workers=_workers())


def fft_inverse(spectrum: np.ndarray) -> np.ndarray:
    """Unitary 2D inverse FFT over the trailing two axes."""
    return _fft.ifft2(spectrum, norm="ortho", workers=_workers())


@dataclass
class SpectralField:
    """A scalar field on a Grid2D, in physical or frequency basis.

    `real` marks fields that are real-valued in physical space; the
    built-in multipliers preserve that property and `to_physical`
    discards the roundoff imaginary part for them.
    """

    grid: Grid2D
    data: np.ndarray
    basis: str = PHYSICAL
    real: bool = False

    def __post_init__(self):
        if self.basis not in (PHYSICAL, FREQUENCY):
            raise BasisError(f"unknown basis {self.basis!r}")
        if self.data.shape[-2:] != (self.grid.n, self.grid.n):
            raise GridMismatchError(
                f"data shape {self.data.shape} does not match grid n={self.grid.n}"
            )

    def to_frequency(self) -> "SpectralField":
        if self.basis == FREQUENCY:
            return self
        return SpectralField(self.grid, fft_forward(self.data), FREQUENCY, self.real)

    def to_physical(self) -> "SpectralField":
        if self.basis == PHYSICAL:
            return self
        values = fft_inverse(self.data)
        if self.real:
            values = values.real
        return SpectralField(self.grid, values, PHYSICAL, self.real)

    @property
    def physical(self) -> np.ndarray:
        return self.to_physical().data

    @property
    def spectrum(self) -> np.ndarray:
        return self.to_frequency().data

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.data.copy(), self.basis, self.real)

    def l2(self) -> float:
        # Parseval: same value in either basis under the unitary convention.
        return self.grid.dx * float(np.linalg.norm(self.data.ravel()))


def as_field(grid: Grid2D, values: np.ndarray, real: bool | None = None) -> SpectralField:
    """Wrap physical sample values as a SpectralField."""
    if real is None:
        real = not np.iscomplexobj(values)
    data = np.asarray(values, dtype=float if real else complex)
    return SpectralField(grid, data, PHYSICAL, real)


# -- multipliers ---------------------------------------------------------


@dataclass(frozen=True)
class MultiplierSpec:
    """Fourier multiplier: frequency-space symbol evaluated on the lattice."""

    name: str
    symbol: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        return MultiplierSpec(
            f"{self.name}*{other.name}",
            lambda k1, k2, a=self.symbol, b=other.symbol: a(k1, k2) * b(k1, k2),
        )


def bessel_power(alpha: float) -> MultiplierSpec:
    """<grad>^alpha with symbol (1 + |xi|^2)^(alpha/2)."""
    return MultiplierSpec(
        f"bessel^{alpha}", lambda k1, k2: (1.0 + k1**2 + k2**2) ** (alpha / 2.0)
    )


def magnitude_power(alpha: float) -> MultiplierSpec:
    """|grad|^alpha; for alpha < 0 the zero mode is sent to zero."""

    def sym(k1, k2):
        m = np.hypot(k1, k2)
        if alpha >= 0:
            return m**alpha
        with np.errstate(divide="ignore"):
            out = np.where(m > 0, m, 1.0) ** alpha
        return np.where(m > 0, out, 0.0)

    return MultiplierSpec(f"mag^{alpha}", sym)


def inv_magnitude() -> MultiplierSpec:
    """|grad|^{-1} with the zero mode mapped to zero."""
    return magnitude_power(-1.0)


def partial_derivative(j: int) -> MultiplierSpec:
    """d/dx_j, j in {1, 2}."""
    if j not in (1, 2):
        raise ConfigurationError(f"axis must be 1 or 2, got {j}")
    return MultiplierSpec(f"d_{j}", lambda k1, k2: 1j * (k1 if j == 1 else k2))


def riesz(j: int) -> MultiplierSpec:
    """R_j = d_j <grad>^{-1}."""
    if j not in (1, 2):
        raise ConfigurationError(f"axis must be 1 or 2, got {j}")

    def sym(k1, k2):
        k = k1 if j == 1 else k2
        return 1j * k / np.sqrt(1.0 + k1**2 + k2**2)

    return MultiplierSpec(f"R_{j}", sym)


def symbol_on_grid(grid: Grid2D, mult: MultiplierSpec) -> np.ndarray:
    values = np.asarray(mult.symbol(grid.xi1, grid.xi2))
    if not np.all(np.isfinite(values)):
        raise ConfigurationError(f"multiplier {mult.name!r} is not finite on the lattice")
    return values


def apply_multiplier(field: SpectralField, mult: MultiplierSpec) -> SpectralField:
    """Apply a Fourier multiplier; the result is returned in the input basis.

    The Nyquist row/column of the output spectrum is always zeroed.
    """
    sym = symbol_on_grid(field.grid, mult)
    spec = field.spectrum * sym
    field.grid.zero_nyquist(spec)
    out = SpectralField(field.grid, spec, FREQUENCY, field.real)
    return out.to_physical() if field.basis == PHYSICAL else out


# -- zero padding / dealiased products ------------------------------------


def _band_indices(n: int, m: int) -> np.ndarray:
    """Indices in an m-lattice for each mode of an n-lattice (n <= m)."""
    freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    return np.where(freqs >= 0, freqs, m + freqs)


def pad_spectrum(spec: np.ndarray, n: int, m: int) -> np.ndarray:
    """Embed an n-band coefficient array into an m-lattice (trailing axes)."""
    idx = _band_indices(n, m)
    out = np.zeros(spec.shape[:-2] + (m, m), dtype=complex)
    out[..., idx[:, None], idx[None, :]] = spec
    return out

def truncate_spectrum(spec: np.ndarray, m: int, n: int) -> np.ndarray:
    """Restrict an m-lattice coefficient array to the n-band (trailing axes)."""
    idx = _band_indices(n, m)
    return spec[..., idx[:, None], idx[None, :]]


def oversampled_physical(grid: Grid2D, spectrum: np.ndarray, m: int | None = None) -> np.ndarray:
    """Sample a band-limited field on a finer m x m grid (trailing axes).

    The unitary normalization differs between lattices by m/n, so the
    returned samples are the exact point values of the trigonometric
    interpolant.
    """
    if m is None:
        m = 2 * grid.n
    big = pad_spectrum(spectrum, grid.n, m) * (m / grid.n)
    return _fft.ifft2(big, norm="ortho", workers=_workers())


def projected_spectrum(grid: Grid2D, values: np.ndarray, m: int | None = None) -> np.ndarray:
    """Working-band unitary spectrum of samples given on an m x m grid.

    Inverse of oversampled_physical for band-limited data; for products
    formed pointwise on the finer grid it returns the exact band
    projection.  The Nyquist row/column is zeroed.
    """
    if m is None:
        m = 2 * grid.n
    spec = truncate_spectrum(_fft.fft2(values, norm="ortho", workers=_workers()), m, grid.n)
    spec = spec / (m / grid.n)
    return grid.zero_nyquist(spec)


def dealias_product(*fields: SpectralField, degree: int | None = None) -> SpectralField:
    """Pointwise product of fields, computed alias-free.

    The factors are zero-padded to a grid of twice the size before the
    pointwise multiply, then the result is truncated back to the working
    band.  With working-band inputs this is exact for products of total
    polynomial degree up to three.
    """
    if not fields:
        raise ConfigurationError("need at least one factor")
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("product factors live on different grids")
    if degree is None:
        degree = len(fields)
    if degree not in (2, 3):
        raise ConfigurationError(f"dealiasing supports degree 2 or 3, got {degree}")

    m = 2 * grid.n
    prod = None
    for f in fields:
        phys = oversampled_physical(grid, f.spectrum, m)
        prod = phys if prod is None else prod * phys
    spec = projected_spectrum(grid, prod, m)
    real = all(f.real for f in fields)
    out = SpectralField(grid, spec, FREQUENCY, real)
    return out.to_physical() if fields[0].basis == PHYSICAL else out


# -- time windowing --------------------------------------------------------


@dataclass
class WindowInfo:
    kind: str
    energy_factor: float
    samples: np.ndarray = field(repr=False, default=None)


def window_samples(nt: int, kind: str = "hann") -> np.ndarray:
    if nt < 8:
        raise ConfigurationError(f"need at least 8 time samples, got {nt}")
    if kind == "hann":
        i = np.arange(nt)
        return np.sin(np.pi * i / (nt - 1)) ** 2
    if kind == "none":
        return np.ones(nt)
    raise ConfigurationError(f"unknown window kind {kind!r}")


def window_time(values: np.ndarray, kind: str = "hann", axis: int = 0):
    """Taper a time-sample axis; returns (windowed values, WindowInfo).

    The energy factor sqrt(mean(w^2)) is reported so norms of windowed
    trajectories can be corrected for the tapered mass.
    """
    nt = values.shape[axis]
    w = window_samples(nt, kind)
    shape = [1] * values.ndim
    shape[axis] = nt
    windowed = values * w.reshape(shape)
    info = WindowInfo(kind=kind, energy_factor=float(np.sqrt(np.mean(w**2))), samples=w)
    return windowed, info


# -- band-limited random fields --------------------------------------------


def _band_mask(grid: Grid2D, kmin: int, kmax: int | None) -> np.ndarray:
    idx = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    radius = np.hypot(idx[:, None], idx[None, :])
    top = grid.nyquist - 1 if kmax is None else min(kmax, grid.nyquist - 1)
    return (radius >= kmin) & (radius <= top)


def random_complex_field(
    grid: Grid2D,
    rng: np.random.Generator,
    kmax: int | None = None,
    kmin: int = 0,
    amplitude: float = 1.0,
) -> SpectralField:
    """Complex field with iid Gaussian modes in the integer band [kmin, kmax]."""
    z = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    z *= _band_mask(grid, kmin, kmax)
    grid.zero_nyquist(z)
    nmodes = max(1, int(np.count_nonzero(np.abs(z) > 0)))
    z *= amplitude / np.sqrt(nmodes)
    return SpectralField(grid, z, FREQUENCY, real=False).to_physical()


def random_real_field(
    grid: Grid2D,
    rng: np.random.Generator,
    kmax: int | None = None,
    kmin: int = 0,
    amplitude: float = 1.0,
) -> SpectralField:
    """Real field: Hermitian-symmetrized band-limited Gaussian modes."""
    z = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    # conj(z) sampled at -xi makes the spectrum Hermitian
    zr = np.conj(np.roll(np.flip(z, axis=(0, 1)), shift=(1, 1), axis=(0, 1)))
    z = 0.5 * (z + zr)
    z *= _band_mask(grid, kmin, kmax)
    grid.zero_nyquist(z)
    nmodes = max(1, int(np.count_nonzero(np.abs(z) > 0)))
    z *= amplitude / np.sqrt(nmodes)
    return SpectralField(grid, z, FREQUENCY, real=True).to_physical()


def gaussian_bump(
    grid: Grid2D,
    amplitude: float = 1.0,
    sigma: float = 1.5,
    center: tuple[float, float] | None = None,
) -> np.ndarray:
    """Periodized Gaussian bump sample array (sum over nearest images)."""
    if center is None:
        center = (grid.period / 2.0, grid.period / 2.0)
    out = np.zeros((grid.n, grid.n))
    for sx in (-1, 0, 1):
        for sy in (-1, 0, 1):
            d1 = grid.x1 - center[0] + sx * grid.period
            d2 = grid.x2 - center[1] + sy * grid.period
            out += np.exp(-(d1**2 + d2**2) / (2.0 * sigma**2))
    return amplitude * out
