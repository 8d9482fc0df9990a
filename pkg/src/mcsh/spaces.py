"""Fourier-Lebesgue and wave-Sobolev norms, scaling laws, and the
regularity-threshold arithmetic.

Normalization.  Spectra are weighted in the continuum transform
convention

    u_hat(xi_k) = integral u(x) exp(-i xi_k . x) dx  =  (P^2/n) U_k

with U the unitary DFT, and quadrature sums carry the cell measure
(dk)^2 (and dtau for space-time lattices).  Under grid refinement the
discrete norms then converge to their continuum values, which is what
makes refined-grid oracles meaningful, and an exact dilation
u -> lam u(lam x) (same coefficients times lam on a grid of period
P/lam) reproduces the homogeneous scaling law

    |lam u(lam .)|_{s,r,hom} = lam^(1 + s - 2/r) |u|_{s,r,hom}

identically, not approximately.  Two consequences of the convention
are worth pinning: a plane wave a exp(ik.x) has norm
|a| <k>^s P^2 (dk)^(2/r'), and at s=0, r=2 the norm equals
2 pi ||u||_{L^2} exactly (discrete Parseval).

Large dual exponents (r near 1) are handled by factoring out the peak
weight before summation so the quadrature cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
import scipy.fft as _fft

from ._env import worker_count
from .errors import ConfigurationError, PreconditionError, ResolutionError
from .spectral import Grid2D, SpectralField, WindowInfo, window_time


def _dual_exponent(r) -> float:
    rf = float(r)
    if rf <= 1.0:
        raise ConfigurationError(f"r must lie in (1, 2], got {r}")
    if rf > 2.0:
        raise ConfigurationError(f"r must lie in (1, 2], got {r}")
    return rf / (rf - 1.0)


def _quadrature(weighted: np.ndarray, cell: float, rprime: float) -> float:
    """(sum |w|^r' * cell)^(1/r'), evaluated overflow-safely."""
    peak = float(np.max(weighted))
    if peak == 0.0 or not np.isfinite(peak):
        return peak
    total = float(np.sum((weighted / peak) ** rprime)) * cell
    return peak * total ** (1.0 / rprime)


def continuum_spectrum(u: SpectralField) -> np.ndarray:
    """|u_hat| in the continuum transform convention."""
    g = u.grid
    return (g.period**2 / g.n) * np.abs(u.spectrum)


def fl_norm(u: SpectralField, s: float, r) -> float:
    """Fourier-Lebesgue norm: (sum (<xi>^s |u_hat|)^{r'} (dk)^2)^{1/r'}."""
    rp = _dual_exponent(r)
    g = u.grid
    w = g.bessel ** float(s) * continuum_spectrum(u)
    return _quadrature(w, g.dk**2, rp)


def fl_norm_homogeneous(u: SpectralField, s: float, r) -> float:
    """Homogeneous variant with weight |xi|^s; the zero mode is excluded."""
    rp = _dual_exponent(r)
    g = u.grid
    mag = g.mag.copy()
    mag[0, 0] = 1.0
    w = mag ** float(s) * continuum_spectrum(u)
    w[0, 0] = 0.0
    return _quadrature(w, g.dk**2, rp)


def dilate(u: SpectralField, lam: float) -> SpectralField:
    """Exact dilation u -> lam u(lam x): same modes on a grid of period
    P/lam, coefficients multiplied by lam."""
    if lam <= 0 or not np.isfinite(lam):
        raise ConfigurationError(f"dilation factor must be positive, got {lam}")
    g = u.grid
    small = Grid2D(g.n, g.period / lam)
    return SpectralField(small, lam * u.spectrum.copy(), "frequency", u.real)


def scaling_check(u0: SpectralField, lam: float, s: float, r, guard: float = 1e-8) -> float:
    """Measured/predicted homogeneous-norm ratio under exact dilation.

    Returns 1 up to rounding when the field resolves on its grid; data
    with relative spectral mass above `guard` near the band edge raises
    ResolutionError since the dilation argument needs a clean band.
    """
    frac = u0.grid.band_edge_fraction(u0.spectrum)
    if frac > guard:
        raise ResolutionError(
            f"band-edge spectral fraction {frac:.3e} exceeds {guard:.1e}; refine the grid"
        )
    base = fl_norm_homogeneous(u0, s, r)
    if base == 0.0:
        raise ConfigurationError("cannot form a ratio for the zero field")
    measured = fl_norm_homogeneous(dilate(u0, lam), s, r) / base
    predicted = float(lam) ** (1.0 + float(s) - 2.0 / float(r))
    return measured / predicted


# -- space-time fields and norms --------------------------------------------


@dataclass
class SpaceTimeField:
    """Uniform time samples of a spatial field over [0, T).

    values has shape (nt, n, n).  The window is applied exactly once,
    at construction; its metadata rides along so norms can report the
    taper correction.
    """

    grid: Grid2D
    values: np.ndarray
    T: float
    window: WindowInfo | None = None

    def __post_init__(self):
        nt = self.values.shape[0]
        if nt < 8 or nt & (nt - 1):
            raise ConfigurationError(f"nt must be a power of two >= 8, got {nt}")
        if self.values.shape[1:] != (self.grid.n, self.grid.n):
            raise ConfigurationError(
                f"values shape {self.values.shape} does not match grid n={self.grid.n}"
            )
        if self.T <= 0:
            raise ConfigurationError(f"time extent must be positive, got {self.T}")

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_samples(cls, grid: Grid2D, values: np.ndarray, T: float, window: str = "hann"):
        tapered, info = window_time(np.asarray(values, dtype=complex), kind=window, axis=0)
        return cls(grid, tapered, T, info)

    def transform(self) -> np.ndarray:
        """Space-time transform in the continuum convention
        (T/nt)(P/n)^2 * raw DFT."""
        raw = _fft.fftn(self.values, axes=(0, 1, 2), workers=worker_count())
        return (self.T / self.nt) * (self.grid.period / self.grid.n) ** 2 * raw

    def tau(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.nt, d=self.T / self.nt)


def _st_weights(u: SpaceTimeField):
    tau = u.tau()[:, None, None]
    mag = u.grid.mag[None, :, :]
    bessel = u.grid.bessel[None, :, :]
    return tau, mag, bessel


def _require_window(u: SpaceTimeField):
    if u.window is None:
        raise PreconditionError(
            "space-time norms require a windowed field; use from_samples", residual=0.0
        )


def wave_sobolev_norm(u: SpaceTimeField, s: float, b: float, r) -> float:
    """|| <xi>^s <|tau| - |xi|>^b u_tilde ||_{L^{r'}} on the (tau, xi) lattice."""
    _require_window(u)
    rp = _dual_exponent(r)
    tau, mag, bessel = _st_weights(u)
    w = bessel ** float(s) * (1.0 + (np.abs(tau) - mag) ** 2) ** (float(b) / 2.0)
    dtau = 2.0 * np.pi / u.T
    return _quadrature(w * np.abs(u.transform()), dtau * u.grid.dk**2, rp)


def signed_norm(u: SpaceTimeField, s: float, b: float, r, sign: int) -> float:
    """|| <xi>^s <tau + sign |xi|>^b u_tilde ||; sign=-1 weights <tau - |xi|>.

    A forward free wave exp(it|grad|) f concentrates at tau = +|xi|,
    which is zero modulation for the sign=-1 weight: with b < 0 the
    wave keeps its mass there while the sign=+1 norm suppresses it.
    For b <= 0 both signed norms are bounded by wave_sobolev_norm
    pointwise (the two-sided modulation is the smaller of the two
    signed ones); for b >= 0 the bound reverses.
    """
    if sign not in (+1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    _require_window(u)
    rp = _dual_exponent(r)
    tau, mag, bessel = _st_weights(u)
    w = bessel ** float(s) * (1.0 + (tau + sign * mag) ** 2) ** (float(b) / 2.0)
    dtau = 2.0 * np.pi / u.T
    return _quadrature(w * np.abs(u.transform()), dtau * u.grid.dk**2, rp)


def window_factor(info: WindowInfo, r) -> float:
    """Taper mass correction (mean w^{r'})^{1/r'} for quadrature norms."""
    rp = _dual_exponent(r)
    return float(np.mean(info.samples ** rp) ** (1.0 / rp))


# -- regularity-threshold arithmetic (exact rationals) -----------------------


@dataclass(frozen=True)
class RegularityParams:
    """One point of the (r; s, l, m; b) parameter landscape."""

    r: Fraction
    s: Fraction
    l: Fraction
    m: Fraction
    b: Fraction = Fraction(0)
    eps: Fraction = Fraction(1, 100)


def _frac(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ConfigurationError(f"non-finite threshold value {x}")
        return Fraction(x).limit_denominator(10**12)
    raise ConfigurationError(f"cannot interpret {x!r} as an exact rational")


def _check_r(r: Fraction, allow_one: bool = False):
    lo_ok = r > 1 or (allow_one and r == 1)
    if not (lo_ok and r <= 2):
        raise ConfigurationError(f"r must lie in (1, 2], got {r}")


def admissible(r, s, l, m, which: str = "thm11") -> dict:
    """Exact-rational check of a regularity triple against one statement.

    Returns {"which", "ok", "violations", "values"} with every
    inequality evaluated in Fraction arithmetic, so boundary cases are
    decided exactly rather than to rounding.
    """
    r, s, l, m = _frac(r), _frac(s), _frac(l), _frac(m)
    _check_r(r)
    viol: list[str] = []

    def need(cond: bool, text: str):
        if not cond:
            viol.append(text)

    if which == "thm11":
        need(s >= 1 and l >= 1 and m >= 1, "s, l, m >= 1")
        need(s > Fraction(25, 16) / r - Fraction(1, 4), "s > 25/(16r) - 1/4")
        need(l > Fraction(13, 8) / r - Fraction(1, 2), "l > 13/(8r) - 1/2")
        need(m > Fraction(13, 8) / r - Fraction(1, 2), "m > 13/(8r) - 1/2")
        need(s - 1 <= l <= s + 1, "s - 1 <= l <= s + 1")
        need(s - 1 <= m <= s + 1, "s - 1 <= m <= s + 1")
        need(2 * l - s > Fraction(7, 4) / r - 1, "2l - s > 7/(4r) - 1")
        need(2 * s - l > Fraction(3, 2) / r, "2s - l > 3/(2r)")
        need(2 * m - s > Fraction(7, 4) / r - 1, "2m - s > 7/(4r) - 1")
        need(2 * s - m > Fraction(7, 4) / r - 1, "2s - m > 7/(4r) - 1")
    elif which == "thm12":
        need(r == 2, "r = 2")
        need(Fraction(1, 2) < s < 1, "1/2 < s < 1")
        need(l < 2 * s - Fraction(3, 4), "l < 2s - 3/4")
        need(m == Fraction(1, 2), "m = 1/2")
    elif which == "cor13":
        # the corollary pins the triple up to the common margin eps > 0
        eps = s - (Fraction(13, 8) / r - Fraction(5, 16))
        need(eps > 0, "s = 13/(8r) - 5/16 + eps with eps > 0")
        need(l == Fraction(7, 4) / r - Fraction(5, 8) + eps, "l = 7/(4r) - 5/8 + eps (same eps)")
        need(m == Fraction(5, 4) / r - Fraction(1, 8) + eps, "m = 5/(4r) - 1/8 + eps (same eps)")
    else:
        raise ConfigurationError(f"unknown statement {which!r}")

    return {
        "which": which,
        "ok": not viol,
        "violations": viol,
        "values": {"r": str(r), "s": str(s), "l": str(l), "m": str(m)},
    }


def cor13_values(r, eps=Fraction(1, 100)) -> tuple[Fraction, Fraction, Fraction]:
    """The minimal-regularity triple (s, l, m) at exponent r, margin eps."""
    r, eps = _frac(r), _frac(eps)
    _check_r(r)
    if eps <= 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    s = Fraction(13, 8) / r - Fraction(5, 16) + eps
    l = Fraction(7, 4) / r - Fraction(5, 8) + eps
    m = Fraction(5, 4) / r - Fraction(1, 8) + eps
    return s, l, m


def critical_exponent(r) -> Fraction:
    """Scaling-critical Sobolev index 2/r - 1 (r = 1 allowed as a limit)."""
    r = _frac(r)
    _check_r(r, allow_one=True)
    return Fraction(2) / r - 1


def gap(r, which: str = "thm11") -> tuple[Fraction, Fraction, Fraction]:
    """Distance (s, l, m thresholds) - critical exponent, exact.

    For thm11 the componentwise threshold is the larger of the stated
    inequality bound and the floor 1; joint conditions can bind tighter
    at intermediate r, so this is the componentwise gap only.  r = 1 is
    allowed as the limiting case.
    """
    r = _frac(r)
    _check_r(r, allow_one=True)
    crit = Fraction(2) / r - 1
    if which == "thm11":
        s_min = max(Fraction(1), Fraction(25, 16) / r - Fraction(1, 4))
        l_min = max(Fraction(1), Fraction(13, 8) / r - Fraction(1, 2))
        return (s_min - crit, l_min - crit, l_min - crit)
    if which == "cor13":
        s, l, m = (
            Fraction(13, 8) / r - Fraction(5, 16),
            Fraction(7, 4) / r - Fraction(5, 8),
            Fraction(5, 4) / r - Fraction(1, 8),
        )
        return (s - crit, l - crit, m - crit)
    if which == "thm12":
        if r != 2:
            raise ConfigurationError("the r = 2 statement has no other exponents")
        return (Fraction(1, 2), Fraction(1, 4), Fraction(1, 2))
    raise ConfigurationError(f"unknown statement {which!r}")


def gap_report(r, which: str = "thm11") -> dict:
    g = gap(r, which)
    return {
        "which": which,
        "r": str(_frac(r)),
        "critical": str(critical_exponent(r)),
        "gap": {"s": str(g[0]), "l": str(g[1]), "m": str(g[2])},
    }
