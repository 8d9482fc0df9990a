"""Randomized numerical probes of the bilinear and cubic space-time
estimates: ratio statistics of LHS norm over product of RHS norms on
structured random ensembles.

A probe is evidence, not verification.  Windowed discrete norms
approximate restriction norms only up to uncontrolled constants, so
every report carries an explicit "heuristic" flag, and the constants
are never asserted against fixed bounds.  What the probes can show is
structural: in-hypothesis ratio maxima are stable when the frequency
band is dilated, while hypothesis-violating parameter choices produce
ratios that grow with the band, evidence that no uniform constant
exists there.

Ensemble structure.  Purely random-phase waves only realize the
average case of a product estimate (by Parseval, the expected product
L2 mass is independent of the support geometry), so an ensemble of
them cannot saturate the sharp thresholds and its max ratio decays
under band dilation even in-hypothesis.  Draws therefore cycle through
three constructions at a per-draw concentration scale sampled
log-uniformly between a fixed anchor and the dilated band top:

* diffuse: random phases across the whole band (average case),
* packet: aligned-phase ball spectrum with modulation width
  proportional to the scale, a coherent space-time bump whose
  concentration saturates the product thresholds,
* shell: random phases on a thin annulus (resonant interactions).

Band dilation multiplies the band top while the anchor stays fixed, so
the dilated ensemble still contains near-copies of the small-scale
draws.  In-hypothesis the maximum sits at the anchored scale and stays
put; out-of-hypothesis the top-scale packets take over and the maximum
grows with the dilation.

Wave placement: the space-time spectrum g((tau - sign <xi>)/width)
f_hat(xi) puts the spatial profile on a Gaussian modulation ridge along
one sheet of the cone.  A wave built with sheet sign -s has small
<tau + s|xi|> modulation, so it is the natural test element for the
sign-s signed norm; probes build each factor on the sheet opposite to
its designated norm sign.

Determinism: every random stream is seeded by the tuple
(seed, draw index[, factor slot]), the same at every band dilation, so
reports are bit-identical for identical specs and the dilation contrast
is not confounded by resampling noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from ._env import worker_count
from .errors import ConfigurationError, ResolutionError
from .spaces import SpaceTimeField, signed_norm, wave_sobolev_norm
from .spectral import (
    Grid2D,
    WindowInfo,
    magnitude_power,
    partial_derivative,
    random_complex_field,
    symbol_on_grid,
)

LEMMAS = ("L31", "L32", "L34", "L35", "L36", "L37", "estA")

STYLES = ("diffuse", "packet", "shell")
SCALE_ANCHOR = 2.0
_PACKET_WIDTH_FRACTION = 0.6
_PACKET_CARRIER_FRACTION = 0.65
_PACKET_ENVELOPE_FRACTION = 0.2
_SHELL_INNER_FRACTION = 0.8


# -- wave assembly ------------------------------------------------------------


def _check_resolution(grid: Grid2D, nt: int, T: float, fhat: np.ndarray,
                      width: float, sign: int) -> None:
    support = np.abs(fhat) > 1e-6 * np.abs(fhat).max()
    if int(support.sum()) < 4:
        raise ResolutionError("spatial spectrum holds fewer than 4 lattice modes")
    tau = 2.0 * np.pi * np.fft.fftfreq(nt, d=T / nt)
    centers = sign * grid.bessel[support]
    cover = np.sum(np.abs(tau[:, None] - centers[None, :]) <= 2.0 * width, axis=0)
    if int(cover.min()) < 4:
        raise ResolutionError(
            "modulation ridge covers fewer than 4 tau lattice points; "
            "enlarge width, nt, or T"
        )


def _assemble_wave(grid: Grid2D, nt: int, T: float, fhat: np.ndarray,
                   width: float, sign: int, t_center: float | None = None) -> SpaceTimeField:
    _check_resolution(grid, nt, T, fhat, width, sign)
    tau = 2.0 * np.pi * np.fft.fftfreq(nt, d=T / nt)
    profile = np.exp(
        -0.5 * ((tau[:, None, None] - sign * grid.bessel[None]) / width) ** 2
    ).astype(complex)
    if t_center is not None:
        profile *= np.exp(-1j * tau[:, None, None] * t_center)
    spec = profile * fhat[None]
    values = _fft.ifftn(spec, axes=(0, 1, 2), norm="ortho", workers=worker_count())
    return SpaceTimeField.from_samples(grid, values, T, window="hann")


def make_random_wave(
    band: tuple[float, float] = (0, 3),
    width: float = 1.0,
    sign: int = 1,
    seed: int = 0,
    n: int = 32,
    nt: int = 32,
    period: float = 2.0 * np.pi,
    T: float = 2.0 * np.pi,
) -> SpaceTimeField:
    """Windowed diffuse random wave concentrated on the tau = sign <xi>
    sheet: random band-limited spatial profile times a Gaussian
    modulation ridge.

    Raises ResolutionError when the band holds fewer than four lattice
    modes or the ridge of some band mode covers fewer than four tau
    lattice points within two widths.
    """
    if sign not in (+1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    if width <= 0.0:
        raise ConfigurationError(f"width must be positive, got {width}")
    grid = Grid2D(n, period)
    rng = np.random.default_rng(seed)
    f = random_complex_field(grid, rng, kmax=band[1], kmin=band[0])
    return _assemble_wave(grid, nt, T, f.spectrum, width, sign)


# -- space-time field algebra -------------------------------------------------


def _shifted_pad(spec: np.ndarray) -> np.ndarray:
    pads = [(s // 2, s // 2) for s in spec.shape]
    return np.fft.ifftshift(np.pad(np.fft.fftshift(spec), pads))


def st_upsample(u: SpaceTimeField) -> SpaceTimeField:
    """Exact spectral upsampling to a (2nt, 2n, 2n) lattice over the
    same (T, period), so pointwise products of band-limited factors
    stay alias-free."""
    spec = _fft.fftn(u.values, axes=(0, 1, 2), norm="ortho", workers=worker_count())
    big = _shifted_pad(spec) * np.sqrt(8.0)
    values = _fft.ifftn(big, axes=(0, 1, 2), norm="ortho", workers=worker_count())
    fine = Grid2D(2 * u.grid.n, u.grid.period)
    info = u.window and WindowInfo(kind=u.window.kind, energy_factor=u.window.energy_factor)
    return SpaceTimeField(fine, values, u.T, info)


def st_product(*factors: SpaceTimeField) -> SpaceTimeField:
    """Pointwise product on the doubled lattice.

    Exact for two working-band factors; for three factors exact while
    the summed spatial bands stay inside the doubled grid, which the
    Gaussian-envelope draws keep to a negligible residual.
    """
    if not factors:
        raise ConfigurationError("need at least one factor")
    ups = [st_upsample(f) for f in factors]
    values = ups[0].values.copy()
    for f in ups[1:]:
        if f.grid != ups[0].grid or f.values.shape != values.shape:
            raise ConfigurationError("product factors live on different lattices")
        values *= f.values
    kinds = ",".join(f.window.kind for f in factors if f.window)
    ef = float(np.prod([f.window.energy_factor for f in factors if f.window]))
    return SpaceTimeField(ups[0].grid, values, ups[0].T, WindowInfo(f"product({kinds})", ef))


def _apply_spatial(u: SpaceTimeField, symbol: np.ndarray) -> SpaceTimeField:
    spec = _fft.fftn(u.values, axes=(1, 2), norm="ortho", workers=worker_count())
    values = _fft.ifftn(spec * symbol[None], axes=(1, 2), norm="ortho", workers=worker_count())
    return SpaceTimeField(u.grid, values, u.T, u.window)


def _time_derivative(u: SpaceTimeField) -> SpaceTimeField:
    spec = _fft.fft(u.values, axis=0, workers=worker_count())
    tau = u.tau()[:, None, None]
    values = _fft.ifft(1j * tau * spec, axis=0, workers=worker_count())
    return SpaceTimeField(u.grid, values, u.T, u.window)


def st_nullform_q12(u: SpaceTimeField, v: SpaceTimeField) -> SpaceTimeField:
    """q12 on space-time fields: |grad|^-1 each factor, then the
    antisymmetric gradient product, alias-free."""
    g = u.grid
    inv = symbol_on_grid(g, magnitude_power(-1.0))
    d1 = symbol_on_grid(g, partial_derivative(1))
    d2 = symbol_on_grid(g, partial_derivative(2))
    iu, iv = _apply_spatial(u, inv), _apply_spatial(v, inv)
    a = st_product(_apply_spatial(iu, d1), _apply_spatial(iv, d2))
    b = st_product(_apply_spatial(iu, d2), _apply_spatial(iv, d1))
    return SpaceTimeField(a.grid, a.values - b.values, a.T, a.window)


def st_nullform_q0j(u: SpaceTimeField, v: SpaceTimeField, j: int) -> SpaceTimeField:
    """q0j on space-time fields; the time derivative is the tau-lattice
    derivative of the windowed samples (heuristic, like the norms)."""
    g = u.grid
    inv = symbol_on_grid(g, magnitude_power(-1.0))
    dj = symbol_on_grid(g, partial_derivative(j))
    iu, iv = _apply_spatial(u, inv), _apply_spatial(v, inv)
    a = st_product(_time_derivative(iu), _apply_spatial(iv, dj))
    b = st_product(_apply_spatial(iu, dj), _time_derivative(iv))
    return SpaceTimeField(a.grid, a.values - b.values, a.T, a.window)


# -- probe specification ------------------------------------------------------


@dataclass(frozen=True)
class ProbeSpec:
    """Which estimate to probe, at which parameters, on which ensemble.

    signs are the signed-norm signs of the first and second factor
    where the estimate uses signed norms; factors measured in two-sided
    norms ignore them.  band is the undilated (kmin, kmax) range; width
    is the modulation width of the diffuse and shell draws (packets
    scale theirs with the draw's concentration scale).  enforce=False
    skips the hypothesis check, which is how out-of-hypothesis negative
    controls are run.
    """

    lemma: str
    r: float = 2.0
    alpha1: float | None = None
    alpha2: float | None = None
    b: float | None = None
    b1: float | None = None
    b2: float | None = None
    s0: float | None = None
    s1: float | None = None
    signs: tuple[int, int] = (1, -1)
    count: int = 200
    band: tuple[float, float] = (0, 3)
    width: float = 1.0
    seed: int = 0
    n: int = 32
    nt: int = 32
    period: float = 2.0 * np.pi
    T: float = 2.0 * np.pi
    dilations: tuple[int, ...] = (1, 2)
    enforce: bool = True

    def __post_init__(self):
        if self.lemma not in LEMMAS:
            raise ConfigurationError(f"unknown lemma {self.lemma!r}; pick from {LEMMAS}")
        if not 1.0 < self.r <= 2.0:
            raise ConfigurationError(f"r must lie in (1, 2], got {self.r}")
        if self.count < 1:
            raise ConfigurationError("need at least one draw")
        for s in self.signs:
            if s not in (+1, -1):
                raise ConfigurationError(f"signs must be +1 or -1, got {self.signs}")
        kmin, kmax = self.band
        if not (0.0 <= kmin < kmax):
            raise ConfigurationError(f"band must satisfy 0 <= kmin < kmax, got {self.band}")
        if self.width <= 0.0:
            raise ConfigurationError(f"width must be positive, got {self.width}")
        if not self.dilations or any(int(d) != d or d < 1 for d in self.dilations):
            raise ConfigurationError(
                f"dilations must be a nonempty tuple of positive integers, got {self.dilations}"
            )


def _required(spec: ProbeSpec, names: tuple[str, ...]):
    missing = [k for k in names if getattr(spec, k) is None]
    if missing:
        raise ConfigurationError(f"{spec.lemma} needs parameters {missing}")


def hypothesis_violations(spec: ProbeSpec) -> list[str]:
    """Parameter constraints of the probed estimate; empty means in-hypothesis."""
    r = spec.r
    if not 1.0 < r <= 2.0:
        return [f"r must lie in (1, 2], got {r}"]
    out: list[str] = []

    def need(cond: bool, text: str):
        if not cond:
            out.append(text)

    if spec.lemma in ("L31", "L32"):
        _required(spec, ("alpha1", "alpha2", "b"))
        need(spec.alpha1 >= 0 and spec.alpha2 >= 0, "alpha1, alpha2 >= 0")
        need(spec.alpha1 + spec.alpha2 >= 1.0 / r, "alpha1 + alpha2 >= 1/r")
        need(spec.b > 1.0 / r, "b > 1/r")
    elif spec.lemma == "L34":
        _required(spec, ("alpha1", "alpha2", "b1", "b2"))
        need(spec.alpha1 >= 0 and spec.alpha2 >= 0, "alpha1, alpha2 >= 0")
        need(spec.alpha1 + spec.alpha2 > 1.5 / r, "alpha1 + alpha2 > 3/(2r)")
        need(spec.b1 > 0.5 / r and spec.b2 > 0.5 / r, "b1, b2 > 1/(2r)")
        need(spec.b1 + spec.b2 > 1.5 / r, "b1 + b2 > 3/(2r)")
    elif spec.lemma == "L35":
        _required(spec, ("alpha1", "alpha2", "b1", "b2"))
        need(
            min(spec.alpha1, spec.alpha2, spec.b1, spec.b2) >= 0,
            "alpha1, alpha2, b1, b2 >= 0",
        )
        need(spec.alpha1 + spec.alpha2 > 2.0 / r, "alpha1 + alpha2 > 2/r")
        need(spec.b1 + spec.b2 > 1.0 / r, "b1 + b2 > 1/r")
    elif spec.lemma == "L36":
        _required(spec, ("alpha1", "alpha2", "b"))
        need(spec.alpha1 >= 0 and spec.alpha2 >= 0, "alpha1, alpha2 >= 0")
        need(spec.alpha1 + spec.alpha2 >= 1.0 / r + spec.b, "alpha1 + alpha2 >= 1/r + b")
        need(spec.b > 1.0 / r, "b > 1/r")
    elif spec.lemma == "L37":
        _required(spec, ("s0", "s1", "b"))
        need(spec.b > 1.0 / r, "b > 1/r")
        need(spec.s0 >= 1.0, "s0 >= 1")
        need(spec.s0 <= spec.s1 + 1.0, "s0 <= s1 + 1")
        need(2.0 * spec.s1 - spec.s0 > 1.75 / r - 1.0, "2 s1 - s0 > 7/(4r) - 1")
        need(spec.s1 > 13.0 / (8.0 * r) - 0.5, "s1 > 13/(8r) - 1/2")
    elif spec.lemma == "estA":
        # transport-term product estimate: s1 plays the gauge-field
        # index, s0 the scalar index
        _required(spec, ("s0", "s1", "b"))
        need(spec.s1 >= spec.s0 - 1.0, "s1 >= s0 - 1")
        need(spec.s1 >= 1.0 / r, "s1 >= 1/r")
        need(spec.b > 1.0 / r, "b > 1/r")
    return out


# -- structured draws ---------------------------------------------------------

_DISCARD_FLOOR = 1e-14


def _factor_count(lemma: str) -> int:
    return 3 if lemma == "L37" else 2


def _norm_sign(spec: ProbeSpec, slot: int) -> int:
    return spec.signs[slot] if slot < 2 else spec.signs[1]


def _draw_waves(spec: ProbeSpec, dilation: int, index: int) -> list[SpaceTimeField]:
    """The draw's factors, deterministic in (seed, index, slot).

    Structural parameters (style, concentration scale, packet center)
    are shared by the factors of a draw so coherent draws actually
    overlap; only the coefficient noise is per-factor.
    """
    grid = Grid2D(spec.n, spec.period)
    kmin, top = spec.band[0], spec.band[1] * dilation
    style = STYLES[index % len(STYLES)]

    rs = np.random.default_rng([spec.seed, index])
    u_scale = rs.uniform()
    x_center = rs.uniform(0.0, spec.period, size=2)
    t_center = spec.T * rs.uniform(0.3, 0.7)
    anchor = max(SCALE_ANCHOR, kmin + 1.0)
    scale = anchor * (max(top, anchor) / anchor) ** u_scale

    idx = np.fft.fftfreq(spec.n, d=1.0 / spec.n)
    radius = np.hypot(idx[:, None], idx[None, :])
    nyq_cut = radius <= grid.nyquist - 1

    waves = []
    for slot in range(_factor_count(spec.lemma)):
        rf = np.random.default_rng([spec.seed, index, slot])
        sheet = -_norm_sign(spec, slot)
        if style == "diffuse":
            f = random_complex_field(grid, rf, kmax=top, kmin=kmin)
            fhat, width = f.spectrum, spec.width
            t0 = None
        elif style == "packet":
            phase = np.exp(1j * rf.uniform(0.0, 2.0 * np.pi))
            theta = rf.uniform(0.0, 2.0 * np.pi)
            carrier = _PACKET_CARRIER_FRACTION * scale * np.array(
                [np.cos(theta), np.sin(theta)]
            )
            spread = np.hypot(idx[:, None] - carrier[0], idx[None, :] - carrier[1])
            envelope = np.exp(-((spread / (_PACKET_ENVELOPE_FRACTION * scale)) ** 2))
            dk = 2.0 * np.pi / spec.period
            shift = np.exp(
                -1j * dk * (idx[:, None] * x_center[0] + idx[None, :] * x_center[1])
            )
            fhat = phase * envelope * shift * nyq_cut
            width, t0 = _PACKET_WIDTH_FRACTION * scale, t_center
        else:  # shell
            inner = min(_SHELL_INNER_FRACTION * scale, scale - 1.0)
            mask = (radius >= max(inner, kmin)) & (radius <= scale) & nyq_cut
            coeff = rf.standard_normal(mask.shape) + 1j * rf.standard_normal(mask.shape)
            fhat, width, t0 = coeff * mask, spec.width, None
        waves.append(_assemble_wave(grid, spec.nt, spec.T, fhat, width, sheet, t0))
    return waves


# -- ratio evaluation ---------------------------------------------------------


def _ratio(spec: ProbeSpec, waves: list[SpaceTimeField]) -> float | None:
    r = spec.r
    s1, s2 = spec.signs
    if spec.lemma == "L31":
        u, v = waves
        lhs = wave_sobolev_norm(st_nullform_q12(u, v), 0.0, 0.0, r)
        rhs = signed_norm(u, spec.alpha1, spec.b, r, s1) * signed_norm(
            v, spec.alpha2, spec.b, r, s2
        )
    elif spec.lemma == "L32":
        u, v = waves
        lhs = max(
            wave_sobolev_norm(st_nullform_q0j(u, v, j), 0.0, 0.0, r) for j in (1, 2)
        )
        rhs = signed_norm(u, spec.alpha1, spec.b, r, s1) * signed_norm(
            v, spec.alpha2, spec.b, r, s2
        )
    elif spec.lemma in ("L34", "L35"):
        u, v = waves
        lhs = wave_sobolev_norm(st_product(u, v), 0.0, 0.0, r)
        rhs = wave_sobolev_norm(u, spec.alpha1, spec.b1, r) * wave_sobolev_norm(
            v, spec.alpha2, spec.b2, r
        )
    elif spec.lemma == "L36":
        u, v = waves
        lhs = wave_sobolev_norm(st_product(u, v), 0.0, spec.b, r)
        rhs = wave_sobolev_norm(u, spec.alpha1, spec.b, r) * wave_sobolev_norm(
            v, spec.alpha2, spec.b, r
        )
    elif spec.lemma == "estA":
        u, w = waves
        lhs = wave_sobolev_norm(st_product(u, w), spec.s0 - 1.0, 0.0, r)
        rhs = signed_norm(u, spec.s1, spec.b, r, s1) * signed_norm(
            w, spec.s0 - 1.0, spec.b, r, s2
        )
    elif spec.lemma == "L37":
        u, v, w = waves
        lhs = wave_sobolev_norm(st_product(u, v, w), spec.s0 - 1.0, 0.0, r)
        rhs = (
            wave_sobolev_norm(u, spec.s1, spec.b, r)
            * wave_sobolev_norm(v, spec.s1, spec.b, r)
            * wave_sobolev_norm(w, spec.s0, spec.b, r)
        )
    else:  # pragma: no cover - guarded by ProbeSpec
        raise ConfigurationError(f"unknown lemma {spec.lemma!r}")
    if rhs < _DISCARD_FLOOR:
        return None
    return lhs / rhs


def _ensemble_max(spec: ProbeSpec, dilation: int) -> float:
    best = 0.0
    for i in range(spec.count):
        value = _ratio(spec, _draw_waves(spec, dilation, i))
        if value is not None and value > best:
            best = value
    return best


def probe(spec: ProbeSpec, keep_ratios: bool = False) -> dict:
    """Ratio statistics of the probed estimate over the ensemble.

    The primary statistics come from the undilated band; every run also
    reports the ensemble max at each requested band dilation so the
    in-hypothesis (stable) versus out-of-hypothesis (growing) contrast
    is visible in a single report.  Draws whose RHS norm falls below
    1e-14 are discarded and counted.
    """
    violations = hypothesis_violations(spec)
    if spec.enforce and violations:
        raise ConfigurationError(
            f"{spec.lemma} hypotheses violated: {violations}; "
            "pass enforce=False to probe anyway"
        )

    ratios: list[float] = []
    discarded = 0
    best = -1.0
    best_index = -1
    for i in range(spec.count):
        value = _ratio(spec, _draw_waves(spec, 1, i))
        if value is None:
            discarded += 1
            continue
        ratios.append(value)
        if value > best:
            best, best_index = value, i

    arr = np.array(ratios)
    quantiles = {}
    if arr.size:
        q50, q90, q99 = np.quantile(arr, [0.5, 0.9, 0.99])
        quantiles = {"q50": float(q50), "q90": float(q90), "q99": float(q99)}

    dilation = {"1": best if best >= 0 else 0.0}
    for d in spec.dilations:
        if d == 1:
            continue
        dilation[str(d)] = _ensemble_max(spec, d)

    report = {
        "lemma": spec.lemma,
        "heuristic": True,
        "params": {
            key: getattr(spec, key)
            for key in ("r", "alpha1", "alpha2", "b", "b1", "b2", "s0", "s1")
            if getattr(spec, key) is not None
        },
        "signs": list(spec.signs),
        "ensemble": {
            "count": spec.count,
            "band": list(spec.band),
            "width": spec.width,
            "seed": spec.seed,
            "n": spec.n,
            "nt": spec.nt,
            "period": spec.period,
            "T": spec.T,
            "styles": list(STYLES),
            "scale_anchor": SCALE_ANCHOR,
        },
        "hypothesis": {"ok": not violations, "violations": violations},
        "draws": len(ratios),
        "discarded": discarded,
        "ratio": {
            "max": best if best >= 0 else 0.0,
            "mean": float(arr.mean()) if arr.size else 0.0,
            "quantiles": quantiles,
            "argmax_draw": best_index,
            "argmax_seed": [spec.seed, best_index] if best_index >= 0 else None,
        },
        "dilation": dilation,
    }
    if keep_ratios:
        report["ratios"] = ratios
    return report


def probe_cubic(spec: ProbeSpec, keep_ratios: bool = False) -> dict:
    """Cubic-estimate probe; spec.lemma must be the cubic family L37."""
    if spec.lemma != "L37":
        raise ConfigurationError(f"probe_cubic handles L37 only, got {spec.lemma!r}")
    return probe(spec, keep_ratios=keep_ratios)


def report_json(report: dict) -> str:
    """Canonical serialization: sorted keys, fixed separators, so equal
    reports are bit-identical strings."""
    return json.dumps(report, sort_keys=True, indent=2)
