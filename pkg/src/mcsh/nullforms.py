"""Null forms, divergence/curl splitting, the quadratic decomposition
identity, pointwise symbol bounds, the hyperbolic Leibniz inequality,
and delta-restricted convolution integrals.

Conventions.  R_j denotes the nonhomogeneous Riesz transform
d_j <grad>^{-1}; with that normalization the divergence/curl splitting
plus the smooth remainder <grad>^{-2} A_j reconstructs A_j exactly,
including the zero mode, because the multiplier identity

    -R_1^2 - R_2^2 + <grad>^{-2} = id

holds pointwise on the frequency lattice ((xi_1^2 + xi_2^2 + 1)/<xi>^2
= 1; R_j^2 has symbol -xi_j^2/<xi>^2, hence the minus signs).

The decomposition identity rewrites the transport term of the scalar
equation against the gauge potential,

    -A_0 dphi + A_1 d_1 phi + A_2 d_2 phi,

as a null form in the curl of A, two mixed time-space null forms in
A_0, and smoother terms with <grad>^{-2} weights.  Once
dA_0 = d_1 A_1 + d_2 A_2 holds, every coefficient field on the right
collapses through <grad>^{-2}(1 - Lap) = 1 to the matching coefficient
on the left, so the residual of a compatible state is pure roundoff;
states violating the relation leave an O(1) residual, which is the
negative control.

Symbol bounds and the delta integrals are statements about continuum
frequencies, so they are evaluated on random real samples rather than
on the torus lattice.  Empirical sweep constants are reported, never
asserted against a fixed bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate

from .errors import (
    ConfigurationError,
    DivergenceError,
    GridMismatchError,
    PreconditionError,
)
from .model import FieldState, grid_symbols
from .spectral import (
    FREQUENCY,
    SpectralField,
    apply_multiplier,
    bessel_power,
    dealias_product,
    inv_magnitude,
    oversampled_physical,
    partial_derivative,
    projected_spectrum,
    riesz,
)

_D = {1: partial_derivative(1), 2: partial_derivative(2)}
_INV_MAG = inv_magnitude()
_SMOOTH2 = bessel_power(-2.0)


# -- null forms on torus fields ---------------------------------------------


def _deriv(u: SpectralField, du: SpectralField | None, index: int) -> SpectralField:
    if index == 0:
        if du is None:
            raise ConfigurationError(
                "time index needs the stored time derivative of the factor"
            )
        return du
    if index not in (1, 2):
        raise ConfigurationError(f"index must be 0, 1, or 2, got {index}")
    return apply_multiplier(u, _D[index])


def nullform_Q(
    u: SpectralField,
    v: SpectralField,
    alpha: int,
    beta: int,
    du: SpectralField | None = None,
    dv: SpectralField | None = None,
) -> SpectralField:
    """Q_ab(u, v) = d_a u d_b v - d_b u d_a v, products dealiased.

    Index 0 is the time direction; using it requires passing the
    matching stored time derivative (du for u, dv for v).
    """
    ua, ub = _deriv(u, du, alpha), _deriv(u, du, beta)
    va, vb = _deriv(v, dv, alpha), _deriv(v, dv, beta)
    left = dealias_product(ua, vb)
    right = dealias_product(ub, va)
    return SpectralField(
        u.grid, left.spectrum - right.spectrum, FREQUENCY, left.real and right.real
    )


def _drop_mean(u: SpectralField, label: str) -> SpectralField:
    spec = u.spectrum
    mean = abs(spec[0, 0])
    scale = float(np.max(np.abs(spec)))
    if scale > 0 and mean > 1e-13 * scale:
        warnings.warn(
            f"{label} has a nonzero mean; |grad|^-1 drops the zero mode",
            stacklevel=3,
        )
    return apply_multiplier(u, _INV_MAG)


def nullform_q(
    u: SpectralField,
    v: SpectralField,
    alpha: int,
    beta: int,
    du: SpectralField | None = None,
    dv: SpectralField | None = None,
) -> SpectralField:
    """q_ab(u, v) = Q_ab(|grad|^-1 u, |grad|^-1 v), zero modes dropped."""
    iu = _drop_mean(u, "first factor")
    iv = _drop_mean(v, "second factor")
    idu = None if du is None else apply_multiplier(du, _INV_MAG)
    idv = None if dv is None else apply_multiplier(dv, _INV_MAG)
    return nullform_Q(iu, iv, alpha, beta, du=idu, dv=idv)


def df_cf_split(A1: SpectralField, A2: SpectralField):
    """Divergence-free / curl-free / smooth-remainder decomposition.

    Returns three pairs ((df1, df2), (cf1, cf2), (rem1, rem2)) whose
    componentwise sum is (A1, A2) exactly.
    """
    if A1.grid != A2.grid:
        raise GridMismatchError("components live on different grids")
    g = A1.grid
    real = A1.real and A2.real
    R1, R2 = riesz(1), riesz(2)

    def wrap(spec):
        return SpectralField(g, spec, FREQUENCY, real)

    curl = wrap(apply_multiplier(A2, R1).spectrum - apply_multiplier(A1, R2).spectrum)
    div = wrap(apply_multiplier(A1, R1).spectrum + apply_multiplier(A2, R2).spectrum)
    df = (
        apply_multiplier(curl, R2),
        wrap(-apply_multiplier(curl, R1).spectrum),
    )
    cf = (
        wrap(-apply_multiplier(div, R1).spectrum),
        wrap(-apply_multiplier(div, R2).spectrum),
    )
    rem = (apply_multiplier(A1, _SMOOTH2), apply_multiplier(A2, _SMOOTH2))
    return df, cf, rem


def null2_residual(
    state: FieldState, check_lorenz: bool = True, tol: float = 1e-10
) -> float:
    """L2 residual of the decomposition identity on a gauge-compatible state.

    The identity needs dA0 = d1 A1 + d2 A2; with check_lorenz the state
    is verified to satisfy that relation to `tol` first, and a
    violation raises PreconditionError.  check_lorenz=False evaluates
    the residual regardless, which is how the negative control
    measures the O(1) defect of an incompatible state.
    """
    g = state.grid
    sym = grid_symbols(g)
    ix1, ix2, inv_b2 = sym["ixi1"], sym["ixi2"], sym["inv_bessel2"]

    a0, a1, a2 = state.A0.spectrum, state.A1.spectrum, state.A2.spectrum
    da0 = state.dA0.spectrum
    phi, dphi = state.phi.spectrum, state.dphi.spectrum

    lorenz = da0 - ix1 * a1 - ix2 * a2
    lnorm = float(np.linalg.norm(lorenz)) * g.period / g.n
    if check_lorenz and lnorm > tol:
        raise PreconditionError(
            f"state is not gauge compatible (dA0 - div A has L2 norm {lnorm:.3e})",
            residual=lnorm,
        )

    psi_c = inv_b2 * (ix1 * a2 - ix2 * a1)
    specs = [
        a0,
        a1,
        a2,
        dphi,
        ix1 * phi,
        ix2 * phi,
        ix1 * psi_c,
        ix2 * psi_c,
        ix1 * ix1 * inv_b2 * a0,  # d1 psi_1, psi_j = <grad>^-2 dj A0
        ix2 * ix2 * inv_b2 * a0,  # d2 psi_2
        ix1 * inv_b2 * da0,  # dt psi_1
        ix2 * inv_b2 * da0,  # dt psi_2
        inv_b2 * a0,
        inv_b2 * a1,
        inv_b2 * a2,
    ]
    m = 2 * g.n
    phys = np.stack([oversampled_physical(g, s, m) for s in specs])
    (
        a0p,
        a1p,
        a2p,
        dphp,
        d1php,
        d2php,
        d1psic,
        d2psic,
        d1psi1,
        d2psi2,
        dtpsi1,
        dtpsi2,
        sm0,
        sm1,
        sm2,
    ) = phys

    lhs = -a0p * dphp + a1p * d1php + a2p * d2php
    q_curl = -(d1psic * d2php - d2psic * d1php)
    q_time = (d1psi1 + d2psi2) * dphp - dtpsi1 * d1php - dtpsi2 * d2php
    smoother = -sm0 * dphp + sm1 * d1php + sm2 * d2php

    res_spec = projected_spectrum(g, lhs - q_curl - q_time - smoother, m)
    return SpectralField(g, res_spec, FREQUENCY, real=False).l2()


# -- pointwise symbol bounds on continuum frequencies ------------------------


@dataclass(frozen=True)
class FreqPair:
    """A continuum frequency configuration (eta, xi) with optional tau.

    sigma = xi - eta is the second convolution frequency.  Symbols
    divide by |eta| and |sigma|, so those must not vanish where a
    symbol is evaluated.
    """

    eta: tuple[float, float]
    xi: tuple[float, float]
    tau: float = 0.0

    @property
    def sigma(self) -> tuple[float, float]:
        return (self.xi[0] - self.eta[0], self.xi[1] - self.eta[1])


def _norm2(v: np.ndarray) -> np.ndarray:
    return np.hypot(v[..., 0], v[..., 1])


def _as_freq(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape[-1] != 2:
        raise ConfigurationError("frequency samples need two components")
    return arr


def symbol_bound_ratio(eta, xi, branch: str, form: str):
    """|null symbol| divided by its pointwise cone bound; vectorized.

    The curl-type symbol is |sin| of the angle between eta and
    sigma = xi - eta; the time-space symbols are |eta_j/|eta| -+
    sigma_j/|sigma|| with the relative sign fixed by whether the two
    on-cone time frequencies agree (branch "elliptic") or oppose
    (branch "hyperbolic").  Bounds carry the matching cone defect,
    b+ = |eta| + |sigma| - |xi| for elliptic and
    b- = |xi| - ||eta| - |sigma|| for hyperbolic.  Where the bound
    vanishes the symbol vanishes too and the ratio is reported as 0.
    Ratios are empirical; nothing here asserts a constant.
    """
    eta, xi = _as_freq(eta), _as_freq(xi)
    sigma = xi - eta
    ne, ns, nx = _norm2(eta), _norm2(sigma), _norm2(xi)
    if np.any(ne == 0.0) or np.any(ns == 0.0):
        raise ConfigurationError("degenerate configuration: |eta| or |xi - eta| is zero")

    if branch == "elliptic":
        defect = ne + ns - nx
        rel_sign = -1.0
    elif branch == "hyperbolic":
        defect = nx - np.abs(ne - ns)
        rel_sign = +1.0
    else:
        raise ConfigurationError(f"branch must be elliptic or hyperbolic, got {branch!r}")
    defect = np.maximum(defect, 0.0)  # clip roundoff at exact degeneracy

    ue = eta / ne[..., None]
    us = sigma / ns[..., None]
    if form == "q12":
        sym = np.abs(ue[..., 0] * us[..., 1] - ue[..., 1] * us[..., 0])
        bound = np.sqrt(nx * defect / (ne * ns))
    elif form == "q0j":
        sym = np.max(np.abs(ue + rel_sign * us), axis=-1)
        bound = np.sqrt(defect / np.minimum(ne, ns))
    else:
        raise ConfigurationError(f"form must be q12 or q0j, got {form!r}")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0.0, sym / np.where(bound > 0.0, bound, 1.0), 0.0)
    return ratio if ratio.ndim else float(ratio)


def _sample_frequencies(rng: np.random.Generator, count: int) -> np.ndarray:
    """Random 2-vectors with log-uniform magnitudes over six decades."""
    mag = 10.0 ** rng.uniform(-3.0, 3.0, size=count)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return mag[:, None] * np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def symbol_sweep(
    form: str,
    branch: str,
    samples: int = 10**6,
    seed: int = 0,
    partitions: int = 8,
) -> dict:
    """Record the empirical max of symbol_bound_ratio over random draws.

    Samples are split into `partitions` deterministic streams (child
    seeds of `seed`) and merged by max reduction, so the report is
    reproducible and independent of batching.
    """
    if samples < 1 or partitions < 1:
        raise ConfigurationError("need positive sample and partition counts")
    children = np.random.SeedSequence(seed).spawn(partitions)
    per = [samples // partitions] * partitions
    per[-1] += samples - sum(per)
    best = -1.0
    best_cfg = None
    used = 0
    for child, count in zip(children, per):
        if count == 0:
            continue
        rng = np.random.default_rng(child)
        eta = _sample_frequencies(rng, count)
        xi = _sample_frequencies(rng, count)
        keep = _norm2(xi - eta) > 0.0
        eta, xi = eta[keep], xi[keep]
        used += int(keep.sum())
        ratio = symbol_bound_ratio(eta, xi, branch, form)
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best = float(ratio[i])
            best_cfg = {"eta": eta[i].tolist(), "xi": xi[i].tolist()}
    return {
        "form": form,
        "branch": branch,
        "samples": used,
        "max_ratio": best,
        "argmax": best_cfg,
    }


# -- hyperbolic Leibniz inequality -------------------------------------------


def hyperbolic_leibniz_check(tau, lam, xi, eta):
    """Slack of the constant-1 modulation triangle inequality.

    With rho = lam the inequality reads

        ||tau| - |xi||  <=  ||rho| - |eta|| + ||tau - rho| - |xi - eta|| + b

    where b = b+ = |eta| + |xi - eta| - |xi| when rho and tau - rho
    share a sign and b = b- = |xi| - ||eta| - |xi - eta|| otherwise
    (a zero factor selects b-).  Returns RHS - LHS, which is
    nonnegative up to roundoff for every real configuration.
    """
    tau = np.asarray(tau, dtype=float)
    rho = np.asarray(lam, dtype=float)
    xi, eta = _as_freq(xi), _as_freq(eta)
    sigma = xi - eta
    nx, ne, ns = _norm2(xi), _norm2(eta), _norm2(sigma)
    b_plus = ne + ns - nx
    b_minus = nx - np.abs(ne - ns)
    b = np.where(rho * (tau - rho) > 0.0, b_plus, b_minus)
    lhs = np.abs(np.abs(tau) - nx)
    rhs = np.abs(np.abs(rho) - ne) + np.abs(np.abs(tau - rho) - ns) + b
    slack = rhs - lhs
    return slack if slack.ndim else float(slack)


def hlr_sweep(samples: int = 10**6, seed: int = 0, partitions: int = 8) -> dict:
    """Minimum slack of the modulation inequality over random draws."""
    if samples < 1 or partitions < 1:
        raise ConfigurationError("need positive sample and partition counts")
    children = np.random.SeedSequence(seed).spawn(partitions)
    per = [samples // partitions] * partitions
    per[-1] += samples - sum(per)
    worst = np.inf
    worst_cfg = None
    for child, count in zip(children, per):
        if count == 0:
            continue
        rng = np.random.default_rng(child)
        eta = _sample_frequencies(rng, count)
        xi = _sample_frequencies(rng, count)
        scale = 10.0 ** rng.uniform(-3.0, 3.0, size=count)
        tau = scale * rng.standard_normal(count)
        rho = scale * rng.standard_normal(count)
        slack = hyperbolic_leibniz_check(tau, rho, xi, eta)
        i = int(np.argmin(slack))
        if slack[i] < worst:
            worst = float(slack[i])
            worst_cfg = {
                "tau": float(tau[i]),
                "rho": float(rho[i]),
                "xi": xi[i].tolist(),
                "eta": eta[i].tolist(),
            }
    return {"samples": samples, "min_slack": worst, "argmin": worst_cfg}


# -- delta-restricted convolution integrals ----------------------------------


@dataclass(frozen=True)
class DeltaIntegralSpec:
    """Integral of |eta|^-p |xi-eta|^-q over a cone level set.

    signs picks the level set delta(tau - s1 |eta| - s2 |xi - eta|):
    equal signs give the elliptic branch (an ellipse with foci 0 and
    xi), mixed signs the hyperbolic branch (one hyperbola sheet).
    xi enters through its magnitude only.
    """

    signs: tuple[str, str]
    p: float
    q: float
    tau: float
    xi: float

    def __post_init__(self):
        if self.signs[0] not in ("+", "-") or self.signs[1] not in ("+", "-"):
            raise ConfigurationError(f"signs must be '+' or '-', got {self.signs}")
        if self.xi < 0.0:
            raise ConfigurationError("xi is a magnitude and cannot be negative")

    @property
    def branch(self) -> str:
        return "elliptic" if self.signs[0] == self.signs[1] else "hyperbolic"


_QUAD_OPTS = {"epsabs": 0.0, "epsrel": 1e-10, "limit": 400}


def _elliptic_value(p: float, q: float, tau: float, xi: float) -> float:
    # level set |eta| + |xi - eta| = tau: focal radii r1 = a + c cos(th),
    # r2 = a - c cos(th); measure r1 r2 dth / (2b)
    a, c = tau / 2.0, xi / 2.0
    if a < c:
        raise ConfigurationError(
            f"empty elliptic level set: tau < |xi| (tau={tau}, |xi|={xi})"
        )
    if a == c:
        raise DivergenceError(f"degenerate ellipse: tau = |xi| = {tau}")
    b = math.sqrt(a * a - c * c)

    def radial(cos_th: float) -> float:
        r1 = a + c * cos_th
        r2 = a - c * cos_th
        return r1 ** (1.0 - p) * r2 ** (1.0 - q)

    # [0, pi/2] directly; [pi/2, pi] in u = sqrt(1 + cos th), which
    # writes the near-focus radius as (a - c) + c u^2 and removes the
    # sharp peak when a - c is small
    head, _ = _integrate.quad(lambda th: radial(math.cos(th)), 0.0, math.pi / 2.0, **_QUAD_OPTS)
    tail, _ = _integrate.quad(
        lambda u: radial(u * u - 1.0) * 2.0 / math.sqrt(2.0 - u * u),
        0.0,
        1.0,
        **_QUAD_OPTS,
    )
    return (head + tail) / b


def _log_domain_integrand(p: float, q: float, tau: float, xi: float):
    """(r1^(1-p) r2^(1-q))(cosh u) evaluated without overflow.

    r1,2 = (|xi| cosh u +- tau)/2; for slowly decaying tails (p + q
    barely above 2) the quadrature samples u in the hundreds, where
    cosh overflows, so the radii are assembled in log space.
    """

    def integrand(u: float) -> float:
        log_cosh = u - math.log(2.0) + math.log1p(math.exp(-2.0 * u))
        log_xich = math.log(xi) + log_cosh
        ratio = tau * math.exp(-log_xich)  # tau / (xi cosh u), |ratio| < 1
        lr1 = math.log(0.5) + log_xich + math.log1p(ratio)
        lr2 = math.log(0.5) + log_xich + math.log1p(-ratio)
        return math.exp((1.0 - p) * lr1 + (1.0 - q) * lr2)

    return integrand


def _hyperbolic_value(p: float, q: float, tau: float, xi: float) -> float:
    # level set |eta| - |xi - eta| = tau with |tau| < |xi|; parametrized
    # by x = cosh(u) >= 1 with r1 = (|xi| x + tau)/2, r2 = (|xi| x - tau)/2
    if abs(tau) > xi:
        raise ConfigurationError(
            f"hyperbolic branch needs |tau| <= |xi| (tau={tau}, |xi|={xi})"
        )
    if tau < 0.0:
        p, q, tau = q, p, -tau
    bp = 0.5 * math.sqrt(xi * xi - tau * tau)
    if bp == 0.0:
        raise DivergenceError("degenerate hyperbola: |tau| = |xi|")
    if p + q <= 2.0:
        raise DivergenceError(
            f"tail of the hyperbolic integral diverges for p + q <= 2 (p={p}, q={q})"
        )

    value, _ = _integrate.quad(_log_domain_integrand(p, q, tau, xi), 0.0, np.inf, **_QUAD_OPTS)
    return value / bp


def delta_integral(spec: DeltaIntegralSpec) -> float:
    """Adaptive quadrature of the cone-restricted weight integral."""
    if spec.branch == "elliptic":
        tau = spec.tau if spec.signs[0] == "+" else -spec.tau
        if tau <= 0.0:
            raise ConfigurationError(
                "elliptic level set is empty for this sign of tau"
            )
        return _elliptic_value(spec.p, spec.q, tau, spec.xi)
    tau = spec.tau if spec.signs[0] == "+" else -spec.tau
    return _hyperbolic_value(spec.p, spec.q, tau, spec.xi)


def delta_integral_asymptotic(spec: DeltaIntegralSpec, r: float) -> float:
    """Closed-form power law |tau|^A ||tau|-|xi||^B for tabulated exponents.

    The exponent pairs covered are the two elliptic weights
    (p, q) = (1 + r/2, r/2) and (1 + r/2, 0), and the hyperbolic weight
    (1 + r/2, r/2) on either side of tau = 0.  Anything else has no
    tabulated power law and raises ConfigurationError.
    """
    close = lambda x, y: math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-12)
    gap = abs(abs(spec.tau) - spec.xi)
    if gap == 0.0 or spec.tau == 0.0:
        raise ConfigurationError("power law degenerates at tau = 0 or |tau| = |xi|")
    if spec.branch == "elliptic":
        if close(spec.p, 1.0 + r / 2.0) and close(spec.q, r / 2.0):
            A, B = -r / 2.0, -r / 2.0
        elif close(spec.p, 1.0 + r / 2.0) and close(spec.q, 0.0):
            A, B = 0.0, -r / 2.0
        else:
            raise ConfigurationError(
                f"no tabulated elliptic asymptotic for (p, q) = ({spec.p}, {spec.q})"
            )
    else:
        if not (close(spec.p, 1.0 + r / 2.0) and close(spec.q, r / 2.0)):
            raise ConfigurationError(
                f"no tabulated hyperbolic asymptotic for (p, q) = ({spec.p}, {spec.q})"
            )
        signed_tau = spec.tau if spec.signs[0] == "+" else -spec.tau
        if signed_tau >= 0.0:
            A, B = 0.5 - r, -0.5
        else:
            A, B = -r / 2.0, -r / 2.0
    return abs(spec.tau) ** A * gap**B


def far_branch_integral(tau: float, xi: float, r: float) -> float:
    """The scalar far-cone integral over x >= 2 of
    (|xi| x + tau)^(-r/2) (|xi| x - tau)^(1 - r/2) (x^2 - 1)^(-1/2).

    Converges only for r > 1 (the integrand decays like x^-r); r <= 1
    raises DivergenceError before any quadrature runs.
    """
    if xi <= 0.0:
        raise ConfigurationError("need |xi| > 0")
    if abs(tau) > xi:
        raise ConfigurationError(f"needs |tau| <= |xi| (tau={tau}, |xi|={xi})")
    if r <= 1.0:
        raise DivergenceError(f"far-cone integral diverges for r <= 1, got r={r}")

    u0 = math.acosh(2.0)
    # (xi x + tau)^(-r/2) (xi x - tau)^(1-r/2) = 2^(1-r) r1^(-r/2) r2^(1-r/2)
    # with the same half-sum radii as the hyperbolic branch
    base = _log_domain_integrand(1.0 + r / 2.0, r / 2.0, tau, xi)
    scale = 2.0 ** (1.0 - r)

    def integrand(u: float) -> float:
        return scale * base(u)

    value, _ = _integrate.quad(integrand, u0, np.inf, **_QUAD_OPTS)
    return value
