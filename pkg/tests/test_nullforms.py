import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from mcsh.errors import (
    ConfigurationError,
    DivergenceError,
    GridMismatchError,
    PreconditionError,
)
from mcsh.model import PhysParams, make_compatible_data, zero_state, FieldState
from mcsh.nullforms import (
    DeltaIntegralSpec,
    FreqPair,
    delta_integral,
    delta_integral_asymptotic,
    df_cf_split,
    far_branch_integral,
    hlr_sweep,
    hyperbolic_leibniz_check,
    null2_residual,
    nullform_Q,
    nullform_q,
    symbol_bound_ratio,
    symbol_sweep,
)
from mcsh.spectral import (
    Grid2D,
    apply_multiplier,
    as_field,
    partial_derivative,
    random_complex_field,
    random_real_field,
)


def plane_wave(grid, k1, k2, amp=1.0):
    x = np.arange(grid.n) * grid.dx
    dk = grid.dk
    return as_field(
        grid, amp * np.exp(1j * dk * (k1 * x[:, None] + k2 * x[None, :])), real=False
    )


# -- discrete null forms ------------------------------------------------------


def test_Q12_plane_wave_closed_form():
    # Q_12(e^{ik.x}, e^{im.x}) = -(k1 m2 - k2 m1) e^{i(k+m).x}
    grid = Grid2D(32, period=2.0 * np.pi)
    u, v = plane_wave(grid, 3, 1), plane_wave(grid, -1, 2)
    out = nullform_Q(u, v, 1, 2)
    expect = -(3 * 2 - 1 * (-1)) * plane_wave(grid, 2, 3).physical
    assert np.max(np.abs(out.physical - expect)) < 1e-12


def test_Q_time_index_uses_stored_derivative():
    grid = Grid2D(32, period=2.0 * np.pi)
    u, v = plane_wave(grid, 2, 0), plane_wave(grid, 0, 3)
    du = as_field(grid, 0.5j * u.physical, real=False)
    dv = as_field(grid, -1.25j * v.physical, real=False)
    out = nullform_Q(u, v, 0, 1, du=du, dv=dv)
    # Q_01 = d_t u d_1 v - d_1 u d_t v = (0.5i)(0) - (2i)(-1.25i) = -2.5
    expect = -2.5 * (u.physical * v.physical)
    assert np.max(np.abs(out.physical - expect)) < 1e-12
    with pytest.raises(ConfigurationError):
        nullform_Q(u, v, 0, 1)
    with pytest.raises(ConfigurationError):
        nullform_Q(u, v, 1, 3)


def test_Q_antisymmetry_and_kernel():
    grid = Grid2D(32)
    rng = np.random.default_rng(0)
    u = random_complex_field(grid, rng, kmax=6)
    v = random_complex_field(grid, rng, kmax=6)
    ab = nullform_Q(u, v, 1, 2)
    ba = nullform_Q(u, v, 2, 1)
    assert np.max(np.abs(ab.spectrum + ba.spectrum)) < 1e-13
    zero = nullform_Q(u, u, 1, 2)
    assert np.max(np.abs(zero.physical)) < 1e-12 * np.max(np.abs(u.physical)) ** 2
    # parallel wave vectors annihilate the symbol
    grid2 = Grid2D(32, period=2.0 * np.pi)
    out = nullform_Q(plane_wave(grid2, 2, 1), plane_wave(grid2, 4, 2), 1, 2)
    assert np.max(np.abs(out.physical)) < 1e-13


def test_q_lowered_by_gradient_inverses():
    grid = Grid2D(32, period=2.0 * np.pi)
    u, v = plane_wave(grid, 3, 0), plane_wave(grid, 0, 4)
    out = nullform_q(u, v, 1, 2)
    # |k| = 3, |m| = 4 scale the Q_12 value -(3*4) down to -1
    expect = -plane_wave(grid, 3, 4).physical
    assert np.max(np.abs(out.physical - expect)) < 1e-12


def test_q_warns_on_nonzero_mean():
    grid = Grid2D(16)
    u = as_field(grid, np.ones((16, 16)) + 0.1 * np.cos(np.arange(16) * 2 * np.pi / 16)[:, None])
    v = plane_wave(grid, 1, 1)
    with pytest.warns(UserWarning, match="zero mode"):
        nullform_q(u, v, 1, 2)


def test_df_cf_split_reconstructs_and_separates():
    grid = Grid2D(32, period=8.0 * np.pi)
    rng = np.random.default_rng(1)
    chi = random_real_field(grid, rng, kmax=8)
    psi = random_real_field(grid, rng, kmax=8)
    d1, d2 = partial_derivative(1), partial_derivative(2)

    # pure gradient: no divergence-free part
    g1, g2 = apply_multiplier(chi, d1), apply_multiplier(chi, d2)
    df, cf, rem = df_cf_split(g1, g2)
    scale = max(g1.l2(), g2.l2())
    assert df[0].l2() < 1e-12 * scale and df[1].l2() < 1e-12 * scale
    for a, parts in ((g1, (df[0], cf[0], rem[0])), (g2, (df[1], cf[1], rem[1]))):
        total = sum(p.physical for p in parts)
        assert np.max(np.abs(total - a.physical)) < 1e-12 * scale

    # pure curl: no curl-free part
    c1 = apply_multiplier(psi, d2)
    c2 = as_field(grid, -apply_multiplier(psi, d1).physical)
    df, cf, rem = df_cf_split(c1, c2)
    scale = max(c1.l2(), c2.l2())
    assert cf[0].l2() < 1e-12 * scale and cf[1].l2() < 1e-12 * scale

    with pytest.raises(GridMismatchError):
        df_cf_split(g1, as_field(Grid2D(16), np.zeros((16, 16))))


def random_compatible_state(n=32, period=8.0 * np.pi, seed=0, amp=0.5):
    grid = Grid2D(n, period=period)
    rng = np.random.default_rng(seed)
    re = lambda: as_field(grid, amp * random_real_field(grid, rng, kmax=6).physical)
    co = lambda: as_field(grid, amp * random_complex_field(grid, rng, kmax=6).physical, real=False)
    state, _ = make_compatible_data(
        a10=re(), a11=re(), a20=re(), a21=re(),
        phi0=co(), phi1=co(), N0=re(), N1=re(),
        params=PhysParams(e=1.0, kappa=1.0, v=1.0),
    )
    return state


def test_null2_residual_on_compatible_state():
    state = random_compatible_state(seed=2)
    assert null2_residual(state) < 1e-9


def test_null2_residual_negative_control():
    state = random_compatible_state(seed=3)
    # break the gauge relation deliberately with a non-constant field
    # (a constant shift sits in the zero mode, which every derivative
    # in the identity annihilates)
    kick = random_real_field(state.grid, np.random.default_rng(99), kmax=5)
    bad = FieldState(
        A0=state.A0, A1=state.A1, A2=state.A2, phi=state.phi, N=state.N,
        dA0=as_field(state.grid, state.dA0.physical + 2.0 * kick.physical),
        dA1=state.dA1,
        dA2=state.dA2, dphi=state.dphi, dN=state.dN,
    )
    with pytest.raises(PreconditionError):
        null2_residual(bad)
    assert null2_residual(bad, check_lorenz=False) > 1e-3


# -- pointwise symbol bounds --------------------------------------------------


def test_symbol_ratio_basic_properties():
    rng = np.random.default_rng(4)
    eta = rng.standard_normal((500, 2))
    xi = rng.standard_normal((500, 2))
    for form in ("q12", "q0j"):
        for branch in ("elliptic", "hyperbolic"):
            ratio = symbol_bound_ratio(eta, xi, branch, form)
            assert ratio.shape == (500,)
            assert np.all(np.isfinite(ratio)) and np.all(ratio >= 0.0)


def test_symbol_ratio_degenerate_and_collinear():
    with pytest.raises(ConfigurationError):
        symbol_bound_ratio([0.0, 0.0], [1.0, 0.0], "elliptic", "q12")
    with pytest.raises(ConfigurationError):
        symbol_bound_ratio([1.0, 0.0], [1.0, 0.0], "elliptic", "q12")
    # parallel, same direction: elliptic defect and symbol both vanish
    r = symbol_bound_ratio([1.0, 0.0], [3.0, 0.0], "elliptic", "q12")
    assert r == 0.0
    with pytest.raises(ConfigurationError):
        symbol_bound_ratio([1.0, 0.0], [3.0, 1.0], "parabolic", "q12")
    with pytest.raises(ConfigurationError):
        symbol_bound_ratio([1.0, 0.0], [3.0, 1.0], "elliptic", "q99")


def test_symbol_sweep_reproducible_and_self_consistent():
    a = symbol_sweep("q12", "elliptic", samples=20000, seed=7)
    b = symbol_sweep("q12", "elliptic", samples=20000, seed=7)
    assert a == b
    assert 0.0 < a["max_ratio"] < 10.0
    redo = symbol_bound_ratio(a["argmax"]["eta"], a["argmax"]["xi"], "elliptic", "q12")
    assert redo == pytest.approx(a["max_ratio"], rel=1e-12)


def test_hyperbolic_leibniz_zero_slack_case():
    # rho = tau and eta = xi make both sides collapse: slack is exactly 0
    s = hyperbolic_leibniz_check(1.7, 1.7, [2.0, -1.0], [2.0, -1.0])
    assert s == 0.0


def test_hyperbolic_leibniz_nonnegative():
    rng = np.random.default_rng(5)
    eta = rng.standard_normal((10**5, 2)) * 10.0 ** rng.uniform(-2, 2, (10**5, 1))
    xi = rng.standard_normal((10**5, 2)) * 10.0 ** rng.uniform(-2, 2, (10**5, 1))
    tau = rng.standard_normal(10**5) * 10.0
    rho = rng.standard_normal(10**5) * 10.0
    slack = hyperbolic_leibniz_check(tau, rho, xi, eta)
    assert float(np.min(slack)) > -1e-10


def test_hlr_sweep_reports_nonnegative_min():
    out = hlr_sweep(samples=10**5, seed=1)
    assert out["min_slack"] > -1e-10
    assert out["argmin"] is not None
    again = hlr_sweep(samples=10**5, seed=1)
    assert out == again


# -- delta-restricted integrals ----------------------------------------------


def elliptic_oracle(p, q, tau, xi):
    """Polar-coordinate root-finding quadrature, independent of the
    focal-angle parametrization used by the implementation."""

    def per_theta(th):
        c = np.cos(th)
        g = lambda rho: tau - rho - np.sqrt(rho * rho - 2 * rho * xi * c + xi * xi)
        rho = brentq(g, 1e-13, tau, xtol=1e-15, rtol=1e-14)
        r2 = tau - rho
        gp = -1.0 - (rho - xi * c) / r2
        return rho ** (1.0 - p) * r2 ** (-q) / abs(gp)

    val, _ = quad(per_theta, 0.0, np.pi, limit=300)
    return 2.0 * val


def hyperbolic_oracle(p, q, tau, xi):
    """Same idea for |eta| - |xi - eta| = tau >= 0."""
    th_star = np.arccos(tau / xi)

    def per_theta(th):
        c = np.cos(th)
        rho = (xi * xi - tau * tau) / (2.0 * (xi * c - tau))
        r2 = rho - tau
        gp = -1.0 + (rho - xi * c) / r2
        return rho ** (1.0 - p) * r2 ** (-q) / abs(gp)

    val, _ = quad(per_theta, 0.0, th_star, limit=300)
    return 2.0 * val


def test_elliptic_circle_closed_form():
    # xi = 0: the level set is the circle |eta| = tau/2 and the integral
    # is pi (tau/2)^(1 - p - q)
    for p, q, tau in ((2.0, 1.0, 3.0), (1.75, 0.75, 0.9)):
        spec = DeltaIntegralSpec(("+", "+"), p, q, tau, 0.0)
        assert delta_integral(spec) == pytest.approx(
            np.pi * (tau / 2.0) ** (1.0 - p - q), rel=1e-10
        )


def test_elliptic_r2_closed_form():
    # (p, q) = (2, 1): 4 pi / (tau^2 - xi^2)
    for tau, xi in ((3.0, 1.0), (2.1, 2.0), (10.0, 0.5)):
        spec = DeltaIntegralSpec(("+", "+"), 2.0, 1.0, tau, xi)
        assert delta_integral(spec) == pytest.approx(
            4.0 * np.pi / (tau * tau - xi * xi), rel=1e-9
        )


def test_elliptic_generic_against_polar_oracle():
    p, q, tau, xi = 1.6, 1.1, 3.7, 1.9
    spec = DeltaIntegralSpec(("+", "+"), p, q, tau, xi)
    assert delta_integral(spec) == pytest.approx(elliptic_oracle(p, q, tau, xi), rel=1e-6)


def test_hyperbolic_against_polar_oracle():
    p, q, tau, xi = 2.2, 1.3, 0.8, 1.7
    spec = DeltaIntegralSpec(("+", "-"), p, q, tau, xi)
    assert delta_integral(spec) == pytest.approx(hyperbolic_oracle(p, q, tau, xi), rel=1e-5)


def test_hyperbolic_sign_swap_symmetry():
    # negating tau exchanges the roles of the two weights
    a = delta_integral(DeltaIntegralSpec(("+", "-"), 2.2, 1.3, -0.8, 1.7))
    b = delta_integral(DeltaIntegralSpec(("+", "-"), 1.3, 2.2, 0.8, 1.7))
    assert a == pytest.approx(b, rel=1e-12)
    # flipping both signs mirrors the elliptic branch in tau
    c = delta_integral(DeltaIntegralSpec(("-", "-"), 2.0, 1.0, -3.0, 1.0))
    d = delta_integral(DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 3.0, 1.0))
    assert c == pytest.approx(d, rel=1e-12)


def test_delta_integral_domain_errors():
    with pytest.raises(ConfigurationError):
        DeltaIntegralSpec(("+", "*"), 2.0, 1.0, 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 1.0, -1.0)
    with pytest.raises(ConfigurationError):
        delta_integral(DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 1.0, 2.0))  # tau < xi
    with pytest.raises(ConfigurationError):
        delta_integral(DeltaIntegralSpec(("+", "+"), 2.0, 1.0, -3.0, 1.0))  # wrong sign
    with pytest.raises(DivergenceError):
        delta_integral(DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 2.0, 2.0))  # degenerate
    with pytest.raises(ConfigurationError):
        delta_integral(DeltaIntegralSpec(("+", "-"), 2.2, 1.3, 3.0, 1.0))  # |tau| > xi
    with pytest.raises(DivergenceError):
        delta_integral(DeltaIntegralSpec(("+", "-"), 1.2, 0.7, 0.5, 1.0))  # p + q <= 2
    with pytest.raises(DivergenceError):
        delta_integral(DeltaIntegralSpec(("+", "-"), 2.2, 1.3, 1.0, 1.0))  # degenerate


def test_asymptotic_power_law_near_cone():
    # r = 2 elliptic: value = 4 pi / ((tau - xi)(tau + xi)) while the
    # tabulated law is 1 / (tau * gap); near the cone the ratio tends
    # to 2 pi, in the far regime to 4 pi
    near = DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 1.001, 1.0)
    ratio_near = delta_integral(near) / delta_integral_asymptotic(near, 2.0)
    assert ratio_near == pytest.approx(2.0 * np.pi, rel=1e-2)
    far = DeltaIntegralSpec(("+", "+"), 2.0, 1.0, 500.0, 1.0)
    ratio_far = delta_integral(far) / delta_integral_asymptotic(far, 2.0)
    assert ratio_far == pytest.approx(4.0 * np.pi, rel=1e-2)
    with pytest.raises(ConfigurationError):
        delta_integral_asymptotic(DeltaIntegralSpec(("+", "+"), 1.7, 1.7, 3.0, 1.0), 2.0)


def test_far_branch_against_direct_quadrature():
    def direct(tau, xi, r):
        f = lambda x: (xi * x + tau) ** (-r / 2.0) * (xi * x - tau) ** (
            1.0 - r / 2.0
        ) / np.sqrt(x * x - 1.0)
        val, _ = quad(f, 2.0, np.inf, limit=300)
        return val

    for tau, xi, r in ((0.0, 1.0, 2.0), (0.7, 1.0, 1.5), (-0.7, 1.3, 1.8)):
        assert far_branch_integral(tau, xi, r) == pytest.approx(
            direct(tau, xi, r), rel=1e-8
        )


def test_far_branch_divergence_and_domain():
    with pytest.raises(DivergenceError):
        far_branch_integral(0.0, 1.0, 1.0)
    with pytest.raises(DivergenceError):
        far_branch_integral(0.0, 1.0, 0.5)
    with pytest.raises(ConfigurationError):
        far_branch_integral(2.0, 1.0, 1.5)
    with pytest.raises(ConfigurationError):
        far_branch_integral(0.0, 0.0, 1.5)


def test_freq_pair_sigma():
    fp = FreqPair(eta=(1.0, 2.0), xi=(3.0, 1.0))
    assert fp.sigma == (2.0, -1.0)
