import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from bathent import markov as mk
from bathent.bath import BathSpec
from bathent.errors import DomainError, StabilityError
from bathent.gaussian import SIGMA, SystemParams, symplectic_eigenvalues_batch
from markov_oracles import ALPHA_POINTS, alpha_by_regularization, printed_moment_equations

FIG8 = BathSpec("Free3D", gamma=0.05, s=3.0, omega_c=3.0, temperature=0.01)


def counter_by_quadrature(r, spec, sign):
    def f(w):
        g = math.sin(w * r) / (w * r) if r > 0 else 1.0
        return (8 * spec.gamma / math.pi) * (w / spec.omega_c) ** (spec.s - 1) * math.exp(-w / spec.omega_c) * (1 + sign * g)

    return integrate.quad(f, 0, 60 * spec.omega_c, limit=500, epsabs=1e-13)[0]


@pytest.mark.parametrize("s", [1.0, 1.5, 3.0])
@pytest.mark.parametrize("r", [0.0, 1e-7, 0.5, 2.0])
def test_renormalized_frequencies_against_quadrature(s, r):
    spec = BathSpec("Free3D", 0.05, s, 3.0)
    om_s, om_a = mk.renormalized_frequencies(SystemParams(1.0, r, 1.0), spec)
    assert om_s**2 - 1 == pytest.approx(counter_by_quadrature(r, spec, 1), rel=1e-9)
    assert om_a**2 - 1 == pytest.approx(counter_by_quadrature(r, spec, -1), rel=1e-6, abs=1e-12)


def test_renormalized_frequency_limits():
    spec = BathSpec("Free3D", 0.05, 3.0, 3.0)
    om_s, om_a = mk.renormalized_frequencies(SystemParams(1.0, 0.0, 1.0), spec)
    assert om_a == 1.0
    local = mk._counter_integral(0.0, spec, 0)
    assert om_s**2 == pytest.approx(1 + 2 * local)
    far_s, far_a = mk.renormalized_frequencies(SystemParams(1.0, 1e6, 1.0), spec)
    assert far_s == pytest.approx(far_a, rel=1e-6)
    assert far_s**2 == pytest.approx(1 + local, rel=1e-6)


def test_effective_coupling_formula():
    spec = BathSpec("Free3D", 0.05, 3.0, 3.0)
    w0 = 1.0
    j = (8 * 0.05 / math.pi) * w0 * (w0 / 3.0) ** 2 * math.exp(-w0 / 3.0)
    for r in (0.0, 0.5, 2.0, 10.0):
        expect = math.sqrt(2 * j / math.pi * math.sqrt(2 / (w0 * r + w0 / 3.0)))
        assert mk.effective_coupling(r, spec, w0) == pytest.approx(expect, rel=1e-14)
    # long-distance fall-off g ~ r**-1/4
    ratio = mk.effective_coupling(1e4, spec, w0) / mk.effective_coupling(1.6e5, spec, w0)
    assert ratio == pytest.approx(2.0, rel=1e-4)
    with pytest.raises(DomainError):
        mk.effective_coupling(1.0, spec)  # free bath needs the resonance frequency


@pytest.mark.parametrize("om_s,w0,g", [(1.3, 1.0, 0.1), (0.9, 1.0, 0.3), (1.0, 1.0, 0.05), (1.2, 1.0, 0.0)])
def test_normal_modes_diagonalize_the_hamiltonian(om_s, w0, g):
    xi, w1, w2 = mk.normal_mode_transform(om_s, w0, g)
    m = mk.barred_transform(xi, w0, w2)
    # H = (P_S^2 + om_s^2 Q_S^2 + (p - g Q_S)^2 + w0^2 q^2) / 2 in (Q_S, q, P_S, p); the
    # g^2 Q_S^2 / 2 from the minimal-coupling square is what the eigenfrequencies diagonalize
    h = np.diag([om_s**2 + g * g, w0**2, 1.0, 1.0])
    h[0, 3] = h[3, 0] = -g
    minv = np.linalg.inv(m)
    hb = minv.T @ h @ minv
    assert np.allclose(hb, np.diag([w1**2, w2**2, 1.0, 1.0]), atol=1e-12)
    assert np.allclose(m @ SIGMA @ m.T, SIGMA, atol=1e-12)  # canonical
    assert w1 * w2 == pytest.approx(om_s * w0, rel=1e-13)


def test_resonant_splitting():
    # at resonance the splitting is linear in g for weak coupling
    w0 = 1.0
    for g in (1e-3, 1e-2):
        xi, w1, w2 = mk.normal_mode_transform(w0, w0, g)
        assert xi == pytest.approx(1.0, abs=2 * g)
        assert w1 - w2 == pytest.approx(g, rel=1e-2)
    # strong coupling stays stable: Omega_bar_1 Omega_bar_2 = Omega_S omega0
    _, w1, w2 = mk.normal_mode_transform(1.0, 1.0, 2.0)
    assert w2 > 0 and w1 * w2 == pytest.approx(1.0)
    with pytest.raises(DomainError):
        mk.normal_mode_transform(0.9, 1.0, 0.0)


@pytest.mark.parametrize("point", ALPHA_POINTS[:3])
def test_alphas_against_regularized_integrals(point):
    s, T, r, om, sector = point
    spec = BathSpec("Free3D", gamma=0.05, omega_c=3.0, s=s, temperature=T)
    a = mk.bath_alphas(om, sector, r, spec)
    assert a[1] == pytest.approx(alpha_by_regularization(om, sector, r, spec, 2), rel=1e-4)
    assert a[2] == pytest.approx(alpha_by_regularization(om, sector, r, spec, 3), rel=1e-4)


def test_alpha_rates():
    spec = BathSpec("Free3D", gamma=0.05, omega_c=3.0, s=1.0, temperature=0.2)
    om, r = 1.1, 0.7
    j = 8 * 0.05 / math.pi * om * math.exp(-om / 3.0)
    for sector, sign in (("S", 1), ("A", -1)):
        a1, _, _, a4 = mk.bath_alphas(om, sector, r, spec)
        w = 1 + sign * math.sin(om * r) / (om * r)
        assert a4 == pytest.approx(math.pi * j * w / (4 * om), rel=1e-13)
        assert a1 == pytest.approx(math.pi * j * w / 4 / math.tanh(om / 0.4), rel=1e-13)
    with pytest.raises(DomainError):
        mk.bath_alphas(1.0, "X", r, spec)


def test_generator_against_printed_moment_equations():
    rng = np.random.default_rng(1)
    xi, w1, w2 = 0.3, 1.4, 0.8
    al1 = rng.normal(size=4) * 0.1
    al2 = rng.normal(size=4) * 0.1
    drift, noise = mk.sector_generators(xi, w1, w2, al1, al2)
    x = rng.normal(size=(4, 4))
    cov = x @ x.T
    dcov = drift @ cov + cov @ drift.T + noise
    c = dict(enumerate(mk.coefficients_from_covariance(cov), 1))
    d = dict(enumerate(mk.coefficients_from_covariance(dcov), 1))
    printed = printed_moment_equations(xi, w1, w2, al1, al2, c)
    for k, v in printed.items():
        if k != 11:
            assert d[k] == pytest.approx(v, abs=1e-12), k
    # the printed dc11/dt lacks alpha_3(Omega_bar_2) in the c12 coefficient
    assert d[11] != pytest.approx(printed[11], abs=1e-6)
    assert d[11] == pytest.approx(printed_moment_equations(xi, w1, w2, al1, al2, c, fixed=True)[11], abs=1e-12)


def test_decoupled_sector_has_a_free_second_mode():
    drift, noise = mk.sector_generators(0.0, 1.3, 0.7, (0.1, 0.02, -0.05, 0.03), (0.2, 0.1, 0.1, 0.1))
    assert np.allclose(drift[np.ix_([1, 3], [1, 3])], [[0, 1], [-0.49, 0]])
    assert np.allclose(drift[np.ix_([1, 3], [0, 2])], 0.0)
    assert np.allclose(noise[np.ix_([1, 3], [1, 3])], 0.0)


def test_coefficient_map_round_trip():
    x = np.random.default_rng(2).normal(size=(3, 4, 4))
    cov = x @ np.transpose(x, (0, 2, 1))
    assert np.allclose(mk.covariance_from_coeffs(mk.coefficients_from_covariance(cov)), cov)


@pytest.mark.parametrize("kappa", [1.0, 5.0])
def test_initial_coefficients_match_printed_values(kappa):
    xi, w0, w2, om = 0.2, 1.0, 0.9, 1.0
    c = mk.coefficients_from_covariance(mk.initial_barred_covariance(xi, w0, w2, om, kappa))
    ko = kappa * om
    n = 1 + xi**2
    assert c[0] == pytest.approx((w0 + xi**2 * ko) / (4 * ko * w0 * n))
    assert c[1] == 0.0
    assert c[2] == pytest.approx((ko + xi**2 * w0) / (4 * n))
    assert c[5] == pytest.approx((w0 + xi**2 * ko) / (4 * w2**2 * n))
    assert c[6] == 0.0
    assert c[7] == pytest.approx(w2**2 * (ko + xi**2 * w0) / (4 * ko * w0 * n))
    assert c[10] == 0.0 and c[13] == 0.0
    assert abs(c[11]) == pytest.approx(abs(xi * w2 * (w0 - ko) / (2 * ko * w0 * n)), abs=1e-15)
    assert abs(c[12]) == pytest.approx(abs(xi * (w0 - ko) / (2 * w2 * n)), abs=1e-15)


def params_for(kappa=5.0, g=None, r=2.0, spec=FIG8):
    sp = SystemParams(1.0, r, kappa)
    return sp, mk.build_markov_params(sp, spec, g=g, omega0=1.0)


def test_closed_form_eigenmodes():
    sp, p = params_for()
    co = mk.approximate_coefficients(p, sp, 1.0, 0.05)
    for name in mk.SECTORS:
        _, w1, _, al1, _ = p.sector(name)
        lam = co.modes[name]["lambda"]
        assert lam[0] == pytest.approx(-2 * al1[3])
        root = math.sqrt(w1**2 + 2 * al1[2] - al1[3] ** 2)
        assert lam[1] == pytest.approx(-2 * (al1[3] + 1j * root))


def test_closed_form_starts_at_initial_state():
    sp, p = params_for()
    ap = mk.approximate_coefficients(p, sp, 2.0, 0.05)
    ode = mk.integrate_coefficients(p, sp, 2.0, 0.05)
    assert np.allclose(ap.S[0], ode.S[0], atol=1e-12)
    assert np.allclose(ap.A[0], ode.A[0], atol=1e-12)
    # the first derivatives agree too: compare the first step
    assert np.allclose(ap.S[1], ode.S[1], atol=2e-3)


def test_uncoupled_limit_is_exact():
    sp, p = params_for(g=0.0)
    ap = mk.approximate_coefficients(p, sp, 30.0, 0.05)
    ode = mk.integrate_coefficients(p, sp, 30.0, 0.05)
    assert np.allclose(ap.S, ode.S, atol=1e-8)
    assert np.allclose(ap.A, ode.A, atol=1e-8)


def test_trajectories_respect_documented_physicality_bound():
    for kappa in (1.0, 10.0):
        sp, p = params_for(kappa)
        cov = mk.covariance_from_coefficients(mk.integrate_coefficients(p, sp, 60.0, 0.05), p)
        assert symplectic_eigenvalues_batch(cov)[:, 0].min() >= 1 - mk.PHYS_TOL


def test_asymptotic_state_limits():
    spec = BathSpec("Free3D", gamma=0.01, s=1.0, omega_c=3.0, temperature=0.3)
    _, p = params_for(1.0, g=0.0, r=1.0, spec=spec)
    assert mk.asymptotic_negativity(p) == 0.0
    # coupling to the resonance builds entanglement; heating removes it
    _, p = params_for(1.0, g=0.5, r=1.0, spec=spec.with_(temperature=0.0))
    cold = mk.asymptotic_negativity(p)
    assert cold > 0
    assert mk.asymptotic_negativity(p, temperature=0.1) < cold
    assert mk.asymptotic_negativity(p, temperature=5.0) == 0.0
    with pytest.raises(DomainError):
        mk.asymptotic_negativity(p, temperature=-1.0)


def test_frozen_regression_fig8_kappa5():
    # regression value frozen from this implementation (ODE route)
    sp, p = params_for(5.0)
    en = mk.negativity_trajectory(mk.integrate_coefficients(p, sp, 60.0, 0.05), p)
    assert float(en.max()) == pytest.approx(FROZEN_KAPPA5_MAX, rel=1e-6)


FROZEN_KAPPA5_MAX = 0.05690850328492676


@settings(max_examples=20)
@given(om_s=st.floats(0.5, 2.0), g=st.floats(0.0, 0.4))
def test_normal_mode_property(om_s, g):
    if g == 0 and om_s <= 1.0:
        return
    try:
        xi, w1, w2 = mk.normal_mode_transform(om_s, 1.0, g)
    except StabilityError:
        return
    m = mk.barred_transform(xi, 1.0, w2)
    assert np.allclose(m @ SIGMA @ m.T, SIGMA, atol=1e-10)
    assert w1 >= w2 > 0
