"""Effective-oscillator model of the waveguide resonance in the Born-Markov limit.

The two system oscillators are split into symmetric and antisymmetric
combinations ``Q_{S/A} = (Q1 +- Q2) / sqrt(2)``.  The symmetric one couples
through ``-g p Q_S`` to a single effective oscillator ``(q, p)`` at the van Hove
frequency ``omega0``; both sectors also see the free 3D background bath in the
Born-Markov limit.  After the normal-mode transformation to the barred
variables ``(Q1b, Q2b, P1b, P2b)`` the master equation turns into a closed,
linear system for the second moments, parametrised here by the 14 Gaussian
coefficients ``c1 ... c14``:

    c1 = <{Q1b,Q1b}>/4   c2 = <{Q1b,P1b}>/2   c3 = <{P1b,P1b}>/4
    c6 = <{Q2b,Q2b}>/4   c7 = <{Q2b,P2b}>/2   c8 = <{P2b,P2b}>/4
    c11 = <{Q1b,Q2b}>/2  c12 = <{Q1b,P2b}>/2  c13 = <{Q2b,P1b}>/2  c14 = <{P1b,P2b}>/2

The first moments ``c4, c5, c9, c10`` vanish for the centred initial states used
here.  The antisymmetric sector is the same system with ``xi = 0``,
``Omega_bar_1 -> Omega_A`` and ``Omega_bar_2 -> omega0``.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import bath
from .errors import (
    ConvergenceError,
    DomainError,
    IntegratorError,
    NumericalError,
    SingularMatrixError,
    StabilityError,
)
from .gaussian import SystemParams, check_physical, log_negativity, log_negativity_batch

SECTORS = ("S", "A")
N_COEFF = 14
MATSUBARA_REL = 1e-12
MATSUBARA_STREAK = 3
MATSUBARA_CAP = 100_000
MATSUBARA_CHUNK = 512
IMAG_TOL = 1e-9
PHYS_TOL = 1e-3  # same bound as the time-domain solver
APPROX_TOL = 0.05  # agreement target (absolute E_N) between closed form and ODE
_SQ2 = 1.0 / math.sqrt(2.0)
_U = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]])
_V = np.kron(np.eye(2), _U)

# index pairs of the barred covariance (Q1b, Q2b, P1b, P2b) -> coefficient and scale
_COEFF_MAP = {
    1: (0, 0, 0.25),
    2: (0, 2, 0.5),
    3: (2, 2, 0.25),
    6: (1, 1, 0.25),
    7: (1, 3, 0.5),
    8: (3, 3, 0.25),
    11: (0, 1, 0.5),
    12: (0, 3, 0.5),
    13: (1, 2, 0.5),
    14: (2, 3, 0.5),
}


# ---------------------------------------------------------------------------
# renormalization, effective coupling, normal modes


def _counter_integral(r, spec, sign):
    """``int_0^inf J(w)/w (1 + sign sinc(w r)) dw`` in closed form."""
    wc, s = spec.omega_c, spec.s
    pref = 8.0 * spec.gamma * wc / math.pi
    local = math.gamma(s)
    if sign == 0:
        return pref * local
    x = wc * r
    if x == 0:
        geo = local
    else:
        # Gamma(s-1) sin((s-1) phi) written as Gamma(s) sin((s-1) phi)/(s-1): finite at s = 1
        phi = math.atan(x)
        q = s - 1.0
        ratio = phi if abs(q) < 1e-6 else math.sin(q * phi) / q
        geo = (1.0 + x * x) ** (-0.5 * q) * math.gamma(s) * ratio / x
    return pref * (local + sign * geo)


def renormalized_frequencies(sys, spec):
    """``(Omega_S, Omega_A)`` including the counter-term shift of the free 3D bath."""
    w2 = sys.omega0**2
    return (
        math.sqrt(w2 + _counter_integral(sys.r, spec, +1)),
        math.sqrt(w2 + _counter_integral(sys.r, spec, -1)),
    )


def _free_density(w, spec):
    return (8.0 * spec.gamma / math.pi) * w * (w / spec.omega_c) ** (spec.s - 1.0) * math.exp(-w / spec.omega_c)


def _vh_frequency(spec, omega0):
    if omega0 is not None:
        return float(omega0)
    if spec.geometry == bath.WAVEGUIDE:
        return spec.omega0
    raise DomainError("omega0 (van Hove frequency) is required for a free-space bath spec")


def effective_coupling(r, spec, omega0=None):
    """Coupling ``g(r)`` to the effective oscillator, regularized at ``r = 0`` by ``1/Omega_c``."""
    if r < 0:
        raise DomainError("r >= 0 required")
    w0 = _vh_frequency(spec, omega0)
    j = _free_density(w0, spec)
    return math.sqrt((2.0 * j / math.pi) * math.sqrt(2.0 / (w0 * r + w0 / spec.omega_c)))


def normal_mode_transform(omega_s, omega0, g):
    """``(xi, Omega_bar_1, Omega_bar_2)`` of the S-sector system + effective oscillator."""
    if g < 0:
        raise DomainError("g >= 0 required")
    a, c, gg = omega_s**2, omega0**2, g * g
    b = a + gg - c
    root = math.hypot(b, 2.0 * g * omega0)  # no underflow for tiny g at resonance
    if g == 0:
        if b <= 0:
            raise DomainError("g = 0 with Omega_S <= omega0 leaves the mode labels undefined")
        xi = 0.0
    else:
        xi = 2.0 * g * omega0 / (b + root) if b >= 0 else (root - b) / (2.0 * g * omega0)
    big = 0.5 * (a + gg + c + root)
    small2 = 0.5 * (a + gg + c - root)
    if small2 <= 0:
        raise StabilityError(f"Omega_bar_2^2 = {small2:.4g} <= 0: coupling too strong")
    small2 = a * c / big  # same value, free of cancellation
    return xi, math.sqrt(big), math.sqrt(small2)


def barred_transform(xi, omega0, omega_bar_2):
    """Matrix mapping ``(Q_S, q, P_S, p)`` to ``(Q1b, Q2b, P1b, P2b)``."""
    h = math.hypot(1.0, xi)
    n, xn = 1.0 / h, xi / h  # xi may be huge when Omega_S < omega0 and g -> 0
    w2 = omega_bar_2
    m = np.zeros((4, 4))
    m[0, 0], m[0, 3] = n, -xn / omega0
    m[1, 1], m[1, 2] = omega0 * n / w2, -xn / w2
    m[2, 2], m[2, 1] = n, xn * omega0
    m[3, 3], m[3, 0] = w2 * n / omega0, xn * w2
    return m


# ---------------------------------------------------------------------------
# bath correlators


def _coth(x):
    return 1.0 / math.tanh(x)


def _check_real(z, what):
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise NumericalError(f"{what}: imaginary residue {z.imag:.3g}")
    return z.real


def _cauchy_pair(p, kappa, omega):
    """``(P int v^p e^{-kappa v}/(v - w), int v^p e^{-kappa v}/(v + w))``."""
    return bath.laplace_cauchy(p, kappa, omega, True), bath.laplace_cauchy(p, kappa, omega)


def _matsubara_sum(term):
    """``sum_{n>=1} term(n)`` with the relative stopping rule on consecutive terms.

    The terms fall off like ``n**-4``; the integral estimate ``term(N) N / 3`` of
    the remaining tail is added on exit.
    """
    total = 0.0
    streak = 0
    n0 = 1
    while n0 <= MATSUBARA_CAP:
        n = np.arange(n0, min(n0 + MATSUBARA_CHUNK, MATSUBARA_CAP + 1))
        vals = term(n)
        for k, v in zip(n, vals):
            total += v
            if abs(v) < MATSUBARA_REL * abs(total):
                streak += 1
                if streak >= MATSUBARA_STREAK:
                    return total + v * k / 3.0
            else:
                streak = 0
        n0 = n[-1] + 1
    raise ConvergenceError(f"Matsubara sum not converged after {MATSUBARA_CAP} terms")


def bath_alphas(omega, sector, r, spec):
    """``(alpha1, alpha2, alpha3, alpha4)`` of the free 3D bath at frequency ``omega``.

    ``alpha1 = int_0^inf nu cos``, ``alpha2 = -int_0^inf nu sin / Omega``,
    ``alpha3 = -int_0^inf mu cos``, ``alpha4 = int_0^inf mu sin / Omega``, with
    the symmetric (``sector='S'``) or antisymmetric weight ``1 +- sinc(w r)``.
    """
    if sector not in SECTORS:
        raise DomainError("sector must be 'S' or 'A'")
    if not omega > 0:
        raise DomainError("omega > 0 required")
    sign = 1.0 if sector == "S" else -1.0
    T = spec.temperature
    s, wc = spec.s, spec.omega_c
    c0 = (8.0 * spec.gamma / math.pi) * wc ** (1.0 - s)  # J(w) = c0 w^s e^{-w/wc}
    mu = 1.0 / wc
    x = omega * r
    sinc = 1.0 if x == 0 else math.sin(x) / x
    weight = 1.0 + sign * sinc
    j = _free_density(omega, spec)
    coth = 1.0 if T == 0 else _coth(omega / (2.0 * T))
    a1 = 0.25 * math.pi * j * weight * coth
    a4 = 0.25 * math.pi * j * weight / omega

    # principal values of J_c w / (w^2 - W^2) and J_c / (w^2 - W^2)
    pv, pl = _cauchy_pair(s, mu, omega)
    pv, pl = _check_real(pv, "alpha local"), _check_real(pl, "alpha local")
    x_loc = 0.5 * c0 * (pv + pl)
    y_loc = 0.5 * c0 * (pv - pl) / omega
    if r == 0:
        x_geo, y_geo = x_loc, y_loc
    else:
        kappa = complex(mu, -r)
        gv, gl = _cauchy_pair(s - 1.0, kappa, omega)
        x_geo = 0.5 * c0 * (gv + gl).imag / r
        y_geo = 0.5 * c0 * (gv - gl).imag / (r * omega)
    x_c = x_loc + sign * x_geo  # P int J_c w/(w^2 - W^2)
    a3 = -0.5 * x_c
    if T == 0:
        a2 = 0.5 * (y_loc + sign * y_geo)
    else:
        z_c = _counter_integral(r, spec, sign)

        def term(n):
            nu = 2.0 * math.pi * T * n
            beta = 1j * nu
            loc = 0.5 * (bath.laplace_cauchy(s, mu, beta) + bath.laplace_cauchy(s, mu, -beta)).real
            y = loc
            if r == 0:
                y = loc * (1.0 + sign)
            else:
                kap = complex(mu, -r)
                geo = 0.5 * (bath.laplace_cauchy(s - 1.0, kap, beta) + bath.laplace_cauchy(s - 1.0, kap, -beta)).imag / r
                y = loc + sign * geo
            return c0 * y / (omega**2 + nu**2)

        a2 = coth * x_c / (2.0 * omega) - T * z_c / omega**2 - 2.0 * T * _matsubara_sum(term)
    return a1, a2, a3, a4


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class MarkovParams:
    """Everything the moment equations need, for both sectors."""

    omega0: float  # van Hove frequency of the effective oscillator
    g: float
    Omega_S: float
    Omega_A: float
    xi: float
    Omega_bar_1: float
    Omega_bar_2: float
    alphas: dict = field(repr=False)  # keys "S1", "S2", "A1", "A2" -> (a1, a2, a3, a4)
    system_omega: float = 1.0  # bare system frequency Omega_0 (initial state)
    temperature: float = 0.0

    def sector(self, name):
        """``(xi, W1, W2, alphas at W1, alphas at W2)`` of one sector."""
        if name == "S":
            return self.xi, self.Omega_bar_1, self.Omega_bar_2, self.alphas["S1"], self.alphas["S2"]
        return 0.0, self.Omega_A, self.omega0, self.alphas["A1"], self.alphas["A2"]


def build_markov_params(sys, spec, g=None, omega0=None):
    """Assemble :class:`MarkovParams` from the system, bath and (optional) coupling override.

    ``g=None`` uses :func:`effective_coupling` at the system separation.
    """
    w0 = _vh_frequency(spec, omega0)
    om_s, om_a = renormalized_frequencies(sys, spec)
    if g is None:
        g = effective_coupling(sys.r, spec, w0)
    xi, w1, w2 = normal_mode_transform(om_s, w0, g)
    alphas = {
        "S1": bath_alphas(w1, "S", sys.r, spec),
        "S2": bath_alphas(w2, "S", sys.r, spec),
        "A1": bath_alphas(om_a, "A", sys.r, spec),
        "A2": bath_alphas(w0, "A", sys.r, spec),
    }
    return MarkovParams(w0, float(g), om_s, om_a, xi, w1, w2, alphas, sys.omega0, spec.temperature)


# ---------------------------------------------------------------------------
# moment equations


def sector_generators(xi, w1, w2, al1, al2):
    """Drift ``A`` and diffusion ``N`` of ``dC/dt = A C + C A^T + N`` (barred variables)."""
    a1, a2, a3, a4 = al1
    b1, b2, b3, b4 = al2
    n = 1.0 / (1.0 + xi * xi)
    Q1, Q2, P1, P2 = range(4)
    d = np.zeros((4, 4))
    f = np.zeros((4, 4))
    for mat, (c1, c2), (e1, e2) in ((d, (a1, a2), (b1, b2)), (f, (a3, a4), (b3, b4))):
        mat[Q1, Q1] += n * c1
        mat[P2, Q1] += n * c1 * xi / w2
        mat[Q1, P1] += n * c2
        mat[P2, P1] += n * c2 * xi / w2
        mat[P2, P2] += n * xi * xi * e1 / w2**2
        mat[Q1, P2] += n * xi * e1 / w2
        mat[P2, Q2] -= n * xi * xi * e2
        mat[Q1, Q2] -= n * xi * w2 * e2
    sigma = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    h = np.diag([w1 * w1, w2 * w2, 1.0, 1.0])
    drift = sigma @ h + 2.0 * sigma @ f
    noise = 2.0 * sigma @ (d + d.T) @ sigma.T
    return drift, noise


def coefficients_from_covariance(cov):
    """Map barred covariances ``(..., 4, 4)`` to coefficient arrays ``(..., 14)`` (``c1`` at index 0)."""
    cov = np.asarray(cov)
    out = np.zeros(cov.shape[:-2] + (N_COEFF,))
    for k, (i, j, scale) in _COEFF_MAP.items():
        out[..., k - 1] = scale * cov[..., i, j]
    return out


def covariance_from_coeffs(c):
    """Inverse of :func:`coefficients_from_covariance`."""
    c = np.asarray(c)
    cov = np.zeros(c.shape[:-1] + (4, 4))
    for k, (i, j, scale) in _COEFF_MAP.items():
        cov[..., i, j] = c[..., k - 1] / scale
        cov[..., j, i] = c[..., k - 1] / scale
    return cov


def initial_barred_covariance(xi, omega0, w2, system_omega, kappa):
    """Squeezed system oscillator and effective oscillator ground state, in barred variables."""
    phys = np.diag([1.0 / (kappa * system_omega), 1.0 / omega0, kappa * system_omega, omega0])
    m = barred_transform(xi, omega0, w2)
    return m @ phys @ m.T


@dataclass
class MarkovCoefficients:
    times: np.ndarray
    S: np.ndarray  # (N, 14)
    A: np.ndarray  # (N, 14)
    modes: dict = field(default_factory=dict)


def integrate_coefficients(params, init, t_max, dt=0.05, rtol=1e-10, atol=1e-12):
    """Adaptive Runge-Kutta solution of the full moment equations for both sectors."""
    if t_max <= 0 or dt <= 0:
        raise DomainError("t_max > 0 and dt > 0 required")
    n_t = int(round(t_max / dt)) + 1
    times = np.linspace(0.0, (n_t - 1) * dt, n_t)
    out = {}
    for name in SECTORS:
        xi, w1, w2, al1, al2 = params.sector(name)
        drift, noise = sector_generators(xi, w1, w2, al1, al2)
        cov0 = initial_barred_covariance(xi, params.omega0, w2, params.system_omega, init.kappa)

        def rhs(_t, y):
            c = y.reshape(4, 4)
            return (drift @ c + c @ drift.T + noise).ravel()

        sol = integrate.solve_ivp(rhs, (0.0, times[-1]), cov0.ravel(), method="DOP853", t_eval=times,
                                  rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegratorError(f"moment equations ({name}): {sol.message}")
        covs = sol.y.T.reshape(-1, 4, 4)
        out[name] = coefficients_from_covariance(0.5 * (covs + np.transpose(covs, (0, 2, 1))))
    return MarkovCoefficients(times, out["S"], out["A"])


def _solve_modes(matrix, rhs):
    if np.linalg.cond(matrix) > 1e12:
        raise SingularMatrixError("degenerate eigenmodes: mode-matching system is singular")
    return np.linalg.solve(matrix, rhs)


def approximate_coefficients(params, init, t_max, dt=0.05):
    """Closed-form coefficients with the ``O(g^2 gamma)`` sector couplings dropped."""
    n_t = int(round(t_max / dt)) + 1
    t = np.linspace(0.0, (n_t - 1) * dt, n_t)
    out = {}
    modes = {}
    for name in SECTORS:
        xi, w1, w2, al1, _ = params.sector(name)
        a1, a2, a3, a4 = al1
        cov0 = initial_barred_covariance(xi, params.omega0, w2, params.system_omega, init.kappa)
        c0 = coefficients_from_covariance(cov0)
        a = w1 * w1 + 2.0 * a3
        root = np.sqrt(complex(a - a4 * a4))
        lam = np.array([-2.0 * a4, -2.0 * (a4 + 1j * root), -2.0 * (a4 - 1j * root)])
        c1_inf = (a1 - 2.0 * a2 * a4) / (4.0 * a4 * a)
        c3_inf = a1 / (4.0 * a4)
        f3 = lam**2 / 2.0 + a + a4 * lam
        m = np.array([np.ones(3), lam, f3])
        amp = _solve_modes(m, np.array([c0[0] - c1_inf, c0[1], c0[2] - c3_inf], dtype=complex))
        e = np.exp(np.outer(t, lam))
        c = np.zeros((n_t, N_COEFF))
        c[:, 0] = (e @ amp).real + c1_inf
        c[:, 1] = (e @ (amp * lam)).real
        c[:, 2] = (e @ (amp * f3)).real + c3_inf

        # free rotation of the second mode
        om = 2.0 * w2
        mb = np.array([[1, 1, 1], [1j * om, -1j * om, 0], [-w2**2, -w2**2, w2**2]], dtype=complex)
        bb = _solve_modes(mb, np.array([c0[5], c0[6], c0[7]], dtype=complex))
        ep, em = np.exp(1j * om * t), np.exp(-1j * om * t)
        c[:, 5] = (bb[0] * ep + bb[1] * em + bb[2]).real
        c[:, 6] = (1j * om * (bb[0] * ep - bb[1] * em)).real
        c[:, 7] = (-(w2**2) * (bb[0] * ep + bb[1] * em - bb[2])).real

        # cross terms c11..c14
        kap = np.array([-a4 + 1j * (root + w2), -a4 - 1j * (root + w2), -a4 + 1j * (root - w2), -a4 - 1j * (root - w2)])
        den = a - w2**2 + 2.0 * a4 * kap + kap**2
        r12 = -2.0 * w2**2 * (a4 + kap) / den
        r13 = kap - r12
        r14 = w2**2 * (a - w2**2 - kap**2) / den
        mc = np.array([np.ones(4), r12, r13, r14])
        cc = _solve_modes(mc, np.array([c0[10], c0[11], c0[12], c0[13]], dtype=complex))
        ek = np.exp(np.outer(t, kap))
        for col, ratio in ((10, np.ones(4)), (11, r12), (12, r13), (13, r14)):
            c[:, col] = (ek @ (cc * ratio)).real
        out[name] = c
        modes[name] = {"lambda": lam, "kappa": kap, "A": amp, "B": bb, "C": cc}
    return MarkovCoefficients(t, out["S"], out["A"], modes)


# ---------------------------------------------------------------------------
# assembly


def _physical_from_sectors(cov_s_barred, cov_a_barred, params):
    """Two-oscillator covariance (Q1, Q2, P1, P2) from the barred sector covariances."""
    m = barred_transform(params.xi, params.omega0, params.Omega_bar_2)
    minv = np.linalg.inv(m)
    phys_s = minv @ cov_s_barred @ minv.T  # (Q_S, q, P_S, p)
    ch = np.zeros(cov_s_barred.shape[:-2] + (4, 4))
    # channel ordering (Q_S, Q_A, P_S, P_A); A-sector barred mode 1 is (Q_A, P_A) itself
    sel = [0, 2]
    for i, ci in enumerate((0, 2)):
        for j, cj in enumerate((0, 2)):
            ch[..., ci, cj] = phys_s[..., sel[i], sel[j]]
            ch[..., ci + 1, cj + 1] = cov_a_barred[..., sel[i], sel[j]]
    return _V.T @ ch @ _V


def covariance_from_coefficients(coeffs, params, check=True):
    """Covariance trajectory ``(N, 4, 4)`` of the two system oscillators."""
    cs = covariance_from_coeffs(coeffs.S)
    ca = covariance_from_coeffs(coeffs.A)
    cov = _physical_from_sectors(cs, ca, params)
    if check:
        for c in cov:
            check_physical(c, PHYS_TOL)
    return cov


def negativity_trajectory(coeffs, params, check=True):
    return log_negativity_batch(covariance_from_coefficients(coeffs, params, check))


def _thermal_diag(freq, temperature):
    n = 1.0 if temperature == 0 else _coth(freq / (2.0 * temperature))
    return n / freq, n * freq


def asymptotic_negativity(params, temperature=None):
    """E_N of the two system oscillators in the thermal state of the diagonalized Hamiltonian."""
    T = params.temperature if temperature is None else temperature
    if T < 0:
        raise DomainError("temperature >= 0 required")
    if not params.Omega_bar_2 > 0:
        raise StabilityError("Omega_bar_2 must be positive")
    q1, p1 = _thermal_diag(params.Omega_bar_1, T)
    q2, p2 = _thermal_diag(params.Omega_bar_2, T)
    qa, pa = _thermal_diag(params.Omega_A, T)
    qo, po = _thermal_diag(params.omega0, T)
    cs = np.diag([q1, q2, p1, p2])
    ca = np.diag([qa, qo, pa, po])
    return log_negativity(_physical_from_sectors(cs, ca, params))
