"""Frequency-domain asymptotics: response matrix, equilibrium covariance, r_max.

With the half-range transform ``R(w) = int_0^inf Gamma(t) exp(i w t) dt`` the
stationary solution of the Langevin equations is ``y(w) = F(w) b(w)`` with

    F(w) = (-i w + Z - i w R(w))^-1,

``Re R = (pi/2) J(|w|) g / |w|`` and ``Im R(w) = w P int_0^inf J(v) g(v) / (v (w**2 - v**2)) dv``.
On the symmetric/antisymmetric channels ``F`` reduces to the scalar
susceptibilities ``chi_c = 1 / (Omega0**2 - w**2 - i w R_c(w))``.

The zero-temperature equilibrium covariance is

    <{y_i, y_j}> = 1/2 int dw sum_{k,l in P} F_ik(w) conj(F_jl(w)) J(|w|) g_kl

with ``g_kk = 1`` and the distance weight on the cross terms.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import bath
from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    QuadratureError,
    SingularMatrixError,
)
from .gaussian import SystemParams, log_negativity

ASYMPTOTIC = "Asymptotic"
TRANSIENT = "Transient"
EN_THRESHOLD = 1e-10
PANEL_PERIODS = 8
MAX_PANELS = 200
_SQ2 = 1.0 / math.sqrt(2.0)
_U = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]])


def _quad(f, a, b, **kw):
    kw.setdefault("limit", 400)
    kw.setdefault("epsabs", 1e-12)
    kw.setdefault("epsrel", 1e-10)
    res = integrate.quad(f, a, b, full_output=1, **kw)
    if len(res) > 3 and res[1] > 1e3 * max(kw["epsabs"], kw["epsrel"] * abs(res[0])):
        raise QuadratureError(f"quadrature on [{a}, {b}] failed: {res[3].splitlines()[0]}")
    return res[0]


# ---------------------------------------------------------------------------
# half-range kernel transform


class _Channel:
    """Reduced density ``rho_c(v) = J_c(v) / v`` of one channel and its transforms."""

    def __init__(self, spec, r, sign):
        self.spec = spec
        self.r = r
        self.sign = sign

    def _free_rho(self, v):
        spec = self.spec
        geometry = bath.FREE3D if spec.geometry == bath.WAVEGUIDE else spec.geometry
        return bath._reduced_density(v, spec) * bath.channel_factor(v, self.r, geometry, self.sign)

    def rho(self, v):
        """``J_c(v) / v`` (channel density including ``1 +- g``)."""
        v = abs(v)
        spec = self.spec
        if spec.geometry != bath.WAVEGUIDE:
            return float(self._free_rho(v))
        if v <= spec.omega0:
            return 0.0
        out = 0.0
        if spec.include_free_background and v > spec.background_onset:
            out += float(self._free_rho(v))
        u = math.sqrt(v * v - spec.omega0**2)
        out += (
            8.0 * spec.gamma * spec.omega0**2 / (math.pi**2 * u * v)
            * bath._smooth_factor(v, spec) * bath.channel_factor(v, self.r, bath.WAVEGUIDE, self.sign, spec.omega0)
        )
        return out

    def re_r(self, w):
        return 0.5 * math.pi * self.rho(w)

    def im_r(self, w):
        """``w P int rho(v) / (w**2 - v**2) dv``."""
        w = float(w)
        if w == 0:
            return 0.0
        aw = abs(w)
        spec = self.spec
        if spec.geometry != bath.WAVEGUIDE and (self.r == 0 or self.r * spec.omega_c > 1e-4):
            return bath.im_half_range(w, self.r, spec, int(self.sign))
        total = 0.0
        lo = spec.background_onset if spec.geometry == bath.WAVEGUIDE else 0.0
        hi = spec.omega_max
        if spec.geometry != bath.WAVEGUIDE or spec.include_free_background:
            total += self._pv_smooth(self._free_rho, lo, hi, aw)
        if spec.geometry == bath.WAVEGUIDE:
            total += self._pv_mode(aw)
        return math.copysign(1.0, w) * total

    @staticmethod
    def _pv_smooth(rho, lo, hi, w):
        # w P int rho(v)/(w^2 - v^2) = -w P int [rho(v)/(v + w)] / (v - w)
        f = lambda v: -w * float(rho(v)) / (v + w)
        if lo < w < hi:
            return _quad(f, lo, hi, weight="cauchy", wvar=w)
        return _quad(lambda v: f(v) / (v - w), lo, hi)

    def _pv_mode(self, w):
        # single waveguide mode in u = sqrt(v^2 - w0^2): dv / (u v) = du / v^2
        spec = self.spec
        w0 = spec.omega0
        pref = 8.0 * spec.gamma * w0**2 / math.pi**2

        def amp(u):
            v2 = u * u + w0 * w0
            v = math.sqrt(v2)
            return bath._smooth_factor(v, spec) * bath.channel_factor(u, self.r, bath.FREE1D, self.sign) / v2

        u_max = spec.omega_max
        u1 = min(u_max, 20.0 * w0)
        if w <= w0:
            # w^2 - v^2 = (w^2 - w0^2) - u^2 < 0, no pole
            d = w0 * w0 - w * w
            f = lambda u: -w * amp(u) / (u * u + d)
            return pref * (_quad(f, 0.0, u1) + _quad(f, u1, u_max))
        uc = math.sqrt(w * w - w0 * w0)
        f = lambda u: -w * amp(u) / (u + uc)
        return pref * _quad(f, 0.0, u_max, weight="cauchy", wvar=uc)

    def chi(self, w, omega0):
        return 1.0 / (omega0**2 - w * w - 1j * w * complex(self.re_r(w), self.im_r(w)))


def half_range_transform(w, r, spec):
    """``R(r, w) = int_0^inf Gamma(r, t) exp(i w t) dt`` for the (0, r) kernel entries."""
    s_ch = _Channel(spec, r, +1.0)
    a_ch = _Channel(spec, r, -1.0)
    rs = complex(s_ch.re_r(w), s_ch.im_r(w))
    ra = complex(a_ch.re_r(w), a_ch.im_r(w))
    return 0.5 * (rs + ra), 0.5 * (rs - ra)


@dataclass
class FrequencyResponse:
    omega: float
    F: np.ndarray
    R: np.ndarray = field(repr=False)  # 2x2 kernel transform in the (Q1, Q2) layout


def _z_matrix(omega0):
    z = np.zeros((4, 4))
    z[0, 2] = z[1, 3] = -1.0
    z[2, 0] = z[3, 1] = omega0**2
    return z


def response_matrix(w, sys, spec):
    """``F(w) = (-i w + Z - i w R(w))^-1`` in the ordering (Q1, Q2, P1, P2)."""
    w = float(w)
    r0, rr = half_range_transform(w, sys.r, spec)
    rmat = np.array([[r0, rr], [rr, r0]])
    m = -1j * w * np.eye(4) + _z_matrix(sys.omega0)
    m[2:, :2] -= 1j * w * rmat
    if not np.all(np.isfinite(m)) or np.linalg.cond(m) > 1e13:
        raise SingularMatrixError(f"response matrix singular at w = {w}")
    return FrequencyResponse(w, np.linalg.inv(m), rmat)


# ---------------------------------------------------------------------------
# equilibrium covariance


def _peaks(ch, omega0, w_hi):
    """Local maxima of ``|chi|`` (damped resonances) on ``(0, w_hi)``."""
    grid = np.concatenate([np.linspace(1e-3, 3.0 * omega0, 200), np.geomspace(3.0 * omega0, w_hi, 60)[1:]])
    vals = np.array([abs(ch.chi(w, omega0)) for w in grid])
    out = []
    for i in range(1, grid.size - 1):
        if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]:
            res = optimize.minimize_scalar(
                lambda w: -abs(ch.chi(w, omega0)), bracket=(grid[i - 1], grid[i], grid[i + 1]), tol=1e-10
            )
            out.append(float(res.x) if grid[i - 1] < res.x < grid[i + 1] else float(grid[i]))
    return out


def _channel_moments(ch, omega0, spec):
    """``(<{q,q}>, <{p,p}>)`` of one channel: ``int_0^inf w^{0,2} |chi|^2 J_c dw``."""
    hi = spec.omega_max
    peaks = _peaks(ch, omega0, hi)
    edges = [0.0]
    if spec.geometry == bath.WAVEGUIDE:
        edges.append(spec.omega0)
    split = 3.0 * omega0
    for p in peaks:
        # half width of the resonance is about Re R(p) / 2; it can be tiny where
        # the channel density has a zero (1D bath, 1 +- cos(w r) = 0)
        width = max(1e-12 * p, 0.5 * ch.re_r(p))
        # decades out to the ends of the range resolve the Lorentzian tails
        k = 1.0
        while k * width < max(p, hi - p):
            edges.extend([p - k * width, p + k * width])
            k *= 10.0
        edges.append(p)
        split = max(split, p + 10.0 * width)
    edges.append(hi)
    # cos(w r) oscillates with period 2 pi / r; cut the range into panels of a few periods
    if ch.r > 0:
        n = min(MAX_PANELS, int(math.ceil(hi * ch.r / (PANEL_PERIODS * 2.0 * math.pi))))
        edges.extend(np.linspace(0.0, hi, n + 1)[1:-1].tolist())
    edges = sorted({min(max(e, 0.0), hi) for e in edges})

    def integrand(w, power):
        if w == 0.0:
            return 0.0
        c = ch.chi(w, omega0)
        return w**power * (c.real**2 + c.imag**2) * ch.rho(w) * w

    out = []
    for power in (0, 2):
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            # resonances come first; the small tail only needs accuracy relative to them
            epsabs = 1e-12 if b <= split else max(1e-12, 1e-11 * abs(total))
            total += _quad(integrand, a, b, args=(power,), epsrel=1e-9, epsabs=epsabs)
        out.append(total)
    return out


def equilibrium_covariance(sys, spec):
    """Zero-temperature stationary covariance of the damped two-oscillator system."""
    if spec.temperature != 0:
        raise DomainError("the frequency-domain route is implemented for T = 0 only")
    if spec.gamma <= 0:
        raise DomainError("a damped system (gamma > 0) is required")
    if sys.r == 0:
        raise DomainError("r > 0 required: at r = 0 the antisymmetric mode is undamped")
    if spec.geometry == bath.WAVEGUIDE:
        raise ConfigError("bound states below the gap make the waveguide equilibrium ill-defined here")
    qq = np.zeros(2)
    pp = np.zeros(2)
    for idx, sign in enumerate((+1.0, -1.0)):
        qq[idx], pp[idx] = _channel_moments(_Channel(spec, sys.r, sign), sys.omega0, spec)
    cov = np.zeros((4, 4))
    cov[:2, :2] = _U @ np.diag(qq) @ _U
    cov[2:, 2:] = _U @ np.diag(pp) @ _U
    return 0.5 * (cov + cov.T)


def asymptotic_log_negativity(sys, spec):
    return log_negativity(equilibrium_covariance(sys, spec))


# ---------------------------------------------------------------------------
# critical distance


@dataclass
class RmaxResult:
    r_max: float
    mode: str
    non_monotone: bool
    samples: list  # (r, E_N) pairs evaluated


def _entangled_measure(sys, spec, mode, t_max):
    if mode == ASYMPTOTIC:
        return asymptotic_log_negativity(sys, spec)
    if mode == TRANSIENT:
        from .qle import simulate

        res = simulate(sys, spec, t_max)
        return float(np.max(res.log_negativity))
    raise ConfigError(f"mode must be {ASYMPTOTIC!r} or {TRANSIENT!r}")


def find_rmax(sys, spec, mode=ASYMPTOTIC, t_max=20.0, r_lo=1e-3, r_hi=None, tol=1e-3, n_scan=12,
              threshold=EN_THRESHOLD, measure=None):
    """Largest separation at which ``E_N > threshold`` (asymptotically or at any t <= t_max).

    A coarse logarithmic scan brackets the outermost sign change, which is then
    bisected to ``tol``.  Zeros found inside the entangled range are reported via
    ``non_monotone``.
    """
    measure = measure or (lambda r: _entangled_measure(_with_r(sys, r), spec, mode, t_max))
    samples = []

    def ent(r):
        e = measure(r)
        samples.append((r, e))
        return e > threshold

    if not ent(r_lo):
        raise BracketError(f"no entanglement at r = {r_lo}; nothing to bracket")
    r_hi = r_hi if r_hi is not None else max(1.0, 20.0 / spec.omega_c)
    grow = 0
    while ent(r_hi):
        r_hi *= 2.0
        grow += 1
        if grow > 8:
            raise BracketError(f"still entangled at r = {r_hi / 2}")
    grid = np.geomspace(r_lo, r_hi, n_scan)[1:-1]
    flags = [True] + [ent(r) for r in grid] + [False]
    points = [r_lo] + list(grid) + [r_hi]
    last = max(i for i, f in enumerate(flags) if f)
    non_monotone = not all(flags[: last + 1])
    a, b = points[last], points[last + 1]
    while b - a > tol:
        m = 0.5 * (a + b)
        if ent(m):
            a = m
        else:
            b = m
    return RmaxResult(0.5 * (a + b), mode, non_monotone, samples)


def _with_r(sys, r):
    return SystemParams(sys.omega0, float(r), sys.kappa)
