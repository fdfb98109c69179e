"""Exact time-domain solution of the two coupled quantum Langevin equations.

The memory term ``d/dt int_0^t Gamma(r, t - t') Q(t') dt'`` is replaced by a bank
of auxiliary amplitudes ``f_i(s_k)`` on a frequency grid,

    d/dt f_i(s_k) = h0_k Q_i + hr_k Q_j + i s_k f_i(s_k)
    dP_i/dt      = -Omega0**2 Q_i - Re sum_k d/dt f_i(s_k)

with ``h_k = ds_k J(|s_k|) g(|s_k| r) / (2 |s_k|)``.  The resulting linear ODE is
integrated with an embedded Dormand-Prince 4(5) pair.

Because both oscillators see the same local kernel, the system splits exactly
into the symmetric and antisymmetric channels ``Q_S/A = (Q1 +- Q2)/sqrt 2`` with
weights ``h0 +- hr``; on a grid symmetric in ``s`` the amplitudes at ``-s_k`` are the
complex conjugates of those at ``s_k``.  The Green's function is assembled from
these two scalar channels, which is exact and about eight times cheaper than
integrating the full state.

The covariance follows from

    Cov(t) = G(t) Cov(0) G(t)^T + int int Gp(t - t1) K(t1 - t2) Gp(t - t2)^T dt1 dt2

where ``Gp`` holds the momentum columns of ``G`` and the noise kernel is sampled on
the same frequency nodes, so the discretized bath obeys the
fluctuation-dissipation relation exactly.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import bath
from ._accel import USE_NUMBA, njit
from .errors import ConfigError, IntegratorError, PhysicalityError
from .gaussian import SystemParams, log_negativity_batch, symplectic_eigenvalues_batch

UNIFORM = "Uniform"
QUADRATIC = "QuadraticFromGap"
GRID_MODES = (UNIFORM, QUADRATIC)

RTOL = 1e-8
ATOL = 1e-10
MAX_STEPS = 50_000_000
# recurrence time 2 pi / ds must exceed t_max by this margin
RECURRENCE_MARGIN = 1.5
PHYS_TOL = 1e-3

_SQ2 = 1.0 / math.sqrt(2.0)
_U = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]])
# (Q1, Q2, P1, P2) -> (Q_S, Q_A, P_S, P_A)
CHANNEL_BASIS = np.kron(np.eye(2), _U)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class AuxGrid:
    """Frequency nodes of the auxiliary amplitudes (full symmetric grid)."""

    mode: str
    n_grid: int
    s_max: float
    omega0: float = 0.0

    def __post_init__(self):
        if self.mode not in GRID_MODES:
            raise ConfigError(f"grid mode must be one of {GRID_MODES}")
        if self.n_grid < 1:
            raise ConfigError("n_grid >= 1 required")
        if not self.s_max > self.omega0 >= 0:
            raise ConfigError("s_max > omega0 >= 0 required")

    @property
    def spacing(self):
        if self.mode == UNIFORM:
            return self.s_max / (2 * self.n_grid + 1)
        return 2.0 * (self.s_max - self.omega0) / self.n_grid

    def positive_nodes(self):
        """Non-negative nodes with their weights and multiplicity (2 for +-s pairs)."""
        n = self.n_grid
        k = np.arange(0, n + 1, dtype=float)
        if self.mode == UNIFORM:
            ds = np.full(k.size, self.spacing)
            s = k * self.spacing
            mult = np.where(k == 0, 1.0, 2.0)
        else:
            span = self.s_max - self.omega0
            s = span * k * k / (n * n) + self.omega0
            # the edge node s = omega0 has ds = 0; its finite weight is added in _node_weights
            ds = 2.0 * k * span / (n * n)
            mult = np.full(k.size, 2.0)
        return s, ds, mult

    def nodes(self):
        """Full grid ``(s_k, ds_k)`` in increasing order."""
        s, ds, mult = self.positive_nodes()
        neg = mult == 2.0
        return np.concatenate([-s[neg][::-1], s]), np.concatenate([ds[neg][::-1], ds])

    @property
    def size(self):
        return self.nodes()[0].size

    def recurrence_time(self):
        # nodes commensurate with the largest local spacing rephase after 2 pi / ds
        return 2.0 * math.pi / self.spacing


def default_grid(spec, t_max, n_min=64, s_max=None):
    """Smallest grid whose recurrence time exceeds ``RECURRENCE_MARGIN * t_max``.

    Free baths use a uniform grid spanning ``[-10 Omega_c, 10 Omega_c]``; the
    waveguide uses the quadratic grid clustered at the gap, reaching
    ``omega0 + 10 Omega_c``.
    """
    target = RECURRENCE_MARGIN * max(t_max, 1.0)
    if spec.geometry == bath.WAVEGUIDE:
        smax = s_max if s_max is not None else spec.omega0 + 10.0 * spec.omega_c
        # the background channel carries little weight at the top of the grid,
        # so recurrence is judged at the cutoff frequency
        w_ref = min(smax, spec.omega0 + spec.omega_c)
        local = lambda n: 2.0 * math.sqrt((smax - spec.omega0) * (w_ref - spec.omega0)) / n
        n = max(n_min, int(math.ceil(target * local(1) / (2.0 * math.pi))))
        return AuxGrid(QUADRATIC, n, smax, spec.omega0)
    smax = s_max if s_max is not None else 20.0 * spec.omega_c
    n = int(math.ceil((target * smax / (2.0 * math.pi) - 1.0) / 2.0))
    return AuxGrid(UNIFORM, max(n_min, n), smax)


# ---------------------------------------------------------------------------
# the auxiliary ODE system


@dataclass
class AuxSystem:
    """Right-hand side of the coupled oscillator + auxiliary-amplitude system.

    State layout (real): ``Q1, Q2, P1, P2`` followed by ``Re f_1, Re f_2, Im f_1,
    Im f_2`` on the full grid.
    """

    sys: SystemParams
    spec: bath.BathSpec
    grid: AuxGrid
    s: np.ndarray = field(repr=False)
    ds: np.ndarray = field(repr=False)
    h0: np.ndarray = field(repr=False)
    hr: np.ndarray = field(repr=False)

    @property
    def n_nodes(self):
        return self.s.size

    @property
    def state_dim(self):
        return 4 + 4 * self.n_nodes

    def rhs(self, y):
        """Time derivative of one or several (as columns) full states."""
        y = np.asarray(y, dtype=float)
        m = self.n_nodes
        q = y[0:2]
        p = y[2:4]
        fr = y[4:4 + 2 * m].reshape((2, m) + y.shape[1:])
        fi = y[4 + 2 * m:].reshape((2, m) + y.shape[1:])
        h0 = self.h0.reshape((m,) + (1,) * (y.ndim - 1))
        hr = self.hr.reshape((m,) + (1,) * (y.ndim - 1))
        s = self.s.reshape((m,) + (1,) * (y.ndim - 1))
        dfr = np.empty_like(fr)
        dfi = np.empty_like(fi)
        for i, j in ((0, 1), (1, 0)):
            dfr[i] = h0 * q[i] + hr * q[j] - s * fi[i]
            dfi[i] = s * fr[i]
        dq = p
        dp = -self.sys.omega0**2 * q - dfr.sum(axis=1)
        return np.concatenate([dq, dp, dfr.reshape((2 * m,) + y.shape[1:]), dfi.reshape((2 * m,) + y.shape[1:])])

    def channel_weights(self):
        """Folded non-negative nodes and the S/A channel weights (multiplicity included)."""
        s, ds, mult = self.grid.positive_nodes()
        h0, hr = _node_weights(s, ds, self.sys.r, self.spec, self.grid)
        return s, mult * (h0 + hr), mult * (h0 - hr)


def _edge_weight(grid, spec):
    """Trapezoid end weight of the quadratic grid at the van Hove edge.

    In ``x = k / n`` the integrand ``ds/dx J(s) / s`` has a finite limit at the
    edge although ``J`` diverges there; half of it times ``1/n`` is the weight.
    """
    if grid.mode != QUADRATIC or spec.geometry != bath.WAVEGUIDE:
        return 0.0
    w0 = spec.omega0
    span = grid.s_max - w0
    limit = 8.0 * spec.gamma * w0 * math.sqrt(span) / (math.pi**2 * math.sqrt(2.0 * w0))
    return limit * bath._smooth_factor(w0, spec) / (2.0 * grid.n_grid)


def _node_weights(s, ds, r, spec, grid=None):
    # ds J(|s|) g / (2|s|) = ds (2/pi) kernel_fourier
    h0 = np.asarray(ds * (2.0 / math.pi) * bath.kernel_fourier(s, 0.0, spec), dtype=float)
    hr = np.asarray(ds * (2.0 / math.pi) * bath.kernel_fourier(s, r, spec), dtype=float)
    if grid is not None:
        edge = _edge_weight(grid, spec)
        if edge:
            at = np.abs(s) == spec.omega0
            h0 = h0 + np.where(at, edge, 0.0)
            hr = hr + np.where(at, edge, 0.0)  # cos(r u) = 1 at u = 0
    return h0, hr


def build_aux_system(sys, spec, grid):
    """Precompute the kernel weights ``Gamma_hat(0, s_k)``, ``Gamma_hat(r, s_k)``."""
    if spec.geometry == bath.WAVEGUIDE and grid.mode != QUADRATIC:
        raise ConfigError("the waveguide requires the QuadraticFromGap grid")
    if grid.mode == QUADRATIC and abs(grid.omega0 - spec.omega0) > 1e-12 * max(1.0, spec.omega0):
        raise ConfigError("quadratic grid must start at the bath gap omega0")
    s, ds = grid.nodes()
    h0, hr = _node_weights(s, ds, sys.r, spec, grid)
    return AuxSystem(sys, spec, grid, s, ds, h0, hr)


# ---------------------------------------------------------------------------
# Dormand-Prince 4(5) on one scalar channel
#
# channel state per column: q, p, a_k = Re f(s_k), b_k = Im f(s_k)
#   a_k' = w_k q - s_k b_k,  b_k' = s_k a_k
#   q' = p,  p' = -(W0^2 + sum w_k) q + sum s_k b_k

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_BSTAR = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = np.append(_B[:6], 0.0) - _BSTAR


@njit
def _channel_rhs_nb(y, out, s, w, k2):
    ncol, dim = y.shape
    m = s.size
    for c in range(ncol):
        q = y[c, 0]
        acc = 0.0
        for k in range(m):
            a = y[c, 2 + k]
            b = y[c, 2 + m + k]
            out[c, 2 + k] = w[k] * q - s[k] * b
            out[c, 2 + m + k] = s[k] * a
            acc += s[k] * b
        out[c, 0] = y[c, 1]
        out[c, 1] = -k2 * q + acc


@njit
def _dp45_nb(y0, s, w, k2, n_out, dt, rtol, atol, h0, max_steps, A, B, E, samples):
    ncol, dim = y0.shape
    y = y0.copy()
    ks = np.zeros((7, ncol, dim))
    tmp = np.empty((ncol, dim))
    ynew = np.empty((ncol, dim))
    _channel_rhs_nb(y, ks[0], s, w, k2)
    for c in range(ncol):
        samples[0, c, 0] = y[c, 0]
        samples[0, c, 1] = y[c, 1]
    h = h0
    steps = 0
    t = 0.0
    for n in range(1, n_out):
        t_target = n * dt
        while t < t_target * (1.0 - 1e-14):
            hh = min(h, t_target - t)
            for st in range(1, 7):
                for c in range(ncol):
                    for i in range(dim):
                        acc = y[c, i]
                        for j in range(st):
                            if A[st, j] != 0.0:
                                acc += hh * A[st, j] * ks[j, c, i]
                        tmp[c, i] = acc
                _channel_rhs_nb(tmp, ks[st], s, w, k2)
            # stage 7 argument equals the 5th-order solution (FSAL)
            err = 0.0
            for c in range(ncol):
                for i in range(dim):
                    yn = tmp[c, i]
                    ynew[c, i] = yn
                    e = 0.0
                    for j in range(7):
                        e += E[j] * ks[j, c, i]
                    e *= hh
                    sc = atol + rtol * max(abs(y[c, i]), abs(yn))
                    r = abs(e) / sc
                    if r > err:
                        err = r
            steps += 1
            if steps > max_steps:
                return -1
            if err <= 1.0:
                t += hh
                for c in range(ncol):
                    for i in range(dim):
                        y[c, i] = ynew[c, i]
                        ks[0, c, i] = ks[6, c, i]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if hh == h:
                    h = h * fac
                elif fac < 1.0:
                    h = hh * fac
            else:
                h = hh * max(0.2, 0.9 * err ** -0.2)
                if h < 1e-14 * max(1.0, t):
                    return -2
        for c in range(ncol):
            samples[n, c, 0] = y[c, 0]
            samples[n, c, 1] = y[c, 1]
    return steps


def _channel_rhs_np(y, s, w, k2):
    m = s.size
    q = y[:, 0:1]
    a = y[:, 2:2 + m]
    b = y[:, 2 + m:]
    out = np.empty_like(y)
    out[:, 2:2 + m] = w * q - s * b
    out[:, 2 + m:] = s * a
    out[:, 0] = y[:, 1]
    out[:, 1] = -k2 * y[:, 0] + b @ s
    return out


def _dp45_np(y0, s, w, k2, n_out, dt, rtol, atol, h0, max_steps, samples):
    y = y0.copy()
    k = [None] * 7
    k[0] = _channel_rhs_np(y, s, w, k2)
    samples[0] = y[:, :2]
    h = h0
    t = 0.0
    steps = 0
    for n in range(1, n_out):
        t_target = n * dt
        while t < t_target * (1.0 - 1e-14):
            hh = min(h, t_target - t)
            for st in range(1, 7):
                tmp = y.copy()
                for j in range(st):
                    if _A[st, j] != 0.0:
                        tmp += (hh * _A[st, j]) * k[j]
                k[st] = _channel_rhs_np(tmp, s, w, k2)
            ynew = tmp
            e = hh * sum(_E[j] * k[j] for j in range(7) if _E[j] != 0.0)
            err = np.max(np.abs(e) / (atol + rtol * np.maximum(np.abs(y), np.abs(ynew))))
            steps += 1
            if steps > max_steps:
                return -1
            if err <= 1.0:
                t += hh
                y = ynew
                k[0] = k[6]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if hh == h:
                    h *= fac
                elif fac < 1.0:
                    h = hh * fac
            else:
                h = hh * max(0.2, 0.9 * err ** -0.2)
                if h < 1e-14 * max(1.0, t):
                    return -2
        samples[n] = y[:, :2]
    return steps


def integrate_channel(s, w, omega0, n_out, dt, rtol=RTOL, atol=ATOL, use_numba=None):
    """Green's function of one scalar channel, sampled at ``n * dt``.

    Returns an array ``(n_out, 2, 2)`` with rows (q, p) and columns the unit
    initial conditions ``q(0) = 1`` and ``p(0) = 1``.
    """
    s = np.ascontiguousarray(s, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    m = s.size
    y0 = np.zeros((2, 2 + 2 * m))
    y0[0, 0] = 1.0
    y0[1, 1] = 1.0
    k2 = omega0**2 + float(w.sum())
    samples = np.zeros((n_out, 2, 2))
    smax = float(np.max(np.abs(s))) if m else 0.0
    h0 = min(dt, 0.2 / smax) if smax > 0 else dt
    numba_on = USE_NUMBA if use_numba is None else use_numba
    if numba_on:
        steps = _dp45_nb(y0, s, w, k2, n_out, dt, rtol, atol, h0, MAX_STEPS, _A, _B, _E, samples)
    else:
        steps = _dp45_np(y0, s, w, k2, n_out, dt, rtol, atol, h0, MAX_STEPS, samples)
    if steps == -1:
        raise IntegratorError("step budget exhausted")
    if steps == -2:
        raise IntegratorError("step size underflow")
    # samples[n, column, row] -> (row, column)
    return np.transpose(samples, (0, 2, 1))


# ---------------------------------------------------------------------------
# Green's function


@dataclass
class GreensFunctionTable:
    """``G(t_n)`` on the uniform output grid, plus the channel resolution."""

    dt: float
    times: np.ndarray
    samples: np.ndarray  # (N, 4, 4) in (Q1, Q2, P1, P2)
    channels: np.ndarray = field(repr=False)  # (2, N, 2, 2): S then A, (q, p)
    system: AuxSystem = field(repr=False)


def _assemble_full(ch):
    # channel Green's functions -> 4x4 in (Q1, Q2, P1, P2)
    n = ch.shape[1]
    g = np.zeros((n, 4, 4))
    for a in range(2):
        for b in range(2):
            diag = np.zeros((n, 2, 2))
            diag[:, 0, 0] = ch[0, :, a, b]
            diag[:, 1, 1] = ch[1, :, a, b]
            g[:, 2 * a:2 * a + 2, 2 * b:2 * b + 2] = _U @ diag @ _U
    return g


def greens_function(system, t_max, dt, rtol=RTOL, atol=ATOL):
    """Integrate the homogeneous system from the four canonical initial conditions."""
    if not dt > 0:
        raise ConfigError("dt > 0 required")
    if not t_max >= 0:
        raise ConfigError("t_max >= 0 required")
    n_out = int(round(t_max / dt)) + 1
    s, w_s, w_a = system.channel_weights()
    w0 = system.sys.omega0
    ch = np.stack([
        integrate_channel(s, w_s, w0, n_out, dt, rtol, atol),
        integrate_channel(s, w_a, w0, n_out, dt, rtol, atol),
    ])
    times = dt * np.arange(n_out)
    return GreensFunctionTable(dt, times, _assemble_full(ch), ch, system)


# ---------------------------------------------------------------------------
# covariance assembly


def noise_table(s, weights, n_lags, dt):
    """``K(n dt) = sum_k weights_k cos(s_k n dt)`` for ``n = 0 .. n_lags - 1``."""
    s = np.asarray(s, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if USE_NUMBA:
        out = np.empty(n_lags)
        _noise_table_nb(s, weights, dt, out)
        return out
    out = np.empty(n_lags)
    chunk = max(1, 2_000_000 // max(1, s.size))
    for start in range(0, n_lags, chunk):
        tau = dt * np.arange(start, min(n_lags, start + chunk))
        out[start:start + tau.size] = np.cos(np.outer(tau, s)) @ weights
    return out


@njit
def _noise_table_nb(s, weights, dt, out):
    for n in range(out.size):
        tau = n * dt
        acc = 0.0
        for k in range(s.size):
            acc += weights[k] * math.cos(s[k] * tau)
        out[n] = acc


@njit
def _noise_integral_nb(gp, kern, dt, out):
    # gp: (N, 2) response to a unit momentum kick; kern: (N,) noise at lag n dt
    n_t = gp.shape[0]
    f00 = 0.0
    f01 = 0.0
    f11 = 0.0
    z = np.zeros(2)
    for n in range(n_t):
        vn = 0.5 if n == 0 else 1.0
        z0 = 0.0
        z1 = 0.0
        for b in range(n + 1):
            vb = 0.5 if b == 0 else 1.0
            kk = vb * kern[n - b]
            z0 += kk * gp[b, 0]
            z1 += kk * gp[b, 1]
        g0 = gp[n, 0]
        g1 = gp[n, 1]
        k0 = kern[0]
        # cross terms with b < n, counted for (n, b) and (b, n)
        c0 = z0 - vn * k0 * g0
        c1 = z1 - vn * k0 * g1
        f00 += vn * 2.0 * g0 * c0 + vn * vn * k0 * g0 * g0
        f11 += vn * 2.0 * g1 * c1 + vn * vn * k0 * g1 * g1
        f01 += vn * (g0 * c1 + c0 * g1) + vn * vn * k0 * g0 * g1
        if n == 0:
            out[n, 0, 0] = 0.0
            out[n, 0, 1] = 0.0
            out[n, 1, 0] = 0.0
            out[n, 1, 1] = 0.0
            continue
        # trapezoid: the endpoint n carries weight 1/2 instead of 1
        i00 = f00 - g0 * z0 + 0.25 * k0 * g0 * g0
        i11 = f11 - g1 * z1 + 0.25 * k0 * g1 * g1
        i01 = f01 - 0.5 * (g0 * z1 + z0 * g1) + 0.25 * k0 * g0 * g1
        d2 = dt * dt
        out[n, 0, 0] = i00 * d2
        out[n, 1, 1] = i11 * d2
        out[n, 0, 1] = i01 * d2
        out[n, 1, 0] = i01 * d2


def _noise_integral_np(gp, kern, dt):
    n_t = gp.shape[0]
    out = np.zeros((n_t, 2, 2))
    v = np.ones(n_t)
    v[0] = 0.5
    f = np.zeros((2, 2))
    k0 = kern[0]
    for n in range(n_t):
        vn = v[n]
        z = (v[:n + 1] * kern[n::-1]) @ gp[:n + 1]
        g = gp[n]
        c = z - vn * k0 * g
        f += vn * (np.outer(g, c) + np.outer(c, g)) + vn * vn * k0 * np.outer(g, g)
        if n == 0:
            continue
        out[n] = (f - 0.5 * (np.outer(g, z) + np.outer(z, g)) + 0.25 * k0 * np.outer(g, g)) * dt * dt
    return out


def noise_integral(gp, kern, dt):
    """Trapezoidal ``int_0^t int_0^t gp(a) K(a - b) gp(b)^T`` for every grid time ``t``."""
    gp = np.ascontiguousarray(gp, dtype=float)
    kern = np.ascontiguousarray(kern, dtype=float)
    if USE_NUMBA:
        out = np.empty((gp.shape[0], 2, 2))
        _noise_integral_nb(gp, kern, dt, out)
        return out
    return _noise_integral_np(gp, kern, dt)


@dataclass
class EvolutionResult:
    times: np.ndarray
    covariances: np.ndarray  # (N, 4, 4)
    log_negativity: np.ndarray  # (N,)
    min_symplectic: np.ndarray  # (N,) smallest symplectic eigenvalue of Cov(t)

    def index(self, t):
        """Index of the sample closest to time ``t``."""
        return int(np.argmin(np.abs(self.times - t)))

    def at(self, t):
        """Covariance at the sample closest to ``t``."""
        return self.covariances[self.index(t)]


def channel_noise_weights(system, spec):
    """Noise weights on the folded nodes for the S and A channels."""
    s, ds, mult = system.grid.positive_nodes()
    h0, hr = _node_weights(s, ds, system.sys.r, spec, system.grid)
    wc = bath.omega_coth(s, spec.temperature)
    return s, mult * (h0 + hr) * wc, mult * (h0 - hr) * wc


def evolve_covariance(green, cov0, spec, sys=None, check=True):
    """Covariance and negativity trajectory on the Green's function time grid.

    ``spec`` supplies the temperature of the bath; its spectral data must match
    the bath used to build ``green``.
    """
    cov0 = np.asarray(cov0, dtype=float)
    system = green.system
    n_t = green.times.size
    s, n_s, n_a = channel_noise_weights(system, spec)
    v = CHANNEL_BASIS
    cov0_ch = v @ cov0 @ v.T
    # homogeneous part, in the channel basis (Q_S, Q_A, P_S, P_A)
    gch = np.zeros((n_t, 4, 4))
    for c in range(2):
        idx = [c, c + 2]
        gch[:, idx[0], idx[0]] = green.channels[c, :, 0, 0]
        gch[:, idx[0], idx[1]] = green.channels[c, :, 0, 1]
        gch[:, idx[1], idx[0]] = green.channels[c, :, 1, 0]
        gch[:, idx[1], idx[1]] = green.channels[c, :, 1, 1]
    cov_ch = gch @ cov0_ch @ np.transpose(gch, (0, 2, 1))
    for c, weights in ((0, n_s), (1, n_a)):
        kern = noise_table(s, weights, n_t, green.dt)
        gp = np.ascontiguousarray(green.channels[c, :, :, 1])
        noise = noise_integral(gp, kern, green.dt)
        idx = np.array([c, c + 2])
        cov_ch[:, idx[:, None], idx[None, :]] += noise
    cov = v.T @ cov_ch @ v
    cov = 0.5 * (cov + np.transpose(cov, (0, 2, 1)))
    cov[0] = 0.5 * (cov0 + cov0.T)
    lam = symplectic_eigenvalues_batch(cov)[:, 0]
    if check and np.min(lam) < 1.0 - PHYS_TOL:
        i = int(np.argmin(lam))
        raise PhysicalityError(
            f"symplectic eigenvalue {lam[i]:.6g} at t = {green.times[i]:.4g}; refine the grid or time step"
        )
    en = log_negativity_batch(cov)
    return EvolutionResult(green.times.copy(), cov, en, lam)


def default_dt(spec):
    return min(0.01, 0.1 / spec.omega_c)


def simulate(sys, spec, t_max, cov0=None, grid=None, dt=None, check=True):
    """Convenience pipeline: grid, auxiliary system, Green's function, covariance."""
    from .gaussian import squeezed_initial

    grid = grid or default_grid(spec, t_max)
    dt = dt or default_dt(spec)
    system = build_aux_system(sys, spec, grid)
    green = greens_function(system, t_max, dt)
    if cov0 is None:
        cov0 = squeezed_initial(sys)
    return evolve_covariance(green, cov0, spec, sys, check=check)
