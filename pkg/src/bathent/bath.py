"""Bosonic environments: spectral densities, damping kernels and noise correlators.

Three geometries are supported:

``Free1D`` and ``Free3D``
    ``J(w) = (8 gamma / pi) w (w / Omega_c)**(s-1) exp(-w / Omega_c)``, with the
    distance weight ``cos(w r)`` in one dimension and ``sin(w r) / (w r)`` in three.
``Waveguide``
    A single transverse mode with an inverse square-root edge at the gap ``omega0``,
    weight ``cos(r sqrt(w**2 - omega0**2))``.  By default the higher transverse
    modes are approximated by the free 3D density, switched on at the second
    transverse threshold ``sqrt(5/2) omega0`` (``include_free_background``).

The kernels are
``Gamma(r, t) = int J(w)/w cos(w t) g(w, r) dw`` and
``K(r, t) = int J(w) coth(w / 2T) cos(w t) g(w, r) dw``.
"""
import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .specfun import scaled_upper_incomplete_gamma, upper_incomplete_gamma, upper_incomplete_gamma_sheet

FREE1D = "Free1D"
FREE3D = "Free3D"
WAVEGUIDE = "Waveguide"
GEOMETRIES = (FREE1D, FREE3D, WAVEGUIDE)

TAIL_EPS = 1e-14
LAURENT_THRESHOLD = 1e-3
# adaptive quadrature budget and the panel width (in oscillation periods) used
# when neither frequency can be handed to QUADPACK as a weight
QUAD_LIMIT = 400
PANEL_PERIODS = 8
# second transverse mode (n2, n3) = (1, 2) of the square guide, in units of omega0
BACKGROUND_ONSET = math.sqrt(2.5)


@dataclass(frozen=True)
class BathSpec:
    """Immutable description of the environment.

    All frequencies are in units of the bare oscillator frequency.
    """

    geometry: str = FREE3D
    gamma: float = 1.0
    s: float = 1.0
    omega_c: float = 10.0
    omega0: float = 0.0
    temperature: float = 0.0
    include_free_background: bool = True

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise DomainError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        for name in ("gamma", "s", "omega_c", "omega0", "temperature"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.gamma < 0:
            raise DomainError("gamma >= 0 required")
        if self.omega_c <= 0:
            raise DomainError("omega_c > 0 required")
        if self.s < 1:
            raise DomainError("s >= 1 required")
        if self.temperature < 0:
            raise DomainError("temperature >= 0 required")
        if self.geometry == WAVEGUIDE and self.omega0 <= 0:
            raise DomainError("omega0 > 0 required for the waveguide")
        if self.geometry != WAVEGUIDE and self.omega0 != 0:
            raise DomainError("omega0 is only meaningful for the waveguide")

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def background_onset(self):
        """Lower edge of the free background (waveguide only)."""
        return BACKGROUND_ONSET * self.omega0

    @property
    def omega_max(self):
        """Frequency beyond which the exponential cutoff leaves less than TAIL_EPS."""
        return self.omega_c * (math.log(1.0 / TAIL_EPS) + 4.0 * (self.s - 1.0)) + self.omega0


# ---------------------------------------------------------------------------
# pointwise densities


def _reduced_density(w, spec):
    # J(w)/w for the free form; finite at w = 0
    w = np.asarray(w, dtype=float)
    return (8.0 * spec.gamma / math.pi) * (w / spec.omega_c) ** (spec.s - 1.0) * np.exp(-w / spec.omega_c)


def spectral_density(w, spec):
    """Free-space coupling density ``J(w)``; the 1D and 3D forms coincide."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0):
        raise DomainError("spectral density requires w >= 0")
    out = w_arr * _reduced_density(w_arr, spec)
    return out if out.ndim else float(out)


def waveguide_spectral_density(w, spec):
    """Single-mode waveguide density with the van Hove edge at ``spec.omega0``.

    Zero at and below the gap; ``(w - omega0)**-1/2`` divergence just above it.
    """
    if spec.geometry != WAVEGUIDE:
        raise DomainError("waveguide density requires geometry Waveguide")
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0):
        raise DomainError("spectral density requires w >= 0")
    w0 = spec.omega0
    above = w_arr > w0
    out = np.zeros_like(w_arr)
    wa = w_arr[above]
    out[above] = (
        8.0 * spec.gamma * w0**2 / (math.pi**2 * np.sqrt(wa * wa - w0 * w0))
        * (wa / spec.omega_c) ** (spec.s - 1.0) * np.exp(-wa / spec.omega_c)
    )
    return out if out.ndim else float(out)


def total_spectral_density(w, spec):
    """Density of every channel combined (waveguide mode plus gapped background)."""
    if spec.geometry != WAVEGUIDE:
        return spectral_density(w, spec)
    out = waveguide_spectral_density(w, spec)
    if spec.include_free_background:
        w_arr = np.asarray(w, dtype=float)
        out = out + np.where(w_arr > spec.background_onset, spectral_density(w_arr, spec), 0.0)
    return out


def omega_coth(w, temperature):
    """``w coth(w / 2T)``, equal to ``|w|`` at T = 0 and ``2T`` at w = 0."""
    w = np.asarray(w, dtype=float)
    aw = np.abs(w)
    if temperature == 0:
        return aw if aw.ndim else float(aw)
    x = aw / (2.0 * temperature)
    small = aw < LAURENT_THRESHOLD * temperature
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.where(small, 0.0, aw / np.tanh(np.where(small, 1.0, x)))
    laurent = 2.0 * temperature + aw * aw / (6.0 * temperature)
    out = np.where(small, laurent, big)
    return out if out.ndim else float(out)


def coth_factor(w, temperature):
    """``coth(w / 2T)`` for ``w > 0``; 1 at T = 0."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("coth factor requires w > 0")
    return omega_coth(w, temperature) / w


def geometric_factor(w, r, geometry, omega0=0.0):
    """Distance weight ``g(w, r)`` multiplying cross-oscillator terms."""
    w = np.asarray(w, dtype=float)
    if geometry == FREE1D:
        out = np.cos(w * r)
    elif geometry == FREE3D:
        out = np.sinc(w * r / math.pi)
    elif geometry == WAVEGUIDE:
        out = np.cos(r * np.sqrt(np.maximum(w * w - omega0 * omega0, 0.0)))
    else:
        raise DomainError(f"unknown geometry {geometry!r}")
    return out if out.ndim else float(out)


def channel_factor(w, r, geometry, sign, omega0=0.0):
    """``1 + sign g(w, r)``, free of cancellation for ``sign = -1`` at small ``w r``."""
    if sign >= 0:
        return 1.0 + sign * geometric_factor(w, r, geometry, omega0)
    w = np.asarray(w, dtype=float)
    if geometry == WAVEGUIDE:
        x = r * np.sqrt(np.maximum(w * w - omega0 * omega0, 0.0))
    else:
        x = w * r
    if geometry == FREE3D:
        # 1 - sin(x)/x; Taylor series where the difference cancels
        x2 = x * x
        series = x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = 1.0 - np.sin(x) / np.where(x == 0, 1.0, x)
        out = np.where(np.abs(x) < 0.1, series, direct)
    else:
        out = 2.0 * np.sin(0.5 * x) ** 2
    out = (1.0 + sign) + (-sign) * out  # general sign: 1 + sign (1 - d) = (1 + sign) - sign d
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# quadrature helpers


def _quad(f, a, b, **kw):
    kw.setdefault("limit", QUAD_LIMIT)
    kw.setdefault("epsabs", 1e-13)
    kw.setdefault("epsrel", 1e-11)
    res = integrate.quad(f, a, b, full_output=1, **kw)
    value, abserr = res[0], res[1]
    if len(res) > 3 and abserr > 1e3 * max(kw["epsabs"], kw["epsrel"] * abs(value)):
        raise QuadratureError(f"quadrature on [{a}, {b}] failed: {res[3].splitlines()[0]}")
    return value


def _free_integral(amp, lo, hi, t, r, geometry):
    """``int_lo^hi amp(w) cos(w t) g(w, r) dw`` for a smooth, decaying amplitude."""
    t = abs(float(t))
    r = float(r)

    def cos_int(f, freq):
        if freq == 0:
            return _quad(f, lo, hi)
        return _quad(f, lo, hi, weight="cos", wvar=freq)

    if r == 0:
        return cos_int(amp, t)
    if geometry == FREE1D:
        return 0.5 * (cos_int(amp, t + r) + cos_int(amp, abs(t - r)))
    # sinc weight: direct form when w r is small over the support, otherwise
    # split cos(wt) sin(wr) into two sine transforms
    if r * hi <= 1.0 or r * (hi - lo) <= 2.0 * math.pi:
        return cos_int(lambda w: amp(w) * np.sinc(w * r / math.pi), t)

    # near w = 0 the split terms are individually singular like 1/w; integrate
    # the first stretch directly
    w1 = max(lo, min(hi, 1.0 / (r + t)))

    def direct(w):
        return amp(w) * math.cos(w * t) * np.sinc(w * r / math.pi)

    def f(w):
        return amp(w) / (2.0 * r * w)

    total = _quad(direct, lo, w1) if w1 > lo else 0.0
    total += _quad(f, w1, hi, weight="sin", wvar=r + t)
    d = r - t
    if d != 0:
        total += math.copysign(1.0, d) * _quad(f, w1, hi, weight="sin", wvar=abs(d))
    return total


def _panel_integral(f, lo, hi, freq):
    """Adaptive quadrature split into panels a few oscillation periods wide."""
    if freq <= 0:
        return _quad(f, lo, hi)
    width = PANEL_PERIODS * 2.0 * math.pi / freq
    n = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)
    return sum(_quad(f, a, b, limit=100) for a, b in zip(edges[:-1], edges[1:]))


def _waveguide_mode_integral(amp, t, r, spec):
    """Single-mode channel in ``u = sqrt(w**2 - omega0**2)``.

    ``amp(w)`` is the smooth part of the integrand with respect to ``w`` after the
    ``1/sqrt`` edge has been factored out; the substitution ``dw = u du / w``
    cancels the edge exactly.
    """
    w0 = spec.omega0
    pref = 8.0 * spec.gamma * w0**2 / math.pi**2
    u_max = spec.omega_max
    t = abs(float(t))

    def f(u):
        w = math.sqrt(u * u + w0 * w0)
        return amp(w) / w * math.cos(w * t) * math.cos(r * u)

    # the edge leaves a Lorentzian-like peak of width omega0 at u = 0
    u1 = min(u_max, 20.0 * w0)
    freq = max(t, r)
    return pref * (_panel_integral(f, 0.0, u1, freq) + _panel_integral(f, u1, u_max, freq))


def _smooth_factor(w, spec):
    return (w / spec.omega_c) ** (spec.s - 1.0) * math.exp(-w / spec.omega_c)


def _kernel(r, t, spec, thermal):
    if r < 0:
        raise DomainError("distance r must be >= 0")
    T = spec.temperature

    def free_amp(w):
        a = _reduced_density(w, spec)
        if thermal:
            a = a * omega_coth(w, T)
        return float(a)

    if spec.geometry != WAVEGUIDE:
        return _free_integral(free_amp, 0.0, spec.omega_max, t, r, spec.geometry)

    def mode_amp(w):
        a = _smooth_factor(w, spec)
        return a * omega_coth(w, T) if thermal else a / w

    total = _waveguide_mode_integral(mode_amp, t, r, spec)
    if spec.include_free_background:
        total += _free_integral(free_amp, spec.background_onset, spec.omega_max, t, r, FREE3D)
    return total


def damping_kernel(r, t, spec):
    """``Gamma(r, t)``, even in ``t``; ``r = 0`` gives the local kernel."""
    return _kernel(float(r), float(t), spec, thermal=False)


def bath_correlator(r, t, spec):
    """Symmetrized noise correlator ``K(r, t)`` with the ``coth(w/2T)`` weight."""
    return _kernel(float(r), float(t), spec, thermal=True)


# ---------------------------------------------------------------------------
# frequency domain


def kernel_fourier(w, r, spec):
    """``pi J(|w|) / (4 |w|) g(|w|, r)``, the Fourier transform of ``Gamma(r, .)``.

    Normalization: ``Gamma(r, t) = (2/pi) int kernel_fourier(w) exp(-i w t) dw``.
    At ``w = 0`` the finite limit is returned (``2 gamma`` for ``s = 1``).
    """
    w = np.abs(np.asarray(w, dtype=float))
    r = float(r)
    if spec.geometry != WAVEGUIDE:
        out = 0.25 * math.pi * _reduced_density(w, spec) * geometric_factor(w, r, spec.geometry)
    else:
        w0 = spec.omega0
        above = w > w0
        out = np.zeros_like(w)
        wa = w[above]
        out[above] = 0.25 * math.pi * waveguide_spectral_density(wa, spec) / wa * geometric_factor(
            wa, r, WAVEGUIDE, w0
        )
        if spec.include_free_background:
            hi = w > spec.background_onset
            wh = w[hi]
            out[hi] += 0.25 * math.pi * _reduced_density(wh, spec) * geometric_factor(wh, r, FREE3D)
    return out if out.ndim else float(out)


def noise_fourier(w, r, spec):
    """Fourier weight of ``K``: ``kernel_fourier * w coth(w / 2T)``."""
    return kernel_fourier(w, r, spec) * omega_coth(w, spec.temperature)


# ---------------------------------------------------------------------------
# Laplace-Cauchy building block


def laplace_cauchy(p, kappa, beta, principal=False):
    """``int_0^inf v**p exp(-kappa v) / (v + beta) dv``.

    ``beta`` may be complex (scalar or array) with ``|arg beta| < pi``.  With
    ``principal=True`` the pole sits on the axis instead (real ``beta > 0``):
    ``P int_0^inf v**p exp(-kappa v) / (v - beta) dv``, obtained as the mean of
    the two continuations ``beta -> beta exp(+-i pi)``.  Requires ``p > -1``,
    ``Re kappa > 0`` and, for the principal value, ``Im kappa <= 0``.
    """
    kappa = complex(kappa)
    if not (p > -1 and kappa.real > 0):
        raise DomainError("laplace_cauchy needs p > -1 and Re kappa > 0")
    g = math.gamma(p + 1.0)
    if np.ndim(beta) == 0:
        return _laplace_cauchy_scalar(p, kappa, complex(beta), principal, g)
    b = np.asarray(beta, dtype=complex)
    if not principal:
        bk = b * kappa
        if np.any(np.abs(np.angle(bk)) >= math.pi) or np.any(np.abs(np.angle(b)) >= math.pi):
            raise DomainError("beta * kappa must stay off the negative real axis")
        out = b**p * g * scaled_upper_incomplete_gamma(-p, bk)
        return complex(out) if out.ndim == 0 else out
    if kappa.imag > 0 or np.any(b.imag != 0) or np.any(b.real <= 0):
        raise DomainError("principal value needs real beta > 0 and Im kappa <= 0")
    wk = b.real * kappa
    z = -wk.real + 1j * np.abs(wk.imag)  # arg z in (pi/2, pi]
    up = cmath.exp(1j * math.pi * p) * upper_incomplete_gamma(-p, z)
    if np.ndim(z) == 0:
        down = upper_incomplete_gamma_sheet(-p, complex(z), -1)
    else:
        down = np.array([upper_incomplete_gamma_sheet(-p, complex(zz), -1) for zz in np.ravel(z)]).reshape(z.shape)
    out = b.real**p * np.exp(-wk) * g * 0.5 * (up + cmath.exp(-1j * math.pi * p) * down)
    return complex(out) if np.ndim(out) == 0 else out


def _laplace_cauchy_scalar(p, kappa, b, principal, g):
    if not principal:
        bk = b * kappa
        if b.real <= 0 and b.imag == 0 or bk.real <= 0 and bk.imag == 0:
            raise DomainError("beta * kappa must stay off the negative real axis")
        return b**p * g * scaled_upper_incomplete_gamma(-p, bk)
    if kappa.imag > 0 or b.imag != 0 or b.real <= 0:
        raise DomainError("principal value needs real beta > 0 and Im kappa <= 0")
    wk = b.real * kappa
    z = complex(-wk.real, abs(wk.imag))
    up = cmath.exp(1j * math.pi * p) * upper_incomplete_gamma(-p, z)
    down = cmath.exp(-1j * math.pi * p) * upper_incomplete_gamma_sheet(-p, z, -1)
    return b.real**p * cmath.exp(-wk) * g * 0.5 * (up + down)


def _im_power_laplace(q, kappa):
    # Im int_0^inf v**(q-1) exp(-kappa v) dv = Im Gamma(q) kappa**-q, stable as q -> 0
    theta = cmath.phase(kappa)
    mag = abs(kappa) ** (-q)
    if abs(q) < 1e-12:
        return -theta
    return -math.gamma(q + 1.0) * mag * math.sin(q * theta) / q


def im_half_range(w, r, spec, sign=0):
    """``w P int J(v) (1 + sign g(v, r)) / (v (w**2 - v**2)) dv`` for the free geometries.

    ``sign = 0`` gives the local term alone.  Closed form through
    :func:`laplace_cauchy`; odd in ``w``.
    """
    if spec.geometry == WAVEGUIDE:
        raise DomainError("closed form available for free geometries only")
    w = float(w)
    if w == 0:
        return 0.0
    aw = abs(w)
    p = spec.s - 1.0
    c = 0.5 * (8.0 * spec.gamma / math.pi) * spec.omega_c ** (-p)
    mu = 1.0 / spec.omega_c
    total = (laplace_cauchy(p, mu, aw) - laplace_cauchy(p, mu, aw, True)).real
    if sign:
        kappa = complex(mu, -r)
        plus = laplace_cauchy(p, kappa, aw)
        minus = laplace_cauchy(p, kappa, aw, True)
        if spec.geometry == FREE1D:
            geo = (plus - minus).real
        elif r == 0:
            geo = total
        else:
            # v**(s-2)/(v +- w) = (v**(s-2) - v**(s-1)/(v +- w)) / (+-w)
            geo = (2.0 * _im_power_laplace(p, kappa) - (plus + minus).imag) / (r * aw)
        total += sign * geo
    return c * total if w > 0 else -c * total
