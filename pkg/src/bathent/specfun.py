"""Euler gamma and the upper incomplete gamma function for complex argument.

``upper_incomplete_gamma(a, z)`` covers real orders (negative and non-integer
included) and complex ``z`` on the principal branch.  Three regimes are used:

* ``|z| >= 50``: the asymptotic expansion ``z**(a-1) e**-z sum_k (a-1)...(a-k)/z**k``
  (the neglected remainder is ``O(e**-|z|)`` relative);
* small ``|z|`` or ``z`` close to the negative real axis: the power series of the
  lower function, with the logarithmic form for non-positive integer ``a`` and a
  cancellation-free pairing of the two singular terms when ``a`` lies within 0.1
  of a non-positive integer;
* everywhere else: Legendre's continued fraction, evaluated with modified Lentz.

Values outside the double range raise :class:`NumericalError` rather than
returning infinities.
"""
import cmath
import math

import numpy as np

from ._accel import njit
from .errors import ConvergenceError, DomainError, NumericalError

MAX_ITER = 512
EPS = 1e-14
EULER_GAMMA = 0.5772156649015329

_OK, _POLE, _NOCONV = 0, 1, 2


@njit
def _is_nonpositive_int(a):
    return a <= 0.0 and a == math.floor(a)


@njit
def _series_lower_pos(a, z):
    # gamma(a, z) = z^a e^-z sum z^n / (a (a+1) ... (a+n)); Re z >= 0
    term = 1.0 / a + 0j
    total = term
    for n in range(1, MAX_ITER):
        term *= z / (a + n)
        total += term
        if abs(term) < EPS * 1e-2 * abs(total):
            return cmath.exp(a * cmath.log(z) - z) * total, _OK
    return 0j, _NOCONV


@njit
def _series_lower_alt(a, z):
    # gamma(a, z) = z^a sum (-z)^n / (n! (a+n)); no cancellation for Re z < 0
    p = 1.0 + 0j
    total = 1.0 / a + 0j
    for n in range(1, MAX_ITER):
        p *= -z / n
        term = p / (a + n)
        total += term
        if abs(term) < EPS * 1e-2 * abs(total):
            return cmath.exp(a * cmath.log(z)) * total, _OK
    return 0j, _NOCONV


@njit
def _series_negint(m, z):
    # Gamma(-m, z) = (-1)^m/m! (psi(m+1) - ln z) - sum_{k != m} (-1)^k z^(k-m) / (k! (k-m))
    fact_m = 1.0
    harm = 0.0
    for j in range(1, m + 1):
        fact_m *= j
        harm += 1.0 / j
    psi = -EULER_GAMMA + harm
    sign = -1.0 if m % 2 else 1.0
    head = sign / fact_m * (psi - cmath.log(z))
    total = 0j
    zk = 1.0 + 0j  # (-z)^k / k!
    zinv_m = cmath.exp(-m * cmath.log(z))
    for k in range(0, MAX_ITER):
        if k > 0:
            zk *= -z / k
        if k == m:
            continue
        term = zk * zinv_m / (k - m)
        total += term
        if k > m + 2 and abs(term) < EPS * 1e-2 * (abs(total) + abs(head)):
            return head - total, _OK
    return 0j, _NOCONV


# zeta(2), zeta(3), ... for the Taylor series of log Gamma(1 + e)
_ZETA = np.array([
    1.6449340668482264, 1.2020569031595942, 1.0823232337111382, 1.0369277551433699,
    1.0173430619844491, 1.0083492773819228, 1.0040773561979443, 1.0020083928260822,
    1.0009945751278181, 1.0004941886041195, 1.0002460865533080, 1.0001227133475785,
    1.0000612481350587, 1.0000305882363070, 1.0000152822594087, 1.0000076371976379,
    1.0000038172932650, 1.0000019082127166, 1.0000009539620339,
])
NEAR_INT = 0.1


@njit
def _lgamma1p_ratio(e):
    # log Gamma(1 + e) / e for |e| <= NEAR_INT, finite at e = 0
    total = -EULER_GAMMA
    p = -1.0  # becomes (-1)^k e^(k-1)
    for k in range(2, 2 + _ZETA.size):
        p *= -e
        total += _ZETA[k - 2] * p / k
    return total


@njit
def _log1p_ratio(x):
    # log(1 + x) / x, equal to 1 at x = 0
    if abs(x) < 1e-4:
        return 1.0 - x / 2.0 + x * x / 3.0 - x * x * x / 4.0
    return math.log1p(x) / x


@njit
def _expm1_ratio(w):
    # (exp(w) - 1) / w for complex w, equal to 1 at w = 0
    if abs(w) < 0.05:
        total = 0j
        for k in range(10, 1, -1):
            total = w / k * (1.0 + total)
        return 1.0 + total
    return (cmath.exp(w) - 1.0) / w


@njit
def _series_near_negint(m, e, z):
    # a = e - m with 0 < |e| <= NEAR_INT.  Gamma(a) and the n = m term of the lower
    # series both grow like 1/e; their difference
    #   (-1)^m / m! * [Gamma(1+e) / prod(1 - e/j) - z^e] / e
    # is formed as a difference quotient without cancellation.
    a = e - m
    fact_m = 1.0
    lg_ratio = _lgamma1p_ratio(e)  # log of Gamma(1+e)/prod(1 - e/j), divided by e
    for j in range(1, m + 1):
        fact_m *= j
        lg_ratio += _log1p_ratio(-e / j) / j
    log_z = cmath.log(z)
    lg = lg_ratio * e
    quotient = _expm1_ratio(lg + 0j) * lg_ratio - log_z * _expm1_ratio(e * log_z)
    sign = -1.0 if m % 2 else 1.0
    head = sign / fact_m * quotient
    total = 0j
    zk = 1.0 + 0j  # (-z)^n / n!
    za = cmath.exp(a * log_z)
    for n in range(0, MAX_ITER):
        if n > 0:
            zk *= -z / n
        if n == m:
            continue
        term = zk / (a + n)
        total += term
        if n > m + 2 and abs(za * term) < EPS * 1e-2 * (abs(za * total) + abs(head)):
            return head - za * total, _OK
    return 0j, _NOCONV


@njit
def _contfrac(a, z, scaled=False):
    tiny = 1e-300
    f = z + 1.0 - a
    if abs(f) < tiny:
        f = tiny + 0j
    c = f
    d = 0j
    for n in range(1, MAX_ITER):
        an = -n * (n - a)
        bn = z + 2.0 * n + 1.0 - a
        d = bn + an * d
        if abs(d) < tiny:
            d = tiny + 0j
        c = bn + an / c
        if abs(c) < tiny:
            c = tiny + 0j
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < EPS:
            return cmath.exp(a * cmath.log(z) - (0.0 if scaled else z)) / f, _OK
    return 0j, _NOCONV


@njit
def _asymptotic(a, z, scaled=False):
    term = 1.0 + 0j
    total = 1.0 + 0j
    prev = 1.0
    for k in range(1, MAX_ITER):
        term *= (a - k) / z
        mag = abs(term)
        if mag == 0.0:
            break
        if mag > prev:
            if prev < 1e-13 * abs(total):
                break
            return 0j, _NOCONV
        total += term
        prev = mag
        if mag < 1e-17 * abs(total):
            break
    return cmath.exp((a - 1.0) * cmath.log(z) - (0.0 if scaled else z)) * total, _OK


@njit
def uigamma_kernel(a, z):
    """Scalar Gamma(a, z); returns ``(value, status)``."""
    if z == 0:
        if a <= 0.0:
            return 0j, _POLE
        return math.gamma(a) + 0j, _OK
    az = abs(z)
    if az >= 50.0:
        val, st = _asymptotic(a, z)
        if st == _OK:
            return val, st
        return _contfrac(a, z)
    if az < 2.0 or (z.real < 0.0 and az + z.real < 10.0):
        if _is_nonpositive_int(a):
            return _series_negint(int(-a), z)
        m = -math.floor(a + 0.5)
        if m >= 0 and abs(a + m) <= NEAR_INT:
            return _series_near_negint(int(m), a + m, z)
        if z.real >= 0.0:
            low, st = _series_lower_pos(a, z)
        else:
            low, st = _series_lower_alt(a, z)
        return math.gamma(a) - low, st
    return _contfrac(a, z)


@njit
def uigamma_scaled_kernel(a, z):
    """Scalar ``exp(z) Gamma(a, z)``, free of overflow for large ``|z|``."""
    az = abs(z)
    if az >= 50.0:
        val, st = _asymptotic(a, z, True)
        if st == _OK:
            return val, st
        return _contfrac(a, z, True)
    if az >= 2.0 and not (z.real < 0.0 and az + z.real < 10.0):
        return _contfrac(a, z, True)
    val, st = uigamma_kernel(a, z)
    return val * cmath.exp(z), st


@njit
def uigamma_scaled_array(a, z, out, status):
    for i in range(z.size):
        v, st = uigamma_scaled_kernel(a[i], z[i])
        out[i] = v
        status[i] = st


@njit
def uigamma_array(a, z, out, status):
    for i in range(z.size):
        v, st = uigamma_kernel(a[i], z[i])
        out[i] = v
        status[i] = st


def _raise_status(status, a, z):
    if status == _POLE:
        raise DomainError(f"Gamma({a}, z) has a pole at z = 0 for a <= 0")
    if status == _NOCONV:
        raise ConvergenceError(
            f"incomplete gamma did not converge for a={a}, z={z} within {MAX_ITER} terms"
        )


def _finite(val, a, z):
    if not cmath.isfinite(val):
        raise NumericalError(f"Gamma({a}, {z}) is outside the double-precision range")
    return val


def upper_incomplete_gamma(a, z):
    """Upper incomplete gamma ``Gamma(a, z)`` on the principal branch.

    Parameters
    ----------
    a : float
        Real order.
    z : complex or array_like of complex
        Argument; ``-pi < arg z <= pi``.

    Returns
    -------
    complex or ndarray of complex
    """
    if np.ndim(z) == 0 and np.ndim(a) == 0:
        a = float(a)
        zc = complex(z)
        if not (math.isfinite(a) and cmath.isfinite(zc)):
            raise DomainError("non-finite argument")
        val, st = uigamma_kernel(a, zc)
        if st != _OK:
            _raise_status(st, a, zc)
        return _finite(complex(val), a, zc)
    zz, aa = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(a, dtype=float))
    flat_z = np.ascontiguousarray(zz.ravel())
    flat_a = np.ascontiguousarray(aa.ravel())
    out = np.empty(flat_z.size, dtype=complex)
    status = np.zeros(flat_z.size, dtype=np.int64)
    uigamma_array(flat_a, flat_z, out, status)
    bad = np.flatnonzero(status)
    if bad.size:
        i = bad[0]
        _raise_status(status[i], flat_a[i], flat_z[i])
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        _finite(out[bad[0]], flat_a[bad[0]], flat_z[bad[0]])
    return out.reshape(zz.shape)


def scaled_upper_incomplete_gamma(a, z):
    """``exp(z) Gamma(a, z)`` (principal branch), finite where ``Gamma`` itself under- or overflows."""
    if np.ndim(z) == 0 and np.ndim(a) == 0:
        a = float(a)
        zc = complex(z)
        if not (math.isfinite(a) and cmath.isfinite(zc)):
            raise DomainError("non-finite argument")
        val, st = uigamma_scaled_kernel(a, zc)
        if st != _OK:
            _raise_status(st, a, zc)
        return _finite(complex(val), a, zc)
    zz, aa = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(a, dtype=float))
    flat_z = np.ascontiguousarray(zz.ravel())
    flat_a = np.ascontiguousarray(aa.ravel())
    out = np.empty(flat_z.size, dtype=complex)
    status = np.zeros(flat_z.size, dtype=np.int64)
    uigamma_scaled_array(flat_a, flat_z, out, status)
    bad = np.flatnonzero(status)
    if bad.size:
        i = bad[0]
        _raise_status(status[i], flat_a[i], flat_z[i])
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        _finite(out[bad[0]], flat_a[bad[0]], flat_z[bad[0]])
    return out.reshape(zz.shape)


def upper_incomplete_gamma_sheet(a, z, sheet):
    """``Gamma(a, z * exp(2 pi i sheet))``: continuation onto another Riemann sheet.

    Uses ``Gamma(a, z e^{2 pi i m}) = e^{2 pi i m a} Gamma(a, z) + (1 - e^{2 pi i m a}) Gamma(a)``
    with the finite limit ``Gamma(a, z) - 2 pi i m (-1)^n / n!`` at ``a = -n``.
    """
    base = upper_incomplete_gamma(a, z)
    if sheet == 0:
        return base
    if a > 0 and a == math.floor(a):
        return base
    if a <= 0 and a == math.floor(a):
        n = int(-a)
        return base - 2j * math.pi * sheet * (-1) ** n / math.factorial(n)
    ph = cmath.exp(2j * math.pi * sheet * a)
    return ph * base + (1.0 - ph) * math.gamma(a)


def gamma_function(x):
    """Euler gamma function for real ``x`` (poles at non-positive integers)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)
