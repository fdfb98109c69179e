"""Independent references for the effective-model tests."""
import math

import numpy as np
from scipy import integrate


def alpha_by_regularization(omega, sector, r, spec, which, eps_list=(0.04, 0.02, 0.01)):
    """alpha_2 or alpha_3 from the defining integrals with the pole shifted off the axis.

    ``1/(x) -> x / (x**2 + eps**2)``; the eps -> 0 limit is taken by fitting a
    quadratic in eps through the three regularized values.
    """
    sign = 1 if sector == "S" else -1
    T = spec.temperature

    def jc(w):
        j = (8 * spec.gamma / math.pi) * w * (w / spec.omega_c) ** (spec.s - 1) * math.exp(-w / spec.omega_c)
        g = math.sin(w * r) / (w * r) if r > 0 else 1.0
        return j * (1 + sign * g)

    def coth(w):
        return 1.0 if T == 0 else 1 / math.tanh(w / (2 * T))

    def reg(x, eps):
        return x / (x * x + eps * eps)

    hi = spec.omega_c * 45
    vals = []
    for eps in eps_list:
        if which == 2:
            f = lambda w: -0.25 * jc(w) * coth(w) * (reg(omega + w, eps) + reg(omega - w, eps)) / omega
        else:
            f = lambda w: -0.25 * jc(w) * (reg(w + omega, eps) + reg(w - omega, eps))
        pts = sorted(omega + k * eps for k in (-20, -3, 0, 3, 20))
        edges = [1e-300] + [p for p in pts if 0 < p < hi] + [hi]
        vals.append(sum(integrate.quad(f, a, b, limit=500, epsabs=1e-14, epsrel=1e-12)[0]
                        for a, b in zip(edges[:-1], edges[1:])))
    e = np.array(eps_list)
    return np.linalg.solve(np.vander(e, 3, increasing=True), np.array(vals))[0]


ALPHA_POINTS = [
    # (s, T, r, Omega, sector)
    (3, 0.1, 2.0, 1.2, "S"),
    (3, 0.1, 2.0, 0.8, "A"),
    (1, 0.0, 1.0, 1.1, "S"),
    (1, 0.1, 1.0, 0.9, "A"),
    (3, 0.0, 0.5, 1.0, "A"),
    (1, 0.1, 2.0, 1.3, "S"),
]


def printed_moment_equations(xi, w1, w2, al1, al2, c, fixed=False):
    """Right-hand sides of the printed moment equations, ``c`` indexed from 1.

    With ``fixed=True`` the c12 coefficient in dc11/dt carries the alpha_3 factor
    that the printed version omits.
    """
    a1, a2, a3, a4 = al1
    b1, b2, b3, b4 = al2
    n = 1 / (1 + xi**2)
    pr = {}
    pr[1] = c[2]
    pr[2] = -(2 * w1**2 + 4 * n * a3) * c[1] + 2 * c[3] - n * (
        2 * a4 * c[2] - 2 * xi * w2 * b4 * c[11] + 2 * xi / w2 * b3 * c[12] + a2)
    pr[3] = -(w1**2 + 2 * n * a3) * c[2] - n * (4 * a4 * c[3] - 2 * xi * w2 * b4 * c[13] + 2 * xi / w2 * b3 * c[14] - a1)
    pr[6] = -4 * xi**2 * n * b4 * c[6] + (1 + 2 * xi**2 * n / w2**2 * b3) * c[7] + n * (
        2 * xi / w2 * a3 * c[11] + 2 * xi / w2 * a4 * c[13] + xi**2 / w2**2 * b1)
    pr[7] = -2 * w2**2 * c[6] - 2 * xi**2 * n * b4 * c[7] + (2 + 4 * xi**2 * n / w2**2 * b3) * c[8] + n * (
        2 * xi / w2 * a3 * c[12] + 2 * xi / w2 * a4 * c[14] + xi**2 * b2)
    pr[8] = -w2**2 * c[7]
    c12_coeff = 1 + 2 * xi**2 / w2**2 * n * (b3 if fixed else 1.0)
    pr[11] = n * (4 * xi / w2 * a3 * c[1] + 2 * xi / w2 * a4 * c[2]) - 2 * xi**2 * n * b4 * c[11] \
        + c12_coeff * c[12] + c[13] + xi / w2 * n * a2
    pr[12] = -w2**2 * c[11] + c[14]
    pr[13] = n * (2 * xi / w2 * a3 * c[2] + 4 * xi / w2 * a4 * c[3] + 4 * xi * w2 * b4 * c[6]) \
        - 2 * xi * n / w2 * b3 * c[7] - (2 * n * a3 + w1**2) * c[11] - 2 * n * (a4 + xi**2 * b4) * c[13] \
        + (1 + 2 * xi**2 * n / w2**2 * b3) * c[14] - xi * n / w2 * (a1 + b1)
    pr[14] = n * (2 * xi * w2 * b4 * c[7] - 4 * xi / w2 * b3 * c[8]) - (w1**2 + 2 * n * a3) * c[12] \
        - w2**2 * c[13] - n * (2 * a4 * c[14] + xi * w2 * b2)
    return pr
