"""Two-mode Gaussian states in the ordering ``y = (Q1, Q2, P1, P2)``.

Covariances are anticommutator expectations ``<{y_l, y_m}>`` without a factor
1/2, so the ground state of a unit-mass oscillator is ``diag(1/W, 1/W, W, W)``
and every physical state has symplectic eigenvalues ``>= 1``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, PhysicalityError

SIGMA = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ]
)
PT = np.diag([1.0, 1.0, 1.0, -1.0])
UNIT_SNAP = 1e-12
PAIR_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Oscillator frequency, separation and initial squeezing."""

    omega0: float = 1.0
    r: float = 0.1
    kappa: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise DomainError("omega0 > 0 required")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise DomainError("r >= 0 required")
        if not (math.isfinite(self.kappa) and self.kappa >= 1):
            raise DomainError("kappa >= 1 required")


def symplectic_form(n_modes=2):
    """``[[0, I], [-I, 0]]`` for the block ordering (positions, then momenta)."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def squeezed_initial(params):
    """Product of two single-mode squeezed states, ``diag(1/(k W), 1/(k W), k W, k W)``."""
    k, w = params.kappa, params.omega0
    return np.diag([1.0 / (k * w), 1.0 / (k * w), k * w, k * w])


def thermal_covariance(omega0, temperature):
    """Product thermal state of two uncoupled oscillators."""
    n = 1.0 if temperature == 0 else 1.0 / math.tanh(omega0 / (2.0 * temperature))
    return np.diag([n / omega0, n / omega0, n * omega0, n * omega0])


def partial_time_reversal(cov):
    """Flip the sign of the second momentum: ``P cov P`` with ``P = diag(1, 1, 1, -1)``."""
    cov = np.asarray(cov, dtype=float)
    return PT @ cov @ PT


def symplectic_eigenvalues(cov):
    """Ascending symplectic spectrum of a 2N x 2N covariance (block ordering).

    The eigenvalues of ``sigma^-1 cov`` come in pairs ``+-i lambda``; a spectrum
    that does not have this structure raises :class:`NumericalError`.
    """
    cov = np.asarray(cov, dtype=float)
    n2 = cov.shape[0]
    if cov.shape != (n2, n2) or n2 % 2:
        raise DomainError("covariance must be square with even dimension")
    if not np.all(np.isfinite(cov)):
        raise NumericalError("covariance has non-finite entries")
    scale = max(np.max(np.abs(cov)), 1e-300)
    if np.max(np.abs(cov - cov.T)) > PAIR_TOL * scale:
        raise NumericalError("covariance is not symmetric")
    sigma = symplectic_form(n2 // 2)
    ev = np.linalg.eigvals(np.linalg.solve(sigma, cov))
    if np.max(np.abs(ev.real)) > PAIR_TOL * max(1.0, np.max(np.abs(ev.imag))):
        raise NumericalError("symplectic spectrum is not purely imaginary")
    im = np.sort(ev.imag)
    half = n2 // 2
    neg, pos = -im[:half][::-1], im[half:]
    if np.max(np.abs(neg - pos)) > PAIR_TOL * max(1.0, np.max(pos)):
        raise NumericalError("symplectic spectrum lacks the +-i lambda pairing")
    return tuple(float(x) for x in 0.5 * (neg + pos))


def log_negativity(cov):
    """Logarithmic negativity ``-sum log2 min(1, lambda)`` of the partial time reversal."""
    lam = symplectic_eigenvalues(partial_time_reversal(cov))
    total = 0.0
    for x in lam:
        if x < 1.0 - UNIT_SNAP:
            total -= math.log2(x)
    return total


def check_physical(cov, tol=1e-3):
    """Raise :class:`PhysicalityError` if a symplectic eigenvalue is below ``1 - tol``."""
    lam = symplectic_eigenvalues(cov)
    if lam[0] < 1.0 - tol:
        raise PhysicalityError(f"symplectic eigenvalue {lam[0]:.6g} violates the uncertainty bound")
    return lam


def local_symplectic(s1, s2):
    """Embed two 2x2 single-mode maps (acting on (Q_i, P_i)) into the 4x4 ordering."""
    s = np.zeros((4, 4))
    for idx, m in ((0, s1), (1, s2)):
        rows = [idx, idx + 2]
        s[np.ix_(rows, rows)] = m
    return s


def symplectic_eigenvalues_batch(covs):
    """Symplectic pairs ``(lambda_min, lambda_max)`` for a stack of 4x4 covariances.

    Uses the invariants ``lambda_1**2 + lambda_2**2 = -tr((sigma^-1 C)**2) / 2``
    and ``lambda_1**2 lambda_2**2 = det C``.
    """
    covs = np.asarray(covs, dtype=float)
    m = np.einsum("ij,njk->nik", np.linalg.inv(SIGMA), covs)
    delta = -0.5 * np.einsum("nij,nji->n", m, m)
    det = np.linalg.det(covs)
    disc = np.sqrt(np.maximum(delta * delta - 4.0 * det, 0.0))
    big = 0.5 * (delta + disc)
    small = np.where(big > 0, det / np.where(big > 0, big, 1.0), 0.0)
    return np.sqrt(np.maximum(np.stack([small, big], axis=1), 0.0))


def log_negativity_batch(covs):
    """Vectorized :func:`log_negativity` for a stack of 4x4 covariances."""
    covs = np.asarray(covs, dtype=float)
    lam = symplectic_eigenvalues_batch(PT @ covs @ PT)
    clipped = np.where(lam < 1.0 - UNIT_SNAP, lam, 1.0)
    return 0.0 - np.sum(np.log2(clipped), axis=1)
