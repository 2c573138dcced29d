"""Mehler kernel of the scaled Hermite operator and its x'-derivative prefactors.

``k_{t,lam}(x', y')`` is the heat kernel of ``-Delta + |lam|^2 |x'|^2`` on R^n.
The Grushin heat kernel is its Fourier integral in ``lam``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidArgument

SMALL_SWITCH = 1e-4
LARGE_GUARD = 350.0
_LOG2 = np.log(2.0)


def _log_sinh(y):
    y = np.asarray(y, dtype=float)
    big = y > 20.0
    ys = np.where(big, 1.0, y)
    return np.where(big, y - _LOG2 + np.log1p(-np.exp(-2.0 * np.where(big, y, 20.0))),
                    np.log(np.sinh(ys)))


def mehler_coefficients(t, lam):
    """Coefficients of the Mehler kernel as arrays broadcast over ``t`` and ``lam``.

    Returns
    -------
    log_amp : ndarray
        ``log(|lam| / (2 pi sinh(2 |lam| t)))``, the log of the per-dimension amplitude.
    c : ndarray
        ``|lam| coth(2 |lam| t)``; the exponent carries ``-c/2 |x'-y'|^2``.
    s : ndarray
        ``|lam| tanh(|lam| t)``; the exponent carries ``-s x'.y'``.
    """
    t = np.asarray(t, dtype=float)
    lam = np.abs(np.asarray(lam, dtype=float))
    t, lam = np.broadcast_arrays(t, lam)
    x = lam * t
    small = x < SMALL_SWITCH
    # direct branch, evaluated with safe placeholders where the small branch applies
    xs = np.where(small, 1.0, x)
    ls = np.where(small, 1.0 / t, lam)
    log_amp_d = np.log(ls) - np.log(2 * np.pi) - _log_sinh(2 * xs)
    c_d = ls / np.tanh(2 * xs)
    s_d = ls * np.tanh(xs)
    # two-term Taylor branch
    x2 = np.where(small, x * x, 0.0)
    log_amp_s = -np.log(4 * np.pi * t) + np.log1p(-2.0 * x2 / 3.0)
    c_s = (1.0 + 4.0 * x2 / 3.0) / (2 * t)
    s_s = lam * x * (1.0 - x2 / 3.0)
    return (np.where(small, log_amp_s, log_amp_d),
            np.where(small, c_s, c_d),
            np.where(small, s_s, s_d))


def mehler_log_kernel(t, lam, xp, yp):
    """Log of ``k_{t,lam}(x', y')``; vectorized with ``xp, yp`` of shape ``(..., n)``.

    Entries with ``|lam| t > 350`` return ``-inf``.
    """
    xp = np.asarray(xp, dtype=float)
    yp = np.asarray(yp, dtype=float)
    n = xp.shape[-1]
    log_amp, c, s = mehler_coefficients(t, lam)
    d2 = np.sum((xp - yp) ** 2, axis=-1)
    xy = np.sum(xp * yp, axis=-1)
    out = 0.5 * n * log_amp - 0.5 * c * d2 - s * xy
    guard = np.abs(np.asarray(lam, dtype=float)) * np.asarray(t, dtype=float) > LARGE_GUARD
    return np.where(guard, -np.inf, out)


def mehler_kernel(t: float, lam_norm: float, xp, yp) -> float:
    """Mehler kernel ``k_{t,lam}(x', y')`` at ``|lam| = lam_norm``.

    Parameters
    ----------
    t : float
        Positive time.
    lam_norm : float
        Frequency modulus ``|lam| >= 0``.
    xp, yp : array_like
        Points of R^n.

    Returns
    -------
    float
        ``(|lam|/(2 pi sinh 2|lam|t))^{n/2} exp(-|lam|/2 coth(2|lam|t)|x'-y'|^2
        - |lam| tanh(|lam|t) x'.y')``. Below ``|lam| t = 1e-4`` a Taylor branch is
        used; above ``|lam| t = 350`` the value is 0.
    """
    if not np.isfinite(t) or t <= 0:
        raise InvalidArgument("t must be positive")
    if not np.isfinite(lam_norm) or lam_norm < 0:
        raise InvalidArgument("lam_norm must be nonnegative")
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    yp = np.atleast_1d(np.asarray(yp, dtype=float))
    if xp.shape != yp.shape:
        raise InvalidArgument("xp and yp must have the same length")
    return float(np.exp(mehler_log_kernel(t, lam_norm, xp, yp)))


def hermite_prefactor(r: int, L, c):
    """``p_r(L; c)``, defined by ``p_0 = 1, p_1 = L, p_{r+1} = L p_r - r c p_{r-1}``.

    With ``L = -c (x - y) - s y`` this is ``d^r k / k`` along one coordinate.
    """
    L = np.asarray(L)
    p_prev = np.ones_like(L)
    if r == 0:
        return p_prev
    p = L
    for j in range(1, r):
        p_prev, p = p, L * p - j * c * p_prev
    return p


@dataclass(frozen=True)
class DerivativePrefactor:
    """Polynomial ``P_alpha`` with ``d^alpha_{x'} k_{t,lam} = P_alpha k_{t,lam}``.

    The polynomial factorizes over coordinates: ``P = prod_j P_j(L_j)`` with the
    linear forms ``L_j = -c (x'_j - y'_j) - s y'_j``. ``coeffs[j]`` holds the
    power-series coefficients of ``P_j`` in ``L_j``.
    """

    alpha_x: tuple
    c: float
    s: float
    coeffs: tuple

    @property
    def degree(self) -> int:
        return sum(len(cj) - 1 for cj in self.coeffs)

    def linear_forms(self, xp, yp) -> np.ndarray:
        xp = np.asarray(xp, dtype=float)
        yp = np.asarray(yp, dtype=float)
        return -self.c * (xp - yp) - self.s * yp

    def evaluate(self, xp, yp):
        """Evaluate ``P`` at points of shape ``(..., n)``."""
        L = self.linear_forms(xp, yp)
        out = np.ones(L.shape[:-1])
        for j, cj in enumerate(self.coeffs):
            out = out * P.polyval(L[..., j], cj)
        return out


def mehler_derivative_prefactor(alpha_x, t: float, lam) -> DerivativePrefactor:
    """Build ``P_alpha`` via ``P_{alpha+e_j} = d_j P_alpha + P_alpha d_j Q``.

    ``Q`` is the exponent of the Mehler kernel, so ``d_j Q = L_j`` and
    ``d_j L_j = -c``.
    """
    if not np.isfinite(t) or t <= 0:
        raise InvalidArgument("t must be positive")
    alpha_x = tuple(int(v) for v in np.atleast_1d(alpha_x))
    if any(v < 0 for v in alpha_x):
        raise InvalidArgument("alpha_x must be natural")
    lam_norm = float(np.linalg.norm(np.atleast_1d(lam)))
    _, c, s = mehler_coefficients(t, lam_norm)
    c, s = float(c), float(s)
    coeffs = []
    for r in alpha_x:
        cj = np.array([1.0])
        for _ in range(r):
            cj = P.polyadd(-c * P.polyder(cj), P.polymulx(cj))
        coeffs.append(cj)
    return DerivativePrefactor(alpha_x, c, s, tuple(coeffs))
