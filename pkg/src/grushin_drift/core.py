"""Points, drifts, multi-indices and the two geometric actions on R^{n+m}.

A point is split as ``x = (x', x'')`` with ``x'`` in R^n and ``x''`` in R^m.
The vector fields are ``X_j = d/dx'_j`` and ``X_{j,k} = x'_j d/dx''_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgument

ORTHOGONALITY_TOL = 1e-12


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise InvalidArgument(f"{name} must be a vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dimensions:
    """Split ``(n, m)`` of the ambient space; ``Q = n + 2m``."""

    n: int = 1
    m: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m or self.n < 1 or self.m < 1:
            raise InvalidArgument("n and m must be positive integers")

    @property
    def Q(self) -> int:
        return self.n + 2 * self.m


@dataclass(frozen=True, eq=False)
class GrushinPoint:
    """A point ``(x', x'')`` of R^n x R^m."""

    x_prime: np.ndarray
    x_dprime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_prime", _as_vector(self.x_prime, "x_prime"))
        object.__setattr__(self, "x_dprime", _as_vector(self.x_dprime, "x_dprime"))

    @classmethod
    def from_flat(cls, coords: Sequence[float], dims: Dimensions) -> "GrushinPoint":
        """Build a point from ``n + m`` concatenated coordinates."""
        c = np.asarray(coords, dtype=float).ravel()
        if c.size != dims.n + dims.m:
            raise InvalidArgument(f"expected {dims.n + dims.m} coordinates, got {c.size}")
        return cls(c[: dims.n], c[dims.n:])

    @property
    def dims(self) -> Dimensions:
        return Dimensions(self.x_prime.size, self.x_dprime.size)

    @property
    def n(self) -> int:
        return self.x_prime.size

    @property
    def m(self) -> int:
        return self.x_dprime.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x_prime, self.x_dprime])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrushinPoint):
            return NotImplemented
        return (np.array_equal(self.x_prime, other.x_prime)
                and np.array_equal(self.x_dprime, other.x_dprime))

    def __hash__(self) -> int:
        return hash((self.x_prime.tobytes(), self.x_dprime.tobytes()))

    def __repr__(self) -> str:
        return f"GrushinPoint({self.x_prime.tolist()}, {self.x_dprime.tolist()})"


@dataclass(frozen=True, eq=False)
class Drift:
    """Drift vector ``a`` in R^n of ``G_a = G - 2 a . grad_{x'}``."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _as_vector(self.a, "a"))

    @classmethod
    def zero(cls, n: int) -> "Drift":
        return cls(np.zeros(n))

    @classmethod
    def along_e1(cls, magnitude: float, n: int) -> "Drift":
        a = np.zeros(n)
        a[0] = magnitude
        return cls(a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Drift):
            return NotImplemented
        return np.array_equal(self.a, other.a)

    def __hash__(self) -> int:
        return hash(self.a.tobytes())

    def __repr__(self) -> str:
        return f"Drift({self.a.tolist()})"


@dataclass(frozen=True, eq=False)
class GrushinMultiIndex:
    """Powers of ``X_j`` (``alpha_prime``) and ``X_{j,k}`` (``alpha_dprime``).

    ``alpha_dprime`` has shape ``(n, m)``; entry ``[j, k]`` is the power of
    ``X_{j,k}``. The operator ``X^alpha`` is read as
    ``X'^{alpha'} X''^{alpha''}``: the ``X''`` factors act first.
    """

    alpha_prime: np.ndarray
    alpha_dprime: np.ndarray = field(default=None)

    def __post_init__(self):
        ap = np.atleast_1d(np.asarray(self.alpha_prime))
        if ap.ndim != 1:
            raise InvalidArgument("alpha_prime must be a vector")
        n = ap.size
        ad = self.alpha_dprime
        ad = np.zeros((n, 1), dtype=int) if ad is None else np.asarray(ad)
        if ad.ndim == 1:
            ad = ad.reshape(n, -1)
        if ad.ndim != 2 or ad.shape[0] != n:
            raise InvalidArgument("alpha_dprime must have shape (n, m)")
        for arr, name in ((ap, "alpha_prime"), (ad, "alpha_dprime")):
            if np.any(arr < 0) or np.any(np.asarray(arr) != np.round(arr)):
                raise InvalidArgument(f"{name} must contain natural numbers")
        ap = ap.astype(int)
        ad = ad.astype(int)
        ap.setflags(write=False)
        ad.setflags(write=False)
        object.__setattr__(self, "alpha_prime", ap)
        object.__setattr__(self, "alpha_dprime", ad)

    @classmethod
    def from_prime(cls, alpha_prime: Sequence[int], m: int = 1) -> "GrushinMultiIndex":
        ap = np.asarray(alpha_prime, dtype=int)
        return cls(ap, np.zeros((ap.size, m), dtype=int))

    @classmethod
    def unit(cls, j: int, dims: Dimensions, power: int = 1) -> "GrushinMultiIndex":
        """``power`` copies of ``X_j`` (0-based ``j``)."""
        ap = np.zeros(dims.n, dtype=int)
        ap[j] = power
        return cls(ap, np.zeros((dims.n, dims.m), dtype=int))

    @property
    def order(self) -> int:
        return int(self.alpha_prime.sum() + self.alpha_dprime.sum())

    @property
    def beta(self) -> np.ndarray:
        """Total ``X''`` power attached to each ``x'_j``."""
        return self.alpha_dprime.sum(axis=1)

    @property
    def lam_powers(self) -> np.ndarray:
        """Total ``X''`` power attached to each ``lambda_k``."""
        return self.alpha_dprime.sum(axis=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrushinMultiIndex):
            return NotImplemented
        return (np.array_equal(self.alpha_prime, other.alpha_prime)
                and np.array_equal(self.alpha_dprime, other.alpha_dprime))

    def __hash__(self) -> int:
        return hash((self.alpha_prime.tobytes(), self.alpha_dprime.tobytes()))

    def __repr__(self) -> str:
        return (f"GrushinMultiIndex({self.alpha_prime.tolist()}, "
                f"{self.alpha_dprime.tolist()})")


def dilate(x: GrushinPoint, s: float) -> GrushinPoint:
    """Non-isotropic dilation ``(x', x'') -> (s x', s^2 x'')``."""
    if not np.isfinite(s) or s <= 0:
        raise InvalidArgument("dilation factor must be positive")
    return GrushinPoint(s * x.x_prime, (s * s) * x.x_dprime)


def check_orthogonal(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument("rotation must be a square matrix")
    if np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) > ORTHOGONALITY_TOL:
        raise InvalidArgument("matrix is not orthogonal")
    return A


def rotate(x: GrushinPoint, A) -> GrushinPoint:
    """Action ``(x', x'') -> (A x', x'')`` of an orthogonal ``A``."""
    A = check_orthogonal(A)
    if A.shape[0] != x.n:
        raise InvalidArgument("rotation size does not match n")
    return GrushinPoint(A @ x.x_prime, x.x_dprime)


def rotate_drift(a: Drift, A) -> Drift:
    A = check_orthogonal(A)
    return Drift(A @ a.a)


def check_same_dims(*points: GrushinPoint) -> Dimensions:
    dims = points[0].dims
    for p in points[1:]:
        if p.dims != dims:
            raise InvalidArgument("points have different (n, m)")
    return dims
