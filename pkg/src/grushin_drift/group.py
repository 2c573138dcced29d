"""The group H_{n,m}, its action on functions over R^{n+m}, and transference.

Elements are triples ``(u, v, s)`` with ``u`` an ``n x m`` matrix, ``v`` in
R^n and ``s`` in R^m, multiplied by
``(u,v,s)(u',v',s') = (u+u', v+v', s+s' + (u'^T v - u^T v')/2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .core import Drift
from .errors import InvalidArgument
from .grids import SampledFunction


@dataclass(frozen=True, eq=False)
class GroupElement:
    u: np.ndarray
    v: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.u, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        s = np.atleast_1d(np.asarray(self.s, dtype=float))
        if u.shape != (v.size, s.size):
            raise InvalidArgument("u must have shape (n, m)")
        for arr in (u, v, s):
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "s", s)

    @classmethod
    def identity(cls, n: int = 1, m: int = 1) -> "GroupElement":
        return cls(np.zeros((n, m)), np.zeros(n), np.zeros(m))

    def allclose(self, other: "GroupElement", tol: float = 1e-12) -> bool:
        return all(np.allclose(p, q, rtol=tol, atol=tol)
                   for p, q in ((self.u, other.u), (self.v, other.v), (self.s, other.s)))

    def __repr__(self) -> str:
        return f"GroupElement(u={self.u.tolist()}, v={self.v.tolist()}, s={self.s.tolist()})"


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product ``g h``."""
    if g.u.shape != h.u.shape:
        raise InvalidArgument("elements of different groups")
    s = g.s + h.s + 0.5 * (h.u.T @ g.v - g.u.T @ h.v)
    return GroupElement(g.u + h.u, g.v + h.v, s)


def group_inv(g: GroupElement) -> GroupElement:
    """Inverse ``(-u, -v, -s)``."""
    return GroupElement(-g.u, -g.v, -g.s)


def _interpolator(f: SampledFunction) -> RegularGridInterpolator:
    return RegularGridInterpolator(f.grid.axes(), f.masked_values(), method="linear",
                                   bounds_error=False, fill_value=0.0)


def _sigma_coords(g: GroupElement, pts: np.ndarray, n: int) -> np.ndarray:
    xp, xd = pts[:, :n], pts[:, n:]
    new_d = xd + xp @ g.u + g.s + g.u.T @ g.v / 2
    return np.concatenate([xp + g.v, new_d], axis=1)


def sigma_apply(g: GroupElement, f: SampledFunction) -> SampledFunction:
    """``sigma_g f(x) = f(x' + v, x'' + u^T x' + s + u^T v / 2)``.

    Linear interpolation; ``f`` is taken as zero outside its grid.
    """
    n = f.dims.n
    if g.u.shape != (n, f.dims.m):
        raise InvalidArgument("group element does not match (n, m)")
    pts = f.grid.points()
    vals = _interpolator(f)(_sigma_coords(g, pts, n)).reshape(f.grid.shape)
    return SampledFunction(f.grid, vals)


@dataclass(frozen=True, eq=False)
class GroupKernel:
    """A compactly supported function on H_{1,1} sampled on a ``(u, v, s)`` grid."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        if len(axes) != 3:
            raise InvalidArgument("transference grids are implemented for n = m = 1")
        values = np.asarray(self.values, dtype=float)
        if values.shape != tuple(ax.size for ax in axes):
            raise InvalidArgument("kernel values do not match the grid")
        for ax in axes:
            if ax.size > 1 and not np.allclose(np.diff(ax), ax[1] - ax[0]):
                raise InvalidArgument("kernel grid must be uniform")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([ax[1] - ax[0] if ax.size > 1 else 1.0 for ax in self.axes]))

    def elements(self):
        """Nonzero nodes as ``(weight, GroupElement)`` pairs; weight includes the cell volume."""
        U, V, S = np.meshgrid(*self.axes, indexing="ij")
        nz = np.nonzero(self.values)
        for idx in zip(*nz):
            yield (self.values[idx] * self.cell_volume,
                   GroupElement([[U[idx]]], [V[idx]], [S[idx]]))

    def weighted_l1_norm(self, a: Drift, p: float) -> float:
        """``||k||_{L^1(exp(2 a.v / p) dg)}``."""
        V = self.axes[1][None, :, None]
        w = np.exp(2 * a.a[0] * V / p)
        return float(np.sum(np.abs(self.values) * w) * self.cell_volume)


def transference_apply(k: GroupKernel, f: SampledFunction) -> SampledFunction:
    """``Tf(x) = sum_g k(g) sigma_{g^{-1}} f(x) dg`` over the kernel grid."""
    if f.dims.n != 1 or f.dims.m != 1:
        raise InvalidArgument("transference grids are implemented for n = m = 1")
    pts = f.grid.points()
    interp = _interpolator(f)
    out = np.zeros(pts.shape[0])
    for w, g in k.elements():
        out += w * interp(_sigma_coords(group_inv(g), pts, 1))
    return SampledFunction(f.grid, out.reshape(f.grid.shape))


def kernel_axes(lo, hi, npts) -> tuple:
    """Cell-centred ``(u, v, s)`` axes on the box ``[lo, hi]``."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (3,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (3,))
    npts = np.broadcast_to(np.asarray(npts, dtype=int), (3,))
    return tuple(l + (np.arange(N) + 0.5) * (h - l) / N for l, h, N in zip(lo, hi, npts))


@dataclass(frozen=True)
class TransferenceCheck:
    """``||T f||_{L^p(mu_a)}`` against the bound ``||k||_{L^1(exp(2 a.v/p))} ||f||_{L^p(mu_a)}``."""

    p: float
    lhs: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.bound if self.bound > 0 else float("inf")


def transference_check(k: GroupKernel, f: SampledFunction, ps=(1.0, 2.0),
                       a: Drift | None = None, Tf: SampledFunction | None = None) -> list:
    """Minkowski bound for the transferred operator, one entry per ``p``."""
    from .lab import lp_norm

    a = Drift.along_e1(1.0, 1) if a is None else a
    Tf = transference_apply(k, f) if Tf is None else Tf
    return [TransferenceCheck(float(p), lp_norm(Tf, p, a),
                              k.weighted_l1_norm(a, p) * lp_norm(f, p, a)) for p in ps]


def random_instance(rng: np.random.Generator, grid, kernel_npts: int = 8,
                    kernel_box: float = 1.0, signed: bool = True) -> tuple:
    """A random kernel under a smooth envelope and a random two-Gaussian ``f``.

    Nonnegative kernels (``signed=False``) and same-sign ``f`` make the
    Minkowski bound nearly tight.
    """
    u_ax, _, s_ax = kernel_axes(-kernel_box, kernel_box, kernel_npts)
    # v on whole multiples of the x' spacing: sigma then moves x' by whole
    # cells and only the unweighted x'' direction is interpolated
    h = grid.spacing[0]
    K = max(1, int(np.floor(kernel_box / h)))
    axes = (u_ax, h * np.arange(-K, K + 1), s_ax)
    U, V, S = np.meshgrid(*axes, indexing="ij")
    r2 = (U ** 2 + V ** 2 + S ** 2) / kernel_box ** 2
    env = np.where(r2 < 1, np.exp(-1 / np.maximum(1 - r2, 1e-300)), 0.0)
    noise = rng.normal(size=U.shape) if signed else rng.uniform(size=U.shape)
    k = GroupKernel(axes, noise * env)
    mesh = grid.mesh()
    vals = np.zeros(grid.shape)
    for _ in range(2):
        c = rng.uniform(-2, 2, size=2)
        w = rng.uniform(0.5, 1.0)
        sign = rng.choice([-1.0, 1.0]) if signed else 1.0
        vals += sign * np.exp(-((mesh[0] - c[0]) ** 2 + (mesh[1] - c[1]) ** 2) / (2 * w * w))
    return k, SampledFunction(grid, vals)
