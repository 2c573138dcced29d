"""Euclidean drifted Riesz transforms and the scaled-drift Grushin limit.

With ``Delta_{e1} = -Delta - 2 d/dx'_1`` on R^{n+m}, the operator
``d^k_{x'_1} Delta_{e1}^{-k/2}`` has the Fourier form
``e^{-x'_1} F^{-1}[(-1 + 2 pi i lam'_1)^k (1 + 4 pi^2 |lam|^2)^{-k/2} F[f e^{y'_1}]]``
with ``F g(lam) = int g(x) e^{-2 pi i x.lam} dx``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Drift, GrushinMultiIndex, GrushinPoint
from .errors import InvalidArgument
from .grids import Grid, SampledFunction
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .riesz import DEFAULT_MU_RULE, MuRule, apply_riesz, riesz_at_points, riesz_table


def euclid_multiplier(lams: Sequence[np.ndarray], k: int) -> np.ndarray:
    """``(-1 + 2 pi i lam'_1)^k (1 + 4 pi^2 |lam|^2)^{-k/2}`` on a frequency mesh."""
    r2 = sum(l ** 2 for l in lams)
    return (-1 + 2j * np.pi * lams[0]) ** k * (1 + 4 * np.pi ** 2 * r2) ** (-k / 2)


def euclid_drift_riesz_detailed(f: SampledFunction, k: int, pad: int = 2):
    """As :func:`euclid_drift_riesz`, also returning the largest imaginary residue.

    The sample array is zero-padded to ``pad * N + 1`` points per axis (odd
    length, so the discrete multiplier is exactly conjugate symmetric).
    """
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    grid = f.grid
    if not np.all(np.isfinite(grid.spacing)) or np.any(grid.spacing <= 0):
        raise InvalidArgument("grid must be uniform")
    x1 = grid.mesh()[0]
    F = f.masked_values() * np.exp(x1)
    shape = tuple(pad * N + 1 for N in grid.shape)
    lams = np.meshgrid(*[np.fft.fftfreq(Np, d=h) for Np, h in zip(shape, grid.spacing)],
                       indexing="ij", sparse=True)
    # the grid origin only contributes a phase that cancels between the two transforms
    spec = np.fft.fftn(F, s=shape, axes=tuple(range(F.ndim)))
    out = np.fft.ifftn(euclid_multiplier(lams, int(k)) * spec)
    out = out[tuple(slice(0, N) for N in grid.shape)]
    resid = float(np.max(np.abs(out.imag))) if out.size else 0.0
    return SampledFunction(grid, np.exp(-x1) * out.real), resid


def euclid_drift_riesz(f: SampledFunction, k: int) -> SampledFunction:
    """``d^k_{x'_1} Delta_{e1}^{-k/2} f`` by the discrete Fourier transform."""
    return euclid_drift_riesz_detailed(f, k)[0]


@dataclass(frozen=True)
class DriftLimitConfig:
    """Order ``k``, decreasing scales ``R_list``, anchor ``xi`` and probe points."""

    k: int
    R_list: tuple = (1.0, 0.5, 0.25)
    xi: GrushinPoint = field(default=None)
    probe_points: tuple = ()

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgument("k must be a positive integer")
        R = tuple(float(r) for r in self.R_list)
        if any(r <= 0 for r in R) or any(b >= a for a, b in zip(R, R[1:])):
            raise InvalidArgument("R_list must be positive and strictly decreasing")
        object.__setattr__(self, "R_list", R)
        if self.xi is not None:
            if (abs(np.linalg.norm(self.xi.x_prime) - 1) > 1e-12
                    or abs(np.linalg.norm(self.xi.x_dprime) - 1) > 1e-12):
                raise InvalidArgument("xi must have unit x' and x'' parts")
        object.__setattr__(self, "probe_points", tuple(self.probe_points))

    def anchor(self, n: int, m: int) -> GrushinPoint:
        if self.xi is not None:
            return self.xi
        return GrushinPoint(np.eye(n)[0], np.eye(m)[0])


def default_probe_points(grid: Grid, count: int = 5, radius: float = 0.3) -> tuple:
    """Grid nodes nearest to the origin and to ``+-radius`` along ``x'_1`` and ``x''_1``."""
    n = grid.dims.n
    d = grid.ndim
    targets = [np.zeros(d)]
    for ax in (0, n):
        for sgn in (1.0, -1.0):
            t = np.zeros(d)
            t[ax] = sgn * radius
            targets.append(t)
    pts = []
    for t in targets[:count]:
        idx = np.clip(np.round((t - grid.origin) / grid.spacing), 0, np.array(grid.shape) - 1)
        c = grid.origin + idx * grid.spacing
        pts.append(GrushinPoint(c[:n], c[n:]))
    return tuple(pts)


def conjugated_grid(grid: Grid, R: float, xi: GrushinPoint) -> Grid:
    """Image of ``grid`` under ``x -> R x + xi``."""
    return Grid(grid.dims, R * grid.origin + xi.flat(), R * grid.spacing, grid.shape)


def _setup(f: SampledFunction, cfg: DriftLimitConfig, R: float):
    if not any(abs(R - r) < 1e-12 for r in cfg.R_list):
        raise InvalidArgument("R must belong to cfg.R_list")
    dims = f.dims
    xi = cfg.anchor(dims.n, dims.m)
    g = SampledFunction(conjugated_grid(f.grid, R, xi), f.values, f.mask)
    alpha = GrushinMultiIndex.unit(0, dims, cfg.k)
    drift = Drift.along_e1(1.0 / R, dims.n)
    return g, alpha, drift, xi


def scaled_conjugated_riesz(f: SampledFunction, cfg: DriftLimitConfig, R: float,
                            q: QuadratureSpec = DEFAULT_SPEC,
                            mu_rule: MuRule = DEFAULT_MU_RULE) -> np.ndarray:
    """``(Lambda_R U) X_1^k G_{e1/R}^{-k/2} (Lambda_R U)^{-1} f`` at ``cfg.probe_points``.

    ``g(y) = f((y - xi)/R)`` lives on the grid ``R x + xi``; the Grushin Riesz
    sum with drift ``e1/R`` is read at ``R x_probe + xi``.
    """
    g, alpha, drift, xi = _setup(f, cfg, R)
    probes = cfg.probe_points or default_probe_points(f.grid)
    mapped = [GrushinPoint(R * p.x_prime + xi.x_prime, R * p.x_dprime + xi.x_dprime)
              for p in probes]
    return riesz_at_points(g, alpha, drift, mapped, q, mu_rule)


def scaled_conjugated_riesz_grid(f: SampledFunction, cfg: DriftLimitConfig, R: float,
                                 q: QuadratureSpec = DEFAULT_SPEC,
                                 mu_rule: MuRule = DEFAULT_MU_RULE) -> SampledFunction:
    """The same operator evaluated on every node of the grid of ``f``."""
    g, alpha, drift, _ = _setup(f, cfg, R)
    table = riesz_table(g.grid, alpha, drift, q, mu_rule)
    out = apply_riesz(g, alpha, drift, q, mu_rule, table=table)
    return SampledFunction(f.grid, out.values, f.mask)


def bump(grid: Grid, radius: float, center=None) -> SampledFunction:
    """Smooth compactly supported bump ``exp(1 - 1/(1 - |z|^2/radius^2))``."""
    c = np.zeros(grid.ndim) if center is None else np.asarray(center, dtype=float)
    r2 = sum((g - ci) ** 2 for g, ci in zip(grid.mesh(), c)) / radius ** 2
    inside = r2 < 1
    vals = np.zeros(grid.shape)
    vals[inside] = np.exp(1 - 1 / (1 - r2[inside]))
    return SampledFunction(grid, vals)
