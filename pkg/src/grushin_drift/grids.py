"""Uniform rectangular grids over R^{n+m} and functions sampled on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Dimensions, Drift, GrushinPoint
from .errors import InvalidArgument


@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes ``origin[i] + j * spacing[i]``, ``j = 0..shape[i]-1``, axes ordered ``(x', x'')``."""

    dims: Dimensions
    origin: np.ndarray
    spacing: np.ndarray
    shape: tuple

    def __post_init__(self):
        d = self.dims.n + self.dims.m
        origin = np.asarray(self.origin, dtype=float).reshape(-1)
        spacing = np.asarray(self.spacing, dtype=float).reshape(-1)
        shape = tuple(int(s) for s in self.shape)
        if origin.size != d or spacing.size != d or len(shape) != d:
            raise InvalidArgument("grid description does not match n + m")
        if np.any(spacing <= 0) or not np.all(np.isfinite(spacing)):
            raise InvalidArgument("grid spacing must be positive")
        if any(s < 1 for s in shape):
            raise InvalidArgument("grid shape must be positive")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def centered(cls, dims: Dimensions, lo, hi, npts) -> "Grid":
        """Cell-centred grid: ``npts`` midpoints of equal cells of ``[lo, hi]`` per axis."""
        d = dims.n + dims.m
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (d,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (d,))
        npts = np.broadcast_to(np.asarray(npts, dtype=int), (d,))
        h = (hi - lo) / npts
        return cls(dims, lo + 0.5 * h, h, tuple(npts))

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.spacing[i] * np.arange(self.shape[i])

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.ndim)]

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All nodes, shape ``(N, n + m)`` in C order."""
        return np.stack([g.ravel() for g in self.mesh()], axis=-1)

    def prime_points(self) -> np.ndarray:
        """Nodes of the ``x'`` factor, shape ``(N', n)``."""
        ax = self.axes()[: self.dims.n]
        return np.stack([g.ravel() for g in np.meshgrid(*ax, indexing="ij")], axis=-1)

    @property
    def prime_shape(self) -> tuple:
        return self.shape[: self.dims.n]

    @property
    def dprime_shape(self) -> tuple:
        return self.shape[self.dims.n:]

    def is_compatible(self, other: "Grid") -> bool:
        return (self.dims == other.dims and self.shape == other.shape
                and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12)
                and np.allclose(self.spacing, other.spacing, rtol=1e-12, atol=0))

    def dilated(self, s: float) -> "Grid":
        """Image of the grid under the dilation by ``s``."""
        n = self.dims.n
        scale = np.concatenate([np.full(n, s), np.full(self.dims.m, s * s)])
        return Grid(self.dims, self.origin * scale, self.spacing * scale, self.shape)

    def index_of(self, point: GrushinPoint, tol: float = 1e-9) -> tuple:
        """Multi-index of a grid node equal to ``point``; raises if none."""
        c = point.flat()
        j = (c - self.origin) / self.spacing
        jr = np.round(j)
        if np.any(np.abs(j - jr) > tol) or np.any(jr < 0) or np.any(jr >= np.array(self.shape)):
            raise InvalidArgument(f"{point!r} is not a grid node")
        return tuple(int(v) for v in jr)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real values on a :class:`Grid` with a validity mask."""

    grid: Grid
    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise InvalidArgument("values do not match grid shape")
        mask = np.ones(values.shape, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if mask.shape != values.shape:
            raise InvalidArgument("mask does not match grid shape")
        if not np.all(np.isfinite(values[mask])):
            raise InvalidArgument("values must be finite on valid cells")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "SampledFunction":
        """Sample ``fn(*coords)`` where each coordinate array has the grid shape."""
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.shape).astype(float))

    @property
    def dims(self) -> Dimensions:
        return self.grid.dims

    def with_values(self, values, mask=None) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.mask if mask is None else mask)

    def masked_values(self) -> np.ndarray:
        return np.where(self.mask, self.values, 0.0)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _require_same_grid(self, other)
        return SampledFunction(self.grid, self.values + other.values, self.mask & other.mask)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        _require_same_grid(self, other)
        return SampledFunction(self.grid, self.values - other.values, self.mask & other.mask)

    def __mul__(self, c: float) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values, self.mask)

    __rmul__ = __mul__

    def value_at(self, point: GrushinPoint) -> float:
        return float(self.values[self.grid.index_of(point)])

    def measure_weights(self, a: Drift | None = None) -> np.ndarray:
        """Cell masses of ``dmu_a = exp(2 a.x') dx``."""
        w = np.full(self.grid.shape, self.grid.cell_volume)
        if a is not None and not a.is_zero:
            n = self.dims.n
            expo = sum(2.0 * a.a[i] * g for i, g in enumerate(self.grid.mesh()[:n]))
            w = w * np.exp(expo)
        return w


def _require_same_grid(f: SampledFunction, g: SampledFunction) -> None:
    if not f.grid.is_compatible(g.grid):
        raise InvalidArgument("functions live on different grids")


def points_to_array(points: Sequence[GrushinPoint]) -> np.ndarray:
    return np.stack([p.flat() for p in points])
