"""Quadrature settings and Gauss-Legendre building blocks."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings shared by all kernel integrals.

    Parameters
    ----------
    lam_max : float, optional
        Fixed radius of the ``lam`` integral. ``None`` selects it per evaluation
        from the decay of the integrand.
    lam_nodes : int
        Gauss-Legendre nodes per ``lam`` panel (at least 16).
    t_sub : tuple, optional
        ``(U_lo, U_hi, u_nodes)`` for ``t = exp(u)``. ``None`` picks the window
        from ``d(x, y)`` and ``|a|``; ``u_nodes`` is the number of nodes per unit
        of ``u``.
    rel_tol : float
        Target relative accuracy in ``(0, 1e-2]``.
    """

    lam_max: Optional[float] = None
    lam_nodes: int = 16
    t_sub: Optional[Tuple[float, float, int]] = None
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.lam_max is not None and not self.lam_max > 0:
            raise InvalidArgument("lam_max must be positive")
        if int(self.lam_nodes) != self.lam_nodes or self.lam_nodes < 16:
            raise InvalidArgument("lam_nodes must be an integer >= 16")
        if self.t_sub is not None:
            lo, hi, nodes = self.t_sub
            if not lo < hi or int(nodes) < 1:
                raise InvalidArgument("t_sub needs U_lo < U_hi and u_nodes >= 1")
        if not 0 < self.rel_tol <= 1e-2:
            raise InvalidArgument("rel_tol must lie in (0, 1e-2]")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=64)
def gauss_legendre(npts: int) -> tuple:
    x, w = np.polynomial.legendre.leggauss(npts)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gl(edges, npts: int) -> tuple:
    """Nodes and weights of ``npts``-point Gauss-Legendre on each panel of ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(npts)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def gl_interval(lo: float, hi: float, npts: int) -> tuple:
    return composite_gl(np.array([lo, hi]), npts)
