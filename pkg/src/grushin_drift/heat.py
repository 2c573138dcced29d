"""Grushin heat kernel by Fourier inversion of the Mehler kernel.

``H_t(x, y) = (2 pi)^{-m} int k_{t,|lam|}(x', y') exp(-i lam.(x''-y'')) dlam``,
the drifted kernel ``H_{t,a} = exp(-|a|^2 t - a.(x'+y')) H_t`` of
``G_a = G - 2 a.grad_{x'}``, its ``X^alpha`` derivatives, a finite-difference
``G_a`` and the semigroup ``exp(-t G_a)`` acting on sampled functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, pi

import numpy as np
from scipy.signal import fftconvolve

from .core import Drift, GrushinMultiIndex, GrushinPoint, check_same_dims
from .errors import AccuracyNotMet, InvalidArgument
from .grids import SampledFunction
from .mehler import LARGE_GUARD, hermite_prefactor, mehler_coefficients, mehler_log_kernel
from .parallel import parallel_map
from .quadrature import DEFAULT_SPEC, QuadratureSpec, composite_gl, gauss_legendre

_EPS = np.finfo(float).eps
_ENVELOPE_CUT = 1e-17
_MAX_NODES = 4_000_000
_CHUNK = 4_000_000


@dataclass(frozen=True)
class HeatKernelValue:
    """A heat-kernel value with its error estimate."""

    t: float
    x: GrushinPoint
    y: GrushinPoint
    a: Drift
    value: float
    est_error: float


def _falling(b: int, i: int) -> int:
    out = 1
    for j in range(i):
        out *= b - j
    return out


def xprime_factor(alpha: GrushinMultiIndex, a, xp, yp, c, s):
    """``X^alpha`` prefactor of the drifted Mehler integrand, without ``lam`` powers.

    For each coordinate the drift product rule
    ``(d_j - a_j)^r = sum_g C(r, g) (-a_j)^{r-g} d_j^g`` is applied to
    ``x_j^beta k``, and ``d_j^g [x_j^beta k] / k`` is expanded by Leibniz with
    the Mehler prefactors ``p_{g-i}``. ``xp, yp`` have shape ``(..., n)`` and
    broadcast against ``c, s``.
    """
    xp = np.asarray(xp, dtype=float)
    yp = np.asarray(yp, dtype=float)
    a = np.asarray(a, dtype=float)
    out = np.ones(np.broadcast_shapes(xp.shape[:-1], np.shape(c)))
    for j in range(xp.shape[-1]):
        r = int(alpha.alpha_prime[j])
        beta = int(alpha.beta[j])
        xj = xp[..., j]
        if r == 0:
            if beta:
                out = out * xj ** beta
            continue
        L = -c * (xj - yp[..., j]) - s * yp[..., j]
        p = [hermite_prefactor(i, L, c) for i in range(r + 1)]
        D = 0.0
        for g in range(r + 1):
            E = 0.0
            for i in range(min(g, beta) + 1):
                E = E + comb(g, i) * _falling(beta, i) * xj ** (beta - i) * p[g - i]
            D = D + comb(r, g) * (-a[j]) ** (r - g) * E
        out = out * D
    return out


def _radial_profile(t, lam, xp, yp, a, alpha):
    """Real radial integrand ``k * prefactor``; ``lam`` powers excluded."""
    logk = mehler_log_kernel(t, lam, xp, yp)
    _, c, s = mehler_coefficients(t, lam)
    return np.exp(logk) * xprime_factor(alpha, a, xp, yp, c, s)


def _cutoff(t, env_fn, lam_max):
    """Radius beyond which the envelope is negligible, and the tail mass beyond it."""
    top = LARGE_GUARD / t
    probes = np.concatenate([[0.0], np.geomspace(1e-4 * min(1.0 / t, 1.0), top, 320)])
    env = np.abs(env_fn(probes))
    peak = env.max()
    if peak == 0.0:
        return (lam_max or 1.0), 0.0, 0.0
    if lam_max is None:
        above = np.nonzero(env > _ENVELOPE_CUT * peak)[0]
        last = min(above[-1] + 1, probes.size - 1)
        lam_cut = probes[last]
    else:
        lam_cut = min(float(lam_max), top)
        last = int(np.searchsorted(probes, lam_cut))
    tail = float(np.trapezoid(env[last:], probes[last:])) if last < probes.size - 1 else 0.0
    return lam_cut, tail, peak


def _panels(lam_cut, dmax, lam_nodes):
    width = lam_cut / 24.0
    if dmax > 0:
        # one oscillation period per 16-node panel is resolved to ~1e-16
        width = min(width, 2 * pi / dmax)
    npan = int(np.ceil(lam_cut / width))
    if npan * lam_nodes > _MAX_NODES:
        raise AccuracyNotMet("lambda quadrature would need too many nodes")
    return composite_gl(np.linspace(0.0, lam_cut, npan + 1), lam_nodes)


def _directions(m: int, nang: int):
    """Unit vectors and weights of the angular rule on ``S^{m-1}``."""
    if m == 2:
        th = 2 * pi * np.arange(nang) / nang
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(nang, 2 * pi / nang)
    if m == 3:
        ct, wt = gauss_legendre(nang)
        nphi = 2 * nang
        phi = 2 * pi * np.arange(nphi) / nphi
        st = np.sqrt(1 - ct ** 2)
        om = np.stack([np.outer(st, np.cos(phi)), np.outer(st, np.sin(phi)),
                       np.outer(ct, np.ones(nphi))], axis=-1).reshape(-1, 3)
        w = np.outer(wt, np.full(nphi, 2 * pi / nphi)).ravel()
        return om, w
    raise InvalidArgument("only m <= 3 is supported")


def xalpha_heat_values(t: float, a, alpha: GrushinMultiIndex, xp, yp, deltas,
                       q: QuadratureSpec = DEFAULT_SPEC):
    """``X^alpha H_{t,a}`` at ``(x', y')`` for many ``x'' - y''``.

    Parameters
    ----------
    deltas : array_like, shape (D, m)
        Values of ``x'' - y''``.

    Returns
    -------
    values, errors : ndarray, shape (D,)
    """
    if not np.isfinite(t) or t <= 0:
        raise InvalidArgument("t must be positive")
    xp = np.asarray(xp, dtype=float)
    yp = np.asarray(yp, dtype=float)
    a = np.asarray(a, dtype=float)
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    m = deltas.shape[1]
    lam_pows = alpha.lam_powers
    B = int(lam_pows.sum())
    radial_pow = m - 1 + B

    def env(lam):
        return _radial_profile(t, lam, xp, yp, a, alpha) * lam ** radial_pow

    lam_cut, tail, _ = _cutoff(t, env, q.lam_max)
    dnorm = np.linalg.norm(deltas, axis=1)
    dmax = float(dnorm.max())
    lam, w = _panels(lam_cut, dmax, q.lam_nodes)
    g = _radial_profile(t, lam, xp, yp, a, alpha)
    if m == 1:
        wg = w * g * lam ** B / pi
        vals = np.empty(deltas.shape[0])
        step = max(1, _CHUNK // lam.size)
        for i0 in range(0, deltas.shape[0], step):
            d = deltas[i0:i0 + step, 0]
            vals[i0:i0 + step] = wg @ np.cos(np.outer(lam, d) + 0.5 * pi * B)
        resid = np.zeros_like(vals)
        sphere = 1.0 / pi
    else:
        nang = max(16, int(np.ceil(lam_cut * dmax)) + 16)
        om, wom = _directions(m, nang)
        rad = w * g * lam ** (m - 1) / (2 * pi) ** m
        # angular factor of prod_k (-i lam_k)^{beta_k}
        ang = np.ones(om.shape[0], dtype=complex)
        for k_, pk in enumerate(lam_pows):
            if pk:
                ang = ang * (-1j * om[:, k_]) ** pk
        ang = ang * wom
        vals = np.empty(deltas.shape[0])
        resid = np.empty(deltas.shape[0])
        lamB = rad * lam ** B
        for i, d in enumerate(deltas):
            phase = np.exp(-1j * np.outer(lam, om @ d))
            z = lamB @ phase @ ang
            vals[i] = z.real
            resid[i] = abs(z.imag)
        sphere = wom.sum() / (2 * pi) ** m
    mass = float(np.sum(np.abs(w * g * lam ** radial_pow))) * sphere
    pref = np.exp(-float(a @ a) * t - float(a @ (xp + yp)))
    vals = pref * vals
    tail_v = pref * tail * sphere
    # rounding of the phase lam.(x''-y'') grows with lam_cut |x''-y''|
    noise = pref * mass * _EPS * (16 + lam_cut * dmax)
    bad = tail_v > np.maximum(q.rel_tol * np.abs(vals), 4 * noise)
    if np.any(bad):
        raise AccuracyNotMet(f"lambda truncation tail {tail_v:.3g} exceeds tolerance")
    errs = tail_v + pref * resid + noise
    return vals, errs


def _check_t(t):
    if not np.isfinite(t) or t <= 0:
        raise InvalidArgument("t must be positive")


def _zero_index(dims) -> GrushinMultiIndex:
    return GrushinMultiIndex(np.zeros(dims.n, dtype=int), np.zeros((dims.n, dims.m), dtype=int))


def heat_kernel_drift(t: float, a: Drift, x: GrushinPoint, y: GrushinPoint,
                      q: QuadratureSpec = DEFAULT_SPEC) -> HeatKernelValue:
    """Drifted heat kernel ``H_{t,a}(x, y) = exp(-|a|^2 t - a.(x'+y')) H_t(x, y)``."""
    _check_t(t)
    dims = check_same_dims(x, y)
    if a.a.size != dims.n:
        raise InvalidArgument("drift length does not match n")
    v, e = xalpha_heat_values(t, a.a, _zero_index(dims), x.x_prime, y.x_prime,
                              (x.x_dprime - y.x_dprime)[None, :], q)
    return HeatKernelValue(float(t), x, y, a, float(v[0]), float(e[0]))


def heat_kernel(t: float, x: GrushinPoint, y: GrushinPoint,
                q: QuadratureSpec = DEFAULT_SPEC) -> HeatKernelValue:
    """Heat kernel ``H_t(x, y)`` of the Grushin operator.

    Examples
    --------
    >>> from grushin_drift.core import GrushinPoint
    >>> o = GrushinPoint([0.0], [0.0])
    >>> round(heat_kernel(1.0, o, o).value, 6)
    0.172519
    """
    _check_t(t)
    return heat_kernel_drift(t, Drift.zero(x.n), x, y, q)


def heat_kernel_derivative(t: float, a: Drift, alpha: GrushinMultiIndex, x: GrushinPoint,
                           y: GrushinPoint, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``(X^alpha H_{t,a})(x, y)``, derivatives taken in ``x``.

    ``X''`` factors contribute ``x'_j (-i lam_k)`` inside the ``lam`` integral and
    ``X'`` factors act through the drift product rule on the Mehler prefactors.
    """
    _check_t(t)
    dims = check_same_dims(x, y)
    if alpha.alpha_prime.size != dims.n or alpha.alpha_dprime.shape[1] != dims.m:
        raise InvalidArgument("multi-index does not match (n, m)")
    v, _ = xalpha_heat_values(t, a.a, alpha, x.x_prime, y.x_prime,
                              (x.x_dprime - y.x_dprime)[None, :], q)
    return float(v[0])


def grushin_apply(f: SampledFunction, a: Drift) -> SampledFunction:
    """``G_a f = -Lap_{x'} f - |x'|^2 Lap_{x''} f - 2 a.grad_{x'} f`` by central differences.

    Cells within one node of the boundary, or next to an invalid cell, are
    marked invalid.
    """
    grid = f.grid
    n = f.dims.n
    if any(s < 7 for s in grid.shape):
        raise InvalidArgument("need at least 5 interior points per axis")
    if a.a.size != n:
        raise InvalidArgument("drift length does not match n")
    u = f.masked_values()
    mesh = grid.mesh()
    r2 = sum(mesh[j] ** 2 for j in range(n))
    out = np.zeros_like(u)
    mask = f.mask.copy()
    for ax in range(grid.ndim):
        h = grid.spacing[ax]
        up = np.roll(u, -1, axis=ax)
        dn = np.roll(u, 1, axis=ax)
        lap = (up - 2 * u + dn) / h ** 2
        if ax < n:
            out -= lap + a.a[ax] * (up - dn) / h
        else:
            out -= r2 * lap
        mask &= np.roll(f.mask, -1, axis=ax) & np.roll(f.mask, 1, axis=ax)
        edge = [slice(None)] * grid.ndim
        edge[ax] = [0, -1]
        mask[tuple(edge)] = False
    return SampledFunction(grid, np.where(mask, out, 0.0), mask)


def dprime_offsets(grid) -> np.ndarray:
    """All lattice differences ``x'' - y''`` of the grid, shape ``(D, m)``.

    The ``D`` axis is the C-order flattening of ``prod_k (2 N''_k - 1)``.
    """
    n = grid.dims.n
    ax = [grid.spacing[n + k] * np.arange(-(N - 1), N)
          for k, N in enumerate(grid.dprime_shape)]
    return np.stack([g.ravel() for g in np.meshgrid(*ax, indexing="ij")], axis=-1)


def build_table(grid, table_row) -> np.ndarray:
    """Stack ``table_row(i)`` over all ``x'`` nodes.

    The result has shape ``(N', N', 2 N''_1 - 1, ..., 2 N''_m - 1)`` and holds
    ``K(x'_i, y'_j, x'' - y'')`` on the lattice of ``x''`` offsets.
    """
    prime_n = int(np.prod(grid.prime_shape))
    return np.stack(parallel_map(table_row, range(prime_n)))


def convolve_table(f: SampledFunction, a: Drift, table: np.ndarray) -> np.ndarray:
    """``sum_y K(x, y) f(y) exp(2 a.y') dV`` for a kernel invariant under ``x''`` translation.

    ``table`` comes from :func:`build_table` on the grid of ``f``.
    """
    grid = f.grid
    prime_n = int(np.prod(grid.prime_shape))
    dshape = grid.dprime_shape
    g = (f.masked_values() * f.measure_weights(a)).reshape((prime_n,) + dshape)
    axes = tuple(range(1, 1 + grid.dims.m))
    out = np.stack([fftconvolve(table[i], g, mode="valid", axes=axes).sum(axis=0)
                    for i in range(prime_n)])
    return out.reshape(grid.shape)


def heat_table_row(t, a, alpha, grid, q):
    """Row builder for :func:`build_table` using the ``lam`` quadrature."""
    xps = grid.prime_points()
    deltas = dprime_offsets(grid)
    dshape = tuple(2 * N - 1 for N in grid.dprime_shape)

    def table_row(i):
        rows = [xalpha_heat_values(t, a.a, alpha, xps[i], yp, deltas, q)[0]
                for yp in xps]
        return np.stack(rows).reshape((len(xps),) + dshape)

    return table_row


def heat_table(f_grid, t: float, a: Drift, q: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Lattice table of ``H_{t,a}`` on a grid, reusable across functions."""
    return build_table(f_grid, heat_table_row(t, a, _zero_index(f_grid.dims), f_grid, q))


def apply_heat_semigroup(f: SampledFunction, t: float, a: Drift,
                         q: QuadratureSpec = DEFAULT_SPEC) -> SampledFunction:
    """``exp(-t G_a) f(x) = sum_y H_{t,a}(x, y) f(y) exp(2 a.y') dV`` over the grid of ``f``."""
    _check_t(t)
    if a.a.size != f.dims.n:
        raise InvalidArgument("drift length does not match n")
    return SampledFunction(f.grid, convolve_table(f, a, heat_table(f.grid, t, a, q)))


# ---------------------------------------------------------------------------
# Gaussian upper bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianBoundFit:
    """Constants in ``H_t(x, y) <= C |B(x, sqrt t)|^{-1} exp(-b d(x, y)^2 / t)``.

    ``b`` is the largest value on the search grid whose smallest admissible
    ``C`` stays below ``C_max``; ``ok`` is false when no grid value does.
    """

    C: float
    b: float
    C_max: float
    ok: bool
    samples: int


def sample_gaussian_bound(t_values=(0.1, 1.0, 10.0), pairs: int = 200, box: float = 2.0,
                          n: int = 1, m: int = 1, seed: int = 0,
                          q: QuadratureSpec = DEFAULT_SPEC):
    """Heat-kernel values at ``pairs`` random ``(t, x, y)``.

    ``t`` cycles through ``t_values``; ``x, y`` are uniform in ``[-box, box]^{n+m}``.
    Returns arrays ``(t, d(x, y), |B(x, sqrt t)|, H_t(x, y))``, with the ball
    volume from :func:`~grushin_drift.geometry.ball_volume_lebesgue_ref`.
    """
    from .geometry import ball_volume_lebesgue_ref, grushin_distance

    rng = np.random.default_rng(seed)
    ts = np.array([t_values[i % len(t_values)] for i in range(pairs)], dtype=float)
    pts = rng.uniform(-box, box, size=(pairs, 2, n + m))
    d = np.empty(pairs)
    vol = np.empty(pairs)
    H = np.empty(pairs)
    for i, (t, (xf, yf)) in enumerate(zip(ts, pts)):
        x = GrushinPoint(xf[:n], xf[n:])
        y = GrushinPoint(yf[:n], yf[n:])
        d[i] = grushin_distance(x, y)
        vol[i] = ball_volume_lebesgue_ref(x, np.sqrt(t))
        H[i] = heat_kernel(t, x, y, q).value
    return ts, d, vol, H


def fit_gaussian_bound(t, d, vol, H, C_max: float = 50.0, b_grid=None) -> GaussianBoundFit:
    """Largest ``b`` (on ``b_grid``) for which ``max H |B| exp(b d^2/t) <= C_max``."""
    t, d, vol, H = (np.asarray(v, dtype=float) for v in (t, d, vol, H))
    if b_grid is None:
        b_grid = np.linspace(0.01, 2.0, 200)
    b_grid = np.sort(np.asarray(b_grid, dtype=float))[::-1]
    base = np.log(np.maximum(H, 0.0) * vol)
    for b in b_grid:
        C = float(np.exp(np.max(base + b * d * d / t)))
        if C <= C_max:
            return GaussianBoundFit(C, float(b), C_max, True, t.size)
    b = float(b_grid[-1])
    return GaussianBoundFit(float(np.exp(np.max(base + b * d * d / t))), b, C_max, False, t.size)
