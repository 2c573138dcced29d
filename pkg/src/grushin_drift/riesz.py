"""Riesz-transform kernels ``X^alpha G_a^{-k/2}(x, y)`` and their regularizations.

Two independent evaluation routes are provided.

* :func:`riesz_kernel` integrates ``t^{k/2-1} X^alpha H_{t,a}`` over
  ``t = exp(u)``, each ``H_{t,a}`` coming from the ``lam`` quadrature.
* :func:`riesz_kernel_fast` (``m = 1``) substitutes ``mu = lam t`` and
  ``t -> 1/t`` so that the ``t`` integral becomes a modified Bessel function
  ``K_nu``, leaving a single non-oscillatory ``mu`` integral. It is used to
  build the kernel tables behind :func:`apply_riesz`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from math import ceil, comb, pi
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn, kve

from .core import Drift, GrushinMultiIndex, GrushinPoint, check_same_dims
from .errors import (AccuracyNotMet, DiagonalSingularity, DivergentIntegral,
                     InvalidArgument)
from .geometry import grushin_distance
from .grids import SampledFunction
from .heat import _falling, build_table, convolve_table, dprime_offsets, xalpha_heat_values
from .quadrature import DEFAULT_SPEC, QuadratureSpec, composite_gl

_EPS = np.finfo(float).eps
_MAX_EXTEND = 20


@dataclass(frozen=True)
class RieszKernelRequest:
    """Inputs of a Riesz kernel evaluation ``R_{alpha,a}(x, y)``."""

    alpha: GrushinMultiIndex
    a: Drift
    x: GrushinPoint
    y: GrushinPoint
    q: QuadratureSpec = field(default=DEFAULT_SPEC)

    def __post_init__(self):
        dims = check_same_dims(self.x, self.y)
        if self.a.a.size != dims.n:
            raise InvalidArgument("drift length does not match n")
        if (self.alpha.alpha_prime.size != dims.n
                or self.alpha.alpha_dprime.shape[1] != dims.m):
            raise InvalidArgument("multi-index does not match (n, m)")
        if self.alpha.order < 1:
            raise InvalidArgument("Riesz transforms need order k >= 1")

    @property
    def k(self) -> int:
        return self.alpha.order


@dataclass(frozen=True)
class RegularizationParams:
    """``eps`` and ``delta`` in ``(0, 1)``; ``N`` defaults to ``ceil(Q/2) + 1``."""

    eps: float
    delta: float
    N: Optional[int] = None

    def __post_init__(self):
        if not (0 < self.eps < 1 and 0 < self.delta < 1):
            raise InvalidArgument("eps and delta must lie in (0, 1)")
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise InvalidArgument("N must be a positive integer")

    def order(self, Q: int) -> int:
        return int(self.N) if self.N is not None else int(ceil(Q / 2)) + 1


@dataclass(frozen=True)
class RieszKernelValue:
    value: float
    est_error: float
    window: tuple


def _b_scaled(t: float, eps: float, delta: float, N: int, k: int) -> float:
    """``exp(t) B_{eps,delta,k}(t)``, the integral without its ``exp(-t)`` factor."""
    if t <= 0:
        return 0.0
    be = k / 2 - 1
    split = 40.0 * N * eps

    def full(h):
        return np.exp(-h / eps - delta * (t - h))

    # the integral is of size eps^N Gamma(N): quad's default absolute tolerance would swamp it
    tol = dict(epsabs=0.0, epsrel=1e-10, limit=200)

    def head(h):
        return h ** (N - 1) * (t - h) ** be * np.exp(-h / eps - delta * (t - h))

    def tail(h):
        return h ** (N - 1) * np.exp(-h / eps - delta * (t - h))

    # a roundoff-limited result is still far inside the kernel tolerance
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if t <= 2 * split:
            return integrate.quad(full, 0.0, t, weight="alg", wvar=(N - 1, be), **tol)[0]
        v1, _ = integrate.quad(head, 0.0, split, **tol)
        v2, _ = integrate.quad(tail, split, t, weight="alg", wvar=(0.0, be), **tol)
    return v1 + v2


def b_eps_delta(t: float, p: RegularizationParams, k: int, Q: int = 3) -> float:
    """``B_{eps,delta,k}(t) = exp(-t) int_0^t h^{N-1} e^{-h/eps} (t-h)^{k/2-1} e^{-delta(t-h)} dh``.

    ``Q`` only matters when ``p.N`` is left to its default.
    """
    if not t > 0:
        raise InvalidArgument("t must be positive")
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    return float(np.exp(-t) * _b_scaled(t, p.eps, p.delta, p.order(Q), int(k)))


def _default_window(req: RieszKernelRequest, d: float, extra_lo: float = 0.0) -> tuple:
    a2 = float(req.a.a @ req.a.a)
    lo = np.log(1e-4 * max(d, 1e-8) ** 2) + extra_lo
    hi = np.log(50.0 / max(a2, 0.02))
    if hi < lo + 4:
        hi = lo + 4
    return lo, hi


def _t_integral(req: RieszKernelRequest, weight, window: tuple, nodes_per_unit: int) -> RieszKernelValue:
    """``int weight(t) X^alpha H_{t,a}(x, y) dt`` over ``t = exp(u)`` with tail control.

    ``weight(t)`` must already include the Jacobian ``t``.
    """
    x, y, q = req.x, req.y, req.q
    delta = (x.x_dprime - y.x_dprime)[None, :]
    cache = {}

    def panel(u0):
        if u0 not in cache:
            u, w = composite_gl(np.array([u0, u0 + 1.0]), nodes_per_unit)
            g = np.empty(u.size)
            ge = np.empty(u.size)
            for i, ui in enumerate(u):
                t = np.exp(ui)
                v, e = xalpha_heat_values(t, req.a.a, req.alpha, x.x_prime, y.x_prime, delta, q)
                wt = weight(t)
                g[i] = wt * v[0]
                ge[i] = abs(wt) * e[0]
            cache[u0] = (float(w @ g), float(w @ np.abs(g)),
                         float(w @ ge), float(np.max(np.maximum(np.abs(g) - 3 * ge, 0.0))))
        return cache[u0]

    lo = float(np.floor(window[0]))
    hi = float(np.ceil(window[1]))
    for _ in range(4 * _MAX_EXTEND):
        starts = np.arange(lo, hi, 1.0)
        parts = [panel(float(u0)) for u0 in starts]
        value = sum(p[0] for p in parts)
        mass = sum(p[1] for p in parts)
        err = sum(p[2] for p in parts)
        scale = max(abs(value), 1e-3 * mass)
        target = req.q.rel_tol * scale

        def tail(outer, inner):
            if outer[3] == 0.0:
                return 0.0
            if inner[3] <= outer[3]:
                return np.inf
            return outer[3] / np.log(inner[3] / outer[3])

        t_lo = tail(parts[0], parts[1])
        t_hi = tail(parts[-1], parts[-2])
        grow_lo = t_lo > target
        grow_hi = t_hi > target
        if not (grow_lo or grow_hi):
            return RieszKernelValue(float(value), float(err + t_lo + t_hi), (lo, hi))
        if grow_lo:
            if lo < window[0] - 2 * _MAX_EXTEND:
                break
            lo -= 2.0
        if grow_hi:
            if hi > window[1] + 2 * _MAX_EXTEND:
                break
            hi += 2.0
    raise AccuracyNotMet("t-integral tails did not fall below rel_tol")


def _check_request(req: RieszKernelRequest, allow_diagonal: bool = False) -> float:
    k = req.k
    Q = req.x.dims.Q
    if req.a.is_zero and k >= Q:
        raise DivergentIntegral("zero drift with k >= Q: the t-integral diverges at infinity")
    d = grushin_distance(req.x, req.y)
    if d == 0.0 and not allow_diagonal:
        raise DiagonalSingularity("the Riesz kernel is singular on the diagonal")
    return d


def riesz_kernel_detailed(req: RieszKernelRequest, shift: float = 0.0) -> RieszKernelValue:
    """Kernel of ``X^alpha (shift I + G_a)^{-k/2}`` with error estimate and final window."""
    d = _check_request(req)
    k = req.k
    c = 1.0 / gamma_fn(k / 2)

    def weight(t):
        return c * t ** (k / 2) * np.exp(-shift * t)

    if req.q.t_sub is not None:
        lo, hi, per_unit = req.q.t_sub
    else:
        (lo, hi), per_unit = _default_window(req, d), 16
    return _t_integral(req, weight, (lo, hi), int(per_unit))


def riesz_kernel(req: RieszKernelRequest) -> float:
    """``R_{alpha,a}(x, y) = Gamma(k/2)^{-1} int_0^inf t^{k/2-1} X^alpha H_{t,a}(x, y) dt``.

    Raises
    ------
    DiagonalSingularity
        If ``x == y``.
    DivergentIntegral
        If ``a = 0`` and ``k >= Q``.
    """
    return riesz_kernel_detailed(req).value


def regularized_riesz_kernel(req: RieszKernelRequest, p: RegularizationParams) -> float:
    """Kernel of ``X^alpha (delta I + G_a)^{-k/2} (I + eps G_a)^{-N}``.

    Evaluated as ``int w(t) X^alpha H_{t,a} dt`` with
    ``w(t) = eps^{-N} exp(t) B_{eps,delta,k}(t) / (Gamma(N) Gamma(k/2))``. The
    diagonal is allowed when ``k < Q``.
    """
    k = req.k
    Q = req.x.dims.Q
    d = _check_request(req, allow_diagonal=k < Q)
    if d == 0.0 and k >= Q:
        raise DiagonalSingularity("regularized kernel is singular on the diagonal for k >= Q")
    N = p.order(Q)
    c = p.eps ** (-N) / (gamma_fn(N) * gamma_fn(k / 2))

    def weight(t):
        return c * t * _b_scaled(t, p.eps, p.delta, N, k)

    if req.q.t_sub is not None:
        lo, hi, per_unit = req.q.t_sub
    else:
        scale = max(d * d, N * p.eps)
        lo = np.log(1e-4 * scale)
        hi = max(np.log(50.0 / max(float(req.a.a @ req.a.a), 0.02)), lo + 4)
        per_unit = 16
    return _t_integral(req, weight, (lo, hi), int(per_unit)).value


def scalar_multiplier_gap(gamma: float, delta: float, s) -> np.ndarray:
    """``(delta + s)^gamma - s^gamma``, bounded by ``delta^gamma`` for ``gamma`` in (0, 1)."""
    if not 0 < gamma < 1 or not 0 < delta < 1:
        raise InvalidArgument("gamma and delta must lie in (0, 1)")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise InvalidArgument("s must be nonnegative")
    out = (delta + s) ** gamma - s ** gamma
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Bessel route (m = 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MuRule:
    """Gauss-Legendre rule in ``v = log(mu)``.

    ``[v_mid, v_hi]`` carries panels of width ``width``; the far left
    ``[v_lo, v_mid]``, where the integrand is a smooth function of ``mu``
    times the Jacobian ``mu``, gets ``coarse_panels`` wide panels.
    """

    v_lo: float = -36.0
    v_mid: float = -16.0
    v_hi: Optional[float] = None
    width: float = 1.25
    coarse_panels: int = 2
    per_panel: int = 8

    def build(self, n: int):
        v_hi = self.v_hi if self.v_hi is not None else float(np.log(40.0 / n + 5.0))
        nfine = max(1, int(np.ceil((v_hi - self.v_mid) / self.width)))
        edges = np.concatenate([np.linspace(self.v_lo, self.v_mid, self.coarse_panels + 1)[:-1],
                                np.linspace(self.v_mid, v_hi, nfine + 1)])
        v, w = composite_gl(edges, self.per_panel)
        mu = np.exp(v)
        return mu, w * mu


DEFAULT_MU_RULE = MuRule()


def _pmul(p: list, q: list) -> list:
    out = [0.0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def _padd(p: list, q: list) -> list:
    size = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0.0) + (q[i] if i < len(q) else 0.0) for i in range(size)]


def _u_polynomial(alpha: GrushinMultiIndex, a, xp, yp, ch, sh) -> list:
    """Coefficients ``pi_q`` of the ``X'`` prefactor as a polynomial in ``u = 1/t``.

    With ``lam = mu u`` the Mehler quantities become ``c = u ch`` and
    ``L_j = -u ell_j``; ``xp, yp`` have shape ``(P, n)`` and ``ch, sh`` shape ``(M,)``.
    """
    P = xp.shape[0]
    shape = (P, ch.size)
    F = [np.ones(shape)]
    for j in range(xp.shape[1]):
        r = int(alpha.alpha_prime[j])
        beta = int(alpha.beta[j])
        xj = xp[:, j:j + 1]
        if r == 0:
            if beta:
                F = [c * xj ** beta for c in F]
            continue
        ell = ch[None, :] * (xj - yp[:, j:j + 1]) + sh[None, :] * yp[:, j:j + 1]
        Lp = [0.0, -ell]
        cp = [0.0, np.broadcast_to(ch, shape)]
        p = [[np.ones(shape)], Lp]
        for rr in range(1, r):
            p.append(_padd(_pmul(Lp, p[rr]), [-rr * c for c in _pmul(cp, p[rr - 1])]))
        D = [0.0]
        for g in range(r + 1):
            E = [0.0]
            for i in range(min(g, beta) + 1):
                coef = comb(g, i) * _falling(beta, i)
                E = _padd(E, [coef * xj ** (beta - i) * c for c in p[g - i]])
            D = _padd(D, [comb(r, g) * (-a[j]) ** (r - g) * c for c in E])
        F = _pmul(F, D)
    return [np.broadcast_to(c, shape) for c in F]


def _kve_orders(orders: np.ndarray, z: np.ndarray) -> dict:
    """Scaled ``K_|nu|(z)`` for every requested order by upward recurrence."""
    absn = np.abs(orders)
    frac = absn - np.floor(absn)
    out = {}
    for f in np.unique(np.round(frac, 12)):
        sel = sorted({float(v) for v in absn if abs((v - np.floor(v)) - f) < 1e-9})
        top = int(round(max(sel) - f))
        if abs(f - 0.5) < 1e-12:
            k0 = np.sqrt(pi / (2 * z))
            k1 = k0 * (1 + 1 / z)
        else:
            k0 = kve(f, z)
            k1 = kve(f + 1, z) if top >= 1 else None
        seq = [k0, k1]
        for j in range(1, top):
            mu_j = f + j
            seq.append(seq[j - 1] + (2 * mu_j / z) * seq[j])
        for v in sel:
            out[v] = seq[int(round(v - f))]
    return out


def _t_closed_form(nu: float, logB, z, Ks: dict, pa: float):
    """``int_0^inf t^{nu-1} exp(-pa t - B/t) dt`` from precomputed scaled ``K_|nu|(z)``."""
    if pa > 0:
        return 2 * np.exp(0.5 * nu * (logB - np.log(pa)) - z) * Ks[float(abs(nu))]
    return gamma_fn(-nu) * np.exp(nu * logB)


def _cell_edges(deltas, cell):
    """Edges ``D -+ cell/2`` as one array plus the indices of each cell's ends.

    Lattice offsets share their edges, which halves the Bessel evaluations.
    """
    two = np.concatenate([deltas - 0.5 * cell, deltas + 0.5 * cell]) / (0.5 * cell)
    keys = np.round(two)
    if np.all(np.abs(two - keys) < 1e-9):
        uniq, inv = np.unique(keys, return_inverse=True)
        edges = uniq * (0.5 * cell)
    else:
        edges = np.concatenate([deltas - 0.5 * cell, deltas + 0.5 * cell])
        inv = np.arange(edges.size)
    D = deltas.size
    return edges, inv[:D], inv[D:]


def _fast_core(alpha, a, xp, yp, deltas, mu_rule, cell=None):
    """Body of :func:`riesz_kernel_fast` without the exact ``exp(-a.(x'+y'))`` factor.

    With ``cell = h`` the mean over ``[D - h/2, D + h/2]`` is returned instead
    of the value at ``D``. Since ``d/dB I_{nu+1}(B) = -I_nu(B)`` for
    ``I_nu(B) = int t^{nu-1} exp(-p t - B/t) dt``, the mean is
    ``(I_{nu+1}(B_lo) - I_{nu+1}(B_hi)) / (i mu h)``. Its rounding error grows
    like ``1/mu`` but the ``mu`` Jacobian cancels that, so no small-``mu``
    expansion is needed.
    """
    n = xp.shape[1]
    k = alpha.order
    pa = float(a @ a)
    B = int(alpha.alpha_dprime.sum())
    mu, wmu = mu_rule.build(n)
    ch = mu / np.tanh(2 * mu)
    sh = mu * np.tanh(mu)
    base = (mu / (2 * pi * np.sinh(2 * mu))) ** (n / 2) * (-1j * mu) ** B * wmu
    if cell is None:
        offs, shift = deltas, 0
    else:
        offs, lo, hi = _cell_edges(deltas, cell)
        shift = 1
        imh = (1j * mu * cell)[None, :, None]
    out = np.empty((xp.shape[0], deltas.size))
    chunk = max(1, 1_500_000 // (mu.size * offs.size))
    for p0 in range(0, xp.shape[0], chunk):
        X = xp[p0:p0 + chunk]
        Y = yp[p0:p0 + chunk]
        A = (0.5 * ch[None, :] * np.sum((X - Y) ** 2, axis=1)[:, None]
             + sh[None, :] * np.sum(X * Y, axis=1)[:, None])
        Bm = A[:, :, None] + 1j * mu[None, :, None] * offs[None, None, :]
        pis = _u_polynomial(alpha, a, X, Y, ch, sh)
        nus = np.array([k / 2 - 1 - n / 2 - B - q for q in range(len(pis))]) + shift
        logB = np.log(Bm)
        z = 2 * np.sqrt(pa) * np.sqrt(Bm) if pa > 0 else None
        Ks = _kve_orders(nus, z) if pa > 0 else {}
        acc = np.zeros(Bm.shape, dtype=complex)
        for q, piq in enumerate(pis):
            acc += piq[:, :, None] * _t_closed_form(nus[q], logB, z, Ks, pa)
        if cell is not None:
            acc = (acc[:, :, lo] - acc[:, :, hi]) / imh
        out[p0:p0 + chunk] = np.einsum("m,pmd->pd", base, acc).real / (pi * gamma_fn(k / 2))
    return out


# offsets (relative to the local length scale) for the coincident-row limit
_COINCIDENT_ETA = 0.02


def _coincident_core(alpha, a, xp, deltas, mu_rule, cell=None):
    """Limit ``y' -> x'`` of :func:`_fast_core` for one point ``xp`` (shape ``(n,)``).

    The closed-form ``t`` integral is not uniform in ``|x'-y'|``: near
    ``mu ~ |x'-y'|^2/|x''-y''|`` it carries mass that is lost at ``y' = x'``.
    The kernel itself is smooth in ``y'`` off the diagonal, so the value is
    recovered from symmetric offsets ``+-eta, +-2 eta`` along ``x'_1`` by
    Richardson extrapolation, with ``eta`` small against ``|x''-y''|``,
    ``1/|a|`` and ``1``. For cell means the gap is measured from the nearest
    cell edge, and the cell containing ``0`` is left undefined.
    """
    out = np.full(deltas.size, np.nan)
    an = float(np.linalg.norm(a))
    gap = np.abs(deltas) - (0.5 * cell if cell is not None else 0.0)
    scale = np.minimum(np.maximum(gap, 0.0), 1.0)
    if an > 0:
        scale = np.minimum(scale, 1.0 / an)
    nz = scale > 0
    if not np.any(nz):
        return out
    # bucket offsets by octave so each call shares one eta
    octave = np.full(deltas.size, np.iinfo(np.int64).min)
    octave[nz] = np.floor(np.log2(scale[nz])).astype(np.int64)
    e1 = np.zeros_like(xp)
    e1[0] = 1.0
    # the mu-spike sits near (eta/|x''-y''|)^2 |x''-y''|, so resolve further left and finer
    fine = replace(mu_rule, v_mid=min(mu_rule.v_mid, -24.0), width=mu_rule.width / 2)
    for o in np.unique(octave[nz]):
        sel = octave == o
        eta = _COINCIDENT_ETA * 2.0 ** o
        Y = np.stack([xp + s * eta * e1 for s in (1, -1, 2, -2)])
        X = np.repeat(xp[None, :], 4, axis=0)
        # strip the exact y'-dependence of the drift factor before extrapolating
        V = _fast_core(alpha, a, X, Y, deltas[sel], fine, cell) * np.exp(-(Y - xp) @ a)[:, None]
        s1 = 0.5 * (V[0] + V[1])
        s2 = 0.5 * (V[2] + V[3])
        out[sel] = (4 * s1 - s2) / 3
    return out


def riesz_kernel_fast(alpha: GrushinMultiIndex, a, xp, yp, deltas,
                      mu_rule: MuRule = DEFAULT_MU_RULE, cell: Optional[float] = None) -> np.ndarray:
    """``R_{alpha,a}`` for ``m = 1`` at pairs ``(x'_p, y'_p)`` and offsets ``x'' - y''``.

    Parameters
    ----------
    xp, yp : array_like, shape (P, n)
    deltas : array_like, shape (D,)
    cell : float, optional
        If given, return the mean of the kernel over ``[D - cell/2, D + cell/2]``
        in ``x'' - y''`` instead of its value at ``D``. Needs ``a != 0``.

    Returns
    -------
    ndarray, shape (P, D)

    Notes
    -----
    With ``mu = lam t`` and ``u = 1/t`` the Mehler kernel is
    ``(mu u / (2 pi sinh 2 mu))^{n/2} exp(-u A(mu))`` and the ``t`` integral of
    each power ``u^q`` has the closed form
    ``int t^{nu-1} exp(-p t - B/t) dt = 2 (B/p)^{nu/2} K_nu(2 sqrt(p B))``
    with ``B = A + i mu (x''-y'')`` and ``p = |a|^2``; for ``p = 0`` it is
    ``Gamma(-nu) B^nu``.
    """
    xp = np.atleast_2d(np.asarray(xp, dtype=float))
    yp = np.atleast_2d(np.asarray(yp, dtype=float))
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    a = np.asarray(a, dtype=float)
    n = xp.shape[1]
    if alpha.alpha_dprime.shape[1] != 1:
        raise InvalidArgument("the Bessel route needs m = 1")
    if float(a @ a) == 0.0 and alpha.order >= n + 2:
        raise DivergentIntegral("zero drift with k >= Q")
    if cell is not None and (not cell > 0 or float(a @ a) == 0.0):
        raise InvalidArgument("cell means need cell > 0 and a nonzero drift")
    coincident = np.all(np.abs(xp - yp) <= 1e-12 * (1 + np.abs(xp)), axis=1)
    out = np.empty((xp.shape[0], deltas.size))
    rest = ~coincident
    if np.any(rest):
        out[rest] = _fast_core(alpha, a, xp[rest], yp[rest], deltas, mu_rule, cell)
    for p_ in np.nonzero(coincident)[0]:
        out[p_] = _coincident_core(alpha, a, xp[p_], deltas, mu_rule, cell)
    return out * np.exp(-(xp + yp) @ a)[:, None]


# ---------------------------------------------------------------------------
# application to sampled functions
# ---------------------------------------------------------------------------

def singular_axis(alpha: GrushinMultiIndex) -> int:
    """Grid axis along which the diagonal cell is displaced."""
    nz = np.nonzero(alpha.alpha_prime)[0]
    return int(nz[0]) if nz.size else alpha.alpha_prime.size


def _kernel_block(alpha, a, xp_rows, yp_rows, deltas, q, mu_rule, cell=None):
    """Kernel values ``K[p, l]`` for pairs and ``x''``-offsets (``deltas`` shape ``(D, m)``).

    ``cell`` (``m = 1`` only) switches to means over ``x''`` cells of that width.
    """
    m = deltas.shape[1]
    if m == 1:
        return riesz_kernel_fast(alpha, a.a, xp_rows, yp_rows, deltas[:, 0], mu_rule, cell)
    out = np.empty((xp_rows.shape[0], deltas.shape[0]))
    for p_, (xp, yp) in enumerate(zip(xp_rows, yp_rows)):
        for l_, d in enumerate(deltas):
            x = GrushinPoint(xp, d)
            y = GrushinPoint(yp, np.zeros(m))
            if x == y:
                out[p_, l_] = np.nan
            else:
                out[p_, l_] = riesz_kernel(RieszKernelRequest(alpha, a, x, y, q))
    return out


def _diagonal_value(alpha, a, grid, xp, q, mu_rule) -> float:
    """Principal-value surrogate for the cell ``y = x``."""
    if alpha.order % 2 == 1:
        return 0.0
    ax = singular_axis(alpha)
    n = grid.dims.n
    yp = np.array(xp, dtype=float)
    d = np.zeros((1, grid.dims.m))
    if ax < n:
        yp[ax] += 0.5 * grid.spacing[ax]
    else:
        d[0, ax - n] = -0.5 * grid.spacing[ax]
    return float(_kernel_block(alpha, a, xp[None, :], yp[None, :], d, q, mu_rule)[0, 0])


def _cell_width(grid, average: bool):
    return float(grid.spacing[grid.dims.n]) if average and grid.dims.m == 1 else None


def riesz_table_row(alpha: GrushinMultiIndex, a: Drift, grid, q: QuadratureSpec = DEFAULT_SPEC,
                    mu_rule: MuRule = DEFAULT_MU_RULE, average: bool = True):
    """Row builder for :func:`build_table`: ``K(x'_i, y'_j, x''-y'')`` on the lattice.

    For ``m = 1`` only offsets ``>= 0`` are computed; negative offsets follow
    from ``K(.., -D) = (-1)^{|alpha''|} K(.., D)``. With ``average`` (``m = 1``)
    each entry is the kernel mean over its ``x''`` cell, see :func:`apply_riesz`.
    """
    cell = _cell_width(grid, average)
    xps = grid.prime_points()
    n, m = grid.dims.n, grid.dims.m
    Nd = grid.dprime_shape
    sign = -1.0 if int(alpha.alpha_dprime.sum()) % 2 else 1.0

    def table_row(i):
        xp = xps[i]
        X = np.repeat(xp[None, :], xps.shape[0], axis=0)
        if m == 1:
            N1 = Nd[0]
            half = grid.spacing[n] * np.arange(N1)
            with np.errstate(divide="ignore", invalid="ignore"):
                K = _kernel_block(alpha, a, X, xps, half[:, None], q, mu_rule, cell)
            full = np.concatenate([sign * K[:, :0:-1], K], axis=1)
            center = N1 - 1
        else:
            deltas = dprime_offsets(grid)
            full = _kernel_block(alpha, a, X, xps, deltas, q, mu_rule)
            center = deltas.shape[0] // 2
        full[i, center] = _diagonal_value(alpha, a, grid, xp, q, mu_rule)
        return full.reshape((xps.shape[0],) + tuple(2 * N - 1 for N in Nd))

    return table_row


def _check_apply(f: SampledFunction, alpha: GrushinMultiIndex, a: Drift):
    dims = f.dims
    if a.a.size != dims.n:
        raise InvalidArgument("drift length does not match n")
    if alpha.alpha_prime.size != dims.n or alpha.alpha_dprime.shape[1] != dims.m:
        raise InvalidArgument("multi-index does not match (n, m)")
    if alpha.order < 1:
        raise InvalidArgument("Riesz transforms need order k >= 1")
    if a.is_zero:
        raise InvalidArgument("apply_riesz needs a nonzero drift")


def riesz_table(grid, alpha: GrushinMultiIndex, a: Drift, q: QuadratureSpec = DEFAULT_SPEC,
                mu_rule: MuRule = DEFAULT_MU_RULE, average: bool = True) -> np.ndarray:
    """Lattice table of ``R_{alpha,a}`` on ``grid``, diagonal surrogate included."""
    return build_table(grid, riesz_table_row(alpha, a, grid, q, mu_rule, average))


def apply_riesz(f: SampledFunction, alpha: GrushinMultiIndex, a: Drift,
                q: QuadratureSpec = DEFAULT_SPEC, mu_rule: MuRule = DEFAULT_MU_RULE,
                table: Optional[np.ndarray] = None, average: bool = True) -> SampledFunction:
    """``x -> sum_y R_{alpha,a}(x, y) f(y) exp(2 a.y') dV`` on the grid of ``f``.

    The diagonal cell uses the displaced-point surrogate of
    :func:`_diagonal_value`: zero for odd ``|alpha|``, the kernel half a cell
    away along :func:`singular_axis` otherwise. A precomputed ``table`` from
    :func:`riesz_table` on the same grid may be passed to skip kernel
    evaluation.

    With ``average`` (the default, used for ``m = 1``) the off-diagonal
    weights are kernel means over the ``x''`` extent of each cell rather than
    point values. Near ``x' = 0`` the kernel varies in ``x''`` on the scale
    ``|x'-y'| (|x'|+|y'|)``, far below the grid step, and point values there
    make the rows next to ``x' = 0`` grow like ``1/h`` under refinement.
    ``average=False`` gives the plain point-value sum.
    """
    _check_apply(f, alpha, a)
    if table is None:
        table = riesz_table(f.grid, alpha, a, q, mu_rule, average)
    return SampledFunction(f.grid, convolve_table(f, a, table))


def riesz_at_points(f: SampledFunction, alpha: GrushinMultiIndex, a: Drift,
                    points: Sequence[GrushinPoint], q: QuadratureSpec = DEFAULT_SPEC,
                    mu_rule: MuRule = DEFAULT_MU_RULE, average: bool = True) -> np.ndarray:
    """The sum of :func:`apply_riesz` evaluated only at the given grid nodes."""
    _check_apply(f, alpha, a)
    grid = f.grid
    cell = _cell_width(grid, average)
    n = grid.dims.n
    xps = grid.prime_points()
    gvals = (f.masked_values() * f.measure_weights(a)).reshape((xps.shape[0], -1))
    ydp = np.stack([g.ravel() for g in np.meshgrid(*grid.axes()[n:], indexing="ij")], axis=-1)
    out = []
    for x in points:
        idx = grid.index_of(x)
        i = int(np.ravel_multi_index(idx[:n], grid.prime_shape))
        s = int(np.ravel_multi_index(idx[n:], grid.dprime_shape))
        deltas = x.x_dprime[None, :] - ydp
        X = np.repeat(x.x_prime[None, :], xps.shape[0], axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            K = _kernel_block(alpha, a, X, xps, deltas, q, mu_rule, cell)
        K[i, s] = _diagonal_value(alpha, a, grid, x.x_prime, q, mu_rule)
        out.append(float(np.sum(K * gvals)))
    return np.array(out)
