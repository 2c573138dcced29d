"""Weighted norms, empirical operator-norm sweeps and the weak-(1,1) blow-up experiment.

All norms are taken with respect to ``dmu_a = exp(2 a.x') dx`` on the valid
cells of a :class:`SampledFunction`. Norm sweeps only ever produce lower
bounds for operator norms: a ratio ``||R f||_p / ||f||_p`` for finitely many
test functions ``f``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Dimensions, Drift, GrushinMultiIndex, GrushinPoint
from .errors import AccuracyNotMet, GrushinError, InvalidArgument
from .euclid import DriftLimitConfig, bump, conjugated_grid
from .grids import Grid, SampledFunction
from .parallel import parallel_map
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .riesz import DEFAULT_MU_RULE, MuRule, apply_riesz, riesz_table

__all__ = [
    "SampledFunction", "lp_norm", "weak_quasinorm", "TestFamily", "NormReport",
    "norm_sweep", "BlowupReport", "weak11_blowup_experiment", "default_grid",
]

# levels below this fraction of max|f| cannot move the weak quasinorm visibly
_WEAK_FLOOR = 1e-12


def default_grid(dims: Dimensions = Dimensions(1, 1), npts: int = 64) -> Grid:
    """``npts`` cell-centred points per axis on ``[-6, 6]``."""
    return Grid.centered(dims, -6.0, 6.0, npts)


def lp_norm(f: SampledFunction, p: float, a: Optional[Drift] = None) -> float:
    """``(sum |f|^p exp(2 a.y') dV)^{1/p}`` over the valid cells.

    ``p = inf`` gives the (measure independent) maximum of ``|f|``.
    """
    if not p >= 1:
        raise InvalidArgument("p must be >= 1")
    v = np.abs(f.masked_values())
    if np.isinf(p):
        return float(v.max(initial=0.0))
    w = f.measure_weights(a)
    # factor out the maximum so large p does not overflow
    top = v.max(initial=0.0)
    if top == 0.0:
        return 0.0
    return float(top * np.sum((v / top) ** p * w) ** (1.0 / p))


def weak_quasinorm(f: SampledFunction, a: Optional[Drift] = None, levels: int = 64,
                   refine: bool = True) -> float:
    """``sup_s s mu_a{|f| > s}`` over a geometric grid of ``levels`` values of ``s``.

    The grid spans ``[max|f| 1e-12, max|f|]`` (or down to the smallest nonzero
    ``|f|`` if that is larger). With ``refine`` the bracket around the best
    level is then scanned exactly: inside it ``s mu{|f| > s}`` is maximised as
    ``s`` increases to one of the sampled values, so every sampled value in the
    bracket is tried as a left limit.
    """
    if levels < 2:
        raise InvalidArgument("levels must be >= 2")
    v = np.abs(f.masked_values()).ravel()
    w = np.broadcast_to(f.measure_weights(a), f.grid.shape).ravel()
    pos = v > 0
    if not np.any(pos):
        return 0.0
    v, w = v[pos], w[pos]
    order = np.argsort(-v, kind="stable")
    v, w = v[order], w[order]
    mass_ge = np.cumsum(w)  # mass of {|f| >= v[j]}
    top = v[0]
    lo = max(v[-1], top * _WEAK_FLOOR)
    s = np.geomspace(lo, top, levels) if lo < top else np.array([top])
    # mu{|f| > s}: cells whose value exceeds s strictly
    cnt = np.searchsorted(-v, -s, side="left")
    mass_gt = np.where(cnt > 0, mass_ge[np.maximum(cnt - 1, 0)], 0.0)
    vals = s * mass_gt
    best = int(np.argmax(vals))
    out = float(vals[best])
    # a constant |f| collapses the grid to s = max|f|; the scan recovers the left limit
    if refine:
        s_lo = s[max(best - 1, 0)]
        s_hi = s[min(best + 1, s.size - 1)]
        inside = (v >= s_lo) & (v <= s_hi)
        if np.any(inside):
            # s just below v[j] sees every cell with value >= v[j]
            idx = np.nonzero(inside)[0]
            last = np.searchsorted(-v, -v[idx], side="right") - 1
            out = max(out, float(np.max(v[idx] * mass_ge[last])))
    return out


# ---------------------------------------------------------------------------
# norm sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFamily:
    """Test functions for :func:`norm_sweep`.

    Members are the Gaussian ``exp(-|z|^2 / (2 width^2))`` translated to
    ``c e1'`` for each ``c`` in ``offsets`` and the same Gaussian pulled back
    by the dilation ``delta_s`` for each ``s`` in ``dilations``.
    """

    __test__ = False  # not a pytest class

    offsets: tuple = (-2.0, 2.0)
    dilations: tuple = (0.5, 1.0, 2.0)
    width: float = 1.0

    def members(self, grid: Grid) -> list:
        n = grid.dims.n
        mesh = grid.mesh()
        out = []
        for c in self.offsets:
            z2 = (mesh[0] - c) ** 2 + sum(g ** 2 for g in mesh[1:])
            out.append((f"offset {c:g}", SampledFunction(grid, np.exp(-z2 / (2 * self.width ** 2)))))
        for s in self.dilations:
            z2 = sum((s * g) ** 2 for g in mesh[:n]) + sum((s * s * g) ** 2 for g in mesh[n:])
            out.append((f"dilation {s:g}", SampledFunction(grid, np.exp(-z2 / (2 * self.width ** 2)))))
        return out

    def describe(self) -> dict:
        return {"profile": "gaussian", "offsets": list(self.offsets),
                "dilations": list(self.dilations), "width": self.width}


@dataclass
class NormReport:
    """Lower-bound estimates of ``||R_{alpha, |a| e1}||_{p -> p}``.

    Attributes
    ----------
    estimates
        Per drift magnitude, the maximum ratio over the family on the finest level.
    level_estimates
        ``level_estimates[i][j]``: the estimate for drift ``i`` on level ``j``.
    matched_estimates
        Per drift magnitude, the ratio for the dilation-matched family on the
        grid dilated by ``1/|a|`` (``None`` if not requested).
    flags
        Family members whose evaluation failed, with the reason.
    """

    alpha: GrushinMultiIndex
    p: float
    drift_magnitudes: list
    estimates: list
    levels: list
    level_estimates: list
    family: dict
    member_ratios: list = field(default_factory=list)
    matched_estimates: Optional[list] = None
    flags: list = field(default_factory=list)

    def stability(self) -> list:
        """Per drift magnitude, ``max/min`` of the estimates across levels."""
        out = []
        for row in self.level_estimates:
            r = [v for v in row if np.isfinite(v) and v > 0]
            out.append(max(r) / min(r) if r else float("nan"))
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha"] = {"alpha_prime": self.alpha.alpha_prime.tolist(),
                      "alpha_dprime": self.alpha.alpha_dprime.tolist()}
        d["stability"] = self.stability()
        return d


def _ratio(f: SampledFunction, alpha, drift, p, q, mu_rule, table):
    Rf = apply_riesz(f, alpha, drift, q, mu_rule, table=table)
    return lp_norm(Rf, p, drift) / lp_norm(f, p, drift)


def _family_ratios(grid, members, alpha, drift, p, q, mu_rule):
    """Ratios for every member on one grid; the kernel table is shared."""
    try:
        table = riesz_table(grid, alpha, drift, q, mu_rule)
    except (AccuracyNotMet, ArithmeticError) as exc:
        return [float("nan")] * len(members), [f"table: {exc}"]
    ratios, flags = [], []
    for name, f in members:
        try:
            ratios.append(_ratio(f, alpha, drift, p, q, mu_rule, table))
        except GrushinError as exc:
            ratios.append(float("nan"))
            flags.append(f"{name}: {exc}")
    return ratios, flags


def norm_sweep(alpha: GrushinMultiIndex, p: float, drift_magnitudes: Sequence[float],
               families: TestFamily = TestFamily(), levels: Sequence[int] = (32, 48, 64),
               matched: bool = True, lo: float = -6.0, hi: float = 6.0,
               q: QuadratureSpec = DEFAULT_SPEC,
               mu_rule: MuRule = DEFAULT_MU_RULE) -> NormReport:
    """Empirical ``L^p(dmu_a)`` operator-norm surrogate of ``R_{alpha,a}`` along ``a = |a| e1``.

    Parameters
    ----------
    levels
        Points per axis of the refinement levels, coarsest first; the last
        level gives ``estimates``.
    matched
        Also evaluate the dilation-matched family: the ``|a| = 1`` family
        pulled back by ``delta_{|a|}`` on the grid dilated by ``1/|a|``. The
        dilation identity makes these ratios independent of ``|a|``.
    """
    if not p > 1:
        raise InvalidArgument("norm sweeps need p > 1")
    mags = [float(s) for s in drift_magnitudes]
    if not mags or any(not s > 0 for s in mags):
        raise InvalidArgument("drift magnitudes must be positive")
    if not levels:
        raise InvalidArgument("at least one refinement level is needed")
    dims = Dimensions(alpha.alpha_prime.size, alpha.alpha_dprime.shape[1])

    def one_drift(s):
        drift = Drift.along_e1(s, dims.n)
        row, flags, ratios = [], [], []
        for npts in levels:
            grid = Grid.centered(dims, lo, hi, npts)
            r, fl = _family_ratios(grid, families.members(grid), alpha, drift, p, q, mu_rule)
            row.append(float(np.nanmax(r)) if np.any(np.isfinite(r)) else float("nan"))
            flags += [f"|a|={s:g}, {npts} pts, {x}" for x in fl]
            ratios = r
        match = None
        if matched:
            base = Grid.centered(dims, lo, hi, levels[-1])
            grid = base.dilated(1.0 / s)
            # f_s = f_1 o delta_s samples the |a| = 1 family on the dilated grid
            members = [(name, SampledFunction(grid, f.values))
                       for name, f in families.members(base)]
            r, fl = _family_ratios(grid, members, alpha, drift, p, q, mu_rule)
            match = float(np.nanmax(r)) if np.any(np.isfinite(r)) else float("nan")
            flags += [f"|a|={s:g}, matched, {x}" for x in fl]
        return row, ratios, match, flags

    results = parallel_map(one_drift, mags)
    return NormReport(
        alpha=alpha, p=float(p), drift_magnitudes=mags,
        estimates=[r[0][-1] for r in results],
        levels=list(levels),
        level_estimates=[r[0] for r in results],
        family=families.describe(),
        member_ratios=[r[1] for r in results],
        matched_estimates=[r[2] for r in results] if matched else None,
        flags=[x for r in results for x in r[3]],
    )


# ---------------------------------------------------------------------------
# weak-(1,1) blow-up experiment
# ---------------------------------------------------------------------------

@dataclass
class BlowupReport:
    """``W_k(R)`` along ``R_list`` for a fixed bump ``f``.

    ``W`` is computed on the Grushin side (drift ``e1/R``, conjugated grid);
    ``W_pulled`` is the same quotient after pulling the output back to the
    grid of ``f`` with the measure ``mu_{e1}``. The two agree up to rounding
    because the change of measure multiplies numerator and denominator by the
    same factor ``exp(2 xi'_1 / R) R^{n+m}``; ``identity_residual`` records
    ``max |W / W_pulled - 1|``.
    """

    k: int
    R_list: list
    W: list
    W_pulled: list
    f_l1: float
    bump_radius: float
    npts: int
    identity_residual: float

    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.W, self.W[1:]))

    def spread(self) -> float:
        return max(self.W) / min(self.W)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["increasing"] = self.increasing()
        d["spread"] = self.spread()
        return d


def weak11_blowup_experiment(k: int, R_list: Sequence[float] = (1.0, 0.5, 0.25),
                             bump_radius: float = 1.0, npts: int = 64,
                             weak_levels: int = 64,
                             q: QuadratureSpec = DEFAULT_SPEC,
                             mu_rule: MuRule = DEFAULT_MU_RULE) -> BlowupReport:
    """Weak-(1,1) quotients of ``X_1^k G_{e1/R}^{-k/2}`` on rescaled bumps (``n = m = 1``).

    For each ``R`` the bump ``f`` on the default grid is transported to
    ``g(y) = f((y - xi)/R)`` on the grid ``R x + xi``, the Grushin transform
    with drift ``e1/R`` is applied on that grid, and

    ``W_k(R) = weak_quasinorm(R g, mu_{e1/R}) / ||g||_{L^1(mu_{e1/R})}``.
    """
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    Rs = [float(r) for r in R_list]
    if any(not r > 0 for r in Rs) or any(b >= a for a, b in zip(Rs, Rs[1:])):
        raise InvalidArgument("R_list must be positive and strictly decreasing")
    dims = Dimensions(1, 1)
    grid = default_grid(dims, npts)
    f = bump(grid, bump_radius)
    e1 = Drift.along_e1(1.0, 1)
    cfg = DriftLimitConfig(int(k), R_list=tuple(Rs))
    xi = cfg.anchor(1, 1)
    alpha = GrushinMultiIndex.unit(0, dims, int(k))
    f_l1 = lp_norm(f, 1, e1)
    W, Wp = [], []
    for R in Rs:
        g = SampledFunction(conjugated_grid(grid, R, xi), f.values)
        drift = Drift.along_e1(1.0 / R, 1)
        h = apply_riesz(g, alpha, drift, q, mu_rule)
        W.append(weak_quasinorm(h, drift, weak_levels) / lp_norm(g, 1, drift))
        pulled = SampledFunction(grid, h.values)
        Wp.append(weak_quasinorm(pulled, e1, weak_levels) / f_l1)
    resid = max(abs(a / b - 1.0) for a, b in zip(W, Wp))
    return BlowupReport(k=int(k), R_list=Rs, W=W, W_pulled=Wp, f_l1=f_l1,
                        bump_radius=float(bump_radius), npts=int(npts),
                        identity_residual=float(resid))
