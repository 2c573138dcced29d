"""Grushin quasi-metric, ball-volume references and Monte-Carlo ball volumes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Drift, GrushinPoint, check_same_dims
from .errors import DegenerateEstimate, InvalidArgument

STRATA = 16


@dataclass(frozen=True)
class BallSpec:
    center: GrushinPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgument("radius must be positive")


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_err: float
    samples: int
    seed: int


def distance_arrays(xp, xd, yp, yd):
    """Vectorized quasi-metric; ``xp, yp`` have shape ``(..., n)`` and ``xd, yd`` ``(..., m)``."""
    xp, xd, yp, yd = (np.asarray(v, dtype=float) for v in (xp, xd, yp, yd))
    dp = np.linalg.norm(xp - yp, axis=-1)
    dd = np.linalg.norm(xd - yd, axis=-1)
    rad = np.linalg.norm(xp, axis=-1) + np.linalg.norm(yp, axis=-1)
    root = np.sqrt(dd)
    # rad = 0 forces x'' = y'' in the first regime; the second gives the same value
    first = (root <= rad) & (rad > 0)
    safe = np.where(first, rad, 1.0)
    return np.where(first, dp + np.where(first, dd / safe, 0.0), dp + root)


def grushin_distance(x: GrushinPoint, y: GrushinPoint) -> float:
    """Quasi-metric ``d(x, y)``.

    ``|x'-y'| + |x''-y''| / (|x'|+|y'|)`` when ``|x''-y''|^{1/2} <= |x'|+|y'|``,
    otherwise ``|x'-y'| + |x''-y''|^{1/2}``.
    """
    check_same_dims(x, y)
    return float(distance_arrays(x.x_prime, x.x_dprime, y.x_prime, y.x_dprime))


def ball_volume_lebesgue_ref(x: GrushinPoint, r: float) -> float:
    """Comparison quantity ``r^{n+m} (r + |x'|)^m`` for the Lebesgue volume of ``B(x, r)``."""
    if not r > 0:
        raise InvalidArgument("radius must be positive")
    n, m = x.n, x.m
    return float(r ** (n + m) * (r + np.linalg.norm(x.x_prime)) ** m)


def ball_volume_mu_asymptotic(x: GrushinPoint, r: float, a: Drift) -> float:
    """Two-regime size of ``mu_a(B(x, r))`` with ``dmu_a = exp(2 a.x') dx``."""
    if not r > 0:
        raise InvalidArgument("radius must be positive")
    if a.is_zero:
        raise InvalidArgument("zero drift: use ball_volume_lebesgue_ref")
    n, m = x.n, x.m
    an = a.norm
    ax = float(a.a @ x.x_prime)
    xn = float(np.linalg.norm(x.x_prime))
    if r <= 1.0 / an:
        return float(np.exp(2 * ax) * r ** (n + m) * (r + xn) ** m)
    return float(an ** (-(n + 1) / 2 - m) * np.exp(2 * (ax + an * r))
                 * r ** ((n - 1) / 2) * (r + xn) ** m)


def bounding_box(x: GrushinPoint, r: float):
    """Axis-aligned box containing ``B(x, r)``: half-widths for ``y'`` and ``y''``."""
    xn = float(np.linalg.norm(x.x_prime))
    return r, r * (2 * xn + r) + r * r


def ball_volume_mu_mc(x: GrushinPoint, r: float, a: Drift, samples: int = 100_000,
                      seed: int = 0) -> VolumeEstimate:
    """Monte-Carlo estimate of ``mu_a(B(x, r))`` by weighted rejection sampling.

    Samples are uniform on the bounding box of :func:`bounding_box`. When
    ``|a| r > 2`` the box is split into 16 strata along the ``a`` direction of
    ``y'`` (after rotating ``a`` onto the first axis), each with its own seeded
    stream. A pilot tenth of the samples is spread evenly over the strata; the
    rest follows the Neyman allocation ``n_s ~ V_s sigma_s`` estimated from the
    pilot, which puts the samples where the weight ``exp(2 a.y')`` is large.
    """
    if samples < 10_000:
        raise InvalidArgument("need at least 1e4 samples")
    if not r > 0:
        raise InvalidArgument("radius must be positive")
    n, m = x.n, x.m
    if a.a.size != n:
        raise InvalidArgument("drift length does not match n")
    hp, hd = bounding_box(x, r)
    # orthonormal frame whose first axis is a/|a|; the box is rotation invariant in y'
    frame = np.eye(n)
    if not a.is_zero:
        M = np.column_stack([a.a / a.norm, np.eye(n)])
        frame, _ = np.linalg.qr(M)
        frame = frame[:, :n] * np.sign(frame[:, 0] @ a.a)
    strata = STRATA if a.norm * r > 2 else 1
    edges = np.linspace(-hp, hp, strata + 1)
    rngs = [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(strata)]
    vols = np.diff(edges) * (2 * hp) ** (n - 1) * (2 * hd) ** m

    def draw(s, count):
        rng = rngs[s]
        zp = rng.uniform(-hp, hp, size=(count, n))
        zp[:, 0] = rng.uniform(edges[s], edges[s + 1], size=count)
        yp = x.x_prime + zp @ frame.T
        yd = x.x_dprime + rng.uniform(-hd, hd, size=(count, m))
        inside = distance_arrays(x.x_prime, x.x_dprime, yp, yd) < r
        return np.where(inside, np.exp(2 * (yp @ a.a)), 0.0)

    if strata == 1:
        w = [draw(0, samples)]
    else:
        pilot = samples // (10 * strata)
        w = [draw(s, pilot) for s in range(strata)]
        score = vols * np.array([v.std(ddof=1) for v in w])
        if not score.sum() > 0:
            score = np.ones(strata)
        rest = samples - pilot * strata
        extra = np.floor(rest * score / score.sum()).astype(int)
        extra[np.argmax(score)] += rest - extra.sum()
        w = [np.concatenate([v, draw(s, int(e))]) if e > 0 else v
             for s, (v, e) in enumerate(zip(w, extra))]
    total = float(sum(V * v.mean() for V, v in zip(vols, w)))
    var = float(sum(V * V * v.var(ddof=1) / v.size for V, v in zip(vols, w)))
    if total <= 0:
        raise DegenerateEstimate("no sample fell inside the ball")
    return VolumeEstimate(total, float(np.sqrt(var)), int(sum(v.size for v in w)), int(seed))
