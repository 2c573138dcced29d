import numpy as np
import pytest
from hypothesis import given, strategies as st

from grushin_drift.core import Dimensions, Drift, GrushinMultiIndex
from grushin_drift.errors import InvalidArgument
from grushin_drift.grids import Grid, SampledFunction
from grushin_drift.lab import (TestFamily, default_grid, lp_norm, norm_sweep, weak11_blowup_experiment,
                               weak_quasinorm)
from grushin_drift.riesz import DEFAULT_MU_RULE, DEFAULT_SPEC, _diagonal_value

D11 = Dimensions(1, 1)


def _gauss(grid, w=1.0):
    return SampledFunction.from_callable(grid, lambda x, y: np.exp(-(x * x + y * y) / (2 * w * w)))


# norms

def test_lp_norm_single_cell():
    grid = Grid.centered(D11, -2.0, 2.0, 8)
    vals = np.zeros(grid.shape)
    vals[5, 2] = 1.0
    f = SampledFunction(grid, vals)
    a = Drift([0.7])
    y1 = grid.axis(0)[5]
    for p in (1.0, 2.0, 3.5):
        expect = (np.exp(2 * 0.7 * y1) * grid.cell_volume) ** (1 / p)
        assert lp_norm(f, p, a) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_lp_norm_gaussian(p):
    grid = Grid.centered(D11, -9.0, 9.0, 180)
    f = _gauss(grid)
    assert lp_norm(f, p) == pytest.approx((2 * np.pi / p) ** (1 / p), rel=1e-3)
    # with drift: int exp(-p |x|^2 / 2 + 2 x1) dx = (2 pi / p) exp(2 / p)
    expect = (2 * np.pi / p * np.exp(2 / p)) ** (1 / p)
    assert lp_norm(f, p, Drift([1.0])) == pytest.approx(expect, rel=1e-3)


def test_lp_norm_infinity_and_zero():
    grid = Grid.centered(D11, -1.0, 1.0, 4)
    f = SampledFunction(grid, np.arange(16.0).reshape(4, 4) - 20)
    assert lp_norm(f, np.inf) == 20.0
    assert lp_norm(f * 0.0, 2.0) == 0.0
    with pytest.raises(InvalidArgument):
        lp_norm(f, 0.5)


def test_lp_norm_large_p_no_overflow():
    grid = Grid.centered(D11, -1.0, 1.0, 4)
    f = SampledFunction(grid, np.full(grid.shape, 1e200))
    assert np.isfinite(lp_norm(f, 10.0))


def test_lp_norm_monotone_in_truncation(rng):
    grid = Grid.centered(D11, -3.0, 3.0, 16)
    f = SampledFunction(grid, rng.normal(size=grid.shape))
    X, Y = grid.mesh()
    prev = np.inf
    for r in (4.0, 2.0, 1.0, 0.5):
        g = f.with_values(f.values, (np.abs(X) < r) & (np.abs(Y) < r))
        val = lp_norm(g, 1.5, Drift([0.3]))
        assert val <= prev
        prev = val


def test_weak_indicator():
    grid = Grid.centered(D11, -2.0, 2.0, 20)
    X, Y = grid.mesh()
    E = (X ** 2 + Y ** 2) < 1
    c = 3.0
    f = SampledFunction(grid, c * E)
    a = Drift([0.5])
    muE = float(np.sum(f.measure_weights(a)[E]))
    assert weak_quasinorm(f, a) == pytest.approx(c * muE, rel=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(-1.0, 1.0))
def test_weak_below_strong(seed, a1):
    rng = np.random.default_rng(seed)
    grid = Grid.centered(D11, -2.0, 2.0, 10)
    f = SampledFunction(grid, rng.standard_cauchy(size=grid.shape))
    a = Drift([a1])
    assert weak_quasinorm(f, a) <= lp_norm(f, 1, a) * (1 + 1e-12)


def test_weak_level_refinement(rng):
    grid = Grid.centered(D11, -4.0, 4.0, 48)
    X, Y = grid.mesh()
    f = SampledFunction(grid, 1 / (0.05 + X ** 2 + np.abs(Y)) + 0.1 * rng.normal(size=grid.shape))
    a = Drift([1.0])
    w64 = weak_quasinorm(f, a, 64, refine=False)
    w256 = weak_quasinorm(f, a, 256, refine=False)
    assert abs(w256 / w64 - 1) < 0.02
    # the exact scan of the best bracket can only improve the grid value
    assert weak_quasinorm(f, a, 64) >= w64


def test_weak_zero_and_invalid():
    grid = Grid.centered(D11, -1.0, 1.0, 4)
    f = SampledFunction(grid, np.zeros(grid.shape))
    assert weak_quasinorm(f) == 0.0
    with pytest.raises(InvalidArgument):
        weak_quasinorm(f, levels=1)


# norm sweeps

def test_family_members():
    grid = default_grid(D11, 16)
    fam = TestFamily()
    names = [n for n, _ in fam.members(grid)]
    assert names == ["offset -2", "offset 2", "dilation 0.5", "dilation 1", "dilation 2"]
    assert fam.describe()["profile"] == "gaussian"


def test_norm_sweep_report_shape():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    rep = norm_sweep(alpha, 2.0, [0.5, 2.0], TestFamily(offsets=(1.0,), dilations=(1.0,)),
                     levels=(10, 14), lo=-3, hi=3)
    assert rep.levels == [10, 14]
    assert len(rep.level_estimates) == 2 and all(len(r) == 2 for r in rep.level_estimates)
    assert rep.estimates == [r[-1] for r in rep.level_estimates]
    assert len(rep.matched_estimates) == 2
    assert all(np.isfinite(v) and v > 0 for v in rep.estimates + rep.matched_estimates)
    assert not rep.flags
    d = rep.to_dict()
    assert d["alpha"]["alpha_prime"] == [1]
    assert len(d["stability"]) == 2


def test_norm_sweep_monotone_in_family():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    kw = dict(levels=(12,), lo=-3, hi=3, matched=False)
    small = norm_sweep(alpha, 2.0, [1.0], TestFamily(offsets=(2.0,), dilations=()), **kw)
    big = norm_sweep(alpha, 2.0, [1.0], TestFamily(offsets=(2.0, -2.0), dilations=(1.0,)), **kw)
    assert big.estimates[0] >= small.estimates[0]


def test_norm_sweep_invalid():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    with pytest.raises(InvalidArgument):
        norm_sweep(alpha, 1.0, [1.0])
    with pytest.raises(InvalidArgument):
        norm_sweep(alpha, 2.0, [0.0])
    with pytest.raises(InvalidArgument):
        norm_sweep(alpha, 2.0, [])
    with pytest.raises(InvalidArgument):
        norm_sweep(alpha, 2.0, [1.0], levels=())


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, pytest.param(2, marks=pytest.mark.xfail(
    strict=True, reason="even-order diagonal surrogate weight grows like 1/h; "
                        "measured 5.62, 8.57, 10.99 at 32, 48, 64 points"))])
def test_norm_sweep_refinement_stable(k):
    alpha = GrushinMultiIndex.unit(0, D11, k)
    rep = norm_sweep(alpha, 2.0, [1.0], levels=(32, 48, 64), matched=False)
    assert all(np.isfinite(rep.level_estimates[0]))
    assert rep.stability()[0] < 1.2


def test_diagonal_surrogate_scaling():
    # half-cell displaced kernel ~ h^{-Q} times cell volume h^{n+m}: weight ~ 1/h for even order
    a = Drift([1.0])
    weights = []
    for npts in (32, 64):
        grid = default_grid(D11, npts)
        xp = grid.axis(0)[[npts // 2]]
        assert _diagonal_value(GrushinMultiIndex.unit(0, D11, 1), a, grid, xp, DEFAULT_SPEC, DEFAULT_MU_RULE) == 0.0
        v = _diagonal_value(GrushinMultiIndex.unit(0, D11, 2), a, grid, xp, DEFAULT_SPEC, DEFAULT_MU_RULE)
        weights.append(v * grid.cell_volume)
    assert weights[1] / weights[0] > 2


# blow-up experiment

def test_blowup_reproducible_and_identity():
    r1 = weak11_blowup_experiment(3, (1.0, 0.5), npts=12)
    r2 = weak11_blowup_experiment(3, (1.0, 0.5), npts=12)
    assert r1.W == r2.W and r1.W_pulled == r2.W_pulled
    # the change of measure multiplies both sides by exp(2 xi'_1/R) R^{n+m}
    assert r1.identity_residual < 1e-10
    d = r1.to_dict()
    assert set(d) >= {"W", "W_pulled", "increasing", "spread"}


def test_blowup_invalid():
    with pytest.raises(InvalidArgument):
        weak11_blowup_experiment(0)
    with pytest.raises(InvalidArgument):
        weak11_blowup_experiment(3, (0.5, 1.0))
