import numpy as np
import pytest
from hypothesis import given, strategies as st

from grushin_drift.core import (Dimensions, Drift, GrushinMultiIndex, GrushinPoint, dilate,
                                rotate, rotate_drift)
from grushin_drift.errors import DiagonalSingularity, DivergentIntegral, InvalidArgument
from grushin_drift.grids import Grid, SampledFunction
from grushin_drift.lab import lp_norm
from grushin_drift.quadrature import QuadratureSpec, gl_interval
from grushin_drift.riesz import (RegularizationParams, RieszKernelRequest, apply_riesz,
                                 b_eps_delta, regularized_riesz_kernel, riesz_at_points,
                                 riesz_kernel, riesz_kernel_detailed, riesz_kernel_fast,
                                 riesz_table, scalar_multiplier_gap)

D11 = Dimensions(1, 1)
D21 = Dimensions(2, 1)


def _req(alpha, a, x, y, q=QuadratureSpec()):
    return RieszKernelRequest(alpha, a, x, y, q)


def _fast(alpha, a, x, y):
    return riesz_kernel_fast(alpha, a.a, x.x_prime, y.x_prime, x.x_dprime - y.x_dprime)[0, 0]


ALPHAS = [
    GrushinMultiIndex([1], [[0]]),
    GrushinMultiIndex([2], [[0]]),
    GrushinMultiIndex([3], [[0]]),
    GrushinMultiIndex([0], [[1]]),
    GrushinMultiIndex([1], [[1]]),
]


@pytest.mark.parametrize("alpha", ALPHAS, ids=lambda a: repr(a))
@pytest.mark.parametrize("x,y", [((0.4, 0.3), (-0.5, -0.2)), ((1.2, -0.4), (0.3, 0.9)),
                                 ((-0.2, 0.0), (0.6, 0.05))])
def test_dual_route_generic(alpha, x, y):
    # t-quadrature over the lam integral against the Bessel closed form
    a = Drift([0.8])
    X, Y = GrushinPoint([x[0]], [x[1]]), GrushinPoint([y[0]], [y[1]])
    assert riesz_kernel(_req(alpha, a, X, Y)) == pytest.approx(_fast(alpha, a, X, Y), rel=1e-7)


@pytest.mark.parametrize("alpha", ALPHAS, ids=lambda a: repr(a))
@pytest.mark.parametrize("xp,dd", [(0.7, 0.6), (-1.1, 0.2), (0.3, -1.5)])
def test_dual_route_coincident_rows(alpha, xp, dd):
    # x' = y' goes through the extrapolated limit on the Bessel side
    a = Drift([0.8])
    X, Y = GrushinPoint([xp], [dd]), GrushinPoint([xp], [0.0])
    A = riesz_kernel(_req(alpha, a, X, Y))
    B = _fast(alpha, a, X, Y)
    assert abs(A - B) <= 2e-5 * abs(A) + 1e-9


@pytest.mark.slow
def test_dual_route_at_origin_fibre():
    # x' = y' = 0: the lam integrand decays only like exp(-lam t)
    alpha = GrushinMultiIndex([1], [[0]])
    a = Drift([0.8])
    X, Y = GrushinPoint([0.0], [0.3]), GrushinPoint([0.0], [-0.4])
    assert riesz_kernel(_req(alpha, a, X, Y)) == pytest.approx(_fast(alpha, a, X, Y), rel=1e-6)


def test_dual_route_two_dimensional_prime():
    a = Drift([0.5, -0.4])
    X = GrushinPoint([0.3, -0.6], [0.4])
    Y = GrushinPoint([-0.2, 0.5], [-0.1])
    for alpha in (GrushinMultiIndex.unit(0, D21), GrushinMultiIndex.unit(1, D21, 2),
                  GrushinMultiIndex([1, 0], [[0], [1]])):
        assert riesz_kernel(_req(alpha, a, X, Y)) == pytest.approx(_fast(alpha, a, X, Y), rel=1e-7)


def test_dual_route_zero_drift():
    # k < Q with a = 0: Gamma-function branch on the Bessel side
    alpha = GrushinMultiIndex([1], [[0]])
    X, Y = GrushinPoint([0.4], [0.3]), GrushinPoint([-0.5], [-0.2])
    a = Drift.zero(1)
    assert riesz_kernel(_req(alpha, a, X, Y)) == pytest.approx(_fast(alpha, a, X, Y), rel=1e-6)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_dilation_covariance(k, s, rng):
    alpha = GrushinMultiIndex.unit(0, D11, k)
    for _ in range(3):
        x = GrushinPoint(rng.uniform(-1.5, 1.5, 1), rng.uniform(-1.5, 1.5, 1))
        y = GrushinPoint(rng.uniform(-1.5, 1.5, 1), rng.uniform(-1.5, 1.5, 1))
        lhs = riesz_kernel(_req(alpha, Drift.along_e1(s, 1), x, y))
        rhs = s ** 3 * riesz_kernel(_req(alpha, Drift.along_e1(1.0, 1), dilate(x, s), dilate(y, s)))
        assert lhs == pytest.approx(rhs, rel=1e-6)


def test_dilation_covariance_fixed_window():
    # the same u-window on both sides, so the nodes do not map onto each other
    q = QuadratureSpec(t_sub=(-9.0, 5.0, 16))
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    x, y = GrushinPoint([0.5], [0.2]), GrushinPoint([-0.3], [0.7])
    s = 2.0
    lhs = riesz_kernel(_req(alpha, Drift.along_e1(s, 1), x, y, q))
    rhs = s ** 3 * riesz_kernel(_req(alpha, Drift.along_e1(1.0, 1), dilate(x, s), dilate(y, s), q))
    assert lhs == pytest.approx(rhs, rel=1e-6)


@given(st.floats(0.3, 3.0), st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4))
def test_dilation_covariance_bessel_route(s, c):
    x, y = GrushinPoint([c[0]], [c[1]]), GrushinPoint([c[2]], [c[3]])
    if abs(c[0] - c[2]) < 1e-3:
        return
    alpha = GrushinMultiIndex([1], [[1]])
    lhs = _fast(alpha, Drift.along_e1(s, 1), x, y)
    rhs = s ** 3 * _fast(alpha, Drift.along_e1(1.0, 1), dilate(x, s), dilate(y, s))
    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-12)


def test_rotation_covariance(rng):
    a = Drift([0.8, -0.3])
    for _ in range(3):
        th = rng.uniform(0, 2 * np.pi)
        A = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        x = GrushinPoint(rng.uniform(-1.5, 1.5, 2), rng.uniform(-1.5, 1.5, 1))
        y = GrushinPoint(rng.uniform(-1.5, 1.5, 2), rng.uniform(-1.5, 1.5, 1))
        Aa, Ax, Ay = rotate_drift(a, A), rotate(x, A), rotate(y, A)
        rot = [riesz_kernel(_req(GrushinMultiIndex.unit(l, D21), Aa, Ax, Ay)) for l in range(2)]
        for j in range(2):
            lhs = riesz_kernel(_req(GrushinMultiIndex.unit(j, D21), a, x, y))
            assert lhs == pytest.approx(A[0, j] * rot[0] + A[1, j] * rot[1], rel=1e-6, abs=1e-12)


def test_tail_window_invariance():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    a = Drift([0.8])
    x, y = GrushinPoint([0.4], [0.3]), GrushinPoint([-0.5], [-0.2])
    base = riesz_kernel_detailed(_req(alpha, a, x, y))
    lo, hi = base.window
    wide = riesz_kernel_detailed(_req(alpha, a, x, y, QuadratureSpec(t_sub=(lo - 2, hi + 2, 16))))
    assert abs(wide.value - base.value) < 1e-8 * abs(base.value)
    assert base.est_error < 1e-6 * abs(base.value)


def test_kernel_errors():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    x = GrushinPoint([0.4], [0.3])
    with pytest.raises(DiagonalSingularity):
        riesz_kernel(_req(alpha, Drift([1.0]), x, x))
    with pytest.raises(DivergentIntegral):
        riesz_kernel(_req(GrushinMultiIndex.unit(0, D11, 3), Drift.zero(1), x, GrushinPoint([0.0], [0.0])))
    with pytest.raises(DivergentIntegral):
        riesz_kernel_fast(GrushinMultiIndex.unit(0, D11, 3), [0.0], [0.4], [0.0], [0.3])
    with pytest.raises(InvalidArgument):
        _req(GrushinMultiIndex.from_prime([0]), Drift([1.0]), x, GrushinPoint([0.0], [0.0]))
    with pytest.raises(InvalidArgument):
        _req(alpha, Drift([1.0, 0.0]), x, GrushinPoint([0.0], [0.0]))
    with pytest.raises(InvalidArgument):
        riesz_kernel_fast(GrushinMultiIndex([1], [[0, 0]]), [1.0], [0.4], [0.0], [0.3])


# regularization

@pytest.mark.parametrize("t", [0.01, 0.5, 3.0, 20.0])
@pytest.mark.parametrize("eps,delta", [(0.1, 0.1), (0.01, 0.3), (0.5, 0.001)])
def test_b_closed_form_N1_k2(t, eps, delta):
    p = RegularizationParams(eps, delta, N=1)
    exact = np.exp(-t) * (np.exp(-delta * t) - np.exp(-t / eps)) / (1 / eps - delta)
    assert b_eps_delta(t, p, 2) == pytest.approx(exact, rel=1e-8)


def test_b_vanishes_at_zero():
    p = RegularizationParams(0.1, 0.1)
    vals = [b_eps_delta(t, p, 1) for t in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_b_termwise_bound(k, N):
    from math import gamma
    p = RegularizationParams(0.05, 0.2, N=N)
    for t in np.geomspace(1e-3, 50, 25):
        bound = np.exp(-t) * gamma(N) * p.eps ** N * max(t ** (k / 2 - 1), 1) * (1 + t ** (k / 2 - 1))
        assert b_eps_delta(t, p, k) <= bound


def test_b_default_order():
    p = RegularizationParams(0.1, 0.2)
    assert p.order(3) == 3
    assert b_eps_delta(1.0, p, 1, Q=3) == b_eps_delta(1.0, RegularizationParams(0.1, 0.2, N=3), 1)


def test_b_invalid():
    with pytest.raises(InvalidArgument):
        RegularizationParams(1.0, 0.1)
    with pytest.raises(InvalidArgument):
        RegularizationParams(0.1, 0.1, N=0)
    with pytest.raises(InvalidArgument):
        b_eps_delta(0.0, RegularizationParams(0.1, 0.1), 1)
    with pytest.raises(InvalidArgument):
        b_eps_delta(1.0, RegularizationParams(0.1, 0.1), 0)


def test_regularized_tends_to_shifted_kernel():
    # eps -> 0 at fixed delta gives X^alpha (delta + G_a)^{-k/2}; the gap is first order in N eps
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    a = Drift([0.8])
    x, y = GrushinPoint([0.4], [0.3]), GrushinPoint([-0.5], [-0.2])
    delta = 0.2
    target = riesz_kernel_detailed(_req(alpha, a, x, y), shift=delta).value
    errs = [abs(regularized_riesz_kernel(_req(alpha, a, x, y), RegularizationParams(eps, delta, N=1))
                / target - 1) for eps in (1e-2, 1e-3, 1e-4)]
    assert 0.08 < errs[1] / errs[0] < 0.12
    assert 0.08 < errs[2] / errs[1] < 0.12
    assert errs[2] < 1e-3


def test_regularized_finite_on_diagonal():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    x = GrushinPoint([0.4], [0.3])
    v = regularized_riesz_kernel(_req(alpha, Drift([0.8]), x, x), RegularizationParams(0.1, 0.1))
    assert np.isfinite(v)
    with pytest.raises(DiagonalSingularity):
        regularized_riesz_kernel(_req(GrushinMultiIndex.unit(0, D11, 3), Drift([0.8]), x, x),
                                 RegularizationParams(0.1, 0.1))


def test_regularized_order_doubling():
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    a = Drift([0.8])
    x, y = GrushinPoint([0.4], [0.3]), GrushinPoint([-0.5], [-0.2])
    ref = riesz_kernel(_req(alpha, a, x, y))
    vals = [regularized_riesz_kernel(_req(alpha, a, x, y), RegularizationParams(0.01, 0.01, N=N))
            for N in (1, 2, 4, 8)]
    assert np.all(np.isfinite(vals))
    # larger N smooths more, and the change stays of the size of N eps
    assert all(abs(v - ref) < 0.2 * abs(ref) for v in vals)
    assert np.all(np.diff(np.abs(np.array(vals) - ref)) > 0)


# scalar gap

def test_gap_endpoint():
    assert scalar_multiplier_gap(0.5, 0.01, 0.0) == pytest.approx(0.1, rel=1e-15)


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("delta", [1e-1, 1e-3])
def test_gap_bounded_and_decreasing(gamma, delta):
    s = np.concatenate([[0.0], np.geomspace(1e-8, 1e4, 2000)])
    g = scalar_multiplier_gap(gamma, delta, s)
    assert np.max(g) <= delta ** gamma * (1 + 1e-14)
    assert np.all(np.diff(g) <= 1e-15)


def test_gap_invalid():
    with pytest.raises(InvalidArgument):
        scalar_multiplier_gap(1.0, 0.1, 1.0)
    with pytest.raises(InvalidArgument):
        scalar_multiplier_gap(0.5, 0.1, -1.0)


# application to sampled functions

def _grid(npts, box=3.0):
    return Grid.centered(D11, -box, box, npts)


def _g(grid, c=(0.0, 0.0)):
    return SampledFunction.from_callable(grid, lambda x, y: np.exp(-(x - c[0]) ** 2 - (y - c[1]) ** 2))


@pytest.fixture(scope="module")
def small_table():
    grid = _grid(12)
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    a = Drift([1.0])
    return grid, alpha, a, riesz_table(grid, alpha, a)


def test_apply_linearity(small_table):
    grid, alpha, a, tab = small_table
    f, g = _g(grid), _g(grid, (0.5, -1.0))
    lhs = apply_riesz(f + 2.5 * g, alpha, a, table=tab).values
    rhs = apply_riesz(f, alpha, a, table=tab).values + 2.5 * apply_riesz(g, alpha, a, table=tab).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_table_matches_kernel(small_table):
    # cell means in x'' against Gauss-Legendre averages of the t-quadrature route
    grid, alpha, a, tab = small_table
    pts = grid.prime_points()
    h = grid.spacing[1]
    centre = grid.shape[1] - 1
    nodes, weights = gl_interval(-0.5 * h, 0.5 * h, 8)
    for i, j, off in [(2, 7, 3), (5, 6, 1), (4, 4, 2)]:
        vals = [riesz_kernel(_req(alpha, a, GrushinPoint(pts[i], [off * h + s]), GrushinPoint(pts[j], [0.0])))
                for s in nodes]
        assert tab[i, j, centre + off] == pytest.approx(weights @ vals / h, rel=2e-5)
    # odd order: the diagonal surrogate vanishes
    assert tab[i, i, centre] == 0.0


def test_point_table_matches_kernel():
    grid = _grid(8)
    alpha = GrushinMultiIndex.unit(0, D11, 2)
    a = Drift([1.0])
    tab = riesz_table(grid, alpha, a, average=False)
    pts = grid.prime_points()
    h = grid.spacing[1]
    centre = grid.shape[1] - 1
    x = GrushinPoint(pts[1], [-2 * h])
    y = GrushinPoint(pts[6], [0.0])
    assert tab[1, 6, centre - 2] == pytest.approx(riesz_kernel(_req(alpha, a, x, y)), rel=1e-6)
    # even order: the diagonal surrogate is the kernel half a cell away in x'
    xd = GrushinPoint(pts[3], [0.0])
    yd = GrushinPoint(pts[3] + 0.5 * grid.spacing[0], [0.0])
    assert tab[3, 3, centre] == pytest.approx(riesz_kernel(_req(alpha, a, xd, yd)), rel=1e-6)


def test_cell_mean_parity():
    # cells at -D and D carry (-1)^{|alpha''|} times each other
    alpha = GrushinMultiIndex([1], [[1]])
    a = np.array([0.7])
    v = riesz_kernel_fast(alpha, a, [[0.3]], [[-0.9]], [-0.4, 0.4], cell=0.2)[0]
    assert v[0] == pytest.approx(-v[1], rel=1e-12)
    with pytest.raises(InvalidArgument):
        riesz_kernel_fast(alpha, np.zeros(1), [[0.3]], [[-0.9]], [0.4], cell=0.2)


def test_points_match_grid(small_table):
    grid, alpha, a, tab = small_table
    f = _g(grid, (0.3, 0.2))
    full = apply_riesz(f, alpha, a, table=tab)
    nodes = [GrushinPoint(grid.points()[j][:1], grid.points()[j][1:]) for j in (0, 17, 70, 143)]
    at = riesz_at_points(f, alpha, a, nodes)
    assert np.allclose(at, [full.value_at(p) for p in nodes], rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize("k", [1, 2])
def test_dilation_transport(k):
    # f(x) = F(delta_s x): R_{alpha,s e1} f(x) = R_{alpha,e1} F(delta_s x)
    s = 2.0
    alpha = GrushinMultiIndex.unit(0, D11, k)
    grid = _grid(10, 2.0)
    f = _g(grid, (0.2, 0.1))
    F = SampledFunction(grid.dilated(s), f.values)
    lhs = apply_riesz(f, alpha, Drift.along_e1(s, 1)).values
    rhs = apply_riesz(F, alpha, Drift.along_e1(1.0, 1)).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-3 * np.max(np.abs(rhs))


@pytest.mark.slow
def test_l2_ratio_stable_under_refinement():
    # ||X_1 u||^2 <= <G_a u, u> in L^2(mu_a), so the ratio is at most 1
    alpha = GrushinMultiIndex.unit(0, D11, 1)
    a = Drift([1.0])
    ratios = []
    for npts in (32, 48, 64):
        grid = _grid(npts, 4.0)
        f = _g(grid)
        ratios.append(lp_norm(apply_riesz(f, alpha, a), 2, a) / lp_norm(f, 2, a))
    assert max(ratios) / min(ratios) < 1.2
    assert max(ratios) < 1.0


def test_apply_invalid(small_table):
    grid, alpha, a, _ = small_table
    f = _g(grid)
    with pytest.raises(InvalidArgument):
        apply_riesz(f, alpha, Drift.zero(1))
    with pytest.raises(InvalidArgument):
        apply_riesz(f, GrushinMultiIndex.from_prime([0]), a)
    with pytest.raises(InvalidArgument):
        apply_riesz(f, alpha, Drift([1.0, 0.0]))
