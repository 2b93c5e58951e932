import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscillometer.errors import ConfigurationError, GridMismatchError, InputError, UnderResolvedError
from oscillometer.field import (
    GridSpec,
    ScalarField,
    ball_region,
    build_grid,
    disk_cells,
    disk_row_extents,
    gradient,
    hessian,
    index_ball,
    integrate,
    l_p_norm,
    laplacian_5pt,
    sample_analytic,
)


def test_grid_rejects_odd_and_small():
    for bad in (7, 9, 6, 0, 4.0, True):
        with pytest.raises(ConfigurationError):
            GridSpec(bad)


def test_grid_centers_symmetric_and_spacing():
    g = GridSpec(16)
    c = g.centers
    assert c[0] == pytest.approx(-1 + g.h / 2)
    np.testing.assert_allclose(c, -c[::-1], atol=1e-15)
    np.testing.assert_allclose(np.diff(c), g.h)
    assert not c.flags.writeable


def test_n8_mask_has_52_cells():
    _, mask = build_grid(8)
    assert mask.count == 52


@pytest.mark.parametrize("N", [8, 16, 32, 64, 128, 256])
def test_mask_area_within_boundary_layer(N):
    grid, mask = build_grid(N)
    assert abs(mask.area - math.pi) <= 0.4 * grid.h * 2 * math.pi


def test_mask_symmetric_under_reflections():
    _, mask = build_grid(64)
    c = mask.cells
    assert np.array_equal(c, c[::-1]) and np.array_equal(c, c[:, ::-1]) and np.array_equal(c, c.T)


def test_sample_nonfinite_names_cell():
    grid, mask = build_grid(16)
    with pytest.raises(InputError, match=r"cell \("):
        sample_analytic(grid, mask, lambda x, y: 1 / (x - grid.centers[3]))


def test_scalar_field_nan_outside_support():
    grid, mask = build_grid(16)
    f = sample_analytic(grid, mask, lambda x, y: x + y)
    assert np.all(np.isnan(f.values[~mask.cells]))
    assert f.count == mask.count


def test_field_arithmetic_requires_same_grid():
    g1, m1 = build_grid(16)
    g2, m2 = build_grid(32)
    a = sample_analytic(g1, m1, lambda x, y: x)
    b = sample_analytic(g2, m2, lambda x, y: x)
    with pytest.raises(GridMismatchError):
        a + b


def test_ball_region_exact_counts_at_origin():
    _, mask = build_grid(256)
    expect = {0.25: 3228, 0.125: 812, 0.0625: 208, 0.03125: 52}
    for r, n in expect.items():
        assert ball_region(mask, (0, 0), r, min_cells=1).count == n
    _, mask512 = build_grid(512)
    assert ball_region(mask512, (0, 0), 1 / 32).count == 208


def test_ball_region_brute_force_membership():
    grid, mask = build_grid(64)
    x0, r = (0.137, -0.29), 0.23
    R = ball_region(mask, x0, r, min_cells=1)
    brute = mask.cells & ((grid.X - x0[0]) ** 2 + (grid.Y - x0[1]) ** 2 < r * r)
    assert np.array_equal(R.cells, brute)


def test_ball_region_errors():
    _, mask = build_grid(64)
    with pytest.raises(UnderResolvedError, match="cells"):
        ball_region(mask, (0, 0), 0.01)
    with pytest.raises(ConfigurationError):
        ball_region(mask, (0, 0), 0.0)
    with pytest.raises(ConfigurationError):
        ball_region(mask, (1.2, 0), 0.3)


def test_ball_clipped_by_mask_at_boundary():
    _, mask = build_grid(64)
    R = ball_region(mask, (1.0, 0.0), 0.25, min_cells=1)
    full, _ = index_ball(mask.grid, (1.0, 0.0), 0.25)
    assert 0 < R.count < full.sum()


@given(st.floats(0.5, 40.0))
def test_disk_row_extents_matches_strict_test(R):
    rows = dict(disk_row_extents(R))
    for di in range(-int(R) - 1, int(R) + 2):
        inside = [dj for dj in range(-int(R) - 1, int(R) + 2) if di * di + dj * dj < R * R]
        if inside:
            assert rows[di] == max(inside)
        else:
            assert di not in rows


def test_integrate_constant_equals_area():
    grid, mask = build_grid(128)
    one = sample_analytic(grid, mask, lambda x, y: np.ones_like(x))
    R = ball_region(mask, (0.1, 0.1), 0.3)
    assert integrate(one, R) == pytest.approx(R.area, rel=1e-14)
    assert R.area == pytest.approx(math.pi * 0.09, rel=0.02)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_stencils_exact_on_quadratics(a, b, c, d, e, k):
    grid, mask = build_grid(32)
    u = sample_analytic(grid, mask, lambda x, y: a + b * x + c * y + d * x * x + e * x * y + k * y * y)
    H = hessian(u)
    G = gradient(u)
    L = laplacian_5pt(u)
    s = H.support
    np.testing.assert_allclose(H.xx[s], 2 * d, atol=1e-9)
    np.testing.assert_allclose(H.xy[s], e, atol=1e-9)
    np.testing.assert_allclose(H.yy[s], 2 * k, atol=1e-9)
    np.testing.assert_allclose(L.data, 2 * d + 2 * k, atol=1e-9)
    gs = G.support
    np.testing.assert_allclose(G.x[gs], (b + 2 * d * grid.X + e * grid.Y)[gs], atol=1e-11)


def test_derivative_supports_erode():
    grid, mask = build_grid(32)
    u = sample_analytic(grid, mask, lambda x, y: x * y)
    H, G = hessian(u), gradient(u)
    assert H.lost_cells > 0 and G.lost_cells > 0
    assert not np.any(H.support & ~G.support)
    np.testing.assert_allclose(H.trace().data, 0.0, atol=1e-9)


def test_l_p_norm_constant_and_scaling():
    grid, mask = build_grid(64)
    f = sample_analytic(grid, mask, lambda x, y: np.full_like(x, 2.0))
    assert l_p_norm(f, 2) == pytest.approx(2 * math.sqrt(mask.area), rel=1e-14)
    assert l_p_norm(f, math.inf) == 2.0
    big = f * 1e200
    assert l_p_norm(big, 8) == pytest.approx(1e200 * l_p_norm(f, 8), rel=1e-12)


def test_l_p_norm_rejects_cells_without_values():
    grid, mask = build_grid(16)
    f = sample_analytic(grid, mask, lambda x, y: x)
    with pytest.raises(ConfigurationError):
        l_p_norm(f, 2, np.ones(grid.shape, bool))


def test_disk_cells_subset_of_mask():
    grid, mask = build_grid(64)
    c = disk_cells(grid, mask, 0.5)
    assert not np.any(c & ~mask.cells)
    assert c.sum() * grid.h ** 2 == pytest.approx(math.pi / 4, rel=0.03)
    assert isinstance(sample_analytic(grid, mask, lambda x, y: x).restrict(c), ScalarField)
