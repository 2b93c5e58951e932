import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscillometer.campanato import (
    OscillationProfile,
    Poly2,
    campanato_iterate,
    decay_exponent,
    drift_check,
    key_step,
    lsq_fit_quadratic,
    poly_eval,
    poly_laplacian,
    trace_correct,
)
from oscillometer.corpus import get_pair
from oscillometer.errors import ConfigurationError, InsufficientDataError, UnderResolvedError
from oscillometer.field import ball_region, build_grid, sample_analytic
from oscillometer.norms import mean, starred_norm

GRID = build_grid(64)
coef = st.floats(-5, 5, allow_nan=False)


def _poly(anchor, c):
    return Poly2(anchor, c[0], [c[1], c[2]], [[c[3], c[4]], [c[4], c[5]]])


@given(st.lists(coef, min_size=6, max_size=6), st.tuples(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3)))
@settings(max_examples=30, deadline=None)
def test_reanchor_preserves_values(c, a):
    P = _poly((0.1, -0.2), c)
    Q = P.reanchor(a)
    for x in [(0.0, 0.0), (0.4, -0.1), (-0.5, 0.5)]:
        assert Q(*x) == pytest.approx(P(*x), abs=1e-10)
    assert Q.laplacian == pytest.approx(P.laplacian, abs=1e-12)


def test_poly_algebra():
    P = _poly((0, 0), [1, 2, 3, 4, 5, 6])
    Q = _poly((0.5, 0), [1, 0, 0, 1, 0, 1])
    x = (0.3, 0.7)
    assert (P + Q)(*x) == pytest.approx(P(*x) + Q(*x))
    assert (P - Q)(*x) == pytest.approx(P(*x) - Q(*x))
    assert (P * 3.0)(*x) == pytest.approx(3 * P(*x))
    assert poly_eval(P, x) == P(*x)
    assert poly_laplacian(P) == 10.0
    np.testing.assert_allclose(P.grad(0, 0), [2, 3])


@given(st.lists(coef, min_size=6, max_size=6), st.floats(-20, 20))
@settings(max_examples=50, deadline=None)
def test_trace_correct_identity(c, target):
    P = _poly((0.2, 0.1), c)
    T = trace_correct(P, target)
    assert T.laplacian == pytest.approx(target, abs=1e-12)
    D = T - P
    # only a multiple of |x - a|^2 is added
    assert D.c0 == 0 and np.all(D.c1 == 0)
    assert D.c2[0, 1] == 0 and D.c2[0, 0] == pytest.approx(D.c2[1, 1], abs=1e-12)


@given(st.lists(coef, min_size=6, max_size=6))
@settings(max_examples=30, deadline=None)
def test_lsq_recovers_random_quadratic(c):
    P = _poly((0.0, 0.0), c)
    u = P.sample(sample_analytic(*GRID, lambda x, y: x))
    R = ball_region(GRID[1], (0.1, -0.1), 0.5)
    fit = lsq_fit_quadratic(u, R)
    for x in [(0.1, -0.1), (0.3, 0.2), (-0.2, -0.4)]:
        assert fit(*x) == pytest.approx(P(*x), abs=1e-10)
    cfit = lsq_fit_quadratic(u, R, laplacian=P.laplacian)
    assert cfit.laplacian == pytest.approx(P.laplacian, abs=1e-10)
    assert cfit(0.3, 0.2) == pytest.approx(P(0.3, 0.2), abs=1e-10)


def test_lsq_fit_underresolved():
    u = sample_analytic(*GRID, lambda x, y: x)
    R = ball_region(GRID[1], (0, 0), 0.1, min_cells=1)
    with pytest.raises(UnderResolvedError):
        lsq_fit_quadratic(u, R)


@pytest.mark.parametrize("c", [(0, 0, 0, 1, 0, 1), (0.3, -1, 2, 3.5, -1.2, -0.7)])
def test_key_step_exact_on_quadratics(c):
    grid, mask = build_grid(128)
    P0 = _poly((0.0, 0.0), c)
    u = P0.sample(sample_analytic(grid, mask, lambda x, y: x))
    f = sample_analytic(grid, mask, lambda x, y: np.full_like(x, P0.laplacian))
    R = ball_region(u.mask, (0, 0), 0.5)
    P, rep = key_step(u, f, R, 0.5)
    assert rep.residual < 1e-10
    inner = ball_region(u.mask, (0, 0), 0.25)
    assert P.laplacian == pytest.approx(mean(f, inner), abs=1e-12)


def test_key_step_harmonic_cubic_decay():
    u, f = get_pair("harmonic-cubic").sample(256)
    res = []
    for r in (0.5, 0.25, 0.125):
        R = ball_region(u.mask, (0, 0), r)
        res.append(key_step(u, f, R, 0.5)[1].residual)
    slope = math.log2(res[0] / res[1]), math.log2(res[1] / res[2])
    assert min(slope) > 2.5


def test_key_step_rejects_eta():
    u, f = get_pair("sine").sample(64)
    with pytest.raises(ConfigurationError):
        key_step(u, f, ball_region(u.mask, (0, 0), 0.5), 1.0)


def test_iteration_trace_and_telescoping():
    u, f = get_pair("sine").sample(256)
    st_ = campanato_iterate(u, f, (0, 0), 0.5, 5, "lsq")
    assert st_.levels >= 3
    for m in range(1, st_.levels + 1):
        P = st_.polys[m]
        assert P.laplacian == pytest.approx(st_.f_means[m - 1], abs=1e-12)
        ball = ball_region(u.mask, (0, 0), st_.radii[m - 1])
        assert starred_norm(u - P.sample(u), ball) == pytest.approx(st_.osc[m - 1], rel=1e-12)
    total = sum((st_.polys[m] - st_.polys[m - 1] for m in range(1, len(st_.polys))), Poly2.zero())
    for x in [(0.0, 0.0), (0.05, -0.02)]:
        assert total(*x) == pytest.approx(st_.polys[-1](*x), abs=1e-12)


def test_iteration_modes_consistent():
    u, f = get_pair("sine").sample(128)
    a = campanato_iterate(u, f, mode="lsq", M=2)
    b = campanato_iterate(u, f, mode="keystep", M=2)
    assert b.mode == "key_step" and len(b.steps) == b.levels
    for x, y in zip(a.osc, b.osc):
        assert x <= y * (1 + 1e-9)
    with pytest.raises(ConfigurationError):
        campanato_iterate(u, f, mode="newton")


def test_iteration_truncates_at_resolution():
    u, f = get_pair("sine").sample(64)
    st_ = campanato_iterate(u, f, M=5)
    assert st_.truncated > 0 and st_.levels + st_.truncated == 5


def test_sine_decay_exponent():
    u, f = get_pair("sine").sample(256)
    fit = decay_exponent(campanato_iterate(u, f, M=5).profile())
    assert fit.slope >= 1.9 and len(fit.used) >= 3


def test_decay_exponent_synthetic():
    radii = [0.5 * 0.5 ** k for k in range(6)]
    prof = OscillationProfile(radii, [3 * r ** 2.5 for r in radii], [10_000] * 6)
    fit = decay_exponent(prof)
    assert fit.slope == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3), abs=1e-12)
    short = OscillationProfile(radii, [1.0] * 6, [10_000, 10_000, 100, 100, 10, 10])
    with pytest.raises(InsufficientDataError):
        decay_exponent(short)


def test_profile_validation():
    with pytest.raises(ConfigurationError):
        OscillationProfile([0.1, 0.2], [1, 1])
    with pytest.raises(ConfigurationError):
        OscillationProfile([0.2, 0.1], [1, -1])


def test_drift_refinement_stable():
    d = {}
    for N in (128, 256):
        u, f = get_pair("sine").sample(N)
        d[N] = drift_check(campanato_iterate(u, f, M=5)).values
    for a, b in zip(d[128], d[256]):
        assert abs(a - b) <= 0.3 * abs(a)


def test_drift_zero_after_first_level_for_quadratic():
    u, f = get_pair("quad").sample(128)
    vals = drift_check(campanato_iterate(u, f, M=3, mode="key_step")).values
    assert all(v < 1e-8 for v in vals[1:])


def test_log_pair_normalized_oscillation_bounded_not_decaying():
    u, f = get_pair("log-radial").sample(256)
    st_ = campanato_iterate(u, f, M=5)
    nrm = st_.normalized
    assert st_.levels >= 3 and max(nrm) / min(nrm) <= 4
    # the f-means drift by log(eta) per level instead of converging
    steps = np.diff(st_.f_means)
    np.testing.assert_allclose(steps, math.log(0.5), rtol=0.05)
