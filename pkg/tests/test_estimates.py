import math

import numpy as np
import pytest

from oscillometer.errors import ConfigurationError
from oscillometer.estimates import (
    cz_report,
    cz_sweep,
    d2_oscillation_profile,
    fefferman_stein_check,
    hessian_seminorm_at,
    load_pair_data,
    pinf_failure_probe,
    sharp_bound_check,
    theorem_t2_report,
    w2p_norm,
)
from oscillometer.field import build_grid, disk_cells, sample_analytic
from oscillometer.norms import ScaleLadder


def test_quad_hessian_has_zero_seminorm():
    d = load_pair_data("quad", 64)
    rep = theorem_t2_report(d.u, d.f, (0, 0), d2u=d.d2u)
    assert rep.lhs == 0.0 and rep.rhs > 0 and rep.constant == 0.0


def test_solved_source_close_to_analytic_for_sine():
    a = load_pair_data("sine", 64, "analytic")
    s = load_pair_data("sine", 64, "solved")
    assert s.solver["residual"] <= 1e-10
    sa = hessian_seminorm_at(a.d2u, (0, 0))
    ss = hessian_seminorm_at(s.d2u, (0, 0))
    assert ss == pytest.approx(sa, rel=0.05)
    with pytest.raises(ConfigurationError):
        load_pair_data("sine", 64, "guessed")


def test_theorem_report_uses_max_component():
    d = load_pair_data("sine", 64)
    rep = theorem_t2_report(d.u, d.f, (0, 0), d2u=d.d2u)
    comps = [v for k, v in rep.norms.items() if k.startswith("d2u_star_")]
    assert rep.lhs == max(comps) > 0
    assert rep.rhs == pytest.approx(rep.norms["u_l2"] + rep.norms["f_l2"] + rep.norms["f_star"])


def test_d2_profile_shape():
    d = load_pair_data("log-radial", 128)
    prof = d2_oscillation_profile(d.d2u, (0, 0), ScaleLadder())
    assert len(prof.radii) == len(prof.osc) >= 3
    assert max(prof.osc) == pytest.approx(hessian_seminorm_at(d.d2u, (0, 0)))


@pytest.mark.parametrize("p", [0.5, 1.0, math.inf])
def test_cz_requires_open_range(p):
    d = load_pair_data("sine", 64)
    with pytest.raises(ConfigurationError):
        cz_report(d, p)


@pytest.mark.parametrize("pid", ["sine", "log-radial", "quartic", "lp-only(0.5)"])
def test_cz_scale_invariance(pid):
    for lam in (0.1, 10.0):
        base = cz_sweep(pid, [1.5, 8.0], [64])
        scaled = cz_sweep(pid, [1.5, 8.0], [64], scale=lam)
        for a, b in zip(base, scaled):
            assert b.constant == pytest.approx(a.constant, rel=1e-10)
            assert b.lhs == pytest.approx(lam * a.lhs, rel=1e-10)


def test_cz_sweep_sorted_and_sharp_variant():
    reps = cz_sweep("sine", [4, 2], [128, 64])
    assert [(r.N, r.p) for r in reps] == [(64, 2), (64, 4), (128, 2), (128, 4)]
    d = load_pair_data("sine", 64)
    sharp = cz_report(d, 2, "sharp")
    assert sharp.lhs == pytest.approx(w2p_norm(d, 2)["d2u_lp_half"])
    with pytest.raises(ConfigurationError):
        cz_report(d, 2, "loose")


def test_pinf_log_increments():
    rep = pinf_failure_probe([64, 128, 256])
    assert all(inc == pytest.approx(0.5 * math.log(2), rel=1e-6) for inc in rep.increments)
    assert max(rep.seminorm_changes) < 0.2


def test_pinf_smooth_control_bounded():
    rep = pinf_failure_probe([64, 128], pair="sine")
    assert abs(rep.increments[0]) < 0.1


def test_fefferman_stein_constant_positive_and_stable():
    consts = []
    for N in (64, 128):
        grid, mask = build_grid(N)
        g = sample_analytic(grid, mask, lambda x, y: np.log(np.hypot(x, y)))
        rep = fefferman_stein_check(g, 2, centers=disk_cells(grid, mask, 0.5), name="log")
        assert rep.lhs > 0 and rep.rhs > 0
        consts.append(rep.constant)
    assert abs(consts[1] - consts[0]) <= 0.3 * consts[0]


def test_fefferman_stein_constant_field():
    grid, mask = build_grid(64)
    g = sample_analytic(grid, mask, lambda x, y: np.full_like(x, 2.0))
    rep = fefferman_stein_check(g, 4)
    # g# vanishes, so the constant is ||g||_p / ||g||_1 on B_1/2
    assert rep.norms["sharp_lp"] == pytest.approx(0.0, abs=1e-12)


def test_sharp_bound_ratio_nonnegative():
    d = load_pair_data("log-radial", 64)
    rep = sharp_bound_check(d.u, d.f, d.d2u)
    assert rep.constant == pytest.approx(rep.norms["max_ratio"])
    assert rep.constant > 0
    assert rep.lhs <= rep.norms["max_d2u_sharp"] + 1e-15
