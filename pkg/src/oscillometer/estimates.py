"""Empirical checks of the W^{2,BMO}, W^{2,p}, Fefferman-Stein and
sharp-maximal inequalities.

Constants are measured, never asserted: every check returns an
:class:`EstimateReport` with both sides and their ratio, and the
interesting output is how that ratio behaves under refinement.

|D^2u|_{*,x} is the largest of the three Hessian-component seminorms.
Norms written without a star are unnormalised cell-centre L^p norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .campanato import OscillationProfile
from .corpus import AnalyticPair, get_pair
from .elliptic import SolverConfig, poisson_dirichlet
from .errors import ConfigurationError
from .field import (
    ScalarField,
    SymTensorField,
    VectorField,
    disk_cells,
    gradient,
    hessian,
    l_p_norm,
)
from .norms import ScaleLadder, bmo_seminorm_at, default_centers, sharp_maximal_field
from .reports import EstimateReport

SOURCES = ("analytic", "solved")


@dataclass(frozen=True, eq=False)
class PairData:
    """Sampled or solved (u, f, Du, D^2u) for one pair on one grid."""

    pair: str
    N: int
    source: str
    u: ScalarField
    f: ScalarField
    du: VectorField
    d2u: SymTensorField
    solver: dict = field(default_factory=dict)


def load_pair_data(pair: AnalyticPair | str, N: int, source: str = "analytic",
                   cfg: SolverConfig | None = None, scale: float = 1.0) -> PairData:
    pair = get_pair(pair) if isinstance(pair, str) else pair
    if scale != 1.0:
        pair = pair.scaled(scale)
    if source not in SOURCES:
        raise ConfigurationError(f"unknown derivative source {source!r}; expected one of {SOURCES}")
    u, f = pair.sample(N)
    solver = {}
    if source == "analytic":
        du, d2u = pair.sample_gradient(N), pair.sample_hessian(N)
    else:
        res = poisson_dirichlet(f, pair.g, cfg)
        u = res.solution
        du, d2u = gradient(u), hessian(u)
        solver = {"iterations": res.iterations, "residual": res.residual}
    return PairData(pair.id, N, source, u, f, du, d2u, solver)


def _check_p_open(p: float) -> float:
    p = float(p)
    if not 1 < p < math.inf:
        raise ConfigurationError(f"the estimate needs 1 < p < inf, got p={p}")
    return p


def hessian_seminorm_at(d2u: SymTensorField, x0, ladder: ScaleLadder | None = None) -> float:
    return max(bmo_seminorm_at(c, x0, ladder).seminorm for c in d2u.components().values())


def theorem_t2_report(u: ScalarField, f: ScalarField, x0=(0.0, 0.0), ladder: ScaleLadder | None = None,
                      d2u: SymTensorField | None = None, data_ladder: ScaleLadder | None = None) -> EstimateReport:
    """|D^2u|_{*,x0} against ||u||_{L^2} + ||f||_{L^2} + |f|_{*,x0}.

    The Hessian ladder defaults to r0 = 1/4 (eta^2 with eta = 1/2); f's
    seminorm uses radius 1.
    """
    ladder = ladder or ScaleLadder()
    data_ladder = data_ladder or ScaleLadder.data()
    source = "central-difference" if d2u is None else d2u.source
    d2u = hessian(u) if d2u is None else d2u
    comps = {k: bmo_seminorm_at(c, x0, ladder).seminorm for k, c in d2u.components().items()}
    lhs = max(comps.values())
    u2, f2 = l_p_norm(u, 2), l_p_norm(f, 2)
    fstar = bmo_seminorm_at(f, x0, data_ladder).seminorm
    norms = {"d2u_star_" + k: v for k, v in comps.items()}
    norms.update(u_l2=u2, f_l2=f2, f_star=fstar)
    return EstimateReport("theorem-w2bmo", u.grid.N, lhs, u2 + f2 + fstar, norms,
                          {"x0": list(map(float, x0)), "ladder": ladder.as_dict(),
                           "data_ladder": data_ladder.as_dict(), "hessian": source,
                           "matrix_seminorm": "max-component"})


def d2_oscillation_profile(d2u: SymTensorField, x0=(0.0, 0.0), ladder: ScaleLadder | None = None) -> OscillationProfile:
    """Per-rung oscillation of D^2u at x0 (max over components)."""
    reps = [bmo_seminorm_at(c, x0, ladder) for c in d2u.components().values()]
    osc = [max(vals) for vals in zip(*(r.values for r in reps))]
    return OscillationProfile(list(reps[0].radii), osc, list(reps[0].counts))


def w2p_norm(data: PairData, p: float, radius: float = 0.5) -> dict[str, float]:
    cells = disk_cells(data.u.grid, data.d2u.support, radius)
    return {
        "u_lp_half": l_p_norm(data.u, p, cells),
        "du_lp_half": l_p_norm(data.du.norm(), p, cells),
        "d2u_lp_half": l_p_norm(data.d2u.frobenius(), p, cells),
    }


def cz_report(data: PairData, p: float, variant: str = "corollary") -> EstimateReport:
    p = _check_p_open(p)
    parts = w2p_norm(data, p)
    f_lp = l_p_norm(data.f, p)
    if variant == "corollary":
        u_low = l_p_norm(data.u, 1)
        lhs = parts["u_lp_half"] + parts["du_lp_half"] + parts["d2u_lp_half"]
        norms = dict(parts, u_l1=u_low, f_lp=f_lp)
    elif variant == "sharp":
        u_low = l_p_norm(data.u, 2)
        lhs = parts["d2u_lp_half"]
        norms = dict(parts, u_l2=u_low, f_lp=f_lp)
    else:
        raise ConfigurationError(f"unknown sweep variant {variant!r}")
    return EstimateReport(f"cz-{variant}", data.N, lhs, u_low + f_lp, norms,
                          {"pair": data.pair, "source": data.source}, p=p)


def cz_sweep(pair: AnalyticPair | str, p_list, N_list, source: str = "analytic",
             cfg: SolverConfig | None = None, variant: str = "corollary", scale: float = 1.0) -> list[EstimateReport]:
    """One report per (N, p), sorted by (N, p)."""
    p_list = [_check_p_open(p) for p in p_list]
    out = []
    for N in sorted(N_list):
        data = load_pair_data(pair, N, source, cfg, scale)
        out.extend(cz_report(data, p, variant) for p in sorted(p_list))
    return out


@dataclass
class PinfRow:
    N: int
    max_d2u: float
    seminorm: float


@dataclass
class PinfReport:
    pair: str
    rows: list[PinfRow]
    ladder: dict

    @property
    def increments(self) -> list[float]:
        return [b.max_d2u - a.max_d2u for a, b in zip(self.rows, self.rows[1:])]

    @property
    def seminorm_changes(self) -> list[float]:
        return [abs(b.seminorm - a.seminorm) / a.seminorm for a, b in zip(self.rows, self.rows[1:])]


def pinf_failure_probe(N_list, pair: AnalyticPair | str = "log-radial", ladder: ScaleLadder | None = None,
                       source: str = "analytic", cfg: SolverConfig | None = None) -> PinfReport:
    """max_{B_1/2} |D^2u| and |D^2u|_{*,0} as the grid is refined."""
    ladder = ladder or ScaleLadder()
    rows = []
    for N in sorted(N_list):
        data = load_pair_data(pair, N, source, cfg)
        cells = disk_cells(data.u.grid, data.d2u.support, 0.5)
        mx = float(data.d2u.max_abs().values[cells].max())
        rows.append(PinfRow(N, mx, hessian_seminorm_at(data.d2u, (0.0, 0.0), ladder)))
    return PinfReport(data.pair, rows, ladder.as_dict())


def fefferman_stein_check(g: ScalarField, p: float, ladder: ScaleLadder | None = None,
                          centers: np.ndarray | None = None, name: str = "g") -> EstimateReport:
    """||g||_{L^p} against ||g#||_{L^p} + ||g||_{L^1}, all over the centre set."""
    p = _check_p_open(p)
    ladder = ladder or ScaleLadder()
    cells = default_centers(g) if centers is None else np.asarray(centers, dtype=bool)
    sharp = sharp_maximal_field(g, ladder, 2, cells)
    lhs = l_p_norm(g, p, cells)
    s_p, g_1 = l_p_norm(sharp, p), l_p_norm(g, 1, cells)
    return EstimateReport("fefferman-stein", g.grid.N, lhs, s_p + g_1,
                          {"g_lp": lhs, "sharp_lp": s_p, "g_l1": g_1},
                          {"g": name, "ladder": ladder.as_dict(), "centers": int(cells.sum())}, p=p)


def sharp_bound_check(u: ScalarField, f: ScalarField, d2u: SymTensorField | None = None,
                      ladder: ScaleLadder | None = None, data_ladder: ScaleLadder | None = None,
                      centers: np.ndarray | None = None, full: bool = False) -> EstimateReport:
    """max over centres of (D^2u)#(x) / (||u||_{L^2} + ||f||_{L^2} + f#(x))."""
    ladder = ladder or ScaleLadder()
    data_ladder = data_ladder or ScaleLadder.data()
    source = "central-difference" if d2u is None else d2u.source
    d2u = hessian(u) if d2u is None else d2u
    if centers is None:
        centers = default_centers(d2u.component("xx"), full=full)
    cells = np.asarray(centers, dtype=bool)
    num = np.max([sharp_maximal_field(c, ladder, 2, cells).values[cells]
                  for c in d2u.components().values()], axis=0)
    fs = sharp_maximal_field(f, data_ladder, 2, cells).values[cells]
    base = l_p_norm(u, 2) + l_p_norm(f, 2)
    den = base + fs
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    k = int(np.argmax(ratio))
    where = np.argwhere(cells)[k]
    return EstimateReport("sharp-bound", u.grid.N, float(num[k]), float(den[k]),
                          {"u_l2": l_p_norm(u, 2), "f_l2": l_p_norm(f, 2), "f_sharp_at_max": float(fs[k]),
                           "max_ratio": float(ratio[k]), "max_d2u_sharp": float(num.max())},
                          {"argmax": list(u.grid.center_of(*where)), "centers": int(cells.sum()),
                           "ladder": ladder.as_dict(), "data_ladder": data_ladder.as_dict(), "hessian": source})
