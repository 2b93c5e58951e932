"""Experiment orchestration.

A run is expanded into independent (experiment, pair, N) tasks.  Tasks are
pure functions of the configuration, so they may run in a process pool;
results are merged and key-sorted, which makes the output independent of
the worker count and of completion order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .campanato import campanato_iterate, decay_exponent, drift_check
from .config import RunConfig
from .corpus import get_pair
from .elliptic import SolverConfig, poisson_dirichlet, residual
from .errors import InsufficientDataError
from .estimates import (
    cz_report,
    d2_oscillation_profile,
    fefferman_stein_check,
    hessian_seminorm_at,
    load_pair_data,
    sharp_bound_check,
    theorem_t2_report,
)
from .field import disk_cells, l_p_norm
from .norms import ScaleLadder, bmo_norm, bmo_seminorm_at, bmo_seminorm_domain
from .output import RunReport, record

SUITE_PARTS = ("solve", "bmo", "campanato", "czsweep", "fscheck", "pinf")


def artifact_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _ladders(cfg: RunConfig) -> tuple[ScaleLadder, ScaleLadder]:
    return (ScaleLadder(cfg.r0, cfg.rho, cfg.K, cfg.min_cells),
            ScaleLadder(cfg.data_r0, cfg.rho, cfg.K, cfg.min_cells))


def _solver(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(tol=cfg.tol, max_iter=cfg.max_iter)


def _profile(name, experiment, pair, N, radii, osc):
    return {"name": name, "experiment": experiment, "pair": pair, "N": N,
            "r": [float(r) for r in radii], "osc": [float(o) for o in osc]}


def task_solve(cfg: RunConfig, pair_id: str, N: int):
    pair = get_pair(pair_id)
    u_exact, f = pair.sample(N)
    res = poisson_dirichlet(f, pair.g, _solver(cfg))
    err = res.solution - u_exact
    defect = residual(res.solution, f)
    recs = [
        record("solve", pair_id, N, "iterations", res.iterations),
        record("solve", pair_id, N, "relative_residual", res.residual),
        record("solve", pair_id, N, "l2_error", l_p_norm(err, 2)),
        record("solve", pair_id, N, "max_error", l_p_norm(err, math.inf)),
        record("solve", pair_id, N, "five_point_defect_max", l_p_norm(defect, math.inf)),
    ]
    return recs, []


def task_bmo(cfg: RunConfig, pair_id: str, N: int):
    ladder, data_ladder = _ladders(cfg)
    data = load_pair_data(pair_id, N, cfg.hessian, _solver(cfg))
    x0 = tuple(cfg.x0)
    full = cfg.centers == "full"
    d2u = data.d2u
    recs = [
        record("bmo", pair_id, N, "f_bmo_norm", bmo_norm(data.f, data_ladder, full=full,
                                                          max_centers=cfg.max_centers)),
        record("bmo", pair_id, N, "f_seminorm_domain",
               bmo_seminorm_domain(data.f, ladder=data_ladder, full=full, max_centers=cfg.max_centers)),
        record("bmo", pair_id, N, "f_seminorm_x0", bmo_seminorm_at(data.f, x0, data_ladder).seminorm),
        record("bmo", pair_id, N, "d2u_seminorm_x0", hessian_seminorm_at(d2u, x0, ladder)),
    ]
    t2 = theorem_t2_report(data.u, data.f, x0, ladder, d2u, data_ladder)
    sb = sharp_bound_check(data.u, data.f, d2u, ladder, data_ladder, full=full)
    recs += [record("theorem", pair_id, N, k, v) for k, v in
             (("lhs", t2.lhs), ("rhs", t2.rhs), ("constant", t2.constant))]
    recs += [record("sharp-bound", pair_id, N, k, v) for k, v in
             (("lhs", sb.lhs), ("rhs", sb.rhs), ("constant", sb.constant))]
    prof = d2_oscillation_profile(d2u, x0, ladder)
    recs += [record("d2u-profile", pair_id, N, "osc", o, scale=r) for r, o in zip(prof.radii, prof.osc)]
    return recs, [_profile(f"d2u-osc_{pair_id}_N{N}", "d2u-profile", pair_id, N, prof.radii, prof.osc)]


def task_campanato(cfg: RunConfig, pair_id: str, N: int):
    data = load_pair_data(pair_id, N, cfg.hessian, _solver(cfg))
    state = campanato_iterate(data.u, data.f, tuple(cfg.x0), cfg.eta, cfg.M, cfg.mode, _solver(cfg),
                              cfg.r_base, cfg.min_cells)
    drift = drift_check(state)
    recs = [record("campanato", pair_id, N, "levels", state.levels),
            record("campanato", pair_id, N, "truncated_levels", state.truncated),
            record("campanato", pair_id, N, "drift_max", drift.max)]
    for r, o, nrm, fm, c in zip(state.radii, state.osc, state.normalized, state.f_means, drift.values):
        recs += [record("campanato", pair_id, N, "osc", o, scale=r),
                 record("campanato", pair_id, N, "osc_normalized", nrm, scale=r),
                 record("campanato", pair_id, N, "f_mean", fm, scale=r),
                 record("campanato", pair_id, N, "drift", c, scale=r)]
    try:
        recs.append(record("campanato", pair_id, N, "decay_exponent", decay_exponent(state.profile()).slope))
    except InsufficientDataError:
        pass
    return recs, [_profile(f"campanato-osc_{pair_id}_N{N}", "campanato", pair_id, N, state.radii, state.osc)]


def task_czsweep(cfg: RunConfig, pair_id: str, N: int):
    data = load_pair_data(pair_id, N, cfg.hessian, _solver(cfg))
    recs = []
    for p in sorted(cfg.p):
        rep = cz_report(data, p, cfg.variant)
        recs += [record("czsweep", pair_id, N, k, v, p=p) for k, v in
                 (("lhs", rep.lhs), ("rhs", rep.rhs), ("constant", rep.constant))]
    return recs, []


def task_fscheck(cfg: RunConfig, pair_id: str, N: int):
    ladder, _ = _ladders(cfg)
    data = load_pair_data(pair_id, N, cfg.hessian, _solver(cfg))
    fields = {"f": data.f}
    fields.update({f"d2u_{k}": c for k, c in data.d2u.components().items()})
    recs = []
    for name, g in fields.items():
        centers = disk_cells(g.grid, g.support, 0.5)
        for p in sorted(cfg.p):
            rep = fefferman_stein_check(g, p, ladder, centers, name)
            c = rep.constant
            recs.append(record("fscheck", pair_id, N, f"{name}.constant", math.nan if c is None else c, p=p))
    return recs, []


def task_pinf(cfg: RunConfig, pair_id: str, N: int):
    ladder, _ = _ladders(cfg)
    data = load_pair_data(pair_id, N, cfg.hessian, _solver(cfg))
    cells = disk_cells(data.u.grid, data.d2u.support, 0.5)
    return [record("pinf", pair_id, N, "max_d2u_half", float(data.d2u.max_abs().values[cells].max())),
            record("pinf", pair_id, N, "d2u_seminorm_0", hessian_seminorm_at(data.d2u, (0.0, 0.0), ladder))], []


TASKS = {
    "solve": task_solve,
    "bmo": task_bmo,
    "campanato": task_campanato,
    "czsweep": task_czsweep,
    "fscheck": task_fscheck,
    "pinf": task_pinf,
}


def _call(args):
    kind, cfg, pair_id, N = args
    return TASKS[kind](cfg, pair_id, N)


def _refinement_records(records):
    """Observed orders and per-doubling changes computed from the merged rows."""
    out = []
    series = {}
    for r in records:
        if (r["experiment"], r["quantity"]) in (("solve", "l2_error"), ("pinf", "max_d2u_half"),
                                                 ("pinf", "d2u_seminorm_0")):
            series.setdefault((r["experiment"], r["quantity"], r["pair"]), []).append((r["N"], r["value"]))
    for (exp, q, pair), pts in sorted(series.items()):
        pts.sort()
        for (n0, v0), (n1, v1) in zip(pts, pts[1:]):
            if exp == "solve":
                if v0 > 0 and v1 > 0:
                    out.append(record(exp, pair, n1, "l2_order", math.log(v0 / v1) / math.log(n1 / n0)))
            elif q == "max_d2u_half":
                out.append(record(exp, pair, n1, "max_d2u_increment", v1 - v0))
            elif v0 > 0:
                out.append(record(exp, pair, n1, "seminorm_relative_change", abs(v1 - v0) / v0))
    return out


def run(cfg: RunConfig) -> RunReport:
    cfg.validate()
    start = time.perf_counter()
    kinds = SUITE_PARTS if cfg.subcommand == "suite" else (cfg.subcommand,)
    tasks = [(k, cfg, pid, N) for k in kinds for pid in cfg.pairs for N in sorted(set(cfg.N))]
    workers = min(cfg.effective_workers, len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_call, tasks))
    else:
        results = [_call(t) for t in tasks]
    records, profiles = [], []
    for recs, profs in results:
        records.extend(recs)
        profiles.extend(profs)
    records.extend(_refinement_records(records))
    for r in records:
        if isinstance(r["value"], (np.floating, np.integer)):
            r["value"] = r["value"].item()
    profiles.sort(key=lambda p: p["name"])
    return RunReport(config=cfg.as_dict(), records=records, profiles=profiles, version=artifact_version(),
                     seed=cfg.seed, wall_time=time.perf_counter() - start)
