"""Dirichlet Poisson solves on the masked disk and harmonic replacement.

The disk solver uses the five-point Laplacian with Shortley-Weller
closure: when a stencil arm leaves the mask it is shortened to the point
where it meets the unit circle, and the boundary datum is evaluated there.
For arms of length a (east) and b (west) the x part of the operator is

    2/(a+b) * ((u_E - u_P)/a - (u_P - u_W)/b),

which is exact on quadratics.  Systems are solved with a sparse LU
factorisation followed by iterative refinement until the relative
residual ||b - A x|| / ||b|| meets the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, SolverError
from .field import (
    AXIS_NEIGHBOURS,
    BallRegion,
    ScalarField,
    _shift,
    build_grid,
    erode,
    hessian,
    laplacian_5pt,
)
from .reports import EstimateReport


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 50
    scheme: str = "shortley-weller"

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigurationError(f"solver tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.scheme != "shortley-weller":
            raise ConfigurationError(f"unknown boundary scheme {self.scheme!r}")


@dataclass(frozen=True, eq=False)
class SolveResult:
    solution: ScalarField
    iterations: int
    residual: float
    scheme: str
    history: list[float] = field(default_factory=list)


def _solve_sparse(A: sp.csr_matrix, b: np.ndarray, cfg: SolverConfig):
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0, [0.0]
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise ConfigurationError(f"singular system ({exc}); mask too coarse?") from exc
    x = np.zeros_like(b)
    r = b.copy()
    history = []
    for it in range(1, cfg.max_iter + 1):
        x = x + lu.solve(r)
        r = b - A @ x
        rel = float(np.linalg.norm(r)) / bnorm
        history.append(rel)
        if not math.isfinite(rel):
            break
        if rel <= cfg.tol:
            return x, it, rel, history
    raise SolverError(f"no convergence to tol={cfg.tol:g} after {len(history)} iterations "
                      f"(last relative residual {history[-1]:.3e})", history)


def _circle_arm(cx: np.ndarray, cy: np.ndarray, ex: int, ey: int) -> np.ndarray:
    """Distance along (ex, ey) from interior points to the unit circle."""
    ce = cx * ex + cy * ey
    return -ce + np.sqrt(ce * ce - (cx * cx + cy * cy) + 1.0)


def poisson_dirichlet(f: ScalarField, g: Callable, cfg: SolverConfig | None = None) -> SolveResult:
    """Solve Delta u = f in the disk, u = g on the unit circle."""
    cfg = cfg or SolverConfig()
    grid = f.grid
    _, disk = build_grid(grid.N)
    if not np.array_equal(f.support, disk.cells):
        raise ConfigurationError("right-hand side must be defined on exactly the disk mask")
    cells = disk.cells
    n = int(cells.sum())
    index = np.full(grid.shape, -1, dtype=np.int64)
    index[cells] = np.arange(n)
    cx, cy = grid.X[cells], grid.Y[cells]
    h = grid.h

    arms, nbr, bval = {}, {}, {}
    for di, dj in AXIS_NEIGHBOURS:
        inside = _shift(cells, di, dj, False)[cells]
        arm = np.full(n, h)
        t = _circle_arm(cx[~inside], cy[~inside], di, dj)
        arm[~inside] = np.minimum(t, h)
        gx, gy = cx[~inside] + di * arm[~inside], cy[~inside] + dj * arm[~inside]
        vals = np.zeros(n)
        with np.errstate(all="ignore"):
            vals[~inside] = np.broadcast_to(np.asarray(g(gx, gy), dtype=float), gx.shape)
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("boundary data is not finite on the unit circle")
        arms[di, dj] = arm
        nbr[di, dj] = np.where(inside, _shift(index, di, dj, -1)[cells], -1)
        bval[di, dj] = vals

    rows, cols, data = [], [], []
    diag = np.zeros(n)
    rhs = f.values[cells].copy()
    ids = np.arange(n)
    for plus, minus in (((1, 0), (-1, 0)), ((0, 1), (0, -1))):
        a, b = arms[plus], arms[minus]
        for key, arm in ((plus, a), (minus, b)):
            coef = 2.0 / (arm * (a + b))
            diag -= coef
            known = nbr[key] < 0
            rhs[known] -= coef[known] * bval[key][known]
            rows.append(ids[~known])
            cols.append(nbr[key][~known])
            data.append(coef[~known])
    rows.append(ids)
    cols.append(ids)
    data.append(diag)
    A = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))

    x, it, rel, hist = _solve_sparse(A, rhs, cfg)
    out = np.full(grid.shape, np.nan)
    out[cells] = x
    return SolveResult(ScalarField(grid, cells, out), it, rel, cfg.scheme, hist)


def harmonic_replacement(u: ScalarField, R: BallRegion, cfg: SolverConfig | None = None) -> ScalarField:
    """Discrete harmonic function in R agreeing with u on R's boundary ring.

    The ring is the set of cells of R with an axis neighbour outside R.
    """
    cfg = cfg or SolverConfig()
    grid = u.grid
    region = np.array(R.cells)
    if np.any(region & ~u.support):
        raise ConfigurationError("harmonic replacement needs u on every cell of the region")
    interior = erode(region)
    ring = region & ~interior
    n = int(interior.sum())
    if n == 0:
        raise ConfigurationError("region has no interior cells")
    index = np.full(grid.shape, -1, dtype=np.int64)
    index[interior] = np.arange(n)
    ids = np.arange(n)
    uring = np.where(ring, u.values, 0.0)
    rhs = np.zeros(n)
    rows, cols = [ids], [ids]
    data = [np.full(n, -4.0)]
    for di, dj in AXIS_NEIGHBOURS:
        nb = _shift(index, di, dj, -1)[interior]
        known = nb < 0
        rhs[known] -= _shift(uring, di, dj, 0.0)[interior][known]
        rows.append(ids[~known])
        cols.append(nb[~known])
        data.append(np.ones(int((~known).sum())))
    A = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    x, *_ = _solve_sparse(A, rhs, cfg)
    out = np.where(ring, u.values, np.nan)
    out[interior] = x
    return ScalarField(grid, region, out)


def residual(u: ScalarField, f: ScalarField) -> ScalarField:
    """Delta_h u - f on the cells where the five-point stencil fits."""
    return laplacian_5pt(u) - f


def _relative_defect(v: ScalarField, ftilde: ScalarField, cells: np.ndarray) -> float:
    res = residual(v, ftilde)
    use = cells & res.support
    r = np.linalg.norm(res.values[use])
    scale = max(np.linalg.norm(ftilde.values[use]), np.linalg.norm(laplacian_5pt(v).values[use]))
    if scale == 0.0:
        return 0.0 if r == 0.0 else math.inf
    return float(r / scale)


def w22_interior_check(v: ScalarField, ftilde: ScalarField, inner: BallRegion, outer: BallRegion,
                       cfg: SolverConfig | None = None) -> EstimateReport:
    """||D^2 v||*_{L^2(inner)} against ||v||*_{L^2(outer)} + ||f~||*_{L^2(outer)}."""
    cfg = cfg or SolverConfig()
    if np.any(inner.cells & ~outer.cells) or inner.count >= outer.count:
        raise ConfigurationError("inner region must lie strictly inside the outer region")
    defect = _relative_defect(v, ftilde, np.asarray(outer.cells))
    if defect > 100 * cfg.tol:
        raise ConfigurationError(
            f"Delta_h v != f~ on the outer region (relative defect {defect:.3e} > {100 * cfg.tol:.1e})")
    hess = hessian(v)
    if np.any(inner.cells & ~hess.support):
        raise ConfigurationError("inner region reaches cells where the Hessian is undefined")
    frob = inner.local(hess.frobenius().values)
    lhs = float(math.sqrt(np.mean(frob ** 2)))
    v_out = float(math.sqrt(np.mean(outer.local(v.values) ** 2)))
    f_out = float(math.sqrt(np.mean(outer.local(ftilde.values) ** 2)))
    return EstimateReport(
        "w22-interior", v.grid.N, lhs, v_out + f_out,
        norms={"d2v_inner": lhs, "v_outer": v_out, "f_outer": f_out, "relative_defect": defect},
        config={"inner_radius": inner.radius, "outer_radius": outer.radius, "tol": cfg.tol},
    )
