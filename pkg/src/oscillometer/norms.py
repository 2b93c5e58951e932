"""Means, starred norms, mean oscillations, BMO seminorms and the sharp
maximal function on discrete fields.

The supremum over radii 0 < r < r0 is taken over a geometric ladder of
radii r0 * rho**k.  Rungs whose ball holds fewer than ``min_cells`` cells
are dropped and recorded as truncated.

Two evaluation paths exist.  :func:`bmo_seminorm_at` works at an arbitrary
point with an explicit two-pass mean/deviation over the ball.  The field
routines (:func:`sharp_maximal_field`, :func:`bmo_seminorm_domain`) need
every cell centre at once and, for p = 2, use row prefix sums of the
(globally centred) field and its square so each rung costs O(N^2 r/h).
Both paths select exactly the same cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UnderResolvedError
from .field import (
    DEFAULT_MIN_CELLS,
    BallRegion,
    ScalarField,
    ball_region,
    disk_cells,
    disk_row_extents,
    integrate,
    l_p_norm,
)

INF = math.inf


@dataclass(frozen=True)
class ScaleLadder:
    r0: float = 0.25
    rho: float = 0.5
    K: int = 6
    min_cells: int = DEFAULT_MIN_CELLS

    def __post_init__(self):
        if not self.r0 > 0:
            raise ConfigurationError(f"ladder r0 must be positive, got {self.r0}")
        if not 0 < self.rho < 1:
            raise ConfigurationError(f"ladder rho must lie in (0, 1), got {self.rho}")
        if self.K < 1:
            raise ConfigurationError(f"ladder needs K >= 1 rungs, got {self.K}")

    @classmethod
    def data(cls, **kw) -> "ScaleLadder":
        """Ladder for data f on B_1 (outer radius 1, cut by the mask)."""
        return cls(r0=1.0, **kw)

    @property
    def radii(self) -> list[float]:
        return [self.r0 * self.rho ** k for k in range(self.K)]

    def as_dict(self) -> dict:
        return {"r0": self.r0, "rho": self.rho, "K": self.K, "min_cells": self.min_cells}


@dataclass(frozen=True)
class BmoReport:
    center: tuple[float, float]
    p: float
    radii: list[float]
    values: list[float]
    counts: list[int]
    truncated: list[float]
    ladder: ScaleLadder = field(default_factory=ScaleLadder)

    @property
    def seminorm(self) -> float:
        return max(self.values)


def _check_p(p) -> float:
    if isinstance(p, str):
        if p.strip().lower() not in ("inf", "infinity"):
            raise ConfigurationError(f"unrecognised exponent {p!r}")
        return INF
    p = float(p)
    if not p >= 1:
        raise ConfigurationError(f"exponent p must be >= 1, got {p}")
    return p


def _starred(a: np.ndarray, p: float) -> float:
    a = np.abs(a)
    if p == INF:
        return float(a.max())
    if p == 1:
        return float(a.mean())
    if p == 2:
        return float(math.sqrt(np.mean(a * a)))
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * np.mean((a / scale) ** p) ** (1.0 / p))


def _region_values(f: ScalarField, R: BallRegion) -> np.ndarray:
    integrate(f, R)  # grid and support checks
    return R.local(f.values)


def mean(f: ScalarField, R: BallRegion) -> float:
    return integrate(f, R) / R.area


def starred_norm(f: ScalarField, R: BallRegion, p=2.0) -> float:
    p = _check_p(p)
    return _starred(_region_values(f, R), p)


def oscillation(f: ScalarField, R: BallRegion, p=2.0) -> float:
    p = _check_p(p)
    v = _region_values(f, R)
    return _starred(v - v.mean(), p)


def bmo_seminorm_at(f: ScalarField, x0, ladder: ScaleLadder | None = None, p=2.0) -> BmoReport:
    ladder = ladder or ScaleLadder()
    p = _check_p(p)
    radii, values, counts, truncated = [], [], [], []
    for r in ladder.radii:
        try:
            R = ball_region(f.mask, x0, r, ladder.min_cells)
        except UnderResolvedError:
            truncated.append(r)
            continue
        radii.append(r)
        values.append(oscillation(f, R, p))
        counts.append(R.count)
    if not values:
        raise UnderResolvedError(
            f"no rung of the ladder {ladder.as_dict()} resolves at {tuple(x0)} on N={f.grid.N}")
    return BmoReport((float(x0[0]), float(x0[1])), p, radii, values, counts, truncated, ladder)


# -- whole-field evaluation -------------------------------------------------

def _disk_moments(vals: np.ndarray, support: np.ndarray, R: float):
    """Count, sum and sum of squares over the lattice disk at every cell."""
    N = vals.shape[0]
    pad = math.floor(R) + 1
    A = np.where(support, vals, 0.0)
    cums = []
    for arr in (support.astype(float), A, A * A):
        P = np.zeros((N + 2 * pad, N + 2 * pad + 1))
        P[pad:pad + N, pad + 1:pad + N + 1] = arr
        cums.append(np.cumsum(P, axis=1))
    out = [np.zeros((N, N)) for _ in range(3)]
    for di, w in disk_row_extents(R):
        rows = slice(pad + di, pad + di + N)
        hi = slice(pad + 1 + w, pad + 1 + w + N)
        lo = slice(pad - w, pad - w + N)
        for o, c in zip(out, cums):
            o += c[rows, hi] - c[rows, lo]
    return out


def oscillation_maps(f: ScalarField, ladder: ScaleLadder):
    """Per-rung L^2 oscillation and cell count at every cell centre.

    Returns ``(osc, counts)`` with shape (K, N, N); entries where the ball
    is empty are NaN.
    """
    support = f.support
    vals = np.where(support, f.values, 0.0)
    if support.any():
        vals = np.where(support, vals - vals[support].mean(), 0.0)
    K = len(ladder.radii)
    osc = np.full((K,) + f.grid.shape, np.nan)
    counts = np.zeros((K,) + f.grid.shape, dtype=np.int64)
    for k, r in enumerate(ladder.radii):
        n, s1, s2 = _disk_moments(vals, support, r / f.grid.h)
        ok = n > 0
        m = np.divide(s1, n, out=np.zeros_like(s1), where=ok)
        var = np.divide(s2, n, out=np.zeros_like(s2), where=ok) - m * m
        osc[k] = np.where(ok, np.sqrt(np.maximum(var, 0.0)), np.nan)
        counts[k] = np.rint(n).astype(np.int64)
    return osc, counts


def default_centers(f: ScalarField, radius: float = 0.5, full: bool = True,
                    max_centers: int = 4096) -> np.ndarray:
    """Support cells in B_radius(0); strided to at most ``max_centers`` unless ``full``."""
    cells = disk_cells(f.grid, f.support, radius)
    if full:
        return cells
    N = f.grid.N
    idx = np.arange(N) - N // 2
    stride = 1
    while True:
        lat = (idx[:, None] % stride == 0) & (idx[None, :] % stride == 0)
        picked = cells & lat
        if picked.sum() <= max_centers:
            return picked
        stride += 1


def _as_cell_set(f: ScalarField, centers) -> np.ndarray | None:
    if centers is None:
        return None
    arr = np.asarray(centers)
    if arr.dtype == bool and arr.shape == f.grid.shape:
        return arr
    return None


def sharp_maximal_field(f: ScalarField, ladder: ScaleLadder | None = None, p=2.0,
                        centers=None) -> ScalarField:
    """f#(x) = |f|_{*,x} at every cell of ``centers`` (default: B_{1/2} cells)."""
    ladder = ladder or ScaleLadder()
    p = _check_p(p)
    cells = default_centers(f) if centers is None else np.asarray(centers, dtype=bool)
    if not cells.any():
        raise ConfigurationError("empty centre set")
    out = np.full(f.grid.shape, np.nan)
    if p == 2:
        osc, counts = oscillation_maps(f, ladder)
        usable = counts >= ladder.min_cells
        if not np.all(usable.any(axis=0)[cells]):
            i, j = np.argwhere(cells & ~usable.any(axis=0))[0]
            raise UnderResolvedError(
                f"no rung resolves at centre {f.grid.center_of(i, j)} on N={f.grid.N}")
        vals = np.where(usable, osc, -np.inf).max(axis=0)
        out[cells] = vals[cells]
    else:
        X, Y = f.grid.X, f.grid.Y
        for i, j in np.argwhere(cells):
            out[i, j] = bmo_seminorm_at(f, (X[i, j], Y[i, j]), ladder, p).seminorm
    return ScalarField(f.grid, cells, out)


def bmo_seminorm_domain(f: ScalarField, centers=None, ladder: ScaleLadder | None = None,
                        p=2.0, full: bool = False, max_centers: int = 4096) -> float:
    """max over centres of |f|_{*,x}.

    ``centers`` is a boolean cell set, a sequence of points, or None for the
    B_{1/2} cells (strided to ``max_centers`` unless ``full``).
    """
    ladder = ladder or ScaleLadder()
    cells = _as_cell_set(f, centers)
    if centers is None:
        cells = default_centers(f, full=full, max_centers=max_centers)
    if cells is not None:
        return float(np.nanmax(sharp_maximal_field(f, ladder, p, cells).values))
    pts = list(centers)
    if not pts:
        raise ConfigurationError("empty centre list")
    return max(bmo_seminorm_at(f, x, ladder, p).seminorm for x in pts)


def bmo_norm(f: ScalarField, ladder: ScaleLadder | None = None, **kw) -> float:
    """||f||_{L^2(mask)} + |f|_{*,Omega}, data ladder (r0 = 1) by default."""
    ladder = ladder or ScaleLadder.data()
    return l_p_norm(f, 2) + bmo_seminorm_domain(f, ladder=ladder, **kw)
