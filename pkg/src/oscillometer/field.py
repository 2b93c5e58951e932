"""Cell-centred discretisation of the unit disk and discrete calculus.

The square [-1, 1]^2 is split into N x N cells of width h = 2/N.  Cell
(i, j) has centre (-1 + (i + 1/2) h, -1 + (j + 1/2) h); axis 0 is x and
axis 1 is y.  The disk mask keeps the cells whose centres satisfy |c| < 1.

Ball membership is decided in *index units*: a point x0 is mapped to
p = (x0 + 1)/h - 1/2 and a cell belongs to B_r(x0) when
|(i, j) - p|^2 < (r/h)^2.  For dyadic N every quantity in that test is
exact, so cells on a dyadic circle are classified the same way by every
code path in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigurationError, GridMismatchError, InputError, UnderResolvedError

DEFAULT_MIN_CELLS = 32


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridSpec:
    N: int
    dim: int = 2

    def __post_init__(self):
        if self.dim != 2:
            raise ConfigurationError(f"only dim=2 is implemented, got dim={self.dim}")
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ConfigurationError(f"N must be an integer, got {self.N!r}")
        if self.N < 8 or self.N % 2:
            raise ConfigurationError(f"N must be even and >= 8, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return 2.0 / self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @cached_property
    def centers(self) -> np.ndarray:
        """1-D array of cell-centre coordinates along either axis."""
        return _frozen(-1.0 + (np.arange(self.N) + 0.5) * self.h)

    @cached_property
    def X(self) -> np.ndarray:
        return _frozen(np.broadcast_to(self.centers[:, None], self.shape).copy())

    @cached_property
    def Y(self) -> np.ndarray:
        return _frozen(np.broadcast_to(self.centers[None, :], self.shape).copy())

    def to_index(self, point) -> tuple[float, float]:
        """Fractional cell index of a physical point."""
        x, y = point
        return (x + 1.0) / self.h - 0.5, (y + 1.0) / self.h - 0.5

    def center_of(self, i: int, j: int) -> tuple[float, float]:
        return float(self.centers[i]), float(self.centers[j])


@dataclass(frozen=True, eq=False)
class DomainMask:
    """A set of cells on a grid; the disk mask or any subset of it."""

    grid: GridSpec
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != self.grid.shape:
            raise GridMismatchError(f"mask shape {cells.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "cells", _frozen(cells))

    @property
    def count(self) -> int:
        return int(self.cells.sum())

    @property
    def area(self) -> float:
        return self.count * self.grid.h ** 2


def build_grid(N: int) -> tuple[GridSpec, DomainMask]:
    grid = GridSpec(N)
    idx = np.arange(N) - (N / 2 - 0.5)
    d2 = idx[:, None] ** 2 + idx[None, :] ** 2
    mask = DomainMask(grid, d2 < (N / 2) ** 2)
    if mask.count == 0:
        raise ConfigurationError(f"empty disk mask for N={N}")
    return grid, mask


def _check_grid(a: GridSpec, b: GridSpec) -> None:
    if a.N != b.N:
        raise GridMismatchError(f"grid mismatch: N={a.N} vs N={b.N}")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One value per cell of ``support``; NaN elsewhere."""

    grid: GridSpec
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=bool)
        values = np.array(self.values, dtype=float)
        if support.shape != self.grid.shape or values.shape != self.grid.shape:
            raise GridMismatchError("field arrays must have the grid's shape")
        if not np.all(np.isfinite(values[support])):
            i, j = np.argwhere(support & ~np.isfinite(values))[0]
            raise InputError(f"non-finite value at cell ({i}, {j}), centre {self.grid.center_of(i, j)}")
        values[~support] = np.nan
        object.__setattr__(self, "support", _frozen(support))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def mask(self) -> DomainMask:
        return DomainMask(self.grid, self.support)

    @property
    def count(self) -> int:
        return int(self.support.sum())

    @property
    def data(self) -> np.ndarray:
        """Values on the support, in row-major cell order."""
        return self.values[self.support]

    def restrict(self, cells: np.ndarray) -> "ScalarField":
        cells = np.asarray(cells, dtype=bool)
        if np.any(cells & ~self.support):
            raise ConfigurationError("restriction set is not contained in the field's support")
        return ScalarField(self.grid, cells, self.values)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ScalarField":
        out = np.full(self.grid.shape, np.nan)
        out[self.support] = fn(self.data)
        return ScalarField(self.grid, self.support, out)

    def _binary(self, other, op) -> "ScalarField":
        if isinstance(other, ScalarField):
            _check_grid(self.grid, other.grid)
            support = self.support & other.support
            out = np.full(self.grid.shape, np.nan)
            out[support] = op(self.values[support], other.values[support])
            return ScalarField(self.grid, support, out)
        return self.map(lambda v: op(v, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self.map(lambda v: other - v)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(np.negative)

    def __abs__(self):
        return self.map(np.abs)


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: GridSpec
    support: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lost_cells: int = 0

    def component(self, name: str) -> ScalarField:
        return ScalarField(self.grid, self.support, getattr(self, name))

    def norm(self) -> ScalarField:
        return ScalarField(self.grid, self.support, np.hypot(self.x, self.y))


@dataclass(frozen=True, eq=False)
class SymTensorField:
    """Symmetric 2x2 tensor per cell; the xy entry is stored once."""

    grid: GridSpec
    support: np.ndarray
    xx: np.ndarray
    xy: np.ndarray
    yy: np.ndarray
    lost_cells: int = 0
    source: str = "central-difference"

    names = ("xx", "xy", "yy")

    def component(self, name: str) -> ScalarField:
        return ScalarField(self.grid, self.support, getattr(self, name))

    def components(self) -> dict[str, ScalarField]:
        return {n: self.component(n) for n in self.names}

    def frobenius(self) -> ScalarField:
        return ScalarField(self.grid, self.support,
                           np.sqrt(self.xx ** 2 + 2.0 * self.xy ** 2 + self.yy ** 2))

    def max_abs(self) -> ScalarField:
        """Largest absolute component per cell."""
        stacked = np.stack([np.abs(self.xx), np.abs(self.xy), np.abs(self.yy)])
        return ScalarField(self.grid, self.support, stacked.max(axis=0))

    def trace(self) -> ScalarField:
        return ScalarField(self.grid, self.support, self.xx + self.yy)


def sample_analytic(grid: GridSpec, mask: DomainMask, expr: Callable) -> ScalarField:
    """Evaluate ``expr(x, y)`` at every cell centre of ``mask``."""
    _check_grid(grid, mask.grid)
    X, Y = grid.X[mask.cells], grid.Y[mask.cells]
    with np.errstate(all="ignore"):
        vals = np.broadcast_to(np.asarray(expr(X, Y), dtype=float), X.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.argmax(bad))
        i, j = np.argwhere(mask.cells)[k]
        raise InputError(f"expression is not finite at cell ({i}, {j}), centre ({X[k]!r}, {Y[k]!r})")
    out = np.full(grid.shape, np.nan)
    out[mask.cells] = vals
    return ScalarField(grid, mask.cells, out)


def sample_tensor(grid: GridSpec, mask: DomainMask, hess: Callable) -> SymTensorField:
    """Sample a closed-form Hessian ``hess(x, y) -> (xx, xy, yy)``."""
    comps = [sample_analytic(grid, mask, lambda x, y, k=k: hess(x, y)[k]) for k in range(3)]
    return SymTensorField(grid, mask.cells, *(c.values for c in comps), source="analytic")


def sample_vector(grid: GridSpec, mask: DomainMask, grad: Callable) -> VectorField:
    comps = [sample_analytic(grid, mask, lambda x, y, k=k: grad(x, y)[k]) for k in range(2)]
    return VectorField(grid, mask.cells, comps[0].values, comps[1].values)


# -- ball regions -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BallRegion:
    grid: GridSpec
    center: tuple[float, float]
    radius: float
    cells: np.ndarray
    window: tuple[slice, slice] = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.cells[self.window].sum())

    @property
    def area(self) -> float:
        return self.count * self.grid.h ** 2

    def local(self, arr: np.ndarray) -> np.ndarray:
        """Entries of a grid-shaped array on this region, row-major order."""
        return arr[self.window][self.cells[self.window]]

    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical displacements (x - x0, y - y0) of the region's cells."""
        g = self.grid
        return self.local(g.X) - self.center[0], self.local(g.Y) - self.center[1]


def index_ball(grid: GridSpec, x0, r: float) -> tuple[np.ndarray, tuple[slice, slice]]:
    """Cells whose centres lie in the open ball B_r(x0), unrestricted by any mask."""
    pi, pj = grid.to_index(x0)
    R = r / grid.h
    R2 = R * R
    N = grid.N
    i0, i1 = max(0, math.ceil(pi - R)), min(N - 1, math.floor(pi + R))
    j0, j1 = max(0, math.ceil(pj - R)), min(N - 1, math.floor(pj + R))
    cells = np.zeros(grid.shape, dtype=bool)
    if i0 > i1 or j0 > j1:
        return cells, (slice(0, 0), slice(0, 0))
    di = np.arange(i0, i1 + 1) - pi
    dj = np.arange(j0, j1 + 1) - pj
    win = (slice(i0, i1 + 1), slice(j0, j1 + 1))
    cells[win] = di[:, None] ** 2 + dj[None, :] ** 2 < R2
    return cells, win


def ball_region(mask: DomainMask, x0, r: float, min_cells: int = DEFAULT_MIN_CELLS) -> BallRegion:
    """Resolve B_r(x0) intersected with ``mask`` to a cell set."""
    x0 = (float(x0[0]), float(x0[1]))
    if not r > 0:
        raise ConfigurationError(f"ball radius must be positive, got {r}")
    if math.hypot(*x0) > 1.0 + 1e-12:
        raise ConfigurationError(f"ball centre {x0} lies outside the closed unit disk")
    cells, win = index_ball(mask.grid, x0, r)
    cells &= mask.cells
    region = BallRegion(mask.grid, x0, float(r), _frozen(cells), win)
    if region.count < min_cells:
        raise UnderResolvedError(
            f"B_{r:g}{x0} resolves to {region.count} cells on N={mask.grid.N}; need >= {min_cells}")
    return region


def disk_row_extents(R: float) -> list[tuple[int, int]]:
    """Row offsets di and half-widths w with di^2 + dj^2 < R^2 for |dj| <= w.

    Describes the lattice disk around a cell centre, using the same strict
    test as :func:`index_ball`.
    """
    R2 = R * R
    out = []
    for di in range(-math.floor(R), math.floor(R) + 1):
        rem = R2 - di * di
        if rem <= 0:
            continue
        w = math.isqrt(max(0, math.ceil(rem)))
        while w >= 0 and di * di + w * w >= R2:
            w -= 1
        if w >= 0:
            out.append((di, w))
    return out


def integrate(f: ScalarField, R: BallRegion) -> float:
    _check_grid(f.grid, R.grid)
    if np.any(R.cells[R.window] & ~f.support[R.window]):
        raise ConfigurationError("region contains cells where the field has no value")
    return float(R.local(f.values).sum() * f.grid.h ** 2)


# -- derivatives ------------------------------------------------------------

def _shift(a: np.ndarray, di: int, dj: int, fill):
    """out[i, j] = a[i + di, j + dj], ``fill`` outside the array."""
    out = np.full_like(a, fill)
    N0, N1 = a.shape
    src = (slice(max(di, 0), N0 + min(di, 0)), slice(max(dj, 0), N1 + min(dj, 0)))
    dst = (slice(max(-di, 0), N0 + min(-di, 0)), slice(max(-dj, 0), N1 + min(-dj, 0)))
    out[dst] = a[src]
    return out


AXIS_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))
ALL_NEIGHBOURS = AXIS_NEIGHBOURS + ((1, 1), (1, -1), (-1, 1), (-1, -1))


def erode(cells: np.ndarray, neighbours=AXIS_NEIGHBOURS) -> np.ndarray:
    out = np.array(cells, dtype=bool)
    for di, dj in neighbours:
        out &= _shift(cells, di, dj, False)
    return out


def gradient(u: ScalarField) -> VectorField:
    h = u.grid.h
    support = erode(u.support)
    v = u.values
    dx = (_shift(v, 1, 0, np.nan) - _shift(v, -1, 0, np.nan)) / (2 * h)
    dy = (_shift(v, 0, 1, np.nan) - _shift(v, 0, -1, np.nan)) / (2 * h)
    dx[~support] = np.nan
    dy[~support] = np.nan
    return VectorField(u.grid, _frozen(support), _frozen(dx), _frozen(dy),
                       lost_cells=u.count - int(support.sum()))


def hessian(u: ScalarField) -> SymTensorField:
    h2 = u.grid.h ** 2
    support = erode(u.support, ALL_NEIGHBOURS)
    v = u.values
    s = lambda di, dj: _shift(v, di, dj, np.nan)  # noqa: E731
    xx = (s(1, 0) - 2 * v + s(-1, 0)) / h2
    yy = (s(0, 1) - 2 * v + s(0, -1)) / h2
    xy = (s(1, 1) - s(1, -1) - s(-1, 1) + s(-1, -1)) / (4 * h2)
    for a in (xx, xy, yy):
        a[~support] = np.nan
    return SymTensorField(u.grid, _frozen(support), _frozen(xx), _frozen(xy), _frozen(yy),
                          lost_cells=u.count - int(support.sum()))


def laplacian_5pt(u: ScalarField) -> ScalarField:
    """Five-point Laplacian on cells whose four axis neighbours carry values."""
    h2 = u.grid.h ** 2
    support = erode(u.support)
    v = u.values
    lap = (_shift(v, 1, 0, np.nan) + _shift(v, -1, 0, np.nan) + _shift(v, 0, 1, np.nan)
           + _shift(v, 0, -1, np.nan) - 4 * v) / h2
    return ScalarField(u.grid, support, np.where(support, lap, np.nan))


def l_p_norm(f: ScalarField, p: float, cells: np.ndarray | None = None) -> float:
    """Unnormalised cell-centre L^p norm, (sum |f|^p h^2)^(1/p)."""
    vals = f.data if cells is None else f.values[np.asarray(cells, dtype=bool)]
    if np.isnan(vals).any():
        raise ConfigurationError("norm requested over cells where the field has no value")
    h2 = f.grid.h ** 2
    if p == math.inf:
        return float(np.abs(vals).max())
    a = np.abs(vals)
    scale = a.max() if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(scale * (np.sum((a / scale) ** p) * h2) ** (1.0 / p))


def disk_cells(grid: GridSpec, mask: DomainMask | np.ndarray, radius: float, x0=(0.0, 0.0)) -> np.ndarray:
    """Mask cells with centres in B_radius(x0); no minimum-count check."""
    cells, _ = index_ball(grid, x0, radius)
    m = mask.cells if isinstance(mask, DomainMask) else np.asarray(mask, dtype=bool)
    return cells & m
