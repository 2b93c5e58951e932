"""Closed-form pairs (u, f) with Delta u = f on the unit disk.

Radial pairs u = phi(|x|) get their derivatives from phi' and phi'':

    Du   = (phi'/r) x
    D^2u = phi'' xhat xhat^T + (phi'/r) (I - xhat xhat^T)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .field import (
    ScalarField,
    SymTensorField,
    VectorField,
    build_grid,
    laplacian_5pt,
    sample_analytic,
    sample_tensor,
    sample_vector,
)

PI = np.pi
TAGS = ("smooth", "harmonic", "bmo-singular", "lp-only")


@dataclass(frozen=True)
class AnalyticPair:
    id: str
    tag: str
    u: Callable
    f: Callable
    du: Callable | None = None
    d2u: Callable | None = None

    def g(self, x, y):
        """Boundary trace: u's formula restricted to the circle."""
        return self.u(x, y)

    @property
    def singular(self) -> bool:
        return self.tag in ("bmo-singular", "lp-only")

    def sample(self, N: int) -> tuple[ScalarField, ScalarField]:
        grid, mask = build_grid(N)
        return sample_analytic(grid, mask, self.u), sample_analytic(grid, mask, self.f)

    def sample_gradient(self, N: int) -> VectorField:
        if self.du is None:
            raise ConfigurationError(f"pair {self.id!r} has no closed-form gradient")
        return sample_vector(*build_grid(N), self.du)

    def sample_hessian(self, N: int) -> SymTensorField:
        if self.d2u is None:
            raise ConfigurationError(f"pair {self.id!r} has no closed-form Hessian")
        return sample_tensor(*build_grid(N), self.d2u)

    def scaled(self, lam: float) -> "AnalyticPair":
        s = lambda fn: None if fn is None else (lambda x, y: _scale(fn(x, y), lam))  # noqa: E731
        return AnalyticPair(self.id, self.tag, s(self.u), s(self.f), s(self.du), s(self.d2u))


def _scale(v, lam):
    if isinstance(v, tuple):
        return tuple(lam * c for c in v)
    return lam * v


def _radial(phi, dphi_r, ddphi):
    """Build (u, du, d2u) from phi(r), phi'(r)/r and phi''(r)."""

    def u(x, y):
        return phi(np.hypot(x, y))

    def du(x, y):
        q = dphi_r(np.hypot(x, y))
        return q * x, q * y

    def d2u(x, y):
        r = np.hypot(x, y)
        a, b = ddphi(r), dphi_r(r)
        cx, cy = x / r, y / r
        return b + (a - b) * cx * cx, (a - b) * cx * cy, b + (a - b) * cy * cy

    return u, du, d2u


def _quad():
    return AnalyticPair(
        "quad", "smooth",
        u=lambda x, y: 0.5 * (x * x + y * y),
        f=lambda x, y: 2.0 + 0.0 * x,
        du=lambda x, y: (x, y),
        d2u=lambda x, y: (1.0 + 0 * x, 0.0 * x, 1.0 + 0 * x),
    )


def _harmonic_cubic():
    return AnalyticPair(
        "harmonic-cubic", "harmonic",
        u=lambda x, y: x ** 3 - 3 * x * y * y,
        f=lambda x, y: 0.0 * x,
        du=lambda x, y: (3 * x * x - 3 * y * y, -6 * x * y),
        d2u=lambda x, y: (6 * x, -6 * y, -6 * x),
    )


def _sine():
    s = lambda x, y: np.sin(PI * x) * np.sin(PI * y)  # noqa: E731
    return AnalyticPair(
        "sine", "smooth",
        u=s,
        f=lambda x, y: -2 * PI ** 2 * s(x, y),
        du=lambda x, y: (PI * np.cos(PI * x) * np.sin(PI * y), PI * np.sin(PI * x) * np.cos(PI * y)),
        d2u=lambda x, y: (-PI ** 2 * s(x, y), PI ** 2 * np.cos(PI * x) * np.cos(PI * y), -PI ** 2 * s(x, y)),
    )


def _log_radial():
    u, du, d2u = _radial(
        lambda r: r * r * (np.log(r) - 1) / 4,
        lambda r: np.log(r) / 2 - 0.25,
        lambda r: np.log(r) / 2 + 0.25,
    )
    return AnalyticPair("log-radial", "bmo-singular", u, lambda x, y: np.log(np.hypot(x, y)), du, d2u)


def _quartic():
    return AnalyticPair(
        "quartic", "smooth",
        u=lambda x, y: (x * x + y * y) ** 2,
        f=lambda x, y: 16 * (x * x + y * y),
        du=lambda x, y: (4 * (x * x + y * y) * x, 4 * (x * x + y * y) * y),
        d2u=lambda x, y: (4 * (x * x + y * y) + 8 * x * x, 8 * x * y, 4 * (x * x + y * y) + 8 * y * y),
    )


def _lp_only(a: float):
    if not 0 < a < 1:
        raise ConfigurationError(f"lp-only exponent must lie in (0, 1), got {a}")
    b = 2.0 - a
    u, du, d2u = _radial(
        lambda r: r ** b / b ** 2,
        lambda r: r ** (-a) / b,
        lambda r: (b - 1) * r ** (-a) / b,
    )
    return AnalyticPair(f"lp-only({a:g})", "lp-only", u, lambda x, y: np.hypot(x, y) ** (-a), du, d2u)


_BUILTIN = {
    "quad": _quad,
    "harmonic-cubic": _harmonic_cubic,
    "sine": _sine,
    "log-radial": _log_radial,
    "quartic": _quartic,
    "lp-only(0.5)": lambda: _lp_only(0.5),
}

_LP = re.compile(r"^lp-only(?:\(([0-9.eE+-]+)\))?$")


def list_pairs() -> list[str]:
    return list(_BUILTIN)


def get_pair(pair_id: str) -> AnalyticPair:
    if pair_id in _BUILTIN:
        return _BUILTIN[pair_id]()
    m = _LP.match(pair_id)
    if m:
        try:
            a = float(m.group(1)) if m.group(1) else 0.5
        except ValueError:
            raise ConfigurationError(f"unknown pair id {pair_id!r}") from None
        return _lp_only(a)
    raise ConfigurationError(f"unknown pair id {pair_id!r}; known: {', '.join(list_pairs())}")


@dataclass(frozen=True)
class PairValidation:
    pair: str
    N: int
    max_defect: float
    l2_defect: float
    excluded_cells: int


def pair_validate(pair: AnalyticPair, N: int) -> PairValidation:
    """Five-point consistency defect |Delta_h u - f| of the sampled pair.

    For singular tags, cells within 2h (sup norm) of the origin are left out;
    with even N that is the 4 x 4 block around the vertex at the origin.
    """
    if N < 64:
        raise ConfigurationError(f"pair validation needs N >= 64, got {N}")
    u, f = pair.sample(N)
    defect = laplacian_5pt(u) - f
    cells = np.array(defect.support)
    excluded = 0
    if pair.singular:
        g = u.grid
        block = (np.abs(g.X) < 2 * g.h) & (np.abs(g.Y) < 2 * g.h)
        excluded = int((cells & block).sum())
        cells &= ~block
    d = np.abs(defect.values[cells])
    return PairValidation(pair.id, N, float(d.max()), float(np.sqrt(np.sum(d * d) * u.grid.h ** 2)), excluded)

