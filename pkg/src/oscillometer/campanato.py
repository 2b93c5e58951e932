"""Degree-2 polynomial approximation at shrinking scales.

A :class:`Poly2` is stored in anchored Taylor form

    P(x) = c0 + c1 . (x - a) + 1/2 (x - a)^T c2 (x - a)

so its Laplacian is trace(c2).  The iteration produces P_1, P_2, ... with
P_m approximating u on B_{R_m}(x0), R_m = r_base * eta**m, and
Delta P_m = mean of f over that ball.  Each step fits the residual
u - P_{m-1}; fitting in physical coordinates is the same as fitting the
rescaled residual (u - P_{m-1})(x0 + r y) / r**2 and scaling back, because
every operation involved is linear and commutes with the dilation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import SolverConfig, harmonic_replacement
from .errors import ConfigurationError, InsufficientDataError, NumericalError, UnderResolvedError
from .field import DEFAULT_MIN_CELLS, BallRegion, ScalarField, ball_region
from .norms import mean, starred_norm

RESOLUTION_FLOOR = 200


@dataclass(frozen=True)
class Poly2:
    anchor: tuple[float, float]
    c0: float
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        c1 = np.array(self.c1, dtype=float).reshape(2)
        c2 = np.array(self.c2, dtype=float).reshape(2, 2)
        c2 = 0.5 * (c2 + c2.T)
        c1.setflags(write=False)
        c2.setflags(write=False)
        object.__setattr__(self, "anchor", (float(self.anchor[0]), float(self.anchor[1])))
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)

    @classmethod
    def zero(cls, anchor=(0.0, 0.0)) -> "Poly2":
        return cls(anchor, 0.0, np.zeros(2), np.zeros((2, 2)))

    def __call__(self, x, y):
        dx, dy = np.asarray(x) - self.anchor[0], np.asarray(y) - self.anchor[1]
        c2 = self.c2
        return (self.c0 + self.c1[0] * dx + self.c1[1] * dy
                + 0.5 * (c2[0, 0] * dx * dx + 2 * c2[0, 1] * dx * dy + c2[1, 1] * dy * dy))

    def grad(self, x, y) -> np.ndarray:
        d = np.array([x - self.anchor[0], y - self.anchor[1]], dtype=float)
        return self.c1 + self.c2 @ d

    @property
    def laplacian(self) -> float:
        return float(self.c2[0, 0] + self.c2[1, 1])

    def reanchor(self, anchor) -> "Poly2":
        s = np.array([anchor[0] - self.anchor[0], anchor[1] - self.anchor[1]], dtype=float)
        return Poly2(anchor, float(self(*anchor)), self.c1 + self.c2 @ s, self.c2)

    def _align(self, other: "Poly2") -> "Poly2":
        return other if other.anchor == self.anchor else other.reanchor(self.anchor)

    def __add__(self, other: "Poly2") -> "Poly2":
        o = self._align(other)
        return Poly2(self.anchor, self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)

    def __sub__(self, other: "Poly2") -> "Poly2":
        o = self._align(other)
        return Poly2(self.anchor, self.c0 - o.c0, self.c1 - o.c1, self.c2 - o.c2)

    def __mul__(self, lam: float) -> "Poly2":
        return Poly2(self.anchor, lam * self.c0, lam * self.c1, lam * self.c2)

    __rmul__ = __mul__

    def sample(self, like: ScalarField) -> ScalarField:
        g = like.grid
        out = np.where(like.support, self(g.X, g.Y), np.nan)
        return ScalarField(g, like.support, out)

    def magnitude_at(self, x) -> float:
        """|P(x)| + |DP(x)| + |D^2P| with Euclidean and Frobenius norms."""
        return (abs(float(self(*x))) + float(np.linalg.norm(self.grad(*x)))
                + float(np.linalg.norm(self.c2)))


def poly_eval(P: Poly2, x) -> float:
    return float(P(x[0], x[1]))


def poly_grad(P: Poly2, x) -> np.ndarray:
    return P.grad(x[0], x[1])


def poly_hess(P: Poly2) -> np.ndarray:
    return np.array(P.c2)


def poly_laplacian(P: Poly2) -> float:
    return P.laplacian


def lsq_fit_quadratic(u: ScalarField, R: BallRegion, laplacian: float | None = None,
                      min_cells: int = 6 * DEFAULT_MIN_CELLS) -> Poly2:
    """Least-squares quadratic for u over R, anchored at R's centre.

    With ``laplacian`` given, the minimiser is taken over quadratics whose
    Laplacian equals that value.
    """
    if R.count < min_cells:
        raise UnderResolvedError(f"fit region has {R.count} cells; need >= {min_cells}")
    if np.any(R.local(~u.support)):
        raise ConfigurationError("fit region contains cells where u has no value")
    r = R.radius
    dx, dy = R.offsets()
    tx, ty = dx / r, dy / r
    z = R.local(u.values)
    if laplacian is None:
        A = np.column_stack([np.ones_like(tx), tx, ty, 0.5 * tx * tx, tx * ty, 0.5 * ty * ty])
    else:
        # c2_yy = L - c2_xx, so the yy monomial carries a known part
        A = np.column_stack([np.ones_like(tx), tx, ty, 0.5 * (tx * tx - ty * ty), tx * ty])
        z = z - 0.5 * laplacian * r * r * ty * ty
    beta, _, rank, _ = np.linalg.lstsq(A, z, rcond=None)
    if rank < A.shape[1]:
        raise NumericalError(f"rank-deficient quadratic fit (rank {rank} < {A.shape[1]})")
    c0, c1 = beta[0], beta[1:3] / r
    if laplacian is None:
        a, b, c = beta[3] / r ** 2, beta[4] / r ** 2, beta[5] / r ** 2
    else:
        a, b = beta[3] / r ** 2, beta[4] / r ** 2
        c = laplacian - a
    return Poly2(R.center, c0, c1, [[a, b], [b, c]])


def trace_correct(P: Poly2, target: float) -> Poly2:
    """Add k|x - a|^2 so that the Laplacian becomes ``target`` (n = 2)."""
    delta = 0.5 * (target - P.laplacian)
    a = P.c2[0, 0] + delta
    c = target - a
    return Poly2(P.anchor, P.c0, P.c1, [[a, P.c2[0, 1]], [P.c2[0, 1], c]])


@dataclass(frozen=True)
class KeyStepReport:
    radius: float
    eta: float
    residual: float
    harmonic_residual: float
    contraction: float
    coefficient_bound: float
    replacement_distance: float


def key_step(u: ScalarField, f: ScalarField, R: BallRegion, eta: float = 0.5,
             cfg: SolverConfig | None = None, min_cells: int = DEFAULT_MIN_CELLS) -> tuple[Poly2, KeyStepReport]:
    """Constructive quadratic approximation of u on the eta-shrunken ball.

    With t the mean of f on B_{eta r} and q = t/4 |x - x0|^2: harmonic
    replacement of u - q on R, least-squares quadratic of the replacement
    on B_{eta r}, then a Laplacian correction to t.  Subtracting q first
    makes the step exact on quadratics; the correction itself adds q back.
    """
    if not 0 < eta < 1:
        raise ConfigurationError(f"eta must lie in (0, 1), got {eta}")
    inner = ball_region(u.mask, R.center, eta * R.radius, min_cells)
    t = mean(f, inner)
    q = Poly2(R.center, 0.0, np.zeros(2), 0.5 * t * np.eye(2))
    hfield = harmonic_replacement(u - q.sample(u), R, cfg)
    Pbar = lsq_fit_quadratic(hfield, inner, min_cells=6 * min_cells)
    P = trace_correct(Pbar, t)
    res = starred_norm(u - P.sample(u), inner)
    return P, KeyStepReport(
        radius=R.radius,
        eta=eta,
        residual=res,
        harmonic_residual=starred_norm(u - (Pbar + q).sample(u), inner),
        contraction=res / R.radius ** 2,
        coefficient_bound=P.magnitude_at(R.center),
        replacement_distance=starred_norm(u.restrict(R.cells) - q.sample(u) - hfield, R),
    )


@dataclass(frozen=True)
class OscillationProfile:
    radii: list[float]
    osc: list[float]
    counts: list[int] | None = None

    def __post_init__(self):
        if len(self.radii) != len(self.osc):
            raise ConfigurationError("profile radii and oscillations differ in length")
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigurationError("profile radii must be strictly decreasing")
        if any(o < 0 for o in self.osc):
            raise ConfigurationError("oscillations must be non-negative")


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    used: list[float]
    excluded: list[float]


def decay_exponent(profile: OscillationProfile, floor: int = RESOLUTION_FLOOR) -> DecayFit:
    """Least-squares slope of log(osc) against log(r).

    Rungs with zero oscillation or fewer than ``floor`` cells are excluded.
    """
    used, excluded, lr, lo = [], [], [], []
    counts = profile.counts or [None] * len(profile.radii)
    for r, o, c in zip(profile.radii, profile.osc, counts):
        if o > 0 and (c is None or c >= floor):
            used.append(r)
            lr.append(math.log(r))
            lo.append(math.log(o))
        else:
            excluded.append(r)
    if len(used) < 3:
        raise InsufficientDataError(f"decay fit needs >= 3 usable rungs, have {len(used)}")
    slope, intercept = np.polyfit(lr, lo, 1)
    return DecayFit(float(slope), float(intercept), used, excluded)


@dataclass
class IterationState:
    x0: tuple[float, float]
    eta: float
    r_base: float
    mode: str
    polys: list[Poly2]
    radii: list[float] = field(default_factory=list)
    osc: list[float] = field(default_factory=list)
    f_means: list[float] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    requested_levels: int = 0
    steps: list[KeyStepReport] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.osc)

    @property
    def truncated(self) -> int:
        return self.requested_levels - self.levels

    @property
    def normalized(self) -> list[float]:
        """osc_m / eta^(2m)."""
        return [o / self.eta ** (2 * m) for m, o in enumerate(self.osc, start=1)]

    def profile(self) -> OscillationProfile:
        return OscillationProfile(list(self.radii), list(self.osc), list(self.counts))


MODES = ("lsq", "key_step")


def campanato_iterate(u: ScalarField, f: ScalarField, x0=(0.0, 0.0), eta: float = 0.5, M: int = 5,
                      mode: str = "lsq", cfg: SolverConfig | None = None, r_base: float = 0.5,
                      min_cells: int = DEFAULT_MIN_CELLS) -> IterationState:
    if mode == "keystep":
        mode = "key_step"
    if mode not in MODES:
        raise ConfigurationError(f"unknown fit mode {mode!r}; expected one of {MODES}")
    if not 0 < eta < 1:
        raise ConfigurationError(f"eta must lie in (0, 1), got {eta}")
    if M < 1:
        raise ConfigurationError(f"M must be >= 1, got {M}")
    x0 = (float(x0[0]), float(x0[1]))
    state = IterationState(x0, eta, r_base, mode, [Poly2.zero(x0)], requested_levels=M)
    outer = ball_region(u.mask, x0, r_base, min_cells)
    for m in range(1, M + 1):
        radius = r_base * eta ** m
        try:
            ball = ball_region(u.mask, x0, radius, 6 * min_cells)
        except UnderResolvedError:
            break
        prev = state.polys[-1]
        w = u - prev.sample(u)
        ftilde = f - prev.laplacian
        if mode == "lsq":
            target = mean(ftilde, ball)
            Q = trace_correct(lsq_fit_quadratic(w, ball, laplacian=target, min_cells=6 * min_cells), target)
        else:
            Q, step = key_step(w, ftilde, outer, eta, cfg, min_cells)
            state.steps.append(step)
        fm = mean(f, ball)
        P = trace_correct(prev + Q, fm)
        state.polys.append(P)
        state.radii.append(radius)
        state.f_means.append(fm)
        state.counts.append(ball.count)
        state.osc.append(starred_norm(u - P.sample(u), ball))
        outer = ball
    if state.levels == 0:
        raise UnderResolvedError(f"no iteration level resolves at {x0} on N={u.grid.N}")
    return state


@dataclass(frozen=True)
class DriftReport:
    values: list[float]

    @property
    def max(self) -> float:
        return max(self.values)


def drift_check(state: IterationState, eta: float | None = None) -> DriftReport:
    """Per-level constants C_m in the polynomial drift bound.

    With rho = r_base * eta**(m-1) and dP = P_m - P_{m-1} at the centre,
    C_m = |dP| / rho^2 + |D dP| / rho + |D^2 dP|.
    """
    eta = state.eta if eta is None else eta
    if len(state.polys) < 2:
        raise InsufficientDataError("drift check needs at least one iteration level")
    x0 = state.x0
    vals = []
    for m in range(1, len(state.polys)):
        d = state.polys[m] - state.polys[m - 1]
        rho = state.r_base * eta ** (m - 1)
        vals.append(abs(float(d(*x0))) / rho ** 2 + float(np.linalg.norm(d.grad(*x0))) / rho
                    + float(np.linalg.norm(d.c2)))
    return DriftReport(vals)
