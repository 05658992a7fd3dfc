"""Perimeter, area, deficit, Fraenkel asymmetry and friends.

Star shapes are integrated with the periodic trapezoid rule on their own
sample grid; polygons use exact vertex formulas.  The asymmetry is the
minimum over translations ``x`` of ``|E symdiff B(x, 1)| / pi``, found by
multi-start Nelder-Mead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import _quad
from .errors import BallLike, DomainError, EmptyBoundary, NotNormalized
from .shapes import Polygon, Shape, StarShape, _shoelace

VOLUME_TOL = 1e-8
SHIFT_LIMIT = 0.9


def _compass_starts(radius: float = 0.2) -> list[tuple[float, float]]:
    ang = np.arange(8) * np.pi / 4.0
    return [(radius * math.cos(a), radius * math.sin(a)) for a in ang]


@dataclass(frozen=True)
class AsymmetrySearchConfig:
    """Settings of the translation search.

    ``starts=None`` means the default set: origin, centroid and eight
    compass points at radius 0.2.
    """

    starts: tuple[tuple[float, float], ...] | None = None
    radius_bound: float = SHIFT_LIMIT
    tol: float = 1e-10
    max_iter: int = 500
    simplex_step: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.radius_bound < 1.0):
            raise DomainError("radius_bound must lie in (0, 1)")
        if self.starts is not None:
            object.__setattr__(self, "starts", tuple(tuple(map(float, s)) for s in self.starts))


@dataclass(frozen=True)
class MetricsReport:
    perimeter: float
    volume: float
    deficit: float
    asymmetry: float
    optimal_center: tuple[float, float]
    quotient: float | None  # None at the ball, where Q is undefined

    CSV_HEADER = "perimeter,volume,deficit,asymmetry,cx,cy,quotient"

    def csv_row(self) -> str:
        q = "NA" if self.quotient is None else f"{self.quotient:.9g}"
        vals = (self.perimeter, self.volume, self.deficit, self.asymmetry, *self.optimal_center)
        return ",".join(f"{v:.9g}" for v in vals) + "," + q


# -- basic integrals ---------------------------------------------------------

def perimeter(shape: Shape) -> float:
    if isinstance(shape, Polygon):
        p, q = shape.edges
        return float(np.sum(np.hypot(*(q - p).T)))
    return shape.rule.integrate(np.sqrt(shape.r**2 + shape.dr**2))


def volume(shape: Shape) -> float:
    if isinstance(shape, Polygon):
        return _shoelace(shape.vertices)
    return 0.5 * shape.rule.integrate(shape.r**2)


def barycenter(shape: StarShape) -> np.ndarray:
    """The sigma-weighted moment ``int r^3 e_theta dsigma``.

    It vanishes exactly when the centroid does; for area pi it equals
    1.5 times the centroid.
    """
    th = shape.theta
    r3 = shape.r**3
    return np.array([np.mean(r3 * np.cos(th)), np.mean(r3 * np.sin(th))])


def centroid(shape: Shape) -> np.ndarray:
    """Geometric centroid ``(1/|E|) int_E x dx``."""
    if isinstance(shape, Polygon):
        p, q = shape.edges
        c = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
        a = 0.5 * c.sum()
        return np.array([((p[:, 0] + q[:, 0]) * c).sum(), ((p[:, 1] + q[:, 1]) * c).sum()]) / (6.0 * a)
    th = shape.theta
    r3 = shape.r**3
    m = shape.rule.integrate(r3 * np.cos(th)), shape.rule.integrate(r3 * np.sin(th))
    return np.array(m) / (3.0 * volume(shape))


def _require_normalized(shape: Shape) -> None:
    v = volume(shape)
    if abs(v - np.pi) > VOLUME_TOL:
        raise NotNormalized(f"area {v:.12g} differs from pi; normalize first")


def deficit(shape: Shape) -> float:
    """``P(E) / (2 pi) - 1`` for a set of area pi."""
    _require_normalized(shape)
    return perimeter(shape) / (2.0 * np.pi) - 1.0


# -- symmetric difference with a unit disk -----------------------------------

def shifted_disk_radius(theta: np.ndarray, x: Sequence[float]) -> np.ndarray:
    """Radial profile about the origin of the unit disk centred at ``x``."""
    x = np.asarray(x, dtype=float)
    proj = x[0] * np.cos(theta) + x[1] * np.sin(theta)
    return proj + np.sqrt(1.0 - x @ x + proj**2)


def _segment_disk_area(a: np.ndarray, b: np.ndarray) -> float:
    """Signed area of triangle (0, a, b) intersected with the unit disk."""
    d = b - a
    A = d @ d
    B = 2.0 * (a @ d)
    C = a @ a - 1.0
    cuts = [0.0]
    disc = B * B - 4.0 * A * C
    if disc > 0.0 and A > 0.0:
        sq = math.sqrt(disc)
        for s in sorted(((-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A))):
            if 0.0 < s < 1.0:
                cuts.append(s)
    cuts.append(1.0)
    total = 0.0
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        p = a + s0 * d
        q = a + s1 * d
        mid = 0.5 * (p + q)
        cr = p[0] * q[1] - p[1] * q[0]
        if mid @ mid <= 1.0:
            total += 0.5 * cr
        else:
            total += 0.5 * math.atan2(cr, p @ q)
    return total


def polygon_disk_overlap(poly: Polygon, x: Sequence[float]) -> float:
    """Exact area of ``poly`` intersected with the unit disk centred at ``x``."""
    x = np.asarray(x, dtype=float)
    p, q = poly.edges
    return float(sum(_segment_disk_area(a - x, b - x) for a, b in zip(p, q)))


def symdiff_with_ball(shape: Shape, x: Sequence[float]) -> float:
    """Area of the symmetric difference between ``shape`` and ``B(x, 1)``."""
    x = np.asarray(x, dtype=float)
    nx = math.hypot(x[0], x[1])
    if nx > SHIFT_LIMIT:
        raise DomainError(f"|x| = {nx:.4g} exceeds {SHIFT_LIMIT}")
    if isinstance(shape, Polygon):
        return volume(shape) + np.pi - 2.0 * polygon_disk_overlap(shape, x)
    c, s = shape.cos_sin
    proj = x[0] * c + x[1] * s
    # rho^2 for rho = proj + sqrt(1 - |x|^2 + proj^2)
    root = np.sqrt((1.0 - x[0] * x[0] - x[1] * x[1]) + proj * proj)
    rho = proj + root
    return 0.5 * _quad.abs_integral(shape.r2 - rho * rho)


def symdiff_between(a: StarShape, b: StarShape) -> float:
    """Symmetric-difference area of two star shapes sampled on the same grid."""
    if a.quadrature_n != b.quadrature_n:
        raise DomainError("shapes must share the quadrature grid")
    return 0.5 * _quad.abs_integral(a.r2 - b.r2)


def asymmetry(shape: Shape, cfg: AsymmetrySearchConfig | None = None) -> tuple[float, np.ndarray]:
    """Fraenkel asymmetry and the minimizing translation.

    The value is the best over all starts, hence an upper bound of the true
    infimum and never above the objective at any start.
    """
    cfg = cfg or AsymmetrySearchConfig()
    _require_normalized(shape)
    bound = cfg.radius_bound

    def objective(x):
        nx = math.hypot(x[0], x[1])
        if nx <= bound:
            return symdiff_with_ball(shape, x) / np.pi
        # continuous exterior extension keeps the simplex inside the bound
        return symdiff_with_ball(shape, x * (bound / nx)) / np.pi + (nx - bound)

    if cfg.starts is None:
        c = centroid(shape)
        if math.hypot(*c) > bound:
            c = c * (bound / math.hypot(*c))
        starts = [(0.0, 0.0), tuple(c), *_compass_starts()]
    else:
        starts = list(cfg.starts)

    best_val, best_x = math.inf, np.zeros(2)
    step = cfg.simplex_step
    for s in starts:
        s = np.asarray(s, dtype=float)
        simplex = np.array([s, s + (step, 0.0), s + (0.0, step)])
        res = minimize(objective, s, method="Nelder-Mead",
                       options=dict(xatol=cfg.tol, fatol=cfg.tol, maxiter=cfg.max_iter,
                                    initial_simplex=simplex))
        x = np.asarray(res.x, dtype=float)
        val = float(res.fun)
        if math.hypot(*x) > bound:
            x = x * (bound / math.hypot(*x))
            val = objective(x)
        if val < best_val - 1e-14 or (abs(val - best_val) <= 1e-14 and math.hypot(*x) < math.hypot(*best_x)):
            best_val, best_x = val, x
    return best_val, best_x


def quotient(shape: Shape, cfg: AsymmetrySearchConfig | None = None) -> float:
    """``deficit / asymmetry**2``; raises :class:`BallLike` at the ball."""
    alpha, _ = asymmetry(shape, cfg)
    if alpha <= 1e-12:
        raise BallLike("asymmetry vanishes; the quotient is undefined at the ball")
    return deficit(shape) / alpha**2


def report(shape: Shape, cfg: AsymmetrySearchConfig | None = None) -> MetricsReport:
    d = deficit(shape)
    alpha, x = asymmetry(shape, cfg)
    q = d / alpha**2 if alpha > 1e-12 else None
    return MetricsReport(perimeter(shape), volume(shape), d, alpha, (float(x[0]), float(x[1])), q)


# -- curvature and excess -----------------------------------------------------

def curvature(shape: StarShape) -> np.ndarray:
    """Signed curvature of the boundary at the grid nodes."""
    r, r1, r2 = shape.r, shape.dr, shape.ddr
    return (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _star_excess_parts(shape: StarShape, x: np.ndarray, rad: float):
    th = shape.theta
    pts = shape.boundary()
    g = np.sum((pts - x) ** 2, axis=1) - rad * rad
    idx, t, _, _ = _quad.crossings(g)
    h = 2.0 * np.pi / th.size

    def tangent(phi):
        rr = shape.radius(phi)
        dr = shape.radius_derivative(phi)
        c, s = np.cos(phi), np.sin(phi)
        return rr, np.column_stack([dr * c - rr * s, dr * s + rr * c])

    if idx.size == 0:
        if g[0] > 0.0:
            raise EmptyBoundary("boundary does not meet the ball")
        # whole boundary inside: closed curve, normals integrate to zero
        return perimeter(shape), np.zeros(2)

    roots = th[idx] + t * h
    # Newton polish on the interpolant
    for _ in range(3):
        rr, tan = tangent(roots)
        p = rr[:, None] * np.column_stack([np.cos(roots), np.sin(roots)])
        gv = np.sum((p - x) ** 2, axis=1) - rad * rad
        dg = 2.0 * np.sum((p - x) * tan, axis=1)
        roots = roots - np.divide(gv, dg, out=np.zeros_like(gv), where=dg != 0.0)
    entering = g[(idx + 1) % th.size] < 0.0
    order = np.argsort(roots)
    roots, entering = roots[order], entering[order]
    if not entering[0]:
        roots = np.roll(roots, -1)
        entering = np.roll(entering, -1)
        roots[-1] += 2.0 * np.pi
    length = 0.0
    normal = np.zeros(2)
    for a, b in zip(roots[0::2], roots[1::2]):
        phi = 0.5 * (b - a) * _GL_X + 0.5 * (b + a)
        w = 0.5 * (b - a) * _GL_W
        _, tan = tangent(phi)
        length += float(w @ np.hypot(tan[:, 0], tan[:, 1]))
        normal += w @ np.column_stack([tan[:, 1], -tan[:, 0]])
    return length, normal


def _polygon_excess_parts(poly: Polygon, x: np.ndarray, rad: float):
    length = 0.0
    normal = np.zeros(2)
    p, q = poly.edges
    for a, b in zip(p - x, q - x):
        d = b - a
        A, B, C = d @ d, 2.0 * (a @ d), a @ a - rad * rad
        disc = B * B - 4.0 * A * C
        if disc <= 0.0:
            continue
        sq = math.sqrt(disc)
        s0 = max(0.0, (-B - sq) / (2.0 * A))
        s1 = min(1.0, (-B + sq) / (2.0 * A))
        if s1 <= s0:
            continue
        length += (s1 - s0) * math.sqrt(A)
        normal += (s1 - s0) * np.array([d[1], -d[0]])
    if length == 0.0:
        raise EmptyBoundary("boundary does not meet the ball")
    return length, normal


def excess(shape: Shape, x: Sequence[float], r: float) -> float:
    """De Giorgi excess ``(P(E, B) - |int nu|) / r`` in ``B(x, r)``."""
    if r <= 0.0:
        raise DomainError("radius must be positive")
    x = np.asarray(x, dtype=float)
    if isinstance(shape, Polygon):
        length, normal = _polygon_excess_parts(shape, x, r)
    else:
        length, normal = _star_excess_parts(shape, x, r)
    return (length - float(np.hypot(*normal))) / r
