"""Planar star-shaped sets and polygons.

A :class:`StarShape` is stored by its radial profile ``r(theta) = 1 + u(theta)``
sampled on a uniform grid of ``N`` nodes (``N`` a power of two, at least 256).
Shapes built from Fourier coefficients keep those coefficients alongside the
samples.  Everything is immutable; operations return new shapes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import _quad
from .errors import DegenerateShape, DomainError, NotStarShaped

MIN_RADIUS = 0.05
DEFAULT_N = 2048


def default_quadrature_n() -> int:
    """Node count, overridable through ``ISOQ_QUADRATURE_N``."""
    raw = os.environ.get("ISOQ_QUADRATURE_N")
    if not raw:
        return DEFAULT_N
    n = int(raw)
    _check_n(n)
    return n


def _check_n(n: int) -> None:
    if n < 256 or n & (n - 1):
        raise DomainError(f"quadrature node count must be a power of two >= 256, got {n}")


@dataclass(frozen=True)
class QuadratureRule:
    """Periodic trapezoid rule on ``n`` equispaced nodes."""

    n: int

    @property
    def nodes(self) -> np.ndarray:
        return _quad.grid(self.n)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 2.0 * np.pi / self.n)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values)) * (2.0 * np.pi / self.n)


@dataclass(frozen=True)
class FourierCoeffs:
    """Real Fourier coefficients of ``u = sum a_k cos k theta + b_k sin k theta``.

    ``a`` holds ``a_0..a_K`` and ``b`` holds ``b_1..b_K``.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float)).copy()
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).copy()
        if a.size == 0:
            a = np.zeros(1)
        K = max(a.size - 1, b.size)
        a = np.pad(a, (0, K + 1 - a.size))
        b = np.pad(b, (0, K - b.size))
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise DomainError("Fourier coefficients must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return self.b.size

    @classmethod
    def from_modes(cls, modes: dict[int, tuple[float, float]] | None = None, a0: float = 0.0):
        """Build from ``{k: (a_k, b_k)}``."""
        modes = modes or {}
        K = max(modes, default=0)
        a = np.zeros(K + 1)
        b = np.zeros(K)
        a[0] = a0
        for k, (ak, bk) in modes.items():
            if k < 1:
                raise DomainError("use a0 for the constant mode")
            a[k] = ak
            b[k - 1] = bk
        return cls(a, b)

    def truncate(self, K: int) -> "FourierCoeffs":
        return FourierCoeffs(self.a[: K + 1], self.b[:K])

    def scaled(self, factor: float) -> "FourierCoeffs":
        return FourierCoeffs(self.a * factor, self.b * factor)

    def synthesize(self, n: int) -> np.ndarray:
        """Samples of u on the ``n``-node grid."""
        theta = _quad.grid(n)
        k = np.arange(1, self.K + 1)
        out = np.full(n, self.a[0])
        if self.K:
            phase = np.outer(k, theta)
            out += self.a[1:] @ np.cos(phase) + self.b @ np.sin(phase)
        return out

    def __eq__(self, other):
        if not isinstance(other, FourierCoeffs):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))


@dataclass(frozen=True, eq=False)
class StarShape:
    """Set ``{t e_theta : 0 <= t < r(theta)}`` with ``r`` sampled on a uniform grid."""

    r: np.ndarray
    kind: str = "samples"
    coeffs: FourierCoeffs | None = None
    dim: int = field(default=2, repr=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).copy()
        if r.ndim != 1:
            raise DomainError("radial samples must be one-dimensional")
        _check_n(r.size)
        if not np.all(np.isfinite(r)):
            raise DegenerateShape("radial profile is not finite")
        if r.min() < MIN_RADIUS:
            raise DegenerateShape(f"min radius {r.min():.4g} below {MIN_RADIUS}")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def quadrature_n(self) -> int:
        return self.r.size

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule(self.r.size)

    @property
    def theta(self) -> np.ndarray:
        return _quad.grid(self.r.size)

    @property
    def u(self) -> np.ndarray:
        return self.r - 1.0

    @cached_property
    def cos_sin(self) -> tuple[np.ndarray, np.ndarray]:
        th = self.theta
        return np.cos(th), np.sin(th)

    @cached_property
    def r2(self) -> np.ndarray:
        return self.r * self.r

    @cached_property
    def dr(self) -> np.ndarray:
        return _quad.spectral_derivative(self.r, 1)

    @cached_property
    def ddr(self) -> np.ndarray:
        return _quad.spectral_derivative(self.r, 2)

    @cached_property
    def _interp(self) -> np.ndarray:
        return _quad.trig_coeffs(self.r)

    def radius(self, theta) -> np.ndarray:
        """Trigonometric interpolant of the profile at arbitrary angles."""
        return _quad.trig_eval(self._interp, theta)

    def radius_derivative(self, theta) -> np.ndarray:
        c = self._interp
        return _quad.trig_eval(1j * np.arange(c.size) * c, theta)

    def boundary(self) -> np.ndarray:
        """Boundary points at the grid nodes, shape (N, 2)."""
        th = self.theta
        return np.column_stack([self.r * np.cos(th), self.r * np.sin(th)])

    def with_samples(self, r: np.ndarray) -> "StarShape":
        return StarShape(r)

    def rotated(self, steps: int) -> "StarShape":
        """Rotation by ``steps`` grid cells (exact permutation of samples)."""
        return StarShape(np.roll(self.r, steps))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).copy()
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise DomainError("polygon needs at least 3 two-dimensional vertices")
        if _shoelace(v) <= 0.0:
            raise DomainError("polygon vertices must be counter-clockwise with positive area")
        if _self_intersects(v):
            raise DomainError("polygon is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices, np.roll(self.vertices, -1, axis=0)


Shape = Union[StarShape, Polygon]


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _self_intersects(v: np.ndarray) -> bool:
    m = len(v)
    p, q = v, np.roll(v, -1, axis=0)
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            d1 = _cross(q[i] - p[i], p[j] - p[i])
            d2 = _cross(q[i] - p[i], q[j] - p[i])
            d3 = _cross(q[j] - p[j], p[i] - p[j])
            d4 = _cross(q[j] - p[j], q[i] - p[j])
            if d1 * d2 < 0 and d3 * d4 < 0:
                return True
    return False


def from_samples(r: Sequence[float]) -> StarShape:
    return StarShape(np.asarray(r, dtype=float))


def from_fourier(coeffs: FourierCoeffs | Sequence[float], b: Sequence[float] | None = None,
                 n: int | None = None) -> StarShape:
    """Shape with ``r = 1 + u`` where ``u`` is the given trigonometric polynomial."""
    if not isinstance(coeffs, FourierCoeffs):
        coeffs = FourierCoeffs(np.asarray(coeffs, dtype=float), np.asarray(b if b is not None else [], dtype=float))
    n = default_quadrature_n() if n is None else n
    _check_n(n)
    if coeffs.K > n // 4:
        raise DomainError(f"degree {coeffs.K} exceeds N/4 = {n // 4}")
    return StarShape(1.0 + coeffs.synthesize(n), kind="fourier", coeffs=coeffs)


def make_ellipse(eps: float, n: int | None = None) -> StarShape:
    """Ellipse with semi-axes ``1 + eps`` and ``1 / (1 + eps)`` (area pi)."""
    if not (0.0 < eps <= 1.0):
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    n = default_quadrature_n() if n is None else n
    _check_n(n)
    a, b = 1.0 + eps, 1.0 / (1.0 + eps)
    th = _quad.grid(n)
    return StarShape(a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2))


def make_regular_polygon(m: int) -> Polygon:
    """Regular ``m``-gon of area pi centred at the origin, vertex on the x-axis."""
    if m < 3:
        raise DomainError(f"need m >= 3, got {m}")
    R = np.sqrt(2.0 * np.pi / (m * np.sin(2.0 * np.pi / m)))
    ang = 2.0 * np.pi * np.arange(m) / m
    return Polygon(R * np.column_stack([np.cos(ang), np.sin(ang)]))


def normalize_volume(shape: Shape) -> Shape:
    """Dilate about the origin so that the area equals pi."""
    if isinstance(shape, Polygon):
        return Polygon(shape.vertices * np.sqrt(np.pi / _shoelace(shape.vertices)))
    area = 0.5 * shape.rule.integrate(shape.r**2)
    lam = np.sqrt(np.pi / area)
    if shape.coeffs is not None:
        a = shape.coeffs.a * lam
        a[0] = lam * (1.0 + shape.coeffs.a[0]) - 1.0
        coeffs = FourierCoeffs(a, shape.coeffs.b * lam)
        return StarShape(lam * shape.r, kind="fourier", coeffs=coeffs)
    return StarShape(lam * shape.r)


def _inside(shape: StarShape, p: np.ndarray) -> np.ndarray:
    """Signed radial gap |p| - r(arg p) for points p of shape (..., 2)."""
    rho = np.hypot(p[..., 0], p[..., 1])
    phi = np.arctan2(p[..., 1], p[..., 0])
    return rho - shape.radius(phi)


def translate(shape: StarShape, x: Sequence[float], tol: float = 1e-12,
              max_iter: int = 60) -> StarShape:
    """Shape moved by ``x``, re-sampled about the origin by per-ray bisection."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return shape
    rmin = float(shape.r.min())
    if np.hypot(*x) + MIN_RADIUS >= rmin:
        raise NotStarShaped(f"|x| = {np.hypot(*x):.4g} too large for min radius {rmin:.4g}")
    th = shape.theta
    omega = np.column_stack([np.cos(th), np.sin(th)])
    lo = np.zeros(th.size)
    hi = np.full(th.size, np.hypot(*x) + float(shape.r.max()) + 1e-3)
    if np.any(_inside(shape, hi[:, None] * omega - x) <= 0.0):
        raise NotStarShaped("ray bracket does not exit the shape")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        out = _inside(shape, mid[:, None] * omega - x) > 0.0
        hi = np.where(out, mid, hi)
        lo = np.where(out, lo, mid)
        if np.max(hi - lo) < tol:
            break
    return StarShape(0.5 * (lo + hi))


def _ray_polygon_distance(vertices: np.ndarray, theta: np.ndarray) -> np.ndarray:
    p = vertices
    q = np.roll(vertices, -1, axis=0)
    d = q - p
    omega = np.column_stack([np.cos(theta), np.sin(theta)])
    # solve t * omega = p + s * d for every (ray, edge)
    denom = _cross(omega[:, None, :], d[None, :, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(p[None, :, :], d[None, :, :]) / denom
        s = _cross(p[None, :, :], omega[:, None, :]) / denom
    eps = 1e-12
    hit = (np.abs(denom) > eps) & (s >= -eps) & (s <= 1.0 + eps) & (t > eps)
    if np.any(_cross(p, q) <= 0.0):
        raise NotStarShaped("origin is not strictly inside the polygon kernel")
    counts = hit.sum(axis=1)
    t = np.where(hit, t, np.inf)
    dist = t.min(axis=1)
    if np.any(~np.isfinite(dist)) or np.any(counts == 0):
        raise NotStarShaped("some ray misses the polygon")
    return dist


def polygon_to_star(poly: Polygon, n: int | None = None) -> StarShape:
    """Radial profile of ``poly`` about the origin, exact at every node."""
    n = default_quadrature_n() if n is None else n
    _check_n(n)
    return StarShape(_ray_polygon_distance(poly.vertices, _quad.grid(n)))


# -- shape files -----------------------------------------------------------

def shape_from_dict(data: dict, n: int | None = None) -> Shape:
    kind = data.get("kind")
    if kind == "fourier":
        a = np.asarray(data.get("a", [0.0]), dtype=float)
        b = np.asarray(data.get("b", []), dtype=float)
        return from_fourier(FourierCoeffs(a, b), n=n)
    if kind == "samples":
        return from_samples(data["r"])
    if kind == "polygon":
        return Polygon(np.asarray(data["vertices"], dtype=float))
    raise DomainError(f"unknown shape kind {kind!r}")


def shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Polygon):
        return {"kind": "polygon", "vertices": shape.vertices.tolist()}
    if shape.kind == "fourier" and shape.coeffs is not None:
        return {"kind": "fourier", "a": shape.coeffs.a.tolist(), "b": shape.coeffs.b.tolist()}
    return {"kind": "samples", "r": shape.r.tolist()}


def load_shape(path: str | Path, n: int | None = None) -> Shape:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError("shape file must hold a JSON object")
    return shape_from_dict(data, n=n)


def dump_shape(shape: Shape, path: str | Path) -> None:
    Path(path).write_text(json.dumps(shape_to_dict(shape)))
