"""Quantitative endpoints: ellipse sweeps, the asymptotic constant, corpus checks.

Two independent routes estimate the planar asymptotic constant
``C0 = pi / (8 (4 - pi))``: the full nonlinear pipeline in
:mod:`isoq.selection`, and the linearized quotient

    J(u) = (1/2)(||u'||^2 - ||u||^2) / (min_c (1/pi) int |u - c . e_theta| dtheta)^2

minimized here over trigonometric polynomials of degree ``2..K``.  ``J``
never builds a shape: no area renormalization and no perimeter quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import _quad, metrics, spectral
from .errors import ConfigError, DegenerateDenominator, DomainError, InsufficientData
from .shapes import FourierCoeffs, Shape, StarShape, from_fourier, make_ellipse, \
    make_regular_polygon, normalize_volume

HALL_CONSTANT = math.pi / (8.0 * (4.0 - math.pi))
ELLIPSE_CONSTANT = 3.0 * math.pi**2 / 64.0


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    deficit: float
    asymmetry: float
    quotient: float


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    def __post_init__(self):
        p = [r.parameter for r in self.rows]
        diffs = np.diff(p)
        if len(p) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise DomainError("sweep parameters must be strictly monotone")
        if any(not (math.isfinite(r.quotient) and r.quotient > 0) for r in self.rows):
            raise DomainError("sweep quotients must be finite and positive")

    CSV_HEADER = "parameter,deficit,asymmetry,quotient"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        lines += [f"{r.parameter:.9g},{r.deficit:.9g},{r.asymmetry:.9g},{r.quotient:.9g}" for r in self.rows]
        return "\n".join(lines) + "\n"


def ellipse_sweep(eps_list: Iterable[float], n: int | None = None) -> SweepTable:
    rows = []
    for eps in eps_list:
        if not (0.0 < eps <= 0.5):
            raise DomainError(f"eps must lie in (0, 0.5], got {eps}")
        shape = normalize_volume(make_ellipse(eps, n=n))
        d = metrics.deficit(shape)
        alpha, _ = metrics.asymmetry(shape)
        rows.append(SweepRow(float(eps), d, alpha, d / alpha**2))
    return SweepTable(tuple(rows))


def recovery_table(results) -> SweepTable:
    """Sweep table of selection results keyed by their target asymmetry."""
    return SweepTable(tuple(SweepRow(r.alpha_target, r.deficit, r.alpha, r.Q_value) for r in results))


def estimate_constant(table: SweepTable, power: int = 1) -> float:
    """Intercept at zero asymmetry of the least-squares line quotient ~ asymmetry**power.

    ``power=1`` is the default linear extrapolation; ``power=2`` matches
    families whose quotient is even in the asymmetry to leading order.
    """
    if len(table.rows) < 2:
        raise InsufficientData("need at least two rows")
    if power not in (1, 2):
        raise DomainError("power must be 1 or 2")
    alpha = np.array([r.asymmetry for r in table.rows])
    q = np.array([r.quotient for r in table.rows])
    _, intercept = np.polyfit(alpha**power, q, 1)
    return float(intercept)


# -- linearized quotient -------------------------------------------------------

class _LinearizedQuotient:
    """``J`` and its gradient over the coefficient vector of modes ``2..K``.

    The gradient of the denominator follows from the envelope theorem: at
    the optimal ``c`` it is ``(1/pi) int sgn(u - c . e) d u``.
    """

    def __init__(self, K: int, n: int = 1024):
        self.K = K
        self.n = n
        th = _quad.grid(n)
        ks = np.arange(2, K + 1)
        self.basis = np.concatenate([np.cos(np.outer(ks, th)), np.sin(np.outer(ks, th))])
        self.trans = np.stack([np.cos(th), np.sin(th)])
        w = ks**2 - 1.0
        self.weight = np.concatenate([w, w])
        self._c = np.zeros(2)

    def l1_distance(self, u: np.ndarray, start: np.ndarray | None = None):
        """``min_c (1/pi) int |u - c . e| dtheta`` by a 2-D simplex search."""
        trans = self.trans

        def f(c):
            return _quad.abs_integral(u - c @ trans) / math.pi

        start = self._c if start is None else start
        best = None
        for s in (start, np.zeros(2)):
            step = max(1e-3, 0.05 * float(np.max(np.abs(u))))
            simplex = np.array([s, s + (step, 0.0), s + (0.0, step)])
            res = minimize(f, s, method="Nelder-Mead",
                           options=dict(xatol=1e-13, fatol=1e-16, maxiter=2000, initial_simplex=simplex))
            if best is None or res.fun < best.fun:
                best = res
        return float(best.fun), np.asarray(best.x)

    def __call__(self, v: np.ndarray):
        u = v @ self.basis
        num = 0.25 * float(self.weight @ (v * v))
        D, c = self.l1_distance(u)
        if D < 1e-12:
            raise DegenerateDenominator("L1 distance to translation modes vanishes")
        self._c = c
        dD = _quad.sign_integral(u - c @ self.trans, self.basis) / math.pi
        value = num / D**2
        grad = 0.5 * self.weight * v / D**2 - 2.0 * num * dD / D**3
        return value, grad


def asymptotic_quotient(u: FourierCoeffs, n: int = 1024) -> float:
    """Second-order quotient ``J(u)`` of the boundary perturbation ``u``."""
    if not np.any(u.a[2:]) and not np.any(u.b[1:]):
        raise DegenerateDenominator("u has no mode of degree >= 2")
    samples = u.synthesize(n)
    trans = np.stack([np.cos(_quad.grid(n)), np.sin(_quad.grid(n))])
    lq = _LinearizedQuotient(max(u.K, 2), n)
    lq.trans = trans
    start = np.array([u.a[1] if u.K >= 1 else 0.0, u.b[0] if u.K >= 1 else 0.0])
    D, _ = lq.l1_distance(samples, start)
    if D < 1e-12:
        raise DegenerateDenominator("L1 distance to translation modes vanishes")
    return spectral.quadratic_form(u) / D**2


def _coeffs_from_vector(v: np.ndarray, K: int) -> FourierCoeffs:
    m = K - 1
    return FourierCoeffs(np.concatenate([[0.0, 0.0], v[:m]]), np.concatenate([[0.0], v[m:]]))


def _pad_vector(v: np.ndarray, K_old: int, K_new: int) -> np.ndarray:
    m_old, m_new = K_old - 1, K_new - 1
    out = np.zeros(2 * m_new)
    out[:m_old] = v[:m_old]
    out[m_new : m_new + m_old] = v[m_old:]
    return out


def _bfgs(fun: _LinearizedQuotient, v0: np.ndarray):
    v0 = v0 / np.linalg.norm(v0)
    res = minimize(fun, v0, jac=True, method="BFGS", options=dict(gtol=1e-9, maxiter=400))
    return float(res.fun), res.x / np.linalg.norm(res.x)


def minimize_asymptotic(K: int, restarts: int = 3, seed: int = 0, n: int = 1024) -> tuple[float, FourierCoeffs]:
    """Minimum of ``J`` over trigonometric polynomials with modes ``2..K``.

    Degrees are added one at a time, each stage warm-started from the
    previous optimum, so the returned value is nonincreasing in ``K``.
    Seeded random restarts are tried at every stage.
    """
    if K < 2:
        raise ConfigError(f"K must be >= 2, got {K}")
    rng = spectral.rng_for(seed, 2)
    best_v = np.array([1.0, 0.0])
    best_f, best_v = _bfgs(_LinearizedQuotient(2, n), best_v)
    for k in range(3, K + 1):
        fun = _LinearizedQuotient(k, n)
        warm = _pad_vector(best_v, k - 1, k)
        f0, _ = fun(warm)
        cand_f, cand_v = _bfgs(fun, warm)
        if cand_f > f0:
            cand_f, cand_v = f0, warm
        for _ in range(restarts):
            trial = warm + 0.3 * rng.standard_normal(warm.size) / np.sqrt(warm.size)
            f, v = _bfgs(fun, trial)
            if f < cand_f:
                cand_f, cand_v = f, v
        best_f, best_v = cand_f, cand_v
    return best_f, _coeffs_from_vector(best_v, K)


# -- quantitative isoperimetric inequality on a corpus -------------------------

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    deficit: float
    asymmetry: float
    quotient: float
    passed: bool
    hall_passed: bool | None  # None when asymmetry > 0.2


@dataclass(frozen=True)
class QIIReport:
    constant: float
    entries: tuple[CorpusEntry, ...]

    @property
    def min_quotient(self) -> float:
        return min(e.quotient for e in self.entries)

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[str]:
        return [e.name for e in self.entries if not e.passed]

    @property
    def hall_failures(self) -> list[str]:
        return [e.name for e in self.entries if e.hall_passed is False]


def random_corpus_shape(seed: int, index: int, amp: float = 0.05, n: int | None = None) -> StarShape:
    """Seeded random shape with modes 2..10 and ``||u||_inf <= amp``."""
    rng = spectral.rng_for(seed, 1000 + index)
    while True:
        c = spectral.random_profile(rng, 2, 10, 1.0)
        u = c.synthesize(1024)
        c = c.scaled(amp * rng.uniform(0.3, 1.0) / np.max(np.abs(u)))
        shape = normalize_volume(from_fourier(c, n=n))
        if shape.r.min() >= 0.5:
            return shape


def default_corpus(seed: int = 2024, random_count: int = 24, n: int | None = None) -> list[tuple[str, Shape]]:
    corpus: list[tuple[str, Shape]] = []
    for m in range(3, 13):
        corpus.append((f"polygon-{m}", make_regular_polygon(m)))
    for eps in (0.05, 0.1, 0.2, 0.3, 0.4):
        corpus.append((f"ellipse-{eps:g}", normalize_volume(make_ellipse(eps, n=n))))
    for i in range(random_count):
        corpus.append((f"random-{i}", random_corpus_shape(seed, i, n=n)))
    return corpus


def qii_property_suite(corpus: Sequence[tuple[str, Shape]] | None = None, constant: float = 0.4,
                       hall_slack: float = 0.05) -> QIIReport:
    """Check ``deficit >= constant * alpha**2`` on every shape; failures are reported."""
    corpus = default_corpus() if corpus is None else corpus
    entries = []
    for name, shape in sorted(corpus, key=lambda item: item[0]):
        d = metrics.deficit(shape)
        alpha, _ = metrics.asymmetry(shape)
        q = d / alpha**2 if alpha > 1e-12 else math.inf
        hall = None
        if alpha <= 0.2:
            hall = bool(d >= HALL_CONSTANT * alpha**2 - hall_slack * alpha**3)
        entries.append(CorpusEntry(name, d, alpha, q, bool(d >= constant * alpha**2), hall))
    return QIIReport(constant, tuple(entries))
