"""Fourier analysis of the boundary profile and the Fuglede quadratic form.

Norms are taken with respect to the normalized arc measure
``dsigma = dtheta / (2 pi)``: for ``u = a_0 + sum a_k cos k theta + b_k sin k theta``

    ||u||^2      = a_0^2 + 1/2 sum_k (a_k^2 + b_k^2)
    ||grad u||^2 = 1/2 sum_k lambda_k (a_k^2 + b_k^2),   lambda_k = k^2.

In dimension ``n >= 3`` there is no circle to sample, so the same functions
treat the coefficients as weights on an orthonormal harmonic basis with one
entry per degree (``a_k`` and ``b_k`` both of degree ``k``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import metrics
from .errors import AliasError, DomainError, PreconditionError
from .shapes import FourierCoeffs, StarShape, from_fourier, normalize_volume, translate

SMALLNESS = 0.05
CENTER_TOL = 1e-6


def analyze(u_samples: np.ndarray, K: int | None = None) -> FourierCoeffs:
    """Fourier coefficients ``a_0..a_K, b_1..b_K`` of uniform samples."""
    u = np.asarray(u_samples, dtype=float)
    n = u.size
    if n < 4 or n & (n - 1):
        raise DomainError(f"sample count must be a power of two, got {n}")
    K = n // 4 if K is None else int(K)
    if K > n // 4:
        raise AliasError(f"K = {K} exceeds N/4 = {n // 4}")
    if K < 0:
        raise DomainError("K must be nonnegative")
    c = np.fft.rfft(u) / n
    a = 2.0 * c.real[: K + 1]
    a[0] = c.real[0]
    b = -2.0 * c.imag[1 : K + 1]
    return FourierCoeffs(a, b)


def laplace_eigenvalue(k: int, n: int = 2) -> int:
    """``k (k + n - 2)``, the k-th Laplace-Beltrami eigenvalue on the unit sphere in R^n."""
    if k < 0 or n < 2:
        raise DomainError(f"need k >= 0 and n >= 2, got k={k}, n={n}")
    return k * (k + n - 2)


def _weights(coeffs: FourierCoeffs, n: int):
    K = coeffs.K
    ks = np.arange(1, K + 1)
    lam = ks * (ks + n - 2.0)
    half = 0.5 if n == 2 else 1.0
    sq = coeffs.a[1:] ** 2 + coeffs.b**2
    return sq, lam, half


def sobolev_norms(u: FourierCoeffs, n: int = 2) -> tuple[float, float]:
    """``(||u||, ||grad u||)`` in L^2 of the normalized sphere measure."""
    if n < 2:
        raise DomainError("n must be >= 2")
    sq, lam, half = _weights(u, n)
    l2 = u.a[0] ** 2 + half * sq.sum()
    h1 = half * (lam * sq).sum()
    return math.sqrt(l2), math.sqrt(h1)


def quadratic_form(u: FourierCoeffs, n: int = 2) -> float:
    """``1/2 (||grad u||^2 - (n - 1) ||u||^2)``, the second variation of the deficit."""
    l2, h1 = sobolev_norms(u, n)
    return 0.5 * (h1 * h1 - (n - 1) * l2 * l2)


def high_mode_part(u: FourierCoeffs) -> FourierCoeffs:
    """Copy of ``u`` with the constant and first-harmonic modes removed."""
    a = u.a.copy()
    b = u.b.copy()
    a[:2] = 0.0
    if b.size:
        b[0] = 0.0
    return FourierCoeffs(a, b)


# -- nearly spherical sets -----------------------------------------------------

def profile_coeffs(shape: StarShape) -> FourierCoeffs:
    """Coefficients of ``u = r - 1``."""
    if shape.coeffs is not None:
        return shape.coeffs
    return analyze(shape.u)


def smallness(shape: StarShape) -> float:
    """``||u||_inf + ||u'||_inf``."""
    return float(np.max(np.abs(shape.u)) + np.max(np.abs(shape.dr)))


def recenter(shape: StarShape, tol: float = CENTER_TOL, max_iter: int = 20) -> StarShape:
    """Translate until the barycenter moment drops below ``tol``.

    Each step moves by ``-2/3`` of the current moment (the moment of a
    slightly shifted ball is 3/2 of its shift).  Translations are always
    applied to the input shape so that errors do not compound.
    """
    shift = np.zeros(2)
    current = shape
    for _ in range(max_iter):
        bar = metrics.barycenter(current)
        if math.hypot(*bar) <= tol:
            return current
        shift = shift - (2.0 / 3.0) * bar
        current = translate(shape, shift)
    bar = metrics.barycenter(current)
    if math.hypot(*bar) > tol:
        raise PreconditionError(f"recentering stalled at |bar| = {math.hypot(*bar):.3g}")
    return current


class FugledeCheck(NamedTuple):
    deficit: float
    bound: float
    passed: bool


def _check_nearly_spherical(shape: StarShape, eps: float) -> None:
    v = metrics.volume(shape)
    if abs(v - math.pi) > metrics.VOLUME_TOL:
        raise PreconditionError(f"area {v:.12g} is not pi")
    size = smallness(shape)
    if size > eps:
        raise PreconditionError(f"||u||_inf + ||u'||_inf = {size:.4g} exceeds {eps}")


def fuglede_check(shape: StarShape, eta: float = 0.1, eps: float = SMALLNESS) -> FugledeCheck:
    """Compare the deficit with ``(1 - eta)/2 ||u||^2 + 1/4 ||grad u||^2``."""
    if not (0.0 < eta < 1.0):
        raise DomainError("eta must lie in (0, 1)")
    _check_nearly_spherical(shape, eps)
    bar = metrics.barycenter(shape)
    if math.hypot(*bar) > CENTER_TOL:
        raise PreconditionError(f"barycenter {bar} is not centred")
    l2, h1 = sobolev_norms(analyze(shape.u))
    bound = 0.5 * (1.0 - eta) * l2 * l2 + 0.25 * h1 * h1
    d = metrics.deficit(shape)
    return FugledeCheck(d, bound, bool(d >= bound - 1e-12))


def taylor_residuals(shape: StarShape, eps: float = SMALLNESS) -> tuple[float, float]:
    """Residuals of the second-order expansions of perimeter and area.

    ``r1 = |P/(2 pi) - int (1 + u'^2/2 + u) dsigma|`` and
    ``r2 = |int u dsigma + 1/2 ||u||^2|``.  In the plane the area identity
    is exact, so ``r2`` only carries roundoff.
    """
    _check_nearly_spherical(shape, eps)
    u = shape.u
    du = shape.dr
    per = metrics.perimeter(shape) / (2.0 * math.pi)
    r1 = abs(per - float(np.mean(1.0 + 0.5 * du * du + u)))
    r2 = abs(float(np.mean(u)) + 0.5 * float(np.mean(u * u)))
    return r1, r2


# -- randomized trials ------------------------------------------------------------

def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` selects an independent substream."""
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def random_profile(rng: np.random.Generator, kmin: int = 2, kmax: int = 10,
                   size: float = 0.05) -> FourierCoeffs:
    """Random ``u`` supported on modes ``kmin..kmax`` with ``||u||_inf + ||u'||_inf = size``."""
    ks = np.arange(kmin, kmax + 1)
    a = np.zeros(kmax + 1)
    b = np.zeros(kmax)
    a[kmin:] = rng.standard_normal(ks.size) / ks
    b[kmin - 1 :] = rng.standard_normal(ks.size) / ks
    probe = FourierCoeffs(a, b)
    k = np.arange(1, kmax + 1)
    deriv = FourierCoeffs(np.concatenate([[0.0], k * b]), -k * a[1:])
    u, du = probe.synthesize(1024), deriv.synthesize(1024)
    scale = size / (np.max(np.abs(u)) + np.max(np.abs(du)))
    return probe.scaled(scale)


@dataclass(frozen=True)
class FugledeTrial:
    trial_id: int
    deficit: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.deficit - self.bound

    CSV_HEADER = "trial_id,deficit,bound,margin,pass"

    def csv_row(self) -> str:
        return f"{self.trial_id},{self.deficit:.9g},{self.bound:.9g},{self.margin:.9g},{int(self.passed)}"


def fuglede_trials(trials: int = 200, amp: float = SMALLNESS, seed: int = 7, eta: float = 0.1,
                   kmin: int = 2, kmax: int = 10, n: int | None = None) -> Iterator[FugledeTrial]:
    """Seeded random nearly spherical sets, normalized and recentred, then checked.

    Raw profiles are drawn with size in ``[0.2, 0.9] * amp`` so that the
    normalized, recentred set still meets the smallness bound; draws that
    do not are redrawn.
    """
    for i in range(trials):
        rng = rng_for(seed, i)
        while True:
            size = amp * rng.uniform(0.2, 0.9)
            shape = from_fourier(random_profile(rng, kmin, kmax, size), n=n)
            shape = recenter(normalize_volume(shape))
            if smallness(shape) <= amp:
                break
        d, bound, ok = fuglede_check(shape, eta, eps=amp)
        yield FugledeTrial(i, d, bound, ok)
