"""One-dimensional Markovian covariance functions.

A Markovian covariance function (MCF) on an open interval ``(L, U)`` has the
product form

    k(x, y) = p(min(x, y)) * q(max(x, y)),

and the covariance matrix it induces on sorted distinct points has a
tridiagonal inverse whose entries are known in closed form.  This module
defines the :class:`Mcf1d` type, grid-based validation of the two
positivity conditions, dense covariance assembly, and the analytic
precision matrix and log-determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InputError, NearSingularError, ParameterError

__all__ = [
    "Mcf1d",
    "CovMatrixDense",
    "TridiagPrecision",
    "ValidationReport",
    "SINGULARITY_FLOOR",
    "eval_mcf",
    "validate_mcf",
    "build_cov",
    "precision",
    "det_cov",
    "offdiag_minor",
    "transform_mcf",
    "brownian_motion",
    "brownian_bridge",
    "ornstein_uhlenbeck",
    "exponential",
]

SINGULARITY_FLOOR = 1e-300


@dataclass(frozen=True)
class Mcf1d:
    """A 1-D covariance ``k(x, y) = p(min(x, y)) q(max(x, y))``.

    Parameters
    ----------
    p, q : callable
        Vectorized real functions on ``(lower, upper)``.
    lower, upper : float
        Open domain bounds, possibly infinite.
    label : str
        Short descriptive name.
    """

    p: Callable[[np.ndarray], np.ndarray]
    q: Callable[[np.ndarray], np.ndarray]
    lower: float = -math.inf
    upper: float = math.inf
    label: str = "mcf"

    def check_domain(self, x):
        x = np.asarray(x, dtype=float)
        bad = ~((x > self.lower) & (x < self.upper))
        if np.any(bad):
            first = x[bad].ravel()[0]
            raise DomainError(
                f"{self.label}: point {first!r} outside open domain "
                f"({self.lower}, {self.upper})"
            )
        return x

    def __call__(self, x, y):
        return eval_mcf(self, x, y)


@dataclass(frozen=True)
class CovMatrixDense:
    points: np.ndarray
    entries: np.ndarray

    @property
    def n(self):
        return len(self.points)


@dataclass(frozen=True)
class TridiagPrecision:
    """Symmetric tridiagonal precision matrix with cached covariance log-det.

    ``logdet_cov`` is ``log|K|`` of the covariance (not of the precision).
    """

    diag: np.ndarray
    offdiag: np.ndarray
    logdet_cov: float
    logdet_sign: float = 1.0

    @property
    def n(self):
        return len(self.diag)

    def matvec(self, v):
        """Apply the precision to ``v`` along its first axis."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise InputError(f"length mismatch: {v.shape[0]} vs {self.n}")
        d = self.diag.reshape((-1,) + (1,) * (v.ndim - 1))
        o = self.offdiag.reshape((-1,) + (1,) * (v.ndim - 1))
        out = d * v
        if self.n > 1:
            out[:-1] += o * v[1:]
            out[1:] += o * v[:-1]
        return out

    def to_dense(self):
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    condition: Optional[str] = None
    witness: Optional[tuple] = None
    checked_points: np.ndarray = field(default=None, repr=False)

    def __bool__(self):
        return self.passed


def _sorted_points(points, mcf=None):
    x = np.atleast_1d(np.asarray(points, dtype=float))
    if x.ndim != 1:
        raise InputError("points must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise InputError("points must be finite")
    d = np.diff(x)
    if np.any(d == 0):
        i = int(np.flatnonzero(d == 0)[0])
        raise InputError(f"duplicate point {x[i]!r} at positions {i + 1}, {i + 2}")
    if np.any(d < 0):
        raise InputError("points must be strictly increasing")
    if mcf is not None:
        mcf.check_domain(x)
    return x


def eval_mcf(mcf, x, y):
    """Evaluate ``p(x) q(y)`` if ``x <= y`` else ``p(y) q(x)``, elementwise."""
    x = mcf.check_domain(x)
    y = mcf.check_domain(y)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    out = _ev(mcf.p, lo) * _ev(mcf.q, hi)
    return out[()] if out.ndim == 0 else out


def _probe_grid(lower, upper, m=64):
    if math.isfinite(lower) and math.isfinite(upper):
        return np.linspace(lower, upper, m + 2)[1:-1]
    if math.isfinite(lower):
        return lower + np.geomspace(1e-3, 1e3, m)
    if math.isfinite(upper):
        return upper - np.geomspace(1e3, 1e-3, m)
    return np.linspace(-10.0, 10.0, m)


def validate_mcf(mcf, grid, probe=64):
    """Check both positivity conditions on ``grid`` plus a probe grid.

    Condition (ii), ``p(x) q(y) > 0`` for all pairs, is checked first; then
    condition (i), ``p(x) q(y) - p(y) q(x) < 0`` for every ``x < y``.

    Returns
    -------
    ValidationReport
        ``passed`` is False on the first violation, with ``condition`` set to
        ``"ii"`` or ``"i"`` and ``witness`` the offending ``(x, y)`` pair.
    """
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    if g.ndim != 1 or len(g) < 2:
        raise InputError("validation grid needs at least two points")
    if np.any(np.diff(g) <= 0):
        raise InputError("validation grid must be strictly increasing")
    mcf.check_domain(g)
    if probe:
        extra = _probe_grid(mcf.lower, mcf.upper, probe)
        extra = extra[(extra > mcf.lower) & (extra < mcf.upper)]
        g = np.unique(np.concatenate([g, extra]))
    with np.errstate(all="ignore"):
        p, q = _pq(mcf, g)
        outer = np.outer(p, q)
    bad = ~(outer > 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        return ValidationReport(False, "ii", (float(g[i]), float(g[j])), g)
    with np.errstate(all="ignore"):
        skew = outer - outer.T  # entry (i, j): p_i q_j - p_j q_i
    upper = np.triu(np.ones_like(skew, dtype=bool), 1)
    bad = upper & ~(skew < 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        return ValidationReport(False, "i", (float(g[i]), float(g[j])), g)
    return ValidationReport(True, None, None, g)


def build_cov(mcf, points):
    """Dense covariance matrix ``K[i, j] = k(x_i, x_j)``."""
    x = _sorted_points(points, mcf)
    p, q = _pq(mcf, x)
    # i <= j uses p_i q_j; x is sorted so the upper triangle is p_i q_j.
    upper = np.outer(p, q)
    entries = np.triu(upper) + np.triu(upper, 1).T
    return CovMatrixDense(points=x, entries=entries)


def _ev(f, x):
    # user-supplied p, q may return scalars for constant functions
    return np.broadcast_to(np.asarray(f(x), dtype=float), np.shape(x))


def _pq(mcf, x):
    return _ev(mcf.p, x), _ev(mcf.q, x)


def _wronskians(p, q):
    """``w_i = p_i q_{i-1} - p_{i-1} q_i`` for ``i = 2..n``."""
    return p[1:] * q[:-1] - p[:-1] * q[1:]


def _logdet_from_factors(p1qn, w):
    factors = np.concatenate([[p1qn], w])
    if np.any(factors == 0):
        return 0.0, -math.inf
    sign = float(np.prod(np.sign(factors)))
    return sign, float(np.sum(np.log(np.abs(factors))))


def det_cov(mcf, points):
    """Log-determinant of the covariance matrix, as ``(sign, logabsdet)``.

    Uses the product formula ``|K| = p_1 q_n prod_{i>=2} (p_i q_{i-1} - p_{i-1} q_i)``
    evaluated as a sum of logs.  A zero factor returns ``(0.0, -inf)``,
    matching :func:`numpy.linalg.slogdet`.
    """
    x = _sorted_points(points, mcf)
    p, q = _pq(mcf, x)
    if len(x) == 1:
        v = p[0] * q[0]
        if v == 0:
            return 0.0, -math.inf
        return float(np.sign(v)), math.log(abs(v))
    return _logdet_from_factors(p[0] * q[-1], _wronskians(p, q))


def offdiag_minor(mcf, points, i):
    """Determinant of ``K`` with row ``x_{i-1}`` and column ``x_i`` removed.

    ``i`` is 1-based, ``2 <= i <= n``.  Equals
    ``p_1 q_n prod_{j != i} (p_j q_{j-1} - p_{j-1} q_j)``.
    """
    x = _sorted_points(points, mcf)
    n = len(x)
    if n < 2 or not 2 <= i <= n:
        raise InputError(f"need n >= 2 and 2 <= i <= n, got n={n}, i={i}")
    p, q = _pq(mcf, x)
    w = _wronskians(p, q)
    keep = np.ones(n - 1, dtype=bool)
    keep[i - 2] = False
    return float(p[0] * q[-1] * np.prod(w[keep]))


def precision(mcf, points, floor=SINGULARITY_FLOOR):
    """Closed-form tridiagonal inverse of the covariance on ``points``.

    Raises
    ------
    NearSingularError
        If a denominator has magnitude below ``floor``.
    """
    x = _sorted_points(points, mcf)
    n = len(x)
    p, q = _pq(mcf, x)
    if n == 1:
        v = p[0] * q[0]
        if not abs(v) >= floor:
            raise NearSingularError(f"{mcf.label}: k(x1, x1) = {v!r}", index=1)
        return TridiagPrecision(
            np.array([1.0 / v]), np.empty(0), math.log(abs(v)), float(np.sign(v))
        )

    w = _wronskians(p, q)
    small = ~(np.abs(w) >= floor)
    if np.any(small):
        i = int(np.flatnonzero(small)[0]) + 2
        raise NearSingularError(
            f"{mcf.label}: p_i q_(i-1) - p_(i-1) q_i = {w[i - 2]!r} at i={i}",
            index=i,
        )
    for val, name, idx in ((p[0], "p_1", 1), (q[-1], "q_n", n)):
        if not abs(val) >= floor:
            raise NearSingularError(f"{mcf.label}: {name} = {val!r}", index=idx)

    diag = np.empty(n)
    diag[0] = p[1] / (p[0] * w[0])
    diag[-1] = q[-2] / (q[-1] * w[-1])
    if n > 2:
        num = p[2:] * q[:-2] - p[:-2] * q[2:]
        diag[1:-1] = num / (w[:-1] * w[1:])
    offdiag = -1.0 / w
    sign, logdet = _logdet_from_factors(p[0] * q[-1], w)
    return TridiagPrecision(diag, offdiag, logdet, sign)


def transform_mcf(mcf, T, T_inverse, probe=64):
    """Compose an MCF with a strictly increasing map ``T``.

    The result has ``p~ = p o T`` and ``q~ = q o T`` on
    ``(T_inverse(L), T_inverse(U))``.
    """
    with np.errstate(all="ignore"):
        lo = float(T_inverse(mcf.lower))
        hi = float(T_inverse(mcf.upper))
    if math.isnan(lo):
        lo = -math.inf
    if math.isnan(hi):
        hi = math.inf
    if not lo < hi:
        raise InputError("T_inverse does not map the domain to an interval")
    grid = _probe_grid(lo, hi, probe)
    t = np.asarray(T(grid), dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InputError("T is not strictly increasing on the probe grid")

    p, q = mcf.p, mcf.q
    return Mcf1d(
        p=lambda x: p(T(x)),
        q=lambda x: q(T(x)),
        lower=lo,
        upper=hi,
        label=f"{mcf.label}∘T",
    )


# -- standard families --------------------------------------------------------


def brownian_motion():
    """``min(x, y)`` on ``(0, inf)``."""
    return Mcf1d(
        p=lambda x: np.asarray(x, dtype=float),
        q=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        lower=0.0,
        upper=math.inf,
        label="brownian_motion",
    )


def brownian_bridge():
    """``min(x, y) - x y`` on ``(0, 1)``."""
    return Mcf1d(
        p=lambda x: np.asarray(x, dtype=float),
        q=lambda x: 1.0 - np.asarray(x, dtype=float),
        lower=0.0,
        upper=1.0,
        label="brownian_bridge",
    )


def exponential(eta2=1.0, theta=1.0):
    """``eta2 * exp(-theta |x - y|)`` on the real line."""
    if not (eta2 > 0 and theta > 0):
        raise ParameterError("exponential covariance needs eta2 > 0 and theta > 0")
    return Mcf1d(
        p=lambda x: eta2 * np.exp(theta * np.asarray(x, dtype=float)),
        q=lambda x: np.exp(-theta * np.asarray(x, dtype=float)),
        label="exponential",
    )


def ornstein_uhlenbeck(sigma=1.0, theta=1.0):
    """Stationary O-U covariance ``sigma^2 / (2 theta) exp(-theta |x - y|)``."""
    mcf = exponential(sigma**2 / (2.0 * theta), theta)
    return Mcf1d(mcf.p, mcf.q, mcf.lower, mcf.upper, label="ornstein_uhlenbeck")
