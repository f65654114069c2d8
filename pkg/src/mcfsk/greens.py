"""Green's-function MCFs of ``-f'' + nu f = 0`` on ``[0, 1]``.

Three boundary conditions are supported: Dirichlet (``f(0) = f(1) = 0``),
Cauchy (``f(0) = f'(1) = 0``) and Neumann (``f'(0) = f'(1) = 0``).  Each
gives a covariance ``eta2 * p(min) q(max)`` with sin/sinh/cos/cosh factors
depending on the sign of ``nu``; ``eta2`` is a free amplitude.

On equispaced points the precision takes the form
``eta2^-1 a tridiag(-1; b, c, ..., c, d)`` with four scalars, and for the
Dirichlet family on ``x_i = i / (n + 1)`` it is the Toeplitz matrix
``phi tridiag(-1; c)``.  The map ``(eta2, nu) <-> (phi, c)`` is a bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import Mcf1d, TridiagPrecision
from .errors import DomainError, InputError, ParameterError

__all__ = [
    "GreensFamily",
    "ToeplitzParams",
    "BOUNDARIES",
    "NU_LOWER",
    "NU_ZERO_GUARD",
    "normalize_boundary",
    "canonical_eta2",
    "greens_mcf",
    "closed_precision_params",
    "closed_precision",
    "to_toeplitz",
    "from_toeplitz",
    "toeplitz_a",
]

BOUNDARIES = ("dirichlet", "cauchy", "neumann")
NU_LOWER = {"dirichlet": -math.pi**2, "cauchy": -math.pi**2 / 4, "neumann": 0.0}
_ALIASES = {
    "dir": "dirichlet",
    "dirichlet": "dirichlet",
    "cauchy": "cauchy",
    "neumann": "neumann",
    "neu": "neumann",
}

# |nu| below this is evaluated on the nu = 0 branch
NU_ZERO_GUARD = 1e-10


def normalize_boundary(name):
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise ParameterError(
            f"unknown boundary {name!r}; expected one of dir, cauchy, neumann"
        ) from None


@dataclass(frozen=True)
class GreensFamily:
    """Boundary type, ``nu`` and free amplitude ``eta2`` of a Green's MCF."""

    boundary: str
    nu: float
    eta2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "boundary", normalize_boundary(self.boundary))
        nu = float(self.nu)
        object.__setattr__(self, "nu", nu)
        if not math.isfinite(nu) or nu <= NU_LOWER[self.boundary]:
            raise ParameterError(
                f"{self.boundary} family needs nu > {NU_LOWER[self.boundary]:.6g}, got {nu!r}"
            )
        if not (self.eta2 > 0 and math.isfinite(self.eta2)):
            raise ParameterError(f"eta2 must be positive and finite, got {self.eta2!r}")

    @property
    def gamma(self):
        return math.sqrt(abs(self.nu))

    @classmethod
    def with_scale(cls, boundary, nu, scale=1.0):
        """Family whose amplitude is ``scale`` times the canonical one.

        With ``scale = 1`` the kernel is the exact Green's function, which is
        continuous in ``nu`` across zero.
        """
        boundary = normalize_boundary(boundary)
        if abs(nu) < NU_ZERO_GUARD and boundary != "neumann":
            nu = 0.0
        return cls(boundary, nu, scale * canonical_eta2(boundary, nu))


def canonical_eta2(boundary, nu):
    """Amplitude that makes ``eta2 p q`` the exact Green's function."""
    boundary = normalize_boundary(boundary)
    g = math.sqrt(abs(nu))
    if boundary == "neumann":
        if nu <= 0:
            raise ParameterError("neumann family needs nu > 0")
        return 1.0 / (g * math.sinh(g))
    if nu == 0:
        return 1.0
    if boundary == "dirichlet":
        return 1.0 / (g * (math.sin(g) if nu < 0 else math.sinh(g)))
    return 1.0 / (g * (math.cos(g) if nu < 0 else math.cosh(g)))


def _raw_pq(boundary, nu):
    g = math.sqrt(abs(nu))
    if boundary == "dirichlet":
        if nu < 0:
            return (lambda x: np.sin(g * x)), (lambda x: np.sin(g * (1 - x)))
        if nu == 0:
            return (lambda x: np.asarray(x, float)), (lambda x: 1.0 - np.asarray(x, float))
        return (lambda x: np.sinh(g * x)), (lambda x: np.sinh(g * (1 - x)))
    if boundary == "cauchy":
        if nu < 0:
            return (lambda x: np.sin(g * x)), (lambda x: np.cos(g * (1 - x)))
        if nu == 0:
            return (lambda x: np.asarray(x, float)), (lambda x: np.ones_like(np.asarray(x, float)))
        return (lambda x: np.sinh(g * x)), (lambda x: np.cosh(g * (1 - x)))
    return (lambda x: np.cosh(g * x)), (lambda x: np.cosh(g * (1 - x)))


def greens_mcf(family):
    """The MCF ``eta2 * p(min(x, y)) q(max(x, y))`` on ``(0, 1)``."""
    p, q = _raw_pq(family.boundary, family.nu)
    eta2 = family.eta2
    return Mcf1d(
        p=lambda x: eta2 * p(np.asarray(x, dtype=float)),
        q=q,
        lower=0.0,
        upper=1.0,
        label=f"{family.boundary}(nu={family.nu:.6g})",
    )


def _check_equispaced_args(x1, xn, n):
    if n < 3:
        raise InputError(f"closed-form parameters need n >= 3, got {n}")
    if not (0 < x1 < xn < 1):
        raise DomainError(f"need 0 < x1 < xn < 1, got x1={x1!r}, xn={xn!r}")
    return (xn - x1) / (n - 1)


def closed_precision_params(family, x1, xn, n):
    """Scalars ``(a, b, c, d)`` of the equispaced precision.

    The precision on ``x_i = x1 + (i - 1) h`` equals
    ``eta2^-1 * a * tridiag(-1; b, c, ..., c, d)``.
    """
    h = _check_equispaced_args(x1, xn, n)
    nu, g = family.nu, family.gamma
    r = 1.0 - xn
    if family.boundary == "dirichlet":
        if nu < 0:
            a = 1 / (math.sin(g) * math.sin(g * h))
            b = math.sin(g * (x1 + h)) / math.sin(g * x1)
            c = 2 * math.cos(g * h)
            d = math.sin(g * (r + h)) / math.sin(g * r)
        elif nu == 0:
            a, b, c, d = 1 / h, 1 + h / x1, 2.0, 1 + h / r
        else:
            a = 1 / (math.sinh(g) * math.sinh(g * h))
            b = math.sinh(g * (x1 + h)) / math.sinh(g * x1)
            c = 2 * math.cosh(g * h)
            d = math.sinh(g * (r + h)) / math.sinh(g * r)
    elif family.boundary == "cauchy":
        # the constant wronskian here is cos(g) sin(g h) / cosh(g) sinh(g h)
        if nu < 0:
            a = 1 / (math.cos(g) * math.sin(g * h))
            b = math.sin(g * (x1 + h)) / math.sin(g * x1)
            c = 2 * math.cos(g * h)
            d = math.cos(g * (r + h)) / math.cos(g * r)
        elif nu == 0:
            a, b, c, d = 1 / h, 1 + h / x1, 2.0, 1.0
        else:
            a = 1 / (math.cosh(g) * math.sinh(g * h))
            b = math.sinh(g * (x1 + h)) / math.sinh(g * x1)
            c = 2 * math.cosh(g * h)
            d = math.cosh(g * (r + h)) / math.cosh(g * r)
    else:
        a = 1 / (math.sinh(g) * math.sinh(g * h))
        b = math.cosh(g * (x1 + h)) / math.cosh(g * x1)
        c = 2 * math.cosh(g * h)
        d = math.cosh(g * (r + h)) / math.cosh(g * r)
    return a, b, c, d


def closed_precision(family, x1, xn, n):
    """Assemble the equispaced precision from :func:`closed_precision_params`."""
    a, b, c, d = closed_precision_params(family, x1, xn, n)
    scale = a / family.eta2
    diag = np.full(n, c * scale)
    diag[0] = b * scale
    diag[-1] = d * scale
    off = np.full(n - 1, -scale)
    # |G| = (eta2 p_1)(q_n) (eta2 / a)^(n-1), since every wronskian is 1/a
    p, q = _raw_pq(family.boundary, family.nu)
    p1qn = family.eta2 * float(p(np.float64(x1))) * float(q(np.float64(xn)))
    logdet = math.log(p1qn) + (n - 1) * math.log(family.eta2 / a)
    return TridiagPrecision(diag, off, logdet, 1.0)


# -- Toeplitz reparameterization (Dirichlet, x_i = i / (n + 1)) ---------------


@dataclass(frozen=True)
class ToeplitzParams:
    """Precision ``phi * tridiag(-1; c, ..., c)`` of size ``n``.

    ``c_excess`` holds ``c - 2`` computed without cancellation; it is what
    the eigenvalues and the inverse map use.
    """

    phi: float
    c: float
    n: int
    h: float = None
    c_excess: float = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be positive")
        if self.h is None:
            object.__setattr__(self, "h", 1.0 / (self.n + 1))
        if self.c_excess is None:
            object.__setattr__(self, "c_excess", self.c - 2.0)
        if not (self.phi > 0 and math.isfinite(self.phi)):
            raise ParameterError(f"phi must be positive, got {self.phi!r}")

    @classmethod
    def from_excess(cls, phi, excess, n):
        return cls(phi=phi, c=2.0 + excess, n=n, c_excess=excess)

    @property
    def excess_lower(self):
        """``c - 2`` at ``nu = -pi^2``; admissible excesses are strictly above."""
        return -4.0 * math.sin(math.pi * self.h / 2) ** 2


def toeplitz_a(nu, h):
    """Scalar ``a`` with ``phi = a / eta2`` for the Dirichlet family."""
    g = math.sqrt(abs(nu))
    if nu < 0:
        return 1.0 / (math.sin(g) * math.sin(g * h))
    if nu == 0:
        return 1.0 / h
    return 1.0 / (math.sinh(g) * math.sinh(g * h))


def to_toeplitz(eta2, nu, n):
    """Map Dirichlet ``(eta2, nu)`` on ``x_i = i / (n + 1)`` to ``(phi, c)``."""
    if nu <= -math.pi**2:
        raise ParameterError(f"dirichlet family needs nu > -pi^2, got {nu!r}")
    if not eta2 > 0:
        raise ParameterError(f"eta2 must be positive, got {eta2!r}")
    h = 1.0 / (n + 1)
    g = math.sqrt(abs(nu))
    if nu < 0:
        excess = -4.0 * math.sin(g * h / 2) ** 2
    elif nu == 0:
        excess = 0.0
    else:
        excess = 4.0 * math.sinh(g * h / 2) ** 2
    return ToeplitzParams(
        phi=toeplitz_a(nu, h) / eta2, c=2.0 + excess, n=n, h=h, c_excess=excess
    )


def from_toeplitz(params):
    """Inverse of :func:`to_toeplitz`; returns ``(eta2, nu)``."""
    e, h = params.c_excess, params.h
    if not e > params.excess_lower or not math.isfinite(e):
        raise ParameterError(
            f"c = {params.c!r} outside the admissible image (c > 2 cos(pi h))"
        )
    if e > 0:
        g = 2.0 * math.asinh(math.sqrt(e) / 2.0) / h
        nu = g * g
    elif e < 0:
        g = 2.0 * math.asin(math.sqrt(-e) / 2.0) / h
        nu = -g * g
    else:
        nu = 0.0
    return toeplitz_a(nu, h) / params.phi, nu
