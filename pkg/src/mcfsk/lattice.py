"""Separable MCFs on regular lattices.

A product of 1-D MCFs evaluated on a Cartesian-product design has a
covariance equal to the Kronecker product of the per-axis covariances, so
its precision is the Kronecker product of tridiagonal factors.  Flat
indices follow C order: the last axis varies fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .covariance import Mcf1d, TridiagPrecision, build_cov, eval_mcf, precision
from .errors import InputError

__all__ = [
    "LatticeDesign",
    "SeparableMcf",
    "KronPrecision",
    "build_lattice",
    "sep_cov_eval",
    "sep_cross_cov",
    "sep_build_cov",
    "kron_precision",
    "kron_matvec",
    "kron_eigendata",
]


@dataclass(frozen=True)
class LatticeDesign:
    """Cartesian product of strictly increasing coordinate axes."""

    axes: tuple

    def __post_init__(self):
        axes = []
        for j, ax in enumerate(self.axes):
            a = np.array(ax, dtype=float).reshape(-1)
            if a.size == 0:
                raise InputError(f"axis {j} is empty")
            if not np.all(np.isfinite(a)):
                raise InputError(f"axis {j} has non-finite coordinates")
            if a.size > 1 and not np.all(np.diff(a) > 0):
                raise InputError(f"axis {j} is not strictly increasing")
            a.setflags(write=False)
            axes.append(a)
        if not axes:
            raise InputError("a lattice needs at least one axis")
        object.__setattr__(self, "axes", tuple(axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def n(self) -> int:
        return int(np.prod(self.shape))

    def multi_index(self, flat):
        """0-based multi-index of a 0-based flat index."""
        return np.unravel_index(flat, self.shape)

    def flat_index(self, multi):
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def point(self, flat):
        idx = self.multi_index(flat)
        return np.array([a[i] for a, i in zip(self.axes, idx)])

    def points(self):
        """All points as an ``(n, D)`` array in flat order."""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)


def build_lattice(axes: Sequence) -> LatticeDesign:
    return LatticeDesign(tuple(axes))


@dataclass(frozen=True)
class SeparableMcf:
    """Product covariance ``k(x, y) = prod_j k_j(x_j, y_j)``."""

    factors: tuple

    def __post_init__(self):
        fs = tuple(self.factors)
        if not fs or not all(isinstance(f, Mcf1d) for f in fs):
            raise InputError("factors must be a non-empty sequence of Mcf1d")
        object.__setattr__(self, "factors", fs)

    @property
    def dim(self):
        return len(self.factors)

    def __call__(self, x, y):
        return sep_cov_eval(self, x, y)


def _as_points(smcf, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if smcf.dim == 1 and x.size != 1:
            x = x[:, None]
        else:
            x = x[None, :]
    if x.shape[-1] != smcf.dim:
        raise InputError(f"points have dimension {x.shape[-1]}, covariance has {smcf.dim}")
    return x


def sep_cov_eval(smcf, x, y):
    """Evaluate the product covariance at one pair of D-vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (smcf.dim,) or y.shape != (smcf.dim,):
        raise InputError(
            f"expected {smcf.dim}-vectors, got shapes {x.shape} and {y.shape}"
        )
    out = 1.0
    for f, a, b in zip(smcf.factors, x, y):
        out *= float(eval_mcf(f, a, b))
    return out


def sep_cross_cov(smcf, lattice, x0):
    """Per-axis cross-covariance vectors ``k_j(x0_j, axis_j)``.

    For points ``x0`` of shape ``(m, D)`` returns a list of ``(m, n_j)``
    arrays; the cross-covariance with the whole lattice is their row-wise
    Kronecker product.
    """
    x0 = _as_points(smcf, x0)
    if lattice.dim != smcf.dim:
        raise InputError("lattice and covariance dimensions differ")
    out = []
    for j, (f, ax) in enumerate(zip(smcf.factors, lattice.axes)):
        out.append(eval_mcf(f, x0[:, j][:, None], ax[None, :]))
    return out


def sep_build_cov(smcf, lattice):
    """Dense ``n x n`` covariance on the lattice (test and small-n use)."""
    mats = [build_cov(f, ax).entries for f, ax in zip(smcf.factors, lattice.axes)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@dataclass(frozen=True)
class KronPrecision:
    """Kronecker product of tridiagonal precisions.

    ``logdet_cov`` is ``sum_j (n / n_j) logdet_j``.
    """

    factors: tuple
    n: int = field(init=False)
    logdet_cov: float = field(init=False)

    def __post_init__(self):
        fs = tuple(self.factors)
        object.__setattr__(self, "factors", fs)
        sizes = [f.n for f in fs]
        n = int(np.prod(sizes))
        object.__setattr__(self, "n", n)
        object.__setattr__(
            self, "logdet_cov", float(sum(n / nj * f.logdet_cov for f, nj in zip(fs, sizes)))
        )

    @property
    def shape(self):
        return tuple(f.n for f in self.factors)

    @property
    def dim(self):
        return len(self.factors)

    def matvec(self, v):
        return kron_matvec(self, v)

    def diagonal(self):
        out = self.factors[0].diag
        for f in self.factors[1:]:
            out = np.multiply.outer(out, f.diag)
        return np.asarray(out).reshape(-1)

    def to_dense(self):
        out = self.factors[0].to_dense()
        for f in self.factors[1:]:
            out = np.kron(out, f.to_dense())
        return out

    def to_sparse(self):
        from scipy import sparse

        out = None
        for f in self.factors:
            m = sparse.diags(
                [f.offdiag, f.diag, f.offdiag], [-1, 0, 1], shape=(f.n, f.n), format="csr"
            )
            out = m if out is None else sparse.kron(out, m, format="csr")
        return out


def kron_precision(smcf, lattice, **kwargs) -> KronPrecision:
    if lattice.dim != smcf.dim:
        raise InputError("lattice and covariance dimensions differ")
    return KronPrecision(
        tuple(precision(f, ax, **kwargs) for f, ax in zip(smcf.factors, lattice.axes))
    )


def _axis_apply(tp: TridiagPrecision, t, axis):
    t = np.moveaxis(t, axis, 0)
    return np.moveaxis(tp.matvec(t), 0, axis)


def kron_matvec(kp, v):
    """Apply ``kron(K_1^-1, ..., K_D^-1)`` to ``v`` (shape ``(n,)`` or ``(n, k)``).

    Works by one tridiagonal contraction per axis on the reshaped tensor, so
    the cost is ``O(n D)`` per column.
    """
    if isinstance(kp, TridiagPrecision):
        return kp.matvec(v)
    v = np.asarray(v, dtype=float)
    if v.shape[0] != kp.n:
        raise InputError(f"length mismatch: {v.shape[0]} vs {kp.n}")
    tail = v.shape[1:]
    t = v.reshape(kp.shape + tail)
    for j, f in enumerate(kp.factors):
        t = _axis_apply(f, t, j)
    return t.reshape(v.shape)


def kron_eigendata(kps):
    """Flat eigenvalues ``prod_j lambda^(j)_{i_j}`` in lattice order."""
    lists = [np.asarray(k, dtype=float).reshape(-1) for k in kps]
    if not lists:
        raise InputError("need at least one eigenvalue list")
    out = lists[0]
    for lam in lists[1:]:
        out = np.multiply.outer(out, lam)
    return np.asarray(out).reshape(-1)
