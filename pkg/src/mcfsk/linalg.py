"""Structured linear algebra for MCF precisions.

Contents:

* banded Cholesky solves for symmetric tridiagonal matrices,
* a Woodbury solver for ``(K + S)^-1`` when ``K^-1`` is tridiagonal or a
  Kronecker product of tridiagonals and ``S`` is diagonal noise,
* a dense Cholesky solver used for non-Markovian kernels and as an oracle,
* the closed-form eigendecomposition of ``phi * tridiag(-1; c)`` and the
  orthonormal sine transform that diagonalizes it,
* condition-number estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .covariance import TridiagPrecision
from .errors import (
    ConsistencyError,
    InputError,
    NotPositiveDefiniteError,
    SolverError,
)
from .lattice import KronPrecision, kron_matvec

__all__ = [
    "NoiseDiag",
    "WoodburySolver",
    "DenseSolver",
    "ToeplitzEig",
    "tridiag_solve",
    "tridiag_cholesky",
    "assemble_woodbury",
    "toeplitz_eig",
    "toeplitz_eigenvalues",
    "sine_matrix",
    "sine_transform_apply",
    "sine_transform_nd",
    "condition_number",
    "noisy_condition_number",
]

DENSE_EIG_MAX = 2000


# -- noise -------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseDiag:
    """Diagonal noise covariance; entry ``i`` is ``Var[eps(x_i)] / r_i``."""

    values: np.ndarray
    all_equal: bool = field(init=False)
    delta: float = field(init=False)
    is_zero: bool = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size == 0:
            raise InputError("noise vector is empty")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InputError("noise variances must be finite and nonnegative")
        is_zero = bool(np.all(v == 0))
        if not is_zero and np.any(v == 0):
            raise InputError(
                "noise must be strictly positive everywhere or zero everywhere"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "is_zero", is_zero)
        eq = bool(np.all(v == v[0]))
        object.__setattr__(self, "all_equal", eq)
        object.__setattr__(self, "delta", float(v[0]) if eq else float("nan"))

    @classmethod
    def constant(cls, delta, n):
        return cls(np.full(n, float(delta)))

    @property
    def n(self):
        return self.values.size

    def reciprocal(self):
        return 1.0 / self.values


# -- tridiagonal solves ------------------------------------------------------


def _banded(diag, offdiag):
    n = len(diag)
    ab = np.zeros((2, n))
    ab[0, 1:] = offdiag
    ab[1, :] = diag
    return ab


def tridiag_cholesky(diag, offdiag):
    """Upper banded Cholesky factor of a symmetric tridiagonal matrix.

    Raises
    ------
    NotPositiveDefiniteError
        On a non-positive pivot.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    if offdiag.shape != (max(diag.size - 1, 0),):
        raise InputError("offdiag must have length n - 1")
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(offdiag))):
        raise NotPositiveDefiniteError("tridiagonal matrix has non-finite entries")
    try:
        return sla.cholesky_banded(_banded(diag, offdiag), lower=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"tridiagonal matrix not SPD: {exc}") from None


def tridiag_solve(T, rhs, offdiag=None):
    """Solve ``T x = rhs`` for symmetric positive definite tridiagonal ``T``.

    ``T`` is a :class:`TridiagPrecision` or a diagonal array (then
    ``offdiag`` is required).  ``rhs`` may have trailing columns.
    """
    if isinstance(T, TridiagPrecision):
        diag, offdiag = T.diag, T.offdiag
    else:
        diag = T
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != len(diag):
        raise InputError(f"length mismatch: {rhs.shape[0]} vs {len(diag)}")
    cb = tridiag_cholesky(diag, offdiag)
    return sla.cho_solve_banded((cb, False), rhs)


# -- solvers -----------------------------------------------------------------


class WoodburySolver:
    """Applies ``(K + S)^-1`` given the structured precision ``K^-1``.

    ``apply(v) = K^-1 v - K^-1 (K^-1 + S^-1)^-1 K^-1 v`` and
    ``logdet = log|K| + log|K^-1 + S^-1| + sum(log S)``.  With zero noise
    the solver is ``K^-1`` itself.

    Parameters
    ----------
    kinv : TridiagPrecision or KronPrecision
    noise : NoiseDiag
    inner : {"auto", "banded", "splu", "cg"}
        Inner solver for ``K^-1 + S^-1``.  "auto" picks the banded Cholesky
        for 1-D and a sparse LU for Kronecker precisions.  "cg" uses
        Jacobi-preconditioned conjugate gradients with kron_matvec; the
        log-determinant is then evaluated lazily by a sparse LU.
    cg_tol : float
        Relative residual tolerance of the CG solve.
    """

    def __init__(self, kinv, noise, inner="auto", cg_tol=1e-10, cg_maxiter=None):
        if kinv.n != noise.n:
            raise InputError(f"precision has size {kinv.n}, noise {noise.n}")
        self.kinv = kinv
        self.noise = noise
        self.n = kinv.n
        self.cg_tol = cg_tol
        self.cg_maxiter = cg_maxiter or max(50, int(math.ceil(10 * math.sqrt(self.n))))
        self._logdet_inner = None
        if noise.is_zero:
            self.inner = "none"
            self.noise_inv = None
            self._logdet_inner = 0.0
            return
        self.noise_inv = noise.reciprocal()
        if inner == "auto":
            inner = "banded" if isinstance(kinv, TridiagPrecision) else "splu"
        if inner == "banded" and not isinstance(kinv, TridiagPrecision):
            if kinv.dim != 1:
                raise InputError("banded inner solve needs a 1-D precision")
            kinv = kinv.factors[0]
            self.kinv = kinv
        self.inner = inner
        if inner == "banded":
            self._chol = tridiag_cholesky(kinv.diag + self.noise_inv, kinv.offdiag)
            self._logdet_inner = float(2.0 * np.sum(np.log(self._chol[1])))
        elif inner == "splu":
            self._factor_splu()
        elif inner == "cg":
            self._jacobi = 1.0 / (kinv.diagonal() + self.noise_inv)
            if not np.all(self._jacobi > 0):
                raise NotPositiveDefiniteError("inner matrix has a non-positive diagonal")
        else:
            raise InputError(f"unknown inner solver {inner!r}")

    def _inner_sparse(self):
        k = self.kinv
        m = k.to_sparse() if isinstance(k, KronPrecision) else sp.diags(
            [k.offdiag, k.diag, k.offdiag], [-1, 0, 1], format="csr"
        )
        return (m + sp.diags(self.noise_inv)).tocsc()

    def _factor_splu(self):
        try:
            lu = spla.splu(self._inner_sparse(), permc_spec="MMD_AT_PLUS_A",
                           diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise NotPositiveDefiniteError(f"inner factorization failed: {exc}") from None
        u = lu.U.diagonal()
        if not np.all(u > 0):
            raise NotPositiveDefiniteError("inner matrix K^-1 + S^-1 is not SPD")
        self._lu = lu
        self._logdet_inner = float(np.sum(np.log(u)))

    def _inner_solve(self, r):
        if self.inner == "banded":
            return sla.cho_solve_banded((self._chol, False), r)
        if self.inner == "splu":
            return self._lu.solve(r)
        return self._cg_solve(r)

    def _cg_solve(self, r):
        if r.ndim > 1:
            return np.column_stack([self._cg_solve(r[:, j]) for j in range(r.shape[1])])
        op = spla.LinearOperator(
            (self.n, self.n),
            matvec=lambda x: kron_matvec(self.kinv, x) + self.noise_inv * x,
            dtype=float,
        )
        M = spla.LinearOperator((self.n, self.n), matvec=lambda x: self._jacobi * x, dtype=float)
        # direct PCG so the iteration cap and residual are ours to report
        x, info = spla.cg(op, r, rtol=self.cg_tol, atol=0.0, maxiter=self.cg_maxiter, M=M)
        res = float(np.linalg.norm(op @ x - r) / max(np.linalg.norm(r), 1e-300))
        if info != 0 and res > self.cg_tol * 10:
            raise SolverError(
                f"CG did not converge in {self.cg_maxiter} iterations", residual=res
            )
        return x

    def apply(self, v):
        """``(K + S)^-1 v`` for ``v`` of shape ``(n,)`` or ``(n, k)``."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise InputError(f"length mismatch: {v.shape[0]} vs {self.n}")
        kv = kron_matvec(self.kinv, v)
        if self.inner == "none":
            return kv
        return kv - kron_matvec(self.kinv, self._inner_solve(kv))

    __call__ = apply

    @property
    def logdet_inner(self):
        if self._logdet_inner is None:
            self._factor_splu()
        return self._logdet_inner

    @property
    def logdet_sum(self):
        """``log|K + S|``."""
        out = self.kinv.logdet_cov + self.logdet_inner
        if not self.noise.is_zero:
            out += float(np.sum(np.log(self.noise.values)))
        return out

    logdet = logdet_sum


def assemble_woodbury(kinv, noise, inner="auto", **kwargs):
    """Build a :class:`WoodburySolver`; see its docstring."""
    return WoodburySolver(kinv, noise, inner=inner, **kwargs)


class DenseSolver:
    """Cholesky-based ``(K + S)^-1`` for a dense covariance matrix."""

    def __init__(self, cov, noise=None):
        cov = np.asarray(cov, dtype=float)
        self.n = cov.shape[0]
        a = cov if noise is None or noise.is_zero else cov + np.diag(noise.values)
        try:
            self._cf = sla.cho_factor(a, lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NotPositiveDefiniteError(f"covariance not SPD: {exc}") from None
        self.logdet_sum = float(2.0 * np.sum(np.log(np.diag(self._cf[0]))))
        self.logdet = self.logdet_sum

    def apply(self, v):
        return sla.cho_solve(self._cf, np.asarray(v, dtype=float))

    __call__ = apply


# -- Toeplitz eigenstructure -------------------------------------------------


def toeplitz_eigenvalues(phi, excess, n):
    """``phi * (c - 2 cos(i pi / (n + 1)))`` for ``i = 1..n``.

    Computed as ``phi * (e + 4 sin^2(i pi / (2 (n + 1))))`` with
    ``e = c - 2`` so that small eigenvalues keep full relative accuracy.
    """
    i = np.arange(1, n + 1)
    return phi * (excess + 4.0 * np.sin(i * np.pi / (2.0 * (n + 1))) ** 2)


def sine_matrix(n):
    """Orthonormal symmetric sine matrix ``sqrt(2/(n+1)) sin(i j pi / (n+1))``."""
    i = np.arange(1, n + 1)
    return math.sqrt(2.0 / (n + 1)) * np.sin(np.outer(i, i) * np.pi / (n + 1))


@dataclass(frozen=True)
class ToeplitzEig:
    """Eigendecomposition of ``phi * tridiag(-1; c, ..., c)``.

    ``eigenvalues[i - 1]`` pairs with the sine vector
    ``v_i = sqrt(2/(n+1)) sin(i j pi / (n+1))``.  The alternative labelling
    ``phi (c + 2 cos(i pi / (n+1)))`` gives the same set with the index
    reversed; ``alt_index[i - 1]`` is the 1-based position of the ``i``-th
    alternative eigenvalue in ``eigenvalues``.
    """

    n: int
    phi: float
    c: float
    excess: float
    eigenvalues: np.ndarray
    alt_index: np.ndarray
    max_residual: float

    def transform(self, v, method="fast"):
        return sine_transform_apply(self, v, method=method)

    def alt_eigenvalues(self):
        return self.eigenvalues[self.alt_index - 1]


_RESIDUAL_FULL_MAX = 1024
_RESIDUAL_SAMPLES = 16


def _pair_residual(phi, c, n, i, lam):
    j = np.arange(1, n + 1)
    v = math.sqrt(2.0 / (n + 1)) * np.sin(i * j * np.pi / (n + 1))
    tv = c * v
    tv[:-1] -= v[1:]
    tv[1:] -= v[:-1]
    return float(np.linalg.norm(phi * tv - lam * v))


def toeplitz_eig(params, tol=1e-10):
    """Closed-form eigenpairs, each checked by its residual.

    All pairs are checked for ``n <= 1024``; above that a fixed spread of
    indices is checked.  The tolerance is scaled by ``max(1, phi * |c|)``,
    the size of the matrix entries.

    Raises
    ------
    ConsistencyError
        If a residual exceeds the tolerance.
    """
    n, phi = params.n, params.phi
    e = params.c_excess
    c = 2.0 + e
    lam = toeplitz_eigenvalues(phi, e, n)
    if n <= _RESIDUAL_FULL_MAX:
        idx = np.arange(1, n + 1)
    else:
        idx = np.unique(np.linspace(1, n, _RESIDUAL_SAMPLES).round().astype(int))
    res = max(_pair_residual(phi, c, n, int(i), lam[i - 1]) for i in idx)
    scale = max(1.0, phi * max(abs(c), 2.0))
    if not res <= tol * scale:
        raise ConsistencyError(f"eigenpair residual {res:.3e} exceeds {tol * scale:.3e}")
    alt = np.arange(n, 0, -1)
    return ToeplitzEig(n, phi, c, e, lam, alt, res)


def sine_transform_apply(eig, v, method="direct"):
    """Apply the orthonormal sine matrix ``P`` along the first axis of ``v``.

    ``method="direct"`` evaluates ``P v`` in row blocks (``O(n^2)``);
    ``method="fast"`` uses the type-I discrete sine transform.
    """
    n = eig.n if isinstance(eig, ToeplitzEig) else int(eig)
    v = np.asarray(v, dtype=float)
    if v.shape[0] != n:
        raise InputError(f"length mismatch: {v.shape[0]} vs {n}")
    if method == "fast":
        return scipy.fft.dst(v, type=1, axis=0, norm="ortho")
    if method != "direct":
        raise InputError(f"unknown method {method!r}")
    out = np.empty_like(v)
    j = np.arange(1, n + 1)
    s = math.sqrt(2.0 / (n + 1))
    block = max(1, 2_000_000 // n)
    for start in range(0, n, block):
        i = np.arange(start + 1, min(n, start + block) + 1)
        rows = s * np.sin(np.outer(i, j) * np.pi / (n + 1))
        out[start:start + i.size] = rows @ v
    return out


def sine_transform_nd(t):
    """Sine transform along every axis of a tensor (Kronecker of ``P_j``)."""
    return scipy.fft.dstn(np.asarray(t, dtype=float), type=1, norm="ortho")


# -- condition numbers -------------------------------------------------------


def _cond_from_extremes(lmin, lmax):
    if not (lmin > 0 and np.isfinite(lmax)):
        raise NotPositiveDefiniteError(f"smallest eigenvalue {lmin!r} is not positive")
    return float(lmax / lmin)


def _lanczos_extremes(matvec, inv_matvec, n, tol=1e-8):
    op = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    iop = spla.LinearOperator((n, n), matvec=inv_matvec, dtype=float)
    # a fixed random start: a constant vector is orthogonal to every
    # antisymmetric eigenvector of a persymmetric matrix
    v0 = np.random.default_rng(0).standard_normal(n)
    kw = dict(k=1, which="LA", tol=tol, v0=v0, ncv=min(n - 1, 64), return_eigenvectors=False)
    lmax = spla.eigsh(op, **kw)[0]
    imax = spla.eigsh(iop, **kw)[0]
    return 1.0 / imax, lmax


def condition_number(matrix):
    """``lambda_max / lambda_min`` of an SPD matrix.

    Accepts a dense symmetric array, a :class:`TridiagPrecision` or a
    :class:`KronPrecision`.  Since ``cond(A) = cond(A^-1)``, a precision
    gives the condition number of its covariance too.  Dense inputs use a
    full eigensolve up to ``n = 2000`` and Lanczos (power and inverse
    power) iteration above.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is not positive definite.
    """
    if isinstance(matrix, KronPrecision):
        return float(np.prod([condition_number(f) for f in matrix.factors]))
    if isinstance(matrix, TridiagPrecision):
        if matrix.n == 1:
            return _cond_from_extremes(matrix.diag[0], matrix.diag[0])
        w = sla.eigvalsh_tridiagonal(matrix.diag, matrix.offdiag)
        return _cond_from_extremes(w[0], w[-1])
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("matrix must be square")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0):
        raise InputError("matrix must be symmetric")
    n = a.shape[0]
    if n <= DENSE_EIG_MAX:
        w = np.linalg.eigvalsh(a)
        return _cond_from_extremes(w[0], w[-1])
    try:
        cf = sla.cho_factor(a, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None
    lmin, lmax = _lanczos_extremes(lambda x: a @ x, lambda x: sla.cho_solve(cf, x), n)
    return _cond_from_extremes(lmin, lmax)


def _precision_eigs(kinv):
    if isinstance(kinv, TridiagPrecision):
        return sla.eigvalsh_tridiagonal(kinv.diag, kinv.offdiag) if kinv.n > 1 else kinv.diag
    from .lattice import kron_eigendata

    return kron_eigendata([_precision_eigs(f) for f in kinv.factors])


def noisy_condition_number(kinv, noise):
    """Condition number of ``K + S`` given the precision ``K^-1``.

    Uses eigenvalues of the factors when ``S = delta I``; otherwise a dense
    eigensolve for small ``n`` and Lanczos iteration with the Woodbury
    solver as the inverse operator above.
    """
    if noise.is_zero:
        return condition_number(kinv)
    if noise.all_equal:
        mu = 1.0 / _precision_eigs(kinv)
        return _cond_from_extremes(mu.min() + noise.delta, mu.max() + noise.delta)
    n = kinv.n
    if n <= DENSE_EIG_MAX:
        cov = np.linalg.inv(kinv.to_dense())
        cov = 0.5 * (cov + cov.T)
        return condition_number(cov + np.diag(noise.values))
    solver = WoodburySolver(kinv, noise)
    kmv = _cov_matvec(kinv)
    lmin, lmax = _lanczos_extremes(
        lambda x: kmv(x) + noise.values * x, solver.apply, n
    )
    return _cond_from_extremes(lmin, lmax)


def _cov_matvec(kinv):
    if isinstance(kinv, TridiagPrecision):
        cb = tridiag_cholesky(kinv.diag, kinv.offdiag)
        return lambda x: sla.cho_solve_banded((cb, False), x)
    chols = [tridiag_cholesky(f.diag, f.offdiag) for f in kinv.factors]

    def mv(x):
        t = np.asarray(x, dtype=float).reshape(kinv.shape)
        for j, cb in enumerate(chols):
            t = np.moveaxis(t, j, 0)
            t = sla.cho_solve_banded((cb, False), t.reshape(t.shape[0], -1)).reshape(t.shape)
            t = np.moveaxis(t, 0, j)
        return t.reshape(-1)

    return mv
