"""Stochastic kriging with structured covariance solvers.

The model is ``z(x) = f(x)^T beta + M(x) + eps(x)`` where ``M`` is a
zero-mean Gaussian process and ``eps`` independent simulation noise with
known per-point variance.  Everything is expressed through a solver for
``V = K + S`` (structured Woodbury for MCFs, dense Cholesky for the SE
baseline), so no dense inverse is formed on the main path.

Two fitters are provided:

``fit_general``
    profiles ``beta`` by generalized least squares and maximizes the
    profile likelihood over the covariance parameters with bounded
    quasi-Newton and multistart.
``fit_toeplitz``
    for Dirichlet lattices with ``x_i = i / (n + 1)`` (after box mapping)
    and equal noise; works in the ``(phi, c)`` coordinates where the
    likelihood only needs eigenvalues and one sine transform of the data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DomainError,
    FitError,
    InputError,
    MCFError,
    NumericalError,
    ParameterError,
)
from .greens import ToeplitzParams, canonical_eta2, from_toeplitz, to_toeplitz, toeplitz_a
from .lattice import LatticeDesign, kron_eigendata
from .linalg import DenseSolver, NoiseDiag, WoodburySolver, sine_transform_nd
from .models import NU_MARGIN, NU_UPPER, SCALE_SPAN, make_model, model_from_spec

__all__ = [
    "Dataset",
    "TrendBasis",
    "CovParams",
    "FittedSk",
    "loglik",
    "loglik_toeplitz",
    "profile_beta",
    "fit_general",
    "fit_toeplitz",
    "toeplitz_ready",
    "predict",
    "predict_batch",
    "srmse",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]

LOG2PI = math.log(2.0 * math.pi)
_PENALTY = 1e25


# -- data --------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Sample means on a lattice design with known noise variances.

    ``noise.values[i]`` is ``Var[eps(x_i)] / r_i``; values follow the
    lattice flat order.
    """

    design: LatticeDesign
    zbar: np.ndarray
    noise: NoiseDiag
    reps: np.ndarray = None

    def __post_init__(self):
        design = self.design
        if not isinstance(design, LatticeDesign):
            design = LatticeDesign((np.asarray(design, dtype=float).reshape(-1),))
            object.__setattr__(self, "design", design)
        z = np.array(self.zbar, dtype=float).reshape(-1)
        if z.size != design.n:
            raise InputError(f"zbar has {z.size} entries, design has {design.n} points")
        if not np.all(np.isfinite(z)):
            raise InputError("zbar must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "zbar", z)
        noise = self.noise
        if not isinstance(noise, NoiseDiag):
            noise = np.asarray(noise, dtype=float)
            noise = NoiseDiag(np.full(design.n, float(noise)) if noise.ndim == 0 else noise)
            object.__setattr__(self, "noise", noise)
        if noise.n != design.n:
            raise InputError(f"noise has {noise.n} entries, design has {design.n} points")
        reps = np.ones(design.n, dtype=int) if self.reps is None else np.asarray(self.reps)
        if reps.shape != (design.n,) or np.any(reps < 1):
            raise InputError("reps must have one entry >= 1 per design point")
        object.__setattr__(self, "reps", reps.astype(int))

    @property
    def n(self):
        return self.design.n

    @classmethod
    def from_rows(cls, X, zbar, noise, reps=None):
        """Build from scattered rows that together form a full lattice.

        Rows may come in any order; they are permuted into flat order.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        axes = [np.unique(X[:, j]) for j in range(X.shape[1])]
        design = LatticeDesign(tuple(axes))
        if X.shape[0] != design.n:
            raise InputError(
                f"{X.shape[0]} rows do not form a full lattice of {design.n} points"
            )
        idx = [np.searchsorted(a, X[:, j]) for j, a in enumerate(axes)]
        flat = np.ravel_multi_index(tuple(idx), design.shape)
        if np.unique(flat).size != design.n:
            raise InputError("rows repeat a lattice point")
        order = np.empty(design.n, dtype=int)
        order[flat] = np.arange(design.n)
        noise = np.broadcast_to(np.asarray(noise, dtype=float), (design.n,))
        r = None if reps is None else np.asarray(reps)[order]
        return cls(design, np.asarray(zbar, dtype=float)[order], NoiseDiag(noise[order]), r)


@dataclass(frozen=True)
class TrendBasis:
    """Trend functions ``f(x)``; ``evaluate`` maps ``(m, D)`` points to ``(m, p)``."""

    name: str
    evaluate: Callable = field(compare=False, repr=False)

    @classmethod
    def constant(cls):
        return cls("constant", lambda X: np.ones((np.atleast_2d(X).shape[0], 1)))

    @classmethod
    def linear(cls):
        def f(X):
            X = np.atleast_2d(np.asarray(X, dtype=float))
            return np.column_stack([np.ones(X.shape[0]), X])

        return cls("linear", f)

    @classmethod
    def by_name(cls, name):
        if name == "constant":
            return cls.constant()
        if name == "linear":
            return cls.linear()
        raise InputError(f"unknown trend {name!r}")

    def matrix(self, X):
        return np.asarray(self.evaluate(X), dtype=float)


@dataclass(frozen=True)
class CovParams:
    """A covariance model together with a point in its parameter space."""

    model: object
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))


@dataclass(frozen=True)
class FittedSk:
    """A fitted stochastic-kriging model.

    Attributes
    ----------
    beta : ndarray
        GLS trend coefficients.
    params : dict
        Covariance hyperparameters in user coordinates.
    solver : WoodburySolver or DenseSolver
        Solver for ``K + S`` at the fitted parameters.
    alpha : ndarray
        ``(K + S)^-1 (zbar - F beta)``.
    loglik : float
        Log-likelihood at the optimum.
    """

    cov: CovParams
    beta: np.ndarray
    params: dict
    trend: TrendBasis
    data: Dataset
    solver: object
    alpha: np.ndarray
    loglik: float
    fitter: str = "general"
    diagnostics: dict = field(default_factory=dict)

    @property
    def model(self):
        return self.cov.model

    @property
    def theta(self):
        return self.cov.theta


# -- likelihood --------------------------------------------------------------


def make_solver(cov: CovParams, data: Dataset, inner="auto"):
    m = cov.model
    if m.dense:
        return DenseSolver(m.dense_cov(cov.theta, data.design), data.noise)
    return WoodburySolver(m.precision(cov.theta, data.design), data.noise, inner=inner)


def _gaussian_loglik(n, logdet, quad):
    return -0.5 * n * LOG2PI - 0.5 * logdet - 0.5 * quad


def loglik(cov: CovParams, beta, data: Dataset, trend: Optional[TrendBasis] = None,
           solver=None):
    """Gaussian log-likelihood of ``zbar`` at covariance ``cov`` and trend ``beta``."""
    trend = trend or TrendBasis.constant()
    solver = solver or make_solver(cov, data)
    F = trend.matrix(data.design.points())
    r = data.zbar - F @ np.atleast_1d(np.asarray(beta, dtype=float))
    return _gaussian_loglik(data.n, solver.logdet, float(r @ solver.apply(r)))


def profile_beta(solver, F, z):
    """GLS ``beta = (F^T V^-1 F)^-1 F^T V^-1 z``."""
    vf = solver.apply(F)
    a = F.T @ vf
    b = vf.T @ z
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise NumericalError("trend matrix is rank deficient at the design") from None


def _profile(cov, data, F, inner="auto"):
    solver = make_solver(cov, data, inner)
    beta = profile_beta(solver, F, data.zbar)
    r = data.zbar - F @ beta
    alpha = solver.apply(r)
    ll = _gaussian_loglik(data.n, solver.logdet, float(r @ alpha))
    return ll, beta, solver, alpha


def _zvar(z):
    v = float(np.var(z))
    if v > 0:
        return v
    return max(float(np.mean(z)) ** 2, 1.0)


# -- optimizer driver --------------------------------------------------------


def _minimize_multistart(fun, starts, bounds, polish=True):
    """Run L-BFGS-B from every start; ties go to the earliest start."""
    runs = []
    for k, x0 in enumerate(starts):
        try:
            res = minimize(fun, x0, method="L-BFGS-B", jac="3-point", bounds=bounds,
                           options={"maxiter": 400, "ftol": 1e-12, "gtol": 1e-8})
            runs.append((k, res, float(fun(x0))))
        except (MCFError, FloatingPointError, ValueError) as exc:
            runs.append((k, exc, math.inf))
    ok = [(k, r, f0) for k, r, f0 in runs if not isinstance(r, Exception)
          and np.isfinite(r.fun) and r.fun < _PENALTY]
    if not ok:
        raise FitError("every optimizer start failed", diagnostics={
            "starts": [list(map(float, s)) for s in starts],
            "messages": [str(r if isinstance(r, Exception) else r.message) for _, r, _ in runs],
        })
    best_f = min(r.fun for _, r, _ in ok)
    tol = 1e-10 * max(1.0, abs(best_f))
    k_best, best, _ = next(item for item in ok if item[1].fun <= best_f + tol)
    x = best.x
    if polish:
        res = minimize(fun, x, method="L-BFGS-B", jac="3-point", bounds=bounds,
                       options={"maxiter": 400, "ftol": 1e-15, "gtol": 1e-10})
        if res.fun <= best.fun:
            x = res.x
    return x, k_best, runs


def _central_grad(fun, x, bounds, step=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        lo, hi = bounds[i]
        h = step * max(1.0, abs(x[i]))
        a, b = max(lo, x[i] - h), min(hi, x[i] + h)
        xa, xb = x.copy(), x.copy()
        xa[i], xb[i] = a, b
        g[i] = (fun(xb) - fun(xa)) / (b - a)
    return g


def _diagnostics(fun, x, bounds, names, k_best, runs, fbest):
    g = _central_grad(fun, x, bounds)
    hits = []
    for i, (lo, hi) in enumerate(bounds):
        w = hi - lo
        if x[i] - lo <= 1e-6 * w or hi - x[i] <= 1e-6 * w:
            hits.append(names[i])
    # projected gradient: components pushing outward at an active bound do not count
    proj = g.copy()
    for i, (lo, hi) in enumerate(bounds):
        w = hi - lo
        if (x[i] - lo <= 1e-6 * w and g[i] > 0) or (hi - x[i] <= 1e-6 * w and g[i] < 0):
            proj[i] = 0.0
    return {
        "grad_norm": float(np.linalg.norm(proj) / max(1.0, abs(fbest))),
        "boundary_hits": hits,
        "best_start": int(k_best),
        "start_logliks": [float(-f0) if np.isfinite(f0) else None for _, _, f0 in runs],
        "end_logliks": [
            None if isinstance(r, Exception) or not np.isfinite(r.fun) or r.fun >= _PENALTY
            else float(-r.fun)
            for _, r, _ in runs
        ],
    }


def _starts(model, zvar, n_starts, seed, bounds):
    rng = np.random.default_rng(seed)
    starts = [np.clip(model.initial(zvar), [b[0] for b in bounds], [b[1] for b in bounds])]
    box = model.start_box(zvar)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    for _ in range(max(0, n_starts - 1)):
        starts.append(lo + (hi - lo) * rng.random(lo.size))
    return starts


# -- general fitter ----------------------------------------------------------


def fit_general(data: Dataset, family="dir", bounds=None, n_starts=5, seed=0,
                trend: Optional[TrendBasis] = None, boxes=None, inner="auto",
                starts=None):
    """Maximum-likelihood fit with ``beta`` profiled out.

    Parameters
    ----------
    data : Dataset
    family : str or model
        Family string such as ``"dir"``, ``"dir,exp"`` or ``"se"``, or a
        model object from :mod:`mcfsk.models`.
    bounds : list of (lo, hi), optional
        Bounds in optimizer coordinates; defaults to ``model.bounds``.
    n_starts, seed : int
        Multistart count and the seed of the start-point generator.  The
        first start is always the model's default initial point.

    Raises
    ------
    FitError
        If every start fails.
    """
    trend = trend or TrendBasis.constant()
    model = make_model(family, data.design.axes, boxes) if isinstance(family, str) else family
    F = trend.matrix(data.design.points())
    if F.shape[1] > data.n:
        raise InputError("more trend functions than design points")
    zvar = _zvar(data.zbar)
    bounds = list(bounds) if bounds is not None else model.bounds(zvar)

    def fun(theta):
        try:
            ll = _profile(CovParams(model, theta), data, F, inner)[0]
        except (MCFError, FloatingPointError, ValueError, OverflowError, ZeroDivisionError):
            return _PENALTY
        return -ll if np.isfinite(ll) else _PENALTY

    if starts is None:
        starts = _starts(model, zvar, n_starts, seed, bounds)
    with np.errstate(all="ignore"):
        x, k_best, runs = _minimize_multistart(fun, starts, bounds)
        ll, beta, solver, _ = _profile(CovParams(model, x), data, F, inner)
        diag = _diagnostics(fun, x, bounds, model.param_names(), k_best, runs, -ll)
    cov = CovParams(model, x)
    alpha = solver.apply(data.zbar - F @ beta)
    return FittedSk(cov, beta, model.user_params(x), trend, data, solver, alpha,
                    float(ll), "general", diag)


# -- Toeplitz fitter ---------------------------------------------------------


def _unit_coords(ax, box):
    lo, hi = box
    return (np.asarray(ax) - lo) / (hi - lo)


def toeplitz_ready(data: Dataset, model=None):
    """Reason string why ``fit_toeplitz`` cannot run, or ``None`` if it can."""
    model = model or make_model("dir", data.design.axes)
    if getattr(model, "dense", True) or any(k != "dirichlet" for k in model.kinds):
        return "the Toeplitz fitter needs the Dirichlet family on every axis"
    for j, (ax, box) in enumerate(zip(data.design.axes, model.boxes)):
        n = ax.size
        u = _unit_coords(ax, box)
        if not np.allclose(u, np.arange(1, n + 1) / (n + 1), rtol=0, atol=1e-10):
            return f"axis {j + 1} is not equispaced as i/(n+1) on its box"
    if not (data.noise.is_zero or data.noise.all_equal):
        return "the Toeplitz fitter needs equal noise variances"
    return None


def _unit_eigs(excess, n):
    i = np.arange(1, n + 1)
    return excess + 4.0 * np.sin(i * np.pi / (2.0 * (n + 1))) ** 2


def _to_excess(t, h):
    return h * h * math.sinh(t)


def loglik_toeplitz(log_phi, excesses, data: Dataset, trend=None, beta=None, _cache=None):
    """The same likelihood evaluated through eigenvalues and sine transforms.

    ``log_phi`` is the log of the overall Toeplitz scale and ``excesses``
    the per-axis ``c_j - 2``.  ``beta`` is profiled when not given.

    Returns
    -------
    (loglik, beta)
    """
    shape = data.design.shape
    if _cache is None:
        trend = trend or TrendBasis.constant()
        F = trend.matrix(data.design.points())
        tz = sine_transform_nd(data.zbar.reshape(shape)).reshape(-1)
        tf = np.column_stack([
            sine_transform_nd(F[:, k].reshape(shape)).reshape(-1) for k in range(F.shape[1])
        ])
        _cache = (tz, tf)
    tz, tf = _cache
    lam = math.exp(log_phi) * kron_eigendata([_unit_eigs(e, n) for e, n in zip(excesses, shape)])
    if not np.all(lam > 0) or not np.all(np.isfinite(lam)):
        raise ParameterError("non-positive Toeplitz eigenvalue")
    d = lam if data.noise.is_zero else lam / (1.0 + lam * data.noise.delta)
    if beta is None:
        a = tf.T @ (d[:, None] * tf)
        b = tf.T @ (d * tz)
        beta = np.linalg.solve(a, b)
    tr = tz - tf @ np.atleast_1d(beta)
    ll = -0.5 * data.n * LOG2PI + 0.5 * float(np.sum(np.log(d))) - 0.5 * float(d @ (tr * tr))
    return ll, beta


def fit_toeplitz(data: Dataset, n_starts=5, seed=0, trend: Optional[TrendBasis] = None,
                 boxes=None):
    """Inverse-free maximum likelihood for Dirichlet lattices with equal noise.

    Optimizes ``log phi`` and ``asinh((c_j - 2) / h_j^2)`` with ``beta``
    profiled, then maps ``(phi, c_j)`` back to the scale and ``nu_j`` of the
    Dirichlet model used by :func:`fit_general`.

    Raises
    ------
    InputError
        If the design or noise does not meet the preconditions; use
        :func:`fit_general` instead.
    """
    trend = trend or TrendBasis.constant()
    model = make_model("dir", data.design.axes, boxes)
    why = toeplitz_ready(data, model)
    if why:
        raise InputError(f"{why}; use fit_general")
    shape = data.design.shape
    hs = [1.0 / (n + 1) for n in shape]
    F = trend.matrix(data.design.points())
    tz = sine_transform_nd(data.zbar.reshape(shape)).reshape(-1)
    tf = np.column_stack([
        sine_transform_nd(F[:, k].reshape(shape)).reshape(-1) for k in range(F.shape[1])
    ])
    cache = (tz, tf)

    zvar = _zvar(data.zbar)
    # phi at nu = 0 and unit scale
    log_phi0 = float(sum(math.log(n + 1) for n in shape)) - math.log(zvar)
    span = SCALE_SPAN * math.log(10.0) + 5.0
    bounds = [(log_phi0 - span, log_phi0 + span)]
    for n, h in zip(shape, hs):
        e_lo = to_toeplitz(1.0, -math.pi**2 + NU_MARGIN, n).c_excess
        e_hi = to_toeplitz(1.0, NU_UPPER, n).c_excess
        bounds.append((math.asinh(e_lo / (h * h)), math.asinh(e_hi / (h * h))))

    def fun(t):
        try:
            ll, _ = loglik_toeplitz(t[0], [_to_excess(v, h) for v, h in zip(t[1:], hs)],
                                    data, _cache=cache)
        except (MCFError, FloatingPointError, ValueError, OverflowError, np.linalg.LinAlgError):
            return _PENALTY
        return -ll if np.isfinite(ll) else _PENALTY

    rng = np.random.default_rng(seed)
    starts = [np.array([log_phi0] + [0.0] * len(shape))]
    for _ in range(max(0, n_starts - 1)):
        row = [log_phi0 + rng.uniform(-2.0, 2.0)]
        for b in bounds[1:]:
            row.append(rng.uniform(max(b[0], math.asinh(-0.8 * math.pi**2)), math.asinh(200.0)))
        starts.append(np.array(row))
    names = ["log_phi"] + [f"c_{j + 1}" for j in range(len(shape))]
    with np.errstate(all="ignore"):
        t, k_best, runs = _minimize_multistart(fun, starts, bounds)
        ll, beta = loglik_toeplitz(t[0], [_to_excess(v, h) for v, h in zip(t[1:], hs)],
                                   data, _cache=cache)
        diag = _diagnostics(fun, t, bounds, names, k_best, runs, -ll)

    phi = math.exp(t[0])
    nus, a_prod, canon_prod, cs = [], 1.0, 1.0, []
    for v, n, h in zip(t[1:], shape, hs):
        tp = ToeplitzParams.from_excess(1.0, _to_excess(v, h), n)
        _, nu = from_toeplitz(tp)
        if abs(nu) < 1e-10:
            nu = 0.0
        nus.append(nu)
        cs.append(tp.c)
        a_prod *= toeplitz_a(nu, h)
        canon_prod *= canonical_eta2("dirichlet", nu)
    eta2 = a_prod / phi
    scale = eta2 / canon_prod
    x = model.pack(scale, nus)
    cov = CovParams(model, x)
    solver = make_solver(cov, data)
    alpha = solver.apply(data.zbar - F @ beta)
    diag.update({
        "phi": phi,
        "c": cs,
        "loglik_woodbury": float(loglik(cov, beta, data, trend, solver)),
    })
    return FittedSk(cov, np.asarray(beta), model.user_params(x), trend, data, solver, alpha,
                    float(ll), "toeplitz", diag)


# -- prediction --------------------------------------------------------------


def _check_points(fitted, X):
    X = np.asarray(X, dtype=float)
    D = fitted.data.design.dim
    if X.ndim == 1:
        X = X[:, None] if D == 1 else X[None, :]
    if X.ndim != 2 or X.shape[1] != D:
        raise InputError(f"points must have {D} columns")
    if not fitted.model.dense:
        for j, (lo, hi) in enumerate(fitted.model.boxes):
            bad = ~((X[:, j] > lo) & (X[:, j] < hi))
            if np.any(bad):
                raise DomainError(
                    f"coordinate {j + 1} = {X[bad, j][0]!r} outside the model box ({lo}, {hi})"
                )
    return X


def predict_batch(fitted: FittedSk, X, with_diagnostics=False, chunk=None):
    """Predictions and MSEs at the rows of ``X``.

    MSEs below zero from rounding are clamped; the smallest pre-clamp value
    is reported when ``with_diagnostics`` is set.
    """
    X = _check_points(fitted, X)
    model, theta = fitted.model, fitted.theta
    n = fitted.data.n
    chunk = chunk or max(1, 2_000_000 // max(n, 1))
    zhat = np.empty(X.shape[0])
    mse = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        xb = X[start:start + chunk]
        G = model.cross_cov(theta, fitted.data.design, xb)
        zhat[start:start + chunk] = fitted.trend.matrix(xb) @ fitted.beta + G @ fitted.alpha
        W = fitted.solver.apply(G.T)
        mse[start:start + chunk] = model.prior_var(theta, xb) - np.einsum("mn,nm->m", G, W)
    raw_min = float(mse.min()) if mse.size else 0.0
    mse = np.maximum(mse, 0.0)
    if with_diagnostics:
        return zhat, mse, {"mse_min_preclamp": raw_min}
    return zhat, mse


def predict(fitted: FittedSk, x0):
    """``(zhat, mse)`` at a single point."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).reshape(1, -1)
    z, m = predict_batch(fitted, x0)
    return float(z[0]), float(m[0])


def srmse(predictions, truth):
    """``||Z - Zhat|| / ||Z - mean(Z)||``."""
    p = np.asarray(predictions, dtype=float).reshape(-1)
    t = np.asarray(truth, dtype=float).reshape(-1)
    if p.shape != t.shape or t.size < 2:
        raise InputError("need equal-length vectors with at least two entries")
    den = float(np.linalg.norm(t - t.mean()))
    if den == 0.0:
        raise InputError("SRMSE is undefined for a constant truth")
    return float(np.linalg.norm(t - p)) / den


# -- serialization -----------------------------------------------------------

FORMAT_VERSION = 1


def model_to_dict(fitted: FittedSk):
    d = fitted.data
    return {
        "format": "mcfsk-model",
        "version": FORMAT_VERSION,
        "fitter": fitted.fitter,
        "model": fitted.model.spec(),
        "theta": [float(v) for v in fitted.theta],
        "params": {k: float(v) for k, v in fitted.params.items()},
        "beta": [float(v) for v in fitted.beta],
        "trend": fitted.trend.name,
        "design": {"axes": [[float(v) for v in a] for a in d.design.axes]},
        "zbar": [float(v) for v in d.zbar],
        "noise": [float(v) for v in d.noise.values],
        "noise_summary": {
            "all_equal": d.noise.all_equal,
            "zero": d.noise.is_zero,
            "min": float(d.noise.values.min()),
            "max": float(d.noise.values.max()),
        },
        "reps": [int(v) for v in d.reps],
        "loglik": float(fitted.loglik),
        "diagnostics": _jsonable(fitted.diagnostics),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def model_from_dict(doc):
    if doc.get("format") != "mcfsk-model":
        raise InputError("not a fitted-model document")
    model = model_from_spec(doc["model"])
    design = LatticeDesign(tuple(np.array(a) for a in doc["design"]["axes"]))
    data = Dataset(design, np.array(doc["zbar"]), NoiseDiag(np.array(doc["noise"])),
                   np.array(doc["reps"]))
    trend = TrendBasis.by_name(doc["trend"])
    cov = CovParams(model, np.array(doc["theta"]))
    beta = np.array(doc["beta"])
    solver = make_solver(cov, data)
    alpha = solver.apply(data.zbar - trend.matrix(design.points()) @ beta)
    return FittedSk(cov, beta, dict(doc["params"]), trend, data, solver, alpha,
                    float(doc["loglik"]), doc.get("fitter", "general"),
                    dict(doc.get("diagnostics", {})))


def save_model(fitted: FittedSk, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(fitted), fh, indent=1)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
