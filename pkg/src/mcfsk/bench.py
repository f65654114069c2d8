"""Benchmark surfaces and the experiment harness.

Surfaces: three-hump camel, Matyas, Bohachevsky (2-D), Griewank (4-D)
and the expected cycle time of product 1 in a four-station Jackson network
(4-D after a change of variables that maps the product-mix simplex onto a
box).

An experiment places an equispaced interior lattice on the surface domain,
simulates replicated noisy outputs, fits a covariance family, predicts on
an equispaced grid and records SRMSE, condition numbers and timings.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .covariance import exponential
from .errors import DomainError, InputError, MCFError, NotPositiveDefiniteError, ParameterError
from .kriging import (
    Dataset,
    fit_general,
    fit_toeplitz,
    predict_batch,
    srmse,
    toeplitz_ready,
)
from .lattice import LatticeDesign, SeparableMcf
from .linalg import NoiseDiag, condition_number, noisy_condition_number
from .models import make_model, parse_family

__all__ = [
    "SurfaceSpec",
    "JacksonParams",
    "SURFACES",
    "get_surface",
    "eval_surface",
    "jackson_ct",
    "jackson_alpha",
    "interior_grid",
    "simulate_observations",
    "ExperimentConfig",
    "ResultRecord",
    "run_experiment",
    "expand_sweep",
    "load_sweep",
    "run_sweep",
    "baseline_cov",
    "BaselineCov",
]


# -- surfaces ----------------------------------------------------------------


@dataclass(frozen=True)
class JacksonParams:
    """Service rates ``mu_j`` and expected visits ``delta[i, j]`` of product ``i`` to station ``j``."""

    mu: tuple = (1.25, 1.85, 1.97, 1.45)
    delta: tuple = (
        (1.553, 1.012, 0.926, 0.242),
        (0.127, 1.066, 1.115, 0.536),
        (1.182, 1.597, 1.486, 1.850),
        (1.800, 1.310, 1.029, 1.179),
    )
    product: int = 1

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        delta = np.asarray(self.delta, dtype=float)
        if np.any(mu <= 0):
            raise ParameterError("service rates must be positive")
        if np.any(delta < 0) or delta.shape[1] != mu.size:
            raise ParameterError("delta must be nonnegative with one column per station")


def jackson_alpha(x):
    """Product mix from box coordinates.

    ``alpha_1 = x_1^2``, ``alpha_i = x_i^2 (1 - sum_{h<i} alpha_h)`` for
    ``i = 2..D-1`` and ``alpha_D`` takes the remainder.  ``x`` has shape
    ``(..., D - 1)``.
    """
    x = np.asarray(x, dtype=float)
    alphas = []
    rest = np.ones(x.shape[:-1])
    for i in range(x.shape[-1]):
        a = x[..., i] ** 2 * rest
        alphas.append(a)
        rest = rest - a
    alphas.append(np.maximum(rest, 0.0))
    return np.stack(alphas, axis=-1)


def jackson_ct(alpha, rho, params: JacksonParams = JacksonParams()):
    """Expected cycle time of the product of interest.

    ``sum_j delta_1j / (mu_j (1 - rho u_j / max_h u_h))`` with station loads
    ``u_j = sum_i alpha_i delta_ij / mu_j``.
    """
    mu = np.asarray(params.mu, dtype=float)
    delta = np.asarray(params.delta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    load = (alpha @ delta) / mu
    util = rho[..., None] * load / load.max(axis=-1, keepdims=True)
    d1 = delta[params.product - 1]
    return np.sum(d1 / (mu * (1.0 - util)), axis=-1)


def _camel3(X):
    x, y = X[:, 0], X[:, 1]
    return 2 * x**2 - 1.05 * x**4 + x**6 / 6 + x * y + y**2


def _matyas(X):
    x, y = X[:, 0], X[:, 1]
    return 0.26 * (x**2 + y**2) - 0.48 * x * y


def _bohachevsky(X):
    x, y = X[:, 0], X[:, 1]
    return x**2 + 2 * y**2 - 0.3 * np.cos(3 * np.pi * x) - 0.4 * np.cos(4 * np.pi * y) + 0.7


def _griewank4(X):
    i = np.arange(1, X.shape[1] + 1)
    return np.sum((X / 20.0) ** 2, axis=1) - 10.0 * np.prod(np.cos(X / np.sqrt(i)), axis=1) + 10.0


def _jackson(X):
    return jackson_ct(jackson_alpha(X[:, :-1]), X[:, -1])


@dataclass(frozen=True)
class SurfaceSpec:
    """A named test surface on a box domain.

    ``fixed_levels`` maps an axis index to design levels that replace the
    default interior grid on that axis (the utilization axis of the
    Jackson surface).
    """

    name: str
    domain: tuple
    func: object = field(repr=False, compare=False)
    fixed_levels: tuple = ()
    sigma_default: Optional[float] = None

    @property
    def dim(self):
        return len(self.domain)

    def design_axes(self, m):
        axes = [interior_grid(lo, hi, m) for lo, hi in self.domain]
        for j, levels in self.fixed_levels:
            axes[j] = np.asarray(levels, dtype=float)
        return axes

    def model_boxes(self, axes):
        """Boxes for the covariance model: the domain, or ``(x1 - h, xn + h)`` on fixed axes."""
        boxes = [tuple(b) for b in self.domain]
        for j, levels in self.fixed_levels:
            lv = np.asarray(levels, dtype=float)
            h = (lv[-1] - lv[0]) / (lv.size - 1)
            boxes[j] = (float(lv[0] - h), float(lv[-1] + h))
        return tuple(boxes)


SURFACES = {
    "camel3": SurfaceSpec("camel3", ((-2.0, 2.0), (-2.0, 2.0)), _camel3),
    "matyas": SurfaceSpec("matyas", ((-10.0, 10.0), (-10.0, 10.0)), _matyas),
    "bohachevsky": SurfaceSpec("bohachevsky", ((-100.0, 100.0), (-100.0, 100.0)), _bohachevsky),
    "griewank4": SurfaceSpec("griewank4", ((-5.0, 5.0),) * 4, _griewank4, sigma_default=1.0),
    "jackson_ct": SurfaceSpec(
        "jackson_ct",
        ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.5, 0.9)),
        _jackson,
        fixed_levels=((3, (0.5, 0.6, 0.7, 0.8, 0.9)),),
    ),
}


def get_surface(name) -> SurfaceSpec:
    if isinstance(name, SurfaceSpec):
        return name
    try:
        return SURFACES[name]
    except KeyError:
        raise InputError(f"unknown surface {name!r}; choose from {sorted(SURFACES)}") from None


def eval_surface(spec, x):
    """Evaluate a surface at one point (1-D ``x``) or at the rows of ``x``."""
    spec = get_surface(spec)
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != spec.dim:
        raise InputError(f"{spec.name} takes {spec.dim}-dimensional points")
    lo = np.array([b[0] for b in spec.domain])
    hi = np.array([b[1] for b in spec.domain])
    tol = 1e-12 * (hi - lo)
    if np.any(X < lo - tol) or np.any(X > hi + tol) or not np.all(np.isfinite(X)):
        raise DomainError(f"point outside the {spec.name} domain {spec.domain}")
    out = np.asarray(spec.func(X), dtype=float)
    return float(out[0]) if single else out


def interior_grid(lo, hi, m):
    """``lo + (hi - lo) i / (m + 1)`` for ``i = 1..m``."""
    if m < 1:
        raise InputError("grid count must be positive")
    return lo + (hi - lo) * np.arange(1, m + 1) / (m + 1)


def surface_range(spec, per_axis=41):
    """``max - min`` of the surface on an interior grid."""
    spec = get_surface(spec)
    axes = [interior_grid(lo, hi, per_axis if spec.dim <= 2 else 11) for lo, hi in spec.domain]
    z = eval_surface(spec, LatticeDesign(tuple(axes)).points())
    return float(z.max() - z.min())


# -- simulation --------------------------------------------------------------


def simulate_observations(spec, design, sigma, r=1, seed=0):
    """Replicated noisy outputs averaged per design point.

    Each of the ``r`` replications at ``x_i`` is ``Z(x_i) + N(0, sigma^2)``;
    the dataset carries the sample means and the noise variance
    ``sigma^2 / r`` (treated as known).
    """
    if sigma < 0 or r < 1:
        raise InputError("need sigma >= 0 and r >= 1")
    if not isinstance(design, LatticeDesign):
        design = LatticeDesign(tuple(design))
    truth = eval_surface(spec, design.points())
    n = design.n
    reps = np.full(n, int(r))
    if sigma == 0:
        return Dataset(design, truth, NoiseDiag(np.zeros(n)), reps)
    rng = np.random.default_rng(seed)
    total = np.zeros(n)
    block = max(1, 1_000_000 // n)
    done = 0
    while done < r:
        k = min(block, r - done)
        total += rng.normal(0.0, sigma, size=(k, n)).sum(axis=0)
        done += k
    return Dataset(design, truth + total / r, NoiseDiag(np.full(n, sigma**2 / r)), reps)


# -- baselines ---------------------------------------------------------------


@dataclass(frozen=True)
class BaselineCov:
    """Evaluator for a baseline kernel; ``mcf`` is set for the sparse path."""

    name: str
    eta2: float
    theta: tuple
    mcf: Optional[SeparableMcf] = None

    @property
    def sparse(self):
        return self.mcf is not None

    def __call__(self, x, y):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        th = np.asarray(self.theta, dtype=float)
        if x.shape != th.shape or y.shape != th.shape:
            raise InputError("point dimension does not match theta")
        if self.name == "se":
            return float(self.eta2 * np.exp(-np.sum(th * (x - y) ** 2)))
        return float(self.eta2 * np.exp(-np.sum(th * np.abs(x - y))))


def baseline_cov(name, eta2=1.0, theta=(1.0,)):
    """``k_SE`` (dense path) or ``k_Exp`` (separable O-U MCF)."""
    theta = tuple(float(t) for t in np.atleast_1d(theta))
    if not eta2 > 0 or any(not t > 0 for t in theta):
        raise ParameterError("eta2 and theta must be positive")
    if name == "se":
        return BaselineCov("se", float(eta2), theta)
    if name == "exp":
        factors = tuple(exponential(eta2 if j == 0 else 1.0, t) for j, t in enumerate(theta))
        return BaselineCov("exp", float(eta2), theta, SeparableMcf(factors))
    raise InputError(f"unknown baseline {name!r}")


# -- experiments -------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``sigma=None`` uses the surface default: 1 for Griewank, otherwise 1% of
    the surface range.  ``K`` is the prediction points per axis; for
    ``D > 2`` the full grid is replaced by ``K_max`` points drawn as a
    Latin-style subsample.
    """

    surface: str
    family: str = "dir"
    m: int = 5
    K: int = 100
    K_max: int = 10_000
    sigma: Optional[float] = 0.0
    reps: int = 1
    seed: int = 0
    index: int = 0
    fitter: str = "auto"
    n_starts: int = 5
    timing_repeats: int = 3
    output: Optional[str] = None

    def __post_init__(self):
        if self.sigma is not None and self.sigma < 0:
            raise InputError("sigma must be nonnegative")
        if self.reps < 1 or self.m < 1 or self.K < 2:
            raise InputError("need reps >= 1, m >= 1 and K >= 2")
        if self.fitter not in ("auto", "general", "toeplitz"):
            raise InputError(f"unknown fitter {self.fitter!r}")


@dataclass
class ResultRecord:
    config: dict
    status: str
    srmse: float
    cond_cov: float
    cond_total: float
    fit_seconds: float
    predict_seconds: float
    params: dict
    loglik: float
    fitter_used: str
    sigma_used: float
    n: int
    K_points: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def row(self):
        out = {k: v for k, v in self.config.items() if k != "output"}
        out.update(
            status=self.status, srmse=self.srmse, cond_cov=self.cond_cov,
            cond_total=self.cond_total, fit_seconds=self.fit_seconds,
            predict_seconds=self.predict_seconds, loglik=self.loglik,
            fitter_used=self.fitter_used, sigma_used=self.sigma_used, n=self.n,
            K_points=self.K_points, params=json.dumps(self.params, sort_keys=True),
        )
        return out


def prediction_points(spec, K, K_max=10_000, seed=0):
    """Equispaced interior prediction grid, subsampled when ``D > 2``.

    The subsample keeps ``K_max`` points; every axis level appears equally
    often (per-axis random permutations of a balanced level list).
    """
    axes = [interior_grid(lo, hi, K) for lo, hi in spec.domain]
    if spec.dim <= 2 or K**spec.dim <= K_max:
        return LatticeDesign(tuple(axes)).points()
    rng = np.random.default_rng([seed, 7919])
    reps = int(math.ceil(K_max / K))
    cols = []
    for ax in axes:
        idx = np.tile(np.arange(K), reps)[:K_max]
        cols.append(ax[rng.permutation(idx)])
    return np.column_stack(cols)


def _median_time(fn, repeats):
    times, out = [], None
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, float(np.median(times))


def _default_sigma(spec):
    if spec.sigma_default is not None:
        return spec.sigma_default
    return 0.01 * surface_range(spec)


def _cond_or_inf(fn, diagnostics, key):
    # a non-positive computed eigenvalue means cond exceeds ~1/eps
    try:
        return fn()
    except NotPositiveDefiniteError as exc:
        diagnostics[key] = f"numerically singular: {exc}"
        return math.inf


def _conditions(fitted, diagnostics):
    model, theta, data = fitted.model, fitted.theta, fitted.data
    if model.dense:
        K = model.dense_cov(theta, data.design)
        c0 = _cond_or_inf(lambda: condition_number(K), diagnostics, "cond_cov_note")
        if data.noise.is_zero:
            return c0, c0
        c1 = _cond_or_inf(lambda: condition_number(K + np.diag(data.noise.values)),
                          diagnostics, "cond_total_note")
        return c0, c1
    kinv = model.precision(theta, data.design)
    c0 = _cond_or_inf(lambda: condition_number(kinv), diagnostics, "cond_cov_note")
    c1 = _cond_or_inf(lambda: noisy_condition_number(kinv, data.noise), diagnostics,
                      "cond_total_note")
    return c0, c1


def run_experiment(config: ExperimentConfig) -> ResultRecord:
    """Simulate, fit, predict and score one configuration.

    Fit failures are recorded in ``diagnostics`` with ``status="fit_failed"``
    rather than raised, so sweeps keep going.
    """
    spec = get_surface(config.surface)
    ss = np.random.SeedSequence([int(config.seed), int(config.index)])
    sim_seed, fit_seed, grid_seed = (int(s.generate_state(1)[0]) for s in ss.spawn(3))
    sigma = _default_sigma(spec) if config.sigma is None else float(config.sigma)
    axes = spec.design_axes(config.m)
    design = LatticeDesign(tuple(axes))
    data = simulate_observations(spec, design, sigma, config.reps, sim_seed)
    boxes = spec.model_boxes(axes)
    kinds = parse_family(config.family, spec.dim)
    Xp = prediction_points(spec, config.K, config.K_max, grid_seed)
    truth = eval_surface(spec, Xp)

    fitter = config.fitter
    model = make_model(config.family, axes, boxes)
    if fitter == "auto":
        fitter = "toeplitz" if kinds != "se" and toeplitz_ready(data, model) is None else "general"

    record = dict(
        config=asdict(config), srmse=float("nan"), cond_cov=float("nan"),
        cond_total=float("nan"), fit_seconds=float("nan"), predict_seconds=float("nan"),
        params={}, loglik=float("nan"), fitter_used=fitter, sigma_used=sigma,
        n=design.n, K_points=int(Xp.shape[0]),
    )
    diagnostics = {"grid": "full" if Xp.shape[0] == config.K**spec.dim else "latin_subsample"}
    try:
        if fitter == "toeplitz":
            fit = lambda: fit_toeplitz(data, n_starts=config.n_starts, seed=fit_seed, boxes=boxes)
        else:
            fit = lambda: fit_general(data, model, n_starts=config.n_starts, seed=fit_seed)
        fitted, record["fit_seconds"] = _median_time(fit, config.timing_repeats)
    except (MCFError, np.linalg.LinAlgError, FloatingPointError) as exc:
        diagnostics["error"] = f"{type(exc).__name__}: {exc}"
        return ResultRecord(status="fit_failed", diagnostics=diagnostics, **record)

    record["params"] = {k: float(v) for k, v in fitted.params.items()}
    record["loglik"] = float(fitted.loglik)
    diagnostics.update(
        grad_norm=fitted.diagnostics.get("grad_norm"),
        boundary_hits=fitted.diagnostics.get("boundary_hits"),
    )
    status = "ok"
    try:
        (zhat, mse, pdiag), record["predict_seconds"] = _median_time(
            lambda: predict_batch(fitted, Xp, with_diagnostics=True), config.timing_repeats
        )
        diagnostics.update(pdiag)
        if not np.all(np.isfinite(zhat)):
            raise FloatingPointError("non-finite predictions")
        record["srmse"] = srmse(zhat, truth)
        zd, _ = predict_batch(fitted, design.points())
        diagnostics["design_max_abs_error"] = float(np.max(np.abs(zd - data.zbar)))
    except (MCFError, np.linalg.LinAlgError, FloatingPointError) as exc:
        diagnostics["error"] = f"{type(exc).__name__}: {exc}"
        status = "predict_failed"
    try:
        record["cond_cov"], record["cond_total"] = _conditions(fitted, diagnostics)
    except (MCFError, np.linalg.LinAlgError, FloatingPointError) as exc:
        diagnostics["cond_error"] = f"{type(exc).__name__}: {exc}"
    g = diagnostics.get("grad_norm")
    if g is None or not math.isfinite(g) or g > 1e-3:
        # typically an optimum pressed against a region where Cholesky fails
        diagnostics["optimizer_not_stationary"] = True
    if (not math.isfinite(record["srmse"]) or record["srmse"] > 10.0
            or record["cond_cov"] == math.inf):
        diagnostics["numerical_failure"] = True
    return ResultRecord(status=status, diagnostics=diagnostics, **record)


# -- sweeps ------------------------------------------------------------------

_SWEEP_KEYS = {f for f in ExperimentConfig.__dataclass_fields__ if f not in ("index", "output")}


def expand_sweep(table):
    """Cartesian product over list-valued keys; returns a list of configs."""
    unknown = set(table) - _SWEEP_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    if "surface" not in table:
        raise InputError("config needs a 'surface'")
    keys, values = [], []
    for k, v in table.items():
        keys.append(k)
        values.append(v if isinstance(v, list) else [v])
    out = []
    for idx, combo in enumerate(itertools.product(*values)):
        kw = dict(zip(keys, combo))
        if "sigma" in kw and isinstance(kw["sigma"], str):
            if kw["sigma"] != "default":
                raise InputError("sigma must be a number or 'default'")
            kw["sigma"] = None
        out.append(ExperimentConfig(index=idx, **kw))
    return out


def load_sweep(path):
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    table = doc.get("sweep", doc.get("experiment", doc))
    return expand_sweep(table)


def run_sweep(configs, out_dir=None):
    """Run configs in order; optionally write ``results.csv`` and per-run JSON."""
    records = [run_experiment(c) for c in configs]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rows = [r.row() for r in records]
        with open(os.path.join(out_dir, "results.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        for i, r in enumerate(records):
            with open(os.path.join(out_dir, f"run_{i:03d}.json"), "w", encoding="utf-8") as fh:
                json.dump(_clean(r.to_dict()), fh, indent=1)
    return records


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
