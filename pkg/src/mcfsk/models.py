"""Parametric covariance models used by the fitters.

A model maps an unconstrained-ish optimizer vector ``theta`` (with box
bounds) to a concrete covariance on a design, plus a dictionary of
user-facing hyperparameters.

:class:`SeparableModel` is a product of per-axis MCFs, each defined on the
unit interval and mapped affinely onto the axis box ``(lo, hi)``.  The
per-axis kinds are the Green's families ("dir", "cauchy", "neumann") and
the exponential / Ornstein-Uhlenbeck kernel ("exp").  One overall scale
``s`` multiplies the product; Green's factors carry their canonical
amplitude, so ``s`` is on the scale of the process variance.

:class:`SEModel` is the squared-exponential baseline
``eta2 exp(-sum theta_j (x_j - y_j)^2)`` on the dense path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import Mcf1d, exponential, transform_mcf
from .errors import InputError, ParameterError
from .greens import GreensFamily, NU_LOWER, greens_mcf, normalize_boundary
from .lattice import SeparableMcf, kron_precision, sep_build_cov, sep_cross_cov

__all__ = [
    "MCF_KINDS",
    "NU_UPPER",
    "THETA_BOUNDS",
    "SCALE_SPAN",
    "SeparableModel",
    "SEModel",
    "parse_family",
    "default_boxes",
    "make_model",
    "model_from_spec",
]

MCF_KINDS = ("dirichlet", "cauchy", "neumann", "exp")
NU_UPPER = 1e4
NU_MARGIN = 1e-6
# exp decay rate on the unit box; e^(700) is near the float limit
THETA_BOUNDS = (1e-6, 6e2)
SE_THETA_BOUNDS = (1e-6, 1e6)
# scale bounds are var(z) * 10^(+-SCALE_SPAN)
SCALE_SPAN = 6.0
SE_MAX_N = 5000


def _kind(name):
    name = str(name).strip().lower()
    if name in ("exp", "ou", "exponential"):
        return "exp"
    return normalize_boundary(name)


def parse_family(spec, dim):
    """Parse a family string into per-axis kinds or ``"se"``.

    ``"dir"`` applies one kind to every axis; ``"dir,exp"`` gives one per
    axis; ``"se"`` selects the squared-exponential baseline.
    """
    spec = str(spec).strip().lower()
    if spec == "se":
        return "se"
    parts = [p for p in spec.split(",") if p.strip()]
    if len(parts) == 1:
        parts = parts * dim
    if len(parts) != dim:
        raise InputError(f"family spec {spec!r} has {len(parts)} entries for {dim} axes")
    return tuple(_kind(p) for p in parts)


def default_boxes(axes):
    """Box ``(x_1 - h, x_n + h)`` per axis, with ``h`` the mean spacing.

    On an equispaced axis this maps the points to ``i / (n + 1)``.
    """
    boxes = []
    for ax in axes:
        ax = np.asarray(ax, dtype=float)
        if ax.size == 1:
            h = max(abs(ax[0]), 1.0)
        else:
            h = (ax[-1] - ax[0]) / (ax.size - 1)
        boxes.append((float(ax[0] - h), float(ax[-1] + h)))
    return tuple(boxes)


def _box_map(mcf, lo, hi):
    w = hi - lo
    return transform_mcf(mcf, lambda x: (np.asarray(x, float) - lo) / w, lambda u: lo + u * w)


def _nu_bounds(kind):
    if kind == "neumann":
        return (math.log(1e-6), math.log(NU_UPPER))
    return (math.asinh(NU_LOWER[kind] + NU_MARGIN), math.asinh(NU_UPPER))


@dataclass(frozen=True)
class SeparableModel:
    """Product of per-axis MCFs on boxes, with one overall scale.

    Optimizer coordinates: ``log s`` then, per axis, ``asinh(nu)`` for
    Dirichlet/Cauchy, ``log nu`` for Neumann and ``log theta`` for "exp"
    (``theta`` in unit-box coordinates).
    """

    kinds: tuple
    boxes: tuple

    def __post_init__(self):
        kinds = tuple(_kind(k) for k in self.kinds)
        boxes = tuple((float(lo), float(hi)) for lo, hi in self.boxes)
        if len(kinds) != len(boxes):
            raise InputError("one box per axis is required")
        for lo, hi in boxes:
            if not lo < hi:
                raise InputError(f"invalid box ({lo}, {hi})")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "boxes", boxes)

    name = "mcf"
    dense = False

    @property
    def dim(self):
        return len(self.kinds)

    @property
    def n_params(self):
        return 1 + self.dim

    def param_names(self):
        out = ["scale"]
        for j, k in enumerate(self.kinds):
            out.append(f"theta_{j + 1}" if k == "exp" else f"nu_{j + 1}")
        return out

    def bounds(self, zvar=1.0):
        ls = math.log(max(zvar, 1e-300))
        span = SCALE_SPAN * math.log(10.0)
        out = [(ls - span, ls + span)]
        for k in self.kinds:
            if k == "exp":
                out.append((math.log(THETA_BOUNDS[0]), math.log(THETA_BOUNDS[1])))
            else:
                out.append(_nu_bounds(k))
        return out

    def start_box(self, zvar=1.0):
        """Sub-box of :meth:`bounds` from which multistart points are drawn."""
        ls = math.log(max(zvar, 1e-300))
        out = [(ls - 2.0, ls + 2.0)]
        for k in self.kinds:
            if k == "exp":
                out.append((math.log(0.1), math.log(50.0)))
            elif k == "neumann":
                out.append((math.log(0.1), math.log(100.0)))
            else:
                lo = math.asinh(NU_LOWER[k] * 0.8)
                out.append((lo, math.asinh(200.0)))
        return out

    def initial(self, zvar=1.0):
        # nu = 0 (or nu = theta = 1 on log-scaled axes)
        return np.array([math.log(max(zvar, 1e-300))] + [0.0] * self.dim)

    # -- coordinate maps ---------------------------------------------------

    def unpack(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise InputError(f"expected {self.n_params} parameters, got {theta.shape}")
        s = math.exp(theta[0])
        axes = []
        for k, t in zip(self.kinds, theta[1:]):
            axes.append(math.exp(t) if k in ("exp", "neumann") else math.sinh(t))
        return s, axes

    def pack(self, scale, axis_params):
        out = [math.log(scale)]
        for k, v in zip(self.kinds, axis_params):
            if k in ("exp", "neumann"):
                out.append(math.log(v))
            else:
                out.append(math.asinh(v))
        return np.array(out)

    def factor_families(self, theta):
        """Per-axis unit-interval families; the scale sits on the first."""
        s, axes = self.unpack(theta)
        out = []
        for j, (k, v) in enumerate(zip(self.kinds, axes)):
            amp = s if j == 0 else 1.0
            if k == "exp":
                out.append(("exp", v, amp))
            else:
                out.append(GreensFamily.with_scale(k, v, amp))
        return out

    def build(self, theta) -> SeparableMcf:
        factors = []
        for fam, (lo, hi) in zip(self.factor_families(theta), self.boxes):
            if isinstance(fam, GreensFamily):
                unit = greens_mcf(fam)
            else:
                _, th, amp = fam
                unit = _centered_exponential(amp, th)
            factors.append(_box_map(unit, lo, hi))
        return SeparableMcf(tuple(factors))

    def user_params(self, theta):
        """Hyperparameters in user coordinates.

        ``eta2`` is the amplitude multiplying the raw product of the per-axis
        ``p q`` factors; ``theta_j`` of an "exp" axis is per unit of the
        axis coordinate.
        """
        s, axes = self.unpack(theta)
        eta2 = s
        out = {"scale": s}
        for j, (k, v, fam) in enumerate(zip(self.kinds, axes, self.factor_families(theta))):
            lo, hi = self.boxes[j]
            if k == "exp":
                out[f"theta_{j + 1}"] = v / (hi - lo)
            else:
                out[f"nu_{j + 1}"] = fam.nu
                eta2 *= fam.eta2 / (s if j == 0 else 1.0)
        out["eta2"] = eta2
        return out

    # -- dense / structured pieces -----------------------------------------

    def precision(self, theta, design):
        return kron_precision(self.build(theta), design)

    def cross_cov(self, theta, design, x0):
        """``(m, n)`` cross-covariance between points ``x0`` and the design."""
        parts = sep_cross_cov(self.build(theta), design, x0)
        out = parts[0]
        for p in parts[1:]:
            out = np.einsum("ma,mb->mab", out, p).reshape(out.shape[0], -1)
        return out

    def prior_var(self, theta, x0):
        smcf = self.build(theta)
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        out = np.ones(x0.shape[0])
        for j, f in enumerate(smcf.factors):
            out *= f(x0[:, j], x0[:, j])
        return out

    def dense_cov(self, theta, design):
        return sep_build_cov(self.build(theta), design)

    def spec(self):
        return {"type": "separable", "kinds": list(self.kinds), "boxes": [list(b) for b in self.boxes]}


def _centered_exponential(amp, theta):
    # p = e^(theta (u - 1/2)) keeps the factors bounded on the unit box
    base = exponential(amp, theta)
    return Mcf1d(
        p=lambda u: base.p(np.asarray(u, float) - 0.5),
        q=lambda u: base.q(np.asarray(u, float) - 0.5),
        lower=0.0,
        upper=1.0,
        label=f"exp(theta={theta:.6g})",
    )


@dataclass(frozen=True)
class SEModel:
    """Squared-exponential kernel on the dense path.

    Optimizer coordinates: ``log eta2`` and ``log theta_j`` with ``theta_j``
    per unit of the box-normalized coordinate.
    """

    boxes: tuple

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple((float(a), float(b)) for a, b in self.boxes))

    name = "se"
    dense = True
    kinds = ("se",)

    @property
    def dim(self):
        return len(self.boxes)

    @property
    def n_params(self):
        return 1 + self.dim

    def param_names(self):
        return ["eta2"] + [f"theta_{j + 1}" for j in range(self.dim)]

    def bounds(self, zvar=1.0):
        ls = math.log(max(zvar, 1e-300))
        span = SCALE_SPAN * math.log(10.0)
        return [(ls - span, ls + span)] + [
            (math.log(SE_THETA_BOUNDS[0]), math.log(SE_THETA_BOUNDS[1]))
        ] * self.dim

    def start_box(self, zvar=1.0):
        ls = math.log(max(zvar, 1e-300))
        return [(ls - 2.0, ls + 2.0)] + [(math.log(0.5), math.log(200.0))] * self.dim

    def initial(self, zvar=1.0):
        return np.array([math.log(max(zvar, 1e-300))] + [math.log(10.0)] * self.dim)

    def _unit(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.array([b[0] for b in self.boxes])
        w = np.array([b[1] - b[0] for b in self.boxes])
        return (x - lo) / w

    def _kernel(self, theta, a, b):
        eta2 = math.exp(theta[0])
        th = np.exp(np.asarray(theta[1:]))
        ua, ub = self._unit(a), self._unit(b)
        d2 = np.zeros((ua.shape[0], ub.shape[0]))
        for j in range(self.dim):
            d2 += th[j] * (ua[:, j][:, None] - ub[:, j][None, :]) ** 2
        return eta2 * np.exp(-d2)

    def dense_cov(self, theta, design):
        pts = design.points()
        if pts.shape[0] > SE_MAX_N:
            raise InputError(f"dense SE path refuses n = {pts.shape[0]} > {SE_MAX_N}")
        return self._kernel(theta, pts, pts)

    def cross_cov(self, theta, design, x0):
        return self._kernel(theta, np.atleast_2d(x0), design.points())

    def prior_var(self, theta, x0):
        return np.full(np.atleast_2d(x0).shape[0], math.exp(theta[0]))

    def user_params(self, theta):
        out = {"eta2": math.exp(theta[0])}
        for j, (lo, hi) in enumerate(self.boxes):
            out[f"theta_{j + 1}"] = math.exp(theta[1 + j]) / (hi - lo) ** 2
        return out

    def spec(self):
        return {"type": "se", "boxes": [list(b) for b in self.boxes]}


def model_from_spec(spec):
    if spec["type"] == "se":
        return SEModel(tuple(tuple(b) for b in spec["boxes"]))
    if spec["type"] == "separable":
        return SeparableModel(tuple(spec["kinds"]), tuple(tuple(b) for b in spec["boxes"]))
    raise InputError(f"unknown model type {spec.get('type')!r}")


def make_model(family, axes, boxes=None):
    """Model for a family string (see :func:`parse_family`) on given axes."""
    boxes = tuple(boxes) if boxes is not None else default_boxes(axes)
    kinds = parse_family(family, len(axes)) if isinstance(family, str) else tuple(family)
    if kinds == "se":
        return SEModel(boxes)
    for k in kinds:
        if k not in MCF_KINDS:
            raise ParameterError(f"unknown covariance kind {k!r}")
    return SeparableModel(kinds, boxes)
