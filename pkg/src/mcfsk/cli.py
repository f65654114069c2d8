"""Command-line entry point: ``mcfsk {fit,predict,bench,cond,eig}``.

Exit codes: 0 on success, 2 for input errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .errors import InputError, NumericalError
from .greens import ToeplitzParams
from .kriging import (
    Dataset,
    fit_general,
    fit_toeplitz,
    load_model,
    predict_batch,
    save_model,
    toeplitz_ready,
)
from .linalg import condition_number, noisy_condition_number, toeplitz_eig
from .models import make_model


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty CSV")
        rows = list(reader)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return [f.strip() for f in reader.fieldnames], rows


def _x_columns(fields, path):
    xs = sorted((f for f in fields if f.startswith("x") and f[1:].isdigit()),
                key=lambda f: int(f[1:]))
    if not xs or [int(f[1:]) for f in xs] != list(range(1, len(xs) + 1)):
        raise InputError(f"{path}: need coordinate columns x1..xD")
    return xs


def _floats(rows, col, path):
    try:
        return np.array([float(r[col]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: bad or missing column {col!r}: {exc}") from None


def read_dataset(path):
    """CSV with columns ``x1..xD, zbar, var, reps``; ``var`` is per-replication."""
    fields, rows = _read_csv(path)
    xs = _x_columns(fields, path)
    X = np.column_stack([_floats(rows, c, path) for c in xs])
    z = _floats(rows, "zbar", path)
    var = _floats(rows, "var", path)
    reps = _floats(rows, "reps", path) if "reps" in fields else np.ones(len(rows))
    if np.any(reps < 1) or np.any(reps != np.round(reps)):
        raise InputError(f"{path}: reps must be positive integers")
    return Dataset.from_rows(X, z, var / reps, reps.astype(int))


def read_points(path):
    fields, rows = _read_csv(path)
    xs = _x_columns(fields, path)
    return np.column_stack([_floats(rows, c, path) for c in xs])


def _cmd_fit(args):
    data = read_dataset(args.data)
    fitter = args.fitter
    if fitter == "auto":
        ok = args.family.strip().lower() in ("dir", "dirichlet") and toeplitz_ready(data) is None
        fitter = "toeplitz" if ok else "general"
    if fitter == "toeplitz":
        fitted = fit_toeplitz(data, n_starts=args.n_starts, seed=args.seed)
    else:
        model = make_model(args.family, data.design.axes)
        fitted = fit_general(data, model, n_starts=args.n_starts, seed=args.seed)
    save_model(fitted, args.out)
    print(json.dumps({"fitter": fitted.fitter, "loglik": fitted.loglik,
                      "beta": list(map(float, fitted.beta)), "params": fitted.params}))
    return 0


def _cmd_predict(args):
    fitted = load_model(args.model)
    X = read_points(args.points)
    zhat, mse = predict_batch(fitted, X)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(X.shape[1])] + ["zhat", "mse"])
        for row, z, m in zip(X, zhat, mse):
            w.writerow([repr(float(v)) for v in row] + [repr(float(z)), repr(float(m))])
    return 0


def _cmd_bench(args):
    from .bench import load_sweep, run_sweep

    records = run_sweep(load_sweep(args.config), args.out)
    for r in records:
        c = r.config
        print(f"{c['surface']} {c['family']} m={c['m']} {r.status} srmse={r.srmse:.4g}")
    return 0


def _cmd_cond(args):
    fitted = load_model(args.model)
    m, data = fitted.model, fitted.data
    if m.dense:
        K = m.dense_cov(fitted.theta, data.design)
        c0 = condition_number(K)
        c1 = c0 if data.noise.is_zero else condition_number(K + np.diag(data.noise.values))
    else:
        kinv = m.precision(fitted.theta, data.design)
        c0, c1 = condition_number(kinv), noisy_condition_number(kinv, data.noise)
    print(f"cond(Sigma_M) = {c0:.6e}")
    print(f"cond(Sigma_M + Sigma_eps) = {c1:.6e}")
    return 0


def _cmd_eig(args):
    eig = toeplitz_eig(ToeplitzParams(args.phi, args.c, args.n))
    # listed as phi (c + 2 cos(i pi / (n + 1))), i = 1..n
    for i, lam in enumerate(eig.alt_eigenvalues(), start=1):
        print(f"{i} {float(lam)!r}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mcfsk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model to a CSV dataset")
    f.add_argument("--data", required=True)
    f.add_argument("--family", default="dir",
                   help="per-axis kinds, e.g. 'dir', 'dir,exp', 'cauchy', or 'se'")
    f.add_argument("--out", required=True)
    f.add_argument("--fitter", choices=("auto", "general", "toeplitz"), default="auto")
    f.add_argument("--n-starts", type=int, default=5)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=_cmd_fit)

    q = sub.add_parser("predict", help="predict at points from a CSV")
    q.add_argument("--model", required=True)
    q.add_argument("--points", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_predict)

    b = sub.add_parser("bench", help="run a TOML experiment sweep")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_bench)

    c = sub.add_parser("cond", help="print condition numbers of a fitted model")
    c.add_argument("--model", required=True)
    c.set_defaults(func=_cmd_cond)

    e = sub.add_parser("eig", help="print eigenvalues of phi * tridiag(-1; c)")
    e.add_argument("--phi", type=float, required=True)
    e.add_argument("--c", type=float, required=True)
    e.add_argument("--n", type=int, required=True)
    e.set_defaults(func=_cmd_eig)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
