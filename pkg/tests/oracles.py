"""Dense reference computations written independently of the package."""

import math

import numpy as np


def dense_matrix(k, xs, ys=None):
    ys = xs if ys is None else ys
    return np.array([[k(a, b) for b in ys] for a in xs], dtype=float)


def dense_loglik(K, noise, z, F, beta):
    V = K + np.diag(noise)
    r = z - F @ beta
    sign, logdet = np.linalg.slogdet(V)
    assert sign > 0
    return -0.5 * len(z) * math.log(2 * math.pi) - 0.5 * logdet - 0.5 * r @ np.linalg.solve(V, r)


def dense_gls(K, noise, z, F):
    V = K + np.diag(noise)
    vf = np.linalg.solve(V, F)
    return np.linalg.solve(F.T @ vf, vf.T @ z)


def dense_predict(K, noise, z, F, beta, gamma, f0, k00):
    """BLUP and its MSE with plug-in beta, for rows of ``gamma``."""
    V = K + np.diag(noise)
    alpha = np.linalg.solve(V, z - F @ beta)
    zhat = f0 @ beta + gamma @ alpha
    mse = k00 - np.einsum("mn,nm->m", gamma, np.linalg.solve(V, gamma.T))
    return zhat, mse


def jackson_reference(alpha, rho, mu, delta):
    """Expected cycle time of product 1, by explicit loops."""
    D = len(alpha)
    N = len(mu)
    load = []
    for j in range(N):
        s = 0.0
        for i in range(D):
            s += alpha[i] * delta[i][j] / mu[j]
        load.append(s)
    peak = max(load)
    total = 0.0
    for j in range(N):
        total += delta[0][j] / (mu[j] * (1.0 - rho * load[j] / peak))
    return total


def jackson_forward(alpha):
    """Box coordinates from a product mix (the printed change of variables)."""
    x = []
    used = 0.0
    for i in range(len(alpha) - 1):
        x.append(math.sqrt(alpha[i] / (1.0 - used)) if i else math.sqrt(alpha[0]))
        used += alpha[i]
    return x


def spaced_points(rng, n, lo=0.0, hi=1.0, uniform=False, min_gap=0.2):
    """Sorted points in (lo, hi) whose gaps are at least ``min_gap`` times the mean gap."""
    if uniform:
        h = (hi - lo) / (n + 1)
        return lo + h * np.arange(1, n + 1)
    gaps = rng.dirichlet(np.ones(n + 1))
    gaps = min_gap / (n + 1) + (1.0 - min_gap) * gaps
    return lo + (hi - lo) * np.cumsum(gaps)[:-1]
