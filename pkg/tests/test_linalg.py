import math
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcfsk.covariance import (
    TridiagPrecision,
    brownian_bridge,
    brownian_motion,
    build_cov,
    ornstein_uhlenbeck,
    precision,
)
from mcfsk.errors import (
    ConsistencyError,
    InputError,
    NotPositiveDefiniteError,
)
from mcfsk.greens import GreensFamily, ToeplitzParams, greens_mcf
from mcfsk.lattice import SeparableMcf, build_lattice, kron_precision, sep_build_cov
from mcfsk.linalg import (
    DenseSolver,
    NoiseDiag,
    assemble_woodbury,
    condition_number,
    noisy_condition_number,
    sine_matrix,
    sine_transform_apply,
    sine_transform_nd,
    toeplitz_eig,
    tridiag_solve,
)

from oracles import spaced_points


def _toeplitz_dense(phi, c, n):
    return phi * (c * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))


# -- tridiagonal solves -------------------------------------------------------


def test_tridiag_solve_examples():
    rhs = np.array([0.3, -1.0, 2.0, 5.0])
    np.testing.assert_allclose(tridiag_solve(np.ones(4), rhs, np.zeros(3)), rhs)
    x = tridiag_solve(np.full(3, 2.0), [1.0, 0.0, 0.0], np.full(2, -1.0))
    np.testing.assert_allclose(x, [0.75, 0.5, 0.25], rtol=1e-14)


def test_tridiag_solve_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        tridiag_solve(np.array([1.0, 1.0]), [1.0, 1.0], np.array([-2.0]))
    with pytest.raises(InputError):
        tridiag_solve(np.ones(3), np.ones(2), np.zeros(2))


@given(st.integers(1, 300), st.integers(0, 2**31 - 1))
def test_tridiag_solve_random(n, seed):
    rng = np.random.default_rng(seed)
    off = rng.uniform(-1, 1, n - 1)
    diag = rng.uniform(0.1, 1.0, n) + np.abs(np.r_[off, 0]) + np.abs(np.r_[0, off])
    T = TridiagPrecision(diag, off, 0.0)
    rhs = rng.normal(size=n)
    x = tridiag_solve(T, rhs)
    A = T.to_dense()
    assert np.linalg.norm(A @ x - rhs) <= 1e-12 * np.linalg.norm(rhs) * max(1, np.abs(A).max())
    np.testing.assert_allclose(x, np.linalg.solve(A, rhs), rtol=1e-10, atol=1e-10)


# -- noise --------------------------------------------------------------------


def test_noise_diag():
    nd = NoiseDiag.constant(0.25, 4)
    assert nd.all_equal and nd.delta == 0.25 and not nd.is_zero
    assert NoiseDiag(np.zeros(3)).is_zero
    het = NoiseDiag([0.1, 0.2])
    assert not het.all_equal and math.isnan(het.delta)
    with pytest.raises(InputError):
        NoiseDiag([0.0, 1.0])
    with pytest.raises(InputError):
        NoiseDiag([-1.0])


# -- Woodbury -----------------------------------------------------------------


def test_woodbury_scalar_minus_sign():
    kinv = TridiagPrecision(np.array([1.0]), np.zeros(0), 0.0)
    s = assemble_woodbury(kinv, NoiseDiag([1.0]))
    assert s.apply(np.array([1.0]))[0] == 0.5
    assert s.logdet == pytest.approx(math.log(2.0), abs=1e-15)


def test_woodbury_zero_noise_is_precision():
    pts = np.linspace(0.1, 0.9, 7)
    kinv = precision(brownian_bridge(), pts)
    s = assemble_woodbury(kinv, NoiseDiag(np.zeros(7)))
    v = np.arange(7.0)
    np.testing.assert_array_equal(s.apply(v), kinv.matvec(v))
    assert s.logdet == kinv.logdet_cov


FAMILIES_1D = [
    (brownian_motion(), 0.1, 4.0),
    (brownian_bridge(), 0.0, 1.0),
    (ornstein_uhlenbeck(0.7, 2.0), -1.0, 1.0),
    (greens_mcf(GreensFamily("cauchy", 3.0, 0.5)), 0.0, 1.0),
    (greens_mcf(GreensFamily("dir", -6.0, 2.0)), 0.0, 1.0),
]


@st.composite
def woodbury_cases(draw, nmax=100):
    mcf, lo, hi = draw(st.sampled_from(FAMILIES_1D))
    n = draw(st.integers(1, nmax))
    rng = np.random.default_rng(draw(st.integers(0, 2**31 - 1)))
    pts = spaced_points(rng, n, lo, hi, uniform=draw(st.booleans()))
    K = build_cov(mcf, pts).entries
    scale = np.mean(np.diag(K))
    if draw(st.booleans()):
        noise = NoiseDiag.constant(scale * 10 ** rng.uniform(-3, 0), n)
    else:
        noise = NoiseDiag(scale * 10 ** rng.uniform(-3, 0, n))
    return precision(mcf, pts), K, noise, rng


@given(woodbury_cases())
def test_woodbury_matches_dense(case):
    kinv, K, noise, rng = case
    V = K + np.diag(noise.values)
    s = assemble_woodbury(kinv, noise)
    v = rng.normal(size=kinv.n)
    ref = np.linalg.solve(V, v)
    assert np.linalg.norm(s.apply(v) - ref) <= 1e-9 * np.linalg.norm(ref)


@given(woodbury_cases(nmax=50))
def test_woodbury_logdet_matches_dense(case):
    kinv, K, noise, _ = case
    sign, ld = np.linalg.slogdet(K + np.diag(noise.values))
    assert sign == 1
    assert math.exp(assemble_woodbury(kinv, noise).logdet - ld) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("inner", ["splu", "cg"])
def test_woodbury_kronecker_inner_solvers(inner):
    rng = np.random.default_rng(7)
    s = SeparableMcf((brownian_bridge(), ornstein_uhlenbeck(1.0, 1.0)))
    lat = build_lattice([np.linspace(0.05, 0.95, 12), np.linspace(-1.0, 1.0, 9)])
    kinv = kron_precision(s, lat)
    K = sep_build_cov(s, lat)
    noise = NoiseDiag(rng.uniform(0.01, 0.1, lat.n))
    V = K + np.diag(noise.values)
    w = assemble_woodbury(kinv, noise, inner=inner)
    v = rng.normal(size=lat.n)
    ref = np.linalg.solve(V, v)
    tol = 1e-12 if inner == "splu" else 1e-8
    assert np.linalg.norm(w.apply(v) - ref) <= tol * np.linalg.norm(ref)
    assert w.logdet == pytest.approx(np.linalg.slogdet(V)[1], rel=1e-10)


def test_woodbury_length_mismatch():
    kinv = precision(brownian_bridge(), [0.2, 0.5, 0.8])
    with pytest.raises(InputError):
        assemble_woodbury(kinv, NoiseDiag.constant(1.0, 4))
    with pytest.raises(InputError):
        assemble_woodbury(kinv, NoiseDiag.constant(1.0, 3)).apply(np.ones(2))


def test_dense_solver():
    K = build_cov(brownian_motion(), [1.0, 2.0, 3.0]).entries
    noise = NoiseDiag.constant(0.5, 3)
    ds = DenseSolver(K, noise)
    V = K + 0.5 * np.eye(3)
    np.testing.assert_allclose(ds.apply(np.ones(3)), np.linalg.solve(V, np.ones(3)))
    assert ds.logdet == pytest.approx(np.linalg.slogdet(V)[1])
    with pytest.raises(NotPositiveDefiniteError):
        DenseSolver(-np.eye(2))


def _median_apply_time(n, reps=15):
    pts = np.arange(1, n + 1) / (n + 1)
    kinv = precision(brownian_bridge(), pts)
    s = assemble_woodbury(kinv, NoiseDiag.constant(0.01, n))
    v = np.ones(n)
    s.apply(v)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        for _ in range(20):
            s.apply(v)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def woodbury_slope():
    t3, t4 = _median_apply_time(1000), _median_apply_time(10000)
    return math.log(t4 / t3) / math.log(10.0)


def test_woodbury_complexity_slope():
    assert woodbury_slope() < 1.5


# -- Toeplitz eigenstructure --------------------------------------------------


def test_toeplitz_eig_small_examples():
    e1 = toeplitz_eig(ToeplitzParams(2.0, 3.0, 1))
    assert e1.eigenvalues[0] == pytest.approx(6.0)
    e3 = toeplitz_eig(ToeplitzParams(1.0, 2.0, 3))
    r = math.sqrt(2)
    np.testing.assert_allclose(np.sort(e3.eigenvalues), [2 - r, 2, 2 + r], rtol=1e-14)
    assert e3.eigenvalues.sum() == pytest.approx(3 * 2.0)
    # reversed labelling phi (c + 2 cos(i pi/(n+1)))
    i = np.arange(1, 4)
    np.testing.assert_allclose(e3.alt_eigenvalues(), 2 + 2 * np.cos(i * np.pi / 4), atol=1e-14)


def test_toeplitz_eig_rejects_inconsistent():
    with pytest.raises(ConsistencyError):
        toeplitz_eig(ToeplitzParams(1.0, 2.0, 50), tol=1e-30)


@pytest.mark.parametrize("n", [3, 10, 100, 500])
def test_toeplitz_eig_matches_dense(n):
    phi, c = 3.7, 2.0 + 0.05
    eig = toeplitz_eig(ToeplitzParams(phi, c, n))
    A = _toeplitz_dense(phi, c, n)
    np.testing.assert_allclose(np.sort(eig.eigenvalues), np.linalg.eigvalsh(A), rtol=0,
                               atol=1e-10 * max(1.0, phi * c))
    P = sine_matrix(n)
    res = np.linalg.norm(A @ P - P * eig.eigenvalues, axis=0)
    assert res.max() <= 1e-10 * max(1.0, phi * c)
    np.testing.assert_allclose(P @ P.T, np.eye(n), atol=1e-10)


def test_sine_matrix_n2():
    P = sine_matrix(2)
    raw = np.array([[math.sin(math.pi / 3), math.sin(2 * math.pi / 3)],
                    [math.sin(2 * math.pi / 3), math.sin(4 * math.pi / 3)]])
    np.testing.assert_allclose(P, raw * math.sqrt(2 / 3), rtol=1e-15)


@given(st.integers(1, 400), st.integers(0, 2**31 - 1))
def test_sine_transform_properties(n, seed):
    v = np.random.default_rng(seed).normal(size=n)
    direct = sine_transform_apply(n, v)
    fast = sine_transform_apply(n, v, method="fast")
    np.testing.assert_allclose(fast, direct, atol=1e-10 * np.linalg.norm(v))
    assert np.linalg.norm(direct) == pytest.approx(np.linalg.norm(v), rel=1e-12)
    np.testing.assert_allclose(sine_transform_apply(n, direct), v, atol=1e-10 * np.linalg.norm(v))


def test_sine_transform_nd_is_kronecker():
    t = np.random.default_rng(3).normal(size=(4, 5))
    ref = np.kron(sine_matrix(4), sine_matrix(5)) @ t.reshape(-1)
    np.testing.assert_allclose(sine_transform_nd(t).reshape(-1), ref, atol=1e-13)


@given(st.floats(0.01, 100.0), st.floats(-0.5, 5.0), st.integers(1, 200))
def test_eig_diagonalizes(phi, excess, n):
    tp = ToeplitzParams.from_excess(phi, excess, n)
    eig = toeplitz_eig(tp)
    A = _toeplitz_dense(phi, 2.0 + excess, n)
    P = sine_matrix(n)
    np.testing.assert_allclose(P @ A @ P, np.diag(eig.eigenvalues),
                               atol=1e-10 * phi * max(2.0 + excess, 2.0))


# -- condition numbers --------------------------------------------------------


def test_condition_examples():
    assert condition_number(np.eye(5)) == pytest.approx(1.0)
    assert condition_number(np.diag([1.0, 100.0])) == pytest.approx(100.0)
    for n in (2, 7, 40):
        t = 1 + math.cos(math.pi / (n + 1))
        expect = t / (1 - math.cos(math.pi / (n + 1)))
        T = TridiagPrecision(np.full(n, 2.0), np.full(n - 1, -1.0), 0.0)
        assert condition_number(T) == pytest.approx(expect, rel=1e-9)
        assert condition_number(T.to_dense()) == pytest.approx(expect, rel=1e-9)
    with pytest.raises(NotPositiveDefiniteError):
        condition_number(np.diag([1.0, -1.0]))
    with pytest.raises(InputError):
        condition_number(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_condition_large_dense_uses_iteration():
    n = 2100
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.geomspace(1.0, 1e4, n)
    A = (q * lam) @ q.T
    A = 0.5 * (A + A.T)
    assert condition_number(A) == pytest.approx(1e4, rel=1e-6)


def test_condition_kron_and_noise():
    s = SeparableMcf((brownian_bridge(), brownian_bridge()))
    lat = build_lattice([np.linspace(0.1, 0.9, 6), np.linspace(0.2, 0.8, 5)])
    kinv = kron_precision(s, lat)
    K = sep_build_cov(s, lat)
    assert condition_number(kinv) == pytest.approx(np.linalg.cond(K), rel=1e-8)
    for noise in (NoiseDiag.constant(0.01, 30), NoiseDiag(np.linspace(0.01, 0.05, 30))):
        c1 = noisy_condition_number(kinv, noise)
        assert c1 == pytest.approx(np.linalg.cond(K + np.diag(noise.values)), rel=1e-8)
        assert c1 < condition_number(kinv)
