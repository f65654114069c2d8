import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcfsk.covariance import build_cov, eval_mcf, precision, validate_mcf
from mcfsk.errors import DomainError, InputError, ParameterError
from mcfsk.greens import (
    GreensFamily,
    ToeplitzParams,
    canonical_eta2,
    closed_precision,
    closed_precision_params,
    from_toeplitz,
    greens_mcf,
    to_toeplitz,
)

# one representative nu per row of the closed-form table
ROWS = [
    ("dirichlet", -4.0),
    ("dirichlet", 0.0),
    ("dirichlet", 6.0),
    ("cauchy", -1.5),
    ("cauchy", 0.0),
    ("cauchy", 5.0),
    ("neumann", 3.0),
]


def test_dirichlet_nu0_is_brownian_bridge():
    m = greens_mcf(GreensFamily("dir", 0.0, 1.0))
    x = np.linspace(0.05, 0.95, 7)
    np.testing.assert_allclose(m.p(x), x)
    np.testing.assert_allclose(m.q(x), 1 - x)


def test_dirichlet_positive_nu_factors():
    nu, eta2 = 2.5, 1.7
    g = math.sqrt(nu)
    m = greens_mcf(GreensFamily("dir", nu, eta2))
    x = np.linspace(0.1, 0.9, 5)
    np.testing.assert_allclose(m.p(x), eta2 * np.sinh(g * x))
    np.testing.assert_allclose(m.q(x), np.sinh(g * (1 - x)))


def test_neumann_midpoint():
    nu, eta2 = 4.0, 0.3
    m = greens_mcf(GreensFamily("neumann", nu, eta2))
    assert eval_mcf(m, 0.5, 0.5) == pytest.approx(eta2 * math.cosh(1.0) ** 2, rel=1e-14)


@pytest.mark.parametrize(
    "boundary,nu",
    [("dir", -math.pi**2), ("dir", -11.0), ("cauchy", -math.pi**2 / 4), ("neumann", 0.0),
     ("neumann", -1.0)],
)
def test_admissible_range(boundary, nu):
    with pytest.raises(ParameterError):
        GreensFamily(boundary, nu)


def test_unknown_boundary_and_amplitude():
    with pytest.raises(ParameterError):
        GreensFamily("robin", 1.0)
    with pytest.raises(ParameterError):
        GreensFamily("dir", 1.0, eta2=0.0)


def test_closed_params_table_rows():
    x1, xn, n = 0.1, 0.8, 8
    h = (xn - x1) / (n - 1)
    a, b, c, d = closed_precision_params(GreensFamily("dir", 0.0), x1, xn, n)
    assert (a, b, c, d) == pytest.approx((1 / h, 1 + h / x1, 2.0, 1 + h / (1 - xn)))

    nu = 3.0
    g = math.sqrt(nu)
    a, _, c, _ = closed_precision_params(GreensFamily("dir", nu), x1, xn, n)
    assert a == pytest.approx(1 / (math.sinh(g) * math.sinh(g * h)))
    assert c == pytest.approx(2 * math.cosh(g * h))

    assert closed_precision_params(GreensFamily("cauchy", 0.0), x1, xn, n)[3] == 1.0


def test_cauchy_a_equals_reciprocal_wronskian():
    # the constant scale is 1 / (p_(i+1) q_i - p_i q_(i+1)) of the raw factors
    for nu in (-2.0, 3.0):
        fam = GreensFamily("cauchy", nu, 1.0)
        m = greens_mcf(fam)
        x = np.linspace(0.1, 0.7, 4)
        w = m.p(x[1]) * m.q(x[0]) - m.p(x[0]) * m.q(x[1])
        a = closed_precision_params(fam, x[0], x[-1], 4)[0]
        assert a == pytest.approx(1 / w, rel=1e-12)


def test_closed_params_domain():
    with pytest.raises(DomainError):
        closed_precision_params(GreensFamily("dir", 0.0), 0.0, 0.5, 5)
    with pytest.raises(InputError):
        closed_precision_params(GreensFamily("dir", 0.0), 0.1, 0.5, 2)


def test_toeplitz_examples():
    tp = to_toeplitz(1.0, 0.0, 9)
    assert tp.phi == pytest.approx(10.0) and tp.c == 2.0
    assert from_toeplitz(ToeplitzParams(10.0, 2.0, 9)) == pytest.approx((1.0, 0.0))
    tp = to_toeplitz(1.0, 4.0, 9)
    assert tp.c == pytest.approx(2 * math.cosh(2.0 / 10)) and tp.c > 2
    eta2, nu = from_toeplitz(to_toeplitz(3.0, 0.01, 9))
    assert eta2 == pytest.approx(3.0, rel=1e-12) and nu == pytest.approx(0.01, rel=1e-12)
    _, nu = from_toeplitz(ToeplitzParams.from_excess(1.0, 1e-14, 9))
    assert abs(nu) < 1e-6
    with pytest.raises(ParameterError):
        to_toeplitz(1.0, -math.pi**2, 9)
    with pytest.raises(ParameterError):
        from_toeplitz(ToeplitzParams(1.0, 2 * math.cos(math.pi / 10) - 1e-9, 9))


def test_toeplitz_form_on_unit_lattice():
    # on x_i = i/(n+1) the Dirichlet precision is phi tridiag(-1; c)
    n = 12
    for nu in (-5.0, 0.0, 7.0):
        fam = GreensFamily("dir", nu, 2.0)
        x = np.arange(1, n + 1) / (n + 1)
        a, b, c, d = closed_precision_params(fam, x[0], x[-1], n)
        assert b == pytest.approx(c, rel=1e-12) and d == pytest.approx(c, rel=1e-12)
        tp = to_toeplitz(2.0, nu, n)
        P = precision(greens_mcf(fam), x)
        np.testing.assert_allclose(P.diag, tp.phi * tp.c, rtol=1e-10)
        np.testing.assert_allclose(P.offdiag, -tp.phi, rtol=1e-10)


def test_canonical_amplitude_continuity():
    x = np.linspace(0.02, 0.98, 9)
    X, Y = np.meshgrid(x, x)
    for boundary in ("dir", "cauchy"):
        ref = eval_mcf(greens_mcf(GreensFamily.with_scale(boundary, 0.0)), X, Y)
        for nu in (1e-8, -1e-8):
            got = eval_mcf(greens_mcf(GreensFamily.with_scale(boundary, nu)), X, Y)
            np.testing.assert_allclose(got, ref, atol=1e-6)
    assert canonical_eta2("dir", 0.0) == 1.0


@st.composite
def closed_cases(draw):
    boundary, nu0 = draw(st.sampled_from(ROWS))
    if nu0 < 0:
        nu = nu0 * draw(st.floats(0.1, 1.5))
    elif nu0 > 0:
        nu = nu0 * draw(st.floats(0.05, 8.0))
    else:
        nu = 0.0
    if boundary == "cauchy" and nu <= -math.pi**2 / 4:
        nu = -2.0
    n = draw(st.integers(3, 100))
    x1 = draw(st.floats(0.005, 0.3))
    xn = draw(st.floats(0.7, 0.995))
    eta2 = draw(st.floats(0.1, 10.0))
    return GreensFamily(boundary, nu, eta2), x1, xn, n


@given(closed_cases())
def test_closed_form_matches_general_precision(case):
    fam, x1, xn, n = case
    pts = np.linspace(x1, xn, n)
    general = precision(greens_mcf(fam), pts)
    closed = closed_precision(fam, x1, xn, n)
    np.testing.assert_allclose(closed.diag, general.diag, rtol=1e-10)
    np.testing.assert_allclose(closed.offdiag, general.offdiag, rtol=1e-10)
    assert closed.logdet_cov == pytest.approx(general.logdet_cov, rel=1e-10, abs=1e-10)


@given(
    st.sampled_from(["dir", "cauchy", "neumann"]),
    st.floats(0.0, 1.0),
    st.floats(0.1, 5.0),
)
def test_greens_mcf_is_valid(boundary, u, eta2):
    lower = {"dir": -math.pi**2, "cauchy": -math.pi**2 / 4, "neumann": 0.0}[boundary]
    nu = lower + (1e-3 + u) * (200.0 - lower) if boundary != "neumann" else 1e-3 + 200 * u
    m = greens_mcf(GreensFamily(boundary, nu, eta2))
    assert validate_mcf(m, np.linspace(0.01, 0.99, 50)).passed


@given(st.floats(-9.8, 500.0), st.floats(0.01, 100.0), st.integers(1, 2000))
def test_toeplitz_roundtrip(nu, eta2, n):
    tp = to_toeplitz(eta2, nu, n)
    e2, nu2 = from_toeplitz(tp)
    assert e2 == pytest.approx(eta2, rel=1e-10)
    assert nu2 == pytest.approx(nu, rel=1e-9, abs=1e-12)
    assert (tp.c_excess > 0) == (nu > 0) and (tp.c_excess < 0) == (nu < 0)


def test_closed_form_logdet_matches_dense():
    for boundary, nu in ROWS:
        fam = GreensFamily(boundary, nu, 1.3)
        pts = np.linspace(0.1, 0.9, 9)
        cp = closed_precision(fam, 0.1, 0.9, 9)
        _, ld = np.linalg.slogdet(build_cov(greens_mcf(fam), pts).entries)
        assert cp.logdet_cov == pytest.approx(ld, rel=1e-10)
