import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracmorse import (example_reaction, linear_reaction, table_reaction, truncate,
                       check_hypotheses, TruncatedReaction)
from fracmorse.errors import PreconditionError, NumericalDomainError

LAMBDAS = np.array([7.2872182, 17.3381813, 27.16876337, 37.08266528])
MU = 0.5 * LAMBDAS[0]


@pytest.fixture(scope="module")
def ex():
    return example_reaction(MU, 2, LAMBDAS)


def test_linear_inside_unit_interval(ex):
    assert ex.f(0.0, 0.5) == pytest.approx(0.5 * MU)
    assert ex.f(0.0, -0.5) == pytest.approx(-0.5 * MU)
    assert ex.F(0.0, 0.0) == 0.0


def test_continuity_and_smoothness_at_one(ex):
    lam_k = LAMBDAS[1]
    outer = lam_k + (MU - lam_k) * (0.0 + 1.0)
    assert outer == pytest.approx(MU)
    eps = 1e-9
    for t in (1.0, -1.0):
        assert ex.f(0, t + eps) == pytest.approx(ex.f(0, t - eps), abs=1e-7)
        assert ex.fprime(0, t + eps) == pytest.approx(ex.fprime(0, t - eps), abs=1e-6)
    # one-sided derivative limits agree to 1e-8
    assert abs(ex.fprime(0, 1 + 1e-12) - ex.fprime(0, 1.0)) < 1e-8


@pytest.mark.parametrize("t", [1.5, 3.0, 10.0, -2.5, 0.7])
def test_primitive_matches_quadrature(ex, t):
    pts = [s for s in (-1.0, 1.0) if min(0, t) < s < max(0, t)]
    ref, _ = quad(lambda s: ex.f(0, s), 0.0, t, points=pts or None, epsabs=1e-13, epsrel=1e-13)
    assert ex.F(0, t) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.floats(-1e4, 1e4).filter(lambda t: abs(abs(t) - 1) > 1e-3))
def test_derivative_matches_finite_difference(t):
    r = example_reaction(MU, 2, LAMBDAS)
    eps = 1e-6 * max(1.0, abs(t))
    fd = (r.f(0, t + eps) - r.f(0, t - eps)) / (2 * eps)
    assert fd == pytest.approx(r.fprime(0, t), rel=1e-6, abs=1e-6)


@given(st.floats(0.0, 1e6))
def test_example_is_odd(t):
    r = example_reaction(MU, 2, LAMBDAS)
    assert r.f(0, -t) == -r.f(0, t)
    assert r.F(0, -t) == r.F(0, t)


def test_asymptotic_slope(ex):
    t = 10.0 ** np.arange(2, 13)
    q = ex.f(0, t) / t
    assert np.all(q < LAMBDAS[1]) and np.all(np.diff(q) > 0)
    assert q[-1] == pytest.approx(LAMBDAS[1], rel=1e-5)


def test_rejects_nonpositive_mu():
    for mu in (0.0, -1.0):
        with pytest.raises(PreconditionError):
            example_reaction(mu, 2, LAMBDAS)
    with pytest.raises(PreconditionError):
        example_reaction(1.0, 5, LAMBDAS)


def test_nonfinite_values_raise(ex):
    with pytest.raises(NumericalDomainError):
        ex.f(0, np.nan)


# -- truncation ---------------------------------------------------------------

def test_truncation_rules(ex):
    fp, fm = truncate(ex, "+"), truncate(ex, "-")
    assert fp.f(0, -3.0) == 0.0
    assert fp.f(0, 2.0) == ex.f(0, 2.0)
    assert fm.F(0, -1.0) == ex.F(0, -1.0)
    assert fm.F(0, 1.0) == 0.0
    assert isinstance(truncate(ex, -1), TruncatedReaction)
    with pytest.raises(PreconditionError):
        truncate(ex, 0)


@given(st.floats(-50, 50))
def test_truncation_invariants(t):
    r = example_reaction(MU, 2, LAMBDAS)
    fp, fm = truncate(r, 1), truncate(r, -1)
    if t <= 0:
        assert fp.f(0, t) == 0.0 and fp.F(0, t) == 0.0
        assert fm.f(0, t) == r.f(0, t) and fm.F(0, t) == r.F(0, t)
    if t >= 0:
        assert fm.f(0, t) == 0.0 and fm.F(0, t) == 0.0
        assert fp.f(0, t) == r.f(0, t) and fp.F(0, t) == r.F(0, t)


def test_truncation_kinks(ex):
    assert ex.kinks == (-1.0, 1.0)
    assert truncate(ex, 1).kinks == (0.0, 1.0)
    assert truncate(ex, -1).kinks == (-1.0, 0.0)


# -- hypothesis checker -----------------------------------------------------------

def test_sublinear_example_satisfies_h2(ex):
    rep = check_hypotheses(ex, LAMBDAS, "H2", 2)
    assert rep["passed"], rep
    assert set(rep["clauses"]) == {"i_bounded", "ii_divergence", "iii_asymptotic_slope", "iv_zero"}
    # growth bound |f| <= a0 (1 + |t|)
    assert rep["clauses"]["i_bounded"]["growth_a0"] <= LAMBDAS[1]


def test_crossing_example_satisfies_h1():
    mu = 0.5 * (LAMBDAS[0] + LAMBDAS[1])
    r = example_reaction(mu, 3, LAMBDAS)
    rep = check_hypotheses(r, LAMBDAS, "H1", 3, h=1)
    assert rep["passed"], rep
    assert rep["clauses"]["iv_zero"]["strict"]


def test_divergence_proxy_increasing(ex):
    t = 10.0 ** np.arange(2, 7)
    g = ex.f(0, t) * t - 2 * ex.F(0, t)
    assert np.all(np.diff(g) > 0)


def test_linear_reaction_fails_divergence():
    rep = check_hypotheses(linear_reaction(LAMBDAS[1]), LAMBDAS, "H2", 2)
    assert not rep["clauses"]["ii_divergence"]["passed"]
    assert not rep["passed"]


def test_slope_equal_to_first_eigenvalue_fails_h2():
    r = example_reaction(LAMBDAS[0], 2, LAMBDAS)
    rep = check_hypotheses(r, LAMBDAS, "H2", 2)
    assert not rep["clauses"]["iv_zero"]["passed"]


def test_h2_needs_k_at_least_two():
    r = example_reaction(MU, 1, LAMBDAS)
    assert not check_hypotheses(r, LAMBDAS, "H2", 1)["clauses"]["iii_asymptotic_slope"]["passed"]


def test_checker_preconditions(ex):
    with pytest.raises(PreconditionError):
        check_hypotheses(ex, LAMBDAS[:2], "H2", 2)
    with pytest.raises(PreconditionError):
        check_hypotheses(ex, LAMBDAS, "H1", 2)
    with pytest.raises(PreconditionError):
        check_hypotheses(ex, LAMBDAS, "H3", 2)


# -- tabulated reactions ------------------------------------------------------------

def test_table_reaction_reproduces_linear():
    ts = np.linspace(0, 4, 9)
    r = table_reaction(ts, 3.0 * ts)
    t = np.array([-6.0, -1.3, 0.2, 2.5, 9.0])
    np.testing.assert_allclose(r.f(0, t), 3.0 * t, rtol=1e-12)
    np.testing.assert_allclose(r.F(0, t), 1.5 * t * t, rtol=1e-12)
    np.testing.assert_allclose(r.fprime(0, t), 3.0, rtol=1e-12)


def test_table_primitive_consistent():
    ts = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    r = table_reaction(ts, ts ** 2 + ts)
    for t in (0.3, 1.7, 6.0, -2.2):
        ref, _ = quad(lambda s: r.f(0, s), 0.0, t, limit=200)
        assert r.F(0, t) == pytest.approx(ref, rel=1e-9)


def test_table_validation():
    with pytest.raises(PreconditionError):
        table_reaction([0, 1], [0, 1])
    with pytest.raises(PreconditionError):
        table_reaction([0, 2, 1], [0, 1, 2])
    with pytest.raises(PreconditionError):
        table_reaction([1, 2, 3], [1, 2, 3])
