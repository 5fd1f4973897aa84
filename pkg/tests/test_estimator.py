import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointmeas import montecarlo as mc
from jointmeas.bloch import Z_HAT
from jointmeas.errors import DomainError, IllConditionedRatioError, UndefinedEstimateError
from jointmeas.estimator import (
    EstimateResult,
    bootstrap_joint,
    delta_product,
    estimate_joint,
    expval_from_counts,
    joint_expectations,
    joint_variance,
    sharpness_estimates,
)
from jointmeas.povm import synthesize

from .conftest import feasible_points, unit_vectors

E = EstimateResult


def test_expval_examples():
    assert expval_from_counts(75, 25).value == 0.5
    assert expval_from_counts(50, 50).value == 0.0
    assert expval_from_counts(75, 25).std_err == pytest.approx(2 * math.sqrt(0.75 * 0.25 / 100), rel=1e-15)
    assert expval_from_counts(75, 25).std_err == pytest.approx(0.0866, abs=1e-4)
    assert expval_from_counts(10, 0) == E(1.0, 0.0)


def test_expval_errors():
    with pytest.raises(UndefinedEstimateError):
        expval_from_counts(0, 0)
    with pytest.raises(DomainError):
        expval_from_counts(-1, 3)


def test_expval_std_err_matches_binomial_simulation():
    rng = np.random.default_rng(0)
    n, q = 400, 0.8
    plus = rng.binomial(n, q, size=20000)
    vals = (2 * plus - n) / n
    assert np.std(vals) == pytest.approx(expval_from_counts(320, 80).std_err, rel=0.03)


@pytest.mark.parametrize(
    "c, d, p, expected",
    [(1.0, 1.0, 0.5, (1.0, 0.0)), (1.0, -1.0, 0.5, (0.0, 1.0)), (0.9, -0.5, 0.7, (0.48, 0.78))],
)
def test_joint_expectation_examples(c, d, p, expected):
    a, b = joint_expectations(E(c), E(d), p)
    assert (a.value, b.value) == pytest.approx(expected, abs=1e-15)


def test_joint_expectation_errors_and_relabel():
    a, b = joint_expectations(E(0.9, 0.01), E(-0.5, 0.02), 0.7)
    assert a.std_err == pytest.approx(math.hypot(0.007, 0.006))
    assert b.std_err == a.std_err
    _, b2 = joint_expectations(E(0.9), E(-0.5), 0.7, relabeled=True)
    assert b2.value == pytest.approx(-0.78)
    with pytest.raises(DomainError):
        joint_expectations(E(1.2), E(0.0), 0.7)


def test_sharpness_examples():
    alpha, _ = sharpness_estimates(E(0.4), E(0.5), E(1.0), E(1.0))
    assert alpha.value == pytest.approx(0.4)
    c2 = math.cos(math.radians(26))
    _, beta = sharpness_estimates(E(0.4), E(0.93 * c2), E(1.0), E(c2))
    assert beta.value == pytest.approx(0.93, abs=1e-15)


def test_sharpness_ratio_propagation():
    alpha, _ = sharpness_estimates(E(0.40, 0.01), E(0.5), E(0.98, 0.005), E(1.0))
    assert alpha.value == pytest.approx(0.4082, abs=1e-4)
    expected = (0.40 / 0.98) * math.sqrt((0.01 / 0.40) ** 2 + (0.005 / 0.98) ** 2)
    assert alpha.std_err == pytest.approx(expected, rel=1e-12)
    assert alpha.std_err == pytest.approx(0.0104, abs=1e-4)


def test_sharpness_guard():
    with pytest.raises(IllConditionedRatioError):
        sharpness_estimates(E(0.01), E(0.5), E(0.04), E(1.0))
    with pytest.raises(IllConditionedRatioError):
        sharpness_estimates(E(0.5), E(0.01), E(1.0), E(-0.049))


def test_joint_variance_examples():
    assert joint_variance(1.0, 0.3) == pytest.approx(1 - 0.09)
    assert joint_variance(math.sqrt(0.5), 1.0) == pytest.approx(1.0, abs=1e-15)
    assert joint_variance(1.0, 1.0) == 0.0
    assert joint_variance(0.0, 0.5) == math.inf
    assert joint_variance(0.5, 0.5, scaled=False) == pytest.approx(1 - 0.0625)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(-1.0, 1.0))
def test_joint_variance_identity(alpha, ev):
    assert joint_variance(alpha, ev) * alpha**2 == pytest.approx(1 - alpha**2 * ev**2, abs=1e-12)


def test_delta_product_examples():
    r2 = math.sqrt(0.5)
    assert delta_product(E(r2), E(r2)) == E(pytest.approx(1.0, abs=1e-15), 0.0)
    assert delta_product(E(1.0), E(0.6)).value == 0.0
    got = delta_product(E(0.95, 0.01), E(0.90, 0.01))
    assert got.value == pytest.approx((0.0975 * 0.19) / (0.9025 * 0.81), rel=1e-14)
    assert got.value == pytest.approx(0.025342, abs=1e-6)
    assert delta_product(E(0.0), E(0.5)).value == math.inf


def test_delta_product_error_matches_finite_differences():
    a, b, sa, sb = 0.95, 0.90, 0.01, 0.01
    h = 1e-6

    def f(x, y):
        return (1 - x * x) * (1 - y * y) / (x * x * y * y)

    da = (f(a + h, b) - f(a - h, b)) / (2 * h)
    db = (f(a, b + h) - f(a, b - h)) / (2 * h)
    got = delta_product(E(a, sa), E(b, sb)).std_err
    assert got == pytest.approx(math.hypot(da * sa, db * sb), rel=1e-6)
    cov = 0.3 * sa * sb
    got_cov = delta_product(E(a, sa), E(b, sb), cov=cov).std_err
    assert got_cov == pytest.approx(math.sqrt((da * sa) ** 2 + (db * sb) ** 2 + 2 * da * db * cov), rel=1e-6)


def test_delta_product_monotone():
    grid = np.linspace(0.05, 1.0, 40)
    for fixed in grid:
        row = [delta_product(E(x), E(fixed)).value for x in grid]
        col = [delta_product(E(fixed), E(x)).value for x in grid]
        if fixed < 1.0:
            assert all(u > v for u, v in zip(row, row[1:]))
            assert all(u > v for u, v in zip(col, col[1:]))


@settings(max_examples=100, deadline=None)
@given(feasible_points(), st.floats(-math.pi, math.pi), unit_vectors())
def test_exact_probabilities_recover_design(pt, phi, state):
    p, theta = pt
    design = synthesize(p, theta, phi)
    sa = abs(state @ design.a.as_array())
    sb = abs(state @ design.b.as_array())
    if min(sa, sb) < 0.05:
        return
    est = estimate_joint(
        mc.exact_joint_counts(state, design, 1.0),
        mc.exact_sharp_counts(state, design.a, 1.0),
        mc.exact_sharp_counts(state, design.b, 1.0),
        design.p,
    )
    assert est.alpha_exp.value == pytest.approx(design.alpha, abs=1e-12)
    assert est.beta_exp.value == pytest.approx(design.beta, abs=1e-12)


def _chain_values(x, p):
    """Reference chain from the four base expectations, written out directly."""
    c, d, sa, sb = x
    A = p * c + (1 - p) * d
    B = p * c - (1 - p) * d
    al, be = A / sa, B / sb
    vj = ((1 - A * A) / al**2) * ((1 - B * B) / be**2)
    return np.array(
        [al, be, (1 - al**2) * (1 - be**2) / (al**2 * be**2), vj, (1 - sa**2) * (1 - sb**2)]
    )


def test_estimate_joint_errors_match_numerical_jacobian():
    design = synthesize(0.67, math.radians(19), 0.7)
    state = np.array([0.3, 0.1, 0.9])
    state = state / np.linalg.norm(state)
    counts = mc.run_joint(state, design, 200_000, mc.RngSeed(1))
    sa_c = mc.run_sharp(state, design.a, 200_000, mc.RngSeed(2))
    sb_c = mc.run_sharp(state, design.b, 200_000, mc.RngSeed(3))
    est = estimate_joint(counts, sa_c, sb_c, design.p)

    base = [est.sharp_c, est.sharp_d, est.sharp_a, est.sharp_b]
    x0 = np.array([e.value for e in base])
    sig = np.array([e.std_err for e in base])
    h = 1e-7
    jac = np.empty((5, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        jac[:, k] = (_chain_values(x0 + e, design.p) - _chain_values(x0 - e, design.p)) / (2 * h)
    expected = np.sqrt((jac**2) @ sig**2)
    got = [est.alpha_exp, est.beta_exp, est.delta_product, est.var_product_joint, est.var_product_sharp]
    np.testing.assert_allclose([g.value for g in got], _chain_values(x0, design.p), rtol=1e-12)
    np.testing.assert_allclose([g.std_err for g in got], expected, rtol=1e-5)


def test_propagated_error_matches_bootstrap():
    design = synthesize(0.67, math.radians(13), -2.8)
    n = 1_500_000
    counts = mc.run_joint(Z_HAT, design, n, mc.RngSeed(5, (0,)))
    sa = mc.run_sharp(Z_HAT, design.a, n, mc.RngSeed(5, (1,)))
    sb = mc.run_sharp(Z_HAT, design.b, n, mc.RngSeed(5, (2,)))
    est = estimate_joint(counts, sa, sb, design.p)
    boot = bootstrap_joint(counts, sa, sb, design.p, 1000, np.random.default_rng(6))
    for name in ("alpha_exp", "beta_exp", "delta_product", "A_j_bar", "B_j_bar"):
        assert getattr(est, name).std_err == pytest.approx(boot[name], rel=0.15), name


def test_estimate_joint_guard_and_p_est():
    design = synthesize(0.67, math.radians(13))
    counts = mc.CountRecord(600, 70, 30, 300)
    with pytest.raises(IllConditionedRatioError):
        estimate_joint(counts, mc.SharpCountRecord(100, 100), mc.SharpCountRecord(90, 10), design.p)
    est = estimate_joint(counts, mc.SharpCountRecord(100, 0), mc.SharpCountRecord(90, 10), design.p)
    assert est.p_est.value == pytest.approx(0.67)
    assert est.p_est.std_err == pytest.approx(math.sqrt(0.67 * 0.33 / 1000))
    assert est.var_product_sharp.value == 0.0
