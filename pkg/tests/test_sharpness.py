"""Tests for the flatness diagnostics: ascent gap, curvature, loss slices."""

import numpy as np
import pytest

from schedsam import (
    EvaluationError,
    Objective,
    QuadraticObjective,
    TwoWellLandscape,
    hessian_top_eigen,
    loss_slice,
    sharpness_proxy,
    sharpness_report,
)

# ---------------------------------------------------------------------------
# Power iteration


def test_eigen_diagonal_quadratic():
    obj = QuadraticObjective(np.array([1.0, 5.0]))
    est = hessian_top_eigen(obj, np.zeros(2))
    assert est.converged
    assert abs(est.eigenvalue - 5.0) < 1e-4
    assert abs(abs(est.eigenvector[1]) - 1.0) < 1e-3


def test_eigen_identity_converges_immediately():
    """Every direction is an eigenvector, so the residual vanishes on the
    first round."""
    obj = QuadraticObjective(np.eye(3))
    est = hessian_top_eigen(obj, np.zeros(3))
    assert est.converged and est.iterations == 1
    assert abs(est.eigenvalue - 1.0) < 1e-9


def test_eigen_matches_dense_solver_on_random_matrices():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 20:
        base = rng.standard_normal((6, 6))
        hess = base + base.T
        eigs = np.linalg.eigvalsh(hess)
        top = eigs[np.argmax(np.abs(eigs))]
        # skip near-ties in magnitude, where power iteration stalls by design
        mags = np.sort(np.abs(eigs))
        if mags[-1] - mags[-2] < 0.3:
            continue
        est = hessian_top_eigen(QuadraticObjective(hess), np.zeros(6))
        assert abs(est.eigenvalue - top) < 1e-3 * max(1.0, abs(top))
        checked += 1


def test_eigen_finds_dominant_negative_curvature():
    obj = QuadraticObjective(np.array([2.0, -7.0]))
    est = hessian_top_eigen(obj, np.zeros(2))
    assert abs(est.eigenvalue + 7.0) < 1e-4


def test_eigen_on_two_well_centers():
    # the probe straddles the parabola-to-flank seam, whose third
    # derivative jumps, so the estimate carries an O(probe_h) bias there
    obj = TwoWellLandscape()
    sharp = hessian_top_eigen(obj, np.array([1.0]))
    flat = hessian_top_eigen(obj, np.array([-1.0]))
    assert abs(sharp.eigenvalue - 25.0) < 1e-2
    assert abs(flat.eigenvalue - 1.0) < 1e-2
    # curvature ratio within 1 percent
    assert abs(sharp.eigenvalue / flat.eigenvalue - 25.0) < 0.25


def test_eigen_unconverged_is_flagged():
    obj = QuadraticObjective(np.array([1.0, 5.0]))
    est = hessian_top_eigen(obj, np.zeros(2), max_iters=2, tol=1e-13)
    assert not est.converged
    assert est.iterations == 2


def test_eigen_respects_start_vector():
    obj = QuadraticObjective(np.array([1.0, 5.0]))
    # exact eigenvector start: converges in one round to that eigenvalue
    est = hessian_top_eigen(obj, np.zeros(2), start=np.array([1.0, 0.0]))
    assert est.converged and est.iterations == 1
    assert abs(est.eigenvalue - 1.0) < 1e-9


def test_eigen_validation():
    obj = QuadraticObjective(np.eye(2))
    with pytest.raises(ValueError):
        hessian_top_eigen(obj, np.zeros(2), max_iters=0)
    with pytest.raises(ValueError):
        hessian_top_eigen(obj, np.zeros(2), probe_h=0.0)
    with pytest.raises(ValueError):
        hessian_top_eigen(obj, np.zeros(2), start=np.zeros(2))


# ---------------------------------------------------------------------------
# Ascent-gap proxy


def test_proxy_on_linear_objective_is_rho_times_slope():
    class Linear(Objective):
        param_dim = 1

        def value_and_grad(self, theta, batch=None):
            return -3.0 * float(theta[0]), np.array([-3.0])

    gap = sharpness_proxy(Linear(), np.array([0.7]), rho=0.2)
    assert abs(gap - 0.2 * 3.0) < 1e-12


def test_proxy_at_stationary_point_reads_the_curvature():
    """With no gradient the probe walks the top eigenvector, so the gap
    is about half lambda_max rho^2."""
    obj = QuadraticObjective(np.array([4.0]))
    gap = sharpness_proxy(obj, np.zeros(1), rho=0.1)
    assert abs(gap - 0.5 * 4.0 * 0.1**2) < 1e-10


def test_proxy_formula_on_quadratic_away_from_minimum():
    # L(theta + rho g/|g|) - L(theta) for 1-D quadratic with curvature k:
    # k*(u*rho + rho^2/2) at theta = u
    obj = QuadraticObjective(np.array([4.0]))
    gap = sharpness_proxy(obj, np.array([1.0]), rho=0.1)
    assert abs(gap - 4.0 * (0.1 + 0.005)) < 1e-12


def test_proxy_orders_the_two_wells():
    obj = TwoWellLandscape()
    sharp = sharpness_proxy(obj, np.array([1.0]), rho=0.05)
    flat = sharpness_proxy(obj, np.array([-1.0]), rho=0.05)
    assert sharp > flat > 0.0


def test_proxy_validation():
    obj = QuadraticObjective(np.eye(2))
    with pytest.raises(ValueError):
        sharpness_proxy(obj, np.zeros(2), rho=0.0)

    class Broken(Objective):
        param_dim = 1

        def value_and_grad(self, theta, batch=None):
            return float("nan"), np.zeros(1)

    with pytest.raises(EvaluationError):
        sharpness_proxy(Broken(), np.zeros(1), rho=0.1)


# ---------------------------------------------------------------------------
# Loss slices


def test_loss_slice_grid_and_midpoint():
    obj = QuadraticObjective(np.array([2.0]))
    out = loss_slice(obj, np.array([1.0]), np.array([1.0]), half_width=1.0, n_points=5)
    assert out.shape == (5, 2)
    np.testing.assert_allclose(out[:, 0], [-1.0, -0.5, 0.0, 0.5, 1.0], atol=1e-15)
    np.testing.assert_allclose(out[:, 1], [0.0, 0.25, 1.0, 2.25, 4.0], atol=1e-12)
    assert out[2, 1] == obj.value(np.array([1.0]))


def test_loss_slice_normalizes_direction():
    obj = QuadraticObjective(np.array([2.0, 2.0]))
    a = loss_slice(obj, np.zeros(2), np.array([1.0, 0.0]), 1.0, 3)
    b = loss_slice(obj, np.zeros(2), np.array([100.0, 0.0]), 1.0, 3)
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_loss_slice_through_both_wells_shows_equal_dips():
    obj = TwoWellLandscape(depth=0.3)
    out = loss_slice(obj, np.zeros(1), np.ones(1), half_width=1.0, n_points=201)
    at_flat = out[np.isclose(out[:, 0], -1.0), 1][0]
    at_sharp = out[np.isclose(out[:, 0], 1.0), 1][0]
    assert abs(at_flat - at_sharp) < 1e-12
    assert abs(at_flat - 0.3) < 1e-12


def test_loss_slice_records_non_finite_as_nan():
    class Spiky(Objective):
        param_dim = 1

        def value_and_grad(self, theta, batch=None):
            if abs(theta[0]) > 0.5:
                return float("inf"), np.zeros(1)
            return float(theta[0] ** 2), 2.0 * theta

    out = loss_slice(Spiky(), np.zeros(1), np.ones(1), half_width=1.0, n_points=5)
    assert np.isnan(out[0, 1]) and np.isnan(out[-1, 1])
    assert np.isfinite(out[2, 1])


def test_loss_slice_validation():
    obj = QuadraticObjective(np.eye(2))
    with pytest.raises(ValueError):
        loss_slice(obj, np.zeros(2), np.ones(2), 1.0, n_points=1)
    with pytest.raises(ValueError):
        loss_slice(obj, np.zeros(2), np.zeros(2), 1.0, n_points=5)


# ---------------------------------------------------------------------------
# Combined report


def test_sharpness_report_fields_and_probe_count():
    obj = QuadraticObjective(np.array([4.0]))
    report = sharpness_report(obj, np.zeros(1), rho=0.1)
    assert abs(report.proxy_gap - 0.02) < 1e-10
    assert abs(report.top_eigenvalue - 4.0) < 1e-6
    assert report.rho_used == 0.1
    # base point + ascent probe + two per power-iteration round
    assert report.probe_count == 2 + 2 * 1


def test_sharpness_report_orders_the_two_wells():
    obj = TwoWellLandscape()
    sharp = sharpness_report(obj, np.array([1.0]), rho=0.05)
    flat = sharpness_report(obj, np.array([-1.0]), rho=0.05)
    assert sharp.proxy_gap > flat.proxy_gap
    assert sharp.top_eigenvalue > flat.top_eigenvalue
