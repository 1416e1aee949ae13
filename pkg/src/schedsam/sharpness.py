"""Flatness diagnostics for converged parameters.

Two complementary measures: the ascent-gap proxy (how much the loss
rises at the radius-rho first-order ascent point, the same point the
two-propagation step evaluates) and the dominant Hessian curvature via
power iteration on finite-difference Hessian-vector products. Both need
only loss/gradient evaluations, no second-order autodiff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .numeric import RngStream, l2_norm
from .objective import Objective

_FALLBACK_FLOOR = 1e-12


@dataclass
class EigenEstimate:
    """Power-iteration output: dominant-magnitude curvature and direction."""

    eigenvalue: float
    eigenvector: np.ndarray
    converged: bool
    iterations: int


@dataclass(frozen=True)
class SharpnessReport:
    """Flatness summary at one parameter point."""

    proxy_gap: float
    top_eigenvalue: float
    rho_used: float
    probe_count: int


def hessian_top_eigen(
    obj: Objective,
    theta: np.ndarray,
    batch=None,
    max_iters: int = 300,
    tol: float = 1e-9,
    probe_h: float | None = None,
    start: np.ndarray | None = None,
) -> EigenEstimate:
    """Dominant-magnitude Hessian eigenvalue by power iteration.

    Hessian-vector products are central differences of the analytic
    gradient, Hv ~ (g(theta + h v) - g(theta - h v)) / (2 h), which is
    exact for quadratics up to roundoff. Converged when successive
    Rayleigh estimates differ by less than ``tol``, or immediately when
    the residual ||Hv - lambda v|| vanishes at that scale (exact
    eigenvector). Non-convergence returns the best estimate flagged.

    The start vector defaults to a fixed pseudorandom direction so
    repeated calls are bit-identical.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be at least 1, got {max_iters}")
    theta = np.asarray(theta, dtype=np.float64)
    if probe_h is None:
        probe_h = 1e-4 * (1.0 + l2_norm(theta))
    if not probe_h > 0:
        raise ValueError(f"probe_h must be positive, got {probe_h}")

    if start is None:
        start = RngStream(0, "landscape").standard_normal(theta.size)
    v = np.asarray(start, dtype=np.float64)
    norm = l2_norm(v)
    if norm == 0.0:
        raise ValueError("start vector must be nonzero")
    v = v / norm

    def hvp(direction: np.ndarray) -> np.ndarray:
        _, g_plus = obj.value_and_grad(theta + probe_h * direction, batch)
        _, g_minus = obj.value_and_grad(theta - probe_h * direction, batch)
        if not (np.all(np.isfinite(g_plus)) and np.all(np.isfinite(g_minus))):
            raise EvaluationError("non-finite gradient at curvature probe")
        return (g_plus - g_minus) / (2.0 * probe_h)

    eigenvalue = 0.0
    prev = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        hv = hvp(v)
        eigenvalue = float(v @ hv)
        hv_norm = l2_norm(hv)
        if hv_norm <= tol:
            # Curvature numerically zero along every remaining direction.
            converged = True
            break
        residual = l2_norm(hv - eigenvalue * v)
        if residual <= tol * max(1.0, abs(eigenvalue)):
            converged = True
            break
        if abs(eigenvalue - prev) < tol:
            converged = True
            break
        prev = eigenvalue
        v = hv / hv_norm
    return EigenEstimate(
        eigenvalue=eigenvalue, eigenvector=v, converged=converged, iterations=iterations
    )


def sharpness_proxy(obj: Objective, theta: np.ndarray, rho: float, batch=None) -> float:
    """Loss rise at the radius-rho ascent point: L(theta + rho g/||g||) - L(theta).

    This probes the same neighborhood maximizer the two-propagation step
    uses, so it measures exactly the sharpness that step minimizes. At a
    stationary point (gradient below 1e-12) the ascent direction is
    undefined; the probe then falls back to the dominant-curvature
    eigenvector, giving ~ 1/2 * lambda_max * rho^2 on smooth minima.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    theta = np.asarray(theta, dtype=np.float64)
    base_loss, grad = obj.value_and_grad(theta, batch)
    if not (np.isfinite(base_loss) and np.all(np.isfinite(grad))):
        raise EvaluationError("non-finite loss or gradient at probe point")
    norm = l2_norm(grad)
    if norm > _FALLBACK_FLOOR:
        direction = grad / norm
    else:
        direction = hessian_top_eigen(obj, theta, batch).eigenvector
    probe_loss = obj.value(theta + rho * direction, batch)
    if not np.isfinite(probe_loss):
        raise EvaluationError("non-finite loss at ascent probe")
    return float(probe_loss - base_loss)


def loss_slice(
    obj: Objective,
    theta: np.ndarray,
    direction: np.ndarray,
    half_width: float,
    n_points: int,
    batch=None,
) -> np.ndarray:
    """Loss along a line through theta: rows of (offset, loss).

    Offsets are n_points equally spaced values in [-half_width,
    +half_width] along the normalized direction, so the midpoint of an
    odd-length slice is L(theta) itself. A non-finite loss at a probe is
    recorded as nan rather than aborting the scan.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points}")
    theta = np.asarray(theta, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    norm = l2_norm(direction)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    unit = direction / norm
    offsets = np.linspace(-half_width, half_width, n_points)
    out = np.empty((n_points, 2))
    for i, s in enumerate(offsets):
        loss = obj.value(theta + s * unit, batch)
        out[i, 0] = s
        out[i, 1] = loss if np.isfinite(loss) else np.nan
    return out


def sharpness_report(obj: Objective, theta: np.ndarray, rho: float, batch=None) -> SharpnessReport:
    """Combined flatness summary: ascent gap plus dominant curvature."""
    theta = np.asarray(theta, dtype=np.float64)
    base_loss, grad = obj.value_and_grad(theta, batch)
    if not (np.isfinite(base_loss) and np.all(np.isfinite(grad))):
        raise EvaluationError("non-finite loss or gradient at probe point")
    eigen = hessian_top_eigen(obj, theta, batch)
    norm = l2_norm(grad)
    direction = grad / norm if norm > _FALLBACK_FLOOR else eigen.eigenvector
    probe_loss = obj.value(theta + rho * direction, batch)
    if not np.isfinite(probe_loss):
        raise EvaluationError("non-finite loss at ascent probe")
    # One propagation for the base point, one for the ascent probe, two
    # per power-iteration round.
    probes = 2 + 2 * eigen.iterations
    return SharpnessReport(
        proxy_gap=float(probe_loss - base_loss),
        top_eigenvalue=eigen.eigenvalue,
        rho_used=float(rho),
        probe_count=probes,
    )
