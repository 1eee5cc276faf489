"""
Box-constrained scale refinement.

    maximize alpha
    subject to  delta_min[k] <= X[i, k] * (d[i] * alpha + beta) <= delta_max[k]   for every sample i, axis k
                alpha >= ALPHA_MIN

Two variables, so it is solved exactly with Seidel's randomized incremental algorithm
inside a large bounding square; an optimum pinned to that square means the LP is unbounded.
"""

import logging
from typing import Tuple

import numpy as np

from models.depth_models import AffineDepthParams, SampleInput, as_sample_set
from models.geometry_models import BoxFrame
from utils.errors import Infeasible, Unbounded

logger = logging.getLogger(__name__)

ALPHA_MIN = 1e-9
SEARCH_BOX = 1e9
_REL_TOL = 1e-12
_ORDER_SEED = 0


def scale_constraints(X: np.ndarray, d: np.ndarray, delta_min: np.ndarray, delta_max: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rows A @ (alpha, beta) <= b for every sample/axis bound plus alpha >= ALPHA_MIN.

    Rows with X[i, k] == 0 reduce to constants; they are checked here and left out.
    """
    X = np.asarray(X, dtype=np.float64).reshape(-1, 3)
    d = np.asarray(d, dtype=np.float64).reshape(-1)
    rows, rhs = [], []
    for k in range(3):
        xk = X[:, k]
        zero = xk == 0.0
        if zero.any() and not (delta_min[k] <= 0.0 <= delta_max[k]):
            raise Infeasible(f"axis {k}: a sample with zero direction component cannot reach [{delta_min[k]}, {delta_max[k]}]",
                             index=int(np.flatnonzero(zero)[0]))
        xk, dk = xk[~zero], d[~zero]
        rows.append(np.stack([xk * dk, xk], axis=1))
        rhs.append(np.full(xk.shape, delta_max[k]))
        rows.append(np.stack([-xk * dk, -xk], axis=1))
        rhs.append(np.full(xk.shape, -delta_min[k]))
    rows.append(np.array([[-1.0, 0.0]]))
    rhs.append(np.array([-ALPHA_MIN]))
    return np.concatenate(rows), np.concatenate(rhs)


def _tolerance(a: np.ndarray, b: np.ndarray, point: np.ndarray) -> np.ndarray:
    return _REL_TOL * (np.abs(b) + np.abs(a) @ np.abs(point) + 1.0)


def _optimum_on_line(A: np.ndarray, b: np.ndarray, a: np.ndarray, rhs: float, beta_hint: float) -> np.ndarray:
    """Maximize alpha on the line a . x = rhs subject to A x <= b"""
    origin = a * (rhs / np.dot(a, a))
    direction = np.array([-a[1], a[0]])
    slope = A @ direction
    room = b - A @ origin
    tol = _tolerance(A, b, origin)
    flat = np.abs(slope) <= _REL_TOL * np.linalg.norm(A, axis=1) * np.linalg.norm(direction)
    if np.any(room[flat] < -tol[flat]):
        raise Infeasible("parallel constraints leave no room")
    up, down = slope > 0, slope < 0
    up &= ~flat
    down &= ~flat
    s_hi = np.min(room[up] / slope[up]) if up.any() else np.inf
    s_lo = np.max(room[down] / slope[down]) if down.any() else -np.inf
    if s_lo > s_hi + _REL_TOL * (abs(s_lo) + abs(s_hi) + 1.0):
        raise Infeasible("constraint set is empty")
    if direction[0] > 0:
        s = s_hi
    elif direction[0] < 0:
        s = s_lo
    else:
        # alpha is constant on this line; stay as close to the hint as allowed
        s = (beta_hint - origin[1]) / direction[1]
    s = min(max(s, s_lo), s_hi)
    return origin + s * direction


def seidel_max_alpha(A: np.ndarray, b: np.ndarray, beta_hint: float = 0.0, seed: int = _ORDER_SEED) -> np.ndarray:
    """Maximize alpha over {x : A x <= b} inside the search square"""
    box_a = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    box_b = np.full(4, SEARCH_BOX)
    order = np.random.default_rng(seed).permutation(A.shape[0])
    A_all = np.concatenate([box_a, A[order]])
    b_all = np.concatenate([box_b, b[order]])
    point = np.array([SEARCH_BOX, min(max(beta_hint, -SEARCH_BOX), SEARCH_BOX)])
    start = box_a.shape[0]
    while start < A_all.shape[0]:
        rest_a, rest_b = A_all[start:], b_all[start:]
        violated = np.flatnonzero(rest_a @ point - rest_b > _tolerance(rest_a, rest_b, point))
        if violated.size == 0:
            break
        k = start + int(violated[0])
        point = _optimum_on_line(A_all[:k], b_all[:k], A_all[k], b_all[k], beta_hint)
        start = k + 1
    return point


def beta_interval(A: np.ndarray, b: np.ndarray, alpha: float) -> Tuple[float, float]:
    """Feasible beta range at a fixed alpha"""
    coef, room = A[:, 1], b - A[:, 0] * alpha
    hi = np.min(room[coef > 0] / coef[coef > 0]) if np.any(coef > 0) else np.inf
    lo = np.max(room[coef < 0] / coef[coef < 0]) if np.any(coef < 0) else -np.inf
    return float(lo), float(hi)


def refine_scale_lp(samples: SampleInput, frame: BoxFrame, init: AffineDepthParams) -> AffineDepthParams:
    """Largest alpha that keeps every lifted sample inside the box; beta nearest init.beta among optima"""
    samples = as_sample_set(samples)
    if len(samples) == 0:
        raise ValueError("refine_scale_lp needs at least one sample")
    A, b = scale_constraints(samples.X, samples.d, frame.delta_min, frame.delta_max)
    point = seidel_max_alpha(A, b, init.beta)
    alpha = float(point[0])
    if alpha >= SEARCH_BOX * (1.0 - 1e-9) or abs(point[1]) >= SEARCH_BOX * (1.0 - 1e-9):
        raise Unbounded("scale has no finite maximum (relative depths do not pin alpha)")
    lo, hi = beta_interval(A, b, alpha)
    beta = min(max(init.beta, lo), hi) if lo <= hi else 0.5 * (lo + hi)
    logger.debug("LP optimum alpha=%.9g beta=%.9g (beta range [%.9g, %.9g])", alpha, beta, lo, hi)
    return AffineDepthParams(alpha=alpha, beta=beta, inlier_count=init.inlier_count, residual_rms=init.residual_rms)
