"""
Robust affine fit z = alpha * d + beta from background correspondences
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from models.depth_models import AffineDepthParams, PairInput, as_correspondence_set
from utils.errors import DegenerateFit, NoPositiveScale, TooFewCorrespondences
from utils.settings import get_settings

logger = logging.getLogger(__name__)

# Residual matrix cells scored per chunk
_CHUNK_CELLS = 2_000_000


def least_squares_affine(d: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Centered least-squares line; d must not be constant"""
    d_mean, z_mean = d.mean(), z.mean()
    dc = d - d_mean
    alpha = float(np.dot(dc, z - z_mean) / np.dot(dc, dc))
    return alpha, float(z_mean - alpha * d_mean)


def _count_inliers(d, z, alpha, beta, tol) -> np.ndarray:
    residual = np.abs(z[None, :] - (alpha[:, None] * d[None, :] + beta[:, None]))
    return np.count_nonzero(residual <= tol, axis=1)


def ransac_affine_fit(
    pairs: PairInput,
    inlier_tol: float = 0.05,
    iterations: int = 1000,
    seed: int = 0,
    threads: Optional[int] = None,
) -> AffineDepthParams:
    """Two-point RANSAC with a least-squares refit on the largest inlier set.

    All hypotheses are drawn up front from one seeded generator, so the result does not
    depend on how chunks are scheduled across threads. Ties go to the earliest iteration.
    """
    pairs = as_correspondence_set(pairs)
    n = len(pairs)
    if n < 2:
        raise TooFewCorrespondences(f"RANSAC needs at least 2 pairs, got {n}")
    if not inlier_tol > 0:
        raise ValueError("inlier_tol must be positive")
    d, z = pairs.d, pairs.z
    if np.all(d == d[0]):
        raise DegenerateFit("every correspondence has the same relative depth")

    rng = np.random.default_rng(seed)
    first = rng.integers(0, n, size=iterations)
    second = rng.integers(0, n - 1, size=iterations)
    second = second + (second >= first)

    spread = d[second] - d[first]
    valid = spread != 0
    if not valid.any():
        raise DegenerateFit("all sampled pairs share one relative depth")
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(valid, (z[second] - z[first]) / spread, 0.0)
    beta = z[first] - alpha * d[first]
    candidates = np.flatnonzero(valid & (alpha > 0))
    if candidates.size == 0:
        raise NoPositiveScale("no RANSAC hypothesis has a positive scale")

    chunk = max(1, _CHUNK_CELLS // n)
    pieces = [candidates[i:i + chunk] for i in range(0, candidates.size, chunk)]
    threads = threads or get_settings().threads

    def score(idx: np.ndarray) -> np.ndarray:
        return _count_inliers(d, z, alpha[idx], beta[idx], inlier_tol)

    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = np.concatenate(list(pool.map(score, pieces)))
    else:
        counts = np.concatenate([score(p) for p in pieces])

    best = int(candidates[int(np.argmax(counts))])
    inliers = np.abs(z - (alpha[best] * d + beta[best])) <= inlier_tol
    a_fit, b_fit = least_squares_affine(d[inliers], z[inliers])
    if not a_fit > 0:
        raise NoPositiveScale(f"least-squares refit produced alpha={a_fit:.6g}")
    residual = z[inliers] - (a_fit * d[inliers] + b_fit)
    rms = float(np.sqrt(np.mean(residual * residual)))
    logger.debug("RANSAC best iteration %d: %d/%d inliers, alpha=%.6g beta=%.6g", best, int(inliers.sum()), n, a_fit, b_fit)
    return AffineDepthParams(alpha=a_fit, beta=b_fit, inlier_count=int(inliers.sum()), residual_rms=rms)
