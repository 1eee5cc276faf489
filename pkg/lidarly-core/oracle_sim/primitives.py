"""
Ray intersections with analytic primitives.

Directions need not be unit length: the returned parameter t satisfies hit = origin + t * direction,
so it is a distance only for unit directions.
"""

from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from models.scene_models import Primitive

T_MIN = 1e-9
ROOT_XTOL = 1e-9
_BRACKET_SAMPLES = 64


def _to_local(prim: Primitive, origins: np.ndarray, directions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    rotation, translation = prim.pose.rotation, prim.pose.translation
    return (origins - translation) @ rotation, directions @ rotation


def _box_span(o: np.ndarray, d: np.ndarray, half: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unclamped slab interval against [-half, half]"""
    with np.errstate(divide="ignore", invalid="ignore"):
        t_a = (-half - o) / d
        t_b = (half - o) / d
    parallel = d == 0.0
    inside = np.abs(o) <= half
    t_near = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t_a, t_b))
    t_far = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t_a, t_b))
    return t_near.max(axis=1), t_far.min(axis=1)


def _first_positive(t_near: np.ndarray, t_far: np.ndarray, hit: np.ndarray) -> np.ndarray:
    return np.where(hit & (t_near > T_MIN), t_near, np.where(hit & (t_far > T_MIN), t_far, np.inf))


def intersect_sphere(prim: Primitive, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    o, d = _to_local(prim, origins, directions)
    r = prim.extents[0]
    a = np.einsum("ij,ij->i", d, d)
    b = np.einsum("ij,ij->i", o, d)
    c = np.einsum("ij,ij->i", o, o) - r * r
    disc = b * b - a * c
    hit = disc >= 0.0
    root = np.sqrt(np.where(hit, disc, 0.0))
    return _first_positive((-b - root) / a, (-b + root) / a, hit)


def intersect_cuboid(prim: Primitive, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    o, d = _to_local(prim, origins, directions)
    t_near, t_far = _box_span(o, d, prim.extents)
    return _first_positive(t_near, t_far, t_near <= t_far)


def superellipsoid_implicit(prim: Primitive, local: np.ndarray) -> np.ndarray:
    """Inside-outside function: < 0 inside, 0 on the surface"""
    e1, e2 = prim.exponents
    q = np.abs(local / prim.extents)
    xy = q[..., 0] ** (2.0 / e2) + q[..., 1] ** (2.0 / e2)
    return xy ** (e2 / e1) + q[..., 2] ** (2.0 / e1) - 1.0


def intersect_superellipsoid(prim: Primitive, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """First sign change of the implicit function inside the bounding box, refined with brentq"""
    o, d = _to_local(prim, origins, directions)
    t_near, t_far = _box_span(o, d, prim.extents)
    out = np.full(o.shape[0], np.inf)
    for i in np.flatnonzero((t_near <= t_far) & (t_far > T_MIN)):
        t0, t1 = max(t_near[i], T_MIN), t_far[i]
        ts = np.linspace(t0, t1, _BRACKET_SAMPLES + 1)
        values = superellipsoid_implicit(prim, o[i] + ts[:, None] * d[i])
        if values[0] == 0.0:
            out[i] = t0
            continue
        change = np.flatnonzero(np.sign(values[1:]) != np.sign(values[:-1]))
        if change.size == 0:
            continue
        k = int(change[0])
        if values[k + 1] == 0.0:
            out[i] = ts[k + 1]
            continue

        def along(t: float, i: int = i) -> float:
            return float(superellipsoid_implicit(prim, o[i] + t * d[i]))

        out[i] = brentq(along, ts[k], ts[k + 1], xtol=ROOT_XTOL)
    return out


_INTERSECTORS = {
    "sphere": intersect_sphere,
    "cuboid": intersect_cuboid,
    "superellipsoid": intersect_superellipsoid,
}


def intersect(prim: Primitive, origins: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """(N,) ray parameter of the first hit, +inf on a miss"""
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    return _INTERSECTORS[prim.kind](prim, origins, directions)


def nearest_hit(primitives: Sequence[Primitive], origins: np.ndarray, directions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest t across primitives and the index of the primitive hit (-1 on a miss)"""
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    best = np.full(origins.shape[0], np.inf)
    which = np.full(origins.shape[0], -1, dtype=np.int64)
    for k, prim in enumerate(primitives):
        t = intersect(prim, origins, directions)
        closer = t < best
        best[closer] = t[closer]
        which[closer] = k
    return best, which


def surface_residual(prim: Primitive, points: np.ndarray) -> np.ndarray:
    """Zero on the surface: radial distance for spheres, face distance for cuboids, implicit value otherwise"""
    local = (np.atleast_2d(points) - prim.pose.translation) @ prim.pose.rotation
    if prim.kind == "sphere":
        return np.linalg.norm(local, axis=1) - prim.extents[0]
    if prim.kind == "cuboid":
        return np.max(np.abs(local) - prim.extents, axis=1)
    return superellipsoid_implicit(prim, local)