"""Shared numerical primitives for colourful feasibility solvers.

Everything here operates on plain float64 arrays: a simplex is a
``(d+1, d)`` array of vertex rows, a colour class likewise. All
functions are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DegenerateSimplex, DivisionDegenerate, NoEntry, QpFailure

# Tolerances (relative to unit-scale coordinates; see module tests).
WEIGHT_TOL = 1e-9        # convex-weight nonnegativity / zero-support threshold
RESIDUAL_TOL = 1e-8      # norm of a reconstructed point / boundary tightness
PIVOT_TOL = 1e-12        # LU pivot magnitude, relative to matrix scale
OPT_TOL = 1e-10          # first-order optimality of the min-norm point
TINY = 1e-14


def _homogenized(vertices: np.ndarray) -> np.ndarray:
    """(d+1)x(d+1) matrix whose column k is vertex k with a 1 appended."""
    n, d = vertices.shape
    m = np.empty((d + 1, n))
    m[:d, :] = vertices.T
    m[d, :] = 1.0
    return m


@dataclass(frozen=True, eq=False)
class ContainmentResult:
    """Outcome of a barycentric containment test."""

    status: str                    # "contains" | "outside" | "degenerate"
    weights: np.ndarray | None

    @property
    def contains(self) -> bool:
        return self.status == "contains"

    @property
    def degenerate(self) -> bool:
        return self.status == "degenerate"


def barycentric_containment(vertices: np.ndarray) -> ContainmentResult:
    """Test whether the origin lies in the simplex spanned by d+1 vertices.

    Solves the homogenized system by LU with partial pivoting. The result
    is "contains" when all barycentric weights are >= -1e-9, "degenerate"
    when a pivot falls below 1e-12 times the matrix scale, and "outside"
    otherwise. Degenerate is a value, not an error: callers decide whether
    to treat it as outside while counting the instability.
    """
    m = _homogenized(np.asarray(vertices, dtype=float))
    scale = np.abs(m).max()
    if scale == 0.0:
        return ContainmentResult("degenerate", None)
    try:
        lu, piv = lu_factor(m, check_finite=False)
    except ValueError:  # non-finite input
        return ContainmentResult("degenerate", None)
    if np.abs(np.diag(lu)).min() < PIVOT_TOL * scale:
        return ContainmentResult("degenerate", None)
    rhs = np.zeros(m.shape[0])
    rhs[-1] = 1.0
    lam = lu_solve((lu, piv), rhs, check_finite=False)
    if lam.min() >= -WEIGHT_TOL:
        return ContainmentResult("contains", lam)
    return ContainmentResult("outside", lam)


def containment_batch(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized containment for a stack of simplices, shape (n, d+1, d).

    Returns (contains, degenerate) boolean masks. Semantics match
    :func:`barycentric_containment`; borderline systems (tiny determinant
    or weights within 1e-6 of the acceptance band) are re-checked with the
    scalar kernel so the two paths never disagree.
    """
    v = np.asarray(vertices, dtype=float)
    n, k, d = v.shape
    m = np.empty((n, k, k))
    m[:, :d, :] = v.transpose(0, 2, 1)
    m[:, d, :] = 1.0
    dets = np.linalg.det(m)
    # Hadamard bound keeps the suspect threshold scale-aware.
    colnorm = np.linalg.norm(m, axis=1)
    hadamard = np.prod(np.maximum(colnorm, TINY), axis=1)
    suspect = np.abs(dets) < 1e-9 * hadamard

    safe_m = m.copy()
    safe_m[suspect] = np.eye(k)
    rhs = np.zeros((n, k, 1))
    rhs[:, -1, 0] = 1.0
    lam = np.linalg.solve(safe_m, rhs)[:, :, 0]
    lam_min = lam.min(axis=1)
    contains = lam_min >= -WEIGHT_TOL
    degenerate = np.zeros(n, dtype=bool)

    recheck = suspect | (np.abs(lam_min + WEIGHT_TOL) < 1e-6)
    for i in np.nonzero(recheck)[0]:
        res = barycentric_containment(v[i])
        contains[i] = res.contains
        degenerate[i] = res.degenerate
    contains &= ~degenerate
    return contains, degenerate


@dataclass(frozen=True, eq=False)
class NearestPointResult:
    """Minimum-norm point of a simplex with its optimality data."""

    x: np.ndarray            # nearest point of the simplex to the origin
    lam: np.ndarray          # d+1 barycentric weights
    support: tuple[int, ...]  # positions with weight > WEIGHT_TOL
    distance: float


def _affine_min_weights(points: np.ndarray) -> np.ndarray:
    """Weights of the min-norm point over the affine hull of `points`."""
    k = points.shape[0]
    gram = points @ points.T
    kkt = np.empty((k + 1, k + 1))
    kkt[:k, :k] = gram
    kkt[k, :k] = 1.0
    kkt[:k, k] = 1.0
    kkt[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(
    points: np.ndarray,
    opt_tol: float = OPT_TOL,
    max_steps: int | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Minimum-norm point of the convex hull of `points` (n rows).

    Active-set corral scheme: grow the corral with the vertex most
    violating first-order optimality, minimize over the corral's affine
    hull, and walk back onto the convex hull dropping vertices whose
    weight hits zero. Returns (x, weights, steps).

    Raises QpFailure if the inner-step cap is reached without the
    first-order optimality certificate.
    """
    p = np.asarray(points, dtype=float)
    n = p.shape[0]
    if max_steps is None:
        max_steps = 1000 * n
    scale2 = max(1.0, float((p * p).sum(axis=1).max()))
    tol = opt_tol * scale2

    norms2 = (p * p).sum(axis=1)
    first = int(np.argmin(norms2))
    corral = [first]
    lam_c = np.array([1.0])
    x = p[first].copy()

    steps = 0
    while True:
        steps += 1
        if steps > max_steps:
            raise QpFailure(f"min-norm point: no optimality after {max_steps} steps")
        ips = p @ x
        xx = float(x @ x)
        j = int(np.argmin(ips))
        if ips[j] >= xx - tol or j in corral:
            break
        corral.append(j)
        lam_c = np.append(lam_c, 0.0)
        while True:
            steps += 1
            if steps > max_steps:
                raise QpFailure(
                    f"min-norm point: no optimality after {max_steps} steps"
                )
            alpha = _affine_min_weights(p[corral])
            if alpha.min() > -TINY:
                lam_c = alpha
                break
            neg = alpha < -TINY
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = lam_c[neg] / (lam_c[neg] - alpha[neg])
            theta = min(1.0, float(ratios.min()))
            lam_c = (1.0 - theta) * lam_c + theta * alpha
            drop = int(np.argmin(lam_c))
            corral.pop(drop)
            lam_c = np.delete(lam_c, drop)
        x = lam_c @ p[corral]

    lam = np.zeros(n)
    lam[corral] = lam_c
    # Guard against rounding just below zero inside the corral.
    np.clip(lam, 0.0, None, out=lam)
    s = lam.sum()
    if s > 0:
        lam /= s
    return x, lam, steps


def nearest_point_simplex(vertices: np.ndarray) -> NearestPointResult:
    """Minimum-norm point of the simplex spanned by d+1 vertices."""
    v = np.asarray(vertices, dtype=float)
    x, lam, _ = min_norm_point(v)
    support = tuple(int(i) for i in np.nonzero(lam > WEIGHT_TOL)[0])
    return NearestPointResult(x=x, lam=lam, support=support,
                              distance=float(np.linalg.norm(x)))


@dataclass(frozen=True, eq=False)
class FacetSystem:
    """Facet inequalities A z >= b of a nondegenerate simplex.

    Row i is the facet opposite vertex i, normalized so that
    A_i v_i - b_i = 1. The affine map z -> A z - b evaluates the
    barycentric coordinates of z, which is what ties this system to
    boundary-point bookkeeping.
    """

    A: np.ndarray   # (d+1, d)
    b: np.ndarray   # (d+1,)

    def weights(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z - self.b


def facet_system(vertices: np.ndarray) -> FacetSystem:
    """Invert the homogenized vertex matrix to get facet inequalities.

    Raises DegenerateSimplex when the vertices are affinely dependent
    (smallest LU pivot below 1e-12 of the matrix scale).
    """
    v = np.asarray(vertices, dtype=float)
    m = _homogenized(v)
    scale = np.abs(m).max()
    try:
        lu, piv = lu_factor(m, check_finite=False)
    except ValueError as exc:
        raise DegenerateSimplex("non-finite vertex data") from exc
    if scale == 0.0 or np.abs(np.diag(lu)).min() < PIVOT_TOL * scale:
        raise DegenerateSimplex("affinely dependent vertices")
    w = lu_solve((lu, piv), np.eye(m.shape[0]), check_finite=False)
    d = v.shape[1]
    return FacetSystem(A=np.ascontiguousarray(w[:, :d]), b=-w[:, d])


def ray_simplex_entry(fs: FacetSystem, p: np.ndarray) -> tuple[float, np.ndarray]:
    """Boundary point of the simplex along the ray {t p : t >= 0}.

    When the origin is outside the simplex this is the entry point: the
    largest ratio b_i / (A_i p) over rows with A_i p > 0 whose point
    alpha*p satisfies every facet inequality within 1e-9. When the
    origin is inside, the ray leaves through the facets with A_i p < 0
    and the same feasibility-restricted maximum over those rows gives
    the forward boundary crossing. Raises DivisionDegenerate when the
    direction is orthogonal to every facet normal, NoEntry when no
    ratio yields a feasible boundary point on the ray.
    """
    p = np.asarray(p, dtype=float)
    ap = fs.A @ p
    if np.abs(ap).max() <= TINY:
        raise DivisionDegenerate("direction orthogonal to all facet normals")
    origin_outside = fs.b.max() > WEIGHT_TOL
    usable = ap > TINY if origin_outside else ap < -TINY
    best = None  # least-infeasible positive candidate, for the rounding band
    if usable.any():
        ratios = fs.b[usable] / ap[usable]
        for idx in np.argsort(ratios)[::-1]:
            alpha = float(ratios[idx])
            if alpha <= 0.0:
                break
            y = alpha * p
            worst = (fs.A @ y - fs.b).min()
            if worst >= -WEIGHT_TOL:
                return alpha, y
            if best is None or worst > best[0]:
                best = (worst, alpha, y)
    # Sliver simplices can push the true entry point a few ulps past the
    # weight tolerance; accept it while the boundary residual bound holds.
    if best is not None and best[0] >= -RESIDUAL_TOL:
        return best[1], best[2]
    raise NoEntry("ray misses the simplex")


def project_onto_segment(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Closest point of segment [a, b] to the origin and its parameter t.

    t = 0 at a, t = 1 at b, clamped to the segment.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = b - a
    denom = float(diff @ diff)
    if denom <= TINY * TINY:
        return a.copy(), 0.0
    t = float(-(a @ diff) / denom)
    t = min(1.0, max(0.0, t))
    return a + t * diff, t


def min_inner_point(colour: np.ndarray, direction: np.ndarray) -> int:
    """Index of the colour point minimizing <t, direction>; ties -> lowest index."""
    return int(np.argmin(np.asarray(colour, dtype=float) @ direction))


def simplex_volume(vertices: np.ndarray) -> float:
    """Euclidean volume |det(v_2 - v_1, ..., v_{d+1} - v_1)| / d!."""
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    edges = v[1:] - v[0]
    return abs(float(np.linalg.det(edges))) / math.factorial(d)
