"""Brute-force ground truth: enumerate every colourful simplex.

The number of colourful simplices containing the origin (the colourful
simplicial depth of the origin) validates generators and gives the
expected iteration count of the random-sampling solver. Enumeration is
(d+1)^(d+1) containment tests, so this is practical only for d <= 6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import ColourConfiguration, ColourfulSimplex
from .errors import ZeroSolutions

CHUNK = 32768


@dataclass(frozen=True, eq=False)
class DepthReport:
    """Exhaustive containment census of a configuration."""

    d: int
    total: int
    containing: int
    degenerate: int
    solutions: tuple[ColourfulSimplex, ...]  # first list_cap, lexicographic

    def to_dict(self) -> dict:
        out = {
            "d": self.d,
            "total": self.total,
            "containing": self.containing,
            "degenerate": self.degenerate,
        }
        try:
            out["expected_a7"] = expected_a7_iterations(self)
        except ZeroSolutions:
            out["expected_a7"] = None
        return out


def _selection_chunks(d: int):
    """Yield (offset, index array of shape (m, d+1)) in lexicographic order."""
    k = d + 1
    total = k ** k
    shape = (k,) * k
    for start in range(0, total, CHUNK):
        stop = min(start + CHUNK, total)
        flat = np.arange(start, stop)
        sel = np.stack(np.unravel_index(flat, shape), axis=1)
        yield start, sel


def count_containing(config: ColourConfiguration, list_cap: int = 10000) -> DepthReport:
    """Count colourful simplices containing the origin, exhaustively.

    Degenerate containment systems are excluded from the containing count
    and reported separately so near-degenerate extremal instances fail
    loudly instead of passing with off-by-one counts.
    """
    k = config.d + 1
    pts = config.points
    colour_ix = np.arange(k)
    containing = 0
    degenerate = 0
    solutions: list[ColourfulSimplex] = []
    for _, sel in _selection_chunks(config.d):
        verts = pts[colour_ix[None, :], sel]  # (m, d+1, d)
        mask, degen = kernels.containment_batch(verts)
        containing += int(mask.sum())
        degenerate += int(degen.sum())
        if len(solutions) < list_cap:
            for row in sel[mask]:
                if len(solutions) >= list_cap:
                    break
                solutions.append(ColourfulSimplex(tuple(int(i) + 1 for i in row)))
    return DepthReport(
        d=config.d,
        total=k ** k,
        containing=containing,
        degenerate=degenerate,
        solutions=tuple(solutions),
    )


def facet_sign_contains_batch(vertices: np.ndarray) -> np.ndarray:
    """Containment via per-facet orientation signs (no linear solves).

    For each vertex, the sign of the homogenized determinant with that
    vertex replaced by the origin is compared against the full
    determinant; the origin is inside iff no comparison flips. This is
    the independent cross-check for :func:`count_containing`.
    """
    v = np.asarray(vertices, dtype=float)
    n, k, d = v.shape
    m = np.empty((n, k, k))
    m[:, :d, :] = v.transpose(0, 2, 1)
    m[:, d, :] = 1.0
    det_full = np.linalg.det(m)
    inside = np.abs(det_full) > 0.0
    signs = np.sign(det_full)
    for i in range(k):
        mi = m.copy()
        mi[:, :d, i] = 0.0
        det_i = np.linalg.det(mi)
        inside &= det_i * signs >= -kernels.WEIGHT_TOL * np.abs(det_full)
    return inside


def count_containing_facet_sign(config: ColourConfiguration) -> int:
    """Depth count via the determinant-sign route (cross-check only)."""
    k = config.d + 1
    pts = config.points
    colour_ix = np.arange(k)
    containing = 0
    for _, sel in _selection_chunks(config.d):
        verts = pts[colour_ix[None, :], sel]
        containing += int(facet_sign_contains_batch(verts).sum())
    return containing


def expected_a7_iterations(report: DepthReport) -> float:
    """Expected random-sampling iterations: total / containing."""
    if report.containing <= 0:
        raise ZeroSolutions(
            "no containing simplex found; the core condition guarantees at "
            "least one, so this indicates numerical failure"
        )
    return report.total / report.containing
