"""Domain types, preprocessing and the configuration text format.

A configuration is d+1 colour classes of d+1 points in R^d with the
origin in every class's convex hull (the *core* condition). Points are
stored as a read-only float64 array indexed [colour, point, coordinate];
colour and point indices are 1-based in all user-facing structures,
matching the (1,1,...,1)-style simplex notation used in traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotInHull, ParseError, PointAtOrigin

UNIT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ColourConfiguration:
    """d+1 colour classes of d+1 points each, in R^d."""

    points: np.ndarray                     # (d+1, d+1, d)
    normalized: bool = False
    scale_record: np.ndarray | None = None  # (d+1, d+1) original norms

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[0] != pts.shape[1] or pts.shape[0] != pts.shape[2] + 1:
            raise ValueError(f"expected (d+1, d+1, d) points, got {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", _frozen(pts))
        if self.scale_record is not None:
            object.__setattr__(self, "scale_record", _frozen(self.scale_record))
        if self.normalized:
            norms = np.linalg.norm(pts, axis=2)
            if np.abs(norms - 1.0).max() > UNIT_TOL:
                raise ValueError("normalized flag set but some point is off the unit sphere")

    @property
    def d(self) -> int:
        return self.points.shape[2]

    def colour(self, i: int) -> np.ndarray:
        """Points of colour i (1-based), shape (d+1, d)."""
        return self.points[i - 1]

    def vertices(self, simplex: "ColourfulSimplex") -> np.ndarray:
        """Vertex rows of a colourful simplex, shape (d+1, d)."""
        sel = np.asarray(simplex.selection, dtype=int) - 1
        return self.points[np.arange(self.points.shape[0]), sel]

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(str(self.d).encode())
        h.update(self.points.tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, ColourConfiguration):
            return NotImplemented
        return (
            self.d == other.d
            and np.array_equal(self.points, other.points)
            and self.normalized == other.normalized
        )


@dataclass(frozen=True)
class ColourfulSimplex:
    """One chosen point per colour, as a tuple of 1-based indices."""

    selection: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "selection", tuple(int(i) for i in self.selection))
        n = len(self.selection)
        for i in self.selection:
            if not 1 <= i <= n:
                raise ValueError(f"index {i} out of range 1..{n}")

    def replaced(self, colour_pos: int, new_index: int) -> "ColourfulSimplex":
        """New simplex with colour at 0-based position `colour_pos` swapped."""
        sel = list(self.selection)
        sel[colour_pos] = new_index
        return ColourfulSimplex(tuple(sel))

    def __str__(self):
        return "(" + ",".join(str(i) for i in self.selection) + ")"


def first_points_simplex(d: int) -> ColourfulSimplex:
    return ColourfulSimplex((1,) * (d + 1))


@dataclass(frozen=True, eq=False)
class BasisCertificate:
    """At most d+1 points carrying the origin in their convex hull."""

    indices: tuple[int, ...]   # 0-based positions into the input point list
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "weights", _frozen(self.weights))


def normalize_configuration(
    config: ColourConfiguration, p: np.ndarray | None = None
) -> ColourConfiguration:
    """Translate the target point to the origin and scale points to the unit sphere.

    Records every original norm in ``scale_record`` so certificate weights
    for the normalized problem can be mapped back (see
    :func:`unscale_weights`). Raises PointAtOrigin if some point coincides
    with p within 1e-12; the problem is then trivially solved and the
    exception carries the certificate.
    """
    pts = np.asarray(config.points, dtype=float)
    if p is not None:
        p = np.asarray(p, dtype=float)
        if p.shape != (config.d,):
            raise ValueError(f"target point must have dimension {config.d}")
        pts = pts - p
    norms = np.linalg.norm(pts, axis=2)
    small = np.argwhere(norms <= UNIT_TOL)
    if small.size:
        ci, pi = (int(v) for v in small[0])
        n = pts.shape[0]
        sel = [1] * n
        sel[ci] = pi + 1
        weights = np.zeros(n)
        weights[ci] = 1.0
        raise PointAtOrigin(ci + 1, pi + 1, (ColourfulSimplex(tuple(sel)), weights))
    return ColourConfiguration(
        points=pts / norms[:, :, None], normalized=True, scale_record=norms
    )


def unscale_weights(
    scale_record: np.ndarray, simplex: ColourfulSimplex, weights: np.ndarray
) -> np.ndarray:
    """Map convex weights on normalized points back to the original points."""
    sel = np.asarray(simplex.selection, dtype=int) - 1
    r = scale_record[np.arange(len(sel)), sel]
    w = np.asarray(weights, dtype=float) / r
    return w / w.sum()


def _convex_witness(points: np.ndarray) -> np.ndarray:
    """Convex weights expressing the origin, or raise NotInHull.

    One feasibility solve via the minimum-norm-point kernel: distance
    zero yields the weights, anything else yields the separating witness.
    """
    x, lam, _ = kernels.min_norm_point(points)
    dist = float(np.linalg.norm(x))
    if dist > kernels.RESIDUAL_TOL:
        raise NotInHull(witness=x, distance=dist)
    return lam


def reduce_to_basis(
    points: np.ndarray, witness: np.ndarray | None = None
) -> BasisCertificate:
    """Reduce a convex representation of the origin to at most d+1 points.

    Starting weights come from `witness` when given, otherwise from a
    feasibility solve. While more than d+1 points are active, an affine
    dependence among them is found and the weights are shifted along it
    until one hits zero; ties drop the lowest point index.
    """
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    if witness is None:
        lam = _convex_witness(pts)
    else:
        lam = np.asarray(witness, dtype=float).copy()
        if lam.shape != (n,):
            raise ValueError("witness length does not match point count")
        if lam.min() < -kernels.WEIGHT_TOL or abs(lam.sum() - 1.0) > 1e-6:
            raise ValueError("witness is not a convex weight vector")
        np.clip(lam, 0.0, None, out=lam)
        lam /= lam.sum()

    active = [i for i in range(n) if lam[i] > 0.0]
    while len(active) > d + 1:
        sub = pts[active]
        hom = np.vstack([sub.T, np.ones(len(active))])
        # Affine dependence: null vector of the homogenized matrix.
        _, _, vh = np.linalg.svd(hom)
        c = vh[-1]
        if not (c > kernels.TINY).any():
            c = -c
        ratios = np.full(len(active), np.inf)
        pos = c > kernels.TINY
        ratios[pos] = lam[np.asarray(active)[pos]] / c[pos]
        t = ratios.min()
        k = int(np.argmin(ratios))  # lowest active index on ties
        for j, idx in enumerate(active):
            lam[idx] = max(0.0, lam[idx] - t * c[j])
        lam[active[k]] = 0.0
        active.pop(k)

    sel = np.array(active, dtype=int)
    w = lam[sel]
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    cert = BasisCertificate(indices=tuple(sel), weights=w)
    resid = float(np.linalg.norm(w @ pts[sel]))
    if resid > kernels.RESIDUAL_TOL:
        raise NotInHull(witness=w @ pts[sel], distance=resid)
    return cert


@dataclass(frozen=True, eq=False)
class CoreCheck:
    """Per-colour hull membership of the origin."""

    in_core: bool
    certificates: tuple  # per colour: weight vector or None

    def __bool__(self):
        return self.in_core


def check_core(config: ColourConfiguration) -> CoreCheck:
    """True iff every colour class holds the origin in its convex hull.

    Each passing colour carries a convex-weight certificate. Degenerate
    classes fall back to a feasibility solve and report False when the
    origin is genuinely outside.
    """
    certs = []
    ok = True
    for i in range(config.points.shape[0]):
        colour = config.points[i]
        res = kernels.barycentric_containment(colour)
        if res.contains:
            certs.append(np.clip(res.weights, 0.0, None) / max(res.weights.sum(), 1e-300))
            continue
        if res.status == "outside":
            certs.append(None)
            ok = False
            continue
        try:
            certs.append(_convex_witness(colour))
        except NotInHull:
            certs.append(None)
            ok = False
    return CoreCheck(in_core=ok, certificates=tuple(certs))


MAGIC = "colourful-config v1"


def parse_configuration(text: str) -> ColourConfiguration:
    """Parse the v1 text format; see :func:`write_configuration` for the grammar."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append((lineno, stripped))
    pos = 0

    def take(what: str) -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 1
            raise ParseError(f"unexpected end of input, expected {what}", line=last)
        item = lines[pos]
        pos += 1
        return item

    lineno, header = take("header")
    if header != MAGIC:
        raise ParseError(f"expected '{MAGIC}'", line=lineno)
    lineno, dline = take("d=<int>")
    if not dline.startswith("d="):
        raise ParseError("expected 'd=<int>'", line=lineno)
    try:
        d = int(dline[2:])
    except ValueError:
        raise ParseError(f"invalid dimension {dline[2:]!r}", line=lineno) from None
    if d < 1:
        raise ParseError(f"dimension must be positive, got {d}", line=lineno)

    pts = np.empty((d + 1, d + 1, d))
    for ci in range(d + 1):
        lineno, head = take(f"'colour {ci + 1}'")
        if head != f"colour {ci + 1}":
            raise ParseError(f"expected 'colour {ci + 1}', got {head!r}", line=lineno)
        for pi in range(d + 1):
            lineno, row = take("coordinate row")
            toks = row.split()
            if len(toks) != d:
                raise ParseError(
                    f"expected {d} coordinates, got {len(toks)}", line=lineno
                )
            try:
                pts[ci, pi] = [float(t) for t in toks]
            except ValueError:
                raise ParseError(f"non-numeric coordinate in {row!r}", line=lineno) from None
    if pos != len(lines):
        raise ParseError("trailing content after last colour block", line=lines[pos][0])

    norms = np.linalg.norm(pts, axis=2)
    normalized = bool(np.abs(norms - 1.0).max() <= UNIT_TOL)
    return ColourConfiguration(points=pts, normalized=normalized)


def write_configuration(config: ColourConfiguration, comment: str | None = None) -> str:
    """Serialize to the v1 text format (17 significant digits, lossless)."""
    out = []
    if comment:
        for line in comment.splitlines():
            out.append(f"# {line}")
    out.append(MAGIC)
    out.append(f"d={config.d}")
    for ci in range(config.d + 1):
        out.append(f"colour {ci + 1}")
        for pi in range(config.d + 1):
            out.append(" ".join(f"{x:.17g}" for x in config.points[ci, pi]))
    return "\n".join(out) + "\n"


def load_configuration(path) -> ColourConfiguration:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_configuration(fh.read())


def save_configuration(config: ColourConfiguration, path, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_configuration(config, comment=comment))
