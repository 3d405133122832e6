"""Seven pivoting strategies over a shared solve driver.

a1/a3 move through nearest-point (minimum-norm) geometry, a2/a4 track an
algebraic boundary point, a5 is the hybrid of the two, a6 is a greedy
maximum-volume heuristic and a7 samples simplices at random. The driver
tests containment before every pivot, so a feasible initial simplex
solves in 0 iterations; every outcome carries the full visit trace.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    ColourConfiguration,
    ColourfulSimplex,
    first_points_simplex,
    normalize_configuration,
    unscale_weights,
)
from .errors import CfpError, NoCandidate, PointAtOrigin, QpFailure

ALGORITHMS = ("a1", "a2", "a3", "a4", "a5", "a6", "a7")

SEPARATION_TOL = 1e-12   # strict-side test for a6 candidate facets
FLIP_FLOP_WINDOW = 3


class SolveStatus(enum.Enum):
    SOLVED = "solved"
    CAP_EXCEEDED = "cap_exceeded"
    UNSTABLE = "unstable"


def default_cap(algorithm: str, d: int) -> int:
    """Iteration caps: generous for the robust algebraic algorithms,
    tighter where cycling or nearest-point cost dominates."""
    if algorithm in ("a2", "a4", "a7"):
        return 10 ** 6
    if algorithm == "a6":
        return 10 ** 5
    return 10 ** 4 * max(1, d)


@dataclass(eq=False)
class SolveOutcome:
    """Result of one solve call."""

    status: SolveStatus
    algorithm: str
    iterations: int
    certificate: tuple[ColourfulSimplex, np.ndarray] | None
    trace: tuple[ColourfulSimplex, ...]
    progress: tuple  # per trace entry: ||x|| or ||y|| when the pivot knows it
    time_total_s: float
    time_per_iteration_s: float
    degenerate_containments: int
    config_digest: str
    failure: str | None = None
    diagnostics: list | None = None

    def to_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "algorithm": self.algorithm,
            "iterations": self.iterations,
            "final_simplex": list(self.trace[-1].selection),
            "certificate_weights": (
                [float(w) for w in self.certificate[1]] if self.certificate else None
            ),
            "time_total_s": self.time_total_s,
            "degenerate_containments": self.degenerate_containments,
            "config_digest": self.config_digest,
        }
        if self.failure:
            out["failure"] = self.failure
        return out


class SolverState:
    """Mutable per-solve state shared by the pivot functions."""

    __slots__ = (
        "config", "simplex", "verts", "nearest", "y", "y_weights",
        "iteration", "trace", "progress", "rng", "diagnostics",
    )

    def __init__(self, config: ColourConfiguration, simplex: ColourfulSimplex,
                 rng: np.random.Generator | None = None, diagnostics: list | None = None):
        self.config = config
        self.simplex = simplex
        self.verts = np.array(config.vertices(simplex))
        self.nearest = None
        self.y = None
        self.y_weights = None
        self.iteration = 0
        self.trace = [simplex]
        self.progress: list = [None]
        self.rng = rng
        self.diagnostics = diagnostics

    def seed_y_at_vertex(self, colour_pos: int = 0) -> None:
        k = len(self.simplex.selection)
        self.y = self.verts[colour_pos].copy()
        w = np.zeros(k)
        w[colour_pos] = 1.0
        self.y_weights = w
        self.progress[-1] = float(np.linalg.norm(self.y))

    def swap(self, colour_pos: int, new_index: int) -> None:
        self.simplex = self.simplex.replaced(colour_pos, new_index)
        self.verts[colour_pos] = self.config.colour(colour_pos + 1)[new_index - 1]
        self.nearest = None

    def set_simplex(self, simplex: ColourfulSimplex) -> None:
        self.simplex = simplex
        self.verts = np.array(self.config.vertices(simplex))
        self.nearest = None

    def commit(self, progress=None) -> None:
        """Close one iteration: append the new simplex to the trace."""
        self.iteration += 1
        self.trace.append(self.simplex)
        self.progress.append(progress)

    def note(self, **kv) -> None:
        if self.diagnostics is not None:
            self.diagnostics.append({"iteration": self.iteration, **kv})


def initialize(config: ColourConfiguration, heuristic: str = "first") -> ColourfulSimplex:
    """Initial simplex: the first point of each colour, optionally improved
    by one multi-update step of a4 (whose boundary point is discarded)."""
    s0 = first_points_simplex(config.d)
    if heuristic == "first":
        return s0
    if heuristic != "a4":
        raise ValueError(f"unknown init heuristic {heuristic!r}")
    if kernels.barycentric_containment(config.vertices(s0)).contains:
        return s0
    state = SolverState(config, s0)
    state.seed_y_at_vertex(0)
    a4_pivot(state, config)
    return state.simplex


def _geometric_zero_positions(lam: np.ndarray) -> list[int]:
    return [i for i in range(len(lam)) if lam[i] <= kernels.WEIGHT_TOL]


def a1_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Single update: replace the lowest-index colour off the supporting
    face by the colour point minimizing the inner product with x."""
    res = kernels.nearest_point_simplex(state.verts)
    state.progress[-1] = res.distance
    zeros = _geometric_zero_positions(res.lam)
    if not zeros:
        raise QpFailure("nearest point has full support but containment failed")
    j = zeros[0]
    colour = config.colour(j + 1)
    t = kernels.min_inner_point(colour, res.x)
    state.note(direction_norm=res.distance,
               replacements=[(j, float(colour[t] @ res.x))])
    state.swap(j, t + 1)
    state.commit()
    return state


def a3_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Multi-update variant of a1: every colour off the supporting face is
    replaced in one iteration, all against the same x."""
    res = kernels.nearest_point_simplex(state.verts)
    state.progress[-1] = res.distance
    zeros = _geometric_zero_positions(res.lam)
    if not zeros:
        raise QpFailure("nearest point has full support but containment failed")
    repl = []
    for j in zeros:
        colour = config.colour(j + 1)
        t = kernels.min_inner_point(colour, res.x)
        repl.append((j, float(colour[t] @ res.x)))
        state.swap(j, t + 1)
    state.note(direction_norm=res.distance, replacements=repl)
    state.commit()
    return state


def _algebraic_zero_positions(state: SolverState) -> list[int]:
    zeros = [i for i in range(len(state.y_weights))
             if state.y_weights[i] <= kernels.WEIGHT_TOL]
    if not zeros:
        raise QpFailure("boundary point y lost its zero coordinate")
    return zeros


def _reenter(state: SolverState, p: np.ndarray) -> None:
    """Update y to the boundary point of the current simplex along p."""
    if float(np.linalg.norm(p)) <= kernels.TINY:
        # Origin reached: the new simplex contains it, which the driver
        # detects on the next containment check before y is read again.
        state.y = p.copy()
        state.y_weights = np.full(len(state.simplex.selection), np.nan)
        state.commit(0.0)
        return
    fs = kernels.facet_system(state.verts)
    _, y_new = kernels.ray_simplex_entry(fs, p)
    state.y = y_new
    state.y_weights = fs.weights(y_new)
    state.commit(float(np.linalg.norm(y_new)))


def a2_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Algebraic single update: pivot one zero-coordinate colour toward the
    segment projection of the origin, then re-enter the new simplex."""
    zeros = _algebraic_zero_positions(state)
    j = zeros[0]
    colour = config.colour(j + 1)
    v_idx = kernels.min_inner_point(colour, state.y)
    v = colour[v_idx]
    state.note(direction_norm=float(np.linalg.norm(state.y)),
               replacements=[(j, float(v @ state.y))])
    p, _ = kernels.project_onto_segment(state.y, v)
    state.swap(j, v_idx + 1)
    _reenter(state, p)
    return state


def a4_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Multi-update variant of a2: pivot every zero-coordinate colour in
    ascending order, tightening the boundary estimate by one segment
    projection per colour, then re-enter once."""
    zeros = _algebraic_zero_positions(state)
    y_est = state.y
    repl = []
    for j in zeros:
        colour = config.colour(j + 1)
        v_idx = kernels.min_inner_point(colour, y_est)
        v = colour[v_idx]
        repl.append((j, float(v @ y_est)))
        y_est, _ = kernels.project_onto_segment(y_est, v)
        state.swap(j, v_idx + 1)
    state.note(direction_norm=float(np.linalg.norm(state.y)), replacements=repl)
    _reenter(state, y_est)
    return state


def detect_flip_flop(trace, window: int = FLIP_FLOP_WINDOW) -> bool:
    """True iff the current simplex reappears among the previous `window`
    trace entries (catches the period-2 alternation with margin)."""
    if len(trace) < 2:
        return False
    current = trace[-1]
    start = max(0, len(trace) - 1 - window)
    return current in trace[start:-1]


def a5_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Hybrid: a4 steps, switching to one nearest-point multi-update when
    the trace shows the simplex being revisited, after which y is
    re-seeded toward the new nearest point."""
    if not detect_flip_flop(state.trace):
        return a4_pivot(state, config)
    res = kernels.nearest_point_simplex(state.verts)
    state.progress[-1] = res.distance
    zeros = _geometric_zero_positions(res.lam)
    if not zeros:
        raise QpFailure("nearest point has full support but containment failed")
    repl = []
    for j in zeros:
        colour = config.colour(j + 1)
        t = kernels.min_inner_point(colour, res.x)
        repl.append((j, float(colour[t] @ res.x)))
        state.swap(j, t + 1)
    state.note(direction_norm=res.distance, replacements=repl, rescue=True)
    res_new = kernels.nearest_point_simplex(state.verts)
    if res_new.distance <= kernels.RESIDUAL_TOL:
        state.y = res_new.x
        state.y_weights = res_new.lam
        state.commit(res_new.distance)
        return state
    fs = kernels.facet_system(state.verts)
    _, y_new = kernels.ray_simplex_entry(fs, res_new.x)
    state.y = y_new
    state.y_weights = fs.weights(y_new)
    state.commit(float(np.linalg.norm(y_new)))
    return state


def a6_pivot(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Greedy: among facets separating the origin from their opposite
    vertex, take the replacement point (origin side, furthest from the
    facet hyperplane) maximizing the new simplex volume."""
    fs = kernels.facet_system(state.verts)
    k = len(state.simplex.selection)
    best = None  # (volume, colour_pos, point_idx)
    for i in range(k):
        if fs.b[i] <= SEPARATION_TOL:
            continue  # facet does not separate the origin
        colour = config.colour(i + 1)
        margins = fs.b[i] - colour @ fs.A[i]
        t = int(np.argmax(margins))
        if margins[t] <= SEPARATION_TOL:
            continue  # no point of this colour on the origin side
        cand = state.verts.copy()
        cand[i] = colour[t]
        vol = kernels.simplex_volume(cand)
        if best is None or vol > best[0]:
            best = (vol, i, t)
    if best is None:
        raise NoCandidate("no separating facet admits an improving point")
    _, i, t = best
    state.note(replacements=[(i, float(best[0]))])
    state.swap(i, t + 1)
    state.commit()
    return state


def a7_sample(state: SolverState, config: ColourConfiguration) -> SolverState:
    """Guess and check: draw an independent uniform selection."""
    k = len(state.simplex.selection)
    u = state.rng.random(k)
    sel = tuple(min(int(x * k), k - 1) + 1 for x in u)
    state.set_simplex(ColourfulSimplex(sel))
    state.commit()
    return state


_PIVOTS = {
    "a1": a1_pivot,
    "a2": a2_pivot,
    "a3": a3_pivot,
    "a4": a4_pivot,
    "a5": a5_pivot,
    "a6": a6_pivot,
    "a7": a7_sample,
}

_ALGEBRAIC = ("a2", "a4", "a5")


def solve(
    config: ColourConfiguration,
    algorithm: str,
    cap: int | None = None,
    init_heuristic: str = "first",
    normalize: bool = True,
    seed: int | None = None,
    collect_diagnostics: bool = False,
) -> SolveOutcome:
    """Run one algorithm on one configuration.

    Containment is tested before every pivot; a feasible initial simplex
    is a 0-iteration solve. Kernel failures surface as UNSTABLE status,
    never as exceptions. Certificate weights refer to the caller's
    configuration even when normalization is on.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if cap is None:
        cap = default_cap(algorithm, config.d)
    if cap < 1:
        raise ValueError("cap must be >= 1")
    digest = config.digest()
    t0 = time.process_time()

    def outcome(status, state, certificate=None, failure=None):
        total = time.process_time() - t0
        iters = state.iteration
        return SolveOutcome(
            status=status,
            algorithm=algorithm,
            iterations=iters,
            certificate=certificate,
            trace=tuple(state.trace),
            progress=tuple(state.progress),
            time_total_s=total,
            time_per_iteration_s=total / iters if iters else 0.0,
            degenerate_containments=degenerate_count,
            config_digest=digest,
            failure=failure,
            diagnostics=state.diagnostics,
        )

    degenerate_count = 0
    work = config
    scale_record = None
    try:
        if normalize:
            work = normalize_configuration(config)
            scale_record = work.scale_record
        start = initialize(work, init_heuristic)
    except PointAtOrigin as exc:
        simplex, weights = exc.certificate
        state = SolverState(config, simplex)
        return outcome(SolveStatus.SOLVED, state, certificate=(simplex, weights))
    except CfpError as exc:
        state = SolverState(config, first_points_simplex(config.d))
        return outcome(SolveStatus.UNSTABLE, state, failure=str(exc))

    rng = None
    if algorithm == "a7":
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(0 if seed is None else int(seed)))
        )
    state = SolverState(work, start, rng=rng,
                        diagnostics=[] if collect_diagnostics else None)
    if algorithm in _ALGEBRAIC:
        state.seed_y_at_vertex(0)
    pivot = _PIVOTS[algorithm]

    while True:
        res = kernels.barycentric_containment(state.verts)
        if res.degenerate:
            degenerate_count += 1
        elif res.contains:
            lam = np.clip(res.weights, 0.0, None)
            lam /= lam.sum()
            if scale_record is not None:
                lam = unscale_weights(scale_record, state.simplex, lam)
            return outcome(SolveStatus.SOLVED, state,
                           certificate=(state.simplex, lam))
        if state.iteration >= cap:
            return outcome(SolveStatus.CAP_EXCEEDED, state)
        try:
            pivot(state, work)
        except CfpError as exc:
            return outcome(SolveStatus.UNSTABLE, state, failure=str(exc))
