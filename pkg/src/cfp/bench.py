"""Experiment harness: dimension ladder, shared instance sets, aggregation.

A plan names generators, algorithms, dimensions and per-dimension sample
counts. Every algorithm in a (generator, dimension) cell row consumes the
identical instance sequence, seeded from child streams of the master
seed, so cross-algorithm comparisons are paired. Aggregates are a
deterministic fold over trial indices at any parallelism level; only
measured times vary between runs.
"""

from __future__ import annotations

import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import CfpError
from .generators import (
    DEFAULT_EPSILON,
    DEFAULT_THETA,
    KINDS,
    GeneratorSpec,
    RngStream,
    generate,
)
from .solvers import ALGORITHMS, SolveStatus, default_cap, solve

DEFAULT_DIMS = tuple(3 * 2 ** n for n in range(8))  # 3, 6, ..., 384
NEAREST_POINT_ALGS = ("a1", "a3", "a5", "a6")
NEAREST_POINT_DIM_LIMIT = 96


def default_samples(d: int) -> int:
    if d <= 3:
        return 100_000
    if d <= 12:
        return 10_000
    if d <= 48:
        return 1_000
    return 100


@dataclass(frozen=True)
class ExperimentPlan:
    generators: tuple[str, ...] = ("g1",)
    algorithms: tuple[str, ...] = ALGORITHMS
    dims: tuple[int, ...] = DEFAULT_DIMS
    samples: dict = field(default_factory=dict)   # dim -> count
    caps: dict = field(default_factory=dict)      # algorithm -> cap
    master_seed: int = 0
    normalize: bool = True
    theta: float = DEFAULT_THETA
    epsilon: float = DEFAULT_EPSILON
    jobs: int = 1
    force: bool = False   # run nearest-point algorithms beyond d=96

    def __post_init__(self):
        for g in self.generators:
            if g not in KINDS:
                raise ValueError(f"unknown generator {g!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError("dims must be >= 2")
        for d, n in self.samples.items():
            if n < 1:
                raise ValueError(f"samples for d={d} must be positive")

    def samples_for(self, d: int) -> int:
        return int(self.samples.get(d, default_samples(d)))

    def cap_for(self, algorithm: str, d: int) -> int:
        return int(self.caps.get(algorithm, default_cap(algorithm, d)))

    def cell_algorithms(self, d: int) -> tuple[str, ...]:
        if self.force or d <= NEAREST_POINT_DIM_LIMIT:
            return self.algorithms
        return tuple(a for a in self.algorithms if a not in NEAREST_POINT_ALGS)

    def to_dict(self) -> dict:
        return {
            "generators": list(self.generators),
            "algorithms": list(self.algorithms),
            "dims": list(self.dims),
            "samples": {str(d): self.samples_for(d) for d in self.dims},
            "caps": {a: {str(d): self.cap_for(a, d) for d in self.dims}
                     for a in self.algorithms},
            "master_seed": self.master_seed,
            "normalize": self.normalize,
            "theta": self.theta,
            "epsilon": self.epsilon,
            "jobs": self.jobs,
            "force": self.force,
        }


@dataclass(eq=False)
class BenchRecord:
    generator: str
    algorithm: str
    d: int
    samples: int
    avg_iterations: float    # over solved trials only
    max_iterations: int
    avg_iteration_time_s: float
    unstable_count: int
    cap_exceeded_count: int

    def row(self) -> list:
        return [
            self.generator, self.algorithm, self.d, self.samples,
            self.avg_iterations, self.max_iterations,
            self.avg_iteration_time_s, self.unstable_count,
            self.cap_exceeded_count,
        ]


def _trial_seed(master: int, gen: str, d: int, trial: int) -> int:
    return RngStream(master).split("gen", gen, "d", d, "trial", trial).derive_seed()


def _solve_seed(master: int, gen: str, d: int, trial: int, alg: str) -> int:
    return RngStream(master).split(
        "gen", gen, "d", d, "trial", trial, "solve", alg
    ).derive_seed()


def run_trials(plan_dict: dict, gen: str, d: int, algs: tuple, start: int, stop: int):
    """Run trials [start, stop) of one cell row; returns per-trial results.

    Module-level so worker processes can import it.
    """
    plan = ExperimentPlan(**{**plan_dict, "samples": {int(k): v for k, v in plan_dict["samples"].items()}})
    results = []
    for trial in range(start, stop):
        seed = _trial_seed(plan.master_seed, gen, d, trial)
        spec = GeneratorSpec(kind=gen, d=d, theta=plan.theta,
                             epsilon=plan.epsilon, seed=seed)
        try:
            config = generate(spec)
        except CfpError as exc:
            results.append((trial, None, str(exc)))
            continue
        per_alg = {}
        for alg in algs:
            out = solve(
                config, alg,
                cap=plan.cap_for(alg, d),
                normalize=plan.normalize,
                seed=_solve_seed(plan.master_seed, gen, d, trial, alg),
            )
            per_alg[alg] = (out.status.value, out.iterations,
                            out.time_total_s, out.config_digest)
        results.append((trial, per_alg, None))
    return results


def _plan_payload(plan: ExperimentPlan) -> dict:
    return {
        "generators": plan.generators, "algorithms": plan.algorithms,
        "dims": plan.dims, "samples": {str(k): v for k, v in plan.samples.items()},
        "caps": dict(plan.caps), "master_seed": plan.master_seed,
        "normalize": plan.normalize, "theta": plan.theta,
        "epsilon": plan.epsilon, "jobs": plan.jobs, "force": plan.force,
    }


def run_experiment(plan: ExperimentPlan, progress=None) -> list[BenchRecord]:
    """Run every cell of the plan and aggregate.

    Instance generation failures count as unstable for every algorithm in
    the row; the run always completes.
    """
    records = []
    payload = _plan_payload(plan)
    for gen in plan.generators:
        for d in plan.dims:
            algs = plan.cell_algorithms(d)
            if not algs:
                continue
            n = plan.samples_for(d)
            chunk = max(1, min(500, math.ceil(n / max(1, 4 * plan.jobs))))
            spans = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
            if plan.jobs > 1 and len(spans) > 1:
                with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                    futures = [pool.submit(run_trials, payload, gen, d, algs, a, b)
                               for a, b in spans]
                    chunks = [f.result() for f in futures]
            else:
                chunks = [run_trials(payload, gen, d, algs, a, b) for a, b in spans]
            trials = [t for ch in chunks for t in ch]
            trials.sort(key=lambda t: t[0])

            stats = {a: {"iters": [], "time": 0.0, "iter_sum": 0,
                         "unstable": 0, "cap": 0} for a in algs}
            digests = set()
            for _, per_alg, err in trials:
                if per_alg is None:
                    for a in algs:
                        stats[a]["unstable"] += 1
                    continue
                for a in algs:
                    status, iters, dt, digest = per_alg[a]
                    digests.add(digest)
                    if status == SolveStatus.SOLVED.value:
                        stats[a]["iters"].append(iters)
                        if iters:
                            stats[a]["time"] += dt
                            stats[a]["iter_sum"] += iters
                    elif status == SolveStatus.CAP_EXCEEDED.value:
                        stats[a]["cap"] += 1
                    else:
                        stats[a]["unstable"] += 1
            for a in algs:
                s = stats[a]
                solved = s["iters"]
                records.append(BenchRecord(
                    generator=gen, algorithm=a, d=d, samples=n,
                    avg_iterations=float(np.mean(solved)) if solved else float("nan"),
                    max_iterations=int(max(solved)) if solved else 0,
                    avg_iteration_time_s=(s["time"] / s["iter_sum"])
                    if s["iter_sum"] else 0.0,
                    unstable_count=s["unstable"],
                    cap_exceeded_count=s["cap"],
                ))
            if progress is not None:
                progress(gen, d, n)
    records.sort(key=lambda r: (r.generator, r.d, r.algorithm))
    return records


CSV_HEADER = "generator,algorithm,d,samples,avg_iters,max_iters,avg_iter_time_s,unstable,cap_exceeded"


def format_csv(records: list[BenchRecord], include_times: bool = True) -> str:
    lines = [CSV_HEADER]
    for r in sorted(records, key=lambda r: (r.generator, r.d, r.algorithm)):
        avg = "nan" if math.isnan(r.avg_iterations) else repr(r.avg_iterations)
        t = repr(r.avg_iteration_time_s) if include_times else "0.0"
        lines.append(
            f"{r.generator},{r.algorithm},{r.d},{r.samples},{avg},"
            f"{r.max_iterations},{t},{r.unstable_count},{r.cap_exceeded_count}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(records: list[BenchRecord], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_csv(records))
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc


def emit_manifest(plan: ExperimentPlan, environment: dict, path,
                  started: str = "", finished: str = "") -> None:
    doc = {
        "plan": plan.to_dict(),
        "environment": environment,
        "library_version": __version__,
        "started": started,
        "finished": finished,
    }
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc


def environment_info() -> dict:
    import scipy

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def emit_plot_data(records: list[BenchRecord], outdir) -> None:
    """Per-generator (log2 d, log2 avg_iters) pairs for log-log plots."""
    import os

    by_gen: dict[str, list[BenchRecord]] = {}
    for r in records:
        by_gen.setdefault(r.generator, []).append(r)
    for gen, rows in by_gen.items():
        path = os.path.join(outdir, f"plot_{gen}.csv")
        lines = ["algorithm,log2_d,log2_avg_iters"]
        for r in sorted(rows, key=lambda r: (r.algorithm, r.d)):
            if math.isnan(r.avg_iterations) or r.avg_iterations <= 0:
                continue
            lines.append(
                f"{r.algorithm},{math.log2(r.d)!r},{math.log2(r.avg_iterations)!r}"
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _parse_samples_spec(text: str) -> dict:
    """'d3=1000,d6=100' or a bare integer applying to every dimension."""
    out: dict = {}
    text = text.strip()
    if not text:
        return out
    if "=" not in text:
        out["*"] = int(text)
        return out
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip().lower()
        if not key.startswith("d"):
            raise ValueError(f"bad samples spec entry {part!r}")
        out[int(key[1:])] = int(val)
    return out


def parse_plan(args, plan_file: str | None = None) -> ExperimentPlan:
    """Resolve a plan: CLI flags override file values override defaults."""
    base: dict = {}
    if plan_file:
        try:
            with open(plan_file, "r", encoding="utf-8") as fh:
                base = json.load(fh)
        except OSError as exc:
            raise OSError(f"reading {plan_file}: {exc}") from exc
        base.pop("comment", None)
        if "samples" in base:
            base["samples"] = {int(k): int(v) for k, v in base["samples"].items()}

    def pick(name, cli_value, default):
        if cli_value is not None:
            return cli_value
        return base.get(name, default)

    gens = pick("generators", getattr(args, "gens", None), ("g1",))
    algs = pick("algorithms", getattr(args, "algs", None), ALGORITHMS)
    dims = pick("dims", getattr(args, "dims", None), DEFAULT_DIMS)
    samples = dict(base.get("samples", {}))
    spec = getattr(args, "samples", None)
    if spec:
        parsed = _parse_samples_spec(spec)
        star = parsed.pop("*", None)
        samples.update(parsed)
        if star is not None:
            samples = {int(d): star for d in dims}
    caps = dict(base.get("caps", {}))
    if getattr(args, "cap", None) is not None:
        caps = {a: args.cap for a in algs}
    return ExperimentPlan(
        generators=tuple(gens),
        algorithms=tuple(algs),
        dims=tuple(int(d) for d in dims),
        samples={int(k): int(v) for k, v in samples.items()},
        caps=caps,
        master_seed=int(pick("master_seed", getattr(args, "seed", None), 0)),
        normalize=bool(pick("normalize", getattr(args, "normalize", None), True)),
        theta=float(pick("theta", getattr(args, "theta", None), DEFAULT_THETA)),
        epsilon=float(pick("epsilon", getattr(args, "eps", None), DEFAULT_EPSILON)),
        jobs=int(pick("jobs", getattr(args, "jobs", None), 1)),
        force=bool(pick("force", getattr(args, "force", None), False)),
    )


def run_and_emit(plan: ExperimentPlan, outdir, progress=None) -> list[BenchRecord]:
    import os

    os.makedirs(outdir, exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    records = run_experiment(plan, progress=progress)
    finished = time.strftime("%Y-%m-%dT%H:%M:%S")
    emit_csv(records, os.path.join(outdir, "results.csv"))
    emit_manifest(plan, environment_info(), os.path.join(outdir, "manifest.json"),
                  started=started, finished=finished)
    emit_plot_data(records, outdir)
    return records
