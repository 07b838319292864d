"""Benchmark harness: batch solving, the three metrics, CSV and table reports.

Per instance the harness records total distance, maximum route length, and
the wall time of the solve call alone (monotonic clock; file parsing and
report writing are excluded). Per (size, algorithm) it reports means plus the
batch time of a sequential solving pass.

CSV schema: ``size,algorithm,mean_total,mean_max,batch_time_s,instances,mode``
with one row per (size, algorithm); means carry full precision. ``mode`` is
``sequential``, ``parallel`` (metrics computed on worker processes; the batch
time still comes from a sequential pass), or ``skipped`` for the exact oracle
above its size limits.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import baseline, hpp
from .instances import FarmInstance, load, load_manifest

ALGORITHMS = ("hpp", "minmax-ls", "exact")


class InvalidSolution(ValueError):
    """Solution does not validate against its instance."""


@dataclass(frozen=True)
class InstanceMetrics:
    instance: str
    algorithm: str
    total_distance: float
    max_route_length: float
    route_lengths: tuple[float, ...]
    solve_time: float


@dataclass(frozen=True)
class ReportRow:
    size: int
    algorithm: str
    mean_total: float | None
    mean_max: float | None
    batch_time_s: float | None
    instance_count: int
    mode: str


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[ReportRow, ...]
    k: int
    seed: int


def score(inst: FarmInstance, sol: hpp.Solution, solve_time: float = 0.0) -> InstanceMetrics:
    """Recompute all route lengths from coordinates; stored lengths are ignored.

    Raises InvalidSolution unless the routes partition the instance's node
    indices into exactly ``sol.k`` routes.
    """
    n = len(inst.nodes)
    if len(sol.routes) != sol.k:
        raise InvalidSolution(f"expected {sol.k} routes, found {len(sol.routes)}")
    seen: dict[int, int] = {}
    for r, route in enumerate(sol.routes):
        for idx in route.node_order:
            if not 0 <= idx < n:
                raise InvalidSolution(f"route {r} references node {idx}, instance has {n}")
            if idx in seen:
                raise InvalidSolution(
                    f"node {idx} appears in routes {seen[idx]} and {r}"
                )
            seen[idx] = r
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen.keys())
        raise InvalidSolution(f"nodes not covered by any route: {missing[:10]}")

    lengths = tuple(
        hpp.route_length(inst.depot, [inst.nodes[i] for i in route.node_order])
        for route in sol.routes
    )
    return InstanceMetrics(
        instance=inst.name,
        algorithm=sol.algorithm,
        total_distance=sum(lengths),
        max_route_length=max(lengths),
        route_lengths=lengths,
        solve_time=solve_time,
    )


def solve_with(
    algorithm: str,
    inst: FarmInstance,
    k: int,
    seed: int,
    budget: baseline.SolverBudget | None = None,
) -> hpp.Solution:
    """Dispatch one solve; algorithm is one of ``hpp``, ``minmax-ls``, ``exact``."""
    if algorithm == "hpp":
        return hpp.hpp_solve(inst, k=k, seed=seed)
    if algorithm == "minmax-ls":
        return baseline.minmax_local_search(inst, k=k, seed=seed, budget=budget)
    if algorithm == "exact":
        return baseline.exact_minmax(inst, k=k)
    raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")


def _solve_task(args) -> hpp.Solution:
    algorithm, inst, k, seed, budget = args
    try:
        return solve_with(algorithm, inst, k, seed, budget)
    except Exception as exc:
        raise RuntimeError(
            f"solver {algorithm!r} failed on instance {inst.name}: {exc}"
        ) from exc


def run_benchmark(
    manifest: Path | str,
    algorithms: list[str],
    k: int = 5,
    seed: int = 0,
    budget: baseline.SolverBudget | None = None,
    jobs: int = 1,
) -> BenchmarkReport:
    """Solve every manifest instance with every algorithm and aggregate means.

    The exact oracle is skipped (marked row) for sizes above its limits. A
    solver failure aborts the whole batch, naming the failing instance.
    """
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    entries = load_manifest(manifest)
    by_size: dict[int, list] = {}
    for e in entries:
        by_size.setdefault(e.size, []).append(e)

    def solve_named(algorithm: str, inst: FarmInstance) -> hpp.Solution:
        try:
            return solve_with(algorithm, inst, k, seed, budget)
        except Exception as exc:
            raise RuntimeError(
                f"solver {algorithm!r} failed on instance {inst.name}: {exc}"
            ) from exc

    rows: list[ReportRow] = []
    for size in sorted(by_size):
        batch = by_size[size]
        instances = [load(e.path) for e in batch]
        for algorithm in algorithms:
            if algorithm == "exact" and (
                size > baseline.EXACT_MAX_NODES or k > baseline.EXACT_MAX_ROUTES
            ):
                rows.append(
                    ReportRow(size, algorithm, None, None, None, len(batch), "skipped")
                )
                continue
            mode = "parallel" if jobs > 1 else "sequential"
            if jobs > 1:
                tasks = [(algorithm, inst, k, seed, budget) for inst in instances]
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    solutions = list(pool.map(_solve_task, tasks))
                # The headline batch time always comes from a sequential pass.
                t0 = time.perf_counter()
                for inst in instances:
                    solve_named(algorithm, inst)
                batch_time = time.perf_counter() - t0
                times = [0.0] * len(instances)
            else:
                solutions = []
                times = []
                t0 = time.perf_counter()
                for inst in instances:
                    t1 = time.perf_counter()
                    solutions.append(solve_named(algorithm, inst))
                    times.append(time.perf_counter() - t1)
                batch_time = time.perf_counter() - t0
            metrics = [
                score(i, s, solve_time=t) for i, s, t in zip(instances, solutions, times)
            ]
            mean_total = sum(m.total_distance for m in metrics) / len(metrics)
            mean_max = sum(m.max_route_length for m in metrics) / len(metrics)
            rows.append(
                ReportRow(size, algorithm, mean_total, mean_max, batch_time, len(batch), mode)
            )
    return BenchmarkReport(rows=tuple(rows), k=k, seed=seed)


CSV_HEADER = "size,algorithm,mean_total,mean_max,batch_time_s,instances,mode"


def write_csv(report: BenchmarkReport, path: Path | str) -> None:
    lines = [CSV_HEADER]
    for r in report.rows:
        mt = "" if r.mean_total is None else format(r.mean_total, ".17g")
        mm = "" if r.mean_max is None else format(r.mean_max, ".17g")
        bt = "" if r.batch_time_s is None else format(r.batch_time_s, ".17g")
        lines.append(f"{r.size},{r.algorithm},{mt},{mm},{bt},{r.instance_count},{r.mode}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_table(report: BenchmarkReport) -> str:
    """Aligned text table: one block per metric, sizes as rows, algorithms as columns."""
    algorithms = list(dict.fromkeys(r.algorithm for r in report.rows))
    sizes = sorted({r.size for r in report.rows})
    cell: dict[tuple[int, str], ReportRow] = {(r.size, r.algorithm): r for r in report.rows}
    counts = {r.instance_count for r in report.rows}
    count_label = f"{counts.pop()} instances" if len(counts) == 1 else "batch"

    def block(title: str, getter, fmt: str) -> list[str]:
        width = max(10, *(len(a) + 2 for a in algorithms))
        out = [title]
        header = f"{'nodes':>8}" + "".join(f"{a:>{width}}" for a in algorithms)
        out.append(header)
        for size in sizes:
            row = f"{size:>8}"
            for a in algorithms:
                r = cell.get((size, a))
                value = getter(r) if r is not None else None
                row += f"{'---' if value is None else format(value, fmt):>{width}}"
            out.append(row)
        out.append("")
        return out

    lines: list[str] = []
    lines += block("Average total distance", lambda r: r.mean_total, ".2f")
    lines += block("Average maximum route length", lambda r: r.mean_max, ".2f")
    lines += block(f"Run time for {count_label} (s)", lambda r: r.batch_time_s, ".2E")
    return "\n".join(lines)
