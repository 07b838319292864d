"""Cluster-then-route coverage solver (`hpp`).

Pipeline: k-means over the node set, cluster repair so every cluster can form
a polygon, then one boustrophedon sweep per cluster anchored at an antipodal
pair of the cluster hull. Every antipodal pair is tried in both orientations
and the candidate with the shortest depot-to-depot length wins.

Solution file format (version 1)::

    farm-solution v1
    instance: <instance name>
    algorithm: <text>
    k: <int>
    seed: <int>
    total: <float>
    max: <float>
    routes: <k>
    route <r>: length <float> nodes <i0> <i1> ...

Stored lengths are advisory; consumers must recompute them from coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import (
    EPS,
    AntipodalPair,
    ConvexPolygon,
    Point,
    antipodal_pairs,
    convex_hull,
    dist,
)
from .instances import FarmInstance, FormatError, VersionError
from .rng import make_rng

KMEANS_TOL = 1e-9
KMEANS_MAX_ITER = 100
MIN_CLUSTER_SIZE = 3
SOLUTION_HEADER = "farm-solution v1"


class RepairImpossible(RuntimeError):
    """Clusters cannot all reach 3 non-collinear members."""


class InvalidK(ValueError):
    """Requested route count is infeasible for the instance."""


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]
    centroids: tuple[Point, ...]
    k: int

    def __post_init__(self) -> None:
        if self.k < 1 or len(self.centroids) != self.k:
            raise ValueError("centroid count must equal k")
        counts = [0] * self.k
        for lab in self.labels:
            if not 0 <= lab < self.k:
                raise ValueError(f"label {lab} out of range for k={self.k}")
            counts[lab] += 1
        if any(c == 0 for c in counts):
            raise ValueError("every cluster must be non-empty")

    def members(self, c: int) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == c]


@dataclass(frozen=True)
class Route:
    node_order: tuple[int, ...]
    start_anchor: int
    end_anchor: int
    length: float

    def __post_init__(self) -> None:
        if not self.node_order:
            raise ValueError("route must visit at least one node")
        if self.start_anchor != self.node_order[0] or self.end_anchor != self.node_order[-1]:
            raise ValueError("anchors must be the first and last route nodes")
        if not (math.isfinite(self.length) and self.length >= 0):
            raise ValueError("route length must be finite and non-negative")


@dataclass(frozen=True)
class Solution:
    instance_ref: str
    algorithm: str
    k: int
    seed: int
    routes: tuple[Route, ...]

    def __post_init__(self) -> None:
        if len(self.routes) != self.k:
            raise ValueError(f"expected {self.k} routes, got {len(self.routes)}")

    def total_length(self) -> float:
        return sum(r.length for r in self.routes)

    def max_length(self) -> float:
        return max(r.length for r in self.routes)


def route_length(depot: Point, pts: Sequence[Point]) -> float:
    """Depot-to-depot length of a route visiting ``pts`` in order."""
    if not pts:
        return 0.0
    total = dist(depot, pts[0])
    for a, b in zip(pts, pts[1:]):
        total += dist(a, b)
    return total + dist(pts[-1], depot)


# ---------------------------------------------------------------------------
# clustering


def _assign_labels(pts: np.ndarray, cents: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels (ties to the lowest index), reseeding empty clusters.

    An empty cluster's centroid is moved onto the point farthest from its
    nearest centroid, then labels are recomputed.
    """
    k = len(cents)
    cents = cents.copy()
    for _ in range(2 * k + 1):
        d2 = ((pts[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        sizes = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            return labels, cents
        farthest = int(d2.min(axis=1).argmax())
        cents[int(empty[0])] = pts[farthest]
    raise RuntimeError("could not repair empty clusters")


def _kmeans_pp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(pts)
    chosen = [int(rng.integers(n))]
    d2 = ((pts - pts[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            nxt = next(i for i in range(n) if i not in chosen)
        else:
            r = rng.random() * total
            nxt = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            nxt = min(nxt, n - 1)
        chosen.append(nxt)
        d2 = np.minimum(d2, ((pts - pts[nxt]) ** 2).sum(axis=1))
    return pts[chosen].copy()


def kmeans(nodes: Sequence[Point], k: int, seed: int) -> ClusterAssignment:
    """Lloyd's algorithm from k-means++ seeding; deterministic for a fixed seed.

    Stops when the largest centroid movement falls below 1e-9 or after 100
    iterations; returned labels are exactly nearest-centroid with respect to
    the returned centroids.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if len(nodes) < k:
        raise ValueError(f"need at least k={k} nodes, got {len(nodes)}")
    pts = np.array([[p.x, p.y] for p in nodes], dtype=float)
    rng = make_rng(seed)
    cents = _kmeans_pp_init(pts, k, rng)
    for _ in range(KMEANS_MAX_ITER):
        labels, cents = _assign_labels(pts, cents)
        new_cents = np.vstack([pts[labels == c].mean(axis=0) for c in range(k)])
        if float(np.abs(new_cents - cents).max()) < KMEANS_TOL:
            break
        cents = new_cents
    else:
        labels, cents = _assign_labels(pts, cents)
    return ClusterAssignment(
        labels=tuple(int(x) for x in labels),
        centroids=tuple(Point(float(x), float(y)) for x, y in cents),
        k=k,
    )


def _collinear(pts: list[Point]) -> bool:
    if len(pts) < 3:
        return True
    a = pts[0]
    b = next((p for p in pts[1:] if dist(a, p) > EPS), None)
    if b is None:
        return True
    base = dist(a, b)  # deviation from the line, as a distance
    return all(
        abs((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) <= EPS * base
        for p in pts
    )


def _cluster_valid(member_pts: list[Point]) -> bool:
    return len(member_pts) >= MIN_CLUSTER_SIZE and not _collinear(member_pts)


def repair_clusters(assign: ClusterAssignment, nodes: Sequence[Point]) -> ClusterAssignment:
    """Grow invalid clusters until each has >= 3 non-collinear members.

    While some cluster is invalid it absorbs the node nearest to its centroid,
    drawn from clusters with more than 3 members; if none can spare a node the
    most populous cluster donates. A node whose removal would leave its donor
    invalid is only taken when no safe candidate exists, which keeps the
    greedy loop from ping-ponging a node between two small clusters.
    Centroids are recomputed after each move.
    """
    k = assign.k
    n = len(nodes)
    if n < MIN_CLUSTER_SIZE * k:
        raise RepairImpossible(
            f"{n} nodes cannot give {k} clusters {MIN_CLUSTER_SIZE} members each"
        )
    labels = list(assign.labels)

    def member_ids(c: int) -> list[int]:
        return [i for i, lab in enumerate(labels) if lab == c]

    def centroid(ids: list[int]) -> Point:
        return Point(
            sum(nodes[i].x for i in ids) / len(ids),
            sum(nodes[i].y for i in ids) / len(ids),
        )

    for _ in range(10 * n):
        invalid = next(
            (c for c in range(k) if not _cluster_valid([nodes[i] for i in member_ids(c)])),
            None,
        )
        if invalid is None:
            break
        target = centroid(member_ids(invalid))
        members = {c: member_ids(c) for c in range(k)}
        donors = [c for c in range(k) if c != invalid and len(members[c]) > MIN_CLUSTER_SIZE]
        if not donors:
            biggest = max(
                (c for c in range(k) if c != invalid and len(members[c]) > 1),
                key=lambda c: (len(members[c]), -c),
                default=None,
            )
            if biggest is None:
                raise RepairImpossible("no cluster can donate a node")
            donors = [biggest]
        safe, unsafe = [], []
        for c in donors:
            for i in members[c]:
                rest = [nodes[m] for m in members[c] if m != i]
                (safe if _cluster_valid(rest) else unsafe).append(i)
        candidates = safe or unsafe
        moved = min(candidates, key=lambda i: (dist(nodes[i], target), i))
        labels[moved] = invalid
    else:
        raise RepairImpossible("cluster repair did not converge")

    centroids = tuple(centroid(member_ids(c)) for c in range(k))
    return ClusterAssignment(labels=tuple(labels), centroids=centroids, k=k)


def estimate_spacing(nodes: Sequence[Point]) -> float:
    """Median nearest-neighbour distance; recovers the pitch of a thinned grid."""
    if len(nodes) < 2:
        raise ValueError("need at least 2 nodes to estimate spacing")
    pts = np.array([[p.x, p.y] for p in nodes], dtype=float)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return float(np.median(np.sqrt(d2.min(axis=1))))


# ---------------------------------------------------------------------------
# serpentine routing


def _lane_sweep(
    pts: Sequence[Point], pos_p: int, pos_q: int, spacing: float, stack_axis: str
) -> list[int]:
    """Boustrophedon visit order from p to q with lanes stacked along one axis.

    Nodes are bucketed into lanes by their quantized offset from p along the
    stacking axis and each lane is swept along the other axis, alternating
    direction per visited lane. The sweep runs from p's lane toward q's lane;
    lanes behind p are taken right after p's lane, lanes beyond q right before
    q's lane, and q's own lane is reordered so q comes last.
    """
    if stack_axis == "y":
        sc = lambda pt: pt.y  # noqa: E731 - tiny accessors
        tc = lambda pt: pt.x  # noqa: E731
    else:
        sc = lambda pt: pt.x  # noqa: E731
        tc = lambda pt: pt.y  # noqa: E731

    p, q = pts[pos_p], pts[pos_q]
    lam = {pos: round((sc(pt) - sc(p)) / spacing) for pos, pt in enumerate(pts)}
    lanes: dict[int, list[int]] = {}
    for pos in range(len(pts)):
        if pos in (pos_p, pos_q):
            continue
        lanes.setdefault(lam[pos], []).append(pos)

    lp, lq = lam[pos_p], lam[pos_q]
    all_lams = sorted(set(lam.values()))
    if lq >= lp:
        rear = [v for v in all_lams if v < lp][::-1]
        mids = [v for v in all_lams if lp < v < lq]
        beyond = [v for v in all_lams if v > lq][::-1]
    else:
        rear = [v for v in all_lams if v > lp]
        mids = [v for v in all_lams if lq < v < lp][::-1]
        beyond = [v for v in all_lams if v < lq]
    visit = [lp] + rear + mids + beyond + ([lq] if lq != lp else [])

    order = [pos_p]
    start_members = sorted(lanes.get(lp, []), key=lambda i: (abs(tc(pts[i]) - tc(p)), tc(pts[i]), i))
    order.extend(start_members)
    base_dir = 1
    if len(start_members) >= 1 and tc(pts[start_members[-1]]) < tc(p):
        base_dir = -1

    for step, lane in enumerate(visit[1:], start=1):
        members = lanes.get(lane, [])
        if not members:
            continue
        if lane == lq and lq != lp:
            members = sorted(members, key=lambda i: (-abs(tc(pts[i]) - tc(q)), tc(pts[i]), i))
        else:
            ascending = (base_dir * (-1) ** step) > 0
            members = sorted(members, key=lambda i: (tc(pts[i]), i), reverse=not ascending)
        order.extend(members)
    order.append(pos_q)
    return order


def _internal_length(pts: Sequence[Point], order: Sequence[int]) -> float:
    return sum(dist(pts[a], pts[b]) for a, b in zip(order, order[1:]))


def serpentine_route(
    pts: Sequence[Point],
    hull: ConvexPolygon,
    pair: AntipodalPair,
    orientation: str,
    spacing: float,
) -> list[int]:
    """Back-and-forth visit order over ``pts`` anchored at an antipodal pair.

    ``orientation`` is ``"forward"`` (start at vertex ``pair.i``) or
    ``"reverse"``. Lane stacking along y (grid rows) and along x are both
    tried and the shorter sweep wins, ties going to rows. Returns positions
    into ``pts``; the first is the start anchor, the last the end anchor.
    """
    if orientation not in ("forward", "reverse"):
        raise ValueError(f"orientation must be 'forward' or 'reverse', got {orientation!r}")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    p_pt = hull.vertices[pair.i]
    q_pt = hull.vertices[pair.j]
    if orientation == "reverse":
        p_pt, q_pt = q_pt, p_pt
    try:
        pos_p = next(i for i, pt in enumerate(pts) if pt == p_pt)
        pos_q = next(i for i, pt in enumerate(pts) if pt == q_pt and i != pos_p)
    except StopIteration:
        raise ValueError("anchor pair endpoints must be cluster nodes") from None

    best_order: list[int] | None = None
    best_len = math.inf
    for stack_axis in ("y", "x"):
        order = _lane_sweep(pts, pos_p, pos_q, spacing, stack_axis)
        length = _internal_length(pts, order)
        if length < best_len - 1e-12:
            best_order, best_len = order, length
    assert best_order is not None
    return best_order


def route_cluster(
    members: Sequence[tuple[int, Point]], depot: Point, spacing: float
) -> Route:
    """Best serpentine route for one cluster, depot legs included in the score.

    Every antipodal pair of the cluster hull is tried in both orientations;
    ties go to the lexicographically smallest (pair.i, pair.j, orientation).
    """
    ids = [i for i, _ in members]
    pts = [pt for _, pt in members]
    hull = convex_hull(pts)
    best: tuple[float, list[int]] | None = None
    for pair in antipodal_pairs(hull):
        for orientation in ("forward", "reverse"):
            order = serpentine_route(pts, hull, pair, orientation, spacing)
            length = route_length(depot, [pts[t] for t in order])
            if best is None or length < best[0] - 1e-12:
                best = (length, order)
    assert best is not None
    node_order = tuple(ids[t] for t in best[1])
    return Route(
        node_order=node_order,
        start_anchor=node_order[0],
        end_anchor=node_order[-1],
        length=best[0],
    )


def hpp_solve(inst: FarmInstance, k: int = 5, seed: int = 0) -> Solution:
    """Cluster the instance into ``k`` groups and route each as a serpentine."""
    n = len(inst.nodes)
    if k < 1 or MIN_CLUSTER_SIZE * k > n:
        raise InvalidK(
            f"k={k} is infeasible: {n} nodes support between 1 and "
            f"{n // MIN_CLUSTER_SIZE} routes of {MIN_CLUSTER_SIZE}+ nodes each"
        )
    assign = kmeans(inst.nodes, k, seed)
    assign = repair_clusters(assign, inst.nodes)
    routes = []
    for c in range(k):
        members = [(i, inst.nodes[i]) for i in assign.members(c)]
        routes.append(route_cluster(members, inst.depot, inst.spacing))
    return Solution(
        instance_ref=inst.name,
        algorithm="hpp",
        k=k,
        seed=seed,
        routes=tuple(routes),
    )


# ---------------------------------------------------------------------------
# solution files


def _fmt(x: float) -> str:
    return format(x, ".17g")


def save_solution(sol: Solution, path: Path | str) -> None:
    path = Path(path)
    lines = [
        SOLUTION_HEADER,
        f"instance: {sol.instance_ref}",
        f"algorithm: {sol.algorithm}",
        f"k: {sol.k}",
        f"seed: {sol.seed}",
        f"total: {_fmt(sol.total_length())}",
        f"max: {_fmt(sol.max_length())}",
        f"routes: {len(sol.routes)}",
    ]
    for r, route in enumerate(sol.routes):
        idx = " ".join(str(i) for i in route.node_order)
        lines.append(f"route {r}: length {_fmt(route.length)} nodes {idx}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_solution(path: Path | str) -> Solution:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    if not lines[0].startswith("farm-solution v"):
        raise FormatError(f"{path}: line 1: not a solution file")
    if lines[0] != SOLUTION_HEADER:
        raise VersionError(f"{path}: line 1: unsupported format version {lines[0]!r}")

    def field(lineno: int, name: str) -> str:
        if lineno >= len(lines):
            raise FormatError(f"{path}: line {lineno + 1}: missing field '{name}'")
        prefix = f"{name}: "
        if not lines[lineno].startswith(prefix):
            raise FormatError(
                f"{path}: line {lineno + 1}: expected field '{name}', got {lines[lineno]!r}"
            )
        return lines[lineno][len(prefix):]

    try:
        instance_ref = field(1, "instance")
        algorithm = field(2, "algorithm")
        k = int(field(3, "k"))
        seed = int(field(4, "seed"))
        float(field(5, "total"))
        float(field(6, "max"))
        n_routes = int(field(7, "routes"))
    except ValueError as exc:
        raise FormatError(f"{path}: malformed header field: {exc}") from exc

    routes = []
    for r in range(n_routes):
        lineno = 8 + r
        if lineno >= len(lines):
            raise FormatError(f"{path}: line {lineno + 1}: missing route {r}")
        line = lines[lineno]
        prefix = f"route {r}: length "
        if not line.startswith(prefix) or " nodes " not in line:
            raise FormatError(f"{path}: line {lineno + 1}: malformed route line {line!r}")
        length_part, nodes_part = line[len(prefix):].split(" nodes ", 1)
        try:
            length = float(length_part)
            node_order = tuple(int(t) for t in nodes_part.split())
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno + 1}: {exc}") from exc
        if not node_order:
            raise FormatError(f"{path}: line {lineno + 1}: route {r} has no nodes")
        routes.append(
            Route(
                node_order=node_order,
                start_anchor=node_order[0],
                end_anchor=node_order[-1],
                length=length,
            )
        )
    return Solution(
        instance_ref=instance_ref, algorithm=algorithm, k=k, seed=seed, routes=tuple(routes)
    )
