"""Synthetic farm instances: lattice node sets inside random convex outlines.

Instance file format (version 1), one text document per instance::

    farm-instance v1
    name: <text>
    seed: <uint64>
    spacing: <float>
    lattice_origin: <x> <y>
    depot: <x> <y>
    polygon: <vertex count>
    <x> <y>          (one vertex per line, CCW)
    nodes: <node count>
    <x> <y>          (one node per line, sorted by (y, x))

Floats are written with 17 significant digits so a load/save round trip is
bit-exact. Readers reject unknown versions. The depot line may be edited by
hand to override the generated depot.

Manifest file format (version 1)::

    farm-manifest v1
    <instance file name> <size> <seed>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import EPS, ConvexPolygon, Point, contains, convex_hull
from .rng import make_rng

FORMAT_VERSION = 1
INSTANCE_HEADER = "farm-instance v1"
MANIFEST_HEADER = "farm-manifest v1"
_BISECT_ITERATIONS = 64
_COUNT_SLACK = 2  # lattice counts are integer step functions of spacing


class GenerationFailure(RuntimeError):
    """Spacing bisection could not reach the target lattice count."""


class FormatError(ValueError):
    """Malformed instance or manifest file."""


class VersionError(FormatError):
    """File declares an unsupported format version."""


@dataclass(frozen=True)
class GeneratorConfig:
    node_count: int
    seed: int
    polygon_sample_count: int = 12
    deletion_fraction: float = 0.20

    def __post_init__(self) -> None:
        if self.node_count < 3:
            raise ValueError(f"node_count must be at least 3, got {self.node_count}")
        if self.polygon_sample_count < 3:
            raise ValueError("polygon_sample_count must be at least 3")
        if not 0.0 <= self.deletion_fraction < 1.0:
            raise ValueError("deletion_fraction must be in [0, 1)")


@dataclass(frozen=True)
class FarmInstance:
    name: str
    seed: int
    polygon: ConvexPolygon
    spacing: float
    lattice_origin: Point
    depot: Point
    nodes: tuple[Point, ...]


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    size: int
    seed: int


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _inside_mask(poly: ConvexPolygon, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    mask = np.ones(xs.shape, dtype=bool)
    for a, b in poly.edges():
        edge_len = math.hypot(b.x - a.x, b.y - a.y)
        cross = (b.x - a.x) * (ys - a.y) - (b.y - a.y) * (xs - a.x)
        mask &= cross >= -EPS * edge_len
    return mask


def _lattice_grid(poly: ConvexPolygon, origin: Point, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    xmin, ymin, xmax, ymax = poly.bounding_box()
    na = int(math.floor((xmax - origin.x) / spacing + 1e-12)) + 1
    nb = int(math.floor((ymax - origin.y) / spacing + 1e-12)) + 1
    xs = origin.x + spacing * np.arange(na)
    ys = origin.y + spacing * np.arange(nb)
    gx, gy = np.meshgrid(xs, ys)  # row-major flattening yields (y, x) order
    return gx.ravel(), gy.ravel()


def _lattice_count(poly: ConvexPolygon, origin: Point, spacing: float) -> int:
    gx, gy = _lattice_grid(poly, origin, spacing)
    return int(_inside_mask(poly, gx, gy).sum())


def _lattice_points(poly: ConvexPolygon, origin: Point, spacing: float) -> list[Point]:
    gx, gy = _lattice_grid(poly, origin, spacing)
    keep = _inside_mask(poly, gx, gy)
    return [Point(float(x), float(y)) for x, y in zip(gx[keep], gy[keep])]


def _choose_spacing(poly: ConvexPolygon, origin: Point, target: int, minimum: int) -> float:
    """Bisect the grid pitch until the polygon holds ~``target`` lattice points."""
    best: tuple[int, float, float] | None = None  # (|count-target|, -spacing, spacing)

    def visit(s: float) -> int:
        nonlocal best
        c = _lattice_count(poly, origin, s)
        if c >= minimum and abs(c - target) <= _COUNT_SLACK:
            key = (abs(c - target), -s, s)
            if best is None or key < best:
                best = key
        return c

    s0 = math.sqrt(max(poly.area(), 1e-12) / target)
    lo = hi = s0
    for _ in range(_BISECT_ITERATIONS):
        if visit(lo) >= target:
            break
        lo *= 0.5
    else:
        raise GenerationFailure(f"could not bracket {target} lattice points from below")
    for _ in range(_BISECT_ITERATIONS):
        if visit(hi) <= target:
            break
        hi *= 2.0
    else:
        raise GenerationFailure(f"could not bracket {target} lattice points from above")
    for _ in range(_BISECT_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if visit(mid) >= target:
            lo = mid
        else:
            hi = mid
    if best is None:
        raise GenerationFailure(
            f"bisection missed the target lattice count {target} (polygon too degenerate)"
        )
    return best[2]


def place_depot(inst: FarmInstance) -> FarmInstance:
    """Put the depot at the boundary edge midpoint with minimal y (ties: minimal x)."""
    mids = [
        Point((a.x + b.x) / 2.0, (a.y + b.y) / 2.0) for a, b in inst.polygon.edges()
    ]
    depot = min(mids, key=lambda p: (p.y, p.x))
    return replace(inst, depot=depot)


def generate(cfg: GeneratorConfig) -> FarmInstance:
    """Generate a deterministic instance: lattice fill of a random convex region.

    The polygon is the hull of ``polygon_sample_count`` uniform points in the
    unit square; the pitch is bisected so the lattice holds about
    ``node_count / (1 - deletion_fraction)`` in-polygon points, then random
    points are deleted until exactly ``node_count`` remain.
    """
    rng = make_rng(cfg.seed)
    samples = rng.random((cfg.polygon_sample_count, 2))
    polygon = convex_hull([Point(float(x), float(y)) for x, y in samples])
    xmin, ymin, _, _ = polygon.bounding_box()
    origin = Point(xmin, ymin)

    target = math.ceil(cfg.node_count / (1.0 - cfg.deletion_fraction))
    spacing = _choose_spacing(polygon, origin, target, cfg.node_count)
    lattice = _lattice_points(polygon, origin, spacing)

    order = rng.permutation(len(lattice))
    drop = set(order[: len(lattice) - cfg.node_count].tolist())
    nodes = tuple(p for idx, p in enumerate(lattice) if idx not in drop)

    inst = FarmInstance(
        name=f"farm-n{cfg.node_count}-s{cfg.seed}",
        seed=cfg.seed,
        polygon=polygon,
        spacing=spacing,
        lattice_origin=origin,
        depot=Point(0.0, 0.0),
        nodes=nodes,
    )
    return place_depot(inst)


def save(inst: FarmInstance, path: Path | str) -> None:
    path = Path(path)
    lines = [
        INSTANCE_HEADER,
        f"name: {inst.name}",
        f"seed: {inst.seed}",
        f"spacing: {_fmt(inst.spacing)}",
        f"lattice_origin: {_fmt(inst.lattice_origin.x)} {_fmt(inst.lattice_origin.y)}",
        f"depot: {_fmt(inst.depot.x)} {_fmt(inst.depot.y)}",
        f"polygon: {len(inst.polygon)}",
    ]
    lines += [f"{_fmt(p.x)} {_fmt(p.y)}" for p in inst.polygon]
    lines.append(f"nodes: {len(inst.nodes)}")
    lines += [f"{_fmt(p.x)} {_fmt(p.y)}" for p in inst.nodes]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class _LineReader:
    def __init__(self, path: Path):
        self.lines = path.read_text(encoding="utf-8").splitlines()
        self.pos = 0

    def next(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise FormatError(f"line {self.pos + 1}: unexpected end of file, expected {what}")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def field(self, name: str) -> str:
        line = self.next(f"field '{name}'")
        prefix = f"{name}: "
        if not line.startswith(prefix):
            raise FormatError(f"line {self.pos}: expected field '{name}', got {line!r}")
        return line[len(prefix):]

    def point(self, what: str) -> Point:
        line = self.next(what)
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {self.pos}: expected '<x> <y>' for {what}, got {line!r}")
        try:
            return Point(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise FormatError(f"line {self.pos}: {exc}") from exc


def load(path: Path | str) -> FarmInstance:
    """Load and validate an instance file; see the module docstring for the format."""
    path = Path(path)
    r = _LineReader(path)
    header = r.next("header")
    if not header.startswith("farm-instance v"):
        raise FormatError(f"line 1: not an instance file, got {header!r}")
    if header != INSTANCE_HEADER:
        raise VersionError(f"line 1: unsupported format version {header!r}")

    name = r.field("name")
    try:
        seed = int(r.field("seed"))
    except ValueError as exc:
        raise FormatError(f"line {r.pos}: seed must be an integer") from exc
    if seed < 0:
        raise FormatError(f"line {r.pos}: seed must be non-negative")
    try:
        spacing = float(r.field("spacing"))
    except ValueError as exc:
        raise FormatError(f"line {r.pos}: spacing must be a float") from exc
    if not (math.isfinite(spacing) and spacing > 0):
        raise FormatError(f"line {r.pos}: spacing must be positive and finite")

    origin_line = r.field("lattice_origin").split()
    if len(origin_line) != 2:
        raise FormatError(f"line {r.pos}: lattice_origin needs two coordinates")
    origin = Point(float(origin_line[0]), float(origin_line[1]))

    depot_line = r.field("depot").split()
    if len(depot_line) != 2:
        raise FormatError(f"line {r.pos}: depot needs two coordinates")
    try:
        depot = Point(float(depot_line[0]), float(depot_line[1]))
    except ValueError as exc:
        raise FormatError(f"line {r.pos}: {exc}") from exc

    try:
        n_poly = int(r.field("polygon"))
    except ValueError as exc:
        raise FormatError(f"line {r.pos}: polygon count must be an integer") from exc
    verts = [r.point(f"polygon vertex {i}") for i in range(n_poly)]
    try:
        polygon = ConvexPolygon(tuple(verts))
    except ValueError as exc:
        raise FormatError(f"polygon is invalid: {exc}") from exc

    try:
        n_nodes = int(r.field("nodes"))
    except ValueError as exc:
        raise FormatError(f"line {r.pos}: node count must be an integer") from exc
    nodes = []
    for i in range(n_nodes):
        p = r.point(f"node {i}")
        if not contains(polygon, p):
            raise FormatError(f"line {r.pos}: node {i} lies outside the polygon")
        nodes.append(p)
    if r.pos < len(r.lines) and any(line.strip() for line in r.lines[r.pos:]):
        raise FormatError(f"line {r.pos + 1}: trailing content after node list")

    return FarmInstance(
        name=name,
        seed=seed,
        polygon=polygon,
        spacing=spacing,
        lattice_origin=origin,
        depot=depot,
        nodes=tuple(nodes),
    )


def generate_dataset(
    sizes: list[int],
    count_per_size: int,
    base_seed: int,
    out_dir: Path | str,
) -> Path:
    """Write ``count_per_size`` instances per size plus a manifest; returns its path.

    Instance i of every size uses seed ``base_seed + i``.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if count_per_size < 1:
        raise ValueError("count_per_size must be at least 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = []
    for size in sizes:
        for i in range(count_per_size):
            seed = base_seed + i
            try:
                inst = generate(GeneratorConfig(node_count=size, seed=seed))
            except GenerationFailure as exc:
                raise GenerationFailure(f"size={size} seed={seed}: {exc}") from exc
            fname = f"{inst.name}.txt"
            save(inst, out_dir / fname)
            records.append(f"{fname} {size} {seed}")

    manifest = out_dir / "manifest.txt"
    manifest.write_text(MANIFEST_HEADER + "\n" + "\n".join(records) + "\n", encoding="utf-8")
    return manifest


def load_manifest(path: Path | str) -> list[ManifestEntry]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise FormatError(f"{path}: not a manifest file")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: line {lineno}: expected '<file> <size> <seed>'")
        try:
            entries.append(
                ManifestEntry(path=path.parent / parts[0], size=int(parts[1]), seed=int(parts[2]))
            )
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    return entries
