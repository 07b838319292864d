import math

import numpy as np
import pytest

from pondroute.geometry import ConvexPolygon, Point, contains
from pondroute.instances import (
    FarmInstance,
    FormatError,
    GeneratorConfig,
    VersionError,
    _lattice_count,
    generate,
    generate_dataset,
    load,
    load_manifest,
    place_depot,
    save,
)


def make_instance(n: int, seed: int) -> FarmInstance:
    return generate(GeneratorConfig(node_count=n, seed=seed))


class TestGenerate:
    def test_exact_node_count_inside_polygon(self):
        inst = make_instance(100, 7)
        assert len(inst.nodes) == 100
        assert all(contains(inst.polygon, p) for p in inst.nodes)

    def test_nodes_on_lattice(self):
        inst = make_instance(100, 7)
        for p in inst.nodes:
            a = (p.x - inst.lattice_origin.x) / inst.spacing
            b = (p.y - inst.lattice_origin.y) / inst.spacing
            assert abs(a - round(a)) < 1e-9 and abs(b - round(b)) < 1e-9

    def test_canonical_node_order(self):
        inst = make_instance(150, 3)
        keys = [(p.y, p.x) for p in inst.nodes]
        assert keys == sorted(keys)

    def test_min_pairwise_distance_is_spacing(self):
        inst = make_instance(80, 5)
        pts = np.array([[p.x, p.y] for p in inst.nodes])
        d2 = ((pts[:, None] - pts[None, :]) ** 2).sum(-1)
        np.fill_diagonal(d2, np.inf)
        assert math.sqrt(d2.min()) >= inst.spacing - 1e-9

    def test_700_pre_deletion_count_bracket(self):
        # ceil(700 / 0.8) = 875; lattice counts are step functions, +-2 slack.
        inst = make_instance(700, 7)
        count = _lattice_count(inst.polygon, inst.lattice_origin, inst.spacing)
        assert 873 <= count <= 877

    def test_density_property(self):
        for seed in range(5):
            inst = make_instance(200, seed)
            count = _lattice_count(inst.polygon, inst.lattice_origin, inst.spacing)
            assert abs(count - math.ceil(200 / 0.8)) <= 2

    def test_deterministic_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        save(make_instance(60, 12), a)
        save(make_instance(60, 12), b)
        assert a.read_bytes() == b.read_bytes()

    def test_rejects_tiny_node_count(self):
        with pytest.raises(ValueError):
            GeneratorConfig(node_count=2, seed=0)


class TestPlaceDepot:
    @staticmethod
    def _with_polygon(poly: ConvexPolygon) -> FarmInstance:
        return FarmInstance(
            name="t", seed=0, polygon=poly, spacing=1.0,
            lattice_origin=Point(0, 0), depot=Point(0, 0), nodes=(Point(0.5, 0.5),),
        )

    def test_unit_square(self):
        poly = ConvexPolygon((Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)))
        assert place_depot(self._with_polygon(poly)).depot == Point(0.5, 0.0)

    def test_triangle_base_midpoint(self):
        poly = ConvexPolygon((Point(0, 0), Point(4, 0), Point(1, 3)))
        assert place_depot(self._with_polygon(poly)).depot == Point(2.0, 0.0)

    def test_rotated_square_tie_breaks_on_x(self):
        # Edge midpoints: (0.5,0.5), (1.5,0.5), (1.5,1.5), (0.5,1.5);
        # both bottom edges tie at y=0.5 and the smaller x wins.
        poly = ConvexPolygon((Point(1, 0), Point(2, 1), Point(1, 2), Point(0, 1)))
        assert place_depot(self._with_polygon(poly)).depot == Point(0.5, 0.5)

    def test_generated_depot_on_boundary(self):
        for seed in range(5):
            inst = make_instance(50, seed)
            edges = inst.polygon.edges()
            on_edge = any(
                abs(
                    (b.x - a.x) * (inst.depot.y - a.y)
                    - (b.y - a.y) * (inst.depot.x - a.x)
                )
                < 1e-9
                and min(a.x, b.x) - 1e-9 <= inst.depot.x <= max(a.x, b.x) + 1e-9
                for a, b in edges
            )
            assert on_edge


class TestSaveLoad:
    def test_round_trip_50_random_instances(self, tmp_path):
        for seed in range(50):
            inst = make_instance(20 + seed % 7, 100 + seed)
            path = tmp_path / f"i{seed}.txt"
            save(inst, path)
            assert load(path) == inst

    def test_truncated_file(self, tmp_path):
        inst = make_instance(20, 1)
        path = tmp_path / "i.txt"
        save(inst, path)
        text = path.read_text().splitlines()
        path.write_text("\n".join(text[: len(text) // 2]))
        with pytest.raises(FormatError):
            load(path)

    def test_node_outside_polygon_names_index(self, tmp_path):
        inst = make_instance(20, 1)
        path = tmp_path / "i.txt"
        save(inst, path)
        lines = path.read_text().splitlines()
        lines[-1] = "99 99"  # last node, far outside
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="node 19"):
            load(path)

    def test_unknown_version(self, tmp_path):
        inst = make_instance(20, 1)
        path = tmp_path / "i.txt"
        save(inst, path)
        lines = path.read_text().splitlines()
        lines[0] = "farm-instance v2"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(VersionError):
            load(path)

    def test_not_an_instance_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\nworld\n")
        with pytest.raises(FormatError):
            load(path)

    def test_depot_override_survives(self, tmp_path):
        inst = make_instance(20, 1)
        path = tmp_path / "i.txt"
        save(inst, path)
        lines = path.read_text().splitlines()
        assert lines[5].startswith("depot: ")
        lines[5] = "depot: 0.25 0.25"
        path.write_text("\n".join(lines) + "\n")
        assert load(path).depot == Point(0.25, 0.25)


class TestGenerateDataset:
    def test_writes_instances_and_manifest(self, tmp_path):
        manifest = generate_dataset([10], 1, base_seed=1, out_dir=tmp_path)
        entries = load_manifest(manifest)
        assert len(entries) == 1
        inst = load(entries[0].path)
        assert len(inst.nodes) == 10 and entries[0].size == 10

    def test_multiple_sizes_and_counts(self, tmp_path):
        manifest = generate_dataset([12, 20], 3, base_seed=5, out_dir=tmp_path)
        entries = load_manifest(manifest)
        assert len(entries) == 6
        assert sorted({e.size for e in entries}) == [12, 20]
        assert [e.seed for e in entries if e.size == 12] == [5, 6, 7]
        assert len(list(tmp_path.glob("*.txt"))) == 7  # 6 instances + manifest

    def test_manifest_order_stable(self, tmp_path):
        m1 = generate_dataset([10, 15], 2, 0, tmp_path / "a")
        m2 = generate_dataset([10, 15], 2, 0, tmp_path / "b")
        assert m1.read_text() == m2.read_text()
