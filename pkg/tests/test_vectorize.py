"""Boundary tracing, shape maps, rasterization round-trips, GeoJSON export."""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fieldseg.errors import DataError
from fieldseg.masks import LabelMap
from fieldseg.vectorize import (
    build_shape_map,
    connected_components,
    export_geojson,
    rasterize_polygon,
    rasterize_rings,
    rasterize_shape_map,
    ring_signed_area,
    trace_boundary,
)

from _oracles import even_odd_fill, flood_fill_components


def ring_is_simple(ring):
    """No repeated vertex except the closing one."""
    body = ring[:-1]
    return len(body) == len(set(body)) and ring[0] == ring[-1]


def all_rings(bitmap):
    exterior, holes = trace_boundary(bitmap)
    return [exterior] + holes


class TestConnectedComponents:
    def test_matches_flood_fill_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            labels = rng.integers(0, 4, (15, 15))
            comp, infos = connected_components(labels)
            oracle_comp, oracle_infos = flood_fill_components(labels)
            assert np.array_equal(comp, oracle_comp)
            assert [(i.component_id, i.label, i.area) for i in infos] == oracle_infos

    def test_same_label_disjoint_regions_split(self):
        labels = np.array([[1, 0, 1], [0, 0, 0], [1, 0, 1]])
        comp, infos = connected_components(labels)
        assert len(infos) == 4
        assert sorted(i.label for i in infos) == [1, 1, 1, 1]

    def test_diagonal_not_connected(self):
        labels = np.array([[2, 0], [0, 2]])
        _, infos = connected_components(labels)
        assert len(infos) == 2

    def test_background_ignored(self):
        comp, infos = connected_components(np.zeros((3, 3), dtype=int))
        assert not comp.any() and infos == []


class TestTraceBoundary:
    def test_single_pixel(self):
        bitmap = np.zeros((1, 1), dtype=bool)
        bitmap[0, 0] = True
        exterior, holes = trace_boundary(bitmap)
        assert exterior == [(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)]
        assert holes == []
        assert ring_signed_area(exterior) == 1

    def test_rectangle_merges_collinear(self):
        bitmap = np.ones((2, 3), dtype=bool)
        exterior, holes = trace_boundary(bitmap)
        assert exterior == [(0, 0), (0, 3), (2, 3), (2, 0), (0, 0)]
        assert ring_signed_area(exterior) == 6

    def test_donut_has_hole(self):
        bitmap = np.ones((3, 3), dtype=bool)
        bitmap[1, 1] = False
        exterior, holes = trace_boundary(bitmap)
        assert ring_signed_area(exterior) == 9
        assert len(holes) == 1
        assert ring_signed_area(holes[0]) == -1
        assert ring_signed_area(exterior) + ring_signed_area(holes[0]) == 8

    def test_pinch_corner_rings_stay_simple(self):
        # ring component with a diagonal self-contact at corner (2, 2) and an
        # enclosed single-pixel hole at (1, 1)
        bitmap = np.array([
            [1, 1, 1],
            [1, 0, 1],
            [1, 1, 0],
        ], dtype=bool)
        exterior, holes = trace_boundary(bitmap)
        for ring in [exterior] + holes:
            assert ring_is_simple(ring)
        assert len(holes) == 1
        assert ring_signed_area(exterior) + sum(map(ring_signed_area, holes)) == 7
        got = rasterize_rings([exterior] + holes, 3, 3)
        assert np.array_equal(got, bitmap)

    def test_signed_areas_sum_to_pixel_count(self):
        rng = np.random.default_rng(4)
        for _ in range(15):
            labels = (rng.uniform(size=(10, 10)) < 0.55).astype(int)
            comp, infos = connected_components(labels)
            for info in infos:
                bitmap = comp == info.component_id
                rings = all_rings(bitmap)
                assert sum(map(ring_signed_area, rings)) == info.area

    def test_exterior_positive_holes_negative(self):
        bitmap = np.ones((4, 5), dtype=bool)
        bitmap[1:3, 1:3] = False
        bitmap[2, 4] = True  # keep single component? already is
        exterior, holes = trace_boundary(bitmap)
        assert ring_signed_area(exterior) > 0
        assert all(ring_signed_area(h) < 0 for h in holes)

    def test_rings_start_at_min_corner(self):
        bitmap = np.zeros((4, 4), dtype=bool)
        bitmap[2:, 2:] = True
        exterior, _ = trace_boundary(bitmap)
        assert exterior[0] == min(exterior[:-1])

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            trace_boundary(np.zeros((2, 2), dtype=bool))

    @given(arrays(dtype=bool, shape=st.tuples(st.integers(1, 10), st.integers(1, 10))))
    @settings(max_examples=80, deadline=None)
    def test_every_component_round_trips(self, bitmap):
        comp, infos = flood_fill_components(bitmap.astype(np.int32))
        for cid, _, area in infos:
            component = comp == cid
            rings = all_rings(component)
            for ring in rings:
                assert ring_is_simple(ring)
            assert sum(map(ring_signed_area, rings)) == area
            # two independent fills agree with the source pixels
            assert np.array_equal(
                rasterize_rings(rings, *bitmap.shape), component)
            assert np.array_equal(
                even_odd_fill(rings, *bitmap.shape), component)


class TestShapeMap:
    def test_polygon_per_component(self):
        labels = np.array([
            [1, 1, 0, 2],
            [1, 1, 0, 2],
            [0, 0, 0, 0],
            [2, 0, 1, 1],
        ])
        sm = build_shape_map(LabelMap(labels=labels, image_id="img"))
        _, infos = connected_components(labels)
        assert len(sm.polygons) == len(infos)
        assert [p.component_id for p in sm.polygons] == [i.component_id for i in infos]
        assert [p.label for p in sm.polygons] == [i.label for i in infos]
        assert [p.area for p in sm.polygons] == [i.area for i in infos]

    def test_min_area_skips_small(self):
        labels = np.array([[1, 0, 2, 2]])
        sm = build_shape_map(labels, min_area=2)
        assert len(sm.polygons) == 1
        assert sm.polygons[0].label == 2

    def test_rasterize_round_trip(self):
        rng = np.random.default_rng(11)
        labels = rng.integers(0, 3, (20, 20)).astype(np.int32)
        sm = build_shape_map(LabelMap(labels=labels))
        assert np.array_equal(rasterize_shape_map(sm), labels)

    def test_hole_from_enclosed_label(self):
        labels = np.zeros((5, 5), dtype=int)
        labels[:] = 1
        labels[2, 2] = 2
        sm = build_shape_map(labels)
        outer = [p for p in sm.polygons if p.label == 1][0]
        assert len(outer.holes) == 1
        inner = [p for p in sm.polygons if p.label == 2][0]
        assert inner.holes == []
        assert np.array_equal(rasterize_polygon(inner, 5, 5), labels == 2)


class TestGeojson:
    def test_structure_and_coordinate_convention(self, tmp_path):
        labels = np.zeros((3, 3), dtype=int)
        labels[0, :2] = 4
        sm = build_shape_map(LabelMap(labels=labels, image_id="scene"))
        path = tmp_path / "shapes.geojson"
        doc = export_geojson(sm, path)
        on_disk = json.loads(path.read_text())
        assert on_disk == doc
        assert doc["type"] == "FeatureCollection"
        assert doc["image"] == {"id": "scene", "height": 3, "width": 3}
        feature = doc["features"][0]
        assert feature["properties"] == {"label": 4, "area": 2, "component_id": 1}
        # positions are [col, row]: the 1x2 strip spans cols 0..2, row 0..1
        assert feature["geometry"]["coordinates"][0] == \
            [[0, 0], [2, 0], [2, 1], [0, 1], [0, 0]]

    def test_vertex_counts_match(self):
        rng = np.random.default_rng(21)
        labels = rng.integers(0, 3, (12, 12)).astype(np.int32)
        sm = build_shape_map(labels)
        doc = export_geojson(sm)
        for poly, feature in zip(sm.polygons, doc["features"]):
            rings = feature["geometry"]["coordinates"]
            assert len(rings) == 1 + len(poly.holes)
            assert len(rings[0]) == len(poly.exterior)

    def test_transform_attached(self):
        labels = np.ones((2, 2), dtype=int)
        sm = build_shape_map(labels)
        sm.transform = (10.0, 0.0, 500.0, 0.0, -10.0, 800.0)
        doc = export_geojson(sm)
        assert doc["transform"] == [10.0, 0.0, 500.0, 0.0, -10.0, 800.0]
