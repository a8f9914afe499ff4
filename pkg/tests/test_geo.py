import json
import math

import numpy as np
import pytest

from cloudgap import AdminUnit, GeoPoint, Polygon, haversine_km, point_in_region
from cloudgap.errors import IngestionError
from cloudgap.geo import (
    EARTH_RADIUS_KM,
    load_admin_units,
    load_tracts,
    polygon_centroid,
)

NYC = GeoPoint(40.7128, -74.0060)
LA = GeoPoint(34.0522, -118.2437)
# Independent oracle value: spherical law of cosines with the same radius.
NYC_LA_KM = 3935.751690893986


def ring(*coords):
    return [GeoPoint(lat, lon) for lat, lon in coords]


def unit_square():
    return AdminUnit(
        id="sq",
        name="Square",
        country="X",
        continent="X",
        boundary=[Polygon(ring((0, 0), (0, 1), (1, 1), (1, 0), (0, 0)))],
    )


class TestGeoPoint:
    def test_lat_range_enforced(self):
        with pytest.raises(ValueError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(-90.5, 0.0)

    def test_lon_normalized_into_half_open_interval(self):
        assert GeoPoint(0.0, 180.0).lon == -180.0
        assert GeoPoint(0.0, 270.0).lon == -90.0
        assert GeoPoint(0.0, -190.0).lon == 170.0
        assert GeoPoint(0.0, -180.0).lon == -180.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            GeoPoint(float("nan"), 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, float("inf"))


class TestHaversine:
    def test_identity_is_zero(self):
        assert haversine_km(GeoPoint(0, 0), GeoPoint(0, 0)) == 0.0
        assert haversine_km(NYC, NYC) == 0.0

    def test_antipodal_analytic(self):
        d = haversine_km(GeoPoint(0, 0), GeoPoint(0, 180))
        assert d == pytest.approx(math.pi * EARTH_RADIUS_KM, abs=1e-6)

    def test_nyc_la_matches_independent_oracle(self):
        assert haversine_km(NYC, LA) == pytest.approx(NYC_LA_KM, rel=1e-9)

    def test_symmetric_and_bounded_on_random_pairs(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            a = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180))
            b = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180))
            d_ab = haversine_km(a, b)
            assert d_ab == haversine_km(b, a)
            assert 0.0 <= d_ab <= 20015.2


# Brute-force winding number used as the point-in-polygon oracle.
def _is_left(a, b, p):
    return (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat)


def winding_number(p, ring_pts):
    wn = 0
    for a, b in zip(ring_pts, ring_pts[1:]):
        if a.lat <= p.lat:
            if b.lat > p.lat and _is_left(a, b, p) > 0:
                wn += 1
        elif b.lat <= p.lat and _is_left(a, b, p) < 0:
            wn -= 1
    return wn


def winding_inside(p, unit):
    for poly in unit.boundary:
        if winding_number(p, poly.outer) != 0 and all(
            winding_number(p, h) == 0 for h in poly.holes
        ):
            return True
    return False


class TestPointInRegion:
    def test_centroid_inside(self):
        assert point_in_region(GeoPoint(0.5, 0.5), unit_square())

    def test_far_point_outside(self):
        assert not point_in_region(GeoPoint(10, 10), unit_square())

    def test_boundary_counts_as_inside(self):
        sq = unit_square()
        assert point_in_region(GeoPoint(0.0, 0.5), sq)  # edge midpoint
        assert point_in_region(GeoPoint(0.0, 0.0), sq)  # vertex
        assert point_in_region(GeoPoint(0.5, 1.0), sq)  # right edge

    def test_hole_excluded_but_hole_edge_inside(self):
        donut = AdminUnit(
            id="donut",
            name="Donut",
            country="X",
            continent="X",
            boundary=[
                Polygon(
                    ring((0, 0), (0, 4), (4, 4), (4, 0), (0, 0)),
                    holes=[ring((1, 1), (1, 3), (3, 3), (3, 1), (1, 1))],
                )
            ],
        )
        assert not point_in_region(GeoPoint(2, 2), donut)
        assert point_in_region(GeoPoint(0.5, 0.5), donut)
        assert point_in_region(GeoPoint(1.0, 2.0), donut)  # on the hole edge

    def test_malformed_ring_raises(self):
        bad = AdminUnit(
            id="bad",
            name="Bad",
            country="X",
            continent="X",
            boundary=[Polygon(ring((0, 0), (0, 1), (1, 1), (1, 0)))],  # unclosed
        )
        with pytest.raises(IngestionError):
            point_in_region(GeoPoint(0.5, 0.5), bad)

    def test_agrees_with_winding_oracle_on_random_points(self):
        concave = AdminUnit(
            id="L",
            name="L-shape",
            country="X",
            continent="X",
            boundary=[
                Polygon(ring((0, 0), (0, 3), (1, 3), (1, 1), (3, 1), (3, 0), (0, 0)))
            ],
        )
        donut = AdminUnit(
            id="donut",
            name="Donut",
            country="X",
            continent="X",
            boundary=[
                Polygon(
                    ring((0, 0), (0, 4), (4, 4), (4, 0), (0, 0)),
                    holes=[ring((1, 1), (1, 3), (3, 3), (3, 1), (1, 1))],
                )
            ],
        )
        two_part = AdminUnit(
            id="two",
            name="Two islands",
            country="X",
            continent="X",
            boundary=[
                Polygon(ring((0, 0), (0, 1), (1, 1), (1, 0), (0, 0))),
                Polygon(ring((2, 2), (2, 3), (3, 3), (3, 2), (2, 2))),
            ],
        )
        rng = np.random.default_rng(7)
        for unit in (unit_square(), concave, donut, two_part):
            for _ in range(1200):
                p = GeoPoint(rng.uniform(-1, 5), rng.uniform(-1, 5))
                assert point_in_region(p, unit) == winding_inside(p, unit)


class TestPolygonCentroid:
    def test_square_centroid(self):
        c = polygon_centroid(unit_square())
        assert c.lat == pytest.approx(0.5)
        assert c.lon == pytest.approx(0.5)


class TestLoaders:
    def test_load_admin_units_fixture(self, data_dir):
        units = load_admin_units(data_dir / "boundaries.geojson")
        assert [u.id for u in units] == ["west", "east"]
        assert units[0].continent == "NA"
        assert point_in_region(GeoPoint(1.0, 1.0), units[0])
        assert not point_in_region(GeoPoint(1.0, 3.0), units[0])

    def test_missing_property_fails(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"id": "a", "name": "A", "country": "X"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]],
                    },
                }
            ],
        }
        path = tmp_path / "b.geojson"
        path.write_text(json.dumps(doc))
        with pytest.raises(IngestionError, match="continent"):
            load_admin_units(path)

    def test_unclosed_ring_fails(self, tmp_path):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"id": "a", "name": "A", "country": "X", "continent": "X"},
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1]]],
                    },
                }
            ],
        }
        path = tmp_path / "b.geojson"
        path.write_text(json.dumps(doc))
        with pytest.raises(IngestionError, match="not closed"):
            load_admin_units(path)

    def test_duplicate_id_fails(self, tmp_path):
        feature = {
            "type": "Feature",
            "properties": {"id": "a", "name": "A", "country": "X", "continent": "X"},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]],
            },
        }
        doc = {"type": "FeatureCollection", "features": [feature, feature]}
        path = tmp_path / "b.geojson"
        path.write_text(json.dumps(doc))
        with pytest.raises(IngestionError, match="duplicate"):
            load_admin_units(path)

    def test_load_tracts_fixture(self, data_dir):
        tracts = load_tracts(data_dir / "tracts.csv")
        assert len(tracts) == 8
        assert tracts[0].tract_id == "t1"
        assert tracts[0].population == 900
        assert tracts[0].median_income == 120000

    def test_load_tracts_bad_number(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("tract_id,lat,lon,population,median_income\nt1,abc,0,1,1\n")
        with pytest.raises(IngestionError, match="line 2"):
            load_tracts(path)

    def test_load_tracts_missing_column(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("tract_id,lat,lon,population\nt1,0,0,1\n")
        with pytest.raises(IngestionError, match="median_income"):
            load_tracts(path)
