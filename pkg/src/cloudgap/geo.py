"""Geographic primitives: points, great-circle distance, polygons, admin units.

Coordinates are geographic lat/lon degrees (WGS84-style, treated spherically).
Polygon operations work in the lat/lon plane, which is adequate at the
administrative-unit extents this package targets. Polygons spanning the
antimeridian are not supported.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestionError

EARTH_RADIUS_KM = 6371.0088  # IUGG mean radius
MAX_GC_DISTANCE_KM = math.pi * EARTH_RADIUS_KM  # antipodal bound, ~20015.1 km


@dataclass(frozen=True)
class GeoPoint:
    """Point with latitude in [-90, 90] and longitude normalized to [-180, 180)."""

    lat: float
    lon: float

    def __post_init__(self):
        if not math.isfinite(self.lat) or not math.isfinite(self.lon):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon < 180.0:
            lon = math.fmod(self.lon + 180.0, 360.0)
            if lon < 0.0:
                lon += 360.0
            object.__setattr__(self, "lon", lon - 180.0)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371.0088 km."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon) - math.radians(a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    # h can exceed 1 by an ulp near the antipode; clamp before asin
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def _validate_ring(ring: list[GeoPoint], context: str) -> None:
    if len(ring) < 4:
        raise IngestionError(f"{context}: ring has {len(ring)} points, need at least 4 (closed)")
    first, last = ring[0], ring[-1]
    if first.lat != last.lat or first.lon != last.lon:
        raise IngestionError(f"{context}: ring is not closed (first point != last point)")


@dataclass
class Polygon:
    """A single outer ring plus optional holes; rings are closed point lists."""

    outer: list[GeoPoint]
    holes: list[list[GeoPoint]] = field(default_factory=list)

    def validate(self, context: str = "polygon") -> None:
        _validate_ring(self.outer, context)
        for i, hole in enumerate(self.holes):
            _validate_ring(hole, f"{context} hole {i}")


@dataclass
class AdminUnit:
    """Administrative unit: polygon boundary plus attributes filled during analysis.

    ``population`` comes from a zonal sum, ``wealth`` from a zonal mean of a
    lights raster (or another income measure), and ``rep_point`` from the
    population-weighted centroid.
    """

    id: str
    name: str
    country: str
    continent: str
    boundary: list[Polygon]
    population: float = 0.0
    wealth: float = math.nan
    rep_point: GeoPoint | None = None

    def validate(self) -> None:
        if not self.boundary:
            raise IngestionError(f"unit {self.id}: no boundary polygons")
        for i, poly in enumerate(self.boundary):
            poly.validate(f"unit {self.id} polygon {i}")
        if self.population < 0:
            raise ValueError(f"unit {self.id}: negative population")

    def bbox(self) -> tuple[float, float, float, float]:
        """(min_lat, min_lon, max_lat, max_lon) over all outer rings."""
        lats = [p.lat for poly in self.boundary for p in poly.outer]
        lons = [p.lon for poly in self.boundary for p in poly.outer]
        return min(lats), min(lons), max(lats), max(lons)


@dataclass
class CensusTract:
    tract_id: str
    location: GeoPoint
    population: float
    median_income: float

    def __post_init__(self):
        if self.population < 0:
            raise ValueError(f"tract {self.tract_id}: negative population")
        if self.median_income < 0:
            raise ValueError(f"tract {self.tract_id}: negative income")


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    # Collinear (zero cross product) and within the segment's bounding box.
    cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon)
    if cross != 0.0:
        return False
    return (
        min(a.lat, b.lat) <= p.lat <= max(a.lat, b.lat)
        and min(a.lon, b.lon) <= p.lon <= max(a.lon, b.lon)
    )


def _ray_cast(p: GeoPoint, ring: list[GeoPoint]) -> bool:
    """Even-odd rule with a ray toward +lon; half-open vertex rule."""
    inside = False
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if (a.lat > p.lat) != (b.lat > p.lat):
            lon_cross = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon)
            if p.lon < lon_cross:
                inside = not inside
    return inside


def point_in_region(p: GeoPoint, unit: AdminUnit) -> bool:
    """True iff p is inside the unit's boundary.

    Inside means: within some polygon's outer ring and not within one of its
    holes. Points exactly on any ring edge count as inside.
    """
    for poly in unit.boundary:
        rings = [poly.outer] + poly.holes
        for ring in rings:
            if len(ring) < 4 or ring[0] != ring[-1]:
                raise IngestionError(f"unit {unit.id}: malformed ring")
            for i in range(len(ring) - 1):
                if _on_segment(p, ring[i], ring[i + 1]):
                    return True
        if _ray_cast(p, poly.outer) and not any(_ray_cast(p, h) for h in poly.holes):
            return True
    return False


def polygon_centroid(unit: AdminUnit) -> GeoPoint:
    """Unweighted area centroid of the boundary (shoelace, holes subtracted)."""
    area_sum = 0.0
    lat_sum = 0.0
    lon_sum = 0.0

    def accumulate(ring: list[GeoPoint], sign: float):
        nonlocal area_sum, lat_sum, lon_sum
        for i in range(len(ring) - 1):
            a, b = ring[i], ring[i + 1]
            cross = a.lon * b.lat - b.lon * a.lat
            area_sum += sign * cross
            lon_sum += sign * (a.lon + b.lon) * cross
            lat_sum += sign * (a.lat + b.lat) * cross

    for poly in unit.boundary:
        accumulate(poly.outer, 1.0)
        for hole in poly.holes:
            accumulate(hole, -1.0)

    if area_sum == 0.0:
        # Degenerate boundary: fall back to the mean of outer vertices.
        pts = [pt for poly in unit.boundary for pt in poly.outer[:-1]]
        return GeoPoint(
            sum(p.lat for p in pts) / len(pts), sum(p.lon for p in pts) / len(pts)
        )
    return GeoPoint(lat_sum / (3.0 * area_sum), lon_sum / (3.0 * area_sum))


def _ring_from_positions(positions, context: str) -> list[GeoPoint]:
    ring = []
    for k, pos in enumerate(positions):
        if not isinstance(pos, (list, tuple)) or len(pos) < 2:
            raise IngestionError(f"{context}: position {k} is not a [lon, lat] pair")
        try:
            ring.append(GeoPoint(float(pos[1]), float(pos[0])))
        except (TypeError, ValueError) as e:
            raise IngestionError(f"{context}: position {k}: {e}") from e
    _validate_ring(ring, context)
    return ring


def load_admin_units(path: str | Path) -> list[AdminUnit]:
    """Load admin units from a GeoJSON FeatureCollection.

    Each feature needs properties id, name, country, continent and a Polygon
    or MultiPolygon geometry (positions are [lon, lat]).
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path}: not valid JSON: {e}") from e
    if doc.get("type") != "FeatureCollection" or "features" not in doc:
        raise IngestionError(f"{path}: expected a GeoJSON FeatureCollection")

    units = []
    seen_ids = set()
    for idx, feature in enumerate(doc["features"]):
        props = feature.get("properties") or {}
        missing = [k for k in ("id", "name", "country", "continent") if k not in props]
        if missing:
            raise IngestionError(f"{path}: feature {idx}: missing properties {missing}")
        uid = str(props["id"])
        if uid in seen_ids:
            raise IngestionError(f"{path}: duplicate unit id {uid!r}")
        seen_ids.add(uid)

        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        ctx = f"{path}: feature {idx} ({uid})"
        if gtype == "Polygon":
            poly_coords = [coords]
        elif gtype == "MultiPolygon":
            poly_coords = coords
        else:
            raise IngestionError(f"{ctx}: unsupported geometry type {gtype!r}")

        polygons = []
        for rings in poly_coords:
            if not rings:
                raise IngestionError(f"{ctx}: polygon with no rings")
            outer = _ring_from_positions(rings[0], f"{ctx} outer ring")
            holes = [
                _ring_from_positions(r, f"{ctx} hole {j}") for j, r in enumerate(rings[1:])
            ]
            polygons.append(Polygon(outer, holes))

        units.append(
            AdminUnit(
                id=uid,
                name=str(props["name"]),
                country=str(props["country"]),
                continent=str(props["continent"]),
                boundary=polygons,
            )
        )
    return units


def load_tracts(path: str | Path) -> list[CensusTract]:
    """Load census tracts from CSV with header tract_id,lat,lon,population,median_income."""
    path = Path(path)
    required = ["tract_id", "lat", "lon", "population", "median_income"]
    tracts = []
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                tracts.append(
                    CensusTract(
                        tract_id=row["tract_id"],
                        location=GeoPoint(float(row["lat"]), float(row["lon"])),
                        population=float(row["population"]),
                        median_income=float(row["median_income"]),
                    )
                )
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: {e}") from e
    return tracts
