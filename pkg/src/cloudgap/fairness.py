"""Wealth-ranked fairness of datacenter access.

The access score of a population unit counts the datacenters within sigma km
of its representative point. Units are ranked by wealth; the concentration
curve plots cumulative population share against cumulative access share, and
the concentration index is twice the area between the curve and the line of
equality (positive when access concentrates in wealthy units).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .divide import DatacenterCatalog, Datacenter, filter_description, _check_launch_order
from .errors import IngestionError, NoAccessError
from .geo import GeoPoint, haversine_km

DEFAULT_SIGMA_KM = 70.0


@dataclass(frozen=True)
class AccessUnit:
    """Population group with a wealth attribute and an access count."""

    id: str
    rep_point: GeoPoint
    population: float
    wealth: float
    cai: int | None = None

    def __post_init__(self):
        if not self.population > 0:
            raise ValueError(f"unit {self.id}: population must be positive")
        if not math.isfinite(self.wealth):
            raise ValueError(f"unit {self.id}: wealth must be finite")


@dataclass
class ConcentrationCurve:
    """Breakpoints (cumulative population fraction, cumulative access fraction).

    Starts at (0, 0) and ends at (1, 1); x is strictly increasing.
    """

    points: list[tuple[float, float]]


@dataclass
class ConcentrationResult:
    ci: float
    curve: ConcentrationCurve
    sigma: float
    catalog_filter: str


def load_access_units(path: str | Path) -> list[AccessUnit]:
    """Load access units from CSV with header id,lat,lon,population,wealth."""
    path = Path(path)
    required = ["id", "lat", "lon", "population", "wealth"]
    units = []
    seen = set()
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                unit = AccessUnit(
                    id=row["id"],
                    rep_point=GeoPoint(float(row["lat"]), float(row["lon"])),
                    population=float(row["population"]),
                    wealth=float(row["wealth"]),
                )
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: {e}") from e
            if unit.id in seen:
                raise IngestionError(f"{path}: line {lineno}: duplicate unit id {unit.id!r}")
            seen.add(unit.id)
            units.append(unit)
    return units


def cai(
    unit: AccessUnit,
    catalog: DatacenterCatalog,
    classes: set[str] | None = None,
    as_of: date | None = None,
    sigma: float = DEFAULT_SIGMA_KM,
    include_announced: bool = False,
) -> int:
    """Count of filtered datacenters within sigma km of the unit."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    entries = catalog.filter(classes, as_of, include_announced)
    return _cai_among(unit, entries, sigma)


def _cai_among(unit: AccessUnit, entries: list[Datacenter], sigma: float) -> int:
    return sum(1 for e in entries if haversine_km(unit.rep_point, e.location) <= sigma)


def fill_cai(
    units: list[AccessUnit],
    catalog: DatacenterCatalog,
    classes: set[str] | None = None,
    as_of: date | None = None,
    sigma: float = DEFAULT_SIGMA_KM,
    include_announced: bool = False,
) -> list[AccessUnit]:
    """New unit list with cai computed against the filtered catalog."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    entries = catalog.filter(classes, as_of, include_announced)
    return [replace(u, cai=_cai_among(u, entries, sigma)) for u in units]


def concentration_curve(units: list[AccessUnit]) -> ConcentrationCurve:
    """Cumulative access share vs. cumulative population share, wealth-ranked.

    Units are sorted ascending by wealth (ties by id). The access mass of a
    unit is cai * population. A zero total access mass leaves the curve (and
    the index) undefined.
    """
    if not units:
        raise ValueError("need at least one unit")
    for u in units:
        if u.cai is None:
            raise ValueError(f"unit {u.id}: cai not filled")
        if u.cai < 0:
            raise ValueError(f"unit {u.id}: negative cai")
    ranked = sorted(units, key=lambda u: (u.wealth, u.id))
    pops = np.array([u.population for u in ranked], dtype=np.float64)
    masses = np.array([u.cai * u.population for u in ranked], dtype=np.float64)
    cum_pop = np.cumsum(pops)
    cum_mass = np.cumsum(masses)
    if cum_mass[-1] <= 0.0:
        raise NoAccessError("no access anywhere: total access mass is zero")
    xs = cum_pop / cum_pop[-1]
    ys = cum_mass / cum_mass[-1]
    points = [(0.0, 0.0)] + list(zip(xs.tolist(), ys.tolist()))
    return ConcentrationCurve(points)


def concentration_index(curve: ConcentrationCurve) -> float:
    """Twice the area between the line of equality and the curve.

    Evaluated as the trapezoidal rule on the gap (x - y) so that a curve
    lying exactly on the equality line yields exactly 0. Algebraically equal
    to 1 - 2A with A the trapezoidal area under the curve.
    """
    pts = curve.points
    total = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        total += (x1 - x0) * ((x0 - y0) + (x1 - y1))
    return total


def concentration_result(
    units: list[AccessUnit],
    catalog: DatacenterCatalog,
    classes: set[str] | None = None,
    as_of: date | None = None,
    sigma: float = DEFAULT_SIGMA_KM,
    include_announced: bool = False,
) -> ConcentrationResult:
    """Fill cai, build the curve, and compute the index in one pass."""
    filled = fill_cai(units, catalog, classes, as_of, sigma, include_announced)
    curve = concentration_curve(filled)
    return ConcentrationResult(
        ci=concentration_index(curve),
        curve=curve,
        sigma=sigma,
        catalog_filter=filter_description(classes, as_of, include_announced),
    )


def ci_timeline(
    units: list[AccessUnit],
    catalog: DatacenterCatalog,
    launches: list[str],
    sigma: float = DEFAULT_SIGMA_KM,
) -> list[tuple[str, ConcentrationResult]]:
    """Concentration index after each cumulative launch, starting from regions."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    launch_entries = [catalog.get(dc_id) for dc_id in launches]
    _check_launch_order(launch_entries)

    active = [e for e in catalog if e.dc_class == "region"]
    steps: list[tuple[str, ConcentrationResult]] = []

    def snapshot(event: str):
        filled = [replace(u, cai=_cai_among(u, active, sigma)) for u in units]
        curve = concentration_curve(filled)
        steps.append(
            (
                event,
                ConcentrationResult(
                    ci=concentration_index(curve),
                    curve=curve,
                    sigma=sigma,
                    catalog_filter=f"timeline:{event}",
                ),
            )
        )

    snapshot("regions")
    for e in launch_entries:
        active.append(e)
        snapshot(e.id)
    return steps


def sigma_sweep(
    units: list[AccessUnit],
    catalog: DatacenterCatalog,
    sigmas: list[float],
    classes: set[str] | None = None,
    as_of: date | None = None,
    include_announced: bool = False,
) -> list[ConcentrationResult]:
    """One concentration result per sigma; sigmas must be positive ascending."""
    if not sigmas:
        raise ValueError("need at least one sigma")
    if any(s <= 0 for s in sigmas):
        raise ValueError("sigmas must be positive")
    if any(b <= a for a, b in zip(sigmas, sigmas[1:])):
        raise ValueError("sigmas must be strictly ascending")
    return [
        concentration_result(units, catalog, classes, as_of, s, include_announced)
        for s in sigmas
    ]
