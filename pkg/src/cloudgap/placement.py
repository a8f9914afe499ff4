"""Candidate-city scoring: population coverage vs. fairness, pareto front.

Each candidate is scored as a hypothetical single-datacenter deployment:
coverage is the population within sigma of the city, and the concentration
index comes from that one-city deployment over all units. An optional
baseline catalog (existing regions) can be included in the index.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .divide import Datacenter
from .errors import IngestionError, NoAccessError
from .fairness import AccessUnit, _cai_among, concentration_curve, concentration_index
from .geo import GeoPoint, haversine_km


@dataclass
class CandidateCity:
    name: str
    location: GeoPoint
    city_population: float
    coverage: float | None = None
    ci_if_selected: float | None = None
    evaluable: bool = True


@dataclass
class ParetoResult:
    candidates: list[CandidateCity]
    front: list[CandidateCity]
    objective: str = "maximize coverage, minimize ci"


def load_cities(path: str | Path) -> list[CandidateCity]:
    """Load candidate cities from CSV with header name,lat,lon,population."""
    path = Path(path)
    cities = []
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in ("name", "lat", "lon", "population") if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                cities.append(
                    CandidateCity(
                        name=row["name"],
                        location=GeoPoint(float(row["lat"]), float(row["lon"])),
                        city_population=float(row["population"]),
                    )
                )
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: {e}") from e
    return cities


def filter_candidates(cities: list[CandidateCity], sigma: float) -> list[CandidateCity]:
    """Greedy spacing filter in population-rank order.

    Scanning from the most populated city down, a city is kept only if it is
    at least sigma km from every previously kept city. Duplicates of a kept
    city are therefore dropped automatically.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    ranked = sorted(cities, key=lambda c: -c.city_population)
    kept: list[CandidateCity] = []
    for city in ranked:
        if all(haversine_km(city.location, k.location) >= sigma for k in kept):
            kept.append(city)
    return kept


def _city_as_datacenter(city: CandidateCity) -> Datacenter:
    return Datacenter(
        id=f"candidate:{city.name}",
        name=city.name,
        city=city.name,
        country="",
        continent="",
        location=city.location,
        dc_class="local_zone",
        launch_date=None,
    )


def evaluate_candidate(
    city: CandidateCity,
    units: list[AccessUnit],
    sigma: float,
    baseline: list[Datacenter] | None = None,
) -> tuple[float, float]:
    """(coverage, ci) for a hypothetical deployment at this city.

    Coverage counts population within sigma of the city alone; the index is
    computed over the city plus any baseline entries. Raises NoAccessError
    when nothing is reachable (the candidate is unevaluable).
    """
    if not units:
        raise ValueError("need at least one unit")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    coverage = math.fsum(
        u.population for u in units if haversine_km(city.location, u.rep_point) <= sigma
    )
    deployment = [_city_as_datacenter(city)] + list(baseline or [])
    filled = [replace(u, cai=_cai_among(u, deployment, sigma)) for u in units]
    curve = concentration_curve(filled)  # raises NoAccessError on zero mass
    return coverage, concentration_index(curve)


def evaluate_candidates(
    cities: list[CandidateCity],
    units: list[AccessUnit],
    sigma: float,
    baseline: list[Datacenter] | None = None,
) -> list[CandidateCity]:
    """Score every candidate, flagging those with no reachable population."""
    out = []
    for city in cities:
        scored = CandidateCity(city.name, city.location, city.city_population)
        try:
            scored.coverage, scored.ci_if_selected = evaluate_candidate(
                city, units, sigma, baseline
            )
        except NoAccessError:
            scored.coverage = 0.0
            scored.ci_if_selected = None
            scored.evaluable = False
        out.append(scored)
    return out


def _dominates(a: CandidateCity, b: CandidateCity) -> bool:
    """Weak pareto dominance: at least as good on both axes, better on one."""
    return (
        a.coverage >= b.coverage
        and a.ci_if_selected <= b.ci_if_selected
        and (a.coverage > b.coverage or a.ci_if_selected < b.ci_if_selected)
    )


def pareto_front(candidates: list[CandidateCity]) -> ParetoResult:
    """Non-dominated subset under (coverage up, ci down).

    Unevaluable candidates never join the front. The front is ordered by
    (coverage desc, ci asc, name) for reproducible output.
    """
    scored = [c for c in candidates if c.evaluable]
    for c in scored:
        if c.coverage is None or c.ci_if_selected is None:
            raise ValueError(f"candidate {c.name}: not evaluated")
    front = [
        c for c in scored if not any(_dominates(other, c) for other in scored if other is not c)
    ]
    front.sort(key=lambda c: (-c.coverage, c.ci_if_selected, c.name))
    return ParetoResult(candidates=list(candidates), front=front)
