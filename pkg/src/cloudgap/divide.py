"""Distance-to-nearest-datacenter distributions and percentile-ratio inequality.

Distances are population-weighted: each group (census tract or admin unit)
contributes one sample at its nearest-datacenter distance, weighted by its
population. Percentiles use the lower-step convention (no interpolation),
which is exact on grouped, heavily tied data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import EmptyCatalogError, IngestionError
from .geo import GeoPoint, haversine_km

DC_CLASSES = ("region", "local_zone", "edge_pop")

# Ratios whose low percentile is below this are reported as infinite.
MIN_RATIO_DENOMINATOR_KM = 0.001


@dataclass(frozen=True)
class Datacenter:
    id: str
    name: str
    city: str
    country: str
    continent: str
    location: GeoPoint
    dc_class: str
    launch_date: date | None  # None means announced but not launched

    def __post_init__(self):
        if self.dc_class not in DC_CLASSES:
            raise ValueError(f"datacenter {self.id}: unknown class {self.dc_class!r}")

    @property
    def announced(self) -> bool:
        return self.launch_date is None


class DatacenterCatalog:
    """Datacenter entries with unique ids, filterable by class and launch date."""

    def __init__(self, entries: list[Datacenter]):
        seen = set()
        for e in entries:
            if e.id in seen:
                raise ValueError(f"duplicate datacenter id {e.id!r}")
            seen.add(e.id)
        self.entries = list(entries)
        self._by_id = {e.id: e for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, dc_id: str) -> Datacenter:
        try:
            return self._by_id[dc_id]
        except KeyError:
            raise KeyError(f"unknown datacenter id {dc_id!r}") from None

    def filter(
        self,
        classes: set[str] | None = None,
        as_of: date | None = None,
        include_announced: bool = False,
    ) -> list[Datacenter]:
        """Entries matching the class set and launch cutoff.

        With ``as_of`` set, only entries launched on or before that date
        qualify and announced entries never do. Without a cutoff, announced
        entries join only when explicitly requested.
        """
        if classes is not None:
            bad = set(classes) - set(DC_CLASSES)
            if bad:
                raise ValueError(f"unknown datacenter classes {sorted(bad)}")
        out = []
        for e in self.entries:
            if classes is not None and e.dc_class not in classes:
                continue
            if as_of is not None:
                if e.launch_date is None or e.launch_date > as_of:
                    continue
            elif e.launch_date is None and not include_announced:
                continue
            out.append(e)
        return out


def filter_description(
    classes: set[str] | None, as_of: date | None, include_announced: bool = False
) -> str:
    cls = ",".join(sorted(classes)) if classes is not None else "all"
    parts = [f"classes={cls}"]
    if as_of is not None:
        parts.append(f"as_of={as_of.isoformat()}")
    if include_announced:
        parts.append("announced=included")
    return " ".join(parts)


def load_catalog(path: str | Path) -> DatacenterCatalog:
    """Load a catalog CSV: id,name,city,country,continent,lat,lon,class,launch_date.

    launch_date is an ISO date or the literal "announced".
    """
    path = Path(path)
    required = ["id", "name", "city", "country", "continent", "lat", "lon", "class", "launch_date"]
    entries = []
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            raw_date = row["launch_date"].strip()
            try:
                launch = None if raw_date == "announced" else date.fromisoformat(raw_date)
                entries.append(
                    Datacenter(
                        id=row["id"],
                        name=row["name"],
                        city=row["city"],
                        country=row["country"],
                        continent=row["continent"],
                        location=GeoPoint(float(row["lat"]), float(row["lon"])),
                        dc_class=row["class"],
                        launch_date=launch,
                    )
                )
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: {e}") from e
    try:
        return DatacenterCatalog(entries)
    except ValueError as e:
        raise IngestionError(f"{path}: {e}") from e


def nearest_among(p: GeoPoint, entries: list[Datacenter]) -> tuple[Datacenter, float]:
    """Minimum-distance entry, ties broken by lexicographic id."""
    best = None
    best_key = None
    for e in entries:
        key = (haversine_km(p, e.location), e.id)
        if best_key is None or key < best_key:
            best, best_key = e, key
    if best is None:
        raise EmptyCatalogError("no datacenters to search")
    return best, best_key[0]


def nearest_datacenter(
    p: GeoPoint,
    catalog: DatacenterCatalog,
    classes: set[str] | None = None,
    as_of: date | None = None,
    include_announced: bool = False,
) -> tuple[Datacenter, float]:
    """Nearest catalog entry under the given filter, with its distance in km."""
    entries = catalog.filter(classes, as_of, include_announced)
    if not entries:
        raise EmptyCatalogError(
            f"no datacenters match filter "
            f"({filter_description(classes, as_of, include_announced)})"
        )
    return nearest_among(p, entries)


class WeightedDistribution:
    """(value km, weight persons) samples supporting step quantiles."""

    def __init__(self, samples):
        values = np.asarray([s[0] for s in samples], dtype=np.float64)
        weights = np.asarray([s[1] for s in samples], dtype=np.float64)
        if values.size == 0:
            raise ValueError("distribution needs at least one sample")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("values must be finite and non-negative")
        order = np.argsort(values, kind="stable")
        self.values = values
        self.weights = weights
        self._sorted_values = values[order]
        self._cum_weights = np.cumsum(weights[order])
        if self._cum_weights[-1] <= 0:
            raise ValueError("total weight must be positive")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.weights.tolist()))

    @property
    def total_weight(self) -> float:
        return float(self._cum_weights[-1])

    def cdf_points(self) -> list[tuple[float, float]]:
        """Sorted (value, cumulative weight fraction) breakpoints for plotting."""
        fractions = self._cum_weights / self._cum_weights[-1]
        return list(zip(self._sorted_values.tolist(), fractions.tolist()))


def weighted_step_percentile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Smallest v whose cumulative weight reaches q percent of the total."""
    if not 0.0 < q < 100.0:
        raise ValueError(f"percentile q={q} outside the open interval (0, 100)")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(np.asarray(weights, dtype=np.float64)[order])
    threshold = q * cum[-1] / 100.0
    idx = int(np.searchsorted(cum, threshold, side="left"))
    return float(np.asarray(values, dtype=np.float64)[order][min(idx, len(cum) - 1)])


def weighted_percentile(dist: WeightedDistribution, q: float) -> float:
    """Lower-step weighted quantile: no interpolation, exact on tied data."""
    if not 0.0 < q < 100.0:
        raise ValueError(f"percentile q={q} outside the open interval (0, 100)")
    threshold = q * dist._cum_weights[-1] / 100.0
    idx = int(np.searchsorted(dist._cum_weights, threshold, side="left"))
    return float(dist._sorted_values[min(idx, len(dist._cum_weights) - 1)])


def percentile_ratio(dist: WeightedDistribution, hi: float, lo: float) -> float:
    """weighted_percentile(hi) / weighted_percentile(lo), inf-guarded near zero."""
    if hi <= lo:
        raise ValueError(f"hi percentile {hi} must exceed lo percentile {lo}")
    hi_val = weighted_percentile(dist, hi)
    lo_val = weighted_percentile(dist, lo)
    if lo_val < MIN_RATIO_DENOMINATOR_KM:
        return math.inf
    return hi_val / lo_val


@dataclass
class InequalityReport:
    p10: float
    p50: float
    p80: float
    p90: float
    ratio_90_10: float
    ratio_80_20: float
    group_count: int
    catalog_filter: str
    degenerate_low: bool = False  # a ratio denominator fell below the km guard

    def as_dict(self) -> dict:
        return {
            "p10": self.p10,
            "p50": self.p50,
            "p80": self.p80,
            "p90": self.p90,
            "ratio_90_10": self.ratio_90_10,
            "ratio_80_20": self.ratio_80_20,
            "group_count": self.group_count,
            "catalog_filter": self.catalog_filter,
            "degenerate_low": self.degenerate_low,
        }


def inequality_report(dist: WeightedDistribution, catalog_filter: str = "") -> InequalityReport:
    """Percentile summary and ratio measures for one distance distribution."""
    r9010 = percentile_ratio(dist, 90, 10)
    r8020 = percentile_ratio(dist, 80, 20)
    return InequalityReport(
        p10=weighted_percentile(dist, 10),
        p50=weighted_percentile(dist, 50),
        p80=weighted_percentile(dist, 80),
        p90=weighted_percentile(dist, 90),
        ratio_90_10=r9010,
        ratio_80_20=r8020,
        group_count=len(dist),
        catalog_filter=catalog_filter,
        degenerate_low=math.isinf(r9010) or math.isinf(r8020),
    )


def distance_distribution(
    groups,
    catalog: DatacenterCatalog,
    classes: set[str] | None = None,
    as_of: date | None = None,
    include_announced: bool = False,
) -> WeightedDistribution:
    """One (nearest distance, population) sample per group.

    ``groups`` is an iterable of (GeoPoint, weight) pairs.
    """
    entries = catalog.filter(classes, as_of, include_announced)
    if not entries:
        raise EmptyCatalogError(
            f"no datacenters match filter "
            f"({filter_description(classes, as_of, include_announced)})"
        )
    samples = []
    for point, weight in groups:
        _, dist_km = nearest_among(point, entries)
        samples.append((dist_km, weight))
    return WeightedDistribution(samples)


def _check_launch_order(launches: list[Datacenter]) -> None:
    last: date | None = None
    seen_announced = False
    for e in launches:
        if e.launch_date is None:
            seen_announced = True
            continue
        if seen_announced:
            raise ValueError("announced launches must come after all dated launches")
        if last is not None and e.launch_date < last:
            raise ValueError(
                f"launch list not sorted by launch_date: {e.id} ({e.launch_date}) after {last}"
            )
        last = e.launch_date


def launch_sequence(catalog: DatacenterCatalog, include_announced: bool = False) -> list[str]:
    """Default timeline order: non-region entries by launch date then id.

    Announced entries go last and only when requested.
    """
    dated = [e for e in catalog if e.dc_class != "region" and e.launch_date is not None]
    dated.sort(key=lambda e: (e.launch_date, e.id))
    seq = [e.id for e in dated]
    if include_announced:
        announced = sorted(
            (e for e in catalog if e.dc_class != "region" and e.launch_date is None),
            key=lambda e: e.id,
        )
        seq.extend(e.id for e in announced)
    return seq


def inequality_timeline(
    groups,
    catalog: DatacenterCatalog,
    launches: list[str],
) -> list[tuple[str, InequalityReport]]:
    """Inequality report after each cumulative launch, starting from regions.

    ``launches`` lists datacenter ids in launch order; region-class entries
    form the initial state. Returns (event, report) pairs; the first event is
    "regions".
    """
    groups = list(groups)
    launch_entries = [catalog.get(dc_id) for dc_id in launches]
    _check_launch_order(launch_entries)

    active = [e for e in catalog if e.dc_class == "region"]
    steps: list[tuple[str, InequalityReport]] = []

    def snapshot(event: str):
        if not active:
            raise EmptyCatalogError(f"no active datacenters at timeline event {event!r}")
        samples = [(nearest_among(p, active)[1], w) for p, w in groups]
        dist = WeightedDistribution(samples)
        steps.append((event, inequality_report(dist, catalog_filter=f"timeline:{event}")))

    snapshot("regions")
    for e in launch_entries:
        active.append(e)
        snapshot(e.id)
    return steps
