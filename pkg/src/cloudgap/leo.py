"""What-if analysis for satellite-backed access to the cloud edge.

The satellite hop is modeled as a fixed extra distance added to every ground
distance (default 500 km). Wider reachability is modeled by sweeping sigma up
to 3000 km, with 900 km as the single-satellite footprint radius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .divide import (
    DatacenterCatalog,
    InequalityReport,
    WeightedDistribution,
    distance_distribution,
    inequality_report,
)
from .errors import IngestionError
from .fairness import AccessUnit, ConcentrationResult, sigma_sweep

DEFAULT_HOP_KM = 500.0
SINGLE_SATELLITE_RADIUS_KM = 900.0
SPEED_OF_LIGHT_20MS_KM = 3000.0


@dataclass
class LeoScenario:
    hop_km: float = DEFAULT_HOP_KM
    sigma_list: list[float] = field(
        default_factory=lambda: [70.0, SINGLE_SATELLITE_RADIUS_KM, SPEED_OF_LIGHT_20MS_KM]
    )
    label: str = "leo-500km"

    def __post_init__(self):
        if self.hop_km < 0:
            raise ValueError(f"hop_km must be non-negative, got {self.hop_km}")
        if not self.sigma_list or any(s <= 0 for s in self.sigma_list):
            raise ValueError("sigma_list must be non-empty and positive")
        if any(b <= a for a, b in zip(self.sigma_list, self.sigma_list[1:])):
            raise ValueError("sigma_list must be strictly ascending")


def load_scenario(path: str | Path) -> LeoScenario:
    """Read a scenario JSON file: {hop_km, sigma_list, label}."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path}: not valid JSON: {e}") from e
    try:
        return LeoScenario(
            hop_km=float(doc.get("hop_km", DEFAULT_HOP_KM)),
            sigma_list=[float(s) for s in doc["sigma_list"]]
            if "sigma_list" in doc
            else LeoScenario().sigma_list,
            label=str(doc.get("label", "leo")),
        )
    except (TypeError, ValueError) as e:
        raise IngestionError(f"{path}: bad scenario: {e}") from e


def leo_transform(dist: WeightedDistribution, hop_km: float) -> WeightedDistribution:
    """Add the satellite-hop distance to every sample; weights unchanged."""
    if hop_km < 0:
        raise ValueError(f"hop_km must be non-negative, got {hop_km}")
    return WeightedDistribution(
        [(v + hop_km, w) for v, w in zip(dist.values.tolist(), dist.weights.tolist())]
    )


def leo_inequality_report(
    groups_by_continent,
    catalog: DatacenterCatalog,
    hop_km: float = DEFAULT_HOP_KM,
    classes: set[str] | None = None,
    as_of: date | None = None,
    include_announced: bool = False,
) -> list[tuple[str, InequalityReport]]:
    """Per-continent inequality after adding the satellite hop.

    ``groups_by_continent`` maps a continent label to (GeoPoint, weight)
    pairs. Output is sorted by continent label.
    """
    out = []
    for continent in sorted(groups_by_continent):
        dist = distance_distribution(
            groups_by_continent[continent], catalog, classes, as_of, include_announced
        )
        shifted = leo_transform(dist, hop_km)
        report = inequality_report(shifted, catalog_filter=f"leo hop={hop_km}km")
        out.append((continent, report))
    return out


def leo_fairness_report(
    units: list[AccessUnit],
    catalog: DatacenterCatalog,
    scenario: LeoScenario,
    classes: set[str] | None = None,
    as_of: date | None = None,
    include_announced: bool = False,
) -> list[ConcentrationResult]:
    """Concentration index for each sigma in the scenario's sweep."""
    return sigma_sweep(
        units, catalog, scenario.sigma_list, classes, as_of, include_announced
    )
