"""cloudgap: who is close to the cloud edge, and who gets left behind.

Quantifies the digital divide of cloud edge datacenters: population-weighted
distance-to-datacenter inequality (percentile ratios), wealth-ranked fairness
(concentration index over a datacenter access count), pareto-optimal city
selection, satellite what-if scenarios, and offline traceroute latency
attribution.
"""

from .errors import CloudGapError, EmptyCatalogError, IngestionError, NoAccessError
from .geo import (
    EARTH_RADIUS_KM,
    AdminUnit,
    CensusTract,
    GeoPoint,
    Polygon,
    haversine_km,
    load_admin_units,
    load_tracts,
    point_in_region,
)
from .grids import (
    LoadSummary,
    PopulationGrid,
    block_sum_downsample,
    load_grid,
    resample_nearest,
    weighted_centroid,
    zonal_aggregate,
)
from .divide import (
    Datacenter,
    DatacenterCatalog,
    InequalityReport,
    WeightedDistribution,
    distance_distribution,
    inequality_report,
    inequality_timeline,
    load_catalog,
    nearest_datacenter,
    percentile_ratio,
    weighted_percentile,
)
from .fairness import (
    AccessUnit,
    ConcentrationCurve,
    ConcentrationResult,
    cai,
    ci_timeline,
    concentration_curve,
    concentration_index,
    fill_cai,
    load_access_units,
    sigma_sweep,
)
from .placement import (
    CandidateCity,
    ParetoResult,
    evaluate_candidate,
    evaluate_candidates,
    filter_candidates,
    load_cities,
    pareto_front,
)
from .leo import LeoScenario, leo_fairness_report, leo_inequality_report, leo_transform
from .tracenet import (
    AsnTable,
    ProbeMeta,
    ProbeSummary,
    TracerouteRecord,
    cdf_speedup_stats,
    first_wan_hop,
    load_measurements,
    probe_min_rtt,
    satellite_hop_rtt,
    wan_residence,
)

__version__ = "0.1.0"
