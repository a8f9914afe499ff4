"""Command-line interface: dataset wiring, analysis subcommands, artifacts.

Configuration comes from a JSON file (--config) with flag overrides (flags
win). Every subcommand writes deterministic CSV/JSON artifacts into the
output directory plus a run manifest (the only file carrying a timestamp).

Exit codes: 0 success, 2 invalid configuration, 3 data error, 4 internal
invariant violation. Failures print a machine-readable JSON error record to
stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path

from . import divide, fairness, grids, leo, placement, tracenet
from .errors import EmptyCatalogError, IngestionError, NoAccessError
from .geo import GeoPoint, load_admin_units, load_tracts
from .reports import write_csv, write_json, write_run_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class ConfigError(Exception):
    """Configuration is unusable (missing file, bad value, absent dataset)."""


@dataclass
class GridSource:
    path: str
    format: str = "asciigrid"
    origin_lat: float | None = None
    origin_lon: float | None = None
    cell_size: float | None = None
    n_rows: int | None = None
    n_cols: int | None = None
    downsample_factor: int = 1


@dataclass
class RunConfig:
    population_grid: GridSource | None = None
    ntl_grid: GridSource | None = None
    boundaries: str | None = None
    tracts: str | None = None
    access_units: str | None = None
    catalog: str | None = None
    cities: str | None = None
    measurements: list[str] = field(default_factory=list)
    probe_meta: str | None = None
    asn_table: str | None = None
    wan_asns: list[int] = field(default_factory=lambda: sorted(tracenet.DEFAULT_WAN_ASNS))
    sigma: float = fairness.DEFAULT_SIGMA_KM
    classes: list[str] | None = None
    as_of: str | None = None
    include_announced: bool = False
    hop_km: float = leo.DEFAULT_HOP_KM
    scenario: str | None = None
    pareto_include_regions: bool = False
    trace_baseline_class: str = "baseline"
    trace_edge_class: str = "edge"
    out_dir: str = "out"
    emit_svg: bool = False

    def class_set(self) -> set[str] | None:
        return None if self.classes is None else set(self.classes)

    def as_of_date(self) -> date | None:
        return None if self.as_of is None else date.fromisoformat(self.as_of)

    def validate(self) -> None:
        try:
            self.sigma = float(self.sigma)
            self.hop_km = float(self.hop_km)
            self.wan_asns = [int(a) for a in self.wan_asns]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"non-numeric config value: {e}") from e
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.hop_km < 0:
            raise ConfigError(f"hop_km must be non-negative, got {self.hop_km}")
        if self.classes is not None:
            bad = set(self.classes) - set(divide.DC_CLASSES)
            if bad:
                raise ConfigError(f"unknown datacenter classes {sorted(bad)}")
        if self.as_of is not None:
            try:
                date.fromisoformat(self.as_of)
            except ValueError as e:
                raise ConfigError(f"bad as_of date {self.as_of!r}: {e}") from e
        if self.trace_baseline_class not in tracenet.TARGET_CLASSES:
            raise ConfigError(f"bad trace_baseline_class {self.trace_baseline_class!r}")
        if self.trace_edge_class not in tracenet.TARGET_CLASSES:
            raise ConfigError(f"bad trace_edge_class {self.trace_edge_class!r}")
        for src in (self.population_grid, self.ntl_grid):
            if src is None:
                continue
            if src.format not in ("asciigrid", "csv"):
                raise ConfigError(f"unknown grid format {src.format!r}")
            if src.downsample_factor < 1:
                raise ConfigError("downsample_factor must be >= 1")
            self._check_path(src.path)
            if src.format == "csv" and None in (
                src.origin_lat, src.origin_lon, src.cell_size, src.n_rows, src.n_cols
            ):
                raise ConfigError(f"csv grid {src.path}: declared geometry incomplete")
        for p in (
            self.boundaries, self.tracts, self.access_units, self.catalog,
            self.cities, self.probe_meta, self.asn_table, self.scenario,
        ):
            if p is not None:
                self._check_path(p)
        for p in self.measurements:
            self._check_path(p)

    @staticmethod
    def _check_path(p: str) -> None:
        if not Path(p).exists():
            raise ConfigError(f"referenced path does not exist: {p}")


def _grid_source(obj, name: str) -> GridSource:
    if isinstance(obj, str):
        return GridSource(path=obj)
    if isinstance(obj, dict):
        known = {
            "path", "format", "origin_lat", "origin_lon", "cell_size",
            "n_rows", "n_cols", "downsample_factor",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
        if "path" not in obj:
            raise ConfigError(f"{name}: missing path")
        return GridSource(**obj)
    raise ConfigError(f"{name}: expected a path or an object with a path")


def build_config(args: argparse.Namespace) -> RunConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {args.config}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {args.config}: not valid JSON: {e}") from e

    cfg = RunConfig()
    simple_keys = {
        "boundaries", "tracts", "access_units", "catalog", "cities", "probe_meta",
        "asn_table", "sigma", "classes", "as_of", "include_announced", "hop_km",
        "scenario", "pareto_include_regions", "trace_baseline_class",
        "trace_edge_class", "out_dir", "emit_svg", "wan_asns", "measurements",
    }
    for key, value in doc.items():
        if key == "population_grid":
            cfg.population_grid = _grid_source(value, key)
        elif key == "ntl_grid":
            cfg.ntl_grid = _grid_source(value, key)
        elif key in simple_keys:
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")

    # Flags override the file.
    if args.sigma is not None:
        cfg.sigma = args.sigma
    if args.as_of is not None:
        cfg.as_of = args.as_of
    if args.classes is not None:
        cfg.classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    if args.hop_km is not None:
        cfg.hop_km = args.hop_km
    if args.out is not None:
        cfg.out_dir = args.out
    if args.svg:
        cfg.emit_svg = True
    if getattr(args, "include_announced", False):
        cfg.include_announced = True

    if isinstance(cfg.measurements, str):
        cfg.measurements = [cfg.measurements]
    cfg.validate()
    return cfg


class Datasets:
    """Lazy, cached dataset loading shared by the subcommands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._cache: dict[str, object] = {}

    def _load_grid(self, src: GridSource):
        kwargs = {}
        if src.format == "csv":
            kwargs = {
                "origin": GeoPoint(src.origin_lat, src.origin_lon),
                "cell_size": src.cell_size,
                "n_rows": int(src.n_rows),
                "n_cols": int(src.n_cols),
            }
        grid, summary = grids.load_grid(src.path, src.format, **kwargs)
        if src.downsample_factor > 1:
            grid = grids.block_sum_downsample(grid, src.downsample_factor)
        return grid, summary

    def population_grid(self):
        if "population_grid" not in self._cache:
            if self.cfg.population_grid is None:
                raise ConfigError("no population_grid configured")
            self._cache["population_grid"] = self._load_grid(self.cfg.population_grid)
        return self._cache["population_grid"]

    def ntl_grid(self):
        if "ntl_grid" not in self._cache:
            if self.cfg.ntl_grid is None:
                raise ConfigError("no ntl_grid configured")
            self._cache["ntl_grid"] = self._load_grid(self.cfg.ntl_grid)
        return self._cache["ntl_grid"]

    def catalog(self) -> divide.DatacenterCatalog:
        if "catalog" not in self._cache:
            if self.cfg.catalog is None:
                raise ConfigError("no catalog configured")
            self._cache["catalog"] = divide.load_catalog(self.cfg.catalog)
        return self._cache["catalog"]

    def admin_units(self):
        """Admin units with population, wealth and representative points filled."""
        if "admin_units" not in self._cache:
            if self.cfg.boundaries is None:
                raise ConfigError("no boundaries configured")
            units = load_admin_units(self.cfg.boundaries)
            grid, summary = self.population_grid()
            pops = grids.zonal_aggregate(grid, units, "sum")
            flagged: list[str] = []
            for unit in units:
                unit.population = pops[unit.id]
                unit.rep_point = grids.weighted_centroid(grid, unit, flagged)
            summary.flagged_units = flagged
            if self.cfg.ntl_grid is not None:
                ntl, _ = self.ntl_grid()
                aligned = grids.resample_nearest(ntl, grid)
                means = grids.zonal_aggregate(aligned, units, "mean")
                for unit in units:
                    if unit.id in means:
                        unit.wealth = means[unit.id]
            self._cache["admin_units"] = units
        return self._cache["admin_units"]

    def groups_by_scope(self) -> dict[str, list[tuple[GeoPoint, float]]]:
        """Population groups keyed by scope: "all" plus one key per continent."""
        if "groups" not in self._cache:
            scopes: dict[str, list[tuple[GeoPoint, float]]] = {"all": []}
            if self.cfg.tracts is not None:
                for tract in load_tracts(self.cfg.tracts):
                    scopes["all"].append((tract.location, tract.population))
            elif self.cfg.boundaries is not None:
                for unit in self.admin_units():
                    entry = (unit.rep_point, unit.population)
                    scopes["all"].append(entry)
                    scopes.setdefault(unit.continent, []).append(entry)
            elif self.cfg.access_units is not None:
                for au in fairness.load_access_units(self.cfg.access_units):
                    scopes["all"].append((au.rep_point, au.population))
            else:
                raise ConfigError(
                    "no population groups: configure tracts, boundaries or access_units"
                )
            self._cache["groups"] = scopes
        return self._cache["groups"]

    def access_units(self) -> list[fairness.AccessUnit]:
        if "access_units" not in self._cache:
            units: list[fairness.AccessUnit] = []
            if self.cfg.access_units is not None:
                units = fairness.load_access_units(self.cfg.access_units)
            elif self.cfg.tracts is not None:
                for tract in load_tracts(self.cfg.tracts):
                    if tract.population > 0:
                        units.append(
                            fairness.AccessUnit(
                                id=tract.tract_id,
                                rep_point=tract.location,
                                population=tract.population,
                                wealth=tract.median_income,
                            )
                        )
            elif self.cfg.boundaries is not None:
                if self.cfg.ntl_grid is None:
                    raise ConfigError("admin-unit fairness needs an ntl_grid for wealth")
                for unit in self.admin_units():
                    if unit.population > 0 and math.isfinite(unit.wealth):
                        units.append(
                            fairness.AccessUnit(
                                id=unit.id,
                                rep_point=unit.rep_point,
                                population=unit.population,
                                wealth=unit.wealth,
                            )
                        )
            else:
                raise ConfigError(
                    "no access units: configure access_units, tracts or boundaries"
                )
            if not units:
                raise NoAccessError("no usable access units (zero population everywhere)")
            self._cache["access_units"] = units
        return self._cache["access_units"]

    def measurements(self):
        if "measurements" not in self._cache:
            if not self.cfg.measurements or self.cfg.probe_meta is None:
                raise ConfigError("trace analysis needs measurements and probe_meta")
            self._cache["measurements"] = tracenet.load_measurements(
                self.cfg.measurements, self.cfg.probe_meta
            )
        return self._cache["measurements"]

    def asn_table(self) -> tracenet.AsnTable | None:
        if "asn_table" not in self._cache:
            self._cache["asn_table"] = (
                tracenet.AsnTable.load(self.cfg.asn_table) if self.cfg.asn_table else None
            )
        return self._cache["asn_table"]


def _report_rows(scope: str, event: str, rep: divide.InequalityReport) -> list:
    return [
        scope, event, rep.group_count, rep.p10, rep.p50, rep.p80, rep.p90,
        rep.ratio_90_10, rep.ratio_80_20, rep.degenerate_low,
    ]


_REPORT_HEADER = [
    "scope", "event", "group_count", "p10_km", "p50_km", "p80_km", "p90_km",
    "ratio_90_10", "ratio_80_20", "degenerate_low",
]


def cmd_ingest(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    summary: dict[str, object] = {}
    if cfg.boundaries is not None:
        # Load first: unit assembly appends centroid-fallback flags to the
        # population grid's load summary.
        units = ds.admin_units()
        summary["admin_units"] = {
            "count": len(units),
            "population_total": sum(u.population for u in units),
            "continents": sorted({u.continent for u in units}),
        }
    if cfg.population_grid is not None:
        _, s = ds.population_grid()
        summary["population_grid"] = s.as_dict()
    if cfg.ntl_grid is not None:
        _, s = ds.ntl_grid()
        summary["ntl_grid"] = s.as_dict()
    if cfg.tracts is not None:
        tracts = load_tracts(cfg.tracts)
        summary["tracts"] = {
            "count": len(tracts),
            "population_total": sum(t.population for t in tracts),
        }
    if cfg.access_units is not None:
        aus = fairness.load_access_units(cfg.access_units)
        summary["access_units"] = {
            "count": len(aus),
            "population_total": sum(a.population for a in aus),
        }
    if cfg.catalog is not None:
        catalog = ds.catalog()
        by_class = {c: 0 for c in divide.DC_CLASSES}
        announced = 0
        for e in catalog:
            by_class[e.dc_class] += 1
            announced += e.announced
        summary["catalog"] = {
            "count": len(catalog), "by_class": by_class, "announced": announced,
        }
    if cfg.cities is not None:
        summary["cities"] = {"count": len(placement.load_cities(cfg.cities))}
    if cfg.measurements:
        _, _, stats = ds.measurements()
        summary["measurements"] = stats.as_dict()
    if cfg.asn_table is not None:
        table = ds.asn_table()
        summary["asn_table"] = {"prefixes": len(table)}
    if not summary:
        raise ConfigError("nothing to ingest: no datasets configured")
    return [write_json(out / "ingest_summary.json", {"datasets": summary})]


def cmd_inequality(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    catalog = ds.catalog()
    scopes = ds.groups_by_scope()
    classes, as_of = cfg.class_set(), cfg.as_of_date()

    report_rows = []
    cdf_rows = []
    for scope in sorted(scopes):
        dist = divide.distance_distribution(
            scopes[scope], catalog, classes, as_of, cfg.include_announced
        )
        rep = divide.inequality_report(
            dist, divide.filter_description(classes, as_of, cfg.include_announced)
        )
        report_rows.append(_report_rows(scope, "snapshot", rep))
        cdf_rows.extend([scope, v, f] for v, f in dist.cdf_points())

    launches = divide.launch_sequence(catalog, cfg.include_announced)
    timeline_rows = []
    timelines: dict[str, list[tuple[str, divide.InequalityReport]]] = {}
    for scope in sorted(scopes):
        steps = divide.inequality_timeline(scopes[scope], catalog, launches)
        timelines[scope] = steps
        timeline_rows.extend(_report_rows(scope, event, rep) for event, rep in steps)

    paths = [
        write_csv(out / "inequality_report.csv", _REPORT_HEADER, report_rows),
        write_csv(out / "inequality_cdf.csv", ["scope", "distance_km", "cum_fraction"], cdf_rows),
        write_csv(out / "inequality_timeline.csv", _REPORT_HEADER, timeline_rows),
        write_json(
            out / "inequality_report.json",
            {
                "filter": divide.filter_description(classes, as_of, cfg.include_announced),
                "scopes": {
                    scope: {event: rep.as_dict() for event, rep in steps}
                    for scope, steps in timelines.items()
                },
            },
        ),
    ]
    if cfg.emit_svg:
        from . import plots

        series = {}
        for scope in sorted(scopes):
            dist = divide.distance_distribution(
                scopes[scope], catalog, classes, as_of, cfg.include_announced
            )
            series[scope] = dist.cdf_points()
        paths.append(plots.plot_cdf(series, out / "inequality_cdf.svg",
                                    "Distance to nearest datacenter"))
        steps = timelines["all"]
        paths.append(
            plots.plot_timeline(
                [e for e, _ in steps], [r.ratio_90_10 for _, r in steps],
                out / "inequality_timeline.svg", "Inequality by launch", "p90/p10",
            )
        )
    return paths


def cmd_fairness(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    catalog = ds.catalog()
    units = ds.access_units()
    classes, as_of = cfg.class_set(), cfg.as_of_date()

    result = fairness.concentration_result(
        units, catalog, classes, as_of, cfg.sigma, cfg.include_announced
    )
    launches = divide.launch_sequence(catalog, cfg.include_announced)
    timeline = fairness.ci_timeline(units, catalog, launches, cfg.sigma)

    paths = [
        write_csv(
            out / "concentration_curve.csv",
            ["cum_population_fraction", "cum_access_fraction"],
            result.curve.points,
        ),
        write_csv(
            out / "ci_timeline.csv",
            ["event", "ci", "sigma_km"],
            [[event, r.ci, r.sigma] for event, r in timeline],
        ),
        write_json(
            out / "fairness_report.json",
            {
                "ci": result.ci,
                "sigma_km": result.sigma,
                "filter": result.catalog_filter,
                "curve": [list(p) for p in result.curve.points],
                "timeline": {event: r.ci for event, r in timeline},
            },
        ),
    ]
    if cfg.emit_svg:
        from . import plots

        paths.append(
            plots.plot_concentration_curves(
                {result.catalog_filter: result.curve.points},
                out / "concentration_curve.svg",
            )
        )
        paths.append(
            plots.plot_timeline(
                [e for e, _ in timeline], [r.ci for _, r in timeline],
                out / "ci_timeline.svg", "Fairness by launch", "concentration index",
            )
        )
    return paths


def cmd_pareto(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    if cfg.cities is None:
        raise ConfigError("pareto analysis needs a cities CSV")
    cities = placement.load_cities(cfg.cities)
    units = ds.access_units()
    baseline = None
    if cfg.pareto_include_regions:
        baseline = ds.catalog().filter({"region"}, cfg.as_of_date())
    candidates = placement.filter_candidates(cities, cfg.sigma)
    scored = placement.evaluate_candidates(candidates, units, cfg.sigma, baseline)
    result = placement.pareto_front(scored)
    front_names = {c.name for c in result.front}

    rows = [
        [
            c.name, c.location.lat, c.location.lon, c.city_population,
            c.coverage, c.ci_if_selected, c.evaluable, c.name in front_names,
        ]
        for c in result.candidates
    ]
    paths = [
        write_csv(
            out / "pareto.csv",
            ["name", "lat", "lon", "city_population", "coverage", "ci", "evaluable", "pareto"],
            rows,
        ),
        write_json(
            out / "pareto.json",
            {
                "sigma_km": cfg.sigma,
                "objective": result.objective,
                "include_regions": cfg.pareto_include_regions,
                "front": [c.name for c in result.front],
                "candidates": {
                    c.name: {
                        "coverage": c.coverage,
                        "ci": c.ci_if_selected,
                        "evaluable": c.evaluable,
                    }
                    for c in result.candidates
                },
            },
        ),
    ]
    if cfg.emit_svg:
        from . import plots

        paths.append(plots.plot_pareto(result, out / "pareto.svg"))
    return paths


def cmd_leo(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    catalog = ds.catalog()
    scopes = ds.groups_by_scope()
    classes, as_of = cfg.class_set(), cfg.as_of_date()
    scenario = (
        leo.load_scenario(cfg.scenario)
        if cfg.scenario
        else leo.LeoScenario(hop_km=cfg.hop_km)
    )

    rows = []
    for hop in (0.0, scenario.hop_km):
        for scope, rep in leo.leo_inequality_report(
            scopes, catalog, hop, classes, as_of, cfg.include_announced
        ):
            rows.append(
                [scenario.label, hop, scope, rep.group_count, rep.p10, rep.p50,
                 rep.p80, rep.p90, rep.ratio_90_10, rep.ratio_80_20, rep.degenerate_low]
            )

    paths = [
        write_csv(
            out / "leo_inequality.csv",
            ["scenario", "hop_km", "scope", "group_count", "p10_km", "p50_km",
             "p80_km", "p90_km", "ratio_90_10", "ratio_80_20", "degenerate_low"],
            rows,
        )
    ]

    sweep_rows = []
    sweep = []
    try:
        units = ds.access_units()
    except (ConfigError, NoAccessError):
        units = None
    if units is not None:
        sweep = leo.leo_fairness_report(
            units, catalog, scenario, classes, as_of, cfg.include_announced
        )
        sweep_rows = [[scenario.label, r.sigma, r.ci] for r in sweep]
        paths.append(
            write_csv(out / "leo_sigma_sweep.csv", ["scenario", "sigma_km", "ci"], sweep_rows)
        )

    paths.append(
        write_json(
            out / "leo.json",
            {
                "scenario": {
                    "label": scenario.label,
                    "hop_km": scenario.hop_km,
                    "sigma_list": scenario.sigma_list,
                },
                "sigma_sweep": {str(r.sigma): r.ci for r in sweep},
            },
        )
    )
    return paths


def cmd_trace(ds: Datasets, out: Path) -> list[Path]:
    cfg = ds.cfg
    records, metas, stats = ds.measurements()
    table = ds.asn_table()
    wan_asns = frozenset(cfg.wan_asns)
    continent_of = {pid: m.continent for pid, m in metas.items()}

    base_minima, base_counts = tracenet.probe_min_rtt(records, cfg.trace_baseline_class)
    edge_minima, edge_counts = tracenet.probe_min_rtt(records, cfg.trace_edge_class)
    speedups = tracenet.cdf_speedup_stats(base_minima, edge_minima, continent_of)

    cdf_rows = []
    for label, minima in ((cfg.trace_baseline_class, base_minima),
                          (cfg.trace_edge_class, edge_minima)):
        per_group: dict[str, list[float]] = {}
        for pid, v in minima.items():
            per_group.setdefault(continent_of[pid], []).append(v)
        for group in sorted(per_group):
            cdf_rows.extend(
                [group, label, v, f] for v, f in tracenet.cdf_points(per_group[group])
            )

    summaries = tracenet.probe_summaries(records, table, wan_asns)
    summary_rows = []
    for pid in sorted(summaries):
        s = summaries[pid]
        summary_rows.append(
            [
                pid, continent_of.get(pid, ""),
                s.min_rtt_ms.get("baseline"), s.min_rtt_ms.get("edge"),
                s.min_rtt_ms.get("region"), s.min_rtt_ms.get("ground_truth"),
                s.first_wan_hop_index, s.wan_residence_ms, s.satellite_hop_rtt_ms,
            ]
        )

    paths = [
        write_csv(
            out / "trace_speedups.csv",
            ["group", "p50_base", "p50_edge", "p80_base", "p80_edge",
             "speedup_p50", "speedup_p80", "frac_under_20ms"],
            [
                [r.group, r.p50_base, r.p50_edge, r.p80_base, r.p80_edge,
                 r.speedup_p50, r.speedup_p80, r.frac_under_20ms]
                for r in speedups
            ],
        ),
        write_csv(
            out / "trace_cdf.csv",
            ["group", "target_class", "min_rtt_ms", "cum_fraction"],
            cdf_rows,
        ),
        write_csv(
            out / "probe_summaries.csv",
            ["probe_id", "continent", "min_baseline_ms", "min_edge_ms",
             "min_region_ms", "min_ground_truth_ms", "first_wan_hop_index",
             "wan_residence_ms", "satellite_hop_rtt_ms"],
            summary_rows,
        ),
        write_json(
            out / "trace.json",
            {
                "load": stats.as_dict(),
                "baseline_class": cfg.trace_baseline_class,
                "edge_class": cfg.trace_edge_class,
                "baseline_counts": base_counts,
                "edge_counts": edge_counts,
                "wan_asns": sorted(wan_asns),
                "negative_residence_probes": tracenet.count_negative_residence(summaries),
                "speedups": {r.group: r.as_dict() for r in speedups},
            },
        ),
    ]
    if cfg.emit_svg:
        from . import plots

        series = {}
        for group, label, v, f in cdf_rows:
            series.setdefault(f"{group}/{label}", []).append((v, f))
        paths.append(plots.plot_cdf(series, out / "trace_cdf.svg",
                                    "Minimum RTT per probe", "ms"))
    return paths


def cmd_report(ds: Datasets, out: Path) -> list[Path]:
    """Run every analysis the configuration supports and bundle the artifacts."""
    cfg = ds.cfg
    sections = {
        "ingest": cmd_ingest,
        "inequality": cmd_inequality,
        "fairness": cmd_fairness,
        "pareto": cmd_pareto,
        "leo": cmd_leo,
        "trace": cmd_trace,
    }
    written: list[Path] = []
    ran, skipped = [], {}
    for name, fn in sections.items():
        try:
            written.extend(fn(ds, out))
            ran.append(name)
        except ConfigError as e:
            skipped[name] = str(e)
    if not ran:
        raise ConfigError("report: no analysis is runnable with this configuration")
    written.append(
        write_json(out / "report_bundle.json",
                   {"sections": ran, "skipped": skipped,
                    "artifacts": sorted(p.name for p in written)})
    )
    return written


COMMANDS = {
    "ingest": cmd_ingest,
    "inequality": cmd_inequality,
    "fairness": cmd_fairness,
    "pareto": cmd_pareto,
    "leo": cmd_leo,
    "trace": cmd_trace,
    "report": cmd_report,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudgap",
        description="Datacenter distance inequality and fairness analysis",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in [
        ("ingest", "load and summarize the configured datasets"),
        ("inequality", "distance percentile ratios and launch timelines"),
        ("fairness", "concentration curves and index over wealth-ranked units"),
        ("pareto", "coverage/fairness tradeoff over candidate cities"),
        ("leo", "satellite-hop distance transform and sigma sweeps"),
        ("trace", "recorded traceroute latency attribution and speedups"),
        ("report", "run all supported analyses and bundle the artifacts"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--sigma", type=float, help="access radius in km")
        p.add_argument("--as-of", dest="as_of", help="only count launches up to this date")
        p.add_argument("--classes", help="comma-separated datacenter classes")
        p.add_argument("--hop-km", dest="hop_km", type=float,
                       help="satellite hop distance in km")
        p.add_argument("--include-announced", action="store_true",
                       help="include announced datacenters in forward-looking runs")
        p.add_argument("--out", help="output directory")
        p.add_argument("--svg", action="store_true", help="emit SVG plots")
    return parser


def _error_record(exc: Exception, exit_code: int) -> str:
    return json.dumps(
        {"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code},
        sort_keys=True,
    )


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as e:
        print(_error_record(e, EXIT_CONFIG), file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg.out_dir)
    ds = Datasets(cfg)
    try:
        artifacts = COMMANDS[args.subcommand](ds, out)
    except ConfigError as e:
        print(_error_record(e, EXIT_CONFIG), file=sys.stderr)
        return EXIT_CONFIG
    except (IngestionError, EmptyCatalogError, NoAccessError, FileNotFoundError, KeyError) as e:
        print(_error_record(e, EXIT_DATA), file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # CloudGapError subclasses and genuine bugs alike
        print(_error_record(e, EXIT_INTERNAL), file=sys.stderr)
        return EXIT_INTERNAL

    write_run_manifest(out, args.subcommand, asdict(cfg))
    for p in artifacts:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
