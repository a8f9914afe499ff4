"""Offline analysis of recorded ping/traceroute measurements.

Input formats:
  - measurements: JSON lines, one record per line:
      {"probe_id": "p1", "target_id": "use1", "target_class": "region",
       "timestamp": "2022-05-01T10:00:00", "hops": [
          {"hop": 1, "address": "10.0.0.1", "rtts_ms": [1.5, 1.2]}, ...]}
    A missing/null/"*" address means the hop did not answer; missing rtts_ms
    means no reply times. A record "terminates" iff its last hop has rtts.
  - probe meta: CSV probe_id,lat,lon,continent,asn,tags (tags pipe-separated)
  - prefix table: CSV prefix,asn (longest-prefix match, later rows override)

Probes tagged "datacenter" are dropped on load to keep results representative
of end users.
"""

from __future__ import annotations

import csv
import ipaddress
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .divide import weighted_step_percentile
from .errors import IngestionError
from .geo import GeoPoint

import numpy as np

log = logging.getLogger(__name__)

TARGET_CLASSES = ("baseline", "edge", "region", "ground_truth")

# ASNs treated as the cloud provider's WAN when attributing hops.
DEFAULT_WAN_ASNS = frozenset({16509, 14618})

# Carrier-grade NAT address marking the exit of the satellite segment.
CGNAT_EXIT_ADDRESS = "100.64.0.1"

LOW_LATENCY_THRESHOLD_MS = 20.0

DATACENTER_TAG = "datacenter"


@dataclass(frozen=True)
class TraceHop:
    index: int
    address: str | None
    rtts_ms: tuple[float, ...] = ()

    def min_rtt(self) -> float | None:
        return min(self.rtts_ms) if self.rtts_ms else None


@dataclass(frozen=True)
class TracerouteRecord:
    probe_id: str
    target_id: str
    target_class: str
    timestamp: str
    hops: tuple[TraceHop, ...]

    def __post_init__(self):
        if self.target_class not in TARGET_CLASSES:
            raise ValueError(f"unknown target_class {self.target_class!r}")
        last = 0
        for hop in self.hops:
            if hop.index <= last:
                raise ValueError(
                    f"hop indices must be strictly increasing (saw {hop.index} after {last})"
                )
            last = hop.index
            for r in hop.rtts_ms:
                if not math.isfinite(r) or r < 0:
                    raise ValueError(f"hop {hop.index}: invalid rtt {r}")

    def final_hop(self) -> TraceHop | None:
        return self.hops[-1] if self.hops else None

    def terminates(self) -> bool:
        final = self.final_hop()
        return final is not None and bool(final.rtts_ms)


@dataclass(frozen=True)
class ProbeMeta:
    probe_id: str
    location: GeoPoint
    continent: str
    asn: int
    tags: frozenset[str] = frozenset()


@dataclass
class ProbeSummary:
    probe_id: str
    min_rtt_ms: dict[str, float] = field(default_factory=dict)  # per target_class
    first_wan_hop_index: int | None = None
    wan_residence_ms: float | None = None
    satellite_hop_rtt_ms: float | None = None


@dataclass
class MeasurementLoadStats:
    n_records: int = 0
    n_probes: int = 0
    excluded_probes: int = 0
    excluded_records: int = 0

    def as_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "n_probes": self.n_probes,
            "excluded_probes": self.excluded_probes,
            "excluded_records": self.excluded_records,
        }


def load_probe_meta(path: str | Path) -> dict[str, ProbeMeta]:
    path = Path(path)
    required = ["probe_id", "lat", "lon", "continent", "asn", "tags"]
    metas: dict[str, ProbeMeta] = {}
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            pid = row["probe_id"]
            if pid in metas:
                raise IngestionError(f"{path}: line {lineno}: duplicate probe_id {pid!r}")
            try:
                metas[pid] = ProbeMeta(
                    probe_id=pid,
                    location=GeoPoint(float(row["lat"]), float(row["lon"])),
                    continent=row["continent"],
                    asn=int(row["asn"]),
                    tags=frozenset(t for t in row["tags"].split("|") if t),
                )
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: {e}") from e
    return metas


def _hop_from_json(obj, context: str) -> TraceHop:
    if not isinstance(obj, dict) or "hop" not in obj:
        raise IngestionError(f"{context}: hop entry missing 'hop' index")
    address = obj.get("address")
    if address in ("*", ""):
        address = None
    rtts = obj.get("rtts_ms") or []
    try:
        return TraceHop(
            index=int(obj["hop"]),
            address=None if address is None else str(address),
            rtts_ms=tuple(float(r) for r in rtts),
        )
    except (TypeError, ValueError) as e:
        raise IngestionError(f"{context}: {e}") from e


def parse_record_line(line: str, context: str) -> TracerouteRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise IngestionError(f"{context}: not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise IngestionError(f"{context}: record is not a JSON object")
    missing = [k for k in ("probe_id", "target_id", "target_class", "timestamp") if k not in obj]
    if missing:
        raise IngestionError(f"{context}: missing fields {missing}")
    hops = [
        _hop_from_json(h, f"{context} hop {i}") for i, h in enumerate(obj.get("hops") or [])
    ]
    try:
        return TracerouteRecord(
            probe_id=str(obj["probe_id"]),
            target_id=str(obj["target_id"]),
            target_class=str(obj["target_class"]),
            timestamp=str(obj["timestamp"]),
            hops=tuple(hops),
        )
    except ValueError as e:
        raise IngestionError(f"{context}: {e}") from e


def load_measurements(
    paths, meta_path: str | Path
) -> tuple[list[TracerouteRecord], dict[str, ProbeMeta], MeasurementLoadStats]:
    """Load JSON-lines records plus probe meta, dropping datacenter-tagged probes.

    Records referencing probes absent from the meta file are an error;
    records from excluded probes are dropped and counted.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    all_meta = load_probe_meta(meta_path)
    excluded_ids = {pid for pid, m in all_meta.items() if DATACENTER_TAG in m.tags}
    metas = {pid: m for pid, m in all_meta.items() if pid not in excluded_ids}

    stats = MeasurementLoadStats(excluded_probes=len(excluded_ids))
    records: list[TracerouteRecord] = []
    for path in paths:
        path = Path(path)
        with path.open(encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                record = parse_record_line(line, f"{path}: line {lineno}")
                if record.probe_id in excluded_ids:
                    stats.excluded_records += 1
                    continue
                if record.probe_id not in metas:
                    raise IngestionError(
                        f"{path}: line {lineno}: unknown probe_id {record.probe_id!r}"
                    )
                records.append(record)
    stats.n_records = len(records)
    stats.n_probes = len(metas)
    return records, metas, stats


def probe_min_rtt(
    records: list[TracerouteRecord], target_class: str
) -> tuple[dict[str, float], dict[str, int]]:
    """Per-probe minimum of final-hop minimum rtts over targets of one class.

    Returns (minima, counters). Records without a terminating final hop are
    skipped; probes with no usable record of the class are omitted. Both are
    counted in the second return value.
    """
    if target_class not in TARGET_CLASSES:
        raise ValueError(f"unknown target_class {target_class!r}")
    minima: dict[str, float] = {}
    skipped = 0
    probes_seen = set()
    for record in records:
        if record.target_class != target_class:
            continue
        probes_seen.add(record.probe_id)
        if not record.terminates():
            skipped += 1
            continue
        rtt = record.final_hop().min_rtt()
        prev = minima.get(record.probe_id)
        if prev is None or rtt < prev:
            minima[record.probe_id] = rtt
    omitted = len(probes_seen - set(minima))
    return minima, {"skipped_records": skipped, "omitted_probes": omitted}


class AsnTable:
    """prefix -> ASN table with longest-prefix-match lookup.

    Lookup walks prefix lengths from most to least specific, so it is
    O(address bits) per query. Later duplicate prefixes override earlier
    ones, keeping lookups deterministic.
    """

    def __init__(self, entries: list[tuple[str, int]]):
        # {ip_version: {prefixlen: {network_int: asn}}}
        self._tables: dict[int, dict[int, dict[int, int]]] = {4: {}, 6: {}}
        self.entries: list[tuple[str, int]] = []
        for prefix, asn in entries:
            try:
                net = ipaddress.ip_network(prefix, strict=True)
            except ValueError as e:
                raise IngestionError(f"invalid prefix {prefix!r}: {e}") from e
            self.entries.append((prefix, int(asn)))
            table = self._tables[net.version]
            table.setdefault(net.prefixlen, {})[int(net.network_address)] = int(asn)
        self._lengths = {
            v: sorted(t.keys(), reverse=True) for v, t in self._tables.items()
        }

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def load(cls, path: str | Path) -> "AsnTable":
        """Load a CSV with header prefix,asn."""
        path = Path(path)
        entries = []
        with path.open(newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise IngestionError(f"{path}: empty file")
            missing = [c for c in ("prefix", "asn") if c not in reader.fieldnames]
            if missing:
                raise IngestionError(f"{path}: missing columns {missing}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    entries.append((row["prefix"], int(row["asn"])))
                except ValueError as e:
                    raise IngestionError(f"{path}: line {lineno}: {e}") from e
        try:
            return cls(entries)
        except IngestionError as e:
            raise IngestionError(f"{path}: {e}") from e

    def lookup(self, address: str) -> int | None:
        """ASN of the most specific prefix containing the address, if any."""
        try:
            addr = ipaddress.ip_address(address)
        except ValueError:
            return None
        table = self._tables[addr.version]
        addr_int = int(addr)
        max_len = 32 if addr.version == 4 else 128
        for plen in self._lengths[addr.version]:
            mask = ((1 << plen) - 1) << (max_len - plen) if plen else 0
            asn = table[plen].get(addr_int & mask)
            if asn is not None:
                return asn
        return None


def _is_attributable(address: str) -> bool:
    """Public addresses only: private, CGNAT and reserved space never match."""
    try:
        return ipaddress.ip_address(address).is_global
    except ValueError:
        return False


def first_wan_hop(
    record: TracerouteRecord,
    table: AsnTable,
    wan_asns: frozenset[int] | set[int] = DEFAULT_WAN_ASNS,
) -> tuple[int, float] | None:
    """First hop attributed to the WAN ASN set, with that hop's minimum rtt.

    Hops with unanswered probes (no rtts) cannot supply a minimum and are
    skipped. Returns None when no hop matches.
    """
    for hop in record.hops:
        if hop.address is None or not hop.rtts_ms:
            continue
        if not _is_attributable(hop.address):
            continue
        if table.lookup(hop.address) in wan_asns:
            return hop.index, hop.min_rtt()
    return None


def wan_residence(
    record: TracerouteRecord,
    table: AsnTable,
    wan_asns: frozenset[int] | set[int] = DEFAULT_WAN_ASNS,
) -> float | None:
    """Endpoint minimum rtt minus first-WAN-hop minimum rtt.

    May be negative under measurement noise; callers report the raw value
    alongside a negative count. None when the record does not terminate or
    no WAN hop is found.
    """
    if not record.terminates():
        return None
    wan = first_wan_hop(record, table, wan_asns)
    if wan is None:
        return None
    return record.final_hop().min_rtt() - wan[1]


def satellite_hop_rtt(record: TracerouteRecord) -> float | None:
    """Minimum rtt at the first CGNAT exit hop (100.64.0.1), if present."""
    for hop in record.hops:
        if hop.address == CGNAT_EXIT_ADDRESS:
            return hop.min_rtt()
    return None


def probe_summaries(
    records: list[TracerouteRecord],
    table: AsnTable | None = None,
    wan_asns: frozenset[int] | set[int] = DEFAULT_WAN_ASNS,
) -> dict[str, ProbeSummary]:
    """Assemble per-probe summaries from record-level analyses.

    Per-class minima follow probe_min_rtt. WAN residence is computed per
    record and the per-probe minimum difference is kept, along with the
    first-WAN-hop index of the record that achieved it (ties: first record
    in input order). The satellite hop rtt is the per-probe minimum.
    """
    summaries: dict[str, ProbeSummary] = {}

    def summary(pid: str) -> ProbeSummary:
        if pid not in summaries:
            summaries[pid] = ProbeSummary(probe_id=pid)
        return summaries[pid]

    for target_class in TARGET_CLASSES:
        minima, _ = probe_min_rtt(records, target_class)
        for pid, rtt in minima.items():
            summary(pid).min_rtt_ms[target_class] = rtt

    for record in records:
        s = summary(record.probe_id)
        if table is not None:
            residence = wan_residence(record, table, wan_asns)
            if residence is not None and (
                s.wan_residence_ms is None or residence < s.wan_residence_ms
            ):
                s.wan_residence_ms = residence
                s.first_wan_hop_index = first_wan_hop(record, table, wan_asns)[0]
        sat = satellite_hop_rtt(record)
        if sat is not None and (
            s.satellite_hop_rtt_ms is None or sat < s.satellite_hop_rtt_ms
        ):
            s.satellite_hop_rtt_ms = sat
    return summaries


def count_negative_residence(summaries: dict[str, ProbeSummary]) -> int:
    return sum(
        1 for s in summaries.values() if s.wan_residence_ms is not None and s.wan_residence_ms < 0
    )


@dataclass
class SpeedupRow:
    group: str
    p50_base: float
    p50_edge: float
    p80_base: float
    p80_edge: float
    speedup_p50: float  # percent
    speedup_p80: float  # percent
    frac_under_20ms: float  # fraction of edge probes under the threshold

    def as_dict(self) -> dict:
        return {
            "group": self.group,
            "p50_base": self.p50_base,
            "p50_edge": self.p50_edge,
            "p80_base": self.p80_base,
            "p80_edge": self.p80_edge,
            "speedup_p50": self.speedup_p50,
            "speedup_p80": self.speedup_p80,
            "frac_under_20ms": self.frac_under_20ms,
        }


def _step_percentile(values: list[float], q: float) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return weighted_step_percentile(arr, np.ones_like(arr), q)


def cdf_speedup_stats(
    baseline: dict[str, float],
    edge: dict[str, float],
    continent_of: dict[str, str],
) -> list[SpeedupRow]:
    """Per-continent percentile speedups of edge over baseline minima.

    Percentiles are unweighted step percentiles over each map's own probes
    (the probe sets may differ). speedup = (base - edge) / base * 100. Groups
    empty on either side are omitted with a warning.
    """
    groups = sorted(
        {continent_of[pid] for pid in baseline} | {continent_of[pid] for pid in edge}
    )
    rows = []
    for group in groups:
        base_vals = sorted(v for pid, v in baseline.items() if continent_of[pid] == group)
        edge_vals = sorted(v for pid, v in edge.items() if continent_of[pid] == group)
        if not base_vals or not edge_vals:
            log.warning("group %s empty on one side (base=%d, edge=%d); omitted",
                        group, len(base_vals), len(edge_vals))
            continue
        p50_base = _step_percentile(base_vals, 50)
        p50_edge = _step_percentile(edge_vals, 50)
        p80_base = _step_percentile(base_vals, 80)
        p80_edge = _step_percentile(edge_vals, 80)
        rows.append(
            SpeedupRow(
                group=group,
                p50_base=p50_base,
                p50_edge=p50_edge,
                p80_base=p80_base,
                p80_edge=p80_edge,
                speedup_p50=(p50_base - p50_edge) / p50_base * 100.0,
                speedup_p80=(p80_base - p80_edge) / p80_base * 100.0,
                frac_under_20ms=sum(1 for v in edge_vals if v < LOW_LATENCY_THRESHOLD_MS)
                / len(edge_vals),
            )
        )
    return rows


def cdf_points(values: list[float]) -> list[tuple[float, float]]:
    """Sorted (value, cumulative fraction) pairs for CDF plotting."""
    ordered = sorted(values)
    n = len(ordered)
    return [(v, (i + 1) / n) for i, v in enumerate(ordered)]
