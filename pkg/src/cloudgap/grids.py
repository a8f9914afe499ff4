"""Population and lights grids: loading, downsampling, zonal statistics.

Grids are regular lat/lon rasters. Internally row 0 is the southernmost row;
ESRI ASCII files store the north row first and are flipped on load. Cell (r, c)
has its center at (yll + (r + 0.5) * cell, xll + (c + 0.5) * cell).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestionError
from .geo import AdminUnit, GeoPoint, point_in_region, polygon_centroid

_ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


@dataclass
class PopulationGrid:
    """Regular lat/lon grid of non-negative cell values (persons or radiance).

    ``values`` is (n_rows, n_cols) with row 0 at the south edge. Cells that
    were nodata in the source are zeroed and remembered in ``nodata_mask`` so
    that means (for lights grids) can exclude them while population sums treat
    them as uninhabited.
    """

    origin: GeoPoint  # lower-left corner of the grid
    cell_size: float
    values: np.ndarray
    nodata_marker: float | None = None
    nodata_mask: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2:
            raise ValueError("grid values must be 2-dimensional")
        if self.cell_size <= 0:
            raise ValueError(f"cell_size {self.cell_size} must be positive")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def total(self) -> float:
        """Compensated (exact) sum of all cell values, row-major order."""
        return math.fsum(self.values.ravel().tolist())

    def cell_center(self, row: int, col: int) -> GeoPoint:
        return GeoPoint(
            self.origin.lat + (row + 0.5) * self.cell_size,
            self.origin.lon + (col + 0.5) * self.cell_size,
        )

    def center_lats(self) -> np.ndarray:
        return self.origin.lat + (np.arange(self.n_rows) + 0.5) * self.cell_size

    def center_lons(self) -> np.ndarray:
        return self.origin.lon + (np.arange(self.n_cols) + 0.5) * self.cell_size


@dataclass
class LoadSummary:
    """What a grid load saw: dimensions, totals and nodata substitutions."""

    path: str
    n_rows: int
    n_cols: int
    total: float
    nodata_cells: int = 0
    flagged_units: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "path": self.path,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "total": self.total,
            "nodata_cells": self.nodata_cells,
            "flagged_units": list(self.flagged_units),
        }


def _check_extent(origin: GeoPoint, cell_size: float, n_rows: int, context: str) -> None:
    top = origin.lat + n_rows * cell_size
    if top > 90.0 + 1e-9:
        raise IngestionError(f"{context}: grid extends above latitude 90 (top edge {top})")


def load_ascii_grid(path: str | Path) -> tuple[PopulationGrid, LoadSummary]:
    """Parse an ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize header).

    NODATA cells become 0 and are recorded in the grid's nodata mask. Values
    must be finite and non-negative. One data line per row, north row first.
    """
    path = Path(path)
    header: dict[str, float] = {}
    data_lines: list[tuple[int, str]] = []
    with path.open(encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            first = line.split()[0]
            if not data_lines and (first[0].isalpha() or first[0] == "_"):
                parts = line.split()
                if len(parts) != 2:
                    raise IngestionError(f"{path}: line {lineno}: malformed header line {line!r}")
                key = parts[0].lower()
                if key not in _ASCII_HEADER_KEYS:
                    raise IngestionError(f"{path}: line {lineno}: unknown header key {parts[0]!r}")
                try:
                    header[key] = float(parts[1])
                except ValueError as e:
                    raise IngestionError(
                        f"{path}: line {lineno}: non-numeric header value {parts[1]!r}"
                    ) from e
            else:
                data_lines.append((lineno, line))

    for key in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if key not in header:
            raise IngestionError(f"{path}: missing header key {key!r}")
    n_cols = int(header["ncols"])
    n_rows = int(header["nrows"])
    cell_size = header["cellsize"]
    nodata = header.get("nodata_value")
    if n_cols < 1 or n_rows < 1:
        raise IngestionError(f"{path}: non-positive grid dimensions {n_rows}x{n_cols}")
    if cell_size <= 0:
        raise IngestionError(f"{path}: non-positive cellsize {cell_size}")
    if len(data_lines) != n_rows:
        raise IngestionError(
            f"{path}: dimension mismatch: header says {n_rows} rows, file has {len(data_lines)}"
        )

    values = np.zeros((n_rows, n_cols), dtype=np.float64)
    mask = np.zeros((n_rows, n_cols), dtype=bool)
    nodata_cells = 0
    for file_row, (lineno, line) in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != n_cols:
            raise IngestionError(
                f"{path}: line {lineno}: dimension mismatch: expected {n_cols} values, "
                f"got {len(tokens)} (grid row {file_row})"
            )
        for col, tok in enumerate(tokens):
            try:
                v = float(tok)
            except ValueError as e:
                raise IngestionError(
                    f"{path}: line {lineno}: non-numeric cell {tok!r} at row {file_row}, col {col}"
                ) from e
            if nodata is not None and v == nodata:
                mask[file_row, col] = True
                nodata_cells += 1
                v = 0.0
            elif not math.isfinite(v) or v < 0:
                raise IngestionError(
                    f"{path}: line {lineno}: invalid cell value {v} at row {file_row}, col {col}"
                )
            values[file_row, col] = v

    origin = GeoPoint(header["yllcorner"], header["xllcorner"])
    _check_extent(origin, cell_size, n_rows, str(path))
    grid = PopulationGrid(
        origin=origin,
        cell_size=cell_size,
        values=np.flipud(values).copy(),  # file is north-first, rows stored south-first
        nodata_marker=nodata,
        nodata_mask=np.flipud(mask).copy() if nodata_cells else None,
    )
    summary = LoadSummary(str(path), n_rows, n_cols, grid.total, nodata_cells)
    return grid, summary


def load_csv_grid(
    path: str | Path,
    origin: GeoPoint,
    cell_size: float,
    n_rows: int,
    n_cols: int,
) -> tuple[PopulationGrid, LoadSummary]:
    """Snap CSV rows with header lat,lon,value onto a declared grid.

    Rows landing in the same cell accumulate; rows outside the declared
    extent are an error (totals must match the source file).
    """
    path = Path(path)
    _check_extent(origin, cell_size, n_rows, str(path))
    values = np.zeros((n_rows, n_cols), dtype=np.float64)
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file")
        missing = [c for c in ("lat", "lon", "value") if c not in reader.fieldnames]
        if missing:
            raise IngestionError(f"{path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                lat = float(row["lat"])
                lon = float(row["lon"])
                v = float(row["value"])
            except ValueError as e:
                raise IngestionError(f"{path}: line {lineno}: non-numeric field: {e}") from e
            if not math.isfinite(v) or v < 0:
                raise IngestionError(f"{path}: line {lineno}: invalid value {v}")
            r = math.floor((lat - origin.lat) / cell_size)
            c = math.floor((lon - origin.lon) / cell_size)
            if not (0 <= r < n_rows and 0 <= c < n_cols):
                raise IngestionError(
                    f"{path}: line {lineno}: point ({lat}, {lon}) falls outside the declared grid"
                )
            values[r, c] += v
    grid = PopulationGrid(origin=origin, cell_size=cell_size, values=values)
    summary = LoadSummary(str(path), n_rows, n_cols, grid.total)
    return grid, summary


def load_grid(
    path: str | Path,
    fmt: str = "asciigrid",
    *,
    origin: GeoPoint | None = None,
    cell_size: float | None = None,
    n_rows: int | None = None,
    n_cols: int | None = None,
) -> tuple[PopulationGrid, LoadSummary]:
    """Load a grid in either supported format.

    ``asciigrid`` reads an ESRI ASCII file; ``csv`` snaps lat,lon,value rows
    onto the declared geometry (all four geometry arguments required).
    """
    if fmt == "asciigrid":
        return load_ascii_grid(path)
    if fmt == "csv":
        if origin is None or cell_size is None or n_rows is None or n_cols is None:
            raise ValueError("csv grids need origin, cell_size, n_rows and n_cols")
        return load_csv_grid(path, origin, cell_size, n_rows, n_cols)
    raise ValueError(f"unknown grid format {fmt!r}")


def block_sum_downsample(grid: PopulationGrid, factor: int) -> PopulationGrid:
    """Aggregate factor x factor blocks by exact summation.

    The output total equals the input total (integer-exact on integer inputs).
    Ragged edge blocks are allowed; the origin stays fixed at the lower-left
    corner and the cell size scales by ``factor``.
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError(f"downsample factor must be a positive integer, got {factor}")
    factor = int(factor)
    if factor == 1:
        return PopulationGrid(
            origin=grid.origin,
            cell_size=grid.cell_size,
            values=grid.values.copy(),
            nodata_marker=grid.nodata_marker,
            nodata_mask=None if grid.nodata_mask is None else grid.nodata_mask.copy(),
        )

    rows_out = -(-grid.n_rows // factor)
    cols_out = -(-grid.n_cols // factor)
    padded = np.zeros((rows_out * factor, cols_out * factor), dtype=grid.values.dtype)
    padded[: grid.n_rows, : grid.n_cols] = grid.values
    blocks = padded.reshape(rows_out, factor, cols_out, factor)
    out = blocks.sum(axis=(1, 3))
    # Blocks counted from the south edge, matching internal row order.
    return PopulationGrid(
        origin=grid.origin,
        cell_size=grid.cell_size * factor,
        values=out,
        nodata_marker=grid.nodata_marker,
    )


def resample_nearest(src: PopulationGrid, template: PopulationGrid) -> PopulationGrid:
    """Resample ``src`` onto ``template``'s cells by nearest neighbor.

    Each template cell takes the value of the source cell containing its
    center; template cells whose center falls outside the source become
    nodata (masked, value 0). Used to align a lights grid with a population
    grid before zonal statistics.
    """
    lats = template.center_lats()
    lons = template.center_lons()
    rows = np.floor((lats - src.origin.lat) / src.cell_size).astype(int)
    cols = np.floor((lons - src.origin.lon) / src.cell_size).astype(int)
    row_ok = (rows >= 0) & (rows < src.n_rows)
    col_ok = (cols >= 0) & (cols < src.n_cols)
    rows_c = np.clip(rows, 0, src.n_rows - 1)
    cols_c = np.clip(cols, 0, src.n_cols - 1)

    values = src.values[np.ix_(rows_c, cols_c)].astype(np.float64)
    mask = ~(row_ok[:, None] & col_ok[None, :])
    if src.nodata_mask is not None:
        mask |= src.nodata_mask[np.ix_(rows_c, cols_c)]
    values[mask] = 0.0
    return PopulationGrid(
        origin=template.origin,
        cell_size=template.cell_size,
        values=values,
        nodata_marker=src.nodata_marker,
        nodata_mask=mask if mask.any() else None,
    )


def assigned_cells(grid: PopulationGrid, unit: AdminUnit) -> list[tuple[int, int]]:
    """Cells whose center lies inside the unit, in row-major order."""
    min_lat, min_lon, max_lat, max_lon = unit.bbox()
    lats = grid.center_lats()
    lons = grid.center_lons()
    row_idx = np.nonzero((lats >= min_lat) & (lats <= max_lat))[0]
    col_idx = np.nonzero((lons >= min_lon) & (lons <= max_lon))[0]
    cells = []
    for r in row_idx:
        lat = lats[r]
        for c in col_idx:
            if point_in_region(GeoPoint(lat, lons[c]), unit):
                cells.append((int(r), int(c)))
    return cells


def zonal_aggregate(
    grid: PopulationGrid, units: list[AdminUnit], stat: str = "sum"
) -> dict[str, float]:
    """Per-unit sum or mean of cell values, assigning cells by center point.

    Sums over units with no assigned cells are 0; means are omitted. Nodata
    cells contribute nothing to sums and are excluded from mean denominators.
    """
    if stat not in ("sum", "mean"):
        raise ValueError(f"stat must be 'sum' or 'mean', got {stat!r}")
    for unit in units:
        unit.validate()
    out: dict[str, float] = {}
    for unit in units:
        cells = assigned_cells(grid, unit)
        if grid.nodata_mask is not None:
            cells = [(r, c) for r, c in cells if not grid.nodata_mask[r, c]]
        if stat == "sum":
            out[unit.id] = math.fsum(grid.values[r, c] for r, c in cells)
        elif cells:
            out[unit.id] = math.fsum(grid.values[r, c] for r, c in cells) / len(cells)
    return out


def weighted_centroid(
    grid: PopulationGrid,
    unit: AdminUnit,
    flagged: list[str] | None = None,
) -> GeoPoint:
    """Population-weighted mean of assigned cell centers (planar lat/lon mean).

    Falls back to the unweighted polygon centroid when the unit has no
    positive-weight cells; such units are appended to ``flagged`` when given.
    """
    cells = assigned_cells(grid, unit)
    weights = [float(grid.values[r, c]) for r, c in cells]
    total = math.fsum(weights)
    if total <= 0.0:
        if flagged is not None:
            flagged.append(unit.id)
        return polygon_centroid(unit)
    lat = math.fsum(w * grid.cell_center(r, c).lat for (r, c), w in zip(cells, weights))
    lon = math.fsum(w * grid.cell_center(r, c).lon for (r, c), w in zip(cells, weights))
    return GeoPoint(lat / total, lon / total)
