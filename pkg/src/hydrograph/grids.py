"""Raster grids for drainage analysis: elevation, flow direction, accumulation.

The text format is the ESRI ASCII grid: a short key-value header followed by
row-major elevation values, first data row northernmost.  Internally nodata
cells are held as NaN so arithmetic cannot silently absorb the marker value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import BadGrid, OutOfBounds
from .geometry import Point

DEFAULT_NODATA = -9999.0

# D8 direction codes.  Row 0 is the northern edge, so "south" is +row.
E, SE, S, SW, W, NW, N, NE = 1, 2, 3, 4, 5, 6, 7, 8
OUTLET = 0
NODATA_DIR = -1

#: (row offset, col offset) per direction code.
DIR_OFFSETS: dict[int, tuple[int, int]] = {
    E: (0, 1), SE: (1, 1), S: (1, 0), SW: (1, -1),
    W: (0, -1), NW: (-1, -1), N: (-1, 0), NE: (-1, 1),
}

#: Tie-breaking order for equal gradients: straight neighbors then diagonals.
TIE_ORDER: tuple[int, ...] = (E, S, W, N, SE, SW, NW, NE)


def _format_value(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass
class DemGrid:
    """Elevation raster with geographic registration.

    data holds float64 elevations with nodata cells as NaN; shape is
    (nrows, ncols) with row 0 at the north edge.
    """

    data: np.ndarray
    xll: float
    yll: float
    cellsize: float
    nodata: float = DEFAULT_NODATA

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or 0 in self.data.shape:
            raise BadGrid("grid must be a non-empty 2-D array")
        if self.cellsize <= 0:
            raise BadGrid("cellsize must be positive")
        finite_ok = np.isfinite(self.data) | np.isnan(self.data)
        if not finite_ok.all():
            raise BadGrid("non-finite elevation value")

    @property
    def nrows(self) -> int:
        return self.data.shape[0]

    @property
    def ncols(self) -> int:
        return self.data.shape[1]

    def is_nodata(self, r: int, c: int) -> bool:
        return bool(np.isnan(self.data[r, c]))

    def nodata_mask(self) -> np.ndarray:
        return np.isnan(self.data)

    def valid_count(self) -> int:
        return int((~np.isnan(self.data)).sum())

    def in_bounds(self, r: int, c: int) -> bool:
        return 0 <= r < self.nrows and 0 <= c < self.ncols

    def cell_center(self, r: int, c: int) -> Point:
        lon = self.xll + (c + 0.5) * self.cellsize
        lat = self.yll + (self.nrows - 1 - r + 0.5) * self.cellsize
        return Point(lon, lat)

    def cell_of(self, lon: float, lat: float) -> tuple[int, int]:
        c = int((lon - self.xll) // self.cellsize)
        r = self.nrows - 1 - int((lat - self.yll) // self.cellsize)
        if not self.in_bounds(r, c):
            raise OutOfBounds(f"({lon}, {lat}) lies outside the grid")
        return r, c

    def iter_valid(self) -> Iterator[tuple[int, int]]:
        mask = ~np.isnan(self.data)
        for r, c in zip(*np.nonzero(mask)):
            yield int(r), int(c)

    def copy(self) -> "DemGrid":
        return DemGrid(self.data.copy(), self.xll, self.yll,
                       self.cellsize, self.nodata)

    # --- ESRI ASCII round trip ---

    @classmethod
    def from_ascii(cls, text: str) -> "DemGrid":
        tokens_by_line = [line.split() for line in text.splitlines()]
        header: dict[str, float] = {}
        body_start = 0
        for i, tokens in enumerate(tokens_by_line):
            if not tokens:
                body_start = i + 1
                continue
            key = tokens[0].lower()
            if key in ("ncols", "nrows", "xllcorner", "yllcorner",
                       "xllcenter", "yllcenter", "cellsize", "nodata_value"):
                if len(tokens) != 2:
                    raise BadGrid(f"malformed header line: {' '.join(tokens)!r}")
                try:
                    header[key] = float(tokens[1])
                except ValueError:
                    raise BadGrid(f"non-numeric header value: {tokens[1]!r}")
                body_start = i + 1
            else:
                break
        for required in ("ncols", "nrows", "cellsize"):
            if required not in header:
                raise BadGrid(f"missing header key {required}")
        if "xllcorner" in header:
            xll = header["xllcorner"]
        elif "xllcenter" in header:
            xll = header["xllcenter"] - header["cellsize"] / 2
        else:
            raise BadGrid("missing header key xllcorner")
        if "yllcorner" in header:
            yll = header["yllcorner"]
        elif "yllcenter" in header:
            yll = header["yllcenter"] - header["cellsize"] / 2
        else:
            raise BadGrid("missing header key yllcorner")
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        if ncols <= 0 or nrows <= 0:
            raise BadGrid("ncols and nrows must be positive")
        if header["cellsize"] <= 0:
            raise BadGrid("cellsize must be positive")
        nodata = header.get("nodata_value", DEFAULT_NODATA)
        values: list[float] = []
        for tokens in tokens_by_line[body_start:]:
            for tok in tokens:
                try:
                    values.append(float(tok))
                except ValueError:
                    raise BadGrid(f"non-numeric elevation value: {tok!r}")
        if len(values) != ncols * nrows:
            raise BadGrid(
                f"expected {ncols * nrows} values, found {len(values)}")
        data = np.array(values, dtype=np.float64).reshape(nrows, ncols)
        data[data == nodata] = np.nan
        if not (np.isfinite(data) | np.isnan(data)).all():
            raise BadGrid("non-finite elevation value")
        return cls(data, xll, yll, header["cellsize"], nodata)

    @classmethod
    def from_file(cls, path: str) -> "DemGrid":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_ascii(fh.read())

    def to_ascii(self) -> str:
        lines = [
            f"ncols {self.ncols}",
            f"nrows {self.nrows}",
            f"xllcorner {_format_value(self.xll)}",
            f"yllcorner {_format_value(self.yll)}",
            f"cellsize {_format_value(self.cellsize)}",
            f"nodata_value {_format_value(self.nodata)}",
        ]
        for r in range(self.nrows):
            row = [
                _format_value(self.nodata if np.isnan(v) else float(v))
                for v in self.data[r]
            ]
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"


@dataclass
class FlowDirGrid:
    """Per-cell D8 direction codes aligned with a source DEM."""

    codes: np.ndarray
    dem: DemGrid = field(repr=False)

    def __post_init__(self) -> None:
        self.codes = np.asarray(self.codes, dtype=np.int8)
        if self.codes.shape != self.dem.data.shape:
            raise BadGrid("direction grid shape differs from DEM")

    def downstream(self, r: int, c: int) -> Optional[tuple[int, int]]:
        """The cell this one drains into, or None for OUTLET and NODATA."""
        code = int(self.codes[r, c])
        if code in (OUTLET, NODATA_DIR):
            return None
        dr, dc = DIR_OFFSETS[code]
        return r + dr, c + dc

    def to_ascii(self) -> str:
        as_dem = DemGrid(self.codes.astype(np.float64), self.dem.xll,
                         self.dem.yll, self.dem.cellsize, nodata=-1.0)
        # NODATA cells already carry -1, the debug-dump marker.
        return as_dem.to_ascii()


@dataclass
class AccumGrid:
    """Per-cell count of upstream cells (each cell counts itself)."""

    counts: np.ndarray
    dem: DemGrid = field(repr=False)

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != self.dem.data.shape:
            raise BadGrid("accumulation grid shape differs from DEM")
