"""Compact on-disk formats for the 2D products, plus size accounting.

Grid files share one layout: a short ASCII header that fully determines the
payload length, then raw row-major cell data. Occupancy cells are one byte
each (255 = unknown, otherwise round(p * 254)); height and slope cells are
little-endian float32 with NaN marking absent cells. No compression: the
formats are meant to be raw and composable with external compressors.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .column_extraction import HeightMap
from .occupancy_maps import OccupancyGrid
from .slope_map import SlopeMap
from .voxel_store import fmt_float

_MAGIC = "G2D"
_VERSION = 1
GRID_KINDS = ("occupancy", "height-floor", "height-floor-ceiling", "slope")


class GridFormatError(ValueError):
    """Grid file is malformed, truncated, or of the wrong kind."""


@dataclass(frozen=True)
class GridFileHeader:
    kind: str
    extent: tuple[int, int]
    resolution: float
    origin: tuple[float, float, float]
    robot: str | None = None  # occupancy files: which map ("uav"/"ugv")
    window: int | None = None  # slope files: fit neighborhood radius, cells

    def payload_bytes(self) -> int:
        M, N = self.extent
        per_cell = {"occupancy": 1, "height-floor": 4,
                    "height-floor-ceiling": 8, "slope": 4}[self.kind]
        return M * N * per_cell


def _header_bytes(hdr: GridFileHeader) -> bytes:
    M, N = hdr.extent
    ox, oy, oz = hdr.origin
    lines = [
        f"{_MAGIC} {_VERSION}",
        f"kind {hdr.kind}",
        f"extent {M} {N}",
        f"res {fmt_float(hdr.resolution)}",
        f"origin {fmt_float(ox)} {fmt_float(oy)} {fmt_float(oz)}",
    ]
    if hdr.kind == "occupancy":
        lines.append(f"robot {hdr.robot}")
    elif hdr.kind == "slope":
        lines.append(f"window {hdr.window}")
    return ("\n".join(lines) + "\n").encode("ascii")


def _parse_header(data: bytes, path) -> tuple[GridFileHeader, int]:
    offset = 0
    lines = []
    for _ in range(5):
        nl = data.find(b"\n", offset)
        if nl < 0:
            raise GridFormatError(f"{path}: incomplete grid header")
        lines.append(data[offset:nl].decode("ascii", errors="replace"))
        offset = nl + 1
    magic = lines[0].split()
    if len(magic) != 2 or magic[0] != _MAGIC:
        raise GridFormatError(f"{path}: bad magic line {lines[0]!r}")
    if magic[1] != str(_VERSION):
        raise GridFormatError(f"{path}: unsupported grid format version {magic[1]}")
    kind = _field(lines[1], "kind", 1, path)[0]
    if kind not in GRID_KINDS:
        raise GridFormatError(f"{path}: unknown grid kind {kind!r}")
    M, N = (int(v) for v in _field(lines[2], "extent", 2, path))
    if M < 1 or N < 1:
        raise GridFormatError(f"{path}: extent components must be >= 1")
    res = float(_field(lines[3], "res", 1, path)[0])
    origin = tuple(float(v) for v in _field(lines[4], "origin", 3, path))
    robot = None
    window = None
    if kind in ("occupancy", "slope"):
        nl = data.find(b"\n", offset)
        if nl < 0:
            raise GridFormatError(f"{path}: incomplete grid header")
        extra = data[offset:nl].decode("ascii", errors="replace")
        offset = nl + 1
        if kind == "occupancy":
            robot = _field(extra, "robot", 1, path)[0]
            if robot not in ("uav", "ugv"):
                raise GridFormatError(f"{path}: unknown robot tag {robot!r}")
        else:
            window = int(_field(extra, "window", 1, path)[0])
    hdr = GridFileHeader(kind, (M, N), res, origin, robot, window)
    if len(data) - offset != hdr.payload_bytes():
        raise GridFormatError(
            f"{path}: expected {hdr.payload_bytes()} payload bytes, "
            f"found {len(data) - offset}"
        )
    return hdr, offset


def _field(line: str, tag: str, n: int, path) -> list[str]:
    parts = line.split()
    if len(parts) != n + 1 or parts[0] != tag:
        raise GridFormatError(f"{path}: malformed {tag!r} line: {line!r}")
    return parts[1:]


# -- occupancy ------------------------------------------------------------


def write_occupancy(grid: OccupancyGrid, path: str | Path) -> None:
    """One byte per cell: 255 = unknown, else round(p * 254) in [0, 254]."""
    hdr = GridFileHeader("occupancy", grid.extent, grid.resolution,
                         grid.origin, robot=grid.kind)
    quantized = np.full(grid.extent, 255, dtype=np.uint8)
    known = grid.values >= 0.0
    quantized[known] = np.rint(grid.values[known] * 254.0).astype(np.uint8)
    Path(path).write_bytes(_header_bytes(hdr) + quantized.tobytes())


def read_occupancy(path: str | Path) -> OccupancyGrid:
    hdr, payload = _read_kind(path, "occupancy")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(hdr.extent)
    values = np.where(raw == 255, -1.0, raw / 254.0)
    return OccupancyGrid(hdr.robot, hdr.resolution, hdr.origin, values)


# -- height ---------------------------------------------------------------


def write_height(height: HeightMap, include_ceiling: bool, path: str | Path) -> None:
    """Row-major float32 floor plane, then the ceiling plane if included."""
    kind = "height-floor-ceiling" if include_ceiling else "height-floor"
    hdr = GridFileHeader(kind, height.extent, height.resolution, height.origin)
    payload = height.floor.astype("<f4").tobytes()
    if include_ceiling:
        payload += height.ceiling.astype("<f4").tobytes()
    Path(path).write_bytes(_header_bytes(hdr) + payload)


def read_height(path: str | Path) -> HeightMap:
    """Read either height kind; floor-only files get an all-NaN ceiling."""
    hdr, payload = _read_kind(path, ("height-floor", "height-floor-ceiling"))
    M, N = hdr.extent
    plane = M * N * 4
    floor = np.frombuffer(payload[:plane], dtype="<f4").reshape(M, N).astype(np.float64)
    if hdr.kind == "height-floor-ceiling":
        ceiling = np.frombuffer(payload[plane:], dtype="<f4").reshape(M, N).astype(np.float64)
    else:
        ceiling = np.full((M, N), np.nan)
    return HeightMap(hdr.resolution, hdr.origin, floor, ceiling)


# -- slope ----------------------------------------------------------------


def write_slope(slope: SlopeMap, path: str | Path) -> None:
    """Row-major float32 slope magnitudes; the degeneracy flags stay in memory."""
    hdr = GridFileHeader("slope", slope.extent, slope.resolution, slope.origin,
                         window=slope.neighborhood_cells)
    Path(path).write_bytes(_header_bytes(hdr) + slope.values.astype("<f4").tobytes())


def read_slope(path: str | Path) -> SlopeMap:
    hdr, payload = _read_kind(path, "slope")
    values = np.frombuffer(payload, dtype="<f4").reshape(hdr.extent).astype(np.float64)
    return SlopeMap(hdr.resolution, hdr.origin, values,
                    np.zeros(hdr.extent, dtype=bool), hdr.window)


# -- generic --------------------------------------------------------------


def read_grid(path: str | Path) -> tuple[GridFileHeader, list[np.ndarray]]:
    """Read any grid file into float64 planes (occupancy decoded to values)."""
    data = Path(path).read_bytes()
    hdr, offset = _parse_header(data, path)
    payload = data[offset:]
    M, N = hdr.extent
    if hdr.kind == "occupancy":
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(M, N)
        planes = [np.where(raw == 255, -1.0, raw / 254.0)]
    elif hdr.kind == "height-floor-ceiling":
        flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        planes = [flat[:M * N].reshape(M, N), flat[M * N:].reshape(M, N)]
    else:
        planes = [np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(M, N)]
    return hdr, planes


def _read_kind(path, kinds) -> tuple[GridFileHeader, bytes]:
    if isinstance(kinds, str):
        kinds = (kinds,)
    data = Path(path).read_bytes()
    hdr, offset = _parse_header(data, path)
    if hdr.kind not in kinds:
        raise GridFormatError(
            f"{path}: expected a {' or '.join(kinds)} file, found kind {hdr.kind!r}"
        )
    return hdr, data[offset:]


# -- PGM export -------------------------------------------------------------


def write_occupancy_pgm(grid: OccupancyGrid, path: str | Path) -> None:
    """Plain ASCII PGM for external viewers: unknown mid-gray 127, free light.

    Rows run from the highest y index down so +y points up in the image.
    Known cells map to 255 - round(p * 255); a known cell that would collide
    with the reserved 127 is nudged to 126.
    """
    values = grid.values
    M, N = values.shape
    lines = [f"P2\n{M} {N}\n255\n"]
    for n in range(N - 1, -1, -1):
        row = []
        for m in range(M):
            v = values[m, n]
            if v < 0.0:
                gray = 127
            else:
                gray = 255 - int(round(v * 255.0))
                if gray == 127:
                    gray = 126
            row.append(str(gray))
        lines.append(" ".join(row) + "\n")
    Path(path).write_text("".join(lines), encoding="ascii")


# -- size accounting --------------------------------------------------------


@dataclass(frozen=True)
class SizeReport:
    """Raw byte counts of 2D artifacts relative to the source voxel file."""

    voxel_label: str
    voxel_bytes: int
    entries: tuple[tuple[str, int], ...]

    def percent(self, size: int) -> float:
        return round(size / self.voxel_bytes * 100.0, 1)

    def rows(self) -> list[tuple[str, int, float]]:
        rows = [(self.voxel_label, self.voxel_bytes, 100.0)]
        rows.extend((label, size, self.percent(size)) for label, size in self.entries)
        return rows

    def to_csv(self) -> str:
        out = ["artifact,bytes,percent_of_voxel_map"]
        out.extend(f"{label},{size},{pct:.1f}" for label, size, pct in self.rows())
        return "\n".join(out) + "\n"


def size_report(voxel_path: str | Path, grid_paths: dict | list) -> SizeReport:
    """Compare raw file sizes; an artifact may group several files.

    grid_paths is either a list of paths (labelled by file name) or a mapping
    of label to path or list of paths whose sizes are summed, which covers
    map-plus-height style artifacts.
    """
    voxel_path = Path(voxel_path)
    voxel_bytes = voxel_path.stat().st_size
    if isinstance(grid_paths, dict):
        items = grid_paths.items()
    else:
        items = ((Path(p).name, p) for p in grid_paths)
    entries = []
    for label, paths in items:
        if isinstance(paths, (str, Path)):
            paths = [paths]
        entries.append((label, sum(Path(p).stat().st_size for p in paths)))
    return SizeReport(voxel_path.name, voxel_bytes, tuple(entries))
