"""UAV and UGV occupancy grids from column ranges, heights, and slopes.

Cells with surviving free space are free (0). A non-free cell next to free
space gets the ratio of its occupied ranges overlapping a free neighbor's
floor-to-ceiling span, maximized over neighbors; below the minimum ratio it
stays unknown (-1). The ground-robot map additionally turns free cells
steeper than the traversable slope into fully occupied ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .column_extraction import ColumnRanges, EMPTY_RANGES, HeightMap, HeightRange
from .slope_map import SlopeMap
from .voxel_store import Cell

NEIGHBORS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass
class OccupancyGrid:
    """M x N grid of -1 (unknown) or occupancy in [0, 1] (0 = free)."""

    kind: str  # "uav" or "ugv"
    resolution: float
    origin: tuple[float, float, float]
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("uav", "ugv"):
            raise ValueError(f"kind must be 'uav' or 'ugv', got {self.kind!r}")

    @property
    def extent(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def free_mask(self) -> np.ndarray:
        return self.values == 0.0

    @property
    def occupied_mask(self) -> np.ndarray:
        return self.values > 0.0

    @property
    def unknown_mask(self) -> np.ndarray:
        return self.values == -1.0


def overlap_length(a: HeightRange, b: HeightRange) -> float:
    """Length of the overlap of two vertical ranges, 0 when disjoint."""
    return max(0.0, min(a.high, b.high) - max(a.low, b.low))


def occupancy_value(cell: Cell, occupied: tuple[HeightRange, ...],
                    height: HeightMap, free_mask: np.ndarray) -> float | None:
    """Max over free 8-neighbors of the occupied-overlap ratio, in [0, 1].

    For each free neighbor, the cell's occupied ranges are intersected with
    the neighbor's floor-to-ceiling span and the summed overlap is divided by
    that span's height. Ratios above 1 (obstacle taller than the neighboring
    navigable space) clamp to 1. Returns None when no 8-neighbor is free; a
    cell with no occupied ranges but a free neighbor yields 0.0.
    """
    m, n = cell
    M, N = height.extent
    floor = height.floor
    ceiling = height.ceiling
    best = None
    for dm, dn in NEIGHBORS_8:
        mm = m + dm
        nn = n + dn
        if not (0 <= mm < M and 0 <= nn < N) or not free_mask[mm, nn]:
            continue
        span = HeightRange(floor[mm, nn], ceiling[mm, nn])
        total = 0.0
        for r in occupied:
            total += overlap_length(span, r)
        ratio = total / (span.high - span.low)
        if ratio > 1.0:
            ratio = 1.0
        if best is None or ratio > best:
            best = ratio
    return best


def uav_cell_value(m: int, n: int, ranges: dict[Cell, ColumnRanges],
                   height: HeightMap, free_mask: np.ndarray,
                   min_occupancy: float) -> float:
    """Aerial-map value of one cell; the single per-cell rule for all builds."""
    if free_mask[m, n]:
        return 0.0
    cr = ranges.get((m, n), EMPTY_RANGES)
    occ = occupancy_value((m, n), cr.occupied, height, free_mask)
    if occ is not None and occ >= min_occupancy:
        return occ
    return -1.0


def ugv_cell_value(uav_value: float, slope_value: float, max_slope: float) -> float:
    """Ground-map value: free cells steeper than max_slope become occupied."""
    if uav_value == 0.0 and slope_value == slope_value and slope_value > max_slope:
        return 1.0
    return uav_value


def build_uav_map(ranges: dict[Cell, ColumnRanges], height: HeightMap,
                  min_occupancy: float) -> OccupancyGrid:
    """Aerial occupancy grid: free where navigable, ratio-valued at boundaries."""
    if not (0.0 < min_occupancy <= 1.0):
        raise ValueError(f"min_occupancy must be in (0, 1], got {min_occupancy}")
    free = height.present_mask
    values = np.full(free.shape, -1.0)
    values[free] = 0.0
    boundary = _dilate_mask(free) & ~free
    for m, n in zip(*(idx.tolist() for idx in np.nonzero(boundary))):
        values[m, n] = uav_cell_value(m, n, ranges, height, free, min_occupancy)
    return OccupancyGrid("uav", height.resolution, height.origin, values)


def build_ugv_map(uav: OccupancyGrid, slope: SlopeMap, max_slope: float) -> OccupancyGrid:
    """Copy of the aerial map with too-steep free cells marked fully occupied.

    Degenerate-fit cells carry slope 0, so they stay free here by design.
    """
    if uav.kind != "uav":
        raise ValueError(f"expected a uav grid, got kind {uav.kind!r}")
    if max_slope <= 0:
        raise ValueError(f"max_slope must be positive, got {max_slope}")
    values = uav.values.copy()
    known = ~np.isnan(slope.values)
    steep = np.zeros(known.shape, dtype=bool)
    steep[known] = slope.values[known] > max_slope
    values[steep & (values == 0.0)] = 1.0
    return OccupancyGrid("ugv", uav.resolution, uav.origin, values)


def _dilate_mask(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    M, N = mask.shape
    for dm, dn in NEIGHBORS_8:
        src = mask[max(0, -dm):M - max(0, dm), max(0, -dn):N - max(0, dn)]
        out[max(0, dm):M - max(0, -dm), max(0, dn):N - max(0, -dn)] |= src
    return out
