"""Free/occupied range extraction per column and the 2D height map.

A column's voxel runs become vertical ranges in world meters, free ranges
shorter than the robot's vertical safety margin are dropped, and the
surviving free space defines one floor/ceiling pair per cell.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .voxel_store import Cell, ColumnView, VoxelMap, VoxelState

# Range heights are differences of origin_z + k*res terms, so an exactly
# threshold-tall range can land a few ulps below the threshold; the epsilon
# keeps those (removal is strict-below-threshold).
_CLEARANCE_EPS = 1e-9


class HeightRange(NamedTuple):
    low: float
    high: float


class HeightCell(NamedTuple):
    floor: float
    ceiling: float


@dataclass(frozen=True)
class ColumnRanges:
    """Ordered, disjoint, non-adjacent vertical ranges of one column."""

    free: tuple[HeightRange, ...]
    occupied: tuple[HeightRange, ...]

    def is_empty(self) -> bool:
        return not self.free and not self.occupied


EMPTY_RANGES = ColumnRanges((), ())


def extract_ranges(view: ColumnView, resolution: float, origin_z: float) -> ColumnRanges:
    """Convert a column's runs to world-meter ranges; Unknown yields nothing.

    A run starting at index z0 with length L spans the voxel faces
    [origin_z + z0*res, origin_z + (z0+L)*res], so range heights are exact
    voxel-count multiples of the resolution.
    """
    free: list[HeightRange] = []
    occupied: list[HeightRange] = []
    for z0, length, state in view.runs:
        if state == VoxelState.UNKNOWN:
            continue
        rng = HeightRange(origin_z + z0 * resolution,
                          origin_z + (z0 + length) * resolution)
        if state == VoxelState.FREE:
            free.append(rng)
        else:
            occupied.append(rng)
    return ColumnRanges(tuple(free), tuple(occupied))


def filter_free_ranges(ranges: ColumnRanges, min_clearance: float) -> ColumnRanges:
    """Drop free ranges shorter than min_clearance; occupied pass through.

    Exactly threshold-tall ranges are kept (removal uses a strict less-than).
    """
    if min_clearance <= 0:
        raise ValueError(f"min_clearance must be positive, got {min_clearance}")
    kept = tuple(r for r in ranges.free
                 if r.high - r.low >= min_clearance - _CLEARANCE_EPS)
    return ColumnRanges(kept, ranges.occupied)


def height_from_ranges(ranges: ColumnRanges) -> HeightCell | None:
    """Floor = bottom of the first free range, ceiling = top of the last.

    Assumes a single level of navigable space; disjoint free ranges collapse
    into one floor-to-ceiling span. Returns None when no free range survives.
    """
    if not ranges.free:
        return None
    return HeightCell(ranges.free[0].low, ranges.free[-1].high)


def convert_column(view: ColumnView, resolution: float, origin_z: float,
                   min_clearance: float) -> tuple[ColumnRanges, HeightCell | None]:
    """Extract, filter, and reduce one column; the shared per-column path."""
    ranges = filter_free_ranges(extract_ranges(view, resolution, origin_z),
                                min_clearance)
    return ranges, height_from_ranges(ranges)


@dataclass
class HeightMap:
    """Per-cell optional floor/ceiling heights, NaN marking absent cells."""

    resolution: float
    origin: tuple[float, float, float]
    floor: np.ndarray
    ceiling: np.ndarray

    @property
    def extent(self) -> tuple[int, int]:
        return self.floor.shape

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.floor)

    def cell(self, m: int, n: int) -> HeightCell | None:
        f = self.floor[m, n]
        if np.isnan(f):
            return None
        return HeightCell(float(f), float(self.ceiling[m, n]))


def build_height_map(vmap: VoxelMap,
                     min_clearance: float) -> tuple[HeightMap, dict[Cell, ColumnRanges]]:
    """Convert every non-empty column; ranges are retained for occupancy.

    The returned dict holds post-filter ranges for each column that still has
    any free or occupied range (occupied-only columns matter later).
    """
    M, N, K = vmap.extent
    floor = np.full((M, N), np.nan)
    ceiling = np.full((M, N), np.nan)
    ranges: dict[Cell, ColumnRanges] = {}
    for cell in vmap.nonempty_columns():
        cr, hc = convert_column(vmap.column(*cell), vmap.resolution,
                                vmap.origin[2], min_clearance)
        if not cr.is_empty():
            ranges[cell] = cr
        if hc is not None:
            floor[cell] = hc.floor
            ceiling[cell] = hc.ceiling
    return HeightMap(vmap.resolution, vmap.origin, floor, ceiling), ranges
