"""Least-squares floor-plane fitting and the per-cell slope magnitude map.

Each cell's slope is the gradient magnitude of the plane a*x + b*y + c = z
fitted to the floor heights of present cells in a square (Chebyshev)
neighborhood around it, sampled at cell centers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .column_extraction import HeightMap

# A normal system whose condition estimate exceeds this is treated as
# degenerate (collinear or near-collinear sample layout).
_MAX_CONDITION = 1e12


class PlaneFit(NamedTuple):
    a: float  # slope along x, meters per meter
    b: float  # slope along y
    c: float  # offset, meters


def fit_plane(samples: Sequence[tuple[float, float, float]]) -> PlaneFit | None:
    """Least-squares plane through (x, y, z) samples, or None if degenerate.

    Minimizes sum((a*x + b*y + c - z)^2). The normal equations are solved in
    mean-centered coordinates, which gives the same minimizer but keeps the
    solve well conditioned for maps far from the world origin; degeneracy
    (fewer than 3 samples, collinear layout, condition estimate above 1e12)
    yields None rather than a garbage plane.
    """
    if len(samples) < 3:
        return None
    xs = []
    ys = []
    zs = []
    for x, y, z in samples:
        xs.append(x)
        ys.append(y)
        zs.append(z)
    return _fit_xyz(xs, ys, zs)


def _fit_xyz(xs, ys, zs) -> PlaneFit | None:
    n = len(xs)
    if n < 3:
        return None
    mx = sum(xs) / n
    my = sum(ys) / n
    mz = sum(zs) / n
    cxx = cxy = cyy = cxz = cyz = 0.0
    for x, y, z in zip(xs, ys, zs):
        dx = x - mx
        dy = y - my
        dz = z - mz
        cxx += dx * dx
        cxy += dx * dy
        cyy += dy * dy
        cxz += dx * dz
        cyz += dy * dz
    # Eigenvalues of the centered 2x2 normal matrix bound its conditioning.
    trace = cxx + cyy
    disc = math.sqrt(max((cxx - cyy) * (cxx - cyy) + 4.0 * cxy * cxy, 0.0))
    lam_min = (trace - disc) / 2.0
    lam_max = (trace + disc) / 2.0
    if lam_min <= 0.0 or lam_max > lam_min * _MAX_CONDITION:
        return None
    det = cxx * cyy - cxy * cxy
    a = (cyy * cxz - cxy * cyz) / det
    b = (cxx * cyz - cxy * cxz) / det
    return PlaneFit(a, b, mz - a * mx - b * my)


@dataclass
class SlopeMap:
    """Per-cell slope magnitude; NaN where the height cell is absent.

    Cells where the plane fit was degenerate carry slope 0 and are flagged,
    so they stay navigable downstream instead of blocking frontier cells.
    """

    resolution: float
    origin: tuple[float, float, float]
    values: np.ndarray
    degenerate: np.ndarray
    neighborhood_cells: int

    @property
    def extent(self) -> tuple[int, int]:
        return self.values.shape


def slope_at(height: HeightMap, m: int, n: int, radius: int) -> float | None:
    """Slope magnitude at one present cell, None if absent or degenerate."""
    if radius < 1:
        raise ValueError(f"neighborhood radius must be >= 1, got {radius}")
    if np.isnan(height.floor[m, n]):
        return None
    M, N = height.extent
    return _slope_cell(height.floor, M, N, m, n, radius,
                       height.resolution, height.origin[0], height.origin[1])


def _slope_cell(rows, M: int, N: int, m: int, n: int, radius: int,
                res: float, ox: float, oy: float) -> float | None:
    """Fit over the present cells of the Chebyshev neighborhood, center included.

    `rows` is anything indexable as rows[m][n] (ndarray or list of lists);
    both produce identical IEEE doubles, so callers can pick whichever is
    faster without changing results.
    """
    n0 = max(0, n - radius)
    n1 = min(N, n + radius + 1)
    y_of = [oy + (nn + 0.5) * res for nn in range(n0, n1)]
    xs = []
    ys = []
    zs = []
    for mm in range(max(0, m - radius), min(M, m + radius + 1)):
        row = rows[mm]
        x = ox + (mm + 0.5) * res
        for nn in range(n0, n1):
            z = row[nn]
            if z == z:  # NaN check
                xs.append(x)
                ys.append(y_of[nn - n0])
                zs.append(z)
    fit = _fit_xyz(xs, ys, zs)
    if fit is None:
        return None
    return math.hypot(fit.a, fit.b)


def build_slope_map(height: HeightMap, radius: int) -> SlopeMap:
    """slope_at over every present cell; degenerate fits become flagged zeros."""
    if radius < 1:
        raise ValueError(f"neighborhood radius must be >= 1, got {radius}")
    M, N = height.extent
    values = np.full((M, N), np.nan)
    degenerate = np.zeros((M, N), dtype=bool)
    rows = height.floor.tolist()
    present_m, present_n = np.nonzero(height.present_mask)
    for m, n in zip(present_m.tolist(), present_n.tolist()):
        s = _slope_cell(rows, M, N, m, n, radius,
                        height.resolution, height.origin[0], height.origin[1])
        if s is None:
            values[m, n] = 0.0
            degenerate[m, n] = True
        else:
            values[m, n] = s
    return SlopeMap(height.resolution, height.origin, values, degenerate, radius)
