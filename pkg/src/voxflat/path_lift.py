"""2D grid planning, 2D-to-3D path lifting, and spherical clearance for UAVs.

The planner is deliberately minimal demo plumbing (shortest 8-connected
path); the substance here is lifting: each waypoint's height is a windowed
maximum of nearby floor heights plus an offset, and aerial paths get an
additional sphere check against every height cell within the safety radius.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .column_extraction import HeightMap
from .occupancy_maps import OccupancyGrid
from .voxel_store import Cell, cell_center

Waypoint3D = tuple[float, float, float]

_SQRT2 = math.sqrt(2.0)
_STEPS = ((-1, -1, _SQRT2), (-1, 0, 1.0), (-1, 1, _SQRT2), (0, -1, 1.0),
          (0, 1, 1.0), (1, -1, _SQRT2), (1, 0, 1.0), (1, 1, _SQRT2))


@dataclass(frozen=True)
class LiftParams:
    """How a 2D path becomes 3D.

    lookahead is the window half-width in waypoints: waypoint i takes the
    maximum floor over waypoints i-lookahead..i+lookahead (clipped to the
    path) plus height_offset. UAV mode also needs safety_radius, the radius
    of the collision sphere enforced afterwards.
    """

    mode: str  # "uav" or "ugv"
    lookahead: int
    height_offset: float
    safety_radius: float | None = None

    def __post_init__(self):
        if self.mode not in ("uav", "ugv"):
            raise ValueError(f"mode must be 'uav' or 'ugv', got {self.mode!r}")
        if self.lookahead < 0:
            raise ValueError(f"lookahead must be >= 0, got {self.lookahead}")
        if self.mode == "uav":
            if self.safety_radius is None or self.safety_radius <= 0:
                raise ValueError("uav mode requires a positive safety_radius")

    @classmethod
    def uav_defaults(cls, resolution: float) -> "LiftParams":
        # 2 m of path lookahead, 1 m above floor, 0.5 m sphere.
        return cls("uav", round(2.0 / resolution), 1.0, 0.5)

    @classmethod
    def ugv_defaults(cls, resolution: float) -> "LiftParams":
        # 0.5 m lookahead, 0.1 m above floor, no sphere.
        return cls("ugv", round(0.5 / resolution), 0.1, None)


def plan_2d(grid: OccupancyGrid, start: Cell, goal: Cell) -> list[Cell] | None:
    """Shortest 8-connected path through free cells, or None if disconnected.

    Straight steps cost 1 and diagonal steps sqrt(2); ties break on (m, n)
    order so results are deterministic. Non-free start or goal is an error.
    """
    values = grid.values
    M, N = values.shape
    for name, (m, n) in (("start", start), ("goal", goal)):
        if not (0 <= m < M and 0 <= n < N) or values[m, n] != 0.0:
            raise ValueError(f"{name} cell ({m}, {n}) is not a free cell")
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    if start == goal:
        return [start]

    def heuristic(cell: Cell) -> float:
        dm = abs(cell[0] - goal[0])
        dn = abs(cell[1] - goal[1])
        return abs(dm - dn) + _SQRT2 * min(dm, dn)

    best_g: dict[Cell, float] = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    heap: list[tuple[float, int, int]] = [(heuristic(start), *start)]
    done: set[Cell] = set()
    while heap:
        f, m, n = heapq.heappop(heap)
        cell = (m, n)
        if cell in done:
            continue
        if cell == goal:
            path = [cell]
            while cell != start:
                cell = parent[cell]
                path.append(cell)
            path.reverse()
            return path
        done.add(cell)
        g = best_g[cell]
        for dm, dn, cost in _STEPS:
            mm = m + dm
            nn = n + dn
            if not (0 <= mm < M and 0 <= nn < N) or values[mm, nn] != 0.0:
                continue
            nxt = (mm, nn)
            ng = g + cost
            if nxt not in best_g or ng < best_g[nxt]:
                best_g[nxt] = ng
                parent[nxt] = cell
                heapq.heappush(heap, (ng + heuristic(nxt), mm, nn))
    return None


def lift_path(path: Sequence[Cell], height: HeightMap,
              params: LiftParams) -> list[Waypoint3D]:
    """Assign each waypoint the windowed-max floor height plus the offset.

    The window is clipped at the path ends. Every waypoint must sit on a
    present height cell; the raised error names the offending waypoint.
    """
    M, N = height.extent
    floors: list[float] = []
    for idx, (m, n) in enumerate(path):
        if not (0 <= m < M and 0 <= n < N) or np.isnan(height.floor[m, n]):
            raise ValueError(
                f"waypoint {idx} at cell ({m}, {n}) has no height data"
            )
        floors.append(float(height.floor[m, n]))
    w = params.lookahead
    out: list[Waypoint3D] = []
    count = len(path)
    for i, (m, n) in enumerate(path):
        window = floors[max(0, i - w):min(count, i + w + 1)]
        x, y = cell_center(height.origin, height.resolution, m, n)
        out.append((x, y, max(window) + params.height_offset))
    return out


def enforce_clearance(path: Sequence[Waypoint3D], height: HeightMap,
                      radius: float) -> list[Waypoint3D]:
    """Move waypoints so a sphere of the given radius fits between floor and
    ceiling of every height cell whose center lies within the radius.

    A violating waypoint is clamped to the nearest end of the feasible
    interval [max floor + radius, min ceiling - radius], overriding whatever
    offset lifting applied. An empty interval (navigable span locally thinner
    than the sphere) is an error naming the waypoint, never a compromise.
    """
    if radius <= 0:
        raise ValueError(f"clearance radius must be positive, got {radius}")
    res = height.resolution
    ox, oy = height.origin[0], height.origin[1]
    floor = height.floor
    ceiling = height.ceiling
    M, N = height.extent
    reach = math.ceil(radius / res)
    offsets = [(dm, dn)
               for dm in range(-reach, reach + 1)
               for dn in range(-reach, reach + 1)
               if math.hypot(dm, dn) * res <= radius * (1.0 + 1e-12)]
    out: list[Waypoint3D] = []
    for idx, (x, y, z) in enumerate(path):
        m = int(math.floor((x - ox) / res))
        n = int(math.floor((y - oy) / res))
        max_floor = -math.inf
        min_ceiling = math.inf
        for dm, dn in offsets:
            mm = m + dm
            nn = n + dn
            if not (0 <= mm < M and 0 <= nn < N):
                continue
            f = floor[mm, nn]
            if f == f:  # NaN check
                if f > max_floor:
                    max_floor = float(f)
                c = float(ceiling[mm, nn])
                if c < min_ceiling:
                    min_ceiling = c
        if max_floor == -math.inf:
            out.append((x, y, z))
            continue
        lo = max_floor + radius
        hi = min_ceiling - radius
        if lo > hi:
            raise ValueError(
                f"waypoint {idx}: navigable span [{max_floor}, {min_ceiling}] "
                f"is too narrow for clearance radius {radius}"
            )
        if z < lo:
            z = lo
        elif z > hi:
            z = hi
        out.append((x, y, z))
    return out


# -- path files -----------------------------------------------------------
# One waypoint per line: "m n" (2D, grid indices) or "x y z" (3D, meters).
# Lines starting with '#' are comments; blank lines are ignored.


def write_path_2d(path: Sequence[Cell], file: str | Path) -> None:
    Path(file).write_text("".join(f"{m} {n}\n" for m, n in path), encoding="ascii")


def read_path_2d(file: str | Path) -> list[Cell]:
    out: list[Cell] = []
    for lineno, parts in _path_lines(file):
        if len(parts) != 2:
            raise ValueError(f"{file}:{lineno}: expected 'm n', got {' '.join(parts)!r}")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"{file}:{lineno}: unreadable grid indices") from None
    return out


def write_path_3d(path: Sequence[Waypoint3D], file: str | Path) -> None:
    Path(file).write_text(
        "".join(f"{x!r} {y!r} {z!r}\n" for x, y, z in path), encoding="ascii")


def read_path_3d(file: str | Path) -> list[Waypoint3D]:
    out: list[Waypoint3D] = []
    for lineno, parts in _path_lines(file):
        if len(parts) != 3:
            raise ValueError(f"{file}:{lineno}: expected 'x y z', got {' '.join(parts)!r}")
        try:
            out.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError:
            raise ValueError(f"{file}:{lineno}: unreadable coordinates") from None
    return out


def _path_lines(file: str | Path):
    for lineno, raw in enumerate(Path(file).read_text(encoding="ascii").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()
