import numpy as np
import pytest

from voxflat import (ColumnRanges, HeightCell, HeightRange, VoxelMap,
                     VoxelState, build_height_map, extract_ranges,
                     filter_free_ranges, height_from_ranges)
from voxflat.scenes import SceneSpec, generate

from oracles import column_from_array, random_column, rasterize_ranges

U, O, F = VoxelState.UNKNOWN, VoxelState.OCCUPIED, VoxelState.FREE


def test_all_unknown_column_yields_no_ranges():
    view = column_from_array(np.zeros(8, dtype=np.uint8))
    cr = extract_ranges(view, 0.1, 0.0)
    assert cr.free == () and cr.occupied == ()


def test_index_to_meters_rule():
    col = np.zeros(6, dtype=np.uint8)
    col[1] = col[2] = int(F)
    cr = extract_ranges(column_from_array(col), 0.1, 0.0)
    # run (1, 2) -> [origin_z + 1*res, origin_z + 3*res]
    assert cr.free == (HeightRange(0.1, 0.30000000000000004),)
    assert cr.occupied == ()


def test_unknown_gap_splits_free_ranges():
    col = np.zeros(6, dtype=np.uint8)
    col[1] = int(F)
    col[3] = int(F)
    cr = extract_ranges(column_from_array(col), 0.1, 0.0)
    assert len(cr.free) == 2
    assert cr.free[0].high <= cr.free[1].low


def test_extraction_round_trips_through_rasterization():
    rng = np.random.default_rng(21)
    for _ in range(200):
        K = int(rng.integers(4, 24))
        col = random_column(rng, K)
        cr = extract_ranges(column_from_array(col), 0.1, 0.0)
        assert np.array_equal(rasterize_ranges(cr, 0.1, 0.0, K), col)


def test_filter_drops_short_free_ranges():
    cr = ColumnRanges((HeightRange(0.0, 0.5),), ())
    assert filter_free_ranges(cr, 1.0).free == ()
    cr = ColumnRanges((HeightRange(0.0, 2.0),), ())
    assert filter_free_ranges(cr, 1.0) == cr


def test_filter_keeps_exactly_threshold_tall_ranges():
    # ten voxels at 0.1 m from index 33: the float height is a hair under 1.0
    low = 33 * 0.1
    high = 43 * 0.1
    assert high - low < 1.0
    cr = ColumnRanges((HeightRange(low, high),), ())
    assert filter_free_ranges(cr, 1.0).free == (HeightRange(low, high),)


def test_filter_passes_occupied_untouched():
    occ = (HeightRange(0.0, 0.1), HeightRange(0.5, 0.6))
    cr = ColumnRanges((HeightRange(0.0, 0.2),), occ)
    assert filter_free_ranges(cr, 1.0).occupied == occ


def test_filter_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        filter_free_ranges(ColumnRanges((), ()), 0.0)


def test_height_from_ranges():
    assert height_from_ranges(ColumnRanges((), ())) is None
    one = ColumnRanges((HeightRange(0.1, 2.0),), ())
    assert height_from_ranges(one) == HeightCell(0.1, 2.0)
    # disjoint ranges collapse: bottom of first, top of last
    two = ColumnRanges((HeightRange(0.0, 1.5), HeightRange(3.0, 5.0)), ())
    assert height_from_ranges(two) == HeightCell(0.0, 5.0)


def test_flat_room_height_map_is_uniform():
    vmap, truth = generate(SceneSpec(kind="flat-room"))
    height, ranges = build_height_map(vmap, 1.0)
    claimed = ~np.isnan(truth.floor)
    assert claimed.any()
    floors = height.floor[claimed]
    ceilings = height.ceiling[claimed]
    assert np.all(floors == 0.1)
    assert np.all(ceilings == ceilings[0])
    assert 2.8 <= ceilings[0] - 0.1 <= 3.0


def test_crawl_space_columns_have_no_height_cell():
    vmap, truth = generate(SceneSpec(kind="crawl-space"))
    height, _ = build_height_map(vmap, 1.0)
    strip = truth.uav != 0  # claimed non-free cells include the crawl strip
    M, N, _ = vmap.extent
    # every interior cell the truth marks occupied/unknown must lack a height
    for m in range(2, M - 2):
        for n in range(2, N - 2):
            if truth.uav[m, n] in (-1, 1):
                assert np.isnan(height.floor[m, n])
    assert strip.any()


def test_empty_map_has_empty_height_map():
    vmap = VoxelMap(0.1, (0, 0, 0), (6, 6, 6))
    height, ranges = build_height_map(vmap, 1.0)
    assert np.isnan(height.floor).all()
    assert ranges == {}


def test_height_map_invariants_on_random_maps():
    rng = np.random.default_rng(33)
    for _ in range(20):
        vmap = VoxelMap(0.1, (0, 0, -0.5), (7, 6, 20))
        updates = [(int(rng.integers(7)), int(rng.integers(6)),
                    int(rng.integers(20)), VoxelState(int(rng.integers(0, 3))))
                   for _ in range(120)]
        vmap.apply_cells(updates)
        height, ranges = build_height_map(vmap, 0.4)
        for m in range(7):
            for n in range(6):
                cr = ranges.get((m, n), ColumnRanges((), ()))
                for r in cr.free:
                    assert r.high - r.low >= 0.4 - 1e-9
                cell = height.cell(m, n)
                assert (cell is not None) == bool(cr.free)
                if cell is not None:
                    assert all(cell.floor <= r.low for r in cr.free)
                    assert all(cell.ceiling >= r.high for r in cr.free)
                    assert cell.ceiling - cell.floor >= 0.4 - 1e-9
