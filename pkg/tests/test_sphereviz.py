import csv
import math

import numpy as np
import pytest

from cmaslab.landscape import (Landscape, FlockingConfig, build_landscape,
                               hamming, hamming_ball, point_from_str)
from cmaslab.sphereviz import (SphericalGrid, build_grid, place_point, render,
                               _cell_corners, MARKER_KINDS)


class TestBuildGrid:
    def test_ring1_matches_neighbor_set(self):
        grid = build_grid(5, point_from_str("11111"))
        assert [format(p, "05b") for p in grid.rings[1]] == \
            ["01111", "10111", "11011", "11101", "11110"]

    def test_ring2_matches_double_flip_set(self):
        grid = build_grid(5, point_from_str("11111"))
        assert [format(p, "05b") for p in grid.rings[2]] == \
            ["00111", "10011", "11001", "11100", "01110"]

    def test_last_ring_is_complement(self):
        grid = build_grid(5, point_from_str("11111"))
        assert grid.rings[5] == [0]
        grid2 = build_grid(6, 0b101010)
        assert grid2.rings[6] == [0b010101]

    def test_ring_sizes_and_total(self):
        for n in (4, 7, 12):
            grid = build_grid(n, 0)
            assert len(grid.rings[0]) == len(grid.rings[n]) == 1
            assert all(len(grid.rings[d]) == n for d in range(1, n))
            total = sum(len(r) for r in grid.rings)
            assert total == n * (n - 1) + 2

    @pytest.mark.parametrize("n", range(2, 17))
    def test_distance_and_adjacency(self, n):
        focus = (0b1011001110101101 & ((1 << n) - 1)) or 1
        grid = build_grid(n, focus)
        for d, ring in enumerate(grid.rings):
            for p in ring:
                assert hamming(p, focus) == d
        # ring-d point j neighbors ring-(d+1) points j and j-1 (mod N)
        for d in range(n):
            ring, nxt = grid.rings[d], grid.rings[d + 1]
            for j in range(len(nxt) if len(ring) == 1 else len(ring)):
                p = ring[j % len(ring)]
                assert hamming(p, nxt[j % len(nxt)]) == 1
                assert hamming(p, nxt[(j - 1) % len(nxt)]) == 1

    def test_bounds(self):
        with pytest.raises(ValueError):
            build_grid(1, 0)
        with pytest.raises(ValueError):
            build_grid(25, 0)
        with pytest.raises(ValueError):
            build_grid(5, 32)


class TestPlacePoint:
    def test_focus_at_pole(self):
        grid = build_grid(6, 0b110100)
        placement = place_point(0b110100, grid)
        assert placement.latitude == 0
        assert placement.cell is None

    def test_grid_point_maps_to_own_slot(self):
        grid = build_grid(6, 0)
        for d, ring in enumerate(grid.rings):
            for p in set(ring):
                placement = place_point(p, grid)
                assert placement.latitude == d
                if grid.slot(p)[0] == d:
                    assert placement.cell is None

    def test_latitude_equals_distance(self):
        grid = build_grid(8, 0b10110101)
        for p in range(0, 256, 7):
            assert place_point(p, grid).latitude == hamming(p, grid.focus)

    def test_off_grid_point_brute_force_cell(self):
        n = 5
        grid = build_grid(n, point_from_str("11111"))
        point = point_from_str("01011")    # distance 2, not a grid point
        placement = place_point(point, grid)
        assert placement.latitude == 2
        costs = [sum(hamming(point, c) for c in _cell_corners(grid, 2, j))
                 for j in range(n)]
        assert costs[placement.cell] == min(costs)
        assert placement.cell == min(range(n), key=lambda j: costs[j])

    def test_offsets_inside_cell(self):
        grid = build_grid(6, 0)
        placement = place_point(0b010101, grid)
        if placement.cell is not None:
            assert 0.0 < placement.u < 1.0
            assert 0.0 < placement.v < 1.0

    def test_out_of_range(self):
        grid = build_grid(4, 0)
        with pytest.raises(ValueError):
            place_point(16, grid)


class TestRender:
    def test_uniform_landscape_constant_shade(self):
        land = Landscape(5, 0, np.full((5, 2), 0.5), FlockingConfig.disabled())
        grid = build_grid(5, 0)
        svg = render(land, grid)
        fills = {part.split('fill="')[1].split('"')[0]
                 for part in svg.split("<polygon")[1:]}
        assert fills == {"#808080"}

    def test_boosted_cap_brighter_at_pole(self):
        land = Landscape(8, 0, np.full((8, 2), 0.5))
        land.apply_visits([0b10011010])
        grid = build_grid(8, 0b10011010)
        boosted = [land.current_fitness(p) for p in grid.rings[0] + grid.rings[1]]
        far = [land.current_fitness(p) for p in grid.rings[7]]
        assert min(boosted) > max(far)
        svg = render(land, grid)
        assert svg.startswith("<svg")

    def test_heightfield_contents(self, tmp_path):
        land = build_landscape(5, 2, seed=3)
        grid = build_grid(5, 7)
        path = tmp_path / "height.csv"
        render(land, grid, heightfield_path=path)
        with open(path) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 5 * 4 + 2
        for row in rows:
            p = point_from_str(row["point"])
            assert grid.rings[int(row["ring"])][int(row["slot"])] == p
            assert float(row["fitness"]) == land.current_fitness(p)

    def test_probe_markers_within_two_rings(self):
        land = build_landscape(10, 3, seed=4)
        start = 0b1100110011
        grid = build_grid(10, start)
        probes = sorted(hamming_ball(start, 2, 10))
        assert len(probes) == 56
        markers = [(p, "triangle") for p in probes]
        svg = render(land, grid, markers)
        for p, _ in markers:
            assert place_point(p, grid).latitude <= 2

    def test_marker_kinds(self):
        land = build_landscape(4, 1, seed=1)
        grid = build_grid(4, 0)
        svg = render(land, grid, [(0, "dot"), (1, "triangle"), (2, "square")])
        assert "<circle" in svg and "<rect x=" in svg
        with pytest.raises(ValueError):
            render(land, grid, [(0, "star")])
        assert set(MARKER_KINDS) == {"dot", "triangle", "square"}

    def test_pure_function_of_inputs(self):
        land = build_landscape(6, 2, seed=9)
        grid = build_grid(6, 5)
        assert render(land, grid) == render(land, grid)

    def test_dimension_mismatch(self):
        land = build_landscape(5, 2, seed=1)
        grid = build_grid(6, 0)
        with pytest.raises(ValueError):
            render(land, grid)

    def test_svg_written(self, tmp_path):
        land = build_landscape(4, 1, seed=2)
        grid = build_grid(4, 3)
        path = tmp_path / "view.svg"
        svg = render(land, grid, svg_path=path)
        assert path.read_text() == svg
