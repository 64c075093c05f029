import math
import time

import numpy as np
import pytest

from app.core.errors import ImageSizeError, OutOfDomainError
from app.services.descriptor import (
    DifferenceTriple,
    NeighborRing,
    code_maps,
    difference_triple,
    encode_patterns,
    extract_feature,
    extract_lbp_feature,
    histogram_of_codes,
    lbp_code,
    lbp_map,
    magnitude_code,
    neighbor_ring,
    ternary_value,
)
from app.services.imaging import GrayImage

WORKED_RING = NeighborRing(values=(5, 3, 8, 2, 7, 1, 4, 9), center=6)


def naive_codes(pixels):
    """Loop-by-loop reference: every code computed straight from the pixel grid."""
    h, w = len(pixels), len(pixels[0])
    # clockwise from the top-left corner
    ring_positions = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]
    p1 = [[0] * (w - 2) for _ in range(h - 2)]
    p2 = [[0] * (w - 2) for _ in range(h - 2)]
    mag = [[0] * (w - 2) for _ in range(h - 2)]
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            c = int(pixels[y][x])
            ring = [int(pixels[y + dy][x + dx]) for dy, dx in ring_positions]
            for k in range(8):
                prev, cur, nxt = ring[k - 1], ring[k], ring[(k + 1) % 8]
                negatives = 0
                for d in (cur - prev, cur - nxt, cur - c):
                    if d < 0:
                        negatives += 1
                value = negatives % 3
                if value == 1:
                    p1[y - 1][x - 1] += 2 ** k
                if value == 2:
                    p2[y - 1][x - 1] += 2 ** k
                m1 = math.sqrt((prev - c) ** 2 + (nxt - c) ** 2)
                m2 = math.sqrt((prev - cur) ** 2 + (nxt - cur) ** 2)
                if m1 >= m2:
                    mag[y - 1][x - 1] += 2 ** k
    return p1, p2, mag


class TestNeighborRing:
    def test_clockwise_from_top_left(self, worked_patch):
        ring = neighbor_ring(worked_patch, 1, 1)
        assert ring.values == (5, 3, 8, 2, 7, 1, 4, 9)
        assert ring.center == 6

    def test_constant_patch(self):
        ring = neighbor_ring(GrayImage(np.full((3, 3), 9)), 1, 1)
        assert ring.values == (9,) * 8 and ring.center == 9

    @pytest.mark.parametrize("x, y", [(0, 1), (1, 0), (2, 1), (1, 2)])
    def test_border_is_out_of_domain(self, worked_patch, x, y):
        with pytest.raises(OutOfDomainError):
            neighbor_ring(worked_patch, x, y)


class TestTernaryPattern:
    def test_difference_triples(self):
        assert difference_triple(WORKED_RING, 2) == DifferenceTriple(-2, -5, -3)
        assert difference_triple(WORKED_RING, 1) == DifferenceTriple(-4, 2, -1)

    def test_flat_ring_has_zero_differences(self):
        ring = NeighborRing(values=(4,) * 8, center=4)
        assert all(difference_triple(ring, i) == (0, 0, 0) for i in range(1, 9))

    @pytest.mark.parametrize("triple, value", [((-2, -5, -3), 0), ((-4, 2, -1), 2), ((0, 0, 0), 0), ((3, -1, 0), 1)])
    def test_ternary_value(self, triple, value):
        assert ternary_value(DifferenceTriple(*triple)) == value

    def test_worked_ring_patterns(self):
        assert [ternary_value(difference_triple(WORKED_RING, i)) for i in range(1, 9)] == [2, 0, 0, 0, 0, 0, 2, 0]
        assert encode_patterns(WORKED_RING) == (0, 65)

    def test_constant_ring(self):
        assert encode_patterns(NeighborRing(values=(9,) * 8, center=9)) == (0, 0)

    def test_one_negative_everywhere(self):
        # flat ring below the centre: only d3 is negative
        assert encode_patterns(NeighborRing(values=(5,) * 8, center=9)) == (255, 0)


class TestMagnitudeCode:
    def test_tie_sets_the_bit(self):
        assert magnitude_code(WORKED_RING) & (1 << 6)

    def test_worked_ring(self):
        assert magnitude_code(WORKED_RING) == 64

    def test_constant_ring(self):
        assert magnitude_code(NeighborRing(values=(3,) * 8, center=3)) == 255


class TestLbpCode:
    def test_worked_ring(self):
        assert lbp_code(WORKED_RING) == 148

    def test_constant_and_zero_rings(self):
        assert lbp_code(NeighborRing(values=(7,) * 8, center=7)) == 255
        assert lbp_code(NeighborRing(values=(0,) * 8, center=0)) == 255

    def test_all_set_iff_center_is_minimal(self):
        rng = np.random.default_rng(8)
        for _ in range(500):
            values = tuple(int(v) for v in rng.integers(0, 6, size=8))
            center = int(rng.integers(0, 6))
            ring = NeighborRing(values=values, center=center)
            assert (lbp_code(ring) == 255) == (center <= min(values))

    def test_map_matches_per_pixel_code(self, worked_patch):
        assert lbp_map(worked_patch).tolist() == [[148]]


class TestCodeMaps:
    def test_worked_patch(self, worked_patch):
        maps = code_maps(worked_patch)
        assert maps.pattern1.tolist() == [[0]]
        assert maps.pattern2.tolist() == [[65]]
        assert maps.magnitude.tolist() == [[64]]

    def test_constant_image(self):
        maps = code_maps(GrayImage(np.full((16, 16), 120)))
        assert set(maps.pattern1.ravel().tolist()) == {0}
        assert set(maps.pattern2.ravel().tolist()) == {0}
        assert set(maps.magnitude.ravel().tolist()) == {255}

    def test_interior_geometry(self):
        maps = code_maps(GrayImage(np.zeros((3, 4))))
        assert maps.shape == (1, 2)
        assert maps.pattern2.shape == maps.magnitude.shape == (1, 2)

    def test_too_small(self):
        with pytest.raises(ImageSizeError):
            code_maps(GrayImage(np.zeros((2, 5))))

    def test_matches_naive_loops(self):
        rng = np.random.default_rng(1234)
        mismatches = 0
        started = time.perf_counter()
        for _ in range(100):
            pixels = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
            maps = code_maps(GrayImage(pixels))
            p1, p2, mag = naive_codes(pixels.tolist())
            mismatches += int(np.sum(maps.pattern1 != np.array(p1)))
            mismatches += int(np.sum(maps.pattern2 != np.array(p2)))
            mismatches += int(np.sum(maps.magnitude != np.array(mag)))
        assert mismatches == 0
        assert time.perf_counter() - started < 10.0

    def test_matches_per_pixel_operations(self):
        rng = np.random.default_rng(99)
        img = GrayImage(rng.integers(0, 4, size=(9, 7)))
        maps = code_maps(img)
        for y in range(1, img.height - 1):
            for x in range(1, img.width - 1):
                ring = neighbor_ring(img, x, y)
                assert (maps.pattern1[y - 1, x - 1], maps.pattern2[y - 1, x - 1]) == encode_patterns(ring)
                assert maps.magnitude[y - 1, x - 1] == magnitude_code(ring)

    def test_patterns_are_disjoint(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            maps = code_maps(GrayImage(rng.integers(0, 256, size=(12, 12))))
            assert not np.any(maps.pattern1 & maps.pattern2)

    def test_brightness_shift_leaves_codes_unchanged(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            pixels = rng.integers(0, 200, size=(10, 10))
            shift = int(rng.integers(1, 56))
            base, shifted = code_maps(GrayImage(pixels)), code_maps(GrayImage(pixels + shift))
            assert np.array_equal(base.pattern1, shifted.pattern1)
            assert np.array_equal(base.pattern2, shifted.pattern2)
            assert np.array_equal(base.magnitude, shifted.magnitude)


class TestFeatures:
    def test_histogram_bins(self):
        assert histogram_of_codes(np.array([[65]]), 256)[65] == 1
        compat = histogram_of_codes(np.array([[65]]), 50)
        assert compat.shape == (50,) and compat[12] == 1

    def test_histogram_rejects_other_bin_counts(self):
        with pytest.raises(ValueError):
            histogram_of_codes(np.array([[1]]), 64)

    def test_worked_patch_feature(self, worked_patch):
        feature = extract_feature(worked_patch, 256)
        assert feature.shape == (768,)
        assert np.nonzero(feature)[0].tolist() == [0, 256 + 65, 512 + 64]
        assert feature.sum() == 3

    @pytest.mark.parametrize("bins, dim", [(256, 768), (50, 150)])
    def test_dimension_and_block_sums(self, bins, dim):
        img = GrayImage(np.random.default_rng(4).integers(0, 256, size=(13, 11)))
        feature = extract_feature(img, bins)
        assert feature.shape == (dim,)
        for block in feature.reshape(3, bins):
            assert block.sum() == 11 * 9

    def test_lbp_feature(self, worked_patch):
        feature = extract_lbp_feature(worked_patch, 256)
        assert feature.shape == (256,) and feature[148] == 1
