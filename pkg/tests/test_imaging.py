import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emerald.exceptions import DegenerateImage, DimensionMismatch, EmptyRoi
from emerald.imaging import (
    RoiParams,
    apply_mask,
    binarize,
    extract_roi,
    largest_component,
    morphological_close,
    otsu_threshold,
    read_image,
    to_grayscale,
    write_image,
    write_mask,
)
from emerald.pipeline.synth import render_disc

from oracles import close_brute, largest_component_brute, luminance_scalar, otsu_brute_force


class TestGrayscale:
    def test_black(self):
        assert not to_grayscale(np.zeros((3, 4, 3), np.uint8)).any()

    def test_white(self):
        assert (to_grayscale(np.full((3, 4, 3), 255, np.uint8)) == 255).all()

    def test_pure_red(self):
        assert to_grayscale(np.array([[[255, 0, 0]]], np.uint8))[0, 0] == 76

    def test_matches_scalar_formula(self, rng):
        img = rng.integers(0, 256, (16, 16, 3)).astype(np.uint8)
        expected = [[luminance_scalar(*px) for px in row] for row in img.tolist()]
        np.testing.assert_array_equal(to_grayscale(img), expected)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            to_grayscale(np.zeros((4, 4), np.uint8))


class TestOtsu:
    def test_half_black_half_white(self):
        img = np.zeros((4, 8), np.uint8)
        img[:, 4:] = 255
        t = otsu_threshold(img)
        assert t == otsu_brute_force(img) == 1
        mask = binarize(img, t)
        assert mask[:, :4].all() and not mask[:, 4:].any()

    def test_uniform_is_degenerate(self):
        with pytest.raises(DegenerateImage):
            otsu_threshold(np.full((5, 5), 17, np.uint8))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_matches_exhaustive_scan(self, seed):
        img = np.random.default_rng(seed).integers(0, 256, (16, 16)).astype(np.uint8)
        assert otsu_threshold(img) == otsu_brute_force(img)

    def test_bimodal_matches_exhaustive_scan(self, rng):
        img = np.concatenate([rng.normal(60, 10, 120), rng.normal(200, 15, 136)])
        img = np.clip(img, 0, 255).astype(np.uint8).reshape(16, 16)
        t = otsu_threshold(img)
        assert t == otsu_brute_force(img)
        assert 80 < t < 180


class TestBinarize:
    def test_below(self):
        assert binarize(np.zeros((3, 3), np.uint8), 1, "below_threshold").all()

    def test_above(self):
        assert not binarize(np.zeros((3, 3), np.uint8), 1, "above_threshold").any()

    def test_checkerboard(self):
        yy, xx = np.mgrid[0:6, 0:6]
        board = np.where((yy + xx) % 2 == 0, 0, 255).astype(np.uint8)
        np.testing.assert_array_equal(binarize(board, 128), board == 0)


class TestClose:
    def test_radius_zero_identity(self, rng):
        m = rng.random((10, 12)) < 0.5
        np.testing.assert_array_equal(morphological_close(m, 0), m)

    def test_fills_single_hole(self):
        m = np.zeros((15, 15), bool)
        m[3:12, 3:12] = True
        m[7, 7] = False
        out = morphological_close(m, 1)
        expected = np.zeros_like(m)
        expected[3:12, 3:12] = True
        np.testing.assert_array_equal(out, expected)
        np.testing.assert_array_equal(out, close_brute(m, 1))

    def test_all_false(self):
        assert not morphological_close(np.zeros((9, 9), bool), 3).any()

    @pytest.mark.parametrize("radius", [1, 2, 3])
    def test_matches_brute_force(self, rng, radius):
        for _ in range(5):
            m = rng.random((12, 14)) < 0.4
            np.testing.assert_array_equal(morphological_close(m, radius), close_brute(m, radius))

    @settings(max_examples=60, deadline=None)
    @given(arrays(bool, (12, 12)), st.integers(0, 3))
    def test_idempotent(self, m, r):
        once = morphological_close(m, r)
        np.testing.assert_array_equal(morphological_close(once, r), once)

    @settings(max_examples=60, deadline=None)
    @given(arrays(bool, (8, 8)), st.integers(0, 3))
    def test_extensive_away_from_border(self, core, r):
        m = np.pad(core, r)
        out = morphological_close(m, r)
        assert np.all(out[m])


class TestLargestComponent:
    def test_keeps_bigger_blob(self):
        m = np.zeros((8, 10), bool)
        m[1:3, 1:6] = True  # 10 px
        m[6, 8] = m[7, 9] = True  # 2 px, diagonal neighbours
        out = largest_component(m)
        np.testing.assert_array_equal(out, largest_component_brute(m))
        assert out.sum() == 10 and not out[6:, 8:].any()

    def test_empty(self):
        assert not largest_component(np.zeros((4, 4), bool)).any()

    def test_single_blob_unchanged(self):
        m = np.zeros((6, 6), bool)
        m[2:5, 1:4] = True
        np.testing.assert_array_equal(largest_component(m), m)

    def test_tie_goes_to_first_in_row_major_order(self):
        m = np.zeros((6, 6), bool)
        m[4, 0:3] = True
        m[0, 3:6] = True
        out = largest_component(m)
        assert out[0, 3:6].all() and not out[4].any()

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_flood_fill(self, seed):
        m = np.random.default_rng(seed).random((15, 15)) < 0.35
        np.testing.assert_array_equal(largest_component(m), largest_component_brute(m))


class TestApplyMask:
    def test_all_true_identity(self, rng):
        img = rng.integers(0, 256, (5, 6, 3)).astype(np.uint8)
        np.testing.assert_array_equal(apply_mask(img, np.ones((5, 6), bool)), img)

    def test_all_false_black(self, rng):
        img = rng.integers(0, 256, (5, 6, 3)).astype(np.uint8)
        assert not apply_mask(img, np.zeros((5, 6), bool)).any()

    def test_half_mask(self, rng):
        img = rng.integers(1, 256, (4, 6, 3)).astype(np.uint8)
        m = np.zeros((4, 6), bool)
        m[:, :3] = True
        out = apply_mask(img, m)
        for y in range(4):
            for x in range(6):
                expected = img[y, x] if m[y, x] else (0, 0, 0)
                assert tuple(out[y, x]) == tuple(expected)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            apply_mask(np.zeros((4, 4, 3), np.uint8), np.ones((4, 5), bool))


class TestExtractRoi:
    def test_disc_recovered(self):
        img, truth = render_disc(size=64, radius=18)
        masked, mask = extract_roi(img)
        # every disagreement must sit within one pixel of the true boundary
        from scipy import ndimage

        ring = ndimage.binary_dilation(truth) & ~ndimage.binary_erosion(truth)
        assert np.all(ring[mask != truth])
        assert np.all(masked[~mask] == 0)
        np.testing.assert_array_equal(masked[mask], img[mask])

    def test_white_image_degenerate(self):
        with pytest.raises(DegenerateImage):
            extract_roi(np.full((20, 20, 3), 255, np.uint8))

    def test_fixed_threshold_255(self, rng):
        img = rng.integers(0, 256, (10, 10, 3)).astype(np.uint8)
        img[0, 0] = 255
        params = RoiParams(threshold=255, closing_radius=0, keep_largest_component=False)
        _, mask = extract_roi(img, params)
        np.testing.assert_array_equal(mask, to_grayscale(img) != 255)

    def test_empty_roi(self):
        img = np.full((10, 10, 3), 200, np.uint8)
        with pytest.raises(EmptyRoi):
            extract_roi(img, RoiParams(threshold=10, closing_radius=0))

    def test_radius_too_large(self):
        img, _ = render_disc(size=20, radius=5)
        with pytest.raises(ValueError):
            extract_roi(img, RoiParams(closing_radius=11))

    def test_synthetic_stones_never_fail(self):
        from emerald.pipeline.synth import render_stone

        r = np.random.default_rng(0)
        for c in range(8):
            img, truth = render_stone(c, r, size=64)
            masked, mask = extract_roi(img)
            assert mask.shape == truth.shape
            assert (mask & truth).sum() / truth.sum() > 0.97


def test_png_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (7, 9, 3)).astype(np.uint8)
    write_image(tmp_path / "a.png", img)
    np.testing.assert_array_equal(read_image(tmp_path / "a.png"), img)
    m = img[..., 0] > 128
    write_mask(tmp_path / "m.png", m)
    from PIL import Image

    saved = np.asarray(Image.open(tmp_path / "m.png"))
    assert set(np.unique(saved)) <= {0, 255}
    np.testing.assert_array_equal(saved == 255, m)
