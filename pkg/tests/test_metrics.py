import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retraj.errors import ShapeError, ValidationError
from retraj.metrics import psnr, ssim, to_gray, video_report


def naive_ssim(a, b):
    """Straight-from-the-definition SSIM, written independently with explicit
    loops. Slow on purpose; only used as an oracle."""
    def gray(img):
        img = np.asarray(img, dtype=np.float64)
        if img.ndim == 3:
            return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]
        return img

    x, y = gray(a), gray(b)
    size, sigma = 11, 1.5
    w = np.empty((size, size))
    for i in range(size):
        for j in range(size):
            di, dj = i - 5, j - 5
            w[i, j] = math.exp(-(di * di + dj * dj) / (2 * sigma * sigma))
    w /= w.sum()
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    vals = []
    for r in range(x.shape[0] - size + 1):
        for c in range(x.shape[1] - size + 1):
            px = x[r:r + size, c:c + size]
            py = y[r:r + size, c:c + size]
            mx = (w * px).sum()
            my = (w * py).sum()
            vx = (w * px * px).sum() - mx * mx
            vy = (w * py * py).sum() - my * my
            cxy = (w * px * py).sum() - mx * my
            vals.append(((2 * mx * my + c1) * (2 * cxy + c2))
                        / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


class TestPSNR:
    def test_identical_capped(self):
        a = np.random.default_rng(0).uniform(size=(8, 8, 3))
        assert psnr(a, a) == 99.0

    def test_constant_offset_closed_form(self):
        a = np.full((16, 16, 3), 0.3)
        b = a + 16.0 / 255.0
        expected = 20 * np.log10(255.0 / 16.0)
        assert abs(psnr(a, b) - expected) < 0.05

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(size=(8, 8, 3))
        b = rng.uniform(size=(8, 8, 3))
        assert psnr(a, b) == psnr(b, a)

    def test_masked_equal_region_capped(self):
        a = np.zeros((4, 4, 3))
        b = a.copy()
        b[0, 0] = 1.0
        mask = np.ones((4, 4), dtype=bool)
        mask[0, 0] = False
        assert psnr(a, b, mask) == 99.0

    def test_empty_mask_rejected(self):
        a = np.zeros((4, 4, 3))
        with pytest.raises(ValidationError):
            psnr(a, a, np.zeros((4, 4), dtype=bool))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone_in_noise_amplitude(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(0.3, 0.7, size=(8, 8, 3))
        noise = rng.standard_normal(a.shape)
        vals = [psnr(a, np.clip(a + amp * noise, 0, 1))
                for amp in (0.01, 0.03, 0.1, 0.3)]
        assert all(x > y for x, y in zip(vals, vals[1:]))


class TestSSIM:
    def test_self_is_one(self):
        a = np.random.default_rng(2).uniform(size=(16, 16, 3))
        assert ssim(a, a) == 1.0

    def test_constant_pair_is_one(self):
        a = np.full((12, 12, 3), 0.5)
        assert ssim(a, a.copy()) == 1.0

    def test_black_vs_white_matches_oracle(self):
        a = np.zeros((12, 12, 3))
        b = np.ones((12, 12, 3))
        assert abs(ssim(a, b) - naive_ssim(a, b)) < 1e-9

    def test_random_pairs_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            a = rng.uniform(size=(14, 13, 3))
            b = np.clip(a + rng.normal(0, 0.1, size=a.shape), 0, 1)
            assert abs(ssim(a, b) - naive_ssim(a, b)) < 1e-9

    def test_grayscale_input_accepted(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(size=(12, 12))
        b = rng.uniform(size=(12, 12))
        assert abs(ssim(a, b) - naive_ssim(a, b)) < 1e-9

    def test_too_small_frame(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))

    def test_luma_weights(self):
        frame = np.zeros((2, 2, 3))
        frame[..., 0] = 1.0
        assert np.allclose(to_gray(frame), 0.299)


class TestVideoReport:
    def test_identical_videos(self):
        v = np.random.default_rng(5).uniform(size=(3, 16, 16, 3))
        rep = video_report(v, v)
        assert rep["psnr"] == 99.0 and rep["ssim_mean"] == 1.0
        assert rep["coverage"] == 1.0
        assert len(rep["per_frame"]["psnr"]) == 3

    def test_single_frame_reduces_to_frame_metrics(self):
        rng = np.random.default_rng(6)
        a = rng.uniform(size=(1, 16, 16, 3))
        b = rng.uniform(size=(1, 16, 16, 3))
        rep = video_report(a, b)
        assert rep["psnr"] == pytest.approx(psnr(a[0], b[0]))
        assert rep["ssim_mean"] == pytest.approx(ssim(a[0], b[0]))

    def test_coverage_is_mean_mask(self):
        v = np.zeros((2, 16, 16, 3))
        mask = np.zeros((2, 16, 16), dtype=bool)
        mask[:, :8] = True
        rep = video_report(v, v, mask)
        assert rep["coverage"] == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            video_report(np.zeros((2, 16, 16, 3)), np.zeros((3, 16, 16, 3)))
