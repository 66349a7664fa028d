import math

import numpy as np
import pytest

from stereosim import GrayImage, SsimParams, mse, psnr, ssim, texture


def test_mse_identical_is_zero():
    img = texture(8, 8, seed=1)
    assert mse(img, img) == 0.0


def test_mse_single_term():
    assert mse(GrayImage([[10]]), GrayImage([[20]])) == 100.0


def test_mse_two_saturated_terms():
    a = GrayImage([[0, 255]])
    b = GrayImage([[255, 0]])
    assert mse(a, b) == 65025.0


def test_mse_dimension_mismatch():
    with pytest.raises(ValueError, match="but b is"):
        mse(GrayImage([[1]]), GrayImage([[1, 2]]))


def test_psnr_identical_reports_infinite():
    img = texture(9, 9, seed=2)
    result = psnr(img, img)
    assert result.infinite
    assert math.isinf(result.value)


def test_psnr_zero_db_at_peak_mse():
    a = GrayImage([[0, 255]])
    b = GrayImage([[255, 0]])
    result = psnr(a, b)
    assert not result.infinite
    assert result.value == 0.0


def test_psnr_twenty_db_case():
    # four pixels with one squared difference of 51*51 = 2601: MSE 650.25,
    # 255^2 / 650.25 is exactly 100, so PSNR is exactly 20 dB
    a = GrayImage([[51, 0], [0, 0]])
    b = GrayImage([[0, 0], [0, 0]])
    result = psnr(a, b)
    assert result.value == 20.0


def test_psnr_near_twenty_db_case():
    # diffs 36 and 3 over two pixels: MSE (1296 + 9) / 2 = 652.5, which is
    # just shy of 20 dB; frozen from a direct log10 evaluation
    a = GrayImage([[36, 3]])
    b = GrayImage([[0, 0]])
    assert mse(a, b) == 652.5
    assert psnr(a, b).value == 19.984998448575915


def test_psnr_formula_against_direct_evaluation():
    a = texture(12, 9, seed=3)
    b = texture(12, 9, seed=4)
    m = mse(a, b)
    assert psnr(a, b).value == pytest.approx(10.0 * math.log10(255.0**2 / m), rel=0, abs=0)


def test_ssim_identical_is_exactly_one():
    for seed in range(5):
        img = texture(16, 11, seed=seed)
        result = ssim(img, img)
        assert result.value == 1.0
        assert not result.infinite


def test_ssim_constant_offset_collapses_luminance():
    a = GrayImage(np.zeros((8, 8), dtype=np.uint8))
    b = GrayImage(np.full((8, 8), 255, dtype=np.uint8))
    # every window has zero variance, so the score reduces to
    # C1 * C2 / ((0 + 255^2 + C1) * C2) with C1 = (0.01 * 255)^2
    c1 = (0.01 * 255) ** 2
    expected = c1 / (255.0**2 + c1)
    result = ssim(a, b)
    assert result.value == pytest.approx(expected, rel=1e-12)
    assert result.value < 1e-3


def test_ssim_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = GrayImage(rng.integers(0, 256, size=(13, 17)))
        b = GrayImage(rng.integers(0, 256, size=(13, 17)))
        assert abs(ssim(a, b).value - ssim(b, a).value) <= 1e-12


def test_ssim_range():
    rng = np.random.default_rng(6)
    for _ in range(10):
        a = GrayImage(rng.integers(0, 256, size=(9, 9)))
        b = GrayImage(rng.integers(0, 256, size=(9, 9)))
        assert -1.0 <= ssim(a, b).value <= 1.0


def test_ssim_window_statistics_match_direct_formula():
    # single 2x2 window, statistics computed by hand with the n-1 denominator
    a = GrayImage([[0, 10], [20, 30]])
    b = GrayImage([[5, 5], [25, 35]])
    params = SsimParams(window_side=2)
    mu_a, mu_b = 15.0, 17.5
    var_a = sum((v - mu_a) ** 2 for v in (0, 10, 20, 30)) / 3
    var_b = sum((v - mu_b) ** 2 for v in (5, 5, 25, 35)) / 3
    cov = sum(
        (x - mu_a) * (y - mu_b) for x, y in zip((0, 10, 20, 30), (5, 5, 25, 35))
    ) / 3
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    expected = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    assert ssim(a, b, params).value == pytest.approx(expected, rel=1e-14)


def test_ssim_image_smaller_than_window():
    with pytest.raises(ValueError, match="smaller than"):
        ssim(texture(4, 4, 0), texture(4, 4, 0))


def test_ssim_dimension_mismatch():
    with pytest.raises(ValueError, match="but b is"):
        ssim(texture(8, 8, 0), texture(9, 8, 0))


def test_ssim_params_validation():
    with pytest.raises(ValueError, match="window_side"):
        SsimParams(window_side=0)
    with pytest.raises(ValueError, match="k1 and k2"):
        SsimParams(k1=0.0)
