import numpy as np
import pytest

from stereosim import (
    DisparityFormatError,
    DisparityMap,
    GrayImage,
    MatchParams,
    PixelCoord,
    compute_disparity,
    disparity_to_depth,
    parse_disparity,
    rle_decode_disparity,
    rle_encode_disparity,
    scale_to_gray,
    serialize_disparity,
    shifted_pair,
    sidecar_num_bytes,
    texture,
    window_cost,
)

from oracles import count_rle_records, naive_disparity, naive_window_cost


def test_match_params_validation():
    with pytest.raises(ValueError, match="window_radius"):
        MatchParams(window_radius=-1)
    with pytest.raises(ValueError, match="max_disparity"):
        MatchParams(max_disparity=-1)
    with pytest.raises(ValueError, match="method"):
        MatchParams(method="census")
    assert MatchParams(window_radius=3).window_side == 7


def test_window_cost_identical_windows():
    img = texture(9, 9, seed=0)
    for method in ("sad", "ssd"):
        params = MatchParams(2, 0, method)
        assert window_cost(img, img, PixelCoord(4, 4), 0, params) == 0


def test_window_cost_single_pixel_window():
    left = GrayImage([[30]])
    right = GrayImage([[20]])
    at = PixelCoord(0, 0)
    assert window_cost(left, right, at, 0, MatchParams(0, 0, "sad")) == 10
    assert window_cost(left, right, at, 0, MatchParams(0, 0, "ssd")) == 100


def test_window_cost_matches_reference():
    left = texture(5, 5, seed=11)
    right = texture(5, 5, seed=12)
    lp = left.pixels.tolist()
    rp = right.pixels.tolist()
    for method in ("sad", "ssd"):
        params = MatchParams(1, 0, method)
        for d in (0, 1, 2):
            got = window_cost(left, right, PixelCoord(3, 2), d, params)
            assert got == naive_window_cost(lp, rp, 3, 2, d, 1, method)


def test_window_cost_out_of_bounds_is_an_error():
    img = texture(5, 5, seed=1)
    params = MatchParams(1, 0, "sad")
    with pytest.raises(ValueError, match="left window"):
        window_cost(img, img, PixelCoord(0, 2), 0, params)
    with pytest.raises(ValueError, match="right window"):
        window_cost(img, img, PixelCoord(2, 2), 2, params)


def test_identical_images_give_zero_disparity():
    img = texture(12, 10, seed=3)
    for method in ("sad", "ssd"):
        dmap, _ = compute_disparity(img, img, MatchParams(1, 3, method))
        assert np.all(dmap.disparities[dmap.valid] == 0)
        assert dmap.valid.any()


def test_shifted_pair_recovers_shift():
    left, right = shifted_pair(16, 16, 2, seed=99)
    for method in ("sad", "ssd"):
        dmap, _ = compute_disparity(left, right, MatchParams(1, 4, method))
        assert np.all(dmap.disparities[dmap.valid] == 2)
    # cross-check the same case against the quadruple-loop reference
    disp_ref, valid_ref = naive_disparity(
        left.pixels.tolist(), right.pixels.tolist(), 1, 4, "sad"
    )
    dmap, _ = compute_disparity(left, right, MatchParams(1, 4, "sad"))
    assert dmap.disparities.tolist() == disp_ref
    assert dmap.valid.tolist() == valid_ref


def test_sad_and_ssd_identical_on_noise_free_shift():
    left, right = shifted_pair(16, 16, 2, seed=99)
    sad_map, _ = compute_disparity(left, right, MatchParams(1, 4, "sad"))
    ssd_map, _ = compute_disparity(left, right, MatchParams(1, 4, "ssd"))
    assert sad_map == ssd_map


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError, match="left is"):
        compute_disparity(texture(4, 4, 0), texture(5, 4, 0), MatchParams(0, 0, "sad"))


def test_params_checked_against_image():
    img = texture(8, 8, seed=0)
    with pytest.raises(ValueError, match="window side"):
        compute_disparity(img, img, MatchParams(4, 0, "sad"))
    with pytest.raises(ValueError, match="max_disparity"):
        compute_disparity(img, img, MatchParams(0, 8, "sad"))


def test_deterministic_repeat_runs():
    left, right = shifted_pair(20, 14, 3, seed=5)
    params = MatchParams(2, 5, "sad")
    a, _ = compute_disparity(left, right, params)
    b, _ = compute_disparity(left, right, params)
    assert a == b


def test_elementary_ops_closed_form():
    left, right = shifted_pair(16, 12, 1, seed=6)
    for radius, maxd in ((0, 0), (1, 3), (2, 5)):
        params = MatchParams(radius, maxd, "sad")
        dmap, stats = compute_disparity(left, right, params)
        n_valid = int(dmap.valid.sum())
        side = 2 * radius + 1
        assert stats.elementary_ops == n_valid * (maxd + 1) * side * side


def test_empty_valid_region_counts_zero_ops():
    img = texture(8, 8, seed=2)
    # radius 3 plus max_disparity 4 leaves no column with every window in bounds
    dmap, stats = compute_disparity(img, img, MatchParams(3, 4, "sad"))
    assert not dmap.valid.any()
    assert stats.elementary_ops == 0


def test_cost_sum_dtype_thresholds():
    from stereosim.stereo import _agg_dtype

    # sad: 255 * side^2 crosses int16 between side 11 and 13
    assert _agg_dtype("sad", 11) == np.int16
    assert _agg_dtype("sad", 13) == np.int32
    # ssd: 255^2 alone exceeds int16; 255^2 * side^2 crosses int32 at side 183
    assert _agg_dtype("ssd", 1) == np.int32
    assert _agg_dtype("ssd", 181) == np.int32
    assert _agg_dtype("ssd", 183) == np.int64


def test_wide_window_sad_matches_reference():
    # radius 6 pushes sad window sums past int16 into the int32 path
    rng = np.random.default_rng(50)
    left = GrayImage(rng.integers(0, 256, size=(16, 20)))
    right = GrayImage(rng.integers(0, 256, size=(16, 20)))
    params = MatchParams(6, 3, "sad")
    dmap, _ = compute_disparity(left, right, params)
    disp_ref, valid_ref = naive_disparity(left.pixels.tolist(), right.pixels.tolist(), 6, 3, "sad")
    assert dmap.disparities.tolist() == disp_ref
    assert dmap.valid.tolist() == valid_ref


def test_huge_window_ssd_matches_reference():
    # radius 91 pushes ssd window sums past int32 into the int64 path
    rng = np.random.default_rng(51)
    left = GrayImage(rng.integers(0, 256, size=(185, 186)))
    right = GrayImage(rng.integers(0, 256, size=(185, 186)))
    params = MatchParams(91, 1, "ssd")
    dmap, _ = compute_disparity(left, right, params)
    disp_ref, valid_ref = naive_disparity(
        left.pixels.tolist(), right.pixels.tolist(), 91, 1, "ssd"
    )
    assert dmap.valid.tolist() == valid_ref
    assert dmap.disparities.tolist() == disp_ref


def test_oracle_equivalence_small_randomized():
    rng = np.random.default_rng(77)
    for _ in range(20):
        radius = int(rng.integers(0, 3))
        side = 2 * radius + 1
        maxd = int(rng.integers(0, 5))
        w = int(rng.integers(max(side, maxd + 1), 13))
        h = int(rng.integers(side, 13))
        left = GrayImage(rng.integers(0, 256, size=(h, w)))
        right = GrayImage(rng.integers(0, 256, size=(h, w)))
        for method in ("sad", "ssd"):
            dmap, _ = compute_disparity(left, right, MatchParams(radius, maxd, method))
            disp_ref, valid_ref = naive_disparity(
                left.pixels.tolist(), right.pixels.tolist(), radius, maxd, method
            )
            assert dmap.valid.tolist() == valid_ref
            assert dmap.disparities.tolist() == disp_ref


def test_depth_direct_substitution():
    dmap = DisparityMap([[10]], [[True]], 16)
    depth = disparity_to_depth(dmap, 100.0, 0.5)
    assert depth.available[0, 0]
    assert depth.depths[0, 0] == 5.0


def test_depth_zero_disparity_unavailable():
    dmap = DisparityMap([[0, 3]], [[True, True]], 4)
    depth = disparity_to_depth(dmap, 100.0, 0.5)
    assert not depth.available[0, 0] and np.isnan(depth.depths[0, 0])
    assert depth.available[0, 1]


def test_depth_linear_in_baseline():
    rng = np.random.default_rng(4)
    disp = rng.integers(0, 8, size=(6, 6))
    dmap = DisparityMap(disp, np.ones((6, 6), bool), 8)
    d1 = disparity_to_depth(dmap, 120.0, 0.25)
    d2 = disparity_to_depth(dmap, 120.0, 0.5)
    assert np.allclose(d2.depths[d2.available], 2.0 * d1.depths[d1.available])


def test_depth_rejects_bad_geometry():
    dmap = DisparityMap([[1]], [[True]], 1)
    with pytest.raises(ValueError, match="focal_length"):
        disparity_to_depth(dmap, 0.0, 0.5)
    with pytest.raises(ValueError, match="baseline"):
        disparity_to_depth(dmap, 100.0, -1.0)


def test_scale_to_gray_endpoints_and_midpoint():
    dmap = DisparityMap([[0, 2, 4]], [[True, True, True]], 4)
    gray = scale_to_gray(dmap)
    assert gray.pixels.tolist() == [[0, 128, 255]]


def test_scale_to_gray_invalid_pixels_render_zero():
    dmap = DisparityMap([[4, 4]], [[True, False]], 4)
    assert scale_to_gray(dmap).pixels.tolist() == [[255, 0]]


def test_scale_to_gray_zero_range():
    dmap = DisparityMap([[0, 0]], [[True, True]], 0)
    assert scale_to_gray(dmap).pixels.tolist() == [[0, 0]]


def test_scale_to_gray_constant_map_is_constant():
    dmap = DisparityMap(np.full((4, 4), 3), np.ones((4, 4), bool), 9)
    gray = scale_to_gray(dmap)
    assert np.all(gray.pixels == gray.pixels[0, 0])


def _random_map(rng, w, h, maxd):
    disp = rng.integers(0, maxd + 1, size=(h, w))
    valid = rng.integers(0, 2, size=(h, w)).astype(bool)
    return DisparityMap(disp, valid, maxd)


def test_sidecar_layout_and_round_trip():
    dmap = DisparityMap([[1, 0], [2, 2]], [[True, False], [True, True]], 3)
    data = serialize_disparity(dmap)
    assert data[:4] == b"DSP1"
    assert len(data) == sidecar_num_bytes(2, 2) == 16 + 3 * 4
    # width, height, max_disparity as u32 little endian
    assert data[4:16] == (2).to_bytes(4, "little") * 2 + (3).to_bytes(4, "little")
    # first pixel record: disparity 1, valid 1
    assert data[16:19] == b"\x01\x00\x01"
    assert parse_disparity(data) == dmap


def test_sidecar_round_trip_randomized():
    rng = np.random.default_rng(21)
    for _ in range(15):
        dmap = _random_map(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)), int(rng.integers(0, 7)))
        assert parse_disparity(serialize_disparity(dmap)) == dmap


def test_sidecar_error_cases():
    with pytest.raises(DisparityFormatError, match="magic"):
        parse_disparity(b"XXXX" + bytes(12))
    good = serialize_disparity(DisparityMap([[1]], [[True]], 2))
    with pytest.raises(DisparityFormatError, match="truncated"):
        parse_disparity(good[:-1])


def test_rle_round_trip_and_size():
    rng = np.random.default_rng(31)
    for _ in range(10):
        dmap = _random_map(rng, int(rng.integers(1, 20)), int(rng.integers(1, 10)), int(rng.integers(0, 9)))
        blob = rle_encode_disparity(dmap)
        assert rle_decode_disparity(blob) == dmap
        records = count_rle_records(dmap.disparities.tolist(), dmap.valid.tolist())
        assert len(blob) == 16 + 5 * records


def test_rle_constant_map_is_compact():
    dmap = DisparityMap(np.full((64, 64), 5), np.ones((64, 64), bool), 8)
    blob = rle_encode_disparity(dmap)
    assert len(blob) == 16 + 5 * 64  # one run per row
    assert rle_decode_disparity(blob) == dmap


def test_rle_splits_runs_longer_than_u16():
    width = 70000
    dmap = DisparityMap(np.zeros((1, width), int), np.ones((1, width), bool), 1)
    blob = rle_encode_disparity(dmap)
    records = count_rle_records(dmap.disparities.tolist(), dmap.valid.tolist())
    assert records == 2  # 65535 + 4465
    assert len(blob) == 16 + 5 * records
    assert rle_decode_disparity(blob) == dmap


def test_rle_rejects_corrupt_streams():
    dmap = DisparityMap([[1, 1]], [[True, True]], 1)
    blob = rle_encode_disparity(dmap)
    with pytest.raises(DisparityFormatError, match="magic"):
        rle_decode_disparity(b"NOPE" + blob[4:])
    with pytest.raises(DisparityFormatError, match="truncated"):
        rle_decode_disparity(blob[:-2])
    with pytest.raises(DisparityFormatError, match="trailing"):
        rle_decode_disparity(blob + b"\x00")


def test_disparity_map_validation():
    with pytest.raises(ValueError, match="shape"):
        DisparityMap([[1]], [[True, False]], 2)
    with pytest.raises(ValueError, match=r"\[0, 2\]"):
        DisparityMap([[3]], [[True]], 2)
