"""Block-matching disparity on rectified stereo pairs.

Costs are sums of absolute (sad) or squared (ssd) intensity differences
over a square support window, aggregated per candidate disparity, with
winner-takes-all selection. All cost arithmetic is integer-exact.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass

import numpy as np

from .imaging import GrayImage, PixelCoord

__all__ = [
    "METHODS",
    "MatchParams",
    "DisparityMap",
    "DepthMap",
    "CostStats",
    "window_cost",
    "compute_disparity",
    "disparity_to_depth",
    "scale_to_gray",
    "serialize_disparity",
    "parse_disparity",
    "sidecar_num_bytes",
    "rle_encode_disparity",
    "rle_decode_disparity",
    "DisparityFormatError",
]

METHODS = ("sad", "ssd")

SIDECAR_MAGIC = b"DSP1"
RLE_MAGIC = b"DSR1"


class DisparityFormatError(ValueError):
    """Raised when a disparity sidecar byte stream is malformed."""


@dataclass(frozen=True)
class MatchParams:
    """Matching configuration: window radius, disparity search range, cost method.

    The support window side is 2 * window_radius + 1 and must fit inside the
    matched images; max_disparity must be smaller than the image width.
    Those two image-dependent constraints are checked where images are known.
    """

    window_radius: int = 3
    max_disparity: int = 64
    method: str = "sad"

    def __post_init__(self):
        if self.window_radius < 0:
            raise ValueError(f"window_radius must be >= 0, got {self.window_radius}")
        if self.max_disparity < 0:
            raise ValueError(f"max_disparity must be >= 0, got {self.max_disparity}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    @property
    def window_side(self) -> int:
        return 2 * self.window_radius + 1


class DisparityMap:
    """Per-pixel integer disparity with a validity mask.

    A pixel is valid exactly when its support window and every
    disparity-shifted window lie inside image bounds, which leaves a border
    band of window_radius on all sides plus window_radius + max_disparity
    on the left. Valid disparities lie in [0, max_disparity].
    """

    __slots__ = ("_disparities", "_valid", "_max_disparity")

    def __init__(self, disparities, valid, max_disparity: int):
        if max_disparity < 0:
            raise ValueError(f"max_disparity must be >= 0, got {max_disparity}")
        d = np.asarray(disparities)
        v = np.asarray(valid)
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("disparities must form a non-empty 2-D raster")
        if v.shape != d.shape:
            raise ValueError(f"valid mask shape {v.shape} does not match disparities shape {d.shape}")
        if not np.issubdtype(d.dtype, np.integer):
            raise ValueError(f"disparities must be integers, got dtype {d.dtype}")
        if d.size and (int(d.min()) < 0 or int(d.max()) > max_disparity):
            raise ValueError(f"disparities must lie in [0, {max_disparity}]")
        dd = d.astype(np.int32, copy=True)
        vv = v.astype(bool, copy=True)
        dd.setflags(write=False)
        vv.setflags(write=False)
        object.__setattr__(self, "_disparities", dd)
        object.__setattr__(self, "_valid", vv)
        object.__setattr__(self, "_max_disparity", int(max_disparity))

    @classmethod
    def _trusted(cls, disparities: np.ndarray, valid: np.ndarray, max_disparity: int):
        """Adopt arrays the matcher just built, skipping validation scans.

        Callers must hand over int32/bool arrays that already satisfy every
        invariant and must not keep writable references.
        """
        self = object.__new__(cls)
        disparities.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "_disparities", disparities)
        object.__setattr__(self, "_valid", valid)
        object.__setattr__(self, "_max_disparity", int(max_disparity))
        return self

    @property
    def disparities(self) -> np.ndarray:
        return self._disparities

    @property
    def valid(self) -> np.ndarray:
        return self._valid

    @property
    def max_disparity(self) -> int:
        return self._max_disparity

    @property
    def width(self) -> int:
        return self._disparities.shape[1]

    @property
    def height(self) -> int:
        return self._disparities.shape[0]

    def __setattr__(self, name, value):
        raise AttributeError("DisparityMap is immutable")

    def __eq__(self, other):
        if not isinstance(other, DisparityMap):
            return NotImplemented
        return (
            self._max_disparity == other._max_disparity
            and self._disparities.shape == other._disparities.shape
            and bool(np.array_equal(self._disparities, other._disparities))
            and bool(np.array_equal(self._valid, other._valid))
        )

    def __repr__(self):
        return f"DisparityMap({self.width}x{self.height}, max_disparity={self.max_disparity})"


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters where available.

    depths holds NaN where unavailable; available marks pixels whose source
    disparity was valid and nonzero.
    """

    depths: np.ndarray
    available: np.ndarray
    focal_length: float
    baseline: float


@dataclass(frozen=True)
class CostStats:
    """Work accounting for one disparity computation.

    elementary_ops is the nominal count of per-pixel difference evaluations,
    valid_pixels * (max_disparity + 1) * window_side ** 2, regardless of how
    the aggregation is implemented internally. wall_time is in seconds.
    """

    elementary_ops: int
    wall_time: float


def _require_same_dims(left: GrayImage, right: GrayImage):
    if (left.width, left.height) != (right.width, right.height):
        raise ValueError(
            f"left is {left.width}x{left.height} but right is {right.width}x{right.height}"
        )


def _check_params(params: MatchParams, img: GrayImage):
    if params.window_side > min(img.width, img.height):
        raise ValueError(
            f"window side {params.window_side} exceeds image extent "
            f"{img.width}x{img.height}"
        )
    if params.max_disparity >= img.width:
        raise ValueError(
            f"max_disparity {params.max_disparity} must be smaller than image width {img.width}"
        )


def window_cost(
    left: GrayImage, right: GrayImage, at: PixelCoord, d: int, params: MatchParams
) -> int:
    """Aggregated matching cost of the window at `at` against disparity d.

    sad sums absolute intensity differences between the left window centered
    at (x, y) and the right window centered at (x - d, y); ssd sums their
    squares. Both windows must lie fully inside their images; violating that
    is a caller bug and raises ValueError.
    """
    r = params.window_radius
    x, y = at.x, at.y
    if d < 0:
        raise ValueError(f"disparity must be >= 0, got {d}")
    if y - r < 0 or y + r >= left.height or x - r < 0 or x + r >= left.width:
        raise ValueError(f"left window around ({x}, {y}) with radius {r} is out of bounds")
    if x - d - r < 0 or x - d + r >= right.width:
        raise ValueError(
            f"right window around ({x - d}, {y}) with radius {r} is out of bounds"
        )
    lw = left.pixels[y - r : y + r + 1, x - r : x + r + 1].astype(np.int64)
    rw = right.pixels[y - r : y + r + 1, x - d - r : x - d + r + 1].astype(np.int64)
    diff = np.abs(lw - rw)
    if params.method == "ssd":
        diff = diff * diff
    return int(diff.sum())


def _agg_dtype(method: str, window_side: int) -> type:
    """Narrowest signed integer type that holds any window sum exactly.

    Absolute differences peak at 255 while squared differences peak at
    255 ** 2, so sad fits narrower arithmetic than ssd at equal window
    sizes. The integral image may wrap around in this type; the four-term
    window combination cancels the wraps whenever the true window sum is
    representable, which the bound below guarantees.
    """
    peak = 255 if method == "sad" else 255 * 255
    max_window_sum = peak * window_side * window_side
    for dt in (np.int16, np.int32, np.int64):
        if max_window_sum <= np.iinfo(dt).max:
            return dt
    raise ValueError(f"window side {window_side} overflows 64-bit cost sums")


def _window_sums(arr: np.ndarray, side: int) -> np.ndarray:
    """Sliding-window sums over all fully-in-bounds side x side windows.

    Small windows accumulate side shifted slices per axis; every partial sum
    is bounded by the window sum, which _agg_dtype guarantees fits, so no
    intermediate overflows. Large windows switch to an integral image whose
    running totals may wrap, which the four-term combination cancels.
    """
    h, w = arr.shape
    if side <= 24:
        vert = arr[: h - side + 1].copy()
        for k in range(1, side):
            vert += arr[k : h - side + 1 + k]
        out = vert[:, : w - side + 1].copy()
        for k in range(1, side):
            out += vert[:, k : w - side + 1 + k]
        return out
    ii = np.zeros((h + 1, w + 1), dtype=arr.dtype)
    ii[1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1)
    return ii[side:, side:] - ii[:-side, side:] - ii[side:, :-side] + ii[:-side, :-side]


def compute_disparity(
    left: GrayImage, right: GrayImage, params: MatchParams
) -> tuple[DisparityMap, CostStats]:
    """Dense winner-takes-all disparity of the left image against the right.

    For every valid pixel the disparity is the argmin over d in
    [0, max_disparity] of window_cost, ties broken toward the smallest d.
    Border pixels whose windows cannot be evaluated at every candidate
    disparity are marked invalid. The result is bit-identical across runs.
    """
    _require_same_dims(left, right)
    _check_params(params, left)
    t0 = time.perf_counter()

    h, w = left.height, left.width
    r = params.window_radius
    dmax = params.max_disparity
    row0, row1 = r, h - r
    col0, col1 = dmax + r, w - r

    disp = np.zeros((h, w), dtype=np.int32)
    valid = np.zeros((h, w), dtype=bool)
    n_valid = 0

    if row1 > row0 and col1 > col0:
        n_valid = (row1 - row0) * (col1 - col0)
        dt = _agg_dtype(params.method, params.window_side)
        a = left.pixels.astype(dt)
        b = right.pixels.astype(dt)
        best_cost = None
        best_d = None
        for d in range(dmax + 1):
            diff = a[:, d:] - b[:, : w - d]
            np.abs(diff, out=diff)
            if params.method == "ssd":
                np.multiply(diff, diff, out=diff)
            # columns of diff index left columns d..w-1; the valid pixels need
            # window sums centered on left columns col0..col1-1
            sub = diff[:, col0 - r - d : col1 + r - d]
            cost = _window_sums(sub, params.window_side)
            if best_cost is None:
                best_cost = cost
                best_d = np.zeros(cost.shape, dtype=np.int32)
            else:
                improved = cost < best_cost
                best_d[improved] = d
                np.minimum(best_cost, cost, out=best_cost)
        disp[row0:row1, col0:col1] = best_d
        valid[row0:row1, col0:col1] = True

    ops = n_valid * (dmax + 1) * params.window_side**2
    dmap = DisparityMap._trusted(disp, valid, dmax)
    wall = time.perf_counter() - t0
    return dmap, CostStats(ops, wall)


def disparity_to_depth(dmap: DisparityMap, focal_length: float, baseline: float) -> DepthMap:
    """Triangulate metric depth: depth = focal_length * baseline / disparity.

    Depth is available exactly where the disparity is valid and nonzero;
    zero disparity means the point is at infinity.
    """
    if not focal_length > 0:
        raise ValueError(f"focal_length must be positive, got {focal_length}")
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    available = dmap.valid & (dmap.disparities > 0)
    depths = np.full(dmap.disparities.shape, np.nan)
    depths[available] = (focal_length * baseline) / dmap.disparities[available]
    depths.setflags(write=False)
    avail = available.copy()
    avail.setflags(write=False)
    return DepthMap(depths, avail, float(focal_length), float(baseline))


def scale_to_gray(dmap: DisparityMap) -> GrayImage:
    """Render a disparity map as an 8-bit image.

    Valid pixels map linearly, round(255 * d / max_disparity) with half away
    from zero; invalid pixels render as 0. max_disparity 0 renders all 0.
    """
    if dmap.max_disparity == 0:
        gray = np.zeros((dmap.height, dmap.width), dtype=np.int64)
    else:
        d = dmap.disparities.astype(np.int64)
        m = dmap.max_disparity
        gray = (2 * 255 * d + m) // (2 * m)
        gray = np.where(dmap.valid, gray, 0)
    return GrayImage(gray)


def sidecar_num_bytes(width: int, height: int) -> int:
    """Size of the exact disparity sidecar: 16 header bytes plus 3 per pixel."""
    return 16 + 3 * width * height


def serialize_disparity(dmap: DisparityMap) -> bytes:
    """Encode the exact sidecar: DSP1 magic, u32le width/height/max_disparity,
    then row-major (u16le disparity, u8 valid) per pixel. Bit-exact."""
    if dmap.max_disparity > 0xFFFF:
        raise DisparityFormatError(
            f"max_disparity {dmap.max_disparity} exceeds the 16-bit sidecar range"
        )
    header = SIDECAR_MAGIC + struct.pack("<III", dmap.width, dmap.height, dmap.max_disparity)
    n = dmap.width * dmap.height
    body = np.empty((n, 3), dtype=np.uint8)
    body[:, :2] = dmap.disparities.astype("<u2").reshape(n).view(np.uint8).reshape(n, 2)
    body[:, 2] = dmap.valid.reshape(n).astype(np.uint8)
    return header + body.tobytes()


def _parse_sidecar_header(data: bytes, magic: bytes) -> tuple[int, int, int]:
    if data[:4] != magic:
        raise DisparityFormatError(f"bad magic {data[:4]!r}, expected {magic!r}")
    if len(data) < 16:
        raise DisparityFormatError(f"header truncated: need 16 bytes, have {len(data)}")
    width, height, max_disparity = struct.unpack("<III", data[4:16])
    if width < 1 or height < 1:
        raise DisparityFormatError(f"dimensions must be positive, got {width}x{height}")
    return width, height, max_disparity


def parse_disparity(data: bytes) -> DisparityMap:
    """Decode a DSP1 sidecar produced by serialize_disparity."""
    buf = bytes(data)
    width, height, max_disparity = _parse_sidecar_header(buf, SIDECAR_MAGIC)
    n = width * height
    need = 3 * n
    if len(buf) - 16 < need:
        raise DisparityFormatError(
            f"pixel records truncated: need {need} bytes, have {len(buf) - 16}"
        )
    body = np.frombuffer(buf, dtype=np.uint8, count=need, offset=16).reshape(n, 3)
    disp = body[:, :2].copy().view("<u2").reshape(height, width).astype(np.int32)
    valid = body[:, 2].astype(bool).reshape(height, width)
    return DisparityMap(disp, valid, max_disparity)


def rle_encode_disparity(dmap: DisparityMap) -> bytes:
    """Row-wise run-length encoding of (disparity, valid) pairs.

    Layout: DSR1 magic, u32le width/height/max_disparity, then for each row
    a sequence of (u16le run length, u16le disparity, u8 valid) records;
    runs longer than 65535 are split. Rows never share runs.
    """
    if dmap.max_disparity > 0xFFFF:
        raise DisparityFormatError(
            f"max_disparity {dmap.max_disparity} exceeds the 16-bit sidecar range"
        )
    out = bytearray(RLE_MAGIC)
    out += struct.pack("<III", dmap.width, dmap.height, dmap.max_disparity)
    disp = dmap.disparities
    valid = dmap.valid
    pack = struct.Struct("<HHB").pack
    for y in range(dmap.height):
        key = disp[y].astype(np.int64) * 2 + valid[y]
        if len(key) == 1:
            starts = np.array([0])
            ends = np.array([1])
        else:
            change = np.nonzero(key[1:] != key[:-1])[0] + 1
            starts = np.concatenate(([0], change))
            ends = np.concatenate((change, [len(key)]))
        for s, e in zip(starts, ends):
            run = int(e - s)
            d = int(disp[y, s])
            v = int(valid[y, s])
            while run > 0xFFFF:
                out += pack(0xFFFF, d, v)
                run -= 0xFFFF
            out += pack(run, d, v)
    return bytes(out)


def rle_decode_disparity(data: bytes) -> DisparityMap:
    """Decode the row-wise RLE sidecar produced by rle_encode_disparity."""
    buf = bytes(data)
    width, height, max_disparity = _parse_sidecar_header(buf, RLE_MAGIC)
    disp = np.zeros((height, width), dtype=np.int32)
    valid = np.zeros((height, width), dtype=bool)
    unpack = struct.Struct("<HHB").unpack_from
    pos = 16
    for y in range(height):
        x = 0
        while x < width:
            if pos + 5 > len(buf):
                raise DisparityFormatError(f"run records truncated at byte offset {pos}")
            run, d, v = unpack(buf, pos)
            pos += 5
            if run == 0 or x + run > width:
                raise DisparityFormatError(
                    f"run of {run} at byte offset {pos - 5} overflows row {y}"
                )
            disp[y, x : x + run] = d
            valid[y, x : x + run] = bool(v)
            x += run
    if pos != len(buf):
        raise DisparityFormatError(f"{len(buf) - pos} trailing bytes after last row")
    return DisparityMap(disp, valid, max_disparity)
