"""Seeded synthetic stereo imagery for tests, benchmarks, and simulations.

A master texture wider than the target frame is sampled at two horizontal
offsets, so the right view is an exact shifted copy of the left with fresh
texture entering at the edge instead of wrap-around artifacts.
"""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage

__all__ = ["texture", "shifted_pair", "shifted_sequence"]


def texture(width: int, height: int, seed: int) -> GrayImage:
    """Uniform random 8-bit texture from a fixed-seed generator."""
    if width < 1 or height < 1:
        raise ValueError(f"texture dimensions must be at least 1x1, got {width}x{height}")
    rng = np.random.default_rng(seed)
    return GrayImage(rng.integers(0, 256, size=(height, width), dtype=np.uint8))


def shifted_sequence(
    width: int, height: int, shifts: list[int], seed: int
) -> list[tuple[GrayImage, GrayImage]]:
    """Static left view plus a right view shifted by a per-step amount.

    The right frame at step t satisfies right(x, y) = left(x + shifts[t], y),
    so block matching recovers disparity shifts[t] across the valid region.
    All frames for one seed come from a single master texture of width
    width + max(shifts).
    """
    if not shifts:
        raise ValueError("shifts must name at least one step")
    for s in shifts:
        if s < 0:
            raise ValueError(f"shifts must be >= 0, got {s}")
        if s >= width:
            raise ValueError(f"shift {s} must be smaller than frame width {width}")
    master = texture(width + max(shifts), height, seed).pixels
    left = GrayImage(master[:, :width])
    frames = []
    for s in shifts:
        right = GrayImage(master[:, s : s + width])
        frames.append((left, right))
    return frames


def shifted_pair(width: int, height: int, shift: int, seed: int) -> tuple[GrayImage, GrayImage]:
    """Single stereo pair with a uniform exact shift."""
    return shifted_sequence(width, height, [shift], seed)[0]
