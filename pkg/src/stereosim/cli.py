"""Command-line front end.

Subcommands: generate (seeded synthetic stereo pairs), disparity (match two
PGM files), depth (triangulate a disparity sidecar), metrics (SSIM/PSNR of
two PGM files), bench (timing CSV across resolutions and methods), and
simulate (run a scenario file). Exit codes: 0 success, 2 input or usage
error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

from .imaging import GrayImage, parse_pgm, serialize_pgm
from .metrics import psnr, ssim
from .sensornet import ScenarioError, load_scenario, run_simulation, save_report
from .stereo import (
    METHODS,
    MatchParams,
    compute_disparity,
    disparity_to_depth,
    parse_disparity,
    scale_to_gray,
    serialize_disparity,
)
from .synthetic import shifted_pair

__all__ = ["BenchRecord", "bench_records", "main"]


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark row: a (method, resolution) cell of the timing sweep."""

    method: str
    width: int
    height: int
    window_radius: int
    max_disparity: int
    repetitions: int
    median_seconds: float
    elementary_ops: int


def bench_records(
    sizes: list[tuple[int, int]],
    window_radius: int,
    max_disparity: int,
    repetitions: int,
    seed: int,
    shift: int | None = None,
) -> list[BenchRecord]:
    """Time both cost methods on seeded textures at each resolution.

    One warm-up run per cell is excluded; median_seconds is the median of
    the timed repetitions on the monotonic clock. The same seed makes runs
    comparable.
    """
    if repetitions < 3:
        raise ValueError(f"repetitions must be >= 3, got {repetitions}")
    records = []
    for method in METHODS:
        for width, height in sizes:
            params = MatchParams(window_radius, max_disparity, method)
            pair_shift = shift if shift is not None else min(5, max_disparity, width - 1)
            left, right = shifted_pair(width, height, pair_shift, seed)
            compute_disparity(left, right, params)  # warm-up
            times = []
            ops = 0
            for _ in range(repetitions):
                _, stats = compute_disparity(left, right, params)
                times.append(stats.wall_time)
                ops = stats.elementary_ops
            records.append(
                BenchRecord(
                    method=method,
                    width=width,
                    height=height,
                    window_radius=window_radius,
                    max_disparity=max_disparity,
                    repetitions=repetitions,
                    median_seconds=statistics.median(times),
                    elementary_ops=ops,
                )
            )
    return records


def _read_image(path: str) -> GrayImage:
    data = Path(path).read_bytes()
    try:
        return parse_pgm(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def _parse_sizes(spec: str) -> list[tuple[int, int]]:
    sizes = []
    for token in spec.split(","):
        token = token.strip()
        parts = token.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"size {token!r} must look like WIDTHxHEIGHT")
        try:
            w, h = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"size {token!r} must look like WIDTHxHEIGHT") from None
        if w < 1 or h < 1:
            raise ValueError(f"size {token!r} must be at least 1x1")
        sizes.append((w, h))
    if not sizes:
        raise ValueError("at least one size is required")
    return sizes


def cmd_generate(args) -> int:
    left, right = shifted_pair(args.width, args.height, args.shift, args.seed)
    left_path = Path(f"{args.out}_left.pgm")
    right_path = Path(f"{args.out}_right.pgm")
    left_path.write_bytes(serialize_pgm(left))
    right_path.write_bytes(serialize_pgm(right))
    print(f"wrote {left_path} and {right_path} ({args.width}x{args.height}, shift {args.shift})")
    return 0


def cmd_disparity(args) -> int:
    left = _read_image(args.left)
    right = _read_image(args.right)
    params = MatchParams(args.radius, args.max_disparity, args.method)
    dmap, stats = compute_disparity(left, right, params)
    gray_path = Path(f"{args.out}.pgm")
    sidecar_path = Path(f"{args.out}.dsp")
    gray_path.write_bytes(serialize_pgm(scale_to_gray(dmap)))
    sidecar_path.write_bytes(serialize_disparity(dmap))
    print(f"wrote {gray_path} and {sidecar_path}")
    print(f"elementary_ops={stats.elementary_ops} wall_time_s={stats.wall_time}")
    return 0


def cmd_depth(args) -> int:
    data = Path(args.sidecar).read_bytes()
    try:
        dmap = parse_disparity(data)
    except ValueError as exc:
        raise ValueError(f"{args.sidecar}: {exc}") from None
    depth = disparity_to_depth(dmap, args.focal_length, args.baseline)
    n = int(depth.available.sum())
    if n:
        vals = depth.depths[depth.available]
        print(
            f"available={n} min_m={float(vals.min())} "
            f"max_m={float(vals.max())} mean_m={float(vals.mean())}"
        )
    else:
        print("available=0")
    if args.out:
        flat = [
            float(depth.depths[y, x]) if depth.available[y, x] else None
            for y in range(dmap.height)
            for x in range(dmap.width)
        ]
        doc = {
            "width": dmap.width,
            "height": dmap.height,
            "focal_length": depth.focal_length,
            "baseline": depth.baseline,
            "depths_m": flat,
        }
        Path(args.out).write_text(json.dumps(doc) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_metrics(args) -> int:
    a = _read_image(args.a)
    b = _read_image(args.b)
    s = ssim(a, b)
    p = psnr(a, b)
    if args.json:
        print(json.dumps({"ssim": s.value, "psnr": "inf" if p.infinite else p.value}))
    else:
        print(f"ssim={s.value}")
        print(f"psnr={'inf' if p.infinite else p.value}")
    return 0


def cmd_bench(args) -> int:
    sizes = _parse_sizes(args.sizes)
    records = bench_records(
        sizes, args.radius, args.max_disparity, args.reps, args.seed, shift=args.shift
    )
    print("method,width,height,radius,max_disparity,reps,median_seconds,elementary_ops")
    for r in records:
        print(
            f"{r.method},{r.width},{r.height},{r.window_radius},{r.max_disparity},"
            f"{r.repetitions},{r.median_seconds},{r.elementary_ops}"
        )
    return 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    report = run_simulation(scenario)
    save_report(report, args.out)
    print(f"wrote {args.out}")
    print(f"lifetime={'survived' if report.lifetime is None else report.lifetime}")
    print(f"processing_total_uj={sum(n.processing_uj for n in report.nodes)}")
    print(f"transmission_total_uj={sum(n.transmission_uj for n in report.nodes)}")
    print(
        f"events={len(report.events)} transmissions={len(report.transmissions)} "
        f"drops={len(report.drops)}"
    )
    for p in report.pairs:
        print(
            f"pair {p.left}-{p.right}: raw_pair_bytes={p.raw_pair_bytes} "
            f"sidecar_bytes={p.sidecar_bytes} rle_bytes_min={p.rle_bytes_min} "
            f"rle_bytes_max={p.rle_bytes_max}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereosim",
        description="Stereo block matching, image metrics, and sensor network simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic stereo pair")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--shift", type=int, default=2, help="exact disparity of the pair")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix for _left.pgm and _right.pgm")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("disparity", help="compute a disparity map from two PGM files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--radius", type=int, default=3, help="support window radius")
    p.add_argument("--max-disparity", type=int, default=64)
    p.add_argument("--method", choices=METHODS, default="sad")
    p.add_argument("--out", required=True, help="output prefix for .pgm and .dsp")
    p.set_defaults(func=cmd_disparity)

    p = sub.add_parser("depth", help="triangulate depth from a disparity sidecar")
    p.add_argument("sidecar", help=".dsp file written by the disparity command")
    p.add_argument("--focal-length", type=float, required=True, help="pixels")
    p.add_argument("--baseline", type=float, required=True, help="meters")
    p.add_argument("--out", help="optional JSON output path")
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("metrics", help="SSIM and PSNR between two PGM files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="timing sweep over resolutions, CSV on stdout")
    p.add_argument("--sizes", default="128x128,256x256,512x512", help="comma-separated WxH list")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--max-disparity", type=int, default=64)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=int, default=None, help="pair disparity, defaults to a small value")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="run a scenario file and write the report")
    p.add_argument("scenario", help="scenario JSON path")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print("error: scenario validation failed:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        print("internal error", file=sys.stderr)
        return 1
