"""Approximate one image with triangles at increasing shape budgets.

Writes `approx_<n>.png` (and `.svg`) per budget into --out and prints the
RMSE trajectory, which makes the diminishing-returns curve of the greedy
search easy to eyeball.  With no --input a synthetic color-wheel target
is generated so the demo is self-contained.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from triart.approximator import ApproxConfig, approximate, average_color, export_svg
from triart.raster import Raster, load_raster, resize_center_crop, save_png


def synthetic_target(size: int) -> Raster:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy = cx = (size - 1) / 2
    angle = np.arctan2(yy - cy, xx - cx)
    radius = np.hypot(yy - cy, xx - cx) / (size / 2)
    arr = np.stack(
        [
            (127.5 * (1 + np.cos(angle))).astype(np.uint8),
            (127.5 * (1 + np.cos(angle + 2.1))).astype(np.uint8),
            (255 * np.clip(1 - radius, 0, 1)).astype(np.uint8),
        ],
        axis=2,
    )
    return Raster(np.ascontiguousarray(arr))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", type=Path, default=None, help="target image; synthetic if omitted")
    parser.add_argument("--out", type=Path, default=Path("demo_out"))
    parser.add_argument("--size", type=int, default=128, help="square working size")
    parser.add_argument("--budgets", type=int, nargs="+", default=[10, 25, 50, 100])
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    if args.input is None:
        target = synthetic_target(args.size)
    else:
        target = resize_center_crop(load_raster(args.input), args.size)
    args.out.mkdir(parents=True, exist_ok=True)
    save_png(args.out / "target.png", target)

    flat = average_color(target)
    print(f"target {target.width}x{target.height}, flat average {flat.rgb}")
    for budget in args.budgets:
        config = ApproxConfig(shape_count=budget, seed=args.seed, jobs=args.jobs)
        state = approximate(target, config)
        save_png(args.out / f"approx_{budget:03d}.png", state.canvas)
        svg = export_svg(state.shapes, target.width, target.height, flat)
        (args.out / f"approx_{budget:03d}.svg").write_text(svg, encoding="utf-8")
        drop = state.trace[0] - state.score if state.trace else 0.0
        print(
            f"  {budget:4d} shapes: rmse {state.score:8.3f}"
            f"  (first-shape rmse {state.trace[0]:8.3f}, total drop {drop:8.3f})"
            if state.trace
            else f"  {budget:4d} shapes: rmse {state.score:8.3f}"
        )


if __name__ == "__main__":
    main()
