"""Build a small sample dataset end to end and validate it.

Synthesizes --count gradient/noise images with caption sidecars, runs the
dataset builder (triangle controls + manifest), then validates the result
and prints its stats.  Useful as a smoke test of the full pipeline and as
a template for building from real image folders.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from triart.approximator import ApproxConfig
from triart.dataset import BuildConfig, build, dataset_stats, validate_manifest
from triart.raster import Raster, save_png


def synthesize(root: Path, count: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for idx in range(count):
        h = int(rng.integers(220, 300))
        w = int(rng.integers(220, 300))
        yy, xx = np.mgrid[0:h, 0:w]
        arr = np.stack(
            [
                ((yy + 13 * idx) % 256).astype(np.uint8),
                ((xx * (idx + 2)) % 256).astype(np.uint8),
                rng.integers(0, 256, size=(h, w), dtype=np.uint8),
            ],
            axis=2,
        )
        save_png(root / f"sample{idx:02d}.png", Raster(np.ascontiguousarray(arr)))
        (root / f"sample{idx:02d}.txt").write_text(
            f"synthetic gradient sample {idx}", encoding="utf-8"
        )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("sample_dataset"))
    parser.add_argument("--count", type=int, default=5)
    parser.add_argument("--resize", type=int, default=256)
    parser.add_argument("--shapes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=2)
    args = parser.parse_args()

    inputs = args.out / "inputs"
    synthesize(inputs, args.count, args.seed)
    config = BuildConfig(
        input_dir=inputs,
        output_dir=args.out / "dataset",
        resize=args.resize,
        approx=ApproxConfig(shape_count=args.shapes, seed=args.seed),
        caption_mode="sidecar",
        parallelism=args.jobs,
        seed=args.seed,
    )
    report = build(config)
    print(f"processed {report.processed}, skipped {len(report.skipped)}")
    for name, score in report.per_image_scores:
        print(f"  {name}: final rmse {score:.2f}")

    validation = validate_manifest(config.output_dir)
    print(f"validation: {'clean' if validation.ok else 'FAILED'}")
    for check in validation.failures():
        print(f"  line {check.line_number}: {'; '.join(check.problems)}")

    stats = dataset_stats(config.output_dir)
    print(f"entries {stats.count}, dimensions {stats.dimension_histogram}")
    print(
        "prompt length "
        f"mean {stats.prompt_length_mean:.1f} "
        f"min {stats.prompt_length_min} max {stats.prompt_length_max}"
    )


if __name__ == "__main__":
    main()
