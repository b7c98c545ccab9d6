"""Command-line front end: approximate images, manage datasets, run the
conditioning-block verification and toy training.

Exit code contract: 0 success, 1 runtime or validation failure, 2 usage
error (argparse).  All randomness flows from --seed flags, so any
subcommand run twice with identical flags produces identical outputs.
Summary lines on stdout use `key=value` so shell tests can parse them
without regexes; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import approximator, dataset, zeroconv
from .raster import load_raster, resize_center_crop, save_png


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _usage_fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# --------------------------------------------------------------------------
# approximate
# --------------------------------------------------------------------------

def _approx_config(args: argparse.Namespace) -> approximator.ApproxConfig:
    return approximator.ApproxConfig(
        shape_count=args.shapes,
        candidates=args.candidates,
        climb_steps=args.steps,
        alpha=args.alpha,
        seed=args.seed,
        jobs=args.jobs,
    )


def cmd_approximate(args: argparse.Namespace) -> int:
    try:
        config = _approx_config(args)
    except ValueError as exc:
        return _usage_fail(str(exc))
    try:
        target = load_raster(args.input)
        if args.resize:
            target = resize_center_crop(target, args.resize)
        state = approximator.approximate(target, config)
        save_png(args.output, state.canvas)
        if args.svg:
            svg = approximator.export_svg(
                state.shapes, target.width, target.height, approximator.average_color(target)
            )
            Path(args.svg).write_text(svg, encoding="utf-8")
        if args.trace:
            approximator.write_trace_csv(args.trace, state.trace)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    print(f"final_rmse={state.score!r}")
    return 0


# --------------------------------------------------------------------------
# dataset
# --------------------------------------------------------------------------

def cmd_dataset_build(args: argparse.Namespace) -> int:
    try:
        config = dataset.BuildConfig(
            input_dir=args.input,
            output_dir=args.output,
            resize=args.resize,
            approx=_approx_config(args),
            caption_mode=args.captions,
            parallelism=args.jobs,
            seed=args.seed,
            emit_traces=args.emit_traces,
        )
    except ValueError as exc:
        return _usage_fail(str(exc))
    try:
        report = dataset.build(config)
    except (dataset.DatasetError, OSError) as exc:
        return _fail(str(exc))
    for name, reason in report.skipped:
        print(f"skip: {name}: {reason}", file=sys.stderr)
    print(f"processed={report.processed}")
    print(f"skipped={len(report.skipped)}")
    return 0


def cmd_dataset_validate(args: argparse.Namespace) -> int:
    try:
        report = dataset.validate_manifest(args.root)
    except dataset.DatasetError as exc:
        return _fail(str(exc))
    for check in report.failures():
        print(f"invalid: line {check.line_number}: {'; '.join(check.problems)}")
    print(f"entries={len(report.checks)}")
    print(f"valid={'true' if report.ok else 'false'}")
    return 0 if report.ok else 1


def cmd_dataset_stats(args: argparse.Namespace) -> int:
    try:
        stats = dataset.dataset_stats(args.root)
    except dataset.DatasetError as exc:
        return _fail(str(exc))
    print(f"count={stats.count}")
    for dims, n in sorted(stats.dimension_histogram.items()):
        print(f"dimensions_{dims}={n}")
    print(f"prompt_length_mean={stats.prompt_length_mean!r}")
    print(f"prompt_length_min={stats.prompt_length_min}")
    print(f"prompt_length_max={stats.prompt_length_max}")
    return 0


# --------------------------------------------------------------------------
# zeroconv
# --------------------------------------------------------------------------

def cmd_zeroconv_verify(args: argparse.Namespace) -> int:
    checks = zeroconv.run_verification(args.seed)
    ok = True
    for check in checks:
        print(f"{check.name}={'pass' if check.passed else 'fail'}")
        if not check.passed:
            ok = False
            print(f"check {check.name} failed: {check.detail}", file=sys.stderr)
    return 0 if ok else 1


def cmd_zeroconv_train(args: argparse.Namespace) -> int:
    try:
        config = zeroconv.TrainConfig(
            steps=args.steps,
            batch_size=args.batch_size,
            learning_rate=args.lr,
            seed=args.seed,
            log_every=1,
        )
    except ValueError as exc:
        return _usage_fail(str(exc))
    task = zeroconv.make_toy_task(args.seed)
    cb = zeroconv.init_controlnet(task.locked, task.cond_channels)
    try:
        log = zeroconv.train_toy(cb, task, config)
        log.to_csv(args.log)
        zeroconv.save_checkpoint(cb, args.checkpoint)
    except zeroconv.TrainingDiverged as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))
    print(f"step0_loss={log.rows[0].loss!r}")
    print(f"final_loss={log.rows[-1].loss!r}")
    print(f"final_fidelity={log.rows[-1].condition_fidelity!r}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_approx_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shapes", type=int, default=50, help="triangles to place")
    p.add_argument("--alpha", type=int, default=128, help="fill opacity 1..255")
    p.add_argument("--candidates", type=int, default=200, help="random seeds per shape round")
    p.add_argument("--steps", type=int, default=100, help="max hill-climb mutations per round")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triart",
        description="Triangle-approximation art pipeline and toy conditioning block.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_approx = sub.add_parser("approximate", help="approximate one image with triangles")
    p_approx.add_argument("input", type=Path)
    p_approx.add_argument("output", type=Path)
    _add_approx_flags(p_approx)
    p_approx.add_argument("--resize", type=int, default=0, help="center-crop square size, 0 keeps input size")
    p_approx.add_argument("--svg", type=Path, default=None, help="also write the shapes as SVG")
    p_approx.add_argument("--trace", type=Path, default=None, help="write per-shape score CSV")
    p_approx.set_defaults(func=cmd_approximate)

    p_data = sub.add_parser("dataset", help="build, validate, or summarize a dataset")
    data_sub = p_data.add_subparsers(dest="dataset_command", required=True)

    p_build = data_sub.add_parser("build", help="turn an image directory into a training dataset")
    p_build.add_argument("--input", type=Path, required=True)
    p_build.add_argument("--output", type=Path, required=True)
    p_build.add_argument("--resize", type=int, default=512, help="square size, 0 keeps input size")
    p_build.add_argument("--captions", choices=sorted(dataset.CAPTION_MODES), default="sidecar")
    p_build.add_argument("--emit-traces", action="store_true")
    _add_approx_flags(p_build)
    p_build.set_defaults(func=cmd_dataset_build)

    p_validate = data_sub.add_parser("validate", help="check a built dataset")
    p_validate.add_argument("root", type=Path)
    p_validate.set_defaults(func=cmd_dataset_validate)

    p_stats = data_sub.add_parser("stats", help="summarize a built dataset")
    p_stats.add_argument("root", type=Path)
    p_stats.set_defaults(func=cmd_dataset_stats)

    p_zero = sub.add_parser("zeroconv", help="toy conditioning block tools")
    zero_sub = p_zero.add_subparsers(dest="zeroconv_command", required=True)

    p_verify = zero_sub.add_parser("verify", help="run the identity/gradient/immutability checks")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_zeroconv_verify)

    p_train = zero_sub.add_parser("train", help="train the toy conditioning task")
    p_train.add_argument("--steps", type=int, default=500)
    p_train.add_argument("--lr", type=float, default=0.05)
    p_train.add_argument("--seed", type=int, default=7)
    p_train.add_argument("--batch-size", type=int, default=2)
    p_train.add_argument("--log", type=Path, default=Path("train_log.csv"))
    p_train.add_argument("--checkpoint", type=Path, default=Path("checkpoint.npz"))
    p_train.set_defaults(func=cmd_zeroconv_train)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 1


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    raise SystemExit(main())
