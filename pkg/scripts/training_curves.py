"""Characterize toy conditioning runs across seeds and learning rates.

For each run, writes the per-step log CSV into --out and prints one
summary row: final/initial loss ratio, final condition fidelity, and the
onset step (first step whose fidelity exceeds 0.5).  The onset column
shows how abruptly the branch starts tracking the condition once the
outer zero conv has grown enough signal.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from triart.zeroconv import (
    TrainConfig,
    TrainingDiverged,
    init_controlnet,
    make_toy_task,
    train_toy,
)


def onset_step(rows, threshold: float = 0.5) -> int | None:
    for row in rows:
        if row.condition_fidelity > threshold:
            return row.step
    return None


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--task-seed", type=int, default=7)
    parser.add_argument("--train-seeds", type=int, nargs="+", default=[0, 1, 2, 3, 7])
    parser.add_argument("--learning-rates", type=float, nargs="+", default=[0.05])
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--batch-size", type=int, default=2)
    parser.add_argument("--out", type=Path, default=Path("curves_out"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    task = make_toy_task(args.task_seed)
    print(f"task seed {args.task_seed}  steps {args.steps}  batch {args.batch_size}")
    print(f"{'lr':>6}  {'seed':>4}  {'loss ratio':>10}  {'fidelity':>8}  {'onset':>5}")
    for lr in args.learning_rates:
        for seed in args.train_seeds:
            cb = init_controlnet(task.locked, task.cond_channels)
            config = TrainConfig(
                steps=args.steps,
                batch_size=args.batch_size,
                learning_rate=lr,
                seed=seed,
            )
            try:
                log = train_toy(cb, task, config)
            except TrainingDiverged as exc:
                print(f"{lr:6.3f}  {seed:4d}  {'diverged':>10}  ({exc})")
                continue
            log.to_csv(args.out / f"lr{lr:g}_seed{seed}.csv")
            ratio = log.rows[-1].loss / log.rows[0].loss
            onset = onset_step(log.rows)
            print(
                f"{lr:6.3f}  {seed:4d}  {ratio:10.4f}"
                f"  {log.rows[-1].condition_fidelity:8.4f}"
                f"  {onset if onset is not None else '-':>5}"
            )


if __name__ == "__main__":
    main()
