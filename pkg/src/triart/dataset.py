"""Paired (control, target, prompt) dataset builder and validator.

Layout under a dataset root:

    <root>/source/<stem>.png    control image (triangle abstraction)
    <root>/target/<stem>.png    target image (optionally resized + cropped)
    <root>/prompt.jsonl         one JSON object per line:
                                {"source": ..., "target": ..., "prompt": ...}

Captions are ingested from sidecar `<stem>.txt` files next to the inputs,
or stubbed from the filename for caption-free smoke runs.  Every skipped
input is recorded with a reason; a bad file never aborts the batch.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .approximator import ApproxConfig, approximate, write_trace_csv
from .raster import Raster, load_raster, resize_center_crop, save_png

SUPPORTED_EXTENSIONS = {".png", ".jpg", ".jpeg", ".ppm"}
MANIFEST_NAME = "prompt.jsonl"
CAPTION_MODES = ("sidecar", "stub")


class DatasetError(Exception):
    """Unrecoverable dataset-level failure (bad root, unwritable output)."""


@dataclass(frozen=True)
class DatasetEntry:
    """One (control path, target path, prompt) training triple."""

    source: str
    target: str
    prompt: str

    def to_json_line(self) -> str:
        return json.dumps(
            {"source": self.source, "target": self.target, "prompt": self.prompt},
            ensure_ascii=False,
        )


@dataclass
class BuildConfig:
    input_dir: Path
    output_dir: Path
    resize: int = 512  # target edge length; 0 keeps original dimensions
    approx: ApproxConfig = field(default_factory=ApproxConfig)
    caption_mode: str = "sidecar"
    parallelism: int = 1
    seed: int = 0
    emit_traces: bool = False

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.output_dir = Path(self.output_dir)
        if self.resize != 0 and self.resize < 64:
            raise ValueError("resize must be 0 or >= 64")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.caption_mode not in CAPTION_MODES:
            raise ValueError(f"caption_mode must be one of {CAPTION_MODES}")


@dataclass
class BuildReport:
    processed: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (file, reason)
    total_runtime: float = 0.0
    per_image_scores: list[tuple[str, float]] = field(default_factory=list)


def discover_inputs(input_dir: str | Path) -> list[tuple[Path, Path | None]]:
    """Supported images in bytewise-lexicographic name order, with sidecar captions.

    The caption path is the same stem with `.txt` when such a file exists.
    """
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise DatasetError(f"input directory not readable: {input_dir}")
    out = []
    for name in sorted(p.name for p in input_dir.iterdir()):
        path = input_dir / name
        if not path.is_file() or path.suffix.lower() not in SUPPORTED_EXTENSIONS:
            continue
        caption = path.with_suffix(".txt")
        out.append((path, caption if caption.is_file() else None))
    return out


def file_seed(seed: int, stem: str) -> int:
    """Stable per-file seed: blake2b mix of the run seed and the file stem."""
    h = hashlib.blake2b(digest_size=8)
    h.update((seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"))
    h.update(stem.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


@dataclass
class _FileOutcome:
    name: str
    entry: DatasetEntry | None = None
    score: float = 0.0
    skip_reason: str | None = None


def _resolve_prompt(config: BuildConfig, stem: str, caption: Path | None) -> str | None:
    if config.caption_mode == "stub":
        return f"an image of {stem}"
    if caption is None:
        return None
    text = caption.read_text(encoding="utf-8").strip()
    return text or None


def _process_one(config: BuildConfig, image: Path, caption: Path | None) -> _FileOutcome:
    stem = image.stem
    prompt = _resolve_prompt(config, stem, caption)
    if prompt is None:
        reason = "missing caption" if caption is None else "empty caption"
        return _FileOutcome(image.name, skip_reason=reason)
    try:
        target = load_raster(image)
    except Exception as exc:
        return _FileOutcome(image.name, skip_reason=f"unreadable image: {exc}")
    if config.resize:
        target = resize_center_crop(target, config.resize)
    approx_config = replace(config.approx, seed=file_seed(config.seed, stem))
    state = approximate(target, approx_config)
    save_png(config.output_dir / "target" / f"{stem}.png", target)
    save_png(config.output_dir / "source" / f"{stem}.png", state.canvas)
    if config.emit_traces:
        write_trace_csv(config.output_dir / "source" / f"{stem}.csv", state.trace)
    entry = DatasetEntry(
        source=f"source/{stem}.png", target=f"target/{stem}.png", prompt=prompt
    )
    return _FileOutcome(image.name, entry=entry, score=state.score)


def build(config: BuildConfig) -> BuildReport:
    """Build the dataset; returns the report and writes the manifest.

    Per-file failures are recorded as skips with reasons.  Manifest lines
    appear in discovery order regardless of which worker finished first.
    """
    started = time.perf_counter()
    inputs = discover_inputs(config.input_dir)
    if not inputs:
        raise DatasetError(f"no supported images under {config.input_dir}")
    try:
        (config.output_dir / "source").mkdir(parents=True, exist_ok=True)
        (config.output_dir / "target").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetError(f"output directory not writable: {exc}") from exc

    # Duplicate stems would collide on output paths; keep the first.
    seen: set[str] = set()
    todo: list[tuple[Path, Path | None]] = []
    dup_outcomes: list[_FileOutcome] = []
    for image, caption in inputs:
        if image.stem in seen:
            dup_outcomes.append(
                _FileOutcome(image.name, skip_reason=f"duplicate stem {image.stem!r}")
            )
        else:
            seen.add(image.stem)
            todo.append((image, caption))

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            outcomes = list(
                pool.map(lambda pair: _process_one(config, *pair), todo)
            )
    else:
        outcomes = [_process_one(config, image, cap) for image, cap in todo]
    outcomes += dup_outcomes

    report = BuildReport()
    manifest_lines = []
    for outcome in outcomes:
        if outcome.entry is None:
            report.skipped.append((outcome.name, outcome.skip_reason or "unknown"))
        else:
            report.processed += 1
            report.per_image_scores.append((outcome.name, outcome.score))
            manifest_lines.append(outcome.entry.to_json_line())
    manifest = config.output_dir / MANIFEST_NAME
    manifest.write_text(
        "".join(line + "\n" for line in manifest_lines), encoding="utf-8"
    )
    report.total_runtime = time.perf_counter() - started
    return report


@dataclass
class EntryCheck:
    line_number: int
    entry: DatasetEntry | None
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


@dataclass
class ValidationReport:
    checks: list[EntryCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[EntryCheck]:
        return [c for c in self.checks if not c.ok]


def _load_manifest(root: Path) -> list[tuple[int, DatasetEntry | None, str | None]]:
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise DatasetError(f"manifest not found: {manifest}")
    rows = []
    with manifest.open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                obj = json.loads(line)
                entry = DatasetEntry(obj["source"], obj["target"], obj["prompt"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                rows.append((line_number, None, f"unparseable manifest line: {exc}"))
                continue
            rows.append((line_number, entry, None))
    return rows


def _decodable_size(path: Path) -> tuple[int, int] | None:
    try:
        r = load_raster(path)
    except Exception:
        return None
    return (r.width, r.height)


def validate_manifest(root: str | Path) -> ValidationReport:
    """Check every manifest entry: files exist and decode, dimensions match,
    prompts are non-empty, and no path is claimed twice."""
    root = Path(root)
    rows = _load_manifest(root)
    path_uses: dict[str, int] = {}
    for _, entry, _ in rows:
        if entry is not None:
            path_uses[entry.source] = path_uses.get(entry.source, 0) + 1
            path_uses[entry.target] = path_uses.get(entry.target, 0) + 1

    report = ValidationReport()
    for line_number, entry, parse_error in rows:
        check = EntryCheck(line_number, entry)
        if entry is None:
            check.problems.append(parse_error or "unparseable manifest line")
            report.checks.append(check)
            continue
        if not entry.prompt.strip():
            check.problems.append("empty prompt")
        sizes = {}
        for role, rel in (("source", entry.source), ("target", entry.target)):
            path = root / rel
            if not path.is_file():
                check.problems.append(f"missing file: {rel}")
                continue
            size = _decodable_size(path)
            if size is None:
                check.problems.append(f"undecodable file: {rel}")
            else:
                sizes[role] = size
        if len(sizes) == 2 and sizes["source"] != sizes["target"]:
            check.problems.append(
                f"dimension mismatch: {sizes['source']} vs {sizes['target']}"
            )
        for rel in (entry.source, entry.target):
            if path_uses.get(rel, 0) > 1:
                check.problems.append(f"duplicate path: {rel}")
        report.checks.append(check)
    return report


@dataclass
class DatasetStats:
    count: int
    dimension_histogram: dict[str, int]
    prompt_length_mean: float
    prompt_length_min: int
    prompt_length_max: int


def dataset_stats(root: str | Path) -> DatasetStats:
    """Entry count, image-dimension histogram, and prompt-length summary."""
    root = Path(root)
    rows = _load_manifest(root)
    entries = []
    for line_number, entry, parse_error in rows:
        if entry is None:
            raise DatasetError(f"invalid manifest line {line_number}: {parse_error}")
        entries.append(entry)
    histogram: dict[str, int] = {}
    lengths = []
    for entry in entries:
        size = _decodable_size(root / entry.target)
        key = f"{size[0]}x{size[1]}" if size else "undecodable"
        histogram[key] = histogram.get(key, 0) + 1
        lengths.append(len(entry.prompt))
    if lengths:
        mean = sum(lengths) / len(lengths)
        lo, hi = min(lengths), max(lengths)
    else:
        mean, lo, hi = 0.0, 0, 0
    return DatasetStats(len(entries), histogram, mean, lo, hi)
