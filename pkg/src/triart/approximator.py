"""Triangle-abstraction of a target image by stochastic hill climbing.

Starting from a flat canvas of the target's average color, shapes are
added one at a time.  Each round draws a population of random candidate
triangles, scores every candidate with its least-squares fill color,
climbs the best one through local mutations, and accepts the result only
if it strictly lowers the canvas/target RMSE.  Scoring is incremental:
only the pixels a shape covers are revisited, against an exact integer
sum-of-squared-error accumulator.

Results are bit-reproducible for a fixed config: every random draw flows
from the config seed through per-candidate derived streams, so candidate
evaluation may run on any number of threads without changing the outcome.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (
    MUTATE_SPREAD,
    RANDOM_SPREAD,
    Scanline,
    Triangle,
    mutate_triangle,
    random_triangle,
    rasterize_triangle,
)
from .raster import Color, Raster, clamp_channel, round_half_up

_ARANGE = np.arange(4096)


@dataclass(frozen=True)
class PlacedShape:
    """One accepted triangle with its fill color (alpha included)."""

    triangle: Triangle
    color: Color


@dataclass
class ApproxConfig:
    shape_count: int = 50
    candidates: int = 200
    climb_steps: int = 100
    max_stall: int = 30
    alpha: int = 128
    seed: int = 0
    max_retries: int = 3
    jobs: int = 1
    random_spread: int = RANDOM_SPREAD
    mutate_spread: int = MUTATE_SPREAD

    def __post_init__(self):
        if self.shape_count < 0:
            raise ValueError("shape_count must be >= 0")
        # climb_steps=0 is a meaningful degenerate setting: pick the best
        # random candidate without refining it.
        if self.climb_steps < 0:
            raise ValueError("climb_steps must be >= 0")
        for name in ("candidates", "max_stall", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 1 <= self.alpha <= 255:
            raise ValueError("alpha must be in [1, 255]")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class ApproxState:
    """Evolving approximation: target, canvas, accepted shapes, score trace.

    `sse` is the exact integer sum of squared channel errors between
    target and canvas; `score` is always sqrt(sse / (3 * W * H)).
    """

    target: Raster
    canvas: Raster
    shapes: list[PlacedShape] = field(default_factory=list)
    score: float = 0.0
    trace: list[float] = field(default_factory=list)
    sse: int = 0


def average_color(img: Raster) -> Color:
    """Per-channel arithmetic mean, rounded half-up, opaque alpha."""
    means = img.pixels.reshape(-1, 3).mean(axis=0, dtype=np.float64)
    r, g, b = (clamp_channel(round_half_up(float(m))) for m in means)
    return Color(r, g, b, 255)


def score_rmse(target: Raster, canvas: Raster) -> float:
    """Root-mean-square error over all pixels and channels."""
    if target.pixels.shape != canvas.pixels.shape:
        raise ValueError(
            f"dimension mismatch: {target.pixels.shape} vs {canvas.pixels.shape}"
        )
    sse = _sse(target, canvas)
    return math.sqrt(sse / (3 * target.width * target.height))


def _sse(target: Raster, canvas: Raster) -> int:
    diff = target.pixels.astype(np.int64) - canvas.pixels.astype(np.int64)
    return int((diff * diff).sum())


def _coverage_indices(coverage: list[Scanline], width: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat (rows, cols) index arrays for all covered pixels."""
    global _ARANGE
    if width > _ARANGE.size:
        _ARANGE = np.arange(max(width, 2 * _ARANGE.size))
    n = len(coverage)
    ys = np.fromiter((s.y for s in coverage), dtype=np.intp, count=n)
    lens = np.fromiter((s.x_end - s.x_start + 1 for s in coverage), dtype=np.intp, count=n)
    rows = np.repeat(ys, lens)
    cols = np.concatenate([_ARANGE[s.x_start : s.x_end + 1] for s in coverage])
    return rows, cols


def _blend(src: np.ndarray, dst: np.ndarray, alpha: int) -> np.ndarray:
    # round-half-up((src*a + dst*(255-a)) / 255) in exact integer arithmetic
    num = src * alpha + dst * (255 - alpha)
    return (2 * num + 255) // 510


def compute_optimal_color(
    target: Raster, canvas: Raster, coverage: list[Scanline], alpha: int
) -> Color:
    """Least-squares fill color for blending a shape at `alpha` over the canvas.

    Per channel this is the mean over covered pixels of (t - c*(1-a)) / a
    with a = alpha/255, rounded half-up and clamped to [0, 255].
    """
    if not coverage:
        raise ValueError("empty coverage has no optimal color")
    if not 1 <= alpha <= 255:
        raise ValueError("alpha must be in [1, 255]")
    rows, cols = _coverage_indices(coverage, target.width)
    t = target.pixels[rows, cols].astype(np.float64)
    c = canvas.pixels[rows, cols].astype(np.float64)
    a = alpha / 255.0
    means = ((t - c * (1.0 - a)) / a).mean(axis=0)
    r, g, b = (clamp_channel(round_half_up(float(m))) for m in means)
    return Color(r, g, b, alpha)


def draw_shape(canvas: Raster, coverage: list[Scanline], color: Color) -> Raster:
    """Alpha-blend `color` over the covered pixels; others untouched."""
    out = canvas.copy()
    if not coverage:
        return out
    rows, cols = _coverage_indices(coverage, canvas.width)
    dst = out.pixels[rows, cols].astype(np.int64)
    src = np.array(color.rgb, dtype=np.int64)
    out.pixels[rows, cols] = _blend(src, dst, color.a).astype(np.uint8)
    return out


def score_with_shape(state: ApproxState, coverage: list[Scanline], color: Color) -> float:
    """RMSE the canvas would have after drawing the shape, without drawing it.

    Adjusts the current integer SSE only over the covered pixels, so the
    result matches draw-then-rescore exactly.
    """
    if not coverage:
        return state.score
    rows, cols = _coverage_indices(coverage, state.target.width)
    t = state.target.pixels[rows, cols].astype(np.int64)
    c = state.canvas.pixels[rows, cols].astype(np.int64)
    src = np.array(color.rgb, dtype=np.int64)
    blended = _blend(src, c, color.a)
    sse = state.sse - int(((t - c) ** 2).sum()) + int(((t - blended) ** 2).sum())
    return math.sqrt(sse / (3 * state.target.width * state.target.height))


@dataclass(frozen=True)
class _Candidate:
    score: float
    triangle: Triangle
    coverage: list[Scanline]
    color: Color


def _evaluate(state: ApproxState, tri: Triangle, alpha: int) -> _Candidate:
    coverage = rasterize_triangle(tri, state.target.width, state.target.height)
    if not coverage:
        # Drawing nothing leaves the score unchanged; never an improvement.
        return _Candidate(state.score, tri, coverage, Color(0, 0, 0, alpha))
    color = compute_optimal_color(state.target, state.canvas, coverage, alpha)
    return _Candidate(score_with_shape(state, coverage, color), tri, coverage, color)


def hill_climb(
    state: ApproxState,
    config: ApproxConfig,
    rng: np.random.Generator,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[PlacedShape, float]:
    """Best-of-candidates seed followed by strict-improvement mutation climbing.

    Candidate i draws its triangle from the i-th stream spawned off `rng`,
    so evaluation order (serial or thread pool) cannot affect the result;
    ties on score resolve to the lowest candidate index.
    """
    w, h = state.target.width, state.target.height
    streams = rng.spawn(config.candidates)

    def seed_candidate(stream: np.random.Generator) -> _Candidate:
        return _evaluate(state, random_triangle(stream, w, h, config.random_spread), config.alpha)

    if pool is not None:
        results = list(pool.map(seed_candidate, streams))
    else:
        results = [seed_candidate(s) for s in streams]
    best = min(enumerate(results), key=lambda p: (p[1].score, p[0]))[1]

    stall = 0
    for _ in range(config.climb_steps):
        if stall >= config.max_stall:
            break
        tri = mutate_triangle(best.triangle, rng, w, h, config.mutate_spread)
        cand = _evaluate(state, tri, config.alpha)
        if cand.score < best.score:
            best = cand
            stall = 0
        else:
            stall += 1
    return PlacedShape(best.triangle, best.color), best.score


def _accept(state: ApproxState, shape: PlacedShape, coverage: list[Scanline]) -> None:
    if coverage:
        rows, cols = _coverage_indices(coverage, state.target.width)
        t = state.target.pixels[rows, cols].astype(np.int64)
        c = state.canvas.pixels[rows, cols].astype(np.int64)
        src = np.array(shape.color.rgb, dtype=np.int64)
        blended = _blend(src, c, shape.color.a)
        state.sse += int(((t - blended) ** 2).sum()) - int(((t - c) ** 2).sum())
        state.canvas.pixels[rows, cols] = blended.astype(np.uint8)
    state.score = math.sqrt(state.sse / (3 * state.target.width * state.target.height))
    state.shapes.append(shape)
    state.trace.append(state.score)


def approximate(target: Raster, config: ApproxConfig) -> ApproxState:
    """Run the full shape-adding loop against `target`.

    The canvas starts as the target's flat average color.  Each round runs
    one hill climb per attempt (1 + max_retries attempts) and accepts the
    shape only on strict score improvement; the loop ends early once a
    round exhausts its retries.
    """
    rng = np.random.default_rng(config.seed)
    canvas = Raster.filled(target.width, target.height, average_color(target))
    sse = _sse(target, canvas)
    state = ApproxState(
        target=target,
        canvas=canvas,
        score=math.sqrt(sse / (3 * target.width * target.height)),
        sse=sse,
    )
    pool = ThreadPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else None
    try:
        for _ in range(config.shape_count):
            accepted = False
            for _attempt in range(config.max_retries + 1):
                shape, achieved = hill_climb(state, config, rng.spawn(1)[0], pool)
                if achieved < state.score:
                    coverage = rasterize_triangle(shape.triangle, target.width, target.height)
                    _accept(state, shape, coverage)
                    accepted = True
                    break
            if not accepted:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return state


def export_svg(
    shapes: list[PlacedShape], width: int, height: int, background: Color
) -> str:
    """Vector rendering: background rect, then polygons in acceptance order."""
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'  <rect width="{width}" height="{height}" fill="{background.hex_rgb()}"/>',
    ]
    for shape in shapes:
        v0, v1, v2 = shape.triangle.vertices()
        pts = f"{v0.x},{v0.y} {v1.x},{v1.y} {v2.x},{v2.y}"
        opacity = shape.color.a / 255
        lines.append(
            f'  <polygon points="{pts}" fill="{shape.color.hex_rgb()}"'
            f' fill-opacity="{opacity:.6f}"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_trace_csv(path: str | Path, trace: list[float]) -> None:
    """Score trace as CSV: header `shape_index,score`, one row per acceptance."""
    rows = ["shape_index,score"]
    rows += [f"{i},{score!r}" for i, score in enumerate(trace)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")
