"""Triangle primitives on integer pixel grids.

Random generation, local mutation, and exact scanline rasterization.
A pixel (px, py) counts as covered when its center (px + 0.5, py + 0.5)
lies inside or on the boundary of the triangle.  All rasterization math
runs in doubled integer coordinates (vertices become even lattice points,
pixel centers odd ones), so coverage decisions are exact: no floating
point, no tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Offset radius for the two companion vertices of a random triangle, and
# perturbation radius (= clamp margin) for a mutation step.  Local offsets
# keep shapes coherent instead of spanning the whole canvas.
RANDOM_SPREAD = 15
MUTATE_SPREAD = 16


@dataclass(frozen=True)
class Point:
    x: int
    y: int


@dataclass(frozen=True)
class Triangle:
    v0: Point
    v1: Point
    v2: Point

    def vertices(self) -> tuple[Point, Point, Point]:
        return (self.v0, self.v1, self.v2)


@dataclass(frozen=True)
class Scanline:
    """Inclusive horizontal pixel run: columns x_start..x_end of row y."""

    y: int
    x_start: int
    x_end: int


@dataclass(frozen=True)
class BoundingBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def is_empty(self) -> bool:
        return self.x_min > self.x_max or self.y_min > self.y_max


#: Marker returned for an empty coverage set.
EMPTY_BOX = BoundingBox(0, 0, -1, -1)


def random_triangle(
    rng: np.random.Generator, width: int, height: int, spread: int = RANDOM_SPREAD
) -> Triangle:
    """Anchor vertex uniform over the image, companions offset by <= spread."""
    x0 = int(rng.integers(0, width))
    y0 = int(rng.integers(0, height))
    dx1, dy1, dx2, dy2 = (int(d) for d in rng.integers(-spread, spread + 1, size=4))
    return Triangle(
        Point(x0, y0),
        Point(x0 + dx1, y0 + dy1),
        Point(x0 + dx2, y0 + dy2),
    )


def mutate_triangle(
    tri: Triangle, rng: np.random.Generator, width: int, height: int,
    spread: int = MUTATE_SPREAD,
) -> Triangle:
    """Perturb one uniformly chosen vertex by independent offsets in [-spread, spread].

    The moved vertex is clamped to [-spread, width - 1 + spread] x
    [-spread, height - 1 + spread] so shapes may bleed off-canvas but not
    wander arbitrarily far.  The other two vertices are untouched.
    """
    idx = int(rng.integers(0, 3))
    dx = int(rng.integers(-spread, spread + 1))
    dy = int(rng.integers(-spread, spread + 1))
    verts = list(tri.vertices())
    v = verts[idx]
    verts[idx] = Point(
        min(max(v.x + dx, -spread), width - 1 + spread),
        min(max(v.y + dy, -spread), height - 1 + spread),
    )
    return Triangle(*verts)


def rasterize_triangle(tri: Triangle, width: int, height: int) -> list[Scanline]:
    """Exact pixel-center coverage of a triangle, clipped to the image.

    Returns at most one scanline per row, sorted by y.  Degenerate
    triangles cover the pixel centers lying exactly on their hull segment
    (usually none).
    """
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    p0, p1, p2 = tri.vertices()
    # Doubled coordinates: vertices even, pixel centers odd.
    x0, y0, x1, y1, x2, y2 = 2 * p0.x, 2 * p0.y, 2 * p1.x, 2 * p1.y, 2 * p2.x, 2 * p2.y
    area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area2 == 0:
        return _degenerate_scanlines(tri, width, height)
    if area2 < 0:
        # Normalize to counter-clockwise so "inside" means all edge
        # functions >= 0.
        x1, y1, x2, y2 = x2, y2, x1, y1
    edges = ((x0, y0, x1, y1), (x1, y1, x2, y2), (x2, y2, x0, y0))

    row_lo = max(0, min(p0.y, p1.y, p2.y))
    row_hi = min(height - 1, max(p0.y, p1.y, p2.y) - 1)
    out: list[Scanline] = []
    for py in range(row_lo, row_hi + 1):
        cy = 2 * py + 1
        lo = 0
        hi = width - 1
        empty = False
        for ax, ay, bx, by in edges:
            c = by - ay
            k = (bx - ax) * (cy - ay) + c * ax
            # Edge constraint at this row: c * cx <= k for center x-coord cx.
            if c > 0:
                hi = min(hi, (k // c - 1) // 2)
            elif c < 0:
                m = -(k // (-c))  # ceil(k / c)
                lo = max(lo, m // 2)
            elif (bx - ax) * (cy - ay) < 0:
                empty = True
                break
        if not empty and lo <= hi:
            out.append(Scanline(py, lo, hi))
    return out


def _degenerate_scanlines(tri: Triangle, width: int, height: int) -> list[Scanline]:
    # Hull of a zero-area triangle is a segment (or point); its endpoints are
    # the farthest-apart vertex pair.  Integer vertices never coincide with
    # half-integer centers, so point hulls and horizontal segments are empty.
    pts = tri.vertices()
    best = (0, pts[0], pts[0])
    for i in range(3):
        for j in range(i + 1, 3):
            d = (pts[i].x - pts[j].x) ** 2 + (pts[i].y - pts[j].y) ** 2
            if d > best[0]:
                best = (d, pts[i], pts[j])
    d2, a, b = best
    if d2 == 0 or a.y == b.y:
        return []
    ax, ay, bx, by = 2 * a.x, 2 * a.y, 2 * b.x, 2 * b.y
    den = by - ay
    out: list[Scanline] = []
    for py in range(max(0, min(a.y, b.y)), min(height - 1, max(a.y, b.y) - 1) + 1):
        cy = 2 * py + 1
        num = ax * den + (bx - ax) * (cy - ay)
        if num % den == 0:
            cx = num // den
            if cx % 2 == 1:
                x = (cx - 1) // 2
                if 0 <= x < width:
                    out.append(Scanline(py, x, x))
    return out


def bounding_box(scanlines: list[Scanline]) -> BoundingBox:
    """Tightest box containing every scanline pixel; EMPTY_BOX for no input."""
    if not scanlines:
        return EMPTY_BOX
    return BoundingBox(
        min(s.x_start for s in scanlines),
        min(s.y for s in scanlines),
        max(s.x_end for s in scanlines),
        max(s.y for s in scanlines),
    )


def coverage_area(scanlines: list[Scanline]) -> int:
    """Number of covered pixels."""
    return sum(s.x_end - s.x_start + 1 for s in scanlines)
