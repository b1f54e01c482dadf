"""Planar geometry for quadrilateral detection boxes.

Immutable point/quad/polygon values plus the handful of predicates and
measures the rest of the toolkit is built on: shoelace area, simplicity,
rigid rotation, polygon clipping, and intersection-over-union.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

__all__ = [
    "EPS",
    "Point",
    "Quad",
    "Polygon",
    "signed_area",
    "area",
    "is_convex",
    "is_simple",
    "rotate",
    "envelope",
    "clip_convex",
    "intersection_area",
    "iou",
]

EPS = 1e-9


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def rotated(self, center: "Point", angle: float) -> "Point":
        """Rotate by ``angle`` radians (counter-clockwise) about ``center``."""
        c, s = math.cos(angle), math.sin(angle)
        dx, dy = self.x - center.x, self.y - center.y
        return Point(center.x + c * dx - s * dy, center.y + s * dx + c * dy)


def _as_points(pairs: Sequence) -> tuple[Point, ...]:
    out = []
    for p in pairs:
        out.append(p if isinstance(p, Point) else Point(float(p[0]), float(p[1])))
    return tuple(out)


@dataclass(frozen=True, slots=True)
class Quad:
    """A quadrilateral given by four vertices in traversal order.

    The stored order defines the polygon's edges; no orientation or
    starting vertex is assumed. Degenerate quads (zero area, repeated
    vertices) are representable and flagged by :func:`is_simple` / area.
    """

    vertices: tuple[Point, Point, Point, Point]

    def __post_init__(self) -> None:
        if len(self.vertices) != 4:
            raise ValueError(f"quad needs exactly 4 vertices, got {len(self.vertices)}")
        object.__setattr__(self, "vertices", _as_points(self.vertices))

    @classmethod
    def from_coords(cls, coords: Sequence[float]) -> "Quad":
        """Build from a flat x1,y1,...,x4,y4 sequence."""
        if len(coords) != 8:
            raise ValueError(f"expected 8 coordinates, got {len(coords)}")
        it = iter(coords)
        return cls(tuple(Point(float(x), float(y)) for x, y in zip(it, it)))

    @property
    def xs(self) -> tuple[float, float, float, float]:
        return tuple(v.x for v in self.vertices)

    @property
    def ys(self) -> tuple[float, float, float, float]:
        return tuple(v.y for v in self.vertices)

    @property
    def centroid(self) -> Point:
        return Point(sum(self.xs) / 4.0, sum(self.ys) / 4.0)

    def coords(self) -> tuple[float, ...]:
        """Flat x1,y1,...,x4,y4 tuple."""
        out: list[float] = []
        for v in self.vertices:
            out.extend((v.x, v.y))
        return tuple(out)

    def bounds(self) -> tuple[float, float, float, float]:
        """Axis-aligned (min_x, min_y, max_x, max_y)."""
        return (min(self.xs), min(self.ys), max(self.xs), max(self.ys))

    def diameter(self) -> float:
        """Largest pairwise vertex distance."""
        vs = self.vertices
        return max(vs[i].distance_to(vs[j]) for i in range(4) for j in range(i + 1, 4))


@dataclass(frozen=True, slots=True)
class Polygon:
    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", _as_points(self.vertices))


Shape = Union[Quad, Polygon, Sequence[Point]]


def _vertices(shape: Shape) -> tuple[Point, ...]:
    if isinstance(shape, (Quad, Polygon)):
        return shape.vertices
    return _as_points(shape)


def signed_area(shape: Shape) -> float:
    """Shoelace signed area; positive for clockwise traversal in image coords (y down)."""
    vs = _vertices(shape)
    total = 0.0
    for i, a in enumerate(vs):
        b = vs[(i + 1) % len(vs)]
        total += a.x * b.y - b.x * a.y
    return total / 2.0


def area(shape: Shape) -> float:
    return abs(signed_area(shape))


def _orient(a: Point, b: Point, c: Point) -> float:
    """Cross product of (b - a) and (c - a); values within EPS snap to zero."""
    v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return 0.0 if abs(v) <= EPS else v


def _collinear_overlap(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """Positive-length overlap of two collinear segments."""
    if abs(p2.x - p1.x) >= abs(p2.y - p1.y):
        a0, a1 = sorted((p1.x, p2.x))
        b0, b1 = sorted((p3.x, p4.x))
    else:
        a0, a1 = sorted((p1.y, p2.y))
        b0, b1 = sorted((p3.y, p4.y))
    return min(a1, b1) - max(a0, b0) > EPS


def _segments_cross(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """True for a proper crossing or a positive-length collinear overlap.

    Touching at a single point (an endpoint on the other segment) does not
    count as crossing.
    """
    o1 = _orient(p1, p2, p3)
    o2 = _orient(p1, p2, p4)
    o3 = _orient(p3, p4, p1)
    o4 = _orient(p3, p4, p2)
    if o1 == 0.0 and o2 == 0.0 and o3 == 0.0 and o4 == 0.0:
        return _collinear_overlap(p1, p2, p3, p4)
    return o1 * o2 < 0.0 and o3 * o4 < 0.0


def is_simple(quad: Quad) -> bool:
    """True iff the quad's boundary does not self-intersect.

    Non-adjacent edges must not properly cross or overlap; adjacent edges
    must not double back over each other beyond the shared vertex. Touching
    at single points is legal. Zero-length edges make a quad non-simple.
    """
    v = quad.vertices
    for i in range(4):
        a, b = v[i], v[(i + 1) % 4]
        if a.distance_to(b) <= EPS:
            return False
    # the two non-adjacent edge pairs: (e0, e2) and (e1, e3)
    for i, j in ((0, 2), (1, 3)):
        if _segments_cross(v[i], v[(i + 1) % 4], v[j], v[(j + 1) % 4]):
            return False
    # adjacent edges folding back onto each other make a spike at the joint
    for i in range(4):
        prev, joint, nxt = v[i], v[(i + 1) % 4], v[(i + 2) % 4]
        if _orient(prev, joint, nxt) == 0.0:
            dot = (prev.x - joint.x) * (nxt.x - joint.x) + (prev.y - joint.y) * (nxt.y - joint.y)
            if dot > EPS:
                return False
    return True


def is_convex(quad: Quad) -> bool:
    """True iff consecutive edge cross products never flip sign."""
    v = quad.vertices
    sign = 0.0
    for i in range(4):
        o = _orient(v[i], v[(i + 1) % 4], v[(i + 2) % 4])
        if o == 0.0:
            continue
        if sign == 0.0:
            sign = o
        elif sign * o < 0.0:
            return False
    return True


def rotate(quad: Quad, center: Point, angle: float) -> Quad:
    """Rigid rotation by ``angle`` radians about ``center``; vertex order kept."""
    return Quad(tuple(v.rotated(center, angle) for v in quad.vertices))


def envelope(quad: Quad) -> Quad:
    """Circumscribed axis-aligned rectangle."""
    x0, y0, x1, y1 = quad.bounds()
    return Quad((Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)))


def _ccw(points: Sequence[Point]) -> list[Point]:
    pts = list(points)
    return pts if signed_area(pts) >= 0.0 else pts[::-1]


def _line_intersection(a: Point, b: Point, p: Point, q: Point) -> Point:
    """Intersection of lines ab and pq (callers guarantee non-parallel)."""
    d1x, d1y = b.x - a.x, b.y - a.y
    d2x, d2y = q.x - p.x, q.y - p.y
    denom = d1x * d2y - d1y * d2x
    t = ((p.x - a.x) * d2y - (p.y - a.y) * d2x) / denom
    return Point(a.x + t * d1x, a.y + t * d1y)


def clip_convex(subject: Sequence[Point], clip: Sequence[Point]) -> list[Point]:
    """Sutherland-Hodgman clip of ``subject`` against a convex ``clip`` polygon."""
    clip_pts = _ccw(clip)
    output = list(subject)
    n = len(clip_pts)
    for i in range(n):
        if len(output) < 3:
            return []
        ca, cb = clip_pts[i], clip_pts[(i + 1) % n]

        def inside(p: Point) -> bool:
            return (cb.x - ca.x) * (p.y - ca.y) - (cb.y - ca.y) * (p.x - ca.x) >= -EPS

        inputs = output
        output = []
        prev = inputs[-1]
        prev_in = inside(prev)
        for cur in inputs:
            cur_in = inside(cur)
            if cur_in:
                if not prev_in:
                    output.append(_line_intersection(prev, cur, ca, cb))
                output.append(cur)
            elif prev_in:
                output.append(_line_intersection(prev, cur, ca, cb))
            prev, prev_in = cur, cur_in
    return output


def _triangles(quad: Quad) -> tuple[tuple[Point, Point, Point], ...]:
    """Split a simple quad into two triangles along an interior diagonal."""
    v = quad.vertices
    o = signed_area(quad)
    t1 = signed_area((v[0], v[1], v[2]))
    t2 = signed_area((v[0], v[2], v[3]))
    if t1 * o >= -EPS and t2 * o >= -EPS:
        return ((v[0], v[1], v[2]), (v[0], v[2], v[3]))
    return ((v[1], v[2], v[3]), (v[1], v[3], v[0]))


def intersection_area(a: Quad, b: Quad) -> float:
    """Exact intersection area of two simple quads.

    Convex pairs are clipped directly; a concave quad is decomposed into
    two triangles along its interior diagonal and the clipped pieces are
    summed, so concave inputs stay exact.
    """
    a_convex, b_convex = is_convex(a), is_convex(b)
    if a_convex and b_convex:
        pts = clip_convex(a.vertices, b.vertices)
        result = area(pts) if len(pts) >= 3 else 0.0
    else:
        subject_parts = _triangles(a) if not a_convex else (a.vertices,)
        clip_parts = _triangles(b) if not b_convex else (b.vertices,)
        result = 0.0
        for sub in subject_parts:
            for clp in clip_parts:
                pts = clip_convex(sub, clp)
                if len(pts) >= 3:
                    result += area(pts)
    return min(max(result, 0.0), min(area(a), area(b)) + EPS)


def iou(a: Quad, b: Quad) -> float:
    """Intersection over union; 0.0 when both quads are degenerate."""
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    if union <= EPS:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)
