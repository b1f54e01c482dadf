"""Vertex-ordering protocols and their labeling stability under perturbation.

Detectors that regress four corner points need a rule assigning each
annotated vertex to a fixed output slot. Published rules all hinge on a
discontinuous geometric predicate (which vertex is leftmost, the sign of
a diagonal slope, nearest-rectangle-corner assignment, polar angle rank),
so a sub-pixel wiggle of the input can relabel every slot at once. The
order-invariant key-edge target does not have slots at all; its values
move no farther than the vertices do.

:func:`measure_instability` quantifies this: it perturbs quads, recomputes
each protocol's target, and reports how often the assignment flips and how
far the target values jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .codec import KeyEdges, MatchingType, encode
from .geom import EPS, Point, Quad, rotate, signed_area

__all__ = [
    "OrderedTarget",
    "order_clockwise_minx",
    "order_dmpnet",
    "order_textboxespp",
    "order_qrn",
    "obd_target",
    "BASELINE_PROTOCOLS",
    "KEYEDGE_PROTOCOL",
    "PROTOCOL_NAMES",
    "Rotate",
    "JitterVertex",
    "Perturbation",
    "InstabilityReport",
    "measure_instability",
    "adversarial_corpus",
]


@dataclass(frozen=True, slots=True)
class OrderedTarget:
    """A protocol's regression target: eight coordinates plus the assignment
    of input vertices to output slots (``order[k]`` is the index, within the
    quad's stored vertices, of the vertex placed at slot ``k``)."""

    coords: tuple[float, ...]
    order: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.coords) != 8:
            raise ValueError(f"target needs 8 coordinates, got {len(self.coords)}")
        if sorted(self.order) != [0, 1, 2, 3]:
            raise ValueError(f"order must be a permutation of vertex indices, got {self.order}")


def _target(quad: Quad, order: Sequence[int]) -> OrderedTarget:
    coords: list[float] = []
    for i in order:
        v = quad.vertices[i]
        coords.extend((v.x, v.y))
    return OrderedTarget(tuple(coords), tuple(order))


def order_clockwise_minx(quad: Quad) -> OrderedTarget:
    """Start at the minimum-x vertex (tie: minimum y) and traverse the
    quad's cycle clockwise in image coordinates (y down)."""
    v = quad.vertices
    cycle = list(range(4))
    if signed_area(quad) < 0.0:
        cycle.reverse()
    start = min(cycle, key=lambda i: (v[i].x, v[i].y))
    k = cycle.index(start)
    return _target(quad, cycle[k:] + cycle[:k])


def order_dmpnet(quad: Quad) -> OrderedTarget:
    """Slope-of-leading-diagonal rule.

    The diagonal with the larger slope (dy/dx, with vertical counted as
    +inf) leads; its smaller-(x, y) endpoint is slot 1 and the opposite
    endpoint slot 3. Of the two remaining vertices, the one on the
    clockwise side of the 1->3 diagonal fills slot 2. Equal slopes fall
    back to the diagonal holding the smallest-(x, y) vertex. The slope
    comparison is the designed-in discontinuity: a one-pixel nudge across
    vertical swings the slope between huge values of opposite sign.
    """
    v = quad.vertices

    def slope(i: int, j: int) -> float:
        dx = v[j].x - v[i].x
        if abs(dx) <= EPS:
            return math.inf
        return (v[j].y - v[i].y) / dx

    def corner_key(i: int) -> tuple[float, float]:
        return (v[i].x, v[i].y)

    s02, s13 = slope(0, 2), slope(1, 3)
    if s02 == s13:
        lead = (0, 2) if min(map(corner_key, (0, 2))) <= min(map(corner_key, (1, 3))) else (1, 3)
    else:
        lead = (0, 2) if s02 > s13 else (1, 3)
    rest = (1, 3) if lead == (0, 2) else (0, 2)

    p1, p3 = sorted(lead, key=corner_key)
    a, c = v[p1], v[p3]

    def side(i: int) -> float:
        return (c.x - a.x) * (v[i].y - a.y) - (c.y - a.y) * (v[i].x - a.x)

    # clockwise side of the leading diagonal (image coords) fills slot 2
    p2, p4 = sorted(rest, key=lambda i: (-side(i), corner_key(i)))
    return _target(quad, (p1, p2, p3, p4))


def order_textboxespp(quad: Quad) -> OrderedTarget:
    """Assign vertices to the circumscribed rectangle's corners.

    All 24 bijections between vertices and the rectangle corners (top-left,
    top-right, bottom-right, bottom-left in image coordinates) are scored
    by total distance; the cheapest wins, ties resolved by the smaller
    resulting coordinate tuple. Near-equidistant vertices, as in a rotated
    square, sit exactly on the tie boundary.
    """
    v = quad.vertices
    x0, y0, x1, y1 = quad.bounds()
    corners = (Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1))

    best: tuple[float, tuple[float, ...], tuple[int, ...]] | None = None
    for perm in permutations(range(4)):
        cost = sum(v[perm[k]].distance_to(corners[k]) for k in range(4))
        coords: list[float] = []
        for k in range(4):
            coords.extend((v[perm[k]].x, v[perm[k]].y))
        key = (cost, tuple(coords), perm)
        if best is None or key < best:
            best = key
    return _target(quad, best[2])


def order_qrn(quad: Quad) -> OrderedTarget:
    """Rank vertices by polar angle about the centroid.

    Angles are measured from the positive x axis and normalized to
    [0, 2*pi), ascending; a vertex exactly on the positive x axis comes
    first, while one a hair below it wraps to almost 2*pi and comes last.
    Angle ties fall back to radius, then coordinates.
    """
    v = quad.vertices
    c = quad.centroid
    two_pi = 2.0 * math.pi

    def key(i: int) -> tuple[float, float, float, float]:
        ang = math.atan2(v[i].y - c.y, v[i].x - c.x) % two_pi
        return (ang, v[i].distance_to(c), v[i].x, v[i].y)

    return _target(quad, tuple(sorted(range(4), key=key)))


def obd_target(quad: Quad) -> tuple[KeyEdges, MatchingType]:
    """The order-invariant target: sorted key edges plus matching type."""
    return encode(quad)


BASELINE_PROTOCOLS: dict[str, Callable[[Quad], OrderedTarget]] = {
    "clockwise": order_clockwise_minx,
    "dmpnet": order_dmpnet,
    "textboxespp": order_textboxespp,
    "qrn": order_qrn,
}
KEYEDGE_PROTOCOL = "keyedge"
PROTOCOL_NAMES: tuple[str, ...] = (*BASELINE_PROTOCOLS, KEYEDGE_PROTOCOL)


@dataclass(frozen=True, slots=True)
class Rotate:
    """Rigid rotation about the quad centroid by a uniform random angle in
    [-degrees, +degrees]."""

    degrees: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.degrees) and self.degrees >= 0.0):
            raise ValueError(f"rotation magnitude must be >= 0, got {self.degrees}")

    def apply(self, quad: Quad, rng: np.random.Generator) -> Quad:
        angle = math.radians(rng.uniform(-self.degrees, self.degrees))
        return rotate(quad, quad.centroid, angle)


@dataclass(frozen=True, slots=True)
class JitterVertex:
    """Independent uniform offset in [-pixels, +pixels] per vertex coordinate."""

    pixels: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.pixels) and self.pixels >= 0.0):
            raise ValueError(f"jitter magnitude must be >= 0, got {self.pixels}")

    def apply(self, quad: Quad, rng: np.random.Generator) -> Quad:
        offsets = rng.uniform(-self.pixels, self.pixels, size=(4, 2))
        return Quad(
            tuple(
                Point(v.x + float(offsets[i, 0]), v.y + float(offsets[i, 1]))
                for i, v in enumerate(quad.vertices)
            )
        )


Perturbation = Union[Rotate, JitterVertex]


@dataclass(frozen=True, slots=True)
class InstabilityReport:
    """Perturbation response of one protocol over a corpus.

    ``flip_rate`` is the fraction of samples whose slot assignment changed
    (for the key-edge protocol: whose matching type changed). The shift
    fields are the mean and max, over samples, of the L-infinity change of
    the eight target values (for the key-edge protocol the targets are the
    sorted key edges, so shifts measure values, not labels).
    """

    protocol: str
    flip_rate: float
    mean_target_shift: float
    max_target_shift: float
    samples: int


def _keyedge_values(ke: KeyEdges) -> tuple[float, ...]:
    return (*ke.xs, *ke.ys)


def measure_instability(
    quads: Sequence[Quad],
    perturbation: Perturbation,
    trials: int,
    seed: int,
    protocols: Iterable[str] | None = None,
) -> list[InstabilityReport]:
    """Perturb every quad ``trials`` times and report per-protocol stability.

    Each (quad, trial) sample draws its own generator seeded by
    (seed, quad index, trial), so results are bit-reproducible and the
    same perturbed copy is shared by all protocols within a sample.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not quads:
        raise ValueError("need at least one quad")
    names = list(protocols) if protocols is not None else list(PROTOCOL_NAMES)
    for name in names:
        if name not in PROTOCOL_NAMES:
            raise ValueError(f"unknown protocol {name!r}; known: {PROTOCOL_NAMES}")

    flips = {n: 0 for n in names}
    shift_sum = {n: 0.0 for n in names}
    shift_max = {n: 0.0 for n in names}
    samples = 0

    base_plain: dict[str, list[OrderedTarget]] = {
        n: [BASELINE_PROTOCOLS[n](q) for q in quads] for n in names if n != KEYEDGE_PROTOCOL
    }
    base_ke = [encode(q) for q in quads] if KEYEDGE_PROTOCOL in names else []

    for qi, quad in enumerate(quads):
        for t in range(trials):
            rng = np.random.default_rng([seed, qi, t])
            perturbed = perturbation.apply(quad, rng)
            samples += 1
            for name in names:
                if name == KEYEDGE_PROTOCOL:
                    ke0, mt0 = base_ke[qi]
                    ke1, mt1 = encode(perturbed)
                    flipped = mt1.id != mt0.id
                    diffs = [
                        abs(a - b)
                        for a, b in zip(_keyedge_values(ke0), _keyedge_values(ke1))
                    ]
                else:
                    t0 = base_plain[name][qi]
                    t1 = BASELINE_PROTOCOLS[name](perturbed)
                    flipped = t1.order != t0.order
                    diffs = [abs(a - b) for a, b in zip(t0.coords, t1.coords)]
                shift = max(diffs)
                flips[name] += flipped
                shift_sum[name] += shift
                shift_max[name] = max(shift_max[name], shift)

    return [
        InstabilityReport(
            protocol=name,
            flip_rate=flips[name] / samples,
            mean_target_shift=shift_sum[name] / samples,
            max_target_shift=shift_max[name],
            samples=samples,
        )
        for name in names
    ]


def adversarial_corpus(protocol: str, n: int, seed: int, size: float = 100.0) -> list[Quad]:
    """Quads sitting exactly on ``protocol``'s discontinuity boundary.

    clockwise: axis-aligned squares, whose two left corners tie for
    minimum x. qrn: diamonds with one vertex exactly on the positive x
    axis from the centroid. dmpnet: quads whose leading diagonal is
    exactly vertical. textboxespp: diamonds equidistant to two
    circumscribed-rectangle corners. Any vertex jitter can flip each of
    these predicates, relabeling the whole target.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    quads: list[Quad] = []
    for _ in range(n):
        cx = float(rng.uniform(2.0 * size, 8.0 * size))
        cy = float(rng.uniform(2.0 * size, 8.0 * size))
        h = size / 2.0
        if protocol == "clockwise":
            quads.append(
                Quad(
                    (
                        Point(cx - h, cy - h),
                        Point(cx + h, cy - h),
                        Point(cx + h, cy + h),
                        Point(cx - h, cy + h),
                    )
                )
            )
        elif protocol in ("qrn", "textboxespp"):
            quads.append(
                Quad(
                    (
                        Point(cx + h, cy),
                        Point(cx, cy + h),
                        Point(cx - h, cy),
                        Point(cx, cy - h),
                    )
                )
            )
        elif protocol == "dmpnet":
            w = float(rng.uniform(0.6 * h, h))
            e1 = float(rng.uniform(-0.2 * h, 0.2 * h))
            e2 = float(rng.uniform(-0.2 * h, 0.2 * h))
            quads.append(
                Quad(
                    (
                        Point(cx, cy - h),
                        Point(cx + w, cy + e1),
                        Point(cx, cy + h),
                        Point(cx - w, cy + e2),
                    )
                )
            )
        else:
            raise ValueError(f"no adversarial corpus for protocol {protocol!r}")
    return quads
