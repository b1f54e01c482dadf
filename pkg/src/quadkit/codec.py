"""Order-invariant key-edge encoding of quadrilateral boxes.

A quad is represented by the sorted multiset of its four x coordinates,
the sorted multiset of its four y coordinates (the "key edges"), and a
matching type: one of the 24 bijections pairing x ranks with y ranks.
Because sorting forgets the stored vertex order, the representation is
identical for every cyclic shift or reversal of the input, which removes
the labeling ambiguity that plagues fixed vertex-ordering schemes.

Also provides the half-value compression that pulls key edges toward the
coordinate mean, and per-axis grid quantization for classifier targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Literal

from .geom import EPS, Point, Quad, area, is_simple

__all__ = [
    "DEFAULT_GRID_M",
    "DegenerateQuadError",
    "MatchingType",
    "ALL_MATCHING_TYPES",
    "KeyEdges",
    "HalfEncoded",
    "GridSpec",
    "padded_envelope_grid",
    "encode",
    "decode",
    "is_valid_matching",
    "enumerate_valid_matchings",
    "half_encode",
    "half_decode",
    "quantize",
    "dequantize",
]

DEFAULT_GRID_M = 56

_PERMS: tuple[tuple[int, int, int, int], ...] = tuple(permutations(range(4)))
_PERM_RANK: dict[tuple[int, int, int, int], int] = {p: i for i, p in enumerate(_PERMS)}


class DegenerateQuadError(ValueError):
    """Raised when coordinate ranks cannot be assigned meaningfully."""


@dataclass(frozen=True, slots=True)
class MatchingType:
    """One of the 24 bijections from x ranks to y ranks.

    ``perm[i]`` is the y rank paired with x rank ``i``; ``id`` is the
    lexicographic rank of ``perm`` among all permutations of (0, 1, 2, 3).
    """

    id: int
    perm: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if not 0 <= self.id < 24:
            raise ValueError(f"matching id out of range: {self.id}")
        if _PERMS[self.id] != tuple(self.perm):
            raise ValueError(f"id {self.id} does not rank permutation {self.perm}")
        object.__setattr__(self, "perm", tuple(self.perm))

    @classmethod
    def from_id(cls, id: int) -> "MatchingType":
        if not 0 <= id < 24:
            raise ValueError(f"matching id out of range: {id}")
        return cls(id, _PERMS[id])

    @classmethod
    def from_perm(cls, perm: tuple[int, int, int, int]) -> "MatchingType":
        key = tuple(perm)
        if key not in _PERM_RANK:
            raise ValueError(f"not a permutation of (0, 1, 2, 3): {perm}")
        return cls(_PERM_RANK[key], key)


ALL_MATCHING_TYPES: tuple[MatchingType, ...] = tuple(
    MatchingType(i, p) for i, p in enumerate(_PERMS)
)

_Four = tuple[float, float, float, float]


def _check_four_sorted(values: _Four, label: str) -> None:
    if len(values) != 4:
        raise ValueError(f"{label} needs exactly 4 values, got {len(values)}")
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite {label} value {v}")
    if any(values[i] > values[i + 1] for i in range(3)):
        raise ValueError(f"{label} must be sorted non-decreasing, got {values}")


@dataclass(frozen=True, slots=True)
class KeyEdges:
    """Sorted x and y coordinate multisets of a quad's four vertices."""

    xs: _Four
    ys: _Four

    def __post_init__(self) -> None:
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "ys", tuple(float(v) for v in self.ys))
        _check_four_sorted(self.xs, "xs")
        _check_four_sorted(self.ys, "ys")

    @property
    def x_mean(self) -> float:
        return sum(self.xs) / 4.0

    @property
    def y_mean(self) -> float:
        return sum(self.ys) / 4.0


@dataclass(frozen=True, slots=True)
class HalfEncoded:
    """Key edges pulled halfway toward the coordinate means."""

    x_half: _Four
    y_half: _Four
    x_mean: float
    y_mean: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_half", tuple(float(v) for v in self.x_half))
        object.__setattr__(self, "y_half", tuple(float(v) for v in self.y_half))
        _check_four_sorted(self.x_half, "x_half")
        _check_four_sorted(self.y_half, "y_half")
        if not (math.isfinite(self.x_mean) and math.isfinite(self.y_mean)):
            raise ValueError("non-finite mean")


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Uniform per-axis binning of a rectangular window into ``m`` bins."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    m: int = DEFAULT_GRID_M

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"grid needs m >= 2, got {self.m}")
        if not (self.x_max - self.x_min > 0.0 and self.y_max - self.y_min > 0.0):
            raise ValueError("grid window must have positive extent on both axes")

    def window(self, axis: Literal["x", "y"]) -> tuple[float, float]:
        if axis == "x":
            return (self.x_min, self.x_max)
        if axis == "y":
            return (self.y_min, self.y_max)
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")

    def bin_width(self, axis: Literal["x", "y"]) -> float:
        lo, hi = self.window(axis)
        return (hi - lo) / self.m


def _rank_orders(quad: Quad) -> tuple[list[int], list[int]]:
    """Vertex indices sorted by x then by y, ties broken by the partner
    coordinate and finally by stored index (only reached for coincident
    points, where either choice yields the same encoding)."""
    v = quad.vertices
    x_order = sorted(range(4), key=lambda i: (v[i].x, v[i].y, i))
    y_order = sorted(range(4), key=lambda i: (v[i].y, v[i].x, i))
    return x_order, y_order


def encode(quad: Quad) -> tuple[KeyEdges, MatchingType]:
    """Encode a quad as key edges plus the matching type pairing them.

    Invariant to the stored vertex order. Degenerate quads (zero area,
    one coincident vertex pair) still encode; only a quad collapsed onto
    fewer than three distinct points is rejected, because rank ownership
    carries no information there.
    """
    v = quad.vertices
    multiplicity: dict[tuple[float, float], int] = {}
    for p in v:
        key = (p.x, p.y)
        multiplicity[key] = multiplicity.get(key, 0) + 1
        if multiplicity[key] >= 3:
            raise DegenerateQuadError(
                f"three or more coincident vertices at {key}; ranks are meaningless"
            )
    x_order, y_order = _rank_orders(quad)
    y_rank_of_vertex = {vi: rank for rank, vi in enumerate(y_order)}
    perm = tuple(y_rank_of_vertex[vi] for vi in x_order)
    ke = KeyEdges(
        tuple(v[i].x for i in x_order),
        tuple(v[i].y for i in y_order),
    )
    return ke, MatchingType.from_perm(perm)


def decode(ke: KeyEdges, mt: MatchingType) -> Quad:
    """Reconstruct the quad for a key-edge / matching-type pair.

    Corner ``i`` is (xs[i], ys[perm[i]]). Corners are returned in
    counter-clockwise order about their centroid, starting from the corner
    built from the minimum x; angle ties fall back to radius, then to the
    x rank that built the corner.
    """
    corners = [Point(ke.xs[i], ke.ys[mt.perm[i]]) for i in range(4)]
    cx = sum(p.x for p in corners) / 4.0
    cy = sum(p.y for p in corners) / 4.0

    def angle_key(i: int) -> tuple[float, float, int]:
        p = corners[i]
        return (math.atan2(p.y - cy, p.x - cx), p.distance_to(Point(cx, cy)), i)

    order = sorted(range(4), key=angle_key)
    start = order.index(0)  # corner 0 carries x_min by construction
    cycle = order[start:] + order[:start]
    return Quad(tuple(corners[i] for i in cycle))


def is_valid_matching(ke: KeyEdges, mt: MatchingType) -> bool:
    """True iff the matching reconstructs a simple, positive-area quad.

    Matchings that collide corners (possible whenever key-edge values
    repeat) or flatten the quad onto a line fail this check.
    """
    q = decode(ke, mt)
    return is_simple(q) and area(q) > EPS


def enumerate_valid_matchings(ke: KeyEdges) -> list[MatchingType]:
    """All matching types valid for ``ke``, ascending by id."""
    return [mt for mt in ALL_MATCHING_TYPES if is_valid_matching(ke, mt)]


def half_encode(ke: KeyEdges, x_mean: float, y_mean: float) -> HalfEncoded:
    """Pull each key edge halfway toward the matching axis mean.

    Keeps regression targets inside a window half the original spread,
    which is what makes edges beyond a crop boundary representable.
    """
    return HalfEncoded(
        tuple((x + x_mean) / 2.0 for x in ke.xs),
        tuple((y + y_mean) / 2.0 for y in ke.ys),
        float(x_mean),
        float(y_mean),
    )


def half_decode(he: HalfEncoded) -> KeyEdges:
    """Invert :func:`half_encode`: key = 2 * half - mean."""
    return KeyEdges(
        tuple(2.0 * h - he.x_mean for h in he.x_half),
        tuple(2.0 * h - he.y_mean for h in he.y_half),
    )


def padded_envelope_grid(
    quad: Quad, m: int = DEFAULT_GRID_M, pad_fraction: float = 0.1, min_pad: float = 1.0
) -> GridSpec:
    """Grid over the quad's envelope, padded so every key edge lands in an
    interior bin and degenerate extents still give a usable window."""
    x0, y0, x1, y1 = quad.bounds()
    pad_x = max(pad_fraction * (x1 - x0), min_pad)
    pad_y = max(pad_fraction * (y1 - y0), min_pad)
    return GridSpec(x0 - pad_x, y0 - pad_y, x1 + pad_x, y1 + pad_y, m)


def quantize(coord: float, grid: GridSpec, axis: Literal["x", "y"]) -> int:
    """Bin index of ``coord`` on ``axis``; out-of-window values clamp to the
    nearest edge bin."""
    if not math.isfinite(coord):
        raise ValueError(f"non-finite coordinate {coord}")
    lo, _ = grid.window(axis)
    b = math.floor((coord - lo) / grid.bin_width(axis))
    return min(max(b, 0), grid.m - 1)


def dequantize(bin_index: int, grid: GridSpec, axis: Literal["x", "y"]) -> float:
    """Center coordinate of bin ``bin_index`` on ``axis``."""
    if not 0 <= bin_index < grid.m:
        raise ValueError(f"bin index {bin_index} outside [0, {grid.m})")
    lo, _ = grid.window(axis)
    return lo + (bin_index + 0.5) * grid.bin_width(axis)
