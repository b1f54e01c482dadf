"""Shared fixtures, strategies, and helpers for the quadkit test suite."""

from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from quadkit import Quad, area, is_simple
from quadkit.synth import random_quad_corpus

settings.register_profile(
    "quadkit",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)
settings.load_profile("quadkit")

# Two quads reused across modules: a generic irregular one with distinct
# coordinates on both axes, and an axis-aligned rectangle whose tied
# coordinates exercise every tie-break rule.
IRREGULAR = Quad.from_coords((1, 2, 7, 0, 9, 5, 3, 8))
RECT = Quad.from_coords((0, 0, 4, 0, 4, 2, 0, 2))


def vertex_set(quad: Quad) -> set[tuple[float, float]]:
    return {(v.x, v.y) for v in quad.vertices}


def vertex_sets_equal(a: Quad, b: Quad) -> bool:
    """Exact (bitwise float) equality of the two vertex multisets."""
    pairs_a = sorted((v.x, v.y) for v in a.vertices)
    pairs_b = sorted((v.x, v.y) for v in b.vertices)
    return pairs_a == pairs_b


def dihedral_orderings(quad: Quad) -> list[Quad]:
    """The 8 storage orders that preserve the vertex cycle."""
    verts = quad.vertices
    out = []
    for start in range(4):
        fwd = tuple(verts[(start + i) % 4] for i in range(4))
        rev = tuple(verts[(start - i) % 4] for i in range(4))
        out.append(Quad(fwd))
        out.append(Quad(rev))
    return out


def all_orderings(quad: Quad) -> list[Quad]:
    """All 24 storage orders, cycle-preserving or not."""
    from itertools import permutations

    verts = quad.vertices
    return [Quad(tuple(verts[i] for i in perm)) for perm in permutations(range(4))]


@st.composite
def star_quads(draw: st.DrawFn) -> Quad:
    """Simple quads built star-shaped around a centre (convex or concave)."""
    cx = draw(st.floats(-500, 500))
    cy = draw(st.floats(-500, 500))
    base = draw(st.floats(0, 2 * math.pi))
    gaps = [draw(st.floats(0.2, 2.0)) for _ in range(4)]
    total = sum(gaps)
    angles = []
    acc = base
    for g in gaps:
        acc += g / total * 2 * math.pi
        angles.append(acc)
    radii = [draw(st.floats(1.0, 100.0)) for _ in range(4)]
    coords = []
    for ang, r in zip(angles, radii):
        coords.extend((cx + r * math.cos(ang), cy + r * math.sin(ang)))
    quad = Quad.from_coords(coords)
    assume(is_simple(quad) and area(quad) > 1e-3)
    return quad


@st.composite
def score_vectors(draw: st.DrawFn) -> list[float]:
    n = draw(st.integers(min_value=3, max_value=56))
    return draw(
        st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n)
    )


@pytest.fixture(scope="session")
def corpus_200() -> list[Quad]:
    return random_quad_corpus(200, seed=7)


@pytest.fixture(scope="session")
def corpus_1k() -> list[Quad]:
    return random_quad_corpus(1000, seed=11)
