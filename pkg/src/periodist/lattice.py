"""Deterministic enumeration of integer lattice points by 1-norm shells.

Every window scan in the package walks lattice points in the same fixed
order: shells of constant 1-norm, radius increasing, and lexicographic
order on the coordinate tuple inside each shell.  "First violation"
results and truncated sums are therefore reproducible bit for bit.

The shell cardinality bound ``count(d, r) <= 2^d * (1+r)^(d-1)`` used by
series tail estimates is exported here so it can be validated against
exhaustive enumeration (see the test suite).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

LatticeIndex = tuple[int, ...]


def norm1(index: LatticeIndex) -> int:
    """1-norm of a lattice index."""
    return sum(abs(c) for c in index)


def shell_count_bound(dimension: int, radius: int) -> float:
    """Upper bound on the number of lattice points with 1-norm exactly `radius`.

    The bound is ``2^d * (1+r)^(d-1)``: each point is determined by a sign
    pattern (at most 2^d choices) and a composition of r into d parts
    (at most (1+r)^(d-1) choices).
    """
    if dimension < 1 or radius < 0:
        raise ValueError("need dimension >= 1 and radius >= 0")
    return float(2**dimension) * float(1 + radius) ** (dimension - 1)


@lru_cache(maxsize=64)
def ball(dimension: int, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """All lattice points with 1-norm <= radius, in canonical scan order.

    Returns ``(points, norms)`` where ``points`` has shape ``(count, dimension)``
    and ``norms[i]`` is the 1-norm of row i.  Rows are sorted by
    ``(norm, coordinates lexicographically)``.  Arrays are read-only and
    cached per ``(dimension, radius)``.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    axes = [np.arange(-radius, radius + 1, dtype=np.int64)] * dimension
    grid = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grid], axis=1)
    norms = np.abs(points).sum(axis=1)
    keep = norms <= radius
    points = points[keep]
    norms = norms[keep]
    # lexsort's last key is the primary one: sort by norm, then coordinates.
    keys = [points[:, axis] for axis in reversed(range(dimension))] + [norms]
    order = np.lexsort(keys)
    points = points[order]
    norms = norms[order]
    points.setflags(write=False)
    norms.setflags(write=False)
    return points, norms


def shell(dimension: int, radius: int) -> np.ndarray:
    """Lattice points with 1-norm exactly `radius`, lexicographically sorted."""
    points, norms = ball(dimension, radius)
    return points[norms == radius]


def shell_count(dimension: int, radius: int) -> int:
    """Exact number of lattice points with 1-norm exactly `radius`."""
    return int(shell(dimension, radius).shape[0])


def ball_iter(dimension: int, radius: int):
    """Iterate the canonical scan order as plain index tuples."""
    points, _ = ball(dimension, radius)
    for row in points:
        yield tuple(int(c) for c in row)
