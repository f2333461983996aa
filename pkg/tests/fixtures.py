"""Hand-built caps with exactly known geometry, shared across test modules."""

import math

import numpy as np

from capunfold.mesh import ConvexCap

DEG = math.pi / 180


def pentagonal_pyramid() -> ConvexCap:
    """Five equilateral triangles around an apex: the cap of an icosahedron.

    Rim on the unit circle at z=0, apex at height 1/golden-ratio, every edge
    of length 2*sin(36deg).  Exact values: face tilt 37.3774deg, apex defect
    60deg, rim angles 120deg (surface) / 108deg (projected).
    """
    ang = (90 + 72 * np.arange(5)) * DEG
    rim = np.stack([np.cos(ang), np.sin(ang), np.zeros(5)], axis=1)
    apex = np.array([[0.0, 0.0, 0.6180339887498949]])
    vertices = np.vstack([rim, apex])
    triangles = np.array([(k, (k + 1) % 5, 5) for k in range(5)])
    return ConvexCap(vertices, triangles)


def square_pyramid(height: float = 0.3) -> ConvexCap:
    """Four triangles over a unit-circumradius square rim."""
    ang = (45 + 90 * np.arange(4)) * DEG
    rim = np.stack([np.cos(ang), np.sin(ang), np.zeros(4)], axis=1)
    apex = np.array([[0.0, 0.0, height]])
    vertices = np.vstack([rim, apex])
    triangles = np.array([(k, (k + 1) % 4, 4) for k in range(4)])
    return ConvexCap(vertices, triangles)


def flat_hex_disk(lift: float = 0.0) -> ConvexCap:
    """Six triangles around one interior vertex; flat when lift == 0."""
    ang = 60 * np.arange(6) * DEG
    rim = np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1)
    center = np.array([[0.0, 0.0, lift]])
    vertices = np.vstack([rim, center])
    triangles = np.array([(k, (k + 1) % 6, 6) for k in range(6)])
    return ConvexCap(vertices, triangles)
