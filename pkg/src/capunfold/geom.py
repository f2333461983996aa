"""Scalar geometry used everywhere else: angles, turns, wedges, and the
flatness/acuteness budget arithmetic for nearly flat convex caps.

All angles are radians internally.  Degrees only appear at I/O boundaries.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS_GEOM",
    "eps_geom",
    "Wedge",
    "angle_between",
    "delta_perp",
    "normalize_angle",
    "omega_bound",
    "phi_budget",
    "project_angle",
    "signed_turn",
    "turn_angle",
    "wedge_contains",
]

#: Default absolute tolerance for geometric predicates (see eps_geom()).
EPS_GEOM = 1e-9


_EPS_CACHE: tuple[str | None, float] = (None, EPS_GEOM)


def eps_geom() -> float:
    """Geometric tolerance; overridable via CAPUNFOLD_EPS_GEOM for testing."""
    global _EPS_CACHE
    raw = os.environ.get("CAPUNFOLD_EPS_GEOM")
    if raw != _EPS_CACHE[0]:
        _EPS_CACHE = (raw, EPS_GEOM if raw is None else float(raw))
    return _EPS_CACHE[1]


def normalize_angle(theta: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    elif t > math.pi:
        t -= 2.0 * math.pi
    return t


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Unsigned angle between two vectors (2D or 3D), robust near 0 and pi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("zero-length vector has no direction")
    # atan2 form avoids the acos precision cliff near parallel/antiparallel.
    if u.shape[-1] == 2:
        cross = abs(u[0] * v[1] - u[1] * v[0])
    else:
        cross = float(np.linalg.norm(np.cross(u, v)))
    return math.atan2(cross, float(np.dot(u, v)))


def signed_turn(d_in: np.ndarray, d_out: np.ndarray) -> float:
    """Signed CCW turn in the plane from heading d_in to heading d_out, in (-pi, pi]."""
    a_in = math.atan2(d_in[1], d_in[0])
    a_out = math.atan2(d_out[1], d_out[0])
    return normalize_angle(a_out - a_in)


def turn_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Signed CCW exterior (turn) angle at b for the planar polyline a->b->c.

    Zero for collinear continuation, +pi/2 for a left right-angle turn.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return signed_turn(b - a, c - b)


def delta_perp(phi: float) -> float:
    """Worst-case planar-projection distortion of one angle on a face tilted phi.

    Exact closed form; phi in [0, pi/2).  Small-angle behaviour is
    phi**2/2 + phi**4/12 + O(phi**6).
    """
    if not 0.0 <= phi < math.pi / 2:
        raise ValueError(f"phi must lie in [0, pi/2), got {phi}")
    s2 = math.sin(phi) ** 2
    return math.acos(s2 / (s2 - 2.0)) - math.pi / 2


def project_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between the xy-projections of two 3D vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return angle_between(u[:2], v[:2])


def omega_bound(phi: float) -> float:
    """Upper bound 2*pi*(1 - cos(phi)) on the total curvature of a cap with tilt <= phi."""
    if phi < 0.0:
        raise ValueError("phi must be nonnegative")
    return 2.0 * math.pi * (1.0 - math.cos(phi))


def phi_budget(alpha: float) -> float:
    """Largest face tilt Phi for which the turn-distortion budget fits into
    an acuteness gap alpha: Phi = sqrt(2/(4*pi+3)) * sqrt(alpha).
    """
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    return math.sqrt(2.0 / (4.0 * math.pi + 3.0)) * math.sqrt(alpha)


@dataclass(frozen=True)
class Wedge:
    """Closed cone of directions [base, base + width] (width in [0, 2*pi))."""

    base: float
    width: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.width < 2.0 * math.pi:
            raise ValueError(f"wedge width must lie in [0, 2*pi), got {self.width}")

    @property
    def bisector(self) -> float:
        return self.base + 0.5 * self.width


def wedge_contains(wedge: Wedge, direction: float, slack: float | None = None) -> bool:
    """True if a direction angle lies in the closed wedge, within eps slack."""
    if slack is None:
        slack = eps_geom()
    delta = math.fmod(direction - wedge.base, 2.0 * math.pi)
    if delta < 0.0:
        delta += 2.0 * math.pi
    if delta <= wedge.width + slack:
        return True
    # A direction just below `base` wraps to delta ~ 2*pi.
    return delta >= 2.0 * math.pi - slack
