"""Waterfall strip partition of the projected cap.

Each quadrant is partitioned by noncrossing, angle-monotone "waterfall"
polylines running from the forest leaves down to the origin q: a leaf drops
(in oblique coordinates aligned with the quadrant) onto an epsilon-offset of
the envelope of the earlier paths, rides it to its own height level, heads to
a target point on a small circle around q, and finishes radially.

The paths are geometric polylines, not mesh polylines.  Strips therefore
store whole triangles, assigned by which side of the paths their projected
centroid lies; the actual cuts remain exactly the forest edges, and the
paths only dictate strip ordering and certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .forest import QuadrantSystem, SpanningForest, verify_angle_monotone
from .mesh import ConvexCap


class StripError(RuntimeError):
    """Waterfall construction failed (degenerate leaf placement)."""


@dataclass(frozen=True)
class WaterfallPath:
    """Polyline from q out to a leaf (global planar coordinates), plus the
    projected tree path from that leaf to its rim root (the zero-width tail
    shared by the two adjacent strips)."""

    leaf: int
    points: np.ndarray          # (k, 2), q first, leaf last
    tail: np.ndarray            # (t, 2), leaf first, rim root last


@dataclass(frozen=True)
class Strip:
    """Region between two consecutive waterfall paths (or a path and a
    quadrant axis), carrying whole triangles."""

    quadrant: int
    index: int
    faces: tuple[int, ...]
    lower: WaterfallPath | None   # clockwise boundary (None: quadrant axis)
    upper: WaterfallPath | None   # counterclockwise boundary


@dataclass
class StripSystem:
    strips: list[Strip]
    paths: dict[int, list[WaterfallPath]]   # per quadrant, in height order
    eps: dict[int, float]
    radius: dict[int, float]
    strip_of: dict[int, tuple[int, int]] = field(default_factory=dict)


# --------------------------------------------------------------------------
# piecewise-linear envelope helpers (oblique coordinates)
# --------------------------------------------------------------------------


def _pl_eval(f: tuple[np.ndarray, np.ndarray], a):
    xs, ys = f
    return np.interp(a, xs, ys)


def _pl_max(f, g):
    """Pointwise maximum of two nondecreasing piecewise-linear functions,
    each extended by constants beyond its breakpoints."""
    xs = np.unique(np.concatenate([f[0], g[0]]))
    yf = np.interp(xs, *f)
    yg = np.interp(xs, *g)
    pts_x = [xs[0]]
    pts_y = [max(yf[0], yg[0])]
    for i in range(len(xs) - 1):
        d0 = yf[i] - yg[i]
        d1 = yf[i + 1] - yg[i + 1]
        if d0 * d1 < 0:
            t = d0 / (d0 - d1)
            pts_x.append(xs[i] + t * (xs[i + 1] - xs[i]))
            pts_y.append(yf[i] + t * (yf[i + 1] - yf[i]))
        pts_x.append(xs[i + 1])
        pts_y.append(max(yf[i + 1], yg[i + 1]))
    return np.array(pts_x), np.array(pts_y)


def _path_graph(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nondecreasing PL function a -> max b reached, from a monotone
    polyline; vertical runs collapse to their upper end."""
    a, b = points[:, 0], np.maximum.accumulate(points[:, 1])
    keep = np.empty(len(a), dtype=bool)
    keep[:-1] = a[:-1] < a[1:] - 0.0
    keep[-1] = True
    # for duplicate abscissae keep the last (largest b)
    return a[keep], b[keep]


# --------------------------------------------------------------------------
# waterfall construction
# --------------------------------------------------------------------------


def waterfall_strips(cap: ConvexCap, forest: SpanningForest) -> StripSystem:
    qs = forest.system
    theta = qs.theta
    q = int(qs.origin)
    P = cap.vertices[:, :2]
    origin = P[q]

    leaves_by_quadrant: dict[int, list[int]] = {i: [] for i in range(4)}
    for leaf in sorted(forest.leaves()):
        if leaf == q:
            continue
        leaves_by_quadrant[forest.quadrant_of_vertex[leaf]].append(leaf)

    paths: dict[int, list[WaterfallPath]] = {}
    eps_q: dict[int, float] = {}
    rad_q: dict[int, float] = {}
    for i in range(4):
        paths[i], eps_q[i], rad_q[i] = _quadrant_paths(
            cap, forest, i, leaves_by_quadrant[i])

    strip_of = _assign_faces(cap, forest, paths)
    strip_of = _repair_connectivity(cap, strip_of)

    strips: list[Strip] = []
    for i in range(4):
        n = len(paths[i])
        members: dict[int, list[int]] = {s: [] for s in range(n + 1)}
        for f, (qi, s) in strip_of.items():
            if qi == i:
                members.setdefault(s, []).append(f)
        for s in sorted(members):
            strips.append(Strip(
                quadrant=i, index=s, faces=tuple(sorted(members[s])),
                lower=paths[i][s - 1] if s >= 1 else None,
                upper=paths[i][s] if s < n else None,
            ))
    return StripSystem(strips=strips, paths=paths, eps=eps_q, radius=rad_q,
                       strip_of=strip_of)


def _quadrant_frame(qs: QuadrantSystem, quadrant: int) -> float:
    return qs.quadrant(quadrant).base


def _to_local(P, origin, rot):
    c, s = math.cos(rot), math.sin(rot)
    R = np.array([[c, s], [-s, c]])
    return (np.atleast_2d(P) - origin) @ R.T


def _to_global(pts, origin, rot):
    c, s = math.cos(rot), math.sin(rot)
    R = np.array([[c, -s], [s, c]])
    return np.atleast_2d(pts) @ R.T + origin


def _oblique(pts, theta):
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([x - y / math.tan(theta), y / math.sin(theta)], axis=-1)


def _cartesian(ab, theta):
    a, b = ab[..., 0], ab[..., 1]
    return np.stack([a + b * math.cos(theta), b * math.sin(theta)], axis=-1)


def _quadrant_paths(cap: ConvexCap, forest: SpanningForest, quadrant: int,
                    leaves: list[int]):
    qs = forest.system
    theta = qs.theta
    q = int(qs.origin)
    P = cap.vertices[:, :2]
    origin = P[q]
    rot = _quadrant_frame(qs, quadrant)
    if not leaves:
        return [], 0.0, 0.0

    loc = _to_local(P[leaves], origin, rot)
    ob = _oblique(loc, theta)
    order = sorted(range(len(leaves)), key=lambda k: (ob[k, 1], -ob[k, 0]))
    leaves = [leaves[k] for k in order]
    ob = ob[order]
    a_leaf, b_leaf = ob[:, 0], ob[:, 1]
    n = len(leaves)

    if a_leaf.min() <= 0 or b_leaf.min() <= 0:
        raise StripError(
            f"quadrant {quadrant}: leaf on or beyond an axis (a_min="
            f"{a_leaf.min():.3g}, b_min={b_leaf.min():.3g})")

    r = 0.9 * float(a_leaf.min())
    eps = _epsilon(cap, forest, quadrant, leaves, ob, r)

    env = (np.array([0.0]), np.array([0.0]))   # baseline: the lower axis
    out: list[WaterfallPath] = []
    for i in range(1, n + 1):
        ai, bi = float(a_leaf[i - 1]), float(b_leaf[i - 1])
        level = i * eps
        gamma = math.asin(level * math.sin(theta) / r)
        c_cart = np.array([r * math.cos(gamma), r * math.sin(gamma)])
        c_ob = _oblique(c_cart, theta)
        a_c = float(c_ob[0])
        if a_c >= ai:
            raise StripError(
                f"quadrant {quadrant}: target circle reaches past leaf "
                f"{leaves[i - 1]}")
        # ride b = max(env(a) + eps, level) from the circle target out to
        # the leaf abscissa, then drop (climb, read leaf-to-q) to the leaf
        bks = [a_c, ai]
        bks += [float(x) for x in env[0] if a_c < x < ai]
        bks = sorted(set(bks))
        ride_a, ride_b = [], []
        for k in range(len(bks)):
            x = bks[k]
            y = max(float(_pl_eval(env, x)) + eps, level)
            if k and ride_b[-1] == level == y:
                continue   # merge the flat run
            ride_a.append(x)
            ride_b.append(y)
        foot = ride_b[-1]
        if foot >= bi:
            raise StripError(
                f"quadrant {quadrant}: drop foot {foot:.6g} above leaf "
                f"{leaves[i - 1]} at b={bi:.6g}")
        ab_pts = [(0.0, 0.0), (a_c, level)]
        ab_pts += list(zip(ride_a, ride_b))
        ab_pts.append((ai, bi))
        ab = np.array([p for j, p in enumerate(ab_pts)
                       if j == 0 or not np.allclose(p, ab_pts[j - 1])])
        pts = _to_global(_cartesian(ab, theta), origin, rot)
        tail3 = forest.path_to_root(leaves[i - 1])
        tail = P[tail3].astype(float)
        out.append(WaterfallPath(leaf=leaves[i - 1], points=pts, tail=tail))
        env = _pl_max(env, _path_graph(ab))
    return out, eps, r


def _epsilon(cap: ConvexCap, forest: SpanningForest, quadrant: int,
             leaves: list[int], ob: np.ndarray, r: float) -> float:
    """Clearance unit: 1/(n+1) of the smallest of the vertical leaf-to-forest
    distance, the horizontal leaf separation, the leaf height gaps, the
    lowest leaf height, and the circle radius headroom."""
    n = len(leaves)
    a_leaf, b_leaf = ob[:, 0], ob[:, 1]
    cands = [0.9 * r, float(b_leaf.min())]

    bs = np.sort(b_leaf)
    gaps = np.diff(bs)
    gaps = gaps[gaps > 0]
    if len(gaps):
        cands.append(float(gaps.min()))
    da = np.abs(a_leaf[:, None] - a_leaf[None, :])
    da = da[da > 0]
    if len(da):
        cands.append(float(da.min()))

    # vertical distance from each leaf down to the projected forest edges
    qs = forest.system
    P = cap.vertices[:, :2]
    rot = _quadrant_frame(qs, quadrant)
    edges = list(forest.edges())
    if edges:
        E = np.array(edges)
        A = _oblique(_to_local(P[E[:, 0]], P[qs.origin], rot), qs.theta)
        B = _oblique(_to_local(P[E[:, 1]], P[qs.origin], rot), qs.theta)
        for k, leaf in enumerate(leaves):
            a0, b0 = float(a_leaf[k]), float(b_leaf[k])
            for (u, v), pa, pb in zip(edges, A, B):
                if leaf in (u, v):
                    continue
                lo, hi = sorted((pa[0], pb[0]))
                if not (lo <= a0 <= hi) or hi == lo:
                    continue
                t = (a0 - pa[0]) / (pb[0] - pa[0])
                b_at = pa[1] + t * (pb[1] - pa[1])
                if 0 < b0 - b_at:
                    cands.append(b0 - b_at)
    return min(cands) / (n + 1)


# --------------------------------------------------------------------------
# whole-triangle strip assignment
# --------------------------------------------------------------------------


def _assign_faces(cap: ConvexCap, forest: SpanningForest,
                  paths: dict[int, list[WaterfallPath]]):
    qs = forest.system
    theta = qs.theta
    P = cap.vertices[:, :2]
    origin = P[qs.origin]
    cent = P[cap.triangles].mean(axis=1)
    d = cent - origin
    angles = np.arctan2(d[:, 1], d[:, 0])

    # precompute per-quadrant envelopes of each path
    graphs: dict[int, list[tuple[np.ndarray, np.ndarray]]] = {}
    for i in range(4):
        rot = _quadrant_frame(qs, i)
        graphs[i] = []
        for wp in paths[i]:
            loc = _oblique(_to_local(wp.points, origin, rot), theta)
            graphs[i].append(_path_graph(loc))

    strip_of: dict[int, tuple[int, int]] = {}
    for f in range(cap.n_triangles):
        qi = qs.quadrant_of(float(angles[f]))
        if qi < 0:
            qi = 0   # the gap sits below every quadrant-0 path
        rot = _quadrant_frame(qs, qi)
        ab = _oblique(_to_local(cent[f], origin, rot), theta)[0]
        s = 0
        for g in graphs[qi]:
            if ab[1] > float(_pl_eval(g, ab[0])):
                s += 1
            else:
                break
        strip_of[f] = (qi, s)
    return strip_of


def _face_neighbors(cap: ConvexCap, f: int):
    tri = cap.triangles[f]
    for k in range(3):
        a, b = int(tri[k]), int(tri[(k + 1) % 3])
        for g in cap.edge_faces[(min(a, b), max(a, b))]:
            if g != f:
                yield g


def _repair_connectivity(cap: ConvexCap, strip_of: dict):
    """Strips are thinner than triangles near the target circle, so
    centroid-side assignment leaves stray pockets.  Merge every minority
    component of a strip into the most common strip among its outside
    neighbors until every strip is edge-connected."""
    strip_of = dict(strip_of)
    for _ in range(100):
        members: dict[tuple[int, int], list[int]] = {}
        for f, lab in strip_of.items():
            members.setdefault(lab, []).append(f)
        moved = False
        for lab, faces in members.items():
            comps = _components(cap, set(faces))
            if len(comps) <= 1:
                continue
            comps.sort(key=lambda c: (-len(c), min(c)))
            for comp in comps[1:]:
                votes: dict[tuple[int, int], int] = {}
                for f in comp:
                    for g in _face_neighbors(cap, f):
                        other = strip_of[g]
                        if other != lab:
                            votes[other] = votes.get(other, 0) + 1
                if not votes:
                    continue
                target = max(sorted(votes), key=lambda k: votes[k])
                for f in comp:
                    strip_of[f] = target
                moved = True
        if not moved:
            return strip_of
    raise StripError("strip connectivity repair did not converge")


def _components(cap: ConvexCap, faces: set[int]) -> list[list[int]]:
    comps = []
    left = set(faces)
    while left:
        seed = min(left)
        comp = {seed}
        frontier = [seed]
        while frontier:
            f = frontier.pop()
            for g in _face_neighbors(cap, f):
                if g in left and g not in comp:
                    comp.add(g)
                    frontier.append(g)
        comps.append(sorted(comp))
        left -= comp
    return comps


# --------------------------------------------------------------------------
# strip development and certificates
# --------------------------------------------------------------------------


def develop_strip(cap: ConvexCap, strip: Strip, net) -> dict[int, np.ndarray]:
    """Placed triangles of one strip, read out of the global development
    (which is traversal-order independent); verifies the content is
    edge-connected."""
    faces = set(strip.faces)
    if not faces:
        return {}
    seen = {next(iter(sorted(faces)))}
    frontier = list(seen)
    while frontier:
        f = frontier.pop()
        tri = cap.triangles[f]
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            for g in cap.edge_faces[(min(a, b), max(a, b))]:
                if g in faces and g not in seen:
                    seen.add(g)
                    frontier.append(g)
    if seen != faces:
        raise StripError(
            f"strip ({strip.quadrant},{strip.index}) content is not "
            f"edge-connected: {len(seen)} of {len(faces)} reachable")
    return {f: net.placed[f] for f in strip.faces}


def _segments_cross(p1, p2, p3, p4, tol=1e-12) -> bool:
    d1 = p2 - p1
    d2 = p4 - p3
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(den) < tol:
        return False
    t = ((p3[0] - p1[0]) * d2[1] - (p3[1] - p1[1]) * d2[0]) / den
    u = ((p3[0] - p1[0]) * d1[1] - (p3[1] - p1[1]) * d1[0]) / den
    return tol < t < 1 - tol and tol < u < 1 - tol


def polylines_cross(A: np.ndarray, B: np.ndarray) -> bool:
    """Brute-force proper-crossing test between two polylines (vectorized
    over all segment pairs)."""
    tol = 1e-12
    p1 = A[:-1][:, None, :]
    d1 = (A[1:] - A[:-1])[:, None, :]
    p3 = B[:-1][None, :, :]
    d2 = (B[1:] - B[:-1])[None, :, :]
    den = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    w = p3 - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[..., 0] * d2[..., 1] - w[..., 1] * d2[..., 0]) / den
        u = (w[..., 0] * d1[..., 1] - w[..., 1] * d1[..., 0]) / den
    ok = np.abs(den) >= tol
    cross = ok & (t > tol) & (t < 1 - tol) & (u > tol) & (u < 1 - tol)
    return bool(cross.any())


def strip_certificates(cap: ConvexCap, forest: SpanningForest,
                       system: StripSystem, net) -> dict:
    """Certificate bundle for the strip partition."""
    from .monotone import left_of

    qs = forest.system
    theta = qs.theta
    out: dict = {"errors": []}

    # partition + area tiling
    assigned = set(system.strip_of)
    if assigned != set(range(cap.n_triangles)):
        out["errors"].append("strip assignment is not a partition of faces")
    P = cap.vertices[:, :2]
    tri = P[cap.triangles]
    areas = 0.5 * np.abs(
        (tri[:, 1, 0] - tri[:, 0, 0]) * (tri[:, 2, 1] - tri[:, 0, 1])
        - (tri[:, 1, 1] - tri[:, 0, 1]) * (tri[:, 2, 0] - tri[:, 0, 0]))
    rim = P[cap.rim]
    cap_area = 0.5 * abs(float(
        np.sum(rim[:, 0] * np.roll(rim[:, 1], -1)
               - np.roll(rim[:, 0], -1) * rim[:, 1])))
    out["area_relative_error"] = abs(float(areas.sum()) - cap_area) / cap_area
    if out["area_relative_error"] > 1e-6:
        out["errors"].append("strip areas do not tile the cap")

    # boundaries: theta-monotone, pairwise noncrossing, ordered
    out["paths_monotone"] = True
    out["paths_noncrossing"] = True
    out["paths_ordered"] = True
    for i in range(4):
        ps = system.paths[i]
        for wp in ps:
            if verify_angle_monotone(wp.points, theta) is None:
                out["paths_monotone"] = False
                out["errors"].append(
                    f"waterfall path to leaf {wp.leaf} not angle-monotone")
        for j in range(len(ps)):
            for k in range(j + 1, len(ps)):
                if polylines_cross(ps[j].points, ps[k].points):
                    out["paths_noncrossing"] = False
                    out["errors"].append(
                        f"waterfall paths cross in quadrant {i} "
                        f"(leaves {ps[j].leaf}, {ps[k].leaf})")
        for j in range(len(ps) - 1):
            upper = ps[j + 1].points.copy()
            lower = ps[j].points.copy()
            upper[0] = lower[0]
            ok, _ = left_of(upper, lower)
            if not ok:
                out["paths_ordered"] = False
                out["errors"].append(
                    f"quadrant {i}: path {j + 1} not left of path {j}")

    # strip content: edge-connected and developable
    out["strips_connected"] = True
    for strip in system.strips:
        try:
            develop_strip(cap, strip, net)
        except StripError as exc:
            out["strips_connected"] = False
            out["errors"].append(str(exc))

    # apex angles at q across all strips close up the cone at q
    q = int(qs.origin)
    total = 0.0
    for f in cap.vertex_faces[q]:
        img = net.placed[f]
        t = cap.triangles[f]
        k = int(np.where(t == q)[0][0])
        a = img[(k + 1) % 3] - img[k]
        b = img[(k + 2) % 3] - img[k]
        total += math.acos(np.clip(
            float(np.dot(a, b)) / float(np.linalg.norm(a) * np.linalg.norm(b)),
            -1.0, 1.0))
    out["apex_angle_error"] = abs(
        total - (2 * math.pi - cap.vertex_curvature(q)))
    if out["apex_angle_error"] > 1e-9:
        out["errors"].append("strip apex angles at q do not close the cone")

    out["clean"] = not out["errors"]
    return out
