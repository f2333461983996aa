"""Development of cut paths and of the whole cut-open cap into the plane.

Cutting every forest edge leaves a simply connected surface whose loops
enclose no interior vertex (the forest spans them all), so developing faces
across uncut edges is path-independent and the net is well defined by a
single breadth-first unfolding.  Cut paths additionally get their classical
left/right chain developments, turn-distortion accounting, and bank
extraction for the left-of certificates.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .forest import SpanningForest
from .geom import delta_perp, eps_geom, normalize_angle, turn_angle
from .mesh import ConvexCap, compute_metrics
from .monotone import left_of


# --------------------------------------------------------------------------
# cut-path surface angles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CutPath:
    """Leaf-to-rim cut path with per-vertex surface angles.

    ``lam[i]``, ``rho[i]``, ``omega[i]`` are the left angle, right angle and
    curvature at interior path vertex ``i`` (1 <= i <= k-1); entries 0 and k
    are zero placeholders.
    """

    vertices: tuple[int, ...]
    lam: np.ndarray
    rho: np.ndarray
    omega: np.ndarray


def path_angles(cap: ConvexCap, vertices) -> CutPath:
    """Split the full surface angle at each interior path vertex into the
    part left of the path and the part right of it.

    At every such vertex ``lam + omega + rho == 2*pi``.
    """
    vs = [int(v) for v in vertices]
    if len(vs) < 2:
        raise ValueError("cut path needs at least one edge")
    for a, b in zip(vs, vs[1:]):
        if (min(a, b), max(a, b)) not in cap.edge_faces:
            raise ValueError(f"path edge ({a}, {b}) is not a mesh edge")
    k = len(vs) - 1
    lam = np.zeros(k + 1)
    rho = np.zeros(k + 1)
    omega = np.zeros(k + 1)
    for i in range(1, k):
        v = vs[i]
        if v in cap.rim_vertex_set:
            raise ValueError(f"path interior vertex {v} lies on the rim")
        cone = cap.fan_total(v)
        omega[i] = 2 * math.pi - cone
        neighbors, theta = cap.vertex_fan(v)
        t_prev = theta[neighbors.index(vs[i - 1])]
        t_next = theta[neighbors.index(vs[i + 1])]
        # ccw fan: the angle left of the travel direction sweeps from the
        # outgoing edge counterclockwise back to the incoming edge
        lam[i] = (t_prev - t_next) % cone
        rho[i] = cone - lam[i]
    return CutPath(vertices=tuple(vs), lam=lam, rho=rho, omega=omega)


def develop_chain(cap: ConvexCap, vertices, side: str) -> np.ndarray:
    """Isometric planar development of a cut path along one of its banks.

    The right chain starts along the projected direction of the first edge;
    the left chain starts rotated counterclockwise by the leaf curvature
    (opening the leaf cone flat separates the two copies of the first edge
    by exactly that defect).  Turn at interior vertex i is ``pi - lam[i]``
    on the left and ``rho[i] - pi`` on the right (ccw positive).
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    cp = path_angles(cap, vertices)
    vs = cp.vertices
    V = cap.vertices
    lengths = [float(np.linalg.norm(V[b] - V[a])) for a, b in zip(vs, vs[1:])]
    d0 = V[vs[1], :2] - V[vs[0], :2]
    heading = math.atan2(d0[1], d0[0])
    if side == "left":
        leaf = vs[0]
        omega0 = 0.0
        if leaf not in cap.rim_vertex_set:
            omega0 = cap.vertex_curvature(leaf)
        heading += omega0
    pts = [np.array(V[vs[0], :2], dtype=float)]
    for i, L in enumerate(lengths):
        pts.append(pts[-1] + L * np.array([math.cos(heading), math.sin(heading)]))
        if i + 1 < len(lengths):
            if side == "left":
                heading += math.pi - cp.lam[i + 1]
            else:
                heading += cp.rho[i + 1] - math.pi
    return np.array(pts)


# --------------------------------------------------------------------------
# turn distortion
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TurnDistortion:
    """Prefix-wise turn difference between a developed cut path and its
    planar projection, with the claimed bound."""

    prefix_left: np.ndarray
    prefix_right: np.ndarray
    bound: float

    @property
    def max_abs(self) -> float:
        vals = [0.0]
        if len(self.prefix_left):
            vals.append(float(np.abs(self.prefix_left).max()))
        if len(self.prefix_right):
            vals.append(float(np.abs(self.prefix_right).max()))
        return max(vals)

    @property
    def within_bound(self) -> bool:
        return self.max_abs <= self.bound + 1e-9


def turn_distortion(cap: ConvexCap, vertices, metrics=None) -> TurnDistortion:
    """Compare the cumulative turning of each developed chain against the
    projected path, prefix by prefix; bound: 3*delta_perp(Phi) + 2*Omega."""
    cp = path_angles(cap, vertices)
    vs = cp.vertices
    P = cap.vertices[:, :2]
    k = len(vs) - 1
    planar = np.array([
        turn_angle(P[vs[i - 1]], P[vs[i]], P[vs[i + 1]]) for i in range(1, k)
    ])
    tau_left = math.pi - cp.lam[1:k]
    tau_right = cp.rho[1:k] - math.pi
    prefix_left = np.cumsum(tau_left - planar) if k > 1 else np.zeros(0)
    prefix_right = np.cumsum(tau_right - planar) if k > 1 else np.zeros(0)
    m = metrics if metrics is not None else compute_metrics(cap)
    bound = 3 * delta_perp(m.phi_actual) + 2 * m.omega_total
    return TurnDistortion(prefix_left=prefix_left, prefix_right=prefix_right,
                          bound=bound)


# --------------------------------------------------------------------------
# global development (the net)
# --------------------------------------------------------------------------


@dataclass
class Net:
    """Planar placement of every face of the cut-open cap.

    ``placed[f]`` is a (3, 2) array of corner images aligned with
    ``cap.triangles[f]``; ``strip_of`` (filled by the strip stage) maps a
    face to its (quadrant, strip) provenance.
    """

    placed: dict[int, np.ndarray]
    cut_edges: set[tuple[int, int]]
    strip_of: dict[int, tuple[int, int]] = field(default_factory=dict)

    def vertex_image(self, face: int, v: int, triangles: np.ndarray) -> np.ndarray:
        tri = triangles[face]
        i = int(np.where(tri == v)[0][0])
        return self.placed[face][i]

    def triangle_array(self) -> np.ndarray:
        order = sorted(self.placed)
        return np.stack([self.placed[f] for f in order]), order


def layout_net(cap: ConvexCap, forest: SpanningForest) -> Net:
    """Develop the whole cap across every non-forest edge by breadth-first
    unfolding; the result is independent of traversal order because every
    interior vertex is cut."""
    cut = {(min(a, b), max(a, b)) for a, b in forest.edges()}
    placed: dict[int, np.ndarray] = {}

    root = 0
    placed[root] = _root_placement(cap, root)
    queue = deque([root])
    while queue:
        f = queue.popleft()
        tri = cap.triangles[f]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            key = (min(a, b), max(a, b))
            if key in cut:
                continue
            fs = cap.edge_faces[key]
            if len(fs) == 1:
                continue
            g = fs[0] if fs[1] == f else fs[1]
            if g in placed:
                continue
            placed[g] = _unfold_face(cap, placed[f], f, g)
            queue.append(g)
    if len(placed) != cap.n_triangles:
        raise RuntimeError(
            f"cut edges disconnect the surface: placed {len(placed)} of "
            f"{cap.n_triangles} faces"
        )
    return Net(placed=placed, cut_edges=cut)


def _face_local(cap: ConvexCap, f: int) -> np.ndarray:
    """Isometric 2D coordinates of face ``f`` in its own plane (ccw)."""
    return _all_face_locals(cap)[f]


def _all_face_locals(cap: ConvexCap) -> np.ndarray:
    """Isometric 2D coordinates of every face, (m, 3, 2), ccw; cached."""
    cached = getattr(cap, "_face_locals_cache", None)
    if cached is not None:
        return cached
    V = cap.vertices
    T = cap.triangles
    o = V[T[:, 0]]
    e1 = V[T[:, 1]] - o
    e2 = V[T[:, 2]] - o
    ex = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
    nrm = np.cross(e1, e2)
    nrm = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
    ey = np.cross(nrm, ex)
    local = np.zeros((len(T), 3, 2))
    local[:, 1, 0] = np.einsum("ij,ij->i", e1, ex)
    local[:, 2, 0] = np.einsum("ij,ij->i", e2, ex)
    local[:, 2, 1] = np.einsum("ij,ij->i", e2, ey)
    cap._face_locals_cache = local
    return local


def _root_placement(cap: ConvexCap, f: int) -> np.ndarray:
    """Place the seed face isometrically, anchored at its projection: first
    vertex at its projected position, first edge along its projected
    direction.  For a flat cap this reproduces the projection exactly."""
    local = _face_local(cap, f)
    tri = cap.triangles[f]
    P = cap.vertices[tri, :2].astype(float)
    d_loc = local[1] - local[0]
    d_prj = P[1] - P[0]
    ang = math.atan2(d_prj[1], d_prj[0]) - math.atan2(d_loc[1], d_loc[0])
    c, s = math.cos(ang), math.sin(ang)
    R = np.array([[c, -s], [s, c]])
    return (local - local[0]) @ R.T + P[0]


def _unfold_face(cap: ConvexCap, placed_f: np.ndarray, f: int, g: int) -> np.ndarray:
    """Rigidly place face ``g`` into the plane so it shares its common edge
    with the already placed face ``f``."""
    tri_f = cap.triangles[f]
    tri_g = cap.triangles[g]
    shared = sorted(set(tri_f) & set(tri_g))
    u, w = int(shared[0]), int(shared[1])
    local = _face_local(cap, g)

    def local_of(v):
        return local[int(np.where(tri_g == v)[0][0])]

    def placed_of(v):
        return placed_f[int(np.where(tri_f == v)[0][0])]

    src = np.array([local_of(u), local_of(w)])
    dst = np.array([placed_of(u), placed_of(w)])
    ds, dd = src[1] - src[0], dst[1] - dst[0]
    ang = math.atan2(dd[1], dd[0]) - math.atan2(ds[1], ds[0])
    c, s = math.cos(ang), math.sin(ang)
    R = np.array([[c, -s], [s, c]])
    return (local - src[0]) @ R.T + dst[0]


def net_congruent(cap: ConvexCap, net: Net, tol: float = 1e-9) -> bool:
    """Every placed triangle keeps its three 3D edge lengths."""
    order = sorted(net.placed)
    imgs = np.stack([net.placed[f] for f in order])
    tris = cap.triangles[np.asarray(order)]
    V = cap.vertices
    roll = [1, 2, 0]
    l3 = np.linalg.norm(V[tris[:, roll]] - V[tris], axis=2)
    l2 = np.linalg.norm(imgs[:, roll] - imgs, axis=2)
    return bool(np.all(np.abs(l3 - l2) <= tol * np.maximum(1.0, l3)))


# --------------------------------------------------------------------------
# cut banks in the net
# --------------------------------------------------------------------------


def bank_chains(cap: ConvexCap, net: Net, vertices,
                collapse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Planar images of the two banks of a cut path as placed in the net.

    The left bank reads each path vertex out of the face lying left of the
    corresponding directed edge; where a junction splits the surrounding fan
    the two images of the same vertex both appear (a double point).  With
    ``collapse=True`` each double point keeps only its image farther from
    the leaf (the radial upper envelope), which removes the micro radial
    dips the opened junction gaps introduce.
    """
    vs = [int(v) for v in vertices]
    T = cap.triangles

    def face_left(a, b):
        return cap.directed_edge_face[(a, b)]

    def face_right(a, b):
        return cap.directed_edge_face[(b, a)]

    out = []
    for face_of in (face_left, face_right):
        pts: list[tuple[int, np.ndarray]] = []  # (vertex, image)
        first = face_of(vs[0], vs[1])
        pts.append((vs[0], net.vertex_image(first, vs[0], T)))
        for i in range(len(vs) - 1):
            f_in = face_of(vs[i], vs[i + 1])
            pts.append((vs[i + 1], net.vertex_image(f_in, vs[i + 1], T)))
            if i + 2 < len(vs):
                f_out = face_of(vs[i + 1], vs[i + 2])
                nxt = net.vertex_image(f_out, vs[i + 1], T)
                if not np.allclose(nxt, pts[-1][1], atol=1e-12):
                    pts.append((vs[i + 1], nxt))
        if collapse:
            src = pts[0][1]
            kept: list[tuple[int, np.ndarray]] = []
            for v, p in pts:
                if kept and kept[-1][0] == v:
                    if np.linalg.norm(p - src) > np.linalg.norm(kept[-1][1] - src):
                        kept[-1] = (v, p)
                else:
                    kept.append((v, p))
            pts = kept
        out.append(np.array([p for _, p in pts]))
    return out[0], out[1]


def banks_ordered(cap: ConvexCap, net: Net, vertices) -> tuple[bool, float | None]:
    """left_of certificate for the two banks of one leaf-to-root cut path."""
    L, R = bank_chains(cap, net, vertices, collapse=True)
    if not np.allclose(L[0], R[0], atol=1e-9):
        raise RuntimeError("cut banks do not share the leaf image")
    R = R.copy()
    R[0] = L[0]
    return left_of(L, R, check="oracle")


# --------------------------------------------------------------------------
# overlap detection
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapReport:
    pairs: tuple[tuple[int, int, float], ...]  # (face_i, face_j, depth)

    @property
    def clean(self) -> bool:
        return not self.pairs


def check_overlap(net: Net, eps: float | None = None) -> OverlapReport:
    """Exhaustive pairwise triangle-overlap test with contact tolerance.

    Shared developed edges and vertices count as contact; only genuine
    interior penetration deeper than eps is reported.
    """
    tris, order = net.triangle_array()
    e = _contact_tolerance(tris) if eps is None else eps
    lo = tris.min(axis=1)
    hi = tris.max(axis=1)
    m = len(tris)
    pairs = []
    # vectorized bounding-box prefilter
    ok_x = (lo[:, None, 0] <= hi[None, :, 0] + e) & (lo[None, :, 0] <= hi[:, None, 0] + e)
    ok_y = (lo[:, None, 1] <= hi[None, :, 1] + e) & (lo[None, :, 1] <= hi[:, None, 1] + e)
    cand = np.argwhere(np.triu(ok_x & ok_y, k=1))
    if len(cand):
        depths = _pairwise_penetration(tris[cand[:, 0]], tris[cand[:, 1]])
        for (i, j), depth in zip(cand[depths > e], depths[depths > e]):
            pairs.append((order[int(i)], order[int(j)], float(depth)))
    return OverlapReport(pairs=tuple(sorted(pairs)))


def _pairwise_penetration(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Vectorized separating-axis penetration depth for (k, 3, 2) triangle
    batches; 0 where the pair is separated."""
    k = len(A)
    edges = np.concatenate([A[:, [1, 2, 0]] - A, B[:, [1, 2, 0]] - B], axis=1)
    normals = np.stack([-edges[..., 1], edges[..., 0]], axis=-1)  # (k, 6, 2)
    nn = np.linalg.norm(normals, axis=-1, keepdims=True)
    degenerate = nn[..., 0] == 0
    nn[nn == 0] = 1.0
    normals = normals / nn
    pa = np.einsum("kac,kvc->kav", normals, A)   # (k, 6, 3)
    pb = np.einsum("kac,kvc->kav", normals, B)
    sep = np.maximum(pb.min(axis=2) - pa.max(axis=2),
                     pa.min(axis=2) - pb.max(axis=2))   # (k, 6)
    sep[degenerate] = -np.inf   # a zero-length edge contributes no axis
    best = sep.max(axis=1)
    return np.where(best >= 0, 0.0, -best)


def _contact_tolerance(tris: np.ndarray) -> float:
    scale = float(np.abs(tris).max()) or 1.0
    return 1e-7 * scale


def _triangle_penetration(A: np.ndarray, B: np.ndarray) -> float:
    """Penetration depth of two triangles by separating axes (0 if apart)."""
    best = math.inf
    for tri in (A, B):
        for i in range(3):
            edge = tri[(i + 1) % 3] - tri[i]
            n = np.array([-edge[1], edge[0]])
            norm = float(np.hypot(n[0], n[1]))
            if norm == 0.0:
                continue
            n = n / norm
            pa = A @ n
            pb = B @ n
            sep = max(pb.min() - pa.max(), pa.min() - pb.max())
            if sep >= 0:
                return 0.0
            best = min(best, -sep)
    return best if best < math.inf else 0.0


def rasterize_overlap_oracle(net: Net, resolution: int = 256) -> bool:
    """Coarse grid occupancy check: True when some cell center lies strictly
    inside two different placed triangles.  Second opinion for
    :func:`check_overlap`."""
    tris, _ = net.triangle_array()
    lo = tris.reshape(-1, 2).min(axis=0)
    hi = tris.reshape(-1, 2).max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1])) or 1.0
    h = span / resolution
    nx = int((hi[0] - lo[0]) / h) + 1
    ny = int((hi[1] - lo[1]) / h) + 1
    counts = np.zeros((nx, ny), dtype=np.int16)
    margin = 0.25 * h
    for tri in tris:
        tlo = tri.min(axis=0)
        thi = tri.max(axis=0)
        i0 = max(int((tlo[0] - lo[0]) / h), 0)
        i1 = min(int((thi[0] - lo[0]) / h) + 1, nx - 1)
        j0 = max(int((tlo[1] - lo[1]) / h), 0)
        j1 = min(int((thi[1] - lo[1]) / h) + 1, ny - 1)
        if i1 < i0 or j1 < j0:
            continue
        xs = lo[0] + (np.arange(i0, i1 + 1) + 0.5) * h
        ys = lo[1] + (np.arange(j0, j1 + 1) + 0.5) * h
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        inside = np.ones(gx.shape, dtype=bool)
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            cross = (b[0] - a[0]) * (gy - a[1]) - (b[1] - a[1]) * (gx - a[0])
            inside &= cross > margin * float(np.hypot(*(b - a)))
        counts[i0:i1 + 1, j0:j1 + 1] += inside
    return bool((counts >= 2).any())
