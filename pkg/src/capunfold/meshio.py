"""Read and write triangle meshes as OFF or OBJ files.

Cut edges (the forest edges severed by the unfolding) ride along as comment
lines ``# cut i j`` so a mesh and its cut set round-trip through one file.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import ConvexCap

CutEdges = list[tuple[int, int]]


def load_mesh(path) -> tuple[ConvexCap, CutEdges]:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        return load_off(path)
    if suffix == ".obj":
        return load_obj(path)
    raise ValueError(f"unsupported mesh format {suffix!r} (use .off or .obj)")


def save_mesh(path, cap: ConvexCap, cut_edges: CutEdges | None = None) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        save_off(path, cap, cut_edges)
    elif suffix == ".obj":
        save_obj(path, cap, cut_edges)
    else:
        raise ValueError(f"unsupported mesh format {suffix!r} (use .off or .obj)")


# --------------------------------------------------------------------------
# OFF
# --------------------------------------------------------------------------


def load_off(path) -> tuple[ConvexCap, CutEdges]:
    cuts: CutEdges = []
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            body, _, comment = line.partition("#")
            cut = _parse_cut_comment(comment)
            if cut is not None:
                cuts.append(cut)
            tokens.extend(body.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError(f"{path}: not an OFF file")
    it = iter(tokens[1:])
    nv, nf, _ne = int(next(it)), int(next(it)), int(next(it))
    vertices = np.array(
        [[float(next(it)) for _ in range(3)] for _ in range(nv)]
    )
    triangles = []
    for _ in range(nf):
        k = int(next(it))
        face = [int(next(it)) for _ in range(k)]
        if k != 3:
            raise ValueError(f"{path}: face with {k} sides; triangles only")
        triangles.append(face)
    return ConvexCap(vertices, np.array(triangles, dtype=int)), cuts


def save_off(path, cap: ConvexCap, cut_edges: CutEdges | None = None) -> None:
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{cap.n_vertices} {cap.n_triangles} {cap.n_edges}\n")
        for v in cap.vertices:
            fh.write("%.17g %.17g %.17g\n" % tuple(v))
        for t in cap.triangles:
            fh.write("3 %d %d %d\n" % tuple(t))
        for a, b in cut_edges or []:
            fh.write(f"# cut {a} {b}\n")


# --------------------------------------------------------------------------
# OBJ
# --------------------------------------------------------------------------


def load_obj(path) -> tuple[ConvexCap, CutEdges]:
    vertices: list[list[float]] = []
    triangles: list[list[int]] = []
    cuts: CutEdges = []
    with open(path) as fh:
        for line in fh:
            body, _, comment = line.partition("#")
            cut = _parse_cut_comment(comment)
            if cut is not None:
                cuts.append(cut)
            parts = body.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise ValueError(f"{path}: non-triangle face; triangles only")
                triangles.append(idx)
    return ConvexCap(np.array(vertices), np.array(triangles, dtype=int)), cuts


def save_obj(path, cap: ConvexCap, cut_edges: CutEdges | None = None) -> None:
    with open(path, "w") as fh:
        for v in cap.vertices:
            fh.write("v %.17g %.17g %.17g\n" % tuple(v))
        for t in cap.triangles:
            fh.write("f %d %d %d\n" % tuple(t + 1))
        for a, b in cut_edges or []:
            fh.write(f"# cut {a} {b}\n")


def _parse_cut_comment(comment: str) -> tuple[int, int] | None:
    parts = comment.split()
    if len(parts) == 3 and parts[0] == "cut":
        return int(parts[1]), int(parts[2])
    return None
