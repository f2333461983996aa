"""End-to-end cut-and-unfold pipeline with a full certificate bundle.

Composes: metrics -> origin choice -> spanning forest -> waterfall strips ->
development -> overlap check.  Every stage contributes certificates to a
JSON-serializable diagnostics dictionary; theorem-precondition failures
(e.g. tilt over budget) are warnings, not errors — the unfolding still runs
and the overlap verdict is reported as empirical rather than proven.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .develop import (
    Net,
    banks_ordered,
    check_overlap,
    develop_chain,
    layout_net,
    net_congruent,
    rasterize_overlap_oracle,
    turn_distortion,
)
from .forest import SpanningForest, build_forest, choose_origin, verify_forest
from .geom import delta_perp, normalize_angle, omega_bound, phi_budget
from .mesh import ConvexCap, compute_metrics, validate_cap
from .monotone import left_of
from .strips import StripSystem, strip_certificates, waterfall_strips

SCHEMA_VERSION = "1"


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class UnfoldResult:
    cap: ConvexCap
    forest: SpanningForest
    strips: StripSystem
    net: Net
    diagnostics: dict

    @property
    def clean(self) -> bool:
        return self.diagnostics["overlap"]["clean"]

    @property
    def proven(self) -> bool:
        return self.clean and not self.diagnostics["warnings"]


def _stage(name):
    def deco(fn):
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except PipelineError:
                raise
            except Exception as exc:
                raise PipelineError(name, str(exc)) from exc
        return wrapped
    return deco


def cut_and_unfold(cap: ConvexCap, origin_mode: str = "central",
                   rasterize: bool = False) -> UnfoldResult:
    diag: dict = {"schema_version": SCHEMA_VERSION, "warnings": [],
                  "errors": []}

    _stage("validate")(lambda: _validate(cap))()
    metrics = _stage("metrics")(lambda: _metrics(cap, diag))()
    forest = _stage("forest")(lambda: _forest(cap, origin_mode, diag))()
    net = _stage("develop")(lambda: layout_net(cap, forest))()
    strips = _stage("strips")(lambda: waterfall_strips(cap, forest))()
    net.strip_of = dict(strips.strip_of)

    _stage("certify")(lambda: _certify(cap, forest, strips, net, diag,
                                       metrics))()

    report = _stage("overlap")(lambda: check_overlap(net))()
    diag["overlap"] = {
        "clean": report.clean,
        "pairs": [list(p) for p in report.pairs[:20]],
        "pair_count": len(report.pairs),
    }
    if rasterize:
        diag["overlap"]["raster_oracle_overlap"] = rasterize_overlap_oracle(net)
    if not report.clean:
        diag["errors"].append(f"net has {len(report.pairs)} overlapping pairs")

    diag["status"] = (
        "overlap" if not report.clean
        else ("proven_clean" if not diag["warnings"] else "empirical_clean"))
    return UnfoldResult(cap=cap, forest=forest, strips=strips, net=net,
                        diagnostics=diag)


def _validate(cap: ConvexCap):
    problems = validate_cap(cap)
    if problems:
        raise RuntimeError("; ".join(problems))


def _metrics(cap: ConvexCap, diag: dict):
    m = compute_metrics(cap)
    budget = phi_budget(m.alpha_planar) if m.alpha_planar > 0 else 0.0
    diag["metrics"] = {
        "n_vertices": cap.n_vertices,
        "n_triangles": cap.n_triangles,
        "phi_actual": m.phi_actual,
        "alpha": m.alpha,
        "alpha_planar": m.alpha_planar,
        "omega_total": m.omega_total,
        "omega_bound": omega_bound(m.phi_actual),
        "delta_perp_max": delta_perp(m.phi_actual),
        "phi_budget": budget,
        "within_budget": m.phi_actual <= budget + 1e-12,
    }
    if not diag["metrics"]["within_budget"]:
        diag["warnings"].append(
            f"tilt {math.degrees(m.phi_actual):.3f} deg exceeds budget "
            f"{math.degrees(budget):.3f} deg; certificates are empirical")

    # rim angle comparison: surface angle >= projected angle at each rim vertex
    rim_ok = True
    worst = 0.0
    for v in cap.rim:
        psi, psi_p = cap.rim_angles(int(v))
        worst = max(worst, psi_p - psi)
        if psi + 1e-9 < psi_p:
            rim_ok = False
    diag["metrics"]["rim_angle_ok"] = rim_ok
    diag["metrics"]["rim_angle_worst_violation"] = worst
    if not rim_ok:
        diag["warnings"].append("projected rim angle exceeds surface angle")
    return m


def _forest(cap: ConvexCap, origin_mode: str, diag: dict):
    qs = choose_origin(cap, origin_mode)
    forest = build_forest(cap, qs)
    violations = verify_forest(cap, forest)
    diag["forest"] = {
        "origin": int(forest.system.origin),
        "origin_mode": origin_mode,
        "theta": forest.system.theta,
        "gap_direction": normalize_angle(forest.system.gap_direction),
        "axis_rotation": forest.system.axis_rotation,
        "n_trees": len(forest.roots),
        "n_leaves": len(forest.leaves()),
        "violations": violations,
    }
    if violations:
        raise RuntimeError("forest verification failed: " + "; ".join(violations))
    return forest


def _certify(cap: ConvexCap, forest: SpanningForest, strips: StripSystem,
             net: Net, diag: dict, metrics_obj=None):
    m = diag["metrics"]
    q = int(forest.system.origin)

    if not net_congruent(cap, net):
        diag["errors"].append("net placement not congruent to the surface")

    # per-path certificates
    bound = 3 * m["delta_perp_max"] + 2 * m["omega_total"]
    max_dq = 0.0
    paths_ordered = True
    banks_ok = True
    for leaf in forest.leaves():
        path = forest.path_to_root(leaf)
        if len(path) < 2:
            continue
        td = turn_distortion(cap, path, metrics=metrics_obj)
        max_dq = max(max_dq, td.max_abs)
        L = develop_chain(cap, path, "left")
        R = develop_chain(cap, path, "right")
        ok, _ = left_of(L, R)
        paths_ordered = paths_ordered and ok
        ok_b, _ = banks_ordered(cap, net, path)
        banks_ok = banks_ok and ok_b
    diag["paths"] = {
        "max_turn_distortion": max_dq,
        "turn_distortion_bound": bound,
        "within_distortion_bound": max_dq <= bound + 1e-9,
        "chains_ordered": paths_ordered,
        "banks_ordered": banks_ok,
    }
    if not diag["paths"]["within_distortion_bound"]:
        msg = "turn distortion exceeds 3*delta_perp + 2*omega"
        (diag["warnings"] if not m["within_budget"] else diag["errors"]).append(msg)
    if not paths_ordered:
        msg = "left development not left of right development on some path"
        (diag["warnings"] if not m["within_budget"] else diag["errors"]).append(msg)
    if not banks_ok:
        msg = "cut banks out of order on some leaf path"
        (diag["warnings"] if not m["within_budget"] else diag["errors"]).append(msg)

    # per-tree layout preconditions
    curvs = forest.tree_curvatures(cap)
    spreads = _tree_direction_spreads(cap, forest)
    diag["trees"] = {
        "max_curvature": max(curvs, default=0.0),
        "max_direction_spread": max(spreads, default=0.0),
        "curvature_below_pi": all(c < math.pi for c in curvs),
        "spread_below_pi": all(s < math.pi for s in spreads),
    }
    for key, msg in (("curvature_below_pi", "a tree encloses curvature >= pi"),
                     ("spread_below_pi", "a tree's direction cone >= pi")):
        if not diag["trees"][key]:
            diag["warnings"].append(msg)

    diag["strips"] = strip_certificates(cap, forest, strips, net)
    if not diag["strips"]["clean"]:
        diag["errors"].extend(diag["strips"]["errors"])


def _tree_direction_spreads(cap: ConvexCap, forest: SpanningForest):
    P = cap.vertices[:, :2]
    spreads = []
    for tree in forest.trees():
        angles = []
        for v in tree:
            p = forest.parent.get(v)
            if p is None:
                continue
            d = P[p] - P[v]
            angles.append(math.atan2(d[1], d[0]))
        if not angles:
            spreads.append(0.0)
            continue
        base = angles[0]
        rel = [normalize_angle(a - base) for a in angles]
        rel = [a - 2 * math.pi if a > math.pi else a for a in rel]
        spreads.append(max(rel) - min(rel))
    return spreads
