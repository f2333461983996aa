import math

import numpy as np
import pytest

from capunfold.develop import layout_net
from capunfold.forest import build_forest, choose_origin, verify_angle_monotone
from capunfold.generate import generate_budget_cap, generate_cap
from capunfold.strips import (
    StripError,
    develop_strip,
    polylines_cross,
    strip_certificates,
    waterfall_strips,
)

from fixtures import pentagonal_pyramid

DEG = math.pi / 180


def unfolded(seed=3, n=60, phi=25 * DEG, mode="central"):
    cap = generate_cap(n, phi=phi, seed=seed)
    forest = build_forest(cap, choose_origin(cap, mode))
    net = layout_net(cap, forest)
    system = waterfall_strips(cap, forest)
    return cap, forest, net, system


class TestWaterfallPaths:
    def test_paths_are_theta_monotone_and_noncrossing(self):
        for seed in range(5):
            cap, forest, net, system = unfolded(seed=seed)
            theta = forest.system.theta
            for i in range(4):
                ps = system.paths[i]
                for wp in ps:
                    assert verify_angle_monotone(wp.points, theta) is not None
                for j in range(len(ps)):
                    for k in range(j + 1, len(ps)):
                        assert not polylines_cross(ps[j].points, ps[k].points)

    def test_paths_run_from_origin_to_their_leaves(self):
        cap, forest, net, system = unfolded(seed=1)
        q = forest.system.origin
        P = cap.vertices[:, :2]
        for i in range(4):
            for wp in system.paths[i]:
                assert np.allclose(wp.points[0], P[q], atol=1e-12)
                assert np.allclose(wp.points[-1], P[wp.leaf], atol=1e-12)
                assert np.allclose(wp.tail[0], P[wp.leaf], atol=1e-12)
                assert wp.tail.shape[0] >= 2

    def test_every_nonorigin_leaf_gets_a_path(self):
        cap, forest, net, system = unfolded(seed=2)
        q = forest.system.origin
        got = {wp.leaf for i in range(4) for wp in system.paths[i]}
        assert got == set(forest.leaves()) - {q}

    def test_positive_clearance_and_radius(self):
        cap, forest, net, system = unfolded(seed=4)
        for i in range(4):
            if system.paths[i]:
                assert system.eps[i] > 0
                assert system.radius[i] > 0


class TestStripAssignment:
    def test_faces_partitioned(self):
        for seed in range(4):
            cap, forest, net, system = unfolded(seed=seed)
            assert set(system.strip_of) == set(range(cap.n_triangles))
            by_strip = {}
            for s in system.strips:
                for f in s.faces:
                    assert f not in by_strip
                    by_strip[f] = (s.quadrant, s.index)
            assert by_strip == system.strip_of

    def test_strip_count_per_quadrant(self):
        cap, forest, net, system = unfolded(seed=3)
        for i in range(4):
            idxs = [s.index for s in system.strips if s.quadrant == i]
            assert idxs == list(range(len(system.paths[i]) + 1))

    def test_pyramid_has_one_strip_per_quadrant(self):
        cap = pentagonal_pyramid()
        forest = build_forest(cap, choose_origin(cap, "central"))
        net = layout_net(cap, forest)
        system = waterfall_strips(cap, forest)
        assert all(not system.paths[i] for i in range(4))
        assert sum(len(s.faces) for s in system.strips) == 5
        cert = strip_certificates(cap, forest, system, net)
        assert cert["clean"], cert["errors"]


class TestDevelopStrip:
    def test_strip_contents_edge_connected(self):
        cap, forest, net, system = unfolded(seed=5)
        for strip in system.strips:
            placed = develop_strip(cap, strip, net)
            assert set(placed) == set(strip.faces)

    def test_disconnected_content_raises(self):
        cap, forest, net, system = unfolded(seed=5)
        from capunfold.strips import Strip

        # two faces sharing no edge
        f0 = 0
        tri0 = set(cap.triangles[0])
        f1 = next(f for f in range(cap.n_triangles)
                  if not (tri0 & set(cap.triangles[f])))
        bogus = Strip(quadrant=0, index=0, faces=(f0, f1), lower=None,
                      upper=None)
        with pytest.raises(StripError):
            develop_strip(cap, bogus, net)


class TestCertificates:
    def test_random_caps_certify_clean(self):
        for seed in range(5):
            cap, forest, net, system = unfolded(seed=seed)
            cert = strip_certificates(cap, forest, system, net)
            assert cert["clean"], (seed, cert["errors"])
            assert cert["area_relative_error"] <= 1e-6
            assert cert["apex_angle_error"] <= 1e-9

    def test_budget_caps_certify_clean(self):
        for seed in range(3):
            cap = generate_budget_cap(80, seed=seed)
            forest = build_forest(cap, choose_origin(cap, "central"))
            net = layout_net(cap, forest)
            system = waterfall_strips(cap, forest)
            cert = strip_certificates(cap, forest, system, net)
            assert cert["clean"], (seed, cert["errors"])

    def test_boundary_mode_origin_also_works(self):
        cap, forest, net, system = unfolded(seed=7, mode="closest_to_boundary")
        cert = strip_certificates(cap, forest, system, net)
        assert cert["clean"], cert["errors"]
