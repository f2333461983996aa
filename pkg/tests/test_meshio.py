"""OFF/OBJ round-tripping with cut-edge annotations."""

import numpy as np
import pytest

from capunfold.meshio import load_mesh, save_mesh
from fixtures import pentagonal_pyramid


@pytest.mark.parametrize("suffix", [".off", ".obj"])
def test_roundtrip(tmp_path, suffix):
    cap = pentagonal_pyramid()
    cuts = [(5, 0), (5, 2)]
    path = tmp_path / f"cap{suffix}"
    save_mesh(path, cap, cuts)
    back, back_cuts = load_mesh(path)
    np.testing.assert_allclose(back.vertices, cap.vertices, rtol=0, atol=0)
    np.testing.assert_array_equal(back.triangles, cap.triangles)
    assert back_cuts == cuts


def test_roundtrip_without_cuts(tmp_path):
    cap = pentagonal_pyramid()
    path = tmp_path / "cap.off"
    save_mesh(path, cap)
    back, cuts = load_mesh(path)
    assert cuts == []
    assert back.n_triangles == cap.n_triangles


def test_unknown_suffix(tmp_path):
    with pytest.raises(ValueError):
        save_mesh(tmp_path / "cap.stl", pentagonal_pyramid())


def test_off_header_required(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("NOFF\n0 0 0\n")
    with pytest.raises(ValueError):
        load_mesh(path)
