"""Watertight mesh export and mesh-based resistance."""

import numpy as np
import pytest

from minresist.geometry import TWO_PI
from minresist.mesh import (body_mesh, mesh_resistance, write_obj, write_ply)
from minresist.resistance import evaluate
from minresist.symmetry import orbit

from oracles import random_config


def test_centered_cone_mesh_counts():
    m = body_mesh(np.array([[0.0, 0.0, 1.0]]), resolution=TWO_PI / 64)
    info = m.check()
    # 64 side triangles + 64 bottom fan triangles
    assert info["faces"] == 128
    assert info["euler_characteristic"] == 2
    assert info["watertight"]


def test_random_body_mesh_watertight():
    for seed in (1, 6):
        pts = random_config(seed, max_points=12)
        m = body_mesh(pts, resolution=TWO_PI / 128)
        info = m.check()
        assert info["watertight"], f"seed {seed}"
        assert info["euler_characteristic"] == 2, f"seed {seed}"


def test_flat_disc_warns():
    with pytest.warns(UserWarning):
        m = body_mesh(np.zeros((0, 3)), resolution=TWO_PI / 32)
    assert len(m.faces) > 0


def test_mesh_resistance_matches_exact_value():
    pts = orbit(np.array([[0.5, 0.1, 0.6], [0.2, 0.05, 0.9]]), 3)
    m = body_mesh(pts, resolution=TWO_PI / 512)
    assert mesh_resistance(m) == pytest.approx(evaluate(pts), abs=1e-4)


def test_ply_and_obj_writers(tmp_path):
    m = body_mesh(np.array([[0.0, 0.0, 1.0]]), resolution=TWO_PI / 16)
    ply = tmp_path / "body.ply"
    obj = tmp_path / "body.obj"
    write_ply(m, ply)
    write_obj(m, obj)

    text = ply.read_text().splitlines()
    assert text[0] == "ply"
    nv = int(next(l for l in text if l.startswith("element vertex")).split()[-1])
    nf = int(next(l for l in text if l.startswith("element face")).split()[-1])
    assert nv == len(m.vertices)
    assert nf == len(m.faces)

    lines = obj.read_text().splitlines()
    assert sum(1 for l in lines if l.startswith("v ")) == len(m.vertices)
    assert sum(1 for l in lines if l.startswith("f ")) == len(m.faces)
    # OBJ faces are 1-based triangles
    first = next(l for l in lines if l.startswith("f ")).split()[1:]
    assert len(first) == 3
    assert min(int(i) for i in first) >= 1
