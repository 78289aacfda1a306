"""Dihedral symmetry reduction: orbits, sector projection, frozen pullback."""

import numpy as np
import pytest

from minresist.resistance import evaluate, evaluate_with_gradient
from minresist.symmetry import (FrozenObjective, evaluate_symmetric, orbit,
                                orbit_transforms, project_to_sector,
                                snap_to_axis)

from oracles import central_diff_gradient


def test_orbit_counts():
    # generic point: 2k images; point on a mirror axis: k images
    generic = np.array([[0.4, 0.1, 0.5]])
    on_axis = np.array([[0.4, 0.0, 0.5]])
    assert len(orbit(generic, 3)) == 6
    assert len(orbit(on_axis, 3)) == 3
    center = np.array([[0.0, 0.0, 0.9]])
    assert len(orbit(center, 5)) == 1


def test_orbit_images_are_isometric():
    p = np.array([[0.3, 0.2, 0.7]])
    imgs = orbit(p, 4)
    r = np.hypot(imgs[:, 0], imgs[:, 1])
    assert np.allclose(r, np.hypot(0.3, 0.2), atol=1e-14)
    assert np.allclose(imgs[:, 2], 0.7, atol=1e-14)


def test_symmetric_value_matches_full_orbit():
    sector = np.array([[0.5, 0.2, 0.8], [0.2, 0.05, 0.4]])
    k = 3
    f_sym, _ = evaluate_symmetric(sector, k)
    f_full = evaluate(orbit(sector, k))
    assert f_sym == pytest.approx(f_full, abs=1e-13)


def test_symmetric_gradient_matches_finite_differences():
    sector = np.array([[0.5, 0.2, 0.8], [0.75, 0.1, 0.3]])
    k = 4

    def f_flat(x):
        return evaluate_symmetric(x.reshape(-1, 3), k, want_grad=False)

    _, g = evaluate_symmetric(sector, k)
    g_fd = central_diff_gradient(f_flat, sector.reshape(-1), h=1e-6)
    scale = max(1.0, np.linalg.norm(g_fd))
    assert np.max(np.abs(g.reshape(-1) - g_fd)) / scale <= 1e-5


def test_project_to_sector_folds_angle():
    k = 4  # sector [0, pi/4]
    p = project_to_sector(np.array([0.0, 0.5, 0.3]), k)  # phi = pi/2
    r, phi = np.hypot(p[0], p[1]), np.arctan2(p[1], p[0])
    assert r == pytest.approx(0.5, abs=1e-14)
    assert 0.0 <= phi <= np.pi / k + 1e-14
    # already inside: unchanged
    q = np.array([0.5, 0.1, 0.3])
    assert np.allclose(project_to_sector(q, k), q, atol=1e-14)


def test_snap_to_axis():
    p = np.array([0.5, 1e-15, 0.3])
    s = snap_to_axis(p, 3)
    assert s[1] == 0.0


def test_frozen_objective_matches_fresh_evaluation():
    sector = np.array([[0.5, 0.2, 0.8], [0.3, 0.1, 0.4]])
    k = 3
    frozen = FrozenObjective(sector, k=k)
    f0, g0 = frozen(sector)
    f1, g1 = evaluate_symmetric(sector, k)
    assert f0 == pytest.approx(f1, abs=1e-13)
    assert np.allclose(g0, g1, atol=1e-12)


def test_frozen_objective_is_smooth_nearby():
    # tiny perturbations must not jump: frozen combinatorics are reused
    sector = np.array([[0.5, 0.2, 0.8]])
    frozen = FrozenObjective(sector, k=4)
    f0, _ = frozen(sector)
    f1, _ = frozen(sector + 1e-9)
    assert abs(f1 - f0) < 1e-7


def test_frozen_objective_nonsymmetric_mode():
    pts = np.array([[0.5, 0.2, 0.8], [-0.3, 0.1, 0.4]])
    frozen = FrozenObjective(pts, k=None)
    f0, g0 = frozen(pts)
    ev = evaluate_with_gradient(pts)
    f1, g1 = ev.value, ev.gradient
    assert f0 == pytest.approx(f1, abs=1e-13)
    assert np.allclose(g0, g1, atol=1e-12)


def test_orbit_transforms_shapes():
    sector = np.array([[0.5, 0.2, 0.8], [0.4, 0.0, 0.3]])
    transforms = orbit_transforms(sector, 3)
    assert len(transforms) == 2
    # generic point: 6 images; axis point: 3
    assert len(transforms[0]) == 6
    assert len(transforms[1]) == 3
    for tlist in transforms:
        for T in tlist:
            assert T.shape == (3, 3)
            # orthogonal maps
            assert np.allclose(T @ T.T, np.eye(3), atol=1e-12)
