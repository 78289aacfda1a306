"""Restricted two-arc parameterization and its Newton solver."""

import numpy as np
import pytest

from minresist.errors import EmptyArc, InvalidLift
from minresist.freeopt import OptimizerOptions
from minresist.restricted import (RestrictedVars, assemble_points,
                                  default_Y_profile, evaluate_restricted,
                                  init_restricted_from_free, refine_X,
                                  refine_Y, solve_restricted)
from minresist.geometry import check_point_set

from oracles import central_diff_gradient

FAST = OptimizerOptions(grad_tol=1e-8, max_iter=200)


def make_vars(z=0.3, Y=((0.6, 0.5),), X=(), M=1.0):
    return RestrictedVars(z=z, Y=np.array(Y, dtype=float).reshape(-1, 2),
                          X=np.array(X, dtype=float).reshape(-1, 3), M=M)


def test_validation_rejects_bad_vars():
    with pytest.raises(ValueError):
        make_vars(z=0.0)
    with pytest.raises(ValueError):
        make_vars(z=1.0)
    with pytest.raises(ValueError):
        make_vars(Y=((0.6, 1.0),), M=1.0)  # height at M
    with pytest.raises(ValueError):
        make_vars(Y=((0.6, 0.5), (0.5, 0.4)))  # not increasing
    with pytest.raises(ValueError):
        make_vars(X=((1.2, 0.0, 0.5),))  # outside the cylinder


def test_flatten_round_trip():
    v = make_vars(Y=((0.5, 0.6), (0.7, 0.3)), X=((0.4, 0.2, 0.5),))
    x = v.flatten()
    assert len(x) == 1 + 2 * v.n1 + 3 * v.n2
    w = RestrictedVars.from_flat(x, v.n1, v.n2, v.M)
    assert np.array_equal(w.flatten(), x)


def test_json_round_trip():
    v = make_vars(Y=((0.5, 0.6), (0.7, 0.3)), X=((0.4, 0.2, 0.5),))
    w = RestrictedVars.from_json(v.to_json())
    assert w.z == v.z
    assert np.array_equal(w.Y, v.Y)
    assert np.array_equal(w.X, v.X)
    assert w.M == v.M


def test_assemble_points_embedding():
    # the in-plane arc sits on the sector axis phi = 0 (the published
    # convention puts it in {x1 = 0}; ours is that plane rotated by pi/2,
    # which is the same body)
    v = make_vars(z=0.3, Y=((0.6, 0.5),), M=1.0)
    pts = assemble_points(v)
    assert np.allclose(pts[0], [0.3, 0.0, 1.0], atol=1e-15)
    assert np.allclose(pts[1], [0.6, 0.0, 0.5], atol=1e-15)
    # degenerate: no arcs at all
    v0 = RestrictedVars(z=0.25, Y=np.zeros((0, 2)), X=np.zeros((0, 3)), M=1.0)
    pts0 = assemble_points(v0)
    assert pts0.shape == (1, 3)
    assert np.allclose(pts0[0], [0.25, 0.0, 1.0])


def test_assemble_points_satisfy_point_set_invariants():
    v = make_vars(Y=((0.5, 0.6), (0.7, 0.3)), X=((0.4, 0.2, 0.5),))
    pts = assemble_points(v)
    out = check_point_set(pts, M=v.M)
    assert out.shape == (4, 3)


def test_restricted_gradient_matches_fd():
    v = make_vars(z=0.35, Y=((0.55, 0.6), (0.8, 0.25)),
                  X=((0.45, 0.25, 0.45),), M=1.0)
    k = 3
    f, g = evaluate_restricted(v, k)

    def f_flat(x):
        w = RestrictedVars.from_flat(x, v.n1, v.n2, v.M)
        return evaluate_restricted(w, k, want_grad=False)

    g_fd = central_diff_gradient(f_flat, v.flatten(), h=1e-6)
    scale = max(1.0, np.linalg.norm(g_fd))
    assert np.max(np.abs(g - g_fd)) / scale <= 1e-5


def test_refine_Y_published_formula():
    v = make_vars(z=0.2, Y=((0.5, 0.5),), M=1.0)
    w = refine_Y(v, 0.01)
    expected = np.array([[0.35, 0.76], [0.5, 0.5], [0.75, 0.26]])
    assert np.allclose(w.Y, expected, atol=1e-15)
    assert w.z == v.z and w.n2 == 0


def test_refine_Y_counts():
    v = make_vars(z=0.1, Y=((0.3, 0.8), (0.5, 0.55), (0.7, 0.3)), M=1.0)
    w = refine_Y(v, 1e-3)
    assert w.n1 == 2 * v.n1 + 1


def test_refine_Y_zero_eps_is_pure_midpoint():
    v = make_vars(z=0.2, Y=((0.5, 0.5),), M=1.0)
    w = refine_Y(v, 0.0)
    assert np.allclose(w.Y[0], [0.35, 0.75], atol=1e-15)
    assert np.allclose(w.Y[2], [0.75, 0.25], atol=1e-15)


def test_refine_Y_invalid_lift():
    v = make_vars(z=0.2, Y=((0.5, 0.95),), M=1.0)
    with pytest.raises(InvalidLift):
        refine_Y(v, 0.1)  # (M + 0.95)/2 + 0.1 > M


def test_refine_X_counts_and_lift():
    # collinear triple: inserted points sit eps above segment midpoints
    X = np.array([[0.3, 0.1, 0.6], [0.4, 0.2, 0.5], [0.5, 0.3, 0.4]])
    v = make_vars(z=0.2, Y=((0.25, 0.65),), X=X, M=1.0)
    w = refine_X(v, 0.01)
    assert w.n2 == 2 * v.n2 - 1
    mids = {(0.35, 0.15, 0.56), (0.45, 0.25, 0.46)}
    got = {tuple(np.round(p, 12)) for p in w.X}
    assert mids <= got


def test_init_restricted_from_free_exact_recovery():
    pts = np.array([
        [0.2, 0.0, 1.0],    # top-face point -> z
        [0.5, 0.0, 0.6],    # axis point -> Y
        [0.8, 0.0, 0.25],   # axis point -> Y
        [0.45, 0.2, 0.5],   # interior -> X
    ])
    v = init_restricted_from_free(pts, 4, 1.0)
    assert v.z == pytest.approx(0.2, abs=1e-9)
    assert v.n1 == 2 and v.n2 == 1
    assert np.allclose(v.Y, [[0.5, 0.6], [0.8, 0.25]], atol=1e-9)
    assert np.allclose(v.X[0], [0.45, 0.2, 0.5], atol=1e-9)


def test_init_restricted_from_free_empty_arc():
    with pytest.raises(EmptyArc):
        init_restricted_from_free(np.array([[0.45, 0.2, 0.5]]), 4, 1.0)


def test_solve_restricted_descends_and_stays_feasible():
    v0 = default_Y_profile(0.7, 3)
    v, man = solve_restricted(v0, 4, FAST)
    hist = np.array(man.objective_history)
    assert np.all(np.diff(hist) <= 1e-12)
    assert 0.0 < v.z < 1.0
    assert np.all((v.Y[:, 0] > 0) & (v.Y[:, 0] < 1))
    assert np.all((v.Y[:, 1] > 0) & (v.Y[:, 1] < v.M))
    assert np.all(np.diff(v.Y[:, 0]) > 0)
    assert man.termination_reason == "converged"


def test_solve_restricted_idempotent_at_solution():
    v0 = default_Y_profile(0.7, 2)
    v, _ = solve_restricted(v0, 4, FAST)
    w, man = solve_restricted(v, 4, FAST)
    assert man.iterations <= 2
    assert np.allclose(w.flatten(), v.flatten(), atol=1e-8)


def test_refine_then_resolve_not_worse():
    v0 = default_Y_profile(1.0, 3)
    v, man0 = solve_restricted(v0, 3, FAST)
    v1, man1 = solve_restricted(refine_Y(v, 1e-4), 3, FAST)
    assert man1.final_value <= man0.final_value + 1e-12
