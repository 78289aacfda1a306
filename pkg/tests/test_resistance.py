"""Resistance functional: analytic values, oracle agreement, derivatives."""

import numpy as np
import pytest

from minresist.resistance import (ConeIntegralParams, cone_contribution,
                                  evaluate, evaluate_with_gradient,
                                  facet_contribution, hessian)

from oracles import central_diff_gradient, f_mgon, random_config


def test_empty_body_is_flat_disc():
    assert evaluate(np.zeros((0, 3))) == pytest.approx(np.pi, abs=1e-12)


@pytest.mark.parametrize("M", [0.3, 0.7, 1.0, 1.5])
def test_centered_cone_closed_form(M):
    val = evaluate([[0.0, 0.0, M]])
    assert val == pytest.approx(np.pi / (1.0 + M * M), abs=1e-12)


def test_frustum_limit():
    # n rim points at radius 0.5, height 1 approximate the frustum whose
    # resistance is pi/4 (flat top) + (3 pi/4)/5 (sloped side, |grad u| = 2)
    exact = np.pi / 4.0 + (3.0 * np.pi / 4.0) / 5.0
    prev_err = None
    for n in (32, 64, 128, 256):
        ang = 2.0 * np.pi * np.arange(n) / n
        pts = np.column_stack([0.5 * np.cos(ang), 0.5 * np.sin(ang),
                               np.ones(n)])
        err = abs(evaluate(pts) - exact)
        if prev_err is not None:
            assert err < prev_err  # monotone approach to the limit
        prev_err = err
    assert prev_err < 1e-3


def test_cone_contribution_full_circle_centered():
    p = ConeIntegralParams(h=0.8, mu=0.0, a=0.0, b=2.0 * np.pi)
    assert cone_contribution(p) == pytest.approx(np.pi / (1.0 + 0.64),
                                                 abs=1e-12)


def test_cone_params_invariants():
    with pytest.raises(ValueError):
        ConeIntegralParams(h=0.0, mu=0.2, a=0.0, b=1.0)
    with pytest.raises(ValueError):
        ConeIntegralParams(h=1.0, mu=1.0, a=0.0, b=1.0)
    with pytest.raises(ValueError):
        ConeIntegralParams(h=1.0, mu=0.2, a=1.0, b=0.5)


def test_facet_contribution_degenerate_triangle_is_zero():
    tri = ([0.0, 0.0, 1.0], [0.5, 0.0, 1.0], [0.25, 0.0, 1.0])
    assert facet_contribution(tri) == 0.0


def test_oracle_agreement_random_configs():
    for seed in (1, 2, 3, 4, 5):
        pts = random_config(seed, max_points=15)
        ours = evaluate(pts)
        ref = f_mgon(pts, 16384)
        assert abs(ours - ref) <= 1e-6, f"seed {seed}"


def test_oracle_convergence_order():
    # the m-gon oracle converges to the exact value at order ~2 in 1/m
    pts = random_config(9, max_points=10)
    exact = evaluate(pts)
    e1 = abs(f_mgon(pts, 1024) - exact)
    e2 = abs(f_mgon(pts, 2048) - exact)
    order = np.log2(e1 / e2)
    assert order >= 1.9


def test_gradient_matches_finite_differences():
    for seed in (1, 4, 8):
        pts = random_config(seed, max_points=8)
        g = evaluate_with_gradient(pts).gradient
        g_fd = central_diff_gradient(
            lambda x: evaluate(x.reshape(-1, 3)), pts.reshape(-1), h=1e-6)
        scale = max(1.0, np.linalg.norm(g_fd))
        assert np.max(np.abs(g.reshape(-1) - g_fd)) / scale <= 1e-5


def test_gradient_of_swallowed_point_is_zero():
    pts = np.array([[0.0, 0.0, 1.0], [0.05, 0.0, 0.2]])
    g = evaluate_with_gradient(pts).gradient
    assert np.all(g[1] == 0.0)
    assert np.linalg.norm(g[0]) > 0.0


def test_hessian_symmetry():
    pts = random_config(2, max_points=6)
    H = hessian(pts)
    scale = max(1.0, np.max(np.abs(H)))
    assert np.max(np.abs(H - H.T)) / scale <= 1e-6
