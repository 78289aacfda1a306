"""Acceptance gate: one pass/fail line per primary criterion.

Heavy solver runs are shared through session-scoped fixtures; every
criterion prints a single summary line (echoed again at the end of the
pytest run) and fails the suite if its bound is violated.
"""

import time

import numpy as np
import pytest

from minresist import freeopt, restricted
from minresist.freeopt import OptimizerOptions, run_free_problem
from minresist.geometry import TWO_PI, build_upper_boundary, validate_decomposition
from minresist.mesh import body_mesh, mesh_resistance
from minresist.resistance import evaluate, evaluate_with_gradient, hessian
from minresist.restricted import run_restricted_problem
from minresist.symmetry import orbit

from acceptance_report import report
from oracles import f_mgon, random_config

# Table 1 (free symmetric): M, k, n, acceptance bound (published + 2e-4)
TABLE1 = [
    (0.7, 4, 17, 1.5456863),
    (0.9, 3, 25, 1.2622157),
    (1.0, 3, 34, 1.1379472),
    (1.5, 2, 29, 0.7001057),
]

# Table 2 (restricted): M, k, n1 target, acceptance bound (published + 5e-5),
# free-seed keyword overrides.  The M=1.5 body has long interior arcs and
# needs a refined free seed to land in the right basin; it reaches the bound
# at n1~28, so the ladder stops there.
TABLE2 = [
    (0.7, 4, 40, 1.545510647, {}),
    (0.9, 3, 40, 1.262037252, {}),
    (1.0, 3, 40, 1.137779313, {}),
    (1.5, 2, 25, 0.699931606,
     dict(free_n=29, free_seeds=(1, 2, 3), free_rounds=3)),
]

# Table 3 spot checks (k=3 restricted): M, acceptance bound (published + 1e-4)
TABLE3 = [
    (0.95, 1.1980691),
    (1.00, 1.1378293),
    (1.10, 1.0278294),
]
TABLE3_K4_AT_1 = 1.1401510  # the k=4 structured value at M=1.00


@pytest.fixture(scope="session")
def table1_runs():
    opts = OptimizerOptions(grad_tol=1e-7)
    out = {}
    for M, k, n, bound in TABLE1:
        t0 = time.perf_counter()
        pts, man, _ = run_free_problem(M, k, n, seeds=(1, 2, 3, 4, 5),
                                       rounds=3, opts=opts)
        out[(M, k)] = (pts, man, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="session")
def table2_runs():
    opts = OptimizerOptions(grad_tol=1e-7)
    out = {}
    for M, k, n1, bound, kw in TABLE2:
        t0 = time.perf_counter()
        v, man, _ = run_restricted_problem(M, k, n1_target=n1, opts=opts, **kw)
        out[(M, k)] = (v, man, time.perf_counter() - t0)
    return out


def test_analytic_bodies():
    ok = abs(evaluate(np.zeros((0, 3))) - np.pi) <= 1e-12
    worst = 0.0
    for M in (0.5, 0.7, 1.0, 1.5):
        err = abs(evaluate([[0.0, 0.0, M]]) - np.pi / (1.0 + M * M))
        worst = max(worst, err)
    ok = ok and worst <= 1e-10
    exact = np.pi / 4.0 + (3.0 * np.pi / 4.0) / 5.0
    errs = []
    for n in (32, 64, 128, 256):
        ang = TWO_PI * np.arange(n) / n
        pts = np.column_stack([0.5 * np.cos(ang), 0.5 * np.sin(ang),
                               np.ones(n)])
        errs.append(abs(evaluate(pts) - exact))
    ok = ok and errs[-1] <= 1e-3 and all(np.diff(errs) < 0)
    report("analytic bodies (disc, cones, frustum limit)", ok,
           f"cone err {worst:.2e}, frustum err at n=256 {errs[-1]:.2e}")


def test_flux_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(1, 101):
        pts = random_config(seed)
        res = validate_decomposition(build_upper_boundary(pts))
        worst = max(worst, abs(res["residual"]))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 30.0
    report("flux identity on 100 random configurations", ok,
           f"worst residual {worst:.2e}, {dt:.1f}s")


def test_oracle_equivalence():
    ms = [128, 256, 512, 1024, 2048, 4096, 8192, 16384]
    worst_at_top = 0.0
    orders = []
    for seed in range(1, 11):
        pts = random_config(seed, max_points=20)
        exact = evaluate(pts)
        errs = np.array([abs(f_mgon(pts, m) - exact) for m in ms])
        worst_at_top = max(worst_at_top, errs[-1])
        mask = errs > 1e-12  # exclude the roundoff floor from the fit
        if mask.sum() >= 3:
            slope, _ = np.polyfit(np.log(np.array(ms)[mask]),
                                  np.log(errs[mask]), 1)
            orders.append(-slope)
    ok = worst_at_top <= 1e-6 and min(orders) >= 1.9
    report("oracle equivalence (order in m, agreement at m=16384)", ok,
           f"min order {min(orders):.2f}, worst err {worst_at_top:.2e}")


def test_derivative_contract():
    rng = np.random.default_rng(0)
    worst_g = 0.0
    for seed in range(1, 101):
        pts = random_config(seed, max_points=12)
        ev = evaluate_with_gradient(pts)
        g = ev.gradient.reshape(-1)
        # two random directional central differences per configuration
        for _ in range(2):
            d = rng.standard_normal(g.shape)
            d /= np.linalg.norm(d)
            h = 1e-6
            fp = evaluate((pts.reshape(-1) + h * d).reshape(-1, 3))
            fm = evaluate((pts.reshape(-1) - h * d).reshape(-1, 3))
            fd = (fp - fm) / (2.0 * h)
            scale = max(1.0, np.linalg.norm(g))
            worst_g = max(worst_g, abs(g @ d - fd) / scale)
    worst_h = 0.0
    for seed in (2, 5, 11):
        pts = random_config(seed, max_points=6)
        H = hessian(pts)
        scale = max(1.0, np.max(np.abs(H)))
        worst_h = max(worst_h, np.max(np.abs(H - H.T)) / scale)
    ok = worst_g <= 1e-5 and worst_h <= 1e-6
    report("derivative contract (gradient FD, Hessian symmetry)", ok,
           f"worst grad err {worst_g:.2e}, worst asym {worst_h:.2e}")


def test_table1(table1_runs):
    ok = True
    details = []
    for M, k, n, bound in TABLE1:
        pts, man, dt = table1_runs[(M, k)]
        row_ok = man.final_value <= bound and dt <= 300.0
        ok = ok and row_ok
        details.append(f"M={M} k={k}: {man.final_value:.10f} "
                       f"(≤{bound}) {dt:.0f}s")
    report("Table 1 reproduction (free symmetric, 4 rows)", ok,
           "; ".join(details))


def test_table2(table2_runs):
    ok = True
    details = []
    for M, k, n1, bound, _kw in TABLE2:
        v, man, dt = table2_runs[(M, k)]
        row_ok = man.final_value <= bound and dt <= 600.0 \
            and v.n1 <= 1000 and v.n2 <= 300
        ok = ok and row_ok
        details.append(f"M={M} k={k}: {man.final_value:.9f} "
                       f"(≤{bound}) n1={v.n1} n2={v.n2} {dt:.0f}s")
    report("Table 2 reproduction (restricted, 4 rows)", ok,
           "; ".join(details))


def test_table3(table2_runs):
    opts = OptimizerOptions(grad_tol=1e-7)
    values = {}
    for M, bound in TABLE3:
        if (M, 3) in table2_runs:
            values[M] = table2_runs[(M, 3)][1].final_value
        else:
            _, man, _ = run_restricted_problem(M, 3, n1_target=32, opts=opts)
            values[M] = man.final_value
    ok = all(values[M] <= bound for M, bound in TABLE3)
    ok = ok and values[1.00] < TABLE3_K4_AT_1
    report("Table 3 spot checks (k=3 heights, k=4 comparison)", ok,
           "; ".join(f"M={M}: {values[M]:.8f} (≤{bound})"
                     for M, bound in TABLE3)
           + f"; k=4 column at M=1: {TABLE3_K4_AT_1}")


def test_qualitative_structure(table1_runs):
    pts_a, _, _ = table1_runs[(0.7, 4)]
    phi_a = np.arctan2(pts_a[:, 1], pts_a[:, 0])
    on_axes = np.all((np.abs(phi_a) <= 1e-6)
                     | (np.abs(phi_a - np.pi / 4) <= 1e-6)
                     | (np.hypot(pts_a[:, 0], pts_a[:, 1]) <= 1e-9))
    pts_b, _, _ = table1_runs[(1.5, 2)]
    phi_b = np.arctan2(pts_b[:, 1], pts_b[:, 0])
    interior = np.sum((phi_b > 1e-6) & (phi_b < np.pi / 2 - 1e-6))
    ok = bool(on_axes and interior >= 1)
    report("qualitative structure (axis points at M=0.7, interior arc at "
           "M=1.5)", ok,
           f"M=0.7 all on axes: {bool(on_axes)}; M=1.5 interior points: "
           f"{int(interior)}")


def test_mesh_export(table2_runs):
    v, man, _ = table2_runs[(1.5, 2)]
    pts = orbit(restricted.assemble_points(v), 2)
    m = body_mesh(pts, resolution=TWO_PI / 512)
    info = m.check()
    val = mesh_resistance(m)
    err = abs(val - man.final_value)
    ok = info["watertight"] and info["euler_characteristic"] == 2 \
        and err <= 1e-4
    report("mesh export (watertight, chi=2, oracle agreement)", ok,
           f"V={info['vertices']} F={info['faces']} chi="
           f"{info['euler_characteristic']} err {err:.2e}")
