"""Solvers for the free problems: minimize the (symmetric) resistance over
point positions in the sector (or the full disc), with a projected-gradient
method combined with a regularized Newton method on the inactive
components, plus point-insertion refinement between runs.
"""

import numpy as np
from dataclasses import dataclass, asdict

from . import resistance, symmetry
from .errors import DegenerateConfiguration, NoRoot
from .geometry import (BoundaryTriangle, ConePiece, PointTriangle, TWO_PI,
                       build_upper_boundary)
from .manifest import RunManifest, Stopwatch

_R_MAX = 1.0 - 1e-9
_Z_MIN = 1e-12
_ACTIVE_TOL = 1e-10
_AXIS_SNAP = 5e-7  # arc-length scale below which orbit images would collide


@dataclass
class OptimizerOptions:
    """Tuning knobs shared by the free and restricted solvers."""

    grad_tol: float = 1e-7
    max_iter: int = 500
    newton_reg: float = 1e-3
    step_cap_fraction: float = 0.9
    armijo_c1: float = 1e-4
    armijo_backtrack: float = 0.5
    refine_eps: float | None = None
    rng_seed: int = 0
    m: int | None = None  # None: pick from the body size
    max_backtracks: int = 12

    def __post_init__(self):
        if not (0.0 < self.step_cap_fraction < 1.0):
            raise ValueError("step_cap_fraction must lie in (0, 1)")
        for name in ("grad_tol", "newton_reg", "armijo_c1", "armijo_backtrack"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def init_points(n, k, M, rng_seed=0):
    """Deterministic rough cone-like start: n points inside the sector."""
    if n < 1:
        raise ValueError("need at least one point")
    rng = np.random.default_rng(rng_seed)
    r = rng.uniform(0.0, 0.9, n)
    top = np.pi / k if k else TWO_PI
    phi = rng.uniform(0.0, top, n)
    z = M * (1.0 - r) * (0.5 + 0.5 * rng.uniform(0.0, 1.0, n))
    z = np.maximum(z, 1e-3 * M)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def auto_m(n_images, m=None):
    """Circle sampling resolution for discovery, scaled to the body size.

    Exact tangency refinement makes the decomposition independent of the
    sampling density, so the resolution only has to separate rim features;
    failures retry internally with doubled resolution.
    """
    if m is not None:
        return m
    need = max(256, 2 * int(n_images))
    return 1 << int(np.ceil(np.log2(need)))


def _n_images(n, k):
    return n if k is None else 2 * k * n


def _eval_objective(pts, k, m, want_grad=True, max_doublings=5):
    m = auto_m(_n_images(len(pts), k), m)
    if k is None:
        if not want_grad:
            return resistance.evaluate(pts, m=m,
                                       max_doublings=max_doublings), None
        ev = resistance.evaluate_with_gradient(pts, m=m,
                                               max_doublings=max_doublings)
        return ev.value, ev.gradient
    if not want_grad:
        return symmetry.evaluate_symmetric(
            pts, k, m=m, want_grad=False,
            max_doublings=max_doublings), None
    return symmetry.evaluate_symmetric(pts, k, m=m,
                                       max_doublings=max_doublings)


def _project(pts, k, M):
    """Euclidean-in-polar projection onto the closed sector constraints."""
    out = np.array(pts, dtype=float)
    r = np.hypot(out[:, 0], out[:, 1])
    if k is not None:
        top = np.pi / k
        phi = np.arctan2(out[:, 1], out[:, 0])
        phi = np.clip(phi, 0.0, top)
        # snap onto a symmetry axis when the mirror images would be closer
        # than the geometric resolution (near-coincident orbit points make
        # the hull construction degenerate)
        phi = np.where(r * phi < _AXIS_SNAP, 0.0, phi)
        phi = np.where(r * (top - phi) < _AXIS_SNAP, top, phi)
        r = np.where(r < _AXIS_SNAP, 0.0, r)
        out[:, 0] = r * np.cos(phi)
        out[:, 1] = r * np.sin(phi)
    r = np.hypot(out[:, 0], out[:, 1])
    over = r > _R_MAX
    if np.any(over):
        scale = _R_MAX / r[over]
        out[over, 0] *= scale
        out[over, 1] *= scale
    out[:, 2] = np.clip(out[:, 2], _Z_MIN, M)
    return out


def _active_normals(p, grad_p, k, M):
    """Unit normals of binding closed constraints at one point.

    A constraint is binding when the point sits on it (within tolerance)
    and the steepest-descent direction would leave the feasible side.
    """
    normals = []
    if k is not None:
        top = np.pi / k
        # phi >= 0, i.e. y >= 0
        if p[1] <= _ACTIVE_TOL and -grad_p[1] < 0.0:
            normals.append(np.array([0.0, 1.0, 0.0]))
        # phi <= pi/k, i.e. sin(top) x - cos(top) y >= 0
        ncon = np.array([np.sin(top), -np.cos(top), 0.0])
        if ncon @ p <= _ACTIVE_TOL and -(ncon @ grad_p) < 0.0:
            normals.append(ncon)
    if M - p[2] <= _ACTIVE_TOL and -grad_p[2] > 0.0:
        normals.append(np.array([0.0, 0.0, -1.0]))
    return normals


def _reduced_basis(pts, grad, k, M):
    """Block-diagonal basis of the feasible directions (3n x nfree)."""
    n = len(pts)
    cols = []
    for i in range(n):
        normals = _active_normals(pts[i], grad[i], k, M)
        basis = np.eye(3)
        for nv in normals:
            # remove the normal component, re-orthonormalize
            basis = basis - np.outer(basis @ nv, nv)
        q, r = np.linalg.qr(basis.T)
        keep = np.abs(np.diag(r)) > 1e-8
        for col in q.T[keep]:
            vec = np.zeros(3 * n)
            vec[3 * i:3 * i + 3] = col
            cols.append(vec)
    if not cols:
        return np.zeros((3 * n, 0))
    return np.column_stack(cols)


def _open_boundary_cap(pts, d, cap_fraction):
    """Largest multiple of d staying inside r < 1 and z > 0, scaled back."""
    t_max = np.inf
    for p, dp in zip(pts, d):
        if dp[2] < 0.0:
            t_max = min(t_max, -p[2] / dp[2])
        a = dp[0] ** 2 + dp[1] ** 2
        if a > 0.0:
            b = p[0] * dp[0] + p[1] * dp[1]
            c = p[0] ** 2 + p[1] ** 2 - 1.0
            disc = b * b - a * c
            if disc > 0.0:
                t = (-b + np.sqrt(disc)) / a
                if t > 0.0:
                    t_max = min(t_max, t)
    return cap_fraction * t_max


def _fd_hessian(frozen, x0, dim, step):
    H = np.zeros((dim, dim))
    flat = x0.reshape(-1)
    for a in range(dim):
        xp = flat.copy()
        xp[a] += step
        _, gp = frozen(xp)
        xp[a] -= 2.0 * step
        _, gm = frozen(xp)
        H[a] = (gp - gm).reshape(-1) / (2.0 * step)
    return 0.5 * (H + H.T)


def _fd_hessian_forward(frozen, x0, g0, dim, step):
    """One-sided FD Hessian: ``dim`` gradient evaluations instead of 2*dim.

    The O(step) truncation error only perturbs the Newton *direction*;
    descent is still guarded by the line search, so the cheaper stencil is
    the right trade inside the solver loop.
    """
    H = np.zeros((dim, dim))
    flat = x0.reshape(-1)
    g0 = g0.reshape(-1)
    for a in range(dim):
        xp = flat.copy()
        xp[a] += step
        _, gp = frozen(xp)
        H[a] = (gp.reshape(-1) - g0) / step
    return 0.5 * (H + H.T)


def _bfgs_update(H, s, y):
    """Standard BFGS update of an approximate Hessian (skipped when the
    curvature condition fails)."""
    sy = s @ y
    if not np.isfinite(sy) or sy <= 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
        return H
    Hs = H @ s
    sHs = s @ Hs
    if sHs <= 0:
        return H
    return H - np.outer(Hs, Hs) / sHs + np.outer(y, y) / sy


_H_REFRESH = 3  # iterations a (BFGS-maintained) FD Hessian may stay in use


def _try_eval(pts, k, m):
    """Trial evaluation with gradient; (inf, None) when the hull degenerates.

    The gradient rides along so an accepted trial needs no second build.
    Trials fail fast (no sampling doublings): a degenerate trial is simply
    a rejected step, not worth the expensive retry ladder.
    """
    try:
        return _eval_objective(pts, k, m, max_doublings=0)
    except (DegenerateConfiguration, NoRoot):
        return np.inf, None


def solve_free(pts0, config, opts=None):
    """Projected gradient + regularized Newton solve of the free problem.

    ``config.k`` selects the symmetric problem on the sector; ``k=None``
    solves the nonsymmetric problem over the full disc.  Returns the final
    points and a :class:`RunManifest`.
    """
    opts = opts or OptimizerOptions()
    k, M = config.k, config.M
    pts = _project(np.atleast_2d(np.asarray(pts0, dtype=float)), k, M)
    n = len(pts)
    dim = 3 * n
    watch = Stopwatch()
    manifest = RunManifest(config={"M": M, "k": k, "n": n},
                           options=asdict(opts))

    lam = opts.newton_reg
    hess_step = 1e-4 * (1.0 + M)
    m_eff = auto_m(_n_images(n, k), opts.m)
    f, g = _eval_objective(pts, k, m_eff)
    reason = "max_iter"
    H_cache, H_age = None, 0
    for _ in range(opts.max_iter):
        # points swallowed by the hull contribute nothing (identically zero
        # gradient) but inflate the Hessian; drop them as they appear
        alive = np.any(g != 0.0, axis=1)
        if n > 1 and not np.all(alive) and np.any(alive):
            pts, g = pts[alive], g[alive]
            n = len(pts)
            dim = 3 * n
            lam = opts.newton_reg
            H_cache = None

        pgn = np.linalg.norm(pts - _project(pts - g, k, M))
        manifest.record(f, pgn, lam)
        if pgn <= opts.grad_tol:
            reason = "converged"
            break

        # refuse micro-steps: on an open-boundary crawl the forced failure
        # grows the regularization until the direction rotates enough to
        # escape; at the numerical floor it ends the run instead of
        # spinning through hundreds of 1e-14-sized descents
        min_dec = 1e-13 * (1.0 + abs(f))

        accepted = False

        # regularized Newton on the inactive components; the FD Hessian is
        # expensive, so a BFGS-maintained copy is reused for a few
        # iterations and only refreshed on ageing or after a failed cycle
        for attempt in (1, 2):
            if H_cache is None or H_age >= _H_REFRESH or attempt == 2:
                try:
                    frozen = symmetry.FrozenObjective(pts, k, m=m_eff)

                    def frozen_flat(x):
                        v, gg = frozen(x.reshape(n, 3))
                        return v, gg

                    H_cache = _fd_hessian_forward(frozen_flat, pts, g, dim,
                                                  hess_step)
                    H_age = 0
                except (DegenerateConfiguration, NoRoot):
                    H_cache = None
                    break
            hessian_fresh = H_age == 0
            # with a stale Hessian, give up quickly and refresh instead of
            # burning a full lambda/backtracking cycle
            inner_budget = 8 if hessian_fresh else 2
            bt_budget = opts.max_backtracks if hessian_fresh else 4
            Z = _reduced_basis(pts, g, k, M)
            if Z.shape[1]:
                Hr = Z.T @ H_cache @ Z
                gr = Z.T @ g.reshape(-1)
                lam_try = lam
                for _inner in range(inner_budget):
                    try:
                        d_r = np.linalg.solve(
                            Hr + lam_try * np.eye(len(gr)), -gr)
                    except np.linalg.LinAlgError:
                        lam_try *= 10.0
                        continue
                    if gr @ d_r >= 0.0:
                        lam_try *= 10.0
                        continue
                    d = (Z @ d_r).reshape(n, 3)
                    alpha = min(1.0, _open_boundary_cap(
                        pts, d, opts.step_cap_fraction))
                    gd = float(g.reshape(-1) @ d.reshape(-1))
                    ok = False
                    for _bt in range(bt_budget):
                        trial = _project(pts + alpha * d, k, M)
                        f_t, g_t = _try_eval(trial, k, m_eff)
                        if f_t <= f + opts.armijo_c1 * alpha * gd \
                                and f - f_t >= min_dec:
                            ok = True
                            break
                        alpha *= opts.armijo_backtrack
                    if ok:
                        s = (trial - pts).reshape(-1)
                        y = (g_t - g).reshape(-1)
                        pts, f, g = trial, f_t, g_t
                        lam = max(lam_try * 0.5, 1e-14)
                        accepted = True
                        H_age += 1
                        H_cache = _bfgs_update(H_cache, s, y)
                        break
                    lam_try *= 10.0
                if not accepted:
                    lam = lam_try
            if accepted or hessian_fresh:
                break

        if not accepted:
            # projected gradient fallback
            d = -g
            alpha = min(1.0, _open_boundary_cap(pts, d, opts.step_cap_fraction))
            ok = False
            for _bt in range(40):
                trial = _project(pts + alpha * d, k, M)
                f_t, g_t = _try_eval(trial, k, m_eff)
                if f_t <= f + opts.armijo_c1 * float(
                        g.reshape(-1) @ (trial - pts).reshape(-1)) \
                        and f - f_t >= min_dec:
                    ok = True
                    break
                alpha *= opts.armijo_backtrack
            if ok and f_t < f:
                pts, f, g = trial, f_t, g_t
                H_cache = None
            else:
                # no step above the numerical floor: near stationarity this
                # is ordinary convergence, far from it a genuine stall
                reason = "converged" if pgn <= 1e3 * opts.grad_tol else "stall"
                break

    manifest.final_value = f
    manifest.wall_time = watch.elapsed()
    manifest.termination_reason = reason
    return pts, manifest


def solve_free_nonsymmetric(pts0, config, opts=None):
    """Free solve over the full disc (no prescribed symmetry)."""
    if config.k is not None:
        config = type(config)(M=config.M, k=None)
    return solve_free(pts0, config, opts)


def _facet_area_and_centroid(f, points):
    if isinstance(f, PointTriangle):
        v = points[[f.i, f.j, f.l]]
    elif isinstance(f, BoundaryTriangle):
        y = np.array([np.cos(f.theta), np.sin(f.theta), 0.0])
        v = np.vstack([points[f.i], points[f.j], y])
    else:
        tm = 0.5 * (f.theta_a + f.theta_b)
        ya = np.array([np.cos(f.theta_a), np.sin(f.theta_a), 0.0])
        yb = np.array([np.cos(f.theta_b), np.sin(f.theta_b), 0.0])
        ym = np.array([np.cos(tm), np.sin(tm), 0.0])
        apex = points[f.i]
        area = 0.5 * (np.linalg.norm(np.cross(ym - apex, ya - apex))
                      + np.linalg.norm(np.cross(yb - apex, ym - apex)))
        centroid = (apex + 2.0 * ym) / 3.0
        return area, centroid
    area = 0.5 * np.linalg.norm(np.cross(v[1] - v[0], v[2] - v[0]))
    return area, v.mean(axis=0)


def refine_free(pts, config, refine_eps):
    """Insert lifted centroids of the larger facets of the converged body.

    Candidate points are canonicalized to the sector and deduplicated; the
    lift must be positive so every insertion is visible in the new hull.
    """
    if refine_eps <= 0.0:
        raise ValueError("refine_eps must be positive (zero lift is invisible)")
    k, M = config.k, config.M
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    body = symmetry.orbit(pts, k) if k is not None else pts
    ub = build_upper_boundary(body)
    stats = [_facet_area_and_centroid(f, body) for f in ub.facets]
    if not stats:
        return pts
    areas = np.array([s[0] for s in stats])
    median = np.median(areas)
    new_pts = list(pts)
    for area, centroid in stats:
        if area <= median:
            continue
        cand = centroid + np.array([0.0, 0.0, refine_eps])
        if k is not None:
            cand = symmetry.project_to_sector(cand, k, M)
        cand[2] = min(cand[2], M)
        if np.hypot(cand[0], cand[1]) >= _R_MAX:
            continue
        if all(np.linalg.norm(cand - p) > 1e-7 for p in new_pts):
            new_pts.append(cand)
    return np.array(new_pts)


def prune_dead_points(pts, k, m=None):
    """Drop points with identically zero gradient (strictly inside the hull).

    Swallowed points contribute nothing to the body but inflate the problem
    dimension and attract useless refinement insertions.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if len(pts) < 2:
        return pts
    try:
        _, g = _eval_objective(pts, k, m)
    except (DegenerateConfiguration, NoRoot):
        return pts
    alive = np.any(g != 0.0, axis=1)
    if not np.any(alive):
        return pts
    return pts[alive]


def _edge_midpoint_candidates(pts, config, eps):
    """Lifted midpoints of all hull edges, including edges to the rim.

    Facet centroids alone refine poorly when the extremal points organize
    into arcs: an off-arc insertion drifts back inside the hull.  Edge
    midpoints interpolate neighboring extremal points, so they sit where
    the refined arc wants a new point.
    """
    k, M = config.k, config.M
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    body = symmetry.orbit(pts, k) if k is not None else pts
    ub = build_upper_boundary(body)
    edges = []
    for f in ub.facets:
        if isinstance(f, PointTriangle):
            v = body[[f.i, f.j, f.l]]
            edges += [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
        elif isinstance(f, BoundaryTriangle):
            y = np.array([np.cos(f.theta), np.sin(f.theta), 0.0])
            edges += [(body[f.i], body[f.j]), (body[f.i], y), (body[f.j], y)]
        else:
            ya = np.array([np.cos(f.theta_a), np.sin(f.theta_a), 0.0])
            yb = np.array([np.cos(f.theta_b), np.sin(f.theta_b), 0.0])
            edges += [(body[f.i], ya), (body[f.i], yb)]
    out = []
    for p, q in edges:
        for t in (0.25, 0.5, 0.75):
            cand = (1.0 - t) * p + t * q + np.array([0.0, 0.0, eps])
            if k is not None:
                cand = symmetry.project_to_sector(cand, k, M)
            cand[2] = min(cand[2], M)
            if np.hypot(cand[0], cand[1]) < _R_MAX and cand[2] > 0:
                out.append(cand)
    return out


def _merge_candidates(pts, cands):
    out = list(np.atleast_2d(pts))
    for cand in cands:
        if all(np.linalg.norm(cand - p) > 1e-7 for p in out):
            out.append(cand)
    return np.array(out)


def run_free_problem(M, k, n, seeds=(1, 2, 3, 4, 5), rounds=1, opts=None,
                     nonsymmetric=False, elite=1):
    """Multi-start free solve with point-insertion refinement rounds.

    All seeds get the initial solve; only the ``elite`` most promising
    continue through the (expensive) refinement rounds.  Returns
    ``(best_pts, best_manifest, all_manifests)``; the best run is the one
    with the lowest final objective over all seeds.
    """
    from .geometry import ProblemConfig

    opts = opts or OptimizerOptions()
    config = ProblemConfig(M=M, k=None if nonsymmetric else k)
    eps0 = opts.refine_eps if opts.refine_eps is not None else 1e-3 * M
    manifests = []
    stage0 = []
    for seed in seeds:
        pts = init_points(n, None if nonsymmetric else k, M, rng_seed=seed)
        pts_s, man = solve_free(pts, config, opts)
        man.extra.update({"seed": int(seed), "round": 0})
        manifests.append(man)
        stage0.append((man.final_value, int(seed), pts_s, man))
    stage0.sort(key=lambda t: t[0])
    best = (stage0[0][0], stage0[0][2], stage0[0][3])
    for _, seed, pts_s, man in stage0[:max(1, elite)]:
        eps = eps0
        for rnd in range(1, rounds + 1):
            pts_s = prune_dead_points(pts_s, config.k, opts.m)
            try:
                pts_r = refine_free(pts_s, config, eps)
                pts_r = _merge_candidates(
                    pts_r, _edge_midpoint_candidates(pts_s, config, eps))
            except (DegenerateConfiguration, NoRoot):
                break
            if len(pts_r) == len(pts_s):
                break
            pts_s, man = solve_free(pts_r, config, opts)
            man.extra.update({"seed": seed, "round": rnd})
            manifests.append(man)
            eps *= 0.5
        if man.final_value < best[0]:
            best = (man.final_value, pts_s, man)
    return best[1], best[2], manifests
