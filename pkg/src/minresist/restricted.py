"""Structured two-arc parameterization and its regularized Newton solver.

The body's extremal points are restricted to one arc in a symmetry plane
(variables ``z`` and ``Y``) plus one free arc strictly inside the sector
(variables ``X``).  The symmetry plane is mapped onto the sector axis
``phi = 0``, so the in-plane variables embed as ``(z, 0, M)`` and
``(Y_i1, 0, Y_i2)``; the ``X`` points are kept in sector coordinates.

All variable bounds are open — z in (0,1), Y in (0,1) x (0,M), X strictly
inside the sector cylinder — so the solver never projects; it caps the step
length short of the boundary instead.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import symmetry
from .errors import DegenerateConfiguration, EmptyArc, InvalidLift, NoRoot
from .freeopt import _H_REFRESH, _bfgs_update, OptimizerOptions, auto_m
from .manifest import RunManifest, Stopwatch

_MARGIN = 1e-9
_AXIS_PHI_TOL = 1e-6


@dataclass
class RestrictedVars:
    """Variables of the restricted problem.

    ``z`` places the in-plane arc's top endpoint at ``(z, 0, M)``; each
    ``Y`` row ``(Y_i1, Y_i2)`` places an arc point at ``(Y_i1, 0, Y_i2)``;
    ``X`` rows are full sector points.  ``Y`` stays sorted by first
    coordinate.
    """

    z: float
    Y: np.ndarray
    X: np.ndarray
    M: float

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float).reshape(-1, 2)
        self.X = np.asarray(self.X, dtype=float).reshape(-1, 3)
        self.validate()

    @property
    def n1(self):
        return len(self.Y)

    @property
    def n2(self):
        return len(self.X)

    def validate(self):
        if not 0.0 < self.z < 1.0:
            raise ValueError("z must lie in (0, 1)")
        if self.n1:
            if not (np.all(self.Y[:, 0] > 0) and np.all(self.Y[:, 0] < 1)):
                raise ValueError("Y first coordinates must lie in (0, 1)")
            if not (np.all(self.Y[:, 1] > 0) and np.all(self.Y[:, 1] < self.M)):
                raise ValueError("Y heights must lie in (0, M)")
            if np.any(np.diff(self.Y[:, 0]) <= 0):
                raise ValueError("Y must be strictly increasing in Y_i1")
        if self.n2:
            r = np.hypot(self.X[:, 0], self.X[:, 1])
            if not np.all(r < 1):
                raise ValueError("X must lie strictly inside the unit disc")
            if not (np.all(self.X[:, 2] > 0) and np.all(self.X[:, 2] < self.M)):
                raise ValueError("X heights must lie in (0, M)")

    def flatten(self):
        return np.concatenate([[self.z], self.Y.reshape(-1), self.X.reshape(-1)])

    @classmethod
    def from_flat(cls, x, n1, n2, M):
        z = float(x[0])
        Y = x[1:1 + 2 * n1].reshape(n1, 2)
        X = x[1 + 2 * n1:].reshape(n2, 3)
        return cls(z=z, Y=Y, X=X, M=M)

    def to_json(self, indent=2):
        data = {
            "z": float(f"{self.z:.17g}"),
            "Y": [[float(f"{a:.17g}") for a in row] for row in self.Y],
            "X": [[float(f"{a:.17g}") for a in row] for row in self.X],
            "M": self.M,
        }
        return json.dumps(data, indent=indent)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(z=data["z"], Y=np.array(data["Y"], dtype=float).reshape(-1, 2),
                   X=np.array(data["X"], dtype=float).reshape(-1, 3), M=data["M"])


def assemble_points(v):
    """Sector point list ``[(z,0,M)] + [(Y_i1,0,Y_i2)] + X`` of the body."""
    pts = np.empty((1 + v.n1 + v.n2, 3))
    pts[0] = (v.z, 0.0, v.M)
    if v.n1:
        pts[1:1 + v.n1, 0] = v.Y[:, 0]
        pts[1:1 + v.n1, 1] = 0.0
        pts[1:1 + v.n1, 2] = v.Y[:, 1]
    if v.n2:
        pts[1 + v.n1:] = v.X
    return pts


def pullback_gradient(v, grad_pts):
    """Chain rule from per-point gradients to the (z, Y, X) variables."""
    out = np.empty(1 + 2 * v.n1 + 3 * v.n2)
    out[0] = grad_pts[0, 0]
    if v.n1:
        out[1:1 + 2 * v.n1:2] = grad_pts[1:1 + v.n1, 0]
        out[2:1 + 2 * v.n1:2] = grad_pts[1:1 + v.n1, 2]
    if v.n2:
        out[1 + 2 * v.n1:] = grad_pts[1 + v.n1:].reshape(-1)
    return out


def evaluate_restricted(v, k, m=1024, want_grad=True, max_doublings=5):
    """Objective value (and gradient over (z, Y, X)) of the restricted body."""
    pts = assemble_points(v)
    if not want_grad:
        return symmetry.evaluate_symmetric(pts, k, m=m, want_grad=False,
                                           max_doublings=max_doublings)
    value, grad = symmetry.evaluate_symmetric(pts, k, m=m,
                                              max_doublings=max_doublings)
    return value, pullback_gradient(v, grad)


class _FrozenRestricted:
    """Frozen-structure restricted objective for finite differencing."""

    def __init__(self, v, k, m=1024):
        self.v = v
        self.frozen = symmetry.FrozenObjective(assemble_points(v), k, m=m)

    def __call__(self, x):
        # assemble directly from the flat vector: finite-difference probes
        # may sit marginally outside the open box, which is fine here
        n1, n2, M = self.v.n1, self.v.n2, self.v.M
        pts = np.empty((1 + n1 + n2, 3))
        pts[0] = (x[0], 0.0, M)
        pts[1:1 + n1, 0] = x[1:1 + 2 * n1:2]
        pts[1:1 + n1, 1] = 0.0
        pts[1:1 + n1, 2] = x[2:1 + 2 * n1:2]
        pts[1 + n1:] = x[1 + 2 * n1:].reshape(n2, 3)
        value, grad = self.frozen(pts)
        return value, pullback_gradient(self.v, grad)


def _boundary_cap(v, d, cap_fraction):
    """Largest safe multiple of d before any open bound is reached."""
    x = v.flatten()
    lo = np.empty_like(x)
    hi = np.empty_like(x)
    lo[0], hi[0] = 0.0, 1.0
    n1 = v.n1
    lo[1:1 + 2 * n1:2], hi[1:1 + 2 * n1:2] = 0.0, 1.0
    lo[2:1 + 2 * n1:2], hi[2:1 + 2 * n1:2] = 0.0, v.M
    t_max = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        box = 1 + 2 * n1
        dd = d[:box]
        t_hi = np.where(dd > 0, (hi[:box] - x[:box]) / dd, np.inf)
        t_lo = np.where(dd < 0, (lo[:box] - x[:box]) / dd, np.inf)
        t_max = min(t_max, t_hi.min(initial=np.inf), t_lo.min(initial=np.inf))
    for i in range(v.n2):
        p = v.X[i]
        dp = d[box + 3 * i: box + 3 * i + 3]
        if dp[2] < 0.0:
            t_max = min(t_max, -p[2] / dp[2])
        elif dp[2] > 0.0:
            t_max = min(t_max, (v.M - p[2]) / dp[2])
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


def _try_eval(x, n1, n2, M, k, m):
    """Trial evaluation with gradient; (inf, None) when infeasible/degenerate."""
    try:
        vt = RestrictedVars.from_flat(x, n1, n2, M)
        # fail fast: a degenerate trial is a rejected step, not worth the
        # sampling-doubling retry ladder
        return evaluate_restricted(vt, k, m=m, max_doublings=0)
    except (ValueError, DegenerateConfiguration, NoRoot):
        return np.inf, None


def _structural_cleanup(v, f, g, k, m):
    """Remove swallowed arc points and absorb top-face crawlers into z.

    Dead points (identically zero gradient rows) lie strictly inside the
    hull: dropping them leaves the objective unchanged.  A point whose
    height converged onto the top face is redundant with the top endpoint;
    absorbing it (z := max(z, Y_i1)) is accepted only if the objective does
    not increase.  Returns (v, f, g, changed).
    """
    if v.n1 == 0:
        return v, f, g, False
    gy = g[1:1 + 2 * v.n1].reshape(v.n1, 2)
    dead = ~np.any(gy != 0.0, axis=1)
    # points whose radius collided with a neighbor's would block every
    # subsequent trial step on the ordering invariant; the lower of the
    # pair is dominated, treat it like a dead point
    for i in range(1, v.n1):
        if v.Y[i, 0] - v.Y[i - 1, 0] <= 1e-9:
            j = i if v.Y[i, 1] <= v.Y[i - 1, 1] else i - 1
            dead[j] = True
    changed = False
    if np.any(dead):
        # value-neutral: interior points do not touch the hull
        v = RestrictedVars(z=v.z, Y=v.Y[~dead], X=v.X.copy(), M=v.M)
        g = np.concatenate([[g[0]],
                            g[1:1 + 2 * len(dead)].reshape(-1, 2)[~dead].reshape(-1),
                            g[1 + 2 * len(dead):]])
        changed = True
    crawl = v.Y[:, 1] >= v.M * (1.0 - 1e-6)
    if np.any(crawl):
        z_new = min(max(v.z, float(np.max(v.Y[crawl, 0]))), 1.0 - 1e-9)
        v_new = RestrictedVars(z=z_new, Y=v.Y[~crawl], X=v.X.copy(), M=v.M)
        try:
            f_new, g_new = evaluate_restricted(v_new, k, m=m)
            if f_new <= f + 1e-12:
                return v_new, f_new, g_new, True
        except (DegenerateConfiguration, NoRoot):
            pass
    return v, f, g, changed


def _resort_Y(v):
    """Restore the Y ordering; returns (vars, changed)."""
    if v.n1 < 2 or np.all(np.diff(v.Y[:, 0]) > 0):
        return v, False
    order = np.argsort(v.Y[:, 0], kind="stable")
    return RestrictedVars(z=v.z, Y=v.Y[order], X=v.X, M=v.M), True


def solve_restricted(v0, k, opts=None):
    """Regularized Newton solve of the restricted problem.

    All bounds are open: iterates stay strictly feasible via step capping,
    never projection.  A step that breaks the Y ordering is re-sorted and
    treated as a structural event (the regularization resets).
    """
    opts = opts or OptimizerOptions()
    v = RestrictedVars(z=v0.z, Y=v0.Y.copy(), X=v0.X.copy(), M=v0.M)
    n1, n2, M = v.n1, v.n2, v.M
    dim = 1 + 2 * n1 + 3 * n2
    watch = Stopwatch()
    manifest = RunManifest(config={"M": M, "k": k, "n1": n1, "n2": n2},
                           options=asdict(opts))

    lam = opts.newton_reg
    hess_step = 1e-5 * (1.0 + M)
    m_eff = auto_m(k * (1 + n1) + 2 * k * n2, opts.m)
    f, g = evaluate_restricted(v, k, m=m_eff)
    reason = "max_iter"
    H_cache, H_age = None, 0
    for _ in range(opts.max_iter):
        v, f, g, changed = _structural_cleanup(v, f, g, k, m_eff)
        if changed:
            n1, n2 = v.n1, v.n2
            dim = 1 + 2 * n1 + 3 * n2
            lam = opts.newton_reg
            H_cache = None
        gnorm = float(np.linalg.norm(g))
        manifest.record(f, gnorm, lam)
        if gnorm <= opts.grad_tol:
            reason = "converged"
            break

        # refuse micro-steps: on a boundary crawl the forced failure grows
        # the regularization and rotates the step toward the gradient,
        # which escapes the crawl basin; at the numerical floor it ends
        # the run instead of spinning through 1e-14-sized descents
        min_dec = 1e-13 * (1.0 + abs(f))

        accepted = False
        # the FD Hessian dominates the iteration cost: keep a
        # BFGS-maintained copy and refresh it on ageing, structural
        # change, or after a full failed lambda cycle
        for attempt in (1, 2):
            if H_cache is None or H_age >= _H_REFRESH or attempt == 2:
                try:
                    frozen = _FrozenRestricted(v, k, m=m_eff)
                    H_cache = _fd_hessian_forward_flat(
                        frozen, v.flatten(), g, dim, hess_step)
                    H_age = 0
                except (DegenerateConfiguration, NoRoot):
                    H_cache = None
                    break
            hessian_fresh = H_age == 0
            # with a stale Hessian, give up quickly and refresh instead of
            # burning a full lambda/backtracking cycle
            inner_budget = 8 if hessian_fresh else 2
            bt_budget = opts.max_backtracks if hessian_fresh else 4
            lam_try = lam
            for _inner in range(inner_budget):
                try:
                    d = np.linalg.solve(H_cache + lam_try * np.eye(dim), -g)
                except np.linalg.LinAlgError:
                    lam_try *= 10.0
                    continue
                if g @ d >= 0.0:
                    lam_try *= 10.0
                    continue
                alpha = min(1.0, _boundary_cap(v, d, opts.step_cap_fraction))
                gd = float(g @ d)
                ok = False
                for _bt in range(bt_budget):
                    x_t = v.flatten() + alpha * d
                    f_t, g_t = _try_eval(x_t, n1, n2, M, k, m_eff)
                    if f_t <= f + opts.armijo_c1 * alpha * gd \
                            and f - f_t >= min_dec:
                        ok = True
                        break
                    alpha *= opts.armijo_backtrack
                if ok:
                    s = x_t - v.flatten()
                    v_new, resorted = _resort_Y(
                        RestrictedVars.from_flat(x_t, n1, n2, M))
                    v = v_new
                    if resorted:
                        f, g = evaluate_restricted(v, k, m=m_eff)
                        lam = opts.newton_reg
                        H_cache = None
                    else:
                        y = g_t - g
                        f, g = f_t, g_t
                        lam = max(lam_try * 0.5, 1e-14)
                        H_age += 1
                        H_cache = _bfgs_update(H_cache, s, y)
                    accepted = True
                    break
                lam_try *= 10.0
            if not accepted:
                lam = lam_try
            if accepted or hessian_fresh:
                break

        if not accepted:
            d = -g
            alpha = min(1.0, _boundary_cap(v, d, opts.step_cap_fraction))
            ok = False
            for _bt in range(40):
                x_t = v.flatten() + alpha * d
                f_t, g_t = _try_eval(x_t, n1, n2, M, k, m_eff)
                if f_t < f - max(opts.armijo_c1 * alpha * gnorm ** 2 * 1e-3,
                                 min_dec):
                    ok = True
                    break
                alpha *= opts.armijo_backtrack
            if ok:
                v, resorted = _resort_Y(RestrictedVars.from_flat(x_t, n1, n2, M))
                H_cache = None
                if resorted:
                    f, g = evaluate_restricted(v, k, m=m_eff)
                    lam = opts.newton_reg
                else:
                    f, g = f_t, g_t
            else:
                # numerical floor near stationarity is ordinary convergence
                reason = "converged" if gnorm <= 1e3 * opts.grad_tol else "stall"
                break

    manifest.final_value = f
    manifest.wall_time = watch.elapsed()
    manifest.termination_reason = reason
    return v, manifest


def _fd_hessian_flat(func, x0, dim, step):
    H = np.zeros((dim, dim))
    for a in range(dim):
        xp = x0.copy()
        xp[a] += step
        _, gp = func(xp)
        xp[a] -= 2.0 * step
        _, gm = func(xp)
        H[a] = (gp - gm) / (2.0 * step)
    return 0.5 * (H + H.T)


def _fd_hessian_forward_flat(func, x0, g0, dim, step):
    """One-sided FD Hessian (``dim`` gradient evaluations); see the free
    solver's variant for the accuracy trade-off."""
    H = np.zeros((dim, dim))
    for a in range(dim):
        xp = x0.copy()
        xp[a] += step
        _, gp = func(xp)
        H[a] = (gp - g0) / step
    return 0.5 * (H + H.T)


def refine_Y(v, eps):
    """Insert lifted interpolations between the in-plane arc's neighbors.

    Prepends the midpoint toward the top endpoint ``(z, M)``, inserts a
    midpoint between every consecutive pair, and appends the midpoint
    toward the rim point ``(1, 0)``; every insertion is lifted by ``eps``.
    ``n1`` becomes ``2 n1 + 1``.
    """
    if v.n1 == 0:
        raise EmptyArc("cannot refine an empty Y arc")
    Y = v.Y
    rows = [((v.z + Y[0, 0]) / 2.0, (v.M + Y[0, 1]) / 2.0 + eps)]
    for i in range(v.n1):
        rows.append(tuple(Y[i]))
        if i + 1 < v.n1:
            rows.append(((Y[i, 0] + Y[i + 1, 0]) / 2.0,
                         (Y[i, 1] + Y[i + 1, 1]) / 2.0 + eps))
    rows.append(((Y[-1, 0] + 1.0) / 2.0, Y[-1, 1] / 2.0 + eps))
    new_Y = np.array(rows)
    if np.any(new_Y[:, 1] >= v.M):
        raise InvalidLift("lifted Y height reaches the top face; shrink eps")
    if np.any(new_Y[:, 1] <= 0.0) or np.any(new_Y[:, 0] <= 0.0) \
            or np.any(new_Y[:, 0] >= 1.0):
        raise InvalidLift("lifted Y point leaves the open box; shrink eps")
    new_Y = new_Y[np.argsort(new_Y[:, 0], kind="stable")]
    keep = np.ones(len(new_Y), dtype=bool)
    for i in range(1, len(new_Y)):
        last = np.flatnonzero(keep[:i])[-1]
        if new_Y[i, 0] - new_Y[last, 0] <= 1e-9:
            keep[i] = False
    return RestrictedVars(z=v.z, Y=new_Y[keep], X=v.X.copy(), M=v.M)


def _chain_order(X, anchor):
    """Nearest-neighbor ordering of the arc starting nearest to ``anchor``."""
    n = len(X)
    left = list(range(n))
    cur = int(np.argmin(np.linalg.norm(X - anchor, axis=1)))
    order = [cur]
    left.remove(cur)
    while left:
        dists = np.linalg.norm(X[left] - X[cur], axis=1)
        cur = left[int(np.argmin(dists))]
        order.append(cur)
        left.remove(cur)
    return order


def refine_X(v, eps):
    """Insert lifted midpoints along the off-plane arc; n2 becomes 2 n2 - 1.

    The arc order is recovered by nearest-neighbor chaining from the end
    closest to the in-plane arc.
    """
    if v.n2 == 0:
        raise EmptyArc("cannot refine an empty X arc")
    if v.n1:
        anchor = np.array([v.Y[0, 0], 0.0, v.Y[0, 1]])
    else:
        anchor = np.array([v.z, 0.0, v.M])
    X = v.X[_chain_order(v.X, anchor)]
    rows = [X[0]]
    for i in range(1, len(X)):
        mid = 0.5 * (X[i - 1] + X[i])
        mid = mid + np.array([0.0, 0.0, eps])
        rows.append(mid)
        rows.append(X[i])
    new_X = np.array(rows)
    if np.any(new_X[:, 2] >= v.M):
        raise InvalidLift("lifted X height reaches the top face; shrink eps")
    return RestrictedVars(z=v.z, Y=v.Y.copy(), X=new_X, M=v.M)


def init_restricted_from_free(pts, k, M):
    """Classify a converged free solution into restricted variables.

    On-axis points become the ``Y`` arc (the widest top-face offset gives
    ``z``); strictly interior points become ``X``.  Raises :class:`EmptyArc`
    when no on-axis points exist.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.where(r > 0, np.arctan2(pts[:, 1], pts[:, 0]), 0.0)
    on_axis = (r < _AXIS_PHI_TOL) | (np.abs(phi) < _AXIS_PHI_TOL) \
        | (np.abs(phi - np.pi / k) < _AXIS_PHI_TOL)
    if not np.any(on_axis):
        raise EmptyArc("free solution has no on-axis points")
    axis_pts = pts[on_axis]
    top = axis_pts[:, 2] >= M - 1e-9
    if np.any(top):
        z = float(np.max(r[on_axis][top]))
    else:
        z = float(np.clip(r[on_axis][np.argmax(axis_pts[:, 2])], 0.0, 1.0))
    z = min(max(z, 1e-6), 1.0 - 1e-6)
    arc = axis_pts[~top]
    Y = np.column_stack([np.hypot(arc[:, 0], arc[:, 1]), arc[:, 2]])
    Y[:, 0] = np.clip(Y[:, 0], 1e-6, 1.0 - 1e-6)
    Y[:, 1] = np.clip(Y[:, 1], 1e-6, M - 1e-6)
    # deduplicate coincident radii so the strict ordering holds
    Y = Y[np.argsort(Y[:, 0], kind="stable")]
    keep = np.ones(len(Y), dtype=bool)
    for i in range(1, len(Y)):
        if Y[i, 0] - Y[i - 1, 0] <= 1e-9:
            keep[i] = False
    Y = Y[keep]
    X = pts[~on_axis].copy()
    if len(X):
        X[:, 2] = np.clip(X[:, 2], 1e-6, M - 1e-6)
        rX = np.hypot(X[:, 0], X[:, 1])
        shrink = np.minimum(1.0, (1.0 - 1e-6) / np.maximum(rX, 1e-300))
        X[:, 0] *= shrink
        X[:, 1] *= shrink
    return RestrictedVars(z=z, Y=Y, X=X, M=M)


def refine_Y_safe(v, eps, max_halvings=60):
    """refine_Y with the ε-shrink retry the InvalidLift contract asks for."""
    for _ in range(max_halvings):
        try:
            return refine_Y(v, eps)
        except InvalidLift:
            eps *= 0.5
    raise InvalidLift("could not find a feasible lift for the Y arc")


def refine_X_safe(v, eps, max_halvings=60):
    for _ in range(max_halvings):
        try:
            return refine_X(v, eps)
        except InvalidLift:
            eps *= 0.5
    raise InvalidLift("could not find a feasible lift for the X arc")


def run_restricted_problem(M, k, n1_target=200, n2_target=None, v0=None,
                           opts=None, free_n=12, free_seeds=(1, 2, 3),
                           free_rounds=1,
                           max_rounds=14):
    """Full restricted pipeline: seed, then refine-and-solve to target size.

    Without an explicit start the seed comes from a converged free solve
    (classified into the two arcs); the ladder then alternates refinement
    and re-solves until the in-plane arc reaches ``n1_target``.  Returns
    ``(vars, final_manifest, manifests)``.
    """
    from . import freeopt

    opts = opts or OptimizerOptions()
    if v0 is None:
        pts, _, _ = freeopt.run_free_problem(M, k, free_n, seeds=free_seeds,
                                             rounds=free_rounds, opts=opts)
        try:
            v0 = init_restricted_from_free(pts, k, M)
        except EmptyArc:
            v0 = default_Y_profile(M, 5)
        if v0.n1 == 0:
            # no in-plane arc in the free solution: seed Y from the default
            # profile but keep the off-plane arc the free solve discovered
            prof = default_Y_profile(M, 5, z=v0.z)
            v0 = RestrictedVars(z=v0.z, Y=prof.Y, X=v0.X.copy(), M=M)
    manifests = []
    v, man = solve_restricted(v0, k, opts)
    man.extra.update({"round": 0, "n1": v.n1, "n2": v.n2})
    manifests.append(man)
    eps = 1e-3 * M
    for rnd in range(1, max_rounds + 1):
        if v.n1 >= n1_target and (n2_target is None or v.n2 >= n2_target
                                  or v.n2 == 0):
            break
        grew = False
        if v.n1 < n1_target:
            v_new = refine_Y_safe(v, eps)
            grew = grew or v_new.n1 > v.n1
            v = v_new
        if v.n2 and (n2_target is None or v.n2 < n2_target):
            v_new = refine_X_safe(v, eps)
            grew = grew or v_new.n2 > v.n2
            v = v_new
        if not grew:
            break
        eps *= 0.5
        v, man = solve_restricted(v, k, opts)
        man.extra.update({"round": rnd, "n1": v.n1, "n2": v.n2})
        manifests.append(man)
    return v, manifests[-1], manifests


def default_Y_profile(M, n1, z=None):
    """Strictly concave seed arc from the top endpoint down to the rim.

    Concavity keeps every seed point on the hull (a straight chord would
    leave all interior arc points invisible, with zero gradient).
    """
    if z is None:
        z = 0.3
    s = (np.arange(1, n1 + 1)) / (n1 + 1.0)
    Y1 = z + s * (1.0 - z)
    Y2 = M * np.cos(0.5 * np.pi * s)
    Y2 = np.clip(Y2, 1e-4 * M, M * (1 - 1e-6))
    return RestrictedVars(z=z, Y=np.column_stack([Y1, Y2]),
                          X=np.zeros((0, 3)), M=M)


def prune_dead_Y(v, g):
    """Drop arc points whose objective gradient vanished (swallowed points).

    A ``Y`` point strictly inside the hull contributes nothing and would
    seed further invisible insertions on refinement.
    """
    if v.n1 == 0:
        return v
    gy = g[1:1 + 2 * v.n1].reshape(v.n1, 2)
    alive = np.any(gy != 0.0, axis=1)
    if np.all(alive):
        return v
    return RestrictedVars(z=v.z, Y=v.Y[alive], X=v.X.copy(), M=v.M)
