"""Exact upper-boundary decomposition of convex bodies over the unit disc.

A body is the convex hull of the closed unit disc at height zero together
with finitely many points strictly above the open disc.  Its upper boundary
splits into three kinds of facets:

* planar triangles spanned by three of the points,
* triangles spanned by two points and a tangency point on the unit circle,
* conical pieces joining one apex point to an arc of the unit circle.

The combinatorial structure is discovered from the 3D convex hull of the
points together with a fine regular sampling of the circle; tangency angles
and arc endpoints are then recovered exactly (closed form, well below 1e-13).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial._qhull import QhullError

from .errors import DegenerateConfiguration, NoRoot

# Phase offset of the circle sampling (fraction of one slot).  Keeps sample
# angles away from the symmetry axes that our bodies tend to align with.
_SAMPLE_PHASE = 0.5611296651297

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProblemConfig:
    """Body height and optional dihedral symmetry order."""

    M: float
    k: int | None = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("body height M must be positive")
        if self.k is not None and self.k < 2:
            raise ValueError("symmetry order k must be at least 2")


def plane_tolerance(M):
    """Scale-aware coplanarity tolerance for a body of height ``M``."""
    return 1e-10 * (1.0 + M)


def check_point_set(points, M=None):
    """Validate the point-set invariants; returns the points as an array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return np.zeros((0, 3))
    if pts.shape[1] != 3:
        raise ValueError("points must be 3D")
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    if np.any(r2 >= 1.0):
        raise ValueError("all points must lie above the open unit disc (r < 1)")
    if np.any(pts[:, 2] <= 0.0):
        raise ValueError("all points must have positive height")
    if M is not None and np.any(pts[:, 2] > M + 1e-12):
        raise ValueError("point height exceeds the body height M")
    if len(pts) > 1:
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        iu = np.triu_indices(len(pts), k=1)
        if np.any(d2[iu] == 0.0):
            raise ValueError("points must be pairwise distinct")
    return pts


@dataclass(frozen=True)
class PointTriangle:
    """Planar facet spanned by three body points (indices into the set)."""

    i: int
    j: int
    l: int


@dataclass(frozen=True)
class BoundaryTriangle:
    """Facet through two points, tangent to the circle at angle ``theta``."""

    i: int
    j: int
    theta: float


@dataclass(frozen=True)
class ConePiece:
    """Conical facet joining apex ``i`` to the circle arc [theta_a, theta_b].

    ``mu``/``phi`` are the polar coordinates of the apex projection and ``h``
    is the apex height; they are derived from the apex but stored for direct
    use by the resistance integrals.
    """

    i: int
    theta_a: float
    theta_b: float
    mu: float
    phi: float
    h: float


@dataclass
class Combinatorics:
    """Frozen facet structure for fast re-evaluation at perturbed coordinates.

    The tangency registry stores each distinct supporting-plane computation
    once; boundary triangles and cone endpoints reference it by index so a
    shared angle stays a single float.
    """

    n_points: int
    tri: np.ndarray                      # (nt, 3) oriented point triangles
    tang_pairs: np.ndarray               # (ng, 2) point pairs
    tang_theta_ref: np.ndarray           # (ng,) provisional angles
    bt_pairs: np.ndarray                 # (nb, 2) oriented (i, j)
    bt_tang: np.ndarray                  # (nb,) index into the registry
    cone_apex: np.ndarray                # (nc,)
    cone_a: np.ndarray                   # (nc,) registry index or -1 (full)
    cone_b: np.ndarray                   # (nc,)
    cone_width_ref: np.ndarray           # (nc,) provisional arc widths


@dataclass
class UpperBoundary:
    """Exact decomposition of the upper boundary of a body."""

    facets: list
    hull_points: np.ndarray
    points: np.ndarray
    combinatorics: Combinatorics = field(repr=False, default=None)

    def to_json_dict(self):
        """Facet list as a JSON-ready document (angles at 15 significant digits)."""
        out = []
        for f in self.facets:
            if isinstance(f, PointTriangle):
                out.append({"type": "point_triangle", "vertices": [f.i, f.j, f.l]})
            elif isinstance(f, BoundaryTriangle):
                out.append({"type": "boundary_triangle", "vertices": [f.i, f.j],
                            "theta": float(f"{f.theta:.15g}")})
            else:
                out.append({"type": "cone", "apex": f.i,
                            "theta_a": float(f"{f.theta_a:.15g}"),
                            "theta_b": float(f"{f.theta_b:.15g}"),
                            "mu": float(f"{f.mu:.15g}"),
                            "phi": float(f"{f.phi:.15g}"),
                            "h": float(f"{f.h:.15g}")})
        return {"facets": out, "hull_points": [int(i) for i in self.hull_points]}


def circle_samples(m):
    """Angles of the ``m`` discovery samples on the unit circle."""
    return TWO_PI * (np.arange(m) + _SAMPLE_PHASE) / m


def solve_tangencies(points, pairs, theta_ref):
    """Exact tangency angles for supporting planes through point pairs.

    For each pair (p, q) the plane ``a x + b y + z = c`` through both points
    that touches the unit circle from above satisfies ``c = sqrt(a^2 + b^2)``.
    The two linear interpolation constraints leave a line of plane
    coefficients on which the tangency condition is a quadratic; of its (up
    to two) admissible roots the one closest to the provisional angle is
    taken.  Returns ``(theta, abc)``.
    """
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    theta_ref = np.asarray(theta_ref, dtype=float)
    if len(pairs) == 0:
        return np.zeros(0), np.zeros((0, 3))
    P = points[pairs[:, 0]]
    Q = points[pairs[:, 1]]
    r1 = np.column_stack([P[:, 0], P[:, 1], -np.ones(len(P))])
    r2 = np.column_stack([Q[:, 0], Q[:, 1], -np.ones(len(Q))])
    rhs1 = -P[:, 2]
    rhs2 = -Q[:, 2]
    d = np.cross(r1, r2)
    a11 = np.einsum("ij,ij->i", r1, r1)
    a12 = np.einsum("ij,ij->i", r1, r2)
    a22 = np.einsum("ij,ij->i", r2, r2)
    det = a11 * a22 - a12 * a12
    if np.any(det <= 0.0):
        raise NoRoot("coincident horizontal projections in a tangency pair")
    y1 = (a22 * rhs1 - a12 * rhs2) / det
    y2 = (-a12 * rhs1 + a11 * rhs2) / det
    u0 = y1[:, None] * r1 + y2[:, None] * r2

    qd = d[:, 0] ** 2 + d[:, 1] ** 2 - d[:, 2] ** 2
    qm = u0[:, 0] * d[:, 0] + u0[:, 1] * d[:, 1] - u0[:, 2] * d[:, 2]
    q0 = u0[:, 0] ** 2 + u0[:, 1] ** 2 - u0[:, 2] ** 2
    disc = qm * qm - qd * q0
    if np.any(disc < 0.0):
        raise NoRoot("no tangent supporting plane through a point pair")
    sq = np.sqrt(disc)

    # Numerically stable pair of quadratic roots; fall back to the linear
    # solution where the quadratic degenerates.
    lin = np.abs(qd) < 1e-14 * np.maximum(np.abs(qm), 1.0)
    qd_safe = np.where(lin, 1.0, qd)
    sA = (-qm + sq) / qd_safe
    sB = (-qm - sq) / qd_safe
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lin = np.where(np.abs(qm) > 0, -0.5 * q0 / np.where(qm == 0, 1.0, qm), 0.0)
    sA = np.where(lin, s_lin, sA)
    sB = np.where(lin, s_lin, sB)

    best_theta = np.full(len(pairs), np.nan)
    best_abc = np.zeros((len(pairs), 3))
    best_dist = np.full(len(pairs), np.inf)
    for s in (sA, sB):
        abc = u0 + s[:, None] * d
        ok = abc[:, 2] > 0.0
        theta = np.arctan2(abc[:, 1], abc[:, 0]) % TWO_PI
        dist = np.abs((theta - theta_ref + np.pi) % TWO_PI - np.pi)
        take = ok & (dist < best_dist)
        best_theta = np.where(take, theta, best_theta)
        best_dist = np.where(take, dist, best_dist)
        best_abc = np.where(take[:, None], abc, best_abc)
    if np.any(np.isnan(best_theta)):
        raise NoRoot("tangency solve produced no supporting plane")
    return best_theta, best_abc


def refine_tangency(p, q, theta_seed=None):
    """Tangency angle of the supporting plane through two points.

    With no seed, the root nearer the midpoint azimuth of the two
    projections is returned.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if theta_seed is None:
        mid = 0.5 * (p[:2] + q[:2])
        theta_seed = float(np.arctan2(mid[1], mid[0]) % TWO_PI)
    pts = np.vstack([p, q])
    theta, _ = solve_tangencies(pts, [[0, 1]], [theta_seed])
    return float(theta[0])


def cone_arc_endpoints(apex, left_structure, right_structure):
    """Exact arc endpoints of a cone from its two rim neighbours.

    Each neighbour is either ``None`` (full circle) or a tuple
    ``(other_point, theta_seed)`` describing the adjacent tangency facet.
    """
    apex = np.asarray(apex, dtype=float)
    if left_structure is None and right_structure is None:
        return 0.0, TWO_PI
    ta = refine_tangency(apex, left_structure[0], left_structure[1])
    tb = refine_tangency(apex, right_structure[0], right_structure[1])
    if tb < ta:
        tb += TWO_PI
    return ta, tb


def _cone_from_apex(points, apex, theta_a, theta_b):
    x, y, h = points[apex]
    mu = float(np.hypot(x, y))
    phi = float(np.arctan2(y, x)) if mu > 0 else 0.0
    return ConePiece(int(apex), float(theta_a), float(theta_b), mu, phi, float(h))


def discover_combinatorics(points, m):
    """Provisional facet classification from the hull with an m-gon base.

    Returns ``(pt_tris, bts, fan_runs)`` where ``bts`` are
    ``(i, j, sample_index)`` records and ``fan_runs`` are
    ``(apex, slot_start, slot_count)`` maximal runs of circle slots (slot s
    covers the arc between samples s and s+1).
    """
    if m < 64:
        raise ValueError("at least 64 circle samples are required")
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    ang = circle_samples(m)
    circ = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(m)])
    cloud = np.vstack([pts, circ]) if n else circ
    try:
        hull = ConvexHull(cloud)
    except QhullError as exc:
        raise DegenerateConfiguration(f"qhull failed: {exc}") from exc

    simplices = hull.simplices
    normals = hull.equations[:, :3]
    upper = normals[:, 2] > 1e-9
    simplices = simplices[upper]

    is_circle = simplices >= n
    ncirc = is_circle.sum(axis=1)

    pt_tris = simplices[ncirc == 0]

    bt_rows = simplices[ncirc == 1]
    bt_circ = is_circle[ncirc == 1]
    bts = []
    if len(bt_rows):
        samples = bt_rows[bt_circ] - n
        reals = bt_rows[~bt_circ].reshape(-1, 2)
        bts = [(int(i), int(j), int(s)) for (i, j), s in zip(reals, samples)]

    fan_slots = {}
    fan_rows = simplices[ncirc == 2]
    fan_circ = is_circle[ncirc == 2]
    if len(fan_rows):
        apexes = fan_rows[~fan_circ]
        ss = np.sort(fan_rows[fan_circ].reshape(-1, 2) - n, axis=1)
        adjacent = ss[:, 1] - ss[:, 0] == 1
        wrap = (ss[:, 0] == 0) & (ss[:, 1] == m - 1)
        if not np.all(adjacent | wrap):
            raise DegenerateConfiguration(
                "cone fan facet with non-adjacent circle samples")
        slots = np.where(adjacent, ss[:, 0], m - 1)
        order = np.argsort(slots, kind="stable")
        slots = slots[order]
        apexes = apexes[order]
        dup = slots[1:] == slots[:-1]
        if np.any(dup & (apexes[1:] != apexes[:-1])):
            raise DegenerateConfiguration("circle slot claimed by two apexes")
        fan_slots = dict(zip(slots.tolist(), apexes.tolist()))

    fan_runs = []
    if fan_slots:
        slots = sorted(fan_slots)
        runs = []
        start = prev = slots[0]
        for s in slots[1:]:
            if s == prev + 1 and fan_slots[s] == fan_slots[start]:
                prev = s
            else:
                runs.append((fan_slots[start], start, prev - start + 1))
                start = prev = s
        runs.append((fan_slots[start], start, prev - start + 1))
        # merge a run wrapping through slot m-1 into the one starting at 0
        if (len(runs) > 1 and runs[0][1] == 0 and runs[-1][1] + runs[-1][2] == m
                and runs[0][0] == runs[-1][0]):
            apex, start, count = runs.pop()
            first = runs.pop(0)
            runs.insert(0, (apex, start, count + first[2]))
        fan_runs = runs
    return pt_tris, bts, fan_runs


def _orient_upward(points_ext, tri):
    """Reorder triangle vertex triples so their normals point upward."""
    tri = np.array(tri, dtype=int)
    if len(tri) == 0:
        return tri.reshape(0, 3)
    v1 = points_ext[tri[:, 0]]
    v2 = points_ext[tri[:, 1]]
    v3 = points_ext[tri[:, 2]]
    nz = np.cross(v2 - v1, v3 - v1)[:, 2]
    flip = nz < 0
    tri[flip, 1], tri[flip, 2] = tri[flip, 2].copy(), tri[flip, 1].copy()
    return tri


def _assemble(points, m, pt_tris, bts, fan_runs):
    """Exact structure from the provisional classification.

    The rim is an alternating cyclic sequence of boundary-triangle tangency
    points and cone arcs; every gap between consecutive tangencies becomes a
    cone whose apex is the common point of the two neighbouring triangles
    (slivers narrower than one discovery slot included).
    """
    n = len(points)
    ang = circle_samples(m)
    slot = TWO_PI / m

    # tangency registry, one entry per distinct supporting-plane computation
    reg_index = {}
    reg_pairs = []
    reg_ref = []

    def register(i, j, sample):
        key = (min(i, j), max(i, j), sample)
        if key not in reg_index:
            reg_index[key] = len(reg_pairs)
            reg_pairs.append((i, j))
            reg_ref.append(ang[sample])
        return reg_index[key]

    bt_recs = [(i, j, register(i, j, s), s) for (i, j, s) in bts]

    tang_pairs = np.array(reg_pairs, dtype=int).reshape(-1, 2)
    tang_ref = np.array(reg_ref, dtype=float)
    theta, _abc = solve_tangencies(points, tang_pairs, tang_ref)

    # exact angles must stay close to their discovery slots
    if len(theta) and np.max(np.abs((theta - tang_ref + np.pi) % TWO_PI - np.pi)) > 4 * slot:
        raise DegenerateConfiguration("tangency drifted far from its discovery slot")

    cones = []  # (apex, reg_a, reg_b, width_ref) with reg -1 = full circle
    if not bt_recs:
        if fan_runs:
            apexes = {r[0] for r in fan_runs}
            if len(apexes) != 1 or sum(r[2] for r in fan_runs) != m:
                raise DegenerateConfiguration("rim without tangencies but several apexes")
            cones.append((fan_runs[0][0], -1, -1, TWO_PI))
    else:
        order = sorted(range(len(bt_recs)), key=lambda t: theta[bt_recs[t][2]])
        # owners of discovery slots, for apex disambiguation
        slot_owner = {}
        for apex, start, count in fan_runs:
            for s in range(start, start + count):
                slot_owner[s % m] = apex
        for t in range(len(order)):
            li, lj, lreg, lsample = bt_recs[order[t]]
            ri, rj, rreg, rsample = bt_recs[order[(t + 1) % len(order)]]
            ta = theta[lreg]
            tb = theta[rreg]
            width = (tb - ta) % TWO_PI if len(order) > 1 else TWO_PI
            common = {li, lj} & {ri, rj}
            if len(common) == 1:
                apex = common.pop()
            else:
                # consult the discovered fans over the gap
                owners = set()
                if lsample != rsample or width > np.pi:
                    s = lsample
                    for _ in range(m):
                        if s in slot_owner:
                            owners.add(slot_owner[s])
                        s = (s + 1) % m
                        if s == rsample:
                            break
                owners &= common if common else owners
                if len(owners) == 1:
                    apex = owners.pop()
                elif width <= 1e-9 and common:
                    apex = min(common)
                else:
                    raise DegenerateConfiguration(
                        "ambiguous cone apex between adjacent tangencies")
            cones.append((apex, lreg, rreg, width))

    # check discovered fans against the assigned arcs
    arc_of = {}
    for apex, ra, rb, width in cones:
        if ra >= 0:
            arc_of.setdefault(apex, []).append((theta[ra], width))
    for apex, start, count in fan_runs:
        mid = ang[start % m] + 0.5 * count * slot
        ok = False
        if any(c[0] == apex and c[1] < 0 for c in cones):
            ok = True
        for ta, width in arc_of.get(apex, []):
            off = (mid - ta) % TWO_PI
            if off <= width + slot:
                ok = True
        if not ok:
            raise DegenerateConfiguration("discovered cone fan not covered by any arc")

    comb = Combinatorics(
        n_points=n,
        tri=_orient_upward(points, pt_tris),
        tang_pairs=tang_pairs,
        tang_theta_ref=theta.copy(),
        bt_pairs=np.array([(r[0], r[1]) for r in bt_recs], dtype=int).reshape(-1, 2),
        bt_tang=np.array([r[2] for r in bt_recs], dtype=int),
        cone_apex=np.array([c[0] for c in cones], dtype=int),
        cone_a=np.array([c[1] for c in cones], dtype=int),
        cone_b=np.array([c[2] for c in cones], dtype=int),
        cone_width_ref=np.array([c[3] for c in cones], dtype=float),
    )
    # orient boundary triangles upward (third vertex = tangency point)
    if len(comb.bt_pairs):
        y = np.column_stack([np.cos(theta[comb.bt_tang]),
                             np.sin(theta[comb.bt_tang]),
                             np.zeros(len(comb.bt_tang))])
        v1 = points[comb.bt_pairs[:, 0]]
        v2 = points[comb.bt_pairs[:, 1]]
        nz = np.cross(v2 - v1, y - v1)[:, 2]
        flip = nz < 0
        comb.bt_pairs[flip] = comb.bt_pairs[flip][:, ::-1]
    return comb, theta


def realize_facets(comb, points, theta=None):
    """Facet records (and hull point indices) from frozen combinatorics."""
    if theta is None:
        theta, _ = solve_tangencies(points, comb.tang_pairs, comb.tang_theta_ref)
    facets = []
    used = set()
    for i, j, l in comb.tri:
        facets.append(PointTriangle(int(i), int(j), int(l)))
        used.update((int(i), int(j), int(l)))
    for (i, j), g in zip(comb.bt_pairs, comb.bt_tang):
        facets.append(BoundaryTriangle(int(i), int(j), float(theta[g])))
        used.update((int(i), int(j)))
    for apex, ra, rb, wref in zip(comb.cone_apex, comb.cone_a, comb.cone_b,
                                  comb.cone_width_ref):
        if ra < 0:
            ta, tb = 0.0, TWO_PI
        else:
            ta = theta[ra]
            width = (theta[rb] - ta) % TWO_PI
            # resolve the wrap with the provisional width; clamp slivers
            if wref - width > np.pi:
                width += TWO_PI
            elif width - wref > np.pi:
                width -= TWO_PI
            if width < 0.0:
                if width < -1e-9:
                    raise DegenerateConfiguration("negative cone arc width")
                width = 0.0
            tb = ta + width
        facets.append(_cone_from_apex(points, apex, ta, tb))
        used.add(int(apex))
    hull_points = np.array(sorted(used), dtype=int)
    return facets, hull_points


def _verify_support(points, facets, tol, n_samples=256):
    """Supporting-plane property of every facet over points and circle."""
    ang = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
    disc = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(n_samples)])
    test = np.vstack([points, disc]) if len(points) else disc
    for f in facets:
        if isinstance(f, PointTriangle):
            v1, v2, v3 = points[f.i], points[f.j], points[f.l]
        elif isinstance(f, BoundaryTriangle):
            v1, v2 = points[f.i], points[f.j]
            v3 = np.array([np.cos(f.theta), np.sin(f.theta), 0.0])
        else:
            # the cone is checked through its two extreme tangent planes
            for t in (f.theta_a, f.theta_b):
                w = 1.0 - f.mu * np.cos(t - f.phi)
                if w <= 0:
                    return False
                # plane through apex tangent at angle t: a x + b y + z = c
                a = f.h * np.cos(t) / w
                b = f.h * np.sin(t) / w
                c = a * np.cos(t) + b * np.sin(t)
                if np.any(test @ np.array([a, b, 1.0]) > c + tol):
                    return False
            continue
        nrm = np.cross(v2 - v1, v3 - v1)
        if nrm[2] <= 0:
            return False
        nrm = nrm / np.linalg.norm(nrm)
        off = test @ nrm - v1 @ nrm
        if np.any(off > tol):
            return False
    return True


def build_upper_boundary(pts, m=1024, max_doublings=5, verify=False):
    """Exact upper-boundary decomposition of the body over ``pts``.

    Discovery runs on an ``m``-gon sampling of the circle; on ambiguity the
    sampling is doubled up to ``max_doublings`` times before
    :class:`DegenerateConfiguration` is raised.  ``verify=True`` additionally
    checks the supporting-plane property of every facet.
    """
    points = check_point_set(pts)
    if len(points) == 0:
        return UpperBoundary(facets=[], hull_points=np.zeros(0, dtype=int),
                             points=points,
                             combinatorics=Combinatorics(
                                 0, np.zeros((0, 3), int), np.zeros((0, 2), int),
                                 np.zeros(0), np.zeros((0, 2), int),
                                 np.zeros(0, int), np.zeros(0, int),
                                 np.zeros(0, int), np.zeros(0, int), np.zeros(0)))
    last_exc = None
    m_try = int(m)
    for _ in range(max_doublings + 1):
        try:
            pt_tris, bts, fan_runs = discover_combinatorics(points, m_try)
            comb, theta = _assemble(points, m_try, pt_tris, bts, fan_runs)
            facets, hull_points = realize_facets(comb, points, theta)
            if verify:
                tol = plane_tolerance(float(points[:, 2].max()))
                if not _verify_support(points, facets, tol):
                    raise DegenerateConfiguration("supporting-plane check failed")
            return UpperBoundary(facets=facets, hull_points=hull_points,
                                 points=points, combinatorics=comb)
        except (DegenerateConfiguration, NoRoot) as exc:
            last_exc = exc
            m_try *= 2
    raise DegenerateConfiguration(
        f"combinatorics unresolved up to m={m_try // 2}: {last_exc}")


def validate_decomposition(ub):
    """Divergence-theorem self check: the vertical flux must equal pi.

    Returns a report dict with the flux, the residual against pi and the
    per-type contributions.
    """
    if len(ub.points) == 0:
        return {"flux": np.pi, "residual": 0.0, "triangles": 0.0, "cones": 0.0}
    tri_flux = 0.0
    cone_flux = 0.0
    for f in ub.facets:
        if isinstance(f, PointTriangle):
            v1, v2, v3 = ub.points[f.i], ub.points[f.j], ub.points[f.l]
        elif isinstance(f, BoundaryTriangle):
            v1, v2 = ub.points[f.i], ub.points[f.j]
            v3 = np.array([np.cos(f.theta), np.sin(f.theta), 0.0])
        else:
            ta, tb = f.theta_a - f.phi, f.theta_b - f.phi
            cone_flux += 0.5 * ((tb - ta) - f.mu * (np.sin(tb) - np.sin(ta)))
            continue
        tri_flux += 0.5 * np.cross(v2 - v1, v3 - v1)[2]
    flux = tri_flux + cone_flux
    return {"flux": float(flux), "residual": float(flux - np.pi),
            "triangles": float(tri_flux), "cones": float(cone_flux)}
