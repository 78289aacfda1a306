"""Dihedral orbit expansion, fundamental sector and the symmetric objective.

The optimization variables live in the sector of opening angle pi/k; each
point is replaced by its orbit under the dihedral group of the regular
k-gon before the body is built.  Points on a symmetry axis are fixed by one
reflection, so only the k rotation images are emitted for them (structural
deduplication, never distance based).
"""

import numpy as np

from . import resistance
from .geometry import TWO_PI, build_upper_boundary

AXIS_TOL = 1e-12


def _rot(alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

_REFLECT = np.diag([1.0, -1.0, 1.0])  # reflection across the phi = 0 plane


def snap_to_axis(p, k, tol=AXIS_TOL):
    """Snap a near-axis sector point exactly onto its axis."""
    x, y, z = p
    r = np.hypot(x, y)
    if r < tol:
        return np.array([0.0, 0.0, z])
    phi = np.arctan2(y, x)
    if abs(phi) < tol:
        return np.array([r, 0.0, z])
    if abs(phi - np.pi / k) < tol:
        a = np.pi / k
        return np.array([r * np.cos(a), r * np.sin(a), z])
    return np.asarray(p, dtype=float)


def orbit_transforms(sector_pts, k):
    """Group elements realizing each sector point's orbit.

    Returns a list (one entry per sector point) of lists of 3x3 matrices;
    applying them to the point yields its distinct orbit images.
    """
    out = []
    for p in np.atleast_2d(np.asarray(sector_pts, dtype=float)):
        x, y, _ = snap_to_axis(p, k)
        r = np.hypot(x, y)
        phi = np.arctan2(y, x) if r > 0 else 0.0
        rots = [_rot(TWO_PI * j / k) for j in range(k)]
        if r < AXIS_TOL:
            out.append([np.eye(3)])
        elif abs(phi) < AXIS_TOL or abs(phi - np.pi / k) < AXIS_TOL:
            out.append(rots)
        else:
            out.append(rots + [R @ _REFLECT for R in rots])
    return out


def orbit(sector_pts, k):
    """Union of the dihedral images of the sector points."""
    if k is None or k < 2:
        raise ValueError("symmetry order k must be at least 2")
    pts = np.atleast_2d(np.asarray(sector_pts, dtype=float))
    if pts.size == 0:
        return np.zeros((0, 3))
    images = []
    for p, mats in zip(pts, orbit_transforms(pts, k)):
        q = snap_to_axis(p, k)
        images.extend(mat @ q for mat in mats)
    return np.array(images)


def project_to_sector(p, k, M=None):
    """Canonical orbit representative with azimuth in [0, pi/k].

    The height is clamped into (0, M] when ``M`` is given.
    """
    x, y, z = np.asarray(p, dtype=float)
    r = np.hypot(x, y)
    phi = np.arctan2(y, x) % (TWO_PI / k)
    if phi > np.pi / k:
        phi = TWO_PI / k - phi
    if M is not None:
        z = min(z, M)
    q = np.array([r * np.cos(phi), r * np.sin(phi), z])
    return snap_to_axis(q, k)


class FrozenObjective:
    """Fixed-combinatorics, fixed-orbit objective for safe differencing.

    Captures the orbit transforms and facet structure at a base
    configuration; subsequent evaluations only re-solve the closed-form
    tangencies, so the map stays smooth under small coordinate changes.
    Used for finite-difference Hessians inside the optimizers.
    """

    def __init__(self, sector_pts, k=None, m=1024):
        pts = np.atleast_2d(np.asarray(sector_pts, dtype=float))
        self.k = k
        self.n = len(pts)
        if k is None:
            self.T = np.eye(3)[None, :, :].repeat(self.n, axis=0)
            self.owner = np.arange(self.n)
        else:
            snapped = np.array([snap_to_axis(p, k) for p in pts])
            pts = snapped
            mats = []
            owner = []
            for idx, ms in enumerate(orbit_transforms(pts, k)):
                mats.extend(ms)
                owner.extend([idx] * len(ms))
            self.T = np.array(mats)
            self.owner = np.array(owner, dtype=int)
        self.base = pts
        images = np.einsum("nij,nj->ni", self.T, pts[self.owner])
        ub = build_upper_boundary(images, m=m)
        self.comb = ub.combinatorics
        self.upper_boundary = ub

    def __call__(self, sector_pts, want_grad=True):
        pts = np.asarray(sector_pts, dtype=float).reshape(self.n, 3)
        images = np.einsum("nij,nj->ni", self.T, pts[self.owner])
        value, grad = resistance.evaluate_fixed(self.comb, images,
                                                want_grad=want_grad)
        if not want_grad:
            return value, None
        back = np.einsum("nij,ni->nj", self.T, grad)
        sector_grad = np.zeros((self.n, 3))
        np.add.at(sector_grad, self.owner, back)
        return value, sector_grad


def evaluate_symmetric(sector_pts, k, m=1024, want_grad=True,
                       max_doublings=5):
    """Symmetric objective value and its sector gradient.

    The value is the plain resistance of the expanded orbit; the sector
    gradient is the chain-rule pullback, summing each image gradient
    transported back by the transpose of its generating isometry.
    """
    pts = np.atleast_2d(np.asarray(sector_pts, dtype=float))
    if pts.size == 0:
        val = float(np.pi)
        return (val, np.zeros((0, 3))) if want_grad else val
    transforms = orbit_transforms(pts, k)
    snapped = np.array([snap_to_axis(p, k) for p in pts])
    images = []
    owner = []
    for idx, (p, mats) in enumerate(zip(snapped, transforms)):
        for mat in mats:
            images.append(mat @ p)
            owner.append(idx)
    images = np.array(images)
    ub = build_upper_boundary(images, m=m, max_doublings=max_doublings)
    value, grad = resistance.evaluate_fixed(ub.combinatorics, images,
                                            want_grad=want_grad)
    if not want_grad:
        return value
    sector_grad = np.zeros_like(pts)
    pos = 0
    for idx, mats in enumerate(transforms):
        for mat in mats:
            sector_grad[idx] += mat.T @ grad[pos]
            pos += 1
    return value, sector_grad
