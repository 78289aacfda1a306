"""Watertight triangle meshes of the bodies, with PLY/OBJ writers.

The exact facets of the upper boundary are emitted verbatim; conical
pieces are tessellated at a caller-chosen angular resolution; the bottom
disc is fan-triangulated around the origin.  All rim vertices live in one
shared registry so the upper surface and the bottom fan agree edge for
edge, which makes the mesh watertight by construction.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (BoundaryTriangle, ConePiece, PointTriangle, TWO_PI,
                       build_upper_boundary)

_ANGLE_TOL = 1e-9


@dataclass
class Mesh:
    """Indexed triangle mesh with outward-oriented faces."""

    vertices: np.ndarray
    faces: np.ndarray

    def edge_counts(self):
        e = np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                       self.faces[:, [2, 0]]])
        e = np.sort(e, axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def check(self):
        """Vertex/edge/face counts, Euler characteristic, watertightness."""
        counts = self.edge_counts()
        V = len(self.vertices)
        F = len(self.faces)
        E = len(counts)
        return {
            "vertices": V,
            "edges": E,
            "faces": F,
            "euler_characteristic": V - E + F,
            "watertight": bool(np.all(counts == 2)),
        }


def _rim_registry(ub, resolution):
    """All rim angles: tangency points plus cone-arc subdivision points."""
    angles = []
    for f in ub.facets:
        if isinstance(f, BoundaryTriangle):
            angles.append(f.theta % TWO_PI)
        elif isinstance(f, ConePiece):
            width = f.theta_b - f.theta_a
            nseg = max(1, int(np.ceil(width / resolution)))
            for i in range(nseg + 1):
                angles.append((f.theta_a + width * i / nseg) % TWO_PI)
    if not angles:
        nseg = max(3, int(np.ceil(TWO_PI / resolution)))
        angles = list(TWO_PI * np.arange(nseg) / nseg)
    angles = np.sort(np.asarray(angles))
    keep = np.ones(len(angles), dtype=bool)
    for i in range(1, len(angles)):
        last = np.flatnonzero(keep[:i])[-1]
        if angles[i] - angles[last] <= _ANGLE_TOL:
            keep[i] = False
    angles = angles[keep]
    if len(angles) > 1 and (angles[0] + TWO_PI) - angles[-1] <= _ANGLE_TOL:
        angles = angles[:-1]
    return angles


def _rim_index(angles, theta):
    t = theta % TWO_PI
    i = int(np.searchsorted(angles, t))
    cands = [(i - 1) % len(angles), i % len(angles)]
    best = min(cands, key=lambda j: min(abs(angles[j] - t),
                                        TWO_PI - abs(angles[j] - t)))
    if min(abs(angles[best] - t), TWO_PI - abs(angles[best] - t)) > 1e-6:
        raise ValueError("rim angle missing from registry")
    return best


def _oriented(tri_idx, verts, upward):
    v1, v2, v3 = verts[tri_idx[0]], verts[tri_idx[1]], verts[tri_idx[2]]
    n3 = np.cross(v2 - v1, v3 - v1)[2]
    if (n3 < 0) == upward:
        return [tri_idx[0], tri_idx[2], tri_idx[1]]
    return list(tri_idx)


def body_mesh(points, resolution=TWO_PI / 128):
    """Watertight mesh of the body over ``points`` (the full orbit)."""
    points = np.atleast_2d(np.asarray(points, dtype=float)) \
        if np.size(points) else np.zeros((0, 3))
    if len(points) == 0:
        warnings.warn("flat body: exporting two coincident disc fans")
        nseg = max(3, int(np.ceil(TWO_PI / resolution)))
        t = TWO_PI * np.arange(nseg) / nseg
        rim = np.column_stack([np.cos(t), np.sin(t), np.zeros(nseg)])
        verts = np.vstack([[0.0, 0.0, 0.0], rim])
        faces = []
        for i in range(nseg):
            a, b = 1 + i, 1 + (i + 1) % nseg
            faces.append([0, a, b])      # top copy, facing up
            faces.append([0, b, a])      # bottom copy, facing down
        return Mesh(np.array(verts), np.array(faces, dtype=int))

    ub = build_upper_boundary(points)
    body = ub.points
    angles = _rim_registry(ub, resolution)
    rim = np.column_stack([np.cos(angles), np.sin(angles),
                           np.zeros(len(angles))])
    nb = len(body)
    verts = np.vstack([body, rim, [[0.0, 0.0, 0.0]]])
    center = nb + len(angles)
    faces = []

    for f in ub.facets:
        if isinstance(f, PointTriangle):
            faces.append(_oriented([f.i, f.j, f.l], verts, upward=True))
        elif isinstance(f, BoundaryTriangle):
            r = nb + _rim_index(angles, f.theta)
            faces.append(_oriented([f.i, f.j, r], verts, upward=True))
        else:
            width = f.theta_b - f.theta_a
            nseg = max(1, int(np.ceil(width / resolution)))
            sub = f.theta_a + width * np.arange(nseg + 1) / nseg
            idx = [nb + _rim_index(angles, t) for t in sub]
            if width >= TWO_PI - _ANGLE_TOL:
                idx[-1] = idx[0]
            for a, b in zip(idx[:-1], idx[1:]):
                if a != b:
                    faces.append(_oriented([f.i, a, b], verts, upward=True))

    n_rim = len(angles)
    for i in range(n_rim):
        a, b = nb + i, nb + (i + 1) % n_rim
        faces.append(_oriented([center, a, b], verts, upward=False))

    faces = np.array(faces, dtype=int)
    used = np.zeros(len(verts), dtype=bool)
    used[faces.reshape(-1)] = True
    remap = -np.ones(len(verts), dtype=int)
    remap[used] = np.arange(int(used.sum()))
    return Mesh(verts[used], remap[faces])


def mesh_resistance(mesh):
    """Sum of ``nu3^3 * area`` over the upward-facing triangles."""
    v = mesh.vertices
    f = mesh.faces
    n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    s = np.einsum("ij,ij->i", n, n)
    up = (n[:, 2] > 0) & (s > 0)
    s = np.where(s > 0, s, 1.0)
    return float(np.sum(np.where(up, n[:, 2] ** 3 / (2.0 * s), 0.0)))


def write_ply(mesh, path):
    """ASCII PLY with float coordinates at full precision."""
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(mesh.vertices)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for v in mesh.vertices:
        lines.append(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_obj(mesh, path):
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
