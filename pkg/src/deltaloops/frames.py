"""Polyline frames and tube rings.

Rotation-minimizing frames use the double-reflection rule of Wang, Juttler,
Zheng and Liu (2008).  On closed polylines the residual twist at the seam is
spread linearly in arc length so the frame is periodic.
"""

import numpy as np

from .errors import GeometryError


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise GeometryError("repeated polyline vertices")
    return v / n


def vertex_tangents(vertices, closed):
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        raise GeometryError("need at least two vertices")
    if closed:
        return _unit(np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0))
    t = np.empty_like(v)
    t[1:-1] = v[2:] - v[:-2]
    t[0] = v[1] - v[0]
    t[-1] = v[-1] - v[-2]
    return _unit(t)


def curvature_radii(vertices, closed):
    """Radius of the circle through each vertex and its two neighbours (inf at straight spots)."""
    v = np.asarray(vertices, dtype=float)
    if closed:
        a, b, c = np.roll(v, 1, axis=0), v, np.roll(v, -1, axis=0)
    else:
        a, b, c = v[:-2], v[1:-1], v[2:]
    ab = np.linalg.norm(b - a, axis=1)
    bc = np.linalg.norm(c - b, axis=1)
    ca = np.linalg.norm(a - c, axis=1)
    area2 = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    with np.errstate(divide="ignore"):
        radii = np.where(area2 > 0, ab * bc * ca / np.where(area2 > 0, 2 * area2, 1.0), np.inf)
    if not closed:
        radii = np.concatenate([[np.inf], radii, [np.inf]])
    return radii


def _perpendicular(t):
    helper = np.eye(3)[np.argmin(np.abs(t))]
    r = np.cross(t, helper)
    return r / np.linalg.norm(r)


def rotation_minimizing_frames(vertices, closed):
    """Return ``(T, U, V)``, each ``(n, 3)``, with ``U x V = T``."""
    x = np.asarray(vertices, dtype=float)
    t = vertex_tangents(x, closed)
    n = len(x)
    r = np.empty_like(x)
    r[0] = _perpendicular(t[0])
    steps = n if closed else n - 1
    r_end = None
    for i in range(steps):
        j = (i + 1) % n
        v1 = x[j] - x[i]
        c1 = v1 @ v1
        rl = r[i] - (2 / c1) * (v1 @ r[i]) * v1
        tl = t[i] - (2 / c1) * (v1 @ t[i]) * v1
        v2 = t[j] - tl
        c2 = v2 @ v2
        rn = rl - (2 / c2) * (v2 @ rl) * v2 if c2 > 1e-300 else rl
        rn /= np.linalg.norm(rn)
        if j == 0:
            r_end = rn
        else:
            r[j] = rn
    if closed:
        twist = np.arctan2(np.cross(r_end, r[0]) @ t[0], r_end @ r[0])
        seg = np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
        ang = twist * s
        b = np.cross(t, r)
        r = np.cos(ang)[:, None] * r + np.sin(ang)[:, None] * b
    u = r - np.einsum("ij,ij->i", r, t)[:, None] * t
    u = _unit(u)
    return t, u, np.cross(t, u)


def tube_rings(vertices, closed, radius, sides, check=True):
    """Ring points ``(n, sides, 3)`` of a tube around the polyline, plus the frames.

    With ``check`` a radius at or above the smallest local curvature radius
    (a self-intersecting tube) raises :class:`GeometryError`.
    """
    if not radius > 0:
        raise GeometryError(f"tube radius must be positive, got {radius}")
    x = np.asarray(vertices, dtype=float)
    rc = curvature_radii(x, closed)
    if check and radius >= rc.min():
        raise GeometryError(
            f"tube radius {radius:g} exceeds the local curvature radius {rc.min():.3g}"
        )
    t, u, v = rotation_minimizing_frames(x, closed)
    ang = 2 * np.pi * np.arange(sides) / sides
    ring = np.cos(ang)[None, :, None] * u[:, None, :] + np.sin(ang)[None, :, None] * v[:, None, :]
    return x[:, None, :] + radius * ring, (t, u, v)
