"""Tracing of nodal lines Re psi = 0 = Im psi as polylines.

Seeds come from grid cells where both the real and the imaginary part
change sign; each seed is projected onto the nodal set by minimum-norm
Gauss-Newton and then followed with a fixed-step predictor along
``grad Re psi x grad Im psi`` and a corrector confined to the plane normal
to that tangent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Tuple, Union

import numpy as np

from .errors import RefinementError, SingularityError, TraceError
from .field import FieldState, psi_grad_many, psi_many

log = logging.getLogger(__name__)

DEFAULT_BOUNDS = ((-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0))
# |psi| cap for accepting a grid-node local minimum as a seed
MINIMUM_SEED_CAP = 0.1
# grid chunk size (points) for seeding
_CHUNK = 1 << 16


@dataclass(frozen=True)
class TraceConfig:
    bounds: Tuple[Tuple[float, float], ...] = DEFAULT_BOUNDS
    seed_resolution: int = 40
    newton_tol: float = 1e-10
    step: float = 0.01
    max_vertices: int = 100000
    closure_tol: float = None
    crossing_tol: float = 1e-4
    dedup_tol: float = None

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) != 3 or any(not hi > lo for lo, hi in b):
            raise ValueError(f"bounds must be three nondegenerate intervals, got {self.bounds}")
        object.__setattr__(self, "bounds", b)
        if self.closure_tol is None:
            object.__setattr__(self, "closure_tol", self.step / 10)
        if self.dedup_tol is None:
            object.__setattr__(self, "dedup_tol", self.step / 2)
        for name in ("newton_tol", "step", "closure_tol", "crossing_tol", "dedup_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if int(self.seed_resolution) < 1:
            raise ValueError("seed_resolution must be at least 1")
        if int(self.max_vertices) < 4:
            raise ValueError("max_vertices must be at least 4")

    @property
    def lo(self):
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self):
        return np.array([b[1] for b in self.bounds])

    def contains(self, p):
        p = np.asarray(p)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def scaled(self, factor):
        """Same config with the box scaled about its center."""
        c = 0.5 * (self.lo + self.hi)
        h = 0.5 * (self.hi - self.lo) * factor
        bounds = tuple((float(c[i] - h[i]), float(c[i] + h[i])) for i in range(3))
        return replace(self, bounds=bounds)


Partner = Union[int, str]


@dataclass
class NodalLoop:
    """Ordered polyline on the nodal set.

    A closed loop repeats its first vertex (within ``closure_tol``) as the last one.
    """

    vertices: np.ndarray
    closed: bool
    length: float
    crossing_markers: List[Tuple[int, Partner]] = field(default_factory=list)

    def __len__(self):
        return len(self.vertices)

    @property
    def distinct_vertices(self):
        """Vertices without the closing duplicate."""
        return self.vertices[:-1] if self.closed else self.vertices


# -- local geometry ---------------------------------------------------------


def _jacobian(grad):
    return np.stack([grad.real, grad.imag], axis=-2)


def _grad_norm(grad):
    return np.sqrt(np.sum(np.abs(grad) ** 2, axis=-1))


def tangent_and_conditioning(state: FieldState, point):
    """Unit tangent ``grad R x grad I`` and ``|grad R x grad I| / (|grad R| |grad I|)``."""
    _, grad = psi_grad_many(state, np.asarray(point, dtype=float))
    a, b = grad.real, grad.imag
    c = np.cross(a, b)
    nc = np.linalg.norm(c)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if scale == 0.0 or nc == 0.0:
        return np.zeros(3), 0.0
    return c / nc, float(nc / scale)


def _is_node(psi, grad, tol):
    return abs(psi) <= tol * _grad_norm(grad)


def _plane_basis(t):
    """Orthonormal ``(u, v)`` with ``u x v = t``."""
    helper = np.eye(3)[np.argmin(np.abs(t))]
    u = np.cross(t, helper)
    u /= np.linalg.norm(u)
    v = np.cross(t, u)
    return u, v


# -- seeding ----------------------------------------------------------------


def _grid_axes(cfg):
    n = int(cfg.seed_resolution)
    return [np.linspace(lo, hi, n + 1) for lo, hi in cfg.bounds]


def _safe_psi(state, points, margin):
    """psi on ``points`` with NaN where a point is within ``margin`` of a scatterer."""
    out = np.full(len(points), np.nan + 0j)
    pos = state.scatterers.positions
    for s in range(0, len(points), _CHUNK):
        chunk = points[s : s + _CHUNK]
        if len(pos):
            r = np.linalg.norm(chunk[:, None, :] - pos, axis=-1).min(axis=1)
            ok = r > margin
        else:
            ok = np.ones(len(chunk), bool)
        if ok.any():
            out[s : s + _CHUNK][ok] = psi_many(state, chunk[ok])
    return out


def seed_candidates(state: FieldState, cfg: TraceConfig) -> np.ndarray:
    """Seed points: centers of cells where Re psi and Im psi both change sign,
    plus grid nodes where |psi| is a strict local minimum below a coarse cap."""
    xs, ys, zs = _grid_axes(cfg)
    shape = (len(xs), len(ys), len(zs))
    grid = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1).reshape(-1, 3)
    margin = max(state.exclusion_radius, 1e-6)
    psi = _safe_psi(state, grid, margin).reshape(shape)

    def corners(a):
        return np.stack(
            [a[i : a.shape[0] - 1 + i, j : a.shape[1] - 1 + j, l : a.shape[2] - 1 + l]
             for i in (0, 1) for j in (0, 1) for l in (0, 1)]
        )

    def changes_sign(a):
        c = corners(a)
        with np.errstate(invalid="ignore"):
            lo, hi = c.min(axis=0), c.max(axis=0)
        return (lo <= 0) & (hi >= 0) & (lo < hi) & np.all(np.isfinite(c), axis=0)

    cells = np.argwhere(changes_sign(psi.real) & changes_sign(psi.imag))
    cell_size = np.array([xs[1] - xs[0], ys[1] - ys[0], zs[1] - zs[0]])
    lo = np.array([xs[0], ys[0], zs[0]])
    seeds = [lo + (cells + 0.5) * cell_size]

    mag = np.abs(psi)
    if min(shape) >= 3:
        inner = mag[1:-1, 1:-1, 1:-1]
        is_min = np.isfinite(inner) & (inner < MINIMUM_SEED_CAP)
        for axis in range(3):
            for shift in (-1, 1):
                sl = [slice(1, -1)] * 3
                sl[axis] = slice(1 + shift, shape[axis] - 1 + shift)
                with np.errstate(invalid="ignore"):
                    is_min &= inner < mag[tuple(sl)]
        nodes = np.argwhere(is_min) + 1
        seeds.append(lo + nodes * cell_size)
    return np.concatenate(seeds).reshape(-1, 3)


# -- projection onto the nodal set -------------------------------------------


def _refine_batch(state, guesses, cfg, max_move=None, max_iter=50):
    """Minimum-norm Gauss-Newton on (Re psi, Im psi) for many guesses at once.

    Returns ``(points, converged_mask)``.
    """
    x = np.array(guesses, dtype=float).reshape(-1, 3)
    active = np.ones(len(x), bool)
    done = np.zeros(len(x), bool)
    pos = state.scatterers.positions
    margin = max(state.exclusion_radius, 1e-6)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        if len(pos):
            near = np.linalg.norm(xa[:, None] - pos, axis=-1).min(axis=1) <= margin
            active[idx[near]] = False
            idx, xa = idx[~near], xa[~near]
        inside = np.all((xa >= cfg.lo) & (xa <= cfg.hi), axis=1)
        active[idx[~inside]] = False
        idx, xa = idx[inside], xa[inside]
        if idx.size == 0:
            break
        psi, grad = psi_grad_many(state, xa)
        ok = np.abs(psi) <= cfg.newton_tol * _grad_norm(grad)
        done[idx[ok]] = True
        active[idx[ok]] = False
        idx, psi, grad = idx[~ok], psi[~ok], grad[~ok]
        if idx.size == 0:
            break
        jac = _jacobian(grad)
        f = np.stack([psi.real, psi.imag], axis=-1)
        delta = -np.einsum("nij,nj->ni", np.linalg.pinv(jac, rcond=1e-10), f)
        if max_move is not None:
            size = np.linalg.norm(delta, axis=1)
            big = size > max_move
            delta[big] *= (max_move / size[big])[:, None]
        x[idx] += delta
    return x, done


def refine_to_node(state: FieldState, guess, cfg: TraceConfig, max_iter=50) -> np.ndarray:
    """Project ``guess`` onto the nodal set; raises :class:`RefinementError`."""
    x, ok = _refine_batch(state, np.asarray(guess, dtype=float).reshape(1, 3), cfg,
                          max_iter=max_iter)
    if not ok[0]:
        raise RefinementError(f"Gauss-Newton did not converge from {np.asarray(guess)}")
    return x[0]


def _correct(state, x, t, tol, max_iter=12):
    """Newton in the plane through ``x`` normal to ``t``; ``None`` on failure."""
    u, v = _plane_basis(t)
    basis = np.column_stack([u, v])
    for _ in range(max_iter):
        try:
            psi, grad = psi_grad_many(state, x)
        except SingularityError:
            return None
        if _is_node(psi, grad, tol):
            return x
        m = _jacobian(grad) @ basis
        det = np.linalg.det(m)
        if abs(det) < 1e-300:
            return None
        y = np.linalg.solve(m, [-psi.real, -psi.imag])
        x = x + basis @ y
    return None


# -- continuation -----------------------------------------------------------


def _march(state, start, t0, cfg, allow_closure):
    """Follow the nodal line from ``start`` along ``t0``.

    Returns ``(vertices, status)`` with status in
    {"closed", "bounds", "max_vertices", "stalled", "crossing"}.
    """
    h0 = cfg.step
    verts = [start]
    x, t = start, t0
    arc = 0.0
    while True:
        if len(verts) >= cfg.max_vertices:
            return verts, "max_vertices"
        if allow_closure and arc > 3.5 * h0:
            gap = start - x
            d = np.linalg.norm(gap)
            if d < 1.5 * h0 and gap @ t > 0 and t @ t0 > 0.5:
                if d < h0 / 4 and len(verts) > 3:
                    verts[-1] = start.copy()
                else:
                    verts.append(start.copy())
                return verts, "closed"
        h = h0
        xc = None
        while h >= h0 / 4:
            xp = x + h * t
            cand = _correct(state, xp, t, cfg.newton_tol)
            if cand is not None and np.linalg.norm(cand - xp) <= 0.5 * h and (cand - x) @ t > 0:
                xc = cand
                break
            h /= 2
        if xc is None:
            return verts, "stalled"
        if not cfg.contains(xc):
            return verts, "bounds"
        tn, cond = tangent_and_conditioning(state, xc)
        arc += float(np.linalg.norm(xc - x))
        verts.append(xc)
        if cond < cfg.crossing_tol:
            return verts, "crossing"
        if tn @ t < 0:
            tn = -tn
        x, t = xc, tn


def _polyline_length(v):
    return float(np.linalg.norm(np.diff(v, axis=0), axis=1).sum()) if len(v) > 1 else 0.0


def trace_loop(state: FieldState, start, cfg: TraceConfig) -> NodalLoop:
    """Trace the nodal line through ``start`` until it closes or must stop.

    An unclosed trace is completed by marching backwards from ``start``; the
    result is then open (``closed=False``).  Crossings, where
    ``grad R x grad I`` degenerates, end the polyline with a ``"self"`` marker.
    """
    start = np.asarray(start, dtype=float).reshape(3)
    try:
        psi, grad = psi_grad_many(state, start)
    except SingularityError as exc:
        raise TraceError(str(exc)) from exc
    if not _is_node(psi, grad, cfg.newton_tol):
        raise TraceError(f"start point {start} is not on the nodal set (|psi| = {abs(psi):.3e})")
    t0, cond = tangent_and_conditioning(state, start)
    if cond <= cfg.crossing_tol:
        raise TraceError(f"tangent is degenerate at {start} (conditioning {cond:.3e})")

    fwd, status = _march(state, start, t0, cfg, allow_closure=True)
    if status == "closed":
        v = np.array(fwd)
        return NodalLoop(v, True, _polyline_length(v), [])

    markers = []
    if status == "crossing":
        markers.append(len(fwd) - 1)
    log.debug("open trace from %s stopped forward: %s", start, status)
    room = max(cfg.max_vertices - len(fwd) + 1, 4)
    bwd, bstatus = _march(state, start, -t0, replace(cfg, max_vertices=room), allow_closure=False)
    v = np.array(bwd[::-1] + fwd[1:])
    offset = len(bwd) - 1
    markers = [m + offset for m in markers]
    if bstatus == "crossing":
        markers.insert(0, 0)
    return NodalLoop(v, False, _polyline_length(v), [(m, "self") for m in markers])


# -- full extraction --------------------------------------------------------


def distance_to_polyline(points, vertices):
    """Minimum distance from each point to the segments of a polyline."""
    p = np.atleast_2d(points)
    v = np.asarray(vertices)
    if len(v) == 1:
        return np.linalg.norm(p - v[0], axis=1)
    a, b = v[:-1], v[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0] = 1.0
    out = np.empty(len(p))
    for s in range(0, len(p), 256):
        ap = p[s : s + 256, None, :] - a
        u = np.clip(np.einsum("nij,ij->ni", ap, ab) / denom, 0.0, 1.0)
        d = ap - u[..., None] * ab
        out[s : s + 256] = np.sqrt(np.einsum("nij,nij->ni", d, d)).min(axis=1)
    return out


def _near_any(point, loops, tol):
    return any(distance_to_polyline(point, lp.vertices)[0] < tol for lp in loops)


def _is_duplicate(loop, loops, cfg):
    if not loops:
        return False
    v = loop.vertices
    keep = np.ones(len(v), bool)
    for idx, _ in loop.crossing_markers:
        keep &= np.linalg.norm(v - v[idx], axis=1) > 3 * cfg.step
    v = v[keep]
    if len(v) == 0:
        return False
    return any(np.any(distance_to_polyline(v, other.vertices) < cfg.dedup_tol) for other in loops)


def _restart_past_crossing(state, loop, cfg):
    """Try to continue beyond each crossing marker along the incoming direction."""
    out = []
    v = loop.vertices
    for idx, _ in loop.crossing_markers:
        nb = idx - 1 if idx > 0 else 1
        if nb >= len(v):
            continue
        t = v[idx] - v[nb]
        t /= np.linalg.norm(t)
        x = _correct(state, v[idx] + 3 * cfg.step * t, t, cfg.newton_tol)
        if x is not None and cfg.contains(x):
            out.append(x)
    return out


def _cross_reference(loops, cfg):
    for i, lp in enumerate(loops):
        new = []
        for idx, _ in lp.crossing_markers:
            partner = "self"
            for j, other in enumerate(loops):
                if j != i and distance_to_polyline(lp.vertices[idx], other.vertices)[0] < 2 * cfg.step:
                    partner = j
                    break
            new.append((idx, partner))
        lp.crossing_markers = new


def trace_all(state: FieldState, cfg: TraceConfig) -> List[NodalLoop]:
    """Extract every nodal line reachable from the seed grid inside ``cfg.bounds``."""
    seeds = seed_candidates(state, cfg)
    if len(seeds) == 0:
        return []
    cell = float(np.max((cfg.hi - cfg.lo) / cfg.seed_resolution))
    points, ok = _refine_batch(state, seeds, cfg, max_move=cell)
    log.debug("%d seeds, %d refined", len(seeds), int(ok.sum()))
    queue = [p for p in points[ok]]
    loops: List[NodalLoop] = []
    while queue:
        p = queue.pop(0)
        if _near_any(p, loops, cfg.dedup_tol):
            continue
        try:
            loop = trace_loop(state, p, cfg)
        except TraceError as exc:
            log.debug("seed %s discarded: %s", p, exc)
            continue
        if _is_duplicate(loop, loops, cfg):
            continue
        loops.append(loop)
        if loop.crossing_markers:
            queue[:0] = _restart_past_crossing(state, loop, cfg)
    _cross_reference(loops, cfg)
    return loops


# -- exported-geometry properties ---------------------------------------------


def planarity(vertices):
    """Ratio of the smallest to the largest principal extent (0 for a planar loop)."""
    v = np.asarray(vertices, dtype=float)
    s = np.linalg.svd(v - v.mean(axis=0), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def planar_self_crossings(loop: NodalLoop):
    """Self-crossings of a closed loop projected onto its best-fit plane.

    Zero for a simple planar polygon, and hence an unknotted loop.  Only
    meaningful for near-planar loops; see :func:`planarity`.
    """
    v = loop.distinct_vertices
    c = v - v.mean(axis=0)
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    p = c @ vt[:2].T
    a = p
    b = np.roll(p, -1, axis=0) if loop.closed else p[1:]
    a = a[: len(b)]
    n = len(a)

    def orient(p0, p1, q):
        return (p1[..., 0] - p0[..., 0]) * (q[..., 1] - p0[..., 1]) - (
            p1[..., 1] - p0[..., 1]
        ) * (q[..., 0] - p0[..., 0])

    count = 0
    for i in range(n):
        j = np.arange(i + 2, n)
        if loop.closed and i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        d1 = orient(a[i], b[i], a[j])
        d2 = orient(a[i], b[i], b[j])
        d3 = orient(a[j], b[j], a[i])
        d4 = orient(a[j], b[j], b[i])
        count += int(np.sum((d1 * d2 < 0) & (d3 * d4 < 0)))
    return count
