"""Numerical self-checks of a solved field.

The checks compare the analytic field against independent finite-difference
and quadrature estimates:

* Helmholtz residual ``|lap psi + k^2 psi| / (k^2 |psi| + 1e-12)`` with a
  7-point Laplacian, ``h = 1e-3``;
* analytic gradient against central differences, ``h = 1e-5``;
* the point-interaction relation between the singular and regular parts
  of psi at each scatterer;
* net flux of the probability current through small closed boxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .field import FieldState, current_many, local_expansion_coeffs, psi_grad_many, psi_many

HELMHOLTZ_TOL = 1e-4
GRADIENT_TOL = 1e-6
BOUNDARY_TOL = 1e-10
FLUX_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self):
        return bool(self.worst < self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<22} worst {self.worst:.3e}  (tol {self.tol:.0e})"


def random_points(state: FieldState, count, rng, bounds, min_distance=0.1):
    """Uniform points in ``bounds`` at least ``min_distance`` from every scatterer."""
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    pos = state.scatterers.positions
    out = []
    while len(out) < count:
        p = lo + (hi - lo) * rng.random(3)
        if len(pos) == 0 or np.linalg.norm(pos - p, axis=1).min() >= min_distance:
            out.append(p)
    return np.array(out).reshape(-1, 3)


def helmholtz_residuals(state: FieldState, points, h=1e-3, order=4):
    """``|lap psi + k^2 psi| / (k^2 |psi|)`` with a central-difference Laplacian.

    ``order`` is 2 (7-point stencil) or 4 (13-point stencil).
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    pts = np.atleast_2d(points)
    k2 = state.k**2
    psi = psi_many(state, pts)
    if order == 2:
        taps = ((1.0, 1.0),)
        centre = -6.0
    else:
        taps = ((1.0, 4.0 / 3.0), (2.0, -1.0 / 12.0))
        centre = -7.5
    lap = centre * psi
    for e in np.eye(3):
        for m, w in taps:
            lap = lap + w * (psi_many(state, pts + m * h * e) + psi_many(state, pts - m * h * e))
    lap /= h * h
    return np.abs(lap + k2 * psi) / (k2 * np.abs(psi) + 1e-12)


def gradient_errors(state: FieldState, points, h=1e-5):
    """Worst componentwise error of the analytic gradient, relative to ``|grad psi|``."""
    pts = np.atleast_2d(points)
    _, grad = psi_grad_many(state, pts)
    fd = np.stack(
        [(psi_many(state, pts + h * e) - psi_many(state, pts - h * e)) / (2 * h) for e in np.eye(3)],
        axis=-1,
    )
    scale = np.sqrt(np.sum(np.abs(grad) ** 2, axis=-1))
    return np.abs(fd - grad).max(axis=-1) / np.maximum(scale, 1e-300)


def boundary_residuals(state: FieldState, sign=-1.0):
    """``|B_j + sign * alpha_j A_j|`` for every scatterer.

    With the Gamma-matrix convention used by :mod:`deltaloops.field` the
    regular part obeys ``B_j = alpha_j A_j``, so the default ``sign=-1``
    vanishes to rounding.
    """
    out = []
    for j, alpha in enumerate(state.scatterers.strengths):
        a, b = local_expansion_coeffs(state, j)
        out.append(abs(b + sign * alpha * a))
    return np.array(out)


def box_flux(state: FieldState, center, edge=0.05, order=8):
    """Net outward flux of j through a cube, and that flux normalised by area * max|j|."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * edge
    u = half * nodes
    w = half * weights
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(w, w)
    c = np.asarray(center, dtype=float)
    total = 0.0
    jmax = 0.0
    for axis in range(3):
        a1, a2 = [i for i in range(3) if i != axis]
        for side in (-1.0, 1.0):
            pts = np.empty(uu.shape + (3,))
            pts[..., axis] = c[axis] + side * half
            pts[..., a1] = c[a1] + uu
            pts[..., a2] = c[a2] + vv
            psi, grad = psi_grad_many(state, pts)
            j = current_many(psi, grad)
            total += side * np.sum(ww * j[..., axis])
            jmax = max(jmax, float(np.linalg.norm(j, axis=-1).max()))
    area = 6 * edge * edge
    return total, abs(total) / max(area * jmax, 1e-300)


def run_checks(
    state: FieldState, rng, bounds, n_points=100, n_boxes=10, min_distance=0.1
) -> List[CheckResult]:
    pts = random_points(state, n_points, rng, bounds, min_distance)
    results = [
        CheckResult("helmholtz residual", float(helmholtz_residuals(state, pts).max()), HELMHOLTZ_TOL),
        CheckResult("gradient vs FD", float(gradient_errors(state, pts).max()), GRADIENT_TOL),
    ]
    if len(state):
        results.append(
            CheckResult("boundary B = alpha*A", float(boundary_residuals(state).max()), BOUNDARY_TOL)
        )
    # box corners must stay clear of the scatterers
    centers = random_points(state, n_boxes, rng, bounds, min_distance=0.1)
    flux = max(box_flux(state, c)[1] for c in centers)
    results.append(CheckResult("current box flux", float(flux), FLUX_TOL))
    return results
