"""Closed-form solution for a single point interaction at the origin.

With the incident wave along the first axis the field is cylindrically
symmetric and its nodal set is at most one circle perpendicular to that
axis.  Writing ``kappa = k / (4 pi alpha)`` and ``gamma = (arctan(kappa) - n pi) / k``
the circle sits at distance ``1 / sqrt(k^2 + 16 pi^2 alpha^2)`` from the origin
and has radius ``sqrt(-gamma (gamma + 2 distance))``; it exists iff
``-2 distance < gamma < 0``.  Branch ``n = 0`` is used for ``alpha < 0`` and
``n = 1`` for ``alpha >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import SingularityError


@dataclass(frozen=True)
class RingGeometry:
    axial_x: float
    radius: float
    distance: float
    gamma: float
    kappa: float
    branch_n: int

    def points(self, count=64, phase=0.0):
        """``count`` points evenly spaced on the ring."""
        phi = phase + 2 * np.pi * np.arange(count) / count
        return np.column_stack(
            [
                np.full(count, self.axial_x),
                self.radius * np.cos(phi),
                self.radius * np.sin(phi),
            ]
        )

    def distance_to(self, points):
        """Euclidean distance from each point to the ring circle."""
        p = np.atleast_2d(points)
        rho = np.hypot(p[:, 1], p[:, 2])
        return np.hypot(p[:, 0] - self.axial_x, rho - self.radius)


def psi_single(alpha: float, k: float, point) -> complex:
    x = np.asarray(point, dtype=float).reshape(3)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise SingularityError("single-center field is singular at the origin")
    return complex(
        np.exp(1j * k * x[0]) + np.exp(1j * k * r) / ((4 * np.pi * alpha - 1j * k) * r)
    )


def ring_distance(alpha, k):
    return 1.0 / math.sqrt(k * k + 16 * math.pi**2 * alpha * alpha)


def kappa_of(alpha, k):
    if alpha == 0:
        return math.inf
    return k / (4 * math.pi * alpha)


def branch_gamma(alpha, k, n):
    """``gamma`` on arctan branch ``n``; ``alpha = 0`` uses the ``kappa -> +inf`` limit."""
    return (math.atan(kappa_of(alpha, k)) - n * math.pi) / k


def ring_geometry(alpha: float, k: float) -> Optional[RingGeometry]:
    """Nodal ring of the single-center field, or ``None`` if there is none."""
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    n = 0 if alpha < 0 else 1
    dist = ring_distance(alpha, k)
    gamma = branch_gamma(alpha, k, n)
    if not -2 * dist < gamma < 0:
        return None
    r2 = -gamma * (gamma + 2 * dist)
    if r2 <= 0:
        return None
    return RingGeometry(
        axial_x=dist + gamma,
        radius=math.sqrt(r2),
        distance=dist,
        gamma=gamma,
        kappa=kappa_of(alpha, k),
        branch_n=n,
    )


def _threshold_equation(kappa):
    return math.atan(kappa) - math.pi + 2 * kappa / math.sqrt(1 + kappa * kappa)


@lru_cache(maxsize=None)
def kappa_threshold() -> float:
    """Smallest ``kappa`` for which a ring exists when ``alpha > 0`` (about 2.971)."""
    return brentq(_threshold_equation, 2.0, 4.0, xtol=1e-14, rtol=1e-15)


def alpha_over_k_threshold() -> float:
    """Upper bound on ``alpha / k`` for ring existence at ``alpha > 0``."""
    return 1.0 / (4 * math.pi * kappa_threshold())
