"""Vortical structure of the probability flow around nodal lines.

Around a point of a nodal line with unit tangent ``t`` the field is probed on
a circle in the plane normal to ``t``, parametrised counter-clockwise about
``t``.  Two estimators of the vortex strength are reported: the winding
number of the phase (unwrapped phase increments) and the circulation
``oint grad(arg psi) . dr`` by periodic trapezoidal quadrature.  The circle
Fourier coefficients, with ``J_m(k r)`` divided out, give the coefficients
``c_m`` of the local expansion ``psi = sum_m c_m exp(i m phi) J_m(k rho)``.

Every function accepts either a :class:`~deltaloops.field.FieldState` or a
callable ``points -> (psi, grad)`` so synthetic fields can be probed directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Union

import numpy as np

from .bessel import besselj
from .errors import GeometryError, ProbeRadiusError, UndersamplingError
from .field import DEFAULT_RHO_FLOOR, FieldState, current_many, psi_grad_many
from .frames import tube_rings
from .tracer import NodalLoop

# wrapped increments at or beyond this are ambiguous
MAX_PHASE_INCREMENT = 0.75 * np.pi

FieldLike = Union[FieldState, Callable]


@dataclass
class VortexReport:
    winding: int
    circulation: float
    probe_radius: float
    samples: int
    c_abs: Dict[int, float] = field(default_factory=dict)


@dataclass
class TubeSamples:
    """Phase and flow velocity on a tube around a loop.

    Arrays are indexed ``[vertex, angle]``; ``phase`` lies in ``[0, 2 pi)``.
    """

    positions: np.ndarray
    phase: np.ndarray
    velocity: np.ndarray
    tangents: np.ndarray
    loop_id: int = 0


def _evaluator(state):
    if isinstance(state, FieldState):
        return lambda p: psi_grad_many(state, p)
    return state


def _circle(center, tangent, radius, samples):
    t = np.asarray(tangent, dtype=float)
    t = t / np.linalg.norm(t)
    helper = np.eye(3)[np.argmin(np.abs(t))]
    u = np.cross(t, helper)
    u /= np.linalg.norm(u)
    v = np.cross(t, u)
    phi = 2 * np.pi * np.arange(samples) / samples
    c, s = np.cos(phi), np.sin(phi)
    pts = np.asarray(center, dtype=float) + radius * (c[:, None] * u + s[:, None] * v)
    dpts = radius * (-s[:, None] * u + c[:, None] * v)
    return phi, pts, dpts


def _probe(state, center, tangent, radius, samples, rho_floor):
    if not radius > 0:
        raise GeometryError(f"probe radius must be positive, got {radius}")
    phi, pts, dpts = _circle(center, tangent, radius, samples)
    psi, grad = _evaluator(state)(pts)
    rho = np.abs(psi) ** 2
    if np.any(rho < rho_floor):
        raise ProbeRadiusError(
            f"|psi|^2 below {rho_floor:g} on the probe circle of radius {radius:g}"
        )
    return phi, psi, grad, rho, dpts


def _winding(psi):
    inc = np.angle(np.roll(psi, -1) / psi)
    worst = np.abs(inc).max()
    if worst >= MAX_PHASE_INCREMENT:
        raise UndersamplingError(f"phase jump {worst:.3f} rad between adjacent samples")
    return int(np.rint(inc.sum() / (2 * np.pi)))


def winding_number(
    state: FieldLike, center, tangent, radius, samples=720, rho_floor=DEFAULT_RHO_FLOOR
) -> VortexReport:
    """Winding of the phase and circulation of the flow velocity on one probe circle."""
    _, psi, grad, rho, dpts = _probe(state, center, tangent, radius, samples, rho_floor)
    w = _winding(psi)
    velocity = current_many(psi, grad) / rho[:, None]
    circulation = float(np.einsum("ij,ij->", velocity, dpts) * (2 * np.pi / samples))
    if abs(w) >= 2:
        warnings.warn(f"non-generic winding number {w} (higher-order zero)", stacklevel=2)
    return VortexReport(w, circulation, float(radius), int(samples))


def local_fourier(
    state: FieldLike, center, tangent, radius, m_max=4, samples=720, k=None
) -> Dict[int, complex]:
    """Expansion coefficients ``c_m`` for ``|m| <= m_max`` from one probe circle.

    ``k`` defaults to the state's wavenumber and is required for callables.
    Orders whose ``|J_m(k r)|`` underflows below 1e-300 are omitted.
    """
    if k is None:
        if not isinstance(state, FieldState):
            raise TypeError("k is required when probing a callable field")
        k = state.k
    if not radius > 0:
        raise GeometryError(f"probe radius must be positive, got {radius}")
    phi, pts, _ = _circle(center, tangent, radius, samples)
    psi, _ = _evaluator(state)(pts)
    out = {}
    for m in range(-m_max, m_max + 1):
        jm = besselj(m, k * radius)
        if abs(jm) < 1e-300:
            continue
        out[m] = complex(np.mean(psi * np.exp(-1j * m * phi)) / jm)
    return out


def vortex_report(state, center, tangent, radius, samples=720, m_max=4, k=None) -> VortexReport:
    """Winding, circulation and ``|c_m|`` on the same probe circle."""
    report = winding_number(state, center, tangent, radius, samples)
    coeffs = local_fourier(state, center, tangent, radius, m_max, samples, k)
    report.c_abs = {m: abs(c) for m, c in coeffs.items()}
    return report


def tube_samples(
    state: FieldState,
    loop: NodalLoop,
    tube_radius,
    angular_samples=16,
    loop_id=0,
    rho_floor=DEFAULT_RHO_FLOOR,
) -> TubeSamples:
    """Phase mod 2 pi and flow velocity on a tube of radius ``tube_radius`` around ``loop``."""
    verts = loop.distinct_vertices
    rings, (t, _, _) = tube_rings(verts, loop.closed, tube_radius, angular_samples)
    psi, grad = psi_grad_many(state, rings)
    rho = np.abs(psi) ** 2
    if np.any(rho < rho_floor):
        raise GeometryError("tube surface touches the nodal set")
    phase = np.mod(np.angle(psi), 2 * np.pi)
    phase[phase >= 2 * np.pi] = 0.0
    velocity = current_many(psi, grad) / rho[..., None]
    return TubeSamples(rings, phase, velocity, t, loop_id)


def phase_turns(phase_ring):
    """Signed turns and total variation (radians) of a cyclic phase sequence."""
    inc = np.angle(np.exp(1j * np.diff(np.append(phase_ring, phase_ring[0]))))
    return inc.sum() / (2 * np.pi), float(np.abs(inc).sum()), inc
