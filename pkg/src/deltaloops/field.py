"""Scattering field of a plane wave on finitely many point interactions.

Units are hbar = m = 1, so the probability current is ``j = Im(conj(psi) grad psi)``
and the flow velocity is ``v = j / |psi|^2 = grad(arg psi)``.

The wavefunction is

    psi(x) = exp(i k <d, x>) + sum_j q_j exp(i k |x - y_j|) / (4 pi |x - y_j|)

with source amplitudes ``q = Gamma^{-1} (exp(i k <d, y_l>))_l`` and

    Gamma_jl = (alpha_j - i k / 4 pi) delta_jl - G_k(y_j - y_l),
    G_k(x) = exp(i k |x|) / (4 pi |x|)   (zero on the diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ResonanceError, SingularityError

FOUR_PI = 4.0 * np.pi
DEFAULT_COND_CAP = 1e12
DEFAULT_EXCLUSION = 1e-9
DEFAULT_RHO_FLOOR = 1e-14


def _frozen(a):
    a = np.array(a, dtype=a.dtype if isinstance(a, np.ndarray) else None, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScattererSet:
    """Positions ``y_j`` and strengths ``alpha_j`` of the point interactions.

    ``alpha = 0`` is a finite coupling, not the free case (that is ``alpha -> inf``).
    """

    positions: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        alpha = np.asarray(self.strengths, dtype=float).reshape(-1)
        if len(pos) != len(alpha):
            raise ConfigurationError(
                f"{len(pos)} positions but {len(alpha)} strengths"
            )
        if not np.all(np.isfinite(pos)):
            raise ConfigurationError("scatterer positions must be finite")
        if not np.all(np.isfinite(alpha)):
            raise ConfigurationError("scatterer strengths must be finite reals")
        pair = _coincident_pair(pos)
        if pair is not None:
            raise ConfigurationError(
                f"scatterers {pair[0]} and {pair[1]} are coincident"
            )
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "strengths", _frozen(alpha))

    def __len__(self):
        return len(self.strengths)

    def __eq__(self, other):
        if not isinstance(other, ScattererSet):
            return NotImplemented
        return np.array_equal(self.positions, other.positions) and np.array_equal(
            self.strengths, other.strengths
        )

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros(0))

    def min_separation(self):
        if len(self) < 2:
            return np.inf
        d = np.linalg.norm(self.positions[:, None] - self.positions[None], axis=-1)
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())


def _coincident_pair(pos):
    n = len(pos)
    for i in range(n):
        for j in range(i + 1, n):
            if np.array_equal(pos[i], pos[j]):
                return i, j
    return None


@dataclass(frozen=True, eq=False)
class IncidentWave:
    """Plane wave ``exp(i k <d, x>)``; the default direction is the first axis."""

    k: float
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        k = float(self.k)
        if not (np.isfinite(k) and k > 0):
            raise ConfigurationError(f"wavenumber must be positive, got {self.k}")
        d = np.asarray(self.direction, dtype=float).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ConfigurationError("incident direction must be a unit vector")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "direction", _frozen(d))

    def __eq__(self, other):
        if not isinstance(other, IncidentWave):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.direction, other.direction)


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    entries: np.ndarray
    k: float


@dataclass(frozen=True, eq=False)
class FieldState:
    """Solved scattering problem; immutable and safe to share between threads."""

    scatterers: ScattererSet
    wave: IncidentWave
    amplitudes: np.ndarray
    gamma: GammaMatrix
    exclusion_radius: float = DEFAULT_EXCLUSION

    @property
    def k(self):
        return self.wave.k

    def __len__(self):
        return len(self.scatterers)


@dataclass(frozen=True)
class FieldSample:
    psi: complex
    grad: np.ndarray
    rho: float
    current: np.ndarray
    velocity: Optional[np.ndarray]


def green(k, r):
    """Free outgoing Helmholtz kernel ``exp(ikr) / (4 pi r)``."""
    return np.exp(1j * k * r) / (FOUR_PI * r)


def assemble_gamma(scatterers: ScattererSet, k: float) -> GammaMatrix:
    if not k > 0:
        raise ConfigurationError(f"wavenumber must be positive, got {k}")
    pos = scatterers.positions
    n = len(scatterers)
    entries = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for l in range(j + 1, n):
            r = float(np.linalg.norm(pos[j] - pos[l]))
            if r == 0.0:
                raise ConfigurationError(f"scatterers {j} and {l} are coincident")
            entries[j, l] = entries[l, j] = -green(k, r)
    entries[np.diag_indices(n)] = scatterers.strengths - 1j * k / FOUR_PI
    return GammaMatrix(_frozen(entries), float(k))


def solve_amplitudes(gamma: GammaMatrix, rhs, cond_cap=DEFAULT_COND_CAP):
    """Solve ``Gamma q = rhs`` densely, refusing ill-conditioned systems."""
    a = gamma.entries
    rhs = np.asarray(rhs, dtype=complex)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_cap:
        raise ResonanceError(gamma.k, cond)
    q = np.linalg.solve(a, rhs)
    resid = np.linalg.norm(a @ q - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if resid >= 1e-10:
        raise ResonanceError(gamma.k, cond)
    return q


def solve_field_state(
    scatterers: ScattererSet,
    wave: IncidentWave,
    cond_cap=DEFAULT_COND_CAP,
    exclusion_radius=DEFAULT_EXCLUSION,
) -> FieldState:
    gamma = assemble_gamma(scatterers, wave.k)
    rhs = np.exp(1j * wave.k * (scatterers.positions @ wave.direction))
    q = solve_amplitudes(gamma, rhs, cond_cap)
    return FieldState(scatterers, wave, _frozen(q), gamma, float(exclusion_radius))


def _offsets(state, points):
    pts = np.asarray(points, dtype=float)
    diff = pts[..., None, :] - state.scatterers.positions
    r = np.linalg.norm(diff, axis=-1)
    if r.size and r.min() <= state.exclusion_radius:
        idx = np.unravel_index(np.argmin(r), r.shape)
        raise SingularityError(
            f"point within {state.exclusion_radius:g} of scatterer {idx[-1]}"
        )
    return pts, diff, r


def psi_many(state: FieldState, points) -> np.ndarray:
    """Vectorised wavefunction; ``points`` has shape ``(..., 3)``."""
    pts, _, r = _offsets(state, points)
    k = state.k
    plane = np.exp(1j * k * (pts @ state.wave.direction))
    return plane + (green(k, r) * state.amplitudes).sum(axis=-1)


def psi_grad_many(state: FieldState, points):
    """Return ``(psi, grad psi)`` with shapes ``(...)`` and ``(..., 3)``."""
    pts, diff, r = _offsets(state, points)
    k = state.k
    d = state.wave.direction
    plane = np.exp(1j * k * (pts @ d))
    g = green(k, r) * state.amplitudes
    psi = plane + g.sum(axis=-1)
    radial = g * (1j * k - 1.0 / r) / r
    grad = 1j * k * plane[..., None] * d + (radial[..., None] * diff).sum(axis=-2)
    return psi, grad


def eval_psi(state: FieldState, point) -> complex:
    return complex(psi_many(state, np.asarray(point, dtype=float).reshape(3)))


def eval_grad_psi(state: FieldState, point) -> np.ndarray:
    _, grad = psi_grad_many(state, np.asarray(point, dtype=float).reshape(3))
    return grad


def current_many(psi, grad):
    """Probability current ``Im(conj(psi) grad psi)``."""
    return np.imag(np.conj(psi)[..., None] * grad)


def eval_sample(state: FieldState, point, rho_floor=DEFAULT_RHO_FLOOR) -> FieldSample:
    psi, grad = psi_grad_many(state, np.asarray(point, dtype=float).reshape(3))
    psi = complex(psi)
    rho = abs(psi) ** 2
    current = current_many(psi, grad)
    velocity = current / rho if rho >= rho_floor else None
    return FieldSample(psi, grad, rho, current, velocity)


def local_expansion_coeffs(state: FieldState, index: int):
    """Coefficients of ``psi ~ A / (4 pi |x - y_j|) + B`` at scatterer ``index``.

    ``A = q_j``; ``B`` is the regular part of psi at ``y_j``.
    """
    n = len(state)
    if not 0 <= index < n:
        raise IndexError(f"scatterer index {index} out of range for {n} scatterers")
    k = state.k
    y = state.scatterers.positions
    q = state.amplitudes
    b = np.exp(1j * k * (y[index] @ state.wave.direction)) + q[index] * 1j * k / FOUR_PI
    for l in range(n):
        if l != index:
            b += q[l] * green(k, np.linalg.norm(y[index] - y[l]))
    return complex(q[index]), complex(b)
