"""Nodal loops and probability-current vortices for scattering on point interactions."""

__version__ = "0.1.0"

from .field import (
    FieldSample,
    FieldState,
    GammaMatrix,
    IncidentWave,
    ScattererSet,
    assemble_gamma,
    eval_grad_psi,
    eval_psi,
    eval_sample,
    local_expansion_coeffs,
    solve_field_state,
)
from .single_center import RingGeometry, kappa_threshold, psi_single, ring_geometry
from .tracer import NodalLoop, TraceConfig, refine_to_node, seed_candidates, trace_all, trace_loop
from .vortex import VortexReport, local_fourier, tube_samples, winding_number

__all__ = [
    "FieldSample",
    "FieldState",
    "GammaMatrix",
    "IncidentWave",
    "NodalLoop",
    "RingGeometry",
    "ScattererSet",
    "TraceConfig",
    "VortexReport",
    "assemble_gamma",
    "eval_grad_psi",
    "eval_psi",
    "eval_sample",
    "kappa_threshold",
    "local_expansion_coeffs",
    "local_fourier",
    "psi_single",
    "refine_to_node",
    "ring_geometry",
    "seed_candidates",
    "solve_field_state",
    "trace_all",
    "trace_loop",
    "tube_samples",
    "winding_number",
]
