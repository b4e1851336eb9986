"""End-to-end run: config -> field -> loops -> exports."""

from __future__ import annotations

import logging
import os

from .config import RunConfig
from .errors import DeltaLoopsError
from .export import LoopArchive, export_loops, export_tube_fields
from .field import solve_field_state
from .tracer import trace_all
from .vortex import tube_samples

log = logging.getLogger(__name__)


def build_state(config: RunConfig):
    return solve_field_state(config.scatterer_set(), config.wave)


def run_trace(config: RunConfig, output_dir=None):
    """Trace all loops, write the exports, and return ``(archive, written_paths)``."""
    state = build_state(config)
    loops = trace_all(state, config.trace)
    archive = LoopArchive(loops, config.fingerprint())
    out = output_dir or config.output_dir or "."
    paths = export_loops(archive, out, config.export.tube_radius, config.export.tube_sides)
    if config.probes:
        samples = []
        for probe in config.probes:
            ids = range(len(loops)) if probe.loop == "all" else [probe.loop]
            for lid in ids:
                if lid >= len(loops):
                    raise DeltaLoopsError(f"probe selects loop {lid} but only {len(loops)} were traced")
                samples.append(
                    tube_samples(state, loops[lid], probe.tube_radius, probe.angular_samples, loop_id=lid)
                )
        paths += export_tube_fields(samples, out)
    log.info("traced %d loops into %s", len(loops), os.path.abspath(out))
    return archive, paths
