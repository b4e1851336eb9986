"""File outputs: loop CSV/OBJ, tube meshes, tube phase/current samples, archive.

CSV and OBJ numbers are written with 17 significant digits so files
round-trip losslessly and re-runs are byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from . import __version__
from .errors import DeltaLoopsError
from .frames import tube_rings
from .tracer import NodalLoop

LOOP_COLUMNS = ("loop_id", "vertex_index", "x", "y", "z", "closed", "crossing_flag")
PHASE_COLUMNS = ("loop_id", "vertex_index", "angle_index", "x", "y", "z", "phase")
CURRENT_COLUMNS = ("loop_id", "vertex_index", "angle_index", "x", "y", "z", "vx", "vy", "vz")


def _g(v):
    return "%.17g" % v


class ExportError(DeltaLoopsError):
    """An output file could not be written."""


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def _mkdir(directory):
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {directory}: {exc}") from exc


@dataclass
class LoopArchive:
    loops: List[NodalLoop]
    fingerprint: str
    version: str = __version__

    def to_json(self):
        doc = {
            "version": self.version,
            "fingerprint": self.fingerprint,
            "loops": [
                {
                    "closed": lp.closed,
                    "length": lp.length,
                    "crossing_markers": [[int(i), p] for i, p in lp.crossing_markers],
                    "vertices": lp.vertices.tolist(),
                }
                for lp in self.loops
            ],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        loops = [
            NodalLoop(
                np.array(d["vertices"], dtype=float).reshape(-1, 3),
                bool(d["closed"]),
                float(d["length"]),
                [(int(i), p) for i, p in d["crossing_markers"]],
            )
            for d in doc["loops"]
        ]
        return cls(loops, doc["fingerprint"], doc["version"])

    def matches(self, config):
        return self.fingerprint == config.fingerprint()


def loops_csv(loops: Iterable[NodalLoop]) -> str:
    lines = [",".join(LOOP_COLUMNS)]
    for lid, lp in enumerate(loops):
        flagged = {i for i, _ in lp.crossing_markers}
        closed = int(lp.closed)
        for i, (x, y, z) in enumerate(lp.vertices):
            lines.append(f"{lid},{i},{_g(x)},{_g(y)},{_g(z)},{closed},{int(i in flagged)}")
    return "\n".join(lines) + "\n"


def loops_obj(loops: Iterable[NodalLoop]) -> str:
    out = ["# nodal loops as OBJ polylines"]
    base = 1
    for lid, lp in enumerate(loops):
        v = lp.distinct_vertices
        out.append(f"o loop_{lid}")
        out.extend(f"v {_g(x)} {_g(y)} {_g(z)}" for x, y, z in v)
        idx = list(range(base, base + len(v)))
        if lp.closed:
            idx.append(base)
        out.append("l " + " ".join(map(str, idx)))
        base += len(v)
    return "\n".join(out) + "\n"


def tube_mesh(loop: NodalLoop, radius=0.1, sides=16):
    """Triangulated tube ``(vertices, faces)`` around a loop; faces are 0-based.

    Closed loops give a torus; open loops are capped at both ends.
    """
    v = loop.distinct_vertices
    rings, _ = tube_rings(v, loop.closed, radius, sides, check=False)
    n = len(v)
    verts = rings.reshape(-1, 3)
    faces = []
    last = n if loop.closed else n - 1
    for i in range(last):
        j = (i + 1) % n
        for s in range(sides):
            s2 = (s + 1) % sides
            a, b = i * sides + s, i * sides + s2
            c, d = j * sides + s2, j * sides + s
            faces.append((a, d, c))
            faces.append((a, c, b))
    if not loop.closed:
        start = len(verts)
        verts = np.vstack([verts, v[0], v[-1]])
        for s in range(sides):
            s2 = (s + 1) % sides
            faces.append((start, s, s2))
            faces.append((start + 1, (n - 1) * sides + s2, (n - 1) * sides + s))
    return verts, np.array(faces, dtype=int).reshape(-1, 3)


def tubes_obj(loops: Iterable[NodalLoop], radius=0.1, sides=16) -> str:
    out = [f"# tubular neighbourhoods of radius {_g(radius)}"]
    base = 1
    for lid, lp in enumerate(loops):
        verts, faces = tube_mesh(lp, radius, sides)
        out.append(f"o tube_{lid}")
        out.extend(f"v {_g(x)} {_g(y)} {_g(z)}" for x, y, z in verts)
        out.extend(f"f {a + base} {b + base} {c + base}" for a, b, c in faces)
        base += len(verts)
    return "\n".join(out) + "\n"


def export_loops(archive: LoopArchive, directory, tube_radius=0.1, tube_sides=16):
    """Write ``loops.csv``, ``loops.obj``, ``tubes.obj`` and ``archive.json``."""
    _mkdir(directory)
    return [
        _write(os.path.join(directory, "loops.csv"), loops_csv(archive.loops)),
        _write(os.path.join(directory, "loops.obj"), loops_obj(archive.loops)),
        _write(os.path.join(directory, "tubes.obj"), tubes_obj(archive.loops, tube_radius, tube_sides)),
        _write(os.path.join(directory, "archive.json"), archive.to_json()),
    ]


def export_tube_fields(samples, directory):
    """Write ``phase.csv`` and ``current.csv`` from :class:`TubeSamples` objects."""
    _mkdir(directory)
    phase = [",".join(PHASE_COLUMNS)]
    current = [",".join(CURRENT_COLUMNS)]
    for ts in samples:
        nv, na = ts.phase.shape
        for i in range(nv):
            for a in range(na):
                x, y, z = map(_g, ts.positions[i, a])
                head = f"{ts.loop_id},{i},{a},{x},{y},{z}"
                phase.append(f"{head},{_g(ts.phase[i, a])}")
                vx, vy, vz = map(_g, ts.velocity[i, a])
                current.append(f"{head},{vx},{vy},{vz}")
    return [
        _write(os.path.join(directory, "phase.csv"), "\n".join(phase) + "\n"),
        _write(os.path.join(directory, "current.csv"), "\n".join(current) + "\n"),
    ]


def read_obj(path):
    """Minimal OBJ reader: ``(vertices, faces, polylines)`` with 0-based indices."""
    verts, faces, lines = [], [], []
    with open(path, encoding="utf-8") as fh:
        for row in fh:
            parts = row.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
            elif parts[0] == "l":
                lines.append([int(p) - 1 for p in parts[1:]])
    return np.array(verts).reshape(-1, 3), faces, lines
