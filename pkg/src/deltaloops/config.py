"""Run configuration: JSON loading, validation and canonical emission.

Example document::

    {
      "k": 2,
      "scatterers": [{"pos": [0, 0, 0], "alpha": 0}],
      "random": {"seed": 7, "count": 10, "box": [[-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]]},
      "trace": {"bounds": [[-3, 3], [-3, 3], [-3, 3]], "seed_resolution": 60},
      "probes": [{"loop": "all", "tube_radius": 0.1, "angular_samples": 16}],
      "export": {"tube_radius": 0.1, "tube_sides": 16},
      "output_dir": "out"
    }

Unknown keys are rejected; errors name the offending field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, ConfigurationError
from .field import IncidentWave, ScattererSet
from .tracer import TraceConfig

DEFAULT_RANDOM_BOX = ((-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5))


@dataclass(frozen=True)
class RandomScatterers:
    """Seeded uniform scatterers in a box, all with the same strength."""

    seed: int
    count: int
    box: Tuple[Tuple[float, float], ...] = DEFAULT_RANDOM_BOX
    alpha: float = 0.0
    min_separation: float = 0.4

    def generate(self, avoid=None, max_tries=100000):
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        placed = [] if avoid is None else [np.asarray(p) for p in avoid]
        out = []
        tries = 0
        while len(out) < self.count:
            tries += 1
            if tries > max_tries:
                raise ConfigurationError(
                    f"could not place {self.count} scatterers with separation "
                    f"{self.min_separation:g} in the box"
                )
            p = lo + (hi - lo) * rng.random(3)
            if all(np.linalg.norm(p - q) >= self.min_separation for q in placed):
                placed.append(p)
                out.append(p)
        return np.array(out).reshape(-1, 3)


@dataclass(frozen=True)
class Probe:
    loop: Union[int, str] = "all"
    tube_radius: float = 0.1
    angular_samples: int = 16


@dataclass(frozen=True)
class ExportOptions:
    tube_radius: float = 0.1
    tube_sides: int = 16


@dataclass(frozen=True)
class RunConfig:
    wave: IncidentWave
    scatterers: ScattererSet
    trace: TraceConfig = field(default_factory=TraceConfig)
    random: Optional[RandomScatterers] = None
    probes: Tuple[Probe, ...] = ()
    export: ExportOptions = field(default_factory=ExportOptions)
    output_dir: Optional[str] = None

    def scatterer_set(self) -> ScattererSet:
        """Explicit scatterers followed by the seeded random ones."""
        if self.random is None:
            return self.scatterers
        extra = self.random.generate(avoid=self.scatterers.positions)
        pos = np.concatenate([self.scatterers.positions, extra])
        alpha = np.concatenate([self.scatterers.strengths, np.full(len(extra), self.random.alpha)])
        return ScattererSet(pos, alpha)

    def fingerprint(self) -> str:
        return hashlib.sha256(emit_config(self).encode("utf-8")).hexdigest()


# -- validation helpers -----------------------------------------------------


def _keys(doc, path, allowed, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    for key in doc:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown key")
    for key in required:
        if key not in doc:
            raise ConfigError(_join(path, key), "missing required key")


def _join(path, key):
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def _number(value, path, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and not value > 0:
        raise ConfigError(path, "must be positive")
    if nonnegative and value < 0:
        raise ConfigError(path, "must be non-negative")
    return value


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _vector(value, path, length=3):
    if not isinstance(value, list) or len(value) != length:
        raise ConfigError(path, f"expected a list of {length} numbers")
    return [_number(v, _join(path, i)) for i, v in enumerate(value)]


def _box(value, path):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(path, "expected three [lo, hi] intervals")
    out = []
    for i, iv in enumerate(value):
        lo, hi = _vector(iv, _join(path, i), 2)
        if not hi > lo:
            raise ConfigError(_join(path, i), "interval must satisfy lo < hi")
        out.append((lo, hi))
    return tuple(out)


# -- loading ----------------------------------------------------------------

_TOP = ("k", "direction", "scatterers", "random", "trace", "probes", "export", "output_dir")
_TRACE = tuple(f.name for f in fields(TraceConfig))


def _load_scatterers(doc):
    if not isinstance(doc, list):
        raise ConfigError("scatterers", "expected a list")
    pos, alpha = [], []
    for i, item in enumerate(doc):
        p = _join("scatterers", i)
        _keys(item, p, ("pos", "alpha"), ("pos", "alpha"))
        pos.append(_vector(item["pos"], _join(p, "pos")))
        alpha.append(_number(item["alpha"], _join(p, "alpha")))
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if pos[i] == pos[j]:
                raise ConfigError("scatterers", f"scatterers {i} and {j} are coincident")
    return ScattererSet(np.array(pos).reshape(-1, 3), np.array(alpha))


def _load_trace(doc):
    _keys(doc, "trace", _TRACE)
    kw = {}
    for key, value in doc.items():
        p = _join("trace", key)
        if key == "bounds":
            kw[key] = _box(value, p)
        elif key in ("seed_resolution", "max_vertices"):
            kw[key] = _integer(value, p, minimum=1)
        else:
            kw[key] = _number(value, p, positive=True)
    try:
        return TraceConfig(**kw)
    except ValueError as exc:
        raise ConfigError("trace", str(exc)) from exc


def _load_random(doc):
    _keys(doc, "random", ("seed", "count", "box", "alpha", "min_separation"), ("seed", "count"))
    kw = {
        "seed": _integer(doc["seed"], "random.seed", minimum=0),
        "count": _integer(doc["count"], "random.count", minimum=0),
    }
    if "box" in doc:
        kw["box"] = _box(doc["box"], "random.box")
    if "alpha" in doc:
        kw["alpha"] = _number(doc["alpha"], "random.alpha")
    if "min_separation" in doc:
        kw["min_separation"] = _number(doc["min_separation"], "random.min_separation", positive=True)
    return RandomScatterers(**kw)


def _load_probes(doc):
    if not isinstance(doc, list):
        raise ConfigError("probes", "expected a list")
    out = []
    for i, item in enumerate(doc):
        p = _join("probes", i)
        _keys(item, p, ("loop", "tube_radius", "angular_samples"))
        kw = {}
        if "loop" in item:
            loop = item["loop"]
            if loop != "all":
                loop = _integer(loop, _join(p, "loop"), minimum=0)
            kw["loop"] = loop
        if "tube_radius" in item:
            kw["tube_radius"] = _number(item["tube_radius"], _join(p, "tube_radius"), positive=True)
        if "angular_samples" in item:
            kw["angular_samples"] = _integer(item["angular_samples"], _join(p, "angular_samples"), 3)
        out.append(Probe(**kw))
    return tuple(out)


def _load_export(doc):
    _keys(doc, "export", ("tube_radius", "tube_sides"))
    kw = {}
    if "tube_radius" in doc:
        kw["tube_radius"] = _number(doc["tube_radius"], "export.tube_radius", positive=True)
    if "tube_sides" in doc:
        kw["tube_sides"] = _integer(doc["tube_sides"], "export.tube_sides", minimum=3)
    return ExportOptions(**kw)


def config_from_dict(doc) -> RunConfig:
    _keys(doc, "", _TOP, ("k",))
    k = _number(doc["k"], "k", positive=True)
    direction = _vector(doc.get("direction", [1.0, 0.0, 0.0]), "direction")
    try:
        wave = IncidentWave(k, np.array(direction))
    except ConfigurationError as exc:
        raise ConfigError("direction", str(exc)) from exc
    scatterers = _load_scatterers(doc.get("scatterers", []))
    random = _load_random(doc["random"]) if "random" in doc else None
    trace = _load_trace(doc.get("trace", {}))
    probes = _load_probes(doc.get("probes", []))
    export = _load_export(doc.get("export", {}))
    output_dir = doc.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output_dir", "expected a string")
    cfg = RunConfig(wave, scatterers, trace, random, probes, export, output_dir)
    if random is not None:
        try:
            cfg.scatterer_set()
        except ConfigurationError as exc:
            raise ConfigError("random", str(exc)) from exc
    return cfg


def load_config(document: str) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from exc
    return config_from_dict(doc)


def load_config_file(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from exc
    return load_config(text)


# -- emission ---------------------------------------------------------------


def _box_list(box):
    return [[float(lo), float(hi)] for lo, hi in box]


def config_to_dict(cfg: RunConfig) -> dict:
    doc = {
        "k": cfg.wave.k,
        "direction": [float(v) for v in cfg.wave.direction],
        "scatterers": [
            {"pos": [float(v) for v in p], "alpha": float(a)}
            for p, a in zip(cfg.scatterers.positions, cfg.scatterers.strengths)
        ],
    }
    if cfg.random is not None:
        r = cfg.random
        doc["random"] = {
            "seed": r.seed,
            "count": r.count,
            "box": _box_list(r.box),
            "alpha": r.alpha,
            "min_separation": r.min_separation,
        }
    t = cfg.trace
    doc["trace"] = {
        "bounds": _box_list(t.bounds),
        "seed_resolution": int(t.seed_resolution),
        "newton_tol": t.newton_tol,
        "step": t.step,
        "max_vertices": int(t.max_vertices),
        "closure_tol": t.closure_tol,
        "crossing_tol": t.crossing_tol,
        "dedup_tol": t.dedup_tol,
    }
    doc["probes"] = [
        {"loop": p.loop, "tube_radius": p.tube_radius, "angular_samples": p.angular_samples}
        for p in cfg.probes
    ]
    doc["export"] = {"tube_radius": cfg.export.tube_radius, "tube_sides": cfg.export.tube_sides}
    if cfg.output_dir is not None:
        doc["output_dir"] = cfg.output_dir
    return doc


def emit_config(cfg: RunConfig) -> str:
    """Canonical JSON text; floats use the shortest round-tripping repr."""
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"
