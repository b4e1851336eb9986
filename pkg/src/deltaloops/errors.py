"""Exception hierarchy.

Everything raised on purpose by the library derives from
:class:`DeltaLoopsError`; the CLI maps those to exit code 1.
"""


class DeltaLoopsError(Exception):
    """Base class for domain errors."""


class ConfigurationError(DeltaLoopsError):
    """Invalid scatterer set or incident wave (e.g. coincident scatterers)."""


class ResonanceError(DeltaLoopsError):
    """The Gamma matrix is numerically singular at the requested wavenumber."""

    def __init__(self, k, condition):
        self.k = k
        self.condition = condition
        super().__init__(
            f"Gamma matrix is numerically singular at k = {k:g} "
            f"(condition estimate {condition:.3e})"
        )


class SingularityError(DeltaLoopsError):
    """Evaluation requested inside the exclusion radius of a scatterer."""


class RefinementError(DeltaLoopsError):
    """Gauss-Newton projection onto the nodal set did not converge."""


class TraceError(DeltaLoopsError):
    """Tracer precondition violated (start point not on a regular nodal line)."""


class GeometryError(DeltaLoopsError):
    """Tube or probe geometry is invalid for the requested loop."""


class UndersamplingError(DeltaLoopsError):
    """Phase increment between adjacent probe samples is too large to unwrap."""


class ProbeRadiusError(DeltaLoopsError):
    """A probe sample fell (numerically) on the nodal set."""


class ConfigError(DeltaLoopsError):
    """Run configuration failed to load; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
