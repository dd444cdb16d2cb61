"""Exception hierarchy shared by all faultline components."""


class FaultlineError(Exception):
    """Base class for all errors raised by faultline."""


class NetlistError(FaultlineError):
    """A netlist document is malformed or violates a circuit invariant.

    ``path`` locates the offending element in the source JSON, e.g.
    ``ports[2].type`` or ``nets[0].to[1]``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class RecordError(FaultlineError):
    """An action could not be recorded (bad ref, width, direction, scope)."""


class ProgramValidationError(FaultlineError):
    """A program failed validation; carries the full diagnostic list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{d.path}: [{d.code}] {d.message}" for d in self.diagnostics)
        super().__init__(lines or "invalid program")


class CodegenError(FaultlineError):
    """A program cannot be lowered by a text emitter."""


class FormalError(FaultlineError):
    """A program or circuit cannot be lowered to the formal backend."""


class SamplingError(FaultlineError):
    """Constrained-random sampling failed.

    For rejection sampling, ``acceptance_estimate`` is the observed
    accepted/attempted ratio at the point of failure.
    """

    def __init__(self, message: str, acceptance_estimate: float | None = None):
        self.acceptance_estimate = acceptance_estimate
        super().__init__(message)


class UnsatConstraintsError(SamplingError):
    """The assumption conjunction has no solutions at all."""


class SpiceError(FaultlineError):
    """A program cannot be compiled to or checked against analog waveforms."""
