"""Exception types shared across the package."""


class KagnnError(Exception):
    """Base class for errors raised by this package."""


class MoleculeParseError(KagnnError, ValueError):
    """Malformed molecule input (canonical JSON or SDF).

    The message always names the offending location: source path when
    known, record or line number, and the field that failed.
    """

    def __init__(self, message, *, source=None, line=None, record=None):
        parts = []
        if source is not None:
            parts.append(str(source))
        if record is not None:
            parts.append(f"record {record}")
        if line is not None:
            parts.append(f"line {line}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.source = source
        self.line = line
        self.record = record


class FeaturizationError(KagnnError, ValueError):
    """Input molecule cannot be turned into a valid graph (unknown
    element, coincident atoms, bad cutoff, ...)."""


class EvaluationError(KagnnError, ValueError):
    """No evaluation metric can be produced (for example every task is
    single-class under the mask)."""


class TrainingDivergedError(KagnnError, RuntimeError):
    """Training hit a non-finite loss or gradient; carries the batch
    index where it happened."""

    def __init__(self, message, *, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class GradientCheckError(KagnnError, RuntimeError):
    """An analytic gradient disagreed with its finite-difference probe
    beyond tolerance."""
