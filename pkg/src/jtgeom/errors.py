"""Exception hierarchy.

Every error carries a stable string ``code`` (used in JSON envelopes) and the
process exit code the CLI maps it to: 2 for configuration problems, 3 for
capacity, 4 for numerical (resolution / degeneracy) failures.
"""


class JTError(Exception):
    code = "error"
    exit_code = 1


class ConfigError(JTError, ValueError):
    code = "config-error"
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class ModelNotFoundError(ConfigError, KeyError):
    code = "model-not-found"

    def __str__(self):
        return self.args[0] if self.args else ""


class InvalidParameterError(ConfigError):
    code = "invalid-parameter"


class InvalidGeometryError(JTError, ValueError):
    code = "invalid-geometry"
    exit_code = 2


class InvalidRotationError(JTError, ValueError):
    code = "invalid-rotation"
    exit_code = 2


class InvalidPerturbationError(JTError, ValueError):
    code = "invalid-perturbation"
    exit_code = 2


class UnsupportedModelError(JTError, ValueError):
    code = "unsupported-model"
    exit_code = 2


class VacuousInputError(JTError, ValueError):
    code = "vacuous-input"
    exit_code = 2


class CapacityError(JTError, MemoryError):
    code = "capacity"
    exit_code = 3


class NumericalError(JTError, ArithmeticError):
    code = "numerical"
    exit_code = 4


class DegenerateTroughError(NumericalError):
    code = "degenerate-trough"


class DegeneracyError(NumericalError):
    code = "degeneracy"


class DegeneracyOnPathError(DegeneracyError):
    code = "degeneracy-on-path"


class ResolutionError(NumericalError):
    code = "resolution"


class SolverError(NumericalError):
    code = "solver"

    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)
