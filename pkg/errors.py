"""
Exception hierarchy shared by every package.
main.py maps ConfigError to exit code 1 and everything else to exit code 2.
"""


class EnsembleRobustnessError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(EnsembleRobustnessError):
    """Invalid configuration value, unknown key or malformed config file"""


class DomainError(ConfigError):
    """A bound input lies outside its mathematical domain"""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class PreconditionError(ConfigError):
    """A theorem precondition does not hold for the given inputs"""


class ArchitectureError(ConfigError):
    """Layer dimensions do not describe a valid perceptron"""


class ShapeError(EnsembleRobustnessError, ValueError):
    """Array dimensions do not match the model or dataset"""


class NumericError(EnsembleRobustnessError, ArithmeticError):
    """Non-finite values or underflow in a numeric routine"""


class FileFormatError(EnsembleRobustnessError):
    """IDX or model file with an unexpected magic number or version"""


class DatasetConsistencyError(EnsembleRobustnessError):
    """Image and label files disagree"""


class TruncatedFileError(EnsembleRobustnessError, OSError):
    """File ended before its header or payload was complete"""


class GenerationError(EnsembleRobustnessError):
    """Synthetic data could not be generated with the requested parameters"""


class TrainingDivergedError(EnsembleRobustnessError):
    """Training produced a non-finite loss or model"""

    def __init__(self, epoch, member=None, detail=""):
        self.epoch = epoch
        self.member = member
        self.detail = detail
        where = f"epoch {epoch}"
        if member is not None:
            where = f"ensemble member {member}, {where}"
        message = f"training diverged at {where}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ProtocolError(EnsembleRobustnessError):
    """Ensemble members or model files that cannot be measured together"""


class OracleScopeError(EnsembleRobustnessError):
    """Brute-force oracle asked to search a space it cannot enumerate"""


class CorrelationUndefinedError(EnsembleRobustnessError):
    """Correlation requested on too few points or a constant sequence"""
