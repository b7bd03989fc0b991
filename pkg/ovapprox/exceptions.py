"""Custom exceptions for ov-approx"""


class OVApproxError(Exception):
    """Base exception for ov-approx errors"""

    pass


class InvalidArgumentError(OVApproxError, ValueError):
    """Raised when arguments or instance shapes are invalid"""

    pass


class DatasetFormatError(InvalidArgumentError):
    """Raised when a dataset text file is malformed"""

    pass


class ConfigurationError(InvalidArgumentError):
    """Raised when an OVAPPROX_* environment value cannot be parsed"""

    pass


class ResourceLimitError(OVApproxError):
    """Raised when a configured size cap would be exceeded"""

    pass


class ProofSpaceOverflowError(ResourceLimitError):
    """Raised when Merlin's proof list grows past its cap"""

    pass


class CertificationError(OVApproxError):
    """Raised when a polynomial fails exact certification"""

    def __init__(self, message: str, t: int):
        super().__init__(message)
        self.t = t
