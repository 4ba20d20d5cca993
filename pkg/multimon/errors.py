"""Exception hierarchy shared by every multimon module."""

from typing import Any, Dict, Optional


class MultimonError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(MultimonError):
    """Invalid input values (netlists, configs, targets)."""

    def __init__(self, message: str, node: Optional[int] = None):
        super().__init__(message)
        self.node = node


class DomainError(ConfigurationError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class TopologyError(ConfigurationError):
    """External flux applied to a circuit without a single inductive loop."""


class FluxTooLargeError(MultimonError):
    """No static phase configuration with every |phi| < pi/2."""


class InstabilityError(MultimonError):
    """Negative effective Josephson energy or an unstable linearization."""


class NearResonanceError(MultimonError):
    """A dispersive denominator came within the near-resonance guard."""

    def __init__(self, message: str, pair: tuple = ()):
        super().__init__(message)
        self.pair = pair


class RankDeficiencyError(MultimonError):
    """Projection set does not span the operator space."""


class FitError(MultimonError):
    """Benchmark decay fit failed."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DocumentParseError(ConfigurationError):
    """Unreadable or malformed input document."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class NetlistParseError(DocumentParseError):
    """Netlist document that cannot be read or validated."""


class ProgramParseError(DocumentParseError):
    """Gate program line that cannot be parsed."""
