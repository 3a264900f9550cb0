"""Exception hierarchy shared by the simulator, the CLI and the HTTP surface.

Every error carries a dotted ``category`` and the process exit code the CLI
uses for it. Categories and exit codes are stable across versions.
"""
from typing import Optional


class WeightedFPPError(Exception):
    category = "runtime.error"
    exit_code = 4

    def __init__(self, message: str, category: Optional[str] = None):
        super().__init__(message)
        if category is not None:
            self.category = category

    def to_dict(self) -> dict:
        return {"category": self.category, "message": str(self), "exit_code": self.exit_code}


class UsageError(WeightedFPPError, ValueError):
    category = "usage.invalid"
    exit_code = 2


class ConfigError(WeightedFPPError, ValueError):
    category = "config.invalid"
    exit_code = 3


class DomainError(WeightedFPPError, ValueError):
    category = "runtime.domain"


class PreconditionError(WeightedFPPError, ValueError):
    category = "runtime.precondition"


class DimensionError(WeightedFPPError, ValueError):
    category = "runtime.dimension"


class SingularityError(WeightedFPPError, ValueError):
    category = "runtime.singularity"


class VertexCapExceeded(WeightedFPPError, RuntimeError):
    category = "runtime.vertex_cap"


class DisconnectedDomainError(WeightedFPPError, RuntimeError):
    category = "runtime.disconnected"


class InsufficientSampleError(WeightedFPPError, RuntimeError):
    category = "runtime.insufficient_sample"
