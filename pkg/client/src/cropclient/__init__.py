"""Socket client presenting the remote crop environment as a gym-style loop."""

from .client import (
    ActionBoundError,
    ActionSpace,
    BoundedScalar,
    EnvConnectionError,
    ObservationSpace,
    OrderingError,
    RemoteEnv,
    RemoteEnvError,
    ServerError,
    VariableSpec,
    WireFormatError,
)

__version__ = "0.1.0"

__all__ = [
    "ActionBoundError",
    "ActionSpace",
    "BoundedScalar",
    "EnvConnectionError",
    "ObservationSpace",
    "OrderingError",
    "RemoteEnv",
    "RemoteEnvError",
    "ServerError",
    "VariableSpec",
    "WireFormatError",
]
