"""jamsense: 5G UAV air-to-ground jamming simulation and detection."""

__version__ = "0.1.0"

from .kernels import backend_name

__all__ = ["backend_name", "__version__"]
