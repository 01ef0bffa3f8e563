"""photonkin: photon statistics, momentum-space monopole geometry and
positive-energy single-photon wave packets."""

__version__ = "0.1.0"

from .kernels import BACKEND_NAME  # noqa: F401
