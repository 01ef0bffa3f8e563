"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI can emit a single parseable line on failure.
"""


class PhotonkinError(Exception):
    """Base class for all library errors."""

    @property
    def code(self):
        return type(self).__name__


# fock_mode
class TruncationTooSmall(PhotonkinError, ValueError):
    pass


class InsufficientSupport(PhotonkinError, ValueError):
    pass


class StepTooLarge(PhotonkinError, ValueError):
    pass


# photon_stats
class InvalidN(PhotonkinError, ValueError):
    pass


class ZeroMean(PhotonkinError, ValueError):
    pass


class UnsupportedSource(PhotonkinError, ValueError):
    pass


# momentum_geometry
class SingularMomentum(PhotonkinError, ValueError):
    pass


class SimplexHitsSingularity(PhotonkinError, ValueError):
    pass


class PathNotClosed(PhotonkinError, ValueError):
    pass


class NonConstantEnergy(PhotonkinError, ValueError):
    pass


class DegeneratePath(PhotonkinError, ValueError):
    pass


# wavepacket_1d
class ResolutionError(PhotonkinError, ValueError):
    pass


class AliasError(PhotonkinError, ValueError):
    pass


class DomainTooSmall(PhotonkinError, ValueError):
    pass


class WrapAroundError(PhotonkinError, ValueError):
    pass


# cli_harness
class ConfigError(PhotonkinError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
