"""Exception hierarchy.

Every error raised on bad input derives from ``EvAcousticError`` and, where
the cause is an invalid argument, also from ``ValueError`` so callers can
catch either.
"""


class EvAcousticError(Exception):
    """Base class for all package errors."""


# audio_io
class MalformedContainer(EvAcousticError, ValueError):
    """File is not a RIFF/WAVE container or its chunks are inconsistent."""


class UnsupportedEncoding(EvAcousticError, ValueError):
    """WAVE encoding other than PCM 16/24/32-bit int or 32-bit float."""


class EmptyAudio(EvAcousticError, ValueError):
    pass


class IoFailure(EvAcousticError, OSError):
    pass


class RangeError(EvAcousticError, ValueError):
    pass


# spectral
class InvalidLength(EvAcousticError, ValueError):
    pass


class InvalidFftSize(EvAcousticError, ValueError):
    pass


class InvalidHop(EvAcousticError, ValueError):
    pass


class InvalidOverlap(EvAcousticError, ValueError):
    pass


class ClipTooShort(EvAcousticError, ValueError):
    pass


class BandOutOfRange(EvAcousticError, ValueError):
    pass


# filterbank
class InvalidBand(EvAcousticError, ValueError):
    pass


class InvalidOrder(EvAcousticError, ValueError):
    pass


class OrderTooSmall(InvalidOrder):
    """Requested order cannot meet the midband gain contract."""


class SampleRateMismatch(EvAcousticError, ValueError):
    pass


class ClipShorterThanFilter(EvAcousticError, ValueError):
    pass


class FreqOutOfRange(EvAcousticError, ValueError):
    pass


# detector
class SegmentTooShort(EvAcousticError, ValueError):
    pass


class EmptyInput(EvAcousticError, ValueError):
    pass


class InvalidConfig(EvAcousticError, ValueError):
    pass


# synth
class NonpositiveLength(EvAcousticError, ValueError):
    pass


class NonpositiveFrequency(EvAcousticError, ValueError):
    pass


class ClippingRisk(EvAcousticError, ValueError):
    pass


class NyquistViolation(EvAcousticError, ValueError):
    pass


class UnknownProfile(EvAcousticError, KeyError):
    pass


# report
class WindowOutOfRange(EvAcousticError, ValueError):
    pass
