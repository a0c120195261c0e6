"""Exception types shared across the engine.

Each mixes in the closest builtin category so callers may catch either
the library base class or the conventional builtin (``ValueError``,
``LookupError``, ``TimeoutError``). Plain I/O failures are *not* wrapped;
they surface as ``OSError``.
"""


class MaskStackError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(MaskStackError, ValueError):
    """Two buffers that must share width/height do not."""


# -- label registry -----------------------------------------------------

class EmptyName(MaskStackError, ValueError):
    pass


class DuplicateName(MaskStackError, ValueError):
    pass


class DuplicateColor(MaskStackError, ValueError):
    pass


class ReservedColor(MaskStackError, ValueError):
    """Black (0, 0, 0) is the background and can never label a class."""


class UnknownLabel(MaskStackError, LookupError):
    pass


class SchemaViolation(MaskStackError, ValueError):
    """A config/spec/manifest file does not match its documented schema."""


# -- geometry -----------------------------------------------------------

class DomainError(MaskStackError, ValueError):
    """Curve parameter outside [0, 1]."""


class OpenPathError(MaskStackError, ValueError):
    """Operation requires a closed path."""


# -- rasterization ------------------------------------------------------

class DegeneratePolygonError(MaskStackError, ValueError):
    """Fewer than three vertices; no area to fill."""


# -- layer stack --------------------------------------------------------

class UnknownLayer(MaskStackError, LookupError):
    pass


# -- dataset ------------------------------------------------------------

class MissingImage(MaskStackError, FileNotFoundError):
    pass


class MissingMask(MaskStackError, FileNotFoundError):
    pass


class UnknownMaskColor(MaskStackError, ValueError):
    """Mask contains a non-black color absent from the label config."""


# -- data engineering ---------------------------------------------------

class EmptyMask(MaskStackError, ValueError):
    """Cutout extraction needs at least one set pixel."""


class EmptyLibrary(MaskStackError, LookupError):
    """A sampled label has no cutouts to draw from."""


# -- frame sources ------------------------------------------------------

class EndOfStream(MaskStackError):
    """A finite source (directory) has delivered its last frame."""


class SourceStalled(MaskStackError, TimeoutError):
    """No frame arrived within the stall timeout."""


class DecodeError(MaskStackError, ValueError):
    """Incoming bytes could not be decoded into a frame."""


class SlotOutOfRange(MaskStackError, ValueError):
    """Device slot index outside the supported range."""


class UnknownSource(MaskStackError, LookupError):
    """No source attached at the requested slot."""


# -- annotation service ---------------------------------------------------

class NoActiveSource(MaskStackError, LookupError):
    """The session has no frame source to read from."""


class InvalidTransition(MaskStackError, ValueError):
    """Session mode does not permit the requested operation."""
