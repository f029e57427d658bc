"""Exception types raised across the recognition pipeline."""


class RxError(Exception):
    """Base class for all package errors."""


class DataFormatError(RxError):
    """Input data violates a documented file or value format."""


# imaging

class ImageTooSmall(RxError):
    def __init__(self, width, height):
        super().__init__(f"image {width}x{height} is smaller than the 3x3 kernel")
        self.width = width
        self.height = height


class CropTooLarge(RxError):
    def __init__(self, margin, width, height):
        super().__init__(
            f"crop margin {margin} must be < min({width}, {height}) / 4"
        )
        self.margin = margin


class ImageFormatError(DataFormatError):
    """Unreadable or unsupported image file."""


# corpus

class UnknownGlyph(RxError):
    def __init__(self, codepoint):
        super().__init__(f"no glyph for U+{ord(codepoint):04X} {codepoint!r}")
        self.codepoint = codepoint


class ParseError(DataFormatError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(DataFormatError):
    def __init__(self, line, med_id):
        super().__init__(f"line {line}: duplicate medicine id {med_id!r}")
        self.line = line
        self.id = med_id


class UnknownId(DataFormatError):
    def __init__(self, line, med_id):
        super().__init__(f"line {line}: unknown medicine id {med_id!r}")
        self.line = line
        self.id = med_id


# nnet / ctc

class ShapeMismatch(RxError):
    pass


class InfeasibleLabel(RxError):
    def __init__(self, label, frames):
        super().__init__(
            f"label of length {len(label)} cannot be emitted in {frames} frames"
        )
        self.label = list(label)
        self.frames = frames


class NonFiniteLoss(RxError):
    def __init__(self, epoch, batch):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class WeightFileError(DataFormatError):
    pass


class BadMagic(WeightFileError):
    pass


class VersionMismatch(WeightFileError):
    pass


class TruncatedFile(WeightFileError):
    pass


# lexicon / uam

class EmptyTransactionDb(RxError):
    pass


class NoCandidate(RxError):
    def __init__(self, raw):
        super().__init__(f"no database entry within range of {raw!r}")
        self.raw = raw


class EmptyInput(RxError):
    pass
