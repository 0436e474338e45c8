"""Exception hierarchy shared by all modules."""


class LardError(Exception):
    """Base class for every error raised by this package."""


class NearSingular(LardError):
    """Point too close to the Earth's center for a geodetic inversion."""


class ParseError(LardError):
    """Malformed row or document."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(LardError):
    """Input parsed but violates a geometric or range invariant."""

    def __init__(self, message, problems=()):
        self.problems = list(problems)
        super().__init__(message)


class DegenerateRunway(LardError):
    pass


class InvalidFov(LardError):
    pass


class BehindCamera(LardError):
    """A point lies on or behind the image plane."""

    def __init__(self, message, corner=None):
        self.corner = corner
        super().__init__(message)


class DegenerateQuad(LardError):
    pass


class InvalidCrop(LardError):
    pass


class SchemaError(LardError):
    """Missing or mistyped field in a scenario / metadata document."""

    def __init__(self, message, field=None, frame_index=None):
        self.field = field
        self.frame_index = frame_index
        super().__init__(message)


class RangeError(LardError):
    def __init__(self, message, field=None, frame_index=None):
        self.field = field
        self.frame_index = frame_index
        super().__init__(message)
