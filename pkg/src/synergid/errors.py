"""Exception types shared across the package."""


class SynergidError(Exception):
    """Base class for all package errors."""


class Unreachable(SynergidError):
    pass


class EmptySeries(SynergidError):
    pass


class SiteMissing(SynergidError):
    def __init__(self, site):
        super().__init__(f"trial has no samples for site {site}")
        self.site = site


class DegenerateTrial(SynergidError):
    pass


class FormatError(SynergidError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyFile(FormatError):
    def __init__(self, message="file contains no samples"):
        super().__init__(message)


class InsufficientData(SynergidError):
    pass


class DegenerateDesign(SynergidError):
    pass


class InvalidConfig(SynergidError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NonFiniteCost(SynergidError, ValueError):
    pass
