"""Exception hierarchy. The CLI maps each class onto an exit code."""


class VCausalError(Exception):
    pass


class ValidationError(VCausalError, ValueError):
    """Malformed input: bad file line, bad config key, broken invariant."""


class Dut1FormatError(ValidationError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TableRangeError(ValidationError):
    """Requested instant falls outside the span of a ΔUT1 table."""


class OutOfValidityError(VCausalError, ValueError):
    """Physics inputs outside the range where the bound formula holds."""
