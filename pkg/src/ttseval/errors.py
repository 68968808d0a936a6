"""Exception hierarchy shared by all modules.

Everything raised on bad input derives from :class:`TTSEvalError`, which the
CLI maps to exit status 1.
"""


class TTSEvalError(ValueError):
    pass


class FormatError(TTSEvalError):
    """Malformed container or table (WAV header, NTB bundle, TSV columns)."""


class UnsupportedEncodingError(TTSEvalError):
    pass


class EmptyInputError(TTSEvalError):
    pass


class ShapeError(TTSEvalError):
    pass


class ValidationError(TTSEvalError):
    pass


class UndefinedRateError(TTSEvalError):
    """Error rate requested against an empty (normalized) reference."""


class InputTooShortError(TTSEvalError):
    pass


class SplitTooSmallError(TTSEvalError):
    pass


class AdapterError(TTSEvalError):
    """External ASR adapter failed; ``detail`` carries stderr or response body."""

    def __init__(self, message: str, detail: str = ""):
        super().__init__(message)
        self.detail = detail


class AdapterTimeoutError(AdapterError):
    pass
