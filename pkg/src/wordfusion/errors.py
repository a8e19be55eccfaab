"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit 1,
malformed data exits 2, network/file I/O failures exit 3.
"""


class WordFusionError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(WordFusionError):
    """Invalid configuration or command usage (exit code 1)."""


class FormatError(WordFusionError):
    """Malformed input data: embedding files, graph dumps, benchmark files (exit code 2)."""


class FetchError(WordFusionError):
    """Network retrieval failed with no cached copy to fall back on (exit code 3)."""


class BuildStageError(WordFusionError):
    """A pipeline stage failed; wraps the original error with stage context."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
