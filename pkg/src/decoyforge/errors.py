"""Exception types raised across decoyforge."""


class DecoyForgeError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class MalformedRecord(DecoyForgeError):
    pass


class DuplicatePort(DecoyForgeError):
    pass


class EmptyCorpus(DecoyForgeError):
    pass


class InvalidSpec(DecoyForgeError):
    pass


class InvalidMatrix(DecoyForgeError):
    pass


class LabelMismatch(DecoyForgeError):
    pass


class ConditionRequired(DecoyForgeError):
    pass


class ConditionNotAllowed(DecoyForgeError):
    pass


class IoFailure(DecoyForgeError):
    pass


class VersionMismatch(DecoyForgeError):
    pass


class NotNormalized(DecoyForgeError):
    pass


class DegenerateClustering(DecoyForgeError):
    pass


class UnknownPersonality(DecoyForgeError):
    pass


class PoolExhausted(DecoyForgeError):
    pass


class HoneydSyntaxError(DecoyForgeError):
    """Raised by the configuration checker; carries the offending line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
