"""Exception types shared across the pipeline.

Every error carries enough context to map onto the CLI exit-code contract:
``InputError`` subclasses exit with 2, ``MismatchError`` subclasses with 3.
I/O problems surface as the builtin ``OSError`` and exit with 1.
"""


class FormulaGclError(Exception):
    """Base class for all package errors."""


class InputError(FormulaGclError, ValueError):
    """Invalid input data or configuration."""


class MismatchError(FormulaGclError):
    """Provenance or format-version mismatch between artifacts."""


class FormulaSyntaxError(InputError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset
        self.text = text


class CorpusError(InputError):
    def __init__(self, line: int, formula_id: str | None, cause: Exception):
        where = f"line {line}" + (f" (id {formula_id!r})" if formula_id else "")
        super().__init__(f"{where}: {cause}")
        self.line = line
        self.formula_id = formula_id
        self.cause = cause


class DuplicateIdError(InputError):
    def __init__(self, formula_id: str, line: int | None = None):
        suffix = f" on line {line}" if line is not None else ""
        super().__init__(f"duplicate formula id {formula_id!r}{suffix}")
        self.formula_id = formula_id
        self.line = line


class PoolTooSmall(InputError):
    pass


class IncompleteMap(InputError):
    pass


class EmptyVocabulary(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class BatchTooSmall(InputError):
    pass


class CorpusTooSmall(InputError):
    pass


class ZeroVector(InputError):
    pass


class NoRelevantJudgments(InputError):
    pass


class MalformedLine(InputError):
    def __init__(self, path, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.line = line


class ScoreRangeError(MalformedLine):
    pass


class DuplicateJudgment(MalformedLine):
    pass


class MissingCell(InputError):
    pass


class CorruptFile(InputError):
    """Truncated file or checksum failure."""


class CorruptCheckpoint(CorruptFile):
    pass


class VersionMismatch(MismatchError):
    pass


class ProvenanceMismatch(MismatchError):
    pass
