from typing import Iterable
from typing import List
from typing import Optional


class ComplianceError(Exception):
    """Base class for every error raised by s2c_compliance."""


class FileAccessError(ComplianceError):
    """A catalog, pipeline, attestation or report file could not be read or written."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class SchemaError(ComplianceError):
    """A document does not follow its schema. ``location`` is a line/column or a field path."""

    def __init__(self, message: str, location: Optional[str] = None, errors: Optional[List[str]] = None):
        self.location = location
        self.errors = errors or []
        super().__init__(f"{location}: {message}" if location else message)


class UnresolvedReferenceError(ComplianceError):
    def __init__(self, offenders: Iterable[str]):
        self.offenders = sorted(offenders)
        super().__init__("Unresolved references: " + ", ".join(self.offenders))


class FilterError(ComplianceError):
    pass


class XmlError(ComplianceError):
    def __init__(self, message: str, line: int, column: int, offset: int):
        self.line = line
        self.column = column
        self.offset = offset
        super().__init__(f"line {line}, column {column} (byte offset {offset}): {message}")


class SubsetError(ComplianceError):
    pass


class MappingError(ComplianceError):
    def __init__(self, message: str, missing: Iterable[str]):
        self.missing = sorted(missing)
        super().__init__(message)


class UnclassifiedError(ComplianceError):
    def __init__(self, activity_ids: Iterable[str]):
        self.activity_ids = list(activity_ids)
        super().__init__("Activities without automation classification: " + ", ".join(self.activity_ids))


class StageError(ComplianceError):
    def __init__(self, name: str, accepted: List[str]):
        self.name = name
        self.accepted = accepted
        super().__init__(f"Unknown pipeline stage '{name}'. Accepted names: {', '.join(accepted)}")


class FormatError(ComplianceError):
    pass
