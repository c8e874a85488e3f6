"""Exception hierarchy shared across the library.

Every error carries a short machine-readable ``code`` (its class name) so the
CLI can emit ``Code:detail`` lines without string matching.
"""
from __future__ import annotations


class SusxError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class MalformedHeader(SusxError):
    pass


class DimensionMismatch(SusxError):
    pass


class NonFiniteValue(SusxError):
    pass


class LabelOutOfRange(SusxError):
    pass


class IoFailure(SusxError):
    pass


class DegenerateRow(SusxError):
    def __init__(self, row: int):
        super().__init__(f"row {row} has near-zero norm")
        self.row = row


class EmptyClass(SusxError):
    def __init__(self, class_index: int):
        super().__init__(f"class {class_index} has no members")
        self.class_index = class_index


class DegenerateMean(SusxError):
    pass


class UnnormalizedInput(SusxError):
    pass


class InsufficientRows(SusxError):
    pass


class NotStochastic(SusxError):
    pass


class InsufficientCandidates(SusxError):
    pass


class MissingLabels(SusxError):
    pass


class InsufficientShots(SusxError):
    def __init__(self, class_index: int, have: int, need: int):
        super().__init__(
            f"class {class_index} has {have} rows, need {need}"
        )
        self.class_index = class_index


class LengthMismatch(SusxError):
    pass


class EmptyInput(SusxError):
    pass


class InvalidHyperParams(SusxError):
    pass


class InvalidGrid(SusxError):
    pass
