"""Bug reports and deletion-stable bug fingerprints."""

from __future__ import annotations

from dataclasses import dataclass

BUFFER_OVERFLOW = "buffer_overflow"

DEFINITE = "definite"
POSSIBLE = "possible"


@dataclass(frozen=True, slots=True)
class BugReport:
    kind: str
    array: str
    certainty: str  # definite | possible


@dataclass(frozen=True, slots=True)
class Fingerprint:
    """Bug identity keyed on kind and array name only.

    Token deletions shift line numbers but cannot rename the array of a
    surviving access, so this key is stable across reductions.
    """

    kind: str
    array: str

    def matches(self, report: BugReport) -> bool:
        return self.kind == report.kind and self.array == report.array

    def to_json(self) -> dict:
        return {"kind": self.kind, "array": self.array}

    @classmethod
    def from_json(cls, obj: dict) -> "Fingerprint":
        return cls(kind=obj["kind"], array=obj["array"])
