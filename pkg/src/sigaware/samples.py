"""Sample records and JSONL serialization.

One sample per line: {"id","code","label","bug","origin","parent_id",
"metrics"}; "bug" is {"kind","array"} or null, "metrics" carries the
cached complexity vector.  Token sequences are not serialized: the
canonical code round-trips through the tokenizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from sigaware import lang
from sigaware.bugs import Fingerprint
from sigaware.errors import DataError
from sigaware.metrics import ComplexityVector, measure
from sigaware.tokens import Token, texts

ORIGIN_BASE = "base"
ORIGIN_AUGMENTED = "augmented"

_FIELDS = ("id", "code", "label", "bug", "origin", "parent_id", "metrics")


@dataclass(slots=True)
class Sample:
    id: str
    code: str
    tokens: list[Token]
    label: int
    bug: Fingerprint | None
    origin: str
    parent_id: str | None
    metrics: ComplexityVector

    def token_texts(self) -> tuple[str, ...]:
        return texts(self.tokens)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "code": self.code,
            "label": self.label,
            "bug": self.bug.to_json() if self.bug is not None else None,
            "origin": self.origin,
            "parent_id": self.parent_id,
            "metrics": self.metrics.to_json(),
        }


def build_sample(
    sample_id: str,
    tokens: list[Token],
    label: int,
    bug: Fingerprint | None,
    origin: str = ORIGIN_BASE,
    parent_id: str | None = None,
) -> Sample:
    """Construct a sample from tokens, verifying and caching metrics."""
    report, ast = lang.check_program(tokens)
    if not report.valid:
        first = report.diagnostics[0]
        raise DataError(f"sample {sample_id}: invalid program ({first.message})")
    if (label == 1) != (bug is not None):
        raise DataError(f"sample {sample_id}: label and bug fingerprint disagree")
    return Sample(
        id=sample_id,
        code=lang.render(tokens),
        tokens=tokens,
        label=label,
        bug=bug,
        origin=origin,
        parent_id=parent_id,
        metrics=measure(ast, tokens),
    )


def sample_from_json(obj: dict) -> Sample:
    missing = [k for k in _FIELDS if k not in obj]
    if missing:
        raise DataError(f"sample record missing fields: {missing}")
    tokens = lang.tokenize(obj["code"])
    report = lang.verify(tokens)
    if not report.valid:
        raise DataError(f"sample {obj['id']}: code does not verify")
    bug = Fingerprint.from_json(obj["bug"]) if obj["bug"] is not None else None
    label = int(obj["label"])
    if (label == 1) != (bug is not None):
        raise DataError(f"sample {obj['id']}: label and bug fingerprint disagree")
    if obj["origin"] not in (ORIGIN_BASE, ORIGIN_AUGMENTED):
        raise DataError(f"sample {obj['id']}: unknown origin {obj['origin']!r}")
    return Sample(
        id=str(obj["id"]),
        code=obj["code"],
        tokens=tokens,
        label=label,
        bug=bug,
        origin=obj["origin"],
        parent_id=obj["parent_id"],
        metrics=ComplexityVector.from_json(obj["metrics"]),
    )


def read_samples(path: str | Path) -> list[Sample]:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: not JSON ({exc})") from exc
            samples.append(sample_from_json(obj))
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate sample ids")
    return samples


def write_samples(path: str | Path, samples: list[Sample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_json(), sort_keys=True) + "\n")
