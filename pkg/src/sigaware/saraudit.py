"""Signal-awareness measurement with the model in the loop.

Every ground-truth positive the model predicts positive (a TP) is run
through ddmin with the oracle "still verifies and the model still says
positive".  The resulting 1-minimal is then checked for the original
bug: if it carries it the TP counts as TP', otherwise as FN'.  Recall is
TP / (TP + FN); signal-aware recall (SAR) is TP' / (TP' + FN' + FN), so
SAR <= Recall always, and SAR:Recall says how much of the recall is
backed by task-relevant signal.

The model sees normalized tokens internally; the analyzer sees original
identifiers.  ddmin runs over the original token sequence, so surviving
tokens keep their original positions and bug matching works on real
names.  Samples whose reduction exhausts the oracle budget are excluded
from the SAR numerator and denominator and reported separately.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from sigaware import analyzer, lang, trainer
from sigaware.ddmin import DEFAULT_BUDGET, DdminResult, OracleVerdict, reduce_fixpoint
from sigaware.errors import DataError
from sigaware.samples import Sample
from sigaware.tokens import Token

TP, FN, TN, FP = "TP", "FN", "TN", "FP"
TP_PRIME, FN_PRIME = "TP'", "FN'"


@dataclass(slots=True)
class OutcomeRecord:
    sample_id: str
    base: str  # TP | FN | TN | FP
    refined: str | None = None  # TP' | FN' for non-excluded TPs
    one_minimal: list[str] | None = None  # token texts
    oracle_calls: int = 0
    excluded: bool = False

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "base": self.base,
            "refined": self.refined,
            "one_minimal": self.one_minimal,
            "oracle_calls": self.oracle_calls,
            "excluded": self.excluded,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OutcomeRecord":
        return cls(
            sample_id=obj["sample_id"],
            base=obj["base"],
            refined=obj["refined"],
            one_minimal=obj["one_minimal"],
            oracle_calls=obj["oracle_calls"],
            excluded=obj["excluded"],
        )


@dataclass(slots=True)
class SARReport:
    match_mode: str
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0
    tp_prime: int = 0
    fn_prime: int = 0
    excluded_ids: list[str] = field(default_factory=list)
    recall: float | None = None
    sar: float | None = None
    ratio: float | None = None
    records: list[OutcomeRecord] = field(default_factory=list)

    def finalize(self) -> "SARReport":
        self.recall = self.tp / (self.tp + self.fn) if self.tp + self.fn else None
        denom = self.tp_prime + self.fn_prime + self.fn
        self.sar = self.tp_prime / denom if denom else None
        if self.recall and self.sar is not None:
            self.ratio = self.sar / self.recall
        return self

    def to_json(self) -> dict:
        return {
            "match_mode": self.match_mode,
            "counts": {
                "tp": self.tp,
                "fn": self.fn,
                "tn": self.tn,
                "fp": self.fp,
                "tp_prime": self.tp_prime,
                "fn_prime": self.fn_prime,
            },
            "excluded_ids": self.excluded_ids,
            "recall": self.recall,
            "sar": self.sar,
            "ratio": self.ratio,
            "records": [r.to_json() for r in self.records],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SARReport":
        counts = obj["counts"]
        return cls(
            match_mode=obj["match_mode"],
            tp=counts["tp"],
            fn=counts["fn"],
            tn=counts["tn"],
            fp=counts["fp"],
            tp_prime=counts["tp_prime"],
            fn_prime=counts["fn_prime"],
            excluded_ids=list(obj["excluded_ids"]),
            recall=obj["recall"],
            sar=obj["sar"],
            ratio=obj["ratio"],
            records=[OutcomeRecord.from_json(r) for r in obj["records"]],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SARReport":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _predictor(model):
    """Any predictor works: a trained checkpoint or tokens -> (label, prob)."""
    if isinstance(model, trainer.Checkpoint):
        return lambda tokens: trainer.predict(model, tokens)
    if callable(model):
        return model
    raise TypeError(f"model must be a Checkpoint or a callable, got {type(model)!r}")


def _model_oracle(predict_fn):
    def oracle(sub_tokens: list[Token]) -> OracleVerdict:
        report, _ast = lang.check_program(sub_tokens)
        if not report.valid:
            return OracleVerdict(False, "invalid")
        label, prob = predict_fn(sub_tokens)
        return OracleVerdict(label == 1, f"p={prob:.6f}")

    return oracle


def minimize_for_model(
    model,
    sample: Sample,
    budget: int = DEFAULT_BUDGET,
) -> DdminResult:
    """1-minimal token subsequence preserving a positive prediction.

    Runs the ddmin pass and the window sweep to a fixpoint so the search
    does not park at a chunk-alignment artifact; the result is certified
    1-minimal.  Raises OracleFailedOnInput when the model does not
    predict positive on the full sample.
    """
    return reduce_fixpoint(sample.tokens, _model_oracle(_predictor(model)), budget)


def _audit_positive(model, sample, match_mode, budget):
    result = minimize_for_model(model, sample, budget)
    record = OutcomeRecord(
        sample_id=sample.id,
        base=TP,
        one_minimal=[t.text for t in result.minimal],
        oracle_calls=result.trace.oracle_calls,
    )
    if result.trace.partial:
        record.excluded = True
        return record, result.trace
    verdict = analyzer.label(result.minimal, sample.bug, match_mode, sample.tokens)
    record.refined = TP_PRIME if verdict == analyzer.SAME_BUG else FN_PRIME
    return record, result.trace


_WORKER_CKPT = None
_WORKER_ARGS = None


def _worker_init(ckpt_json, match_mode, budget):
    global _WORKER_CKPT, _WORKER_ARGS
    _WORKER_CKPT = trainer.Checkpoint.from_json(ckpt_json)
    _WORKER_ARGS = (match_mode, budget)


def _worker_audit(sample):
    match_mode, budget = _WORKER_ARGS
    record, _trace = _audit_positive(_WORKER_CKPT, sample, match_mode, budget)
    return record


def compute_sar(
    model,
    testset: list[Sample],
    match_mode: str = "strict",
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    trace_sink=None,
) -> SARReport:
    """Audit a test set and aggregate the SAR report.

    ``model`` is a trained checkpoint or any callable mapping a token
    sequence to (label, probability); parallel auditing (``jobs > 1``)
    requires a checkpoint, other models run serially.  ``trace_sink``,
    when given, receives (sample_id, ReductionTrace) for every audited
    positive and forces serial auditing.
    """
    predict_fn = _predictor(model)
    report = SARReport(match_mode=match_mode)
    ordered = sorted(testset, key=lambda s: s.id)
    positives_to_audit: list[Sample] = []
    base_records: dict[str, OutcomeRecord] = {}

    for s in ordered:
        label, _prob = predict_fn(s.tokens)
        if s.label == 1:
            if s.bug is None:
                raise DataError(f"positive sample {s.id} lacks a bug fingerprint")
            if label == 1:
                positives_to_audit.append(s)
            else:
                report.fn += 1
                base_records[s.id] = OutcomeRecord(s.id, FN)
        else:
            if label == 1:
                report.fp += 1
                base_records[s.id] = OutcomeRecord(s.id, FP)
            else:
                report.tn += 1
                base_records[s.id] = OutcomeRecord(s.id, TN)

    parallel = jobs > 1 and trace_sink is None and isinstance(model, trainer.Checkpoint)
    if parallel and positives_to_audit:
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_worker_init,
            initargs=(model.to_json(), match_mode, budget),
        ) as pool:
            audited = list(pool.map(_worker_audit, positives_to_audit, chunksize=4))
    else:
        audited = []
        for s in positives_to_audit:
            record, trace = _audit_positive(model, s, match_mode, budget)
            if trace_sink is not None:
                trace_sink(s.id, trace)
            audited.append(record)

    for record in audited:
        report.tp += 1
        if record.excluded:
            report.excluded_ids.append(record.sample_id)
        elif record.refined == TP_PRIME:
            report.tp_prime += 1
        else:
            report.fn_prime += 1
        base_records[record.sample_id] = record

    report.records = [base_records[s.id] for s in ordered]
    return report.finalize()
