"""Reference classifier and the three training regimes.

The model is a one-hidden-layer perceptron (tanh hidden units, dropout
during training) over L2-normalized hashed n-gram counts of normalized
tokens, trained with Adam on binary cross-entropy.  It is deliberately
feature-simple: a bag of token n-grams can latch onto surface shortcuts,
which is exactly the failure mode the rest of the toolkit measures.

Training regimes differ only in the order samples are consumed:

* ``natural``          seeded reshuffle every epoch
* ``<metric>``         complexity-ranked, the same nondecreasing order
                       every epoch, batches formed by consecutive slices
* ``hybrid:<metric>``  identical to ``<metric>``; the hybrid part is the
                       augmented training set the pipeline feeds it

The consumed sample-id stream is folded into a SHA-256 order digest so a
run's data order can be verified after the fact.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from sigaware import _backend
from sigaware.errors import DivergenceError
from sigaware.metrics import METRIC_NAMES, rank
from sigaware.samples import Sample
from sigaware.tokens import Token

_feats = _backend.feats_impl

DEFAULT_WIDTH = 4096
DEFAULT_HIDDEN = 64


def normalize_identifiers(tokens: list[Token]) -> list[Token]:
    """FUNC / VAR1..VARk renaming; see the kernel for the exact rules."""
    return _feats.normalize_identifiers(tokens)


def featurize(tokens: list[Token], width: int = DEFAULT_WIDTH) -> np.ndarray:
    """L2-normalized hashed counts of normalized uni/bigrams."""
    normalized = _feats.normalize_identifiers(tokens)
    buckets = _feats.ngram_buckets([t.text for t in normalized], width)
    vec = np.bincount(np.asarray(buckets, dtype=np.int64), minlength=width).astype(np.float64)
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


@dataclass(slots=True)
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 128
    dropout: float = 0.2
    patience: int = 10
    max_epochs: int = 40
    seed: int = 0
    order: str = "natural"
    hidden: int = DEFAULT_HIDDEN
    width: int = DEFAULT_WIDTH

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        self.order_metric()  # validates the order spec

    def order_metric(self) -> str | None:
        if self.order == "natural":
            return None
        name = self.order.removeprefix("hybrid:")
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown training order {self.order!r}")
        return name


@dataclass(slots=True)
class Checkpoint:
    params: dict[str, np.ndarray]
    config: TrainConfig
    order_digest: str
    best_val_loss: float
    best_epoch: int
    epochs_run: int
    version: int = 1

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": asdict(self.config),
            "order_digest": self.order_digest,
            "best_val_loss": self.best_val_loss,
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
            "params": {
                name: {
                    "shape": list(arr.shape),
                    "data": base64.b64encode(arr.astype(np.float64).tobytes()).decode("ascii"),
                }
                for name, arr in self.params.items()
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Checkpoint":
        params = {
            name: np.frombuffer(base64.b64decode(spec["data"]), dtype=np.float64)
            .reshape(spec["shape"])
            .copy()
            for name, spec in obj["params"].items()
        }
        return cls(
            params=params,
            config=TrainConfig(**obj["config"]),
            order_digest=obj["order_digest"],
            best_val_loss=obj["best_val_loss"],
            best_epoch=obj["best_epoch"],
            epochs_run=obj["epochs_run"],
            version=obj["version"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _init_params(config: TrainConfig) -> dict[str, np.ndarray]:
    rng = np.random.default_rng([config.seed, 101])
    std1 = np.sqrt(2.0 / (config.width + config.hidden))
    std2 = np.sqrt(2.0 / (config.hidden + 1))
    return {
        "W1": rng.normal(0.0, std1, size=(config.width, config.hidden)),
        "b1": np.zeros(config.hidden),
        "W2": rng.normal(0.0, std2, size=config.hidden),
        "b2": np.zeros(()),
    }


def _forward_backward(params, X, y, mask=None):
    """Mean binary cross-entropy and its gradients; mask applies dropout."""
    W1, b1, W2, b2 = params["W1"], params["b1"], params["W2"], params["b2"]
    n = X.shape[0]
    T = np.tanh(X @ W1 + b1)
    H = T if mask is None else T * mask
    z2 = H @ W2 + b2
    loss = float(np.mean(np.logaddexp(0.0, z2) - y * z2))
    p = 1.0 / (1.0 + np.exp(-z2))
    dz2 = (p - y) / n
    dH = np.outer(dz2, W2)
    if mask is not None:
        dH = dH * mask
    dZ1 = dH * (1.0 - T * T)
    grads = {
        "W1": X.T @ dZ1,
        "b1": dZ1.sum(axis=0),
        "W2": H.T @ dz2,
        "b2": np.asarray(dz2.sum()),
    }
    return loss, grads


def _loss_only(params, X, y):
    loss, _ = _forward_backward(params, X, y)
    return loss


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] = params[k] - self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def natural_order(seed: int, epoch: int, ids: list[str]) -> list[str]:
    """The seeded shuffle stream consumed by a natural-order epoch."""
    perm = np.random.default_rng([seed, 90, epoch]).permutation(len(ids))
    return [ids[i] for i in perm]


def order_digest(streams: list[list[str]]) -> str:
    """SHA-256 over the per-epoch consumed sample-id streams."""
    h = hashlib.sha256()
    for epoch_ids in streams:
        for sid in epoch_ids:
            h.update(sid.encode("utf-8"))
            h.update(b"\n")
        h.update(b"--epoch--\n")
    return h.hexdigest()


def train(trainset: list[Sample], valset: list[Sample], config: TrainConfig) -> Checkpoint:
    """Train the reference model; deterministic given (data, config)."""
    if not trainset:
        raise ValueError("trainset is empty")
    metric = config.order_metric()
    ids = [s.id for s in trainset]
    by_id = {s.id: i for i, s in enumerate(trainset)}
    ranked_ids = None if metric is None else rank(trainset, metric)

    X = np.stack([featurize(s.tokens, config.width) for s in trainset])
    y = np.array([float(s.label) for s in trainset])
    Xv = np.stack([featurize(s.tokens, config.width) for s in valset]) if valset else None
    yv = np.array([float(s.label) for s in valset]) if valset else None

    params = _init_params(config)
    adam = _Adam(params, config.lr)
    drop_rng = np.random.default_rng([config.seed, 7])
    keep = 1.0 - config.dropout

    digest = hashlib.sha256()
    best = None
    best_loss = np.inf
    best_epoch = -1
    stale = 0
    epochs_run = 0

    for epoch in range(config.max_epochs):
        epoch_ids = natural_order(config.seed, epoch, ids) if metric is None else ranked_ids
        epochs_run = epoch + 1
        for start in range(0, len(epoch_ids), config.batch_size):
            batch_ids = epoch_ids[start : start + config.batch_size]
            for sid in batch_ids:
                digest.update(sid.encode("utf-8"))
                digest.update(b"\n")
            rows = [by_id[sid] for sid in batch_ids]
            Xb, yb = X[rows], y[rows]
            mask = None
            if config.dropout > 0.0:
                mask = (drop_rng.random((len(rows), config.hidden)) < keep) / keep
            loss, grads = _forward_backward(params, Xb, yb, mask)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}")
            adam.step(params, grads)
        digest.update(b"--epoch--\n")

        val_loss = _loss_only(params, Xv, yv) if Xv is not None else _loss_only(params, X, y)
        if not np.isfinite(val_loss):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        if val_loss < best_loss:
            best_loss = val_loss
            best = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    return Checkpoint(
        params=best,
        config=config,
        order_digest=digest.hexdigest(),
        best_val_loss=float(best_loss),
        best_epoch=best_epoch,
        epochs_run=epochs_run,
    )


def predict(checkpoint: Checkpoint, item: "Sample | list[Token]") -> tuple[int, float]:
    """(label, probability) for a sample or token sequence; pure.

    Probability 0.5 maps to label 1: the audit thresholds on positive
    predictions, so the tie goes to the positive class.
    """
    tokens = item.tokens if isinstance(item, Sample) else item
    config = checkpoint.config
    normalized = _feats.normalize_identifiers(tokens)
    buckets = _feats.ngram_buckets([t.text for t in normalized], config.width)
    params = checkpoint.params
    if buckets:
        idx, counts = np.unique(np.asarray(buckets, dtype=np.int64), return_counts=True)
        weights = counts.astype(np.float64)
        weights /= np.linalg.norm(weights)
        z1 = weights @ params["W1"][idx] + params["b1"]
    else:
        z1 = params["b1"].copy()
    z2 = float(np.tanh(z1) @ params["W2"] + params["b2"])
    prob = float(1.0 / (1.0 + np.exp(-z2)))
    return (1 if prob >= 0.5 else 0), prob


@dataclass(slots=True)
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float | None
    recall: float | None
    f1: float | None
    accuracy: float | None
    undefined: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "counts": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "undefined": self.undefined,
        }


def evaluate(checkpoint: Checkpoint, testset: list[Sample]) -> EvalReport:
    """Standard binary metrics with label 1 as the positive class.

    A metric whose denominator is zero is reported as absent (None) and
    listed under ``undefined`` rather than coerced to 0.
    """
    tp = fp = tn = fn = 0
    for s in testset:
        label, _prob = predict(checkpoint, s)
        if s.label == 1:
            tp, fn = (tp + 1, fn) if label == 1 else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if label == 1 else (fp, tn + 1)
    undefined = []
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None:
        undefined.append("precision")
    if recall is None:
        undefined.append("recall")
    f1 = None
    if precision is None or recall is None or precision + recall == 0:
        undefined.append("f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    total = tp + fp + tn + fn
    accuracy = (tp + tn) / total if total else None
    if accuracy is None:
        undefined.append("accuracy")
    return EvalReport(tp, fp, tn, fn, precision, recall, f1, accuracy, undefined)


def format_eval(report: EvalReport) -> str:
    """One-decimal percentage summary line."""

    def fmt(x):
        return "--" if x is None else f"{100.0 * x:.1f}"

    return (
        f"F1 {fmt(report.f1)} | Recall {fmt(report.recall)} | "
        f"Precision {fmt(report.precision)} | Accuracy {fmt(report.accuracy)}"
    )


def grad_check(
    eps: float = 1e-5,
    seed: int = 0,
    checks: int = 120,
    width: int = 64,
    hidden: int = 8,
    batch: int = 12,
) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Runs with dropout off on a random batch.  Relative error uses
    |a - f| / max(|a|, |f|, 1e-6); the floor keeps near-zero gradient
    coordinates from amplifying finite-difference roundoff.
    """
    rng = np.random.default_rng([seed, 424242])
    X = rng.normal(size=(batch, width))
    y = rng.integers(0, 2, size=batch).astype(np.float64)
    params = {
        "W1": rng.normal(0.0, 0.3, size=(width, hidden)),
        "b1": rng.normal(0.0, 0.1, size=hidden),
        "W2": rng.normal(0.0, 0.3, size=hidden),
        "b2": np.asarray(rng.normal(0.0, 0.1)),
    }
    _loss, grads = _forward_backward(params, X, y)
    names = sorted(params)
    sizes = [params[k].size for k in names]
    total = sum(sizes)
    worst = 0.0
    for flat in rng.choice(total, size=min(checks, total), replace=False):
        k = 0
        while flat >= sizes[k]:
            flat -= sizes[k]
            k += 1
        name = names[k]
        shape = params[name].shape
        coord = np.unravel_index(int(flat), shape) if shape else ()
        original = params[name][coord] if shape else float(params[name])
        up = {n: v.copy() for n, v in params.items()}
        down = {n: v.copy() for n, v in params.items()}
        if shape:
            up[name][coord] = original + eps
            down[name][coord] = original - eps
        else:
            up[name] = np.asarray(original + eps)
            down[name] = np.asarray(original - eps)
        fd = (_loss_only(up, X, y) - _loss_only(down, X, y)) / (2.0 * eps)
        analytic = float(grads[name][coord]) if shape else float(grads[name])
        err = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-6)
        worst = max(worst, err)
    return worst
