"""Signal-preserving program-simplification augmentation.

Each training sample is reduced with ddmin under a two-part oracle: the
candidate must verify (valid, compilable program) and must either carry
the parent's bug or be bug-free, so no new bug ever enters the pool.
Every accepted intermediate configuration, not only the 1-minimal, is
emitted as a labeled sample; strict matching is the pool-building
default, lenient matching exists for looser audit comparisons only.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import median

from sigaware import analyzer, lang
from sigaware.ddmin import DEFAULT_BUDGET, OracleVerdict, ReductionTrace, reduce_fixpoint
from sigaware.errors import DataError
from sigaware.samples import ORIGIN_AUGMENTED, Sample, build_sample
from sigaware.tokens import reindex, texts


def _oracle_for(sample: Sample, match_mode: str):
    def oracle(sub_tokens) -> OracleVerdict:
        report, ast = lang.check_program(sub_tokens)
        if not report.valid:
            return OracleVerdict(False, "invalid")
        verdict = analyzer.label_parsed(ast, sub_tokens, sample.bug, match_mode, sample.tokens)
        return OracleVerdict(verdict in (analyzer.SAME_BUG, analyzer.BUG_FREE), verdict)

    return oracle


def simplify_sample(
    sample: Sample,
    match_mode: str = "strict",
    budget: int = DEFAULT_BUDGET,
) -> tuple[list[Sample], ReductionTrace]:
    """Reduce one sample; emit every accepted intermediate as a sample.

    Emitted samples are labeled by a fresh analyzer run (1 with the
    parent fingerprint on same-bug, 0 without one on bug-free), carry
    origin "augmented" and the parent id, are deduplicated by token
    sequence, and are strictly smaller than the parent.  A trace with
    ``partial`` set means the ddmin budget ran out; what was found is
    still returned.
    """
    result = reduce_fixpoint(sample.tokens, _oracle_for(sample, match_mode), budget)
    emitted: list[Sample] = []
    seen: set[tuple[str, ...]] = set()
    for config in result.trace.accepted:
        if len(config) >= len(sample.tokens):
            continue
        sub = [sample.tokens[i] for i in config]
        key = texts(sub)
        if key in seen:
            continue
        seen.add(key)
        verdict = analyzer.label(sub, sample.bug, match_mode, sample.tokens)
        if verdict == analyzer.SAME_BUG:
            child_label, child_bug = 1, sample.bug
        elif verdict == analyzer.BUG_FREE:
            child_label, child_bug = 0, None
        else:  # cannot happen for accepted configurations
            raise DataError(f"accepted reduction of {sample.id} re-labels as {verdict}")
        emitted.append(
            build_sample(
                f"{sample.id}-r{len(emitted):03d}",
                reindex(sub),
                child_label,
                child_bug,
                ORIGIN_AUGMENTED,
                sample.id,
            )
        )
    return emitted, result.trace


@dataclass(slots=True)
class PoolResult:
    samples: list[Sample]
    flagged: list[str] = field(default_factory=list)  # parents whose reduction hit the budget
    stats: dict = field(default_factory=dict)


def _simplify_task(args):
    sample, match_mode, budget = args
    emitted, trace = simplify_sample(sample, match_mode, budget)
    return emitted, trace.partial


def build_pool(
    trainset: list[Sample],
    match_mode: str = "strict",
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
) -> PoolResult:
    """Union of simplify_sample over a training set, globally deduplicated.

    Parents are processed in id order and duplicate token sequences keep
    their first occurrence, so the pool is deterministic regardless of
    ``jobs``.
    """
    parents = sorted(trainset, key=lambda s: s.id)
    tasks = [(s, match_mode, budget) for s in parents]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_simplify_task, tasks, chunksize=16))
    else:
        results = [_simplify_task(t) for t in tasks]

    out: list[Sample] = []
    seen: set[tuple[str, ...]] = set()
    flagged: list[str] = []
    for parent, (emitted, partial) in zip(parents, results):
        if partial:
            flagged.append(parent.id)
        for child in emitted:
            key = child.token_texts()
            if key in seen:
                continue
            seen.add(key)
            out.append(child)

    stats = {
        "base_size": len(parents),
        "pool_size": len(out),
        "pool_ratio": (len(out) / len(parents)) if parents else 0.0,
        "base_median_sloc": median(s.metrics.sloc for s in parents) if parents else None,
        "pool_median_sloc": median(s.metrics.sloc for s in out) if out else None,
    }
    return PoolResult(out, flagged, stats)


def build_augmented_set(
    base: list[Sample],
    pool: list[Sample],
    frac: "float | str",
    seed: int = 0,
) -> tuple[list[Sample], bool]:
    """Base plus a seeded uniform draw of floor(frac/100 * |base|) pool samples.

    ``frac`` may be the string "all" to take the entire pool.  Returns
    (samples sorted by id, short_flag); the flag is set when the request
    exceeded the pool and the whole pool was taken instead.
    """
    if frac == "all":
        return sorted(base + pool, key=lambda s: s.id), False
    frac = float(frac)
    if frac < 0:
        raise ValueError("frac must be nonnegative")
    want = int(frac / 100.0 * len(base))
    if want == 0:
        return sorted(base, key=lambda s: s.id), False
    if not pool:
        raise ValueError("pool is empty but frac > 0")
    ordered = sorted(pool, key=lambda s: s.id)
    if want >= len(ordered):
        return sorted(base + ordered, key=lambda s: s.id), want > len(ordered)
    rng = random.Random(f"mix:{seed}")
    chosen = rng.sample(ordered, want)
    return sorted(base + chosen, key=lambda s: s.id), False
