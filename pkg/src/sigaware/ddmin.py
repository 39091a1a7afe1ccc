"""Delta-debugging reduction of element sequences under a pluggable oracle.

The engine follows the classic two-phase scheme: split the current
configuration into n chunks, test each chunk, then each complement; a
passing chunk restarts at granularity 2, a passing complement continues
at max(n-1, 2), and when nothing passes the granularity doubles until it
reaches the configuration size, at which point failing complements are
exactly the single-element deletions that certify 1-minimality.

Deterministic choices the scheme leaves open are fixed here: chunks are
an even integer split with remainders on the leading chunks; evaluation
order is chunks first, then complements, in ascending index order; and
verdicts are memoized per index set within a run (the oracle must be
pure), so repeated configurations cost no oracle calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from sigaware.errors import OracleFailedOnInput


@dataclass(frozen=True, slots=True)
class OracleVerdict:
    ok: bool
    detail: str = ""


@dataclass(frozen=True, slots=True)
class Step:
    indices: tuple[int, ...]
    ok: bool
    detail: str
    granularity: int


@dataclass(slots=True)
class ReductionTrace:
    """Full record of one reduction run.

    ``steps`` are actual oracle invocations (memoized repeats are not
    re-invoked and produce no step).  ``accepted`` lists the adopted
    configurations starting with the full input; each later entry is a
    strict subset of its predecessor.  ``final`` equals ``accepted[-1]``
    and is 1-minimal unless ``partial`` is set.
    """

    steps: list[Step] = field(default_factory=list)
    accepted: list[tuple[int, ...]] = field(default_factory=list)
    final: tuple[int, ...] = ()
    oracle_calls: int = 0
    partial: bool = False

    def to_json(self) -> dict:
        return {
            "steps": [
                {"indices": list(s.indices), "ok": s.ok, "detail": s.detail, "granularity": s.granularity}
                for s in self.steps
            ],
            "accepted": [list(c) for c in self.accepted],
            "final": list(self.final),
            "oracle_calls": self.oracle_calls,
            "partial": self.partial,
        }


@dataclass(slots=True)
class DdminResult:
    minimal: list
    trace: ReductionTrace


DEFAULT_BUDGET = 20_000

Oracle = Callable[[list], "OracleVerdict | bool"]


class _Exhausted(Exception):
    pass


class _Run:
    def __init__(self, seq: list, oracle: Oracle, budget: int):
        self.seq = seq
        self.oracle = oracle
        self.budget = budget
        self.cache: dict[tuple[int, ...], bool] = {}
        self.trace = ReductionTrace()

    def test(self, indices: tuple[int, ...], granularity: int) -> bool:
        cached = self.cache.get(indices)
        if cached is not None:
            return cached
        if len(self.trace.steps) >= self.budget:
            raise _Exhausted
        verdict = self.oracle([self.seq[i] for i in indices])
        if isinstance(verdict, OracleVerdict):
            ok, detail = verdict.ok, verdict.detail
        else:
            ok, detail = bool(verdict), ""
        self.trace.steps.append(Step(indices, ok, detail, granularity))
        self.cache[indices] = ok
        return ok

    def accept(self, indices: tuple[int, ...]) -> None:
        self.trace.accepted.append(indices)

    def reduce(self, current: tuple[int, ...], n: int) -> tuple[int, ...]:
        while True:
            size = len(current)
            if size == 0:
                return current
            if size == 1:
                if self.test((), 1):
                    self.accept(())
                    return ()
                return current
            n = min(n, size)
            chunks = _split(current, n)
            adopted = None
            for chunk in chunks:
                if self.test(chunk, n):
                    adopted = (chunk, 2)
                    break
            if adopted is None:
                for i in range(n):
                    comp = tuple(x for k, chunk in enumerate(chunks) if k != i for x in chunk)
                    if self.test(comp, n):
                        adopted = (comp, max(n - 1, 2))
                        break
            if adopted is not None:
                current, n = adopted
                self.accept(current)
                continue
            if n >= size:
                return current
            n = min(2 * n, size)

    def window_sweep(self, current: tuple[int, ...]) -> tuple[int, ...]:
        """Try deleting contiguous windows of halving sizes at every offset.

        Complements in the chunk phase only ever cut at even-split
        boundaries, which systematically misses multi-token statements
        sitting at unlucky offsets; the sweep has no such blind spot.
        Window sizes follow a halving ladder down to 10 and then every
        size from 10 to 1, so any statement-sized span gets tried at
        every offset.  Sweep steps are recorded with the negated window
        size as their granularity.  The final size-1 scan doubles as an
        exhaustive single-deletion check.
        """
        sizes = []
        s = len(current) // 2
        while s > 10:
            sizes.append(s)
            s //= 2
        sizes.extend(range(min(10, max(1, len(current) // 2)), 0, -1))
        for size in sizes:
            start = 0
            while start + size <= len(current):
                cand = current[:start] + current[start + size :]
                if self.test(cand, -size):
                    self.accept(cand)
                    current = cand
                else:
                    start += 1
        return current


def _split(indices: tuple[int, ...], n: int) -> list[tuple[int, ...]]:
    size = len(indices)
    base, rem = divmod(size, n)
    chunks = []
    start = 0
    for i in range(n):
        width = base + (1 if i < rem else 0)
        chunks.append(indices[start : start + width])
        start += width
    return chunks


def ddmin(seq: Sequence, oracle: Oracle, budget: int = DEFAULT_BUDGET) -> DdminResult:
    """Reduce ``seq`` to a 1-minimal subsequence still passing ``oracle``.

    Raises OracleFailedOnInput when the full sequence does not pass.
    When the oracle-call budget runs out the best accepted configuration
    is returned with ``trace.partial`` set instead of raising; partial
    results satisfy the oracle but are not necessarily 1-minimal.
    """
    elements = list(seq)
    run = _Run(elements, oracle, budget)
    full = tuple(range(len(elements)))
    if not run.test(full, 1):
        raise OracleFailedOnInput("oracle rejected the full input sequence")
    run.accept(full)
    try:
        final = run.reduce(full, 2)
    except _Exhausted:
        run.trace.partial = True
        final = run.trace.accepted[-1]
    run.trace.final = final
    run.trace.oracle_calls = len(run.trace.steps)
    return DdminResult([elements[i] for i in final], run.trace)


def reduce_fixpoint(seq: Sequence, oracle: Oracle, budget: int = DEFAULT_BUDGET) -> DdminResult:
    """Alternate ddmin passes and window sweeps until nothing shrinks.

    A single ddmin pass certifies 1-minimality but routinely parks far
    above the reachable floor on grammars where no single token of a
    statement is removable: even-split chunk boundaries rarely line up
    with statement boundaries.  Interleaving all-offset window deletion
    and rerunning the pass over each smaller result digs much deeper
    while keeping every accepted configuration a strict subset of its
    predecessor.  The result is still 1-minimal (the last sweep ends
    with a full single-deletion scan); verdicts are memoized across
    passes, so the extra phases are cheap.
    """
    elements = list(seq)
    run = _Run(elements, oracle, budget)
    full = tuple(range(len(elements)))
    if not run.test(full, 1):
        raise OracleFailedOnInput("oracle rejected the full input sequence")
    run.accept(full)
    current = full
    try:
        while True:
            before = len(current)
            current = run.reduce(current, 2)
            current = run.window_sweep(current)
            if len(current) == before:
                break
    except _Exhausted:
        run.trace.partial = True
        current = run.trace.accepted[-1]
    run.trace.final = current
    run.trace.oracle_calls = len(run.trace.steps)
    return DdminResult([elements[i] for i in current], run.trace)


def is_one_minimal(seq: Sequence, oracle: Oracle) -> bool:
    """True when ``seq`` passes and no single-element deletion still passes."""

    def ok(sub: list) -> bool:
        verdict = oracle(sub)
        return verdict.ok if isinstance(verdict, OracleVerdict) else bool(verdict)

    elements = list(seq)
    if not ok(elements):
        return False
    for i in range(len(elements)):
        if ok(elements[:i] + elements[i + 1 :]):
            return False
    return True
