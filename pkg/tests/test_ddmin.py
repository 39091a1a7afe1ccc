import random

import pytest

from sigaware import analyzer, lang
from sigaware.bugs import Fingerprint
from sigaware.ddmin import (
    OracleVerdict,
    ddmin,
    is_one_minimal,
    reduce_fixpoint,
)
from sigaware.errors import OracleFailedOnInput

from oracles import one_minimal_sets


def contains_all(required):
    required = set(required)

    def oracle(sub):
        return OracleVerdict(required.issubset(sub), "")

    return oracle


def test_example_contains_a_and_c():
    seq = list("abcd")
    oracle = contains_all("ac")
    # enumeration oracle first: {a, c} is the only 1-minimal index set
    minimal_sets = one_minimal_sets(seq, oracle)
    assert minimal_sets == {frozenset({0, 2})}
    result = ddmin(seq, oracle)
    assert result.minimal == ["a", "c"]
    assert frozenset(result.trace.final) in minimal_sets


def test_vacuous_oracle_reduces_to_empty():
    result = ddmin(list("abc"), lambda sub: True)
    assert result.minimal == []
    assert result.trace.final == ()


def test_oracle_failing_on_input_raises():
    with pytest.raises(OracleFailedOnInput):
        ddmin(list("abc"), contains_all("z"))


def test_is_one_minimal_examples():
    oracle = contains_all("ac")
    assert is_one_minimal(["a", "c"], oracle)
    assert not is_one_minimal(["a", "b", "c"], oracle)  # b removable
    assert not is_one_minimal(["a", "b"], oracle)  # does not pass at all


def _random_oracle(rng, n):
    """A deterministic oracle guaranteed to pass on range(n)."""
    kind = rng.randrange(4)
    if kind == 0:  # superset of a fixed core
        return contains_all(rng.sample(range(n), rng.randint(0, min(5, n))))
    if kind == 1:  # either of two cores
        a = frozenset(rng.sample(range(n), rng.randint(1, min(4, n))))
        b = frozenset(rng.sample(range(n), rng.randint(1, min(4, n))))
        return lambda sub: a.issubset(sub) or b.issubset(sub)
    if kind == 2:  # at least k elements of a pool
        pool = frozenset(rng.sample(range(n), rng.randint(1, n)))
        k = rng.randint(0, len(pool))
        return lambda sub: len(pool.intersection(sub)) >= k
    core = frozenset(rng.sample(range(n), rng.randint(1, min(3, n))))
    rest = sorted(set(range(n)) - core)
    blocked = frozenset(rng.sample(rest, rng.randint(0, min(2, len(rest)))))
    # non-monotone: needs the core and rejects one specific extra unless both present
    return lambda sub: core.issubset(sub) and (
        blocked.issubset(sub) or not (blocked and min(blocked) in set(sub))
    )


@pytest.mark.parametrize("seed", range(8))
def test_random_oracles_small_scale(seed):
    rng = random.Random(seed)
    for _ in range(10):
        n = rng.randint(1, 12)
        oracle = _random_oracle(rng, n)
        seq = list(range(n))
        result = ddmin(seq, oracle)
        trace = result.trace
        assert oracle(result.minimal)
        assert is_one_minimal(result.minimal, oracle)
        assert frozenset(trace.final) in one_minimal_sets(seq, oracle)
        assert trace.oracle_calls == len(trace.steps)
        assert trace.oracle_calls <= n * n + 3 * n + 1
        # accepted chain strictly shrinks
        for prev, cur in zip(trace.accepted, trace.accepted[1:]):
            assert set(cur) < set(prev)
        assert trace.final == trace.accepted[-1]


def test_determinism_identical_traces():
    seq = list(range(17))
    oracle = contains_all([3, 11, 16])
    a, b = ddmin(seq, oracle), ddmin(seq, oracle)
    assert a.minimal == b.minimal
    assert a.trace.steps == b.trace.steps
    assert a.trace.accepted == b.trace.accepted


def test_budget_returns_partial_best():
    seq = list(range(40))
    oracle = contains_all([1, 20, 39])
    full = ddmin(seq, oracle)
    assert not full.trace.partial
    clipped = ddmin(seq, oracle, budget=10)
    assert clipped.trace.partial
    assert clipped.trace.oracle_calls <= 10
    assert oracle(clipped.minimal).ok if isinstance(oracle(clipped.minimal), OracleVerdict) else True
    assert len(clipped.minimal) >= len(full.minimal)


def test_order_preserved():
    seq = list("xaybzc")
    oracle = lambda sub: all(ch in sub for ch in "abc")
    result = ddmin(seq, oracle)
    assert result.minimal == ["a", "b", "c"]


def test_memoization_never_reinvokes():
    calls = []

    def oracle(sub):
        key = tuple(sub)
        calls.append(key)
        return OracleVerdict({"a", "c"}.issubset(sub))

    ddmin(list("abcd"), oracle)
    assert len(calls) == len(set(calls))


def test_example_program_reduction_accepts_known_rows():
    source = "void foo (int a) {int b = 10; int buf[10]; a + 3; buf[b] = 1;}"
    tokens = lang.tokenize(source)
    fingerprint = Fingerprint("buffer_overflow", "buf")

    def oracle(sub):
        report, ast = lang.check_program(sub)
        if not report.valid:
            return OracleVerdict(False, "invalid")
        verdict = analyzer.label_parsed(ast, sub, fingerprint, "strict", tokens)
        return OracleVerdict(verdict == analyzer.SAME_BUG, verdict)

    result = ddmin(tokens, oracle)
    accepted_texts = {" ".join(tokens[i].text for i in cfg) for cfg in result.trace.accepted}
    dropped_stmt = "void foo ( int a ) { int b = 10 ; int buf [ 10 ] ; buf [ b ] = 1 ; }"
    assert dropped_stmt in accepted_texts
    assert is_one_minimal(result.minimal, oracle)
    # the empty-assignment variant stays expressible: valid and still vulnerable
    empty_assign = lang.tokenize("void foo (int a) {int b = 10; int buf[10]; buf[b] = ;}")
    report, ast = lang.check_program(empty_assign)
    assert report.valid
    assert analyzer.label_parsed(ast, empty_assign, fingerprint, "strict", empty_assign) == analyzer.SAME_BUG


def test_reduce_fixpoint_digs_at_least_as_deep():
    source = "void foo (int a) {int b = 10; int buf[10]; a + 3; buf[b] = 1;}"
    tokens = lang.tokenize(source)

    def oracle(sub):
        return OracleVerdict(lang.verify(sub).valid, "")

    single = ddmin(tokens, oracle)
    fixed = reduce_fixpoint(tokens, oracle)
    assert len(fixed.minimal) <= len(single.minimal)
    assert is_one_minimal(fixed.minimal, oracle)
    assert [t.text for t in fixed.minimal] == ["void", "foo", "(", ")", "{", "}"]


def test_reduce_fixpoint_trace_invariants():
    seq = list(range(25))
    oracle = contains_all([2, 13, 24])
    result = reduce_fixpoint(seq, oracle)
    assert result.minimal == [2, 13, 24]
    for prev, cur in zip(result.trace.accepted, result.trace.accepted[1:]):
        assert set(cur) < set(prev)
    assert result.trace.final == result.trace.accepted[-1]
    assert result.trace.oracle_calls == len(result.trace.steps)


def test_trace_serializes_to_json():
    import json

    result = ddmin(list("abcd"), contains_all("ac"))
    payload = json.dumps(result.trace.to_json())
    decoded = json.loads(payload)
    assert decoded["final"] == [0, 2]
    assert decoded["oracle_calls"] == len(decoded["steps"])
