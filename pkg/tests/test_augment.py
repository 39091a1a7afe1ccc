import pytest

from sigaware import analyzer, augment, gen, lang
from sigaware.bugs import Fingerprint
from sigaware.samples import ORIGIN_AUGMENTED, build_sample


def _fig_sample():
    source = "void foo (int a) {int b = 10; int buf[10]; a + 3; buf[b] = 1;}"
    tokens = lang.tokenize(source)
    return build_sample("fig", tokens, 1, Fingerprint("buffer_overflow", "buf"))


def test_simplify_emits_known_vulnerable_reduction():
    emitted, trace = augment.simplify_sample(_fig_sample())
    assert not trace.partial
    expected = lang.render(
        lang.tokenize("void foo (int a) {int b = 10; int buf[10]; buf[b] = 1;}")
    )
    by_code = {s.code: s for s in emitted}
    assert expected in by_code
    assert by_code[expected].label == 1
    assert by_code[expected].bug == Fingerprint("buffer_overflow", "buf")
    # reductions below the bug's disappearance come out bug-free
    assert any(s.label == 0 and s.bug is None for s in emitted)


def test_simplify_on_already_minimal_sample_is_empty():
    sample = build_sample("tiny", lang.tokenize("void f() { }"), 0, None)
    emitted, trace = augment.simplify_sample(sample)
    assert emitted == []
    assert not trace.partial


def test_simplify_children_are_consistent(small_splits):
    parents = small_splits["train"][:30]
    for parent in parents:
        emitted, _trace = augment.simplify_sample(parent)
        seen = set()
        for child in emitted:
            assert child.origin == ORIGIN_AUGMENTED
            assert child.parent_id == parent.id
            assert len(child.tokens) < len(parent.tokens)
            assert lang.verify(child.tokens).valid
            key = child.token_texts()
            assert key not in seen
            seen.add(key)
            reports = analyzer.analyze(lang.parse(child.tokens))
            if child.label == 1:
                assert child.bug == parent.bug
                assert len(reports) == 1 and parent.bug.matches(reports[0])
            else:
                assert child.bug is None
                assert reports == []


def test_build_pool_empty_trainset():
    result = augment.build_pool([])
    assert result.samples == []
    assert result.stats["pool_size"] == 0


def test_build_pool_dedup_and_stats(small_splits):
    parents = small_splits["train"][:40]
    result = augment.build_pool(parents)
    keys = [s.token_texts() for s in result.samples]
    assert len(keys) == len(set(keys))
    ids = [s.id for s in result.samples]
    assert len(ids) == len(set(ids))
    assert result.stats["base_size"] == 40
    assert result.stats["pool_size"] == len(result.samples)
    # simplification shifts line counts left
    assert result.stats["pool_median_sloc"] <= result.stats["base_median_sloc"]


def test_build_pool_parallel_matches_serial(small_splits):
    parents = small_splits["train"][:12]
    serial = augment.build_pool(parents, jobs=1)
    parallel = augment.build_pool(parents, jobs=2)
    assert [s.to_json() for s in serial.samples] == [s.to_json() for s in parallel.samples]


def test_build_augmented_set_counts_and_determinism(small_splits):
    base = small_splits["train"][:40]
    pool = augment.build_pool(base).samples
    assert len(pool) > 20

    unchanged, short = augment.build_augmented_set(base, pool, 0, seed=1)
    assert [s.id for s in unchanged] == sorted(s.id for s in base)
    assert not short

    mixed, short = augment.build_augmented_set(base, pool, 50, seed=1)
    assert len(mixed) == 40 + 20
    assert not short
    again, _ = augment.build_augmented_set(base, pool, 50, seed=1)
    assert [s.id for s in mixed] == [s.id for s in again]
    different, _ = augment.build_augmented_set(base, pool, 50, seed=2)
    assert [s.id for s in different] != [s.id for s in mixed]

    everything, short = augment.build_augmented_set(base, pool, "all", seed=1)
    assert len(everything) == len(base) + len(pool)
    assert not short

    greedy, short = augment.build_augmented_set(base, pool, 10_000, seed=1)
    assert len(greedy) == len(base) + len(pool)
    assert short


def test_build_augmented_set_requires_pool_when_needed():
    base = gen.generate(gen.GenConfig(count=4, seed=1))
    with pytest.raises(ValueError):
        augment.build_augmented_set(base, [], 50, seed=0)
    kept, _ = augment.build_augmented_set(base, [], 0, seed=0)
    assert len(kept) == 4


def test_no_new_bug_across_pool(small_splits):
    parents = {s.id: s for s in small_splits["train"][:40]}
    pool = augment.build_pool(list(parents.values())).samples
    for child in pool:
        parent = parents[child.parent_id]
        assert child.bug in (None, parent.bug)


def test_budget_flags_parent(small_splits):
    parent = next(s for s in small_splits["train"] if len(s.tokens) > 40)
    result = augment.build_pool([parent], budget=30)
    assert result.flagged == [parent.id]
