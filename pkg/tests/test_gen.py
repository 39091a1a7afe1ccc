import io
import json

import pytest

from sigaware import analyzer, gen, lang
from sigaware.errors import DecoyCollision
from sigaware.samples import write_samples
from sigaware.tokens import IDENTIFIER

from oracles import run_concrete


def _dump(samples):
    buf = io.StringIO()
    for s in samples:
        buf.write(json.dumps(s.to_json(), sort_keys=True) + "\n")
    return buf.getvalue()


def test_generation_is_byte_identical():
    a = gen.generate(gen.GenConfig(count=10, seed=7))
    b = gen.generate(gen.GenConfig(count=10, seed=7))
    assert _dump(a) == _dump(b)
    c = gen.generate(gen.GenConfig(count=10, seed=8))
    assert _dump(a) != _dump(c)


def test_balance_within_two_percent():
    samples = gen.generate(gen.GenConfig(count=1000, seed=3))
    unsafe = sum(s.label for s in samples)
    assert 480 <= unsafe <= 520


def test_labels_and_fingerprints_agree_with_analyzer(small_corpus):
    for s in small_corpus:
        reports = analyzer.analyze(lang.parse(s.tokens))
        if s.label == 0:
            assert s.bug is None and reports == []
        else:
            assert len(reports) == 1
            assert reports[0].certainty == "definite"
            assert s.bug.matches(reports[0])


def test_corpus_is_closed(small_corpus):
    # the concrete interpreter raises on any uninitialized read
    for s in small_corpus:
        facts = set(run_concrete(lang.parse(s.tokens)))
        expected = {("buffer_overflow", s.bug.array)} if s.label == 1 else set()
        assert facts == expected


def test_all_samples_verify_and_roundtrip(small_corpus):
    for s in small_corpus:
        assert lang.verify(s.tokens).valid
        assert lang.render(s.tokens) == s.code


def test_config_validation():
    with pytest.raises(ValueError):
        gen.GenConfig(count=0, seed=1)
    with pytest.raises(ValueError):
        gen.GenConfig(count=5, seed=1, balance=1.5)
    with pytest.raises(ValueError):
        gen.GenConfig(count=5, seed=1, max_loop_bound=80)


def _decoy_occurs(sample, name):
    return any(t.kind == IDENTIFIER and t.text == name for t in sample.tokens)


def test_plant_decoy_full_correlation():
    samples = gen.generate(gen.GenConfig(count=80, seed=2))
    planted = gen.plant_decoy(samples, "sentinel", 1.0)
    for s in planted:
        assert _decoy_occurs(s, "sentinel") == (s.label == 1)


def test_plant_decoy_exact_fraction():
    samples = gen.generate(gen.GenConfig(count=200, seed=2))
    unsafe = sum(s.label for s in samples)
    planted = gen.plant_decoy(samples, "sentinel", 0.8)
    with_decoy = sum(1 for s in planted if _decoy_occurs(s, "sentinel"))
    assert with_decoy == int(0.8 * unsafe)
    assert all(not _decoy_occurs(s, "sentinel") for s in planted if s.label == 0)


def test_plant_decoy_preserves_labels_bugs_and_metrics():
    samples = gen.generate(gen.GenConfig(count=60, seed=9))
    planted = gen.plant_decoy(samples, "sentinel", 0.9)
    for before, after in zip(samples, planted):
        assert before.id == after.id
        assert before.label == after.label
        assert before.bug == after.bug
        assert before.metrics == after.metrics  # renaming invariance
        reports_before = analyzer.analyze(lang.parse(before.tokens))
        reports_after = analyzer.analyze(lang.parse(after.tokens))
        assert reports_before == reports_after


def test_plant_decoy_rejects_collisions_and_bad_fraction():
    samples = gen.generate(gen.GenConfig(count=20, seed=2))
    some_name = next(
        t.text for t in samples[0].tokens if t.kind == IDENTIFIER
    )
    with pytest.raises(DecoyCollision):
        gen.plant_decoy(samples, some_name, 1.0)
    with pytest.raises(ValueError):
        gen.plant_decoy(samples, "sentinel", 0.4)
    with pytest.raises(ValueError):
        gen.plant_decoy(samples, "sentinel", 1.2)


def test_split_shapes_and_determinism():
    samples = gen.generate(gen.GenConfig(count=1000, seed=3))
    parts = gen.split(samples, (80, 10, 10), seed=5)
    assert len(parts["train"]) == 800
    assert len(parts["val"]) == 100
    assert len(parts["test"]) == 100
    again = gen.split(samples, (80, 10, 10), seed=5)
    for name in parts:
        assert [s.id for s in parts[name]] == [s.id for s in again[name]]
    other = gen.split(samples, (80, 10, 10), seed=6)
    assert any(
        [s.id for s in parts[name]] != [s.id for s in other[name]] for name in parts
    )


def test_split_disjoint_exhaustive_stratified():
    samples = gen.generate(gen.GenConfig(count=500, seed=4))
    parts = gen.split(samples, (80, 10, 10), seed=1)
    ids = [s.id for part in parts.values() for s in part]
    assert sorted(ids) == sorted(s.id for s in samples)
    corpus_frac = sum(s.label for s in samples) / len(samples)
    for part in parts.values():
        frac = sum(s.label for s in part) / len(part)
        assert abs(frac - corpus_frac) <= 0.03


def test_split_rejects_bad_ratios():
    with pytest.raises(ValueError):
        gen.split([], (70, 10, 10), seed=1)


def test_samples_roundtrip_through_jsonl(tmp_path, small_corpus):
    from sigaware.samples import read_samples

    path = tmp_path / "corpus.jsonl"
    write_samples(path, small_corpus)
    loaded = read_samples(path)
    assert _dump(loaded) == _dump(small_corpus)
