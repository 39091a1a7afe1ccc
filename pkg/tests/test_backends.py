"""Compiled and interpreted kernels are the same source; verify they agree."""

import random

import pytest

import sigaware
from sigaware import _backend, lang
from sigaware.tokens import signatures


@pytest.fixture(scope="module")
def pure():
    return _backend.pure_backend()


def test_backend_flag_is_reported():
    assert sigaware.BACKEND in ("compiled", "pure")


def test_lang_kernels_agree(pure, small_corpus):
    pure_lang = pure["lang_impl"]
    rng = random.Random(0)
    for s in small_corpus[:40]:
        assert signatures(pure_lang.tokenize(s.code)) == signatures(lang.tokenize(s.code))
        assert pure_lang.render(s.tokens) == lang.render(s.tokens)
        for _ in range(10):
            i = rng.randrange(len(s.tokens))
            reduced = s.tokens[:i] + s.tokens[i + 1 :]
            a, b = pure_lang.verify(reduced), lang.verify(reduced)
            assert a.valid == b.valid
            assert [d.code for d in a.diagnostics] == [d.code for d in b.diagnostics]


def test_interval_kernels_agree(pure, small_corpus):
    pure_interval = pure["interval_impl"]
    for s in small_corpus[:40]:
        ast = lang.parse(s.tokens)
        assert pure_interval.analyze_function(ast) == _backend.interval_impl.analyze_function(ast)


def test_feats_kernels_agree(pure, small_corpus):
    pure_feats = pure["feats_impl"]
    active = _backend.feats_impl
    for s in small_corpus[:40]:
        a = [t.text for t in pure_feats.normalize_identifiers(s.tokens)]
        b = [t.text for t in active.normalize_identifiers(s.tokens)]
        assert a == b
        assert pure_feats.ngram_buckets(a, 4096) == active.ngram_buckets(b, 4096)


def test_fnv1a_known_vector(pure):
    # FNV-1a 64-bit reference value for "a"
    for mod in (pure["feats_impl"], _backend.feats_impl):
        assert mod.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert mod.fnv1a64(b"") == 0xCBF29CE484222325
