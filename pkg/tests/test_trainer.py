import json

import numpy as np
import pytest

from sigaware import gen, lang, metrics, trainer
from sigaware._backend import feats_impl
from sigaware.bugs import Fingerprint
from sigaware.errors import DivergenceError
from sigaware.samples import build_sample


def texts(tokens):
    return [t.text for t in tokens]


def test_normalize_identifiers_example():
    toks = lang.tokenize("void foo(int a){int b;}")
    assert texts(trainer.normalize_identifiers(toks)) == [
        "void", "FUNC", "(", "int", "VAR1", ")", "{", "int", "VAR2", ";", "}",
    ]


def test_normalize_maps_callees_to_func():
    toks = lang.tokenize("void foo(int a){log(a);}")
    out = texts(trainer.normalize_identifiers(toks))
    assert out.count("FUNC") == 2
    assert "VAR1" in out


def test_normalize_idempotent_and_alpha_invariant():
    a = lang.tokenize("void foo(int x){int y = x + 1; y = y - 2;}")
    b = lang.tokenize("void qux(int m){int n = m + 1; n = n - 2;}")
    na, nb = trainer.normalize_identifiers(a), trainer.normalize_identifiers(b)
    assert texts(na) == texts(nb)
    assert texts(trainer.normalize_identifiers(na)) == texts(na)


def test_featurize_empty_and_norm():
    assert not trainer.featurize([]).any()
    vec = trainer.featurize(lang.tokenize("void f() { int a = 1; }"))
    assert vec.shape == (trainer.DEFAULT_WIDTH,)
    assert np.linalg.norm(vec) == pytest.approx(1.0)


def test_featurize_is_order_sensitive():
    # moving the declaration past the if-block changes the crossing bigrams
    a = lang.tokenize("void f(int a) { if (a < 1) { a = 2; } int c = 3; }")
    b = lang.tokenize("void f(int a) { int c = 3; if (a < 1) { a = 2; } }")
    va, vb = trainer.featurize(a), trainer.featurize(b)
    assert not np.array_equal(va, vb)


def _zero_checkpoint(width=64, hidden=4):
    config = trainer.TrainConfig(width=width, hidden=hidden)
    params = {
        "W1": np.zeros((width, hidden)),
        "b1": np.zeros(hidden),
        "W2": np.zeros(hidden),
        "b2": np.asarray(0.0),
    }
    return trainer.Checkpoint(params, config, "", 0.0, -1, 0)


def test_predict_tie_goes_positive():
    ck = _zero_checkpoint()
    label, prob = trainer.predict(ck, lang.tokenize("void f() { }"))
    assert prob == pytest.approx(0.5)
    assert label == 1


def test_predict_ignores_whitespace_and_formatting():
    ck = _probe_checkpoint()
    a = lang.tokenize("void f() { int i = 25; }")
    b = lang.tokenize("void   f()\n{\n    int i=25;\n}")
    assert trainer.predict(ck, a) == trainer.predict(ck, b)


def test_predict_alpha_invariance():
    ck = _probe_checkpoint()
    a = lang.tokenize("void f() { int alpha = 25; }")
    b = lang.tokenize("void g() { int beta = 25; }")
    assert trainer.predict(ck, a) == trainer.predict(ck, b)


def _probe_checkpoint(width=4096):
    """Predicts positive exactly when a token hashes to the '25' bucket."""
    bucket = feats_impl.fnv1a64("U\x1f25".encode()) % width
    config = trainer.TrainConfig(width=width, hidden=2)
    params = {
        "W1": np.zeros((width, 2)),
        "b1": np.zeros(2),
        "W2": np.array([12.0, 0.0]),
        "b2": np.asarray(-5.0),
    }
    params["W1"][bucket, 0] = 60.0
    return trainer.Checkpoint(params, config, "", 0.0, -1, 0)


def _mini_testset():
    fp = lambda arr: Fingerprint("buffer_overflow", arr)
    rows = [
        ("p1", "void f() { int a[4]; int i = 25; a[i] = 1; }", 1, fp("a")),
        ("p2", "void f() { int a[4]; int i = 25; a[i] = 2; }", 1, fp("a")),
        ("p3", "void f() { int a[4]; a[25] = 3; }", 1, fp("a")),
        ("p4", "void f() { int a[4]; int i = 9; a[i] = 1; }", 1, fp("a")),  # missed
        ("n1", "void f() { int i = 3; }", 0, None),
        ("n2", "void f() { int i = 4; }", 0, None),
        ("n3", "void f() { int i = 25; }", 0, None),  # false positive bait
    ]
    return [build_sample(sid, lang.tokenize(src), label, bug) for sid, src, label, bug in rows]


def test_evaluate_counts_and_formulas():
    report = trainer.evaluate(_probe_checkpoint(), _mini_testset())
    assert (report.tp, report.fn, report.fp, report.tn) == (3, 1, 1, 2)
    assert report.recall == pytest.approx(0.75)
    assert report.precision == pytest.approx(3 / 4)
    assert report.f1 == pytest.approx(0.75)
    assert report.accuracy == pytest.approx(5 / 7)
    assert report.undefined == []


def test_evaluate_all_correct():
    testset = [s for s in _mini_testset() if s.id in ("p1", "p2", "p3", "n1", "n2")]
    report = trainer.evaluate(_probe_checkpoint(), testset)
    assert report.precision == report.recall == report.f1 == report.accuracy == 1.0


def test_evaluate_undefined_metrics_reported_absent():
    testset = [s for s in _mini_testset() if s.id in ("n1", "n2")]
    report = trainer.evaluate(_probe_checkpoint(), testset)
    assert report.recall is None
    assert report.precision is None
    assert report.f1 is None
    assert report.accuracy == 1.0
    assert set(report.undefined) == {"precision", "recall", "f1"}


def test_format_eval_one_decimal():
    report = trainer.evaluate(_probe_checkpoint(), _mini_testset())
    line = trainer.format_eval(report)
    assert "F1 75.0" in line and "Recall 75.0" in line


def test_grad_check_against_finite_differences():
    assert trainer.grad_check(eps=1e-5, seed=0, checks=150) < 1e-4


def test_quadratic_loss_finite_difference_is_exact():
    # linear model, quadratic loss: central differences are exact up to roundoff
    rng = np.random.default_rng(5)
    X = rng.normal(size=(20, 6))
    y = rng.normal(size=20)
    w = rng.normal(size=6)

    def loss(weights):
        r = X @ weights - y
        return 0.5 * float(r @ r)

    analytic = X.T @ (X @ w - y)
    eps = 1e-5
    worst = 0.0
    for i in range(6):
        up, down = w.copy(), w.copy()
        up[i] += eps
        down[i] -= eps
        fd = (loss(up) - loss(down)) / (2 * eps)
        worst = max(worst, abs(fd - analytic[i]) / max(abs(analytic[i]), 1.0))
    assert worst < 1e-8


def test_grad_check_zero_input_is_finite():
    loss, grads = trainer._forward_backward(
        {
            "W1": np.zeros((8, 4)),
            "b1": np.zeros(4),
            "W2": np.zeros(4),
            "b2": np.asarray(0.0),
        },
        np.zeros((3, 8)),
        np.array([0.0, 1.0, 1.0]),
    )
    assert np.isfinite(loss)
    assert all(np.isfinite(g).all() for g in grads.values())


def _train_sets():
    samples = gen.generate(gen.GenConfig(count=160, seed=21))
    parts = gen.split(samples, (80, 10, 10), seed=21)
    return parts["train"], parts["val"]


def test_train_is_deterministic():
    train, val = _train_sets()
    cfg = trainer.TrainConfig(seed=3, max_epochs=6, batch_size=36)
    a = trainer.train(train, val, cfg)
    b = trainer.train(train, val, cfg)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)


def test_checkpoint_roundtrip_bit_identical(tmp_path):
    train, val = _train_sets()
    cfg = trainer.TrainConfig(seed=3, max_epochs=4, batch_size=36)
    ck = trainer.train(train, val, cfg)
    path = tmp_path / "ck.json"
    ck.save(path)
    loaded = trainer.Checkpoint.load(path)
    for name in ck.params:
        assert ck.params[name].tobytes() == loaded.params[name].tobytes()
    sample = train[0]
    assert trainer.predict(ck, sample) == trainer.predict(loaded, sample)


def test_ranked_order_provenance_digest():
    train, val = _train_sets()
    cfg = trainer.TrainConfig(seed=1, max_epochs=5, batch_size=36, order="difficulty")
    ck = trainer.train(train, val, cfg)
    ranked = metrics.rank(train, "difficulty")
    expected = trainer.order_digest([ranked] * ck.epochs_run)
    assert ck.order_digest == expected


def test_hybrid_order_equals_ranked_order():
    train, val = _train_sets()
    a = trainer.train(train, val, trainer.TrainConfig(seed=1, max_epochs=3, order="difficulty"))
    b = trainer.train(train, val, trainer.TrainConfig(seed=1, max_epochs=3, order="hybrid:difficulty"))
    assert a.order_digest == b.order_digest


def test_natural_order_provenance_digest():
    train, val = _train_sets()
    cfg = trainer.TrainConfig(seed=5, max_epochs=4, batch_size=36, order="natural")
    ck = trainer.train(train, val, cfg)
    ids = [s.id for s in train]
    streams = [trainer.natural_order(5, epoch, ids) for epoch in range(ck.epochs_run)]
    assert ck.order_digest == trainer.order_digest(streams)
    assert streams[0] != streams[1]  # reshuffles between epochs


def test_no_early_stop_before_patience_budget():
    train, val = _train_sets()
    cfg = trainer.TrainConfig(seed=2, max_epochs=5, patience=10, batch_size=36)
    ck = trainer.train(train, val, cfg)
    assert ck.epochs_run == 5


def test_early_stop_on_plateau():
    train, _ = _train_sets()
    # validation labels decorrelated from features: val loss hits a floor fast
    contradiction = [
        build_sample("x1", lang.tokenize("void f() { int q[4]; q[25] = 1; }"), 1, Fingerprint("buffer_overflow", "q")),
        build_sample("x0", lang.tokenize("void g() { int r[4]; r[25] = 1; }"), 1, Fingerprint("buffer_overflow", "r")),
    ]
    cfg = trainer.TrainConfig(seed=2, max_epochs=300, patience=3, batch_size=36)
    ck = trainer.train(train, contradiction, cfg)
    assert ck.epochs_run < 300
    assert ck.best_epoch <= ck.epochs_run - 1


def test_config_validation():
    with pytest.raises(ValueError):
        trainer.TrainConfig(patience=0)
    with pytest.raises(ValueError):
        trainer.TrainConfig(dropout=1.0)
    with pytest.raises(ValueError):
        trainer.TrainConfig(order="volume_x")
    with pytest.raises(ValueError):
        trainer.train([], [], trainer.TrainConfig())


def test_divergence_guard_raises(monkeypatch):
    # the BCE-on-logits loss is numerically stable, so a non-finite loss is
    # injected to exercise the guard
    train, val = _train_sets()
    real = trainer._forward_backward

    def poisoned(params, X, y, mask=None):
        loss, grads = real(params, X, y, mask)
        return float("nan"), grads

    monkeypatch.setattr(trainer, "_forward_backward", poisoned)
    with pytest.raises(DivergenceError):
        trainer.train(train, val, trainer.TrainConfig(seed=0, max_epochs=2))
