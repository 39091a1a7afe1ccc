#!/usr/bin/env python3
"""Compare the compiled kernels against the interpreted fallback.

The hot path of the toolkit is the reduction oracle: parse + verify +
analyze (augmentation) or parse + verify + featurize + score (audits),
invoked hundreds of times per sample.  This benchmark times those
kernels over a generated corpus under both backends and prints the
speedup.  Run after building extensions in place:

    python setup.py build_ext --inplace
    python benchmarks/bench_backends.py [--count 300] [--repeat 3]
"""

import argparse
import time

from sigaware import _backend, gen, lang
from sigaware.ddmin import OracleVerdict, reduce_fixpoint


def _bench(label, fn, repeat):
    best = min(_timed(fn) for _ in range(repeat))
    return label, best


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def kernel_suite(mods, samples):
    lang_impl = mods["lang_impl"]
    interval_impl = mods["interval_impl"]
    feats_impl = mods["feats_impl"]
    codes = [s.code for s in samples]
    token_lists = [lang_impl.tokenize(c) for c in codes]
    asts = [lang_impl.parse(toks) for toks in token_lists]

    def run_tokenize():
        for c in codes:
            lang_impl.tokenize(c)

    def run_verify():
        for toks in token_lists:
            lang_impl.verify(toks)

    def run_render():
        for toks in token_lists:
            lang_impl.render(toks)

    def run_analyze():
        for ast in asts:
            interval_impl.analyze_function(ast)

    def run_featurize():
        for toks in token_lists:
            normalized = feats_impl.normalize_identifiers(toks)
            feats_impl.ngram_buckets([t.text for t in normalized], 4096)

    def run_reduce():
        def oracle(sub):
            return OracleVerdict(lang_impl.verify(sub).valid, "")

        for toks in token_lists[: max(10, len(token_lists) // 20)]:
            reduce_fixpoint(toks, oracle)

    return {
        "tokenize": run_tokenize,
        "verify": run_verify,
        "render": run_render,
        "analyze": run_analyze,
        "featurize": run_featurize,
        "reduce(verify)": run_reduce,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    samples = gen.generate(gen.GenConfig(count=args.count, seed=args.seed))
    active = {
        "lang_impl": _backend.lang_impl,
        "interval_impl": _backend.interval_impl,
        "feats_impl": _backend.feats_impl,
    }
    pure = _backend.pure_backend()
    if _backend.BACKEND == "pure":
        print("active backend is already pure (no compiled kernels found);")
        print("timings below compare the interpreter against itself.\n")

    active_suite = kernel_suite(active, samples)
    pure_suite = kernel_suite(pure, samples)

    print(f"corpus: {args.count} samples, backend = {_backend.BACKEND}")
    print(f"{'kernel':<16} {'compiled':>10} {'pure':>10} {'speedup':>9}")
    for name in active_suite:
        _, fast = _bench(name, active_suite[name], args.repeat)
        _, slow = _bench(name, pure_suite[name], args.repeat)
        ratio = slow / fast if fast > 0 else float("inf")
        print(f"{name:<16} {fast * 1e3:>8.1f}ms {slow * 1e3:>8.1f}ms {ratio:>8.2f}x")


if __name__ == "__main__":
    main()
