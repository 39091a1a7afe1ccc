"""Deterministic synthetic corpus of buffer-overflow programs.

Every sample is one function: filler declarations, a fixed-size array,
optional constant-driven control flow feeding an index variable, and a
single array write.  All control flow is decidable from literals, every
read is of an initialized variable and loop bounds are small constants,
so the corpus is closed: the analyzer labels it exactly, with definite
findings only.

Unsafe programs push the written index out of bounds in one of three
ways: an oversized initializer, a negative initializer written as
``0 - m``, or an oversized literal index.  Safe programs keep all their
literals small, so surface token statistics correlate with the label.
That is deliberate: the corpora exist to expose classifiers that learn
such shortcuts instead of the bound-versus-index relation.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from sigaware import lang
from sigaware.analyzer import analyze
from sigaware.bugs import BUFFER_OVERFLOW, Fingerprint
from sigaware.errors import DataError, DecoyCollision
from sigaware.samples import ORIGIN_BASE, Sample, build_sample
from sigaware.tokens import IDENTIFIER, Token

_SCALARS = ["a", "b", "c", "i", "j", "n", "m", "s", "t", "u", "v", "w", "x", "y"]
_ARRAYS = ["buf", "arr", "data", "vec", "mem", "store"]
_FUNCS = ["foo", "bar", "proc", "calc", "work", "update", "handle", "combine"]

# literals in safe samples never exceed this; unsafe initializers start above it
_SAFE_LITERAL_MAX = 20
# a small pool keeps the out-of-bounds magnitudes recognizable surface features
_HIGH_TARGETS = (25, 30, 42, 57)
_NEG_TARGET = (-8, -1)


@dataclass(slots=True)
class GenConfig:
    count: int
    seed: int
    balance: float = 0.5
    max_depth: int = 3
    max_loop_bound: int = 8
    decoy: tuple[str, float] | None = None

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("count must be positive")
        if not 0.0 <= self.balance <= 1.0:
            raise ValueError("balance must be in [0, 1]")
        if not 2 <= self.max_loop_bound <= 64:
            raise ValueError("max_loop_bound must be in [2, 64]")
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")


def _derived_rng(seed: int, *parts) -> random.Random:
    key = ":".join(str(p) for p in (seed,) + parts).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def stmt(self, text: str):
        self.lines.append("    " * self.depth + text)

    def open(self, header: str):
        self.stmt(header + " {")
        self.depth += 1

    def reopen_else(self):
        self.depth -= 1
        self.stmt("} else {")
        self.depth += 1

    def close(self):
        self.depth -= 1
        self.stmt("}")

    def source(self) -> str:
        return "\n".join(self.lines)


class _ProgramBuilder:
    """Emits one program while tracking concrete variable values.

    Only statements on executed paths update the tracked environment, so
    the final value of the index variable is known exactly by the time
    the array write is emitted.  Index bumps on executed paths never
    exceed the delta budget they were given.
    """

    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.w = _Writer()
        self.env: dict[str, int] = {}
        self._pool = rng.sample(_SCALARS, len(_SCALARS))
        self._synth = 0
        self.fillers: list[str] = []

    def fresh(self) -> str:
        if self._pool:
            return self._pool.pop()
        self._synth += 1
        return f"t{self._synth}"

    def emit_fillers(self, count: int):
        for _ in range(count):
            name = self.fresh()
            value = self.rng.randint(0, _SAFE_LITERAL_MAX)
            self.env[name] = value
            self.fillers.append(name)
            self.w.stmt(f"int {name} = {value};")

    def _cond(self) -> tuple[str, bool]:
        """A comparison over known quantities and its concrete truth."""
        rng = self.rng
        left = rng.choice(self.fillers)
        lval = self.env[left]
        others = [f for f in self.fillers if f != left]
        if others and rng.random() < 0.5:
            right = rng.choice(others)
            rval, rtxt = self.env[right], right
        else:
            rval = rng.randint(0, _SAFE_LITERAL_MAX)
            rtxt = str(rval)
        op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
        truth = {
            "<": lval < rval,
            "<=": lval <= rval,
            ">": lval > rval,
            ">=": lval >= rval,
            "==": lval == rval,
            "!=": lval != rval,
        }[op]
        return f"{left} {op} {rtxt}", truth

    def _bump_stmt(self, var: str, delta: int) -> str:
        if delta >= 0:
            return f"{var} = {var} + {delta};"
        return f"{var} = {var} - {-delta};"

    def _bump(self, idx: str | None, budget: int, executes: bool, limit: int) -> int:
        """Emit one increment statement; returns the delta applied to idx."""
        rng = self.rng
        if idx is not None and (not executes or budget >= 1):
            delta = rng.randint(1, min(limit, budget) if executes else limit)
            self.w.stmt(self._bump_stmt(idx, delta))
            return delta if executes else 0
        var = rng.choice(self.fillers)
        delta = rng.randint(1, limit) * (1 if rng.random() < 0.7 else -1)
        self.w.stmt(self._bump_stmt(var, delta))
        if executes:
            self.env[var] += delta
        return 0

    def emit_layer(self, idx: str | None, budget: int, executed: bool, depth: int) -> int:
        """One control-flow layer; returns the total delta applied to idx."""
        rng = self.rng
        kind = rng.choice(["if", "for", "while", "noise_if", "noise_for"])
        target = idx if not kind.startswith("noise") else None
        applied = 0
        if kind in ("if", "noise_if"):
            cond, truth = self._cond()
            self.w.open(f"if ({cond})")
            applied += self._bump(target, budget, executed and truth, limit=3)
            if depth < 3 and rng.random() < 0.35:
                applied += self.emit_layer(idx, budget - applied, executed and truth, depth + 1)
            if rng.random() < 0.4:
                self.w.reopen_else()
                applied += self._bump(target, budget - applied, executed and not truth, limit=2)
            self.w.close()
            return applied

        counter = self.fresh()
        trips = rng.randint(2, min(6, self.cfg.max_loop_bound))
        per_iter = 0
        if target is not None and executed:
            per_iter = min(2, budget // trips)
        if target is None or (executed and per_iter == 0):
            target = None
            var = rng.choice(self.fillers)
            per_iter = rng.randint(1, 2)
        else:
            var = target
            per_iter = rng.randint(1, per_iter) if executed else rng.randint(1, 2)
        self.w.stmt(f"int {counter} = 0;")
        if kind in ("for", "noise_for"):
            self.w.open(f"for ({counter} = 0; {counter} < {trips}; {counter} = {counter} + 1)")
            self.w.stmt(self._bump_stmt(var, per_iter))
            self.w.close()
        else:
            self.w.open(f"while ({counter} < {trips})")
            self.w.stmt(self._bump_stmt(var, per_iter))
            self.w.stmt(f"{counter} = {counter} + 1;")
            self.w.close()
        if executed:
            total = trips * per_iter
            if target is None:
                self.env[var] += total
            else:
                applied = total
        return applied


def _literal(value: int) -> str:
    return f"0 - {-value}" if value < 0 else str(value)


def _build_program(rng: random.Random, cfg: GenConfig, unsafe: bool) -> tuple[str, str]:
    """Returns (source, array name)."""
    b = _ProgramBuilder(rng, cfg)
    fname = rng.choice(_FUNCS)
    params = [b.fresh() for _ in range(rng.randint(0, 2))]
    b.w.open(f"void {fname}({', '.join('int ' + p for p in params)})")

    b.emit_fillers(rng.randint(1, 3))
    arr = rng.choice(_ARRAYS)
    size = rng.randint(4, 12)
    b.w.stmt(f"int {arr}[{size}];")

    if unsafe:
        flavor = rng.choices(["var_high", "var_neg", "direct"], weights=[4, 3, 3], k=1)[0]
    else:
        flavor = rng.choices(["var", "direct"], weights=[7, 3], k=1)[0]
    write_value = rng.randint(0, 9)

    if flavor == "direct":
        for _ in range(rng.randint(0, cfg.max_depth)):
            b.emit_layer(None, 0, True, 1)
        index = rng.choice(_HIGH_TARGETS) if unsafe else rng.randint(0, size - 1)
        b.w.stmt(f"{arr}[{index}] = {write_value};")
    else:
        idx = b.fresh()
        if flavor == "var_high":
            # initializer already out of bounds; layer deltas only push further out
            budget, init = 4, rng.choice(_HIGH_TARGETS)
        elif flavor == "var_neg":
            budget, init = min(6, size - 1), None
        else:
            budget, init = size - 1, None
        slot = len(b.w.lines)
        indent = "    " * b.w.depth
        b.w.lines.append("")  # idx declaration back-filled below
        delta = 0
        for _ in range(rng.randint(0, cfg.max_depth)):
            delta += b.emit_layer(idx, budget - delta, True, 1)
        if init is None:
            target = rng.randint(*_NEG_TARGET) if flavor == "var_neg" else rng.randint(delta, size - 1)
            init = target - delta
        b.w.lines[slot] = f"{indent}int {idx} = {_literal(init)};"
        b.w.stmt(f"{arr}[{idx}] = {write_value};")

    if rng.random() < 0.4:
        callee = rng.choice([f for f in _FUNCS if f != fname])
        b.w.stmt(f"{callee}({rng.choice(b.fillers)});")
    if rng.random() < 0.3:
        b.w.stmt(f"{rng.choice(b.fillers)} - 1;")

    b.w.close()
    return b.w.source(), arr


def generate(config: GenConfig) -> list[Sample]:
    """Generate the corpus; byte-identical output for identical configs."""
    n_unsafe = round(config.count * config.balance)
    label_rng = _derived_rng(config.seed, "labels")
    unsafe_ids = set(label_rng.sample(range(config.count), n_unsafe))
    samples = []
    for i in range(config.count):
        rng = _derived_rng(config.seed, "sample", i)
        unsafe = i in unsafe_ids
        source, arr = _build_program(rng, config, unsafe)
        tokens = lang.tokenize(source)
        bug = Fingerprint(BUFFER_OVERFLOW, arr) if unsafe else None
        sample = build_sample(f"s{i:06d}", tokens, 1 if unsafe else 0, bug, ORIGIN_BASE, None)
        _self_check(sample)
        samples.append(sample)
    return samples


def _self_check(sample: Sample) -> None:
    reports = analyze(lang.parse(sample.tokens))
    if sample.label == 0:
        if reports:
            raise AssertionError(f"generator produced an unintended bug in {sample.id}")
    elif len(reports) != 1 or reports[0].certainty != "definite" or not sample.bug.matches(reports[0]):
        raise AssertionError(f"generator bug mismatch in {sample.id}: {reports}")


def plant_decoy(samples: list[Sample], decoy: str, correlation: float) -> list[Sample]:
    """Rename one scalar to ``decoy`` in a fixed fraction of unsafe samples.

    Exactly floor(correlation * n_unsafe) unsafe samples (first in id
    order) get the rename; safe samples are untouched, so the decoy
    identifier occurs only under label 1.  The rename is bijective per
    sample: labels, bugs, control flow and complexity metrics are
    unchanged.
    """
    if not 0.5 < correlation <= 1.0:
        raise ValueError("correlation must be in (0.5, 1]")
    for s in samples:
        if any(t.kind == IDENTIFIER and t.text == decoy for t in s.tokens):
            raise DecoyCollision(f"decoy name {decoy!r} already occurs in sample {s.id}")
    unsafe = sorted((s for s in samples if s.label == 1), key=lambda s: s.id)
    chosen = {s.id for s in unsafe[: int(correlation * len(unsafe))]}
    return [_rename_first_scalar(s, decoy) if s.id in chosen else s for s in samples]


def _rename_first_scalar(sample: Sample, decoy: str) -> Sample:
    ast = lang.parse(sample.tokens)
    victim = None
    for stmt in ast.body:
        if type(stmt).__name__ == "Decl":
            victim = stmt.name
            break
    if victim is None and ast.params:
        victim = ast.params[0]
    if victim is None:
        raise DataError(f"sample {sample.id} has no scalar to rename")
    renamed = [
        Token(t.kind, decoy if (t.kind == IDENTIFIER and t.text == victim) else t.text, t.index)
        for t in sample.tokens
    ]
    return build_sample(sample.id, renamed, sample.label, sample.bug, sample.origin, sample.parent_id)


def split(
    samples: list[Sample],
    ratios: tuple[int, int, int] = (80, 10, 10),
    seed: int = 0,
) -> dict[str, list[Sample]]:
    """Label-stratified, seeded, disjoint and exhaustive train/val/test split."""
    if sum(ratios) != 100:
        raise ValueError("split ratios must sum to 100")
    names = ("train", "val", "test")
    buckets: dict[str, list[Sample]] = {name: [] for name in names}
    for label in (0, 1):
        group = sorted((s for s in samples if s.label == label), key=lambda s: s.id)
        _derived_rng(seed, "split", label).shuffle(group)
        n = len(group)
        counts = [n * r // 100 for r in ratios]
        order = sorted(range(3), key=lambda i: (n * ratios[i] % 100, -i), reverse=True)
        for i in order[: n - sum(counts)]:
            counts[i] += 1
        start = 0
        for name, c in zip(names, counts):
            buckets[name].extend(group[start : start + c])
            start += c
    for name in names:
        buckets[name].sort(key=lambda s: s.id)
    return buckets
