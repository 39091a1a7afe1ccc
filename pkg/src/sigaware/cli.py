"""Command-line pipeline: gen, split, metrics, augment, mix, train, eval,
sar, introspect, and a one-config end-to-end pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 analysis budget
exceeded.  All stages are seeded and write deterministic artifacts; the
pipeline additionally writes a manifest recording config, seeds and
output digests (the manifest's wall-clock field is the only
nondeterministic byte in a rerun).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

from sigaware import augment as augment_mod
from sigaware import gen as gen_mod
from sigaware import introspect as introspect_mod
from sigaware import saraudit, trainer
from sigaware.errors import AnalysisBudgetExceeded, SigawareError
from sigaware.metrics import METRIC_NAMES
from sigaware.samples import read_samples, write_samples

VERSION = "0.1.0"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _parse_decoy(spec: str) -> tuple[str, float]:
    name, _, frac = spec.partition(":")
    if not name or not frac:
        raise SigawareError(f"decoy spec must be name:fraction, got {spec!r}")
    return name, float(frac)


def _parse_ratios(spec: str) -> tuple[int, int, int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise SigawareError(f"ratios must be a:b:c, got {spec!r}")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_gen(args) -> int:
    config = gen_mod.GenConfig(
        count=args.count,
        seed=args.seed,
        balance=args.balance,
        max_depth=args.max_depth,
        max_loop_bound=args.max_loop_bound,
        decoy=_parse_decoy(args.decoy) if args.decoy else None,
    )
    samples = gen_mod.generate(config)
    if config.decoy is not None:
        samples = gen_mod.plant_decoy(samples, config.decoy[0], config.decoy[1])
    write_samples(args.out, samples)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_split(args) -> int:
    samples = read_samples(args.infile)
    parts = gen_mod.split(samples, _parse_ratios(args.ratios), args.seed)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, part in parts.items():
        write_samples(outdir / f"{name}.jsonl", part)
    print(
        "split "
        + " ".join(f"{name}={len(part)}" for name, part in parts.items())
        + f" into {outdir}"
    )
    return 0


def cmd_metrics(args) -> int:
    samples = read_samples(args.infile)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", *METRIC_NAMES])
        for s in sorted(samples, key=lambda x: x.id):
            row = [s.id]
            for name in METRIC_NAMES:
                value = s.metrics.get(name)
                row.append(str(value) if isinstance(value, int) else f"{value:.6f}")
            writer.writerow(row)
    print(f"wrote metrics for {len(samples)} samples to {args.out}")
    return 0


def cmd_augment(args) -> int:
    samples = read_samples(args.infile)
    result = augment_mod.build_pool(samples, args.match, args.budget, args.jobs)
    write_samples(args.out, result.samples)
    if args.emit_trace:
        with open(args.emit_trace, "w", encoding="utf-8") as fh:
            for s in sorted(samples, key=lambda x: x.id):
                _children, trace = augment_mod.simplify_sample(s, args.match, args.budget)
                fh.write(json.dumps({"sample_id": s.id, "trace": trace.to_json()}, sort_keys=True) + "\n")
    stats = json.dumps(result.stats, sort_keys=True)
    print(f"pool {len(result.samples)} samples ({stats}); {len(result.flagged)} parents hit the budget")
    return 0


def cmd_mix(args) -> int:
    base = read_samples(args.base)
    pool = read_samples(args.pool)
    frac = "all" if args.frac == "all" else float(args.frac)
    mixed, short = augment_mod.build_augmented_set(base, pool, frac, args.seed)
    write_samples(args.out, mixed)
    note = " (pool exhausted)" if short else ""
    print(f"wrote {len(mixed)} samples to {args.out}{note}")
    return 0


def cmd_train(args) -> int:
    trainset = read_samples(args.train)
    valset = read_samples(args.val)
    config = trainer.TrainConfig(
        lr=args.lr,
        batch_size=args.batch,
        dropout=args.dropout,
        patience=args.patience,
        max_epochs=args.epochs,
        seed=args.seed,
        order=args.order,
        hidden=args.hidden,
        width=args.width,
    )
    checkpoint = trainer.train(trainset, valset, config)
    checkpoint.save(args.out)
    print(
        f"trained {args.order} order: best val loss {checkpoint.best_val_loss:.6f} "
        f"at epoch {checkpoint.best_epoch} ({checkpoint.epochs_run} epochs run)"
    )
    return 0


def cmd_eval(args) -> int:
    checkpoint = trainer.Checkpoint.load(args.model)
    testset = read_samples(args.test)
    report = trainer.evaluate(checkpoint, testset)
    Path(args.out).write_text(json.dumps(report.to_json(), sort_keys=True, indent=1), encoding="utf-8")
    print(trainer.format_eval(report))
    return 0


def cmd_sar(args) -> int:
    checkpoint = trainer.Checkpoint.load(args.model)
    testset = read_samples(args.test)
    if args.emit_trace:
        with open(args.emit_trace, "w", encoding="utf-8") as fh:
            def sink(sample_id, trace):
                fh.write(json.dumps({"sample_id": sample_id, "trace": trace.to_json()}, sort_keys=True) + "\n")
            report = saraudit.compute_sar(
                checkpoint, testset, args.match, args.budget, trace_sink=sink
            )
    else:
        report = saraudit.compute_sar(checkpoint, testset, args.match, args.budget, args.jobs)
    report.save(args.out)

    def fmt(x):
        return "--" if x is None else f"{100.0 * x:.1f}"

    print(
        f"Recall {fmt(report.recall)} | SAR {fmt(report.sar)} | SAR:Recall {fmt(report.ratio)} | "
        f"TP'={report.tp_prime} FN'={report.fn_prime} FN={report.fn} excluded={len(report.excluded_ids)}"
    )
    return 0


def cmd_introspect(args) -> int:
    samples = read_samples(args.samples)
    metrics_by_id = {s.id: s.metrics for s in samples}
    runs = []
    for path in args.runs:
        report = saraudit.SARReport.load(path)
        runs.append(introspect_mod.partition(report, label=Path(path).stem))
    report = introspect_mod.compare(runs, args.metric, metrics_by_id)
    introspect_mod.write_report(report, args.out)
    for line in report.statements:
        print(line)
    return 0


_PIPELINE_DEFAULTS = {
    "count": "500",
    "seed": "7",
    "balance": "0.5",
    "max_depth": "3",
    "max_loop_bound": "8",
    "decoy": "",
    "ratios": "80:10:10",
    "split_seed": "7",
    "match": "strict",
    "budget": "20000",
    "frac": "50",
    "mix_seed": "7",
    "order": "natural",
    "lr": "0.001",
    "batch": "128",
    "dropout": "0.2",
    "patience": "10",
    "epochs": "40",
    "train_seed": "7",
    "hidden": "64",
    "width": "4096",
    "metric": "difficulty",
    "jobs": "1",
}


def read_config(path: str | Path) -> dict[str, str]:
    """Flat key=value file; blank lines and # comments ignored."""
    config: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SigawareError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config


def run_pipeline(config: dict[str, str], outdir: Path) -> dict:
    """gen -> split -> metrics -> augment -> mix -> train -> eval -> sar -> introspect."""
    started = time.time()
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = dict(_PIPELINE_DEFAULTS)
    unknown = set(config) - set(cfg)
    if unknown:
        raise SigawareError(f"unknown config keys: {sorted(unknown)}")
    cfg.update(config)

    gen_config = gen_mod.GenConfig(
        count=int(cfg["count"]),
        seed=int(cfg["seed"]),
        balance=float(cfg["balance"]),
        max_depth=int(cfg["max_depth"]),
        max_loop_bound=int(cfg["max_loop_bound"]),
        decoy=_parse_decoy(cfg["decoy"]) if cfg["decoy"] else None,
    )
    samples = gen_mod.generate(gen_config)
    if gen_config.decoy is not None:
        samples = gen_mod.plant_decoy(samples, gen_config.decoy[0], gen_config.decoy[1])
    write_samples(outdir / "samples.jsonl", samples)

    parts = gen_mod.split(samples, _parse_ratios(cfg["ratios"]), int(cfg["split_seed"]))
    for name, part in parts.items():
        write_samples(outdir / f"{name}.jsonl", part)

    with open(outdir / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", *METRIC_NAMES])
        for s in sorted(samples, key=lambda x: x.id):
            row = [s.id]
            for name in METRIC_NAMES:
                value = s.metrics.get(name)
                row.append(str(value) if isinstance(value, int) else f"{value:.6f}")
            writer.writerow(row)

    frac = cfg["frac"]
    jobs = int(cfg["jobs"])
    trainset = parts["train"]
    if frac != "0":
        pool = augment_mod.build_pool(trainset, cfg["match"], int(cfg["budget"]), jobs)
        write_samples(outdir / "pool.jsonl", pool.samples)
        trainset, _short = augment_mod.build_augmented_set(
            trainset, pool.samples, "all" if frac == "all" else float(frac), int(cfg["mix_seed"])
        )
        write_samples(outdir / "train_aug.jsonl", trainset)

    train_config = trainer.TrainConfig(
        lr=float(cfg["lr"]),
        batch_size=int(cfg["batch"]),
        dropout=float(cfg["dropout"]),
        patience=int(cfg["patience"]),
        max_epochs=int(cfg["epochs"]),
        seed=int(cfg["train_seed"]),
        order=cfg["order"],
        hidden=int(cfg["hidden"]),
        width=int(cfg["width"]),
    )
    checkpoint = trainer.train(trainset, parts["val"], train_config)
    checkpoint.save(outdir / "checkpoint.json")

    eval_report = trainer.evaluate(checkpoint, parts["test"])
    (outdir / "eval.json").write_text(
        json.dumps(eval_report.to_json(), sort_keys=True, indent=1), encoding="utf-8"
    )

    sar_report = saraudit.compute_sar(
        checkpoint, parts["test"], cfg["match"], int(cfg["budget"]), jobs
    )
    sar_report.save(outdir / "sar.json")

    metrics_by_id = {s.id: s.metrics for s in samples}
    run = introspect_mod.partition(sar_report, label=f"+{frac}% aug" if frac != "0" else "base")
    intro = introspect_mod.compare([run], cfg["metric"], metrics_by_id)
    introspect_mod.write_report(intro, outdir / "introspect")

    artifacts = [
        "samples.jsonl",
        "train.jsonl",
        "val.jsonl",
        "test.jsonl",
        "metrics.csv",
        "checkpoint.json",
        "eval.json",
        "sar.json",
        "introspect/histograms.csv",
        "introspect/summary.json",
    ]
    if frac != "0":
        artifacts[1:1] = ["pool.jsonl", "train_aug.jsonl"]
    manifest = {
        "tool": "sigaware",
        "version": VERSION,
        "config": cfg,
        "seeds": {
            "gen": int(cfg["seed"]),
            "split": int(cfg["split_seed"]),
            "mix": int(cfg["mix_seed"]),
            "train": int(cfg["train_seed"]),
        },
        "outputs": {name: _sha256(outdir / name) for name in artifacts},
        "wall_clock_sec": round(time.time() - started, 3),
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1), encoding="utf-8"
    )
    return manifest


def cmd_pipeline(args) -> int:
    config = read_config(args.config) if args.config else {}
    for override in args.set or []:
        if "=" not in override:
            raise SigawareError(f"--set expects key=value, got {override!r}")
        key, _, value = override.partition("=")
        config[key.strip()] = value.strip()
    outdir = Path(args.out_dir)
    manifest = run_pipeline(config, outdir)
    print(f"pipeline complete; manifest at {outdir / 'manifest.json'} "
          f"({len(manifest['outputs'])} artifacts)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sigaware", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sigaware {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a labeled corpus")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--balance", type=float, default=0.5)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--max-loop-bound", type=int, default=8)
    p.add_argument("--decoy", default="", help="name:fraction identifier decoy for unsafe samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="80:10:10")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("metrics", help="emit complexity metrics CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("augment", help="build the simplification pool")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--match", choices=["strict", "lenient"], default="strict")
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--emit-trace", default="", help="also write reduction traces (JSONL)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("mix", help="mix pool samples into a base training set")
    p.add_argument("--base", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--frac", default="50", help="percent of base size, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("train", help="train the reference classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--order", default="natural",
                   help="natural, a metric name, or hybrid:<metric>")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--width", type=int, default=4096)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="standard metrics on a labeled set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sar", help="signal-aware recall audit")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--match", choices=["strict", "lenient"], default="strict")
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--emit-trace", default="", help="also write reduction traces (JSONL)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sar)

    p = sub.add_parser("introspect", help="compare outcome-group complexity distributions")
    p.add_argument("--runs", nargs="+", required=True, help="sar.json reports, in run order")
    p.add_argument("--samples", required=True, help="samples file carrying cached metrics")
    p.add_argument("--metric", default="difficulty", choices=list(METRIC_NAMES))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_introspect)

    p = sub.add_parser("pipeline", help="run the full flow from one config file")
    p.add_argument("--config", default="", help="flat key=value config file")
    p.add_argument("--set", action="append", help="override config entries (key=value)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AnalysisBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SigawareError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
