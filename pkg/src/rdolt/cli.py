"""Command-line entry points: run one task, run benchmarks, serve the control API."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import bench as bench_mod
from .backend import ENDPOINT_ENV, load_script, resolve_backend, scripted_replay
from .errors import ConfigError, RdoltError
from .model import KpmStrategy, RunConfig, ScorerMode, Task, Tier, Variant
from .pipeline import run_vanilla, run_variant
from .scoring import make_scorer
from .store import append_run_record, default_store_path

VARIANT_ALIASES = {
    "sequential": Variant.SINGLE_STEP_SEQUENTIAL,
    "oneshot": Variant.SINGLE_STEP_ONE_SHOT,
    "one-shot": Variant.SINGLE_STEP_ONE_SHOT,
    "fewshot2": Variant.FEW_SHOT_2,
    "multi3": Variant.MULTI_REQUEST_3,
    "multi-unlimited": Variant.MULTI_REQUEST_UNLIMITED,
}

_INT_FIELDS = {"n_thoughts", "threshold", "regen_cap", "kpm_round_cap",
               "max_context_tokens", "seed"}
_FLOAT_FIELDS = {"temperature"}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "bench":
            return cmd_bench(args)
        return cmd_serve(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RdoltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdolt")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one task through the pipeline")
    run.add_argument("--question", help="inline task statement")
    run.add_argument("--task-file", help="JSON file with task fields")
    run.add_argument("--gold", help="gold answer for grading the run")
    run.add_argument("--source", default="generic", help="dataset tag for the task")
    run.add_argument("--vanilla", action="store_true",
                     help="single-prompt baseline: ask the question, take the answer")
    _config_flags(run)
    run.add_argument("--out", help="run-record JSONL path (default runs/<date>.jsonl)")

    bench = sub.add_parser("bench", help="evaluate a dataset, optionally sweeping")
    bench.add_argument("--dataset", help="dataset file path")
    bench.add_argument("--format", default="generic_jsonl",
                       choices=["gsm8k_jsonl", "svamp_json", "multiarith_json",
                                "lastletter_jsonl", "generic_jsonl"])
    bench.add_argument("--limit", type=int, help="attempt at most N items")
    bench.add_argument("--sweep", choices=["thresholds", "thoughts"])
    bench.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    _config_flags(bench)
    bench.add_argument("--out", help="report path prefix (writes .csv and .txt)")

    serve = sub.add_parser("serve", help="start the HTTP control service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--store", help="run-record JSONL path for completed runs")
    return parser


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--variant", help="execution variant "
                   f"({', '.join(VARIANT_ALIASES)} or a full variant name)")
    p.add_argument("--threshold", type=int)
    p.add_argument("--n-thoughts", type=int, dest="n_thoughts")
    p.add_argument("--scorer", choices=[m.value for m in ScorerMode])
    p.add_argument("--kpm-strategy", dest="kpm_strategy",
                   choices=[s.value for s in KpmStrategy])
    p.add_argument("--backend", help="endpoint URL or scripted:<path> "
                   f"(default ${ENDPOINT_ENV})")
    p.add_argument("--model")
    p.add_argument("--temperature", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--prompt-dir", dest="prompt_dir", help="template override directory")


def parse_config_file(path: str | Path) -> dict:
    """Flat key=value lines mirroring run-config field names; '#' comments."""
    values: dict = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Precedence: flag over config file over default."""
    values = default_run_config_dict()
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            if key not in values:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    for key in ("threshold", "n_thoughts", "scorer", "kpm_strategy", "variant",
                "model", "temperature", "seed", "backend"):
        flag = getattr(args, key, None)
        if flag is None:
            continue
        if key == "scorer":
            values["scorer_mode"] = flag
        elif key == "backend":
            values["endpoint"] = flag
        elif key == "variant":
            values["variant"] = _parse_variant(flag)
        else:
            values[key] = flag
    config = RunConfig.from_dict(values)
    config.validate()
    return config


def default_run_config_dict() -> dict:
    from .model import default_run_config
    return default_run_config().to_dict()


def _coerce(key: str, raw: str):
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key == "variant":
        return _parse_variant(raw) if raw and raw != "none" else None
    return raw


def _parse_variant(flag: str) -> Optional[str]:
    if not flag or flag in ("none", "default"):
        return None
    if flag in VARIANT_ALIASES:
        return VARIANT_ALIASES[flag].value
    try:
        return Variant(flag).value
    except ValueError:
        raise ConfigError(f"unknown variant {flag!r}")


def _resolve_backend_arg(args: argparse.Namespace, config: RunConfig):
    import os
    spec = getattr(args, "backend", None) or config.endpoint or os.environ.get(ENDPOINT_ENV, "")
    if not spec:
        raise ConfigError(f"no backend configured: pass --backend or set ${ENDPOINT_ENV}")
    return spec


def cmd_run(args: argparse.Namespace) -> int:
    if not args.question and not args.task_file:
        print("error: one of --question or --task-file is required", file=sys.stderr)
        return 2
    config = build_config(args)
    if args.task_file:
        task = Task.from_dict(json.loads(Path(args.task_file).read_text(encoding="utf-8")))
    else:
        task = Task(id="cli-task", statement=args.question,
                    gold_answer=args.gold, source=args.source)
    spec = _resolve_backend_arg(args, config)
    backend = resolve_backend(spec)
    scorer = make_scorer(config)

    store_path = Path(args.out) if args.out else default_store_path()
    try:
        if args.vanilla:
            record = run_vanilla(task, backend, config)
        else:
            record = run_variant(task, backend, scorer, config,
                                 prompt_dir=args.prompt_dir)
    except RdoltError as exc:
        failed = getattr(exc, "record", None)
        if failed is not None:
            append_run_record(store_path, failed)
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if task.gold_answer is not None:
        record.grade = bench_mod.grade(record, bench_mod.BenchmarkItem(
            task=task, kind=bench_mod.answer_kind_for_source(task.source)))
    append_run_record(store_path, record)

    if record.kpm is not None:
        for tier in Tier.ordered():
            outcomes = record.kpm.outcomes_for(tier)
            last = outcomes[-1]
            print(f"{tier.label}: {len(outcomes)} round(s), "
                  f"selected {len(last.selected)}/{len(last.generated)}")
    print(f"Final answer: {record.normalized_answer}")
    if record.grade:
        print(f"Grade: {record.grade}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if not args.dataset:
        print("error: --dataset is required", file=sys.stderr)
        return 2
    config = build_config(args)
    try:
        items = bench_mod.load_dataset(args.dataset, args.format)
    except (RdoltError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.limit is not None:
        items = items[:args.limit]
    print(f"items attempted: {len(items)}")

    spec = _resolve_backend_arg(args, config)
    if spec.startswith("scripted:"):
        script = load_script(spec[len("scripted:"):])
        backend = lambda: scripted_replay(script)  # noqa: E731  fresh script per run
    else:
        backend = resolve_backend(spec)

    if args.sweep == "thresholds":
        report = bench_mod.sweep_thresholds(items, backend, config,
                                            variants=[config.variant],
                                            jobs=args.jobs, prompt_dir=args.prompt_dir)
    elif args.sweep == "thoughts":
        report = bench_mod.sweep_thought_counts(items, backend, config,
                                                jobs=args.jobs,
                                                prompt_dir=args.prompt_dir)
    else:
        report = bench_mod.sweep_thresholds(items, backend, config,
                                            thresholds=[config.threshold],
                                            variants=[config.variant],
                                            jobs=args.jobs, prompt_dir=args.prompt_dir)

    print(report.to_text())
    if args.out:
        csv_path = Path(f"{args.out}.csv")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(report.to_csv(), encoding="utf-8")
        Path(f"{args.out}.txt").write_text(report.to_text(), encoding="utf-8")
        print(f"wrote {args.out}.csv and {args.out}.txt")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_path=args.store)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
