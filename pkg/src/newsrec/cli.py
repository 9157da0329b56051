"""Command-line orchestration of end-to-end experiments.

Subcommands form a chain, each consuming the previous stage's artifacts
under the configured output directory:

    newsrec generate --config cfg.json     corpus/{articles,events}.jsonl + vectors.txt
    newsrec train    --config cfg.json     models/model_<day>.json + schema.json
    newsrec run      --config cfg.json     emissions_<treatment>.jsonl + manual.jsonl
    newsrec evaluate --config cfg.json     reports/accuracy.{json,txt} + metrics.csv
    newsrec compare  --config cfg.json     reports/compare_{ab,manual}.{json,txt}

Every stochastic choice is fixed by the config seed, so re-running a
command overwrites its outputs byte-identically.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .corpus import (DAY, Corpus, SyntheticWorldConfig, WordVectors, day_start,
                     generate_world, load_corpus, save_corpus)
from .evaluation import (TTestVariant, collect_metric_samples, compare_manual_recsys,
                         compare_treatments, format_accuracy_table,
                         format_comparison_table, offline_eval, scorers_from_schedule)
from .features import SCHEMA_VERSION, ArticleFeatureCache, FeatureConfig, write_schema
from .gbdt import TrainConfig, TreeEnsemble
from .gbdt import load as load_model
from .gbdt import save as save_model
from .ranker import (PipelineConfig, Treatment, manual_lists, read_emissions,
                     run_pipeline, train_schedule, write_emissions)
from .usefulness import write_metric_samples


class CliError(Exception):
    pass


@dataclass
class ExperimentConfig:
    seed: int
    out: Path
    world: Optional[SyntheticWorldConfig]
    corpus_files: Optional[dict[str, Path]]
    pipeline_raw: dict
    train: TrainConfig
    features_raw: dict
    treatments: list[Treatment]
    manual_updates: tuple[int, int]
    eval_ks: list[int]
    variant: TTestVariant

    @property
    def corpus_dir(self) -> Path:
        return self.out / "corpus"

    @property
    def models_dir(self) -> Path:
        return self.out / "models"

    @property
    def reports_dir(self) -> Path:
        return self.out / "reports"

    def emissions_path(self, treatment: Treatment) -> Path:
        return self.out / f"emissions_{treatment.value}.jsonl"

    @property
    def manual_path(self) -> Path:
        return self.out / "manual.jsonl"


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc.msg}")

    problems: list[str] = []
    world = None
    corpus_files = None
    if ("world" in raw) == ("corpus" in raw):
        problems.append("exactly one of 'world' or 'corpus' must be configured")
    if "world" in raw:
        try:
            world = SyntheticWorldConfig(**raw["world"])
        except (TypeError, ValueError) as exc:
            problems.append(f"world: {exc}")
    if "corpus" in raw:
        missing = [k for k in ("articles", "events", "vectors") if k not in raw["corpus"]]
        if missing:
            problems.append(f"corpus: missing keys {missing}")
        else:
            corpus_files = {k: Path(v) for k, v in raw["corpus"].items()}
    if "out" not in raw:
        problems.append("'out' directory is required")
    try:
        train = TrainConfig(**raw.get("train", {}))
    except (TypeError, ValueError) as exc:
        problems.append(f"train: {exc}")
        train = TrainConfig()
    treatments = []
    for name in raw.get("treatments", ["baseline", "dynamism"]):
        try:
            treatments.append(Treatment(name))
        except ValueError:
            problems.append(f"treatments: unknown treatment {name!r}")
    updates = raw.get("manual_updates_per_day", [8, 16])
    if len(updates) != 2 or updates[0] > updates[1]:
        problems.append("manual_updates_per_day must be [low, high]")
    try:
        variant = TTestVariant(raw.get("variant", "student"))
    except ValueError:
        problems.append(f"variant: unknown variant {raw.get('variant')!r}")
        variant = TTestVariant.STUDENT
    if problems:
        raise CliError("invalid config:\n  " + "\n  ".join(problems))

    return ExperimentConfig(
        seed=int(raw.get("seed", 0)),
        out=Path(raw["out"]),
        world=world,
        corpus_files=corpus_files,
        pipeline_raw=raw.get("pipeline", {}),
        train=train,
        features_raw=raw.get("features", {}),
        treatments=treatments,
        manual_updates=(int(updates[0]), int(updates[1])),
        eval_ks=[int(k) for k in raw.get("eval_ks", [5, 10])],
        variant=variant,
    )


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise CliError(f"missing upstream artifact {path} (run '{produced_by}' first)")
    return path


def _corpus_paths(cfg: ExperimentConfig) -> dict[str, Path]:
    if cfg.corpus_files is not None:
        return cfg.corpus_files
    return {
        "articles": cfg.corpus_dir / "articles.jsonl",
        "events": cfg.corpus_dir / "events.jsonl",
        "vectors": cfg.corpus_dir / "vectors.txt",
    }


def _load_corpus(cfg: ExperimentConfig) -> Corpus:
    paths = _corpus_paths(cfg)
    for p in paths.values():
        _require(p, "newsrec generate")
    vectors = WordVectors.from_file(paths["vectors"])
    return load_corpus(paths["articles"], paths["events"], vectors)


def _feature_config(cfg: ExperimentConfig, corpus: Corpus) -> FeatureConfig:
    return FeatureConfig(embedding_dim=corpus.embedding_dim, **cfg.features_raw)


def _pipeline_config(cfg: ExperimentConfig, corpus: Corpus,
                     treatment: Treatment) -> PipelineConfig:
    raw = dict(cfg.pipeline_raw)
    first_ts = corpus.time_span()[0]
    t_start = raw.pop("t_start", None)
    if t_start is None:
        t_start = day_start(first_ts) + raw.pop("start_day_offset", 1) * DAY
    else:
        raw.pop("start_day_offset", None)
    return PipelineConfig(
        t_start=float(t_start),
        candidate_window=float(raw.get("candidate_window_days", 7.0)) * DAY,
        refresh_interval=float(raw.get("refresh_interval_hours", 1.0)) * 3600.0,
        nightly_train_hour=int(raw.get("nightly_train_hour", 2)),
        treatment=treatment,
        blend_lambda=float(raw.get("lambda", 0.5)),
        rec_label_threshold=float(raw.get("rec_label_threshold", 0.5)),
        rng_seed=cfg.seed,
        train=cfg.train,
        features=_feature_config(cfg, corpus),
        mnpage_cap=raw.get("mnpage_cap"),
    )


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _model_day(path: Path) -> dt.date:
    return dt.date.fromisoformat(path.stem.removeprefix("model_"))


def _load_schedule(cfg: ExperimentConfig, pipe: PipelineConfig
                   ) -> list[tuple[float, TreeEnsemble]]:
    _require(cfg.models_dir, "newsrec train")
    files = sorted(cfg.models_dir.glob("model_*.json"))
    if not files:
        raise CliError(f"no model files under {cfg.models_dir} (run 'newsrec train' first)")
    schedule = []
    for f in files:
        day = _model_day(f)
        ts = dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc).timestamp()
        schedule.append((ts + pipe.nightly_train_hour * 3600.0, load_model(f)))
    return schedule


def cmd_generate(cfg: ExperimentConfig) -> None:
    if cfg.world is None:
        raise CliError("generate requires a 'world' config (a file corpus is already generated)")
    corpus, truth = generate_world(cfg.world)
    cfg.corpus_dir.mkdir(parents=True, exist_ok=True)
    paths = _corpus_paths(cfg)
    save_corpus(corpus, paths["articles"], paths["events"])
    truth.word_vectors.save(paths["vectors"])
    print(f"generated {len(corpus.articles)} articles, {len(corpus.events)} events "
          f"under {cfg.corpus_dir}")


def cmd_train(cfg: ExperimentConfig) -> None:
    corpus = _load_corpus(cfg)
    pipe = _pipeline_config(cfg, corpus, Treatment.BASELINE)
    schedule = train_schedule(corpus, pipe)
    cfg.models_dir.mkdir(parents=True, exist_ok=True)
    for old in cfg.models_dir.glob("model_*.json"):
        old.unlink()
    for ts, model in schedule:
        day = dt.datetime.fromtimestamp(day_start(ts), tz=dt.timezone.utc).date()
        save_model(model, cfg.models_dir / f"model_{day.isoformat()}.json")
    write_schema(pipe.features, cfg.models_dir / "schema.json")
    print(f"trained {len(schedule)} nightly models under {cfg.models_dir}")


def cmd_run(cfg: ExperimentConfig, only: Optional[Treatment] = None,
            blend_lambda: Optional[float] = None) -> None:
    corpus = _load_corpus(cfg)
    users = corpus.user_ids()
    treatments = [only] if only else cfg.treatments
    for treatment in treatments:
        pipe = _pipeline_config(cfg, corpus, treatment)
        if blend_lambda is not None:
            pipe = PipelineConfig(**{**pipe.__dict__, "blend_lambda": blend_lambda})
        schedule = _load_schedule(cfg, pipe)
        emissions = run_pipeline(corpus, pipe, users, models=schedule)
        write_emissions(cfg.emissions_path(treatment), emissions)
        print(f"{treatment.value}: {len(emissions)} lists -> {cfg.emissions_path(treatment)}")
    pipe = _pipeline_config(cfg, corpus, treatments[0])
    manual = manual_lists(corpus, pipe.t_start, corpus.time_span()[1],
                          rng_seed=cfg.seed * 7919 + 11,
                          updates_range=cfg.manual_updates)
    write_emissions(cfg.manual_path, manual)
    print(f"manual: {len(manual)} lists -> {cfg.manual_path}")


def cmd_evaluate(cfg: ExperimentConfig) -> None:
    corpus = _load_corpus(cfg)
    pipe = _pipeline_config(cfg, corpus, Treatment.BASELINE)
    schedule = _load_schedule(cfg, pipe)
    cache = ArticleFeatureCache(corpus, pipe.features)
    scorers = scorers_from_schedule(schedule, cache)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = offline_eval(corpus, scorers, sorted(scorers), ks=cfg.eval_ks)
    cfg.reports_dir.mkdir(parents=True, exist_ok=True)
    _write_json(cfg.reports_dir / "accuracy.json", report.to_dict())
    (cfg.reports_dir / "accuracy.txt").write_text(
        format_accuracy_table(report) + "\n", encoding="utf-8")

    samples = []
    for treatment in cfg.treatments:
        path = cfg.emissions_path(treatment)
        if path.exists():
            emissions = read_emissions(path)
            samples.extend(collect_metric_samples(emissions, corpus, treatment.value))
    write_metric_samples(cfg.reports_dir / "metrics.csv", samples)
    print(format_accuracy_table(report))
    print(f"reports under {cfg.reports_dir}")


def cmd_compare(cfg: ExperimentConfig, variant: Optional[TTestVariant] = None) -> None:
    corpus = _load_corpus(cfg)
    variant = variant or cfg.variant
    cfg.reports_dir.mkdir(parents=True, exist_ok=True)

    if len(cfg.treatments) >= 2:
        a, b = cfg.treatments[0], cfg.treatments[1]
        emissions_a = read_emissions(_require(cfg.emissions_path(a), "newsrec run"))
        emissions_b = read_emissions(_require(cfg.emissions_path(b), "newsrec run"))
        reports = compare_treatments(emissions_a, emissions_b, corpus, variant=variant)
        for r in reports:
            r.validate()
        _write_json(cfg.reports_dir / "compare_ab.json",
                    [r.to_dict() for r in reports])
        table = format_comparison_table(reports, a.value, b.value)
        (cfg.reports_dir / "compare_ab.txt").write_text(table + "\n", encoding="utf-8")
        print(table)

    baseline_path = cfg.emissions_path(cfg.treatments[0])
    manual = read_emissions(_require(cfg.manual_path, "newsrec run"))
    recsys = read_emissions(_require(baseline_path, "newsrec run"))
    from .ranker import Section
    widget = [l for l in recsys if l.section is Section.MN_WIDGET and not l.fallback]
    reports = compare_manual_recsys(manual, widget, corpus, variant=variant)
    for r in reports:
        r.validate()
    _write_json(cfg.reports_dir / "compare_manual.json", [r.to_dict() for r in reports])
    table = format_comparison_table(reports, "manual", "recsys")
    (cfg.reports_dir / "compare_manual.txt").write_text(table + "\n", encoding="utf-8")
    print(table)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsrec",
        description="Content-based news recommendation experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", "train", "run", "evaluate", "compare"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        if name == "run":
            p.add_argument("--treatment", choices=[t.value for t in Treatment],
                           help="run a single treatment")
            p.add_argument("--lambda", dest="blend_lambda", type=float,
                           help="override the re-ranking blend weight")
        if name == "compare":
            p.add_argument("--variant", choices=[v.value for v in TTestVariant],
                           help="t-test variant")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            if cfg.world is not None:
                cfg.world = SyntheticWorldConfig(
                    **{**cfg.world.__dict__, "seed": args.seed})
        if args.out is not None:
            cfg.out = Path(args.out)
        cfg.out.mkdir(parents=True, exist_ok=True)
        if args.command == "generate":
            cmd_generate(cfg)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "run":
            only = Treatment(args.treatment) if args.treatment else None
            cmd_run(cfg, only=only, blend_lambda=args.blend_lambda)
        elif args.command == "evaluate":
            cmd_evaluate(cfg)
        elif args.command == "compare":
            variant = TTestVariant(args.variant) if args.variant else None
            cmd_compare(cfg, variant=variant)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # invariant violations surface as exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
