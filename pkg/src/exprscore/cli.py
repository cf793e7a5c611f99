"""Command-line entry points.

Subcommands: score, curate, benchmark, train-fusion, annotate-serve,
estimate-quality. Exit codes: 0 success, 2 input error, 3 config/model
error. Partial failures (some clips unreadable) still print the rows that
succeeded and exit 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

from . import annotation, fusion, pipeline
from .audio import CANONICAL_RATE, load_wav, resample
from .quality import estimate_quality
from .scorers import ScorerCalibration, SpontaneityConfig, load_calibration

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _resolve_model(args, config: dict) -> fusion.FusionModel:
    path = getattr(args, "model", None) or config.get("fusion_model")
    if path:
        return fusion.load_model(path)
    default = resources.files("exprscore.data").joinpath("fusion_default.json")
    with resources.as_file(default) as p:
        return fusion.load_model(p)


def _resolve_calibration(args, config: dict) -> ScorerCalibration | None:
    path = getattr(args, "calibration", None) or config.get("calibration")
    return load_calibration(path) if path else None


def _cmd_score(args) -> int:
    config = _load_config(args.config)
    try:
        model = _resolve_model(args, config)
    except (OSError, fusion.CorruptModel, fusion.VersionMismatch) as exc:
        print(f"error: cannot load fusion model: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    scorer = pipeline.ClipScorer(
        model,
        calibration=_resolve_calibration(args, config),
        spontaneity=SpontaneityConfig(base_level=args.l_base),
    )

    failed = False
    if not args.json:
        print(f"{'id':<32} {'s_emo':>7} {'s_pros':>7} {'s_spon':>7} {'s_expr':>7}")
    for path in args.paths:
        try:
            clip = load_wav(path)
            if clip.sample_rate != CANONICAL_RATE:
                clip = resample(clip, CANONICAL_RATE)
            scores, s_expr, _, _ = scorer.score_clip(clip, Path(path).stem, str(path))
        except (OSError, ValueError) as exc:
            failed = True
            print(f"error: {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
            continue
        if args.json:
            print(
                json.dumps(
                    {
                        "id": Path(path).stem,
                        "s_emo": scores.s_emo,
                        "s_pros": scores.s_pros,
                        "s_spon": scores.s_spon,
                        "s_expr": s_expr,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(
                f"{Path(path).stem:<32} {scores.s_emo:>7.1f} {scores.s_pros:>7.1f} "
                f"{scores.s_spon:>7.1f} {s_expr:>7.1f}"
            )
    return EXIT_INPUT if failed else EXIT_OK


def _cmd_curate(args) -> int:
    try:
        config = pipeline.CorpusConfig.from_file(args.config_path)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad corpus config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads:
        config.threads = args.threads
    try:
        entries, summary = pipeline.curate(config)
    except pipeline.NoFusionModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _read_scores_csv(path) -> tuple[dict[str, float], dict[str, dict[str, float]]]:
    mean_expr: dict[str, float] = {}
    subs: dict[str, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"system", "s_expr"}
        if not reader.fieldnames or not required.issubset(reader.fieldnames):
            raise ValueError("scores CSV needs at least 'system,s_expr' columns")
        for row in reader:
            name = row["system"]
            mean_expr[name] = float(row["s_expr"])
            subs[name] = {
                key: float(row[key])
                for key in ("s_emo", "s_pros", "s_spon")
                if row.get(key) not in (None, "")
            }
    return mean_expr, subs


def _cmd_benchmark(args) -> int:
    human = None
    if args.human:
        try:
            human = pipeline.load_human_scores(args.human)
        except (OSError, ValueError) as exc:
            print(f"error: bad human scores file: {exc}", file=sys.stderr)
            return EXIT_INPUT

    try:
        if args.scores:
            mean_expr, subs = _read_scores_csv(args.scores)
            report = pipeline.rank_systems(mean_expr, human_scores=human, mean_subscores=subs)
        else:
            if not args.dir:
                print("error: give a system directory or --scores CSV", file=sys.stderr)
                return EXIT_INPUT
            config = _load_config(args.config)
            model = _resolve_model(args, config)
            scorer = pipeline.ClipScorer(
                model,
                calibration=_resolve_calibration(args, config),
                spontaneity=SpontaneityConfig(base_level=args.l_base),
            )
            systems = {}
            root = Path(args.dir)
            for sys_dir in sorted(p for p in root.iterdir() if p.is_dir()):
                clips = []
                for wav in sorted(sys_dir.glob("*.wav")):
                    clip = load_wav(wav)
                    if clip.sample_rate != CANONICAL_RATE:
                        clip = resample(clip, CANONICAL_RATE)
                    clips.append((wav.stem, clip))
                systems[sys_dir.name] = clips
            report = pipeline.benchmark(systems, scorer, human_scores=human)
    except (pipeline.TooFewSystems, pipeline.PromptSetMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"{'system':<20} {'s_expr':>8} {'rank':>5}  {'human':>7} {'h.rank':>6}")
        for s in report.systems:
            human_score = "-" if s.human_score is None else f"{s.human_score:.1f}"
            human_rank = "-" if s.human_rank is None else f"{s.human_rank:g}"
            print(
                f"{s.name:<20} {s.mean_scores['s_expr']:>8.1f} {s.rank:>5g}  "
                f"{human_score:>7} {human_rank:>6}"
            )
        if report.srcc_vs_human is not None:
            print(f"SRCC vs human ranking: {report.srcc_vs_human:.4f}")
    return EXIT_OK


def _cmd_train_fusion(args) -> int:
    rows = []
    try:
        with open(args.export_csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            needed = {"s_emo", "s_pros", "s_spon", "target"}
            if not reader.fieldnames or not needed.issubset(reader.fieldnames):
                raise ValueError("export CSV needs s_emo,s_pros,s_spon,target columns")
            for row in reader:
                rows.append(
                    (
                        [float(row["s_emo"]), float(row["s_pros"]), float(row["s_spon"])],
                        float(row["target"]),
                    )
                )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: bad export CSV: {exc}", file=sys.stderr)
        return EXIT_INPUT

    params = fusion.TrainParams(
        rounds=args.rounds,
        max_depth=args.max_depth,
        shrinkage=args.shrinkage,
        min_leaf=args.min_leaf,
        validation_fraction=args.validation_fraction,
        seed=args.seed,
    )
    try:
        data = fusion.PreferenceDataset.from_rows(rows, provenance=str(args.export_csv))
        model = fusion.train_fusion(data, params)
    except (fusion.InsufficientData, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    fusion.save_model(model, args.out)
    if model.training_log:
        first, last = model.training_log[0], model.training_log[-1]
        print(
            f"trained {len(model.trees)} rounds: train RMSE "
            f"{first['train_rmse']:.3f} -> {last['train_rmse']:.3f}"
        )
        for entry in model.training_log if args.verbose else []:
            val = f" val={entry['val_rmse']:.4f}" if "val_rmse" in entry else ""
            print(f"  round {entry['round']:>4}: train={entry['train_rmse']:.4f}{val}")
    else:
        print("degenerate target: wrote constant model")
    print(f"model written to {args.out}")
    return EXIT_OK


def _cmd_annotate_serve(args) -> int:
    try:
        roster, instructions = annotation.load_roster(args.roster)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: bad roster: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    store = annotation.RatingsStore(args.store)
    session = annotation.AnnotationSession(roster, store, instructions=instructions)
    annotation.serve_forever(
        session, host=args.host, port=args.port, static_root=args.static
    )
    return EXIT_OK


def _cmd_estimate_quality(args) -> int:
    failed = False
    for path in args.paths:
        try:
            clip = load_wav(path)
            if clip.sample_rate != CANONICAL_RATE:
                clip = resample(clip, CANONICAL_RATE)
            q = estimate_quality(clip)
        except (OSError, ValueError) as exc:
            failed = True
            print(f"error: {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
            continue
        if args.json:
            print(
                json.dumps(
                    {
                        "id": Path(path).stem,
                        "ovrl": q.ovrl,
                        "sig": q.sig,
                        "bak": q.bak,
                        "p808": q.p808,
                        "source": q.source,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(
                f"{Path(path).stem}: OVRL={q.ovrl:.2f} SIG={q.sig:.2f} "
                f"BAK={q.bak:.2f} P808={q.p808:.2f} ({q.source})"
            )
    return EXIT_INPUT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exprscore", description="Speech expressiveness scoring toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_model=True):
        p.add_argument("--config", help="JSON config with fusion_model/calibration paths")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--threads", type=int, default=0, help="worker threads")
        if with_model:
            p.add_argument("--model", help="fusion model JSON path")
            p.add_argument("--calibration", help="calibration JSON path")
            p.add_argument(
                "--l-base",
                type=int,
                default=5,
                dest="l_base",
                help="spontaneity base level (1,3,5,7,9)",
            )

    p = sub.add_parser("score", help="score WAV files")
    p.add_argument("paths", nargs="+")
    common(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("curate", help="run the curation pipeline from a corpus config")
    p.add_argument("config_path")
    common(p, with_model=False)
    p.set_defaults(func=_cmd_curate)

    p = sub.add_parser("benchmark", help="rank systems by expressiveness")
    p.add_argument("dir", nargs="?", help="directory of per-system WAV subdirectories")
    p.add_argument("--scores", help="CSV of precomputed per-system mean scores")
    p.add_argument("--human", help="CSV system,score of human ratings")
    common(p)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("train-fusion", help="train the fusion model from an annotation export")
    p.add_argument("export_csv")
    p.add_argument("--out", default="fusion_model.json")
    p.add_argument("--rounds", type=int, default=200)
    p.add_argument("--max-depth", type=int, default=3, dest="max_depth")
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--min-leaf", type=int, default=5, dest="min_leaf")
    p.add_argument(
        "--validation-fraction", type=float, default=0.2, dest="validation_fraction"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    common(p, with_model=False)
    p.set_defaults(func=_cmd_train_fusion)

    p = sub.add_parser("annotate-serve", help="run the local annotation service")
    p.add_argument("--roster", required=True)
    p.add_argument("--store", default="ratings.log")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--static", help="directory of UI static files to serve")
    common(p, with_model=False)
    p.set_defaults(func=_cmd_annotate_serve)

    p = sub.add_parser("estimate-quality", help="print built-in quality estimates")
    p.add_argument("paths", nargs="+")
    common(p, with_model=False)
    p.set_defaults(func=_cmd_estimate_quality)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
