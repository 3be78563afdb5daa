"""Command-line interface.

A thin client over the library: subcommands parse arguments, load input
files, call the core pipeline, and write JSON (stdout or --out) plus optional
SVG plots. Exit codes: 0 success, 1 validation/runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .effects import ContinuityPolicy, compute_effects
from .errors import MetakitError
from .heterogeneity import heterogeneity_report
from .plots import forest_spec, render_forest, render_funnel
from .pooling import pool
from .publication_bias import FunnelPoint, TrimFillResult, compare_adjusted, funnel_points, trim_and_fill
from .quality import builtin_rubric, grade_distribution, load_rubric, load_scores_csv
from .report import (
    analyze,
    bias_dict,
    effect_dict,
    heterogeneity_dict,
    meta_dict,
    pooled_dict,
    prisma_dict,
    quality_dict,
    report_dict,
    sensitivity_dict,
)
from .sensitivity import leave_one_out, robustness_verdict
from .studies import load_dataset, load_prisma_counts

KIND_CHOICES = ("continuous", "binary", "correlation")
MEASURE_CHOICES = ("md", "smd", "or", "rr", "z")
MODEL_CHOICES = ("fixed", "random")


def _add_dataset_args(parser: argparse.ArgumentParser, with_model: bool = True) -> None:
    parser.add_argument("--in", dest="infile", required=True, help="input CSV dataset")
    parser.add_argument("--kind", required=True, choices=KIND_CHOICES, help="dataset kind")
    parser.add_argument("--measure", required=True, choices=MEASURE_CHOICES, help="effect-size measure")
    if with_model:
        parser.add_argument("--model", choices=MODEL_CHOICES, default="random", help="pooling model")
    parser.add_argument("--ci", type=float, default=0.95, help="confidence level (default 0.95)")
    parser.add_argument("--alpha-het", type=float, default=0.1, help="Q-test significance level (default 0.1)")
    parser.add_argument("--hedges", action="store_true", help="apply the small-sample correction to SMD")
    parser.add_argument(
        "--continuity", type=float, default=0.5, help="zero-cell correction added to 2x2 cells (default 0.5)"
    )


def _add_output_args(parser: argparse.ArgumentParser, plot_help: str | None = None) -> None:
    parser.add_argument("--out", help="write JSON here instead of stdout")
    if plot_help:
        parser.add_argument("--plot", help=plot_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metakit", description="meta-analysis toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("effects", help="compute per-study effect estimates")
    _add_dataset_args(p, with_model=False)
    _add_output_args(p)

    p = sub.add_parser("pool", help="pool effects with CI, z-test, and heterogeneity")
    _add_dataset_args(p)
    _add_output_args(p, plot_help="write a forest plot SVG here")

    p = sub.add_parser("heterogeneity", help="Q-test and I^2 classification")
    _add_dataset_args(p, with_model=False)
    _add_output_args(p)

    p = sub.add_parser("bias", help="funnel data and trim-and-fill adjustment")
    _add_dataset_args(p)
    p.add_argument("--threshold", type=float, help="stability threshold for original vs adjusted")
    _add_output_args(p, plot_help="write a funnel plot SVG here")

    p = sub.add_parser("sensitivity", help="leave-one-out re-analysis")
    _add_dataset_args(p)
    _add_output_args(p)

    p = sub.add_parser("quality", help="score studies against a rubric")
    p.add_argument("--in", dest="infile", required=True, help="scores CSV (study_id + one column per item)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--rubric", help="built-in rubric name (miniscrew, crowding)")
    group.add_argument("--rubric-file", help="custom rubric definition file")
    _add_output_args(p)

    p = sub.add_parser("prisma", help="validate and summarize screening-flow counts")
    p.add_argument("--in", dest="infile", required=True, help="key=value counts file")
    _add_output_args(p)

    p = sub.add_parser("report", help="full pipeline: effects, pooling, heterogeneity, bias, sensitivity")
    _add_dataset_args(p)
    p.add_argument("--quality-scores", help="scores CSV to include a quality section")
    p.add_argument("--rubric", help="built-in rubric name for --quality-scores")
    p.add_argument("--rubric-file", help="custom rubric file for --quality-scores")
    p.add_argument("--prisma", help="key=value counts file to include a screening-flow section")
    _add_output_args(p, plot_help="directory for forest.svg and funnel.svg")
    return parser


def _emit(doc: dict[str, Any], out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _policy(args: argparse.Namespace) -> ContinuityPolicy:
    return ContinuityPolicy(correction=args.continuity)


def _load_effects(args: argparse.Namespace):
    dataset = load_dataset(args.infile, args.kind)
    return compute_effects(
        dataset, args.measure, hedges_correction=args.hedges, policy=_policy(args)
    )


def _cmd_effects(args: argparse.Namespace, argv: Sequence[str]) -> int:
    effects = _load_effects(args)
    _emit({"meta": meta_dict(argv), "effects": [effect_dict(e) for e in effects]}, args.out)
    return 0


def _cmd_pool(args: argparse.Namespace, argv: Sequence[str]) -> int:
    effects = _load_effects(args)
    pooled = pool(effects, args.model, args.ci)
    het = heterogeneity_report(effects, args.alpha_het)
    doc = {
        "meta": meta_dict(argv),
        "effects": [effect_dict(e) for e in effects],
        "pooled": pooled_dict(pooled, effects[0].measure),
        "heterogeneity": heterogeneity_dict(het),
    }
    if args.plot:
        render_forest(forest_spec(effects, pooled, het, args.ci), args.plot)
    _emit(doc, args.out)
    return 0


def _cmd_heterogeneity(args: argparse.Namespace, argv: Sequence[str]) -> int:
    effects = _load_effects(args)
    het = heterogeneity_report(effects, args.alpha_het)
    doc = {
        "meta": meta_dict(argv),
        "effects": [effect_dict(e) for e in effects],
        "heterogeneity": heterogeneity_dict(het),
    }
    _emit(doc, args.out)
    return 0


def _funnel_points_with_imputed(effects, bias: TrimFillResult | None):
    points = funnel_points(effects)
    if bias is not None and bias.imputed:
        points += tuple(FunnelPoint(e.study_id, e.value, e.se, imputed=True) for e in bias.imputed)
    return points


def _cmd_bias(args: argparse.Namespace, argv: Sequence[str]) -> int:
    effects = _load_effects(args)
    result = trim_and_fill(effects, args.model, args.ci)
    verdict = compare_adjusted(result, args.threshold) if args.threshold is not None else None
    doc = {
        "meta": meta_dict(argv),
        "bias": bias_dict(result, effects[0].measure, verdict),
    }
    if args.plot:
        render_funnel(_funnel_points_with_imputed(effects, result), result.adjusted.estimate, args.plot)
    _emit(doc, args.out)
    return 0


def _cmd_sensitivity(args: argparse.Namespace, argv: Sequence[str]) -> int:
    effects = _load_effects(args)
    rows = leave_one_out(effects, args.model, args.ci)
    full = pool(effects, args.model, args.ci)
    verdict = robustness_verdict(rows, full)
    doc = {
        "meta": meta_dict(argv),
        "full": pooled_dict(full, effects[0].measure),
        "sensitivity": sensitivity_dict(rows, effects[0].measure, verdict),
    }
    _emit(doc, args.out)
    return 0


def _resolve_rubric(name: str | None, path: str | None):
    if path:
        return load_rubric(path)
    return builtin_rubric(name)


def _cmd_quality(args: argparse.Namespace, argv: Sequence[str]) -> int:
    rubric = _resolve_rubric(args.rubric, args.rubric_file)
    scores = load_scores_csv(args.infile, rubric)
    doc = {
        "meta": meta_dict(argv),
        "quality": quality_dict(scores, rubric, grade_distribution(scores, rubric)),
    }
    _emit(doc, args.out)
    return 0


def _cmd_prisma(args: argparse.Namespace, argv: Sequence[str]) -> int:
    counts = load_prisma_counts(args.infile)
    _emit({"meta": meta_dict(argv), "prisma": prisma_dict(counts)}, args.out)
    return 0


def _cmd_report(args: argparse.Namespace, argv: Sequence[str]) -> int:
    dataset = load_dataset(args.infile, args.kind)
    quality_scores = rubric = None
    if args.quality_scores:
        if not (args.rubric or args.rubric_file):
            raise MetakitError("--quality-scores needs --rubric or --rubric-file")
        rubric = _resolve_rubric(args.rubric, args.rubric_file)
        quality_scores = load_scores_csv(args.quality_scores, rubric)
    prisma = load_prisma_counts(args.prisma) if args.prisma else None
    # trim-and-fill and leave-one-out need k >= 3; skip those sections below that
    extras = len(dataset) >= 3
    report = analyze(
        dataset,
        args.measure,
        model=args.model,
        ci_level=args.ci,
        alpha=args.alpha_het,
        hedges_correction=args.hedges,
        continuity=args.continuity,
        with_bias=extras,
        with_sensitivity=extras,
        quality_scores=quality_scores,
        rubric=rubric,
        prisma=prisma,
    )
    if args.plot:
        plot_dir = Path(args.plot)
        plot_dir.mkdir(parents=True, exist_ok=True)
        render_forest(
            forest_spec(report.effects, report.pooled, report.heterogeneity, args.ci),
            plot_dir / "forest.svg",
        )
        center = report.bias.adjusted.estimate if report.bias is not None else report.pooled.estimate
        render_funnel(
            _funnel_points_with_imputed(report.effects, report.bias), center, plot_dir / "funnel.svg"
        )
    _emit(report_dict(report, argv), args.out)
    return 0


_COMMANDS = {
    "effects": _cmd_effects,
    "pool": _cmd_pool,
    "heterogeneity": _cmd_heterogeneity,
    "bias": _cmd_bias,
    "sensitivity": _cmd_sensitivity,
    "quality": _cmd_quality,
    "prisma": _cmd_prisma,
    "report": _cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args, argv)
    except MetakitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
