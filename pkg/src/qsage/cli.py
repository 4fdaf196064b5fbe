"""Command-line entry point.

Subcommands: ``validate`` (instance files), ``solve`` (classical references),
``episode`` (one episode), ``campaign`` (full grid with resume), ``classify``
(failure triage of captured streams), ``report`` (tables and CSV emission).
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .adjudicate import CATEGORIES, Verdict, classify, default_taxonomy
from .episodes import (
    CampaignConfig,
    load_episodes,
    persist_episode,
    run_campaign,
    run_episode,
)
from .gateway import GatewayError
from .reference import ReferenceCache, UnknownDescriptorError, solve_reference
from .registry import RegistryError, default_instances_path, load_instances, validate
from .runner import ExecutionResult, InterpreterNotFoundError, parse_result
from .stats import (
    compare_turns,
    duration_report,
    failure_distribution,
    format_table,
    success_table,
)

DEFAULT_OUT_DIR = "qsage-out"


class CliError(Exception):
    """Domain error carrying the message to print before exiting 1."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsage",
        description=(
            "Execution-based harness that checks whether generated quantum "
            "solver scripts reproduce classical reference results."
        ),
    )
    parser.add_argument("--version", action="version", version=f"qsage {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a problem-instance file")
    p_validate.add_argument(
        "--instances", default=None, help="instance JSON file (default: bundled set)"
    )

    p_solve = sub.add_parser("solve", help="run classical reference solvers")
    p_solve.add_argument("--instances", default=None)
    p_solve.add_argument(
        "--instance",
        action="append",
        default=None,
        metavar="ID",
        help="solve only this instance (repeatable; default: all)",
    )

    p_episode = sub.add_parser("episode", help="run a single episode")
    p_episode.add_argument("--config", required=True, help="campaign config JSON")
    p_episode.add_argument("--instance", required=True, metavar="ID")
    p_episode.add_argument("--model", required=True, metavar="MODEL_ID")
    p_episode.add_argument("--variant", choices=("standard", "informed"), default="standard")
    p_episode.add_argument("--repetition", type=int, default=0)

    p_campaign = sub.add_parser("campaign", help="run or resume a full campaign")
    p_campaign.add_argument("--config", required=True, help="campaign config JSON")
    p_campaign.add_argument("--jobs", type=int, default=None, help="worker pool size")
    p_campaign.add_argument("--repetitions", type=int, default=None)
    p_campaign.add_argument("--budget", type=int, default=None, help="turn budget T")
    p_campaign.add_argument(
        "--variants", default=None, help="comma-separated subset of standard,informed"
    )
    p_campaign.add_argument(
        "--models", default=None, help="comma-separated model_id filter"
    )
    p_campaign.add_argument("--quiet", action="store_true")

    p_classify = sub.add_parser("classify", help="triage captured run streams")
    p_classify.add_argument("--stdout", default=None, help="file with captured stdout")
    p_classify.add_argument("--stderr", default=None, help="file with captured stderr")
    p_classify.add_argument("--timed-out", action="store_true")
    p_classify.add_argument("--exit-status", type=int, default=0)

    p_report = sub.add_parser("report", help="emit tables and CSV from a repository")
    p_report.add_argument("--repo", required=True)
    p_report.add_argument("--hash", default=None, help="restrict to one campaign hash")
    p_report.add_argument(
        "--kind",
        choices=("success", "stats", "causes", "durations", "all"),
        default="all",
    )
    p_report.add_argument("--out", default=DEFAULT_OUT_DIR, help="CSV output directory")
    p_report.add_argument("--t-low", type=int, default=1)
    p_report.add_argument("--t-high", default="5,10", help="comma-separated budgets")
    return parser


def cmd_validate(args) -> int:
    path = args.instances or default_instances_path()
    instances = load_instances(path)
    bad = 0
    for inst in instances:
        violations = validate(inst)
        if violations:
            bad += 1
            for violation in violations:
                print(f"{inst.instance_id}: {violation}")
        else:
            print(f"{inst.instance_id}: ok")
    print(f"{len(instances)} instances, {bad} with violations")
    return 1 if bad else 0


def cmd_solve(args) -> int:
    path = args.instances or default_instances_path()
    instances = load_instances(path)
    by_id = {inst.instance_id: inst for inst in instances}
    if args.instance:
        missing = [i for i in args.instance if i not in by_id]
        if missing:
            raise CliError(f"unknown instance id {missing[0]!r} in {path}")
        selected = [by_id[i] for i in args.instance]
    else:
        selected = instances
    cache = ReferenceCache()
    for inst in selected:
        result = solve_reference(inst, cache)
        print(
            f"{inst.instance_id}: {result.value:.7f} "
            f"[{result.solver}, {result.wall_time_s:.3f} s]"
        )
    return 0


def _preflight_models(config: CampaignConfig) -> None:
    for model in config.models:
        if model.provider == "http" and model.auth_env not in os.environ:
            raise CliError(
                f"model {model.model_id!r}: auth env var {model.auth_env!r} is not set"
            )


def cmd_episode(args) -> int:
    config = CampaignConfig.from_file(args.config)
    _preflight_models(config)
    instances = {i.instance_id: i for i in load_instances(config.instances_path)}
    if args.instance not in instances:
        raise CliError(f"unknown instance id {args.instance!r}")
    models = {m.model_id: m for m in config.models}
    if args.model not in models:
        raise CliError(f"model {args.model!r} not in campaign config")
    instance = instances[args.instance]
    reference = solve_reference(instance)
    record = run_episode(
        instance,
        models[args.model],
        args.variant,
        config,
        reference,
        repetition=args.repetition,
        config_hash=config.config_hash(),
    )
    path = persist_episode(record, config.repository)
    if record.invalid:
        print(f"episode invalid: {record.invalid_reason}")
    elif record.success_turn is not None:
        print(f"success at turn {record.success_turn} of {config.turn_budget}")
    else:
        print(f"no success within {config.turn_budget} turns")
    print(f"record: {path}")
    return 0


def cmd_campaign(args) -> int:
    config = CampaignConfig.from_file(args.config)
    if args.jobs is not None:
        config.parallelism = args.jobs
    if args.repetitions is not None:
        config.repetitions = args.repetitions
    if args.budget is not None:
        config.turn_budget = args.budget
    if args.variants is not None:
        config.variants = tuple(v.strip() for v in args.variants.split(","))
    if args.models is not None:
        wanted = {m.strip() for m in args.models.split(",")}
        config.models = tuple(m for m in config.models if m.model_id in wanted)
        if not config.models:
            raise CliError(f"no campaign model matches filter {args.models!r}")
    config.__post_init__()  # re-validate after overrides
    _preflight_models(config)
    progress = None if args.quiet else (lambda line: print(line, flush=True))
    summary = run_campaign(config, progress=progress)
    print(
        f"\ncampaign {summary.config_hash}: {summary.episodes_run} new episodes, "
        f"{summary.episodes_skipped} skipped, {summary.invalid_episodes} invalid"
    )
    records = load_episodes(summary.repository, summary.config_hash)
    if records:
        headers, rows = success_table(records)
        print()
        print(format_table(headers, rows))
    return 0


def cmd_classify(args) -> int:
    stdout = Path(args.stdout).read_text(encoding="utf-8") if args.stdout else ""
    stderr = Path(args.stderr).read_text(encoding="utf-8") if args.stderr else ""
    execution = ExecutionResult(
        exit_status=None if args.timed_out else args.exit_status,
        stdout=stdout,
        stderr=stderr,
        duration_s=0.0,
        timed_out=args.timed_out,
    )
    if args.timed_out:
        verdict = Verdict("fail", 0.0, reason="timeout")
    elif execution.exit_status != 0:
        verdict = Verdict("fail", 0.0, reason="execution-failure")
    else:
        parsed = parse_result(stdout)
        reason = "out-of-tolerance" if isinstance(parsed, float) else "parse-failure"
        verdict = Verdict("fail", 0.0, reason=reason)
    cause = classify(execution, verdict, default_taxonomy())
    if cause.matched_keyword:
        print(f"{cause.category} (keyword: {cause.matched_keyword!r})")
    else:
        print(cause.category)
    return 0


def cmd_report(args) -> int:
    records = load_episodes(args.repo, args.hash)
    if not records:
        raise CliError(f"no episode records under {args.repo!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t_highs = [int(x) for x in str(args.t_high).split(",") if x.strip()]
    kinds = (
        ("success", "stats", "causes", "durations")
        if args.kind == "all"
        else (args.kind,)
    )

    from .stats import write_csv

    if "success" in kinds:
        headers, rows = success_table(records)
        print(format_table(headers, rows))
        print()
        write_csv(str(out / "success.csv"), headers, rows)
    if "stats" in kinds:
        headers = [
            "model", "family", "variant", "comparison", "n", "U", "p_value",
            "A12", "effect", "degenerate",
        ]
        rows = []
        for t_high in t_highs:
            for row in compare_turns(records, args.t_low, t_high):
                model, descriptor, variant = row.group
                rows.append(
                    [
                        model, descriptor, variant,
                        f"{row.t_low} vs {row.t_high}", str(row.n),
                        f"{row.u:.1f}", f"{row.p_value:.4f}", f"{row.a12:.3f}",
                        row.category, "yes" if row.degenerate else "no",
                    ]
                )
        print(format_table(headers, rows))
        print()
        write_csv(str(out / "stats.csv"), headers, rows)
    if "causes" in kinds:
        distribution = failure_distribution(records)
        headers = ["model", "family", "variant"] + list(CATEGORIES)
        rows = []
        for group, table in distribution.items():
            model, descriptor, variant = group
            rows.append(
                [model, descriptor, variant]
                + [f"{table[cat]:.1f}" for cat in CATEGORIES]
            )
        print(format_table(headers, rows))
        print()
        write_csv(str(out / "causes.csv"), headers, rows)
    if "durations" in kinds:
        headers = [
            "model", "family", "variant", "n_turn1", "n_success", "p_value",
            "A12", "effect", "log_scale", "note",
        ]
        rows = []
        for row in duration_report(records):
            model, descriptor, variant = row.group
            rows.append(
                [
                    model, descriptor, variant,
                    str(len(row.turn1_durations)), str(len(row.time_to_success)),
                    "-" if row.p_value is None else f"{row.p_value:.4f}",
                    "-" if row.a12 is None else f"{row.a12:.3f}",
                    row.category or "-", "yes" if row.log_scale else "no",
                    row.note or "",
                ]
            )
            model_slug = model.replace("/", "-")
            write_csv(
                str(out / f"durations_{model_slug}_{descriptor.replace('/', '-')}_{variant}_turn1.csv"),
                ["duration_s"],
                [[d] for d in row.turn1_durations],
            )
            write_csv(
                str(out / f"durations_{model_slug}_{descriptor.replace('/', '-')}_{variant}_success.csv"),
                ["duration_s"],
                [[d] for d in row.time_to_success],
            )
        print(format_table(headers, rows))
        write_csv(str(out / "durations.csv"), headers, rows)
    return 0


_HANDLERS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "episode": cmd_episode,
    "campaign": cmd_campaign,
    "classify": cmd_classify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        RegistryError,
        UnknownDescriptorError,
        GatewayError,
        InterpreterNotFoundError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
