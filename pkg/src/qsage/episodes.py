"""Generate-execute-verify-iterate episodes and campaign orchestration.

An episode runs one model against one problem instance under one feedback
variant: turn 1 sends the coder prompt, every later turn sends the previous
run's output through the feedback template (with the reference value under
the informed variant), and the loop stops at the first passing turn or when
the turn budget is exhausted.  Three consecutive infrastructure errors
(gateway or interpreter trouble, never solver failures) invalidate the
episode; invalid episodes are excluded from success statistics but counted.

Campaigns fan episodes out over a worker pool, compute each instance's
reference once through a shared cache, and persist every artifact under
``repo/<campaign-hash>/<family>/<instance>/<model>/<variant>/rep<k>/``
with atomic writes, so partial campaigns resume without redoing work.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import hashlib
import json
import os
import shutil
import sys
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import gateway
from .adjudicate import FailureCause, Verdict, classify, verify
from .gateway import GatewayError, ModelConfig
from .prompts import (
    Conversation,
    DEFAULT_STACK_STATEMENT,
    Message,
    TemplateLibrary,
    append_turn,
    render_coder,
    render_feedback,
)
from .reference import ReferenceCache, ReferenceResult, solve_reference
from .registry import ProblemInstance, load_instances
from .runner import (
    DEFAULT_MEMORY_BYTES,
    ExecutionResult,
    InterpreterNotFoundError,
    RunSpec,
    parse_result,
    run_script,
)

RECORD_FORMAT_VERSION = 1
MAX_CONSECUTIVE_INFRA_ERRORS = 3
VARIANTS = ("standard", "informed")


@dataclass(frozen=True)
class TurnRecord:
    turn: int
    prompt: str
    raw_response: Optional[str]
    extracted_code: Optional[str]
    execution: Optional[ExecutionResult]
    verdict: Optional[Verdict]
    failure_cause: Optional[FailureCause]
    duration_s: float
    gen_latency_s: Optional[float] = None
    infrastructure_error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.verdict is not None and self.verdict.outcome == "fail":
            if self.failure_cause is None:
                raise ValueError("fail verdicts require a failure cause")
        if self.verdict is not None and self.verdict.outcome == "pass":
            if self.failure_cause is not None:
                raise ValueError("pass verdicts must not carry a failure cause")


@dataclass(frozen=True)
class EpisodeRecord:
    instance_id: str
    descriptor: str
    model_id: str
    variant: str
    repetition: int
    turns: tuple[TurnRecord, ...]
    success_turn: Optional[int]
    total_duration_s: float
    turn1_duration_s: float
    reference_value: float
    invalid: bool = False
    invalid_reason: Optional[str] = None
    config_hash: str = ""
    created_at: str = ""
    format_version: int = RECORD_FORMAT_VERSION

    def __post_init__(self) -> None:
        if self.success_turn is not None:
            passes = [t.turn for t in self.turns if t.verdict and t.verdict.passed]
            if not passes or min(passes) != self.success_turn:
                raise ValueError("success_turn must be the first passing turn")
            if self.turns[-1].turn != self.success_turn:
                raise ValueError("no turns may follow the first success")

    @property
    def family(self) -> str:
        return self.descriptor


@dataclass
class CampaignConfig:
    """Everything a campaign run needs; hashable for resume-safety."""

    instances_path: str
    repository: str
    models: tuple[ModelConfig, ...]
    variants: tuple[str, ...] = ("standard",)
    repetitions: int = 10
    turn_budget: int = 10
    parallelism: int = 1
    template_dir: Optional[str] = None
    stack_statement: str = DEFAULT_STACK_STATEMENT
    timeout_scale: float = 1.0
    lenient_parse: bool = False
    memory_bytes: int = DEFAULT_MEMORY_BYTES
    interpreter: tuple[str, ...] = (sys.executable,)
    isolate_network: bool = True

    def __post_init__(self) -> None:
        if self.repetitions < 1 or self.turn_budget < 1:
            raise ValueError("repetitions and turn_budget must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.timeout_scale <= 0:
            raise ValueError("timeout_scale must be positive")
        for variant in self.variants:
            if variant not in VARIANTS:
                raise ValueError(f"unknown variant {variant!r}")
        if not self.models:
            raise ValueError("at least one model config is required")

    @classmethod
    def from_file(cls, path: str) -> "CampaignConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: campaign config must be a JSON object")
        models = tuple(ModelConfig(**m) for m in doc.pop("models", []))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"{path}: unknown config key {sorted(unknown)[0]!r}")
        for key in ("variants", "interpreter"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(models=models, **doc)

    def config_hash(self) -> str:
        """Digest over instance content, templates, model configs, and budget."""
        instances = load_instances(self.instances_path)
        templates = TemplateLibrary(self.template_dir)
        payload = json.dumps(
            {
                "instances": [inst.to_dict() for inst in instances],
                "templates": templates.fingerprint(),
                "models": [m.to_dict() for m in self.models],
                "variants": list(self.variants),
                "turn_budget": self.turn_budget,
                "stack_statement": self.stack_statement,
                "timeout_scale": self.timeout_scale,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def stage_inputs(instance: ProblemInstance, workdir: str) -> None:
    """Place family-specific input files into a run's working directory."""
    if instance.descriptor != "chem/h2":
        return
    from .reference import _bundled_integrals_path

    source = instance.params.get("integrals_path")
    if source is None:
        source = _bundled_integrals_path(instance.params["bond_length"])
    shutil.copyfile(source, os.path.join(workdir, "integrals.fcidump"))


def _execute_turn(
    code: str,
    instance: ProblemInstance,
    config: CampaignConfig,
    reference: ReferenceResult,
) -> tuple[ExecutionResult, Verdict, Optional[FailureCause]]:
    workdir = tempfile.mkdtemp(prefix="qsage-turn-")
    try:
        stage_inputs(instance, workdir)
        spec = RunSpec(
            script=code,
            interpreter=config.interpreter,
            timeout_s=instance.timeout_s * config.timeout_scale,
            memory_bytes=config.memory_bytes,
            workdir=workdir,
            isolate_network=config.isolate_network,
        )
        execution = run_script(spec)
    finally:
        shutil.rmtree(workdir, ignore_errors=True)
    if execution.timed_out:
        verdict = Verdict("fail", reference.value, reason="timeout")
    elif execution.exit_status != 0:
        verdict = Verdict("fail", reference.value, reason="execution-failure")
    else:
        observed = parse_result(execution.stdout, lenient=config.lenient_parse)
        verdict = verify(observed, reference.value, instance.tolerance)
    cause = None if verdict.passed else classify(execution, verdict)
    return execution, verdict, cause


def _format_run_output(execution: ExecutionResult) -> str:
    parts = []
    if execution.stdout:
        parts.append(execution.stdout)
    if execution.stderr:
        parts.append("--- stderr ---\n" + execution.stderr)
    if execution.timed_out:
        parts.append(
            f"[execution killed: wall-clock timeout of {execution.duration_s:.0f} s exceeded]"
        )
    if not parts:
        parts.append("[no output]")
    return "\n".join(parts)


def _episode_provider(model_config: ModelConfig, instance: ProblemInstance):
    """Build a provider for one episode.

    Replay fixtures may target instances: when ``fixture_dir/<instance_id>/``
    exists it is used, otherwise the directory itself supplies the replies.
    """
    if model_config.provider == "replay":
        root = Path(model_config.fixture_dir)
        per_instance = root / instance.instance_id
        target = per_instance if per_instance.is_dir() else root
        return gateway.ReplayProvider.from_dir(str(target))
    return gateway.build_provider(model_config)


def run_episode(
    instance: ProblemInstance,
    model_config: ModelConfig,
    variant: str,
    config: CampaignConfig,
    reference: ReferenceResult,
    repetition: int = 0,
    provider=None,
    templates: Optional[TemplateLibrary] = None,
    config_hash: str = "",
) -> EpisodeRecord:
    """Run one full episode; always returns a record (possibly invalid).

    Infrastructure errors (gateway or interpreter trouble) consume a turn of
    the budget and are recorded, but leave the conversation untouched: the
    next turn re-renders the same prompt.  Three in a row invalidate the
    episode.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if templates is None:
        templates = TemplateLibrary(config.template_dir)
    if provider is None:
        provider = _episode_provider(model_config, instance)

    import time as _time

    episode_start = _time.monotonic()
    conv = Conversation()
    turns: list[TurnRecord] = []
    success_turn: Optional[int] = None
    consecutive_infra = 0
    invalid_reason: Optional[str] = None
    previous_output = ""

    coder_template = templates.coder(instance.family.short_name)
    for turn_index in range(1, config.turn_budget + 1):
        turn_start = _time.monotonic()
        if conv.turn_count == 0:
            prompt = render_coder(
                instance, coder_template, stack_statement=config.stack_statement
            )
        else:
            prompt = render_feedback(
                conv,
                previous_output,
                variant,
                expected=reference.value if variant == "informed" else None,
                templates=templates,
            )

        def infra_turn(message: str, generation=None, code=None) -> bool:
            """Record an infrastructure turn; True means abort the episode."""
            nonlocal consecutive_infra, invalid_reason
            consecutive_infra += 1
            turns.append(
                TurnRecord(
                    turn=turn_index,
                    prompt=prompt,
                    raw_response=None if generation is None else generation.raw_text,
                    extracted_code=code,
                    execution=None,
                    verdict=None,
                    failure_cause=None,
                    duration_s=_time.monotonic() - turn_start,
                    gen_latency_s=None if generation is None else generation.latency_s,
                    infrastructure_error=message,
                )
            )
            if consecutive_infra >= MAX_CONSECUTIVE_INFRA_ERRORS:
                invalid_reason = f"{consecutive_infra} consecutive infrastructure errors"
                return True
            return False

        try:
            generation = gateway.generate(
                provider, Conversation(conv.messages + (Message("user", prompt),))
            )
        except GatewayError as exc:
            if infra_turn(f"{type(exc).__name__}: {exc}"):
                break
            continue

        code = generation.extracted_code
        if code is None:
            # The reply held no runnable code.  Nothing executes; the verdict
            # is a synthesized failure so the Gen cause can attach (the
            # taxonomy treats unformatted replies as generation failures).
            execution = None
            verdict = Verdict("fail", reference.value, reason="execution-failure")
            cause = FailureCause("Gen")
            new_output = (
                "[the previous reply contained no runnable code block]\n"
                + generation.raw_text
            )
        else:
            try:
                execution, verdict, cause = _execute_turn(
                    code, instance, config, reference
                )
            except InterpreterNotFoundError as exc:
                if infra_turn(f"InterpreterNotFoundError: {exc}", generation, code):
                    break
                continue
            new_output = _format_run_output(execution)

        conv = append_turn(conv, prompt, generation.raw_text)
        previous_output = new_output
        consecutive_infra = 0
        turns.append(
            TurnRecord(
                turn=turn_index,
                prompt=prompt,
                raw_response=generation.raw_text,
                extracted_code=code,
                execution=execution,
                verdict=verdict,
                failure_cause=cause,
                duration_s=_time.monotonic() - turn_start,
                gen_latency_s=generation.latency_s,
            )
        )
        if verdict.passed:
            success_turn = turn_index
            break

    total = _time.monotonic() - episode_start
    turn1 = turns[0].duration_s if turns else 0.0
    return EpisodeRecord(
        instance_id=instance.instance_id,
        descriptor=instance.descriptor,
        model_id=model_config.model_id,
        variant=variant,
        repetition=repetition,
        turns=tuple(turns),
        success_turn=success_turn,
        total_duration_s=total,
        turn1_duration_s=turn1,
        reference_value=reference.value,
        invalid=invalid_reason is not None,
        invalid_reason=invalid_reason,
        config_hash=config_hash,
        created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
    )


# --- serialization ---------------------------------------------------------


def _execution_to_dict(e: Optional[ExecutionResult]) -> Optional[dict]:
    return None if e is None else dataclasses.asdict(e)


def _verdict_to_dict(v: Optional[Verdict]) -> Optional[dict]:
    return None if v is None else dataclasses.asdict(v)


def _cause_to_dict(c: Optional[FailureCause]) -> Optional[dict]:
    return None if c is None else dataclasses.asdict(c)


def episode_to_dict(record: EpisodeRecord) -> dict:
    doc = {
        "format_version": record.format_version,
        "instance_id": record.instance_id,
        "descriptor": record.descriptor,
        "model_id": record.model_id,
        "variant": record.variant,
        "repetition": record.repetition,
        "success_turn": record.success_turn,
        "total_duration_s": record.total_duration_s,
        "turn1_duration_s": record.turn1_duration_s,
        "reference_value": record.reference_value,
        "invalid": record.invalid,
        "invalid_reason": record.invalid_reason,
        "config_hash": record.config_hash,
        "created_at": record.created_at,
        "turns": [
            {
                "turn": t.turn,
                "prompt": t.prompt,
                "raw_response": t.raw_response,
                "extracted_code": t.extracted_code,
                "execution": _execution_to_dict(t.execution),
                "verdict": _verdict_to_dict(t.verdict),
                "failure_cause": _cause_to_dict(t.failure_cause),
                "duration_s": t.duration_s,
                "gen_latency_s": t.gen_latency_s,
                "infrastructure_error": t.infrastructure_error,
            }
            for t in record.turns
        ],
    }
    return doc


def episode_from_dict(doc: dict) -> EpisodeRecord:
    turns = tuple(
        TurnRecord(
            turn=t["turn"],
            prompt=t["prompt"],
            raw_response=t["raw_response"],
            extracted_code=t["extracted_code"],
            execution=None
            if t["execution"] is None
            else ExecutionResult(**t["execution"]),
            verdict=None if t["verdict"] is None else Verdict(**t["verdict"]),
            failure_cause=None
            if t["failure_cause"] is None
            else FailureCause(**t["failure_cause"]),
            duration_s=t["duration_s"],
            gen_latency_s=t.get("gen_latency_s"),
            infrastructure_error=t.get("infrastructure_error"),
        )
        for t in doc["turns"]
    )
    return EpisodeRecord(
        instance_id=doc["instance_id"],
        descriptor=doc["descriptor"],
        model_id=doc["model_id"],
        variant=doc["variant"],
        repetition=doc["repetition"],
        turns=turns,
        success_turn=doc["success_turn"],
        total_duration_s=doc["total_duration_s"],
        turn1_duration_s=doc["turn1_duration_s"],
        reference_value=doc["reference_value"],
        invalid=doc["invalid"],
        invalid_reason=doc["invalid_reason"],
        config_hash=doc.get("config_hash", ""),
        created_at=doc.get("created_at", ""),
        format_version=doc.get("format_version", RECORD_FORMAT_VERSION),
    )


# --- repository layout -----------------------------------------------------


def _family_dir(descriptor: str) -> str:
    return descriptor.replace("/", "-")


def episode_dir(
    repo: str, config_hash: str, record_or_keys, repetition: Optional[int] = None
) -> Path:
    if isinstance(record_or_keys, EpisodeRecord):
        descriptor = record_or_keys.descriptor
        instance_id = record_or_keys.instance_id
        model_id = record_or_keys.model_id
        variant = record_or_keys.variant
        repetition = record_or_keys.repetition
    else:
        descriptor, instance_id, model_id, variant = record_or_keys
    return (
        Path(repo)
        / config_hash
        / _family_dir(descriptor)
        / instance_id
        / model_id.replace("/", "-")
        / variant
        / f"rep{repetition}"
    )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def persist_episode(record: EpisodeRecord, repo: str) -> Path:
    """Write episode.json plus per-turn artifacts, atomically per file."""
    directory = episode_dir(repo, record.config_hash, record)
    directory.mkdir(parents=True, exist_ok=True)
    for turn in record.turns:
        turn_dir = directory / f"turn{turn.turn:02d}"
        turn_dir.mkdir(exist_ok=True)
        if turn.extracted_code is not None:
            _atomic_write(turn_dir / "script.py", turn.extracted_code)
        if turn.execution is not None:
            _atomic_write(turn_dir / "stdout.txt", turn.execution.stdout)
            _atomic_write(turn_dir / "stderr.txt", turn.execution.stderr)
        meta = {
            "prompt": turn.prompt,
            "raw_response": turn.raw_response,
            "verdict": _verdict_to_dict(turn.verdict),
            "failure_cause": _cause_to_dict(turn.failure_cause),
            "duration_s": turn.duration_s,
            "gen_latency_s": turn.gen_latency_s,
            "infrastructure_error": turn.infrastructure_error,
            "execution": _execution_to_dict(turn.execution),
        }
        _atomic_write(turn_dir / "meta.json", json.dumps(meta, indent=2))
    _atomic_write(
        directory / "episode.json", json.dumps(episode_to_dict(record), indent=2)
    )
    return directory / "episode.json"


def load_episodes(repo: str, config_hash: Optional[str] = None) -> list[EpisodeRecord]:
    """Load every persisted episode under a repository (optionally one hash)."""
    root = Path(repo)
    if config_hash is not None:
        root = root / config_hash
    if not root.is_dir():
        return []
    records = []
    for path in sorted(root.rglob("episode.json")):
        with open(path, "r", encoding="utf-8") as fh:
            records.append(episode_from_dict(json.load(fh)))
    return records


# --- campaign orchestration ------------------------------------------------


@dataclass(frozen=True)
class CampaignSummary:
    config_hash: str
    episodes_run: int
    episodes_skipped: int
    invalid_episodes: int
    record_paths: tuple[str, ...]
    repository: str


def run_campaign(config: CampaignConfig, progress=None) -> CampaignSummary:
    """Run (or resume) all instances x repetitions x models x variants.

    The classical reference is computed once per instance through a shared
    cache before episodes start.  Episodes already persisted under the same
    config hash are skipped.  ``progress`` is an optional callable receiving
    one line per finished episode.
    """
    instances = load_instances(config.instances_path)
    templates = TemplateLibrary(config.template_dir)
    chash = config.config_hash()
    cache = ReferenceCache()
    references = {
        inst.instance_id: solve_reference(inst, cache) for inst in instances
    }

    jobs = []
    skipped = 0
    for inst in instances:
        for model in config.models:
            for variant in config.variants:
                for rep in range(config.repetitions):
                    target = episode_dir(
                        config.repository,
                        chash,
                        (inst.descriptor, inst.instance_id, model.model_id, variant),
                        rep,
                    )
                    if (target / "episode.json").exists():
                        skipped += 1
                        continue
                    jobs.append((inst, model, variant, rep))

    lock = threading.Lock()
    paths: list[str] = []
    invalid_count = 0

    def work(job) -> None:
        nonlocal invalid_count
        inst, model, variant, rep = job
        record = run_episode(
            inst,
            model,
            variant,
            config,
            references[inst.instance_id],
            repetition=rep,
            templates=templates,
            config_hash=chash,
        )
        path = persist_episode(record, config.repository)
        with lock:
            paths.append(str(path))
            if record.invalid:
                invalid_count += 1
        if progress is not None:
            status = (
                f"success@{record.success_turn}"
                if record.success_turn
                else ("invalid" if record.invalid else "exhausted")
            )
            progress(
                f"{inst.instance_id} {model.model_id} {variant} rep{rep}: {status}"
            )

    if config.parallelism == 1:
        for job in jobs:
            work(job)
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            list(pool.map(work, jobs))

    return CampaignSummary(
        config_hash=chash,
        episodes_run=len(jobs),
        episodes_skipped=skipped,
        invalid_episodes=invalid_count,
        record_paths=tuple(sorted(paths)),
        repository=config.repository,
    )
