"""Prompt rendering and per-episode conversation bookkeeping.

Turn 1 uses a family-specific coder template that states the problem, pins
the allowed software stack, spells out the Hamiltonian convention recorded by
the instance registry, and fixes the machine-parseable output contract.
Later turns use a shared feedback template that carries only the previous
run's output (plus the expected value under the informed variant); the
problem statement never reappears after turn 1.

Templates are plain text files with ``{name}`` placeholders laid out as
``templates/<family>/coder.txt`` next to shared ``templates/feedback.txt``
and ``templates/informed_feedback.txt``.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .registry import FAMILIES, ProblemInstance

ROLES = ("system", "user", "assistant")
TEMPLATE_KINDS = ("coder", "feedback", "informed_feedback")
TRUNCATION_LIMIT = 8000
TRUNCATION_MARKER = "[... output truncated, tail retained ...]\n"
OUTPUT_CONTRACT = (
    "Print exactly one line of the form `RESULT: <float>` with the final "
    "numeric answer (plain decimal or scientific notation, nothing else on "
    "the line).  If several such lines are printed, the last one counts."
)
DEFAULT_STACK_STATEMENT = (
    "Write a single self-contained Python 3 script.  You may use only the "
    "Python standard library and numpy.  No other third-party packages are "
    "installed, and there is no network access."
)


class RenderError(ValueError):
    """Raised when a template cannot be rendered completely."""


class ConversationError(ValueError):
    """Raised on role-alternation violations."""


@dataclass(frozen=True)
class Message:
    role: str
    text: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ConversationError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class Conversation:
    """Ordered message history; user/assistant strictly alternate."""

    messages: tuple[Message, ...] = ()

    def __post_init__(self) -> None:
        expected = "user"
        dialogue_started = False
        for msg in self.messages:
            if msg.role == "system":
                if dialogue_started:
                    raise ConversationError("system messages only before the dialogue")
                continue
            dialogue_started = True
            if msg.role != expected:
                raise ConversationError(f"expected {expected} message, got {msg.role}")
            expected = "assistant" if expected == "user" else "user"

    def non_system(self) -> tuple[Message, ...]:
        return tuple(m for m in self.messages if m.role != "system")

    @property
    def turn_count(self) -> int:
        return len(self.non_system()) // 2

    def last_text(self, role: str) -> Optional[str]:
        for msg in reversed(self.messages):
            if msg.role == role:
                return msg.text
        return None


def append_turn(conv: Conversation, user_text: str, assistant_text: str) -> Conversation:
    """Grow the conversation by one user/assistant exchange."""
    return Conversation(
        conv.messages + (Message("user", user_text), Message("assistant", assistant_text))
    )


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    kind: str
    body: str

    def __post_init__(self) -> None:
        if self.kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}")


class TemplateLibrary:
    """Loads templates from a directory tree, defaulting to the bundled set."""

    def __init__(self, root: Optional[str] = None) -> None:
        if root is None:
            self._root = Path(str(importlib.resources.files("qsage") / "data" / "templates"))
        else:
            self._root = Path(root)
        if not self._root.is_dir():
            raise FileNotFoundError(f"template directory not found: {self._root}")

    def _read(self, relative: str) -> str:
        path = self._root / relative
        if not path.is_file():
            raise FileNotFoundError(f"template file not found: {path}")
        return path.read_text(encoding="utf-8")

    def coder(self, family_short_name: str) -> PromptTemplate:
        body = self._read(f"{family_short_name}/coder.txt")
        return PromptTemplate(f"{family_short_name}/coder", "coder", body)

    def feedback(self, variant: str) -> PromptTemplate:
        if variant == "standard":
            return PromptTemplate("feedback", "feedback", self._read("feedback.txt"))
        if variant == "informed":
            return PromptTemplate(
                "informed_feedback", "informed_feedback", self._read("informed_feedback.txt")
            )
        raise ValueError(f"unknown feedback variant {variant!r}")

    def fingerprint(self) -> str:
        """Stable digest over every template file (used in the config hash)."""
        import hashlib

        digest = hashlib.sha256()
        for path in sorted(self._root.rglob("*.txt")):
            digest.update(str(path.relative_to(self._root)).encode())
            digest.update(path.read_bytes())
        return digest.hexdigest()[:16]


def _format_param(value) -> str:
    if isinstance(value, (list, tuple)):
        return json.dumps(list(value))
    if isinstance(value, bool):
        return json.dumps(value)
    return repr(value) if isinstance(value, str) else json.dumps(value)


def parameter_block(instance: ProblemInstance) -> str:
    lines = [f"{name} = {_format_param(value)}" for name, value in instance.params.items()]
    return "\n".join(lines)


def render_coder(
    instance: ProblemInstance,
    template: PromptTemplate,
    stack_statement: str = DEFAULT_STACK_STATEMENT,
    output_contract: str = OUTPUT_CONTRACT,
) -> str:
    """Render the turn-1 prompt for an instance.

    Every instance parameter, the stack statement, the registry's convention
    text, and the output contract are guaranteed to appear in the result; a
    template without a ``{params}`` placeholder gets the parameter block
    appended.  Raises RenderError on unresolved placeholders or when a
    parameter would be missing from the rendered text.
    """
    if template.kind != "coder":
        raise RenderError(f"render_coder needs a coder template, got {template.kind!r}")
    schema = FAMILIES.get(instance.descriptor)
    if schema is None:
        raise RenderError(f"unknown descriptor {instance.descriptor!r}")
    params_block = parameter_block(instance)
    mapping = {
        "title": schema.title,
        "descriptor": instance.descriptor,
        "instance_id": instance.instance_id,
        "params": params_block,
        "convention": schema.convention,
        "stack": stack_statement,
        "output_contract": output_contract,
        "expected_label": schema.expected_output_label,
        "timeout_s": f"{instance.timeout_s:g}",
    }
    try:
        rendered = template.body.format_map(mapping)
    except KeyError as exc:
        raise RenderError(f"unresolved placeholder {{{exc.args[0]}}}") from None
    except (IndexError, ValueError) as exc:
        raise RenderError(f"malformed template: {exc}") from None
    if "{params}" not in template.body:
        rendered = rendered.rstrip("\n") + "\n\nParameters:\n" + params_block + "\n"
    for line in params_block.splitlines():
        if line not in rendered:
            raise RenderError(f"parameter line {line!r} missing from rendered prompt")
    for required, label in (
        (stack_statement, "stack statement"),
        (output_contract, "output contract"),
        (schema.convention, "convention text"),
    ):
        if required and required not in rendered:
            raise RenderError(f"{label} missing from rendered prompt")
    return rendered


def truncate_output(run_output: str, limit: int = TRUNCATION_LIMIT) -> str:
    """Keep the tail of long outputs; tracebacks conclude at the end."""
    if len(run_output) <= limit:
        return run_output
    return TRUNCATION_MARKER + run_output[-limit:]


def render_feedback(
    conv: Conversation,
    run_output: str,
    variant: str,
    expected: Optional[float] = None,
    templates: Optional[TemplateLibrary] = None,
) -> str:
    """Render the turn>=2 prompt carrying the previous run's output.

    The standard variant embeds only the (tail-truncated) output; the
    informed variant additionally embeds the expected value.  The problem
    statement is never re-rendered here.
    """
    if variant not in ("standard", "informed"):
        raise ValueError(f"unknown feedback variant {variant!r}")
    if variant == "informed" and expected is None:
        raise ValueError("informed feedback requires the expected value")
    if variant == "standard" and expected is not None:
        raise ValueError("standard feedback must not carry an expected value")
    if not conv.messages:
        raise ValueError("feedback requires a non-empty conversation")
    if templates is None:
        templates = TemplateLibrary()
    template = templates.feedback(variant)
    mapping = {"run_output": truncate_output(run_output)}
    if variant == "informed":
        mapping["expected"] = repr(float(expected))
    try:
        return template.body.format_map(mapping)
    except KeyError as exc:
        raise RenderError(f"unresolved placeholder {{{exc.args[0]}}}") from None
