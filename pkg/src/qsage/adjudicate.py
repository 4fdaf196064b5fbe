"""Numeric verification against the reference and rule-based failure triage.

The verifier applies the tolerance contract ``|observed - reference| <=
max(tol.absolute, tol.relative * |reference|)``.  The classifier buckets
failed turns into a closed seven-category taxonomy: a timeout flag wins
outright, then keyword rules fire in the fixed order Deps, Gen, API, Type
over the combined stderr+stdout (case-sensitive substrings), then clean runs
with wrong or unparseable output become NumErr, and anything left is Other.
The keyword table ships as a data file so it can be edited without touching
code.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .registry import Tolerance
from .runner import ExecutionResult, ParseFailure

VERDICT_REASONS = ("parse-failure", "out-of-tolerance", "execution-failure", "timeout")
CATEGORIES = ("NumErr", "Timeout", "API", "Deps", "Type", "Gen", "Other")
DEFAULT_TAIL_FRACTION = 0.25


@dataclass(frozen=True)
class Verdict:
    outcome: str
    reference: float
    observed: Optional[float] = None
    abs_deviation: Optional[float] = None
    rel_deviation: Optional[float] = None
    reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.outcome not in ("pass", "fail"):
            raise ValueError(f"outcome must be pass or fail, got {self.outcome!r}")
        if self.outcome == "pass":
            if self.observed is None or self.reason is not None:
                raise ValueError("pass verdicts carry an observed value and no reason")
        else:
            if self.reason not in VERDICT_REASONS:
                raise ValueError(f"fail verdicts need a reason from {VERDICT_REASONS}")

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"


def verify(
    observed: float | ParseFailure, reference: float, tol: Tolerance
) -> Verdict:
    """Pass/fail comparison of a parsed value against the reference."""
    if not math.isfinite(reference):
        raise ValueError("reference must be finite")
    if isinstance(observed, ParseFailure):
        return Verdict("fail", reference, reason="parse-failure")
    abs_dev = abs(observed - reference)
    rel_dev = abs_dev / abs(reference) if reference != 0 else math.inf
    outcome = "pass" if tol.admits(observed, reference) else "fail"
    return Verdict(
        outcome,
        reference,
        observed=float(observed),
        abs_deviation=abs_dev,
        rel_deviation=rel_dev,
        reason=None if outcome == "pass" else "out-of-tolerance",
    )


@dataclass(frozen=True)
class TaxonomyCategory:
    id: str
    cause: str
    explanation: str
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class Taxonomy:
    categories: tuple[TaxonomyCategory, ...]
    precedence: tuple[str, ...]

    def __post_init__(self) -> None:
        ids = tuple(c.id for c in self.categories)
        if ids != CATEGORIES:
            raise ValueError(f"taxonomy categories must be {CATEGORIES}, got {ids}")
        keyword_cats = {c.id for c in self.categories if c.keywords}
        if set(self.precedence) != keyword_cats:
            raise ValueError("precedence must list exactly the keyword categories")

    def by_id(self, cat_id: str) -> TaxonomyCategory:
        for cat in self.categories:
            if cat.id == cat_id:
                return cat
        raise KeyError(cat_id)


_DEFAULT_TAXONOMY: Optional[Taxonomy] = None


def load_taxonomy(path: Optional[str] = None) -> Taxonomy:
    if path is None:
        resource = importlib.resources.files("qsage") / "data" / "taxonomy.json"
        doc = json.loads(resource.read_text(encoding="utf-8"))
    else:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    cats = tuple(
        TaxonomyCategory(
            c["id"], c["cause"], c["explanation"], tuple(c.get("keywords", ()))
        )
        for c in doc["categories"]
    )
    return Taxonomy(cats, tuple(doc["precedence"]))


def default_taxonomy() -> Taxonomy:
    global _DEFAULT_TAXONOMY
    if _DEFAULT_TAXONOMY is None:
        _DEFAULT_TAXONOMY = load_taxonomy()
    return _DEFAULT_TAXONOMY


@dataclass(frozen=True)
class FailureCause:
    category: str
    matched_keyword: Optional[str] = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")


def classify(
    exec_result: ExecutionResult,
    verdict: Verdict,
    taxonomy: Optional[Taxonomy] = None,
) -> FailureCause:
    """Assign a failure cause to a failed turn.

    Precedence: timeout flag, then keyword rules in taxonomy order, then
    clean-run NumErr, then Other.  Raises on pass verdicts (classification is
    only defined for failures).
    """
    if verdict.passed:
        raise ValueError("classify is only defined for fail verdicts")
    if taxonomy is None:
        taxonomy = default_taxonomy()
    if exec_result.timed_out:
        return FailureCause("Timeout")
    trace = exec_result.stderr + "\n" + exec_result.stdout
    for cat_id in taxonomy.precedence:
        for keyword in taxonomy.by_id(cat_id).keywords:
            if keyword in trace:
                return FailureCause(cat_id, keyword)
    if exec_result.exit_status == 0 and verdict.reason in (
        "out-of-tolerance",
        "parse-failure",
    ):
        return FailureCause("NumErr")
    return FailureCause("Other")


def keyword_category(keyword: str, taxonomy: Optional[Taxonomy] = None) -> str:
    """Category owning a keyword; precedence order decides shared keywords."""
    if taxonomy is None:
        taxonomy = default_taxonomy()
    for cat_id in taxonomy.precedence:
        if keyword in taxonomy.by_id(cat_id).keywords:
            return cat_id
    raise KeyError(keyword)


def aggregate_causes(
    causes: Iterable[FailureCause], tail_fraction: float = DEFAULT_TAIL_FRACTION
) -> dict[str, float]:
    """Percentage per category with the least-common tail folded into Other.

    Categories are sorted by ascending share; those whose cumulative share
    stays within ``tail_fraction`` are reported under Other.  The underlying
    FailureCause labels are never rewritten, only the report view.  Empty
    input gives an empty table.
    """
    if not 0 <= tail_fraction < 1:
        raise ValueError("tail_fraction must be in [0, 1)")
    counts = {cat: 0 for cat in CATEGORIES}
    total = 0
    for cause in causes:
        counts[cause.category] += 1
        total += 1
    if total == 0:
        return {}
    shares = {cat: counts[cat] / total for cat in CATEGORIES}
    foldable = sorted(
        (cat for cat in CATEGORIES if cat != "Other" and counts[cat] > 0),
        key=lambda cat: shares[cat],
    )
    cumulative = 0.0
    folded: set[str] = set()
    for cat in foldable:
        if cumulative + shares[cat] <= tail_fraction + 1e-12:
            cumulative += shares[cat]
            folded.add(cat)
        else:
            break
    table: dict[str, float] = {}
    other = shares["Other"] + sum(shares[cat] for cat in folded)
    for cat in CATEGORIES:
        if cat == "Other":
            table[cat] = 100.0 * other
        elif cat in folded:
            table[cat] = 0.0
        else:
            table[cat] = 100.0 * shares[cat]
    return table
