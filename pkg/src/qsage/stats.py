"""Campaign statistics: success@t, Mann-Whitney U, Vargha-Delaney A12,
failure-cause distributions, and turn-1 vs time-to-success durations.

Episodes are grouped by (model, family descriptor, variant).  Invalid
episodes (infrastructure three-strike exclusions) are dropped from every
sample and surfaced in a separate excluded count.  Success indicators are
binary and heavily tied; the U test keeps the paper's methodology anyway,
using the tie-corrected normal approximation for larger samples and exact
enumeration over the tie structure for small ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .adjudicate import CATEGORIES, DEFAULT_TAIL_FRACTION, aggregate_causes
from .episodes import EpisodeRecord

GroupKey = tuple[str, str, str]  # (model_id, descriptor, variant)

EXACT_SIZE_LIMIT = 8  # exact enumeration below, normal approximation at and above


def group_key(record: EpisodeRecord) -> GroupKey:
    return (record.model_id, record.descriptor, record.variant)


def _valid(records: Iterable[EpisodeRecord]) -> list[EpisodeRecord]:
    return [r for r in records if not r.invalid]


def excluded_counts(records: Iterable[EpisodeRecord]) -> dict[GroupKey, int]:
    counts: dict[GroupKey, int] = {}
    for record in records:
        if record.invalid:
            key = group_key(record)
            counts[key] = counts.get(key, 0) + 1
    return counts


@dataclass(frozen=True)
class SuccessSample:
    group: GroupKey
    t: int
    indicators: tuple[int, ...]

    def rate(self) -> float:
        return sum(self.indicators) / len(self.indicators)


def success_samples(
    records: Iterable[EpisodeRecord], t: int
) -> dict[GroupKey, SuccessSample]:
    """Per-group binary indicators 1(first success <= t), invalid excluded."""
    if t < 1:
        raise ValueError("t must be >= 1")
    buckets: dict[GroupKey, list[int]] = {}
    for record in _valid(records):
        hit = 1 if record.success_turn is not None and record.success_turn <= t else 0
        buckets.setdefault(group_key(record), []).append(hit)
    return {
        key: SuccessSample(key, t, tuple(vals)) for key, vals in buckets.items()
    }


def success_at(records: Iterable[EpisodeRecord], t: int) -> dict[GroupKey, float]:
    """Mean success indicator per group; groups without episodes are absent."""
    return {key: s.rate() for key, s in success_samples(records, t).items()}


# --- Mann-Whitney U ---------------------------------------------------------


def _two_u(a: Sequence[float], b: Sequence[float]) -> int:
    """2*U_a as an exact integer: 2 per a>b pair, 1 per tie."""
    total = 0
    for x in a:
        for y in b:
            if x > y:
                total += 2
            elif x == y:
                total += 1
    return total


def _tie_structure(a: Sequence[float], b: Sequence[float]) -> list[int]:
    combined = sorted(list(a) + list(b))
    counts: list[int] = []
    previous = None
    for value in combined:
        if previous is not None and value == previous:
            counts[-1] += 1
        else:
            counts.append(1)
        previous = value
    return counts


def mann_whitney_exact_p(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided exact p over all allocations respecting the tie structure.

    Dynamic program over distinct values: states are (elements assigned to
    sample a so far, accumulated 2U), weighted by multinomial counts, which
    reproduces full enumeration of all C(N, n_a) rank assignments without
    listing them.
    """
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("samples must be non-empty")
    counts = _tie_structure(a, b)
    two_u_obs = _two_u(a, b)
    center = n_a * n_b  # mean of 2U
    observed_dev = abs(two_u_obs - center)

    states: dict[tuple[int, int], int] = {(0, 0): 1}
    below = 0
    for c in counts:
        next_states: dict[tuple[int, int], int] = {}
        for (taken, two_u), ways in states.items():
            for j in range(0, min(c, n_a - taken) + 1):
                increment = 2 * j * (below - taken) + j * (c - j)
                key = (taken + j, two_u + increment)
                next_states[key] = next_states.get(key, 0) + ways * math.comb(c, j)
        states = next_states
        below += c
    total_ways = math.comb(n_a + n_b, n_a)
    extreme = sum(
        ways
        for (taken, two_u), ways in states.items()
        if taken == n_a and abs(two_u - center) >= observed_dev
    )
    return extreme / total_ways


def mann_whitney_approx_p(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided normal approximation with tie-corrected variance."""
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("samples must be non-empty")
    n = n_a + n_b
    u = _two_u(a, b) / 2.0
    mu = n_a * n_b / 2.0
    tie_term = sum(t ** 3 - t for t in _tie_structure(a, b))
    variance = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return 1.0
    z = (abs(u - mu) - 0.5) / math.sqrt(variance)
    if z < 0:
        z = 0.0
    return math.erfc(z / math.sqrt(2.0))


def is_degenerate(a: Sequence[float], b: Sequence[float]) -> bool:
    return len(set(a) | set(b)) <= 1


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """U statistic for sample a and the two-sided p-value.

    Exact enumeration when either sample has fewer than ``EXACT_SIZE_LIMIT``
    elements, tie-corrected normal approximation otherwise.  Samples with all
    values identical give p = 1.0 by convention.
    """
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("samples must be non-empty")
    u = _two_u(a, b) / 2.0
    if is_degenerate(a, b):
        return u, 1.0
    if min(n_a, n_b) < EXACT_SIZE_LIMIT:
        return u, mann_whitney_exact_p(a, b)
    return u, mann_whitney_approx_p(a, b)


# --- Vargha-Delaney ---------------------------------------------------------

EFFECT_THRESHOLDS = ((0.70, "large"), (0.63, "medium"), (0.55, "small"))


def effect_category(a12: float) -> str:
    magnitude = max(a12, 1.0 - a12)
    for threshold, name in EFFECT_THRESHOLDS:
        if magnitude > threshold:
            return name
    return "negligible"


@dataclass(frozen=True)
class EffectSize:
    a12: float
    category: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.a12 <= 1.0:
            raise ValueError("A12 must lie in [0, 1]")


def vargha_delaney(a: Sequence[float], b: Sequence[float]) -> EffectSize:
    """A12 = P(a > b) + 0.5 P(a = b) over all cross pairs."""
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("samples must be non-empty")
    a12 = _two_u(a, b) / (2.0 * n_a * n_b)
    return EffectSize(a12, effect_category(a12))


# --- report rows ------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    group: GroupKey
    t_low: int
    t_high: int
    n: int
    u: float
    p_value: float
    a12: float
    category: str
    degenerate: bool


def compare_turns(
    records: Iterable[EpisodeRecord], t_low: int, t_high: int
) -> list[ComparisonRow]:
    """Per-group U test and effect size of success@t_high vs success@t_low.

    A12 > 0.5 means the larger budget helps.  Groups are ordered by key;
    degenerate samples (all indicators equal) are flagged.
    """
    if not t_low < t_high:
        raise ValueError("need t_low < t_high")
    records = list(records)
    low = success_samples(records, t_low)
    high = success_samples(records, t_high)
    rows = []
    for key in sorted(low):
        a = list(high[key].indicators)
        b = list(low[key].indicators)
        u, p = mann_whitney_u(a, b)
        effect = vargha_delaney(a, b)
        rows.append(
            ComparisonRow(
                group=key,
                t_low=t_low,
                t_high=t_high,
                n=len(a),
                u=u,
                p_value=p,
                a12=effect.a12,
                category=effect.category,
                degenerate=is_degenerate(a, b),
            )
        )
    return rows


@dataclass(frozen=True)
class DurationRow:
    group: GroupKey
    turn1_durations: tuple[float, ...]
    time_to_success: tuple[float, ...]
    p_value: Optional[float]
    a12: Optional[float]
    category: Optional[str]
    log_scale: bool = True
    note: Optional[str] = None


def _time_to_first_success(record: EpisodeRecord) -> float:
    assert record.success_turn is not None
    return sum(t.duration_s for t in record.turns if t.turn <= record.success_turn)


def duration_report(records: Iterable[EpisodeRecord]) -> list[DurationRow]:
    """Turn-1 durations vs cumulative time to first success per group."""
    buckets: dict[GroupKey, list[EpisodeRecord]] = {}
    for record in _valid(records):
        buckets.setdefault(group_key(record), []).append(record)
    rows = []
    for key in sorted(buckets):
        episodes = buckets[key]
        turn1 = tuple(r.turn1_duration_s for r in episodes if r.turns)
        success = tuple(
            _time_to_first_success(r) for r in episodes if r.success_turn is not None
        )
        if not success:
            rows.append(
                DurationRow(key, turn1, (), None, None, None, note="no successes")
            )
            continue
        u, p = mann_whitney_u(list(success), list(turn1))
        effect = vargha_delaney(list(success), list(turn1))
        rows.append(
            DurationRow(
                group=key,
                turn1_durations=turn1,
                time_to_success=success,
                p_value=p,
                a12=effect.a12,
                category=effect.category,
            )
        )
    return rows


def failure_distribution(
    records: Iterable[EpisodeRecord], tail_fraction: float = DEFAULT_TAIL_FRACTION
) -> dict[GroupKey, dict[str, float]]:
    """Per-group failure-cause percentages over all failed turns."""
    buckets: dict[GroupKey, list] = {}
    for record in _valid(records):
        causes = [t.failure_cause for t in record.turns if t.failure_cause is not None]
        buckets.setdefault(group_key(record), []).extend(causes)
    return {
        key: aggregate_causes(causes, tail_fraction)
        for key, causes in sorted(buckets.items())
        if causes
    }


# --- emission ---------------------------------------------------------------


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Aligned plain-text table."""
    widths = [len(h) for h in headers]
    str_rows = [[str(cell) for cell in row] for row in rows]
    for row in str_rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in str_rows)
    return "\n".join(lines)


def write_csv(path: str, headers: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow(row)


def success_table(
    records: Iterable[EpisodeRecord], ts: Sequence[int] = (1, 5, 10)
) -> tuple[list[str], list[list[str]]]:
    """Headers and rows for the success@t summary (plus excluded counts)."""
    records = list(records)
    per_t = {t: success_at(records, t) for t in ts}
    excluded = excluded_counts(records)
    groups = sorted({g for table in per_t.values() for g in table} | set(excluded))
    headers = ["model", "family", "variant"] + [f"success@{t}" for t in ts] + [
        "excluded"
    ]
    rows = []
    for group in groups:
        model, descriptor, variant = group
        cells = [model, descriptor, variant]
        for t in ts:
            value = per_t[t].get(group)
            cells.append("-" if value is None else f"{value:.3f}")
        cells.append(str(excluded.get(group, 0)))
        rows.append(cells)
    return headers, rows
