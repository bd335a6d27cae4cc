"""Coordination-log ingestion: rule-based labeling and chain calibration.

Free-text traffic-management log comments mentioning pathfinders are
labeled with a fixed-precedence keyword scheme (Failed, then Rejected, then
Assigned, then Requested, with Mentioned as the fallback). Assigned
additionally requires a flight number in the comment; Failed presupposes an
assignment gone wrong, which is why it outranks everything else. Label
counts feed the ratio estimators for the chain's acceptance and success
probabilities.

Keyword lists and the flight-number pattern live in a JSON rules file so
they can be extended without touching code; matching happens on normalized
text (lowercased, apostrophes removed, other punctuation collapsed to
whitespace).
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from dataclasses import dataclass, fields
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .chain import ChainParams, build_transition_matrix, steady_state
from .errors import EmptyGrid, InsufficientData
from .simulate import STREAM_CORPUS, make_rng


class Label(enum.Enum):
    ASSIGNED = "Assigned"
    REQUESTED = "Requested"
    REJECTED = "Rejected"
    FAILED = "Failed"
    MENTIONED = "Mentioned"


# Most specific first: a failure report usually also names the assignment,
# and a denial may quote the request it denies.
PRECEDENCE = (Label.FAILED, Label.REJECTED, Label.ASSIGNED, Label.REQUESTED)

FALLBACK_RULE = "fallback"


@dataclass(frozen=True)
class LogRecord:
    timestamp: datetime
    facility: str
    comment: str

    def __post_init__(self):
        if not isinstance(self.timestamp, datetime):
            raise ValueError(f"timestamp must be a datetime, got {self.timestamp!r}")
        if not isinstance(self.comment, str) or not self.comment.strip():
            raise ValueError("comment must be non-empty after trimming")


@dataclass(frozen=True)
class LabeledRecord:
    record: LogRecord
    label: Label
    rule: str


@dataclass(frozen=True)
class LabelCounts:
    n_assigned: int = 0
    n_requested: int = 0
    n_rejected: int = 0
    n_failed: int = 0
    n_mentioned: int = 0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{f.name} must be a nonnegative integer, got {value!r}")

    @classmethod
    def from_labels(cls, labels) -> "LabelCounts":
        tally = {label: 0 for label in Label}
        for label in labels:
            tally[label] += 1
        return cls(
            n_assigned=tally[Label.ASSIGNED],
            n_requested=tally[Label.REQUESTED],
            n_rejected=tally[Label.REJECTED],
            n_failed=tally[Label.FAILED],
            n_mentioned=tally[Label.MENTIONED],
        )

    def total(self) -> int:
        return (
            self.n_assigned
            + self.n_requested
            + self.n_rejected
            + self.n_failed
            + self.n_mentioned
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_APOSTROPHES = str.maketrans({"’": "", "‘": "", "'": ""})
_NON_ALNUM = re.compile(r"[^a-z0-9\s]")
_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase, drop apostrophes, turn other punctuation into spaces,
    collapse whitespace."""
    t = text.lower().translate(_APOSTROPHES)
    t = _NON_ALNUM.sub(" ", t)
    return _WHITESPACE.sub(" ", t).strip()


def _compile_keyword(keyword: str) -> re.Pattern:
    return re.compile(r"\b" + re.escape(normalize_text(keyword)) + r"\b")


@dataclass(frozen=True)
class RuleSet:
    """Compiled classification rules: per-label keyword patterns plus the
    flight-number pattern gating the Assigned label."""

    flight_number: re.Pattern
    keywords: dict[Label, tuple[tuple[str, re.Pattern], ...]]


def parse_rules(doc) -> RuleSet:
    """Validate and compile a rules document; errors name the bad entry."""
    if not isinstance(doc, dict):
        raise ValueError("rules file: top level must be a JSON object")
    unknown = [k for k in doc if k not in ("flight_number_pattern", "labels")]
    if unknown:
        raise ValueError(f"rules file: unknown key {unknown[0]!r}")
    pattern_src = doc.get("flight_number_pattern")
    if not isinstance(pattern_src, str) or not pattern_src:
        raise ValueError("rules file: 'flight_number_pattern' must be a non-empty string")
    try:
        flight_number = re.compile(pattern_src)
    except re.error as exc:
        raise ValueError(f"rules file: 'flight_number_pattern' is not a valid regex: {exc}")
    labels_doc = doc.get("labels")
    if not isinstance(labels_doc, dict):
        raise ValueError("rules file: 'labels' must be an object mapping label to keyword list")
    by_value = {label.value: label for label in PRECEDENCE}
    keywords: dict[Label, tuple[tuple[str, re.Pattern], ...]] = {}
    for name, entries in labels_doc.items():
        if name == Label.MENTIONED.value:
            raise ValueError(
                f"rules file: labels.{name} takes no keywords (it is the fallback)"
            )
        if name not in by_value:
            raise ValueError(f"rules file: unknown label {name!r}")
        if not isinstance(entries, list) or not entries:
            raise ValueError(f"rules file: labels.{name} must be a non-empty list")
        compiled = []
        for i, entry in enumerate(entries):
            if not isinstance(entry, str) or not entry.strip():
                raise ValueError(
                    f"rules file: labels.{name}[{i}] must be a non-empty string"
                )
            compiled.append((entry, _compile_keyword(entry)))
        keywords[by_value[name]] = tuple(compiled)
    missing = [label.value for label in PRECEDENCE if label not in keywords]
    if missing:
        raise ValueError(f"rules file: missing keyword list for label {missing[0]!r}")
    return RuleSet(flight_number=flight_number, keywords=keywords)


def load_rules(path: str) -> RuleSet:
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"rules file {path}: invalid JSON: {exc}")
    return parse_rules(doc)


@lru_cache(maxsize=1)
def default_rules() -> RuleSet:
    text = resources.files("pathfinder_ops").joinpath("data/default_rules.json").read_text()
    return parse_rules(json.loads(text))


def classify(record: LogRecord, rules: RuleSet | None = None) -> tuple[Label, str]:
    """Label one comment; returns (label, rule id of the match).

    Rule ids are '<label>:<keyword>' or 'fallback'. Every valid record
    receives exactly one label.
    """
    if rules is None:
        rules = default_rules()
    text = normalize_text(record.comment)
    has_flight = bool(rules.flight_number.search(text))
    for label in PRECEDENCE:
        if label is Label.ASSIGNED and not has_flight:
            continue
        for raw, pattern in rules.keywords[label]:
            if pattern.search(text):
                return label, f"{label.value.lower()}:{raw}"
    return Label.MENTIONED, FALLBACK_RULE


def classify_corpus(
    records: list[LogRecord], rules: RuleSet | None = None
) -> tuple[list[LabeledRecord], LabelCounts]:
    """Label every record, preserving input order, and tally the labels."""
    if rules is None:
        rules = default_rules()
    labeled = []
    for record in records:
        label, rule = classify(record, rules)
        labeled.append(LabeledRecord(record=record, label=label, rule=rule))
    counts = LabelCounts.from_labels(lr.label for lr in labeled)
    return labeled, counts


def estimate_params(counts: LabelCounts) -> tuple[float, float]:
    """(p_accept, p_success) ratio estimates from label counts.

    p_accept = (requested + failed) / (requested + failed + rejected);
    p_success = requested / (requested + failed). Computed in exact
    rational arithmetic before conversion to float.
    """
    committed = counts.n_requested + counts.n_failed
    offered = committed + counts.n_rejected
    if offered == 0 or committed == 0:
        raise InsufficientData(
            "need n_requested + n_failed > 0 to calibrate the chain "
            f"(got requested={counts.n_requested}, failed={counts.n_failed}, "
            f"rejected={counts.n_rejected})"
        )
    p_accept = float(Fraction(committed, offered))
    p_success = float(Fraction(counts.n_requested, committed))
    return p_accept, p_success


def calibrated_steady_state(
    counts: LabelCounts, g_grid
) -> list[tuple[float, np.ndarray]]:
    """Stationary distributions over a weather-reliability grid, with
    acceptance and success probabilities estimated from the counts."""
    p_accept, p_success = estimate_params(counts)
    g_values = [float(g) for g in g_grid]
    if not g_values:
        raise EmptyGrid("p_good grid must be non-empty")
    out = []
    for g in sorted(g_values):
        params = ChainParams(p_good=g, p_accept=p_accept, p_success=p_success)
        out.append((g, steady_state(build_transition_matrix(params))))
    return out


CORPUS_CSV_HEADER = ["timestamp", "facility", "comment"]
LABELED_CSV_HEADER = ["timestamp", "facility", "comment", "label", "rule"]


def _parse_timestamp(text: str, line: int) -> datetime:
    try:
        return datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise ValueError(f"line {line}: timestamp {text!r} is not ISO-8601")


def read_corpus_csv(path: str) -> list[LogRecord]:
    """Read a `timestamp,facility,comment` CSV (RFC 4180 quoting)."""
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header {CORPUS_CSV_HEADER}")
        if header != CORPUS_CSV_HEADER:
            raise ValueError(f"{path}: expected header {CORPUS_CSV_HEADER}, got {header}")
        records = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: line {line}: expected 3 fields, got {len(row)}")
            timestamp = _parse_timestamp(row[0], line)
            try:
                records.append(LogRecord(timestamp=timestamp, facility=row[1], comment=row[2]))
            except ValueError as exc:
                raise ValueError(f"{path}: line {line}: {exc}")
    return records


def labeled_to_csv(labeled: list[LabeledRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(LABELED_CSV_HEADER)
    for lr in labeled:
        writer.writerow(
            [
                lr.record.timestamp.isoformat(),
                lr.record.facility,
                lr.record.comment,
                lr.label.value,
                lr.rule,
            ]
        )
    return buffer.getvalue()


# --- synthetic corpus generation -------------------------------------------
#
# Templates are built from the rule keyword lists, so each template's label
# is known by construction. Used for fixtures and larger stress corpora; the
# real log corpus is not distributable.

_FIXES = ("ELIOT", "WHITE", "GAYEL", "NEION", "MERIT", "COATE", "BAYYS", "GREKI")
_AIRLINES = ("UAL", "DAL", "AAL", "SWA", "JBU", "RPA", "FDX", "EJA")
_FACILITIES = ("ZNY", "ZDC", "ZOB", "ZBW", "N90", "PHL", "ZID", "ZTL")

_TEMPLATES: dict[Label, tuple[str, ...]] = {
    Label.ASSIGNED: (
        "{flight} assigned as pathfinder, released via {fix} gate",
        "{flight} approved to probe the {fix} gate",
        "pathfinder {flight} released on course to {fix}",
        "{flight} assigned pathfinder duties for {fix}",
    ),
    Label.REQUESTED: (
        "asking for pathfinder at {fix}",
        "requesting pathfinder through the {fix} gate",
        "can we get one through {fix}",
        "requesting {flight} as pathfinder for {fix}",
    ),
    Label.REJECTED: (
        "pathfinder declined by company",
        "no pathfinder available this hour",
        "still waiting on pathfinder decision from {facility}",
        "pathfinder not available until tops drop below 350",
        "{flight} declined the pathfinder offer",
    ),
    Label.FAILED: (
        "pathfinder not good, tops still building over {fix}",
        "pathfinder didn't make it through the {fix} gate",
        "{flight} deviated south of {fix}, ride reported moderate",
        "pathfinder {flight} didn't make it, returning to the fix",
    ),
    Label.MENTIONED: (
        "pathfinder ops possible later today",
        "discussed pathfinder options on the hotline with {facility}",
        "weather improving, pathfinder candidates under review",
        "pathfinder coordination with {facility} ongoing",
        "may try a pathfinder once the line moves east of {fix}",
    ),
}

_LABEL_WEIGHTS = {
    Label.MENTIONED: 0.35,
    Label.ASSIGNED: 0.25,
    Label.REQUESTED: 0.18,
    Label.REJECTED: 0.13,
    Label.FAILED: 0.09,
}


def generate_corpus(size: int, seed: int) -> list[tuple[LogRecord, Label]]:
    """Sample a synthetic labeled corpus; deterministic in (size, seed)."""
    if not isinstance(size, int) or size <= 0:
        raise ValueError(f"size must be a positive integer, got {size!r}")
    rng = make_rng(seed, STREAM_CORPUS)
    labels = list(_LABEL_WEIGHTS)
    weights = np.array([_LABEL_WEIGHTS[label] for label in labels])
    weights = weights / weights.sum()
    when = datetime(2022, 12, 22, 0, 0, tzinfo=timezone.utc)
    out = []
    for _ in range(size):
        label = labels[rng.choice(len(labels), p=weights)]
        template = _TEMPLATES[label][rng.integers(len(_TEMPLATES[label]))]
        flight = f"{_AIRLINES[rng.integers(len(_AIRLINES))]}{rng.integers(1, 10000)}"
        comment = template.format(
            flight=flight,
            fix=_FIXES[rng.integers(len(_FIXES))],
            facility=_FACILITIES[rng.integers(len(_FACILITIES))],
        )
        facility = _FACILITIES[rng.integers(len(_FACILITIES))]
        when = when + timedelta(minutes=int(rng.integers(5, 600)))
        out.append((LogRecord(timestamp=when, facility=facility, comment=comment), label))
    return out
