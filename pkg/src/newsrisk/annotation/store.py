"""File-backed store for the annotation workflow.

All mutations append one JSON line to an event log and update the in-memory
view; replaying the log reconstructs the state exactly, which is the crash
recovery story. Compaction rewrites the log to current state only, dropping
superseded history. A single lock serializes writers; reads are lock-free.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet

CALIBRATION = "calibration"
SOLO = "solo"

STATUS_DRAFT = "draft"
STATUS_SUBMITTED = "submitted"
STATUS_REJECTED = "rejected"


class ValidationFailure(ValueError):
    """Bad submission payload (HTTP 400)."""


class UnknownAssignmentError(LookupError):
    """No assignment exists for this (sample, annotator) (HTTP 403)."""


class PreconditionError(RuntimeError):
    """The operation's workflow precondition does not hold (HTTP 409)."""


@dataclass(frozen=True)
class ServiceSample:
    """A sample as served to annotators; text mirrors the corpus truncation."""

    sample_id: str
    article_id: str
    company_id: str
    company_name: str
    headline: str
    sentences: tuple[str, ...]
    truncated_text: str

    def to_record(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "article_id": self.article_id,
            "company_id": self.company_id,
            "company_name": self.company_name,
            "headline": self.headline,
            "sentences": list(self.sentences),
            "truncated_text": self.truncated_text,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ServiceSample":
        return cls(
            sample_id=record["sample_id"],
            article_id=record["article_id"],
            company_id=record["company_id"],
            company_name=record.get("company_name", ""),
            headline=record.get("headline", ""),
            sentences=tuple(record.get("sentences", ())),
            truncated_text=record["truncated_text"],
        )


@dataclass(frozen=True)
class Assignment:
    sample_id: str
    annotator_id: str
    batch: str

    def __post_init__(self) -> None:
        if self.batch not in (CALIBRATION, SOLO):
            raise ValueError(f"batch must be calibration or solo, got {self.batch!r}")


@dataclass(frozen=True)
class AnnotationRecord:
    sample_id: str
    annotator_id: str
    labels: RiskLabelSet
    no_risk_confirmed: bool
    submitted_at: datetime
    status: str = STATUS_SUBMITTED
    reject_reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.status not in (STATUS_DRAFT, STATUS_SUBMITTED, STATUS_REJECTED):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == STATUS_REJECTED and not self.reject_reason:
            raise ValueError("a rejection needs a reason")


@dataclass(frozen=True)
class GoldRecord:
    sample_id: str
    labels: RiskLabelSet
    adjudicated_by: str
    source: str = "adjudicated"


@dataclass
class ExportResult:
    records: list[dict]
    excluded_unadjudicated: int = 0
    excluded_rejected: int = 0


@dataclass
class DisagreementReport:
    sample_id: str
    submissions: dict[str, RiskLabelSet]
    #: factor -> (annotators voting positive, annotators voting negative);
    #: only factors with both sides non-empty appear.
    conflicts: dict[RiskFactor, tuple[tuple[str, ...], tuple[str, ...]]] = field(
        default_factory=dict
    )

    @property
    def unanimous(self) -> bool:
        return not self.conflicts


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class AnnotationStore:
    LOG_NAME = "events.log"

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._log_path = self.data_dir / self.LOG_NAME
        self._lock = threading.Lock()
        self.samples: dict[str, ServiceSample] = {}
        self._sample_order: list[str] = []
        self.assignments: dict[tuple[str, str], Assignment] = {}
        self._assignment_order: list[tuple[str, str]] = []
        self.current: dict[tuple[str, str], AnnotationRecord] = {}
        self.annotation_history: dict[str, list[AnnotationRecord]] = {}
        self.gold: dict[str, GoldRecord] = {}
        self.gold_history: dict[str, list[GoldRecord]] = {}
        if self._log_path.exists():
            self._replay()

    # -- persistence ------------------------------------------------------

    def _append(self, kind: str, data: dict) -> None:
        line = json.dumps({"kind": kind, "data": data}, sort_keys=True)
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self) -> None:
        with open(self._log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                self._apply(event["kind"], event["data"])

    def _apply(self, kind: str, data: dict) -> None:
        if kind == "sample":
            sample = ServiceSample.from_record(data)
            if sample.sample_id not in self.samples:
                self._sample_order.append(sample.sample_id)
            self.samples[sample.sample_id] = sample
        elif kind == "assignment":
            assignment = Assignment(
                sample_id=data["sample_id"],
                annotator_id=data["annotator_id"],
                batch=data["batch"],
            )
            key = (assignment.sample_id, assignment.annotator_id)
            if key not in self.assignments:
                self._assignment_order.append(key)
            self.assignments[key] = assignment
        elif kind == "annotation":
            record = AnnotationRecord(
                sample_id=data["sample_id"],
                annotator_id=data["annotator_id"],
                labels=RiskLabelSet.from_mapping(data["labels"]),
                no_risk_confirmed=data["no_risk_confirmed"],
                submitted_at=datetime.fromisoformat(data["submitted_at"]),
                status=data.get("status", STATUS_SUBMITTED),
                reject_reason=data.get("reject_reason"),
            )
            self.current[(record.sample_id, record.annotator_id)] = record
            self.annotation_history.setdefault(record.sample_id, []).append(record)
        elif kind == "adjudication":
            gold = GoldRecord(
                sample_id=data["sample_id"],
                labels=RiskLabelSet.from_mapping(data["labels"]),
                adjudicated_by=data["adjudicated_by"],
            )
            self.gold[gold.sample_id] = gold
            self.gold_history.setdefault(gold.sample_id, []).append(gold)
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def compact(self) -> None:
        """Rewrite the log with current state only; atomic replace."""
        with self._lock:
            tmp_path = self._log_path.with_suffix(".tmp")
            with open(tmp_path, "w", encoding="utf-8") as fh:
                for sample_id in self._sample_order:
                    fh.write(
                        json.dumps(
                            {"kind": "sample", "data": self.samples[sample_id].to_record()},
                            sort_keys=True,
                        )
                        + "\n"
                    )
                for key in self._assignment_order:
                    a = self.assignments[key]
                    fh.write(
                        json.dumps(
                            {
                                "kind": "assignment",
                                "data": {
                                    "sample_id": a.sample_id,
                                    "annotator_id": a.annotator_id,
                                    "batch": a.batch,
                                },
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
                for record in self.current.values():
                    fh.write(
                        json.dumps(
                            {"kind": "annotation", "data": self._annotation_data(record)},
                            sort_keys=True,
                        )
                        + "\n"
                    )
                for gold in self.gold.values():
                    fh.write(
                        json.dumps(
                            {
                                "kind": "adjudication",
                                "data": {
                                    "sample_id": gold.sample_id,
                                    "labels": gold.labels.to_mapping(),
                                    "adjudicated_by": gold.adjudicated_by,
                                },
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_path, self._log_path)

    @staticmethod
    def _annotation_data(record: AnnotationRecord) -> dict:
        return {
            "sample_id": record.sample_id,
            "annotator_id": record.annotator_id,
            "labels": record.labels.to_mapping(),
            "no_risk_confirmed": record.no_risk_confirmed,
            "submitted_at": record.submitted_at.isoformat(),
            "status": record.status,
            "reject_reason": record.reject_reason,
        }

    # -- workflow operations ----------------------------------------------

    def enqueue(
        self,
        samples: Sequence[ServiceSample],
        annotators: Sequence[str],
        calibration_count: int,
    ) -> list[Assignment]:
        """Assign the first calibration_count samples to every annotator and
        the rest round-robin, one annotator each."""
        if not annotators:
            raise ValidationFailure("need at least one annotator")
        if calibration_count > len(samples):
            raise ValidationFailure(
                f"calibration_count {calibration_count} exceeds {len(samples)} samples"
            )
        if calibration_count < 0:
            raise ValidationFailure("calibration_count must be >= 0")
        assignments: list[Assignment] = []
        with self._lock:
            for sample in samples:
                self._append("sample", sample.to_record())
                self._apply("sample", sample.to_record())
            for position, sample in enumerate(samples):
                if position < calibration_count:
                    targets = [(annotator, CALIBRATION) for annotator in annotators]
                else:
                    solo_index = position - calibration_count
                    targets = [(annotators[solo_index % len(annotators)], SOLO)]
                for annotator, batch in targets:
                    data = {
                        "sample_id": sample.sample_id,
                        "annotator_id": annotator,
                        "batch": batch,
                    }
                    self._append("assignment", data)
                    self._apply("assignment", data)
                    assignments.append(self.assignments[(sample.sample_id, annotator)])
        return assignments

    def submit(self, record: AnnotationRecord) -> AnnotationRecord:
        """Persist a submission; resubmission replaces, history is retained."""
        key = (record.sample_id, record.annotator_id)
        if key not in self.assignments:
            raise UnknownAssignmentError(
                f"no assignment of sample {record.sample_id!r} to {record.annotator_id!r}"
            )
        if record.status == STATUS_SUBMITTED:
            if record.labels.is_no_risk and not record.no_risk_confirmed:
                raise ValidationFailure(
                    "all-false labels require the no-risk confirmation"
                )
            if record.no_risk_confirmed and not record.labels.is_no_risk:
                raise ValidationFailure(
                    "no-risk confirmation conflicts with positive labels"
                )
        with self._lock:
            data = self._annotation_data(record)
            self._append("annotation", data)
            self._apply("annotation", data)
        return record

    def submissions(self, sample_id: str) -> list[AnnotationRecord]:
        """Current submitted (not draft, not rejected) records for a sample."""
        return [
            record
            for (sid, _), record in sorted(self.current.items())
            if sid == sample_id and record.status == STATUS_SUBMITTED
        ]

    def disagreements(self, sample_id: str) -> DisagreementReport:
        """Per-factor split of annotators; empty conflicts means unanimity."""
        submissions = self.submissions(sample_id)
        if len(submissions) < 2:
            raise PreconditionError(
                f"need at least 2 submissions for {sample_id!r}, have {len(submissions)}"
            )
        report = DisagreementReport(
            sample_id=sample_id,
            submissions={r.annotator_id: r.labels for r in submissions},
        )
        for position, factor in enumerate(CANONICAL_ORDER):
            positive = tuple(
                r.annotator_id for r in submissions if r.labels.flags[position]
            )
            negative = tuple(
                r.annotator_id for r in submissions if not r.labels.flags[position]
            )
            if positive and negative:
                report.conflicts[factor] = (positive, negative)
        return report

    def _is_adjudicable(self, sample_id: str) -> bool:
        annotators = {
            record.annotator_id
            for (sid, _), record in self.current.items()
            if sid == sample_id and record.status == STATUS_SUBMITTED
        }
        if len(annotators) >= 2:
            return True
        # a rejection flags the sample for adjudicator review
        return any(
            record.status == STATUS_REJECTED
            for (sid, _), record in self.current.items()
            if sid == sample_id
        )

    def adjudicate(
        self, sample_id: str, final: RiskLabelSet, adjudicator: str
    ) -> GoldRecord:
        """Write the gold label set; re-adjudication replaces, history kept."""
        if sample_id not in self.samples:
            raise UnknownAssignmentError(f"unknown sample {sample_id!r}")
        if not self._is_adjudicable(sample_id):
            raise PreconditionError(
                f"sample {sample_id!r} has neither multiple submissions nor a rejection flag"
            )
        data = {
            "sample_id": sample_id,
            "labels": final.to_mapping(),
            "adjudicated_by": adjudicator,
        }
        with self._lock:
            self._append("adjudication", data)
            self._apply("adjudication", data)
        return self.gold[sample_id]

    def _calibration_sample_ids(self) -> list[str]:
        seen = []
        for key in self._assignment_order:
            assignment = self.assignments[key]
            if assignment.batch == CALIBRATION and assignment.sample_id not in seen:
                seen.append(assignment.sample_id)
        return seen

    def agreement_stats(self) -> dict[RiskFactor, dict[str, float]]:
        """Pairwise raw agreement and mean two-rater kappa per factor, over
        calibration samples with at least two submissions."""
        eligible: list[list[AnnotationRecord]] = []
        for sample_id in self._calibration_sample_ids():
            submissions = self.submissions(sample_id)
            if len(submissions) >= 2:
                eligible.append(submissions)
        if not eligible:
            raise PreconditionError(
                "no calibration sample has two or more submissions"
            )
        pairs: dict[tuple[str, str], list[tuple[RiskLabelSet, RiskLabelSet]]] = {}
        for submissions in eligible:
            for i, first in enumerate(submissions):
                for second in submissions[i + 1 :]:
                    key = tuple(sorted((first.annotator_id, second.annotator_id)))
                    if key[0] == first.annotator_id:
                        pair = (first.labels, second.labels)
                    else:
                        pair = (second.labels, first.labels)
                    pairs.setdefault(key, []).append(pair)

        stats: dict[RiskFactor, dict[str, float]] = {}
        for position, factor in enumerate(CANONICAL_ORDER):
            agree = 0
            total = 0
            kappas = []
            for labeled_pairs in pairs.values():
                a_flags = [a.flags[position] for a, _ in labeled_pairs]
                b_flags = [b.flags[position] for _, b in labeled_pairs]
                n = len(labeled_pairs)
                matches = sum(1 for a, b in zip(a_flags, b_flags) if a == b)
                agree += matches
                total += n
                po = matches / n
                pa = sum(a_flags) / n
                pb = sum(b_flags) / n
                pe = pa * pb + (1 - pa) * (1 - pb)
                if abs(1.0 - pe) < 1e-12:
                    kappas.append(1.0 if po == 1.0 else 0.0)
                else:
                    kappas.append((po - pe) / (1 - pe))
            stats[factor] = {
                "raw_agreement": agree / total,
                "kappa": sum(kappas) / len(kappas),
            }
        return stats

    def _has_rejection(self, sample_id: str) -> bool:
        return any(
            record.status == STATUS_REJECTED
            for (sid, _), record in self.current.items()
            if sid == sample_id
        )

    def export_gold(self) -> ExportResult:
        """One line per sample with gold labels, sorted by sample_id.

        Adjudicated samples export their gold record; solo samples export
        their single submission. Calibration samples without adjudication
        and rejected samples are excluded and tallied.
        """
        result = ExportResult(records=[])
        calibration_ids = set(self._calibration_sample_ids())
        for sample_id in sorted(self.samples):
            if sample_id in self.gold:
                gold = self.gold[sample_id]
                result.records.append(
                    {
                        "sample_id": sample_id,
                        "labels": gold.labels.to_mapping(),
                        "source": "adjudicated",
                        "adjudicated_by": gold.adjudicated_by,
                    }
                )
                continue
            if self._has_rejection(sample_id):
                result.excluded_rejected += 1
                continue
            if sample_id in calibration_ids:
                result.excluded_unadjudicated += 1
                continue
            submissions = self.submissions(sample_id)
            if len(submissions) == 1:
                record = submissions[0]
                result.records.append(
                    {
                        "sample_id": sample_id,
                        "labels": record.labels.to_mapping(),
                        "source": "single-annotator",
                        "annotator_id": record.annotator_id,
                    }
                )
        return result

    def queue(self, annotator_id: str) -> list[Assignment]:
        """Pending assignments for one annotator, in assignment order."""
        pending = []
        for key in self._assignment_order:
            assignment = self.assignments[key]
            if assignment.annotator_id != annotator_id:
                continue
            record = self.current.get(key)
            if record is None or record.status == STATUS_DRAFT:
                pending.append(assignment)
        return pending


def export_lines(result: ExportResult) -> str:
    """Serialize an export deterministically as line-delimited JSON."""
    return "".join(json.dumps(record, sort_keys=True) + "\n" for record in result.records)


def import_gold(lines: Iterable[str]) -> list[tuple[str, RiskLabelSet]]:
    """Parse an exported gold file back into (sample_id, labels) pairs."""
    out = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        out.append((record["sample_id"], RiskLabelSet.from_mapping(record["labels"])))
    return out
