"""Dataset file formats and reproducibility headers.

Every artifact the CLI writes starts with a header recording the tool
version, the hash of the run configuration, and digests of the input files,
so any output can be traced back to exactly what produced it. Headers carry
no timestamps: identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .analytics import LabeledSample
from .corpus import Sample, parse_timestamp
from .risks import RiskLabelSet

HEADER_KEY = "_header"


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def make_header(config: dict, inputs: Iterable[str | Path] = ()) -> dict:
    return {
        "tool": "newsrisk",
        "version": __version__,
        "config": config,
        "config_hash": config_hash(config),
        "inputs": {str(Path(p).name): file_digest(p) for p in inputs},
    }


def write_jsonl(path, records: Iterable[dict], header: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(json.dumps({HEADER_KEY: header}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path) -> tuple[Optional[dict], list[dict]]:
    """Read records, returning (header, records); the header line is optional."""
    header = None
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if index == 0 and isinstance(record, dict) and HEADER_KEY in record:
                header = record[HEADER_KEY]
                continue
            records.append(record)
    return header, records


def write_text_artifact(path, text: str, header: Optional[dict] = None) -> None:
    """Tabular text file with '#'-prefixed header lines."""
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


# -- sample and label records -------------------------------------------------


def sample_to_record(
    sample: Sample,
    published_at: Optional[str] = None,
    sector: Optional[str] = None,
) -> dict:
    record = {
        "sample_id": sample.sample_id,
        "article_id": sample.article_id,
        "company_id": sample.company_id,
        "company_name": sample.company_name,
        "truncated_text": sample.truncated_text,
    }
    if published_at is not None:
        record["published_at"] = published_at
    if sector is not None:
        record["sector"] = sector
    return record


def sample_from_record(record: dict) -> Sample:
    return Sample(
        sample_id=record["sample_id"],
        article_id=record["article_id"],
        company_id=record["company_id"],
        truncated_text=record["truncated_text"],
        company_name=record.get("company_name", ""),
    )


def labels_to_record(sample_id: str, labels: RiskLabelSet) -> dict:
    return {"sample_id": sample_id, "labels": labels.to_mapping()}


def read_samples(path) -> tuple[list[Sample], dict[str, dict]]:
    """Samples plus the raw records keyed by id (for published_at/sector)."""
    _, records = read_jsonl(path)
    samples = [sample_from_record(r) for r in records]
    return samples, {r["sample_id"]: r for r in records}


def read_labels(path) -> dict[str, RiskLabelSet]:
    _, records = read_jsonl(path)
    return {r["sample_id"]: RiskLabelSet.from_mapping(r["labels"]) for r in records}


def labeled_samples(
    samples: list[Sample],
    raw_records: dict[str, dict],
    labels: dict[str, RiskLabelSet],
) -> list[LabeledSample]:
    """Join samples with labels; samples without labels are dropped."""
    out = []
    for sample in samples:
        if sample.sample_id not in labels:
            continue
        record = raw_records.get(sample.sample_id, {})
        published = record.get("published_at")
        out.append(
            LabeledSample(
                sample=sample,
                labels=labels[sample.sample_id],
                sector=record.get("sector"),
                published_at=parse_timestamp(published) if published else None,
            )
        )
    return out
