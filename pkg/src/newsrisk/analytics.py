"""Aggregate labeled samples into distributions, co-occurrence, time series
and sentiment cross-tabs.

Every aggregation folds over samples with an associative, commutative
accumulator, so partitioning the input, aggregating the parts and merging
gives exactly the serial result.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional, Protocol, Sequence

from .corpus import SECTOR_NAMES, Sample
from .risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet


@dataclass(frozen=True)
class LabeledSample:
    """A sample with its labels plus the metadata the aggregations need."""

    sample: Sample
    labels: RiskLabelSet
    sector: Optional[str] = None
    published_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        if self.sector is not None and self.sector not in SECTOR_NAMES:
            raise ValueError(f"unknown sector {self.sector!r}")
        if self.published_at is not None and self.published_at.tzinfo is None:
            object.__setattr__(
                self, "published_at", self.published_at.replace(tzinfo=timezone.utc)
            )


@dataclass
class LabelDistribution:
    per_factor: dict[RiskFactor, int] = field(
        default_factory=lambda: {f: 0 for f in CANONICAL_ORDER}
    )
    no_risk: int = 0
    histogram: Counter = field(default_factory=Counter)
    total: int = 0

    @property
    def at_least_one_share(self) -> float:
        return (self.total - self.no_risk) / self.total if self.total else 0.0

    def merge(self, other: "LabelDistribution") -> "LabelDistribution":
        merged = LabelDistribution(
            per_factor={f: self.per_factor[f] + other.per_factor[f] for f in CANONICAL_ORDER},
            no_risk=self.no_risk + other.no_risk,
            histogram=self.histogram + other.histogram,
            total=self.total + other.total,
        )
        return merged


def label_distribution(samples: Iterable[LabeledSample]) -> LabelDistribution:
    """Per-factor counts, the no-risk count, and a positives-per-sample histogram."""
    dist = LabelDistribution()
    for item in samples:
        dist.total += 1
        positives = 0
        for factor, flag in zip(CANONICAL_ORDER, item.labels.flags):
            if flag:
                dist.per_factor[factor] += 1
                positives += 1
        dist.histogram[positives] += 1
        if positives == 0:
            dist.no_risk += 1
    return dist


@dataclass
class CooccurrenceMatrix:
    """Symmetric 7x7 pair counts; the diagonal is undefined and reported N/A."""

    counts: list[list[int]] = field(
        default_factory=lambda: [[0] * 7 for _ in range(7)]
    )

    def entry(self, a: RiskFactor, b: RiskFactor) -> int:
        if a is b:
            raise ValueError("the diagonal of the co-occurrence matrix is undefined")
        i, j = CANONICAL_ORDER.index(a), CANONICAL_ORDER.index(b)
        return self.counts[i][j]

    def merge(self, other: "CooccurrenceMatrix") -> "CooccurrenceMatrix":
        merged = CooccurrenceMatrix()
        for i in range(7):
            for j in range(7):
                merged.counts[i][j] = self.counts[i][j] + other.counts[i][j]
        return merged

    def to_table(self) -> str:
        codes = [f.short_code for f in CANONICAL_ORDER]
        rows = ["\t".join(["", *codes])]
        for i, factor in enumerate(CANONICAL_ORDER):
            cells = [
                "N/A" if i == j else str(self.counts[i][j]) for j in range(7)
            ]
            rows.append("\t".join([factor.short_code, *cells]))
        return "\n".join(rows)


def cooccurrence(samples: Iterable[LabeledSample]) -> CooccurrenceMatrix:
    """entry(a, b) = number of samples positive for both a and b, a != b."""
    matrix = CooccurrenceMatrix()
    for item in samples:
        on = [i for i, flag in enumerate(item.labels.flags) if flag]
        for pos, i in enumerate(on):
            for j in on[pos + 1 :]:
                matrix.counts[i][j] += 1
                matrix.counts[j][i] += 1
    return matrix


@dataclass
class SectorBreakdown:
    """Per-sector factor counts with shares normalized within each sector."""

    sectors: dict[str, dict[RiskFactor, int]] = field(default_factory=dict)
    sample_counts: dict[str, int] = field(default_factory=dict)
    excluded: int = 0

    def shares(self, sector: str) -> dict[RiskFactor, float]:
        counts = self.sectors[sector]
        total = sum(counts.values())
        return {f: (counts[f] / total if total else 0.0) for f in CANONICAL_ORDER}

    def merge(self, other: "SectorBreakdown") -> "SectorBreakdown":
        merged = SectorBreakdown(excluded=self.excluded + other.excluded)
        for source in (self, other):
            for sector, counts in source.sectors.items():
                bucket = merged.sectors.setdefault(sector, {f: 0 for f in CANONICAL_ORDER})
                for factor, count in counts.items():
                    bucket[factor] += count
                merged.sample_counts[sector] = (
                    merged.sample_counts.get(sector, 0) + source.sample_counts[sector]
                )
        return merged


def industry_distribution(samples: Iterable[LabeledSample]) -> SectorBreakdown:
    """Factor counts per sector; samples without a sector are tallied and skipped."""
    breakdown = SectorBreakdown()
    for item in samples:
        if item.sector is None:
            breakdown.excluded += 1
            continue
        bucket = breakdown.sectors.setdefault(
            item.sector, {f: 0 for f in CANONICAL_ORDER}
        )
        breakdown.sample_counts[item.sector] = breakdown.sample_counts.get(item.sector, 0) + 1
        for factor, flag in zip(CANONICAL_ORDER, item.labels.flags):
            if flag:
                bucket[factor] += 1
    return breakdown


def _period_key(ts: datetime, granularity: str) -> str:
    ts = ts.astimezone(timezone.utc)
    if granularity == "month":
        return f"{ts.year:04d}-{ts.month:02d}"
    return f"{ts.year:04d}"


@dataclass
class PeriodCounts:
    article_count: int = 0
    positives: dict[RiskFactor, int] = field(
        default_factory=lambda: {f: 0 for f in CANONICAL_ORDER}
    )

    def share(self, factor: RiskFactor) -> float:
        return self.positives[factor] / self.article_count if self.article_count else 0.0


@dataclass
class RiskTimeSeries:
    granularity: str
    periods: dict[str, PeriodCounts] = field(default_factory=dict)

    def merge(self, other: "RiskTimeSeries") -> "RiskTimeSeries":
        if self.granularity != other.granularity:
            raise ValueError("cannot merge series of different granularities")
        merged = RiskTimeSeries(granularity=self.granularity)
        for source in (self, other):
            for period, counts in source.periods.items():
                bucket = merged.periods.setdefault(period, PeriodCounts())
                bucket.article_count += counts.article_count
                for factor, count in counts.positives.items():
                    bucket.positives[factor] += count
        return merged

    def to_plot_records(self) -> list[dict]:
        """Flat (period, factor, count, share) rows for any plotting tool."""
        records = []
        for period in sorted(self.periods):
            counts = self.periods[period]
            for factor in CANONICAL_ORDER:
                records.append(
                    {
                        "period": period,
                        "factor": factor.value,
                        "positive_count": counts.positives[factor],
                        "article_count": counts.article_count,
                        "share": counts.share(factor),
                    }
                )
        return records


def risk_timeseries(
    samples: Iterable[LabeledSample],
    granularity: str = "month",
    company_id: Optional[str] = None,
    sector: Optional[str] = None,
) -> RiskTimeSeries:
    """Per-factor positive counts and shares per UTC calendar period."""
    if granularity not in ("month", "year"):
        raise ValueError(f"granularity must be month or year, got {granularity!r}")
    series = RiskTimeSeries(granularity=granularity)
    for item in samples:
        if item.published_at is None:
            raise ValueError(f"sample {item.sample.sample_id} has no timestamp")
        if company_id is not None and item.sample.company_id != company_id:
            continue
        if sector is not None and item.sector != sector:
            continue
        period = _period_key(item.published_at, granularity)
        bucket = series.periods.setdefault(period, PeriodCounts())
        bucket.article_count += 1
        for factor, flag in zip(CANONICAL_ORDER, item.labels.flags):
            if flag:
                bucket.positives[factor] += 1
    return series


class SentimentProvider(Protocol):
    def sentiment(self, text: str, company_name: str) -> tuple[float, float, float]: ...


@dataclass
class SentimentCrosstab:
    """Mean (positive, neutral, negative) triples for risk-tagged samples.

    Sums and counts are kept so partitions merge exactly; means are derived.
    """

    factor_sums: dict[RiskFactor, list[float]] = field(
        default_factory=lambda: {f: [0.0, 0.0, 0.0] for f in CANONICAL_ORDER}
    )
    factor_counts: dict[RiskFactor, int] = field(
        default_factory=lambda: {f: 0 for f in CANONICAL_ORDER}
    )
    background_sum: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    background_count: int = 0
    skipped: int = 0

    def factor_mean(self, factor: RiskFactor) -> Optional[tuple[float, float, float]]:
        count = self.factor_counts[factor]
        if count == 0:
            return None
        sums = self.factor_sums[factor]
        return sums[0] / count, sums[1] / count, sums[2] / count

    def background_mean(self) -> Optional[tuple[float, float, float]]:
        if self.background_count == 0:
            return None
        s = self.background_sum
        n = self.background_count
        return s[0] / n, s[1] / n, s[2] / n

    def merge(self, other: "SentimentCrosstab") -> "SentimentCrosstab":
        merged = SentimentCrosstab(skipped=self.skipped + other.skipped)
        for factor in CANONICAL_ORDER:
            merged.factor_sums[factor] = [
                a + b for a, b in zip(self.factor_sums[factor], other.factor_sums[factor])
            ]
            merged.factor_counts[factor] = (
                self.factor_counts[factor] + other.factor_counts[factor]
            )
        merged.background_sum = [
            a + b for a, b in zip(self.background_sum, other.background_sum)
        ]
        merged.background_count = self.background_count + other.background_count
        return merged


def sentiment_crosstab(
    samples: Sequence[LabeledSample], provider: SentimentProvider
) -> SentimentCrosstab:
    """Mean sentiment per positive factor plus the all-sample background.

    Samples whose provider call fails are skipped and tallied.
    """
    crosstab = SentimentCrosstab()
    for item in samples:
        try:
            triple = provider.sentiment(item.sample.truncated_text, item.sample.company_name)
        except (RuntimeError, ValueError):
            crosstab.skipped += 1
            continue
        crosstab.background_sum = [a + b for a, b in zip(crosstab.background_sum, triple)]
        crosstab.background_count += 1
        for factor, flag in zip(CANONICAL_ORDER, item.labels.flags):
            if flag:
                sums = crosstab.factor_sums[factor]
                crosstab.factor_sums[factor] = [a + b for a, b in zip(sums, triple)]
                crosstab.factor_counts[factor] += 1
    return crosstab
