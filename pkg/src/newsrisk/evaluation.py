"""Dataset splitting and multi-label scoring.

Split sizes follow largest-remainder apportionment of the fixed
484/126/106-in-716 train/validation/test ratios; membership comes from a
seeded shuffle. By default samples sharing an article stay in one split.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, TypeVar

from .risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet

#: Exact train/validation/test ratios; they sum to 1.
SPLIT_RATIOS: tuple[Fraction, Fraction, Fraction] = (
    Fraction(484, 716),
    Fraction(126, 716),
    Fraction(106, 716),
)

SampleT = TypeVar("SampleT")


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 0
    #: keep all samples of one article in one split (disable to force exact sizes
    #: even when articles contribute multiple samples)
    group_by_article: bool = True


def apportion(n: int) -> tuple[int, int, int]:
    """Largest-remainder split sizes; remainder ties favor train, then validation."""
    quotas = [ratio * n for ratio in SPLIT_RATIOS]
    floors = [int(q) for q in quotas]
    leftover = n - sum(floors)
    fractional = [q - f for q, f in zip(quotas, floors)]
    order = sorted(range(3), key=lambda i: (-fractional[i], i))
    sizes = floors[:]
    for i in order[:leftover]:
        sizes[i] += 1
    return sizes[0], sizes[1], sizes[2]


def split_dataset(
    samples: Sequence[SampleT], spec: SplitSpec = SplitSpec()
) -> tuple[list[SampleT], list[SampleT], list[SampleT]]:
    """Partition samples into (train, validation, test).

    Grouped mode shuffles whole articles and assigns each to the split with
    the largest remaining deficit (ties: train > validation > test), so
    sizes can deviate from the exact apportionment only when an article
    carries several samples.
    """
    n = len(samples)
    if n < 3:
        raise ValueError(f"need at least 3 samples to split, got {n}")
    targets = apportion(n)
    rng = random.Random(spec.seed)
    splits: tuple[list[SampleT], list[SampleT], list[SampleT]] = ([], [], [])

    if not spec.group_by_article:
        shuffled = list(samples)
        rng.shuffle(shuffled)
        a, b, _ = targets
        return shuffled[:a], shuffled[a : a + b], shuffled[a + b :]

    groups: dict[str, list[SampleT]] = {}
    for sample in samples:
        article_id = getattr(sample, "article_id", None)
        if article_id is None:
            article_id = sample.sample_id  # type: ignore[attr-defined]
        groups.setdefault(article_id, []).append(sample)
    group_list = list(groups.values())
    rng.shuffle(group_list)
    for group in group_list:
        deficits = [targets[i] - len(splits[i]) for i in range(3)]
        destination = max(range(3), key=lambda i: (deficits[i], -i))
        splits[destination].extend(group)
    return splits


@dataclass(frozen=True)
class FactorScore:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float

    @property
    def support(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvalReport:
    per_factor: dict[RiskFactor, FactorScore]
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    n_samples: int
    unparseable_count: Optional[int] = None

    def to_table(self) -> str:
        """Human-readable table plus a summary line."""
        header = f"{'factor':<26} {'TP':>5} {'FP':>5} {'FN':>5} {'TN':>5} {'P':>7} {'R':>7} {'F1':>7}"
        rows = [header]
        for factor in CANONICAL_ORDER:
            s = self.per_factor[factor]
            rows.append(
                f"{factor.value:<26} {s.tp:>5} {s.fp:>5} {s.fn:>5} {s.tn:>5}"
                f" {s.precision:>7.4f} {s.recall:>7.4f} {s.f1:>7.4f}"
            )
        summary = (
            f"n={self.n_samples} macro_f1={self.macro_f1:.4f}"
            f" micro_p={self.micro_precision:.4f} micro_r={self.micro_recall:.4f}"
            f" micro_f1={self.micro_f1:.4f}"
        )
        if self.unparseable_count is not None:
            summary += f" unparseable={self.unparseable_count}"
        rows.append(summary)
        return "\n".join(rows)

    def to_records(self) -> list[dict]:
        records = []
        for factor in CANONICAL_ORDER:
            s = self.per_factor[factor]
            records.append(
                {
                    "factor": factor.value,
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                    "tn": s.tn,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
            )
        summary = {
            "summary": True,
            "n_samples": self.n_samples,
            "macro_f1": self.macro_f1,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
        }
        if self.unparseable_count is not None:
            summary["unparseable_count"] = self.unparseable_count
        records.append(summary)
        return records


def _safe_div(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def score(
    predictions: Sequence[RiskLabelSet],
    gold: Sequence[RiskLabelSet],
    unparseable_count: Optional[int] = None,
) -> EvalReport:
    """Per-factor precision/recall/F1 with the 0/0 -> 0 convention, plus
    macro (unweighted mean) and micro (pooled counts) aggregates."""
    if len(predictions) != len(gold):
        raise ValueError(
            f"predictions ({len(predictions)}) and gold ({len(gold)}) must align"
        )
    per_factor: dict[RiskFactor, FactorScore] = {}
    pooled_tp = pooled_fp = pooled_fn = 0
    f1_sum = 0.0
    for position, factor in enumerate(CANONICAL_ORDER):
        tp = fp = fn = tn = 0
        for predicted, actual in zip(predictions, gold):
            p, g = predicted.flags[position], actual.flags[position]
            if p and g:
                tp += 1
            elif p and not g:
                fp += 1
            elif not p and g:
                fn += 1
            else:
                tn += 1
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_factor[factor] = FactorScore(tp, fp, fn, tn, precision, recall, f1)
        pooled_tp += tp
        pooled_fp += fp
        pooled_fn += fn
        f1_sum += f1
    micro_precision = _safe_div(pooled_tp, pooled_tp + pooled_fp)
    micro_recall = _safe_div(pooled_tp, pooled_tp + pooled_fn)
    micro_f1 = _safe_div(2 * micro_precision * micro_recall, micro_precision + micro_recall)
    return EvalReport(
        per_factor=per_factor,
        macro_f1=f1_sum / len(CANONICAL_ORDER),
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=micro_f1,
        n_samples=len(predictions),
        unparseable_count=unparseable_count,
    )
