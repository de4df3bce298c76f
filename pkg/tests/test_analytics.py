import random
from datetime import datetime, timezone

import pytest

from newsrisk.analytics import (
    LabeledSample,
    cooccurrence,
    industry_distribution,
    label_distribution,
    risk_timeseries,
    sentiment_crosstab,
)
from newsrisk.risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet

from conftest import make_sample

MACRO = RiskFactor.MACRO
FIN = RiskFactor.FINANCE
MRKT = RiskFactor.MARKETS_AND_CONSUMERS


def labeled(sample_id, factors, sector=None, when=None):
    return LabeledSample(
        sample=make_sample(sample_id, f"text for {sample_id}"),
        labels=RiskLabelSet.from_positive(factors),
        sector=sector,
        published_at=when,
    )


def ts(year, month, day=1):
    return datetime(year, month, day, 12, 0, tzinfo=timezone.utc)


FOUR_SAMPLES = [
    labeled("a1:c1", []),
    labeled("a2:c1", [MACRO]),
    labeled("a3:c1", [MACRO, FIN]),
    labeled("a4:c1", [FIN]),
]


class TestLabelDistribution:
    def test_empty(self):
        dist = label_distribution([])
        assert dist.total == 0 and dist.no_risk == 0
        assert all(count == 0 for count in dist.per_factor.values())

    def test_hand_tally(self):
        dist = label_distribution(FOUR_SAMPLES)
        assert dist.per_factor[MACRO] == 2
        assert dist.per_factor[FIN] == 2
        assert dist.no_risk == 1
        assert dict(dist.histogram) == {0: 1, 1: 2, 2: 1}
        assert dist.at_least_one_share == pytest.approx(0.75)

    def test_histogram_sums_to_n_and_recount(self):
        rng = random.Random(3)
        samples = [
            labeled(f"a{i}:c1", [f for f in CANONICAL_ORDER if rng.random() < 0.3])
            for i in range(80)
        ]
        dist = label_distribution(samples)
        assert sum(dist.histogram.values()) == dist.total == 80
        weighted = sum(k * v for k, v in dist.histogram.items())
        assert weighted == sum(dist.per_factor.values())

    def test_merge_equals_serial(self):
        rng = random.Random(4)
        samples = [
            labeled(f"a{i}:c1", [f for f in CANONICAL_ORDER if rng.random() < 0.25])
            for i in range(50)
        ]
        serial = label_distribution(samples)
        merged = label_distribution(samples[:20]).merge(label_distribution(samples[20:]))
        assert merged == serial


class TestCooccurrence:
    def test_empty_is_zero(self):
        matrix = cooccurrence([])
        assert all(v == 0 for row in matrix.counts for v in row)

    def test_hand_counts(self):
        fixture = [
            labeled("a1:c1", [MACRO, MRKT]),
            labeled("a2:c1", [MACRO, FIN]),
            labeled("a3:c1", [MACRO, MRKT]),
        ]
        matrix = cooccurrence(fixture)
        assert matrix.entry(MACRO, MRKT) == 2
        assert matrix.entry(MACRO, FIN) == 1
        assert matrix.entry(MRKT, FIN) == 0

    def test_symmetry_and_bounds_on_random_input(self):
        rng = random.Random(8)
        samples = [
            labeled(f"a{i}:c1", [f for f in CANONICAL_ORDER if rng.random() < 0.4])
            for i in range(60)
        ]
        matrix = cooccurrence(samples)
        dist = label_distribution(samples)
        for a in CANONICAL_ORDER:
            for b in CANONICAL_ORDER:
                if a is b:
                    continue
                assert matrix.entry(a, b) == matrix.entry(b, a)
                assert matrix.entry(a, b) <= min(dist.per_factor[a], dist.per_factor[b])

    def test_diagonal_is_undefined(self):
        with pytest.raises(ValueError):
            cooccurrence([]).entry(MACRO, MACRO)

    def test_table_prints_na_diagonal(self):
        table = cooccurrence(FOUR_SAMPLES).to_table()
        assert table.count("N/A") == 7

    def test_merge_equals_serial(self):
        serial = cooccurrence(FOUR_SAMPLES)
        merged = cooccurrence(FOUR_SAMPLES[:2]).merge(cooccurrence(FOUR_SAMPLES[2:]))
        assert merged.counts == serial.counts


class TestIndustryDistribution:
    def test_single_sample_share_one(self):
        breakdown = industry_distribution([labeled("a1:c1", [MACRO], sector="Energy")])
        assert breakdown.sectors["Energy"][MACRO] == 1
        assert breakdown.shares("Energy")[MACRO] == 1.0

    def test_two_sector_hand_recount(self):
        samples = [
            labeled("a1:c1", [MACRO, FIN], sector="Energy"),
            labeled("a2:c2", [MACRO], sector="Energy"),
            labeled("a3:c3", [FIN], sector="Financials"),
            labeled("a4:c4", [], sector="Financials"),
        ]
        breakdown = industry_distribution(samples)
        assert breakdown.sectors["Energy"] == {
            f: (2 if f is MACRO else 1 if f is FIN else 0) for f in CANONICAL_ORDER
        }
        assert breakdown.sample_counts == {"Energy": 2, "Financials": 2}
        assert breakdown.shares("Energy")[MACRO] == pytest.approx(2 / 3)
        assert breakdown.shares("Financials")[FIN] == 1.0

    def test_unknown_sector_excluded_and_tallied(self):
        samples = [labeled(f"a{i}:c1", [MACRO]) for i in range(4)]
        breakdown = industry_distribution(samples)
        assert breakdown.sectors == {}
        assert breakdown.excluded == 4

    def test_merge_equals_serial(self):
        samples = [
            labeled("a1:c1", [MACRO], sector="Energy"),
            labeled("a2:c2", [FIN], sector="Financials"),
            labeled("a3:c3", [], None),
        ]
        serial = industry_distribution(samples)
        merged = industry_distribution(samples[:1]).merge(industry_distribution(samples[1:]))
        assert merged.sectors == serial.sectors
        assert merged.sample_counts == serial.sample_counts
        assert merged.excluded == serial.excluded


class TestRiskTimeseries:
    def test_two_month_hand_tally(self):
        samples = [
            labeled("a1:c1", [MACRO], when=ts(2020, 2)),
            labeled("a2:c1", [MACRO, FIN], when=ts(2020, 2, 20)),
            labeled("a3:c1", [FIN], when=ts(2020, 3)),
        ]
        series = risk_timeseries(samples, granularity="month")
        assert set(series.periods) == {"2020-02", "2020-03"}
        feb = series.periods["2020-02"]
        assert feb.article_count == 2
        assert feb.positives[MACRO] == 2 and feb.positives[FIN] == 1
        assert feb.share(MACRO) == 1.0
        assert series.periods["2020-03"].share(FIN) == 1.0

    def test_year_granularity_company_profile(self):
        samples = [
            labeled("a1:c1", [MACRO], when=ts(2019, 5)),
            labeled("a2:c1", [], when=ts(2019, 8)),
            labeled("a3:c1", [MACRO], when=ts(2020, 1)),
        ]
        series = risk_timeseries(samples, granularity="year", company_id="c1")
        assert series.periods["2019"].share(MACRO) == pytest.approx(0.5)
        assert series.periods["2020"].share(MACRO) == 1.0

    def test_filter_with_no_matches_is_empty(self):
        samples = [labeled("a1:c1", [MACRO], when=ts(2020, 1))]
        series = risk_timeseries(samples, company_id="nobody")
        assert series.periods == {}

    def test_period_counts_sum_to_totals(self):
        rng = random.Random(6)
        samples = [
            labeled(
                f"a{i}:c1",
                [f for f in CANONICAL_ORDER if rng.random() < 0.3],
                when=ts(2019 + rng.randint(0, 2), rng.randint(1, 12)),
            )
            for i in range(70)
        ]
        series = risk_timeseries(samples, granularity="month")
        dist = label_distribution(samples)
        for factor in CANONICAL_ORDER:
            total = sum(p.positives[factor] for p in series.periods.values())
            assert total == dist.per_factor[factor]
        assert sum(p.article_count for p in series.periods.values()) == 70

    def test_missing_timestamp_rejected(self):
        with pytest.raises(ValueError):
            risk_timeseries([labeled("a1:c1", [MACRO])])

    def test_merge_equals_serial(self):
        samples = [
            labeled("a1:c1", [MACRO], when=ts(2020, 1)),
            labeled("a2:c1", [FIN], when=ts(2020, 1, 15)),
            labeled("a3:c1", [MACRO], when=ts(2020, 4)),
        ]
        serial = risk_timeseries(samples)
        merged = risk_timeseries(samples[:1]).merge(risk_timeseries(samples[1:]))
        assert merged.granularity == serial.granularity
        assert set(merged.periods) == set(serial.periods)
        for period in serial.periods:
            assert merged.periods[period] == serial.periods[period]

    def test_plot_records_shape(self):
        samples = [labeled("a1:c1", [MACRO], when=ts(2020, 1))]
        records = risk_timeseries(samples).to_plot_records()
        assert len(records) == 7
        assert records[0].keys() == {
            "period", "factor", "positive_count", "article_count", "share",
        }


class FixedSentiment:
    def __init__(self, mapping=None, default=(1.0, 0.0, 0.0)):
        self.mapping = mapping or {}
        self.default = default

    def sentiment(self, text, company_name):
        return self.mapping.get(text, self.default)


class FailingSentiment:
    def sentiment(self, text, company_name):
        raise RuntimeError("provider down")


class TestSentimentCrosstab:
    def test_constant_provider(self):
        samples = [labeled("a1:c1", [MACRO]), labeled("a2:c1", [FIN, MRKT])]
        crosstab = sentiment_crosstab(samples, FixedSentiment())
        for factor in (MACRO, FIN, MRKT):
            assert crosstab.factor_mean(factor) == (1.0, 0.0, 0.0)
        assert crosstab.background_mean() == (1.0, 0.0, 0.0)

    def test_two_sample_hand_average(self):
        first = labeled("a1:c1", [MACRO])
        second = labeled("a2:c1", [])
        provider = FixedSentiment(
            {
                first.sample.truncated_text: (0.2, 0.3, 0.5),
                second.sample.truncated_text: (0.6, 0.2, 0.2),
            }
        )
        crosstab = sentiment_crosstab([first, second], provider)
        assert crosstab.factor_mean(MACRO) == pytest.approx((0.2, 0.3, 0.5))
        assert crosstab.background_mean() == pytest.approx((0.4, 0.25, 0.35))

    def test_no_positive_samples_factor_absent(self):
        crosstab = sentiment_crosstab([labeled("a1:c1", [])], FixedSentiment())
        assert crosstab.factor_mean(MACRO) is None
        assert crosstab.background_mean() is not None

    def test_provider_failure_skips_and_tallies(self):
        crosstab = sentiment_crosstab(
            [labeled("a1:c1", [MACRO]), labeled("a2:c1", [MACRO])], FailingSentiment()
        )
        assert crosstab.skipped == 2
        assert crosstab.background_count == 0

    def test_triples_sum_to_one(self):
        samples = [labeled(f"a{i}:c1", [MACRO]) for i in range(5)]
        provider = FixedSentiment(default=(0.3, 0.45, 0.25))
        crosstab = sentiment_crosstab(samples, provider)
        assert sum(crosstab.factor_mean(MACRO)) == pytest.approx(1.0, abs=1e-6)

    def test_merge_equals_serial(self):
        samples = [
            labeled("a1:c1", [MACRO]),
            labeled("a2:c1", [FIN]),
            labeled("a3:c1", []),
        ]
        provider = FixedSentiment(default=(0.5, 0.3, 0.2))
        serial = sentiment_crosstab(samples, provider)
        merged = sentiment_crosstab(samples[:2], provider).merge(
            sentiment_crosstab(samples[2:], provider)
        )
        assert merged == serial


class TestPermutationInvariance:
    def test_all_aggregations_ignore_order(self):
        rng = random.Random(12)
        samples = [
            labeled(
                f"a{i}:c{i % 3}",
                [f for f in CANONICAL_ORDER if rng.random() < 0.3],
                sector="Energy" if i % 2 else "Financials",
                when=ts(2020, 1 + i % 12),
            )
            for i in range(40)
        ]
        shuffled = samples[:]
        rng.shuffle(shuffled)
        assert label_distribution(samples) == label_distribution(shuffled)
        assert cooccurrence(samples).counts == cooccurrence(shuffled).counts
        assert industry_distribution(samples).sectors == industry_distribution(shuffled).sectors
        a = risk_timeseries(samples)
        b = risk_timeseries(shuffled)
        assert a.periods == b.periods
