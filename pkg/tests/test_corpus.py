import json

import pytest
from hypothesis import given, strategies as st

from newsrisk.corpus import (
    Company,
    NewsArticle,
    ParseError,
    Sample,
    SectorMap,
    build_samples,
    extract_mentions,
    load_corpus,
    load_gazetteer,
    article_to_record,
    parse_article,
    split_sentences,
    tokenize,
    truncate,
)

from conftest import make_article


class TestParseArticle:
    def test_body_is_segmented(self):
        line = json.dumps(
            {
                "article_id": "a1",
                "published_at": "2020-01-01T00:00:00Z",
                "headline": "A.",
                "body": "B. C.",
            }
        )
        article = parse_article(line)
        assert article.headline == "A."
        assert article.body_sentences == ("B.", "C.")

    def test_missing_headline_rejected(self):
        line = json.dumps({"article_id": "a1", "published_at": "2020-01-01T00:00:00Z"})
        with pytest.raises(ParseError):
            parse_article(line)

    def test_malformed_json_carries_line_number(self):
        with pytest.raises(ParseError) as exc_info:
            parse_article("{not json", line_number=17)
        assert exc_info.value.line_number == 17
        assert "line 17" in str(exc_info.value)

    def test_sentences_array_wins_over_body(self):
        line = json.dumps(
            {
                "article_id": "a1",
                "published_at": "2020-01-01T00:00:00Z",
                "headline": "H",
                "sentences": ["One.", "Two."],
                "body": "ignored",
            }
        )
        assert parse_article(line).body_sentences == ("One.", "Two.")

    def test_write_then_parse_round_trip(self):
        articles = [
            make_article("a1", "First Cut Looms", ("One.", "Two."), "2018-02-01T08:00:00+00:00"),
            make_article("a2", "Second Slump", ("Only one.",), "2018-06-15T09:30:00+00:00"),
            make_article("a3", "Third Strike", (), "2018-12-31T23:59:00+00:00"),
        ]
        lines = [json.dumps(article_to_record(a)) for a in articles]
        corpus = load_corpus(lines)
        assert [a.article_id for a in corpus.articles] == ["a1", "a2", "a3"]
        assert corpus.articles == articles

    def test_duplicate_article_id_rejected(self):
        record = article_to_record(make_article("dup"))
        with pytest.raises(ParseError):
            load_corpus([json.dumps(record), json.dumps(record)])


class TestSplitSentences:
    def test_empty(self):
        assert split_sentences("") == []

    def test_two_sentences(self):
        assert split_sentences("Profits fell. Shares dropped!") == [
            "Profits fell.",
            "Shares dropped!",
        ]

    def test_decimal_point_is_not_a_terminator(self):
        out = split_sentences("Revenue hit $3.5 billion. Guidance cut.")
        assert out == ["Revenue hit $3.5 billion.", "Guidance cut."]

    def test_abbreviations_do_not_split(self):
        out = split_sentences("Acme Inc. cut jobs in the U.S. market. Output fell.")
        assert out == ["Acme Inc. cut jobs in the U.S. market.", "Output fell."]

    def test_lowercase_continuation_does_not_split(self):
        assert split_sentences("It rose 5 pct. on Monday. Then it fell.") == [
            "It rose 5 pct. on Monday.",
            "Then it fell.",
        ]

    def test_single_initials_do_split(self):
        assert split_sentences("B. C.") == ["B.", "C."]

    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200))
    def test_no_nonwhitespace_characters_lost(self, text):
        joined = " ".join(split_sentences(text))
        kept = [ch for ch in joined if not ch.isspace()]
        expected = [ch for ch in text if not ch.isspace()]
        assert kept == expected


class TestTruncate:
    def test_surplus_body_keeps_five(self):
        article = make_article(sentences=tuple(f"S{i}." for i in range(8)))
        expected = " ".join([article.headline, "S0.", "S1.", "S2.", "S3.", "S4."])
        assert truncate(article) == expected

    def test_short_body_keeps_all(self):
        article = make_article(sentences=("S0.", "S1.", "S2."))
        assert truncate(article) == f"{article.headline} S0. S1. S2."

    def test_empty_body_is_headline_only(self):
        article = make_article(sentences=())
        assert truncate(article) == article.headline

    def test_idempotent_on_truncated_reconstruction(self):
        article = make_article(sentences=tuple(f"S{i}." for i in range(8)))
        truncated = NewsArticle(
            article_id=article.article_id,
            published_at=article.published_at,
            headline=article.headline,
            body_sentences=article.body_sentences[:5],
        )
        assert truncate(truncated) == truncate(article)


class TestTokenize:
    def test_percent_sign_and_case(self):
        assert tokenize("Cut Staff by 10%") == ["cut", "staff", "by", "10"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphen_separates(self):
        assert tokenize("cash-flow") == ["cash", "flow"]

    @given(st.text(max_size=120))
    def test_case_invariance_and_no_empty_tokens(self, text):
        tokens = tokenize(text)
        assert tokens == tokenize(text.lower())
        assert all(tokens)


class TestArticleInvariants:
    def test_empty_body_sentence_rejected(self):
        with pytest.raises(ValueError):
            make_article(sentences=("ok", ""))

    def test_token_count_mismatch_rejected(self):
        article = make_article()
        with pytest.raises(ValueError):
            NewsArticle(
                article_id="x",
                published_at=article.published_at,
                headline="Two words",
                body_sentences=(),
                raw_token_count=99,
            )

    def test_token_count_computed(self):
        article = make_article(headline="Two words", sentences=("Three more words.",))
        assert article.raw_token_count == 5


GAZETTEER = [
    Company("huawei", "Huawei", listing="private", sector="Technology"),
    Company("hilton", "Hilton", sector="Consumer Discretionary"),
    Company("hyatt", "Hyatt", sector="Consumer Discretionary"),
]


class TestExtractMentions:
    def test_single_mention(self):
        article = make_article(headline="Huawei faces curbs", sentences=())
        mentions = extract_mentions(article, GAZETTEER)
        assert [m.company_id for m in mentions] == ["huawei"]
        assert mentions[0].surface_form == "Huawei"

    def test_two_companies_one_headline(self):
        article = make_article(
            headline="Hong Kong Protests Cut Demand for Hilton, Hyatt Hotel Rooms",
            sentences=(),
        )
        mentions = extract_mentions(article, GAZETTEER)
        assert sorted(m.company_id for m in mentions) == ["hilton", "hyatt"]

    def test_longest_alias_wins(self):
        gazetteer = [
            Company("gm", "General Motors", aliases=("General Motors", "General"))
        ]
        article = make_article(headline="General Motors fell", sentences=())
        mentions = extract_mentions(article, gazetteer)
        assert len(mentions) == 1
        assert mentions[0].surface_form == "General Motors"

    def test_case_insensitive_token_boundary(self):
        gazetteer = [Company("acme", "ACME")]
        inside_word = make_article(headline="MACMEN rally", sentences=())
        assert extract_mentions(inside_word, gazetteer) == []
        lowercase = make_article(headline="acme shares slump", sentences=())
        assert len(extract_mentions(lowercase, gazetteer)) == 1

    def test_spans_do_not_overlap(self):
        gazetteer = [
            Company("a", "General Motors"),
            Company("b", "Motors", aliases=("Motors",)),
        ]
        article = make_article(headline="General Motors fell", sentences=())
        mentions = extract_mentions(article, gazetteer)
        spans = [m.span for m in mentions]
        for i, first in enumerate(spans):
            for second in spans[i + 1 :]:
                assert first[1] <= second[0] or second[1] <= first[0]

    def test_mentions_limited_to_truncated_text(self):
        gazetteer = [Company("late", "Latecorp")]
        article = make_article(
            headline="No mention here",
            sentences=tuple(["Filler."] * 5 + ["Latecorp appears too late."]),
        )
        assert extract_mentions(article, gazetteer) == []

    def test_empty_gazetteer(self):
        assert extract_mentions(make_article(), []) == []


class TestCorpusAndSamples:
    def test_supplied_mentions_win(self):
        record = article_to_record(make_article(headline="Huawei and Hilton slump"))
        record["mentions"] = [{"company_id": "huawei", "surface_form": "Huawei"}]
        corpus = load_corpus([json.dumps(record)])
        mentions = corpus.mentions_for(corpus.articles[0], GAZETTEER)
        assert [m.company_id for m in mentions] == ["huawei"]

    def test_supplied_mention_must_occur_in_text(self):
        record = article_to_record(make_article(headline="Nothing here"))
        record["mentions"] = [{"company_id": "x", "surface_form": "Ghost"}]
        with pytest.raises(ParseError):
            load_corpus([json.dumps(record)])

    def test_build_samples_unique_per_pair(self):
        record = article_to_record(
            make_article(headline="Hilton, Hyatt Hotel Rooms Cut")
        )
        corpus = load_corpus([json.dumps(record)])
        samples = build_samples(corpus, GAZETTEER)
        assert sorted(s.sample_id for s in samples) == ["a1:hilton", "a1:hyatt"]
        assert all(s.truncated_text == truncate(corpus.articles[0]) for s in samples)

    def test_sample_id_format(self):
        assert Sample.make_id("art9", "c3") == "art9:c3"


class TestGazetteerAndSectors:
    def test_load_gazetteer(self):
        lines = [
            json.dumps(
                {
                    "company_id": "acme",
                    "name": "Acme",
                    "aliases": ["Acme", "Acme Corp"],
                    "listing": "public",
                    "sector": "Industrials",
                }
            )
        ]
        companies = load_gazetteer(lines)
        assert companies[0].aliases == ("Acme", "Acme Corp")

    def test_unknown_sector_rejected(self):
        with pytest.raises(ParseError):
            load_gazetteer(
                [json.dumps({"company_id": "x", "name": "X", "sector": "Aerospace"})]
            )

    def test_sector_map_from_companies(self):
        sectors = SectorMap.from_companies(GAZETTEER)
        assert sectors.get("huawei") == "Technology"
        assert sectors.get("missing") is None

    def test_sector_map_rejects_unknown(self):
        with pytest.raises(ValueError):
            SectorMap({"x": "Nonsense"})
