"""News corpus model: articles, companies, samples, and text preprocessing.

Articles arrive as line-delimited JSON records. Each record carries either a
pre-split ``sentences`` array or a raw ``body`` string, which is segmented
here. Downstream work always operates on the truncated view of an article:
its headline plus at most the first five body sentences.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

#: The 12 industry sector names; anything else maps to UNKNOWN_SECTOR.
SECTOR_NAMES: frozenset[str] = frozenset({
    "Health Care",
    "Financials",
    "Technology",
    "Energy",
    "Consumer Discretionary",
    "Utilities",
    "Communications",
    "Real Estate",
    "Consumer Staples",
    "Industrials",
    "Materials",
    "Government",
})

UNKNOWN_SECTOR = "unknown"

BODY_SENTENCE_LIMIT = 5

_TOKEN_RE = re.compile(r"[^\W_]+")

# Trailing-period abbreviations that never end a sentence. Single initials
# ("B.") are deliberately absent: they do split.
_ABBREVIATIONS = frozenset({
    "inc", "co", "corp", "ltd", "mr", "mrs", "ms", "dr", "st", "no",
    "u.s", "u.k", "u.n", "e.g", "i.e", "vs", "jr", "sr",
})


class ParseError(ValueError):
    """A malformed corpus or gazetteer record."""

    def __init__(self, message: str, line_number: int = 0):
        self.line_number = line_number
        if line_number:
            message = f"line {line_number}: {message}"
        super().__init__(message)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens as maximal runs of letters/digits.

    Hyphens, underscores and all other punctuation separate tokens.
    """
    return _TOKEN_RE.findall(text.lower())


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _is_abbreviation(text: str, period_index: int) -> bool:
    start = period_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:period_index]
    while word and not word[0].isalnum():
        word = word[1:]
    return word.lower() in _ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    """Segment text into sentences with a deterministic terminator rule.

    A run of ``. ! ?`` ends a sentence when followed by whitespace plus an
    uppercase letter, or by end of text. A period between two digits never
    terminates, and a known abbreviation ("Inc.", "U.S.", ...) suppresses
    the split. Whitespace inside sentences is collapsed to single spaces,
    so no non-whitespace character is ever lost.
    """
    sentences: list[str] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch not in ".!?":
            i += 1
            continue
        if ch == "." and 0 < i < n - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
            i += 1
            continue
        j = i + 1
        while j < n and text[j] in ".!?":
            j += 1
        if ch == "." and j - i == 1 and _is_abbreviation(text, i):
            i = j
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k == n or (k > j and text[k].isupper()):
            sentence = _collapse(text[start:j])
            if sentence:
                sentences.append(sentence)
            start = k
            i = k
        else:
            i = j
    tail = _collapse(text[start:])
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class NewsArticle:
    """One news item; body sentences are already segmented."""

    article_id: str
    published_at: datetime
    headline: str
    body_sentences: tuple[str, ...]
    raw_token_count: int = -1

    def __post_init__(self) -> None:
        if not self.article_id:
            raise ValueError("article_id must be non-empty")
        if not self.headline:
            raise ValueError("headline must be non-empty")
        object.__setattr__(self, "body_sentences", tuple(self.body_sentences))
        if any(not s for s in self.body_sentences):
            raise ValueError("body_sentences must not contain empty strings")
        if self.published_at.tzinfo is None:
            object.__setattr__(
                self, "published_at", self.published_at.replace(tzinfo=timezone.utc)
            )
        else:
            object.__setattr__(
                self, "published_at", self.published_at.astimezone(timezone.utc)
            )
        expected = len(tokenize(" ".join((self.headline, *self.body_sentences))))
        if self.raw_token_count < 0:
            object.__setattr__(self, "raw_token_count", expected)
        elif self.raw_token_count != expected:
            raise ValueError(
                f"raw_token_count {self.raw_token_count} != tokenized length {expected}"
            )


@dataclass(frozen=True)
class Company:
    """Gazetteer entry; aliases drive mention extraction."""

    company_id: str
    name: str
    listing: str = "public"
    sector: str = UNKNOWN_SECTOR
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.company_id:
            raise ValueError("company_id must be non-empty")
        if self.listing not in ("public", "private"):
            raise ValueError(f"listing must be public or private, got {self.listing!r}")
        if self.sector != UNKNOWN_SECTOR and self.sector not in SECTOR_NAMES:
            raise ValueError(f"unknown sector {self.sector!r}")
        if not self.aliases:
            object.__setattr__(self, "aliases", (self.name,))
        else:
            object.__setattr__(self, "aliases", tuple(self.aliases))
        if any(not a for a in self.aliases):
            raise ValueError("aliases must be non-empty strings")


@dataclass(frozen=True)
class CompanyMention:
    """A company surfacing in an article's truncated text."""

    article_id: str
    company_id: str
    surface_form: str
    span: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class Sample:
    """One (article, target company) pair — the unit of labeling and prediction."""

    sample_id: str
    article_id: str
    company_id: str
    truncated_text: str
    company_name: str = ""

    @staticmethod
    def make_id(article_id: str, company_id: str) -> str:
        return f"{article_id}:{company_id}"


class SectorMap:
    """company_id -> sector name, restricted to the 12-sector set."""

    def __init__(self, mapping: Optional[dict[str, str]] = None):
        self._mapping: dict[str, str] = {}
        for company_id, sector in (mapping or {}).items():
            self.assign(company_id, sector)

    def assign(self, company_id: str, sector: str) -> None:
        if sector not in SECTOR_NAMES:
            raise ValueError(f"unknown sector {sector!r}")
        self._mapping[company_id] = sector

    def get(self, company_id: str) -> Optional[str]:
        return self._mapping.get(company_id)

    @classmethod
    def from_companies(cls, companies: Iterable[Company]) -> "SectorMap":
        mapping = {
            c.company_id: c.sector for c in companies if c.sector != UNKNOWN_SECTOR
        }
        return cls(mapping)


def truncate(article: NewsArticle) -> str:
    """Headline plus up to the first five body sentences, space-joined."""
    parts = [article.headline, *article.body_sentences[:BODY_SENTENCE_LIMIT]]
    return " ".join(parts)


def parse_timestamp(value: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError, TypeError) as exc:
        raise ValueError(f"invalid ISO-8601 timestamp: {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _article_from_record(record: dict, line_number: int = 0) -> NewsArticle:
    for required in ("article_id", "published_at", "headline"):
        if required not in record or record[required] in (None, ""):
            raise ParseError(f"missing field {required!r}", line_number)
    if "sentences" in record and record["sentences"] is not None:
        sentences = record["sentences"]
        if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
            raise ParseError("sentences must be an array of strings", line_number)
        body = tuple(s for s in (_collapse(s) for s in sentences) if s)
    else:
        body = tuple(split_sentences(str(record.get("body", ""))))
    try:
        return NewsArticle(
            article_id=str(record["article_id"]),
            published_at=parse_timestamp(record["published_at"]),
            headline=_collapse(str(record["headline"])),
            body_sentences=body,
        )
    except ValueError as exc:
        raise ParseError(str(exc), line_number) from exc


def parse_article(line: str, line_number: int = 0) -> NewsArticle:
    """Parse one line-delimited corpus record into a NewsArticle."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line_number) from exc
    if not isinstance(record, dict):
        raise ParseError("record must be a JSON object", line_number)
    return _article_from_record(record, line_number)


def _supplied_mentions(
    record: dict, article: NewsArticle, line_number: int = 0
) -> Optional[list[CompanyMention]]:
    raw = record.get("mentions")
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ParseError("mentions must be an array", line_number)
    text_lower = truncate(article).lower()
    mentions = []
    for item in raw:
        if not isinstance(item, dict) or "company_id" not in item:
            raise ParseError("mention needs a company_id", line_number)
        surface = str(item.get("surface_form") or "")
        if surface and surface.lower() not in text_lower:
            raise ParseError(
                f"mention surface form {surface!r} not found in truncated text",
                line_number,
            )
        mentions.append(
            CompanyMention(
                article_id=article.article_id,
                company_id=str(item["company_id"]),
                surface_form=surface,
            )
        )
    return mentions


def extract_mentions(
    article: NewsArticle, gazetteer: Sequence[Company]
) -> list[CompanyMention]:
    """Find gazetteer companies in the truncated text.

    Matching is case-insensitive on token boundaries; longer aliases win and
    each text span is claimed by at most one company, one mention per company.
    """
    text = truncate(article)
    alias_pairs: list[tuple[str, Company]] = []
    for company in gazetteer:
        if not company.aliases:
            raise ValueError(f"company {company.company_id} has no aliases")
        for alias in company.aliases:
            alias_pairs.append((alias, company))
    alias_pairs.sort(key=lambda p: (-len(p[0]), p[0].lower(), p[1].company_id))

    claimed: list[tuple[int, int]] = []
    found: dict[str, CompanyMention] = {}
    for alias, company in alias_pairs:
        if company.company_id in found:
            continue
        pattern = re.compile(
            r"(?<![0-9A-Za-z])" + re.escape(alias) + r"(?![0-9A-Za-z])",
            re.IGNORECASE,
        )
        for match in pattern.finditer(text):
            span = match.span()
            if any(span[0] < end and start < span[1] for start, end in claimed):
                continue
            claimed.append(span)
            found[company.company_id] = CompanyMention(
                article_id=article.article_id,
                company_id=company.company_id,
                surface_form=match.group(0),
                span=span,
            )
            break
    return sorted(found.values(), key=lambda m: m.span)


@dataclass
class Corpus:
    """Parsed articles plus any input-supplied mentions."""

    articles: list[NewsArticle] = field(default_factory=list)
    supplied_mentions: dict[str, list[CompanyMention]] = field(default_factory=dict)

    def mentions_for(
        self, article: NewsArticle, gazetteer: Sequence[Company]
    ) -> list[CompanyMention]:
        """Input-supplied mentions win over gazetteer extraction."""
        supplied = self.supplied_mentions.get(article.article_id)
        if supplied is not None:
            return supplied
        return extract_mentions(article, gazetteer)


def load_corpus(lines: Iterable[str]) -> Corpus:
    corpus = Corpus()
    seen: set[str] = set()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line_number) from exc
        if not isinstance(record, dict):
            raise ParseError("record must be a JSON object", line_number)
        if line_number == 1 and "_header" in record:
            continue  # pipeline artifacts start with a reproducibility header
        article = _article_from_record(record, line_number)
        if article.article_id in seen:
            raise ParseError(f"duplicate article_id {article.article_id!r}", line_number)
        seen.add(article.article_id)
        corpus.articles.append(article)
        supplied = _supplied_mentions(record, article, line_number)
        if supplied is not None:
            corpus.supplied_mentions[article.article_id] = supplied
    return corpus


def article_to_record(
    article: NewsArticle, mentions: Optional[Sequence[CompanyMention]] = None
) -> dict:
    record = {
        "article_id": article.article_id,
        "published_at": article.published_at.isoformat().replace("+00:00", "Z"),
        "headline": article.headline,
        "sentences": list(article.body_sentences),
        "raw_token_count": article.raw_token_count,
    }
    if mentions is not None:
        record["mentions"] = [
            {"company_id": m.company_id, "surface_form": m.surface_form}
            for m in mentions
        ]
    return record


def load_gazetteer(lines: Iterable[str]) -> list[Company]:
    companies = []
    seen: set[str] = set()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line_number) from exc
        if isinstance(record, dict) and line_number == 1 and "_header" in record:
            continue
        if "company_id" not in record or "name" not in record:
            raise ParseError("gazetteer record needs company_id and name", line_number)
        try:
            company = Company(
                company_id=str(record["company_id"]),
                name=str(record["name"]),
                listing=record.get("listing", "public"),
                sector=record.get("sector", UNKNOWN_SECTOR),
                aliases=tuple(record.get("aliases") or ()),
            )
        except ValueError as exc:
            raise ParseError(str(exc), line_number) from exc
        if company.company_id in seen:
            raise ParseError(f"duplicate company_id {company.company_id!r}", line_number)
        seen.add(company.company_id)
        companies.append(company)
    return companies


def build_samples(
    corpus: Corpus, gazetteer: Sequence[Company]
) -> list[Sample]:
    """One sample per (article, mentioned company) pair."""
    by_id = {c.company_id: c for c in gazetteer}
    samples = []
    seen: set[str] = set()
    for article in corpus.articles:
        text = truncate(article)
        for mention in corpus.mentions_for(article, gazetteer):
            sample_id = Sample.make_id(article.article_id, mention.company_id)
            if sample_id in seen:
                continue
            seen.add(sample_id)
            company = by_id.get(mention.company_id)
            name = company.name if company else mention.surface_form
            samples.append(
                Sample(
                    sample_id=sample_id,
                    article_id=article.article_id,
                    company_id=mention.company_id,
                    truncated_text=text,
                    company_name=name,
                )
            )
    return samples
