"""Headline-level risk pre-filter backed by a curated unigram lexicon."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import NewsArticle, tokenize

#: Curated risk unigrams used to pre-filter headlines before annotation.
DEFAULT_TERMS: tuple[str, ...] = (
    "affect", "ban", "cash", "cashflow", "challenge", "competition",
    "concern", "crackdown", "cut", "debt", "decline", "decrease",
    "delay", "demand", "downgrade", "drop", "fail", "finance",
    "harm", "hit", "impact", "inflation", "layoff", "liable",
    "limit", "lose", "loss", "lowest", "operation", "plunge",
    "pressure", "protest", "regulation", "restriction", "risk", "rival",
    "shortage", "shrink", "slump", "strike", "struggle", "sue",
    "suffer", "supply", "suspend", "tension", "unable", "uncertain",
    "volatile", "warn", "weak", "worsen", "worst",
)

#: Suffixes appended per term when inflected matching is requested.
INFLECTION_SUFFIXES: tuple[str, ...] = ("s", "es", "ed", "ing")


@dataclass(frozen=True)
class Lexicon:
    """A set of lowercase unigrams; every term is a single token."""

    terms: frozenset[str]

    def __post_init__(self) -> None:
        for term in self.terms:
            tokens = tokenize(term)
            if tokens != [term]:
                raise ValueError(f"lexicon term must be a single token: {term!r}")

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def with_inflections(self) -> "Lexicon":
        """Expanded variant matching 'cuts', 'protests', etc. Off by default."""
        expanded = set(self.terms)
        for term in self.terms:
            expanded.update(term + suffix for suffix in INFLECTION_SUFFIXES)
        return Lexicon(frozenset(expanded))


def default_lexicon() -> Lexicon:
    """The built-in 53-term risk lexicon."""
    return Lexicon(frozenset(DEFAULT_TERMS))


def load_lexicon(lines: Iterable[str]) -> Lexicon:
    """Read a custom lexicon: one term per line, '#' comments allowed."""
    terms = set()
    for line_number, line in enumerate(lines, start=1):
        term = line.split("#", 1)[0].strip()
        if not term:
            continue
        tokens = tokenize(term)
        if len(tokens) != 1:
            raise ValueError(
                f"line {line_number}: lexicon entries must be single tokens, got {term!r}"
            )
        terms.add(tokens[0])
    return Lexicon(frozenset(terms))


def headline_matches(headline: str, lexicon: Lexicon) -> tuple[bool, set[str]]:
    """Exact-token intersection of the headline with the lexicon (no stemming)."""
    hits = set(tokenize(headline)) & lexicon.terms
    return bool(hits), hits


def filter_corpus(
    articles: Sequence[NewsArticle], lexicon: Lexicon
) -> list[NewsArticle]:
    """Articles whose headline matches at least one lexicon term, in order."""
    return [a for a in articles if headline_matches(a.headline, lexicon)[0]]
