"""Yes/No risk prompts for an external text-generation endpoint.

The prompt template is fixed and rendered byte-exactly; few-shot examples are
the query's nearest labeled neighbors, prepended most-similar-first with one
blank line between blocks.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .corpus import Sample, tokenize
from .endpoints import TextGenerationClient, TransportFailure
from .risks import CANONICAL_ORDER, RiskFactor, RiskLabelSet
from .vectorize import Vectorizer, fit

DEFAULT_FEWSHOT_K = 3

_FIRST_WORD_RE = re.compile(r"[^\W\d_]+")


class BuildError(ValueError):
    """A prompt field required by the template is missing."""


class Answer(str, Enum):
    YES = "Yes"
    NO = "No"
    UNPARSEABLE = "Unparseable"


@dataclass(frozen=True)
class LlmAnswer:
    raw_text: str
    parsed: Answer


@dataclass(frozen=True)
class PromptSpec:
    news_text: str
    target: str
    risk_description: str
    fewshot_examples: tuple[tuple[str, str], ...] = ()


def render_block(news_text: str, target: str, risk_description: str) -> str:
    """The four-line question block, without any answer."""
    return (
        f"{news_text}\n"
        f"For company {target}, does the above news mention {risk_description} ?\n"
        "Options: Yes, No\n"
        "Your answer is (Please only use Yes or No):"
    )


def build_prompt(spec: PromptSpec) -> str:
    """Render the full prompt: few-shot blocks, blank-line separated, then the query."""
    if not spec.news_text or not spec.target or not spec.risk_description:
        raise BuildError("news_text, target and risk_description must be non-empty")
    blocks = []
    for filled, answer in spec.fewshot_examples:
        if answer not in (Answer.YES.value, Answer.NO.value):
            raise BuildError(f"few-shot answer must be Yes or No, got {answer!r}")
        if not filled:
            raise BuildError("few-shot example block must be non-empty")
        blocks.append(f"{filled} {answer}")
    blocks.append(render_block(spec.news_text, spec.target, spec.risk_description))
    return "\n\n".join(blocks)


def select_fewshot(
    train_samples: Sequence[Sample],
    query_sample: Sample,
    k: int = DEFAULT_FEWSHOT_K,
    vectorizer: Optional[Vectorizer] = None,
) -> list[Sample]:
    """The k training samples most cosine-similar to the query.

    Similarity is computed over TF-IDF vectors of the truncated text; ties
    break on sample_id, most similar first.
    """
    if len(train_samples) < k:
        raise ValueError(f"need at least k={k} training samples, got {len(train_samples)}")
    if vectorizer is None:
        vectorizer = fit([tokenize(s.truncated_text) for s in train_samples])
    query_vec = vectorizer.transform(tokenize(query_sample.truncated_text))
    ranked = sorted(
        train_samples,
        key=lambda s: (
            -query_vec.cosine(vectorizer.transform(tokenize(s.truncated_text))),
            s.sample_id,
        ),
    )
    return ranked[:k]


def parse_answer(raw_text: str) -> Answer:
    """Map the first alphabetic token, case-folded, to Yes/No/Unparseable."""
    match = _FIRST_WORD_RE.search(raw_text)
    if match is None:
        return Answer.UNPARSEABLE
    word = match.group(0).casefold()
    if word == "yes":
        return Answer.YES
    if word == "no":
        return Answer.NO
    return Answer.UNPARSEABLE


def _target_name(sample: Sample) -> str:
    return sample.company_name or sample.company_id


@dataclass
class LlmClassification:
    labels: RiskLabelSet
    answers: dict[RiskFactor, LlmAnswer] = field(default_factory=dict)
    unparseable_count: int = 0
    errors: dict[RiskFactor, str] = field(default_factory=dict)


def classify_with_llm(
    client: TextGenerationClient,
    sample: Sample,
    mode: str = "zero",
    train_samples: Optional[Sequence[tuple[Sample, RiskLabelSet]]] = None,
    k: int = DEFAULT_FEWSHOT_K,
    vectorizer: Optional[Vectorizer] = None,
    max_new_tokens: int = 8,
    max_concurrency: int = 1,
) -> LlmClassification:
    """One Yes/No question per factor: seven independent endpoint calls.

    Yes maps to positive; No and Unparseable map to negative, the latter
    counted. A transport failure is surfaced per factor and leaves the
    remaining factors untouched.
    """
    if mode not in ("zero", "few"):
        raise ValueError(f"mode must be zero or few, got {mode!r}")
    neighbors: list[tuple[Sample, RiskLabelSet]] = []
    if mode == "few":
        if not train_samples:
            raise ValueError("few-shot mode requires labeled training samples")
        labels_by_id = {s.sample_id: labels for s, labels in train_samples}
        picked = select_fewshot(
            [s for s, _ in train_samples], sample, k=k, vectorizer=vectorizer
        )
        neighbors = [(s, labels_by_id[s.sample_id]) for s in picked]

    def ask(position_factor: tuple[int, RiskFactor]) -> tuple[RiskFactor, LlmAnswer | str]:
        position, factor = position_factor
        examples = tuple(
            (
                render_block(n.truncated_text, _target_name(n), factor.description),
                Answer.YES.value if labels.flags[position] else Answer.NO.value,
            )
            for n, labels in neighbors
        )
        prompt = build_prompt(
            PromptSpec(
                news_text=sample.truncated_text,
                target=_target_name(sample),
                risk_description=factor.description,
                fewshot_examples=examples,
            )
        )
        try:
            raw = client.generate(prompt, max_new_tokens=max_new_tokens)
        except TransportFailure as exc:
            return factor, str(exc)
        return factor, LlmAnswer(raw_text=raw, parsed=parse_answer(raw))

    tasks = list(enumerate(CANONICAL_ORDER))
    if max_concurrency > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            outcomes = list(pool.map(ask, tasks))
    else:
        outcomes = [ask(task) for task in tasks]

    result = LlmClassification(labels=RiskLabelSet())
    flags = []
    for factor, outcome in outcomes:
        if isinstance(outcome, str):
            result.errors[factor] = outcome
            flags.append(False)
            continue
        result.answers[factor] = outcome
        if outcome.parsed is Answer.UNPARSEABLE:
            result.unparseable_count += 1
        flags.append(outcome.parsed is Answer.YES)
    result.labels = RiskLabelSet(tuple(flags))
    return result
