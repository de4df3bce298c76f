"""Shared fixtures: synthetic corpora, stub endpoints, and a stub HTTP server."""

from __future__ import annotations

import json
import random
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from newsrisk.corpus import NewsArticle, Sample
from newsrisk.risks import CANONICAL_ORDER, RiskLabelSet


def make_article(
    article_id: str = "a1",
    headline: str = "Acme Warns of Supply Risk",
    sentences: tuple[str, ...] = ("Shipments slipped.", "Costs rose."),
    published: str = "2020-03-05T12:00:00+00:00",
) -> NewsArticle:
    return NewsArticle(
        article_id=article_id,
        published_at=datetime.fromisoformat(published),
        headline=headline,
        body_sentences=sentences,
    )


def make_sample(
    sample_id: str = "a1:c1",
    text: str = "Acme Warns of Supply Risk Shipments slipped.",
    company_name: str = "Acme",
) -> Sample:
    article_id, _, company_id = sample_id.partition(":")
    return Sample(
        sample_id=sample_id,
        article_id=article_id,
        company_id=company_id,
        truncated_text=text,
        company_name=company_name,
    )


#: Two planted trigger tokens per factor for learnability fixtures.
FACTOR_TRIGGERS = {
    factor: (f"trigger{i}err", f"trigger{i}ous")
    for i, factor in enumerate(CANONICAL_ORDER)
}

_FILLER = (
    "the company said market today shares report quarter plan growth "
    "announced expects update statement meeting board group global outlook"
).split()


def build_planted_corpus(
    n: int, seed: int = 7, positive_rate: float = 0.35
) -> tuple[list[Sample], list[RiskLabelSet]]:
    """Synthetic samples where factor f is present iff its trigger tokens are."""
    rng = random.Random(seed)
    samples, labels = [], []
    for i in range(n):
        flags = tuple(rng.random() < positive_rate for _ in CANONICAL_ORDER)
        words = rng.choices(_FILLER, k=8)
        for factor, on in zip(CANONICAL_ORDER, flags):
            if on:
                words.extend(FACTOR_TRIGGERS[factor] * 2)
        rng.shuffle(words)
        article_id = f"art{i:04d}"
        company_id = f"c{i % 5}"
        samples.append(
            Sample(
                sample_id=f"{article_id}:{company_id}",
                article_id=article_id,
                company_id=company_id,
                truncated_text=" ".join(words),
                company_name=f"Company {i % 5}",
            )
        )
        labels.append(RiskLabelSet(flags))
    return samples, labels


class _StubHandler(BaseHTTPRequestHandler):
    """Answers the inference and text-generation wire protocols."""

    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        self.server.requests.append(payload)
        if "prompt" in payload:
            body = {"text": self.server.textgen_reply}
        elif payload.get("task") == "classify":
            body = {"scores": [0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9]}
        elif payload.get("task") == "sentiment":
            body = {"scores": [0.2, 0.3, 0.5]}
        elif payload.get("task") == "embed":
            seedable = sum(payload.get("text", "").encode("utf-8")) % 97
            body = {"vector": [((seedable + i) % 11) / 10.0 for i in range(8)]}
        else:
            self.send_response(400)
            self.end_headers()
            return
        data = json.dumps(body).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    """A live HTTP stub implementing both endpoint protocols."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.requests = []
    server.textgen_reply = "Yes"
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.url = f"http://127.0.0.1:{server.server_address[1]}/"
    try:
        yield server
    finally:
        server.shutdown()
        thread.join(timeout=5)


UTC = timezone.utc
