"""HTTP clients for the external inference, text-generation and sentiment
endpoints.

All clients share one retry policy: transport failures and 5xx responses are
retried with exponential backoff (3 attempts by default); anything else that
deviates from the wire contract is a protocol error and is never retried.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import httpx
import numpy as np


class TransportFailure(RuntimeError):
    """The endpoint stayed unreachable after all retry attempts."""


class ProtocolError(RuntimeError):
    """The endpoint answered with a payload that violates the contract."""


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.25

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    def delay(self, attempt: int) -> float:
        return self.backoff_base * (2**attempt)


class _JsonEndpoint:
    def __init__(
        self,
        url: str,
        retry: RetryPolicy = RetryPolicy(),
        timeout: float = 30.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.url = url
        self.retry = retry
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def post(self, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            try:
                response = self._client.post(self.url, json=payload)
            except httpx.TransportError as exc:
                last_error = exc
            else:
                if response.status_code >= 500:
                    last_error = ProtocolError(
                        f"server error {response.status_code} from {self.url}"
                    )
                elif response.status_code >= 400:
                    raise ProtocolError(
                        f"endpoint rejected request: {response.status_code} {response.text[:200]}"
                    )
                else:
                    try:
                        body = response.json()
                    except ValueError as exc:
                        raise ProtocolError(f"non-JSON response from {self.url}") from exc
                    if not isinstance(body, dict):
                        raise ProtocolError("response must be a JSON object")
                    return body
            if attempt + 1 < self.retry.max_attempts:
                time.sleep(self.retry.delay(attempt))
        raise TransportFailure(
            f"{self.url} unreachable after {self.retry.max_attempts} attempts: {last_error}"
        )


class InferenceClient(_JsonEndpoint):
    """Client for the classify/embed/sentiment inference endpoint."""

    def classify(self, text: str, company_name: str) -> list[float]:
        """Seven per-factor scores in [0, 1], canonical factor order."""
        body = self.post({"text": text, "company_name": company_name, "task": "classify"})
        scores = body.get("scores")
        if not isinstance(scores, list) or len(scores) != 7:
            raise ProtocolError(f"classify response must carry 7 scores, got {scores!r}")
        out = []
        for value in scores:
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise ProtocolError(f"classify score out of range: {value!r}")
            out.append(float(value))
        return out

    def embed(self, text: str, company_name: str = "") -> np.ndarray:
        body = self.post({"text": text, "company_name": company_name, "task": "embed"})
        vector = body.get("vector")
        if not isinstance(vector, list) or not vector:
            raise ProtocolError("embed response must carry a non-empty vector")
        try:
            return np.asarray([float(v) for v in vector])
        except (TypeError, ValueError) as exc:
            raise ProtocolError("embed vector must be numeric") from exc

    def sentiment(self, text: str, company_name: str) -> tuple[float, float, float]:
        """(positive, neutral, negative) probabilities summing to one."""
        body = self.post({"text": text, "company_name": company_name, "task": "sentiment"})
        scores = body.get("scores")
        if not isinstance(scores, list) or len(scores) != 3:
            raise ProtocolError("sentiment response must carry 3 probabilities")
        try:
            triple = tuple(float(v) for v in scores)
        except (TypeError, ValueError) as exc:
            raise ProtocolError("sentiment probabilities must be numeric") from exc
        if any(v < 0.0 or v > 1.0 for v in triple) or abs(sum(triple) - 1.0) > 1e-6:
            raise ProtocolError(f"sentiment probabilities must sum to 1: {triple}")
        return triple  # type: ignore[return-value]


class TextGenerationClient(_JsonEndpoint):
    """Client for the prompt-completion endpoint."""

    def generate(self, prompt: str, max_new_tokens: int = 8) -> str:
        body = self.post({"prompt": prompt, "max_new_tokens": max_new_tokens})
        text = body.get("text")
        if not isinstance(text, str):
            raise ProtocolError("generation response must carry a text field")
        return text


class RemoteEmbedder:
    """EmbeddingProvider backed by the inference endpoint."""

    def __init__(self, client: InferenceClient):
        self.client = client

    def embed(self, text: str) -> np.ndarray:
        return self.client.embed(text)
