"""HTTP client for an embedding service with the common JSON wire shape.

Requests are ``POST {"model": ..., "input": [texts...]}`` and responses
``{"data": [{"index": i, "embedding": [...]}, ...]}``; rows are re-sorted
by their returned index, so a service answering out of order still yields
order-preserving results. Batches larger than ``max_batch`` are split and
dispatched through a small thread pool (default 4 in flight). Transient
failures retry up to 5 attempts with exponential backoff (0.5 s base,
factor 2, +-20% jitter); a wrong embedding width is a contract violation
and is surfaced immediately instead of being retried.

The bearer token, when the service needs one, comes from the
``TADBENCH_EMBED_TOKEN`` environment variable. Tests inject an
``httpx.MockTransport`` through the ``transport`` argument.
"""

from __future__ import annotations

import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
import numpy as np

from .data.types import LabeledEmbeddingSet
from .errors import DimensionMismatchError, TransportError

TOKEN_ENV_VAR = "TADBENCH_EMBED_TOKEN"

_MAX_ATTEMPTS = 5
_BACKOFF_BASE = 0.5
_BACKOFF_FACTOR = 2.0
_BACKOFF_JITTER = 0.2


@dataclass(frozen=True)
class EmbeddingSourceDescriptor:
    """Where and how to fetch embeddings for one model."""

    endpoint: str
    model_name: str
    expected_dim: int
    max_batch: int = 512
    timeout: float = 30.0

    def __post_init__(self):
        if self.expected_dim <= 0:
            raise ValueError(f"expected_dim must be positive, got {self.expected_dim}")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")


def _backoff_delay(attempt: int, rng: random.Random) -> float:
    base = _BACKOFF_BASE * _BACKOFF_FACTOR**attempt
    return base * (1.0 + _BACKOFF_JITTER * (2.0 * rng.random() - 1.0))


def _parse_rows(payload, batch_len: int, expected_dim: int) -> np.ndarray:
    if not isinstance(payload, dict) or not isinstance(payload.get("data"), list):
        raise TransportError("embedding response lacks a 'data' list")
    data = payload["data"]
    if len(data) != batch_len:
        raise TransportError(
            f"embedding response carries {len(data)} rows for {batch_len} inputs"
        )
    rows = np.empty((batch_len, expected_dim), dtype=np.float32)
    seen = np.zeros(batch_len, dtype=bool)
    for item in data:
        try:
            idx = int(item["index"])
            vec = item["embedding"]
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed embedding response item: {exc}") from exc
        if not 0 <= idx < batch_len or seen[idx]:
            raise TransportError(f"embedding response index {idx} invalid or duplicated")
        if len(vec) != expected_dim:
            raise DimensionMismatchError(
                f"service returned dimension {len(vec)}, expected {expected_dim}"
            )
        rows[idx] = vec
        seen[idx] = True
    return rows


class EmbeddingClient:
    """Immutable, shareable client; safe for concurrent use."""

    def __init__(self, desc: EmbeddingSourceDescriptor, transport=None, max_in_flight: int = 4, sleep=time.sleep):
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self.desc = desc
        self._max_in_flight = max_in_flight
        self._sleep = sleep
        headers = {}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(
            transport=transport, timeout=desc.timeout, headers=headers
        )

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _fetch_batch(self, batch: list[str], batch_index: int) -> np.ndarray:
        body = {"model": self.desc.model_name, "input": batch}
        rng = random.Random(batch_index)
        last_error: Exception | None = None
        for attempt in range(_MAX_ATTEMPTS):
            if attempt:
                self._sleep(_backoff_delay(attempt - 1, rng))
            try:
                response = self._client.post(self.desc.endpoint, json=body)
                response.raise_for_status()
                return _parse_rows(response.json(), len(batch), self.desc.expected_dim)
            except DimensionMismatchError:
                raise
            except (httpx.HTTPError, TransportError, ValueError) as exc:
                last_error = exc
        raise TransportError(
            f"embedding request failed after {_MAX_ATTEMPTS} attempts: {last_error}"
        ) from last_error

    def fetch_embeddings(self, texts: list[str], name: str = "remote") -> LabeledEmbeddingSet:
        """Embed ``texts`` in order; one matrix row per input text."""
        if not texts:
            raise ValueError("texts must be non-empty")
        if any(not t for t in texts):
            raise ValueError("every text must be non-empty")
        size = self.desc.max_batch
        batches = [texts[i : i + size] for i in range(0, len(texts), size)]
        assert len(batches) == math.ceil(len(texts) / size)
        if len(batches) == 1:
            blocks = [self._fetch_batch(batches[0], 0)]
        else:
            workers = min(self._max_in_flight, len(batches))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                blocks = list(pool.map(self._fetch_batch, batches, range(len(batches))))
        return LabeledEmbeddingSet(
            name=name,
            embedding_source=self.desc.model_name,
            matrix=np.vstack(blocks),
            labels=None,
        )


def fetch_embeddings(desc: EmbeddingSourceDescriptor, texts: list[str], transport=None, name: str = "remote") -> LabeledEmbeddingSet:
    """One-shot convenience wrapper around ``EmbeddingClient``."""
    with EmbeddingClient(desc, transport=transport) as client:
        return client.fetch_embeddings(texts, name=name)
