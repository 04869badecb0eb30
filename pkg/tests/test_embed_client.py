"""Embedding service client against a mock transport: batching, ordering,
retries, and wire-format validation."""

from __future__ import annotations

import json
import threading

import httpx
import numpy as np
import pytest

from tadbench.embed_client import (
    TOKEN_ENV_VAR,
    EmbeddingClient,
    EmbeddingSourceDescriptor,
    _parse_rows,
    fetch_embeddings,
)
from tadbench.errors import DimensionMismatchError, TransportError

DIM = 3


def desc(**overrides):
    defaults = dict(
        endpoint="https://embed.test/v1/embeddings",
        model_name="toy-embedder",
        expected_dim=DIM,
        max_batch=512,
    )
    defaults.update(overrides)
    return EmbeddingSourceDescriptor(**defaults)


def vector_for(text: str) -> list[float]:
    # "t7" embeds as [7, 7, 7]; rows are recognizable regardless of order
    return [float(text.lstrip("t"))] * DIM


class RecordingHandler:
    """Echo embedder that logs request bodies and can shuffle or fail."""

    def __init__(self, reverse=False, fail_first=0, status=500):
        self.reverse = reverse
        self.fail_first = fail_first
        self.status = status
        self.requests: list[dict] = []
        self._lock = threading.Lock()

    def __call__(self, request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        with self._lock:
            self.requests.append(
                {"body": body, "auth": request.headers.get("Authorization")}
            )
            n_seen = len(self.requests)
        if n_seen <= self.fail_first:
            return httpx.Response(self.status, json={"error": "try again"})
        data = [
            {"index": i, "embedding": vector_for(text)}
            for i, text in enumerate(body["input"])
        ]
        if self.reverse:
            data = data[::-1]
        return httpx.Response(200, json={"data": data})


def make_client(handler, **desc_overrides):
    return EmbeddingClient(
        desc(**desc_overrides),
        transport=httpx.MockTransport(handler),
        sleep=lambda _: None,
    )


class TestDescriptor:
    def test_validation(self):
        with pytest.raises(ValueError):
            desc(expected_dim=0)
        with pytest.raises(ValueError):
            desc(max_batch=0)
        with pytest.raises(ValueError):
            desc(timeout=0.0)

    def test_max_in_flight_validated(self):
        with pytest.raises(ValueError):
            EmbeddingClient(desc(), max_in_flight=0)


class TestFetch:
    def test_rows_in_input_order(self):
        handler = RecordingHandler(reverse=True)
        with make_client(handler) as client:
            result = client.fetch_embeddings([f"t{k}" for k in range(6)], name="d")
        np.testing.assert_array_equal(
            result.matrix, np.repeat(np.arange(6.0)[:, None], DIM, axis=1)
        )
        assert result.name == "d"
        assert result.embedding_source == "toy-embedder"
        assert result.labels is None
        assert result.matrix.dtype == np.float32

    def test_batches_split_at_max_batch(self):
        handler = RecordingHandler()
        with make_client(handler, max_batch=4) as client:
            result = client.fetch_embeddings([f"t{k}" for k in range(10)])
        sizes = sorted(len(r["body"]["input"]) for r in handler.requests)
        assert sizes == [2, 4, 4]
        np.testing.assert_array_equal(result.matrix[:, 0], np.arange(10.0))

    def test_single_batch_when_under_limit(self):
        handler = RecordingHandler()
        with make_client(handler, max_batch=100) as client:
            client.fetch_embeddings(["t1", "t2"])
        assert len(handler.requests) == 1
        assert handler.requests[0]["body"]["model"] == "toy-embedder"

    def test_empty_inputs_rejected(self):
        with make_client(RecordingHandler()) as client:
            with pytest.raises(ValueError, match="non-empty"):
                client.fetch_embeddings([])
            with pytest.raises(ValueError, match="non-empty"):
                client.fetch_embeddings(["t1", ""])

    def test_module_level_wrapper(self):
        result = fetch_embeddings(
            desc(), ["t5"], transport=httpx.MockTransport(RecordingHandler())
        )
        np.testing.assert_array_equal(result.matrix, [[5.0, 5.0, 5.0]])

    def test_closed_client_unusable(self):
        client = make_client(RecordingHandler())
        client.close()
        with pytest.raises(RuntimeError):
            client.fetch_embeddings(["t1"])


class TestRetries:
    def test_recovers_after_transient_failures(self):
        handler = RecordingHandler(fail_first=2)
        delays = []
        client = EmbeddingClient(
            desc(), transport=httpx.MockTransport(handler), sleep=delays.append
        )
        with client:
            result = client.fetch_embeddings(["t3"])
        np.testing.assert_array_equal(result.matrix, [[3.0, 3.0, 3.0]])
        assert len(handler.requests) == 3
        # exponential backoff: 0.5 s then 1 s, each with +-20% jitter
        assert len(delays) == 2
        assert 0.4 <= delays[0] <= 0.6
        assert 0.8 <= delays[1] <= 1.2

    def test_gives_up_after_five_attempts(self):
        handler = RecordingHandler(fail_first=99)
        delays = []
        client = EmbeddingClient(
            desc(), transport=httpx.MockTransport(handler), sleep=delays.append
        )
        with client:
            with pytest.raises(TransportError, match="after 5 attempts"):
                client.fetch_embeddings(["t1"])
        assert len(handler.requests) == 5
        assert len(delays) == 4

    def test_malformed_payload_retried(self):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 2:
                return httpx.Response(200, json={"nope": []})
            return httpx.Response(
                200, json={"data": [{"index": 0, "embedding": [1.0, 1.0, 1.0]}]}
            )

        with make_client(handler) as client:
            client.fetch_embeddings(["t1"])
        assert len(calls) == 2

    def test_dimension_mismatch_not_retried(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(
                200, json={"data": [{"index": 0, "embedding": [1.0, 2.0]}]}
            )

        with make_client(handler) as client:
            with pytest.raises(DimensionMismatchError, match="expected 3"):
                client.fetch_embeddings(["t1"])
        assert len(calls) == 1


class TestAuthHeader:
    def test_token_sent_when_configured(self, monkeypatch):
        monkeypatch.setenv(TOKEN_ENV_VAR, "sek-42")
        handler = RecordingHandler()
        with make_client(handler) as client:
            client.fetch_embeddings(["t1"])
        assert handler.requests[0]["auth"] == "Bearer sek-42"

    def test_no_header_without_token(self, monkeypatch):
        monkeypatch.delenv(TOKEN_ENV_VAR, raising=False)
        handler = RecordingHandler()
        with make_client(handler) as client:
            client.fetch_embeddings(["t1"])
        assert handler.requests[0]["auth"] is None


class TestParseRows:
    def good(self, n=2):
        return {
            "data": [
                {"index": i, "embedding": [float(i)] * DIM} for i in range(n)
            ]
        }

    def test_happy_path(self):
        rows = _parse_rows(self.good(), 2, DIM)
        np.testing.assert_array_equal(rows[:, 0], [0.0, 1.0])

    def test_missing_data_list(self):
        with pytest.raises(TransportError, match="'data' list"):
            _parse_rows({"data": "oops"}, 1, DIM)
        with pytest.raises(TransportError, match="'data' list"):
            _parse_rows([], 1, DIM)

    def test_row_count_mismatch(self):
        with pytest.raises(TransportError, match="2 rows for 3 inputs"):
            _parse_rows(self.good(2), 3, DIM)

    def test_duplicate_index(self):
        payload = self.good(2)
        payload["data"][1]["index"] = 0
        with pytest.raises(TransportError, match="invalid or duplicated"):
            _parse_rows(payload, 2, DIM)

    def test_out_of_range_index(self):
        payload = self.good(1)
        payload["data"][0]["index"] = 5
        with pytest.raises(TransportError, match="invalid or duplicated"):
            _parse_rows(payload, 1, DIM)

    def test_malformed_item(self):
        with pytest.raises(TransportError, match="malformed"):
            _parse_rows({"data": [{"embedding": [0.0] * DIM}]}, 1, DIM)
        with pytest.raises(TransportError, match="malformed"):
            _parse_rows({"data": [{"index": "x", "embedding": [0.0] * DIM}]}, 1, DIM)

    def test_wrong_width(self):
        with pytest.raises(DimensionMismatchError):
            _parse_rows({"data": [{"index": 0, "embedding": [0.0]}]}, 1, DIM)
