"""Per-claim dense vector index: embed, persist, search.

Vectors are L2-normalized at build time so search is a plain dot product.
Search is exact over the whole index (claim stores are small); results order
by descending score, then ascending doc_id. The on-disk container records the
embedding fingerprint (model name + dimension) and load refuses a mismatch.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from .corpus import Document
from .errors import (
    ArtifactError,
    FingerprintMismatchError,
    ProtocolError,
    ProviderStatusError,
    TransportError,
    ValidationError,
)

log = logging.getLogger(__name__)

INDEX_MAGIC = "veritas-vector-index"
INDEX_VERSION = 1

DEFAULT_EMBED_MODEL = "dunzhang/stella_en_1.5B_v5"


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValidationError("embedding vector must be non-empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValidationError("embedding vector entries must be finite")

    @property
    def dim(self) -> int:
        return len(self.values)


def l2_normalize(values: Sequence[float]) -> EmbeddingVector:
    norm = math.sqrt(math.fsum(v * v for v in values))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValidationError("cannot normalize a zero or non-finite vector")
    return EmbeddingVector(tuple(v / norm for v in values))


class EmbeddingProvider(Protocol):
    model: str

    def embed_raw(self, texts: list[str]) -> list[list[float]]: ...


class OllamaEmbeddingProvider:
    """Batch embeddings over the /api/embed HTTP endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str = DEFAULT_EMBED_MODEL,
        *,
        timeout: float = 120.0,
        max_in_flight: int = 4,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._client = client or httpx.Client(timeout=timeout)
        self._gate = threading.Semaphore(max_in_flight)

    def embed_raw(self, texts: list[str]) -> list[list[float]]:
        payload = {"model": self.model, "input": list(texts)}
        try:
            with self._gate:
                resp = self._client.post(f"{self.base_url}/api/embed", json=payload)
        except httpx.TransportError as e:
            raise TransportError(f"embedding request failed: {e}") from e
        if not 200 <= resp.status_code < 300:
            raise ProviderStatusError(resp.status_code, resp.text[:200])
        try:
            embeddings = resp.json()["embeddings"]
        except (KeyError, TypeError, ValueError) as e:
            raise ProtocolError(f"embedding response missing 'embeddings': {e}") from e
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise ProtocolError(
                f"expected {len(texts)} embeddings, got "
                f"{len(embeddings) if isinstance(embeddings, list) else type(embeddings).__name__}"
            )
        return embeddings


_WORD_RE = re.compile(r"[^\W_]+")


class HashEmbeddingProvider:
    """Deterministic bag-of-words embedding for offline runs and tests.

    Each token hashes to a bucket (keyed blake2b, stable across processes);
    vectors are raw counts. No network, no model weights.
    """

    def __init__(self, dim: int = 256, model: str = "hash-bow"):
        if dim < 1:
            raise ValidationError("dim must be >= 1")
        self.dim = dim
        self.model = model

    def embed_raw(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = [0.0] * self.dim
            for token in _WORD_RE.findall(text.lower()):
                h = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
                vec[int.from_bytes(h, "big") % self.dim] += 1.0
            if not any(vec):
                vec[0] = 1.0  # token-free text still needs a direction
            out.append(vec)
        return out


def embed_texts(
    provider: EmbeddingProvider,
    texts: list[str],
    *,
    max_chars: int = 8000,
    retries: int = 3,
    backoff: float = 0.5,
    sleep=time.sleep,
) -> list[EmbeddingVector]:
    """Embed and L2-normalize a batch, retrying transport failures."""
    if not texts:
        return []
    if any(not t for t in texts):
        raise ValidationError("cannot embed an empty string")
    clipped = [t[:max_chars] for t in texts]
    last: Exception | None = None
    for attempt in range(retries):
        try:
            raw = provider.embed_raw(clipped)
            break
        except TransportError as e:
            last = e
            if attempt + 1 < retries:
                log.warning("embedding attempt %d failed, retrying: %s", attempt + 1, e)
                sleep(backoff * 2**attempt)
    else:
        raise TransportError(f"embedding failed after {retries} attempts: {last}") from last
    vectors = [l2_normalize(v) for v in raw]
    dims = {v.dim for v in vectors}
    if len(dims) > 1:
        raise ProtocolError(f"inconsistent embedding dimensions in one batch: {sorted(dims)}")
    return vectors


@dataclass(frozen=True)
class IndexEntry:
    doc_id: str
    vector: EmbeddingVector


@dataclass
class VectorIndex:
    dim: int
    provider_fingerprint: str
    entries: list[IndexEntry]
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.array(
                [e.vector.values for e in self.entries], dtype=np.float64
            )
        return self._matrix


@dataclass(frozen=True)
class RetrievalHit:
    doc_id: str
    score: float


def build_index(
    documents: list[Document],
    provider: EmbeddingProvider,
    *,
    max_chars: int = 8000,
) -> VectorIndex:
    if not documents:
        raise ValidationError("cannot build an index over zero documents")
    ids = [d.doc_id for d in documents]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate doc_ids in index input")
    vectors = embed_texts(provider, [d.text for d in documents], max_chars=max_chars)
    dim = vectors[0].dim
    entries = [IndexEntry(doc_id=d.doc_id, vector=v) for d, v in zip(documents, vectors)]
    return VectorIndex(
        dim=dim,
        provider_fingerprint=f"{provider.model}:{dim}",
        entries=entries,
    )


def search(index: VectorIndex, query: EmbeddingVector, k: int) -> list[RetrievalHit]:
    """Exact top-k by cosine (dot product of unit vectors); doc_id breaks ties."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if query.dim != index.dim:
        raise ValidationError(f"query dim {query.dim} != index dim {index.dim}")
    if not index.entries:
        return []
    scores = index.matrix() @ np.asarray(query.values, dtype=np.float64)
    order = sorted(
        range(len(index.entries)),
        key=lambda i: (-scores[i], index.entries[i].doc_id),
    )
    return [
        RetrievalHit(doc_id=index.entries[i].doc_id, score=float(scores[i]))
        for i in order[:k]
    ]


def save_index(index: VectorIndex, path: str | os.PathLike) -> None:
    p = Path(path)
    doc = {
        "magic": INDEX_MAGIC,
        "version": INDEX_VERSION,
        "dim": index.dim,
        "fingerprint": index.provider_fingerprint,
        "entries": [
            {"doc_id": e.doc_id, "vector": list(e.vector.values)}
            for e in index.entries
        ],
    }
    tmp = p.with_name(p.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            json.dump(doc, f, ensure_ascii=False, separators=(",", ":"))
            f.write("\n")
        os.replace(tmp, p)
    except OSError as e:
        raise ArtifactError(f"cannot write index {p}: {e}") from e


def load_index(
    path: str | os.PathLike, *, expected_fingerprint: str | None = None
) -> VectorIndex:
    p = Path(path)
    try:
        with open(p, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as e:
        raise ArtifactError(f"cannot read index {p}: {e}") from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"index {p} is not valid JSON: {e.msg}") from e
    if doc.get("magic") != INDEX_MAGIC or doc.get("version") != INDEX_VERSION:
        raise ArtifactError(f"{p} is not a version-{INDEX_VERSION} index file")
    fingerprint = doc["fingerprint"]
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        raise FingerprintMismatchError(expected_fingerprint, fingerprint, str(p))
    dim = doc["dim"]
    entries = [
        IndexEntry(doc_id=e["doc_id"], vector=EmbeddingVector(tuple(e["vector"])))
        for e in doc["entries"]
    ]
    for e in entries:
        if e.vector.dim != dim:
            raise ArtifactError(f"{p}: entry {e.doc_id} has dim {e.vector.dim}, expected {dim}")
    return VectorIndex(dim=dim, provider_fingerprint=fingerprint, entries=entries)


def retrieve_for_claim(
    claim,
    index: VectorIndex,
    provider: EmbeddingProvider,
    documents: list[Document],
    *,
    k: int = 3,
    max_chars: int = 8000,
) -> list[Document]:
    """Embed the claim (a ClaimRecord or raw string) and return the top-k documents."""
    text = claim.text if hasattr(claim, "text") else str(claim)
    by_id = {d.doc_id: d for d in documents}
    query = embed_texts(provider, [text], max_chars=max_chars)[0]
    hits = search(index, query, k)
    out = []
    for hit in hits:
        if hit.doc_id not in by_id:
            raise ValidationError(f"index entry {hit.doc_id} has no backing document")
        out.append(by_id[hit.doc_id])
    return out
