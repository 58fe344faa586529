"""Dataset ingestion and artifact persistence.

Claims arrive as one JSON array per split. Each claim's knowledge store is a
JSON-Lines file named <claim_id>.json in a shared directory. Pipeline
artifacts are JSON-Lines with a fixed key order and compact separators, so a
repeated run writes byte-identical files.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Protocol, TypeVar

from .errors import (
    ArtifactError,
    ClaimsParseError,
    KnowledgeStoreNotFoundError,
    ValidationError,
)
from .labels import LABEL_ORDER, VerdictLabel, normalize_label

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GoldQA:
    """One gold evidence question with its answer(s)."""

    question: str
    answers: tuple[str, ...]

    def __post_init__(self):
        if not self.question.strip():
            raise ValidationError("gold question must be non-empty")
        if not self.answers:
            raise ValidationError("gold question needs at least one answer")
        if any(not a.strip() for a in self.answers):
            raise ValidationError("gold answers must be non-empty")


@dataclass(frozen=True)
class ClaimRecord:
    claim_id: int
    text: str
    gold_label: VerdictLabel | None = None
    gold_evidence: tuple[GoldQA, ...] = ()
    justification: str | None = None

    def __post_init__(self):
        if self.claim_id < 0:
            raise ValidationError("claim_id must be non-negative")
        if not self.text.strip():
            raise ValidationError(f"claim {self.claim_id}: text must be non-empty")


@dataclass(frozen=True)
class Document:
    doc_id: str
    claim_id: int
    url: str
    text: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "claim_id": self.claim_id,
            "url": self.url,
            "text": self.text,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "Document":
        return cls(
            doc_id=d["doc_id"],
            claim_id=d["claim_id"],
            url=d["url"],
            text=d["text"],
        )


def _answer_text(raw: Any) -> str:
    if isinstance(raw, dict):
        return str(raw.get("answer", "")).strip()
    return str(raw).strip()


def load_claims(path: str | os.PathLike) -> list[ClaimRecord]:
    """Parse a claims split; claim_id is the array position.

    Unknown fields are ignored. Gold questions without any usable answer are
    dropped with a debug note; an unknown label string is an error.
    """
    p = Path(path)
    try:
        text = p.read_bytes().decode("utf-8")
    except OSError as e:
        raise ValidationError(f"cannot read claims file {p}: {e}") from e
    except UnicodeDecodeError as e:
        raise ClaimsParseError(str(p), e.start, "not valid UTF-8") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise ClaimsParseError(str(p), offset, e.msg) from e
    if not isinstance(data, list):
        raise ValidationError(f"{p}: claims file must be a JSON array")

    records: list[ClaimRecord] = []
    for idx, obj in enumerate(data):
        if not isinstance(obj, dict):
            raise ValidationError(f"{p}: claim {idx} is not an object")
        claim_text = str(obj.get("claim", "")).strip()
        if not claim_text:
            raise ValidationError(f"{p}: claim {idx} has no claim text")
        raw_label = obj.get("label")
        if raw_label is None:
            gold_label = None
        else:
            try:
                gold_label = normalize_label(str(raw_label))
            except ValueError as e:
                raise ValidationError(f"{p}: claim {idx}: {e}") from e
        evidence: list[GoldQA] = []
        for q in obj.get("questions") or ():
            if not isinstance(q, dict):
                continue
            question = str(q.get("question", "")).strip()
            answers = tuple(
                a for a in (_answer_text(x) for x in q.get("answers") or ()) if a
            )
            if not question or not answers:
                log.debug("claim %d: dropping gold question without text/answers", idx)
                continue
            evidence.append(GoldQA(question=question, answers=answers))
        justification = obj.get("justification")
        records.append(
            ClaimRecord(
                claim_id=idx,
                text=claim_text,
                gold_label=gold_label,
                gold_evidence=tuple(evidence),
                justification=str(justification) if justification is not None else None,
            )
        )
    return records


@dataclass(frozen=True)
class DatasetStats:
    counts: dict[VerdictLabel, int]
    total: int
    absent_labels: tuple[VerdictLabel, ...]


def validate_dataset(claims: list[ClaimRecord]) -> DatasetStats:
    """Label distribution over labeled claims; warns when a class is absent."""
    counts = {label: 0 for label in LABEL_ORDER}
    for c in claims:
        if c.gold_label is not None:
            counts[c.gold_label] += 1
    absent = tuple(label for label in LABEL_ORDER if counts[label] == 0)
    for label in absent:
        log.warning("dataset has no %s claims", label.display)
    return DatasetStats(counts=counts, total=sum(counts.values()), absent_labels=absent)


def load_knowledge_store(directory: str | os.PathLike, claim_id: int) -> list[Document]:
    """Read <claim_id>.json; doc ordinals come from 0-based source line numbers.

    Lines whose joined text is empty are skipped, and the gap stays visible in
    the surviving doc_ids.
    """
    path = Path(directory) / f"{claim_id}.json"
    if not path.exists():
        raise KnowledgeStoreNotFoundError(claim_id, str(path))
    docs: list[Document] = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ArtifactError(
                    f"{path}: malformed JSON on line {line_no + 1}: {e.msg}"
                ) from e
            segments = obj.get("url2text") or []
            doc_text = "\n".join(str(s) for s in segments)
            if not doc_text.strip():
                continue
            docs.append(
                Document(
                    doc_id=f"{claim_id}/{line_no}",
                    claim_id=claim_id,
                    url=str(obj.get("url", "")),
                    text=doc_text,
                )
            )
    return docs


class JsonRecord(Protocol):
    def to_json_dict(self) -> dict[str, Any]: ...


R = TypeVar("R")


def jsonl_line(d: dict[str, Any]) -> str:
    return json.dumps(d, ensure_ascii=False, separators=(",", ":"))


def save_artifacts(records: Iterable[JsonRecord], path: str | os.PathLike) -> None:
    """Write records as JSON-Lines, atomically (write temp, then rename)."""
    p = Path(path)
    tmp = p.with_name(p.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(jsonl_line(record.to_json_dict()) + "\n")
        os.replace(tmp, p)
    except OSError as e:
        raise ArtifactError(f"cannot write artifact {p}: {e}") from e


def load_artifacts(path: str | os.PathLike, record_type: type[R]) -> list[R]:
    """Read a JSON-Lines artifact back into records of the given type."""
    p = Path(path)
    out: list[R] = []
    try:
        with open(p, encoding="utf-8") as f:
            for line_no, line in enumerate(f):
                if not line.strip():
                    continue
                try:
                    d = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ArtifactError(
                        f"{p}: malformed JSON on line {line_no + 1}: {e.msg}"
                    ) from e
                out.append(record_type.from_json_dict(d))  # type: ignore[attr-defined]
    except OSError as e:
        raise ArtifactError(f"cannot read artifact {p}: {e}") from e
    return out
