"""Evidence extraction: claim -> challenging question -> per-document answers.

One question is generated per claim and reused against each retrieved
document. Answer-stage failures degrade gracefully (the claim keeps its
remaining answers); a question-stage failure aborts the claim.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any

from .corpus import ClaimRecord, Document
from .errors import EmptyCompletionError, StageError, ValidationError, VeritasError
from .gateway import CompletionResult, DecodeConfig, PromptRequest, complete
from .index import EmbeddingProvider, VectorIndex, retrieve_for_claim
from .templates import load_asset_text, render_template

log = logging.getLogger(__name__)

QUESTION_DECODE = DecodeConfig(max_output_tokens=128)
ANSWER_DECODE = DecodeConfig(max_output_tokens=256)

_QUOTE_PAIRS = {('"', '"'), ("“", "”")}


def strip_wrapping_quotes(text: str) -> str:
    """Drop surrounding whitespace and one matched pair of double quotes."""
    s = text.strip()
    if len(s) >= 2 and (s[0], s[-1]) in _QUOTE_PAIRS:
        s = s[1:-1].strip()
    return s


@dataclass(frozen=True)
class SourcedAnswer:
    text: str
    doc_id: str
    retrieval_rank: int

    def __post_init__(self):
        if not self.text:
            raise ValidationError("answer text must be non-empty")
        if self.retrieval_rank < 1:
            raise ValidationError("retrieval_rank is 1-based")


@dataclass(frozen=True)
class EvidenceSet:
    claim_id: int
    question: str
    answers: tuple[SourcedAnswer, ...]

    def __post_init__(self):
        if not self.question:
            raise ValidationError("question must be non-empty")
        ranks = [a.retrieval_rank for a in self.answers]
        if ranks != sorted(ranks) or len(set(ranks)) != len(ranks):
            raise ValidationError("answers must be ordered by distinct retrieval rank")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "question": self.question,
            "answers": [
                {"text": a.text, "doc_id": a.doc_id, "rank": a.retrieval_rank}
                for a in self.answers
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "EvidenceSet":
        return cls(
            claim_id=d["claim_id"],
            question=d["question"],
            answers=tuple(
                SourcedAnswer(text=a["text"], doc_id=a["doc_id"], retrieval_rank=a["rank"])
                for a in d["answers"]
            ),
        )


@dataclass(frozen=True)
class QuestionExemplar:
    claim: str
    incorrect_question: str
    correct_question: str


def load_question_exemplars(path: str | None = None) -> tuple[QuestionExemplar, ...]:
    if path is None:
        raw = load_asset_text("question_exemplars.json")
    else:
        with open(path, encoding="utf-8") as f:
            raw = f.read()
    data = json.loads(raw)
    return tuple(
        QuestionExemplar(
            claim=e["claim"],
            incorrect_question=e["incorrect_question"],
            correct_question=e["correct_question"],
        )
        for e in data
    )


@dataclass(frozen=True)
class EvidenceSettings:
    """Stage configuration for question and answer generation."""

    question_model: str = "default"
    answer_model: str = "default"
    question_decode: DecodeConfig = QUESTION_DECODE
    answer_decode: DecodeConfig = ANSWER_DECODE
    question_template: str | None = None  # None -> packaged asset
    answer_template: str | None = None
    exemplars: tuple[QuestionExemplar, ...] | None = None
    answer_doc_char_budget: int = 12000

    def __post_init__(self):
        if self.answer_doc_char_budget < 1:
            raise ValidationError("answer_doc_char_budget must be >= 1")


@dataclass(frozen=True)
class StageFailure:
    """One recoverable stage failure, kept for the errors artifact."""

    claim_id: int
    stage: str
    message: str
    doc_id: str | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "stage": self.stage,
            "doc_id": self.doc_id,
            "message": self.message,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "StageFailure":
        return cls(
            claim_id=d["claim_id"],
            stage=d["stage"],
            message=d["message"],
            doc_id=d.get("doc_id"),
        )


def _exemplar_block(exemplars: tuple[QuestionExemplar, ...]) -> str:
    lines = []
    for ex in exemplars:
        lines.append(f"Claim: {ex.claim}")
        lines.append(f'Incorrect Question: "{ex.incorrect_question}"')
        lines.append(f'Correct Question: "{ex.correct_question}"')
    return "\n".join(lines)


def build_question_prompt(
    claim: str,
    exemplars: tuple[QuestionExemplar, ...],
    *,
    model: str = "default",
    decode: DecodeConfig = QUESTION_DECODE,
    template: str | None = None,
) -> PromptRequest:
    if not exemplars:
        raise ValidationError("need at least one question exemplar")
    tpl = template if template is not None else load_asset_text("question_prompt.txt")
    text = render_template(
        tpl, {"exemplars": _exemplar_block(tuple(exemplars)), "claim": claim}
    ).rstrip("\n")
    return PromptRequest(user_text=text, model=model, decode=decode)


def generate_question(
    claim: ClaimRecord,
    llm,
    *,
    exemplars: tuple[QuestionExemplar, ...] | None = None,
    model: str = "default",
    decode: DecodeConfig = QUESTION_DECODE,
    template: str | None = None,
) -> str:
    exemplars = exemplars if exemplars is not None else load_question_exemplars()
    request = build_question_prompt(
        claim.text, exemplars, model=model, decode=decode, template=template
    )
    try:
        result = complete(llm, request)
    except EmptyCompletionError as e:
        raise StageError(claim.claim_id, "question", str(e)) from e
    question = strip_wrapping_quotes(result.text)
    if not question:
        raise StageError(claim.claim_id, "question", "empty question after normalization")
    if not question.endswith("?"):
        question += "?"
    return question


def build_answer_prompt(
    question: str,
    document_text: str,
    *,
    model: str = "default",
    decode: DecodeConfig = ANSWER_DECODE,
    template: str | None = None,
    max_chars: int = 12000,
) -> PromptRequest:
    if not question:
        raise ValidationError("question must be non-empty")
    if not document_text:
        raise ValidationError("document text must be non-empty")
    tpl = template if template is not None else load_asset_text("answer_prompt.txt")
    text = render_template(
        tpl, {"question": question, "document": document_text[:max_chars]}
    ).rstrip("\n")
    return PromptRequest(user_text=text, model=model, decode=decode)


def generate_answer(
    question: str,
    doc: Document,
    llm,
    *,
    rank: int,
    model: str = "default",
    decode: DecodeConfig = ANSWER_DECODE,
    template: str | None = None,
    max_chars: int = 12000,
) -> SourcedAnswer:
    request = build_answer_prompt(
        question, doc.text, model=model, decode=decode, template=template, max_chars=max_chars
    )
    try:
        result = complete(llm, request)
    except EmptyCompletionError as e:
        raise StageError(doc.claim_id, "answer", str(e), doc_id=doc.doc_id) from e
    text = strip_wrapping_quotes(result.text)
    if not text:
        raise StageError(
            doc.claim_id, "answer", "empty answer after normalization", doc_id=doc.doc_id
        )
    return SourcedAnswer(text=text, doc_id=doc.doc_id, retrieval_rank=rank)


def extract_evidence(
    claim: ClaimRecord,
    index: VectorIndex,
    embed_provider: EmbeddingProvider,
    llm,
    documents: list[Document],
    *,
    k: int = 3,
    settings: EvidenceSettings = EvidenceSettings(),
    embed_max_chars: int = 8000,
) -> tuple[EvidenceSet, list[StageFailure]]:
    """Retrieve, question, and answer one claim.

    Returns the evidence set plus any per-document failures. A question-stage
    failure raises StageError; with zero surviving answers the set is
    evidence-empty and the caller's classifier still runs.
    """
    retrieved = retrieve_for_claim(
        claim, index, embed_provider, documents, k=k, max_chars=embed_max_chars
    )
    exemplars = (
        settings.exemplars if settings.exemplars is not None else load_question_exemplars()
    )
    question = generate_question(
        claim,
        llm,
        exemplars=exemplars,
        model=settings.question_model,
        decode=settings.question_decode,
        template=settings.question_template,
    )
    answers: list[SourcedAnswer] = []
    failures: list[StageFailure] = []
    for rank, doc in enumerate(retrieved, start=1):
        try:
            answers.append(
                generate_answer(
                    question,
                    doc,
                    llm,
                    rank=rank,
                    model=settings.answer_model,
                    decode=settings.answer_decode,
                    template=settings.answer_template,
                    max_chars=settings.answer_doc_char_budget,
                )
            )
        except StageError as e:
            log.warning("%s", e)
            failures.append(
                StageFailure(
                    claim_id=claim.claim_id,
                    stage="answer",
                    message=str(e),
                    doc_id=doc.doc_id,
                )
            )
        except VeritasError as e:
            log.warning("claim %d answer[%s]: %s", claim.claim_id, doc.doc_id, e)
            failures.append(
                StageFailure(
                    claim_id=claim.claim_id,
                    stage="answer",
                    message=str(e),
                    doc_id=doc.doc_id,
                )
            )
    return (
        EvidenceSet(claim_id=claim.claim_id, question=question, answers=tuple(answers)),
        failures,
    )
