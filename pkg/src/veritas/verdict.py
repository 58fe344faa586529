"""Few-shot verdict classification over extracted evidence."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from typing import Any

from .corpus import ClaimRecord
from .errors import UnparseableVerdictError, ValidationError
from .evidence import EvidenceSet, SourcedAnswer
from .gateway import DecodeConfig, PromptRequest, complete
from .labels import VerdictLabel
from .templates import load_asset_text, render_template

log = logging.getLogger(__name__)

CLASSIFY_DECODE = DecodeConfig(max_output_tokens=16)

NO_EVIDENCE_MARKER = "[no evidence extracted]"

_CLARIFY = "Answer with exactly one of the four class names."

# Longest aliases first so e.g. the full conflicting-evidence phrase wins over
# its "conflicting" substring; matches bind on word boundaries.
_ALIASES: tuple[tuple[str, VerdictLabel], ...] = (
    ("conflicting evidence/cherrypicking", VerdictLabel.CONFLICTING_EVIDENCE),
    ("conflicting evidence/cherry-picking", VerdictLabel.CONFLICTING_EVIDENCE),
    ("not enough evidence", VerdictLabel.NOT_ENOUGH_EVIDENCE),
    ("not enough info", VerdictLabel.NOT_ENOUGH_EVIDENCE),
    ("cherry-picking", VerdictLabel.CONFLICTING_EVIDENCE),
    ("cherrypicking", VerdictLabel.CONFLICTING_EVIDENCE),
    ("conflicting", VerdictLabel.CONFLICTING_EVIDENCE),
    ("supported", VerdictLabel.SUPPORTED),
    ("support", VerdictLabel.SUPPORTED),
    ("refuted", VerdictLabel.REFUTED),
    ("refute", VerdictLabel.REFUTED),
)

_ALIAS_BY_TEXT = {a: label for a, label in _ALIASES}
_ALIAS_RE = re.compile(
    r"\b(?:" + "|".join(re.escape(a) for a, _ in _ALIASES) + r")\b",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class FewShotExemplar:
    claim: str
    statements: tuple[str, ...]
    label: VerdictLabel

    def __post_init__(self):
        if not self.statements:
            raise ValidationError("exemplar statements must be non-empty")


@dataclass(frozen=True)
class VerdictPrediction:
    claim_id: int
    label: VerdictLabel
    raw_output: str
    evidence: EvidenceSet
    retries: int = 0

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "label": self.label.display,
            "raw_output": self.raw_output,
            "question": self.evidence.question,
            "answers": [
                {"text": a.text, "doc_id": a.doc_id, "rank": a.retrieval_rank}
                for a in self.evidence.answers
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "VerdictPrediction":
        from .labels import normalize_label

        evidence = EvidenceSet(
            claim_id=d["claim_id"],
            question=d["question"],
            answers=tuple(
                SourcedAnswer(text=a["text"], doc_id=a["doc_id"], retrieval_rank=a["rank"])
                for a in d["answers"]
            ),
        )
        return cls(
            claim_id=d["claim_id"],
            label=normalize_label(d["label"]),
            raw_output=d["raw_output"],
            evidence=evidence,
        )


def load_classification_exemplars(path: str | None = None) -> tuple[FewShotExemplar, ...]:
    if path is None:
        raw = load_asset_text("classification_exemplars.json")
    else:
        with open(path, encoding="utf-8") as f:
            raw = f.read()
    from .labels import normalize_label

    return tuple(
        FewShotExemplar(
            claim=e["claim"],
            statements=tuple(e["statements"]),
            label=normalize_label(e["label"]),
        )
        for e in json.loads(raw)
    )


def _statements_block(statements: tuple[str, ...]) -> str:
    if not statements:
        return NO_EVIDENCE_MARKER
    return json.dumps(list(statements), ensure_ascii=False)


def _exemplar_block(exemplars: tuple[FewShotExemplar, ...]) -> str:
    lines = []
    for ex in exemplars:
        lines.append(f"Claim: {ex.claim}")
        lines.append(f"Statements: {_statements_block(ex.statements)}")
        lines.append(f"Class: {ex.label.display}")
    return "\n".join(lines)


def build_classification_prompt(
    claim: str,
    statements: tuple[str, ...] | list[str],
    exemplars: tuple[FewShotExemplar, ...],
    *,
    model: str = "default",
    decode: DecodeConfig = CLASSIFY_DECODE,
    template: str | None = None,
) -> PromptRequest:
    if len({ex.label for ex in exemplars}) < 2:
        raise ValidationError("exemplars must cover at least two distinct labels")
    tpl = (
        template if template is not None else load_asset_text("classification_prompt.txt")
    )
    text = render_template(
        tpl,
        {
            "exemplars": _exemplar_block(tuple(exemplars)),
            "claim": claim,
            "statements": _statements_block(tuple(statements)),
        },
    ).rstrip("\n")
    return PromptRequest(user_text=text, model=model, decode=decode)


def parse_label(raw: str) -> VerdictLabel:
    """First recognizable class name in reading order; error when none."""
    match = _ALIAS_RE.search(raw)
    if match is None:
        raise UnparseableVerdictError(f"no class name found in {raw!r}")
    return _ALIAS_BY_TEXT[match.group(0).lower()]


def classify(
    claim: ClaimRecord,
    evidence: EvidenceSet,
    llm,
    exemplars: tuple[FewShotExemplar, ...] | None = None,
    *,
    model: str = "default",
    decode: DecodeConfig = CLASSIFY_DECODE,
    template: str | None = None,
) -> VerdictPrediction:
    """One completion, parsed; one clarifying retry; then the safe fallback."""
    if evidence.claim_id != claim.claim_id:
        raise ValidationError(
            f"evidence for claim {evidence.claim_id} used with claim {claim.claim_id}"
        )
    exemplars = (
        exemplars if exemplars is not None else load_classification_exemplars()
    )
    statements = tuple(a.text for a in evidence.answers)
    request = build_classification_prompt(
        claim.text, statements, exemplars, model=model, decode=decode, template=template
    )
    result = complete(llm, request)
    retries = 0
    try:
        label = parse_label(result.text)
    except UnparseableVerdictError:
        retry_request = replace(request, user_text=request.user_text + "\n" + _CLARIFY)
        result = complete(llm, retry_request)
        retries = 1
        try:
            label = parse_label(result.text)
        except UnparseableVerdictError:
            log.warning(
                "claim %d: unparseable verdict after retry, falling back: %r",
                claim.claim_id,
                result.text,
            )
            label = VerdictLabel.NOT_ENOUGH_EVIDENCE
    return VerdictPrediction(
        claim_id=claim.claim_id,
        label=label,
        raw_output=result.text,
        evidence=evidence,
        retries=retries,
    )
