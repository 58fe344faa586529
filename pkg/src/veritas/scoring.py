"""Evidence and verdict scoring.

Questions and answers are compared to gold by the alignment metric under an
optimal assignment: the pairwise score matrix between generated and reference
strings is solved by the Hungarian algorithm (maximizing) and the assigned
total is normalized by the reference count. A claim only earns verdict credit
when its Q+A evidence score clears the threshold.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .assignment import hungarian
from .corpus import ClaimRecord
from .errors import ValidationError
from .labels import LABEL_ORDER, VerdictLabel, normalize_label
from .meteor import DEFAULT_METEOR_PARAMS, MeteorParams, meteor
from .verdict import VerdictPrediction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalConfig:
    qa_threshold: float = 0.25
    top_k: int = 3
    dedupe_questions: bool = True
    meteor_params: MeteorParams = field(default_factory=MeteorParams)

    def __post_init__(self):
        if not 0 <= self.qa_threshold <= 1:
            raise ValidationError("qa_threshold must be in [0, 1]")
        if self.top_k < 1:
            raise ValidationError("top_k must be >= 1")


def hungarian_meteor(
    generated: Sequence[str],
    references: Sequence[str],
    params: MeteorParams = DEFAULT_METEOR_PARAMS,
) -> float:
    """Optimal-assignment METEOR total over references; empty generated -> 0."""
    if not references:
        raise ValidationError("references must be non-empty")
    if not generated:
        return 0.0
    matrix = [[meteor(g, r, params) for r in references] for g in generated]
    pairs = hungarian(matrix, maximize=True)
    total = 0.0
    for r, c in pairs:
        total += matrix[r][c]
    return total / len(references)


@dataclass(frozen=True)
class PerClaimScore:
    claim_id: int
    q_only: float
    q_plus_a: float
    label_correct: bool
    counted: bool


def evidence_counted(q_plus_a: float, config: EvalConfig) -> bool:
    """Inclusive threshold: a score exactly at lambda still counts."""
    return q_plus_a >= config.qa_threshold


def score_claim(
    prediction: VerdictPrediction,
    gold: ClaimRecord,
    config: EvalConfig = EvalConfig(),
) -> PerClaimScore | None:
    """Score one claim against gold; None when gold can't support scoring."""
    if gold.gold_label is None:
        log.warning("claim %d has no gold label; excluded from scoring", gold.claim_id)
        return None
    if not gold.gold_evidence:
        log.warning("claim %d has no gold evidence; excluded from scoring", gold.claim_id)
        return None
    question = prediction.evidence.question
    answers = [a.text for a in prediction.evidence.answers]
    if config.dedupe_questions:
        generated_q = [question]
    else:
        generated_q = [question] * max(1, len(answers))
    generated_qa = [f"{question} {a}" for a in answers]
    ref_q = [qa.question for qa in gold.gold_evidence]
    ref_qa = [
        f"{qa.question} {answer}" for qa in gold.gold_evidence for answer in qa.answers
    ]
    q_only = hungarian_meteor(generated_q, ref_q, config.meteor_params)
    q_plus_a = hungarian_meteor(generated_qa, ref_qa, config.meteor_params)
    return PerClaimScore(
        claim_id=prediction.claim_id,
        q_only=q_only,
        q_plus_a=q_plus_a,
        label_correct=prediction.label == gold.gold_label,
        counted=evidence_counted(q_plus_a, config),
    )


def averitec_score(per_claim: Sequence[PerClaimScore], config: EvalConfig = EvalConfig()) -> float:
    """Fraction of claims with a correct label AND counted evidence."""
    if not per_claim:
        raise ValidationError("cannot score zero claims")
    hits = sum(1 for row in per_claim if row.counted and row.label_correct)
    return hits / len(per_claim)


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    per_class_f1: dict[VerdictLabel, float]
    macro_f1: float
    confusion: list[list[int]]  # rows = gold, cols = predicted, order S R N C


def classification_report(
    predictions: Sequence[VerdictLabel], golds: Sequence[VerdictLabel]
) -> ClassificationReport:
    if len(predictions) != len(golds):
        raise ValidationError(
            f"{len(predictions)} predictions vs {len(golds)} golds"
        )
    if not golds:
        raise ValidationError("cannot report on zero claims")
    idx = {label: i for i, label in enumerate(LABEL_ORDER)}
    confusion = [[0] * len(LABEL_ORDER) for _ in LABEL_ORDER]
    for pred, gold in zip(predictions, golds):
        confusion[idx[gold]][idx[pred]] += 1
    correct = sum(confusion[i][i] for i in range(len(LABEL_ORDER)))
    accuracy = correct / len(golds)
    per_class_f1: dict[VerdictLabel, float] = {}
    for label in LABEL_ORDER:
        i = idx[label]
        tp = confusion[i][i]
        fp = sum(confusion[r][i] for r in range(len(LABEL_ORDER))) - tp
        fn = sum(confusion[i]) - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_class_f1[label] = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    macro_f1 = sum(per_class_f1.values()) / len(LABEL_ORDER)
    return ClassificationReport(
        accuracy=accuracy,
        per_class_f1=per_class_f1,
        macro_f1=macro_f1,
        confusion=confusion,
    )


@dataclass(frozen=True)
class RunReport:
    q_only: float
    q_plus_a: float
    averitec: float
    accuracy: float
    per_class_f1: dict[VerdictLabel, float]
    macro_f1: float
    confusion: list[list[int]]
    per_claim: list[PerClaimScore]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "q_only": self.q_only,
            "q_plus_a": self.q_plus_a,
            "averitec": self.averitec,
            "accuracy": self.accuracy,
            "per_class_f1": {
                label.display: self.per_class_f1[label] for label in LABEL_ORDER
            },
            "macro_f1": self.macro_f1,
            "class_order": [label.display for label in LABEL_ORDER],
            "confusion": self.confusion,
            "per_claim": [
                {
                    "claim_id": row.claim_id,
                    "q_only": row.q_only,
                    "q_plus_a": row.q_plus_a,
                    "label_correct": row.label_correct,
                    "counted": row.counted,
                }
                for row in self.per_claim
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> "RunReport":
        return cls(
            q_only=d["q_only"],
            q_plus_a=d["q_plus_a"],
            averitec=d["averitec"],
            accuracy=d["accuracy"],
            per_class_f1={
                normalize_label(name): value for name, value in d["per_class_f1"].items()
            },
            macro_f1=d["macro_f1"],
            confusion=[list(row) for row in d["confusion"]],
            per_claim=[
                PerClaimScore(
                    claim_id=row["claim_id"],
                    q_only=row["q_only"],
                    q_plus_a=row["q_plus_a"],
                    label_correct=row["label_correct"],
                    counted=row["counted"],
                )
                for row in d["per_claim"]
            ],
        )


def build_run_report(
    predictions: Iterable[VerdictPrediction],
    golds: Mapping[int, ClaimRecord],
    config: EvalConfig = EvalConfig(),
) -> RunReport:
    """Score a prediction set against gold claims keyed by claim_id."""
    rows: list[PerClaimScore] = []
    pred_labels: list[VerdictLabel] = []
    gold_labels: list[VerdictLabel] = []
    for prediction in predictions:
        if prediction.claim_id not in golds:
            raise ValidationError(f"prediction for unknown claim_id {prediction.claim_id}")
        gold = golds[prediction.claim_id]
        row = score_claim(prediction, gold, config)
        if row is None:
            continue
        rows.append(row)
        pred_labels.append(prediction.label)
        gold_labels.append(gold.gold_label)
    if not rows:
        raise ValidationError("no scorable claims (missing gold labels or evidence)")
    report = classification_report(pred_labels, gold_labels)
    return RunReport(
        q_only=sum(r.q_only for r in rows) / len(rows),
        q_plus_a=sum(r.q_plus_a for r in rows) / len(rows),
        averitec=averitec_score(rows, config),
        accuracy=report.accuracy,
        per_class_f1=report.per_class_f1,
        macro_f1=report.macro_f1,
        confusion=report.confusion,
        per_claim=rows,
    )


def headline(report: RunReport) -> str:
    return (
        f"Q: {report.q_only:.2f}  Q+A: {report.q_plus_a:.2f}  "
        f"Averitec: {report.averitec:.2f}"
    )


def render_report_text(report: RunReport) -> str:
    """Aligned plain-text tables plus an ASCII confusion matrix."""
    lines = []
    lines.append("Evidence and verdict scores")
    lines.append("---------------------------")
    for name, value in (
        ("Q only", report.q_only),
        ("Q + A", report.q_plus_a),
        ("Averitec", report.averitec),
        ("Accuracy", report.accuracy),
    ):
        lines.append(f"{name:<10} {value:.4f}")
    lines.append("")
    lines.append("Per-class F1")
    lines.append("------------")
    for label in LABEL_ORDER:
        lines.append(f"{label.display:<36} {report.per_class_f1[label]:.4f}")
    lines.append(f"{'Macro F1':<36} {report.macro_f1:.4f}")
    lines.append("")
    lines.append("Confusion matrix (rows = gold, columns = predicted)")
    shorts = [label.short for label in LABEL_ORDER]
    width = max(5, max(len(str(n)) for row in report.confusion for n in row) + 1)
    lines.append("     " + "".join(f"{s:>{width}}" for s in shorts))
    for label, row in zip(LABEL_ORDER, report.confusion):
        lines.append(f"{label.short:<5}" + "".join(f"{n:>{width}}" for n in row))
    lines.append("")
    lines.append(f"Scored claims: {len(report.per_claim)}")
    return "\n".join(lines) + "\n"
