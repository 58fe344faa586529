"""Batch fact verification with retrieval, LLM evidence extraction, and
few-shot verdict classification, plus the alignment-based evaluation harness.
"""

from .assignment import hungarian
from .corpus import (
    ClaimRecord,
    Document,
    GoldQA,
    load_artifacts,
    load_claims,
    load_knowledge_store,
    save_artifacts,
    validate_dataset,
)
from .errors import VeritasError, ValidationError
from .evidence import EvidenceSet, SourcedAnswer, extract_evidence
from .gateway import (
    CompletionResult,
    DecodeConfig,
    MockLLMProvider,
    OllamaGenerationProvider,
    PromptRequest,
    complete,
)
from .index import (
    EmbeddingVector,
    HashEmbeddingProvider,
    OllamaEmbeddingProvider,
    RetrievalHit,
    VectorIndex,
    build_index,
    embed_texts,
    load_index,
    retrieve_for_claim,
    save_index,
    search,
)
from .labels import LABEL_ORDER, VerdictLabel, normalize_label
from .meteor import Alignment, MeteorParams, align_unigrams, meteor, tokenize
from .porter import porter_stem
from .scoring import (
    EvalConfig,
    RunReport,
    averitec_score,
    build_run_report,
    classification_report,
    hungarian_meteor,
    score_claim,
)
from .verdict import FewShotExemplar, VerdictPrediction, classify, parse_label

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "ClaimRecord",
    "CompletionResult",
    "DecodeConfig",
    "Document",
    "EmbeddingVector",
    "EvalConfig",
    "EvidenceSet",
    "FewShotExemplar",
    "GoldQA",
    "HashEmbeddingProvider",
    "LABEL_ORDER",
    "MeteorParams",
    "MockLLMProvider",
    "OllamaEmbeddingProvider",
    "OllamaGenerationProvider",
    "PromptRequest",
    "RetrievalHit",
    "RunReport",
    "SourcedAnswer",
    "ValidationError",
    "VectorIndex",
    "VerdictLabel",
    "VerdictPrediction",
    "VeritasError",
    "align_unigrams",
    "averitec_score",
    "build_index",
    "build_run_report",
    "classification_report",
    "classify",
    "complete",
    "embed_texts",
    "extract_evidence",
    "hungarian",
    "hungarian_meteor",
    "load_artifacts",
    "load_claims",
    "load_index",
    "load_knowledge_store",
    "meteor",
    "normalize_label",
    "parse_label",
    "porter_stem",
    "retrieve_for_claim",
    "save_artifacts",
    "save_index",
    "score_claim",
    "search",
    "tokenize",
    "validate_dataset",
]
