"""Exception hierarchy for the pipeline.

Everything raised on purpose derives from VeritasError so callers can catch
one type at the process boundary and map it to an exit code.
"""
from __future__ import annotations


class VeritasError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(VeritasError):
    """Bad arguments, malformed records, or violated invariants."""


class ConfigError(VeritasError):
    """Unusable run configuration (missing paths, unknown keys, bad values)."""


class ClaimsParseError(ValidationError):
    """Claims file is not valid JSON; carries the byte offset of the failure."""

    def __init__(self, path: str, byte_offset: int, detail: str):
        super().__init__(f"{path}: invalid JSON at byte {byte_offset}: {detail}")
        self.path = path
        self.byte_offset = byte_offset


class KnowledgeStoreNotFoundError(ValidationError):
    def __init__(self, claim_id: int, path: str):
        super().__init__(f"no knowledge store for claim {claim_id}: {path}")
        self.claim_id = claim_id
        self.path = path


class ArtifactError(ValidationError):
    """A JSON-Lines artifact could not be read or written."""


class ProviderError(VeritasError):
    """Base class for embedding/generation backend failures."""


class TransportError(ProviderError):
    """Network-level failure talking to a provider; retryable."""


class ProviderStatusError(ProviderError):
    """Provider answered with a non-2xx status."""

    def __init__(self, status_code: int, body_excerpt: str):
        super().__init__(f"provider returned HTTP {status_code}: {body_excerpt}")
        self.status_code = status_code
        self.body_excerpt = body_excerpt


class ProtocolError(ProviderError):
    """Provider answered 2xx but the payload shape was wrong."""


class EmptyCompletionError(ProviderError):
    """Provider returned an empty completion."""


class UnknownPromptError(ProviderError):
    """The scripted provider was asked something its script does not cover."""


class FingerprintMismatchError(ValidationError):
    """Stored index was built with a different embedding model or dimension."""

    def __init__(self, expected: str, found: str, path: str):
        super().__init__(
            f"index {path} was built with {found!r}, expected {expected!r}"
        )
        self.expected = expected
        self.found = found
        self.path = path


class StageError(VeritasError):
    """A pipeline stage failed for one claim; the run can continue."""

    def __init__(self, claim_id: int, stage: str, message: str, doc_id: str | None = None):
        where = f"{stage}" if doc_id is None else f"{stage}[{doc_id}]"
        super().__init__(f"claim {claim_id} {where}: {message}")
        self.claim_id = claim_id
        self.stage = stage
        self.doc_id = doc_id


class UnparseableVerdictError(VeritasError):
    """Classifier output contained no recognizable class name."""
