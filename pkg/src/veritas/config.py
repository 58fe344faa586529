"""Run configuration: one TOML file, env overrides, then flag overrides.

Precedence is flags > environment > file > defaults. Every run copies its
resolved configuration into the output directory so artifacts carry their
provenance.
"""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .gateway import DecodeConfig
from .index import DEFAULT_EMBED_MODEL

ENV_EMBED_URL = "VERITAS_EMBED_URL"
ENV_LLM_URL = "VERITAS_LLM_URL"


@dataclass(frozen=True)
class DatasetPaths:
    claims_file: str = ""
    knowledge_store_dir: str = ""


@dataclass(frozen=True)
class OutputPaths:
    dir: str = "out"
    index_dir: str = ""  # empty -> <dir>/indexes

    def resolved_index_dir(self) -> str:
        return self.index_dir or str(Path(self.dir) / "indexes")


@dataclass(frozen=True)
class EmbeddingSettings:
    url: str = "http://localhost:11434"
    model: str = DEFAULT_EMBED_MODEL
    doc_char_budget: int = 8000


@dataclass(frozen=True)
class GenerationSettings:
    url: str = "http://localhost:11434"
    question_model: str = "llama3"
    answer_model: str = "llama3"
    classification_model: str = "llama3"
    answer_doc_char_budget: int = 12000


@dataclass(frozen=True)
class EvalSettings:
    top_k: int = 3
    qa_threshold: float = 0.25
    dedupe_questions: bool = True


@dataclass(frozen=True)
class ConcurrencySettings:
    workers: int = 1
    max_in_flight: int = 4


@dataclass(frozen=True)
class PromptAssets:
    question_template: str = ""
    answer_template: str = ""
    classification_template: str = ""
    question_exemplars: str = ""
    classification_exemplars: str = ""


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetPaths = DatasetPaths()
    output: OutputPaths = OutputPaths()
    embedding: EmbeddingSettings = EmbeddingSettings()
    generation: GenerationSettings = GenerationSettings()
    decode_question: DecodeConfig = DecodeConfig(max_output_tokens=128)
    decode_answer: DecodeConfig = DecodeConfig(max_output_tokens=256)
    decode_classification: DecodeConfig = DecodeConfig(max_output_tokens=16)
    eval: EvalSettings = EvalSettings()
    concurrency: ConcurrencySettings = ConcurrencySettings()
    prompts: PromptAssets = PromptAssets()
    mock: bool = False
    mock_script: str = ""


def _build(cls, table: dict[str, Any], where: str):
    known = {f.name: f for f in fields(cls)}
    unknown = set(table) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys in [{where}]: {sorted(unknown)}")
    kwargs = {}
    for name, value in table.items():
        if name == "stop_sequences":
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"bad [{where}] section: {e}") from e


def load_config(path: str | os.PathLike) -> RunConfig:
    p = Path(path)
    try:
        with open(p, "rb") as f:
            doc = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config {p} is not valid TOML: {e}") from e
    return config_from_dict(doc, str(p))


def config_from_dict(doc: dict[str, Any], where: str = "<dict>") -> RunConfig:
    decode = doc.get("decode", {})
    if not isinstance(decode, dict):
        raise ConfigError(f"{where}: [decode] must be a table")
    known_top = {
        "dataset", "output", "embedding", "generation", "decode",
        "eval", "concurrency", "prompts", "mock", "mock_script",
    }
    unknown = set(doc) - known_top
    if unknown:
        raise ConfigError(f"{where}: unknown top-level config keys: {sorted(unknown)}")
    unknown_decode = set(decode) - {"question", "answer", "classification"}
    if unknown_decode:
        raise ConfigError(f"{where}: unknown [decode] tables: {sorted(unknown_decode)}")
    return RunConfig(
        dataset=_build(DatasetPaths, doc.get("dataset", {}), "dataset"),
        output=_build(OutputPaths, doc.get("output", {}), "output"),
        embedding=_build(EmbeddingSettings, doc.get("embedding", {}), "embedding"),
        generation=_build(GenerationSettings, doc.get("generation", {}), "generation"),
        decode_question=_build(
            DecodeConfig,
            {"max_output_tokens": 128, **decode.get("question", {})},
            "decode.question",
        ),
        decode_answer=_build(
            DecodeConfig,
            {"max_output_tokens": 256, **decode.get("answer", {})},
            "decode.answer",
        ),
        decode_classification=_build(
            DecodeConfig,
            {"max_output_tokens": 16, **decode.get("classification", {})},
            "decode.classification",
        ),
        eval=_build(EvalSettings, doc.get("eval", {}), "eval"),
        concurrency=_build(ConcurrencySettings, doc.get("concurrency", {}), "concurrency"),
        prompts=_build(PromptAssets, doc.get("prompts", {}), "prompts"),
        mock=bool(doc.get("mock", False)),
        mock_script=str(doc.get("mock_script", "")),
    )


def apply_env(config: RunConfig, env: dict[str, str] | None = None) -> RunConfig:
    env = os.environ if env is None else env
    if env.get(ENV_EMBED_URL):
        config = replace(config, embedding=replace(config.embedding, url=env[ENV_EMBED_URL]))
    if env.get(ENV_LLM_URL):
        config = replace(config, generation=replace(config.generation, url=env[ENV_LLM_URL]))
    return config


def validate_dataset_paths(config: RunConfig) -> None:
    if not config.dataset.claims_file:
        raise ConfigError("dataset.claims_file is required")
    if not Path(config.dataset.claims_file).is_file():
        raise ConfigError(f"claims file not found: {config.dataset.claims_file}")
    if not config.dataset.knowledge_store_dir:
        raise ConfigError("dataset.knowledge_store_dir is required")
    if not Path(config.dataset.knowledge_store_dir).is_dir():
        raise ConfigError(
            f"knowledge store dir not found: {config.dataset.knowledge_store_dir}"
        )


def validate_values(config: RunConfig) -> None:
    if config.eval.top_k < 1:
        raise ConfigError("eval.top_k must be >= 1")
    if not 0 <= config.eval.qa_threshold <= 1:
        raise ConfigError("eval.qa_threshold must be in [0, 1]")
    if config.concurrency.workers < 1:
        raise ConfigError("concurrency.workers must be >= 1")
    if config.concurrency.max_in_flight < 1:
        raise ConfigError("concurrency.max_in_flight must be >= 1")
    if config.embedding.doc_char_budget < 1:
        raise ConfigError("embedding.doc_char_budget must be >= 1")
    if config.generation.answer_doc_char_budget < 1:
        raise ConfigError("generation.answer_doc_char_budget must be >= 1")
    for name in (
        "question_template", "answer_template", "classification_template",
        "question_exemplars", "classification_exemplars",
    ):
        p = getattr(config.prompts, name)
        if p and not Path(p).is_file():
            raise ConfigError(f"prompts.{name} not found: {p}")
    if config.mock_script and not Path(config.mock_script).is_file():
        raise ConfigError(f"mock_script not found: {config.mock_script}")


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    escaped = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def resolved_toml(config: RunConfig) -> str:
    """Serialize the effective configuration back to TOML text."""

    def section(name: str, obj) -> list[str]:
        lines = [f"[{name}]"]
        for f in fields(obj):
            value = getattr(obj, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {_toml_value(value)}")
        lines.append("")
        return lines

    out: list[str] = []
    out.append(f"mock = {_toml_value(config.mock)}")
    out.append(f"mock_script = {_toml_value(config.mock_script)}")
    out.append("")
    out += section("dataset", config.dataset)
    out += section("output", config.output)
    out += section("embedding", config.embedding)
    out += section("generation", config.generation)
    out += section("decode.question", config.decode_question)
    out += section("decode.answer", config.decode_answer)
    out += section("decode.classification", config.decode_classification)
    out += section("eval", config.eval)
    out += section("concurrency", config.concurrency)
    out += section("prompts", config.prompts)
    return "\n".join(out)
