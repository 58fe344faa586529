"""Command-line entry point: index, run, evaluate, report.

Artifacts are JSON-Lines written by a single writer in claim order, so a run
with any worker count produces byte-identical files and an interrupted run
resumes by skipping claim_ids already present in predictions.jsonl.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import (
    RunConfig,
    apply_env,
    load_config,
    resolved_toml,
    validate_dataset_paths,
    validate_values,
)
from .corpus import jsonl_line, load_artifacts, load_claims, load_knowledge_store
from .errors import ConfigError, StageError, ValidationError, VeritasError
from .evidence import (
    EvidenceSettings,
    StageFailure,
    extract_evidence,
    load_question_exemplars,
)
from .gateway import MockLLMProvider, OllamaGenerationProvider, load_mock_script
from .index import (
    HashEmbeddingProvider,
    OllamaEmbeddingProvider,
    build_index,
    load_index,
    save_index,
)
from .scoring import EvalConfig, RunReport, build_run_report, headline, render_report_text
from .verdict import VerdictPrediction, classify, load_classification_exemplars

log = logging.getLogger(__name__)


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps(
            {
                "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S"),
                "level": record.levelname,
                "logger": record.name,
                "msg": record.getMessage(),
            },
            ensure_ascii=False,
        )


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _embed_provider(config: RunConfig):
    if config.mock:
        return HashEmbeddingProvider()
    return OllamaEmbeddingProvider(
        config.embedding.url,
        config.embedding.model,
        max_in_flight=config.concurrency.max_in_flight,
    )


def _llm_provider(config: RunConfig):
    if config.mock:
        if not config.mock_script:
            raise ConfigError("mock runs need mock_script (or --mock-script)")
        return MockLLMProvider(load_mock_script(config.mock_script))
    return OllamaGenerationProvider(
        config.generation.url, max_in_flight=config.concurrency.max_in_flight
    )


def _fingerprint_model(fingerprint: str) -> str:
    return fingerprint.rsplit(":", 1)[0]


def _template_text(path: str) -> str | None:
    if not path:
        return None
    return Path(path).read_text(encoding="utf-8")


def _index_path(config: RunConfig, claim_id: int) -> Path:
    return Path(config.output.resolved_index_dir()) / f"{claim_id}.index.json"


def cmd_index(config: RunConfig) -> int:
    validate_values(config)
    validate_dataset_paths(config)
    claims = load_claims(config.dataset.claims_file)
    provider = _embed_provider(config)
    index_dir = Path(config.output.resolved_index_dir())
    index_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    built = 0
    skipped = 0
    for claim in claims:
        target = _index_path(config, claim.claim_id)
        if target.exists():
            try:
                existing = load_index(target)
                if _fingerprint_model(existing.provider_fingerprint) == provider.model:
                    skipped += 1
                    continue
                log.info(
                    "claim %d: index fingerprint %s does not match model %s, rebuilding",
                    claim.claim_id,
                    existing.provider_fingerprint,
                    provider.model,
                )
            except VeritasError as e:
                log.warning("claim %d: unreadable index, rebuilding: %s", claim.claim_id, e)
        try:
            docs = load_knowledge_store(config.dataset.knowledge_store_dir, claim.claim_id)
            index = build_index(docs, provider, max_chars=config.embedding.doc_char_budget)
            save_index(index, target)
            built += 1
        except VeritasError as e:
            log.error("claim %d: index build failed: %s", claim.claim_id, e)
            failures += 1
    log.info("index: %d built, %d skipped, %d failed", built, skipped, failures)
    return 1 if failures else 0


def _good_lines(path: Path) -> list[tuple[int, str]]:
    """Parseable (claim_id, line) pairs; a torn tail line ends the file."""
    if not path.exists():
        return []
    out: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            try:
                out.append((json.loads(stripped)["claim_id"], stripped))
            except (ValueError, KeyError):
                break
    return out


def _reconcile_artifacts(pred_path: Path, ev_path: Path) -> set[int]:
    """Drop torn tails and orphan evidence so a resume converges byte-exactly."""
    preds = _good_lines(pred_path)
    done = {claim_id for claim_id, _ in preds}
    if pred_path.exists():
        with open(pred_path, "w", encoding="utf-8", newline="\n") as f:
            for _, line in preds:
                f.write(line + "\n")
    evs = [(cid, line) for cid, line in _good_lines(ev_path) if cid in done]
    if ev_path.exists():
        with open(ev_path, "w", encoding="utf-8", newline="\n") as f:
            for _, line in evs:
                f.write(line + "\n")
    return done


def cmd_run(config: RunConfig) -> int:
    validate_values(config)
    validate_dataset_paths(config)
    out_dir = Path(config.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.toml").write_text(resolved_toml(config), encoding="utf-8")

    claims = load_claims(config.dataset.claims_file)
    pred_path = out_dir / "predictions.jsonl"
    ev_path = out_dir / "evidence.jsonl"
    err_path = out_dir / "errors.jsonl"
    done = _reconcile_artifacts(pred_path, ev_path)
    todo = [c for c in claims if c.claim_id not in done]
    if not todo:
        log.info("run: nothing to do, %d claims already predicted", len(done))
        return 0

    embed = _embed_provider(config)
    llm = _llm_provider(config)
    question_exemplars = load_question_exemplars(config.prompts.question_exemplars or None)
    classification_exemplars = load_classification_exemplars(
        config.prompts.classification_exemplars or None
    )
    settings = EvidenceSettings(
        question_model=config.generation.question_model,
        answer_model=config.generation.answer_model,
        question_decode=config.decode_question,
        answer_decode=config.decode_answer,
        question_template=_template_text(config.prompts.question_template),
        answer_template=_template_text(config.prompts.answer_template),
        exemplars=question_exemplars,
        answer_doc_char_budget=config.generation.answer_doc_char_budget,
    )
    classification_template = _template_text(config.prompts.classification_template)

    def work(claim):
        try:
            index = load_index(_index_path(config, claim.claim_id))
            if _fingerprint_model(index.provider_fingerprint) != embed.model:
                raise ValidationError(
                    f"index fingerprint {index.provider_fingerprint} does not match "
                    f"embedding model {embed.model}; re-run index"
                )
            docs = load_knowledge_store(config.dataset.knowledge_store_dir, claim.claim_id)
            evidence, stage_failures = extract_evidence(
                claim,
                index,
                embed,
                llm,
                docs,
                k=config.eval.top_k,
                settings=settings,
                embed_max_chars=config.embedding.doc_char_budget,
            )
            prediction = classify(
                claim,
                evidence,
                llm,
                classification_exemplars,
                model=config.generation.classification_model,
                decode=config.decode_classification,
                template=classification_template,
            )
            return evidence, prediction, stage_failures
        except StageError as e:
            return None, None, [
                StageFailure(claim.claim_id, e.stage, str(e), doc_id=e.doc_id)
            ]
        except VeritasError as e:
            return None, None, [StageFailure(claim.claim_id, "pipeline", str(e))]

    had_failures = False
    predicted = 0
    with open(pred_path, "a", encoding="utf-8", newline="\n") as pf, open(
        ev_path, "a", encoding="utf-8", newline="\n"
    ) as evf, open(err_path, "a", encoding="utf-8", newline="\n") as ef:
        with ThreadPoolExecutor(max_workers=config.concurrency.workers) as pool:
            futures = [pool.submit(work, claim) for claim in todo]
            # consume in submission (claim_id) order: byte-deterministic artifacts
            for claim, future in zip(todo, futures):
                evidence, prediction, stage_failures = future.result()
                for failure in stage_failures:
                    had_failures = True
                    log.warning("recorded failure: %s", failure.message)
                    ef.write(jsonl_line(failure.to_json_dict()) + "\n")
                    ef.flush()
                if prediction is not None:
                    evf.write(jsonl_line(evidence.to_json_dict()) + "\n")
                    evf.flush()
                    pf.write(jsonl_line(prediction.to_json_dict()) + "\n")
                    pf.flush()
                    predicted += 1
    log.info(
        "run: %d predicted, %d skipped as done, failures=%s",
        predicted,
        len(done),
        had_failures,
    )
    return 1 if had_failures else 0


def cmd_evaluate(
    pred_path: str,
    gold_path: str,
    config: RunConfig,
    out_dir: str | None = None,
    per_claim_csv: str | None = None,
) -> int:
    validate_values(config)
    golds = {c.claim_id: c for c in load_claims(gold_path)}
    predictions = load_artifacts(pred_path, VerdictPrediction)
    unknown = sorted({p.claim_id for p in predictions} - set(golds))
    if unknown:
        raise ValidationError(f"predictions reference unknown claim_ids: {unknown}")
    eval_config = EvalConfig(
        qa_threshold=config.eval.qa_threshold,
        top_k=config.eval.top_k,
        dedupe_questions=config.eval.dedupe_questions,
    )
    report = build_run_report(predictions, golds, eval_config)
    target = Path(out_dir) if out_dir else Path(pred_path).parent
    target.mkdir(parents=True, exist_ok=True)
    (target / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (target / "report.txt").write_text(render_report_text(report), encoding="utf-8")
    if per_claim_csv:
        with open(per_claim_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["claim_id", "q_only", "q_plus_a", "label_correct", "counted"])
            for row in report.per_claim:
                writer.writerow(
                    [row.claim_id, row.q_only, row.q_plus_a, row.label_correct, row.counted]
                )
    print(headline(report))
    return 0


def cmd_report(in_path: str, out_path: str | None = None) -> int:
    with open(in_path, encoding="utf-8") as f:
        report = RunReport.from_json_dict(json.load(f))
    text = render_report_text(report)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _apply_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "claims", None):
        config = replace(config, dataset=replace(config.dataset, claims_file=args.claims))
    if getattr(args, "knowledge_store", None):
        config = replace(
            config, dataset=replace(config.dataset, knowledge_store_dir=args.knowledge_store)
        )
    if getattr(args, "out", None):
        config = replace(config, output=replace(config.output, dir=args.out, index_dir=""))
    if getattr(args, "workers", None):
        config = replace(
            config, concurrency=replace(config.concurrency, workers=args.workers)
        )
    if getattr(args, "mock_script", None):
        config = replace(config, mock=True, mock_script=args.mock_script)
    if getattr(args, "mock", False):
        config = replace(config, mock=True)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veritas",
        description="Batch fact verification: retrieval, evidence extraction, verdicts, scoring.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build per-claim vector indexes")
    p_run = sub.add_parser("run", help="retrieve, extract evidence, classify")
    for p in (p_index, p_run):
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--claims", help="override dataset.claims_file")
        p.add_argument("--knowledge-store", dest="knowledge_store", help="override store dir")
        p.add_argument("--out", help="override output.dir")
        p.add_argument("--mock", action="store_true", help="offline providers")
    p_run.add_argument("--mock-script", dest="mock_script", help="scripted completions JSON")
    p_run.add_argument("--workers", type=int, help="claim-level parallelism")

    p_eval = sub.add_parser("evaluate", help="score predictions against gold")
    p_eval.add_argument("--pred", required=True, help="predictions.jsonl path")
    p_eval.add_argument("--gold", required=True, help="gold claims JSON path")
    p_eval.add_argument("--config", help="TOML config (eval settings)")
    p_eval.add_argument("--out", help="report output dir (default: beside --pred)")
    p_eval.add_argument("--per-claim-csv", dest="per_claim_csv", help="CSV of per-claim rows")

    p_report = sub.add_parser("report", help="re-render text tables from report.json")
    p_report.add_argument("--in", dest="in_path", required=True, help="report.json path")
    p_report.add_argument("--out", dest="out_path", help="write text report here too")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        if args.command in ("index", "run"):
            config = _apply_flags(apply_env(load_config(args.config)), args)
            if args.command == "index":
                return cmd_index(config)
            return cmd_run(config)
        if args.command == "evaluate":
            config = apply_env(load_config(args.config)) if args.config else apply_env(RunConfig())
            return cmd_evaluate(
                args.pred, args.gold, config, out_dir=args.out, per_claim_csv=args.per_claim_csv
            )
        if args.command == "report":
            return cmd_report(args.in_path, args.out_path)
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, ValidationError) as e:
        log.error("%s", e)
        return 2
    except VeritasError as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
