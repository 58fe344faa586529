import json
from pathlib import Path

import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Records one PASS/FAIL line per criterion in the terminal summary."""

    def check(name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"{name}: {status}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    def skip(name, reason):
        ACCEPTANCE_LINES.append(f"{name}: SKIP ({reason})")
        pytest.skip(reason)

    check.skip = skip
    return check


def build_digest_script(claims_path, ks_dir, canned, *, top_k=3):
    """Digest-keyed mock script for a CLI run with default settings.

    Mirrors the offline providers the run command constructs: hash embeddings,
    default decode budgets, packaged prompt assets. Safe at any worker count
    because responses key on request content, not call order.
    """
    from veritas.corpus import load_claims, load_knowledge_store
    from veritas.evidence import (
        build_answer_prompt,
        build_question_prompt,
        load_question_exemplars,
        strip_wrapping_quotes,
    )
    from veritas.gateway import DecodeConfig, request_digest
    from veritas.index import HashEmbeddingProvider, build_index, retrieve_for_claim
    from veritas.verdict import build_classification_prompt, load_classification_exemplars

    q_decode = DecodeConfig(max_output_tokens=128)
    a_decode = DecodeConfig(max_output_tokens=256)
    c_decode = DecodeConfig(max_output_tokens=16)
    q_exemplars = load_question_exemplars()
    c_exemplars = load_classification_exemplars()
    embed = HashEmbeddingProvider()
    script = {}
    for claim in load_claims(claims_path):
        entry = canned[claim.claim_id]
        q_req = build_question_prompt(
            claim.text, q_exemplars, model="llama3", decode=q_decode
        )
        script[request_digest(q_req)] = entry["question"]
        question = strip_wrapping_quotes(entry["question"])
        if not question.endswith("?"):
            question += "?"
        docs = load_knowledge_store(ks_dir, claim.claim_id)
        index = build_index(docs, embed)
        statements = []
        for doc in retrieve_for_claim(claim, index, embed, docs, k=top_k):
            answer = entry["answers"][doc.doc_id]
            a_req = build_answer_prompt(
                question, doc.text, model="llama3", decode=a_decode
            )
            script[request_digest(a_req)] = answer
            statements.append(strip_wrapping_quotes(answer))
        c_req = build_classification_prompt(
            claim.text, tuple(statements), c_exemplars, model="llama3", decode=c_decode
        )
        script[request_digest(c_req)] = entry["label"]
    return script


@pytest.fixture
def two_claim_fixture(tmp_path: Path):
    """Claims file, knowledge stores, mock script, and config for a 2-claim run."""
    claims = [
        {
            "claim": "The red bridge was painted blue in 1990.",
            "label": "Refuted",
            "questions": [
                {
                    "question": "Was the red bridge painted blue in 1990?",
                    "answers": [
                        {"answer": "No, the bridge kept its red paint in 1990."}
                    ],
                }
            ],
            "justification": "City records show no repainting.",
        },
        {
            "claim": "The city library opened a new reading room in 2019.",
            "label": "Supported",
            "questions": [
                {
                    "question": "Did the city library open a new reading room in 2019?",
                    "answers": ["Yes, the reading room opened in June 2019."],
                }
            ],
        },
    ]
    claims_path = tmp_path / "claims.json"
    claims_path.write_text(json.dumps(claims), encoding="utf-8")

    ks_dir = tmp_path / "ks"
    ks_dir.mkdir()
    (ks_dir / "0.json").write_text(
        "\n".join(
            [
                json.dumps(
                    {
                        "url": "http://example.test/bridge",
                        "url2text": [
                            "The red bridge was painted blue in 1990.",
                            "A long report about the bridge and its paint.",
                        ],
                    }
                ),
                json.dumps(
                    {
                        "url": "http://example.test/records",
                        "url2text": [
                            "City records show the bridge stayed red through the 1990s."
                        ],
                    }
                ),
            ]
        ),
        encoding="utf-8",
    )
    (ks_dir / "1.json").write_text(
        json.dumps(
            {
                "url": "http://example.test/library",
                "url2text": [
                    "The city library opened a new reading room in June 2019."
                ],
            }
        ),
        encoding="utf-8",
    )

    script = {
        "1": '"Is it true that the red bridge was painted blue in 1990?"',
        "2": "No, the bridge kept its red paint in 1990.",
        "3": "City records show the bridge stayed red through the 1990s.",
        "4": "Refuted",
        "5": "Did the city library open a new reading room in 2019?",
        "6": "Yes, the reading room opened in June 2019.",
        "7": "Supported",
    }
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(script), encoding="utf-8")

    out_dir = tmp_path / "out"
    config_path = tmp_path / "config.toml"
    config_path.write_text(
        "\n".join(
            [
                "[dataset]",
                f'claims_file = "{claims_path}"',
                f'knowledge_store_dir = "{ks_dir}"',
                "[output]",
                f'dir = "{out_dir}"',
                "[eval]",
                "top_k = 3",
            ]
        ),
        encoding="utf-8",
    )
    return {
        "claims": claims_path,
        "ks": ks_dir,
        "script": script_path,
        "config": config_path,
        "out": out_dir,
        "tmp": tmp_path,
    }
