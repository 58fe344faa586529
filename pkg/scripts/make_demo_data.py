#!/usr/bin/env python3
"""Generate a small offline demo dataset for the verification pipeline.

Writes four labeled claims, a three-document knowledge store per claim, a
scripted set of model responses, and a ready-to-use config:

    demo_data/
      claims.json           gold labels, gold evidence questions, justifications
      knowledge_store/      <claim_id>.json, one JSON line per source document
      mock_script.json      scripted completions keyed by call ordinal
      config.toml           points the CLI at all of the above

The scripted responses assume a single worker: each claim costs one question
call, one answer call per retrieved document, and one classification call.
Claim 2 is deliberately misclassified so the evaluation report has something
to show besides perfect scores.

Usage:
    python scripts/make_demo_data.py [--dest demo_data] [--force]
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

TOP_K = 3

# claim text, gold label, gold evidence QA pairs, justification,
# source documents, scripted question, scripted label
DEMO_CLAIMS = [
    {
        "claim": "The Aurora Bridge reopened to cyclists in March 2021.",
        "label": "Supported",
        "questions": [
            {
                "question": "When did the Aurora Bridge reopen to cyclists?",
                "answers": [{"answer": "The bridge reopened to cyclists in March 2021."}],
            }
        ],
        "justification": "The city announcement and local coverage agree on the date.",
        "docs": [
            (
                "https://citynews.example/aurora-reopening",
                [
                    "The Aurora Bridge reopened to cyclists in March 2021 after a two year closure.",
                    "Officials cited completed deck repairs as the reason the crossing could reopen.",
                ],
            ),
            (
                "https://transport.example/bridge-works",
                [
                    "Deck repairs on the Aurora Bridge finished in late February 2021.",
                    "The cycle lanes were the last section to be certified safe.",
                ],
            ),
            (
                "https://blog.example/riding-the-aurora",
                ["I rode across the Aurora Bridge the week it reopened in March 2021."],
            ),
        ],
        "scripted_question": "When did the Aurora Bridge reopen to cyclists?",
        "scripted_label": "Supported",
    },
    {
        "claim": "Harbor City banned electric scooters in 2022.",
        "label": "Refuted",
        "questions": [
            {
                "question": "Did Harbor City ban electric scooters in 2022?",
                "answers": [
                    {"answer": "No, the city council rejected the proposed ban in 2022."}
                ],
            }
        ],
        "justification": "Council records show the ban was voted down, not enacted.",
        "docs": [
            (
                "https://harborcity.example/council-minutes",
                [
                    "The Harbor City council voted five to two against the proposed scooter ban in June 2022.",
                ],
            ),
            (
                "https://localpaper.example/scooter-vote",
                [
                    "Electric scooters remain legal in Harbor City after the council rejected a ban.",
                    "Rental operators agreed to new parking rules instead.",
                ],
            ),
            (
                "https://mobility.example/harbor-rules",
                ["Harbor City regulates scooter parking but has never banned the vehicles."],
            ),
        ],
        "scripted_question": "Did Harbor City ban electric scooters in 2022?",
        "scripted_label": "Refuted",
    },
    {
        "claim": "The Meridian Museum's new wing cost 40 million dollars.",
        "label": "Not Enough Evidence",
        "questions": [
            {
                "question": "How much did the Meridian Museum's new wing cost?",
                "answers": [
                    {"answer": "None of the available sources state the construction cost."}
                ],
            }
        ],
        "justification": "Coverage describes the opening but never the budget.",
        "docs": [
            (
                "https://meridian.example/new-wing",
                [
                    "The Meridian Museum opened its new east wing to visitors this spring.",
                    "The wing houses the photography collection and a sculpture court.",
                ],
            ),
            (
                "https://artsdesk.example/meridian-review",
                ["The new Meridian wing is a generous, light filled addition to the museum."],
            ),
            (
                "https://travel.example/city-highlights",
                ["Visitors praise the Meridian Museum's recently added east wing."],
            ),
        ],
        # The scripted model answers from the docs but then overcommits to a
        # verdict the evidence cannot support: a realistic failure mode.
        "scripted_question": "How much did the Meridian Museum's new wing cost?",
        "scripted_label": "Refuted",
    },
    {
        "claim": "The Silver Basin reservoir reached record water levels in 2020.",
        "label": "Conflicting Evidence/Cherrypicking",
        "questions": [
            {
                "question": "Did the Silver Basin reservoir reach record levels in 2020?",
                "answers": [
                    {"answer": "The water authority reported a record level in May 2020."},
                    {"answer": "An independent audit disputed the gauge calibration that year."},
                ],
            }
        ],
        "justification": "Official figures and the audit disagree about the record.",
        "docs": [
            (
                "https://water.example/silver-basin-2020",
                ["The water authority recorded the highest May level on record at Silver Basin in 2020."],
            ),
            (
                "https://audit.example/gauge-report",
                [
                    "An independent audit found the Silver Basin gauge read high through 2020.",
                    "Corrected figures would fall short of the 1998 record.",
                ],
            ),
            (
                "https://rivernews.example/basin-debate",
                ["Hydrologists remain split over whether Silver Basin truly set a record in 2020."],
            ),
        ],
        "scripted_question": "Did the Silver Basin reservoir reach record levels in 2020?",
        "scripted_label": "Conflicting Evidence/Cherrypicking",
    },
]

# One scripted answer per retrieval rank. Rank order depends on the embedding
# similarity, so these read sensibly whichever document they land on.
SCRIPTED_ANSWERS = [
    [
        "The bridge reopened to cyclists in March 2021.",
        "Repairs finished in February 2021 and the crossing reopened the next month.",
        "Riders were back on the bridge in March 2021.",
    ],
    [
        "No, the council rejected the proposed ban in June 2022.",
        "Scooters remain legal; the city adopted parking rules instead of a ban.",
        "Harbor City has never banned electric scooters.",
    ],
    [
        "The source describes the new wing but does not give a cost.",
        "No construction budget is mentioned in the coverage.",
        "The article praises the wing without stating what it cost.",
    ],
    [
        "The water authority reported a record May level in 2020.",
        "An audit disputed the gauge readings, so the record is contested.",
        "Experts disagree on whether 2020 set a true record.",
    ],
]


def build(dest: Path) -> None:
    ks_dir = dest / "knowledge_store"
    ks_dir.mkdir(parents=True)

    claims = []
    for entry in DEMO_CLAIMS:
        claims.append(
            {
                "claim": entry["claim"],
                "label": entry["label"],
                "questions": entry["questions"],
                "justification": entry["justification"],
            }
        )
    claims_path = dest / "claims.json"
    claims_path.write_text(
        json.dumps(claims, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    for claim_id, entry in enumerate(DEMO_CLAIMS):
        lines = [
            json.dumps({"url": url, "url2text": segments}, ensure_ascii=False)
            for url, segments in entry["docs"]
        ]
        (ks_dir / f"{claim_id}.json").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )

    # Single worker call order per claim: question, one answer per retrieved
    # document, then the verdict.
    script: dict[str, str] = {}
    ordinal = 0
    for claim_id, entry in enumerate(DEMO_CLAIMS):
        ordinal += 1
        script[str(ordinal)] = entry["scripted_question"]
        for answer in SCRIPTED_ANSWERS[claim_id][:TOP_K]:
            ordinal += 1
            script[str(ordinal)] = answer
        ordinal += 1
        script[str(ordinal)] = entry["scripted_label"]
    script_path = dest / "mock_script.json"
    script_path.write_text(
        json.dumps(script, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    config_path = dest / "config.toml"
    config_path.write_text(
        "\n".join(
            [
                "[dataset]",
                f'claims_file = "{claims_path.resolve()}"',
                f'knowledge_store_dir = "{ks_dir.resolve()}"',
                "",
                "[output]",
                f'dir = "{(dest / "out").resolve()}"',
                "",
                "[eval]",
                f"top_k = {TOP_K}",
                "qa_threshold = 0.25",
                "",
            ]
        ),
        encoding="utf-8",
    )

    print(f"wrote {claims_path} ({len(claims)} claims)")
    print(f"wrote {ks_dir}/ ({len(DEMO_CLAIMS)} stores, 3 documents each)")
    print(f"wrote {script_path} ({len(script)} scripted responses)")
    print(f"wrote {config_path}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="demo_data", help="output directory")
    parser.add_argument(
        "--force", action="store_true", help="replace an existing directory"
    )
    args = parser.parse_args(argv)

    dest = Path(args.dest)
    if dest.exists():
        if not args.force:
            print(f"{dest} already exists; pass --force to replace it", file=sys.stderr)
            return 2
        shutil.rmtree(dest)
    build(dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
