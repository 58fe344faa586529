#!/usr/bin/env python3
"""Run the full verification pipeline offline on the bundled demo dataset.

Builds per-claim vector indexes with the deterministic hash embedder, runs
retrieval, evidence extraction, and verdict classification against scripted
model responses, then scores the predictions and renders the report. No
network access and no model server are involved.

Usage:
    python scripts/run_demo.py [--data demo_data] [--fresh]

The data directory is created on first use by scripts/make_demo_data.py;
--fresh regenerates it (and discards previous outputs) first.
"""
from __future__ import annotations

import argparse
import json
import shutil
import subprocess
import sys
from pathlib import Path

from veritas.cli import main as veritas


def ensure_data(data_dir: Path, fresh: bool) -> int:
    if fresh and data_dir.exists():
        shutil.rmtree(data_dir)
    if data_dir.exists():
        return 0
    generator = Path(__file__).with_name("make_demo_data.py")
    return subprocess.run(
        [sys.executable, str(generator), "--dest", str(data_dir)]
    ).returncode


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="demo_data", help="demo dataset directory")
    parser.add_argument(
        "--fresh", action="store_true", help="regenerate the dataset first"
    )
    args = parser.parse_args(argv)

    data_dir = Path(args.data)
    rc = ensure_data(data_dir, args.fresh)
    if rc != 0:
        return rc

    config = str(data_dir / "config.toml")
    script = str(data_dir / "mock_script.json")
    out_dir = data_dir / "out"

    print("== index ==")
    rc = veritas(["index", "--config", config, "--mock"])
    if rc != 0:
        return rc

    print("== run ==")
    rc = veritas(["run", "--config", config, "--mock-script", script])
    if rc != 0:
        return rc

    print("== evaluate ==")
    rc = veritas(
        [
            "evaluate",
            "--pred",
            str(out_dir / "predictions.jsonl"),
            "--gold",
            str(data_dir / "claims.json"),
            "--config",
            config,
            "--out",
            str(out_dir),
            "--per-claim-csv",
            str(out_dir / "per_claim.csv"),
        ]
    )
    if rc != 0:
        return rc

    print("== report ==")
    rc = veritas(["report", "--in", str(out_dir / "report.json")])
    if rc != 0:
        return rc

    report = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    print("== artifacts ==")
    for name in sorted(p.name for p in out_dir.iterdir()):
        print(f"  {out_dir / name}")
    print(
        "accuracy {accuracy:.2f}, averitec {averitec:.2f} "
        "over {scored} scored claims".format(
            accuracy=report["accuracy"],
            averitec=report["averitec"],
            scored=len(report["per_claim"]),
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
