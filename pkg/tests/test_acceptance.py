"""Acceptance gate: one test per shipping criterion, one PASS/FAIL line each."""
import itertools
import json
import math
import os
import random
import time

from conftest import build_digest_script

from veritas.assignment import assignment_total, hungarian
from veritas.cli import main as cli_main
from veritas.corpus import ClaimRecord, Document, GoldQA, load_claims, validate_dataset
from veritas.evidence import EvidenceSet, EvidenceSettings, SourcedAnswer, extract_evidence
from veritas.gateway import MockLLMProvider
from veritas.index import (
    EmbeddingVector,
    HashEmbeddingProvider,
    IndexEntry,
    VectorIndex,
    build_index,
    l2_normalize,
    search,
)
from veritas.labels import LABEL_ORDER, VerdictLabel
from veritas.meteor import meteor, tokenize
from veritas.scoring import (
    EvalConfig,
    PerClaimScore,
    averitec_score,
    build_run_report,
    classification_report,
    evidence_counted,
    hungarian_meteor,
    score_claim,
)
from veritas.verdict import VerdictPrediction, classify


S, R, N, C = LABEL_ORDER


def test_hungarian_oracle(acceptance):
    """500 random matrices, 1x1 through 6x6: assigned total matches brute force
    exactly, in under ten seconds."""
    rng = random.Random(20250817)
    start = time.perf_counter()
    checked = 0
    ok = True
    for _ in range(500):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        matrix = [[rng.random() for _ in range(cols)] for _ in range(rows)]
        got = assignment_total(matrix, hungarian(matrix, maximize=True))
        k = min(rows, cols)
        best = max(
            sum(matrix[r][c] for r, c in zip(row_subset, col_perm))
            for row_subset in itertools.combinations(range(rows), k)
            for col_perm in itertools.permutations(range(cols), k)
        )
        if got != best:
            ok = False
            break
        checked += 1
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    acceptance(
        "hungarian-oracle",
        ok,
        f"{checked}/500 matrices exact, {elapsed:.2f}s",
    )


def test_meteor_vectors(acceptance):
    """Frozen metric values plus a 1000-string self-score sweep."""
    identity = meteor("the cat sat on the mat", "the cat sat on the mat")
    reordered = meteor("on the mat sat the cat", "the cat sat on the mat")
    disjoint = meteor("alpha beta gamma", "delta epsilon zeta")
    ok = (
        abs(identity - 0.9976852) <= 1e-6
        and abs(reordered - 0.9375) <= 1e-6
        and disjoint == 0.0
    )
    rng = random.Random(11)
    vocab = [
        "bridge", "red", "library", "opened", "city", "record", "paint",
        "claims", "report", "when", "why", "the", "a", "in", "of",
    ]
    swept = 0
    for _ in range(1000):
        text = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12)))
        score = meteor(text, text)
        m = len(tokenize(text))
        expected = 1.0 - 0.5 * (1.0 / m) ** 3
        if not (0.0 <= score <= 1.0 and abs(score - expected) <= 1e-12):
            ok = False
            break
        swept += 1
    acceptance(
        "meteor-vectors",
        ok,
        f"identity {identity:.7f}, reordered {reordered:.4f}, {swept}/1000 self-scores",
    )


def test_hungarian_meteor_equivalence(acceptance):
    """Assignment-based evidence score equals exhaustive injective enumeration."""
    rng = random.Random(20250818)
    vocab = ["was", "the", "bridge", "painted", "red", "library", "open", "in", "2019"]

    def sentence():
        return " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 7)))

    checked = 0
    ok = True
    for _ in range(150):
        generated = [sentence() for _ in range(rng.randint(0, 4))]
        references = [sentence() for _ in range(rng.randint(1, 4))]
        got = hungarian_meteor(generated, references)
        if not generated:
            expected = 0.0
        else:
            matrix = [[meteor(g, r) for r in references] for g in generated]
            k = min(len(generated), len(references))
            expected = max(
                sum(matrix[r][c] for r, c in zip(rows, cols))
                for rows in itertools.combinations(range(len(generated)), k)
                for cols in itertools.permutations(range(len(references)), k)
            ) / len(references)
        if abs(got - expected) > 1e-9:
            ok = False
            break
        checked += 1
    acceptance("hungarian-meteor-equivalence", ok, f"{checked}/150 cases within 1e-9")


def test_vector_search_oracle(acceptance):
    """50 random corpora: top-3 matches brute-force cosine with doc_id tie-break."""
    rng = random.Random(20250819)
    checked = 0
    ok = True
    for _ in range(50):
        n = rng.randint(1, 1000)
        dim = rng.randint(2, 64)
        entries = []
        for i in range(n):
            raw = [rng.uniform(-1.0, 1.0) for _ in range(dim)]
            if all(v == 0.0 for v in raw):
                raw[0] = 1.0
            entries.append((f"c/{i}", l2_normalize(raw).values))
        index = VectorIndex(
            dim=dim,
            provider_fingerprint=f"oracle:{dim}",
            entries=[IndexEntry(doc_id=d, vector=EmbeddingVector(v)) for d, v in entries],
        )
        query = l2_normalize([rng.uniform(-1.0, 1.0) + 1e-9 for _ in range(dim)])
        hits = search(index, query, 3)
        scored = sorted(
            (
                (-math.fsum(a * b for a, b in zip(vec, query.values)), doc_id)
                for doc_id, vec in entries
            ),
        )
        expected = [doc_id for _, doc_id in scored[:3]]
        if [h.doc_id for h in hits] != expected:
            ok = False
            break
        checked += 1
    acceptance("vector-search-oracle", ok, f"{checked}/50 corpora exact")


def test_averitec_threshold_semantics(acceptance):
    """The 3-claim fixture scores 1/3; a score exactly at the threshold counts."""
    config = EvalConfig()
    fixture = [(True, 0.3), (True, 0.2), (False, 0.9)]
    rows = [
        PerClaimScore(
            claim_id=i,
            q_only=0.0,
            q_plus_a=qa,
            label_correct=correct,
            counted=evidence_counted(qa, config),
        )
        for i, (correct, qa) in enumerate(fixture)
    ]
    three_claim = averitec_score(rows, config)

    boundary_default = evidence_counted(0.25, config)

    # Exact-boundary check through the real per-claim path: set the threshold
    # to the claim's own Q+A score and equality must still count.
    gold = ClaimRecord(
        claim_id=0,
        text="the bridge stayed red",
        gold_label=R,
        gold_evidence=(
            GoldQA(question="Was the bridge repainted?", answers=("No, it stayed red.",)),
        ),
    )
    pred = VerdictPrediction(
        claim_id=0,
        label=R,
        raw_output="Refuted",
        evidence=EvidenceSet(
            claim_id=0,
            question="Was the bridge repainted?",
            answers=(
                SourcedAnswer(text="No, it stayed red.", doc_id="0/0", retrieval_rank=1),
            ),
        ),
    )
    base = score_claim(pred, gold, config)
    at_threshold = score_claim(
        pred, gold, EvalConfig(qa_threshold=base.q_plus_a)
    )
    above_threshold = score_claim(
        pred, gold, EvalConfig(qa_threshold=math.nextafter(base.q_plus_a, 1.0))
    )
    ok = (
        three_claim == 1 / 3
        and boundary_default
        and at_threshold.counted
        and not above_threshold.counted
    )
    acceptance(
        "averitec-threshold",
        ok,
        f"fixture {three_claim:.4f}, boundary inclusive {at_threshold.counted}",
    )


TRAIN_COUNTS = {S: 847, R: 1743, C: 196, N: 282}
DEV_COUNTS = {S: 122, R: 305, C: 38, N: 35}


def _write_split(path, counts):
    claims = []
    i = 0
    for label, count in counts.items():
        for _ in range(count):
            claims.append({"claim": f"synthetic claim {i}", "label": label.display})
            i += 1
    path.write_text(json.dumps(claims), encoding="utf-8")


def test_dataset_distribution(acceptance, tmp_path):
    """Synthesized splits with the published label counts validate back exactly."""
    train_path = tmp_path / "train.json"
    dev_path = tmp_path / "dev.json"
    _write_split(train_path, TRAIN_COUNTS)
    _write_split(dev_path, DEV_COUNTS)
    train = validate_dataset(load_claims(train_path))
    dev = validate_dataset(load_claims(dev_path))
    ok = (
        train.counts == TRAIN_COUNTS
        and train.total == 3068
        and dev.counts == DEV_COUNTS
        and dev.total == 500
        and train.absent_labels == ()
        and dev.absent_labels == ()
    )
    acceptance(
        "dataset-distribution",
        ok,
        f"train {train.total} ({train.counts[S]}/{train.counts[R]}/"
        f"{train.counts[C]}/{train.counts[N]}), dev {dev.total}",
    )


def test_end_to_end_determinism(acceptance, two_claim_fixture):
    """Clean mock runs produce identical bytes; per-claim calls = top_k + 2."""
    fx = two_claim_fixture
    assert cli_main(["index", "--config", str(fx["config"]), "--mock"]) == 0
    run_argv = [
        "run", "--config", str(fx["config"]), "--mock-script", str(fx["script"]),
    ]
    assert cli_main(run_argv) == 0
    names = ("evidence.jsonl", "predictions.jsonl")
    first = {name: (fx["out"] / name).read_bytes() for name in names}

    for name in names + ("errors.jsonl",):
        (fx["out"] / name).unlink()
    assert cli_main(run_argv) == 0
    second = {name: (fx["out"] / name).read_bytes() for name in names}
    bytes_stable = first == second

    # Same canned outputs keyed by digest, three workers: still identical.
    evidence = [
        json.loads(line) for line in first["evidence.jsonl"].decode().splitlines()
    ]
    predictions = [
        json.loads(line) for line in first["predictions.jsonl"].decode().splitlines()
    ]
    canned = {
        e["claim_id"]: {
            "question": e["question"],
            "answers": {a["doc_id"]: a["text"] for a in e["answers"]},
            "label": p["label"],
        }
        for e, p in zip(evidence, predictions)
    }
    digest_script = fx["tmp"] / "digest_script.json"
    digest_script.write_text(
        json.dumps(build_digest_script(fx["claims"], fx["ks"], canned)),
        encoding="utf-8",
    )
    for name in names + ("errors.jsonl",):
        (fx["out"] / name).unlink()
    assert (
        cli_main(
            [
                "run", "--config", str(fx["config"]),
                "--mock-script", str(digest_script), "--workers", "3",
            ]
        )
        == 0
    )
    third = {name: (fx["out"] / name).read_bytes() for name in names}
    worker_stable = first == third

    # Call accounting on a claim with top_k retrievable documents.
    top_k = 3
    claim = ClaimRecord(claim_id=0, text="the red bridge stayed red")
    docs = [
        Document(
            doc_id=f"0/{i}", claim_id=0, url=f"http://d/{i}", text=f"report {i} on the bridge"
        )
        for i in range(top_k)
    ]
    embed = HashEmbeddingProvider(dim=64)
    index = build_index(docs, embed)
    llm = MockLLMProvider(
        {
            "1": "Did the bridge stay red?",
            "2": "Yes by report 0.",
            "3": "Yes by report 1.",
            "4": "Yes by report 2.",
            "5": "Supported",
        }
    )
    ev, failures = extract_evidence(claim, index, embed, llm, docs, k=top_k)
    classify(claim, ev, llm)
    calls = len(llm.calls)
    ok = bytes_stable and worker_stable and not failures and calls == top_k + 2
    acceptance(
        "end-to-end-determinism",
        ok,
        f"reruns identical {bytes_stable}, workers=3 identical {worker_stable}, "
        f"calls per claim {calls} = top_k + 2",
    )


def test_oracle_self_evaluation(acceptance):
    """Predictions copied from gold score accuracy 1.0 and Averitec 1.0."""
    rng = random.Random(5)
    labels = [S, R, N, C, S, R, N, C]
    golds = {}
    predictions = []
    for i, label in enumerate(labels):
        n_answers = rng.randint(1, 2)
        qas = tuple(
            GoldQA(
                question=f"Question {i}.{j} about the claim?",
                answers=(f"Answer {i}.{j} with several words of detail.",),
            )
            for j in range(n_answers)
        )
        golds[i] = ClaimRecord(
            claim_id=i, text=f"synthetic claim {i}", gold_label=label, gold_evidence=qas
        )
        answers = tuple(
            SourcedAnswer(text=qa.answers[0], doc_id=f"{i}/{j}", retrieval_rank=j + 1)
            for j, qa in enumerate(qas)
        )
        predictions.append(
            VerdictPrediction(
                claim_id=i,
                label=label,
                raw_output=label.display,
                evidence=EvidenceSet(
                    claim_id=i, question=qas[0].question, answers=answers
                ),
            )
        )
    report = build_run_report(predictions, golds, EvalConfig(dedupe_questions=False))
    all_counted = all(row.counted for row in report.per_claim)
    ok = report.accuracy == 1.0 and report.averitec == 1.0 and all_counted
    acceptance(
        "oracle-self-evaluation",
        ok,
        f"accuracy {report.accuracy:.2f}, averitec {report.averitec:.2f}, "
        f"{len(report.per_claim)} claims all counted",
    )


def test_classification_report_fixture(acceptance):
    """Hand-scored 12-item fixture and the always-Refuted degenerate baseline."""
    predictions = [S, S, R, S, R, R, R, N, N, R, C, C]
    golds = [S, S, S, R, R, R, N, N, N, C, C, C]
    report = classification_report(predictions, golds)
    expected_f1 = {S: 2 / 3, R: 1 / 2, N: 4 / 5, C: 4 / 5}
    fixture_ok = all(
        abs(report.per_class_f1[label] - expected_f1[label]) <= 1e-9
        for label in LABEL_ORDER
    ) and abs(report.macro_f1 - 83 / 120) <= 1e-9

    dev_golds = [label for label, n in DEV_COUNTS.items() for _ in range(n)]
    degenerate = classification_report([R] * len(dev_golds), dev_golds)
    degenerate_ok = degenerate.accuracy == 0.61
    acceptance(
        "classification-report-fixture",
        fixture_ok and degenerate_ok,
        f"macro F1 {report.macro_f1:.6f}, always-R accuracy {degenerate.accuracy}",
    )


def test_live_smoke(acceptance, tmp_path):
    """Manual: point VERITAS_SMOKE_URL at an Ollama-compatible endpoint."""
    url = os.environ.get("VERITAS_SMOKE_URL")
    if not url:
        acceptance.skip("live-smoke", "VERITAS_SMOKE_URL not set")
    model = os.environ.get("VERITAS_SMOKE_MODEL", "llama3.2:1b")
    embed_model = os.environ.get("VERITAS_SMOKE_EMBED_MODEL", "nomic-embed-text")

    claims = []
    ks_dir = tmp_path / "ks"
    ks_dir.mkdir()
    topics = [
        ("The Eiffel Tower is in Paris.", "Supported", "The Eiffel Tower stands in Paris, France."),
        ("Mount Everest is the tallest mountain.", "Supported", "Everest is Earth's highest peak above sea level."),
        ("The Great Wall is visible from the Moon.", "Refuted", "Astronauts confirm the wall is not visible from the Moon."),
        ("Goldfish have a three second memory.", "Refuted", "Studies show goldfish remember for months."),
        ("Honey never spoils.", "Supported", "Sealed honey from ancient tombs remains edible."),
        ("Lightning never strikes twice.", "Refuted", "Tall structures take repeated strikes every year."),
        ("Bats are blind.", "Refuted", "Bats see and also echolocate."),
        ("Water boils at 100C at sea level.", "Supported", "At one atmosphere water boils at 100 degrees Celsius."),
        ("The Sahara is the largest hot desert.", "Supported", "The Sahara tops the list of hot deserts by area."),
        ("Humans use only ten percent of their brains.", "Refuted", "Imaging shows activity across the whole brain."),
    ]
    for i, (text, label, fact) in enumerate(topics):
        claims.append(
            {
                "claim": text,
                "label": label,
                "questions": [{"question": f"Is it true that {text.lower()}", "answers": [fact]}],
            }
        )
        (ks_dir / f"{i}.json").write_text(
            json.dumps({"url": f"http://smoke/{i}", "url2text": [fact]}) + "\n",
            encoding="utf-8",
        )
    claims_path = tmp_path / "claims.json"
    claims_path.write_text(json.dumps(claims), encoding="utf-8")
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
                "[embedding]",
                f'url = "{url}"',
                f'model = "{embed_model}"',
                "[generation]",
                f'url = "{url}"',
                f'question_model = "{model}"',
                f'answer_model = "{model}"',
                f'classification_model = "{model}"',
            ]
        ),
        encoding="utf-8",
    )
    assert cli_main(["index", "--config", str(config_path)]) == 0
    cli_main(["run", "--config", str(config_path)])
    predictions = [
        json.loads(line)
        for line in (out_dir / "predictions.jsonl").read_text().splitlines()
    ]
    parseable = len(predictions)
    rc = cli_main(
        [
            "evaluate",
            "--pred", str(out_dir / "predictions.jsonl"),
            "--gold", str(claims_path),
        ]
    )
    report = json.loads((out_dir / "report.json").read_text())
    finite = all(
        math.isfinite(report[key])
        for key in ("q_only", "q_plus_a", "averitec", "accuracy", "macro_f1")
    )
    ok = parseable >= 8 and rc == 0 and finite
    acceptance("live-smoke", ok, f"{parseable}/10 verdicts, report finite {finite}")
