import pytest

from veritas.corpus import ClaimRecord, Document
from veritas.errors import StageError, ValidationError
from veritas.evidence import (
    EvidenceSet,
    EvidenceSettings,
    QuestionExemplar,
    SourcedAnswer,
    StageFailure,
    build_answer_prompt,
    build_question_prompt,
    extract_evidence,
    generate_answer,
    generate_question,
    load_question_exemplars,
    strip_wrapping_quotes,
)
from veritas.gateway import MockLLMProvider
from veritas.index import HashEmbeddingProvider, build_index


EXEMPLARS = (
    QuestionExemplar(
        claim="The tower is 300 meters tall.",
        incorrect_question="Is the tower tall?",
        correct_question="Is the tower 300 meters tall?",
    ),
)


def _claim(text="The red bridge was painted blue in 1990.", claim_id=0):
    return ClaimRecord(claim_id=claim_id, text=text)


def _doc(ordinal=0, text="Bridge history: it stayed red.", claim_id=0):
    return Document(
        doc_id=f"{claim_id}/{ordinal}",
        claim_id=claim_id,
        url=f"http://d/{ordinal}",
        text=text,
    )


def test_strip_wrapping_quotes():
    assert strip_wrapping_quotes('"hello?"') == "hello?"
    assert strip_wrapping_quotes("“hello?”") == "hello?"
    assert strip_wrapping_quotes("  plain  ") == "plain"
    assert strip_wrapping_quotes('"mismatched”') == '"mismatched”'
    assert strip_wrapping_quotes('"') == '"'
    assert strip_wrapping_quotes('""') == ""
    # Only one layer comes off.
    assert strip_wrapping_quotes('""double""') == '"double"'


def test_sourced_answer_validation():
    with pytest.raises(ValidationError):
        SourcedAnswer(text="", doc_id="0/0", retrieval_rank=1)
    with pytest.raises(ValidationError):
        SourcedAnswer(text="x", doc_id="0/0", retrieval_rank=0)


def test_evidence_set_rank_order_enforced():
    a1 = SourcedAnswer(text="a", doc_id="0/0", retrieval_rank=1)
    a2 = SourcedAnswer(text="b", doc_id="0/1", retrieval_rank=2)
    EvidenceSet(claim_id=0, question="q?", answers=(a1, a2))
    with pytest.raises(ValidationError):
        EvidenceSet(claim_id=0, question="q?", answers=(a2, a1))
    with pytest.raises(ValidationError):
        EvidenceSet(claim_id=0, question="q?", answers=(a1, a1))
    with pytest.raises(ValidationError):
        EvidenceSet(claim_id=0, question="", answers=())


def test_evidence_set_json_round_trip():
    ev = EvidenceSet(
        claim_id=3,
        question="Did it happen?",
        answers=(
            SourcedAnswer(text="Yes.", doc_id="3/0", retrieval_rank=1),
            SourcedAnswer(text="Maybe.", doc_id="3/4", retrieval_rank=2),
        ),
    )
    d = ev.to_json_dict()
    assert d["answers"][0] == {"text": "Yes.", "doc_id": "3/0", "rank": 1}
    assert EvidenceSet.from_json_dict(d) == ev


def test_stage_failure_round_trip():
    f = StageFailure(claim_id=2, stage="answer", message="boom", doc_id="2/1")
    assert StageFailure.from_json_dict(f.to_json_dict()) == f
    g = StageFailure(claim_id=2, stage="question", message="boom")
    assert StageFailure.from_json_dict(g.to_json_dict()).doc_id is None


def test_packaged_question_exemplars_load():
    exemplars = load_question_exemplars()
    assert len(exemplars) >= 1
    for ex in exemplars:
        assert ex.claim
        assert ex.correct_question.endswith("?")


def test_build_question_prompt_contains_exemplars_and_claim():
    req = build_question_prompt("The sky is green.", EXEMPLARS)
    assert "Claim: The tower is 300 meters tall." in req.user_text
    assert 'Incorrect Question: "Is the tower tall?"' in req.user_text
    assert 'Correct Question: "Is the tower 300 meters tall?"' in req.user_text
    assert "The sky is green." in req.user_text
    assert not req.user_text.endswith("\n")
    with pytest.raises(ValidationError):
        build_question_prompt("x", ())


def test_generate_question_strips_quotes_and_ensures_question_mark():
    llm = MockLLMProvider({"1": '"Was the bridge repainted in 1990?"'})
    q = generate_question(_claim(), llm, exemplars=EXEMPLARS)
    assert q == "Was the bridge repainted in 1990?"

    llm2 = MockLLMProvider({"1": "Was the bridge repainted in 1990"})
    q2 = generate_question(_claim(), llm2, exemplars=EXEMPLARS)
    assert q2.endswith("?")


def test_generate_question_empty_after_normalization_is_stage_error():
    llm = MockLLMProvider({"1": '""'})
    with pytest.raises(StageError) as err:
        generate_question(_claim(), llm, exemplars=EXEMPLARS)
    assert err.value.stage == "question"
    assert err.value.claim_id == 0


def test_build_answer_prompt_truncates_document():
    req = build_answer_prompt("Q?", "x" * 50, max_chars=10)
    assert "x" * 10 in req.user_text
    assert "x" * 11 not in req.user_text
    with pytest.raises(ValidationError):
        build_answer_prompt("", "doc")
    with pytest.raises(ValidationError):
        build_answer_prompt("q?", "")


def test_generate_answer_attaches_source():
    llm = MockLLMProvider({"1": "It stayed red."})
    ans = generate_answer("Q?", _doc(ordinal=2), llm, rank=1)
    assert ans == SourcedAnswer(text="It stayed red.", doc_id="0/2", retrieval_rank=1)


def test_generate_answer_empty_is_stage_error_with_doc():
    llm = MockLLMProvider({"1": '""'})
    with pytest.raises(StageError) as err:
        generate_answer("Q?", _doc(ordinal=5), llm, rank=2)
    assert err.value.stage == "answer"
    assert err.value.doc_id == "0/5"


def _pipeline_fixture(n_docs=2):
    docs = [
        _doc(ordinal=i, text=f"Bridge report number {i}: it stayed red.")
        for i in range(n_docs)
    ]
    embed = HashEmbeddingProvider(dim=64)
    index = build_index(docs, embed)
    return docs, embed, index


def test_extract_evidence_happy_path_k_plus_one_calls():
    docs, embed, index = _pipeline_fixture(2)
    llm = MockLLMProvider(
        {"1": "Was it repainted?", "2": "No, report 0 says red.", "3": "No, report 1 says red."}
    )
    evidence, failures = extract_evidence(
        _claim(), index, embed, llm, docs, k=3, settings=EvidenceSettings(exemplars=EXEMPLARS)
    )
    assert failures == []
    assert evidence.question == "Was it repainted?"
    assert len(evidence.answers) == 2
    assert [a.retrieval_rank for a in evidence.answers] == [1, 2]
    assert len(llm.calls) == 3


def test_extract_evidence_answer_failure_degrades_gracefully():
    docs, embed, index = _pipeline_fixture(2)
    llm = MockLLMProvider({"1": "Was it repainted?", "2": '""', "3": "Still red."})
    evidence, failures = extract_evidence(
        _claim(), index, embed, llm, docs, k=2, settings=EvidenceSettings(exemplars=EXEMPLARS)
    )
    assert len(evidence.answers) == 1
    assert len(failures) == 1
    assert failures[0].stage == "answer"
    assert failures[0].claim_id == 0
    assert failures[0].doc_id is not None


def test_extract_evidence_all_answers_fail_keeps_question():
    docs, embed, index = _pipeline_fixture(2)
    llm = MockLLMProvider({"1": "Was it repainted?", "2": '""', "3": '""'})
    evidence, failures = extract_evidence(
        _claim(), index, embed, llm, docs, k=2, settings=EvidenceSettings(exemplars=EXEMPLARS)
    )
    assert evidence.answers == ()
    assert len(failures) == 2


def test_extract_evidence_question_failure_raises():
    docs, embed, index = _pipeline_fixture(1)
    llm = MockLLMProvider({"1": '""'})
    with pytest.raises(StageError):
        extract_evidence(
            _claim(), index, embed, llm, docs, k=1,
            settings=EvidenceSettings(exemplars=EXEMPLARS),
        )


def test_extract_evidence_respects_k():
    docs, embed, index = _pipeline_fixture(5)
    script = {"1": "Was it repainted?"}
    script.update({str(i): f"answer {i}" for i in range(2, 5)})
    llm = MockLLMProvider(script)
    evidence, failures = extract_evidence(
        _claim(), index, embed, llm, docs, k=3, settings=EvidenceSettings(exemplars=EXEMPLARS)
    )
    assert failures == []
    assert len(evidence.answers) == 3
    assert len(llm.calls) == 4


def test_evidence_settings_validation():
    with pytest.raises(ValidationError):
        EvidenceSettings(answer_doc_char_budget=0)
