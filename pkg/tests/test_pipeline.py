import datetime
import json
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from s2c_compliance.errors import FileAccessError
from s2c_compliance.errors import SchemaError
from s2c_compliance.errors import StageError
from s2c_compliance.errors import UnresolvedReferenceError
from s2c_compliance.pipeline import Attestation
from s2c_compliance.pipeline import EvidenceRecord
from s2c_compliance.pipeline import PipelineModel
from s2c_compliance.pipeline import Verdict
from s2c_compliance.pipeline import assess
from s2c_compliance.pipeline import coverage_report
from s2c_compliance.pipeline import export_result
from s2c_compliance.pipeline import load_attestations
from s2c_compliance.pipeline import parse_pipeline
from s2c_compliance.types import PipelineStage
from tests.strategies import assessment_inputs
from tests.strategies import attestations
from tests.strategies import steps


def write_pipeline(tmp_path, text: str) -> str:
    path = tmp_path / "pipeline.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def attest(activity_id: str, evidence_ref: str = "evidence.md") -> Attestation:
    return Attestation(activity_id, "security officer", datetime.date(2026, 1, 15), evidence_ref)


def test_parse_demo_pipeline(demo_pipeline):
    assert demo_pipeline.name == "demo-pipeline"
    assert [block.stage for block in demo_pipeline.stages] == [PipelineStage.BUILD, PipelineStage.TEST]

    invocations = list(demo_pipeline.iter_steps())
    assert [(i.step.name, i.step.order) for i in invocations] == [
        ("checkout", 1),
        ("compile", 2),
        ("static-analysis", 3),
        ("container-scan", 1),
    ]
    assert [i.reference for i in invocations if i.step.tool] == [
        "pipeline:Build/compile/static-analysis",
        "pipeline:Test/security-tests/container-scan",
    ]
    assert invocations[1].step.produces == {"build-output"}


def test_parse_pipeline_without_stages(tmp_path):
    pipeline = parse_pipeline(write_pipeline(tmp_path, "name: empty\nstages: []\n"))

    assert pipeline.stages == ()
    assert list(pipeline.iter_steps()) == []


def test_parse_pipeline_accepts_json(tmp_path):
    path = write_pipeline(tmp_path, json.dumps({"name": "json", "stages": [{"stage": "Deploy", "jobs": []}]}))
    assert parse_pipeline(path).stages[0].stage == PipelineStage.DEPLOY


def test_unknown_stage_lists_accepted_names(tmp_path):
    with pytest.raises(StageError) as e:
        parse_pipeline(write_pipeline(tmp_path, "name: p\nstages:\n  - stage: qa\n"))

    assert e.value.name == "qa"
    assert e.value.accepted == ["Plan", "Code", "Build", "Test", "Release", "Deploy", "Operate", "Monitor", "Concept"]
    assert "Accepted names: Plan, Code" in str(e.value)


def test_pipeline_schema_violation(tmp_path):
    with pytest.raises(SchemaError) as e:
        parse_pipeline(write_pipeline(tmp_path, "stages: []\n"))

    assert "'name' is a required property" in str(e.value)


def test_missing_pipeline_file(tmp_path):
    with pytest.raises(FileAccessError):
        parse_pipeline(str(tmp_path / "missing.yaml"))


def test_with_step_appends_to_the_stage_block():
    pipeline = PipelineModel("p", ())
    pipeline = pipeline.with_step(PipelineStage.BUILD, "compile", "sast", "semgrep")
    pipeline = pipeline.with_step(PipelineStage.TEST, "tests", "scan", "trivy")
    pipeline = pipeline.with_step(PipelineStage.BUILD, "package", "sca", "dependency-check")

    assert [block.stage for block in pipeline.stages] == [PipelineStage.BUILD, PipelineStage.TEST]
    assert [job.name for job in pipeline.stages[0].jobs] == ["compile", "package"]
    assert [(i.step.name, i.step.order) for i in pipeline.iter_steps()] == [("sast", 1), ("sca", 2), ("scan", 1)]


def test_load_attestations(demo_attestations):
    assert [a.activity_id for a in demo_attestations] == ["SG-t1", "SI-t6", "SVV-t4"]
    assert demo_attestations[0].date == datetime.date(2026, 3, 2)
    assert demo_attestations[1].reference == "attestation:https://reviews.example.org/r/1042"


def test_load_attestations_as_plain_list(tmp_path):
    path = tmp_path / "attest.json"
    path.write_text(json.dumps([attest("SG-t1").to_spec()]), encoding="utf-8")

    assert load_attestations(str(path)) == [attest("SG-t1")]


def test_attestation_with_invalid_date(tmp_path):
    spec = dict(attest("SG-t1").to_spec(), date="15/01/2026")
    path = tmp_path / "attest.json"
    path.write_text(json.dumps([spec]), encoding="utf-8")

    with pytest.raises(SchemaError) as e:
        load_attestations(str(path))

    assert e.value.location == "SG-t1/date"


def test_demo_assessment(demo_pipeline, sample_catalog):
    result = assess(demo_pipeline, sample_catalog)

    assert result.activities_with(Verdict.SATISFIED_AUTOMATED) == ["SI-t5", "SVV-t3"]
    assert result.activities_with(Verdict.SATISFIED_ATTESTED) == []
    assert result.activities_with(Verdict.PARTIALLY_COVERED) == []
    assert result.coverage_percent == 10
    assert result.evidence_manifest == (
        EvidenceRecord("SI-t5", "pipeline:Build/compile/static-analysis"),
        EvidenceRecord("SVV-t3", "pipeline:Test/security-tests/container-scan"),
    )


def test_demo_assessment_with_attestations(demo_pipeline, sample_catalog, demo_attestations):
    result = assess(demo_pipeline, sample_catalog, demo_attestations)

    assert result.verdict("SG-t1") == Verdict.SATISFIED_ATTESTED
    assert result.verdict("SI-t6") == Verdict.SATISFIED_ATTESTED
    assert result.verdict("SVV-t4") == Verdict.PARTIALLY_COVERED
    assert result.verdict("SI-t5") == Verdict.SATISFIED_AUTOMATED
    assert result.coverage_percent == 25
    assert EvidenceRecord("SVV-t4", "attestation:reports/pentest-2026-q1.pdf") in result.evidence_manifest


@pytest.mark.parametrize(
    "stage,attested,expected",
    [
        (PipelineStage.BUILD, False, Verdict.SATISFIED_AUTOMATED),
        (PipelineStage.BUILD, True, Verdict.SATISFIED_AUTOMATED),
        (PipelineStage.RELEASE, False, Verdict.PARTIALLY_COVERED),
        (PipelineStage.RELEASE, True, Verdict.SATISFIED_ATTESTED),
        (None, True, Verdict.SATISFIED_ATTESTED),
        (None, False, Verdict.GAP),
    ],
    ids=["in-stage", "in-stage-attested", "off-stage", "off-stage-attested", "attested", "nothing"],
)
def test_complete_activity_verdicts(sample_catalog, stage, attested, expected):
    # SVV-t3 runs trivy in Build or Test
    pipeline = PipelineModel("p", ())
    if stage is not None:
        pipeline = pipeline.with_step(stage, "job", "scan", "trivy")

    result = assess(pipeline, sample_catalog, [attest("SVV-t3")] if attested else [])

    assert result.verdict("SVV-t3") == expected


@pytest.mark.parametrize(
    "stage,attested,expected",
    [
        (PipelineStage.CODE, True, Verdict.SATISFIED_ATTESTED),
        (PipelineStage.CODE, False, Verdict.PARTIALLY_COVERED),
        (None, True, Verdict.PARTIALLY_COVERED),
        (PipelineStage.DEPLOY, False, Verdict.GAP),
        (None, False, Verdict.GAP),
    ],
    ids=["step-and-attestation", "step", "attestation", "off-stage", "nothing"],
)
def test_partial_automation_verdicts(sample_catalog, stage, attested, expected):
    # SM-t1 runs checkov in Code
    pipeline = PipelineModel("p", ())
    if stage is not None:
        pipeline = pipeline.with_step(stage, "job", "iac-scan", "checkov")

    result = assess(pipeline, sample_catalog, [attest("SM-t1")] if attested else [])

    assert result.verdict("SM-t1") == expected


def test_human_task_ignores_pipeline_steps(sample_catalog):
    pipeline = PipelineModel("p", ()).with_step(PipelineStage.CODE, "review", "review", "semgrep")

    assert assess(pipeline, sample_catalog).verdict("SI-t6") == Verdict.GAP
    assert assess(pipeline, sample_catalog, [attest("SI-t6")]).verdict("SI-t6") == Verdict.SATISFIED_ATTESTED


def test_tool_aliases_match(sample_catalog):
    pipeline = PipelineModel("p", ()).with_step(PipelineStage.OPERATE, "rollout", "deploy", "ansible-playbook")
    assert assess(pipeline, sample_catalog).verdict("SUM-t1") == Verdict.SATISFIED_AUTOMATED


def test_tool_names_must_match_exactly(sample_catalog):
    pipeline = PipelineModel("p", ()).with_step(PipelineStage.BUILD, "scan", "scan", "trivy-action")
    assert assess(pipeline, sample_catalog).verdict("SVV-t3") == Verdict.GAP


def test_tools_outside_ci_are_not_pipeline_evidence(sample_catalog):
    assert not next(tool for tool in sample_catalog.tools if tool.name == "threat-dragon").ci_integrable
    pipeline = PipelineModel("p", ()).with_step(PipelineStage.PLAN, "design", "threat-model", "threat-dragon")

    result = assess(pipeline, sample_catalog)

    assert result.verdict("SR-t2") == Verdict.GAP
    assert result.evidence_manifest == ()

    tools = tuple(replace(tool, ci_integrable=True) for tool in sample_catalog.tools)
    assert assess(pipeline, replace(sample_catalog, tools=tools)).verdict("SR-t2") == Verdict.PARTIALLY_COVERED


def test_empty_pipeline_without_attestations_is_all_gaps(sample_catalog):
    result = assess(PipelineModel("empty", ()), sample_catalog)

    assert result.coverage_percent == 0
    assert set(result.per_activity.values()) == {Verdict.GAP}
    assert result.evidence_manifest == ()


def test_attesting_everything_covers_everything(sample_catalog):
    everything = [attest(activity.id) for activity in sample_catalog.activities]

    result = assess(PipelineModel("empty", ()), sample_catalog, everything)

    assert result.coverage_percent == 100


def test_attestation_for_unknown_activity(demo_pipeline, sample_catalog):
    with pytest.raises(UnresolvedReferenceError) as e:
        assess(demo_pipeline, sample_catalog, [attest("SI-t99")])

    assert e.value.offenders == ["attestation for unknown activity 'SI-t99'"]


def test_coverage_report(demo_pipeline, sample_catalog, demo_attestations):
    rows = coverage_report(assess(demo_pipeline, sample_catalog, demo_attestations), sample_catalog)

    assert [row.scope for row in rows] == ["SM", "SR", "SD", "SI", "SVV", "DM", "SUM", "SG", "global"]
    by_scope = {row.scope: row for row in rows}
    assert by_scope["SG"].coverage_percent == 100
    assert by_scope["SI"].counts[Verdict.SATISFIED_AUTOMATED] == 1
    assert by_scope["global"].to_spec() == {
        "scope": "global",
        "total": 20,
        "counts": {"SatisfiedAutomated": 2, "SatisfiedAttested": 2, "PartiallyCovered": 1, "Gap": 15},
        "coverage_percent": 25,
    }


def test_export_is_byte_identical(demo_pipeline, sample_catalog, demo_attestations):
    first = export_result(assess(demo_pipeline, sample_catalog, demo_attestations))
    second = export_result(assess(demo_pipeline, sample_catalog, demo_attestations))

    assert first == second
    assert first.endswith("}\n")
    document = json.loads(first)
    assert document["schema"] == "s2c-assessment/1"
    assert document["verdicts"]["SI-t5"] == "SatisfiedAutomated"


@given(assessment_inputs())
def test_without_attestations_nothing_is_attested(inputs):
    catalog, pipeline, _ = inputs
    result = assess(pipeline, catalog)
    assert result.activities_with(Verdict.SATISFIED_ATTESTED) == []


@given(assessment_inputs())
def test_every_activity_gets_a_verdict(inputs):
    catalog, pipeline, attested = inputs

    result = assess(pipeline, catalog, attested)

    assert list(result.per_activity) == [activity.id for activity in catalog.activities]
    covered = [activity_id for activity_id, verdict in result.per_activity.items() if verdict.covered]
    assert {record.activity_id for record in result.evidence_manifest} == set(covered)


@settings(max_examples=500)
@given(assessment_inputs(), st.data())
def test_adding_evidence_never_lowers_a_verdict(inputs, data):
    catalog, pipeline, attested = inputs
    before = assess(pipeline, catalog, attested)

    if data.draw(st.booleans(), label="add attestation"):
        attested = attested + [data.draw(attestations(catalog))]
    else:
        stage, job, name, tool = data.draw(steps(catalog))
        pipeline = pipeline.with_step(stage, job, name, tool)
    after = assess(pipeline, catalog, attested)

    for activity_id, verdict in before.per_activity.items():
        assert after.verdict(activity_id).rank >= verdict.rank
    assert after.coverage_percent >= before.coverage_percent
