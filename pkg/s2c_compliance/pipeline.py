import datetime
import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from typing import Dict
from typing import FrozenSet
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Optional
from typing import Tuple

from s2c_compliance.automation import GLOBAL_SCOPE
from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.errors import SchemaError
from s2c_compliance.errors import StageError
from s2c_compliance.errors import UnresolvedReferenceError
from s2c_compliance.helpers.rounding import half_up_percent
from s2c_compliance.helpers.spec import canonical_json
from s2c_compliance.helpers.spec import check_schema
from s2c_compliance.helpers.spec import load_json_document
from s2c_compliance.helpers.spec import load_yaml_document
from s2c_compliance.tool_matcher import ToolMatcher
from s2c_compliance.types import AutomationLevel
from s2c_compliance.types import PipelineStage
from s2c_compliance.types import Spec
from s2c_compliance.types import activity_sort_key

logger = logging.getLogger(__name__)

PIPELINE_SCHEMA = "s2c-pipeline/1"
PIPELINE_SCHEMA_FILE = "pipeline.schema.json"
ATTEST_SCHEMA = "s2c-attest/1"
ATTEST_SCHEMA_FILE = "attest.schema.json"
ASSESSMENT_SCHEMA = "s2c-assessment/1"


@dataclass(frozen=True)
class PipelineStep:
    """``order`` is the 1-based position of the step within its stage block."""

    name: str
    tool: Optional[str]
    produces: FrozenSet[str]
    order: int

    def to_spec(self) -> Spec:
        return {"name": self.name, "tool": self.tool, "produces": sorted(self.produces)}


@dataclass(frozen=True)
class PipelineJob:
    name: str
    steps: Tuple[PipelineStep, ...]

    def to_spec(self) -> Spec:
        return {"name": self.name, "steps": [step.to_spec() for step in self.steps]}


@dataclass(frozen=True)
class StageBlock:
    stage: PipelineStage
    jobs: Tuple[PipelineJob, ...]

    def to_spec(self) -> Spec:
        return {"stage": self.stage.value, "jobs": [job.to_spec() for job in self.jobs]}


@dataclass(frozen=True)
class StepInvocation:
    """A step together with where it runs. ``reference`` is how evidence points at it."""

    stage: PipelineStage
    job: str
    step: PipelineStep

    @property
    def reference(self) -> str:
        return f"pipeline:{self.stage.value}/{self.job}/{self.step.name}"


@dataclass(frozen=True)
class PipelineModel:
    name: str
    stages: Tuple[StageBlock, ...]

    def iter_steps(self) -> Iterator[StepInvocation]:
        for block in self.stages:
            for job in block.jobs:
                for step in job.steps:
                    yield StepInvocation(block.stage, job.name, step)

    def with_step(
        self,
        stage: PipelineStage,
        job: str,
        name: str,
        tool: Optional[str],
        produces: Iterable[str] = (),
    ) -> "PipelineModel":
        """A copy with one more step, appended to the last block of ``stage`` (created if absent)."""
        blocks = list(self.stages)
        index = max((i for i, block in enumerate(blocks) if block.stage == stage), default=None)
        if index is None:
            blocks.append(StageBlock(stage, ()))
            index = len(blocks) - 1

        block = blocks[index]
        order = sum(len(j.steps) for j in block.jobs) + 1
        step = PipelineStep(name, tool, frozenset(produces), order)

        jobs = list(block.jobs)
        for i, existing in enumerate(jobs):
            if existing.name == job:
                jobs[i] = replace(existing, steps=existing.steps + (step,))
                break
        else:
            jobs.append(PipelineJob(job, (step,)))

        blocks[index] = replace(block, jobs=tuple(jobs))
        return replace(self, stages=tuple(blocks))

    @classmethod
    def from_spec(cls, spec: Spec) -> "PipelineModel":
        blocks = []
        for stage_spec in spec.get("stages") or []:
            stage = PipelineStage.from_name(stage_spec["stage"])
            if stage is None:
                raise StageError(stage_spec["stage"], PipelineStage.accepted_names())

            order = 0
            jobs = []
            for job_spec in stage_spec.get("jobs") or []:
                steps = []
                for step_spec in job_spec.get("steps") or []:
                    order += 1
                    steps.append(
                        PipelineStep(
                            name=step_spec["name"],
                            tool=step_spec.get("tool"),
                            produces=frozenset(step_spec.get("produces") or []),
                            order=order,
                        ),
                    )
                jobs.append(PipelineJob(job_spec["name"], tuple(steps)))

            blocks.append(StageBlock(stage, tuple(jobs)))

        return PipelineModel(name=spec["name"], stages=tuple(blocks))

    def to_spec(self) -> Spec:
        return {
            "schema": PIPELINE_SCHEMA,
            "name": self.name,
            "stages": [block.to_spec() for block in self.stages],
        }


def parse_pipeline(path: str) -> PipelineModel:
    """Loads a normalized pipeline document (YAML or JSON)."""
    document = load_yaml_document(path)
    check_schema(document, PIPELINE_SCHEMA_FILE)

    pipeline = PipelineModel.from_spec(document)
    logger.debug(
        "Parsed pipeline %s from %s: %d stage blocks, %d steps",
        pipeline.name,
        path,
        len(pipeline.stages),
        sum(1 for _ in pipeline.iter_steps()),
    )
    return pipeline


@dataclass(frozen=True)
class Attestation:
    activity_id: str
    attested_by: str
    date: datetime.date
    evidence_ref: str

    @property
    def reference(self) -> str:
        return f"attestation:{self.evidence_ref}"

    @classmethod
    def from_spec(cls, spec: Spec) -> "Attestation":
        try:
            attested_on = datetime.date.fromisoformat(spec["date"])
        except ValueError as e:
            raise SchemaError(f"invalid ISO-8601 date '{spec['date']}'", location=f"{spec['activity']}/date") from e

        return Attestation(
            activity_id=spec["activity"],
            attested_by=spec["attested_by"],
            date=attested_on,
            evidence_ref=spec["evidence_ref"],
        )

    def to_spec(self) -> Spec:
        return {
            "activity": self.activity_id,
            "attested_by": self.attested_by,
            "date": self.date.isoformat(),
            "evidence_ref": self.evidence_ref,
        }


def load_attestations(path: str) -> List[Attestation]:
    document = load_json_document(path)
    check_schema(document, ATTEST_SCHEMA_FILE)

    if isinstance(document, dict):
        document = document["attestations"]

    attestations = [Attestation.from_spec(spec) for spec in document]
    logger.debug("Loaded %d attestations from %s", len(attestations), path)
    return attestations


class Verdict(Enum):
    SATISFIED_AUTOMATED = "SatisfiedAutomated"
    SATISFIED_ATTESTED = "SatisfiedAttested"
    PARTIALLY_COVERED = "PartiallyCovered"
    GAP = "Gap"

    @property
    def rank(self) -> int:
        """Gap < PartiallyCovered < SatisfiedAttested < SatisfiedAutomated."""
        return _VERDICT_RANKS[self]

    @property
    def covered(self) -> bool:
        return self != Verdict.GAP


_VERDICT_RANKS = {
    Verdict.GAP: 0,
    Verdict.PARTIALLY_COVERED: 1,
    Verdict.SATISFIED_ATTESTED: 2,
    Verdict.SATISFIED_AUTOMATED: 3,
}


@dataclass(frozen=True)
class EvidenceRecord:
    activity_id: str
    reference: str

    def to_spec(self) -> Spec:
        return {"activity": self.activity_id, "reference": self.reference}


@dataclass(frozen=True)
class AssessmentResult:
    pipeline_name: str
    standard_id: str
    catalog_version: str
    per_activity: Dict[str, Verdict]
    coverage_percent: int
    evidence_manifest: Tuple[EvidenceRecord, ...]

    def verdict(self, activity_id: str) -> Verdict:
        return self.per_activity[activity_id]

    def activities_with(self, verdict: Verdict) -> List[str]:
        return [activity_id for activity_id, v in self.per_activity.items() if v == verdict]

    def to_spec(self) -> Spec:
        return {
            "schema": ASSESSMENT_SCHEMA,
            "pipeline": self.pipeline_name,
            "standard_id": self.standard_id,
            "catalog_version": self.catalog_version,
            "coverage_percent": self.coverage_percent,
            "verdicts": {activity_id: verdict.value for activity_id, verdict in self.per_activity.items()},
            "evidence_manifest": [record.to_spec() for record in self.evidence_manifest],
        }


def assess(
    pipeline: PipelineModel,
    catalog: ActivityCatalog,
    attestations: Iterable[Attestation] = (),
) -> AssessmentResult:
    """One verdict per catalog activity.

    * Complete: a matching tool step in one of the activity's stages is SatisfiedAutomated;
      otherwise an attestation is SatisfiedAttested; otherwise a matching step in another
      stage is PartiallyCovered.
    * PartialAutomation / Transparency: an in-stage matching step plus an attestation is
      SatisfiedAttested; either one alone is PartiallyCovered.
    * HumanTask / ToolPossible: an attestation is SatisfiedAttested.

    Everything else is a Gap. Registry tools with ``ci_integrable`` false match no step.
    """
    attestations = list(attestations)
    unknown = sorted({a.activity_id for a in attestations if catalog.activity(a.activity_id) is None})
    if unknown:
        raise UnresolvedReferenceError(f"attestation for unknown activity '{activity_id}'" for activity_id in unknown)

    attested: Dict[str, List[Attestation]] = {}
    for attestation in attestations:
        attested.setdefault(attestation.activity_id, []).append(attestation)

    # Tools that cannot run in CI are never pipeline evidence
    outside_ci = {tool.name for tool in catalog.tools if not tool.ci_integrable}
    matchers = {tool.name: ToolMatcher.from_tool(tool) for tool in catalog.tools if tool.ci_integrable}
    invocations = [invocation for invocation in pipeline.iter_steps() if invocation.step.tool]
    if outside_ci:
        logger.debug("Not matching tools outside CI: %s", ", ".join(sorted(outside_ci)))

    per_activity: Dict[str, Verdict] = {}
    evidence: List[EvidenceRecord] = []
    for activity in catalog.activities:
        tool_matchers = [
            matchers.get(name) or ToolMatcher.for_name(name) for name in sorted(activity.tools - outside_ci)
        ]
        matching = [
            invocation
            for invocation in invocations
            if any(matcher.matches(invocation.step.tool) for matcher in tool_matchers)
        ]
        verdict, references = _judge(activity, matching, attested.get(activity.id, []))
        per_activity[activity.id] = verdict
        evidence += [EvidenceRecord(activity.id, reference) for reference in sorted(set(references))]

    covered = sum(1 for verdict in per_activity.values() if verdict.covered)
    result = AssessmentResult(
        pipeline_name=pipeline.name,
        standard_id=catalog.standard_id,
        catalog_version=catalog.version,
        per_activity=per_activity,
        coverage_percent=half_up_percent(covered, len(per_activity)) if per_activity else 0,
        evidence_manifest=tuple(evidence),
    )
    logger.info(
        "Assessed pipeline %s against %s: %d of %d activities covered (%d%%)",
        pipeline.name,
        catalog.standard_id,
        covered,
        len(per_activity),
        result.coverage_percent,
    )
    return result


def _judge(
    activity: Activity,
    matching: List[StepInvocation],
    attestations: List[Attestation],
) -> Tuple[Verdict, List[str]]:
    in_stage = [invocation.reference for invocation in matching if invocation.stage in activity.stages]
    off_stage = [invocation.reference for invocation in matching if invocation.stage not in activity.stages]
    attested = [attestation.reference for attestation in attestations]
    level = activity.automation

    if level == AutomationLevel.COMPLETE:
        if in_stage:
            return Verdict.SATISFIED_AUTOMATED, in_stage
        if attested:
            return Verdict.SATISFIED_ATTESTED, attested
        if off_stage:
            return Verdict.PARTIALLY_COVERED, off_stage

    elif level in (AutomationLevel.PARTIAL_AUTOMATION, AutomationLevel.TRANSPARENCY):
        if in_stage and attested:
            return Verdict.SATISFIED_ATTESTED, in_stage + attested
        if in_stage or attested:
            return Verdict.PARTIALLY_COVERED, in_stage + attested

    elif attested:
        return Verdict.SATISFIED_ATTESTED, attested

    return Verdict.GAP, []


@dataclass(frozen=True)
class CoverageRow:
    scope: str
    counts: Dict[Verdict, int]
    total: int
    coverage_percent: int

    @classmethod
    def of(cls, scope: str, verdicts: List[Verdict]) -> "CoverageRow":
        counts = {verdict: 0 for verdict in Verdict}
        for verdict in verdicts:
            counts[verdict] += 1

        total = len(verdicts)
        covered = total - counts[Verdict.GAP]
        return CoverageRow(
            scope=scope,
            counts=counts,
            total=total,
            coverage_percent=half_up_percent(covered, total) if total else 0,
        )

    def to_spec(self) -> Spec:
        return {
            "scope": self.scope,
            "total": self.total,
            "counts": {verdict.value: self.counts[verdict] for verdict in Verdict},
            "coverage_percent": self.coverage_percent,
        }


def coverage_report(result: AssessmentResult, catalog: ActivityCatalog) -> List[CoverageRow]:
    """One row per practice with activities, in catalog order, then the global row."""
    rows = []
    for practice in catalog.practices:
        ids = [activity.id for activity in catalog.activities_of(practice.code)]
        if ids:
            rows.append(CoverageRow.of(practice.code, [result.per_activity[activity_id] for activity_id in ids]))

    ordered_ids = sorted(result.per_activity, key=activity_sort_key)
    rows.append(CoverageRow.of(GLOBAL_SCOPE, [result.per_activity[activity_id] for activity_id in ordered_ids]))
    return rows


def export_result(result: AssessmentResult) -> str:
    return canonical_json(result.to_spec())
