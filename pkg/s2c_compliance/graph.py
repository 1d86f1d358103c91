import json
import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from typing import Dict
from typing import FrozenSet
from typing import Iterable
from typing import List
from typing import Tuple

import networkx as nx

from s2c_compliance.catalog import Activity
from s2c_compliance.catalog import ActivityCatalog
from s2c_compliance.types import PipelineStage
from s2c_compliance.types import SortKey
from s2c_compliance.types import Spec
from s2c_compliance.types import activity_sort_key

logger = logging.getLogger(__name__)


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"

    @property
    def rank(self) -> int:
        return list(Severity).index(self)


UNRESOLVED_REFERENCE = "UNRESOLVED_REFERENCE"
DANGLING_INPUT = "DANGLING_INPUT"
STAGE_ORDER = "STAGE_ORDER"
TERMINAL_OUTPUT = "TERMINAL_OUTPUT"
CYCLE = "CYCLE"
UNUSED_EXTERNAL = "UNUSED_EXTERNAL"

FINDING_TABLE: Dict[str, Severity] = {
    UNRESOLVED_REFERENCE: Severity.ERROR,
    DANGLING_INPUT: Severity.WARNING,
    STAGE_ORDER: Severity.WARNING,
    TERMINAL_OUTPUT: Severity.INFO,
    CYCLE: Severity.INFO,
    UNUSED_EXTERNAL: Severity.INFO,
}


@dataclass(frozen=True)
class ValidationFinding:
    severity: Severity
    code: str
    subject: str
    message: str

    @classmethod
    def of(cls, code: str, subject: str, message: str) -> "ValidationFinding":
        return ValidationFinding(FINDING_TABLE[code], code, subject, message)

    @property
    def sort_key(self) -> Tuple[int, SortKey, str, str]:
        return self.severity.rank, activity_sort_key(self.subject), self.code, self.message

    def to_spec(self) -> Spec:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "subject": self.subject,
            "message": self.message,
        }


@dataclass(frozen=True)
class Edge:
    producer: str
    consumer: str
    artifact: str


@dataclass(frozen=True)
class OrchestrationGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    external_inputs: FrozenSet[str]
    findings: Tuple[ValidationFinding, ...]

    def to_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        for edge in self.edges:
            graph.add_edge(edge.producer, edge.consumer)
        return graph

    def cycles(self) -> List[List[str]]:
        """Strongly connected components that hold a cycle, members in id order."""
        graph = self.to_digraph()
        components = []
        for component in nx.strongly_connected_components(graph):
            members = sorted(component, key=activity_sort_key)
            if len(members) > 1 or graph.has_edge(members[0], members[0]):
                components.append(members)

        return sorted(components, key=lambda members: activity_sort_key(members[0]))


def build_graph(catalog: ActivityCatalog, declared_external: Iterable[str] = frozenset()) -> OrchestrationGraph:
    """Joins activities on artifact names: an edge per (producer, consumer, artifact)."""
    declared = frozenset(declared_external)
    producers = _index(catalog.activities, lambda activity: activity.outputs)
    consumers = _index(catalog.activities, lambda activity: activity.inputs)

    edges = sorted(
        (
            Edge(producer, consumer, artifact)
            for artifact in producers.keys() & consumers.keys()
            for producer in producers[artifact]
            for consumer in consumers[artifact]
        ),
        key=lambda edge: (activity_sort_key(edge.producer), activity_sort_key(edge.consumer), edge.artifact),
    )

    findings: List[ValidationFinding] = []
    for artifact in sorted(consumers.keys() - producers.keys() - declared):
        findings.append(
            ValidationFinding.of(
                DANGLING_INPUT,
                artifact,
                f"'{artifact}' is consumed by {', '.join(consumers[artifact])} but no activity produces it "
                "and it is not declared external",
            ),
        )

    for artifact in sorted(producers.keys() - consumers.keys()):
        findings.append(
            ValidationFinding.of(
                TERMINAL_OUTPUT,
                artifact,
                f"'{artifact}' is produced by {', '.join(producers[artifact])} but no activity consumes it",
            ),
        )

    for artifact in sorted(declared - consumers.keys()):
        findings.append(
            ValidationFinding.of(UNUSED_EXTERNAL, artifact, f"'{artifact}' is declared external but never consumed"),
        )

    graph = OrchestrationGraph(
        nodes=tuple(activity.id for activity in catalog.activities),
        edges=tuple(edges),
        external_inputs=frozenset((consumers.keys() - producers.keys()) & declared),
        findings=(),
    )

    for members in graph.cycles():
        findings.append(
            ValidationFinding.of(CYCLE, members[0], "activities form a feedback cycle: " + ", ".join(members)),
        )

    logger.debug("Built orchestration graph: %d nodes, %d edges", len(graph.nodes), len(graph.edges))
    return replace(graph, findings=tuple(sort_findings(findings)))


def check_stage_consistency(graph: OrchestrationGraph, catalog: ActivityCatalog) -> List[ValidationFinding]:
    """STAGE_ORDER warnings for artifacts that flow to an earlier pipeline stage.

    Stages compare by each activity's earliest stage. Feedback from Monitor back to
    Plan is exempt, directly or along a cycle that spans both.
    """
    component_of: Dict[str, FrozenSet[str]] = {}
    for members in graph.cycles():
        component = frozenset(members)
        for member in members:
            component_of[member] = component

    findings: List[ValidationFinding] = []
    for edge in graph.edges:
        producer = catalog.activity(edge.producer)
        consumer = catalog.activity(edge.consumer)
        if producer is None or consumer is None:
            continue

        producer_stage, consumer_stage = producer.earliest_stage, consumer.earliest_stage
        if producer_stage is None or consumer_stage is None or consumer_stage.index >= producer_stage.index:
            continue

        if _is_feedback(producer, consumer, component_of, catalog):
            continue

        findings.append(
            ValidationFinding.of(
                STAGE_ORDER,
                consumer.id,
                f"{consumer.id} ({consumer_stage.value}) consumes '{edge.artifact}' from "
                f"{producer.id} ({producer_stage.value}), which runs later in the pipeline",
            ),
        )

    return sort_findings(findings)


def _is_feedback(
    producer: Activity,
    consumer: Activity,
    component_of: Dict[str, FrozenSet[str]],
    catalog: ActivityCatalog,
) -> bool:
    if PipelineStage.MONITOR in producer.stages and PipelineStage.PLAN in consumer.stages:
        return True

    component = component_of.get(producer.id)
    if component is None or consumer.id not in component:
        return False

    stages = set()
    for member in component:
        activity = catalog.activity(member)
        if activity is not None:
            stages |= activity.stages

    return PipelineStage.MONITOR in stages and PipelineStage.PLAN in stages


def sort_findings(findings: Iterable[ValidationFinding]) -> List[ValidationFinding]:
    return sorted(findings, key=lambda finding: finding.sort_key)


def promote_warnings(findings: Iterable[ValidationFinding]) -> List[ValidationFinding]:
    """Strict mode: every Warning becomes an Error."""
    return sort_findings(
        replace(finding, severity=Severity.ERROR) if finding.severity == Severity.WARNING else finding
        for finding in findings
    )


def findings_to_json_lines(findings: Iterable[ValidationFinding]) -> str:
    return "".join(json.dumps(finding.to_spec(), ensure_ascii=False) + "\n" for finding in findings)


def _index(activities: Iterable[Activity], artifacts_of) -> Dict[str, List[str]]:
    """artifact name -> ids of the activities that list it, in id order."""
    index: Dict[str, List[str]] = {}
    for activity in activities:
        for artifact in artifacts_of(activity):
            index.setdefault(artifact, []).append(activity.id)

    for ids in index.values():
        ids.sort(key=activity_sort_key)
    return index
